//! Solution certificates, residual reports, and the `pskz-cert-v1` JSON format.
//!
//! A certificate file looks like
//!
//! ```json
//! {
//!   "schema": "pskz-cert-v1",
//!   "family": "hyper",
//!   "ring": { "p": 3, "s": 1, "r_num": 1, "r_den": 1 },
//!   "params": { "g": 1, "ell": 1 },
//!   "vars": ["z1", "z2", "z3", "lambda"],
//!   "components": [
//!     { "index": 1, "terms": [ { "exps": [0, 0, 0, 0], "coeff": ["1"] } ] }
//!   ]
//! }
//! ```
//!
//! Coefficients are decimal strings (one per power of `π`, `r_den` in all) and
//! terms are sorted lexicographically by exponent vector, so output is
//! byte-deterministic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::HyperParams;
use crate::mpoly::{MultiPoly, Var};
use crate::padic::RingParams;
use crate::qkz::QkzParams;
use crate::sl2::{BasisIndex, Sl2Params};

pub const SCHEMA: &str = "pskz-cert-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Hyper,
    Sl2,
    Qkz,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Hyper => "hyper",
            Family::Sl2 => "sl2",
            Family::Qkz => "qkz",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "hyper" => Some(Family::Hyper),
            "sl2" => Some(Family::Sl2),
            "qkz" => Some(Family::Qkz),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyParams {
    Hyper(HyperParams),
    Sl2(Sl2Params),
    Qkz(QkzParams),
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Hyper(_) => Family::Hyper,
            FamilyParams::Sl2(_) => Family::Sl2,
            FamilyParams::Qkz(_) => Family::Qkz,
        }
    }

    pub fn ring(&self) -> RingParams {
        match self {
            FamilyParams::Hyper(h) => h.ring(),
            FamilyParams::Sl2(s) => s.ring(),
            FamilyParams::Qkz(q) => q.ring(),
        }
    }

    /// Variables every component is expressed in.
    fn expected_vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = match self {
            FamilyParams::Hyper(h) => (0..h.n()).map(Var::z).collect(),
            FamilyParams::Sl2(s) => (0..s.n()).map(Var::z).collect(),
            FamilyParams::Qkz(_) => vec![Var::Z],
        };
        vars.push(Var::Lambda);
        vars
    }
}

/// Which coordinate a component is: a slot `1..=n` or an `sl_2` basis index `J`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentIndex {
    Slot(u32),
    Basis(Vec<u32>),
}

impl fmt::Display for ComponentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentIndex::Slot(i) => write!(f, "{i}"),
            ComponentIndex::Basis(j) => {
                let parts: Vec<String> = j.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub index: ComponentIndex,
    pub poly: MultiPoly,
}

/// A constructed solution together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionCertificate {
    params: FamilyParams,
    vars: Vec<Var>,
    components: Vec<Component>,
}

impl SolutionCertificate {
    /// Wrap components; every polynomial is re-expressed over a common variable list.
    pub fn new(params: FamilyParams, components: Vec<Component>) -> Result<Self> {
        let ring = params.ring();
        let mut vars = params.expected_vars();
        for c in &components {
            if c.poly.ring() != ring {
                return Err(Error::RingMismatch);
            }
            for v in c.poly.vars() {
                if !vars.contains(v) {
                    vars.push(*v);
                }
            }
        }
        vars.sort();
        let components = components
            .into_iter()
            .map(|c| Component {
                index: c.index,
                poly: c.poly.embed(&vars),
            })
            .collect();
        Ok(SolutionCertificate {
            params,
            vars,
            components,
        })
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn ring(&self) -> RingParams {
        self.params.ring()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn polys(&self) -> Vec<MultiPoly> {
        self.components.iter().map(|c| c.poly.clone()).collect()
    }

    /// True when every component is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.poly.is_zero())
    }

    /// Replace one component's polynomial (used to build corrupted certificates in tests).
    pub fn with_component(&self, index: &ComponentIndex, poly: MultiPoly) -> Result<Self> {
        let mut comps = self.components.clone();
        let slot = comps
            .iter_mut()
            .find(|c| &c.index == index)
            .ok_or_else(|| Error::OutOfRange(format!("no component with index {index}")))?;
        slot.poly = poly;
        SolutionCertificate::new(self.params.clone(), comps)
    }

    pub(crate) fn expect_family(&self, family: Family) -> Result<()> {
        if self.family() != family {
            return Err(Error::WrongFamily {
                expected: family.to_string(),
                found: self.family().to_string(),
            });
        }
        Ok(())
    }

    /// One-line description: family, component count, maximal degrees.
    pub fn summary(&self) -> String {
        let mut degs = Vec::new();
        for v in &self.vars {
            let d = self
                .components
                .iter()
                .map(|c| c.poly.degree_in(*v))
                .max()
                .unwrap_or(-1);
            degs.push(format!("{v}:{d}"));
        }
        let terms: usize = self.components.iter().map(|c| c.poly.len()).sum();
        format!(
            "family={} ring={} components={} terms={} max_degrees=[{}]",
            self.family(),
            self.ring(),
            self.components.len(),
            terms,
            degs.join(" ")
        )
    }

    pub fn to_file(&self) -> CertificateFile {
        let ring = self.ring();
        let params = match &self.params {
            FamilyParams::Hyper(h) => serde_json::to_value(HyperParamsJson {
                g: h.g(),
                ell: h.ell(),
            }),
            FamilyParams::Sl2(s) => serde_json::to_value(Sl2ParamsJson::from(s)),
            FamilyParams::Qkz(_) => serde_json::to_value(QkzParamsJson {}),
        }
        .expect("params serialize");
        CertificateFile {
            schema: SCHEMA.to_string(),
            family: self.family().as_str().to_string(),
            ring: RingJson {
                p: ring.p(),
                s: ring.s(),
                r_num: ring.r_num(),
                r_den: ring.r_den(),
            },
            params,
            vars: self.vars.iter().map(|v| v.name()).collect(),
            components: self
                .components
                .iter()
                .map(|c| ComponentJson {
                    index: c.index.clone(),
                    terms: c
                        .poly
                        .terms()
                        .map(|(e, k)| TermJson {
                            exps: e.iter().map(|&x| x as u32).collect(),
                            coeff: k.iter().map(|x| x.to_string()).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_certificate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingJson {
    pub p: u64,
    pub s: u32,
    pub r_num: u64,
    pub r_den: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub coeff: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub index: ComponentIndex,
    pub terms: Vec<TermJson>,
}

/// On-disk certificate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema: String,
    pub family: String,
    pub ring: RingJson,
    pub params: serde_json::Value,
    pub vars: Vec<String>,
    pub components: Vec<ComponentJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperParamsJson {
    g: u32,
    ell: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QkzParamsJson {}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sl2ParamsJson {
    kappa_num: i64,
    kappa_den: i64,
    m: Vec<u32>,
    k: u32,
    ell: Vec<u32>,
    #[serde(rename = "M")]
    m_slot: Vec<u64>,
    #[serde(rename = "M_pair")]
    m_pair: Vec<[u64; 3]>,
    #[serde(rename = "M0")]
    m_zero: u64,
}

impl From<&Sl2Params> for Sl2ParamsJson {
    fn from(s: &Sl2Params) -> Self {
        let (kappa_num, kappa_den) = s.kappa();
        let n = s.n();
        let mut m_pair = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                m_pair.push([i as u64 + 1, j as u64 + 1, s.m_pair(i, j)]);
            }
        }
        Sl2ParamsJson {
            kappa_num,
            kappa_den,
            m: s.m().to_vec(),
            k: s.k(),
            ell: s.ell().to_vec(),
            m_slot: s.m_slot().to_vec(),
            m_pair,
            m_zero: s.m_zero(),
        }
    }
}

fn format_err<E: fmt::Display>(e: E) -> Error {
    Error::Format(e.to_string())
}

impl CertificateFile {
    pub fn into_certificate(self) -> Result<SolutionCertificate> {
        if self.schema != SCHEMA {
            return Err(Error::Format(format!(
                "schema must be \"{SCHEMA}\", found \"{}\"",
                self.schema
            )));
        }
        let family = Family::parse(&self.family)
            .ok_or_else(|| Error::Format(format!("unknown family \"{}\"", self.family)))?;
        let ring = RingParams::new(self.ring.p, self.ring.s, self.ring.r_num, self.ring.r_den)?;
        let params = match family {
            Family::Hyper => {
                let h: HyperParamsJson = serde_json::from_value(self.params).map_err(format_err)?;
                FamilyParams::Hyper(HyperParams::new(ring, h.g, h.ell)?)
            }
            Family::Sl2 => {
                let j: Sl2ParamsJson = serde_json::from_value(self.params).map_err(format_err)?;
                let n = j.m.len();
                let mut pair = vec![vec![0u64; n]; n];
                for [i, k, v] in &j.m_pair {
                    let (i, k) = (*i as usize, *k as usize);
                    if i == 0 || k <= i || k > n {
                        return Err(Error::Format(format!("bad M_pair index ({i},{k})")));
                    }
                    pair[i - 1][k - 1] = *v;
                }
                let params = Sl2Params::new(ring, (j.kappa_num, j.kappa_den), j.m, j.k, j.ell)?
                    .with_exponents(Some(j.m_slot), Some(pair), Some(j.m_zero))?;
                FamilyParams::Sl2(params)
            }
            Family::Qkz => {
                let _: QkzParamsJson = serde_json::from_value(self.params).map_err(format_err)?;
                FamilyParams::Qkz(QkzParams::new(ring))
            }
        };
        let vars: Vec<Var> = self
            .vars
            .iter()
            .map(|name| {
                Var::parse(name).ok_or_else(|| Error::Format(format!("unknown variable \"{name}\"")))
            })
            .collect::<Result<_>>()?;
        let mut sorted = vars.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != vars {
            return Err(Error::Format(
                "vars must be distinct and in canonical order".into(),
            ));
        }
        let w = ring.width();
        let mut components = Vec::with_capacity(self.components.len());
        for c in self.components {
            let mut terms = Vec::with_capacity(c.terms.len());
            for t in c.terms {
                if t.exps.len() != vars.len() {
                    return Err(Error::Format(format!(
                        "term has {} exponents for {} variables",
                        t.exps.len(),
                        vars.len()
                    )));
                }
                if t.exps.iter().any(|&e| e > u16::MAX as u32) {
                    return Err(Error::Format("exponent too large".into()));
                }
                if t.coeff.len() != w {
                    return Err(Error::Format(format!(
                        "coefficient needs {w} entries, found {}",
                        t.coeff.len()
                    )));
                }
                let mut coeff = Vec::with_capacity(w);
                for s in &t.coeff {
                    let x: u64 = s
                        .parse()
                        .map_err(|_| Error::Format(format!("bad coefficient \"{s}\"")))?;
                    if x >= ring.modulus() {
                        return Err(Error::Format(format!(
                            "coefficient {x} is not reduced modulo {}",
                            ring.modulus()
                        )));
                    }
                    coeff.push(x);
                }
                terms.push((t.exps, coeff));
            }
            components.push(Component {
                index: c.index,
                poly: MultiPoly::from_terms(ring, &vars, terms),
            });
        }
        validate_indices(&params, &components)?;
        SolutionCertificate::new(params, components)
    }
}

fn validate_indices(params: &FamilyParams, components: &[Component]) -> Result<()> {
    let expected: Vec<ComponentIndex> = match params {
        FamilyParams::Hyper(h) => (1..=h.n() as u32).map(ComponentIndex::Slot).collect(),
        FamilyParams::Sl2(s) => s
            .basis()
            .into_iter()
            .map(|j: BasisIndex| ComponentIndex::Basis(j.0))
            .collect(),
        FamilyParams::Qkz(_) => vec![ComponentIndex::Slot(1)],
    };
    let found: Vec<ComponentIndex> = components.iter().map(|c| c.index.clone()).collect();
    if found != expected {
        return Err(Error::Format(format!(
            "component indices do not match the {} family layout",
            params.family()
        )));
    }
    Ok(())
}

/// A single term rendered for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportTerm {
    pub exps: Vec<u32>,
    pub coeff: Vec<String>,
}

/// Residual of one equation (or one basis component of a vector equation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationResidual {
    pub equation: String,
    pub zero: bool,
    pub nonzero_terms: usize,
    /// Lexicographically lowest offending term, when the residual is nonzero.
    pub lowest_term: Option<ReportTerm>,
    #[serde(skip)]
    pub residual: MultiPoly,
}

impl EquationResidual {
    pub fn new(equation: impl Into<String>, residual: MultiPoly) -> Self {
        let lowest_term = residual.lowest_term().map(|(exps, c)| ReportTerm {
            exps,
            coeff: c.coeffs().iter().map(|x| x.to_string()).collect(),
        });
        EquationResidual {
            equation: equation.into(),
            zero: residual.is_zero(),
            nonzero_terms: residual.len(),
            lowest_term,
            residual,
        }
    }
}

/// Result of running a verifier over a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    pub family: String,
    pub check: String,
    pub vars: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub equations: Vec<EquationResidual>,
}

impl ResidualReport {
    pub fn new(family: Family, check: &str, vars: &[Var], equations: Vec<EquationResidual>) -> Self {
        ResidualReport {
            family: family.to_string(),
            check: check.to_string(),
            vars: vars.iter().map(|v| v.name()).collect(),
            note: None,
            equations,
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }

    pub fn all_zero(&self) -> bool {
        self.equations.iter().all(|e| e.zero)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EquationResidual> {
        self.equations.iter().filter(|e| !e.zero)
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bad = self.failures().count();
        writeln!(
            f,
            "{} {}: {} equations, {} nonzero",
            self.family,
            self.check,
            self.equations.len(),
            bad
        )?;
        if let Some(note) = &self.note {
            writeln!(f, "  note: {note}")?;
        }
        for e in self.failures() {
            write!(f, "  {}: {} nonzero terms", e.equation, e.nonzero_terms)?;
            if let Some(t) = &e.lowest_term {
                write!(
                    f,
                    ", lowest term exps={:?} coeff=[{}] over ({})",
                    t.exps,
                    t.coeff.join(","),
                    self.vars.join(",")
                )?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
