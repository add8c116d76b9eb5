use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use pskz::hyper::{
    independence_check, lambda_zero_sum, vanishing_check, verify_dynamical, verify_kz,
    HyperParams, VanishingOutcome,
};
use pskz::qkz::verify_qkz;
use pskz::sl2::verify_sl2;
use pskz::{FamilyParams, ResidualReport, SolutionCertificate};

#[derive(Args)]
pub struct VerifyArgs {
    file: PathBuf,
    /// Also check the sum identity, vanishing and independence (hyper only).
    #[arg(long)]
    properties: bool,
    /// Print a machine-readable report.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Serialize)]
pub struct Property {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Serialize)]
struct Output<'a> {
    file: String,
    family: String,
    verified: bool,
    reports: &'a [ResidualReport],
    properties: &'a [Property],
}

/// Residual reports for the certificate's family.
pub fn residuals(cert: &SolutionCertificate) -> pskz::Result<Vec<ResidualReport>> {
    Ok(match cert.params() {
        FamilyParams::Hyper(_) => vec![verify_kz(cert)?, verify_dynamical(cert)?],
        FamilyParams::Sl2(_) => vec![verify_sl2(cert)?],
        FamilyParams::Qkz(_) => vec![verify_qkz(cert)?],
    })
}

fn hyper_properties(cert: &SolutionCertificate, params: &HyperParams) -> pskz::Result<Vec<Property>> {
    let mut out = Vec::new();
    let sum = lambda_zero_sum(cert)?;
    out.push(Property {
        name: "sum",
        status: if sum.is_zero() { Status::Pass } else { Status::Fail },
        detail: format!("sum of I_j(z,0) has {} nonzero terms", sum.len()),
    });

    let (status, detail) = match vanishing_check(params, 2)? {
        VanishingOutcome::Inapplicable => {
            (Status::Skipped, "vanishing inequality does not hold".to_string())
        }
        VanishingOutcome::Verified(ells) => (Status::Pass, format!("I^l = 0 for l in {ells:?}")),
        VanishingOutcome::Failed(ell) => (Status::Fail, format!("I^{ell} is nonzero")),
    };
    out.push(Property { name: "vanishing", status, detail });

    let ring = params.ring();
    let (status, detail) = if ring.r_den() != 1 {
        (Status::Skipped, "needs an unramified ring".to_string())
    } else if ring.modulus() <= params.n() as u64 {
        (Status::Skipped, format!("needs p^s > 2g+1 = {}", params.n()))
    } else {
        match independence_check(params)? {
            Some(w) => {
                let at = match (&w.point, w.value) {
                    (Some(pt), Some(v)) => format!(", value {v} at z = {pt:?}"),
                    _ => ", nonzero as a polynomial".to_string(),
                };
                (Status::Pass, format!("nonzero minor on columns {:?}{at}", w.columns))
            }
            None => (Status::Fail, "every g x g minor vanishes mod p".to_string()),
        }
    };
    out.push(Property { name: "independence", status, detail });
    Ok(out)
}

pub fn run(a: &VerifyArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let cert = SolutionCertificate::from_json(&text)?;
    let reports = residuals(&cert)?;
    let properties = match (a.properties, cert.params()) {
        (true, FamilyParams::Hyper(h)) => hyper_properties(&cert, h)?,
        _ => Vec::new(),
    };
    let verified = reports.iter().all(|r| r.all_zero())
        && properties.iter().all(|p| p.status != Status::Fail);

    if a.json {
        let out = Output {
            file: a.file.display().to_string(),
            family: cert.family().to_string(),
            verified,
            reports: &reports,
            properties: &properties,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{}", cert.summary());
        for r in &reports {
            print!("{r}");
        }
        if a.properties && properties.is_empty() {
            println!("no extra properties for family {}", cert.family());
        }
        for p in &properties {
            println!("property {}: {:?} ({})", p.name, p.status, p.detail);
        }
        println!("{}", if verified { "verified" } else { "NOT verified" });
    }
    Ok(if verified { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
