use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use pskz::hyper::{construct_solution, vanishing_inequality_holds, HyperParams};
use pskz::qkz::{construct_qkz_solution, QkzParams};
use pskz::sl2::{construct_solution_sl2, Sl2Params};
use pskz::{RingParams, SolutionCertificate};

use crate::verify::residuals;
use crate::{parse_ratio, parse_signed_ratio, write_atomic};

#[derive(Subcommand)]
pub enum SweepFamily {
    Hyper(HyperSweep),
    Sl2(Sl2Sweep),
    Qkz(QkzSweep),
}

/// Integer lists accept `3,5,7` and inclusive ranges `1..3`.
#[derive(Args)]
pub struct RingSweep {
    #[arg(long)]
    p: String,
    #[arg(long, default_value = "1")]
    s: String,
    /// Comma-separated exponents, each `a` or `a/b`.
    #[arg(long, default_value = "1")]
    r: String,
    /// Directory for certificates and index.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct HyperSweep {
    #[command(flatten)]
    ring: RingSweep,
    #[arg(long)]
    g: String,
    /// Defaults to 1..g for each g.
    #[arg(long)]
    ell: Option<String>,
}

#[derive(Args)]
pub struct Sl2Sweep {
    #[command(flatten)]
    ring: RingSweep,
    #[arg(long, allow_hyphen_values = true)]
    kappa: String,
    /// A single weight vector.
    #[arg(long, default_value = "1,1")]
    m: String,
    #[arg(long, default_value = "1")]
    k: String,
}

#[derive(Args)]
pub struct QkzSweep {
    #[command(flatten)]
    ring: RingSweep,
}

fn int_list<T>(s: &str, what: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr + Copy + Into<u64> + TryFrom<u64>,
{
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let bad = || anyhow!("bad {what} entry \"{part}\"");
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            for x in a..=b {
                out.push(T::try_from(x).map_err(|_| bad())?);
            }
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        bail!("empty range for {what}");
    }
    Ok(out)
}

fn ratio_list<T>(s: &str, what: &str, parse: fn(&str) -> Result<T, String>) -> Result<Vec<T>> {
    let out: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| parse(x).map_err(|e| anyhow!("{what}: {e}")))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!("empty range for {what}");
    }
    Ok(out)
}

fn rings(a: &RingSweep) -> Result<Vec<RingParams>> {
    let mut out = Vec::new();
    for p in int_list::<u64>(&a.p, "p")? {
        for s in int_list::<u32>(&a.s, "s")? {
            for (rn, rd) in ratio_list(&a.r, "r", parse_ratio)? {
                out.push(RingParams::new(p, s, rn, rd)?);
            }
        }
    }
    Ok(out)
}

fn ring_label(r: &RingParams) -> String {
    let mut l = format!("p{}_s{}", r.p(), r.s());
    if r.r_num() != 1 || r.r_den() != 1 {
        l.push_str(&format!("_r{}-{}", r.r_num(), r.r_den()));
    }
    l
}

fn join(v: &[u32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-")
}

enum Job {
    Hyper(HyperParams),
    Sl2(Sl2Params),
    Qkz(QkzParams),
}

impl Job {
    fn label(&self) -> String {
        match self {
            Job::Hyper(h) => format!("hyper_{}_g{}_l{}", ring_label(&h.ring()), h.g(), h.ell()),
            Job::Sl2(s) => {
                let (a, b) = s.kappa();
                let kappa = if b == 1 { format!("{a}") } else { format!("{a}over{b}") };
                format!(
                    "sl2_{}_m{}_k{}_kappa{}_l{}",
                    ring_label(&s.ring()),
                    join(s.m()),
                    s.k(),
                    kappa.replace('-', "m"),
                    join(s.ell())
                )
            }
            Job::Qkz(q) => format!("qkz_{}", ring_label(&q.ring())),
        }
    }

    fn construct(&self) -> pskz::Result<SolutionCertificate> {
        match self {
            Job::Hyper(h) => construct_solution(h),
            Job::Sl2(s) => construct_solution_sl2(s),
            Job::Qkz(q) => construct_qkz_solution(q),
        }
    }
}

fn jobs(family: &SweepFamily) -> Result<(Vec<Job>, &RingSweep)> {
    let mut out = Vec::new();
    let ring_args = match family {
        SweepFamily::Hyper(a) => {
            let gs = int_list::<u32>(&a.g, "g")?;
            let ells = a.ell.as_deref().map(|e| int_list::<u32>(e, "ell")).transpose()?;
            for ring in rings(&a.ring)? {
                for &g in &gs {
                    let ell_range = ells.clone().unwrap_or_else(|| (1..=g).collect());
                    for ell in ell_range {
                        out.push(Job::Hyper(HyperParams::new(ring, g, ell)?));
                    }
                }
            }
            &a.ring
        }
        SweepFamily::Sl2(a) => {
            let kappas = ratio_list(&a.kappa, "kappa", parse_signed_ratio)?;
            let m = int_list::<u32>(&a.m, "m")?;
            let ks = int_list::<u32>(&a.k, "k")?;
            for ring in rings(&a.ring)? {
                for &kappa in &kappas {
                    for &k in &ks {
                        let p = Sl2Params::new(ring, kappa, m.clone(), k, vec![1; k as usize])?;
                        out.push(Job::Sl2(p));
                    }
                }
            }
            &a.ring
        }
        SweepFamily::Qkz(a) => {
            for ring in rings(&a.ring)? {
                out.push(Job::Qkz(QkzParams::new(ring)));
            }
            &a.ring
        }
    };
    if out.is_empty() {
        bail!("empty parameter range");
    }
    Ok((out, ring_args))
}

#[derive(Serialize)]
struct Row {
    label: String,
    passed: bool,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

fn run_job(job: &Job, out_dir: &Option<PathBuf>) -> Row {
    let label = job.label();
    let fail = |detail: String| Row { label: label.clone(), passed: false, detail, file: None };
    let cert = match job.construct() {
        Ok(c) => c,
        Err(e) => return fail(format!("construction failed: {e}")),
    };
    let reports = match residuals(&cert) {
        Ok(r) => r,
        Err(e) => return fail(format!("verification failed: {e}")),
    };
    let bad: usize = reports.iter().map(|r| r.failures().count()).sum();
    let (mut passed, mut detail) = if bad == 0 {
        (true, "all residuals zero".to_string())
    } else {
        (false, format!("{bad} nonzero residuals"))
    };
    if let Job::Hyper(h) = job {
        if h.ell() > h.g() && vanishing_inequality_holds(h.ring(), h.g()) {
            if cert.is_zero() {
                detail = "zero certificate (expected)".into();
            } else {
                passed = false;
                detail = "nonzero certificate although the vanishing inequality holds".into();
            }
        }
    }
    let mut file = None;
    if let Some(dir) = out_dir {
        let path = dir.join(format!("{label}.json"));
        match write_atomic(&path, &cert.to_json()) {
            Ok(()) => file = path.file_name().map(|f| f.to_string_lossy().into_owned()),
            Err(e) => {
                passed = false;
                detail = format!("write failed: {e:#}");
            }
        }
    }
    Row { label, passed, detail, file }
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("PSKZ_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| anyhow!("PSKZ_THREADS must be a positive integer"))?;
            if n == 0 {
                bail!("PSKZ_THREADS must be a positive integer");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

pub fn run(family: &SweepFamily) -> Result<ExitCode> {
    let (jobs, ring_args) = jobs(family)?;
    let out_dir = ring_args.out_dir.clone();
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let rows: Vec<Row> = pool.install(|| jobs.par_iter().map(|j| run_job(j, &out_dir)).collect());

    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
    for r in &rows {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{:<width$}  {tag}  {}", r.label, r.detail);
    }
    let passed = rows.iter().filter(|r| r.passed).count();
    println!("{passed}/{} passed", rows.len());
    if let Some(dir) = &out_dir {
        let index = serde_json::to_string_pretty(&rows)? + "\n";
        write_atomic(&dir.join("index.json"), &index)?;
    }
    Ok(if passed == rows.len() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
