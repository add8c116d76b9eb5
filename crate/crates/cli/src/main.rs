use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pskz::gauge::gauge_search;
use pskz::hyper::{construct_solution, HyperParams};
use pskz::qkz::{construct_qkz_solution, QkzParams};
use pskz::sl2::{construct_solution_sl2, Sl2Params};
use pskz::truncexp::{degree_bound, exp_coefficients};
use pskz::{RingParams, SolutionCertificate};

mod sweep;
mod verify;

#[derive(Parser)]
#[command(name = "pskz", version, about = "Polynomial solutions of KZ-type equations modulo p^s")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a solution and write it as a certificate file.
    #[command(subcommand)]
    Construct(Family),
    /// Re-verify a certificate file.
    Verify(verify::VerifyArgs),
    /// Construct and verify a whole parameter matrix.
    #[command(subcommand)]
    Sweep(sweep::SweepFamily),
    /// Print d(r,s) and the coefficients p^{kr}/k! of the truncated exponential.
    ExpTable(RingArgs),
    /// Search for a gauge factor between the sl2 and hyperelliptic solutions.
    Gauge(GaugeArgs),
}

#[derive(Subcommand)]
enum Family {
    Hyper(HyperArgs),
    Sl2(Sl2Args),
    Qkz(QkzArgs),
}

#[derive(Args, Clone)]
pub struct RingArgs {
    /// Odd prime p.
    #[arg(long)]
    p: u64,
    /// Precision s (work modulo p^s).
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Exponent r as `a` or `a/b`.
    #[arg(long, default_value = "1", value_parser = parse_ratio)]
    r: (u64, u64),
}

impl RingArgs {
    fn ring(&self) -> Result<RingParams> {
        Ok(RingParams::new(self.p, self.s, self.r.0, self.r.1)?)
    }
}

#[derive(Args)]
struct HyperArgs {
    #[command(flatten)]
    ring: RingArgs,
    /// Genus; the curve has n = 2g + 1 branch points.
    #[arg(long)]
    g: u32,
    #[arg(long, default_value_t = 1)]
    ell: u32,
    /// Output file; the certificate goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sl2Args {
    #[command(flatten)]
    ring: RingArgs,
    /// Coupling κ as `a` or `a/b`.
    #[arg(long, value_parser = parse_signed_ratio, allow_hyphen_values = true)]
    kappa: (i64, i64),
    /// Highest weights, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<u32>,
    /// Number of integration variables.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Extraction multidegree, one entry per integration variable (default all 1).
    #[arg(long, value_delimiter = ',')]
    ell: Vec<u32>,
    /// Exponent override: `slot=M1,..,Mn`, `pair=i,j,M` (repeatable) or `zero=M0`.
    #[arg(long = "M-override")]
    m_override: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QkzArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GaugeArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[arg(long, default_value_t = 1)]
    g: u32,
}

pub fn parse_ratio(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a = a.trim().parse().map_err(|_| format!("bad ratio \"{s}\""))?;
    let b = b.trim().parse().map_err(|_| format!("bad ratio \"{s}\""))?;
    Ok((a, b))
}

pub fn parse_signed_ratio(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a = a.trim().parse().map_err(|_| format!("bad ratio \"{s}\""))?;
    let b = b.trim().parse().map_err(|_| format!("bad ratio \"{s}\""))?;
    Ok((a, b))
}

fn sl2_params(a: &Sl2Args) -> Result<Sl2Params> {
    let ell = if a.ell.is_empty() { vec![1; a.k as usize] } else { a.ell.clone() };
    let params = Sl2Params::new(a.ring.ring()?, a.kappa, a.m.clone(), a.k, ell)?;
    apply_overrides(params, &a.m_override)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| anyhow!("bad integer \"{x}\"")))
        .collect()
}

fn apply_overrides(params: Sl2Params, overrides: &[String]) -> Result<Sl2Params> {
    if overrides.is_empty() {
        return Ok(params);
    }
    let n = params.n();
    let mut slot = None;
    let mut zero = None;
    let mut pair: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| if i < j { params.m_pair(i, j) } else { 0 }).collect())
        .collect();
    let mut pair_set = false;
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("--M-override expects key=value, got \"{o}\""))?;
        match key.trim() {
            "slot" => slot = Some(parse_u64_list(value)?),
            "zero" => zero = Some(value.trim().parse().map_err(|_| anyhow!("bad M0 \"{value}\""))?),
            "pair" => {
                let v = parse_u64_list(value)?;
                let [i, j, m] = v[..] else {
                    bail!("pair override expects i,j,M");
                };
                if i == 0 || j <= i || j as usize > n {
                    bail!("pair override needs 1 <= i < j <= {n}");
                }
                pair[i as usize - 1][j as usize - 1] = m;
                pair_set = true;
            }
            other => bail!("unknown --M-override key \"{other}\" (use slot, pair or zero)"),
        }
    }
    Ok(params.with_exponents(slot, pair_set.then_some(pair), zero)?)
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("bad output path {}", path.display()))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(cert: &SolutionCertificate, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, &cert.to_json())?;
            println!("{} -> {}", cert.summary(), path.display());
        }
        None => {
            print!("{}", cert.to_json());
            eprintln!("{}", cert.summary());
        }
    }
    Ok(())
}

fn construct(family: &Family) -> Result<ExitCode> {
    let cert = match family {
        Family::Hyper(a) => construct_solution(&HyperParams::new(a.ring.ring()?, a.g, a.ell)?)?,
        Family::Sl2(a) => construct_solution_sl2(&sl2_params(a)?)?,
        Family::Qkz(a) => construct_qkz_solution(&QkzParams::new(a.ring.ring()?))?,
    };
    let out = match family {
        Family::Hyper(a) => &a.out,
        Family::Sl2(a) => &a.out,
        Family::Qkz(a) => &a.out,
    };
    emit(&cert, out)?;
    Ok(ExitCode::SUCCESS)
}

fn exp_table(a: &RingArgs) -> Result<ExitCode> {
    let ring = a.ring()?;
    println!("ring {ring}");
    println!("d = {}", degree_bound(&ring));
    for (k, c) in exp_coefficients(ring).iter().enumerate() {
        println!("{k}: {c}");
    }
    Ok(ExitCode::SUCCESS)
}

fn gauge(a: &GaugeArgs) -> Result<ExitCode> {
    print!("{}", gauge_search(a.ring.ring()?, a.g)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(f) => construct(f),
        Command::Verify(a) => verify::run(a),
        Command::Sweep(f) => sweep::run(f),
        Command::ExpTable(a) => exp_table(a),
        Command::Gauge(a) => gauge(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
