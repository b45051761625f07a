//! Command line front end. JSON results go to stdout, bulk data (profiles,
//! basin maps, sweep tables) to files, diagnostics to stderr. Identical
//! flags and seed give byte-identical output regardless of worker count.
//!
//! Exit status: 0 on success, 1 for rejected input or usage errors, 2 when
//! a numerical procedure fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rnls_core::{
    analyze, census, classify, make_symmetric, make_theta_family, make_triple, mazhao_beta,
    mazhao_ratio, mazhao_scale, residual, solve_scalar, DecayCertificate, Error, MaZhaoParams,
    Nonlinearity, Parameters, RadialProfile, Result, SearchBox, ShootingConfig,
};

/// Positive radial solutions of coupled semilinear Schrodinger systems:
/// classification, solving, explicit families, censuses, identity checks.
///
/// All quantities are dimensionless: radii and heights in the units of the
/// normalized system, angles in radians.
#[derive(Parser)]
#[command(name = "rnls", version, max_term_width = 100)]
struct Cli {
    /// Worker threads for trajectory batches; falls back to the
    /// RNLS_WORKERS environment variable, then to all cores. Results do
    /// not depend on the count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a parameter point into a uniqueness or multiplicity regime.
    Classify(ClassifyArgs),
    /// Solve the scalar ground state and write its profile.
    GroundState(GroundStateArgs),
    /// Build explicit solution families from the scalar ground state.
    Construct {
        #[command(subcommand)]
        family: ConstructCmd,
    },
    /// Sweep a box of initial heights and localize decaying solutions.
    Census(CensusArgs),
    /// Check integral identities and decay on a stored profile.
    Verify {
        #[command(subcommand)]
        check: VerifyCmd,
    },
    /// Tabulate regimes and census counts over a (q, b) grid.
    Sweep(SweepArgs),
    /// Transforms of the defocusing two-beta system to the single-beta form.
    Mazhao {
        #[command(subcommand)]
        op: MazhaoCmd,
    },
}

#[derive(Args)]
struct ClassifyArgs {
    /// Space dimension, n >= 1.
    #[arg(long)]
    n: u32,
    /// Half power: self-interaction z^(2q-1), coupling z1^(q-1) z2^q; q > 1.
    #[arg(long)]
    q: f64,
    /// Coupling strength; must be positive.
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Seed for the sampled hypothesis checks recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GroundStateArgs {
    /// Space dimension.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Half power, q > 1 (subcritical for the given n).
    #[arg(long)]
    q: f64,
    /// Local error tolerance of the shooting integrator.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Profile CSV destination; the metadata sidecar lands next to it
    /// with extension .json.
    #[arg(long, default_value = "ground.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// The symmetric pair (c u0, c u0) with c = (1+b)^(-1/(2q-2)).
    Symmetric {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        q: f64,
        /// Coupling strength, b > -1.
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value = "symmetric.csv")]
        out: PathBuf,
    },
    /// The symmetric pair plus the asymmetric pair and its swap
    /// (one-dimensional multiplicity regime only).
    Triple {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        q: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Member CSVs are written as <prefix>_symmetric.csv,
        /// <prefix>_asymmetric.csv, <prefix>_swapped.csv.
        #[arg(long, default_value = "triple")]
        out_prefix: String,
    },
    /// One member (cos(theta) u0, sin(theta) u0) of the solution circle at
    /// q = 2, b = 1.
    Theta {
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Angle in radians, strictly inside (0, pi/2).
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value = "theta.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Initial-height rectangle: "lo,hi" for a square or
    /// "u_lo,u_hi,v_lo,v_hi".
    #[arg(long = "box", default_value = "0,2")]
    search_box: String,
    /// Sweep resolution: "N" or "NxM", at least 32 per axis.
    #[arg(long, default_value = "64")]
    grid: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Outcome map destination, one CSV row per u node: 0 decay,
    /// 1 zero crossing, 2 blowup, 3 indeterminate.
    #[arg(long, default_value = "basin.csv")]
    basin: PathBuf,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Fitted tail rates against the decay certificate.
    Decay(VerifyArgs),
    /// Signed Wronskian-type integral; vanishes on solutions.
    Wronskian(VerifyArgs),
    /// Sup defect of the energy balance along the profile.
    Energy(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Profile CSV with header r,u,du,v,dv.
    #[arg(long)]
    profile: PathBuf,
    /// Dimension the profile was solved at (not stored in the CSV).
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Certificate rate floor m > 0; tails must decay like exp(-sqrt(m) r).
    #[arg(long, default_value_t = 0.5)]
    m: f64,
    /// Certificate onset radius R > 0.
    #[arg(long, default_value_t = 1.0)]
    onset: f64,
    /// Sampling neighborhood of the certificate, eps > 0.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Inclusive exponent range "lo:hi:step".
    #[arg(long, default_value = "1.25:3:0.25")]
    q_range: String,
    /// Log-spaced coupling range "lo:hi:count"; all values must be positive.
    #[arg(long, default_value = "0.1:10:8")]
    b_range: String,
    /// Census box per cell, same syntax as the census subcommand.
    #[arg(long = "box", default_value = "0,2")]
    search_box: String,
    /// Census resolution per cell; kept coarse on purpose.
    #[arg(long, default_value = "32")]
    grid: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regime map destination, one CSV row per (q, b) cell.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum MazhaoCmd {
    /// The common coupling both components see after rescaling; errors if
    /// the two defining expressions disagree.
    Beta {
        /// Path to a parameter JSON {mu1, mu2, beta1, beta2, q}, or the
        /// JSON text itself.
        #[arg(long)]
        params: String,
    },
    /// Predicted height ratio u/v of positive solutions.
    Ratio {
        #[arg(long)]
        params: String,
    },
    /// Component rescaling that carries a stored profile to the
    /// single-beta system.
    Scale {
        #[arg(long)]
        params: String,
        /// Profile CSV to rescale.
        #[arg(long)]
        profile: PathBuf,
        /// Dimension of the stored profile.
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value = "scaled.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; everything else is a usage
            // error and must exit 1, not clap's default 2.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_workers(cli.workers);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed stdout (e.g. piping into head) is not a failure.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn init_workers(flag: Option<usize>) {
    let n = flag.or_else(|| std::env::var("RNLS_WORKERS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = n {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("worker pool already configured: {e}");
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Classify(a) => run_classify(a),
        Command::GroundState(a) => run_ground_state(a),
        Command::Construct { family } => run_construct(family),
        Command::Census(a) => run_census(a),
        Command::Verify { check } => run_verify(check),
        Command::Sweep(a) => run_sweep(a),
        Command::Mazhao { op } => run_mazhao(op),
    }
}

fn emit(v: &serde_json::Value) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("reports serialize"))?;
    Ok(())
}

fn shooting_config(tol: f64) -> ShootingConfig<f64> {
    ShootingConfig { tol, ..ShootingConfig::default() }
}

fn run_classify(a: ClassifyArgs) -> Result<()> {
    let p = Parameters::new(a.n, a.q, a.b)?;
    let report = classify(&p, a.seed)?;
    emit(&report.to_json())?;
    Ok(())
}

fn run_ground_state(a: GroundStateArgs) -> Result<()> {
    let cfg = shooting_config(a.tol);
    let gs = solve_scalar(a.n, a.q, &cfg)?;
    gs.profile.write_csv_path(&a.out)?;
    let sidecar = a.out.with_extension("json");
    gs.write_sidecar(&sidecar)?;
    emit(&json!({
        "n": a.n,
        "q": a.q,
        "height": gs.height,
        "bracket": gs.bracket,
        "iterations": gs.iterations,
        "r_end": gs.profile.r_end(),
        "profile": a.out.display().to_string(),
        "sidecar": sidecar.display().to_string(),
    }))?;
    Ok(())
}

fn run_construct(family: ConstructCmd) -> Result<()> {
    match family {
        ConstructCmd::Symmetric { n, q, b, tol, out } => {
            let cfg = shooting_config(tol);
            let ground = solve_scalar(n, q, &cfg)?;
            let member = make_symmetric(&ground, b)?;
            let f = Nonlinearity::coupled_power(&Parameters::new(n, q, b)?);
            let res = residual(&f, &member)?;
            member.write_csv_path(&out)?;
            emit(&json!({
                "family": "symmetric",
                "n": n, "q": q, "b": b,
                "height": member.u()[0],
                "residual": res,
                "profile": out.display().to_string(),
            }))?;
        }
        ConstructCmd::Triple { n, q, b, tol, out_prefix } => {
            let p = Parameters::new(n, q, b)?;
            let cfg = shooting_config(tol);
            let ground = solve_scalar(n, q, &cfg)?;
            let analysis = rnls_core::analyze_psi(&p)?;
            let triple = make_triple(&ground, &p, &analysis)?;
            let names = ["symmetric", "asymmetric", "swapped"];
            let mut files = Vec::new();
            for (member, name) in triple.members.iter().zip(names) {
                let path = format!("{out_prefix}_{name}.csv");
                member.write_csv_path(&path)?;
                files.push(path);
            }
            emit(&json!({
                "family": "triple",
                "n": n, "q": q, "b": b,
                "k_b": analysis.root,
                "mu_b": analysis.mu_b,
                "residuals": triple.residuals,
                "unscaled_first_residual": triple.unscaled_first_residual,
                "note": triple.note,
                "profiles": files,
            }))?;
        }
        ConstructCmd::Theta { n, theta, tol, out } => {
            let cfg = shooting_config(tol);
            let ground = solve_scalar(n, 2.0, &cfg)?;
            let member = make_theta_family(&ground, theta)?;
            let f = Nonlinearity::coupled_power(&Parameters::new(n, 2.0, 1.0)?);
            let res = residual(&f, &member)?;
            member.write_csv_path(&out)?;
            emit(&json!({
                "family": "theta",
                "n": n, "q": 2.0, "b": 1.0,
                "theta": theta,
                "residual": res,
                "profile": out.display().to_string(),
            }))?;
        }
    }
    Ok(())
}

fn run_census(a: CensusArgs) -> Result<()> {
    let p = Parameters::new(a.n, a.q, a.b)?;
    let cfg = shooting_config(a.tol);
    let search = parse_box(&a.search_box)?;
    let dims = parse_grid(&a.grid)?;
    let result = census(&p, &cfg, &search, dims)?;
    let file = std::fs::File::create(&a.basin)?;
    result.write_basin_csv(std::io::BufWriter::new(file))?;
    let mut v = result.to_json();
    v["basin_csv"] = json!(a.basin.display().to_string());
    emit(&v)?;
    Ok(())
}

fn run_verify(check: VerifyCmd) -> Result<()> {
    let (a, want_energy) = match &check {
        VerifyCmd::Decay(a) | VerifyCmd::Wronskian(a) => (a, false),
        VerifyCmd::Energy(a) => (a, true),
    };
    let p = Parameters::new(a.n, a.q, a.b)?;
    let profile = RadialProfile::read_csv_path(p, &a.profile)?;
    let f = Nonlinearity::coupled_power(&p);
    let cert = DecayCertificate::new(a.m, a.onset, a.eps)?;
    let report = analyze(&f, &profile, &cert)?;
    if want_energy && report.energy_defect.is_none() {
        return Err(Error::MissingSplit);
    }
    emit(&report.to_json())?;
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let qs = parse_linear_range(&a.q_range)?;
    let bs = parse_log_range(&a.b_range)?;
    if bs.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameters(
            "sweep couplings must be positive; classification is undefined otherwise".into(),
        ));
    }
    let search = parse_box(&a.search_box)?;
    let dims = parse_grid(&a.grid)?;
    let cfg = shooting_config(a.tol);

    let file = std::fs::File::create(&a.out)?;
    let mut w = std::io::BufWriter::new(file);
    use std::io::Write;
    writeln!(w, "n,q,b,regime,hits,degenerate")?;
    for &q in &qs {
        for &b in &bs {
            let p = Parameters::new(a.n, q, b)?;
            let report = classify(&p, a.seed)?;
            let result = census(&p, &cfg, &search, dims)?;
            writeln!(
                w,
                "{},{q},{b},{},{},{}",
                a.n,
                report.regime.as_str(),
                result.solutions.len(),
                result.degenerate
            )?;
            log::info!(
                "sweep ({q}, {b}): {} with {} hits",
                report.regime.as_str(),
                result.solutions.len()
            );
        }
    }
    w.flush()?;
    emit(&json!({
        "rows": qs.len() * bs.len(),
        "q_values": qs,
        "b_values": bs,
        "out": a.out.display().to_string(),
    }))?;
    Ok(())
}

fn run_mazhao(op: MazhaoCmd) -> Result<()> {
    match op {
        MazhaoCmd::Beta { params } => {
            let p = read_mazhao_params(&params)?;
            emit(&json!({ "beta": mazhao_beta(&p)? }))?;
        }
        MazhaoCmd::Ratio { params } => {
            let p = read_mazhao_params(&params)?;
            emit(&json!({ "ratio": mazhao_ratio(&p)? }))?;
        }
        MazhaoCmd::Scale { params, profile, n, out } => {
            let p = read_mazhao_params(&params)?;
            let stored = RadialProfile::read_csv_path(Parameters::new(n, p.q, 0.0)?, &profile)?;
            let scaled = mazhao_scale(&stored, &p);
            scaled.write_csv_path(&out)?;
            let e = 1.0 / (2.0 * p.q - 2.0);
            emit(&json!({
                "factors": [p.mu1.abs().powf(e), p.mu2.abs().powf(e)],
                "out": out.display().to_string(),
            }))?;
        }
    }
    Ok(())
}

/// Accepts either a path to a JSON file or the JSON text itself.
fn read_mazhao_params(arg: &str) -> Result<MaZhaoParams<f64>> {
    if Path::new(arg).exists() {
        MaZhaoParams::from_json_str(&std::fs::read_to_string(arg)?)
    } else {
        MaZhaoParams::from_json_str(arg)
    }
}

fn parse_box(s: &str) -> Result<SearchBox<f64>> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidConfig(format!("bad box {s:?}: {e}")))?;
    match parts[..] {
        [lo, hi] => SearchBox::square(lo, hi),
        [u_lo, u_hi, v_lo, v_hi] => SearchBox::new(u_lo, u_hi, v_lo, v_hi),
        _ => Err(Error::InvalidConfig(format!(
            "box needs 2 or 4 comma-separated numbers, got {s:?}"
        ))),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = |e: &dyn std::fmt::Display| Error::InvalidConfig(format!("bad grid {s:?}: {e}"));
    match s.split_once('x') {
        Some((a, b)) => Ok((
            a.trim().parse().map_err(|e| bad(&e))?,
            b.trim().parse().map_err(|e| bad(&e))?,
        )),
        None => {
            let n = s.trim().parse().map_err(|e| bad(&e))?;
            Ok((n, n))
        }
    }
}

/// "lo:hi:step", inclusive of hi up to a relative slack of 1e-9.
fn parse_linear_range(s: &str) -> Result<Vec<f64>> {
    let [lo, hi, step] = parse_three(s)?;
    if !(step > 0.0) || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "range {s:?} needs lo <= hi and a positive step"
        )));
    }
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let x = lo + f64::from(i) * step;
        if x > hi * (1.0 + 1e-9) + 1e-300 {
            break;
        }
        out.push(x);
        i += 1;
    }
    Ok(out)
}

/// "lo:hi:count", log-spaced; count = 1 collapses to lo.
fn parse_log_range(s: &str) -> Result<Vec<f64>> {
    let [lo, hi, count] = parse_three(s)?;
    let count = count as usize;
    if !(lo > 0.0) || !(hi >= lo) || count == 0 {
        return Err(Error::InvalidConfig(format!(
            "log range {s:?} needs 0 < lo <= hi and count >= 1"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

fn parse_three(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidConfig(format!("bad range {s:?}: {e}")))?;
    match parts[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(Error::InvalidConfig(format!(
            "range needs three colon-separated numbers, got {s:?}"
        ))),
    }
}
