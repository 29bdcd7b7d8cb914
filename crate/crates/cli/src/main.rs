//! Command-line front end tying construction, scanning, verification, and
//! the density-matrix oracle into reproducible runs.
//!
//! Exit codes: 0 success (and, for `verify`/`oracle`, all checks passed);
//! 1 a verification check failed; 2 invalid input or parse error;
//! 3 construction failure.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qfent_core::construct::{build_set, validity_report, BuildLimits, ConstructionLedger};
use qfent_core::interval::IntervalSet;
use qfent_core::target::GrowthTarget;
use qfent_core::toeplitz::{entropy_scan, ScanOptions, SymbolCoefficients};
use qfent_core::verify::{verify, ChainOptions};
use qfent_core::Error;

#[derive(Parser)]
#[command(name = "qfent", version, about = "interval-set states with prescribed entropy growth")]
struct Cli {
    /// Worker threads (0 = all cores). Outputs are byte-identical for any
    /// worker count.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the interval set for a growth target and write set + ledger.
    Construct(ConstructArgs),
    /// Entropy scan over N; writes the report CSV.
    Scan(ScanArgs),
    /// Run the full lower-bound chain and the Λ-vs-h margins.
    Verify(VerifyArgs),
    /// Density-matrix oracle at small N.
    Oracle(OracleArgs),
    /// Print Λ_K on a φ grid.
    Lambda(LambdaArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Target spec: power:c=..,alpha=.. | nearlinear:c=.. | custom:<path>
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 1.0 / 13.0)]
    s0: f64,
    #[arg(long = "trunc-tol", default_value_t = 1e-6)]
    trunc_tol: f64,
    /// Piece budget for the build.
    #[arg(long = "max-pieces", default_value_t = qfent_core::construct::DEFAULT_MAX_PIECES)]
    max_pieces: u64,
    /// Output path for the set file.
    #[arg(long = "set")]
    set_path: String,
    /// Output path for the ledger file.
    #[arg(long = "ledger")]
    ledger_path: String,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long = "set")]
    set_path: String,
    /// N grid, e.g. "1,2,3" or "8..1024:x2" (dyadic) or mixes.
    #[arg(long = "n")]
    n_spec: String,
    /// Optional target: adds the B₁/B₂/f_N columns.
    #[arg(long)]
    target: Option<String>,
    /// Output report CSV.
    #[arg(long = "out")]
    out_path: String,
    /// Tolerance of the kernel-quadrature q_N route.
    #[arg(long = "tol-integral", default_value_t = 1e-6)]
    tol_integral: f64,
    /// Piece cap for the quadrature route (skipped above it).
    #[arg(long = "integral-cap", default_value_t = 1024)]
    integral_cap: usize,
    /// Tolerance of the Λ lower-bound integral.
    #[arg(long = "tol-lambda", default_value_t = 1e-9)]
    tol_lambda: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "set")]
    set_path: String,
    #[arg(long = "ledger")]
    ledger_path: String,
    #[arg(long)]
    target: String,
    #[arg(long = "n")]
    n_spec: String,
    /// Margin-table CSV output (optional).
    #[arg(long = "out")]
    out_path: Option<String>,
    /// Relative slack applied to B₂ in the chain comparison.
    #[arg(long = "slack-policy", default_value_t = 0.0)]
    slack_policy: f64,
    /// Log-grid size of the Λ-vs-h margin table.
    #[arg(long = "grid", default_value_t = 192)]
    grid: usize,
    #[arg(long = "tol-lambda", default_value_t = 1e-9)]
    tol_lambda: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "set")]
    set_path: String,
    #[arg(long = "n")]
    n: usize,
    /// Largest |oracle − spectral| entropy difference accepted.
    #[arg(long = "tol-diff", default_value_t = 1e-8)]
    tol_diff: f64,
}

#[derive(Args)]
struct LambdaArgs {
    #[arg(long = "set")]
    set_path: String,
    /// φ grid: comma list of reals and/or "lo..hi:logN".
    #[arg(long = "phi")]
    phi_spec: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .ok();
    }
    let outcome = match cli.cmd {
        Cmd::Construct(a) => cmd_construct(a),
        Cmd::Scan(a) => cmd_scan(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Lambda(a) => cmd_lambda(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::SpanConstraint(_) | Error::EllFloor(_) | Error::Bracketing(_) => 3,
        _ => 2,
    }
}

fn cmd_construct(a: ConstructArgs) -> Result<ExitCode, Error> {
    let target = GrowthTarget::from_spec(&a.target)?;
    let limits = BuildLimits { max_pieces: a.max_pieces, ..Default::default() };
    let built = build_set(&target, a.s0, a.trunc_tol, &limits)?;
    std::fs::write(&a.set_path, built.set.to_set_file())?;
    std::fs::write(&a.ledger_path, built.ledger.to_ledger_file())?;
    let v = validity_report(&built.ledger);
    println!("target = {}", target.spec_string());
    println!("depth = {}", built.ledger.depth);
    println!("pieces = {}", built.ledger.pieces());
    println!("measure = {:.16e}", built.set.measure());
    println!("s_residual = {:.16e}", built.ledger.s_residual);
    println!("stop = {:?}", built.ledger.stop);
    println!("N_min = {}", v.n_min);
    println!("phi_max = {:.16e}", v.phi_max);
    println!("lambda_slack = {:.16e}", v.lambda_slack);
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(a: ScanArgs) -> Result<ExitCode, Error> {
    let set = IntervalSet::from_set_file(&std::fs::read_to_string(&a.set_path)?)?;
    let ns = parse_n_spec(&a.n_spec)?;
    let target = a.target.as_deref().map(GrowthTarget::from_spec).transpose()?;
    let opts = ScanOptions {
        integral_abs_tol: a.tol_integral,
        integral_piece_cap: a.integral_cap,
        lambda_abs_tol: a.tol_lambda,
        ..Default::default()
    };
    let report = entropy_scan(&set, &ns, target.as_ref(), &opts)?;
    std::fs::write(&a.out_path, report.to_csv())?;
    let bad = report.rows.iter().filter(|r| !r.chain_ok).count();
    println!("rows = {}", report.rows.len());
    println!("chain_ok = {}", report.rows.len() - bad);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let set = IntervalSet::from_set_file(&std::fs::read_to_string(&a.set_path)?)?;
    let ledger = ConstructionLedger::from_ledger_file(&std::fs::read_to_string(&a.ledger_path)?)?;
    let target = GrowthTarget::from_spec(&a.target)?;
    if ledger.target_spec != target.spec_string() {
        eprintln!(
            "warning: ledger was built for '{}', verifying against '{}'",
            ledger.target_spec,
            target.spec_string()
        );
    }
    let ns = parse_n_spec(&a.n_spec)?;
    let opts = ChainOptions {
        slack_policy: a.slack_policy,
        lambda_abs_tol: a.tol_lambda,
        ..Default::default()
    };
    let out = verify(&set, &ledger, &target, &ns, &opts, a.grid)?;
    for r in &out.records {
        let b1 = match r.b1 {
            Some((v, _)) => format!("{v:.6e}"),
            None => "skipped".to_string(),
        };
        println!(
            "N={} {} S={:.6e} q={:.6e} B1={} slack={:.3e} B2={:.6e} f={:.6e} chain={} target={}",
            r.n,
            if r.in_window { "in " } else { "out" },
            r.s_n,
            r.q_trace,
            b1,
            r.slack_term,
            r.b2,
            r.f_n,
            if r.chain_ok() { "ok" } else { "VIOLATED" },
            if r.target_met { "ok" } else { "MISSED" },
        );
    }
    println!(
        "lambda_vs_h: min margin = {:.6e} at phi = {:.6e}",
        out.margins.min_margin, out.margins.argmin_phi
    );
    println!("N_min = {}", out.n_min);
    println!("in_window_rows = {}", out.in_window_count);
    if out.in_window_count == 0 {
        println!("note: no requested N lies in the validity window");
    }
    if let Some(path) = a.out_path {
        std::fs::write(path, out.margins.to_csv())?;
    }
    println!("verdict = {}", if out.all_ok { "PASS" } else { "FAIL" });
    Ok(if out.all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_oracle(a: OracleArgs) -> Result<ExitCode, Error> {
    let set = IntervalSet::from_set_file(&std::fs::read_to_string(&a.set_path)?)?;
    let k_max = a.n.max(2);
    let coeffs = SymbolCoefficients::from_set(&set, k_max);
    let rep = qfent_core::oracle::oracle_report(&coeffs, a.n)?;
    print!("{}", rep.to_text());
    Ok(if rep.diff.abs() <= a.tol_diff {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_lambda(a: LambdaArgs) -> Result<ExitCode, Error> {
    let set = IntervalSet::from_set_file(&std::fs::read_to_string(&a.set_path)?)?;
    let phis = parse_phi_spec(&a.phi_spec)?;
    println!("phi,lambda");
    for phi in phis {
        println!("{:.16e},{:.16e}", phi, set.lambda(phi));
    }
    Ok(ExitCode::SUCCESS)
}

/// N grid grammar: comma-separated items, each "n" or "a..b:xM" (geometric
/// with integer multiplier M ≥ 2, inclusive of b when hit exactly).
fn parse_n_spec(spec: &str) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if let Some((range, mult)) = item.split_once(":x") {
            let (a, b) = range
                .split_once("..")
                .ok_or_else(|| Error::InvalidInput(format!("bad N range '{item}'")))?;
            let a: usize = a.trim().parse().map_err(|e| bad_n(item, e))?;
            let b: usize = b.trim().parse().map_err(|e| bad_n(item, e))?;
            let m: usize = mult.trim().parse().map_err(|e| bad_n(item, e))?;
            if a == 0 || m < 2 || b < a {
                return Err(Error::InvalidInput(format!("bad N range '{item}'")));
            }
            let mut v = a;
            while v <= b {
                out.push(v);
                match v.checked_mul(m) {
                    Some(next) => v = next,
                    None => break,
                }
            }
        } else {
            let v: usize = item.parse().map_err(|e| bad_n(item, e))?;
            if v == 0 {
                return Err(Error::InvalidInput("N must be positive".into()));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("empty N spec".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn bad_n(item: &str, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("bad N item '{item}': {e}"))
}

/// φ grid grammar: comma-separated reals and/or "lo..hi:logN" (N log-spaced
/// points inclusive).
fn parse_phi_spec(spec: &str) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if let Some((range, count)) = item.split_once(":log") {
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| Error::InvalidInput(format!("bad phi range '{item}'")))?;
            let lo: f64 = lo.trim().parse().map_err(|e| bad_phi(item, e))?;
            let hi: f64 = hi.trim().parse().map_err(|e| bad_phi(item, e))?;
            let n: usize = count.trim().parse().map_err(|e| bad_phi(item, e))?;
            if !(lo > 0.0 && lo < hi && hi < 1.0) || n < 2 {
                return Err(Error::InvalidInput(format!("bad phi range '{item}'")));
            }
            let ratio = (hi / lo).powf(1.0 / (n as f64 - 1.0));
            let mut v = lo;
            for i in 0..n {
                out.push(if i == n - 1 { hi } else { v });
                v *= ratio;
            }
        } else {
            let v: f64 = item.parse().map_err(|e| bad_phi(item, e))?;
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidInput(format!("phi {v} outside [0, 1)")));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("empty phi spec".into()));
    }
    Ok(out)
}

fn bad_phi(item: &str, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("bad phi item '{item}': {e}"))
}
