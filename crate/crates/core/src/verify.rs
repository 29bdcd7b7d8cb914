//! Numerical verification of the full lower-bound chain
//!
//!   S_N ≥ q_N ≥ B₁ = (4N²/π²)·∫₀^{1/(2N)} Λ_K,
//!   B₁ + slack ≥ B₂ = (2N/π²)·g(1/(2N)) ≥ f_N,
//!
//! together with the pointwise comparison Λ_K ≥ h − 3·s_D on the guaranteed
//! window and the logarithmic-growth probes. Truncation slack enters only
//! through the Λ links (dropping the un-built tail lowers Λ_K by at most
//! 3·s_D pointwise), so each margin stays attributable to one step.

use std::f64::consts::PI;

use crate::construct::ConstructionLedger;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::target::GrowthTarget;
use crate::toeplitz::{entropy, quadratic_bound_trace, SymbolCoefficients};

/// Options shared by the chain checks.
#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    /// Relative slack applied to B₂ in the B₁-vs-B₂ link; 0 keeps the link
    /// exact.
    pub slack_policy: f64,
    pub lambda_abs_tol: f64,
    /// Pair budget for the exact Λ integral; beyond it B₁ is skipped and the
    /// chain falls back to the trivial bound B₁ ≥ 0.
    pub lambda_pair_budget: u64,
    /// Relative numerical slop applied to every inequality.
    pub rel_slop: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            slack_policy: 0.0,
            lambda_abs_tol: 1e-9,
            lambda_pair_budget: 1 << 31,
            rel_slop: 1e-12,
        }
    }
}

/// Per-N record of the chain.
#[derive(Debug, Clone)]
pub struct ChainRecord {
    pub n: usize,
    /// N ≥ N_min: the kernel window sits inside the guaranteed Λ ≥ h region.
    pub in_window: bool,
    pub s_n: f64,
    pub q_trace: f64,
    /// (B₁, quadrature error bound); None when the pair budget was exceeded
    /// and the trivial bound 0 was used instead.
    pub b1: Option<(f64, f64)>,
    /// Truncation slack routed into the B₁ link: 3·s_D·(4N²/π²)·(1/(2N)).
    pub slack_term: f64,
    pub b2: f64,
    pub f_n: f64,
    pub link_s_ge_q: bool,
    pub link_q_ge_b1: bool,
    pub link_b1_slack_ge_b2: bool,
    pub link_b2_ge_f: bool,
    /// Direct check S_N ≥ f_N (no slack).
    pub target_met: bool,
}

impl ChainRecord {
    /// All slack-adjusted links hold.
    pub fn chain_ok(&self) -> bool {
        self.link_s_ge_q && self.link_q_ge_b1 && self.link_b1_slack_ge_b2 && self.link_b2_ge_f
    }
}

/// Evaluates every link of the chain at one N.
///
/// Violated links are reported in the record, never as errors; only
/// infrastructure failures (missing coefficients, budget misuse) error out.
pub fn bound_chain(
    set: &IntervalSet,
    coeffs: &SymbolCoefficients,
    ledger: &ConstructionLedger,
    target: &GrowthTarget,
    n: usize,
    opts: &ChainOptions,
) -> Result<ChainRecord> {
    let nf = n as f64;
    let s_n = entropy(coeffs, n)?;
    let q_trace = quadratic_bound_trace(coeffs, n)?;
    let w = 1.0 / (2.0 * nf);
    let kernel_floor = 4.0 * nf * nf / (PI * PI);
    let b1 = match set.lambda_integral(0.0, w, opts.lambda_abs_tol, opts.lambda_pair_budget) {
        Ok((v, e)) => Some((kernel_floor * v, kernel_floor * e)),
        Err(Error::BudgetExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    let slack_term = ledger.lambda_slack() * kernel_floor * w;
    let b2 = 2.0 * nf / (PI * PI) * target.g(w);
    let f_n = target.f(n as u64);
    let slop = |x: f64| opts.rel_slop * x.abs().max(1.0);

    let (b1_val, b1_err) = b1.unwrap_or((0.0, 0.0));
    let link_s_ge_q = s_n >= q_trace - slop(q_trace);
    let link_q_ge_b1 = q_trace >= b1_val - b1_err - slop(b1_val);
    let b2_eff = b2 * (1.0 - opts.slack_policy);
    let link_b1_slack_ge_b2 = b1_val + b1_err + slack_term >= b2_eff - slop(b2_eff);
    let link_b2_ge_f = b2_eff >= f_n - slop(f_n);
    let target_met = s_n >= f_n - slop(f_n);

    Ok(ChainRecord {
        n,
        in_window: n as u64 >= ledger.n_min,
        s_n,
        q_trace,
        b1,
        slack_term,
        b2,
        f_n,
        link_s_ge_q,
        link_q_ge_b1,
        link_b1_slack_ge_b2,
        link_b2_ge_f,
        target_met,
    })
}

/// One row of the Λ-vs-h margin table.
#[derive(Debug, Clone, Copy)]
pub struct MarginRow {
    pub phi: f64,
    pub lambda: f64,
    pub h: f64,
    /// h − 3·s_residual, the slack-adjusted floor Λ must dominate.
    pub floor: f64,
    pub margin: f64,
}

/// Margin table over a log grid of φ.
#[derive(Debug, Clone)]
pub struct MarginTable {
    pub rows: Vec<MarginRow>,
    pub min_margin: f64,
    pub argmin_phi: f64,
}

impl MarginTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("phi,lambda,h,floor,margin\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.phi, r.lambda, r.h, r.floor, r.margin
            ));
        }
        s
    }
}

/// Λ_K(φ) vs h(φ) − 3·s_D on a log grid over the guaranteed window
/// [6(s_{D−1}−s_D), φ_max]. The h used is the one the construction ran with
/// (envelope included).
pub fn lambda_vs_h(
    set: &IntervalSet,
    ledger: &ConstructionLedger,
    target: &GrowthTarget,
    grid_size: usize,
) -> Result<MarginTable> {
    if grid_size < 2 {
        return Err(Error::InvalidInput("grid_size must be >= 2".into()));
    }
    let d = ledger.depth;
    let lo = 6.0 * (ledger.s[d - 1] - ledger.s[d]);
    let hi = ledger.phi_max;
    if !(lo > 0.0 && lo <= hi) {
        return Err(Error::InvalidInput(format!("degenerate margin window [{lo}, {hi}]")));
    }
    let slack = ledger.lambda_slack();
    let ratio = (hi / lo).powf(1.0 / (grid_size as f64 - 1.0));
    let mut rows = Vec::with_capacity(grid_size);
    let mut min_margin = f64::INFINITY;
    let mut argmin = lo;
    let mut phi = lo;
    for i in 0..grid_size {
        if i == grid_size - 1 {
            phi = hi;
        }
        let lam = set.lambda(phi);
        let h = target.h(phi);
        let floor = h - slack;
        let margin = lam - floor;
        if margin < min_margin {
            min_margin = margin;
            argmin = phi;
        }
        rows.push(MarginRow { phi, lambda: lam, h, floor, margin });
        phi *= ratio;
    }
    Ok(MarginTable { rows, min_margin, argmin_phi: argmin })
}

/// Logarithmic lower-bound probe.
#[derive(Debug, Clone)]
pub struct LogProbe {
    /// min over the φ grid of Λ_K(φ)/φ.
    pub c_hat: f64,
    /// Least-squares slope of S_N against ln N.
    pub log_fit: f64,
    /// min over the N grid of S_N / ln N.
    pub min_s_over_ln: f64,
}

/// Default φ grid for the probe: below half the smallest feature of K the
/// ramp Λ(φ) = m·φ is exact, so the density-point estimate is sharp there.
pub fn default_probe_phis(set: &IntervalSet, count: usize) -> Vec<f64> {
    let pieces = set.pieces();
    let mut feature = f64::INFINITY;
    for (i, &(a, b)) in pieces.iter().enumerate() {
        feature = feature.min(b - a);
        if i + 1 < pieces.len() {
            feature = feature.min(pieces[i + 1].0 - b);
        }
    }
    // circular gap between last and first
    if let (Some(&(first, _)), Some(&(_, last))) = (pieces.first(), pieces.last()) {
        let wrap = first + 1.0 - last;
        if wrap > 0.0 {
            feature = feature.min(wrap);
        }
    }
    let hi = 0.5 * feature;
    let lo = hi / 10.0;
    let ratio = (hi / lo).powf(1.0 / (count.max(2) as f64 - 1.0));
    let mut out = Vec::with_capacity(count);
    let mut phi = lo;
    for _ in 0..count {
        out.push(phi);
        phi *= ratio;
    }
    out
}

/// Probes the Λ_K(φ) ≥ c·φ estimate and the entropy growth against ln N.
pub fn log_lower_bound_probe(
    set: &IntervalSet,
    coeffs: &SymbolCoefficients,
    n_list: &[usize],
    phi_list: &[f64],
) -> Result<LogProbe> {
    if set.is_empty() || set.measure() >= 1.0 {
        return Err(Error::InvalidInput(
            "log lower bound probe needs a nontrivial set (0 < |K| < 1)".into(),
        ));
    }
    if phi_list.is_empty() || n_list.is_empty() {
        return Err(Error::InvalidInput("empty probe grids".into()));
    }
    let mut c_hat = f64::INFINITY;
    for &phi in phi_list {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::InvalidInput(format!("probe phi = {phi} outside (0,1)")));
        }
        c_hat = c_hat.min(set.lambda(phi) / phi);
    }
    let mut xs = Vec::with_capacity(n_list.len());
    let mut ys = Vec::with_capacity(n_list.len());
    let mut min_ratio = f64::INFINITY;
    for &n in n_list {
        if n < 2 {
            return Err(Error::InvalidInput("probe N must be >= 2".into()));
        }
        let s = entropy(coeffs, n)?;
        let ln = (n as f64).ln();
        xs.push(ln);
        ys.push(s);
        min_ratio = min_ratio.min(s / ln);
    }
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Ok(LogProbe { c_hat, log_fit: num / den, min_s_over_ln: min_ratio })
}

/// Aggregate verifier outcome; `all_ok` is the exit-code basis.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub records: Vec<ChainRecord>,
    pub margins: MarginTable,
    pub n_min: u64,
    /// Every in-window record has all links holding and S_N ≥ f_N.
    pub all_ok: bool,
    /// Number of in-window records evaluated (0 means the window was empty
    /// over the requested N range, which makes `all_ok` vacuous).
    pub in_window_count: usize,
}

/// Runs the chain at every requested N plus the margin table.
///
/// When the set is exactly the ledger's materialization, coefficients come
/// from the level closed form (exact geometric sums, no per-piece loop).
pub fn verify(
    set: &IntervalSet,
    ledger: &ConstructionLedger,
    target: &GrowthTarget,
    n_list: &[usize],
    opts: &ChainOptions,
    grid_size: usize,
) -> Result<VerifyOutcome> {
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().ok_or_else(|| Error::InvalidInput("empty N list".into()))?;
    let coeffs = if ledger.matches_set(set) {
        SymbolCoefficients::from_blocks(&ledger.blocks(), n_max.max(2) - 1)
    } else {
        SymbolCoefficients::from_set(set, n_max.max(2) - 1)
    };
    let mut records = Vec::with_capacity(ns.len());
    for &n in &ns {
        records.push(bound_chain(set, &coeffs, ledger, target, n, opts)?);
    }
    let margins = lambda_vs_h(set, ledger, target, grid_size)?;
    let in_window: Vec<&ChainRecord> = records.iter().filter(|r| r.in_window).collect();
    let all_ok = in_window.iter().all(|r| r.chain_ok() && r.target_met);
    Ok(VerifyOutcome {
        n_min: ledger.n_min,
        in_window_count: in_window.len(),
        records,
        margins,
        all_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_set, BuildLimits};

    fn small_build() -> (crate::construct::Construction, GrowthTarget) {
        let target = GrowthTarget::power(0.04, 0.5).unwrap();
        let limits = BuildLimits { max_pieces: 1 << 10, ..Default::default() };
        (build_set(&target, 1.0 / 13.0, 1e-6, &limits).unwrap(), target)
    }

    #[test]
    fn chain_holds_on_small_power_target() {
        let (c, target) = small_build();
        let n_min = c.ledger.n_min as usize;
        let n = n_min.next_power_of_two().max(64);
        let coeffs = SymbolCoefficients::from_set(&c.set, n);
        let rec =
            bound_chain(&c.set, &coeffs, &c.ledger, &target, n, &ChainOptions::default())
                .unwrap();
        assert!(rec.in_window);
        assert!(rec.chain_ok(), "record: {rec:?}");
        assert!(rec.target_met, "S = {}, f = {}", rec.s_n, rec.f_n);
        assert!(rec.b1.is_some());
        // positive margins all the way down the chain
        assert!(rec.s_n >= rec.q_trace);
        let (b1, _) = rec.b1.unwrap();
        assert!(rec.q_trace >= b1 * (1.0 - 1e-9));
    }

    #[test]
    fn chain_degenerate_on_trivial_set() {
        // all quantities 0; links hold trivially. Build a tiny ledger by
        // hand around the empty set.
        let (c, target) = small_build();
        let coeffs = SymbolCoefficients::from_set(&IntervalSet::empty(), 64);
        let rec = bound_chain(
            &IntervalSet::empty(),
            &coeffs,
            &c.ledger,
            &target,
            16,
            &ChainOptions::default(),
        )
        .unwrap();
        assert_eq!(rec.s_n, 0.0);
        assert_eq!(rec.q_trace, 0.0);
        assert!(rec.link_s_ge_q && rec.link_q_ge_b1);
    }

    #[test]
    fn margin_table_nonnegative_for_valid_build() {
        let (c, target) = small_build();
        let table = lambda_vs_h(&c.set, &c.ledger, &target, 128).unwrap();
        assert!(
            table.min_margin >= -1e-12,
            "min margin {} at phi = {}",
            table.min_margin,
            table.argmin_phi
        );
        assert_eq!(table.rows.len(), 128);
    }

    #[test]
    fn probe_interval_ramp() {
        // K = [0, 1/2): Lambda(phi) = phi, so c_hat = 1 on (0, 1/2]
        let k = IntervalSet::normalize(&[(0.0, 0.5)]).unwrap();
        let coeffs = SymbolCoefficients::from_set(&k, 64);
        let probe =
            log_lower_bound_probe(&k, &coeffs, &[16, 32, 64], &[0.01, 0.1, 0.25]).unwrap();
        assert!((probe.c_hat - 1.0).abs() < 1e-12);
        assert!(probe.min_s_over_ln > 0.0);
        assert!(probe.log_fit > 0.0);
    }

    #[test]
    fn probe_rejects_trivial_sets() {
        let coeffs = SymbolCoefficients::from_set(&IntervalSet::empty(), 8);
        assert!(
            log_lower_bound_probe(&IntervalSet::empty(), &coeffs, &[4], &[0.1]).is_err()
        );
    }

    #[test]
    fn default_probe_grid_sits_below_features() {
        let k = IntervalSet::normalize(&[(0.0, 0.25), (0.5, 0.75)]).unwrap();
        let phis = default_probe_phis(&k, 8);
        assert_eq!(phis.len(), 8);
        // smallest feature is 0.25; grid tops out at half of that
        assert!(phis.iter().all(|&p| p <= 0.125 + 1e-12));
        // on that range Lambda = m phi exactly
        for &p in &phis {
            assert!((k.lambda(p) - 2.0 * p).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_small_build_end_to_end() {
        let (c, target) = small_build();
        let n_min = c.ledger.n_min as usize;
        let mut ns = vec![];
        let mut n = 1usize;
        while n <= 256 {
            ns.push(n);
            n *= 2;
        }
        let out =
            verify(&c.set, &c.ledger, &target, &ns, &ChainOptions::default(), 64).unwrap();
        assert!(out.all_ok, "{:#?}", out.records);
        assert!(out.in_window_count > 0);
        for r in &out.records {
            assert_eq!(r.in_window, r.n as u64 >= n_min as u64);
        }
    }
}
