//! Interval-set construction on [0, 1/2).
//!
//! The set is a union of blocks, one per recursion level. Block i consists
//! of n_i intervals of dyadic length ℓ_i separated by gaps ℓ_i, and is
//! followed by a gap ℓ_i before the next block. Levels obey ℓ_{i+1} ≤ ℓ_i/2
//! and n_iℓ_i decreasing. The level boundaries s_i (tail sums
//! s_i = (1/3)·Σ_{j≥i} n_jℓ_j) solve h(6(s_i − s_{i+1})) = s_{i+1}, which is
//! what makes Λ_K dominate h on the window (0, 6(s_0−s_1)].
//!
//! The exact recursion generally needs unbounded depth, so a build stops at
//! the first of: tail below `trunc_tol`, the piece budget, or the dyadic
//! length floor. The un-built tail is simply dropped; dropping measure 3·s_D
//! lowers Λ_K pointwise by at most 3·s_D, and that slack is recorded in the
//! ledger and threaded through every downstream bound.

use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::target::GrowthTarget;

/// Hard floor for the dyadic block length, as a negated exponent.
pub const DEFAULT_ELL_FLOOR_EXP: i32 = -60;

/// Default cap on the total interval count of a build.
pub const DEFAULT_MAX_PIECES: u64 = 1 << 16;

/// Why a build stopped emitting levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// s_D fell below the requested truncation tolerance.
    Converged,
    /// The next level would exceed the piece budget.
    PieceBudget,
    /// The next level would need ℓ below the dyadic floor.
    EllFloor,
    /// Depth limit reached.
    DepthLimit,
}

impl StopReason {
    fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::PieceBudget => "budget",
            StopReason::EllFloor => "floor",
            StopReason::DepthLimit => "depth",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(StopReason::Converged),
            "budget" => Some(StopReason::PieceBudget),
            "floor" => Some(StopReason::EllFloor),
            "depth" => Some(StopReason::DepthLimit),
            _ => None,
        }
    }
}

/// One level of the construction as an arithmetic train of intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTrain {
    /// Left endpoint of the first interval.
    pub start: f64,
    /// Interval length ℓ_i (a power of two).
    pub ell: f64,
    /// Interval count n_i.
    pub count: u64,
}

/// Record of a finished build: level data, truncation state, and the
/// validity window derived from the first recursion step.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionLedger {
    /// s_0 .. s_D (length depth+1); s_i − s_{i+1} = n_iℓ_i/3 in stored f64.
    pub s: Vec<f64>,
    /// Dyadic exponents of ℓ_0 .. ℓ_{D−1}.
    pub ell_exp: Vec<i32>,
    /// Interval counts n_0 .. n_{D−1}.
    pub n: Vec<u64>,
    pub s0: f64,
    pub depth: usize,
    /// Truncation residual s_D.
    pub s_residual: f64,
    /// Smallest N whose kernel window [0, 1/(2N)] sits inside the guaranteed
    /// Λ ≥ h region: ceil(1/(12(s_0−s_1))).
    pub n_min: u64,
    /// Upper end 6(s_0−s_1) of the guaranteed window.
    pub phi_max: f64,
    pub stop: StopReason,
    pub target_spec: String,
}

impl ConstructionLedger {
    pub fn ell(&self, i: usize) -> f64 {
        pow2(self.ell_exp[i])
    }

    /// Pointwise slack in Λ from the dropped tail: 3·s_residual.
    pub fn lambda_slack(&self) -> f64 {
        3.0 * self.s_residual
    }

    /// Lays the levels out as block trains (the set's exact geometry).
    pub fn blocks(&self) -> Vec<BlockTrain> {
        let mut out = Vec::with_capacity(self.depth);
        let mut x = 0.0f64;
        for i in 0..self.depth {
            let ell = self.ell(i);
            out.push(BlockTrain { start: x, ell, count: self.n[i] });
            x += 2.0 * self.n[i] as f64 * ell;
        }
        out
    }

    /// Total interval count.
    pub fn pieces(&self) -> u64 {
        self.n.iter().sum()
    }

    /// Materializes the interval set.
    pub fn to_set(&self) -> IntervalSet {
        let mut pieces = Vec::with_capacity(self.pieces() as usize);
        for b in self.blocks() {
            let period = 2.0 * b.ell;
            for t in 0..b.count {
                let a = b.start + period * t as f64;
                pieces.push((a, a + b.ell));
            }
        }
        IntervalSet::from_canonical(pieces)
    }

    /// True when `set` is exactly the materialization of this ledger.
    pub fn matches_set(&self, set: &IntervalSet) -> bool {
        self.to_set().pieces() == set.pieces()
    }

    /// Ledger file, bit-exact round trip via 17-significant-digit fields.
    pub fn to_ledger_file(&self) -> String {
        let mut s = String::new();
        s.push_str("# construction ledger v1\n");
        s.push_str(&format!("target = {}\n", self.target_spec));
        s.push_str(&format!("s0 = {:.16e}\n", self.s0));
        s.push_str(&format!("depth = {}\n", self.depth));
        s.push_str(&format!("s_residual = {:.16e}\n", self.s_residual));
        s.push_str(&format!("n_min = {}\n", self.n_min));
        s.push_str(&format!("phi_max = {:.16e}\n", self.phi_max));
        s.push_str(&format!("stop = {}\n", self.stop.as_str()));
        s.push_str("ell_exp =");
        for e in &self.ell_exp {
            s.push_str(&format!(" {e}"));
        }
        s.push('\n');
        s.push_str("n =");
        for n in &self.n {
            s.push_str(&format!(" {n}"));
        }
        s.push('\n');
        s.push_str("s =");
        for v in &self.s {
            s.push_str(&format!(" {:.16e}", v));
        }
        s.push('\n');
        s
    }

    pub fn from_ledger_file(text: &str) -> Result<Self> {
        let mut target_spec = None;
        let mut s0 = None;
        let mut depth = None;
        let mut s_residual = None;
        let mut n_min = None;
        let mut phi_max = None;
        let mut stop = None;
        let mut ell_exp: Option<Vec<i32>> = None;
        let mut n: Option<Vec<u64>> = None;
        let mut s: Option<Vec<f64>> = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or(Error::Parse {
                line: idx + 1,
                msg: "expected key = value".into(),
            })?;
            let (key, val) = (key.trim(), val.trim());
            let perr = |msg: String| Error::Parse { line: idx + 1, msg };
            match key {
                "target" => target_spec = Some(val.to_string()),
                "s0" => s0 = Some(val.parse().map_err(|e| perr(format!("{e}")))?),
                "depth" => depth = Some(val.parse().map_err(|e| perr(format!("{e}")))?),
                "s_residual" => s_residual = Some(val.parse().map_err(|e| perr(format!("{e}")))?),
                "n_min" => n_min = Some(val.parse().map_err(|e| perr(format!("{e}")))?),
                "phi_max" => phi_max = Some(val.parse().map_err(|e| perr(format!("{e}")))?),
                "stop" => {
                    stop = Some(
                        StopReason::parse(val).ok_or_else(|| perr(format!("bad stop '{val}'")))?,
                    )
                }
                "ell_exp" => {
                    ell_exp = Some(
                        val.split_whitespace()
                            .map(|t| t.parse().map_err(|e| perr(format!("{e}"))))
                            .collect::<Result<_>>()?,
                    )
                }
                "n" => {
                    n = Some(
                        val.split_whitespace()
                            .map(|t| t.parse().map_err(|e| perr(format!("{e}"))))
                            .collect::<Result<_>>()?,
                    )
                }
                "s" => {
                    s = Some(
                        val.split_whitespace()
                            .map(|t| t.parse().map_err(|e| perr(format!("{e}"))))
                            .collect::<Result<_>>()?,
                    )
                }
                other => return Err(perr(format!("unknown key '{other}'"))),
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing field {what}") };
        let ledger = ConstructionLedger {
            s: s.ok_or_else(|| missing("s"))?,
            ell_exp: ell_exp.ok_or_else(|| missing("ell_exp"))?,
            n: n.ok_or_else(|| missing("n"))?,
            s0: s0.ok_or_else(|| missing("s0"))?,
            depth: depth.ok_or_else(|| missing("depth"))?,
            s_residual: s_residual.ok_or_else(|| missing("s_residual"))?,
            n_min: n_min.ok_or_else(|| missing("n_min"))?,
            phi_max: phi_max.ok_or_else(|| missing("phi_max"))?,
            stop: stop.ok_or_else(|| missing("stop"))?,
            target_spec: target_spec.ok_or_else(|| missing("target"))?,
        };
        if ledger.s.len() != ledger.depth + 1
            || ledger.ell_exp.len() != ledger.depth
            || ledger.n.len() != ledger.depth
        {
            return Err(Error::Parse { line: 0, msg: "ledger array lengths inconsistent".into() });
        }
        Ok(ledger)
    }
}

/// Validity window summary for a build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub n_min: u64,
    pub phi_max: f64,
    /// Additive pointwise slack in the Λ ≥ h comparison: 3·s_residual.
    pub lambda_slack: f64,
}

/// Window and slack implied by a ledger.
pub fn validity_report(ledger: &ConstructionLedger) -> ValidityReport {
    ValidityReport {
        n_min: ledger.n_min,
        phi_max: ledger.phi_max,
        lambda_slack: ledger.lambda_slack(),
    }
}

/// Tunable limits for [`build_set`].
#[derive(Debug, Clone, Copy)]
pub struct BuildLimits {
    pub max_pieces: u64,
    pub ell_floor_exp: i32,
    pub max_depth: usize,
    /// Residual tolerance of the recursion bisection.
    pub recursion_tol: f64,
}

impl Default for BuildLimits {
    fn default() -> Self {
        BuildLimits {
            max_pieces: DEFAULT_MAX_PIECES,
            ell_floor_exp: DEFAULT_ELL_FLOOR_EXP,
            max_depth: 4096,
            recursion_tol: 1e-14,
        }
    }
}

/// A finished construction.
#[derive(Debug, Clone)]
pub struct Construction {
    pub set: IntervalSet,
    pub ledger: ConstructionLedger,
}

/// Solves h(6(s_i − t)) = t for t ∈ [0, s_i] by bisection.
///
/// F(t) = h(6(s_i−t)) − t is strictly decreasing for strictly increasing h,
/// with F(0) = h(6s_i) ≥ 0 and F(s_i) = −s_i < 0, so the root is unique.
/// Returns the midpoint once |F| ≤ tol or the bracket shrinks to the f64
/// limit (for steep h the residual floor scales with h′, so bracket width
/// is the honest convergence measure). A sign violation at the bracket ends
/// reports a broken monotonicity contract.
pub fn solve_recursion_step(h: impl Fn(f64) -> f64, s_i: f64, tol: f64) -> Result<f64> {
    if !(s_i > 0.0 && s_i < 0.5) {
        return Err(Error::InvalidInput(format!("s_i = {s_i} outside (0, 1/2)")));
    }
    let f = |t: f64| h(6.0 * (s_i - t)) - t;
    let (mut lo, mut hi) = (0.0f64, s_i);
    if f(lo) < 0.0 {
        return Err(Error::Bracketing(format!(
            "h(6 s_i) = {} < 0; h violates its contract",
            h(6.0 * s_i)
        )));
    }
    if f(hi) >= 0.0 {
        return Err(Error::Bracketing(format!(
            "F(s_i) = {} >= 0; h violates h(0) = 0",
            f(hi)
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= tol {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * s_i {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Bracketing(format!(
        "bisection stalled: bracket [{lo}, {hi}], residual {}",
        f(mid)
    )))
}

/// Quantizes one recursion step into a block: picks the largest dyadic
/// ℓ ≤ min(ell_prev/2, s_i − s_next_exact), then n = ceil(3(s_i−s_next)/ℓ).
/// Rounding n up pushes s_{i+1} at or below the exact solution, and a lower
/// s_{i+1} only widens the guaranteed window of the next level.
///
/// Returns (ℓ exponent, n, s_{i+1}). For the terminal case s_next_exact = 0
/// the count rounds down instead, leaving s_{i+1} ∈ [0, ℓ/3).
pub fn quantize_block(
    s_i: f64,
    s_next_exact: f64,
    ell_prev_exp: Option<i32>,
    ell_floor_exp: i32,
) -> Result<(i32, u64, f64)> {
    if !(s_i > 0.0) || s_next_exact < 0.0 || s_next_exact >= s_i {
        return Err(Error::InvalidInput(format!(
            "quantize_block needs 0 <= s_next < s_i, got s_i={s_i}, s_next={s_next_exact}"
        )));
    }
    let d = s_i - s_next_exact;
    let mut exp = floor_log2(d);
    if let Some(pe) = ell_prev_exp {
        exp = exp.min(pe - 1);
    }
    loop {
        if exp < ell_floor_exp {
            return Err(Error::EllFloor(ell_floor_exp.unsigned_abs()));
        }
        let ell = pow2(exp);
        let q = 3.0 * d / ell;
        let n = if s_next_exact == 0.0 {
            (q.floor() as u64).max(1)
        } else {
            (q - 1e-9).ceil().max(1.0) as u64
        };
        let s_next = s_i - n as f64 * ell / 3.0;
        if s_next >= 0.0 {
            return Ok((exp, n, s_next));
        }
        // n·ℓ/3 overshot past zero; retry with a finer ℓ
        exp -= 1;
    }
}

/// Runs the full construction for `target` starting from `s0`.
///
/// Levels are emitted until the residual drops below `trunc_tol` or a
/// resource guard halts the build; the ledger records which. `s0` must
/// satisfy s0 ≤ 1/13 so the layout spans Σ 2n_iℓ_i = 6·s0 < 1/2 and
/// K ⊂ [0, 1/2).
pub fn build_set(
    target: &GrowthTarget,
    s0: f64,
    trunc_tol: f64,
    limits: &BuildLimits,
) -> Result<Construction> {
    if !(s0 > 0.0 && s0 <= 1.0 / 13.0 + 1e-15) {
        return Err(Error::SpanConstraint(s0));
    }
    if !(trunc_tol > 0.0) {
        return Err(Error::InvalidInput("trunc_tol must be positive".into()));
    }
    let mut s = vec![s0];
    let mut ell_exp: Vec<i32> = Vec::new();
    let mut n: Vec<u64> = Vec::new();
    let mut pieces: u64 = 0;
    let mut stop = StopReason::DepthLimit;
    for _ in 0..limits.max_depth {
        let s_i = *s.last().unwrap();
        if s_i < trunc_tol {
            stop = StopReason::Converged;
            break;
        }
        let s_next_exact = solve_recursion_step(|x| target.h(x), s_i, limits.recursion_tol)?;
        let quantized = quantize_block(
            s_i,
            s_next_exact,
            ell_exp.last().copied(),
            limits.ell_floor_exp,
        );
        let (mut exp, mut cnt, mut s_next) = match quantized {
            Ok(v) => v,
            Err(Error::EllFloor(_)) if !n.is_empty() => {
                stop = StopReason::EllFloor;
                break;
            }
            Err(e) => return Err(e),
        };
        // restore n_iℓ_i monotonicity if ceil-rounding broke it; halving ℓ
        // changes n·ℓ by at most one quantum per step
        while let Some(&prev_exp) = ell_exp.last() {
            let prev_nl = *n.last().unwrap() as f64 * pow2(prev_exp);
            if cnt as f64 * pow2(exp) <= prev_nl {
                break;
            }
            if exp - 1 < limits.ell_floor_exp {
                stop = StopReason::EllFloor;
                break;
            }
            exp -= 1;
            let ell = pow2(exp);
            let d = s_i - s_next_exact;
            cnt = ((3.0 * d / ell - 1e-9).ceil()).max(1.0) as u64;
            s_next = s_i - cnt as f64 * ell / 3.0;
        }
        if stop == StopReason::EllFloor {
            break;
        }
        if pieces + cnt > limits.max_pieces {
            if n.is_empty() {
                return Err(Error::BudgetExceeded(format!(
                    "first level already needs {cnt} pieces, budget {}",
                    limits.max_pieces
                )));
            }
            stop = StopReason::PieceBudget;
            break;
        }
        pieces += cnt;
        s.push(s_next);
        ell_exp.push(exp);
        n.push(cnt);
    }
    if n.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no level emitted: s0 = {s0} already below trunc_tol = {trunc_tol}?"
        )));
    }
    let depth = n.len();
    let d0 = s[0] - s[1];
    let ledger = ConstructionLedger {
        s_residual: s[depth],
        s,
        ell_exp,
        n,
        s0,
        depth,
        n_min: (1.0 / (12.0 * d0)).ceil() as u64,
        phi_max: 6.0 * d0,
        stop,
        target_spec: target.spec_string().to_string(),
    };
    let set = ledger.to_set();
    Ok(Construction { set, ledger })
}

/// Cumulative measure |T ∩ (−∞, y)| of a truncated train T with intervals
/// [x + per·u, x + per·u + ell), u = 0..n−1.
fn train_cumulative(x: f64, ell: f64, per: f64, n: u64, y: f64) -> f64 {
    if y <= x {
        return 0.0;
    }
    let end = x + per * (n - 1) as f64 + ell;
    if y >= end {
        return n as f64 * ell;
    }
    let u = ((y - x) / per).floor().min((n - 1) as f64);
    u * ell + (y - x - per * u).min(ell).max(0.0)
}

/// |W ∩ T| where W runs over the windows of train `win` and T is train
/// `tr` shifted by `shift`. Exact and O(1): the windows share one phase
/// modulo the finer period (dyadic lengths), so every window lying inside
/// the shifted train's span overlaps it by a fixed amount, and at most two
/// windows straddle the span ends.
fn train_pair_overlap(win: &BlockTrain, tr: &BlockTrain, shift: f64) -> f64 {
    let (wa, wl, wp, wm) = (win.start, win.ell, 2.0 * win.ell, win.count);
    let (x, tl, tq, tn) = (tr.start + shift, tr.ell, 2.0 * tr.ell, tr.count);
    let span_end = x + tq * tn as f64;
    // interior overlap per window: half the window when it spans whole
    // periods of the finer train, the alignment tent when periods match
    let interior = if wl > tl {
        0.5 * wl
    } else {
        debug_assert_eq!(wl, tl);
        let delta = (wa - x).rem_euclid(tq);
        (wl - delta).abs()
    };
    // windows fully inside [x, span_end)
    let mut t_lo = (((x - wa) / wp).ceil()).max(0.0) as i64;
    let mut t_hi = (((span_end - wl - wa) / wp).floor()).min((wm - 1) as f64) as i64;
    while t_lo as u64 <= wm.saturating_sub(1)
        && t_lo >= 0
        && wa + wp * t_lo as f64 < x
    {
        t_lo += 1;
    }
    while t_hi >= 0 && wa + wp * t_hi as f64 + wl > span_end {
        t_hi -= 1;
    }
    let mut total = 0.0;
    if t_hi >= t_lo {
        total += (t_hi - t_lo + 1) as f64 * interior;
    }
    // straddling candidates around the interior range; windows that miss
    // the span contribute exactly zero through the cumulative form
    let mut eval_window = |t: i64| {
        if t < 0 || t as u64 >= wm {
            return;
        }
        let a = wa + wp * t as f64;
        total += train_cumulative(x, tl, tq, tn, a + wl) - train_cumulative(x, tl, tq, tn, a);
    };
    if t_hi >= t_lo {
        eval_window(t_lo - 2);
        eval_window(t_lo - 1);
        eval_window(t_hi + 1);
        eval_window(t_hi + 2);
    } else {
        for t in (t_hi - 1).min(t_lo - 2)..=(t_lo + 1).max(t_hi + 2) {
            eval_window(t);
        }
    }
    total
}

/// Λ_K(φ) for a block layout, exact in O(depth²).
///
/// Valid while K+φ stays inside [0,1) (no circle wrap), which holds for
/// every φ the verifier probes; returns None otherwise so callers can fall
/// back to the generic sweep.
pub fn lambda_from_blocks(blocks: &[BlockTrain], phi: f64) -> Option<f64> {
    let last = blocks.last()?;
    let span_end = last.start + 2.0 * last.ell * last.count as f64 - last.ell;
    if !(phi >= 0.0) || span_end + phi > 1.0 {
        return None;
    }
    let mut measure = 0.0;
    for b in blocks {
        measure += b.count as f64 * b.ell;
    }
    let mut overlap = 0.0;
    for win in blocks {
        for tr in blocks {
            // orient so the windows are the coarser train
            if win.ell >= tr.ell {
                overlap += train_pair_overlap(win, tr, phi);
            } else {
                overlap += train_pair_overlap(tr, win, -phi);
            }
        }
    }
    Some((measure - overlap).max(0.0))
}

/// Largest e with 2^e ≤ x, for finite positive x.
fn floor_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut e = x.log2().floor() as i32;
    // guard against log/floor edge rounding
    while pow2(e) > x {
        e -= 1;
    }
    while pow2(e + 1) <= x {
        e += 1;
    }
    e
}

fn pow2(e: i32) -> f64 {
    f64::powi(2.0, e)
}
