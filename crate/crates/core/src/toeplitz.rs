//! Symbol coefficients, Toeplitz blocks, block entropies S_N, and the
//! quadratic lower bound q_N = Tr Q_N(1−Q_N) computed by three routes:
//! eigenvalues, a band closed form, and a kernel quadrature against Λ_K.
//!
//! The symbol here is always an indicator χ_K, so the Fourier coefficients
//! come in closed form per interval, q_k = Σ_j (e^{−i2πk b_j} − e^{−i2πk a_j})
//! /(−i2πk), and the N×N block is the Hermitian Toeplitz matrix
//! (Q_N)_{rc} = q_{r−c}.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::construct::BlockTrain;
use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

/// Binary entropy with natural logarithm, clamped endpoints.
pub fn eta(x: f64) -> f64 {
    if x < 1e-15 || x > 1.0 - 1e-15 {
        0.0
    } else {
        -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
    }
}

/// Fourier coefficients q_k of χ_K for k = 0..=k_max (q_{−k} = conj(q_k)).
#[derive(Debug, Clone)]
pub struct SymbolCoefficients {
    q0: f64,
    q: Vec<Complex64>,
}

impl SymbolCoefficients {
    /// Closed form per piece; powers of e^{−i2πa} advance incrementally with
    /// periodic resync to keep the drift at a few ulp.
    pub fn from_set(k: &IntervalSet, k_max: usize) -> Self {
        assert!(k_max >= 1, "k_max must be >= 1");
        let pieces = k.pieces();
        const CHUNK: usize = 4096;
        const RESYNC: usize = 256;
        let nchunks = pieces.len().div_ceil(CHUNK).max(1);
        let partial: Vec<Vec<Complex64>> = (0..nchunks)
            .into_par_iter()
            .map(|ci| {
                let mut acc = vec![Complex64::ZERO; k_max];
                let lo = ci * CHUNK;
                let hi = (lo + CHUNK).min(pieces.len());
                for &(a, b) in &pieces[lo..hi] {
                    let wa = Complex64::from_polar(1.0, -2.0 * PI * a);
                    let wb = Complex64::from_polar(1.0, -2.0 * PI * b);
                    let mut pa = Complex64::ONE;
                    let mut pb = Complex64::ONE;
                    for k in 1..=k_max {
                        if k % RESYNC == 0 {
                            pa = Complex64::from_polar(1.0, -2.0 * PI * (k as f64 * a).fract());
                            pb = Complex64::from_polar(1.0, -2.0 * PI * (k as f64 * b).fract());
                        } else {
                            pa *= wa;
                            pb *= wb;
                        }
                        // ∫_a^b e^{−i2πkθ} dθ = (e^{−i2πkb} − e^{−i2πka}) / (−i2πk)
                        let num = pb - pa;
                        let denom = Complex64::new(0.0, -2.0 * PI * k as f64);
                        acc[k - 1] += num / denom;
                    }
                }
                acc
            })
            .collect();
        let mut q = vec![Complex64::ZERO; k_max];
        for part in partial {
            for (dst, src) in q.iter_mut().zip(part) {
                *dst += src;
            }
        }
        SymbolCoefficients { q0: k.measure(), q }
    }

    /// Closed form per block train: the train's coefficient is the single
    /// interval factor times a geometric sum over the train period. All
    /// phases reduce through exact dyadic products, so deep trains carry no
    /// accumulated phase error.
    pub fn from_blocks(blocks: &[BlockTrain], k_max: usize) -> Self {
        assert!(k_max >= 1, "k_max must be >= 1");
        let unit = |t: f64| Complex64::from_polar(1.0, -2.0 * PI * t.fract());
        let mut q = vec![Complex64::ZERO; k_max];
        let mut q0 = 0.0f64;
        for b in blocks {
            q0 += b.count as f64 * b.ell;
        }
        let ks: Vec<usize> = (1..=k_max).collect();
        const CHUNK: usize = 512;
        let partial: Vec<Vec<Complex64>> = ks
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = vec![Complex64::ZERO; chunk.len()];
                for (slot, &k) in acc.iter_mut().zip(chunk) {
                    let kf = k as f64;
                    let denom = Complex64::new(0.0, -2.0 * PI * kf);
                    let mut total = Complex64::ZERO;
                    for b in blocks {
                        let single = (unit(kf * b.ell) - Complex64::ONE) / denom;
                        let r = unit(2.0 * kf * b.ell);
                        let geo = if r == Complex64::ONE {
                            Complex64::new(b.count as f64, 0.0)
                        } else {
                            (unit(2.0 * kf * b.ell * b.count as f64) - Complex64::ONE)
                                / (r - Complex64::ONE)
                        };
                        total += unit(kf * b.start) * single * geo;
                    }
                    *slot = total;
                }
                acc
            })
            .collect();
        let mut idx = 0;
        for part in partial {
            for v in part {
                q[idx] = v;
                idx += 1;
            }
        }
        SymbolCoefficients { q0, q }
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn k_max(&self) -> usize {
        self.q.len()
    }

    /// q_k for any integer k with |k| ≤ k_max.
    pub fn q(&self, k: i64) -> Complex64 {
        if k == 0 {
            Complex64::new(self.q0, 0.0)
        } else if k > 0 {
            self.q[(k - 1) as usize]
        } else {
            self.q[(-k - 1) as usize].conj()
        }
    }
}

/// Hermitian Toeplitz block (Q_N)_{rc} = q_{r−c}, row-major.
pub fn toeplitz_matrix(coeffs: &SymbolCoefficients, n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidInput("matrix dimension 0".into()));
    }
    if n > coeffs.k_max() + 1 {
        return Err(Error::InsufficientCoefficients { need: n - 1, have: coeffs.k_max() });
    }
    let mut a = vec![Complex64::ZERO; n * n];
    for r in 0..n {
        for c in 0..n {
            a[r * n + c] = coeffs.q(r as i64 - c as i64);
        }
    }
    Ok(a)
}

/// Spectrum of Q_N, ascending, asserted inside [−ε, 1+ε] with ε = 1e-9·N
/// and clamped to [0, 1].
pub fn block_spectrum(coeffs: &SymbolCoefficients, n: usize) -> Result<Vec<f64>> {
    let a = toeplitz_matrix(coeffs, n)?;
    let eps = 1e-9 * n as f64;
    let mut evals = hermitian_eigenvalues(n, &a)?;
    for lam in &mut evals {
        if *lam < -eps || *lam > 1.0 + eps {
            return Err(Error::SymbolRange { n, value: *lam, eps });
        }
        *lam = lam.clamp(0.0, 1.0);
    }
    Ok(evals)
}

/// S_N = Σ η(λ_i) over the spectrum of Q_N.
pub fn entropy(coeffs: &SymbolCoefficients, n: usize) -> Result<f64> {
    Ok(block_spectrum(coeffs, n)?.iter().map(|&x| eta(x)).sum())
}

/// q_N from the spectrum: Σ λ_i(1−λ_i).
pub fn quadratic_bound_eig(coeffs: &SymbolCoefficients, n: usize) -> Result<f64> {
    Ok(block_spectrum(coeffs, n)?.iter().map(|&x| x * (1.0 - x)).sum())
}

/// q_N by the band identity. Expanding Tr Q_N − Tr Q_N² over the constant
/// diagonals gives q_N = N·q0 − [N·q0² + Σ_{k=1}^{N−1} 2(N−k)|q_k|²].
pub fn quadratic_bound_trace(coeffs: &SymbolCoefficients, n: usize) -> Result<f64> {
    if n == 0 || n > coeffs.k_max() + 1 {
        return Err(Error::InsufficientCoefficients {
            need: n.saturating_sub(1),
            have: coeffs.k_max(),
        });
    }
    let nf = n as f64;
    let mut band = nf * coeffs.q0 * coeffs.q0;
    for k in 1..n {
        band += 2.0 * (nf - k as f64) * coeffs.q((k) as i64).norm_sqr();
    }
    Ok(nf * coeffs.q0 - band)
}

// ---------------------------------------------------------------------------
// Λ_K as an exact polyline, and the kernel-quadrature route for q_N
// ---------------------------------------------------------------------------

/// Λ_K sampled exactly: piecewise linear with every breakpoint an endpoint
/// difference of K, so linear interpolation between nodes is exact.
#[derive(Debug, Clone)]
pub struct LambdaPolyline {
    xs: Vec<f64>,
    vals: Vec<f64>,
}

impl LambdaPolyline {
    /// Builds the polyline by sweeping the slope events of the pair
    /// correlation C(φ) = |K ∩ (K+φ)|; Λ = |K| − C. Each ordered interval
    /// pair contributes one trapezoid, i.e. four slope events. Cost and
    /// memory are O(m²), guarded by `piece_cap`.
    pub fn build(k: &IntervalSet, piece_cap: usize) -> Result<Self> {
        let m = k.piece_count();
        if m > piece_cap {
            return Err(Error::BudgetExceeded(format!(
                "lambda polyline needs {}m^2 events for m = {m}, cap = {piece_cap}",
                4
            )));
        }
        if m == 0 || k.measure() == 1.0 {
            return Ok(LambdaPolyline { xs: vec![0.0, 1.0], vals: vec![0.0, 0.0] });
        }
        let pieces = k.pieces();
        let mut events: Vec<(f64, f64)> = Vec::with_capacity(4 * m * m);
        let mut c0 = 0.0f64; // C(0)
        let mut slope0 = 0.0f64; // C'(0+)
        for &(ai, bi) in pieces {
            let li = bi - ai;
            for &(aj, bj) in pieces {
                let lj = bj - aj;
                let h = li.min(lj);
                let lo = ai - bj;
                let hi = bi - aj;
                // trapezoid over [lo, hi]: slope +1, 0, −1 on the three legs
                for (pos, delta) in
                    [(lo, 1.0), (lo + h, -1.0), (hi - h, -1.0), (hi, 1.0)]
                {
                    if pos > 0.0 && pos < 1.0 {
                        events.push((pos, delta));
                    } else if pos > -1.0 && pos < 0.0 {
                        events.push((pos + 1.0, delta));
                    } else if pos > 1.0 && pos < 2.0 {
                        events.push((pos - 1.0, delta));
                    }
                }
                // contributions already in progress at φ = 0 and from the
                // periodic image at φ = 1
                for base in [0.0, 1.0] {
                    c0 += trapezoid_value(lo, hi, h, base);
                    slope0 += trapezoid_slope_right(lo, hi, h, base);
                }
            }
        }
        events.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut xs = Vec::with_capacity(events.len() + 2);
        let mut vals = Vec::with_capacity(events.len() + 2);
        let q0 = k.measure();
        xs.push(0.0);
        vals.push(q0 - c0);
        let mut x = 0.0f64;
        let mut c = c0;
        let mut slope = slope0;
        let mut i = 0;
        while i < events.len() {
            let pos = events[i].0;
            c += slope * (pos - x);
            x = pos;
            while i < events.len() && events[i].0 == pos {
                slope += events[i].1;
                i += 1;
            }
            xs.push(x);
            vals.push(q0 - c);
        }
        c += slope * (1.0 - x);
        xs.push(1.0);
        vals.push(q0 - c);
        Ok(LambdaPolyline { xs, vals })
    }

    /// Λ_K(φ) by linear interpolation (exact between breakpoints).
    pub fn value(&self, phi: f64) -> f64 {
        let phi = phi.rem_euclid(1.0);
        let i = self.xs.partition_point(|&t| t <= phi).min(self.xs.len() - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.vals[i - 1], self.vals[i]);
        if x1 == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (phi - x0) / (x1 - x0)
    }

    /// Exact ∫_lo^hi Λ (trapezoid over the polyline nodes).
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        assert!((0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0);
        let mut acc = 0.0;
        let mut x = lo;
        let mut y = self.value(lo);
        let mut i = self.xs.partition_point(|&t| t <= lo);
        while i < self.xs.len() && self.xs[i] < hi {
            acc += 0.5 * (y + self.vals[i]) * (self.xs[i] - x);
            x = self.xs[i];
            y = self.vals[i];
            i += 1;
        }
        acc += 0.5 * (y + self.value(hi)) * (hi - x);
        acc
    }

    pub fn node_count(&self) -> usize {
        self.xs.len()
    }
}

fn trapezoid_value(lo: f64, hi: f64, h: f64, x: f64) -> f64 {
    if x <= lo || x >= hi {
        0.0
    } else if x < lo + h {
        x - lo
    } else if x <= hi - h {
        h
    } else {
        hi - x
    }
}

/// Right derivative of the trapezoid at x.
fn trapezoid_slope_right(lo: f64, hi: f64, h: f64, x: f64) -> f64 {
    if x < lo || x >= hi {
        0.0
    } else if x < lo + h {
        1.0
    } else if x < hi - h {
        0.0
    } else {
        -1.0
    }
}

/// Limits for the kernel-quadrature q_N route.
#[derive(Debug, Clone, Copy)]
pub struct IntegralLimits {
    /// Maximum piece count before the O(m²) breakpoint sweep is refused.
    pub piece_cap: usize,
    /// Maximum number of quadrature cells.
    pub cell_budget: usize,
}

impl Default for IntegralLimits {
    fn default() -> Self {
        IntegralLimits { piece_cap: 1024, cell_budget: 1 << 26 }
    }
}

/// q_N = ∫₀¹ (sin²Nπφ / sin²πφ)·Λ_K(φ) dφ by composite midpoint quadrature
/// on cells that never straddle a kink of Λ.
///
/// On a kink-free cell Λ is linear, so the midpoint error is governed by
/// (w³/24)·max|(kΛ)″| with (kΛ)″ = k″Λ + 2k′Λ′; the kernel derivative
/// bounds are taken locally away from the endpoints (|k| ≤ 1/sin²πδ) and
/// from the trigonometric-polynomial expansion near them (|k″| ≤
/// (2π²/3)N²(N²−1)). Cells are split until the summed bound meets
/// `abs_tol`; the bound actually achieved is returned as err_bound.
pub fn quadratic_bound_integral(
    k: &IntervalSet,
    n: usize,
    abs_tol: f64,
    limits: &IntegralLimits,
) -> Result<(f64, f64)> {
    let poly = LambdaPolyline::build(k, limits.piece_cap)?;
    quadratic_bound_integral_cached(&poly, n, abs_tol, limits)
}

/// Same as [`quadratic_bound_integral`] with a pre-built polyline (the
/// polyline does not depend on N, so scans reuse it across rows).
pub fn quadratic_bound_integral_cached(
    poly: &LambdaPolyline,
    n: usize,
    abs_tol: f64,
    limits: &IntegralLimits,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    if abs_tol <= 0.0 {
        return Err(Error::InvalidInput("abs_tol must be positive".into()));
    }
    let nf = n as f64;
    // global trig-polynomial bounds, valid on all of [0,1]
    let k1_global = 2.0 * PI / 3.0 * (nf * nf * nf - nf);
    let k2_global = 2.0 * PI * PI / 3.0 * nf * nf * (nf * nf - 1.0);
    let kernel = |phi: f64| -> f64 {
        let s = (PI * phi).sin();
        if s == 0.0 {
            nf * nf
        } else {
            let t = (nf * PI * phi).sin() / s;
            t * t
        }
    };
    // local kernel bounds on a cell at distance >= delta from {0, 1}
    let local_bounds = |delta: f64| -> (f64, f64) {
        let s = (PI * delta).sin();
        if s <= 0.0 {
            return (k1_global, k2_global);
        }
        let u = nf.min(1.0 / s);
        let du = PI * (nf + u) / s;
        let ddu = (PI * PI * (nf * nf + u) + 2.0 * PI * du) / s;
        let k1 = 2.0 * u * du;
        let k2 = 2.0 * (du * du + u * ddu);
        (k1.min(k1_global), k2.min(k2_global))
    };

    let mut total = 0.0f64;
    let mut err = 0.0f64;
    let mut cells_used = 0usize;
    // per-unit-width error allowance
    let alloc = abs_tol;

    let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
    for seg in 0..poly.xs.len() - 1 {
        let (x0, x1) = (poly.xs[seg], poly.xs[seg + 1]);
        if x1 <= x0 {
            continue;
        }
        let (y0, y1) = (poly.vals[seg], poly.vals[seg + 1]);
        let slope = (y1 - y0) / (x1 - x0);
        stack.push((x0, x1, y0, slope, 0));
        while let Some((u, v, yu, sl, depth)) = stack.pop() {
            let w = v - u;
            let delta = u.min(1.0 - v).max(0.0);
            let (k1, k2) = local_bounds(delta);
            let lam_max = yu.abs().max((yu + sl * w).abs());
            let bound = w * w * w / 24.0 * (k2 * lam_max + 2.0 * k1 * sl.abs());
            if bound <= alloc * w || depth >= 52 || w < 1e-300 {
                let mid = 0.5 * (u + v);
                let lam_mid = yu + sl * (mid - u);
                total += kernel(mid) * lam_mid * w;
                err += bound;
                cells_used += 1;
                if cells_used > limits.cell_budget {
                    return Err(Error::BudgetExceeded(format!(
                        "kernel quadrature exceeded the cell budget {}",
                        limits.cell_budget
                    )));
                }
            } else {
                let mid = 0.5 * (u + v);
                stack.push((u, mid, yu, sl, depth + 1));
                stack.push((mid, v, yu + sl * (mid - u), sl, depth + 1));
            }
        }
    }
    // round-off slop on top of the rule bound
    err += 64.0 * f64::EPSILON * nf * nf * poly.vals.iter().cloned().fold(0.0, f64::max);
    Ok((total, err))
}

/// Options for [`entropy_scan`].
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Tolerance passed to the kernel quadrature per row.
    pub integral_abs_tol: f64,
    /// Piece cap for the O(m²) Λ polyline; above it the integral route is
    /// skipped and the corresponding columns report nan.
    pub integral_piece_cap: usize,
    pub integral_cell_budget: usize,
    /// Pair budget for the lower-bound Λ integral (B₁ column).
    pub lambda_pair_budget: u64,
    pub lambda_abs_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            integral_abs_tol: 1e-6,
            integral_piece_cap: 1024,
            integral_cell_budget: 1 << 26,
            lambda_pair_budget: 1 << 31,
            lambda_abs_tol: 1e-9,
        }
    }
}

/// Runs one row per N: S_N, the three q_N routes, and (with a target) the
/// lower-bound pair B₁, B₂ and f_N. Rows are independent and computed in
/// parallel; the output is assembled in ascending N regardless of
/// scheduling. Per-row failures mark the row instead of aborting the scan.
pub fn entropy_scan(
    k: &IntervalSet,
    n_list: &[usize],
    target: Option<&crate::target::GrowthTarget>,
    opts: &ScanOptions,
) -> Result<crate::report::EntropyReport> {
    use crate::report::{EntropyReport, ScanRow};
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty N list".into()));
    }
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().unwrap();
    let coeffs = SymbolCoefficients::from_set(k, n_max.max(2) - 1);
    let poly = if k.piece_count() <= opts.integral_piece_cap {
        Some(LambdaPolyline::build(k, opts.integral_piece_cap)?)
    } else {
        None
    };
    let limits = IntegralLimits {
        piece_cap: opts.integral_piece_cap,
        cell_budget: opts.integral_cell_budget,
    };
    let rows: Vec<ScanRow> = ns
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let (s_n, q_eig) = match block_spectrum(&coeffs, n) {
                Ok(spec) => (
                    spec.iter().map(|&x| eta(x)).sum::<f64>(),
                    spec.iter().map(|&x| x * (1.0 - x)).sum::<f64>(),
                ),
                Err(_) => (f64::NAN, f64::NAN),
            };
            let q_trace = quadratic_bound_trace(&coeffs, n).unwrap_or(f64::NAN);
            let q_integral = poly.as_ref().and_then(|p| {
                quadratic_bound_integral_cached(p, n, opts.integral_abs_tol, &limits).ok()
            });
            let (lower_integral, lower_g, f_n) = match target {
                Some(t) => {
                    let w = 1.0 / (2.0 * nf);
                    let b1 = k
                        .lambda_integral(0.0, w, opts.lambda_abs_tol, opts.lambda_pair_budget)
                        .ok()
                        .map(|(v, _)| 4.0 * nf * nf / (PI * PI) * v);
                    let b2 = 2.0 * nf / (PI * PI) * t.g(w);
                    (b1, Some(b2), Some(t.f(n as u64)))
                }
                None => (None, None, None),
            };
            let scale = q_trace.abs().max(1.0);
            let mut ok = s_n.is_finite() && q_trace.is_finite();
            ok &= s_n >= q_trace - 1e-12 * scale;
            ok &= (q_eig - q_trace).abs() <= 1e-10 * scale;
            if let Some((qi, err)) = q_integral {
                ok &= (qi - q_trace).abs() <= err + 1e-9;
            }
            if let Some(b1) = lower_integral {
                ok &= q_trace >= b1 - opts.lambda_abs_tol - 1e-12 * scale;
            }
            ScanRow {
                n,
                s_n,
                q_eig,
                q_trace,
                q_integral,
                lower_integral,
                lower_g,
                f_n,
                chain_ok: ok,
            }
        })
        .collect();
    let mut header = vec![
        ("k_max".to_string(), format!("{}", n_max.max(2) - 1)),
        ("integral_abs_tol".to_string(), format!("{:e}", opts.integral_abs_tol)),
        ("integral_piece_cap".to_string(), format!("{}", opts.integral_piece_cap)),
        ("lambda_abs_tol".to_string(), format!("{:e}", opts.lambda_abs_tol)),
        ("pieces".to_string(), format!("{}", k.piece_count())),
    ];
    if let Some(t) = target {
        header.push(("target".to_string(), t.spec_string().to_string()));
    }
    Ok(EntropyReport { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> IntervalSet {
        IntervalSet::normalize(&[(0.0, 0.5)]).unwrap()
    }

    #[test]
    fn coefficients_of_half_circle() {
        // q_k = -i/(pi k) for odd k, 0 for even k != 0
        let c = SymbolCoefficients::from_set(&half(), 8);
        assert_eq!(c.q0(), 0.5);
        for k in 1..=8i64 {
            let expect = if k % 2 == 1 {
                Complex64::new(0.0, -1.0 / (PI * k as f64))
            } else {
                Complex64::ZERO
            };
            assert!((c.q(k) - expect).norm() < 1e-14, "k={k}: {:?}", c.q(k));
            assert!((c.q(-k) - expect.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn coefficients_match_quadrature_oracle() {
        // Riemann quadrature of ∫ e^{−i2πkθ} dθ over K at 10^6 nodes
        let k = IntervalSet::normalize(&[(0.1, 0.3), (0.55, 0.8)]).unwrap();
        let c = SymbolCoefficients::from_set(&k, 5);
        let nodes = 1_000_000;
        for kk in 1..=5i64 {
            let mut acc = Complex64::ZERO;
            for i in 0..nodes {
                let th = (i as f64 + 0.5) / nodes as f64;
                if k.contains(th) {
                    acc += Complex64::from_polar(1.0, -2.0 * PI * kk as f64 * th);
                }
            }
            acc /= nodes as f64;
            assert!((c.q(kk) - acc).norm() < 1e-6, "k={kk}");
        }
    }

    #[test]
    fn translation_modulates_phase_only() {
        let k = IntervalSet::normalize(&[(0.1, 0.3), (0.55, 0.8)]).unwrap();
        let shift = 0.1375;
        let kt = k.translate(shift);
        let a = SymbolCoefficients::from_set(&k, 16);
        let b = SymbolCoefficients::from_set(&kt, 16);
        for kk in 1..=16i64 {
            let phase = Complex64::from_polar(1.0, -2.0 * PI * kk as f64 * shift);
            assert!((b.q(kk) - a.q(kk) * phase).norm() < 1e-12, "k={kk}");
            assert!((b.q(kk).norm() - a.q(kk).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn block_coefficients_match_per_piece() {
        use crate::construct::{build_set, BuildLimits};
        use crate::target::GrowthTarget;
        let target = GrowthTarget::power(0.04, 0.5).unwrap();
        let limits = BuildLimits { max_pieces: 1 << 9, ..Default::default() };
        let c = build_set(&target, 1.0 / 13.0, 1e-6, &limits).unwrap();
        let a = SymbolCoefficients::from_set(&c.set, 64);
        let b = SymbolCoefficients::from_blocks(&c.ledger.blocks(), 64);
        assert!((a.q0() - b.q0()).abs() < 1e-14);
        for kk in 1..=64i64 {
            assert!((a.q(kk) - b.q(kk)).norm() < 1e-12, "k={kk}");
        }
    }

    #[test]
    fn toeplitz_block_layout() {
        let c = SymbolCoefficients::from_set(&half(), 4);
        let m1 = toeplitz_matrix(&c, 1).unwrap();
        assert_eq!(m1, vec![Complex64::new(0.5, 0.0)]);
        let m2 = toeplitz_matrix(&c, 2).unwrap();
        // entry (0,1) = q_{-1} = conj(q_1) = i/pi
        assert!((m2[1] - Complex64::new(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!((m2[2] - Complex64::new(0.0, -1.0 / PI)).norm() < 1e-15);
        // trace = N q0
        let m5 = toeplitz_matrix(&c, 4).unwrap();
        let tr: Complex64 = (0..4).map(|i| m5[i * 4 + i]).sum();
        assert!((tr.re - 4.0 * 0.5).abs() < 1e-15);
        assert!(toeplitz_matrix(&c, 6).is_err());
    }

    #[test]
    fn entropy_trivial_and_small() {
        let c_empty = SymbolCoefficients::from_set(&IntervalSet::empty(), 4);
        let c_full = SymbolCoefficients::from_set(&IntervalSet::full(), 4);
        for n in 1..=5 {
            assert_eq!(entropy(&c_empty, n).unwrap(), 0.0);
            assert_eq!(entropy(&c_full, n).unwrap(), 0.0);
        }
        let c = SymbolCoefficients::from_set(&half(), 4);
        assert!((entropy(&c, 1).unwrap() - 2f64.ln()).abs() < 1e-14);
        // N=2: eigenvalues 1/2 ± 1/pi
        let p = 1.0 / PI;
        let expect = eta(0.5 - p) + eta(0.5 + p);
        assert!((entropy(&c, 2).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn quadratic_bound_closed_forms() {
        let c = SymbolCoefficients::from_set(&half(), 4);
        assert!((quadratic_bound_trace(&c, 1).unwrap() - 0.25).abs() < 1e-15);
        let expect = 0.5 - 2.0 / (PI * PI);
        assert!((quadratic_bound_trace(&c, 2).unwrap() - expect).abs() < 1e-14);
        // eigenvalue route agrees
        let e = quadratic_bound_eig(&c, 2).unwrap();
        assert!((e - expect).abs() < 1e-13);
    }

    #[test]
    fn lambda_polyline_matches_direct_lambda() {
        let k = IntervalSet::normalize(&[(0.05, 0.15), (0.3, 0.42), (0.8, 0.97)]).unwrap();
        let poly = LambdaPolyline::build(&k, 1 << 12).unwrap();
        for i in 0..997 {
            let phi = i as f64 / 997.0;
            let direct = k.lambda(phi);
            let interp = poly.value(phi);
            assert!((direct - interp).abs() < 1e-12, "phi={phi}: {direct} vs {interp}");
        }
    }

    #[test]
    fn lambda_polyline_integral_matches_pair_sweep() {
        let k = IntervalSet::normalize(&[(0.05, 0.15), (0.3, 0.42), (0.8, 0.97)]).unwrap();
        let poly = LambdaPolyline::build(&k, 1 << 12).unwrap();
        let (v, e) = k.lambda_integral(0.02, 0.41, 1e-9, 1 << 24).unwrap();
        let pv = poly.integral(0.02, 0.41);
        assert!((v - pv).abs() <= e + 1e-12, "{v} vs {pv}");
    }

    #[test]
    fn integral_route_agrees_with_trace_route() {
        let k = half();
        let c = SymbolCoefficients::from_set(&k, 64);
        let lim = IntegralLimits::default();
        for n in [1usize, 2, 3, 8, 32] {
            let (qi, err) = quadratic_bound_integral(&k, n, 1e-8, &lim).unwrap();
            let qt = quadratic_bound_trace(&c, n).unwrap();
            assert!(
                (qi - qt).abs() <= err + 1e-9,
                "N={n}: integral {qi} vs trace {qt}, err {err}"
            );
        }
    }

    #[test]
    fn integral_route_on_two_piece_set() {
        let k = IntervalSet::normalize(&[(0.1, 0.35), (0.6, 0.71)]).unwrap();
        let c = SymbolCoefficients::from_set(&k, 32);
        let lim = IntegralLimits::default();
        for n in [2usize, 7, 16] {
            let (qi, err) = quadratic_bound_integral(&k, n, 1e-8, &lim).unwrap();
            let qt = quadratic_bound_trace(&c, n).unwrap();
            assert!((qi - qt).abs() <= err + 1e-9, "N={n}: {qi} vs {qt} (err {err})");
        }
    }

    #[test]
    fn spectrum_bound_and_particle_hole() {
        let k = IntervalSet::normalize(&[(0.1, 0.35), (0.6, 0.71)]).unwrap();
        let c = SymbolCoefficients::from_set(&k, 64);
        let spec = block_spectrum(&c, 48).unwrap();
        assert!(spec.iter().all(|&x| (0.0..=1.0).contains(&x)));
        // complement: S and q unchanged
        let kc = k.complement();
        let cc = SymbolCoefficients::from_set(&kc, 64);
        let s1 = entropy(&c, 48).unwrap();
        let s2 = entropy(&cc, 48).unwrap();
        assert!((s1 - s2).abs() < 1e-10, "{s1} vs {s2}");
        let q1 = quadratic_bound_trace(&c, 48).unwrap();
        let q2 = quadratic_bound_trace(&cc, 48).unwrap();
        assert!((q1 - q2).abs() < 1e-10);
    }

    #[test]
    fn scan_rows_and_flags() {
        let k = half();
        let rep = entropy_scan(&k, &[4, 1, 2], None, &ScanOptions::default()).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert_eq!(rep.rows[0].n, 1);
        assert!((rep.rows[0].s_n - 2f64.ln()).abs() < 1e-14);
        assert!(rep.rows.iter().all(|r| r.chain_ok));
        // trivial set: single zero row
        let rep = entropy_scan(&IntervalSet::empty(), &[1], None, &ScanOptions::default())
            .unwrap();
        assert_eq!(rep.rows[0].s_n, 0.0);
        assert_eq!(rep.rows[0].q_trace, 0.0);
    }

    #[test]
    fn parseval_monotone_with_tail_bound() {
        let k = IntervalSet::normalize(&[(0.1, 0.35), (0.6, 0.71), (0.8, 0.85)]).unwrap();
        let k_max = 4096;
        let c = SymbolCoefficients::from_set(&k, k_max);
        let target = c.q0() - c.q0() * c.q0();
        let m = k.piece_count() as f64;
        let mut partial = 0.0;
        let mut prev = 0.0;
        for kk in 1..=k_max {
            partial += 2.0 * c.q(kk as i64).norm_sqr();
            assert!(partial >= prev);
            assert!(partial <= target + 1e-12);
            prev = partial;
        }
        let tail = target - partial;
        let bound = 2.0 * m * m / (PI * PI * k_max as f64);
        assert!(tail >= -1e-12 && tail <= bound, "tail {tail} vs bound {bound}");
    }
}
