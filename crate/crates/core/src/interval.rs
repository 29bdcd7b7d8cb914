//! Exact arithmetic on finite unions of half-open intervals on the unit
//! circle [0,1), including the translation-difference measure
//! Λ_K(φ) = |(K+φ)\K| and its integrals.
//!
//! Sets are kept in a canonical form: pieces sorted by left endpoint,
//! pairwise disjoint, never adjacent (a gap of positive length separates
//! consecutive pieces), every piece inside [0,1]. Zero-measure pieces are
//! dropped during normalization. All operations are pure; values are
//! immutable once built.

use crate::error::{Error, Result};

/// Finite disjoint union of half-open intervals [a,b) on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pieces: Vec<(f64, f64)>,
    total: f64,
}

impl IntervalSet {
    /// The empty set.
    pub fn empty() -> Self {
        IntervalSet { pieces: Vec::new(), total: 0.0 }
    }

    /// The full circle [0,1).
    pub fn full() -> Self {
        IntervalSet { pieces: vec![(0.0, 1.0)], total: 1.0 }
    }

    /// Canonical set from raw pairs. Pieces are reduced mod 1 (a piece
    /// crossing 1 is split in two), sorted, merged when overlapping or
    /// adjacent. Zero-width pairs are dropped; non-finite input or a
    /// negative width is rejected.
    pub fn normalize(raw: &[(f64, f64)]) -> Result<Self> {
        let mut parts: Vec<(f64, f64)> = Vec::with_capacity(raw.len() + 4);
        for &(a, b) in raw {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite interval ({a}, {b})")));
            }
            let w = b - a;
            if w < 0.0 {
                return Err(Error::InvalidInput(format!("negative width interval ({a}, {b})")));
            }
            if w == 0.0 {
                continue;
            }
            if w >= 1.0 {
                return Ok(Self::full());
            }
            let a = a.rem_euclid(1.0);
            let end = a + w;
            if end <= 1.0 {
                parts.push((a, end));
            } else {
                parts.push((a, 1.0));
                parts.push((0.0, end - 1.0));
            }
        }
        parts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match pieces.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => pieces.push((a, b)),
            }
        }
        if pieces.len() == 1 && pieces[0] == (0.0, 1.0) {
            return Ok(Self::full());
        }
        let total = pieces.iter().map(|(a, b)| b - a).sum();
        Ok(IntervalSet { pieces, total })
    }

    /// Builds from pieces already in canonical form (sorted, disjoint,
    /// non-adjacent, inside [0,1]). Checked in debug builds only; used by
    /// the constructor, whose layout is canonical by design.
    pub(crate) fn from_canonical(pieces: Vec<(f64, f64)>) -> Self {
        debug_assert!(pieces.windows(2).all(|w| w[0].1 < w[1].0));
        debug_assert!(pieces.iter().all(|&(a, b)| 0.0 <= a && a < b && b <= 1.0));
        let total = pieces.iter().map(|(a, b)| b - a).sum();
        IntervalSet { pieces, total }
    }

    /// Lebesgue measure |K|. Cached; equals the sum of piece lengths.
    pub fn measure(&self) -> f64 {
        self.total
    }

    /// Number of pieces in canonical form.
    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Canonical pieces, sorted by left endpoint.
    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Membership test (half-open convention).
    pub fn contains(&self, x: f64) -> bool {
        let x = x.rem_euclid(1.0);
        match self.pieces.binary_search_by(|&(a, _)| a.partial_cmp(&x).unwrap()) {
            Ok(_) => true,
            Err(0) => false,
            Err(i) => x < self.pieces[i - 1].1,
        }
    }

    /// K + φ on the circle; measure is preserved exactly (each endpoint is
    /// shifted by the same amount, wrap splits one piece in two).
    pub fn translate(&self, phi: f64) -> Self {
        if self.pieces.is_empty() {
            return self.clone();
        }
        if self.total == 1.0 {
            return Self::full();
        }
        let phi = phi.rem_euclid(1.0);
        if phi == 0.0 {
            return self.clone();
        }
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.pieces.len() + 1);
        // pieces that wrap past 1 come first in the translated order
        for &(a, b) in &self.pieces {
            let (ta, tb) = (a + phi, b + phi);
            if ta >= 1.0 {
                out.push((ta - 1.0, tb - 1.0));
            } else if tb > 1.0 {
                out.push((0.0, tb - 1.0));
            }
        }
        let wrapped = out.len();
        for &(a, b) in &self.pieces {
            let (ta, tb) = (a + phi, b + phi);
            if tb <= 1.0 {
                out.push((ta, tb));
            } else if ta < 1.0 {
                out.push((ta, 1.0));
            }
        }
        // a head fragment [0,x) and a tail fragment [y,1) may now be
        // adjacent to neighbours; re-merge cheaply
        out[wrapped..].sort_by(|x, y| x.partial_cmp(y).unwrap());
        out[..wrapped].sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(out.len());
        for (a, b) in out {
            match pieces.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => pieces.push((a, b)),
            }
        }
        let total = pieces.iter().map(|(a, b)| b - a).sum();
        IntervalSet { pieces, total }
    }

    /// Complement of K in [0,1).
    pub fn complement(&self) -> Self {
        if self.pieces.is_empty() {
            return Self::full();
        }
        let mut pieces = Vec::with_capacity(self.pieces.len() + 1);
        let mut cur = 0.0;
        for &(a, b) in &self.pieces {
            if a > cur {
                pieces.push((cur, a));
            }
            cur = b;
        }
        if cur < 1.0 {
            pieces.push((cur, 1.0));
        }
        let total = pieces.iter().map(|(a, b)| b - a).sum();
        IntervalSet { pieces, total }
    }

    /// A ∩ B via endpoint sweep.
    pub fn intersect(a: &Self, b: &Self) -> Self {
        let mut pieces = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.pieces.len() && j < b.pieces.len() {
            let (la, ra) = a.pieces[i];
            let (lb, rb) = b.pieces[j];
            let lo = la.max(lb);
            let hi = ra.min(rb);
            if hi > lo {
                pieces.push((lo, hi));
            }
            if ra < rb {
                i += 1;
            } else {
                j += 1;
            }
        }
        let total = pieces.iter().map(|(a, b)| b - a).sum();
        IntervalSet { pieces, total }
    }

    /// A \ B.
    pub fn difference(a: &Self, b: &Self) -> Self {
        Self::intersect(a, &b.complement())
    }

    /// |A ∩ B| without materializing the intersection.
    pub fn intersection_measure(a: &Self, b: &Self) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut tot = 0.0;
        while i < a.pieces.len() && j < b.pieces.len() {
            let (la, ra) = a.pieces[i];
            let (lb, rb) = b.pieces[j];
            let w = ra.min(rb) - la.max(lb);
            if w > 0.0 {
                tot += w;
            }
            if ra < rb {
                i += 1;
            } else {
                j += 1;
            }
        }
        tot
    }

    /// Λ_K(φ) = |(K+φ)\K| = |K| − |K ∩ (K+φ)|.
    pub fn lambda(&self, phi: f64) -> f64 {
        if self.pieces.is_empty() || self.total == 1.0 {
            return 0.0;
        }
        let shifted = self.translate(phi);
        (self.total - Self::intersection_measure(self, &shifted)).max(0.0)
    }

    /// ∫_lo^hi Λ_K(φ) dφ with a guaranteed error bound.
    ///
    /// Λ_K is piecewise linear in φ, so the integral decomposes exactly over
    /// interval pairs: |K ∩ (K+φ)| = Σ_{i,j,k} |P_i ∩ (P_j + φ + k)| with
    /// k ∈ {−1,0,1}, and each pair term is a trapezoid in φ whose
    /// antiderivative is closed-form. The returned err_bound only accounts
    /// for floating-point accumulation.
    ///
    /// Fails with `BudgetExceeded` when the number of contributing pairs
    /// exceeds `pair_budget` (dense sets over wide φ ranges).
    pub fn lambda_integral(
        &self,
        lo: f64,
        hi: f64,
        abs_tol: f64,
        pair_budget: u64,
    ) -> Result<(f64, f64)> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "integration range [{lo}, {hi}] not inside [0, 1]"
            )));
        }
        if abs_tol <= 0.0 {
            return Err(Error::InvalidInput("abs_tol must be positive".into()));
        }
        if self.pieces.is_empty() || self.total == 1.0 {
            return Ok((0.0, 0.0));
        }
        let m = self.pieces.len();
        let lefts: Vec<f64> = self.pieces.iter().map(|p| p.0).collect();
        let rights: Vec<f64> = self.pieces.iter().map(|p| p.1).collect();

        // count pairs first so the budget check is cheap and exact
        let mut pairs: u64 = 0;
        for j in 0..m {
            let (aj, bj) = self.pieces[j];
            for k in [-1.0f64, 0.0, 1.0] {
                let win_lo = aj + lo + k;
                let win_hi = bj + hi + k;
                let start = rights.partition_point(|&b| b <= win_lo);
                let end = lefts.partition_point(|&a| a < win_hi);
                pairs += (end.saturating_sub(start)) as u64;
            }
        }
        if pairs > pair_budget {
            return Err(Error::BudgetExceeded(format!(
                "lambda_integral needs {pairs} interval pairs, budget is {pair_budget}"
            )));
        }

        use rayon::prelude::*;
        const CHUNK: usize = 2048;
        // fixed chunking + ordered reduction keeps the sum identical across
        // worker counts
        let partial: Vec<(f64, f64)> = (0..m.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let j0 = c * CHUNK;
                let j1 = (j0 + CHUNK).min(m);
                let mut sum = 0.0f64;
                let mut abs = 0.0f64;
                for j in j0..j1 {
                    let (aj, bj) = self.pieces[j];
                    let lj = bj - aj;
                    for k in [-1.0f64, 0.0, 1.0] {
                        let win_lo = aj + lo + k;
                        let win_hi = bj + hi + k;
                        let start = rights.partition_point(|&b| b <= win_lo);
                        let end = lefts.partition_point(|&a| a < win_hi);
                        for i in start..end {
                            let (ai, bi) = self.pieces[i];
                            let li = bi - ai;
                            // overlap(φ) of P_i with P_j + φ + k
                            let support_lo = ai - bj - k;
                            let support_hi = bi - aj - k;
                            let h = li.min(lj);
                            let t = trapezoid_integral(support_lo, support_hi, h, lo, hi);
                            sum += t;
                            abs += t.abs();
                        }
                    }
                }
                (sum, abs)
            })
            .collect();
        let mut overlap_int = 0.0;
        let mut abs_accum = 0.0;
        for (s, a) in partial {
            overlap_int += s;
            abs_accum += a;
        }
        let value = self.total * (hi - lo) - overlap_int;
        let err = 8.0 * f64::EPSILON * (abs_accum + self.total * (hi - lo)) + f64::MIN_POSITIVE;
        if err > abs_tol {
            return Err(Error::BudgetExceeded(format!(
                "round-off bound {err:.3e} exceeds abs_tol {abs_tol:.3e}"
            )));
        }
        Ok((value.max(0.0), err))
    }

    /// Writes the set file: one "a,b" line per piece, 17 significant digits,
    /// sorted; '#' lines are comments.
    pub fn to_set_file(&self) -> String {
        let mut s = String::with_capacity(self.pieces.len() * 48 + 64);
        s.push_str("# interval set on [0,1): half-open pieces \"a,b\", sorted\n");
        for &(a, b) in &self.pieces {
            s.push_str(&format!("{:.16e},{:.16e}\n", a, b));
        }
        s
    }

    /// Parses the set file format produced by [`IntervalSet::to_set_file`].
    pub fn from_set_file(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or(Error::Parse {
                line: idx + 1,
                msg: "expected \"a,b\"".into(),
            })?;
            let a: f64 = a.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad endpoint: {e}"),
            })?;
            let b: f64 = b.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad endpoint: {e}"),
            })?;
            raw.push((a, b));
        }
        Self::normalize(&raw)
    }
}

/// ∫_lo^hi T(φ) dφ for the trapezoid T supported on (support_lo, support_hi)
/// with plateau height h: rises with slope 1, plateaus, falls with slope −1.
fn trapezoid_integral(support_lo: f64, support_hi: f64, h: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(h > 0.0);
    let anti = |x: f64| -> f64 {
        // antiderivative of T measured from support_lo
        let x = x.clamp(support_lo, support_hi);
        let rise_end = support_lo + h;
        let fall_start = support_hi - h;
        let total = h * (support_hi - support_lo - h);
        if x <= rise_end {
            let t = x - support_lo;
            0.5 * t * t
        } else if x <= fall_start {
            0.5 * h * h + h * (x - rise_end)
        } else {
            let t = support_hi - x;
            total - 0.5 * t * t
        }
    };
    anti(hi) - anti(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(raw: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::normalize(raw).unwrap()
    }

    #[test]
    fn normalize_sorts_and_merges() {
        let k = set(&[(0.5, 0.7), (0.1, 0.3)]);
        assert_eq!(k.pieces(), &[(0.1, 0.3), (0.5, 0.7)]);

        let k = set(&[(0.1, 0.2), (0.2, 0.3)]);
        assert_eq!(k.pieces(), &[(0.1, 0.3)]);

        let k = set(&[(0.9, 1.1)]);
        assert_eq!(k.pieces(), &[(0.0, 0.10000000000000009), (0.9, 1.0)]);
        assert!((k.measure() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn normalize_drops_zero_width_and_rejects_bad_input() {
        let k = set(&[(0.3, 0.3), (0.5, 0.6)]);
        assert_eq!(k.piece_count(), 1);
        assert!(IntervalSet::normalize(&[(f64::NAN, 0.5)]).is_err());
        assert!(IntervalSet::normalize(&[(0.5, 0.4)]).is_err());
    }

    #[test]
    fn measure_basics() {
        assert_eq!(IntervalSet::empty().measure(), 0.0);
        assert_eq!(set(&[(0.0, 0.5)]).measure(), 0.5);
        assert_eq!(set(&[(0.0, 0.25), (0.5, 0.75)]).measure(), 0.5);
    }

    #[test]
    fn translate_examples() {
        let k = set(&[(0.0, 0.25)]);
        assert_eq!(k.translate(0.5).pieces(), &[(0.5, 0.75)]);

        let k = set(&[(0.75, 1.0)]);
        assert_eq!(k.translate(0.5).pieces(), &[(0.25, 0.5)]);

        let k = set(&[(0.1, 0.2), (0.4, 0.9)]);
        assert_eq!(k.translate(0.0), k);
        // wrap splits then stays canonical
        let t = k.translate(0.3);
        assert!((t.measure() - k.measure()).abs() < 1e-15);
        assert!(t.pieces().windows(2).all(|w| w[0].1 < w[1].0));
    }

    #[test]
    fn set_ops_examples() {
        let a = set(&[(0.0, 0.5)]);
        let b = set(&[(0.25, 0.75)]);
        assert_eq!(IntervalSet::difference(&a, &b).pieces(), &[(0.0, 0.25)]);
        assert_eq!(IntervalSet::intersect(&a, &b).pieces(), &[(0.25, 0.5)]);
        assert_eq!(IntervalSet::difference(&a, &IntervalSet::empty()), a);
    }

    #[test]
    fn lambda_examples() {
        let k = set(&[(0.0, 0.25)]);
        assert!((k.lambda(0.125) - 0.125).abs() < 1e-15);
        assert_eq!(k.lambda(0.0), 0.0);

        let k = set(&[(0.0, 0.25), (0.5, 0.75)]);
        assert!((k.lambda(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lambda_integral_linear_ramp() {
        // Λ(φ) = φ on [0, 0.25] for a single quarter interval
        let k = set(&[(0.0, 0.25)]);
        let (v, e) = k.lambda_integral(0.0, 0.25, 1e-9, 1 << 20).unwrap();
        assert!((v - 0.03125).abs() <= e + 1e-15, "v={v}, e={e}");
        assert!(e <= 1e-9);

        let empty = IntervalSet::empty();
        let (v, e) = empty.lambda_integral(0.0, 0.5, 1e-9, 1 << 20).unwrap();
        assert_eq!((v, e), (0.0, 0.0));
    }

    #[test]
    fn lambda_integral_matches_riemann_oracle() {
        // independent oracle: midpoint Riemann sum on a dense grid
        let k = set(&[(0.05, 0.15), (0.3, 0.42), (0.7, 0.73), (0.8, 0.97)]);
        let (lo, hi) = (0.01, 0.37);
        let n = 200_000;
        let dx = (hi - lo) / n as f64;
        let mut riemann = 0.0;
        for i in 0..n {
            let phi = lo + (i as f64 + 0.5) * dx;
            riemann += k.lambda(phi);
        }
        riemann *= dx;
        let (v, _) = k.lambda_integral(lo, hi, 1e-9, 1 << 24).unwrap();
        // Λ is 2m-Lipschitz, midpoint rule error <= L (hi-lo) dx / 4
        let tol = 2.0 * 4.0 * (hi - lo) * dx / 4.0;
        assert!((v - riemann).abs() <= tol, "v={v} riemann={riemann} tol={tol}");
    }

    #[test]
    fn lambda_integral_budget() {
        let k = set(&[(0.05, 0.15), (0.3, 0.42), (0.7, 0.73)]);
        match k.lambda_integral(0.0, 1.0, 1e-9, 2) {
            Err(Error::BudgetExceeded(_)) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn set_file_round_trip_is_bit_exact() {
        let k = set(&[(1.0 / 3.0, 0.5), (0.625, 0.7071067811865476)]);
        let text = k.to_set_file();
        let back = IntervalSet::from_set_file(&text).unwrap();
        assert_eq!(k, back);
    }

    #[test]
    fn contains_half_open() {
        let k = set(&[(0.25, 0.5)]);
        assert!(k.contains(0.25));
        assert!(!k.contains(0.5));
        assert!(!k.contains(0.1));
    }
}
