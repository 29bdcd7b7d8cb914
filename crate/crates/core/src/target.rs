//! Sublinear growth targets f_N and the auxiliary pair (g, h) that feeds the
//! interval-set construction.
//!
//! A target carries three functions tied together by two contracts:
//!
//!   * certified bound:  (2N/π²)·g(1/(2N)) ≥ f_N  on dyadic N,
//!   * defining relation: ∫₀^x h = x·g(x), i.e. h = (xg)′,
//!
//! plus monotonicity of g, continuity of h with h(0)=0, and strict increase
//! of the h actually used downstream (replaced by the envelope ĥ when the
//! raw h is not strictly increasing). The certified bound is what the
//! spectral chain delivers, so the built-in families are normalized to
//! satisfy it with equality (power family) or with margin (near-linear).

use std::f64::consts::{E, PI};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest dyadic exponent probed by the g-condition check.
const G_CHECK_MAX_EXP: u32 = 20;

/// Number of grid points in the monotone envelope.
const ENVELOPE_POINTS: usize = 1 << 12;

/// Lower end of the envelope / monotonicity grids.
const GRID_X_MIN: f64 = 1e-9;

type DynF = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
type DynG = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Target family tag.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Power { c: f64, alpha: f64 },
    NearLinear { c: f64 },
    Custom,
}

enum Eval {
    Power { c: f64, alpha: f64 },
    NearLinear { c: f64 },
    Custom { f: DynF, g: DynG, h: DynG },
}

/// Strictly increasing majorant ĥ(x) = max{h(y) : y ∈ grid, y ≤ x} + x.
///
/// The running maximum is taken over a geometric grid refined toward 0 and
/// interpolated linearly, which keeps ĥ continuous; the grid maximum is a
/// lower bound on the true running maximum, and the +x term enforces strict
/// increase no matter what the grid missed.
pub struct MonotoneEnvelope {
    xs: Vec<f64>,
    run_max: Vec<f64>,
}

impl MonotoneEnvelope {
    /// Builds the envelope of `h` over [0, x_max].
    pub fn build(h: impl Fn(f64) -> f64, x_max: f64) -> Self {
        let mut xs = Vec::with_capacity(ENVELOPE_POINTS + 1);
        xs.push(0.0);
        let ratio = (x_max / GRID_X_MIN).powf(1.0 / (ENVELOPE_POINTS as f64 - 1.0));
        let mut x = GRID_X_MIN;
        for _ in 0..ENVELOPE_POINTS {
            xs.push(x.min(x_max));
            x *= ratio;
        }
        let mut run_max = Vec::with_capacity(xs.len());
        let mut best = 0.0f64;
        for &x in &xs {
            best = best.max(h(x));
            run_max.push(best);
        }
        MonotoneEnvelope { xs, run_max }
    }

    /// ĥ(x); for x beyond the grid the running maximum saturates.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let rm = match self.xs.partition_point(|&t| t <= x) {
            i if i >= self.xs.len() => *self.run_max.last().unwrap(),
            i => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.run_max[i - 1], self.run_max[i]);
                y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
            }
        };
        rm + x
    }
}

impl std::fmt::Debug for MonotoneEnvelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonotoneEnvelope")
            .field("points", &self.xs.len())
            .finish()
    }
}

/// A validated growth target (f, g, h).
pub struct GrowthTarget {
    family: Family,
    eval: Eval,
    envelope: Option<MonotoneEnvelope>,
    spec_string: String,
}

impl std::fmt::Debug for GrowthTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrowthTarget")
            .field("family", &self.family)
            .field("envelope_applied", &self.envelope.is_some())
            .finish()
    }
}

impl GrowthTarget {
    /// Power-law target f_N = c·N^α with 0 < α < 1.
    ///
    /// g(x) = (π²c/2)·(2x)^{1−α} meets the certified bound with equality:
    /// (2N/π²)·g(1/(2N)) = c·N^α. Its derivative pair
    /// h(x) = (π²c/2)·(2−α)·2^{1−α}·x^{1−α} is strictly increasing, so no
    /// envelope is needed.
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::TargetRejected(format!("power: c = {c} must be > 0")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::TargetRejected(format!(
                "power: alpha = {alpha} outside (0, 1)"
            )));
        }
        let target = GrowthTarget {
            family: Family::Power { c, alpha },
            eval: Eval::Power { c, alpha },
            envelope: None,
            spec_string: format!("power:c={c},alpha={alpha}"),
        };
        target.validate(1)
    }

    /// Near-linear target f_N = c·N/ln(N+e), an arbitrarily-fast sublinear
    /// witness. g(x) = (π²c/2)/ln(1/(2x)) for x ≤ x₀ = 1/(2(2+e)), clamped
    /// constant above; h = (xg)′ drops at the clamp, so the envelope is
    /// applied. The clamp point is the largest one for which the certified
    /// bound (2N/π²)·g(1/(2N)) ≥ f_N holds from N = 2 on: clamped N get
    /// c·N/ln(2+e) ≥ f_N, unclamped ones c·N/ln N ≥ f_N.
    pub fn near_linear(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::TargetRejected(format!("nearlinear: c = {c} must be > 0")));
        }
        let target = GrowthTarget {
            family: Family::NearLinear { c },
            eval: Eval::NearLinear { c },
            envelope: None,
            spec_string: format!("nearlinear:c={c}"),
        };
        target.validate(2)
    }

    /// Custom target from caller-supplied evaluators. The same contracts are
    /// validated, with h = (xg)′ checked by central finite differences at
    /// relative tolerance 1e-5; rejection reports the failing point.
    pub fn custom(
        f: impl Fn(u64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let target = GrowthTarget {
            family: Family::Custom,
            eval: Eval::Custom {
                f: Arc::new(f),
                g: Arc::new(g),
                h: Arc::new(h),
            },
            envelope: None,
            spec_string: "custom:<evaluators>".to_string(),
        };
        target.validate(1)
    }

    /// Custom target from a sampled table, one row per grid point
    /// (x, g(x), h(x)), linearly interpolated. f_N is derived as the
    /// certified bound (2N/π²)·g(1/(2N)).
    pub fn from_table(rows: &[(f64, f64, f64)], spec_string: String) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TargetRejected("custom table needs >= 2 rows".into()));
        }
        let mut rows = rows.to_vec();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if rows.iter().any(|r| !(r.0.is_finite() && r.1.is_finite() && r.2.is_finite())) {
            return Err(Error::TargetRejected("custom table has non-finite entries".into()));
        }
        let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let gs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let hs: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let interp = move |table: Vec<f64>, xs: Vec<f64>| {
            move |x: f64| -> f64 {
                if x <= xs[0] {
                    // anchor at the origin: g(0) = h(0) = 0
                    return table[0] * (x / xs[0]).max(0.0);
                }
                match xs.partition_point(|&t| t <= x) {
                    i if i >= xs.len() => *table.last().unwrap(),
                    i => {
                        let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                        table[i - 1] + (table[i] - table[i - 1]) * t
                    }
                }
            }
        };
        let g = interp(gs, xs.clone());
        let h = interp(hs, xs);
        let g_for_f = g.clone();
        let f = move |n: u64| -> f64 {
            let n = n as f64;
            (2.0 * n / (PI * PI)) * g_for_f(1.0 / (2.0 * n))
        };
        let target = GrowthTarget {
            family: Family::Custom,
            eval: Eval::Custom {
                f: Arc::new(f),
                g: Arc::new(g),
                h: Arc::new(h),
            },
            envelope: None,
            spec_string,
        };
        target.validate(1)
    }

    /// Parses a CLI target spec:
    /// `power:c=<real>,alpha=<real>` | `nearlinear:c=<real>` |
    /// `custom:<path>` (table file, lines "x,g(x),h(x)").
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("bad target spec '{spec}'")))?;
        match head {
            "power" => {
                let mut c = None;
                let mut alpha = None;
                for kv in rest.split(',') {
                    match kv.split_once('=') {
                        Some(("c", v)) => c = Some(parse_real(v)?),
                        Some(("alpha", v)) => alpha = Some(parse_real(v)?),
                        _ => {
                            return Err(Error::InvalidInput(format!(
                                "bad power parameter '{kv}'"
                            )))
                        }
                    }
                }
                match (c, alpha) {
                    (Some(c), Some(alpha)) => Self::power(c, alpha),
                    _ => Err(Error::InvalidInput(
                        "power target needs c=<real>,alpha=<real>".into(),
                    )),
                }
            }
            "nearlinear" => match rest.split_once('=') {
                Some(("c", v)) => Self::near_linear(parse_real(v)?),
                _ => Err(Error::InvalidInput("nearlinear target needs c=<real>".into())),
            },
            "custom" => {
                let text = std::fs::read_to_string(rest)?;
                let mut rows = Vec::new();
                for (idx, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let cols: Vec<&str> = line.split(',').collect();
                    if cols.len() != 3 {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: "expected \"x,g(x),h(x)\"".into(),
                        });
                    }
                    let parse = |s: &str| -> Result<f64> {
                        s.trim().parse().map_err(|e| Error::Parse {
                            line: idx + 1,
                            msg: format!("bad number: {e}"),
                        })
                    };
                    rows.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?));
                }
                Self::from_table(&rows, format!("custom:{rest}"))
            }
            _ => Err(Error::InvalidInput(format!("unknown target family '{head}'"))),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn spec_string(&self) -> &str {
        &self.spec_string
    }

    pub fn envelope_applied(&self) -> bool {
        self.envelope.is_some()
    }

    /// Target value f_N.
    pub fn f(&self, n: u64) -> f64 {
        match &self.eval {
            Eval::Power { c, alpha } => c * (n as f64).powf(*alpha),
            Eval::NearLinear { c } => {
                let n = n as f64;
                c * n / (n + E).ln()
            }
            Eval::Custom { f, .. } => f(n),
        }
    }

    /// g(x) on [0, 1/2].
    pub fn g(&self, x: f64) -> f64 {
        match &self.eval {
            Eval::Power { c, alpha } => 0.5 * PI * PI * c * (2.0 * x).powf(1.0 - alpha),
            Eval::NearLinear { c } => {
                let x0 = 0.5 / (2.0 + E);
                let x = x.min(x0);
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * PI * PI * c / (1.0 / (2.0 * x)).ln()
                }
            }
            Eval::Custom { g, .. } => g(x),
        }
    }

    /// Raw h = (xg)′ before any envelope.
    pub fn h_raw(&self, x: f64) -> f64 {
        match &self.eval {
            Eval::Power { c, alpha } => {
                0.5 * PI * PI * c * (2.0 - alpha) * 2f64.powf(1.0 - alpha) * x.powf(1.0 - alpha)
            }
            Eval::NearLinear { c } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let x0 = 0.5 / (2.0 + E);
                if x > x0 {
                    // clamped region: xg(x) = x·g(x0)
                    self.g(x0)
                } else {
                    let l = (1.0 / (2.0 * x)).ln();
                    0.5 * PI * PI * c * (1.0 / l + 1.0 / (l * l))
                }
            }
            Eval::Custom { h, .. } => h(x),
        }
    }

    /// Effective h used by the construction: the raw h, or its strictly
    /// increasing envelope when the raw h failed the monotonicity check.
    pub fn h(&self, x: f64) -> f64 {
        match &self.envelope {
            Some(env) => env.eval(x),
            None => self.h_raw(x),
        }
    }

    fn validate(mut self, g_check_start_n: u64) -> Result<Self> {
        // f sublinear: f_N/N non-increasing over dyadic N, strictly overall
        let mut prev = self.f(1);
        if !(prev.is_finite() && prev > 0.0) {
            return Err(Error::TargetRejected(format!("f(1) = {prev} not positive")));
        }
        let first = prev;
        for k in 1..=G_CHECK_MAX_EXP {
            let n = 1u64 << k;
            let ratio = self.f(n) / n as f64;
            if !ratio.is_finite() || ratio < 0.0 {
                return Err(Error::TargetRejected(format!("f({n})/{n} = {ratio}")));
            }
            if ratio > prev * (1.0 + 1e-12) {
                return Err(Error::TargetRejected(format!(
                    "f_N/N increases at N = {n}: {ratio} > {prev}"
                )));
            }
            prev = ratio;
        }
        if prev >= first * (1.0 - 1e-9) {
            return Err(Error::TargetRejected(
                "f_N/N does not decrease over the tested range (f is not sublinear)".into(),
            ));
        }

        // g(0) = 0 in the limit, g monotone increasing
        let g_max = self.g(0.5);
        if !(g_max.is_finite() && g_max > 0.0) {
            return Err(Error::TargetRejected(format!("g(1/2) = {g_max}")));
        }
        if self.g(1e-300) > 0.01 * g_max {
            return Err(Error::TargetRejected(format!(
                "g does not vanish at 0: g(1e-300) = {}",
                self.g(1e-300)
            )));
        }
        let mut x = GRID_X_MIN;
        let mut gprev = self.g(x);
        while x < 0.5 {
            let xn = (x * 1.1).min(0.5);
            let gn = self.g(xn);
            if gn < gprev * (1.0 - 1e-12) {
                return Err(Error::TargetRejected(format!(
                    "g not monotone increasing near x = {xn}"
                )));
            }
            x = xn;
            gprev = gn;
        }

        // certified bound (2N/π²)·g(1/(2N)) ≥ f_N on the dyadic grid
        for k in 0..=G_CHECK_MAX_EXP {
            let n = 1u64 << k;
            if n < g_check_start_n {
                continue;
            }
            let n_f = n as f64;
            let bound = (2.0 * n_f / (PI * PI)) * self.g(1.0 / (2.0 * n_f));
            let f_n = self.f(n);
            if bound < f_n * (1.0 - 1e-9) {
                return Err(Error::TargetRejected(format!(
                    "g-condition fails at N = {n}: (2N/pi^2) g(1/(2N)) = {bound} < f_N = {f_n}"
                )));
            }
        }

        // h(0) = 0 and continuity probe
        let h_max = self.h_raw(0.5).max(self.h_raw(0.25));
        if !(h_max.is_finite() && h_max >= 0.0) {
            return Err(Error::TargetRejected(format!("h not finite: h(1/2) = {h_max}")));
        }
        if self.h_raw(1e-300).abs() > 0.01 * h_max.max(1e-300) {
            return Err(Error::TargetRejected(format!(
                "h does not vanish at 0: h(1e-300) = {}",
                self.h_raw(1e-300)
            )));
        }

        // defining relation h = (xg)' by central differences on a log grid
        let mut x = 1e-6;
        while x <= 0.4 {
            let dx = x * 1e-4;
            let xg = |t: f64| t * self.g(t);
            let deriv = (xg(x + dx) - xg(x - dx)) / (2.0 * dx);
            let h_val = self.h_raw(x);
            let scale = deriv.abs().max(h_val.abs()).max(1e-300);
            // skip points within finite-difference reach of the clamp kink
            let near_kink = matches!(self.eval, Eval::NearLinear { .. })
                && (x - 0.5 / (2.0 + E)).abs() < 2.0 * dx;
            if !near_kink && (deriv - h_val).abs() > 1e-5 * scale {
                return Err(Error::TargetRejected(format!(
                    "h differs from (xg)' at x = {x}: h = {h_val}, (xg)' = {deriv}"
                )));
            }
            x *= 3.1623;
        }

        // strict monotonicity of h; apply the envelope on failure
        if !h_strictly_increasing(|x| self.h_raw(x)) {
            let env = MonotoneEnvelope::build(|x| self.h_raw(x), 0.5);
            self.envelope = Some(env);
            if !h_strictly_increasing(|x| self.h(x)) {
                return Err(Error::TargetRejected(
                    "h envelope failed the strict monotonicity check".into(),
                ));
            }
        }
        Ok(self)
    }
}

fn h_strictly_increasing(h: impl Fn(f64) -> f64) -> bool {
    let mut x = 1e-8;
    let mut prev = h(x);
    while x < 0.5 {
        let xn = (x * 1.05).min(0.5);
        let hn = h(xn);
        if hn <= prev {
            return false;
        }
        x = xn;
        prev = hn;
    }
    true
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| Error::InvalidInput(format!("bad real '{s}': {e}")))
}
