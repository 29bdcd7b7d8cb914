//! Report containers and their text formats.
//!
//! All numeric fields print with 17 significant digits so files round-trip
//! bit-exactly; absent values print as "nan". Headers carry the options the
//! run used (never timestamps), keeping reports byte-identical across
//! repeated and differently-parallelized runs.

use crate::error::{Error, Result};

/// One row of an entropy scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n: usize,
    pub s_n: f64,
    pub q_eig: f64,
    pub q_trace: f64,
    /// Kernel-quadrature route with its error bound, when computed.
    pub q_integral: Option<(f64, f64)>,
    /// B₁ = (4N²/π²)·∫₀^{1/(2N)} Λ, when computed.
    pub lower_integral: Option<f64>,
    /// B₂ = (2N/π²)·g(1/(2N)), when a target is attached.
    pub lower_g: Option<f64>,
    pub f_n: Option<f64>,
    pub chain_ok: bool,
}

/// Scan output: provenance header plus rows ascending in N.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub header: Vec<(String, String)>,
    pub rows: Vec<ScanRow>,
}

const CSV_HEADER: &str =
    "N,S_N,qN_eig,qN_trace,qN_integral,qN_integral_err,lower_integral,lower_g,f_N,chain_ok";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt(x),
        None => "nan".to_string(),
    }
}

impl EntropyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                fmt(r.s_n),
                fmt(r.q_eig),
                fmt(r.q_trace),
                fmt_opt(r.q_integral.map(|v| v.0)),
                fmt_opt(r.q_integral.map(|v| v.1)),
                fmt_opt(r.lower_integral),
                fmt_opt(r.lower_g),
                fmt_opt(r.f_n),
                r.chain_ok,
            ));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    header.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !saw_header {
                if line != CSV_HEADER {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("unexpected header '{line}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 10 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected 10 columns, got {}", cols.len()),
                });
            }
            let perr = |msg: String| Error::Parse { line: idx + 1, msg };
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|e| perr(format!("bad number '{s}': {e}")))
            };
            let opt = |s: &str| -> Result<Option<f64>> {
                let v: f64 = num(s)?;
                Ok(if v.is_nan() { None } else { Some(v) })
            };
            let pair = |a: &str, b: &str| -> Result<Option<(f64, f64)>> {
                Ok(match (opt(a)?, opt(b)?) {
                    (Some(x), Some(y)) => Some((x, y)),
                    _ => None,
                })
            };
            rows.push(ScanRow {
                n: cols[0].parse().map_err(|e| perr(format!("bad N: {e}")))?,
                s_n: num(cols[1])?,
                q_eig: num(cols[2])?,
                q_trace: num(cols[3])?,
                q_integral: pair(cols[4], cols[5])?,
                lower_integral: opt(cols[6])?,
                lower_g: opt(cols[7])?,
                f_n: opt(cols[8])?,
                chain_ok: cols[9] == "true",
            });
        }
        if !saw_header {
            return Err(Error::Parse { line: 0, msg: "missing CSV header".into() });
        }
        Ok(EntropyReport { header, rows })
    }
}

/// Desk-scale oracle summary.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    pub s_spectral: f64,
    pub s_oracle: f64,
    pub diff: f64,
    pub wick_residual: f64,
    pub psd_min_eig: f64,
}

impl OracleReport {
    pub fn to_text(&self) -> String {
        format!(
            "N = {}\nS_spectral = {}\nS_oracle = {}\ndiff = {}\nwick_residual = {}\npsd_min_eig = {}\n",
            self.n,
            fmt(self.s_spectral),
            fmt(self.s_oracle),
            fmt(self.diff),
            fmt(self.wick_residual),
            fmt(self.psd_min_eig),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rep = EntropyReport {
            header: vec![("tol".into(), "1e-9".into())],
            rows: vec![
                ScanRow {
                    n: 2,
                    s_n: 1.25,
                    q_eig: 0.5,
                    q_trace: 0.5,
                    q_integral: Some((0.5000000001, 1e-8)),
                    lower_integral: Some(0.4),
                    lower_g: Some(0.3),
                    f_n: Some(0.25),
                    chain_ok: true,
                },
                ScanRow {
                    n: 4,
                    s_n: 2.5,
                    q_eig: 1.0,
                    q_trace: 1.0,
                    q_integral: None,
                    lower_integral: None,
                    lower_g: None,
                    f_n: None,
                    chain_ok: false,
                },
            ],
        };
        let text = rep.to_csv();
        let back = EntropyReport::from_csv(&text).unwrap();
        assert_eq!(rep.rows.len(), back.rows.len());
        for (a, b) in rep.rows.iter().zip(&back.rows) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.s_n, b.s_n);
            assert_eq!(a.q_integral.map(|v| v.0), b.q_integral.map(|v| v.0));
            assert_eq!(a.chain_ok, b.chain_ok);
        }
    }
}
