//! Discrete Hilbert-type transforms on sequences indexed by `ℤ` and decay
//! rates of Fourier data.

use crate::error::{Result, ZsbError};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Sequence on a symmetric window `−N..=N`, stored at offset `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq {
    pub n_max: i64,
    pub data: Vec<C64>,
}

impl Seq {
    pub fn new(n_max: i64, data: Vec<C64>) -> Result<Self> {
        if n_max < 0 || data.len() != (2 * n_max + 1) as usize {
            return Err(ZsbError::Input(format!(
                "sequence on -{n_max}..={n_max} needs {} entries, got {}",
                2 * n_max + 1,
                data.len()
            )));
        }
        Ok(Seq { n_max, data })
    }

    pub fn from_fn(n_max: i64, f: impl Fn(i64) -> C64) -> Self {
        Seq { n_max, data: (-n_max..=n_max).map(f).collect() }
    }

    pub fn get(&self, n: i64) -> C64 {
        if n.abs() > self.n_max {
            C64::new(0.0, 0.0)
        } else {
            self.data[(n + self.n_max) as usize]
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        -self.n_max..=self.n_max
    }

    /// Weighted `ℓ²` norm `(Σ (1+|n|)^{2s} |x_n|²)^{1/2}`.
    pub fn h_norm(&self, s: f64) -> f64 {
        self.indices().map(|n| (1.0 + n.abs() as f64).powf(2.0 * s) * self.get(n).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `(Hx)_n = Σ_{m≠n} x_m/(m−n)`.
pub fn hilbert(x: &Seq) -> Seq {
    Seq::from_fn(x.n_max, |n| {
        x.indices().filter(|&m| m != n).map(|m| x.get(m) / (m - n) as f64).sum()
    })
}

/// `(Ax)_n = π Σ_{m≠n} x_m/(ρ_m − σ_n)` for nodes with
/// `|ρ_m − σ_n| ≥ |m−n|/C`.
pub fn modified_transform(x: &Seq, rho: &Seq, sigma: &Seq, c: f64) -> Result<Seq> {
    if rho.n_max != x.n_max || sigma.n_max != x.n_max {
        return Err(ZsbError::Input("nodes and sequence must share a window".into()));
    }
    if !(c > 0.0) {
        return Err(ZsbError::Input(format!("separation constant must be positive, got {c}")));
    }
    let mut out = Vec::with_capacity(x.data.len());
    for n in x.indices() {
        let mut s = C64::new(0.0, 0.0);
        for m in x.indices().filter(|&m| m != n) {
            let d = rho.get(m) - sigma.get(n);
            if d.norm() * c < (m - n).abs() as f64 {
                return Err(ZsbError::Domain(format!(
                    "separation |rho_{m} - sigma_{n}| = {:.3e} is below |m-n|/C = {:.3e}",
                    d.norm(),
                    (m - n).abs() as f64 / c
                )));
            }
            s += x.get(m) / d;
        }
        out.push(std::f64::consts::PI * s);
    }
    Seq::new(x.n_max, out)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    /// `s` in `|x_n| ≈ A|n|^{−s}`.
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    /// The values fall faster than any power over the fit window.
    pub super_polynomial: bool,
    pub points: usize,
}

/// Least-squares fit of `log|x_n|` against `log|n|` over `N/4 ≤ |n| ≤ N`.
pub fn decay_exponent(x: &BTreeMap<i64, f64>, n_max: i64) -> Result<DecayFit> {
    let lo = (n_max / 4).max(1);
    let pts: Vec<(f64, f64)> = x
        .iter()
        .filter(|(n, v)| (lo..=n_max).contains(&n.abs()) && **v > 0.0 && v.is_finite())
        .map(|(n, v)| ((n.abs() as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(ZsbError::Input(format!(
            "decay fit needs at least 3 nonzero values with {lo} <= |n| <= {n_max}, found {}",
            pts.len()
        )));
    }
    let (exponent, intercept, residual) = linear_fit(&pts);
    // Curvature of the log-log data: a power law is straight, exp(−c|n|)
    // bends downward and keeps steepening.
    let mid = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let (lower, upper): (Vec<_>, Vec<_>) = pts.iter().partition(|p| p.0 <= mid);
    let super_polynomial = if lower.len() >= 2 && upper.len() >= 2 {
        let s_lo = linear_fit(&lower).0;
        let s_hi = linear_fit(&upper).0;
        s_hi < s_lo - 0.5 - 0.25 * s_lo.abs() && residual > 1e-3
    } else {
        false
    };
    Ok(DecayFit { exponent: -exponent, prefactor: intercept.exp(), residual, super_polynomial, points: pts.len() })
}

/// Slope, intercept, RMS residual.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - slope * mx;
    let res = (pts.iter().map(|p| (p.1 - b - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    (slope, b, res)
}

/// Run parameters shared by the command-line tools.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Spectral window half-width.
    #[serde(alias = "N")]
    pub n: usize,
    /// Root-product tail index.
    #[serde(alias = "M")]
    pub m: Option<usize>,
    pub tol: f64,
    pub grid: usize,
    pub dt: f64,
    pub t_end: f64,
    pub potential: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { n: 32, m: None, tol: 1e-10, grid: 1024, dt: 1e-5, t_end: 0.02, potential: None, out: None }
    }
}

impl RunConfig {
    /// Parses JSON (when the text starts with `{`) or `key = value` lines;
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = if text.trim_start().starts_with('{') {
            serde_json::from_str::<RunConfig>(text)
                .map_err(|e| ZsbError::Config { line: e.line(), msg: e.to_string() })?
        } else {
            let mut cfg = RunConfig::default();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let err = |msg: String| ZsbError::Config { line: i + 1, msg };
                let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
                let (k, v) = (k.trim(), v.trim());
                let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("'{k}' needs a number, got '{v}'")));
                let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("'{k}' needs a nonnegative integer, got '{v}'")));
                match k {
                    "n" | "N" => cfg.n = int(v)?,
                    "m" | "M" => cfg.m = Some(int(v)?),
                    "tol" => cfg.tol = num(v)?,
                    "grid" => cfg.grid = int(v)?,
                    "dt" => cfg.dt = num(v)?,
                    "t_end" => cfg.t_end = num(v)?,
                    "potential" => cfg.potential = Some(PathBuf::from(v)),
                    "out" => cfg.out = Some(PathBuf::from(v)),
                    _ => return Err(err(format!("unknown key '{k}'"))),
                }
            }
            cfg
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ZsbError::Input(format!("invalid run configuration: {msg}")));
        if self.n == 0 {
            return bad("N must be positive".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if !self.grid.is_power_of_two() || self.grid < 8 {
            return bad(format!("grid must be a power of two >= 8, got {}", self.grid));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return bad(format!("need dt > 0 and t_end >= 0 (dt = {}, t_end = {})", self.dt, self.t_end));
        }
        if let Some(m) = self.m {
            if m < self.n {
                return bad(format!("M = {m} must be at least N = {}", self.n));
            }
        }
        Ok(())
    }
}
