//! Pseudospectral integration of the defocusing mKdV equation
//! `u_t = −u_xxx + 6u²u_x` and its renormalized version
//! `u_t = −u_xxx + 6(u² − ∫u²)u_x` on the unit circle, the phase flow in
//! Birkhoff coordinates, and the experiments built on them.

use crate::error::{Result, ZsbError};
use crate::pipeline::Pipeline;
use crate::potential::{fl_norm, hamiltonians, Potential};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Real samples `u(j/g)` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridState {
    pub u: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub mean: f64,
    /// `∫u²`.
    pub l2: f64,
    /// `∫ ½u_x² + ½u⁴`.
    pub energy: f64,
}

impl GridState {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if !u.len().is_power_of_two() || u.len() < 8 {
            return Err(ZsbError::Input(format!("grid size {} must be a power of two >= 8", u.len())));
        }
        Ok(GridState { u, t: 0.0 })
    }

    /// Samples of `u` for a potential `(u, u)`.
    pub fn from_potential(phi: &Potential, g: usize) -> Result<Self> {
        if !phi.is_er() {
            return Err(ZsbError::Input("grid states need a real potential (u, u)".into()));
        }
        if 3 * phi.nmodes >= g {
            return Err(ZsbError::Input(format!("grid {g} does not resolve {} modes", phi.nmodes)));
        }
        let v = crate::fourier::synth(&phi.coeffs_minus, g, 0.0);
        GridState::new(v.iter().map(|c| c.re).collect())
    }

    /// Fourier coefficients above `drop` as a real potential.
    pub fn to_potential(&self, drop: f64) -> Result<Potential> {
        let g = self.u.len();
        let c = crate::fourier::analyze(&self.u.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let mut m = BTreeMap::new();
        for k in 0..=((g / 2 - 1) as i64) {
            let v = c[k as usize];
            if v.norm() > drop {
                let mirror = if k == 0 { C64::new(v.re, 0.0) } else { (v + c[g - k as usize].conj()) / 2.0 };
                m.insert(k, mirror);
                if k != 0 {
                    m.insert(-k, mirror.conj());
                }
            }
        }
        Potential::real_u(m)
    }

    pub fn sample(&self) -> Sample {
        let g = self.u.len();
        let gf = g as f64;
        let c = crate::fourier::analyze(&self.u.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let ux2: f64 = (0..g)
            .map(|k| {
                let w = 2.0 * PI * crate::fourier::wavenumber(k, g) as f64;
                if k == g / 2 {
                    0.0
                } else {
                    w * w * c[k].norm_sqr()
                }
            })
            .sum();
        let mean = self.u.iter().sum::<f64>() / gf;
        let l2 = self.u.iter().map(|x| x * x).sum::<f64>() / gf;
        let u4 = self.u.iter().map(|x| x.powi(4)).sum::<f64>() / gf;
        Sample { t: self.t, mean, l2, energy: 0.5 * ux2 + 0.5 * u4 }
    }
}

/// Fourth-order integrating-factor Runge–Kutta stepper with 2/3 dealiasing.
pub struct Mkdv {
    g: usize,
    renormalized: bool,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `i(2πk)³`, zero on dealiased modes.
    symbol: Vec<C64>,
    ik: Vec<C64>,
    keep: Vec<bool>,
}

impl Mkdv {
    pub fn new(g: usize, renormalized: bool) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(g);
        let inv = planner.plan_fft_inverse(g);
        let cut = g as i64 / 3;
        let keep: Vec<bool> = (0..g).map(|k| crate::fourier::wavenumber(k, g).abs() < cut).collect();
        let ik = (0..g)
            .map(|k| C64::new(0.0, 2.0 * PI * crate::fourier::wavenumber(k, g) as f64))
            .collect::<Vec<_>>();
        let symbol = (0..g)
            .map(|k| {
                let w = 2.0 * PI * crate::fourier::wavenumber(k, g) as f64;
                C64::new(0.0, w * w * w)
            })
            .collect();
        Mkdv { g, renormalized, fwd, inv, symbol, ik, keep }
    }

    fn spectral(&self, u: &[f64]) -> Vec<C64> {
        let mut b: Vec<C64> = u.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.fwd.process(&mut b);
        let s = 1.0 / self.g as f64;
        b.iter_mut().zip(&self.keep).for_each(|(v, &k)| *v = if k { *v * s } else { C64::new(0.0, 0.0) });
        b
    }

    fn physical(&self, uh: &[C64]) -> Vec<f64> {
        let mut b = uh.to_vec();
        self.inv.process(&mut b);
        b.iter().map(|c| c.re).collect()
    }

    /// Fourier transform of `6(u² − m)u_x` with `m = ∫u²` when renormalized.
    fn nonlinear(&self, uh: &[C64]) -> Vec<C64> {
        let u = self.physical(uh);
        let dx: Vec<C64> = uh.iter().zip(&self.ik).map(|(a, b)| a * b).collect();
        let ux = self.physical(&dx);
        let m = if self.renormalized { uh.iter().map(|c| c.norm_sqr()).sum::<f64>() } else { 0.0 };
        let nl: Vec<f64> = u.iter().zip(&ux).map(|(a, b)| 6.0 * (a * a - m) * b).collect();
        self.spectral(&nl)
    }

    /// One step on Fourier coefficients.
    pub fn step_spectral(&self, uh: &[C64], dt: f64) -> Vec<C64> {
        let e: Vec<C64> = self.symbol.iter().map(|s| (s * dt / 2.0).exp()).collect();
        let g = self.g;
        let mul = |a: &[C64], b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
        let na = self.nonlinear(uh);
        let a: Vec<C64> = na.iter().map(|v| v * dt).collect();
        let s1: Vec<C64> = (0..g).map(|k| e[k] * (uh[k] + a[k] / 2.0)).collect();
        let b: Vec<C64> = self.nonlinear(&s1).iter().map(|v| v * dt).collect();
        let eu = mul(&e, uh);
        let s2: Vec<C64> = (0..g).map(|k| eu[k] + b[k] / 2.0).collect();
        let c: Vec<C64> = self.nonlinear(&s2).iter().map(|v| v * dt).collect();
        let s3: Vec<C64> = (0..g).map(|k| e[k] * eu[k] + e[k] * c[k]).collect();
        let d: Vec<C64> = self.nonlinear(&s3).iter().map(|v| v * dt).collect();
        (0..g)
            .map(|k| {
                let e2 = e[k] * e[k];
                let v = e2 * uh[k] + (e2 * a[k] + 2.0 * e[k] * (b[k] + c[k]) + d[k]) / 6.0;
                if self.keep[k] {
                    v
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// Integrates to `t_end` with steps no longer than `dt`, sampling the
    /// conserved quantities every `sample_every` steps (0: only the ends).
    pub fn evolve(&self, gs: &GridState, t_end: f64, dt: f64, sample_every: usize) -> Result<(GridState, Vec<Sample>)> {
        if gs.u.len() != self.g {
            return Err(ZsbError::Input(format!("grid size {} does not match stepper size {}", gs.u.len(), self.g)));
        }
        if !(dt > 0.0) || !(t_end >= gs.t) {
            return Err(ZsbError::Input(format!("need dt > 0 and t_end >= t (dt = {dt}, t_end = {t_end})")));
        }
        let steps = ((t_end - gs.t) / dt).ceil().max(0.0) as usize;
        let h = if steps == 0 { 0.0 } else { (t_end - gs.t) / steps as f64 };
        let mut uh = self.spectral(&gs.u);
        let norm0 = uh.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut samples = vec![gs.sample()];
        let mut t = gs.t;
        for s in 0..steps {
            let prev = uh.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            uh = self.step_spectral(&uh, h);
            t = gs.t + (s + 1) as f64 * h;
            let now = uh.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !now.is_finite() || now > 10.0 * prev.max(norm0) && now > 1e-300 {
                return Err(ZsbError::Instability { t, from: prev, to: now });
            }
            if sample_every > 0 && (s + 1) % sample_every == 0 && s + 1 != steps {
                samples.push(GridState { u: self.physical(&uh), t }.sample());
            }
        }
        let out = GridState { u: self.physical(&uh), t };
        if steps > 0 {
            samples.push(out.sample());
        }
        Ok((out, samples))
    }
}

/// One integrating-factor RK4 step of mKdV (or mKdV#).
pub fn step_mkdv(gs: &GridState, dt: f64, renormalized: bool) -> Result<GridState> {
    let m = Mkdv::new(gs.u.len(), renormalized);
    let (out, _) = m.evolve(gs, gs.t + dt, dt, 0)?;
    Ok(out)
}

/// `u(x − s)` by a Fourier-side phase shift.
pub fn shift_grid(u: &[f64], s: f64) -> Vec<f64> {
    let g = u.len();
    let mut c = crate::fourier::analyze(&u.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    for (k, v) in c.iter_mut().enumerate() {
        let n = crate::fourier::wavenumber(k, g);
        if k == g / 2 {
            *v = C64::new(0.0, 0.0);
            continue;
        }
        *v *= C64::from_polar(1.0, -2.0 * PI * n as f64 * s);
    }
    let mut b = c;
    FftPlanner::new().plan_fft_inverse(g).process(&mut b);
    b.iter().map(|c| c.re).collect()
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShiftReport {
    /// `6∫u₀²`.
    pub speed: f64,
    /// `‖S#(t)u₀ − S(t)u₀(· − 6‖u₀‖²t)‖_{L²}`.
    pub residual: f64,
    /// The same with the opposite shift direction `(· + 6‖u₀‖²t)`.
    pub residual_opposite: f64,
}

/// Integrates both flows from `u0` to time `t` and compares them up to the
/// Galilean shift by `6‖u₀‖²t`.
pub fn shift_equivalence_check(u0: &GridState, t: f64, dt: f64) -> Result<ShiftReport> {
    let g = u0.u.len();
    let (plain, _) = Mkdv::new(g, false).evolve(u0, u0.t + t, dt, 0)?;
    let (sharp, _) = Mkdv::new(g, true).evolve(u0, u0.t + t, dt, 0)?;
    let speed = 6.0 * u0.sample().l2;
    let fwd = shift_grid(&plain.u, speed * t);
    let back = shift_grid(&plain.u, -speed * t);
    Ok(ShiftReport { speed, residual: l2_dist(&sharp.u, &fwd), residual_opposite: l2_dist(&sharp.u, &back) })
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub times: Vec<f64>,
    /// `max_n |λ_n^±(t) − λ_n^±(0)|` per sample time.
    pub eig_drift: Vec<f64>,
    /// `max_n |I_n(t) − I_n(0)|` per sample time.
    pub action_drift: Vec<f64>,
    pub max_eig_drift: f64,
    pub max_action_drift: f64,
}

/// Periodic eigenvalues and actions of `phi`.
fn spectral_snapshot(phi: &Potential, n_max: usize, tol: f64) -> Result<(Vec<C64>, Vec<f64>)> {
    let pl = Pipeline::new(phi, n_max, None, tol)?;
    let fr = pl.frequencies(tol)?;
    let sd = &pl.sd;
    let eig = sd.lam_minus.iter().chain(&sd.lam_plus).copied().collect();
    let act = sd.indices().map(|n| fr.action(n).map(|a| a.value.re)).collect::<Result<_>>()?;
    Ok((eig, act))
}

/// Evolves `u0` by mKdV and re-extracts the periodic spectrum and actions at
/// each of `times`.
pub fn isospectrality_check(u0: &GridState, times: &[f64], dt: f64, n_max: usize, tol: f64) -> Result<IsoReport> {
    let g = u0.u.len();
    let m = Mkdv::new(g, false);
    let mut states = Vec::with_capacity(times.len());
    let mut cur = u0.clone();
    for &t in times {
        let (next, _) = m.evolve(&cur, t, dt, 0)?;
        states.push(next.clone());
        cur = next;
    }
    let drop = 1e-15;
    let (e0, a0) = spectral_snapshot(&u0.to_potential(drop)?, n_max, tol)?;
    let mut eig_drift = Vec::new();
    let mut action_drift = Vec::new();
    for s in &states {
        let (e, a) = spectral_snapshot(&s.to_potential(drop)?, n_max, tol)?;
        eig_drift.push(e.iter().zip(&e0).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
        action_drift.push(a.iter().zip(&a0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    let max_eig_drift = eig_drift.iter().cloned().fold(0.0, f64::max);
    let max_action_drift = action_drift.iter().cloned().fold(0.0, f64::max);
    Ok(IsoReport { times: times.to_vec(), eig_drift, action_drift, max_eig_drift, max_action_drift })
}

/// Actions and phases in Birkhoff coordinates with the frequencies that
/// drive them.
#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffState {
    pub ns: Vec<i64>,
    pub actions: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega_sharp: Vec<f64>,
    /// Unrenormalized frequencies; absent when `H₁` is not available.
    pub omega: Option<Vec<f64>>,
}

impl BirkhoffState {
    pub fn new(ns: Vec<i64>, actions: Vec<f64>, theta: Vec<f64>, omega_sharp: Vec<f64>, omega: Option<Vec<f64>>) -> Result<Self> {
        let len = ns.len();
        if actions.len() != len || theta.len() != len || omega_sharp.len() != len || omega.as_ref().is_some_and(|w| w.len() != len) {
            return Err(ZsbError::Input("Birkhoff state arrays must have equal lengths".into()));
        }
        if let Some((i, a)) = actions.iter().enumerate().find(|(_, a)| !(**a >= 0.0)) {
            return Err(ZsbError::Input(format!("action I_{} = {a} is negative", ns[i])));
        }
        let theta = theta.into_iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
        Ok(BirkhoffState { ns, actions, theta, omega_sharp, omega })
    }
}

/// `θ_n ← θ_n + ω_n t (mod 2π)` with `ω_n^#` (sharp) or `ω_n`.
pub fn birkhoff_flow(bs: &BirkhoffState, t: f64, sharp: bool) -> Result<BirkhoffState> {
    let w = if sharp {
        &bs.omega_sharp
    } else {
        match &bs.omega {
            Some(w) if w.iter().all(|x| x.is_finite()) => w,
            _ => {
                return Err(ZsbError::Divergence(
                    "unrenormalized frequencies need a finite H1; use the renormalized flow".into(),
                ))
            }
        }
    };
    let theta = bs.theta.iter().zip(w).map(|(th, om)| (th + om * t).rem_euclid(2.0 * PI)).collect();
    Ok(BirkhoffState { theta, ..bs.clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoRow {
    pub k: usize,
    pub h1: f64,
    pub lp_norm: f64,
    /// `ω_n^(4)★(v_k)` for the demo indices.
    pub omega_star: Vec<f64>,
    pub trunc_err: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoTable {
    pub p: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub ns: Vec<i64>,
    pub rows: Vec<DemoRow>,
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub p: f64,
    pub alpha: f64,
    pub kmax: usize,
    pub kmin: usize,
    /// Overall factor on the coefficients `|n|^{−α}`.
    pub amplitude: f64,
    pub ns: Vec<i64>,
    pub tol: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig { p: 4.0, alpha: 0.3, kmax: 512, kmin: 8, amplitude: 0.1, ns: vec![1, 2], tol: 1e-10 }
    }
}

/// Truncation `v_k` of the model datum with coefficients `amplitude·|n|^{−α}`.
pub fn demo_potential(alpha: f64, amplitude: f64, k: usize) -> Result<Potential> {
    let mut m = BTreeMap::new();
    for n in 1..=k as i64 {
        let c = C64::new(amplitude * (n as f64).powf(-alpha), 0.0);
        m.insert(n, c);
        m.insert(-n, c);
    }
    Potential::real_u(m)
}

/// `H₁(v_k)` and `ω_n^(4)★(v_k)` along `k = kmin, 2kmin, …, kmax`.
pub fn illposedness_demo(cfg: &DemoConfig) -> Result<DemoTable> {
    if !(1.0 / cfg.p < cfg.alpha && cfg.alpha < 0.5) {
        return Err(ZsbError::Input(format!("need 1/p < alpha < 1/2 (p = {}, alpha = {})", cfg.p, cfg.alpha)));
    }
    if cfg.kmin == 0 || cfg.kmax < cfg.kmin {
        return Err(ZsbError::Input("need 1 <= kmin <= kmax".into()));
    }
    let mut rows = Vec::new();
    let mut k = cfg.kmin;
    while k <= cfg.kmax {
        let v = demo_potential(cfg.alpha, cfg.amplitude, k)?;
        let h1 = hamiltonians(&v).h1.re;
        let lp_norm = fl_norm(&v, cfg.p)?;
        let window = k.max(cfg.ns.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0));
        let fr = Pipeline::new(&v, window, None, cfg.tol)?.frequencies(cfg.tol)?;
        let fs = fr.frequency_spectrum(&cfg.ns)?;
        rows.push(DemoRow { k, h1, lp_norm, omega_star: fs.omega_star.iter().map(|w| w.re).collect(), trunc_err: fs.trunc_err });
        k *= 2;
    }
    Ok(DemoTable { p: cfg.p, alpha: cfg.alpha, amplitude: cfg.amplitude, ns: cfg.ns.clone(), rows })
}
