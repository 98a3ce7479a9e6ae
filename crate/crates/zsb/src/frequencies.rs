//! The normalized functions `ψ_n` (through their roots `σ_k^n`), the moments
//! `Ω_nk^(m) = ∮_{Γ_k} F_k^m ψ_n/√c dλ`, the actions `I_n` and the mKdV
//! frequencies `ω_n^(4)★ = −12 Σ_k k Ω_nk^(2)`.
//!
//! Only open gaps carry unknowns: for a collapsed gap `σ_k^n = τ_k`, the
//! factor `(σ_k^n − λ)/w_k` is identically 1 and every moment with `m ≥ 1`
//! vanishes.

use crate::abelian::{scaled_product, Abelian, Contour};
use crate::error::{Result, ZsbError};
use crate::roots_products::w_principal;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const NEWTON_MAX: usize = 40;
const HALVINGS: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct ActionValue {
    pub n: i64,
    /// `(1/π)∮ λ Δ̇/√c dλ`.
    pub value: C64,
    /// `−(1/π)∮ F dλ`.
    pub alt: C64,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiSystem {
    pub n: i64,
    /// `σ_k^n` for every window index; collapsed gaps hold `τ_k`, and `k = n`
    /// holds `λ_n^•`.
    pub sigma: Vec<C64>,
    /// Factor making `∮_{Γ_n} ψ_n/√c = 2π`; 1 up to quadrature error since the
    /// product form already fixes the normalization.
    pub scale: C64,
    /// Largest `|∮_{Γ_k} ψ_n/√c|` over open `k ≠ n` after the solve.
    pub residual: f64,
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencySpectrum {
    pub ns: Vec<i64>,
    pub open: Vec<i64>,
    pub actions: Vec<ActionValue>,
    /// `Ω_nk^(2)` for `n ∈ ns` (rows) and open `k` (columns).
    pub omega2: Vec<Vec<C64>>,
    pub omega_star: Vec<C64>,
    pub omega_sharp: Vec<C64>,
    /// Unrenormalized `ω_n`; only for `(u, u)` potentials.
    pub omega: Option<Vec<C64>>,
    pub trunc_err: Vec<f64>,
    pub h1: C64,
    pub h2: C64,
    /// `max |Ω_nk^(0) − 2πδ_nk|`.
    pub m0_defect: f64,
    /// `max |Ω_nk^(1)|, |Ω_nk^(3)|`.
    pub odd_defect: f64,
    /// `max |scale − 1|`.
    pub scale_defect: f64,
    pub psi_residual: f64,
}

/// Contours and the `ψ`/moment machinery over a located spectrum.
pub struct Frequencies {
    pub ab: Arc<Abelian>,
    pub tol: f64,
    contours: BTreeMap<i64, Contour>,
    open: Vec<i64>,
}

impl Frequencies {
    /// Builds the converged contours `Γ_k` of every open gap.
    pub fn new(ab: Arc<Abelian>, tol: f64) -> Result<Self> {
        let open: Vec<i64> = ab.ctx.open.iter().map(|g| g.n).collect();
        let built: Vec<Result<(i64, Contour)>> =
            open.par_iter().map(|&k| ab.contour_converged(k, tol).map(|c| (k, c))).collect();
        let mut contours = BTreeMap::new();
        for r in built {
            let (k, c) = r?;
            contours.insert(k, c);
        }
        Ok(Frequencies { ab, tol, contours, open })
    }

    pub fn open(&self) -> &[i64] {
        &self.open
    }

    fn contour(&self, k: i64) -> Result<std::borrow::Cow<'_, Contour>> {
        match self.contours.get(&k) {
            Some(c) => Ok(std::borrow::Cow::Borrowed(c)),
            None => Ok(std::borrow::Cow::Owned(self.ab.contour(k, 32)?)),
        }
    }

    pub fn contour_of(&self, k: i64) -> Option<&Contour> {
        self.contours.get(&k)
    }

    /// `I_n` by both contour formulas.
    pub fn action(&self, n: i64) -> Result<ActionValue> {
        let c = self.contour(n)?;
        let value = c.integrate(|j| c.nodes[j] * c.q[j]) / PI;
        let alt = -c.integrate(|j| c.f[j]) / PI;
        Ok(ActionValue { n, value, alt, discrepancy: (value - alt).norm() })
    }

    fn is_open(&self, k: i64) -> bool {
        self.ab.ctx.sd.is_open(k)
    }

    /// `ψ_n/√c` (before scaling) at node `j` of `c`, for roots `sig` of the
    /// open gaps other than `n`.
    fn psi_quot(&self, n: i64, c: &Contour, j: usize, sig: &[C64]) -> C64 {
        let z = c.nodes[j];
        let (m, l) = scaled_product(sig.iter().map(|&s| s - z));
        let mut p = I * self.ab.ctx.sign * c.inv_w[j] * m * (l + c.inv_w_log[j]).exp();
        if !self.is_open(n) {
            p /= self.ab.ctx.sd.tau(n) - z;
        }
        p
    }

    fn residuals(&self, n: i64, unk: &[i64], sig: &[C64]) -> Result<Vec<C64>> {
        unk.iter()
            .map(|&k| {
                let c = self.contour(k)?;
                Ok(c.integrate(|j| self.psi_quot(n, &c, j, sig)))
            })
            .collect()
    }

    fn jacobian(&self, n: i64, unk: &[i64], sig: &[C64]) -> Result<DMatrix<C64>> {
        let g = unk.len();
        let mut jm = DMatrix::<C64>::zeros(g, g);
        for (r, &k) in unk.iter().enumerate() {
            let c = self.contour(k)?;
            for j in 0..c.nodes.len() {
                let v = self.psi_quot(n, &c, j, sig) * c.dlam[j];
                let z = c.nodes[j];
                for (col, &s) in sig.iter().enumerate() {
                    jm[(r, col)] += v / (s - z);
                }
            }
        }
        Ok(jm)
    }

    /// Solves `∮_{Γ_k} ψ_n/√c = 0` for the open `k ≠ n` by damped Newton,
    /// seeded at `σ_k^n = τ_k`, then fixes the scale on `Γ_n`.
    pub fn solve_psi(&self, n: i64) -> Result<PsiSystem> {
        let sd = &self.ab.ctx.sd;
        if !sd.in_window(n) {
            return Err(ZsbError::Input(format!("psi index {n} outside the window N = {}", sd.n_max)));
        }
        let unk: Vec<i64> = self.open.iter().copied().filter(|&k| k != n).collect();
        let mut sig: Vec<C64> = unk.iter().map(|&k| sd.tau(k)).collect();
        let norm = |r: &[C64]| r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut res = self.residuals(n, &unk, &sig)?;
        let mut rn = norm(&res);
        let mut history = vec![rn];
        let mut iters = 0;
        while rn > self.tol && !unk.is_empty() {
            iters += 1;
            if iters > NEWTON_MAX {
                return Err(ZsbError::Stagnation { n, history });
            }
            let jm = self.jacobian(n, &unk, &sig)?;
            let lu = jm.lu();
            let diag: Vec<f64> = (0..unk.len()).map(|i| lu.u()[(i, i)].norm()).collect();
            let dmax = diag.iter().cloned().fold(0.0, f64::max);
            let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(dmin > 1e-14 * dmax) {
                return Err(ZsbError::Conditioning(format!(
                    "psi Jacobian for n = {n} is near singular (pivot ratio {:.2e})",
                    dmin / dmax
                )));
            }
            let rhs = DVector::from_vec(res.clone());
            let step = lu
                .solve(&rhs)
                .ok_or_else(|| ZsbError::Conditioning(format!("psi Jacobian for n = {n} is singular")))?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=HALVINGS {
                let trial: Vec<C64> = sig.iter().zip(step.iter()).map(|(s, d)| s - d * t).collect();
                let r = self.residuals(n, &unk, &trial)?;
                let tn = norm(&r);
                if tn < rn || tn <= self.tol {
                    sig = trial;
                    res = r;
                    rn = tn;
                    accepted = true;
                    break;
                }
                t /= 2.0;
            }
            history.push(rn);
            if !accepted {
                if rn <= 1e3 * self.tol {
                    break;
                }
                return Err(ZsbError::Stagnation { n, history });
            }
        }
        let cn = self.contour(n)?;
        let total = cn.integrate(|j| self.psi_quot(n, &cn, j, &sig));
        if total.norm() == 0.0 || !total.re.is_finite() {
            return Err(ZsbError::Conditioning(format!("psi normalization integral for n = {n} vanishes")));
        }
        let scale = 2.0 * PI / total;
        let mut sigma: Vec<C64> = sd.indices().map(|k| sd.tau(k)).collect();
        for (&k, &s) in unk.iter().zip(&sig) {
            sigma[sd.idx(k)] = s;
        }
        sigma[sd.idx(n)] = sd.lam_dot(n);
        Ok(PsiSystem { n, sigma, scale, residual: rn, history })
    }

    fn sig_of(&self, psi: &PsiSystem) -> (Vec<i64>, Vec<C64>) {
        let sd = &self.ab.ctx.sd;
        let unk: Vec<i64> = self.open.iter().copied().filter(|&k| k != psi.n).collect();
        let sig = unk.iter().map(|&k| psi.sigma[sd.idx(k)]).collect();
        (unk, sig)
    }

    /// `Ω_nk^(m)`; exactly 0 for a collapsed `γ_k` when `m ≥ 1`.
    pub fn moment(&self, psi: &PsiSystem, k: i64, m: u32) -> Result<C64> {
        if m > 3 {
            return Err(ZsbError::Input(format!("moment order {m} not supported (0..=3)")));
        }
        if m >= 1 && !self.is_open(k) {
            return Ok(C64::new(0.0, 0.0));
        }
        let (_, sig) = self.sig_of(psi);
        let c = self.contour(k)?;
        let v = c.integrate(|j| c.f[j].powu(m) * self.psi_quot(psi.n, &c, j, &sig)) * psi.scale;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(ZsbError::Accuracy(format!("non-finite moment Omega_{}{k}^({m})", psi.n)));
        }
        Ok(v)
    }

    /// Actions, moments and frequencies for the indices `ns`.
    pub fn frequency_spectrum(&self, ns: &[i64]) -> Result<FrequencySpectrum> {
        let sd = &self.ab.ctx.sd;
        let h = sd.hamiltonians;
        let er = sd.er;
        let rows: Vec<Result<Row>> = ns.par_iter().map(|&n| self.row(n)).collect();
        let mut out = FrequencySpectrum {
            ns: ns.to_vec(),
            open: self.open.clone(),
            actions: vec![],
            omega2: vec![],
            omega_star: vec![],
            omega_sharp: vec![],
            omega: if er { Some(vec![]) } else { None },
            trunc_err: vec![],
            h1: h.h1,
            h2: h.h2,
            m0_defect: 0.0,
            odd_defect: 0.0,
            scale_defect: 0.0,
            psi_residual: 0.0,
        };
        let gthr = self.threshold_gamma();
        for (r, &n) in rows.into_iter().zip(ns) {
            let r = r?;
            let star = -12.0 * self.open.iter().zip(&r.om2).map(|(&k, &o)| o * k as f64).sum::<C64>();
            let base = (2.0 * n as f64 * PI).powi(3);
            out.omega_sharp.push(star + base);
            if let Some(w) = out.omega.as_mut() {
                w.push(star + base + 12.0 * n as f64 * PI * h.h1 + 6.0 * h.h2);
            }
            out.omega_star.push(star);
            out.omega2.push(r.om2);
            out.actions.push(r.action);
            out.m0_defect = out.m0_defect.max(r.m0_defect);
            out.odd_defect = out.odd_defect.max(r.odd_defect);
            out.scale_defect = out.scale_defect.max((r.scale - 1.0).norm());
            out.psi_residual = out.psi_residual.max(r.residual);
            out.trunc_err.push(self.trunc_estimate(n, gthr));
        }
        Ok(out)
    }

    fn row(&self, n: i64) -> Result<Row> {
        let psi = self.solve_psi(n)?;
        let mut om2 = Vec::with_capacity(self.open.len());
        let mut m0_defect: f64 = 0.0;
        let mut odd_defect: f64 = 0.0;
        for &k in &self.open {
            let m0 = self.moment(&psi, k, 0)?;
            let delta = if k == n { 2.0 * PI } else { 0.0 };
            m0_defect = m0_defect.max((m0 - delta).norm());
            odd_defect = odd_defect.max(self.moment(&psi, k, 1)?.norm()).max(self.moment(&psi, k, 3)?.norm());
            om2.push(self.moment(&psi, k, 2)?);
        }
        if !self.is_open(n) {
            let m0 = self.moment(&psi, n, 0)?;
            m0_defect = m0_defect.max((m0 - 2.0 * PI).norm());
        }
        Ok(Row { action: self.action(n)?, om2, m0_defect, odd_defect, scale: psi.scale, residual: psi.residual })
    }

    /// Gap size below which a gap counts as closed, or the edge gap size if
    /// the window edge is still open.
    fn threshold_gamma(&self) -> f64 {
        let sd = &self.ab.ctx.sd;
        let edge = [sd.n_max, -sd.n_max].iter().map(|&k| sd.gamma(k).norm()).fold(0.0, f64::max);
        edge.max(10.0 * sd.tol)
    }

    /// Bound on the neglected part of `−12 Σ k Ω_nk^(2)` from gaps treated as
    /// closed, using `|Ω_nk^(2)| ≲ |γ_k|³/|n − k|`.
    fn trunc_estimate(&self, n: i64, gthr: f64) -> f64 {
        let sd = &self.ab.ctx.sd;
        let g3 = gthr.powi(3);
        let inside: f64 = sd
            .indices()
            .filter(|&k| !self.is_open(k))
            .map(|k| k.unsigned_abs() as f64 * g3 / ((n - k).unsigned_abs().max(1) as f64))
            .sum();
        12.0 * (inside + 2.0 * (sd.n_max + 1) as f64 * g3)
    }

    /// `ψ_n(λ)/√c(λ)` off the gaps, principal branches.
    pub fn psi_over_root(&self, psi: &PsiSystem, lambda: C64) -> C64 {
        let sd = &self.ab.ctx.sd;
        let (m, l) = scaled_product(self.ab.ctx.open.iter().map(|g| {
            let w = w_principal(g.tau, g.gamma, lambda);
            if g.n == psi.n {
                1.0 / w
            } else {
                (psi.sigma[sd.idx(g.n)] - lambda) / w
            }
        }));
        let mut p = I * self.ab.ctx.sign * psi.scale * m * l.exp();
        if !self.is_open(psi.n) {
            p /= sd.tau(psi.n) - lambda;
        }
        p
    }

    /// `(ω_n^(4)★ + 12nπ I_n)/n` for `n ≠ 0`.
    pub fn asymptotics_report(fs: &FrequencySpectrum) -> Vec<(i64, C64)> {
        freq_asymptotics_report(fs)
    }
}

struct Row {
    action: ActionValue,
    om2: Vec<C64>,
    m0_defect: f64,
    odd_defect: f64,
    scale: C64,
    residual: f64,
}

/// `(ω_n^(4)★ + 12nπ I_n)/n` for `n ≠ 0` in `fs`.
pub fn freq_asymptotics_report(fs: &FrequencySpectrum) -> Vec<(i64, C64)> {
    fs.ns
        .iter()
        .zip(fs.omega_star.iter().zip(&fs.actions))
        .filter(|(&n, _)| n != 0)
        .map(|(&n, (w, a))| (n, (w + 12.0 * n as f64 * PI * a.value) / n as f64))
        .collect()
}
