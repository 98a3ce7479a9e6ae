//! Fundamental solution of the Zakharov–Shabat system
//!
//! ```text
//! m₁' = −iλ m₁ + iφ₋ m₂,    m₂' = iλ m₂ − iφ₊ m₁,    M(0) = I,
//! ```
//! integrated over one period together with its λ-derivative, the
//! discriminant `Δ = tr M(1, λ)`, and a Fourier–Galerkin eigenvalue oracle.
//!
//! The integrator is a sixth-order Magnus scheme on three Gauss nodes per
//! step. The exponential of each step generator is taken in closed form, so
//! constant potentials (and in particular `φ = 0`) are integrated exactly.

use crate::error::{Result, ZsbError};
use crate::fourier;
use crate::potential::Potential;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// `|λ|` above which `transfer` refuses to integrate.
pub const LAMBDA_CEILING: f64 = 1.0e5;
const MAX_STEPS: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
    pub dm11: C64,
    pub dm12: C64,
    pub dm21: C64,
    pub dm22: C64,
}

impl TransferResult {
    pub fn delta(&self) -> C64 {
        self.m11 + self.m22
    }

    pub fn ddelta(&self) -> C64 {
        self.dm11 + self.dm22
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }
}

/// Traceless 2×2 matrix `[[a, b], [c, −a]]`.
type Tl = [C64; 3];

#[inline]
fn comm(x: &Tl, y: &Tl) -> Tl {
    [
        x[1] * y[2] - y[1] * x[2],
        2.0 * (x[0] * y[1] - y[0] * x[1]),
        2.0 * (y[0] * x[2] - x[0] * y[2]),
    ]
}

#[inline]
fn add(x: &Tl, y: &Tl) -> Tl {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

#[inline]
fn lin(s: f64, x: &Tl, t: f64, y: &Tl) -> Tl {
    [s * x[0] + t * y[0], s * x[1] + t * y[1], s * x[2] + t * y[2]]
}

#[inline]
fn scale(s: f64, x: &Tl) -> Tl {
    [s * x[0], s * x[1], s * x[2]]
}

/// `cosh √z`, `sinh √z / √z` and `(cosh √z − sinh √z/√z)/z`, all entire in z.
#[inline]
fn exp_coeffs(z: C64) -> (C64, C64, C64) {
    if z.norm() < 0.5 {
        let mut ch = C64::new(0.0, 0.0);
        let mut sh = C64::new(0.0, 0.0);
        let mut g = C64::new(0.0, 0.0);
        let mut zk = C64::new(1.0, 0.0);
        let mut f2k = 1.0; // (2k)!
        for k in 0..12 {
            let f2k1 = f2k * (2 * k + 1) as f64;
            ch += zk / f2k;
            sh += zk / f2k1;
            let f2k2 = f2k1 * (2 * k + 2) as f64;
            let f2k3 = f2k2 * (2 * k + 3) as f64;
            g += zk * (2 * k + 2) as f64 / f2k3;
            zk *= z;
            f2k = f2k2;
        }
        (ch, sh, g)
    } else {
        let s = z.sqrt();
        let ch = s.cosh();
        let sh = s.sinh() / s;
        (ch, sh, (ch - sh) / z)
    }
}

type M2 = [[C64; 2]; 2];

#[inline]
fn mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

#[inline]
fn madd(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

const SQ15: f64 = 3.872_983_346_207_417;

/// Potential values `(φ₋, φ₊)` at the three Gauss nodes of each step.
type NodeTable = Vec<[C64; 6]>;

/// Transfer-matrix evaluator for one potential with cached node tables.
pub struct ZsSolver {
    phi: Potential,
    steps_per_unit: f64,
    tables: Mutex<HashMap<usize, Arc<NodeTable>>>,
}

impl Clone for ZsSolver {
    fn clone(&self) -> Self {
        ZsSolver { phi: self.phi.clone(), steps_per_unit: self.steps_per_unit, tables: Mutex::new(HashMap::new()) }
    }
}

impl std::fmt::Debug for ZsSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZsSolver").field("nmodes", &self.phi.nmodes).field("steps_per_unit", &self.steps_per_unit).finish()
    }
}

/// Default resolution: steps per unit of the local oscillation scale.
pub const DEFAULT_STEPS_PER_UNIT: f64 = 3.0;
/// Cheap resolution for argument-principle counts.
pub const COARSE_STEPS_PER_UNIT: f64 = 0.5;

impl ZsSolver {
    pub fn new(phi: &Potential) -> Self {
        Self::with_resolution(phi, DEFAULT_STEPS_PER_UNIT)
    }

    pub fn with_resolution(phi: &Potential, steps_per_unit: f64) -> Self {
        ZsSolver { phi: phi.clone(), steps_per_unit, tables: Mutex::new(HashMap::new()) }
    }

    pub fn potential(&self) -> &Potential {
        &self.phi
    }

    /// A solver sharing the potential but with another resolution.
    pub fn at_resolution(&self, steps_per_unit: f64) -> Self {
        Self::with_resolution(&self.phi, steps_per_unit)
    }

    /// Step count used at `λ`: proportional to the frequency content
    /// `|λ| + 2πK` (K the highest mode), rounded up to a power of two.
    pub fn steps_for(&self, lambda: C64) -> usize {
        if self.phi.nmodes == 0 {
            return 1;
        }
        let k = self.phi.nmodes as f64;
        let amp: f64 = self.phi.coeffs_minus.values().chain(self.phi.coeffs_plus.values()).map(|c| c.norm()).sum();
        let w = 1.0 + lambda.norm() + 2.0 * PI * k + amp;
        let want = (self.steps_per_unit * w).ceil() as usize;
        fourier::pow2_at_least(want.max(4 * self.phi.nmodes + 4).max(16))
    }

    fn table(&self, steps: usize) -> Arc<NodeTable> {
        if let Some(t) = self.tables.lock().expect("table cache").get(&steps) {
            return t.clone();
        }
        let h = 1.0 / steps as f64;
        let cs = [0.5 - SQ15 / 10.0, 0.5, 0.5 + SQ15 / 10.0];
        let g = fourier::pow2_at_least(steps.max(2 * self.phi.nmodes + 2));
        let stride = g / steps;
        let cols: Vec<(Vec<C64>, Vec<C64>)> = cs
            .iter()
            .map(|&c| {
                // node x = (j + c) h lies on the g-grid shifted by c·h
                (fourier::synth(&self.phi.coeffs_minus, g, c * h), fourier::synth(&self.phi.coeffs_plus, g, c * h))
            })
            .collect();
        let t: NodeTable = (0..steps)
            .map(|j| {
                let i = j * stride;
                [cols[0].0[i], cols[0].1[i], cols[1].0[i], cols[1].1[i], cols[2].0[i], cols[2].1[i]]
            })
            .collect();
        let t = Arc::new(t);
        self.tables.lock().expect("table cache").insert(steps, t.clone());
        t
    }

    /// Integrate with an explicit step count.
    pub fn transfer_with_steps(&self, lambda: C64, steps: usize) -> Result<TransferResult> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) || lambda.norm() > LAMBDA_CEILING {
            return Err(ZsbError::Integration {
                lambda: format!("{lambda}"),
                reason: format!("|lambda| exceeds the ceiling {LAMBDA_CEILING:e} or is not finite"),
            });
        }
        if steps == 0 || steps > MAX_STEPS {
            return Err(ZsbError::Integration { lambda: format!("{lambda}"), reason: format!("step count {steps} out of range") });
        }
        let h = 1.0 / steps as f64;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let ii = C64::new(0.0, 1.0);
        let mut m: M2 = [[one, zero], [zero, one]];
        let mut dm: M2 = [[zero; 2]; 2];
        let a0 = -ii * lambda * h;
        let da1: Tl = [-ii * h, zero, zero];

        let mut run = |p: [C64; 6]| {
            // P(x) = [[0, iφ₋], [−iφ₊, 0]]
            let p1: Tl = [zero, ii * p[0], -ii * p[1]];
            let p2: Tl = [zero, ii * p[2], -ii * p[3]];
            let p3: Tl = [zero, ii * p[4], -ii * p[5]];
            let a1: Tl = [a0, p2[1] * h, p2[2] * h];
            let a2 = scale(SQ15 * h / 3.0, &lin(1.0, &p3, -1.0, &p1));
            let a3 = scale(10.0 * h / 3.0, &add(&lin(1.0, &p3, -2.0, &p2), &p1));
            let c1 = comm(&a1, &a2);
            let t1 = add(&scale(2.0, &a3), &c1);
            let c2 = scale(-1.0 / 60.0, &comm(&a1, &t1));
            let x = add(&lin(-20.0, &a1, -1.0, &a3), &c1);
            let y = add(&a2, &c2);
            let om = add(&lin(1.0, &a1, 1.0 / 12.0, &a3), &scale(1.0 / 240.0, &comm(&x, &y)));

            let dc1 = comm(&da1, &a2);
            let dc2 = scale(-1.0 / 60.0, &add(&comm(&da1, &t1), &comm(&a1, &dc1)));
            let dx = lin(-20.0, &da1, 1.0, &dc1);
            let dom = add(&da1, &scale(1.0 / 240.0, &add(&comm(&dx, &y), &comm(&x, &dc2))));

            let z = om[0] * om[0] + om[1] * om[2];
            let dz = 2.0 * om[0] * dom[0] + om[1] * dom[2] + om[2] * dom[1];
            let (ch, sh, g) = exp_coeffs(z);
            let dch = 0.5 * sh * dz;
            let dsh = 0.5 * g * dz;
            let e: M2 = [[ch + sh * om[0], sh * om[1]], [sh * om[2], ch - sh * om[0]]];
            let de: M2 = [
                [dch + dsh * om[0] + sh * dom[0], dsh * om[1] + sh * dom[1]],
                [dsh * om[2] + sh * dom[2], dch - dsh * om[0] - sh * dom[0]],
            ];
            dm = madd(&mul(&de, &m), &mul(&e, &dm));
            m = mul(&e, &m);
        };

        if self.phi.nmodes == 0 {
            let (a, b) = (self.phi.minus(0), self.phi.plus(0));
            let steps_c = [a, b, a, b, a, b];
            for _ in 0..steps {
                run(steps_c);
            }
        } else {
            let t = self.table(steps);
            for p in t.iter() {
                run(*p);
            }
        }
        let r = TransferResult {
            m11: m[0][0],
            m12: m[0][1],
            m21: m[1][0],
            m22: m[1][1],
            dm11: dm[0][0],
            dm12: dm[0][1],
            dm21: dm[1][0],
            dm22: dm[1][1],
        };
        if !(r.delta().re.is_finite() && r.delta().im.is_finite()) {
            return Err(ZsbError::Integration { lambda: format!("{lambda}"), reason: "non-finite transfer matrix".into() });
        }
        Ok(r)
    }

    pub fn transfer(&self, lambda: C64) -> Result<TransferResult> {
        self.transfer_with_steps(lambda, self.steps_for(lambda))
    }

    /// `(Δ, Δ̇)` at `λ`.
    pub fn discriminant(&self, lambda: C64) -> Result<(C64, C64)> {
        let r = self.transfer(lambda)?;
        Ok((r.delta(), r.ddelta()))
    }

    /// Step-doubling integration until `Δ` and `Δ̇` change by less than
    /// `tol·(1 + |Δ|)`; the last step count is returned alongside.
    pub fn transfer_adaptive(&self, lambda: C64, tol: f64) -> Result<(TransferResult, usize)> {
        let mut steps = self.steps_for(lambda).max(2) / 2;
        let mut prev = self.transfer_with_steps(lambda, steps)?;
        loop {
            steps *= 2;
            if steps > MAX_STEPS {
                return Err(ZsbError::Integration { lambda: format!("{lambda}"), reason: "step size underflow".into() });
            }
            let cur = self.transfer_with_steps(lambda, steps)?;
            let err = (cur.delta() - prev.delta()).norm().max((cur.ddelta() - prev.ddelta()).norm());
            if err <= tol * (1.0 + cur.delta().norm()) {
                return Ok((cur, steps));
            }
            prev = cur;
        }
    }

    /// Batch evaluation in parallel; output order follows the input.
    pub fn discriminant_batch(&self, lambdas: &[C64]) -> Result<Vec<(C64, C64)>> {
        lambdas.par_iter().map(|&l| self.discriminant(l)).collect()
    }
}

pub fn transfer(phi: &Potential, lambda: C64) -> Result<TransferResult> {
    ZsSolver::new(phi).transfer(lambda)
}

pub fn discriminant(phi: &Potential, lambda: C64) -> Result<(C64, C64)> {
    ZsSolver::new(phi).discriminant(lambda)
}

/// Lexicographic order on complex numbers with real parts snapped at `tol`.
pub fn lex_cmp(a: &C64, b: &C64, tol: f64) -> std::cmp::Ordering {
    if (a.re - b.re).abs() > tol {
        a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal)
    } else {
        a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Eigenvalues of `L(φ)` on `[0, 2]` with periodic boundary conditions,
/// assembled in the basis `e^{iπjx}`, `|j| ≤ B`; only those with
/// `|Re λ| ≤ Bπ/2` are returned, sorted lexicographically.
pub fn galerkin_eigenvalues(phi: &Potential, basis_half_width: usize) -> Result<Vec<C64>> {
    let b = basis_half_width as i64;
    if basis_half_width < 4 * phi.nmodes.max(1) {
        return Err(ZsbError::Input(format!(
            "basis_half_width {basis_half_width} must be at least 4·nmodes = {}",
            4 * phi.nmodes.max(1)
        )));
    }
    let nb = (2 * b + 1) as usize;
    let dim = 2 * nb;
    let idx = |j: i64| (j + b) as usize;
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    for j in -b..=b {
        // first component: i d/dx e^{iπjx} = −πj e^{iπjx}
        a[(idx(j), idx(j))] = C64::new(-PI * j as f64, 0.0);
        a[(nb + idx(j), nb + idx(j))] = C64::new(PI * j as f64, 0.0);
        for (&m, &c) in &phi.coeffs_minus {
            let k = j - 2 * m;
            if k.abs() <= b {
                a[(idx(j), nb + idx(k))] += c;
            }
        }
        for (&m, &c) in &phi.coeffs_plus {
            let k = j - 2 * m;
            if k.abs() <= b {
                a[(nb + idx(j), idx(k))] += c;
            }
        }
    }
    let window = basis_half_width as f64 * PI / 2.0;
    let mut ev: Vec<C64> = if phi.is_real_type() {
        let herm = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let se = nalgebra::SymmetricEigen::try_new(herm, 1e-14, 100 * dim)
            .ok_or_else(|| ZsbError::Eigen("Hermitian eigen-solver did not converge".into()))?;
        se.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect()
    } else {
        let schur = nalgebra::Schur::try_new(a, 1e-14, 100 * dim)
            .ok_or_else(|| ZsbError::Eigen("Schur decomposition did not converge".into()))?;
        schur.eigenvalues().ok_or_else(|| ZsbError::Eigen("eigenvalues unavailable".into()))?.iter().copied().collect()
    };
    ev.retain(|l| l.re.abs() <= window);
    ev.sort_by(|x, y| lex_cmp(x, y, 1e-9));
    Ok(ev)
}
