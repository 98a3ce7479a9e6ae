//! The abelian integral `F_n(λ) = ∫_{λ_n^−}^{λ} Δ̇/√c(Δ² − 4) dμ`, its values
//! on the gap sides, on the real line, on the contours `Γ_k`, and its
//! Laurent expansion at infinity.
//!
//! Off the gaps the integrand is single valued and all its periods vanish,
//! so `F_n` is path independent on `ℂ ∖ ∪G_m`; general points are reached
//! along a three-leg polyline that is rejected if it cuts an open gap.

use crate::error::{Result, ZsbError};
use crate::fourier;
use crate::quad::{graded_breaks, integrate_panels, uniform_breaks};
use crate::roots_products::{gap_parameter, w_principal, RootContext, Side};
use crate::zs_core::ZsSolver;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

const ORDER: usize = 16;
const PANEL: f64 = 0.25;
const GRADE_LEVELS: usize = 22;
const I: C64 = C64 { re: 0.0, im: 1.0 };

pub struct Abelian {
    pub ctx: Arc<RootContext>,
    solver: Option<Arc<ZsSolver>>,
    /// Height of the horizontal leg of the integration polyline.
    pub corridor: f64,
}

/// `F_k` sampled on the circle `Γ_k` with trapezoidal weights.
#[derive(Clone, Debug)]
pub struct Contour {
    pub k: i64,
    pub center: C64,
    pub radius: f64,
    /// Unit vector along `γ_k` (1 for a collapsed gap); node 0 is `τ_k + r·dir`.
    pub dir: C64,
    pub nodes: Vec<C64>,
    /// `dλ` weights, so `∮ f dλ ≈ Σ f_j dlam_j`.
    pub dlam: Vec<C64>,
    /// Quotient `Δ̇/√c(Δ² − 4)` at the nodes.
    pub q: Vec<C64>,
    /// `F_k` at the nodes.
    pub f: Vec<C64>,
    /// `Π_{open m} 1/w_m = inv_w · e^{inv_w_log}` at the nodes; the split
    /// keeps long products in range.
    pub inv_w: Vec<C64>,
    pub inv_w_log: Vec<f64>,
    /// `(1/2π)|∮ q dλ|`; should vanish.
    pub closure: f64,
}

impl Contour {
    pub fn integrate<G: Fn(usize) -> C64>(&self, g: G) -> C64 {
        (0..self.nodes.len()).map(|j| g(j) * self.dlam[j]).sum()
    }
}

/// `Π x_i` as `(mantissa, log scale)` with the mantissa kept near 1.
pub fn scaled_product(xs: impl IntoIterator<Item = C64>) -> (C64, f64) {
    let mut p = C64::new(1.0, 0.0);
    let mut l = 0.0;
    for (i, x) in xs.into_iter().enumerate() {
        p *= x;
        if i % 16 == 15 {
            let a = p.norm();
            if a > 0.0 && a.is_finite() {
                p /= a;
                l += a.ln();
            }
        }
    }
    (p, l)
}

#[derive(Clone, Debug, Serialize)]
pub struct LaurentFit {
    /// Fitted `H_1, H_2, …` (as many as requested powers).
    pub h: Vec<C64>,
    /// Weighted least-squares residual.
    pub residual: f64,
    /// Condition number of the scaled design matrices (worst parity).
    pub condition: f64,
    /// `H₄ − 6H₁H₂` extrapolated from the expansion of `F⁴`.
    pub f4_combo: C64,
    /// `H₄ − 6H₁H₂` from the fitted coefficients.
    pub f4_combo_fit: C64,
    pub nu_min: f64,
    pub nu_max: f64,
}

fn segment_hits(p: C64, q: C64, a: C64, b: C64) -> bool {
    let cross = |u: C64, v: C64| u.re * v.im - u.im * v.re;
    let r = q - p;
    let s = b - a;
    let den = cross(r, s);
    let scale = r.norm() * s.norm().max(1e-300);
    if den.abs() <= 1e-14 * scale {
        // parallel: reject if collinear and overlapping
        if cross(a - p, r).abs() > 1e-12 * r.norm() * (1.0 + (a - p).norm()) {
            return false;
        }
        let rr = r.norm_sqr();
        let t0 = ((a - p).re * r.re + (a - p).im * r.im) / rr;
        let t1 = ((b - p).re * r.re + (b - p).im * r.im) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        return hi > 1e-9 && lo < 1.0 - 1e-9;
    }
    let u = cross(a - p, s) / den;
    let v = cross(a - p, r) / den;
    u > 1e-9 && u < 1.0 - 1e-9 && (-1e-12..=1.0 + 1e-12).contains(&v)
}

impl Abelian {
    pub fn new(ctx: Arc<RootContext>, solver: Option<Arc<ZsSolver>>) -> Self {
        let h = ctx
            .open
            .iter()
            .map(|g| (g.tau.im.abs() + g.gamma.im.abs() / 2.0) * 1.5)
            .fold(0.5, f64::max);
        Abelian { ctx, solver, corridor: h }
    }

    #[inline]
    fn q(&self, mu: C64) -> C64 {
        self.ctx.quotient_unchecked(mu, None)
    }

    fn start_point(&self, n: i64) -> Result<C64> {
        let sd = &self.ctx.sd;
        if !sd.in_window(n) {
            return Err(ZsbError::Input(format!("index {n} outside the window N = {}", sd.n_max)));
        }
        Ok(sd.lam_minus(n))
    }

    /// Gap `m` whose open segment contains `λ`, if any.
    fn gap_of(&self, lambda: C64) -> Option<(i64, f64)> {
        self.ctx
            .open
            .iter()
            .find_map(|g| gap_parameter(g.tau, g.gamma, lambda).map(|t| (g.n, t)))
    }

    /// `F_n` on the side `G_n^±`: `±∫_0^{φ}(λ_n^• − μ)χ_n(μ) dφ` with
    /// `μ = τ_n − cos φ · γ_n/2` and `t = −cos φ`.
    fn f_on_own_gap(&self, n: i64, t: f64, side: Side) -> C64 {
        let sd = &self.ctx.sd;
        let (tau, gamma, ld) = (sd.tau(n), sd.gamma(n), sd.lam_dot(n));
        let phi_t = (-t).clamp(-1.0, 1.0).acos();
        let breaks = uniform_breaks(0.0, phi_t, PANEL);
        let v = integrate_panels(&breaks, ORDER, |ph| {
            let mu = tau - ph.cos() * gamma / 2.0;
            (ld - mu) * self.ctx.chi_factor(n, mu)
        });
        let s = self.ctx.sign * if side == Side::Plus { 1.0 } else { -1.0 };
        v * s
    }

    /// `∫` of the quotient along a straight leg `a → b`; a square-root
    /// substitution removes endpoint branch singularities at `a` (`from_branch`)
    /// and grades toward the endpoint `b`.
    fn leg(&self, a: C64, b: C64, from_branch: bool, to_end: bool) -> C64 {
        let d = b - a;
        if d.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        if from_branch {
            // μ = a + d s², dμ = 2 d s ds
            acc += integrate_panels(&graded_breaks(GRADE_LEVELS), ORDER, |s| self.q(a + d * s * s) * d * (2.0 * s));
        } else if to_end {
            // μ = b − d s², ∫_a^b = ∫_0^1 q(b − d s²)·2 d s ds
            acc += integrate_panels(&graded_breaks(GRADE_LEVELS), ORDER, |s| self.q(b - d * s * s) * d * (2.0 * s));
        } else {
            let len = d.norm();
            acc += integrate_panels(&uniform_breaks(0.0, 1.0, PANEL / len), ORDER, |s| self.q(a + d * s) * d);
        }
        acc
    }

    fn check_leg(&self, a: C64, b: C64) -> Result<()> {
        if (b - a).norm() == 0.0 {
            return Ok(());
        }
        for g in &self.ctx.open {
            let (lo, hi) = (g.tau - g.gamma / 2.0, g.tau + g.gamma / 2.0);
            if segment_hits(a, b, lo, hi) {
                return Err(ZsbError::Path(format!(
                    "integration leg {a} -> {b} crosses the open gap G_{}",
                    g.n
                )));
            }
        }
        Ok(())
    }

    /// `∫_{start}^{λ}` along start → start ± ih → Re λ ± ih → λ.
    fn polyline(&self, start: C64, lambda: C64, side: Option<(i64, Side)>) -> Result<C64> {
        self.ctx_check(lambda)?;
        let eps = match side {
            Some((m, s)) => {
                let g = self.ctx.sd.gamma(m);
                let gh = g / g.norm();
                if gh.re.abs() < 1e-8 {
                    return Err(ZsbError::Path(format!("vertical gap G_{m}: cannot approach a side along the polyline")));
                }
                let e = gh.re.signum();
                if s == Side::Plus {
                    e
                } else {
                    -e
                }
            }
            None if lambda.im < start.im => -1.0,
            None => 1.0,
        };
        let h = self.corridor;
        let p1 = start + I * (eps * h);
        let p2 = C64::new(lambda.re, p1.im);
        for (a, b) in [(start, p1), (p1, p2), (p2, lambda)] {
            self.check_leg(a, b)?;
        }
        let v = self.leg(start, p1, true, false) + self.leg(p1, p2, false, false) + self.leg(p2, lambda, false, true);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(ZsbError::Path(format!("non-finite quadrature along the polyline to {lambda}")));
        }
        Ok(v)
    }

    fn ctx_check(&self, lambda: C64) -> Result<()> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(ZsbError::Input(format!("non-finite lambda {lambda}")));
        }
        Ok(())
    }

    /// `F_n(λ)`. `side = Some(±)` is required when `λ` lies on an open gap;
    /// it names the side of that gap.
    pub fn f_n(&self, n: i64, lambda: C64, side: Option<Side>) -> Result<C64> {
        let start = self.start_point(n)?;
        let on = self.gap_of(lambda);
        match (on, side) {
            (Some((m, t)), Some(s)) if m == n => Ok(self.f_on_own_gap(n, t, s)),
            (Some((m, t)), None) => Err(ZsbError::Domain(format!(
                "lambda = {lambda} lies inside the open gap G_{m} (t = {t:.6}); a side tag is required"
            ))),
            (Some((m, _)), Some(s)) => self.polyline(start, lambda, Some((m, s))),
            (None, _) => {
                if lambda == start {
                    return Ok(C64::new(0.0, 0.0));
                }
                self.polyline(start, lambda, None)
            }
        }
    }

    /// `F = F_0`.
    pub fn f(&self, lambda: C64, side: Option<Side>) -> Result<C64> {
        self.f_n(0, lambda, side)
    }

    /// Real-type closed form between gaps,
    /// `F(λ) = −i(n + ½)π − i·arcsin((−1)^{n+1}Δ(λ)/2)` on `(λ_n^+, λ_{n+1}^−)`.
    pub fn f_realline(&self, lambda: f64) -> Result<C64> {
        let sd = &self.ctx.sd;
        if !sd.real_type {
            return Err(ZsbError::Domain("the real-line formula needs a real-type potential".into()));
        }
        let solver = self
            .solver
            .as_ref()
            .ok_or_else(|| ZsbError::Input("f_realline needs a transfer-matrix solver".into()))?;
        let n = self.interval_index(lambda)?;
        let (delta, _) = solver.discriminant(C64::new(lambda, 0.0))?;
        let sg = if (n + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let x = C64::new((sg * delta.re / 2.0).clamp(-1.0, 1.0), sg * delta.im / 2.0);
        Ok(C64::new(0.0, -(n as f64 + 0.5) * PI) - I * x.asin())
    }

    /// `n` with `λ_n^+ < λ < λ_{n+1}^−`.
    fn interval_index(&self, lambda: f64) -> Result<i64> {
        let sd = &self.ctx.sd;
        let hi = |m: i64| if sd.in_window(m) { sd.lam_plus(m).re } else { sd.tau_any(m).re };
        let lo = |m: i64| if sd.in_window(m) { sd.lam_minus(m).re } else { sd.tau_any(m).re };
        let mut n = (lambda / PI).floor() as i64;
        for _ in 0..4 {
            if lambda < hi(n) {
                n -= 1;
            } else if lambda > lo(n + 1) {
                n += 1;
            } else {
                break;
            }
        }
        if lambda <= hi(n) || lambda >= lo(n + 1) {
            return Err(ZsbError::Domain(format!("lambda = {lambda} is inside a spectral gap")));
        }
        Ok(n)
    }

    /// Radius of `Γ_k`.
    pub fn contour_radius(&self, k: i64) -> f64 {
        (0.75 * self.ctx.sd.gamma(k).norm()).max(0.05)
    }

    /// `F_k` on `Γ_k` with `q_nodes` trapezoidal nodes, by spectral
    /// integration of `dF_k/dθ` anchored at `τ_k + r·γ̂_k`.
    pub fn contour(&self, k: i64, q_nodes: usize) -> Result<Contour> {
        let sd = &self.ctx.sd;
        if !sd.in_window(k) {
            return Err(ZsbError::Input(format!("contour index {k} outside the window N = {}", sd.n_max)));
        }
        let tau = sd.tau(k);
        let gamma = sd.gamma(k);
        let r = self.contour_radius(k);
        if r >= sd.disc_radius[sd.idx(k)] {
            return Err(ZsbError::Geometry(format!("contour radius {r:.4} for k = {k} leaves the isolating disc")));
        }
        for g in self.ctx.open.iter().filter(|g| g.n != k) {
            let d = (g.tau - tau).norm() - g.gamma.norm() / 2.0;
            if d <= 1.1 * r {
                return Err(ZsbError::Geometry(format!("contour Gamma_{k} (radius {r:.4}) comes too close to G_{}", g.n)));
            }
        }
        let open = gamma != C64::new(0.0, 0.0);
        let dir = if open { gamma / gamma.norm() } else { C64::new(1.0, 0.0) };
        let anchor = tau + dir * r;
        let f_anchor = if open {
            // from λ_k^+ outward: μ = τ + cosh(u)γ/2, q dμ = i·s(λ• − μ)χ_k du
            let ld = sd.lam_dot(k);
            let umax = (2.0 * r / gamma.norm()).acosh();
            let v = integrate_panels(&uniform_breaks(0.0, umax, PANEL), ORDER, |u| {
                let mu = tau + u.cosh() * gamma / 2.0;
                (ld - mu) * self.ctx.chi_factor(k, mu)
            });
            I * self.ctx.sign * v
        } else {
            let d = anchor - tau;
            integrate_panels(&[0.0, 0.5, 1.0], ORDER, |s| self.q(tau + d * s) * d)
        };
        let qn = q_nodes.max(8);
        let mut nodes = Vec::with_capacity(qn);
        let mut dlam = Vec::with_capacity(qn);
        let mut qv = Vec::with_capacity(qn);
        let mut dfdth = Vec::with_capacity(qn);
        let mut inv_w = Vec::with_capacity(qn);
        let mut inv_w_log = Vec::with_capacity(qn);
        for j in 0..qn {
            let th = 2.0 * PI * j as f64 / qn as f64;
            let z = tau + dir * r * C64::from_polar(1.0, th);
            let dz = I * (z - tau);
            let qq = self.q(z);
            nodes.push(z);
            dlam.push(dz * (2.0 * PI / qn as f64));
            qv.push(qq);
            dfdth.push(qq * dz);
            let (m, l) = scaled_product(self.ctx.open.iter().map(|g| 1.0 / w_principal(g.tau, g.gamma, z)));
            inv_w.push(m);
            inv_w_log.push(l);
        }
        let coef = fourier::analyze(&dfdth);
        let closure = coef[0].norm();
        let mut f = vec![f_anchor; qn];
        for (idx, c) in coef.iter().enumerate() {
            let m = fourier::wavenumber(idx, qn);
            if m == 0 || (qn.is_multiple_of(2) && idx == qn / 2) {
                continue;
            }
            let im = C64::new(0.0, m as f64);
            for (j, fj) in f.iter_mut().enumerate() {
                let e = C64::from_polar(1.0, 2.0 * PI * (m as f64) * j as f64 / qn as f64);
                *fj += c * (e - 1.0) / im;
            }
        }
        if f.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ZsbError::Accuracy(format!("non-finite F on Gamma_{k}")));
        }
        Ok(Contour { k, center: tau, radius: r, dir, nodes, dlam, q: qv, f, inv_w, inv_w_log, closure })
    }

    /// Contour with the node count doubled from 32 until the action
    /// `(1/π)∮ λ q dλ` changes by less than `tol`.
    pub fn contour_converged(&self, k: i64, tol: f64) -> Result<Contour> {
        let action = |c: &Contour| c.integrate(|j| c.nodes[j] * c.q[j]) / PI;
        let mut q = 32;
        let mut prev = self.contour(k, q)?;
        while q < 1024 {
            q *= 2;
            let next = self.contour(k, q)?;
            let d = (action(&next) - action(&prev)).norm();
            let fd = (next.f[0] - prev.f[0]).norm();
            prev = next;
            if d <= tol * (1.0 + action(&prev).norm()) && fd <= tol.sqrt() {
                return Ok(prev);
            }
        }
        Ok(prev)
    }

    /// Least-squares fit of `F(ν) + iν = i Σ_p H_p (2ν)^{−p}` on the
    /// real-line nodes `ν = ±(j + ½)π`, `jmin ≤ j ≤ jmax`.
    ///
    /// Odd and even powers are fitted separately from the antisymmetric and
    /// symmetric parts, each as a polynomial in `(2ν)^{−2}`. `powers` terms
    /// are fitted in total; only the leading ones are meaningful.
    pub fn laurent_fit(&self, jmin: usize, jmax: usize, powers: usize) -> Result<LaurentFit> {
        if jmax < jmin + powers {
            return Err(ZsbError::Input(format!("laurent_fit needs jmax - jmin >= {powers}")));
        }
        if powers < 4 {
            return Err(ZsbError::Input("laurent_fit needs at least four powers".into()));
        }
        let mut xs = Vec::new();
        let mut odd = Vec::new();
        let mut even = Vec::new();
        let mut fvals = Vec::new();
        for j in jmin..=jmax {
            let nu = (j as f64 + 0.5) * PI;
            let fp = self.f_realline(nu)?;
            let fm = self.f_realline(-nu)?;
            // G(x) = (F + iν)/i, x = 1/(2ν)
            let gp = (fp + I * nu) / I;
            let gm = (fm - I * nu) / I;
            let x = 1.0 / (2.0 * nu);
            xs.push(x);
            odd.push((gp - gm) / 2.0);
            even.push((gp + gm) / 2.0);
            fvals.push((nu, fp, fm));
        }
        let xmax = xs.iter().cloned().fold(0.0, f64::max);
        let n_odd = powers.div_ceil(2);
        let n_even = powers / 2;
        let solve = |vals: &[C64], first: i32, nterms: usize| -> Result<(Vec<C64>, f64, f64)> {
            let rows = xs.len();
            let ymax = xmax * xmax;
            let mut a = DMatrix::<C64>::zeros(rows, nterms);
            let mut b = DVector::<C64>::zeros(rows);
            for (i, (&x, &v)) in xs.iter().zip(vals).enumerate() {
                let y = x * x;
                let w = (x / xmax).powi(first);
                for c in 0..nterms {
                    a[(i, c)] = C64::new(w * (y / ymax).powi(c as i32), 0.0);
                }
                b[i] = v / x.powi(first) * w;
            }
            let svd = a.clone().svd(true, true);
            let sv = &svd.singular_values;
            let cond = sv.max() / sv.min();
            let sol = svd.solve(&b, 0.0).map_err(|e| ZsbError::Conditioning(e.to_string()))?;
            let res = (&a * &sol - &b).norm();
            let coeffs = (0..nterms).map(|c| sol[c] / ymax.powi(c as i32)).collect();
            Ok((coeffs, cond, res))
        };
        let (co, c1, r1) = solve(&odd, 1, n_odd)?;
        let (ce, c2, r2) = solve(&even, 2, n_even)?;
        let cond = c1.max(c2);
        if cond > 1e12 {
            return Err(ZsbError::Conditioning(format!(
                "Laurent design matrix has condition {cond:.3e}; reduce the number of powers or lower jmax (try jmax = {})",
                jmin + 4 * powers
            )));
        }
        let mut h = vec![C64::new(0.0, 0.0); powers];
        for (i, c) in co.into_iter().enumerate() {
            h[2 * i] = c;
        }
        for (i, c) in ce.into_iter().enumerate() {
            h[2 * i + 1] = c;
        }
        let f4_combo_fit = h[3] - 6.0 * h[0] * h[1];
        let f4_combo = self.f4_extrapolate(&fvals, &h)?;
        let nu_min = (jmin as f64 + 0.5) * PI;
        let nu_max = (jmax as f64 + 0.5) * PI;
        Ok(LaurentFit { h, residual: r1.hypot(r2), condition: cond, f4_combo, f4_combo_fit, nu_min, nu_max })
    }

    /// Extrapolates `−4λ(F⁴ − λ⁴ + 2H₁λ² + H₂λ + ½(H₃ − 3H₁²))` to `λ → ∞`
    /// from the lowest nodes, given fitted `H₁..H₃`.
    fn f4_extrapolate(&self, fvals: &[(f64, C64, C64)], h: &[C64]) -> Result<C64> {
        let nu0 = fvals[0].0;
        let pts: Vec<(f64, C64)> = fvals
            .iter()
            .filter(|(nu, _, _)| *nu <= 4.0 * nu0)
            .flat_map(|&(nu, fp, fm)| [(nu, fp), (-nu, fm)])
            .map(|(l, f)| {
                let l2 = l * l;
                let c = f.powi(4) - l2 * l2 + 2.0 * h[0] * l2 + h[1] * l + 0.5 * (h[2] - 3.0 * h[0] * h[0]);
                (l, -4.0 * l * c)
            })
            .collect();
        let terms = 4.min(pts.len());
        let mut a = DMatrix::<C64>::zeros(pts.len(), terms);
        let mut b = DVector::<C64>::zeros(pts.len());
        for (i, &(l, c)) in pts.iter().enumerate() {
            for t in 0..terms {
                a[(i, t)] = C64::new((nu0 / l).powi(t as i32), 0.0);
            }
            b[i] = c;
        }
        let sol = a.svd(true, true).solve(&b, 0.0).map_err(|e| ZsbError::Conditioning(e.to_string()))?;
        Ok(sol[0])
    }
}
