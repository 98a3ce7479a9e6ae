//! Two-component potentials `φ = (φ₋, φ₊)` stored as finite Fourier series
//! on the unit circle, with Fourier–Lebesgue norms and the NLS-hierarchy
//! Hamiltonians `H₁..H₄`.

use crate::error::{Result, ZsbError};
use crate::fourier;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

/// Coefficients smaller than this are dropped on construction.
const DROP: f64 = 0.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub coeffs_minus: BTreeMap<i64, C64>,
    pub coeffs_plus: BTreeMap<i64, C64>,
    /// Largest `|n|` carrying a nonzero coefficient.
    pub nmodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianValues {
    pub h1: C64,
    pub h2: C64,
    pub h3: C64,
    pub h4: C64,
}

impl HamiltonianValues {
    pub fn as_array(&self) -> [C64; 4] {
        [self.h1, self.h2, self.h3, self.h4]
    }
}

fn clean(map: BTreeMap<i64, C64>) -> BTreeMap<i64, C64> {
    map.into_iter().filter(|(_, c)| c.norm() > DROP).collect()
}

impl Potential {
    pub fn new(minus: BTreeMap<i64, C64>, plus: BTreeMap<i64, C64>) -> Self {
        let coeffs_minus = clean(minus);
        let coeffs_plus = clean(plus);
        let nmodes = coeffs_minus
            .keys()
            .chain(coeffs_plus.keys())
            .map(|n| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        Potential { coeffs_minus, coeffs_plus, nmodes }
    }

    pub fn zero() -> Self {
        Self::new(BTreeMap::new(), BTreeMap::new())
    }

    /// Real-type pair `(v, v̄)` from the coefficients of `v`.
    pub fn real_type(v: BTreeMap<i64, C64>) -> Self {
        let plus = v.iter().map(|(&n, c)| (-n, c.conj())).collect();
        Self::new(v, plus)
    }

    /// `(u, u)` for a real-valued `u`; requires `û(−n) = conj û(n)`.
    pub fn real_u(u: BTreeMap<i64, C64>) -> Result<Self> {
        for (&n, &c) in &u {
            let d = u.get(&-n).copied().unwrap_or_default();
            if (c - d.conj()).norm() > 1e-14 * (1.0 + c.norm()) {
                return Err(ZsbError::Input(format!(
                    "real_u coefficients must satisfy c(-n) = conj c(n); violated at n = {n}"
                )));
            }
        }
        Ok(Self::new(u.clone(), u))
    }

    /// Constant pair `(a, a)`.
    pub fn constant(a: f64) -> Self {
        let m: BTreeMap<_, _> = [(0, C64::new(a, 0.0))].into_iter().collect();
        Self::new(m.clone(), m)
    }

    /// `(u, u)` with `u = Σ_k a_k cos(2π m_k x)`.
    pub fn cosines(terms: &[(i64, f64)]) -> Self {
        let mut u = BTreeMap::new();
        for &(m, a) in terms {
            if m == 0 {
                *u.entry(0).or_insert(C64::new(0.0, 0.0)) += a;
            } else {
                *u.entry(m).or_insert(C64::new(0.0, 0.0)) += a / 2.0;
                *u.entry(-m).or_insert(C64::new(0.0, 0.0)) += a / 2.0;
            }
        }
        Self::new(u.clone(), u)
    }

    pub fn minus(&self, n: i64) -> C64 {
        self.coeffs_minus.get(&n).copied().unwrap_or_default()
    }

    pub fn plus(&self, n: i64) -> C64 {
        self.coeffs_plus.get(&n).copied().unwrap_or_default()
    }

    fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        let k = self.nmodes as i64;
        -k..=k
    }

    /// `φ₊ = conj φ₋` pointwise, i.e. `c₊(n) = conj c₋(−n)`.
    pub fn is_real_type(&self) -> bool {
        self.modes().all(|n| {
            let a = self.plus(n);
            let b = self.minus(-n).conj();
            (a - b).norm() <= 1e-14 * (1.0 + a.norm())
        })
    }

    /// Real type with `φ₊ = φ₋`, i.e. the pair `(u, u)` with `u` real.
    pub fn is_er(&self) -> bool {
        self.is_real_type()
            && self
                .modes()
                .all(|n| (self.plus(n) - self.minus(n)).norm() <= 1e-14 * (1.0 + self.minus(n).norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs_minus.is_empty() && self.coeffs_plus.is_empty()
    }

    /// Point evaluation `(φ₋(x), φ₊(x))`.
    pub fn eval(&self, x: f64) -> (C64, C64) {
        let f = |m: &BTreeMap<i64, C64>| {
            m.iter()
                .map(|(&n, &c)| c * C64::from_polar(1.0, 2.0 * PI * n as f64 * x))
                .sum::<C64>()
        };
        (f(&self.coeffs_minus), f(&self.coeffs_plus))
    }

    /// Keep only modes `|n| ≤ k`.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k as i64;
        let f = |m: &BTreeMap<i64, C64>| m.iter().filter(|(n, _)| n.abs() <= k).map(|(&n, &c)| (n, c)).collect();
        Self::new(f(&self.coeffs_minus), f(&self.coeffs_plus))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |m: &BTreeMap<i64, C64>| m.iter().map(|(&n, &c)| (n, c * s)).collect();
        Self::new(f(&self.coeffs_minus), f(&self.coeffs_plus))
    }

    /// Grid size that resolves products of `factors` copies of the potential
    /// with room to spare (`≥ 4×` zero padding for quartic terms).
    pub fn product_grid(&self, factors: usize) -> usize {
        fourier::pow2_at_least((factors * (2 * self.nmodes + 1)).max(16))
    }
}

/// ℓ^p norm of the coefficient sequence; the max over both components when
/// they differ.
pub fn fl_norm(phi: &Potential, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(ZsbError::Input(format!("fl_norm needs p >= 1, got {p}")));
    }
    let norm = |m: &BTreeMap<i64, C64>| {
        if p.is_infinite() {
            m.values().map(|c| c.norm()).fold(0.0, f64::max)
        } else {
            m.values().map(|c| c.norm().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    Ok(norm(&phi.coeffs_minus).max(norm(&phi.coeffs_plus)))
}

/// `H₁..H₄`; quadratic parts are exact sums on the Fourier side, quartic
/// parts are grid means on a zero-padded grid.
pub fn hamiltonians(phi: &Potential) -> HamiltonianValues {
    let mut q1 = C64::new(0.0, 0.0);
    let mut q2 = C64::new(0.0, 0.0);
    let mut q3 = C64::new(0.0, 0.0);
    let mut q4 = C64::new(0.0, 0.0);
    for (&n, &cm) in &phi.coeffs_minus {
        let w = cm * phi.plus(-n);
        let k = n as f64;
        q1 += w;
        q2 += w * k;
        q3 += w * k * k;
        q4 += w * k * k * k;
    }
    let h1 = q1;
    let h2 = -2.0 * PI * q2;
    let mut h3 = 4.0 * PI * PI * q3;
    let mut h4 = -8.0 * PI.powi(3) * q4;

    if !phi.is_zero() {
        let g = phi.product_grid(4);
        let a = fourier::synth(&phi.coeffs_minus, g, 0.0);
        let b = fourier::synth(&phi.coeffs_plus, g, 0.0);
        let db: BTreeMap<i64, C64> = phi
            .coeffs_plus
            .iter()
            .map(|(&n, &c)| (n, c * C64::new(0.0, 2.0 * PI * n as f64)))
            .collect();
        let bx = fourier::synth(&db, g, 0.0);
        let mut s3 = C64::new(0.0, 0.0);
        let mut s4 = C64::new(0.0, 0.0);
        for j in 0..g {
            let a2 = a[j] * a[j];
            s3 += a2 * b[j] * b[j];
            s4 += a2 * b[j] * bx[j];
        }
        h3 += s3 / g as f64;
        h4 += C64::new(0.0, -3.0) * s4 / g as f64;
    }
    HamiltonianValues { h1, h2, h3, h4 }
}

#[derive(Serialize, Deserialize)]
struct PotentialFile {
    kind: String,
    coeffs: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs_plus: Option<Vec<[f64; 3]>>,
}

fn to_map(v: &[[f64; 3]]) -> Result<BTreeMap<i64, C64>> {
    let mut m = BTreeMap::new();
    for t in v {
        if t[0].fract() != 0.0 {
            return Err(ZsbError::Input(format!("mode index {} is not an integer", t[0])));
        }
        *m.entry(t[0] as i64).or_insert(C64::new(0.0, 0.0)) += C64::new(t[1], t[2]);
    }
    Ok(m)
}

fn from_map(m: &BTreeMap<i64, C64>) -> Vec<[f64; 3]> {
    m.iter().map(|(&n, c)| [n as f64, c.re, c.im]).collect()
}

impl Potential {
    /// Parse the JSON potential schema.
    ///
    /// `"real_u"` gives `(u, u)`; `"pair"` gives `φ₋` from `coeffs` and `φ₊`
    /// from `coeffs_plus`, or the real-type partner `conj φ₋` when
    /// `coeffs_plus` is absent.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: PotentialFile = serde_json::from_str(s)?;
        let minus = to_map(&f.coeffs)?;
        match f.kind.as_str() {
            "real_u" => Self::real_u(minus),
            "pair" => match f.coeffs_plus {
                Some(p) => Ok(Self::new(minus, to_map(&p)?)),
                None => Ok(Self::real_type(minus)),
            },
            k => Err(ZsbError::Input(format!("unknown potential kind {k:?}"))),
        }
    }

    pub fn to_json_string(&self) -> String {
        let f = if self.is_er() {
            PotentialFile { kind: "real_u".into(), coeffs: from_map(&self.coeffs_minus), coeffs_plus: None }
        } else {
            PotentialFile {
                kind: "pair".into(),
                coeffs: from_map(&self.coeffs_minus),
                coeffs_plus: Some(from_map(&self.coeffs_plus)),
            }
        };
        serde_json::to_string_pretty(&f).expect("potential serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}
