//! Analytic functions on the closed disc as expression trees, and the
//! validated self-maps built from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::disc::{DiscPoint, C};
use crate::error::{Error, Result};
use crate::quadrature::{fourier_coefficients, frequency, root, MAX_N};

/// Self-map validation grid.
pub const VALIDATION_N: usize = 8192;
/// Rejection margin above one.
pub const REJECT_MARGIN: f64 = 1e-9;
/// Sup-norms within this distance of one are classified as boundary-touching.
pub const TOUCH_THRESHOLD: f64 = 1e-6;

/// Expression tree for a function analytic on a neighbourhood of the closed disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Symbol {
    Const {
        c: C,
    },
    Identity,
    /// Coefficients in increasing degree.
    Poly {
        coeffs: Vec<C>,
    },
    /// `σ_a(z) = (a − z)/(1 − ā z)`.
    Moebius {
        a: C,
    },
    /// `factor · Π (z − z_k)/(1 − z̄_k z)`.
    Blaschke {
        factor: C,
        zeros: Vec<C>,
    },
    /// `outer ∘ inner`.
    Compose {
        outer: Box<Symbol>,
        inner: Box<Symbol>,
    },
    /// `r · inner` with `0 < r ≤ 1`.
    Scale {
        r: f64,
        inner: Box<Symbol>,
    },
    /// Finite linear combination `Σ coef · f`.
    Sum {
        terms: Vec<Term>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: C,
    pub f: Symbol,
}

impl Symbol {
    pub fn constant(c: C) -> Self {
        Symbol::Const { c }
    }

    pub fn identity() -> Self {
        Symbol::Identity
    }

    pub fn poly(coeffs: Vec<C>) -> Self {
        Symbol::Poly { coeffs }
    }

    pub fn poly_real(coeffs: &[f64]) -> Self {
        Symbol::Poly { coeffs: coeffs.iter().map(|&x| C::new(x, 0.0)).collect() }
    }

    pub fn moebius(a: C) -> Self {
        Symbol::Moebius { a }
    }

    pub fn blaschke(factor: C, zeros: Vec<C>) -> Self {
        Symbol::Blaschke { factor, zeros }
    }

    pub fn scale(r: f64, inner: Symbol) -> Self {
        Symbol::Scale { r, inner: Box::new(inner) }
    }

    pub fn sum(terms: Vec<(C, Symbol)>) -> Self {
        Symbol::Sum { terms: terms.into_iter().map(|(coef, f)| Term { coef, f }).collect() }
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); n + 1];
        coeffs[n] = C::new(1.0, 0.0);
        Symbol::Poly { coeffs }
    }

    /// Value at `z`; no validation is implied.
    pub fn value_at(&self, z: C) -> C {
        match self {
            Symbol::Const { c } => *c,
            Symbol::Identity => z,
            Symbol::Poly { coeffs } => horner(coeffs, z),
            Symbol::Moebius { a } => crate::disc::moebius(*a, z),
            Symbol::Blaschke { factor, zeros } => {
                zeros.iter().fold(*factor, |acc, zk| acc * (z - zk) / (1.0 - zk.conj() * z))
            }
            Symbol::Compose { outer, inner } => outer.value_at(inner.value_at(z)),
            Symbol::Scale { r, inner } => *r * inner.value_at(z),
            Symbol::Sum { terms } => terms.iter().map(|t| t.coef * t.f.value_at(z)).sum(),
        }
    }

    /// Polynomial coefficients when the tree is a polynomial in `z`.
    pub fn as_poly(&self) -> Option<Vec<C>> {
        match self {
            Symbol::Const { c } => Some(vec![*c]),
            Symbol::Identity => Some(vec![C::new(0.0, 0.0), C::new(1.0, 0.0)]),
            Symbol::Poly { coeffs } => Some(if coeffs.is_empty() { vec![C::new(0.0, 0.0)] } else { coeffs.clone() }),
            Symbol::Scale { r, inner } => inner.as_poly().map(|p| p.into_iter().map(|c| c * *r).collect()),
            Symbol::Compose { outer, inner } => {
                let (p, q) = (outer.as_poly()?, inner.as_poly()?);
                Some(poly_compose(&p, &q))
            }
            Symbol::Sum { terms } => {
                let mut acc = vec![C::new(0.0, 0.0)];
                for t in terms {
                    let p = t.f.as_poly()?;
                    acc = poly_add(&acc, &p.into_iter().map(|c| c * t.coef).collect::<Vec<_>>());
                }
                Some(acc)
            }
            Symbol::Moebius { .. } | Symbol::Blaschke { .. } => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.as_poly().is_some()
    }

    /// Structural checks on node parameters.
    pub fn check_nodes(&self) -> Result<()> {
        match self {
            Symbol::Const { c } if !c.is_finite() => Err(Error::Precondition("non-finite constant".into())),
            Symbol::Poly { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => {
                Err(Error::Precondition("non-finite polynomial coefficient".into()))
            }
            Symbol::Moebius { a } if !(a.norm() < 1.0) => Err(Error::NotInterior(*a)),
            Symbol::Blaschke { factor, zeros } => {
                if (factor.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::NotOnCircle(*factor, factor.norm()));
                }
                match zeros.iter().find(|z| !(z.norm() < 1.0)) {
                    Some(z) => Err(Error::NotInterior(*z)),
                    None => Ok(()),
                }
            }
            Symbol::Compose { outer, inner } => {
                outer.check_nodes()?;
                inner.check_nodes()
            }
            Symbol::Scale { r, inner } => {
                if !(*r > 0.0 && *r <= 1.0) {
                    return Err(Error::Precondition(format!("scale factor {r} outside (0, 1]")));
                }
                inner.check_nodes()
            }
            Symbol::Sum { terms } => terms.iter().try_for_each(|t| t.f.check_nodes()),
            _ => Ok(()),
        }
    }

    /// Samples at the `n`-th roots of unity, for any `n`.
    pub fn sample_roots_of_unity(&self, n: usize) -> Vec<C> {
        (0..n).map(|j| self.value_at(root(j, n))).collect()
    }
}

/// `outer ∘ inner` as a tree node.
pub fn compose(outer: &Symbol, inner: &Symbol) -> Symbol {
    Symbol::Compose { outer: Box::new(outer.clone()), inner: Box::new(inner.clone()) }
}

/// `φⁿ`: polynomial expansion when `φ` is polynomial, otherwise `zⁿ ∘ φ`.
pub fn power(phi: &Symbol, n: usize) -> Symbol {
    match phi.as_poly() {
        Some(p) => {
            let mut acc = vec![C::new(1.0, 0.0)];
            for _ in 0..n {
                acc = poly_mul(&acc, &p);
            }
            Symbol::Poly { coeffs: acc }
        }
        None => compose(&Symbol::monomial(n), phi),
    }
}

#[inline]
pub fn horner(coeffs: &[C], z: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * z + c)
}

pub fn poly_mul(p: &[C], q: &[C]) -> Vec<C> {
    if p.is_empty() || q.is_empty() {
        return vec![];
    }
    let mut out = vec![C::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn poly_add(p: &[C], q: &[C]) -> Vec<C> {
    let n = p.len().max(q.len());
    (0..n).map(|i| p.get(i).copied().unwrap_or_default() + q.get(i).copied().unwrap_or_default()).collect()
}

/// Coefficients of `p(q(z))`.
pub fn poly_compose(p: &[C], q: &[C]) -> Vec<C> {
    let mut acc = vec![C::new(0.0, 0.0)];
    for c in p.iter().rev() {
        acc = poly_add(&poly_mul(&acc, q), &[*c]);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum Certificate {
    Strict { sup: f64 },
    BoundaryTouching { contact: C, sup: f64 },
}

impl Certificate {
    pub fn sup(&self) -> f64 {
        match *self {
            Certificate::Strict { sup } | Certificate::BoundaryTouching { sup, .. } => sup,
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Certificate::Strict { .. })
    }
}

/// A symbol certified to map the closed disc into itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMap {
    symbol: Symbol,
    certificate: Certificate,
}

impl SelfMap {
    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    #[inline]
    pub fn at(&self, z: C) -> C {
        self.symbol.value_at(z)
    }

    /// Evaluation at a disc point; the result is a disc point again.
    pub fn eval(&self, z: &DiscPoint) -> Result<DiscPoint> {
        let w = self.at(z.value());
        let m = w.norm();
        if m > 1.0 + 1e-10 {
            return Err(Error::NotSelfMap { witness: z.value(), modulus: m });
        }
        if m >= 1.0 - crate::disc::BOUNDARY_TOL {
            DiscPoint::boundary(w)
        } else {
            DiscPoint::interior(w)
        }
    }

    /// Normalized measure of grid points with `|φ| > 1 − eps`.
    pub fn near_unimodular_measure(&self, eps: f64, n: usize) -> f64 {
        let hits = (0..n).filter(|&j| self.at(root(j, n)).norm() > 1.0 - eps).count();
        hits as f64 / n as f64
    }
}

/// Sup-norm estimate on the validation grid, refined locally around the
/// largest samples.
pub fn validate_self_map(phi: &Symbol) -> Result<SelfMap> {
    phi.check_nodes()?;
    let n = VALIDATION_N;
    let samples: Vec<f64> = (0..n).map(|j| phi.value_at(root(j, n)).norm()).collect();
    if let Some(j) = samples.iter().position(|m| !m.is_finite()) {
        return Err(Error::NotSelfMap { witness: root(j, n), modulus: f64::INFINITY });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| samples[j].total_cmp(&samples[i]).then(i.cmp(&j)));
    let (mut best_t, mut best) = (2.0 * PI * order[0] as f64 / n as f64, samples[order[0]]);
    let h = 2.0 * PI / n as f64;
    for &j in order.iter().take(4) {
        let t0 = 2.0 * PI * j as f64 / n as f64;
        let (t, m) = golden_max(|t| phi.value_at(C::from_polar(1.0, t)).norm(), t0 - h, t0 + h);
        if m > best {
            best = m;
            best_t = t;
        }
    }
    let witness = C::from_polar(1.0, best_t);
    if !(best <= 1.0 + REJECT_MARGIN) {
        return Err(Error::NotSelfMap { witness, modulus: best });
    }
    let certificate = if best < 1.0 - TOUCH_THRESHOLD {
        Certificate::Strict { sup: best }
    } else {
        Certificate::BoundaryTouching { contact: witness, sup: best }
    };
    Ok(SelfMap { symbol: phi.clone(), certificate })
}

/// Golden-section maximization on `[lo, hi]`; returns the better of the
/// final bracket point and the endpoints.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 * (1.0 + a.abs()) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (lo, f(lo)), (hi, f(hi))].into_iter().fold((mid, f64::NEG_INFINITY), |acc, p| {
        if p.1 > acc.1 {
            p
        } else {
            acc
        }
    })
}

/// Samples of a self-map at the `N`-th roots of unity, `N ≥ 64` a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    values: Vec<C>,
}

impl BoundaryGrid {
    pub fn new(values: Vec<C>) -> Result<Self> {
        check_grid_size(values.len())?;
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(v.norm() <= 1.0 + 1e-10)) {
            return Err(Error::NotSelfMap { witness: root(j, values.len()), modulus: v.norm() });
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C] {
        &self.values
    }
}

pub fn check_grid_size(n: usize) -> Result<()> {
    if n < 64 {
        return Err(Error::BadGrid(n, "fewer than 64 samples"));
    }
    if !n.is_power_of_two() {
        return Err(Error::BadGrid(n, "not a power of two"));
    }
    Ok(())
}

pub fn boundary_samples(phi: &SelfMap, n: usize) -> Result<BoundaryGrid> {
    check_grid_size(n)?;
    BoundaryGrid::new(phi.symbol().sample_roots_of_unity(n))
}

/// Taylor coefficients `c_0..=c_M`: exact for polynomial trees, otherwise
/// by FFT of boundary samples with `N ≥ 4(M+1)` doubled until the upper
/// half of the spectrum has decayed to rounding level.
pub fn taylor(f: &Symbol, m: usize) -> Result<Vec<C>> {
    if let Some(mut p) = f.as_poly() {
        p.resize(m + 1, C::new(0.0, 0.0));
        return Ok(p);
    }
    let need = 4 * (m + 1);
    if need > MAX_N {
        return Err(Error::BadGrid(need, "order exceeds the largest grid"));
    }
    let mut n = need.next_power_of_two().max(64);
    loop {
        let c = fourier_coefficients(&f.sample_roots_of_unity(n));
        let scale = c.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let tail = c
            .iter()
            .enumerate()
            .filter(|(k, _)| frequency(*k, n).unsigned_abs() as usize >= n / 4)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        if tail <= 1e-15 * scale {
            return Ok(c[..=m].to_vec());
        }
        if n >= MAX_N {
            return Err(Error::BadGrid(n, "Taylor coefficients did not decay"));
        }
        n *= 2;
    }
}
