//! Nevanlinna counting function of rational self-maps by polynomial root
//! solving, and the (S1) statistic built on it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};

use crate::disc::{DiscPoint, C};
use crate::error::{Error, Result};
use crate::symbol::{compose, horner, poly_add, poly_mul, SelfMap, Symbol};

pub const DEGREE_CAP: usize = 64;
/// Roots this close to the unit circle are flagged as boundary-ambiguous.
pub const BOUNDARY_BAND: f64 = 1e-8;
/// Eigenvalues closer than this are merged into one root with multiplicity.
pub const CLUSTER_RADIUS: f64 = 1e-8;

/// `p/q` with coefficients in increasing degree; `q` has no zeros in the closed disc.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    p: Vec<C>,
    q: Vec<C>,
}

impl RationalForm {
    pub fn new(p: Vec<C>, q: Vec<C>) -> Result<Self> {
        let (p, q) = (trim(p), trim(q));
        let deg = degree(&p).max(degree(&q));
        if deg > DEGREE_CAP {
            return Err(Error::DegreeCap(deg, DEGREE_CAP));
        }
        if q.iter().all(|c| *c == C::default()) {
            return Err(Error::PoleInDisc(C::default()));
        }
        if let Some(z) = poly_roots(&q).into_iter().find(|z| z.norm() <= 1.0 + BOUNDARY_BAND) {
            return Err(Error::PoleInDisc(z));
        }
        Ok(Self { p, q })
    }

    pub fn numerator(&self) -> &[C] {
        &self.p
    }

    pub fn denominator(&self) -> &[C] {
        &self.q
    }

    pub fn degree(&self) -> usize {
        degree(&self.p).max(degree(&self.q))
    }

    #[inline]
    pub fn eval(&self, z: C) -> C {
        horner(&self.p, z) / horner(&self.q, z)
    }

    /// Taylor coefficients `c_0..c_{m-1}` from `q·c = p`.
    pub fn series(&self, m: usize) -> Vec<C> {
        let q0 = self.q[0];
        let mut c = Vec::with_capacity(m);
        for k in 0..m {
            let mut s = self.p.get(k).copied().unwrap_or_default();
            for j in 1..self.q.len().min(k + 1) {
                s -= self.q[j] * c[k - j];
            }
            c.push(s / q0);
        }
        c
    }
}

fn trim(mut v: Vec<C>) -> Vec<C> {
    while v.len() > 1 && *v.last().unwrap() == C::default() {
        v.pop();
    }
    if v.is_empty() {
        v.push(C::default());
    }
    v
}

fn degree(v: &[C]) -> usize {
    v.iter().rposition(|c| *c != C::default()).unwrap_or(0)
}

/// Exact lowering of a tree to `p/q`.
pub fn to_rational(phi: &Symbol) -> Result<RationalForm> {
    let (p, q) = lower(phi)?;
    RationalForm::new(p, q)
}

fn lower(phi: &Symbol) -> Result<(Vec<C>, Vec<C>)> {
    let one = vec![C::new(1.0, 0.0)];
    let pq = match phi {
        Symbol::Const { c } => (vec![*c], one),
        Symbol::Identity => (vec![C::default(), C::new(1.0, 0.0)], one),
        Symbol::Poly { coeffs } => (trim(coeffs.clone()), one),
        Symbol::Moebius { a } => (vec![*a, C::new(-1.0, 0.0)], vec![C::new(1.0, 0.0), -a.conj()]),
        Symbol::Blaschke { factor, zeros } => {
            let mut p = vec![*factor];
            let mut q = one;
            for z in zeros {
                p = poly_mul(&p, &[-z, C::new(1.0, 0.0)]);
                q = poly_mul(&q, &[C::new(1.0, 0.0), -z.conj()]);
            }
            (p, q)
        }
        Symbol::Scale { r, inner } => {
            let (p, q) = lower(inner)?;
            (p.into_iter().map(|c| c * *r).collect(), q)
        }
        Symbol::Compose { outer, inner } => {
            let (po, qo) = lower(outer)?;
            let (pi, qi) = lower(inner)?;
            let d = degree(&po).max(degree(&qo));
            if d * degree(&pi).max(degree(&qi)) > DEGREE_CAP {
                return Err(Error::DegreeCap(d * degree(&pi).max(degree(&qi)), DEGREE_CAP));
            }
            // Σ c_k p^k q^{d−k}
            let mut pows_p = vec![one.clone()];
            let mut pows_q = vec![one.clone()];
            for k in 1..=d {
                pows_p.push(poly_mul(&pows_p[k - 1], &pi));
                pows_q.push(poly_mul(&pows_q[k - 1], &qi));
            }
            let combine = |coeffs: &[C]| {
                let mut acc = vec![C::default()];
                for k in 0..=d {
                    let c = coeffs.get(k).copied().unwrap_or_default();
                    if c != C::default() {
                        let t = poly_mul(&pows_p[k], &pows_q[d - k]);
                        acc = poly_add(&acc, &t.into_iter().map(|v| v * c).collect::<Vec<_>>());
                    }
                }
                acc
            };
            (combine(&po), combine(&qo))
        }
        Symbol::Sum { terms } => {
            let mut p = vec![C::default()];
            let mut q = one;
            for t in terms {
                let (pt, qt) = lower(&t.f)?;
                let pt: Vec<C> = pt.into_iter().map(|v| v * t.coef).collect();
                p = poly_add(&poly_mul(&p, &qt), &poly_mul(&pt, &q));
                q = poly_mul(&q, &qt);
            }
            (p, q)
        }
    };
    let deg = degree(&pq.0).max(degree(&pq.1));
    if deg > DEGREE_CAP {
        return Err(Error::DegreeCap(deg, DEGREE_CAP));
    }
    Ok((trim(pq.0), trim(pq.1)))
}

/// All complex roots of `Σ c_k z^k`, by companion-matrix eigenvalues and a
/// Newton polish. Leading coefficients below `1e-14` relative are dropped.
pub fn poly_roots(coeffs: &[C]) -> Vec<C> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![];
    }
    let mut n = coeffs.len() - 1;
    while n > 0 && coeffs[n].norm() <= 1e-14 * scale {
        n -= 1;
    }
    if n == 0 {
        return vec![];
    }
    let c = &coeffs[..=n];
    let roots = if n == 1 {
        vec![-c[0] / c[1]]
    } else {
        let lead = c[n];
        let mut m = DMatrix::<C>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = C::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -c[i] / lead;
        }
        match Schur::try_new(m, 1e-15, 10_000) {
            Some(s) => s.eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default(),
            None => vec![],
        }
    };
    roots.into_iter().map(|z| polish(c, z)).collect()
}

fn polish(c: &[C], mut z: C) -> C {
    let d: Vec<C> = c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect();
    let mut best = (horner(c, z).norm(), z);
    for _ in 0..8 {
        let dv = horner(&d, z);
        if dv == C::default() {
            break;
        }
        z -= horner(c, z) / dv;
        let r = horner(c, z).norm();
        if !(r < best.0) {
            break;
        }
        best = (r, z);
    }
    best.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: C,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preimages {
    pub roots: Vec<Root>,
    pub boundary_ambiguous: bool,
}

impl Preimages {
    pub fn count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// Solutions of `ψ(z) = w` in the open disc, clustered with multiplicity.
pub fn preimages(psi: &RationalForm, w: &DiscPoint) -> Result<Preimages> {
    if w.is_boundary() {
        return Err(Error::NotInterior(w.value()));
    }
    Ok(preimages_raw(psi, w.value()))
}

fn preimages_raw(psi: &RationalForm, w: C) -> Preimages {
    let r = poly_add(&psi.p, &psi.q.iter().map(|c| -c * w).collect::<Vec<_>>());
    let all = poly_roots(&r);
    let boundary_ambiguous = all.iter().any(|z| (z.norm() - 1.0).abs() < BOUNDARY_BAND);
    let mut roots: Vec<Root> = Vec::new();
    let mut inside: Vec<C> = all.into_iter().filter(|z| z.norm() < 1.0).collect();
    inside.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for z in inside {
        match roots.iter_mut().find(|r| (r.z - z).norm() < CLUSTER_RADIUS) {
            Some(r) => r.multiplicity += 1,
            None => roots.push(Root { z, multiplicity: 1 }),
        }
    }
    Preimages { roots, boundary_ambiguous }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counting {
    pub value: f64,
    pub boundary_ambiguous: bool,
}

/// `N(ψ, w) = Σ_{ψ(z)=w, |z|<1} log(1/|z|)` with multiplicity.
pub fn counting_function(psi: &RationalForm, w: &DiscPoint) -> Result<Counting> {
    let wv = w.value();
    if w.is_boundary() || wv == C::default() {
        return Err(Error::Precondition("counting function needs 0 < |w| < 1".into()));
    }
    if psi.eval(C::default()) == wv {
        return Err(Error::Precondition("w equals ψ(0)".into()));
    }
    Ok(counting_raw(psi, wv))
}

fn counting_raw(psi: &RationalForm, w: C) -> Counting {
    let pre = preimages_raw(psi, w);
    let value = pre.roots.iter().map(|r| r.multiplicity as f64 * (1.0 / r.z.norm()).ln()).sum();
    Counting { value, boundary_ambiguous: pre.boundary_ambiguous }
}

/// Upper bound `log(1/ρ(ψ(0), w))` for the counting function.
pub fn littlewood_bound(psi: &RationalForm, w: C) -> f64 {
    let p0 = psi.eval(C::default());
    ((1.0 - w.conj() * p0).norm()).ln() - (p0 - w).norm().ln()
}

/// Polar grid of `w` values for the (S1) supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub refine_rounds: usize,
}

impl Default for WGrid {
    /// Radii `2^{-k}` (k = 1..8) and `1 − 2^{-k}` (k = 2..9), 32 angles.
    fn default() -> Self {
        let mut radii: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
        radii.extend((2..=9).map(|k| 1.0 - 2f64.powi(-k)));
        radii.sort_by(f64::total_cmp);
        Self { radii, angles: 32, refine_rounds: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S1Value {
    pub value: f64,
    pub argmax: C,
    pub boundary_ambiguous: bool,
}

/// `σ_{φ(a)} ∘ φ ∘ σ_a` as a tree.
pub fn l_composite(phi: &Symbol, a: C) -> Symbol {
    let b = phi.value_at(a);
    compose(&Symbol::moebius(b), &compose(phi, &Symbol::moebius(a)))
}

/// `max_w |w|² N(σ_{φ(a)}∘φ∘σ_a, w)` over the grid, refined around the argmax.
pub fn s1_statistic(phi: &SelfMap, a: &DiscPoint, grid: &WGrid) -> Result<S1Value> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let psi = to_rational(&l_composite(phi.symbol(), a.value()))?;
    Ok(s1_of_rational(&psi, grid))
}

pub fn s1_of_rational(psi: &RationalForm, grid: &WGrid) -> S1Value {
    let mut flagged = false;
    let mut score = |r: f64, t: f64| -> f64 {
        if !(r > 0.0 && r < 1.0) {
            return f64::NEG_INFINITY;
        }
        let w = C::from_polar(r, t);
        if psi.eval(C::default()) == w {
            return f64::NEG_INFINITY;
        }
        let c = counting_raw(psi, w);
        flagged |= c.boundary_ambiguous;
        r * r * c.value
    };
    let dt = 2.0 * PI / grid.angles as f64;
    // ties go to the lexicographically smallest (|w|, arg w)
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, &r) in grid.radii.iter().enumerate() {
        for j in 0..grid.angles {
            let v = score(r, j as f64 * dt);
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    let (mut val, i, j) = best;
    let (mut r, mut t) = (grid.radii[i], j as f64 * dt);
    let gap = |k: usize| -> f64 {
        let lo = if k > 0 { grid.radii[k] - grid.radii[k - 1] } else { grid.radii[k] };
        let hi = if k + 1 < grid.radii.len() { grid.radii[k + 1] - grid.radii[k] } else { 1.0 - grid.radii[k] };
        lo.min(hi)
    };
    let (mut dr, mut dth) = (gap(i) / 4.0, dt / 4.0);
    for _ in 0..grid.refine_rounds {
        let (mut br, mut bt) = (r, t);
        for sr in [-1.0, 0.0, 1.0] {
            for st in [-1.0, 0.0, 1.0] {
                let (rr, tt) = (r + sr * dr, t + st * dth);
                let v = score(rr, tt);
                if v > val {
                    val = v;
                    br = rr;
                    bt = tt;
                }
            }
        }
        r = br;
        t = bt;
        dr /= 2.0;
        dth /= 2.0;
    }
    S1Value { value: val.max(0.0), argmax: C::from_polar(r, t), boundary_ambiguous: flagged }
}

/// `|w|² log(1/|w|)` is maximized at `|w| = e^{-1/2}` with value `1/(2e)`.
pub fn identity_s1_value() -> f64 {
    0.5 * (-1f64).exp()
}
