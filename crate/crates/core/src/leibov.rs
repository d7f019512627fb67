//! Test functions `f_n = σ_{b_n} − b_n`, their closed-form Garsia norms,
//! the inductive subsequence selection and the `c₀` combination bounds.
//!
//! Points are carried in polar form with an explicit co-radius `1 − |z|`,
//! so selections can go far below the double-precision spacing near one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::{DiscPoint, C};
use crate::error::{Error, Result};
use crate::symbol::Symbol;

pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_SEQUENCE_LEN: usize = 160;
/// Slack allowed above `2‖λ‖_∞`.
pub const UPPER_TOL: f64 = 1e-6;
/// Angles per ladder circle in the certificate and seminorm grids.
pub const GRID_ANGLES: usize = 64;

/// `z = (1 − co)·e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub angle: f64,
    pub co_radius: f64,
}

impl PolarPoint {
    pub fn new(angle: f64, co_radius: f64) -> Result<Self> {
        if !(co_radius > 0.0 && co_radius <= 1.0) || !angle.is_finite() {
            return Err(Error::Precondition(format!("polar point ({angle}, {co_radius}) is not interior")));
        }
        Ok(Self { angle, co_radius })
    }

    pub fn from_complex(z: C) -> Result<Self> {
        let m = z.norm();
        if m >= 1.0 {
            return Err(Error::NotInterior(z));
        }
        let co = (1.0 - m * m) / (1.0 + m);
        Ok(Self { angle: if m == 0.0 { 0.0 } else { z.arg() }, co_radius: co })
    }

    pub fn modulus(&self) -> f64 {
        1.0 - self.co_radius
    }

    /// Lossy once `co_radius` is below `f64::EPSILON`.
    pub fn to_complex(&self) -> C {
        Complex64::from_polar(self.modulus(), self.angle)
    }

    /// `1 − |z|²`.
    pub fn one_minus_abs2(&self) -> f64 {
        self.co_radius * (2.0 - self.co_radius)
    }
}

/// `1 − p·q̄` without cancellation.
pub fn one_minus_prod(p: &PolarPoint, q: &PolarPoint) -> C {
    let (x, y) = (p.co_radius, q.co_radius);
    let m = p.modulus() * q.modulus();
    let d = p.angle - q.angle;
    let s = (0.5 * d).sin();
    Complex64::new(x + y - x * y + 2.0 * m * s * s, -m * d.sin())
}

/// `γ(σ_b − b, a) = √(1 − |σ_b(a)|²)` in polar form.
pub fn gamma_closed_form_polar(b: &PolarPoint, a: &PolarPoint) -> f64 {
    ((a.one_minus_abs2() * b.one_minus_abs2()).sqrt() / one_minus_prod(a, b).norm()).min(1.0)
}

pub fn gamma_closed_form(b: &DiscPoint, a: &DiscPoint) -> Result<f64> {
    for p in [a, b] {
        if p.is_boundary() {
            return Err(Error::NotInterior(p.value()));
        }
    }
    Ok(gamma_closed_form_polar(&PolarPoint::from_complex(b.value())?, &PolarPoint::from_complex(a.value())?))
}

/// Exact `sup γ(σ_b − b, a)` over `|a| ≤ r` (`inner`) or `|a| ≥ r` (`outer`),
/// given co-radii. The extremum sits on `|a| = r` on the ray through `b`.
pub fn region_sup(co_b: f64, co_r: f64, inner: bool) -> f64 {
    let separated = if inner { co_b < co_r } else { co_r < co_b };
    if !separated {
        return 1.0;
    }
    let (x, y) = (co_r, co_b);
    ((x * (2.0 - x) * y * (2.0 - y)).sqrt() / (x + y - x * y)).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSequence {
    base: Vec<PolarPoint>,
}

impl TestSequence {
    /// `|b_n|` must be strictly increasing.
    pub fn new(base: Vec<PolarPoint>) -> Result<Self> {
        if base.windows(2).any(|w| w[1].co_radius > w[0].co_radius) {
            return Err(Error::Precondition("|b_n| must be nondecreasing".into()));
        }
        Ok(Self { base })
    }

    pub fn from_points(points: &[DiscPoint]) -> Result<Self> {
        let base =
            points
                .iter()
                .map(|p| {
                    if p.is_boundary() {
                        Err(Error::NotInterior(p.value()))
                    } else {
                        PolarPoint::from_complex(p.value())
                    }
                })
                .collect::<Result<Vec<_>>>()?;
        Self::new(base)
    }

    /// `b_n = 1 − 2^{-n}`, `n = 1..=len`.
    pub fn dyadic(len: usize) -> Self {
        Self { base: (1..=len).map(|n| PolarPoint { angle: 0.0, co_radius: 2f64.powi(-(n as i32)) }).collect() }
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn base(&self, n: usize) -> &PolarPoint {
        &self.base[n]
    }

    /// `f_n = σ_{b_n} − b_n` as a symbol (only meaningful while `b_n` is
    /// representable in double precision).
    pub fn symbol(&self, n: usize) -> Symbol {
        let b = self.base[n].to_complex();
        Symbol::sum(vec![
            (Complex64::new(1.0, 0.0), Symbol::moebius(b)),
            (Complex64::new(1.0, 0.0), Symbol::constant(-b)),
        ])
    }

    /// `‖f_n‖_{H²} = √(1 − |b_n|²)`.
    pub fn h2_norm(&self, n: usize) -> f64 {
        self.base[n].one_minus_abs2().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBounds {
    pub k: usize,
    pub threshold: f64,
    pub index: usize,
    pub inner_sup: f64,
    pub outer_sup: f64,
    pub h2_norm: f64,
    /// Largest closed-form value over the polar grid inside each region.
    pub grid_inner_max: f64,
    pub grid_outer_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionCertificate {
    pub sequence: TestSequence,
    /// Co-radii of `r_1, …, r_{K+1}`.
    pub co_radii: Vec<f64>,
    pub steps: Vec<StepBounds>,
}

impl SelectionCertificate {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }

    pub fn chosen(&self) -> Vec<PolarPoint> {
        self.steps.iter().map(|s| self.sequence.base[s.index]).collect()
    }

    pub fn verified(&self) -> bool {
        self.steps.iter().all(|s| {
            s.inner_sup < s.threshold
                && s.outer_sup < s.threshold
                && s.h2_norm < s.threshold
                && s.grid_inner_max <= s.inner_sup + 1e-12
                && s.grid_outer_max <= s.outer_sup + 1e-12
        }) && self.co_radii.windows(2).all(|w| w[1] < w[0])
    }

    /// Polar ladder `co = 2^{-j}` reaching past the deepest radius, plus the origin.
    pub fn polar_grid(&self) -> Vec<PolarPoint> {
        let deepest = self.co_radii.iter().copied().fold(0.5, f64::min);
        let levels = (-deepest.log2()).ceil() as i32 + 8;
        polar_grid(levels)
    }
}

pub fn polar_grid(levels: i32) -> Vec<PolarPoint> {
    let mut g = vec![PolarPoint { angle: 0.0, co_radius: 1.0 }];
    for j in 1..=levels {
        let co = 2f64.powi(-j);
        for i in 0..GRID_ANGLES {
            g.push(PolarPoint { angle: std::f64::consts::TAU * i as f64 / GRID_ANGLES as f64, co_radius: co });
        }
    }
    g
}

/// Largest co-radius `x < co_b` with outer supremum below `thr`, by bisection on `log x`.
fn next_co_radius(co_b: f64, thr: f64) -> f64 {
    let (mut lo, mut hi) = (co_b.log2() - 200.0, co_b.log2());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if region_sup(co_b, mid.exp2(), false) < thr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp2()
}

/// Greedy inductive selection with `r_1 = ½` and thresholds `2^{-k-1}`.
pub fn select_subsequence(seq: &TestSequence, depth: usize) -> Result<SelectionCertificate> {
    let mut co_radii = vec![0.5];
    let mut steps = Vec::with_capacity(depth);
    let mut next = 0usize;
    for k in 1..=depth {
        let thr = 2f64.powi(-(k as i32) - 1);
        let co_r = *co_radii.last().expect("nonempty");
        let n = (next..seq.len())
            .find(|&n| region_sup(seq.base[n].co_radius, co_r, true) < thr && seq.h2_norm(n) < thr)
            .ok_or(Error::Exhausted(k))?;
        let b = seq.base[n];
        let co_next = next_co_radius(b.co_radius, thr);
        if !(region_sup(b.co_radius, co_next, false) < thr) {
            return Err(Error::Exhausted(k));
        }
        let grid = polar_grid((-co_next.log2()).ceil() as i32 + 8);
        let max_in = |keep: &dyn Fn(&PolarPoint) -> bool| {
            grid.iter().filter(|a| keep(a)).map(|a| gamma_closed_form_polar(&b, a)).fold(0.0, f64::max)
        };
        steps.push(StepBounds {
            k,
            threshold: thr,
            index: n,
            inner_sup: region_sup(b.co_radius, co_r, true),
            outer_sup: region_sup(b.co_radius, co_next, false),
            h2_norm: seq.h2_norm(n),
            grid_inner_max: max_in(&|a| a.co_radius >= co_r),
            grid_outer_max: max_in(&|a| a.co_radius <= co_next),
        });
        co_radii.push(co_next);
        next = n + 1;
    }
    Ok(SelectionCertificate { sequence: seq.clone(), co_radii, steps })
}

/// `⟨g_k, g_l⟩` for `g_k = f_{n_k}∘σ_a − f_{n_k}(a)`.
pub fn gram_entry(a: &PolarPoint, bk: &PolarPoint, bl: &PolarPoint) -> C {
    let num = a.one_minus_abs2() * bk.one_minus_abs2() * bl.one_minus_abs2();
    let den = one_minus_prod(a, bk) * one_minus_prod(a, bl).conj() * one_minus_prod(bl, bk);
    num / den
}

/// `γ(Σ λ_k f_{n_k}, a)` from the Gram matrix.
pub fn combination_gamma(points: &[PolarPoint], lambda: &[C], a: &PolarPoint) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (k, bk) in points.iter().enumerate() {
        if lambda[k] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (l, bl) in points.iter().enumerate() {
            if lambda[l] != Complex64::new(0.0, 0.0) {
                s += lambda[k] * lambda[l].conj() * gram_entry(a, bk, bl);
            }
        }
    }
    s.re.max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationEstimate {
    pub value: f64,
    pub argmax: PolarPoint,
    pub sup_lambda: f64,
    pub grid_size: usize,
}

/// Seminorm of `Σ λ_k f_{n_k}` over the certificate grid augmented with every
/// chosen `b_{n_k}`, checked against `[¼‖λ‖_∞, 2‖λ‖_∞ + tol]`.
pub fn combination_seminorm(cert: &SelectionCertificate, lambda: &[C]) -> Result<CombinationEstimate> {
    let points = cert.chosen();
    if lambda.len() > points.len() {
        return Err(Error::Precondition(format!("{} coefficients for depth {}", lambda.len(), points.len())));
    }
    let sup_lambda = lambda.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(sup_lambda > 0.0) {
        return Err(Error::Precondition("‖λ‖_∞ must be positive".into()));
    }
    let points = &points[..lambda.len()];
    let mut grid = cert.polar_grid();
    grid.extend_from_slice(points);
    let mut best = CombinationEstimate { value: -1.0, argmax: grid[0], sup_lambda, grid_size: grid.len() };
    for a in &grid {
        let g = combination_gamma(points, lambda, a);
        if g > best.value {
            best.value = g;
            best.argmax = *a;
        }
        if g > 2.0 * sup_lambda + UPPER_TOL {
            return Err(Error::BoundViolation {
                witness: a.to_complex(),
                detail: format!("γ = {g} exceeds 2‖λ‖_∞ = {}", 2.0 * sup_lambda),
            });
        }
    }
    if best.value < 0.25 * sup_lambda {
        return Err(Error::BoundViolation {
            witness: best.argmax.to_complex(),
            detail: format!("estimate {} below ¼‖λ‖_∞ = {}", best.value, 0.25 * sup_lambda),
        });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::{garsia_gamma, QuadConfig};
    use crate::symbol::golden_max;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64, y: f64) -> C {
        Complex64::new(x, y)
    }

    fn dp(z: C) -> DiscPoint {
        DiscPoint::interior(z).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert!((gamma_closed_form(&dp(c(0.5, 0.0)), &dp(c(0.0, 0.0))).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        let b = dp(c(0.3, -0.6));
        assert!((gamma_closed_form(&b, &b).unwrap() - 1.0).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for k in 1..30 {
            let a = dp(c(1.0 - 2f64.powi(-k), 0.0));
            let g = gamma_closed_form(&dp(c(0.5, 0.0)), &a).unwrap();
            assert!(g < prev);
            prev = g;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn test_functions_vanish_at_origin() {
        let seq = TestSequence::dyadic(12);
        for n in 0..12 {
            assert_eq!(seq.symbol(n).value_at(c(0.0, 0.0)), c(0.0, 0.0));
            let b = seq.base(n).modulus();
            assert!((seq.h2_norm(n) - (1.0 - b * b).sqrt()).abs() < 1e-10);
        }
        assert!(
            TestSequence::new(vec![PolarPoint::new(0.0, 0.1).unwrap(), PolarPoint::new(0.0, 0.5).unwrap()]).is_err()
        );
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = QuadConfig::default();
        for _ in 0..40 {
            let b = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let a = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let seq = TestSequence::from_points(&[dp(b)]).unwrap();
            let q = garsia_gamma(&seq.symbol(0), &dp(a), &cfg).unwrap().gamma;
            assert!((q - gamma_closed_form(&dp(b), &dp(a)).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn gram_matches_quadrature() {
        let cfg = QuadConfig::default();
        let bs = [c(0.5, 0.1), c(-0.2, 0.7), c(0.8, -0.3)];
        let lam = [c(1.0, 0.0), c(-0.5, 0.3), c(0.2, 0.9)];
        let pts: Vec<_> = bs.iter().map(|&b| PolarPoint::from_complex(b).unwrap()).collect();
        let f = Symbol::sum(
            bs.iter().zip(lam).flat_map(|(&b, l)| [(l, Symbol::moebius(b)), (l, Symbol::constant(-b))]).collect(),
        );
        for a in [c(0.0, 0.0), c(0.4, -0.4), c(-0.85, 0.1)] {
            let q = garsia_gamma(&f, &dp(a), &cfg).unwrap().gamma;
            let g = combination_gamma(&pts, &lam, &PolarPoint::from_complex(a).unwrap());
            assert!((q - g).abs() < 1e-8, "{q} vs {g}");
        }
    }

    #[test]
    fn region_sup_matches_golden_section() {
        for &(cb, cr, inner) in &[(0.01, 0.3, true), (1e-4, 0.5, true), (0.2, 0.01, false), (1e-3, 1e-6, false)] {
            let b = PolarPoint::new(0.7, cb).unwrap();
            // maximize over the angle on the circle |a| = r, and over the radius along the ray
            let (_, on_circle) =
                golden_max(|t| gamma_closed_form_polar(&b, &PolarPoint { angle: t, co_radius: cr }), 0.0, 1.4);
            let (_, along) = if inner {
                golden_max(
                    |x| gamma_closed_form_polar(&b, &PolarPoint { angle: 0.7, co_radius: x.exp2() }),
                    cr.log2(),
                    0.0,
                )
            } else {
                golden_max(
                    |x| gamma_closed_form_polar(&b, &PolarPoint { angle: 0.7, co_radius: x.exp2() }),
                    -80.0,
                    cr.log2(),
                )
            };
            let s = region_sup(cb, cr, inner);
            assert!((on_circle - s).abs() < 1e-10);
            assert!(along <= s + 1e-12);
        }
        assert_eq!(region_sup(0.5, 0.1, true), 1.0);
    }

    #[test]
    fn selection_on_dyadic_sequence() {
        let seq = TestSequence::dyadic(DEFAULT_SEQUENCE_LEN);
        let cert = select_subsequence(&seq, 3).unwrap();
        assert!(cert.verified());
        assert_eq!(cert.depth(), 3);
        assert!(select_subsequence(&seq, 0).unwrap().steps.is_empty());
        let deep = select_subsequence(&seq, DEFAULT_DEPTH).unwrap();
        assert!(deep.verified());
        assert!(deep.indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn selection_fails_on_constant_sequence() {
        let seq = TestSequence::new(vec![PolarPoint::new(0.0, 0.01).unwrap(); 50]).unwrap();
        assert!(matches!(select_subsequence(&seq, 3), Err(Error::Exhausted(_))));
    }

    #[test]
    fn one_spike_and_lower_bound_mechanism() {
        let cert = select_subsequence(&TestSequence::dyadic(DEFAULT_SEQUENCE_LEN), DEFAULT_DEPTH).unwrap();
        let pts = cert.chosen();
        let mut grid = cert.polar_grid();
        grid.extend_from_slice(&pts);
        for a in &grid {
            let gs: Vec<f64> = pts.iter().map(|b| gamma_closed_form_polar(b, a)).collect();
            let spikes = gs.iter().enumerate().filter(|(k, &g)| g >= 2f64.powi(-(*k as i32) - 2)).count();
            assert!(spikes <= 1);
            assert!(gs.iter().sum::<f64>() < 1.5);
        }
        for b in &pts {
            assert!((gamma_closed_form_polar(b, b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn combination_examples() {
        let cert = select_subsequence(&TestSequence::dyadic(DEFAULT_SEQUENCE_LEN), 3).unwrap();
        let unit = combination_seminorm(&cert, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((unit.value - 1.0).abs() < 1e-12);
        assert!(combination_seminorm(&cert, &[c(0.0, 0.0); 3]).is_err());
        let ones = combination_seminorm(&cert, &[c(1.0, 0.0); 3]).unwrap();
        assert!(ones.value >= 0.25 && ones.value <= 2.0 + UPPER_TOL);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn closed_form_is_mobius_invariant(br in 0.0..0.95f64, bt in 0.0..6.3f64, ar in 0.0..0.95f64, at in 0.0..6.3f64) {
            let b = Complex64::from_polar(br, bt);
            let a = Complex64::from_polar(ar, at);
            let direct = (1.0 - crate::disc::moebius(b, a).norm_sqr()).max(0.0).sqrt();
            prop_assert!((gamma_closed_form(&dp(b), &dp(a)).unwrap() - direct).abs() < 1e-10);
        }
    }
}
