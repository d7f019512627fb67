//! Pointwise geometry of the unit disc.
//!
//! Hot loops work on raw [`Complex64`] values through the free functions
//! ([`moebius`], [`rho`], [`tau`], [`poisson`]); the [`DiscPoint`] wrappers
//! carry the interior/boundary role and are used at API boundaries.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C = Complex64;

/// Tolerance for accepting a point as lying on the unit circle.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Default cap applied to the hyperbolic metric inside integrals.
pub const DEFAULT_TAU_CAP: f64 = 50.0;

/// Exact angle or length measured in turns.
pub type Turns = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    value: C,
    on_circle: bool,
}

impl DiscPoint {
    pub fn interior(z: C) -> Result<Self> {
        if z.is_finite() && z.norm() < 1.0 {
            Ok(Self { value: z, on_circle: false })
        } else {
            Err(Error::NotInterior(z))
        }
    }

    /// Boundary point, renormalized to modulus exactly one.
    pub fn boundary(z: C) -> Result<Self> {
        let m = z.norm();
        if (m - 1.0).abs() <= BOUNDARY_TOL {
            Ok(Self { value: z / m, on_circle: true })
        } else {
            Err(Error::NotOnCircle(z, m))
        }
    }

    /// The boundary point `e^{iθ}`.
    pub fn from_angle(theta: f64) -> Self {
        Self { value: C::from_polar(1.0, theta), on_circle: true }
    }

    /// Boundary if within [`BOUNDARY_TOL`] of the circle, interior if inside.
    pub fn classify(z: C) -> Result<Self> {
        Self::boundary(z).or_else(|_| Self::interior(z))
    }

    pub fn value(&self) -> C {
        self.value
    }

    pub fn is_boundary(&self) -> bool {
        self.on_circle
    }
}

/// `σ_a(z) = (a − z)/(1 − ā z)`.
#[inline]
pub fn moebius(a: C, z: C) -> C {
    (a - z) / (1.0 - a.conj() * z)
}

#[inline]
pub fn one_minus_abs2(z: C) -> f64 {
    let m = z.norm();
    (1.0 - m) * (1.0 + m)
}

/// Squared pseudo-hyperbolic distance, clamped to `[0, 1]`.
#[inline]
pub fn rho_sq(z: C, w: C) -> f64 {
    if z == w {
        return 0.0;
    }
    let d = 1.0 - w.conj() * z;
    let dn = d.norm_sqr();
    if dn == 0.0 {
        return 1.0;
    }
    ((z - w).norm_sqr() / dn).min(1.0)
}

#[inline]
pub fn rho(z: C, w: C) -> f64 {
    rho_sq(z, w).sqrt()
}

/// Hyperbolic distance `½ log((1+ρ)/(1−ρ))`, infinite between distinct
/// points when one of them is unimodular.
#[inline]
pub fn tau(z: C, w: C) -> f64 {
    if z == w {
        return 0.0;
    }
    let d = (1.0 - w.conj() * z).norm_sqr();
    // 1 − ρ² = (1−|z|²)(1−|w|²)/|1 − w̄z|²
    let comp = one_minus_abs2(z).max(0.0) * one_minus_abs2(w).max(0.0) / d;
    if !(comp > 0.0) {
        return f64::INFINITY;
    }
    let r = rho(z, w);
    (1.0 + r).ln() - 0.5 * comp.ln()
}

/// Poisson kernel `(1 − |a|²)/|ζ − a|²`.
#[inline]
pub fn poisson(a: C, zeta: C) -> f64 {
    one_minus_abs2(a) / (zeta - a).norm_sqr()
}

pub fn moebius_eval(a: &DiscPoint, z: &DiscPoint) -> Result<DiscPoint> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let w = moebius(a.value(), z.value());
    if z.is_boundary() {
        DiscPoint::boundary(w)
    } else {
        // rounding can push images of points very close to the circle outward
        let m = w.norm();
        let w = if m >= 1.0 { w / m * (1.0 - f64::EPSILON) } else { w };
        DiscPoint::interior(w)
    }
}

pub fn pseudo_hyperbolic(z: &DiscPoint, w: &DiscPoint) -> f64 {
    if z.is_boundary() && w.is_boundary() {
        return if z.value() == w.value() { 0.0 } else { 1.0 };
    }
    rho(z.value(), w.value())
}

pub fn hyperbolic(z: &DiscPoint, w: &DiscPoint) -> f64 {
    if z.value() == w.value() {
        return 0.0;
    }
    if z.is_boundary() || w.is_boundary() {
        return f64::INFINITY;
    }
    tau(z.value(), w.value())
}

/// `min(τ, cap)^p`, recording whether the cap was applied.
#[inline]
pub fn capped_tau_pow(z: C, w: C, cap: f64, p: f64) -> (f64, bool) {
    let t = tau(z, w);
    if t > cap {
        (cap.powf(p), true)
    } else {
        (t.powf(p), false)
    }
}

pub fn poisson_kernel(a: &DiscPoint, zeta: &DiscPoint) -> Result<f64> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    if !zeta.is_boundary() {
        return Err(Error::NotOnCircle(zeta.value(), zeta.value().norm()));
    }
    Ok(poisson(a.value(), zeta.value()))
}

/// Disc automorphism exchanging `0` and `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Automorphism {
    a: C,
}

impl Automorphism {
    pub fn new(a: DiscPoint) -> Result<Self> {
        if a.is_boundary() {
            return Err(Error::NotInterior(a.value()));
        }
        Ok(Self { a: a.value() })
    }

    pub fn a(&self) -> C {
        self.a
    }

    #[inline]
    pub fn eval(&self, z: C) -> C {
        moebius(self.a, z)
    }
}

/// Circle arc with exact center and length in turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    center: Turns,
    length: Turns,
}

impl Arc {
    pub fn new(center: Turns, length: Turns) -> Result<Self> {
        let zero = Turns::from_integer(0);
        let one = Turns::from_integer(1);
        if length <= zero || length > one {
            return Err(Error::Precondition(format!("arc length {length} outside (0, 1]")));
        }
        let c = center - center.floor();
        Ok(Self { center: c, length })
    }

    /// Arc from floating-point turns, snapped to the dyadic grid of [`ARC_GRID_BITS`].
    ///
    /// The grid is coarse enough to absorb rounding in `arg` and `|·|`, so
    /// grid-aligned arcs survive a round trip through [`center_of`] exactly.
    pub fn from_f64(center_turns: f64, length: f64) -> Result<Self> {
        Self::new(snap_turns(center_turns.rem_euclid(1.0)), snap_turns(length))
    }

    pub fn full() -> Self {
        Self { center: Turns::from_integer(0), length: Turns::from_integer(1) }
    }

    pub fn center(&self) -> Turns {
        self.center
    }

    pub fn length(&self) -> Turns {
        self.length
    }

    pub fn center_radians(&self) -> f64 {
        2.0 * PI * ratio_f64(self.center)
    }

    /// Normalized length `|I|`.
    pub fn length_f64(&self) -> f64 {
        ratio_f64(self.length)
    }

    /// Half-width in radians.
    pub fn half_width(&self) -> f64 {
        PI * self.length_f64()
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        let d = (theta - self.center_radians() + PI).rem_euclid(2.0 * PI) - PI;
        d.abs() <= self.half_width()
    }
}

/// Resolution of float-to-turn conversion in [`Arc::from_f64`] and [`arc_of`].
pub const ARC_GRID_BITS: u32 = 44;

fn snap_turns(x: f64) -> Turns {
    let scale = (1u128 << ARC_GRID_BITS) as f64;
    Turns::new((x * scale).round() as i128, 1i128 << ARC_GRID_BITS)
}

pub fn ratio_f64(r: Turns) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `I(re^{iθ})`: midpoint `e^{iθ}`, normalized length `1 − r`.
pub fn arc_of(a: &DiscPoint) -> Result<Arc> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let z = a.value();
    if z == C::new(0.0, 0.0) {
        return Ok(Arc::full());
    }
    let turns = z.arg() / (2.0 * PI);
    Arc::from_f64(turns, 1.0 - z.norm())
}

/// The point `a_I` with `I(a_I) = I`.
pub fn center_of(arc: &Arc) -> DiscPoint {
    let r = 1.0 - arc.length_f64();
    DiscPoint { value: C::from_polar(r, arc.center_radians()), on_circle: false }
}

/// Sharp constant `c = inf_ρ τ/ρ²` for which `τ ≥ cρ²` on the disc.
///
/// The minimizer solves `ρ/(1−ρ²) = 2 artanh ρ`.
pub fn tau_rho_sq_constant() -> (f64, f64) {
    let g = |r: f64| r / (1.0 - r * r) - 2.0 * r.atanh();
    let (mut lo, mut hi) = (0.5, 0.99);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    (r.atanh() / (r * r), r)
}

/// Sharp lower constant `c` in `P_a(ζ) ≥ c/|I(a)|` for `ζ ∈ I(a)`.
///
/// The infimum is approached at the arc endpoints as `|a| → 1` and equals
/// `2/(1+π²) ≈ 0.1840`, below the value `¼` one might expect.
pub fn poisson_arc_lower_constant() -> f64 {
    2.0 / (1.0 + PI * PI)
}

/// `|I(a)| · P_a(ζ)` at the endpoint of `I(a)` for `a = r > 0`.
pub fn poisson_arc_endpoint_ratio(r: f64) -> f64 {
    let zeta = C::from_polar(1.0, PI * (1.0 - r));
    (1.0 - r) * poisson(C::new(r, 0.0), zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn ip(re: f64, im: f64) -> DiscPoint {
        DiscPoint::interior(c(re, im)).unwrap()
    }

    #[test]
    fn moebius_examples() {
        let a = ip(0.5, 0.0);
        assert_eq!(moebius_eval(&a, &ip(0.0, 0.0)).unwrap().value(), c(0.5, 0.0));
        assert_eq!(moebius_eval(&a, &a).unwrap().value(), c(0.0, 0.0));
        let w = moebius_eval(&a, &ip(-0.5, 0.0)).unwrap().value();
        assert!((w - c(0.8, 0.0)).norm() < 1e-15);
        let b = moebius_eval(&a, &DiscPoint::from_angle(1.0)).unwrap();
        assert!(b.is_boundary());
        assert!(moebius_eval(&DiscPoint::from_angle(0.0), &a).is_err());
    }

    #[test]
    fn metric_examples() {
        assert!((pseudo_hyperbolic(&ip(0.0, 0.0), &ip(0.7, 0.0)) - 0.7).abs() < 1e-15);
        let e = DiscPoint::from_angle(PI / 3.0);
        assert_eq!(pseudo_hyperbolic(&e, &e), 0.0);
        let one = DiscPoint::boundary(c(1.0, 0.0)).unwrap();
        let i = DiscPoint::boundary(c(0.0, 1.0)).unwrap();
        assert_eq!(pseudo_hyperbolic(&one, &i), 1.0);
        assert!((rho(c(1.0, 0.0), c(0.0, 1.0)) - 1.0).abs() < 1e-15);

        let t = hyperbolic(&ip(0.0, 0.0), &ip(0.5, 0.0));
        assert!((t - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((t - 0.549306).abs() < 1e-6);
        assert_eq!(hyperbolic(&ip(0.3, 0.1), &ip(0.3, 0.1)), 0.0);
        let m1 = DiscPoint::boundary(c(-1.0, 0.0)).unwrap();
        assert_eq!(hyperbolic(&one, &m1), f64::INFINITY);
        assert_eq!(tau(c(1.0, 0.0), c(0.2, 0.0)), f64::INFINITY);
    }

    #[test]
    fn tau_is_accurate_near_the_circle() {
        // 1 − 1e-9 against 0: τ = artanh(1 − 1e-9)
        let r = 1.0 - 1e-9;
        let t = tau(c(0.0, 0.0), c(r, 0.0));
        assert!((t - r.atanh()).abs() < 1e-6, "{t}");
    }

    #[test]
    fn boundary_points_are_renormalized() {
        let p = DiscPoint::boundary(c(1.0 + 5e-13, 0.0)).unwrap();
        assert_eq!(p.value().norm(), 1.0);
        assert!(DiscPoint::boundary(c(1.0 + 1e-9, 0.0)).is_err());
        assert!(DiscPoint::interior(c(1.0, 0.0)).is_err());
        assert!(DiscPoint::classify(c(0.0, 1.0)).unwrap().is_boundary());
        assert!(!DiscPoint::classify(c(0.0, 0.5)).unwrap().is_boundary());
        assert!(DiscPoint::classify(c(0.0, 1.5)).is_err());
    }

    #[test]
    fn poisson_examples() {
        let z0 = ip(0.0, 0.0);
        for k in 0..8 {
            let zeta = DiscPoint::from_angle(k as f64);
            assert!((poisson_kernel(&z0, &zeta).unwrap() - 1.0).abs() < 1e-15);
        }
        let one = DiscPoint::boundary(c(1.0, 0.0)).unwrap();
        assert!((poisson_kernel(&ip(0.5, 0.0), &one).unwrap() - 3.0).abs() < 1e-15);
        assert!(poisson_kernel(&ip(0.5, 0.0), &ip(0.1, 0.0)).is_err());
    }

    #[test]
    fn poisson_on_arc_at_point_nine() {
        // at the center of I(0.9) the kernel is 19; at the endpoints it is
        // about 1.937, so the lower value 2.5 is not reached there
        let a = c(0.9, 0.0);
        assert!((poisson(a, c(1.0, 0.0)) - 19.0).abs() < 1e-12);
        let end = poisson(a, C::from_polar(1.0, 0.1 * PI));
        assert!((end - 1.936_833).abs() < 1e-6, "{end}");
        for j in 0..=100 {
            let t = -0.1 * PI + 0.2 * PI * j as f64 / 100.0;
            let p = poisson(a, C::from_polar(1.0, t));
            assert!(p <= 20.0 && p >= end - 1e-12);
        }
    }

    #[test]
    fn sharp_poisson_arc_constant() {
        let c0 = poisson_arc_lower_constant();
        assert!((c0 - 0.183_999_3).abs() < 1e-6);
        // the endpoint ratio decreases toward the constant
        let mut prev = f64::INFINITY;
        for k in 1..=16 {
            let r = 1.0 - 2f64.powi(-k);
            let v = poisson_arc_endpoint_ratio(r);
            assert!(v < prev && v > c0, "k={k} v={v}");
            prev = v;
        }
        // the ¼ bound first fails at |a| ≈ 0.6265
        assert!(poisson_arc_endpoint_ratio(0.626) > 0.25);
        assert!(poisson_arc_endpoint_ratio(0.627) < 0.25);
        assert!(prev - c0 < 2e-6);
    }

    #[test]
    fn sharp_tau_constant_matches_dense_grid() {
        let (cst, at) = tau_rho_sq_constant();
        let mut best = f64::INFINITY;
        for j in 1..100_000 {
            let r = j as f64 / 100_000.0;
            best = best.min(r.atanh() / (r * r));
        }
        assert!((cst - best).abs() < 1e-8, "{cst} {best}");
        assert!((cst - 1.7165).abs() < 1e-3);
        assert!((at - 0.797).abs() < 2e-3);
    }

    #[test]
    fn arcs() {
        let full = arc_of(&ip(0.0, 0.0)).unwrap();
        assert_eq!(full.length(), Turns::from_integer(1));
        let half = arc_of(&ip(0.5, 0.0)).unwrap();
        assert_eq!(half.center(), Turns::from_integer(0));
        assert_eq!(half.length(), Turns::new(1, 2));
        assert!(half.contains_angle(0.4 * PI));
        assert!(!half.contains_angle(0.6 * PI));
        assert!(Arc::new(Turns::new(1, 3), Turns::from_integer(0)).is_err());
        assert_eq!(Arc::new(Turns::new(5, 4), Turns::new(1, 8)).unwrap().center(), Turns::new(1, 4));
    }

    #[test]
    fn trapezoid_poisson_normalization() {
        let n = 4096;
        for &r in &[0.0, 0.5, 0.9, 0.99] {
            for &phase in &[0.0, 0.3, 2.0] {
                let a = C::from_polar(r, phase);
                let s: f64 = (0..n).map(|j| poisson(a, C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))).sum();
                assert!((s / n as f64 - 1.0).abs() < 1e-10, "r={r}");
            }
        }
    }

    fn interior() -> impl Strategy<Value = C> {
        (0.0..0.999f64, 0.0..(2.0 * PI)).prop_map(|(r, t)| C::from_polar(r, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn involution(a in interior(), z in interior()) {
            prop_assert!((moebius(a, moebius(a, z)) - z).norm() < 1e-12);
        }

        #[test]
        fn exchange(a in interior()) {
            let s = Automorphism::new(DiscPoint::interior(a).unwrap()).unwrap();
            prop_assert!((s.eval(C::new(0.0, 0.0)) - a).norm() < 1e-15);
            prop_assert!(s.eval(a).norm() < 1e-15);
        }

        #[test]
        fn metric_axioms(z in interior(), w in interior(), u in interior()) {
            prop_assert_eq!(rho(z, w), rho(w, z));
            prop_assert!(rho(z, w) <= rho(z, u) + rho(u, w) + 1e-12);
        }

        #[test]
        fn moebius_invariance(a in interior(), z in interior(), w in interior()) {
            prop_assert!((rho(moebius(a, z), moebius(a, w)) - rho(z, w)).abs() < 1e-12);
        }

        #[test]
        fn arc_round_trip(k in 0i128..(1 << 20), m in 1i128..(1 << 20)) {
            let arc = Arc::new(Turns::new(k, 1 << 20), Turns::new(m, 1 << 21)).unwrap();
            let back = arc_of(&center_of(&arc)).unwrap();
            prop_assert_eq!(back, arc);
        }

        #[test]
        fn sandwich_upper_and_sharp_lower(r in 0.0..0.999f64, t0 in 0.0..(2.0 * PI), s in -1.0..1.0f64) {
            let a = C::from_polar(r, t0);
            let len = 1.0 - r;
            let zeta = C::from_polar(1.0, t0 + s * PI * len);
            let p = poisson(a, zeta);
            prop_assert!(p <= 2.0 / len * (1.0 + 1e-12));
            prop_assert!(p >= poisson_arc_lower_constant() / len);
        }
    }
}
