//! H² norms and the Garsia-type oscillation `γ(f, a) = ‖f∘σ_a − f(a)‖_{H²}`.
//!
//! Single evaluations use two independent trapezoid routes (samples of
//! `f∘σ_a`, and the Poisson-weighted integral of `|f − f(a)|²`). Grid
//! sweeps use the Poisson extension of `|f|²` computed from one FFT:
//! `γ(f, a)² = P[|f|²](a) − |f(a)|²`.

use serde::{Deserialize, Serialize};

use crate::disc::{moebius, poisson, DiscPoint, C};
use crate::error::{Error, Result};
use crate::nevanlinna::RationalForm;
use crate::quadrature::{
    fourier_coefficients, frequency, inverse_dft, periodic_mean, root, start_n_for, Adaptive, Sum, DEFAULT_N, MAX_N,
};
use crate::symbol::{check_grid_size, taylor, BoundaryGrid, Symbol};

/// Agreement required between the two quadrature routes.
pub const ROUTE_TOL: f64 = 1e-8;
/// Stopping tolerance for successive trapezoid estimates of squared norms.
pub const STEP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub n0: usize,
    pub n_max: usize,
    pub step_tol: f64,
    pub route_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { n0: DEFAULT_N, n_max: MAX_N, step_tol: STEP_TOL, route_tol: ROUTE_TOL }
    }
}

impl QuadConfig {
    fn start(&self, a_norm: f64) -> usize {
        self.n0.max(start_n_for(a_norm)).min(self.n_max)
    }

    /// Step tolerance at `a`: Poisson weights up to `(1+|a|)/(1−|a|)` lift the
    /// rounding floor of the trapezoid sums above `step_tol` near the circle.
    pub fn tol_at(&self, a_norm: f64) -> f64 {
        self.step_tol.max(8.0 * f64::EPSILON * (1.0 + a_norm) / (1.0 - a_norm))
    }
}

/// `‖f‖_{H²}` from boundary samples.
pub fn h2_norm_grid(g: &BoundaryGrid) -> f64 {
    h2_norm_samples(g.values()).expect("grid size checked on construction")
}

pub fn h2_norm_samples(values: &[C]) -> Result<f64> {
    check_grid_size(values.len())?;
    let s: Sum = values.iter().map(|v| v.norm_sqr()).collect();
    Ok((s.value() / values.len() as f64).sqrt())
}

/// `‖f‖_{H²}` by the adaptive grid route, cross-checked against the
/// coefficient route.
pub fn h2_norm(f: &Symbol) -> Result<f64> {
    let cfg = QuadConfig::default();
    let grid = periodic_mean(|j, n| f.value_at(root(j, n)).norm_sqr(), cfg.n0, cfg.n_max, cfg.step_tol);
    if !grid.converged {
        return Err(Error::RouteMismatch { first: grid.value, second: f64::NAN, n: grid.n });
    }
    let coeff = h2_norm_coefficients(f, grid.n / 4)?;
    let g = grid.value.sqrt();
    if (g - coeff).abs() > 1e-10 {
        return Err(Error::RouteMismatch { first: g, second: coeff, n: grid.n });
    }
    Ok(g)
}

/// `(Σ |c_k|²)^{1/2}` over the first `m` Taylor coefficients.
pub fn h2_norm_coefficients(f: &Symbol, m: usize) -> Result<f64> {
    let c = taylor(f, m.max(1) - 1)?;
    Ok(c.iter().map(|v| v.norm_sqr()).collect::<Sum>().value().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEval {
    pub gamma: f64,
    /// `‖f∘σ_a − f(a)‖²` from samples of `f∘σ_a`.
    pub direct_sq: f64,
    /// `∫|f − f(a)|² P_a`.
    pub poisson_sq: f64,
    pub n: usize,
}

pub fn gamma_sq_direct(f: &Symbol, a: C, cfg: &QuadConfig) -> Adaptive {
    let fa = f.value_at(a);
    periodic_mean(
        |j, n| (f.value_at(moebius(a, root(j, n))) - fa).norm_sqr(),
        cfg.start(a.norm()),
        cfg.n_max,
        cfg.tol_at(a.norm()),
    )
}

pub fn gamma_sq_poisson(f: &Symbol, a: C, cfg: &QuadConfig) -> Adaptive {
    let fa = f.value_at(a);
    periodic_mean(
        |j, n| {
            let z = root(j, n);
            (f.value_at(z) - fa).norm_sqr() * poisson(a, z)
        },
        cfg.start(a.norm()),
        cfg.n_max,
        cfg.tol_at(a.norm()),
    )
}

/// Whether two estimates of a squared oscillation agree: within
/// `tol` after the square root, or within `1e-14` before it (the square
/// root amplifies rounding when `γ` is tiny).
pub fn routes_agree(sq1: f64, sq2: f64, tol: f64) -> bool {
    (sq1.max(0.0).sqrt() - sq2.max(0.0).sqrt()).abs() <= tol || (sq1 - sq2).abs() <= 1e-14
}

/// `γ(f, a)` computed two ways; disagreement is an error carrying both values.
pub fn garsia_gamma(f: &Symbol, a: &DiscPoint, cfg: &QuadConfig) -> Result<GammaEval> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let av = a.value();
    let d = gamma_sq_direct(f, av, cfg);
    let p = gamma_sq_poisson(f, av, cfg);
    let n = d.n.max(p.n);
    if !d.converged || !p.converged || !routes_agree(d.value, p.value, cfg.route_tol) {
        return Err(Error::RouteMismatch { first: d.value.max(0.0).sqrt(), second: p.value.max(0.0).sqrt(), n });
    }
    Ok(GammaEval { gamma: p.value.max(0.0).sqrt(), direct_sq: d.value, poisson_sq: p.value, n })
}

/// Lower-bound estimate of `|f|_* = sup_a γ(f, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub value: f64,
    pub argmax: C,
    pub grid_size: usize,
    /// Always true: a finite grid only bounds the supremum from below.
    pub lower_bound: bool,
    /// Boundary grid size used by the spectral route (0 when unused).
    pub n: usize,
}

/// `max` of [`garsia_gamma`] over an explicit grid.
pub fn bmoa_seminorm(f: &Symbol, grid: &[DiscPoint], cfg: &QuadConfig) -> Result<SeminormEstimate> {
    if grid.is_empty() {
        return Err(Error::EmptySweep("seminorm grid"));
    }
    let mut best =
        SeminormEstimate { value: 0.0, argmax: grid[0].value(), grid_size: grid.len(), lower_bound: true, n: 0 };
    for a in grid {
        let g = garsia_gamma(f, a, cfg)?;
        if g.gamma > best.value {
            best.value = g.gamma;
            best.argmax = a.value();
        }
        best.n = best.n.max(g.n);
    }
    Ok(best)
}

/// Radii `1 − 2^{-k}`, `k = 1..=depth`.
pub fn dyadic_radii(depth: usize) -> Vec<f64> {
    (1..=depth).map(|k| 1.0 - 2f64.powi(-(k as i32))).collect()
}

/// Standard `a`-grid: [`dyadic_radii`] times equispaced angles.
pub fn standard_grid(depth: usize, angles: usize) -> Vec<C> {
    dyadic_radii(depth).into_iter().flat_map(|r| (0..angles).map(move |j| r * root(j, angles))).collect()
}

/// Poisson extension of `|f|²` from its Fourier coefficients, evaluated on
/// polar grids in `O(N)` per radius.
pub struct SquaredModulusExtension {
    coeffs: Vec<C>,
    n: usize,
    pub resolved: bool,
}

impl SquaredModulusExtension {
    /// Doubles the boundary grid from `n0` until the upper half of the
    /// spectrum of `|f|²` is at rounding level (or `n_max` is reached).
    pub fn new(f: &Symbol, n0: usize, n_max: usize) -> Self {
        let mut n = n0;
        loop {
            let samples: Vec<C> = (0..n).map(|j| C::new(f.value_at(root(j, n)).norm_sqr(), 0.0)).collect();
            let coeffs = fourier_coefficients(&samples);
            let scale = coeffs[0].norm().max(1e-300);
            let tail = coeffs
                .iter()
                .enumerate()
                .filter(|(k, _)| frequency(*k, n).unsigned_abs() as usize >= n / 4)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            let resolved = tail <= 1e-15 * scale.max(1.0);
            if resolved || n >= n_max {
                return Self { coeffs, n, resolved };
            }
            n *= 2;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `P[|f|²](r e^{2πij/m})` for `j = 0..m`.
    pub fn on_circle(&self, r: f64, m: usize) -> Vec<f64> {
        let mut buckets = vec![C::default(); m];
        let half = self.n / 2;
        let mut rk = 1.0;
        for k in 0..=half {
            if k > 0 {
                rk *= r;
            }
            if rk == 0.0 {
                break;
            }
            buckets[k % m] += self.coeffs[k] * rk;
            if k > 0 && k < half {
                let neg = self.n - k;
                buckets[(m - k % m) % m] += self.coeffs[neg] * rk;
            }
        }
        inverse_dft(&mut buckets);
        buckets.into_iter().map(|v| v.re).collect()
    }

    /// `P[|f|²](z)` at a single interior point.
    pub fn at(&self, z: C) -> f64 {
        let half = self.n / 2;
        let mut s = self.coeffs[0];
        let mut zk = C::new(1.0, 0.0);
        for k in 1..half {
            zk *= z;
            if zk.norm_sqr() == 0.0 {
                break;
            }
            s += self.coeffs[k] * zk + self.coeffs[self.n - k] * zk.conj();
        }
        s.re
    }
}

/// Seminorm lower bound over the polar grid `radii × angles` and the
/// `points` by the spectral route, plus dual-route evaluations at `witnesses`.
pub fn bmoa_seminorm_spectral(
    f: &Symbol,
    radii: &[f64],
    angles: usize,
    points: &[C],
    witnesses: &[C],
    cfg: &QuadConfig,
) -> Result<SeminormEstimate> {
    if radii.is_empty() && points.is_empty() && witnesses.is_empty() {
        return Err(Error::EmptySweep("seminorm grid"));
    }
    let ext = SquaredModulusExtension::new(f, cfg.n0.min(DEFAULT_N), cfg.n_max);
    let mut best = SeminormEstimate {
        value: 0.0,
        argmax: C::default(),
        grid_size: radii.len() * angles + points.len() + witnesses.len(),
        lower_bound: true,
        n: ext.n(),
    };
    for &r in radii {
        for (j, p) in ext.on_circle(r, angles).into_iter().enumerate() {
            let a = r * root(j, angles);
            let g = (p - f.value_at(a).norm_sqr()).max(0.0).sqrt();
            if g > best.value {
                best.value = g;
                best.argmax = a;
            }
        }
    }
    for &a in points {
        let a = DiscPoint::interior(a)?.value();
        let g = (ext.at(a) - f.value_at(a).norm_sqr()).max(0.0).sqrt();
        if g > best.value {
            best.value = g;
            best.argmax = a;
        }
    }
    for &a in witnesses {
        let g = garsia_gamma(f, &DiscPoint::interior(a)?, cfg)?.gamma;
        if g > best.value {
            best.value = g;
            best.argmax = a;
        }
    }
    Ok(best)
}

/// Per-radius angular maxima of `γ(f, ·)`.
pub fn vmoa_profile(f: &Symbol, radii: &[f64], angular_count: usize) -> Vec<(f64, f64)> {
    let ext = SquaredModulusExtension::new(f, DEFAULT_N, MAX_N);
    radii
        .iter()
        .map(|&r| {
            let m = ext
                .on_circle(r, angular_count)
                .into_iter()
                .enumerate()
                .map(|(j, p)| (p - f.value_at(r * root(j, angular_count)).norm_sqr()).max(0.0).sqrt())
                .fold(0.0, f64::max);
            (r, m)
        })
        .collect()
}

/// The three routes to `‖σ_{φ(a)}∘φ∘σ_a‖²_{H²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeNormRoutes {
    /// Mean of `|ψ|²` over boundary samples of the composite `ψ`.
    pub direct: f64,
    /// `∫ ρ(φ(ζ), φ(a))² P_a(ζ)`.
    pub poisson: f64,
    /// `Σ |c_k|²` over the Taylor coefficients of the composite.
    pub taylor: f64,
    pub n_direct: usize,
    pub n_poisson: usize,
    pub taylor_terms: usize,
}

pub fn composite_norm_routes(phi: &Symbol, a: C, cfg: &QuadConfig) -> Result<CompositeNormRoutes> {
    let psi = crate::nevanlinna::l_composite(phi, a);
    let direct =
        periodic_mean(|j, n| psi.value_at(root(j, n)).norm_sqr(), cfg.start(a.norm()), cfg.n_max, cfg.tol_at(a.norm()));
    let poisson = rho_poisson_mean(phi, a, cfg);
    let rational = crate::nevanlinna::to_rational(&psi)?;
    let (taylor, terms) = series_norm_sq(&rational, 1 << 24)?;
    if !direct.converged || !poisson.converged {
        return Err(Error::RouteMismatch { first: direct.value, second: poisson.value, n: direct.n.max(poisson.n) });
    }
    Ok(CompositeNormRoutes {
        direct: direct.value,
        poisson: poisson.value,
        taylor,
        n_direct: direct.n,
        n_poisson: poisson.n,
        taylor_terms: terms,
    })
}

/// `∫ ρ(φ(ζ), φ(a))² P_a(ζ) |dζ|`.
pub fn rho_poisson_mean(phi: &Symbol, a: C, cfg: &QuadConfig) -> Adaptive {
    let b = phi.value_at(a);
    periodic_mean(
        |j, n| {
            let z = root(j, n);
            crate::disc::rho_sq(phi.value_at(z), b) * poisson(a, z)
        },
        cfg.start(a.norm()),
        cfg.n_max,
        cfg.tol_at(a.norm()),
    )
}

/// `Σ |c_k|²` for a rational function, stopping once a window of 1024
/// terms contributes below `1e-17` relative.
pub fn series_norm_sq(r: &RationalForm, cap: usize) -> Result<(f64, usize)> {
    let (p, q) = (r.numerator(), r.denominator());
    let d = q.len();
    // the recurrence q·c = p only looks back deg(q) terms
    let mut recent: std::collections::VecDeque<C> = std::collections::VecDeque::with_capacity(d);
    let mut total = Sum::default();
    let mut window = 0.0;
    for k in 0..cap {
        let mut s = p.get(k).copied().unwrap_or_default();
        for j in 1..d.min(k + 1) {
            s -= q[j] * recent[recent.len() - j];
        }
        let c = s / q[0];
        if d > 1 {
            if recent.len() == d - 1 {
                recent.pop_front();
            }
            recent.push_back(c);
        }
        total.add(c.norm_sqr());
        window += c.norm_sqr();
        if (k + 1) % 1024 == 0 {
            if k + 1 > p.len() && window <= 1e-17 * total.value().max(1e-300) {
                return Ok((total.value(), k + 1));
            }
            window = 0.0;
        }
    }
    Err(Error::RouteMismatch { first: total.value(), second: f64::NAN, n: cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::compose;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn ip(z: C) -> DiscPoint {
        DiscPoint::interior(z).unwrap()
    }

    fn sigma_minus_b(b: C) -> Symbol {
        Symbol::sum(vec![(c(1.0, 0.0), Symbol::moebius(b)), (-b, Symbol::constant(c(1.0, 0.0)))])
    }

    #[test]
    fn h2_norm_examples() {
        for k in 0..6 {
            assert!((h2_norm(&Symbol::monomial(k)).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((h2_norm(&Symbol::poly_real(&[1.0, 1.0])).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        for a in [c(0.0, 0.0), c(0.5, 0.2), c(-0.9, 0.3)] {
            let m = Symbol::moebius(a);
            assert!((h2_norm(&m).unwrap() - 1.0).abs() < 1e-12);
            assert!((h2_norm_coefficients(&m, 4096).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(matches!(h2_norm_samples(&[c(1.0, 0.0); 32]), Err(Error::BadGrid(32, _))));
    }

    #[test]
    fn garsia_examples() {
        let cfg = QuadConfig::default();
        let k = Symbol::constant(c(0.4, -0.2));
        assert_eq!(garsia_gamma(&k, &ip(c(0.7, 0.1)), &cfg).unwrap().gamma, 0.0);

        let g = garsia_gamma(&Symbol::identity(), &ip(c(0.6, 0.0)), &cfg).unwrap();
        assert!((g.gamma - 0.8).abs() < 1e-12, "{}", g.gamma);

        let f = sigma_minus_b(c(0.5, 0.0));
        let g = garsia_gamma(&f, &ip(c(0.0, 0.0)), &cfg).unwrap();
        assert!((g.gamma - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((g.gamma - 0.866025).abs() < 1e-6);
        assert!(garsia_gamma(&f, &DiscPoint::from_angle(0.0), &cfg).is_err());
    }

    #[test]
    fn route_mismatch_is_reported_when_the_grid_is_too_coarse() {
        let cfg = QuadConfig { n0: 64, n_max: 128, ..QuadConfig::default() };
        let f = sigma_minus_b(c(0.5, 0.0));
        match garsia_gamma(&f, &ip(c(0.0, 0.99)), &cfg) {
            Err(Error::RouteMismatch { n, .. }) => assert_eq!(n, 128),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seminorm_examples() {
        let cfg = QuadConfig::default();
        let grid: Vec<DiscPoint> = standard_grid(4, 8).into_iter().map(ip).collect();
        let k = Symbol::constant(c(0.3, 0.0));
        assert_eq!(bmoa_seminorm(&k, &grid, &cfg).unwrap().value, 0.0);

        let b = c(0.75, 0.0);
        let s = bmoa_seminorm(&sigma_minus_b(b), &grid, &cfg).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12 && s.argmax == b && s.lower_bound);

        let s = bmoa_seminorm(&Symbol::identity(), &grid, &cfg).unwrap();
        assert!((s.value - (1.0 - 0.25f64).sqrt()).abs() < 1e-12);
        assert!(bmoa_seminorm(&k, &[], &cfg).is_err());
    }

    #[test]
    fn vmoa_profile_examples() {
        let radii = dyadic_radii(10);
        assert!(vmoa_profile(&Symbol::constant(c(0.2, 0.2)), &radii, 64).iter().all(|&(_, v)| v == 0.0));
        for (r, v) in vmoa_profile(&Symbol::identity(), &radii, 64) {
            assert!((v - (1.0 - r * r).sqrt()).abs() < 1e-7, "r={r} v={v}");
        }
        let b = c(0.5, 0.0);
        let prof = vmoa_profile(&sigma_minus_b(b), &radii, 64);
        let mut prev = f64::INFINITY;
        for (r, v) in prof {
            let oracle = (0..64).map(|j| (1.0 - moebius(b, r * root(j, 64)).norm_sqr()).sqrt()).fold(0.0, f64::max);
            assert!((v - oracle).abs() < 1e-7, "r={r} {v} {oracle}");
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn spectral_and_dual_routes_agree() {
        let cfg = QuadConfig::default();
        let f = compose(&Symbol::moebius(c(0.7, 0.0)), &Symbol::scale(0.9, Symbol::identity()));
        let ext = SquaredModulusExtension::new(&f, 4096, MAX_N);
        assert!(ext.resolved);
        for &r in &[0.5, 0.9, 0.99] {
            let vals = ext.on_circle(r, 16);
            for (j, p) in vals.into_iter().enumerate() {
                let a = r * root(j, 16);
                let spectral = (p - f.value_at(a).norm_sqr()).max(0.0);
                let dual = garsia_gamma(&f, &ip(a), &cfg).unwrap();
                assert!((spectral - dual.poisson_sq).abs() < 1e-12, "r={r} j={j}");
            }
        }
        for a in [c(0.3, -0.2), c(-0.95, 0.1)] {
            let dual = garsia_gamma(&f, &ip(a), &cfg).unwrap();
            assert!((ext.at(a) - f.value_at(a).norm_sqr() - dual.poisson_sq).abs() < 1e-12);
        }
        let est = bmoa_seminorm_spectral(&f, &[0.5, 0.75], 8, &[c(0.3, -0.2)], &[c(0.1, 0.1)], &cfg).unwrap();
        assert_eq!(est.grid_size, 18);
    }

    #[test]
    fn composite_identity_three_routes() {
        let cfg = QuadConfig::default();
        let phis = [
            Symbol::poly_real(&[0.5, 0.5]),
            compose(&Symbol::moebius(c(0.7, 0.0)), &Symbol::scale(0.9, Symbol::identity())),
            Symbol::monomial(2),
        ];
        for phi in &phis {
            for a in [c(0.3, 0.4), c(0.99, 0.0), c(-0.6, -0.7)] {
                let r = composite_norm_routes(phi, a, &cfg).unwrap();
                assert!((r.direct - r.poisson).abs() < 1e-10, "{r:?}");
                assert!((r.direct - r.taylor).abs() < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn oscillation_bound_grows_with_the_radius() {
        // γ(f,a) ≤ c_a ‖f‖ with c_a = ((1+|a|)/(1−|a|))^{1/2}; the worst
        // ratio over monomials and the normalized kernel at a increases
        // along a radial grid
        let kernel = |s: C| {
            let n = (1.0 - s.norm_sqr()).sqrt();
            Symbol::sum(vec![(c(1.0 / n, 0.0), Symbol::constant(c(1.0, 0.0))), (-s.conj() / n, Symbol::moebius(s))])
        };
        let cfg = QuadConfig::default();
        let mut prev = 0.0;
        for k in 1..=8 {
            let a = c(-(1.0 - 2f64.powi(-k)), 0.0);
            let mut family: Vec<Symbol> = (1..=8).map(Symbol::monomial).collect();
            family.push(kernel(a));
            let worst = family
                .iter()
                .map(|f| garsia_gamma(f, &ip(a), &cfg).unwrap().gamma / h2_norm(f).unwrap())
                .fold(0.0, f64::max);
            let r = a.norm();
            assert!(worst <= ((1.0 + r) / (1.0 - r)).sqrt() + 1e-12);
            assert!(worst > prev, "k={k}");
            // closed form for the kernel: |a|/(1 − |a|²)^{1/2}
            assert!((worst - r / (1.0 - r * r).sqrt()).abs() < 1e-9 || worst > r / (1.0 - r * r).sqrt());
            prev = worst;
        }
    }

    fn poly() -> impl Strategy<Value = Vec<C>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), 1..6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gamma_is_a_seminorm(p in poly(), q in poly(), lam in -3.0..3.0f64, r in 0.0..0.95f64, t in 0.0..(2.0 * PI)) {
            let cfg = QuadConfig::default();
            let a = ip(C::from_polar(r, t));
            let (fp, fq) = (Symbol::poly(p.clone()), Symbol::poly(q.clone()));
            let gp = garsia_gamma(&fp, &a, &cfg).unwrap().gamma;
            let gq = garsia_gamma(&fq, &a, &cfg).unwrap().gamma;
            let scaled = Symbol::poly(p.iter().map(|v| v * lam).collect());
            let gs = garsia_gamma(&scaled, &a, &cfg).unwrap().gamma;
            prop_assert!((gs - lam.abs() * gp).abs() < 1e-10);
            let sum = Symbol::poly(crate::symbol::poly_add(&p, &q));
            let g_sum = garsia_gamma(&sum, &a, &cfg).unwrap().gamma;
            prop_assert!(g_sum <= gp + gq + 1e-10);
        }
    }
}
