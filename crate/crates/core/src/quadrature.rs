//! Quadrature on the circle: adaptive periodic trapezoid, Gauss–Legendre
//! rules for arcs, and FFT coefficient extraction.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C;
use rustfft::FftPlanner;

pub const DEFAULT_N: usize = 4096;
pub const MAX_N: usize = 1 << 20;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl FromIterator<f64> for Sum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Sum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().collect::<Sum>().value()
}

/// `e^{2πij/n}` for `j = 0..n`.
pub fn roots_of_unity(n: usize) -> Vec<C> {
    (0..n).map(|j| root(j, n)).collect()
}

#[inline]
pub fn root(j: usize, n: usize) -> C {
    C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)
}

/// Smallest power of two that is at least `x`, clamped to `[lo, hi]`.
pub fn pow2_at_least(x: f64, lo: usize, hi: usize) -> usize {
    let mut n = lo.max(1);
    while (n as f64) < x && n < hi {
        n *= 2;
    }
    n.min(hi)
}

/// Starting grid for integrands concentrated on an arc of width `~1 − |a|`.
pub fn start_n_for(a_norm: f64) -> usize {
    pow2_at_least(8.0 / (1.0 - a_norm).max(1e-300), DEFAULT_N, MAX_N)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub n: usize,
    /// `|m_N − m_{N/2}|` at termination.
    pub change: f64,
    pub converged: bool,
}

/// Mean of a periodic integrand over the circle by the trapezoid rule,
/// doubling `N` from `n0` until successive estimates differ by at most
/// `tol` or `n_max` is reached. The integrand receives `(j, N)` and should
/// evaluate at `e^{2πij/N}`; previously computed nodes are reused.
pub fn periodic_mean<F>(f: F, n0: usize, n_max: usize, tol: f64) -> Adaptive
where
    F: Fn(usize, usize) -> f64,
{
    let mut n = n0.max(2);
    let mut sum: Sum = (0..n).map(|j| f(j, n)).collect();
    let mut mean = sum.value() / n as f64;
    loop {
        if n >= n_max {
            return Adaptive { value: mean, n, change: f64::INFINITY, converged: false };
        }
        let n2 = 2 * n;
        for j in (1..n2).step_by(2) {
            sum.add(f(j, n2));
        }
        let next = sum.value() / n2 as f64;
        let change = (next - mean).abs();
        mean = next;
        n = n2;
        if change <= tol {
            return Adaptive { value: mean, n, change, converged: true };
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Nodes and weights.
pub type Rule = (Vec<f64>, Vec<f64>);

/// Cached Gauss–Legendre rule with weights normalized to sum to one and
/// nodes mapped to `[-1, 1]`.
pub fn gl_rule(n: usize) -> Arc<Rule> {
    type Cache = Mutex<Vec<(usize, Arc<Rule>)>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, r)) = guard.iter().find(|(m, _)| *m == n) {
        return r.clone();
    }
    let (x, w) = gauss_legendre(n);
    let w = w.into_iter().map(|v| v / 2.0).collect();
    let r = Arc::new((x, w));
    guard.push((n, r.clone()));
    r
}

/// Fourier coefficients `ĝ_k = N⁻¹ Σ_j g_j e^{−2πijk/N}` in FFT order.
pub fn fourier_coefficients(samples: &[C]) -> Vec<C> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    let fft = planner().lock().unwrap_or_else(|e| e.into_inner()).plan_fft_forward(n);
    fft.process(&mut buf);
    let s = 1.0 / n as f64;
    for v in &mut buf {
        *v *= s;
    }
    buf
}

/// In-place inverse DFT without normalization.
pub fn inverse_dft(buf: &mut [C]) {
    let fft = planner().lock().unwrap_or_else(|e| e.into_inner()).plan_fft_inverse(buf.len());
    fft.process(buf);
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static P: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    P.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Signed frequency of FFT bin `k` for length `n`.
#[inline]
pub fn frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(xs), 2e-16);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for &n in &[5usize, 16, 64, 65] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n - 1).min(40) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
        let r = gl_rule(64);
        assert!((r.1.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_spectral_for_poisson() {
        let a = C::new(0.9, 0.2);
        let res = periodic_mean(|j, n| crate::disc::poisson(a, root(j, n)), 64, 1 << 16, 1e-14);
        assert!(res.converged);
        assert!((res.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let res = periodic_mean(|j, n| if j * 7 % n == 0 { 1.0 } else { 0.0 }, 8, 64, 0.0);
        assert!(!res.converged);
        assert_eq!(res.n, 64);
    }

    #[test]
    fn fft_coefficients_of_a_trigonometric_polynomial() {
        let n = 16;
        let s: Vec<C> = roots_of_unity(n).iter().map(|z| 2.0 * z * z + C::new(0.0, 1.0) / z).collect();
        let c = fourier_coefficients(&s);
        assert!((c[2] - C::new(2.0, 0.0)).norm() < 1e-14);
        assert!((c[n - 1] - C::new(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(frequency(n - 1, n), -1);
        assert_eq!(frequency(3, n), 3);
    }

    #[test]
    fn start_grid_scales_with_distance_to_the_circle() {
        assert_eq!(start_n_for(0.0), DEFAULT_N);
        assert_eq!(start_n_for(1.0 - 2f64.powi(-12)), 1 << 15);
        assert_eq!(start_n_for(1.0 - 1e-12), MAX_N);
    }
}
