//! Compactness statistics and their boundary-approach profiles.
//!
//! Level-set kinds (`L`, `S1`, `A-double`, `A-prime`) take the supremum of a
//! statistic over grid points (or arcs) whose image modulus reaches
//! `s_k = 1 − 2^{-k}`. `VMOA-iii` and `W2` follow `|a| = 1 − 2^{-j}`; the
//! arc kinds `A-vmoa`, `A-hyp-double[p]`, `A-hyp-center` follow `|I| = 2^{-j}`
//! and report `1 − |I|` as the approach value. `W1` follows the powers
//! `n = 1, 2, 4, …` and `S2[R]` follows `t_k = 1 − 2^{-k}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{moebius, rho_sq, tau, Arc, DiscPoint, C, DEFAULT_TAU_CAP};
use crate::error::{Error, Result};
use crate::hardy::{bmoa_seminorm_spectral, dyadic_radii, garsia_gamma, rho_poisson_mean, QuadConfig};
use crate::nevanlinna::{s1_statistic, WGrid};
use crate::quadrature::{gl_rule, root};
use crate::symbol::{compose, power, SelfMap, Symbol};

pub const EPSILON: f64 = 0.15;
pub const DELTA: f64 = 0.1;
pub const TAIL: usize = 4;
/// Slack for the nonincreasing-tail test.
pub const MONOTONE_TOL: f64 = 1e-12;
pub const MIN_ARC_SAMPLES: usize = 64;
pub const CLIP_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Power {
    Half,
    One,
    Two,
}

impl Power {
    pub const ALL: [Power; 3] = [Power::Half, Power::One, Power::Two];

    pub fn value(self) -> f64 {
        match self {
            Power::Half => 0.5,
            Power::One => 1.0,
            Power::Two => 2.0,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum S2Radius {
    Quarter,
    Half,
    ThreeQuarters,
}

impl S2Radius {
    pub const ALL: [S2Radius; 3] = [S2Radius::Quarter, S2Radius::Half, S2Radius::ThreeQuarters];

    pub fn value(self) -> f64 {
        match self {
            S2Radius::Quarter => 0.25,
            S2Radius::Half => 0.5,
            S2Radius::ThreeQuarters => 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Kind {
    L,
    S1,
    VmoaIii,
    ADouble,
    APrime,
    AVmoa,
    AHypDouble(Power),
    AHypCenter,
    W1,
    W2,
    S2(S2Radius),
}

impl Kind {
    pub fn all() -> Vec<Kind> {
        let mut v = vec![Kind::L, Kind::S1, Kind::VmoaIii, Kind::ADouble, Kind::APrime, Kind::AVmoa];
        v.extend(Power::ALL.map(Kind::AHypDouble));
        v.extend([Kind::AHypCenter, Kind::W1, Kind::W2]);
        v.extend(S2Radius::ALL.map(Kind::S2));
        v
    }

    /// Kinds whose vanishing is equivalent to compactness.
    pub fn in_equivalence_class(self) -> bool {
        !matches!(self, Kind::S2(_))
    }

    /// Values of these kinds are squared pseudo-hyperbolic averages or norms in `[0, 1]`.
    pub fn unit_bounded(self) -> bool {
        matches!(self, Kind::L | Kind::VmoaIii | Kind::ADouble | Kind::APrime | Kind::AVmoa | Kind::S2(_))
    }

    fn uses_tau(self) -> bool {
        matches!(self, Kind::AHypDouble(_) | Kind::AHypCenter)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::L => write!(f, "L"),
            Kind::S1 => write!(f, "S1"),
            Kind::VmoaIii => write!(f, "VMOA-iii"),
            Kind::ADouble => write!(f, "A-double"),
            Kind::APrime => write!(f, "A-prime"),
            Kind::AVmoa => write!(f, "A-vmoa"),
            Kind::AHypDouble(p) => write!(f, "A-hyp-double[p={}]", p.value()),
            Kind::AHypCenter => write!(f, "A-hyp-center"),
            Kind::W1 => write!(f, "W1"),
            Kind::W2 => write!(f, "W2"),
            Kind::S2(r) => write!(f, "S2[R={}]", r.value()),
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "A-hyp-double" {
            return Ok(Kind::AHypDouble(Power::One));
        }
        Kind::all()
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown criterion kind {s:?}")))
    }
}

impl TryFrom<String> for Kind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Kind> for String {
    fn from(k: Kind) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    /// Ladder depth `K`.
    pub depth: usize,
    /// Extra grid radii beyond `K` so the deepest level sets are populated.
    pub overshoot: usize,
    pub angles: usize,
    /// Angles per `|a|` level for `W2`.
    pub w2_angles: usize,
    pub w1_powers: Vec<usize>,
    /// Boundary samples for `S2` counting.
    pub s2_samples: usize,
    pub arc_nodes: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub tail: usize,
    pub tau_cap: f64,
    pub quad: QuadConfig,
    pub s1_grid: WGrid,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            depth: 12,
            overshoot: 2,
            angles: 64,
            w2_angles: 16,
            w1_powers: (0..8).map(|k| 1 << k).collect(),
            s2_samples: 4096,
            arc_nodes: 64,
            epsilon: EPSILON,
            delta: DELTA,
            tail: TAIL,
            tau_cap: DEFAULT_TAU_CAP,
            quad: QuadConfig::default(),
            s1_grid: WGrid::default(),
        }
    }
}

impl SweepParams {
    pub fn with_depth(depth: usize) -> Self {
        Self { depth, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(1..=16).contains(&self.depth) {
            return bad("depth must lie in 1..=16");
        }
        if self.overshoot > 4 {
            return bad("overshoot must be at most 4");
        }
        if !(1..=1024).contains(&self.angles) || !(1..=1024).contains(&self.w2_angles) {
            return bad("angular counts must lie in 1..=1024");
        }
        if self.w1_powers.is_empty() || self.w1_powers.windows(2).any(|w| w[1] <= w[0]) || self.w1_powers[0] == 0 {
            return bad("w1_powers must be positive and strictly increasing");
        }
        if self.w1_powers.iter().any(|&n| n > 1024) {
            return bad("w1_powers must not exceed 1024");
        }
        if !self.s2_samples.is_power_of_two() || self.s2_samples < 64 || self.s2_samples > 1 << 22 {
            return bad("s2_samples must be a power of two in [64, 2^22]");
        }
        if !(MIN_ARC_SAMPLES..=1024).contains(&self.arc_nodes) {
            return bad("arc_nodes must lie in 64..=1024");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return bad("thresholds must lie in (0, 1)");
        }
        if self.tail == 0 {
            return bad("tail must be positive");
        }
        if !(self.tau_cap > 0.0 && self.tau_cap.is_finite()) {
            return bad("tau_cap must be positive and finite");
        }
        if !(self.quad.n0.is_power_of_two() && self.quad.n_max.is_power_of_two() && self.quad.n0 <= self.quad.n_max) {
            return bad("quadrature sizes must be powers of two with n0 <= n_max");
        }
        if self.s1_grid.radii.is_empty() || self.s1_grid.angles == 0 {
            return bad("s1_grid must be nonempty");
        }
        Ok(())
    }

    fn levels(&self) -> Vec<f64> {
        dyadic_radii(self.depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub approach: f64,
    pub value: f64,
    pub grid_size: usize,
    pub tau_cap_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionProfile {
    pub kind: Kind,
    pub symbol_id: String,
    pub points: Vec<ProfilePoint>,
    /// Metric evaluations behind the profile (τ kinds only).
    pub evaluations: u64,
}

impl CriterionProfile {
    pub fn tau_cap_hits(&self) -> u64 {
        self.points.iter().map(|p| p.tau_cap_hits).sum()
    }

    pub fn clipped_fraction(&self) -> f64 {
        if self.evaluations == 0 {
            0.0
        } else {
            self.tau_cap_hits() as f64 / self.evaluations as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn final_value(&self) -> Option<f64> {
        self.points.last().map(|p| p.value)
    }

    /// Strictly increasing approach values, finite values, and the unit bound where it applies.
    pub fn check_invariants(&self) -> bool {
        self.points.windows(2).all(|w| w[1].approach > w[0].approach)
            && self.points.iter().all(|p| p.value.is_finite() && p.value >= 0.0)
            && (!self.kind.unit_bounded() || self.points.iter().all(|p| p.value <= 1.0 + 1e-12))
    }
}

/// `‖σ_{φ(a)}∘φ∘σ_a‖_{H²}` by the `ρ²`-Poisson route.
pub fn l_statistic(phi: &SelfMap, a: &DiscPoint, cfg: &QuadConfig) -> Result<f64> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let m = rho_poisson_mean(phi.symbol(), a.value(), cfg);
    if !m.converged {
        return Err(Error::RouteMismatch {
            first: m.value.max(0.0).sqrt(),
            second: (m.value - m.change).max(0.0).sqrt(),
            n: m.n,
        });
    }
    Ok(m.value.max(0.0).sqrt())
}

/// Gauss–Legendre samples `(weight, φ(ζ))` on an arc; weights sum to one.
fn arc_samples(phi: &Symbol, arc: &Arc, nodes: usize) -> Result<Vec<(f64, C)>> {
    if nodes < MIN_ARC_SAMPLES {
        return Err(Error::UnderResolved(nodes, MIN_ARC_SAMPLES));
    }
    let rule = gl_rule(nodes);
    let (c, h) = (arc.center_radians(), arc.half_width());
    Ok(rule.0.iter().zip(&rule.1).map(|(&x, &w)| (w, phi.value_at(C::from_polar(1.0, c + h * x)))).collect())
}

/// `φ_I = |I|⁻¹ ∫_I φ`.
pub fn arc_mean(phi: &Symbol, arc: &Arc, nodes: usize) -> Result<C> {
    Ok(arc_samples(phi, arc, nodes)?.into_iter().map(|(w, v)| w * v).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    RhoSq,
    /// `min(τ, cap)^p`.
    TauPow {
        p: f64,
        cap: f64,
    },
}

impl Metric {
    fn eval(&self, z: C, w: C) -> (f64, bool) {
        match *self {
            Metric::RhoSq => (rho_sq(z, w), false),
            Metric::TauPow { p, cap } => crate::disc::capped_tau_pow(z, w, cap, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcAverage {
    pub value: f64,
    pub clipped: u64,
    pub evaluations: u64,
}

/// `|I|⁻² ∬_{I×I} metric(φ(ζ), φ(ξ))` on a `n × (n+1)` Gauss–Legendre
/// tensor rule, so the two node sets never share a point.
pub fn arc_double_average(phi: &Symbol, arc: &Arc, metric: Metric, nodes: usize) -> Result<ArcAverage> {
    let s = arc_samples(phi, arc, nodes)?;
    let t = arc_samples(phi, arc, nodes + 1)?;
    let mut out = ArcAverage { value: 0.0, clipped: 0, evaluations: (s.len() * t.len()) as u64 };
    for &(w1, z) in &s {
        let mut row = 0.0;
        for &(w2, v) in &t {
            let (m, c) = metric.eval(z, v);
            row += w2 * m;
            out.clipped += c as u64;
        }
        out.value += w1 * row;
    }
    Ok(out)
}

/// `|I|⁻¹ ∫_I metric(φ(ζ), φ(a_I))` with `I = I(a_I)`.
pub fn arc_center_average(phi: &Symbol, arc: &Arc, metric: Metric, nodes: usize) -> Result<ArcAverage> {
    let b = phi.value_at(crate::disc::center_of(arc).value());
    let s = arc_samples(phi, arc, nodes)?;
    let mut out = ArcAverage { value: 0.0, clipped: 0, evaluations: s.len() as u64 };
    for (w, z) in s {
        let (m, c) = metric.eval(z, b);
        out.value += w * m;
        out.clipped += c as u64;
    }
    Ok(out)
}

/// `|φⁿ|_*` lower bound over the standard grid.
pub fn w1_statistic(phi: &SelfMap, n: usize, depth: usize, angles: usize, cfg: &QuadConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("W1 needs n >= 1".into()));
    }
    Ok(bmoa_seminorm_spectral(&power(phi.symbol(), n), &dyadic_radii(depth), angles, &[], &[], cfg)?.value)
}

/// `|σ_a∘φ|_*` over the standard grid, the point `a`, and any witnesses.
pub fn w2_statistic(
    phi: &SelfMap,
    a: &DiscPoint,
    witnesses: &[C],
    depth: usize,
    angles: usize,
    cfg: &QuadConfig,
) -> Result<f64> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let f = compose(&Symbol::moebius(a.value()), phi.symbol());
    Ok(bmoa_seminorm_spectral(&f, &dyadic_radii(depth), angles, &[a.value()], witnesses, cfg)?.value)
}

/// `|{ζ : |φ(σ_a(ζ))| > t}|` by counting `n` equispaced boundary samples.
pub fn s2_statistic(phi: &SelfMap, a: &DiscPoint, t: f64, n: usize) -> Result<f64> {
    if a.is_boundary() {
        return Err(Error::NotInterior(a.value()));
    }
    let m = s2_moduli(phi, a.value(), n);
    Ok(count_above(&m, t) as f64 / n as f64)
}

/// `|φ∘σ_a|` at the `n`-th roots of unity, sorted in decreasing order.
fn s2_moduli(phi: &SelfMap, a: C, n: usize) -> Vec<f64> {
    let mut m: Vec<f64> = (0..n).map(|j| phi.at(moebius(a, root(j, n))).norm()).collect();
    m.sort_by(|x, y| y.total_cmp(x));
    m
}

fn count_above(sorted_desc: &[f64], t: f64) -> usize {
    sorted_desc.partition_point(|&v| v > t)
}

/// Grid point of a sweep: `a = (1 − 2^{-j}) e^{2πi·i/angles}`, with `j = 0` the origin.
#[derive(Debug, Clone, Copy)]
struct GridPoint {
    j: usize,
    i: usize,
    a: C,
    phi_a: C,
}

#[derive(Debug, Clone, Copy, Default)]
struct ArcStats {
    mean_modulus: f64,
    rho_double: f64,
    tau_double: [f64; 3],
    tau_double_hits: u64,
    tau_double_evals: u64,
    rho_center: f64,
    tau_center: f64,
    tau_center_hits: u64,
    tau_center_evals: u64,
}

/// Per-symbol caches shared by all profiles of one sweep.
pub struct Sweep<'a> {
    phi: &'a SelfMap,
    params: &'a SweepParams,
    grid: Vec<GridPoint>,
    l: OnceLock<Vec<Option<f64>>>,
    s1: OnceLock<Vec<Option<f64>>>,
    arcs: OnceLock<Vec<Option<ArcStats>>>,
}

impl<'a> Sweep<'a> {
    pub fn new(phi: &'a SelfMap, params: &'a SweepParams) -> Result<Self> {
        params.validate()?;
        let mut grid = vec![GridPoint { j: 0, i: 0, a: C::new(0.0, 0.0), phi_a: phi.at(C::new(0.0, 0.0)) }];
        for j in 1..=params.depth + params.overshoot {
            let r = 1.0 - 2f64.powi(-(j as i32));
            for i in 0..params.angles {
                let a = r * root(i, params.angles);
                grid.push(GridPoint { j, i, a, phi_a: phi.at(a) });
            }
        }
        Ok(Self { phi, params, grid, l: OnceLock::new(), s1: OnceLock::new(), arcs: OnceLock::new() })
    }

    fn level_floor(&self) -> f64 {
        self.params.levels()[0]
    }

    fn l_values(&self) -> Result<&Vec<Option<f64>>> {
        if let Some(v) = self.l.get() {
            return Ok(v);
        }
        let floor = self.level_floor();
        let k = self.params.depth;
        let v = self
            .grid
            .par_iter()
            .map(|g| {
                if g.phi_a.norm() >= floor || (1..=k).contains(&g.j) {
                    l_statistic(self.phi, &DiscPoint::interior(g.a)?, &self.params.quad).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.l.get_or_init(|| v))
    }

    fn s1_values(&self) -> Result<&Vec<Option<f64>>> {
        if let Some(v) = self.s1.get() {
            return Ok(v);
        }
        let floor = self.level_floor();
        let v = self
            .grid
            .par_iter()
            .map(|g| {
                if g.phi_a.norm() >= floor {
                    s1_statistic(self.phi, &DiscPoint::interior(g.a)?, &self.params.s1_grid).map(|s| Some(s.value))
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.s1.get_or_init(|| v))
    }

    fn arc_stats(&self) -> Result<&Vec<Option<ArcStats>>> {
        if let Some(v) = self.arcs.get() {
            return Ok(v);
        }
        let v = self
            .grid
            .par_iter()
            .map(|g| {
                if g.j == 0 {
                    return Ok(None);
                }
                let arc = Arc::from_f64(g.i as f64 / self.params.angles as f64, 2f64.powi(-(g.j as i32)))?;
                self.one_arc(&arc, g.phi_a).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.arcs.get_or_init(|| v))
    }

    fn one_arc(&self, arc: &Arc, center_value: C) -> Result<ArcStats> {
        let phi = self.phi.symbol();
        let n = self.params.arc_nodes;
        let cap = self.params.tau_cap;
        let s = arc_samples(phi, arc, n)?;
        let t = arc_samples(phi, arc, n + 1)?;
        let mut st = ArcStats {
            mean_modulus: s.iter().map(|&(w, v)| w * v).sum::<C>().norm(),
            tau_double_evals: (s.len() * t.len()) as u64,
            tau_center_evals: s.len() as u64,
            ..ArcStats::default()
        };
        for &(w1, z) in &s {
            let (mut rho_row, mut tau_row) = (0.0, [0.0; 3]);
            for &(w2, v) in &t {
                rho_row += w2 * rho_sq(z, v);
                let d = tau(z, v);
                let clipped = d > cap;
                st.tau_double_hits += clipped as u64;
                let d = d.min(cap);
                for p in Power::ALL {
                    tau_row[p.index()] += w2 * d.powf(p.value());
                }
            }
            st.rho_double += w1 * rho_row;
            for (acc, row) in st.tau_double.iter_mut().zip(tau_row) {
                *acc += w1 * row;
            }
            st.rho_center += w1 * rho_sq(z, center_value);
            let d = tau(z, center_value);
            st.tau_center_hits += (d > cap) as u64;
            st.tau_center += w1 * d.min(cap);
        }
        Ok(st)
    }

    /// Supremum envelope over level sets `{level ≥ s_k}`.
    fn level_profile(&self, items: &[(f64, f64)]) -> Vec<ProfilePoint> {
        self.params
            .levels()
            .into_iter()
            .map(|s| {
                let inside: Vec<f64> = items.iter().filter(|(lv, _)| *lv >= s).map(|&(_, v)| v).collect();
                ProfilePoint {
                    approach: s,
                    value: inside.iter().copied().fold(0.0, f64::max),
                    grid_size: inside.len(),
                    tau_cap_hits: 0,
                }
            })
            .collect()
    }

    /// Maxima per ladder index `j = 1..=K` with approach `1 − 2^{-j}`.
    fn ladder_profile(&self, items: &[(usize, f64, u64)]) -> Vec<ProfilePoint> {
        (1..=self.params.depth)
            .map(|j| {
                let at: Vec<_> = items.iter().filter(|it| it.0 == j).collect();
                ProfilePoint {
                    approach: 1.0 - 2f64.powi(-(j as i32)),
                    value: at.iter().map(|it| it.1).fold(0.0, f64::max),
                    grid_size: at.len(),
                    tau_cap_hits: at.iter().map(|it| it.2).sum(),
                }
            })
            .collect()
    }

    pub fn profile(&self, kind: Kind, symbol_id: &str) -> Result<CriterionProfile> {
        let k = self.params.depth;
        let mut evaluations = 0u64;
        let points = match kind {
            Kind::L => {
                let l = self.l_values()?;
                let items: Vec<_> =
                    self.grid.iter().zip(l).filter_map(|(g, v)| v.map(|v| (g.phi_a.norm(), v))).collect();
                self.level_profile(&items)
            }
            Kind::S1 => {
                let s = self.s1_values()?;
                let items: Vec<_> =
                    self.grid.iter().zip(s).filter_map(|(g, v)| v.map(|v| (g.phi_a.norm(), v))).collect();
                self.level_profile(&items)
            }
            Kind::VmoaIii => {
                let l = self.l_values()?;
                let items: Vec<_> = self
                    .grid
                    .iter()
                    .zip(l)
                    .filter(|(g, _)| (1..=k).contains(&g.j))
                    .filter_map(|(g, v)| v.map(|v| (g.j, v, 0)))
                    .collect();
                self.ladder_profile(&items)
            }
            Kind::ADouble | Kind::APrime => {
                let arcs = self.arc_stats()?;
                let items: Vec<_> = arcs
                    .iter()
                    .flatten()
                    .map(|s| (s.mean_modulus, if kind == Kind::ADouble { s.rho_double } else { s.rho_center }))
                    .collect();
                self.level_profile(&items)
            }
            Kind::AVmoa | Kind::AHypDouble(_) | Kind::AHypCenter => {
                let arcs = self.arc_stats()?;
                let items: Vec<_> = self
                    .grid
                    .iter()
                    .zip(arcs)
                    .filter(|(g, _)| (1..=k).contains(&g.j))
                    .filter_map(|(g, s)| s.map(|s| (g.j, s)))
                    .map(|(j, s)| match kind {
                        Kind::AVmoa => (j, s.rho_double, 0),
                        Kind::AHypDouble(p) => {
                            evaluations += s.tau_double_evals;
                            (j, s.tau_double[p.index()], s.tau_double_hits)
                        }
                        _ => {
                            evaluations += s.tau_center_evals;
                            (j, s.tau_center, s.tau_center_hits)
                        }
                    })
                    .collect();
                self.ladder_profile(&items)
            }
            Kind::W1 => self
                .params
                .w1_powers
                .par_iter()
                .map(|&n| {
                    Ok(ProfilePoint {
                        approach: n as f64,
                        value: w1_statistic(self.phi, n, k, self.params.angles, &self.params.quad)?,
                        grid_size: k * self.params.angles,
                        tau_cap_hits: 0,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            Kind::W2 => {
                let m = self.params.w2_angles;
                let pts: Vec<(usize, C)> = (1..=k)
                    .flat_map(|j| {
                        let r = 1.0 - 2f64.powi(-(j as i32));
                        (0..m).map(move |i| (j, r * root(i, m)))
                    })
                    .collect();
                let items = pts
                    .par_iter()
                    .map(|&(j, a)| {
                        let v = w2_statistic(
                            self.phi,
                            &DiscPoint::interior(a)?,
                            &[],
                            k,
                            self.params.angles,
                            &self.params.quad,
                        )?;
                        Ok((j, v, 0))
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.ladder_profile(&items)
            }
            Kind::S2(r) => self.s2_profile(r.value())?,
        };
        Ok(CriterionProfile { kind, symbol_id: symbol_id.to_string(), points, evaluations })
    }

    fn s2_profile(&self, radius: f64) -> Result<Vec<ProfilePoint>> {
        let n = self.params.s2_samples;
        let candidates: Vec<&GridPoint> = self.grid.iter().filter(|g| g.phi_a.norm() <= radius).collect();
        let moduli: Vec<Vec<f64>> = candidates.par_iter().map(|g| s2_moduli(self.phi, g.a, n)).collect();
        Ok(self
            .params
            .levels()
            .into_iter()
            .map(|t| ProfilePoint {
                approach: t,
                value: moduli.iter().map(|m| count_above(m, t) as f64 / n as f64).fold(0.0, f64::max),
                grid_size: candidates.len(),
                tau_cap_hits: 0,
            })
            .collect())
    }

    pub fn profiles(&self, kinds: &[Kind], symbol_id: &str) -> Result<Vec<CriterionProfile>> {
        if kinds.is_empty() {
            return Err(Error::EmptySweep("no criteria selected"));
        }
        kinds.iter().map(|&k| self.profile(k, symbol_id)).collect()
    }
}

pub fn criterion_profile(phi: &SelfMap, kind: Kind, params: &SweepParams, symbol_id: &str) -> Result<CriterionProfile> {
    Sweep::new(phi, params)?.profile(kind, symbol_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubVerdict {
    Vanishing,
    Failing,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    CompactEvidence,
    NonCompactEvidence,
    Inconclusive,
    Inconsistent,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::CompactEvidence => "compact-evidence",
            Classification::NonCompactEvidence => "non-compact-evidence",
            Classification::Inconclusive => "inconclusive",
            Classification::Inconsistent => "inconsistent",
        };
        f.write_str(s)
    }
}

/// Vanishing: final value below `ε` with a nonincreasing tail. Failing:
/// every tail value at least `δ`. Clipping at the τ-cap only lowers values,
/// so it never turns a failing profile inconclusive.
pub fn sub_verdict(profile: &CriterionProfile, params: &SweepParams) -> SubVerdict {
    let v = profile.values();
    if v.is_empty() {
        return SubVerdict::Inconclusive;
    }
    let tail = &v[v.len().saturating_sub(params.tail)..];
    let last = *tail.last().expect("nonempty");
    if last < params.epsilon && tail.windows(2).all(|w| w[1] <= w[0] + MONOTONE_TOL) {
        SubVerdict::Vanishing
    } else if tail.iter().all(|&x| x >= params.delta) {
        SubVerdict::Failing
    } else {
        SubVerdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub symbol_id: String,
    pub classification: Classification,
    pub reason: String,
    pub sub_verdicts: BTreeMap<String, SubVerdict>,
    /// All `S2[R]` sub-profiles vanish; `None` when none were computed.
    pub s2_satisfied: Option<bool>,
    pub diagnostics: Vec<String>,
}

pub fn verdict(profiles: &[CriterionProfile], params: &SweepParams) -> Result<VerdictReport> {
    let l = profiles
        .iter()
        .find(|p| p.kind == Kind::L)
        .ok_or_else(|| Error::Precondition("verdict needs the L-profile".into()))?;
    let symbol_id = l.symbol_id.clone();
    let subs: Vec<(Kind, SubVerdict)> = profiles.iter().map(|p| (p.kind, sub_verdict(p, params))).collect();
    let class: Vec<_> = subs.iter().filter(|(k, _)| k.in_equivalence_class()).collect();
    let vanishing: Vec<String> =
        class.iter().filter(|(_, s)| *s == SubVerdict::Vanishing).map(|(k, _)| k.to_string()).collect();
    let failing: Vec<String> =
        class.iter().filter(|(_, s)| *s == SubVerdict::Failing).map(|(k, _)| k.to_string()).collect();
    let s2: Vec<_> = subs.iter().filter(|(k, _)| matches!(k, Kind::S2(_))).collect();
    let s2_satisfied = (!s2.is_empty()).then(|| s2.iter().all(|(_, s)| *s == SubVerdict::Vanishing));
    let l_sub = sub_verdict(l, params);

    let mut diagnostics = Vec::new();
    for p in profiles.iter().filter(|p| p.kind.uses_tau() && p.clipped_fraction() > CLIP_FRACTION) {
        diagnostics.push(format!(
            "{}: {:.1}% of τ evaluations clipped at {}",
            p.kind,
            100.0 * p.clipped_fraction(),
            params.tau_cap
        ));
    }
    let (classification, reason) = if !vanishing.is_empty() && !failing.is_empty() {
        diagnostics.push(format!("vanishing: {}; failing: {}", vanishing.join(", "), failing.join(", ")));
        (Classification::Inconsistent, "equivalent criteria disagree".to_string())
    } else if l_sub == SubVerdict::Vanishing {
        let vacuous = l.points.last().is_some_and(|p| p.grid_size == 0);
        let reason = if vacuous {
            "sup|φ|<1, (L) vacuous".to_string()
        } else {
            "(L) vanishes and no equivalent criterion fails".to_string()
        };
        (Classification::CompactEvidence, reason)
    } else if l_sub == SubVerdict::Failing {
        let mut reason = format!("(L) bounded below by {}", params.delta);
        if s2_satisfied == Some(true) {
            reason.push_str("; (S2) satisfied but insufficient");
        }
        (Classification::NonCompactEvidence, reason)
    } else {
        (Classification::Inconclusive, "(L) neither vanishes nor stays above δ".to_string())
    };
    Ok(VerdictReport {
        symbol_id,
        classification,
        reason,
        sub_verdicts: subs.into_iter().map(|(k, s)| (k.to_string(), s)).collect(),
        s2_satisfied,
        diagnostics,
    })
}

/// `1 − |φ(a)| ≥ ¼ (1 − Re(φ_{I(a)} · conj(φ(a))/|φ(a)|))`.
pub fn arc_mean_lemma_gap(phi: &SelfMap, a: &DiscPoint, nodes: usize) -> Result<f64> {
    let arc = crate::disc::arc_of(a)?;
    let w = phi.at(a.value());
    let rot = if w.norm() > 0.0 { w.conj() / w.norm() } else { C::new(1.0, 0.0) };
    let mean = arc_mean(phi.symbol(), &arc, nodes)?;
    Ok((1.0 - w.norm()) - 0.25 * (1.0 - (mean * rot).re))
}

/// `γ(σ_{φ(a)}∘φ, a)` by the dual-route Garsia norm; equals the `L` statistic at `a`.
pub fn w2_witness(phi: &SelfMap, a: &DiscPoint, cfg: &QuadConfig) -> Result<f64> {
    let f = compose(&Symbol::moebius(phi.at(a.value())), phi.symbol());
    Ok(garsia_gamma(&f, a, cfg)?.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::validate_self_map;
    use num_complex::Complex64;

    fn c(x: f64, y: f64) -> C {
        Complex64::new(x, y)
    }

    fn map(s: Symbol) -> SelfMap {
        validate_self_map(&s).unwrap()
    }

    fn dp(z: C) -> DiscPoint {
        DiscPoint::interior(z).unwrap()
    }

    fn half_plus_half_z() -> SelfMap {
        map(Symbol::poly_real(&[0.5, 0.5]))
    }

    fn small() -> SweepParams {
        SweepParams { depth: 6, angles: 16, w2_angles: 4, w1_powers: vec![1, 2, 4, 8], ..SweepParams::default() }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in Kind::all() {
            assert_eq!(k.to_string().parse::<Kind>().unwrap(), k);
            let j = serde_json::to_string(&k).unwrap();
            assert_eq!(serde_json::from_str::<Kind>(&j).unwrap(), k);
        }
        assert!("A-nope".parse::<Kind>().is_err());
    }

    #[test]
    fn l_statistic_examples() {
        let cfg = QuadConfig::default();
        assert!(l_statistic(&map(Symbol::constant(c(0.3, 0.0))), &dp(c(0.4, 0.2)), &cfg).unwrap() < 1e-12);
        assert!((l_statistic(&map(Symbol::identity()), &dp(c(0.5, 0.0)), &cfg).unwrap() - 1.0).abs() < 1e-10);
        let phi = half_plus_half_z();
        let vals: Vec<f64> =
            (4..=12).map(|k| l_statistic(&phi, &dp(c(1.0 - 2f64.powi(-k), 0.0)), &cfg).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
        // frozen oracle: on the positive axis L² = (1 + r)/2 for this symbol
        for (k, v) in (4..=12).zip(&vals) {
            assert!((v * v - (1.0 - 2f64.powi(-k - 1))).abs() < 1e-11);
        }
        assert!(l_statistic(&phi, &DiscPoint::from_angle(0.3), &cfg).is_err());
    }

    #[test]
    fn arc_mean_examples() {
        let full = Arc::full();
        assert!(arc_mean(&Symbol::identity(), &full, 64).unwrap().norm() < 1e-14);
        let arc = Arc::from_f64(0.3, 0.01).unwrap();
        assert!((arc_mean(&Symbol::constant(c(0.2, -0.1)), &arc, 64).unwrap() - c(0.2, -0.1)).norm() < 1e-15);
        assert!(matches!(arc_mean(&Symbol::identity(), &arc, 32), Err(Error::UnderResolved(32, 64))));
        let phi = Symbol::poly_real(&[0.5, 0.5]);
        let mut prev = 0.0;
        for k in 1..12 {
            let m = arc_mean(&phi, &Arc::from_f64(0.0, 2f64.powi(-k)).unwrap(), 64).unwrap().norm();
            assert!(m > prev);
            prev = m;
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn arc_average_examples() {
        let arc = Arc::from_f64(0.7, 0.05).unwrap();
        let konst = Symbol::constant(c(0.4, 0.0));
        assert_eq!(arc_double_average(&konst, &arc, Metric::RhoSq, 64).unwrap().value, 0.0);
        let z2 = Symbol::monomial(2);
        let v = arc_double_average(&z2, &arc, Metric::RhoSq, 64).unwrap().value;
        assert!((v - 1.0).abs() < 1.0 / 4096.0);
        let capped = arc_double_average(&z2, &arc, Metric::TauPow { p: 1.0, cap: 50.0 }, 64).unwrap();
        assert!(capped.clipped > 0 && capped.value > 10.0);
        let phi = Symbol::poly_real(&[0.5, 0.5]);
        for k in [4, 8, 12] {
            let v =
                arc_double_average(&phi, &Arc::from_f64(0.0, 2f64.powi(-k)).unwrap(), Metric::RhoSq, 64).unwrap().value;
            assert!(v > 0.1, "k={k}: {v}");
        }
        assert_eq!(arc_center_average(&konst, &arc, Metric::RhoSq, 64).unwrap().value, 0.0);
        let id = arc_center_average(&Symbol::identity(), &arc, Metric::RhoSq, 64).unwrap().value;
        assert!(id > 0.0 && id < 1.0);
    }

    #[test]
    fn center_average_is_dominated_by_l() {
        // sharp Poisson lower constant on I(a) is 2/(1+π²) < ¼
        let c0 = crate::disc::poisson_arc_lower_constant();
        let cfg = QuadConfig::default();
        for phi in [half_plus_half_z(), map(Symbol::identity()), map(Symbol::poly_real(&[0.0, 0.5, 0.5]))] {
            for &a in &[c(0.5, 0.0), c(0.9, 0.1), c(-0.3, 0.8), c(0.99, 0.0)] {
                let arc = crate::disc::arc_of(&dp(a)).unwrap();
                let ap = arc_center_average(phi.symbol(), &arc, Metric::RhoSq, 256).unwrap().value;
                let l = l_statistic(&phi, &dp(a), &cfg).unwrap();
                assert!(ap * c0 <= l * l + 1e-10);
            }
        }
    }

    #[test]
    fn arc_mean_lemma_on_samples() {
        for phi in [half_plus_half_z(), map(Symbol::identity()), map(Symbol::moebius(c(0.5, 0.0)))] {
            for k in 1..=12 {
                for i in 0..8 {
                    let a = dp((1.0 - 2f64.powi(-k)) * root(i, 8));
                    assert!(arc_mean_lemma_gap(&phi, &a, 64).unwrap() >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn s2_examples() {
        let a0 = dp(c(0.0, 0.0));
        assert_eq!(s2_statistic(&map(Symbol::constant(c(0.3, 0.0))), &a0, 0.5, 1024).unwrap(), 0.0);
        assert_eq!(s2_statistic(&map(Symbol::identity()), &a0, 0.99, 1024).unwrap(), 1.0);
    }

    #[test]
    fn w_statistics() {
        let cfg = QuadConfig::default();
        assert!(w1_statistic(&map(Symbol::constant(c(0.0, 0.0))), 3, 6, 16, &cfg).unwrap() < 1e-12);
        let half = map(Symbol::poly_real(&[0.0, 0.5]));
        let w: Vec<f64> = [1, 2, 4, 8].iter().map(|&n| w1_statistic(&half, n, 6, 16, &cfg).unwrap()).collect();
        assert!(w.windows(2).all(|p| p[1] < p[0]), "{w:?}");
        let id = map(Symbol::identity());
        assert!(w1_statistic(&id, 8, 6, 16, &cfg).unwrap() > 0.5);

        assert!(w2_statistic(&map(Symbol::constant(c(0.2, 0.1))), &dp(c(0.6, 0.0)), &[], 6, 16, &cfg).unwrap() < 1e-12);
        let w2 = w2_statistic(&id, &dp(c(0.9, 0.0)), &[], 6, 16, &cfg).unwrap();
        assert!(w2 >= 1.0 - 1e-10);
        let phi = half_plus_half_z();
        for &a in &[c(0.3, 0.2), c(0.9, 0.0), c(-0.5, 0.5)] {
            let l = l_statistic(&phi, &dp(a), &cfg).unwrap();
            let w = w2_statistic(&phi, &dp(phi.at(a)), &[a], 6, 16, &cfg).unwrap();
            assert!(w >= l - 1e-10);
            assert!((w2_witness(&phi, &dp(a), &cfg).unwrap() - l).abs() < 1e-10);
        }
    }

    #[test]
    fn profile_examples() {
        let p = small();
        let konst = map(Symbol::constant(c(0.3, 0.0)));
        let sw = Sweep::new(&konst, &p).unwrap();
        for k in Kind::all() {
            let prof = sw.profile(k, "const").unwrap();
            assert!(prof.check_invariants());
            assert!(prof.values().iter().all(|&v| v < 1e-12), "{k}: {:?}", prof.values());
        }
        let id = map(Symbol::identity());
        let l = criterion_profile(&id, Kind::L, &p, "id").unwrap();
        assert!(l.values().iter().all(|&v| (v - 1.0).abs() < 1e-10));
        let half = map(Symbol::poly_real(&[0.0, 0.5]));
        let l = criterion_profile(&half, Kind::L, &p, "half").unwrap();
        assert!(l.points[1..].iter().all(|pt| pt.grid_size == 0 && pt.value == 0.0));
        assert!(Sweep::new(&half, &p).unwrap().profiles(&[], "x").is_err());
    }

    #[test]
    fn verdict_examples() {
        let p = small();
        let kinds = [Kind::L, Kind::ADouble, Kind::W2];
        let half = map(Symbol::poly_real(&[0.0, 0.5]));
        let v = verdict(&Sweep::new(&half, &p).unwrap().profiles(&kinds, "0.5z").unwrap(), &p).unwrap();
        assert_eq!(v.classification, Classification::CompactEvidence);
        assert_eq!(v.reason, "sup|φ|<1, (L) vacuous");
        let id = map(Symbol::identity());
        let v = verdict(&Sweep::new(&id, &p).unwrap().profiles(&kinds, "z").unwrap(), &p).unwrap();
        assert_eq!(v.classification, Classification::NonCompactEvidence);
        assert!(verdict(&[], &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SweepParams::default().validate().is_ok());
        assert!(SweepParams { depth: 0, ..SweepParams::default() }.validate().is_err());
        assert!(SweepParams { arc_nodes: 32, ..SweepParams::default() }.validate().is_err());
        assert!(SweepParams { w1_powers: vec![2, 1], ..SweepParams::default() }.validate().is_err());
        let j = serde_json::to_string(&SweepParams::default()).unwrap();
        assert_eq!(serde_json::from_str::<SweepParams>(&j).unwrap(), SweepParams::default());
    }
}
