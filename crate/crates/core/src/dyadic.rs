//! Exact arc-set algebra on the circle `[0, 1)` and the two dyadic
//! stopping-time constructions (density core, Wik decomposition).
//!
//! Endpoints live on the grid `2^{-40}` and are stored as integer ticks,
//! so every measure is an exact dyadic rational.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RESOLUTION_BITS: u32 = 40;
pub const FULL: u64 = 1 << RESOLUTION_BITS;
pub const DEPTH_CAP: u32 = 40;
/// Grid used for endpoints that are not dyadic rationals.
pub const SNAP_BITS: u32 = 20;

pub type Measure = Ratio<i128>;

fn ticks_to_ratio(t: u64) -> Measure {
    Measure::new(t as i128, FULL as i128)
}

/// Finite union of disjoint half-open arcs `[α, β)`, sorted and with
/// adjacent pieces merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ArcSet {
    pieces: Vec<(u64, u64)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { pieces: vec![(0, FULL)] }
    }

    /// From tick intervals; overlapping or touching pieces are merged.
    pub fn from_ticks(mut pieces: Vec<(u64, u64)>) -> Result<Self> {
        if let Some(&(a, b)) = pieces.iter().find(|(a, b)| a >= b || *b > FULL) {
            return Err(Error::Precondition(format!("invalid tick interval [{a}, {b})")));
        }
        pieces.sort_unstable();
        let mut out: Vec<(u64, u64)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(Self { pieces: out })
    }

    /// From exact rational endpoints in turns. Endpoints that are dyadic
    /// with denominator at most `2^40` are kept; others are rounded to the
    /// `2^{-20}` grid and reported in the returned flag.
    pub fn from_fractions(arcs: &[[i64; 4]]) -> Result<(Self, bool)> {
        let mut snapped = false;
        let mut pieces = Vec::new();
        for &[na, da, nb, db] in arcs {
            let (a, sa) = to_ticks(na, da)?;
            let (b, sb) = to_ticks(nb, db)?;
            snapped |= sa || sb;
            if a > b || (a == b && !(sa || sb)) {
                return Err(Error::Precondition(format!("arc [{na}/{da}, {nb}/{db}) is empty or reversed")));
            }
            if a < b {
                pieces.push((a, b));
            }
        }
        Ok((Self::from_ticks(pieces)?, snapped))
    }

    pub fn pieces(&self) -> &[(u64, u64)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn measure_ticks(&self) -> u64 {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }

    pub fn measure(&self) -> Measure {
        ticks_to_ratio(self.measure_ticks())
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cur = 0;
        for &(a, b) in &self.pieces {
            if a > cur {
                out.push((cur, a));
            }
            cur = b;
        }
        if cur < FULL {
            out.push((cur, FULL));
        }
        Self { pieces: out }
    }

    /// Ticks of `self ∩ [lo, hi)` for `0 ≤ lo ≤ hi ≤ FULL`.
    pub fn overlap_ticks(&self, lo: u64, hi: u64) -> u64 {
        let start = self.pieces.partition_point(|&(_, b)| b <= lo);
        let mut s = 0;
        for &(a, b) in &self.pieces[start..] {
            if a >= hi {
                break;
            }
            s += b.min(hi) - a.max(lo);
        }
        s
    }

    /// Ticks of `self ∩ [c − half, c + half)` taken modulo one.
    pub fn overlap_circular(&self, center: u64, half: u64) -> u64 {
        if 2 * half >= FULL {
            return self.measure_ticks();
        }
        let lo = center as i128 - half as i128;
        let hi = center as i128 + half as i128;
        let full = FULL as i128;
        let mut s = 0;
        for (l, h) in [(lo, hi), (lo + full, hi + full), (lo - full, hi - full)] {
            let (l, h) = (l.clamp(0, full) as u64, h.clamp(0, full) as u64);
            if l < h {
                s += self.overlap_ticks(l, h);
            }
        }
        s
    }

    pub fn difference(&self, other: &ArcSet) -> ArcSet {
        self.intersect(&other.complement())
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a1, b1) = self.pieces[i];
            let (a2, b2) = other.pieces[j];
            let (lo, hi) = (a1.max(a2), b1.min(b2));
            if lo < hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { pieces: out }
    }

    pub fn union_dyadic(arcs: &[DyadicArc]) -> ArcSet {
        Self::from_ticks(arcs.iter().map(|q| (q.start(), q.end())).collect()).expect("dyadic arcs are valid")
    }

    pub fn contains_tick(&self, t: u64) -> bool {
        let k = self.pieces.partition_point(|&(_, b)| b <= t);
        k < self.pieces.len() && self.pieces[k].0 <= t
    }

    /// Endpoints as reduced fractions `[num_α, den_α, num_β, den_β]`.
    pub fn to_fractions(&self) -> Vec<[i64; 4]> {
        self.pieces
            .iter()
            .map(|&(a, b)| {
                let (na, da) = reduce(a);
                let (nb, db) = reduce(b);
                [na, da, nb, db]
            })
            .collect()
    }
}

fn reduce(t: u64) -> (i64, i64) {
    let g = t.gcd(&FULL).max(1);
    ((t / g) as i64, (FULL / g) as i64)
}

fn to_ticks(num: i64, den: i64) -> Result<(u64, bool)> {
    if den <= 0 || num < 0 || num > den {
        return Err(Error::Precondition(format!("endpoint {num}/{den} outside [0, 1]")));
    }
    let (n, d) = (num as u128, den as u128);
    if d.is_power_of_two() && d <= FULL as u128 {
        return Ok(((n * (FULL as u128 / d)) as u64, false));
    }
    // nearest point of the 2^{-20} grid, ties rounded up
    let grid = 1u128 << SNAP_BITS;
    let k = (2 * n * grid + d) / (2 * d);
    Ok(((k << (RESOLUTION_BITS - SNAP_BITS)) as u64, true))
}

/// `[k/2ⁿ, (k+1)/2ⁿ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicArc {
    pub level: u32,
    pub index: u64,
}

impl DyadicArc {
    pub fn root() -> Self {
        Self { level: 0, index: 0 }
    }

    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level > DEPTH_CAP || index >= (1u64 << level) {
            return Err(Error::Precondition(format!("dyadic arc ({level}, {index}) out of range")));
        }
        Ok(Self { level, index })
    }

    pub fn len_ticks(&self) -> u64 {
        1 << (RESOLUTION_BITS - self.level)
    }

    pub fn start(&self) -> u64 {
        self.index << (RESOLUTION_BITS - self.level)
    }

    pub fn end(&self) -> u64 {
        self.start() + self.len_ticks()
    }

    pub fn measure(&self) -> Measure {
        Measure::new(1, 1i128 << self.level)
    }

    pub fn children(&self) -> [DyadicArc; 2] {
        let l = self.level + 1;
        [DyadicArc { level: l, index: 2 * self.index }, DyadicArc { level: l, index: 2 * self.index + 1 }]
    }

    pub fn contains(&self, other: &DyadicArc) -> bool {
        other.level >= self.level && (other.index >> (other.level - self.level)) == self.index
    }

    /// Nested, or disjoint interiors.
    pub fn nested_or_disjoint(&self, other: &DyadicArc) -> bool {
        self.contains(other) || other.contains(self) || self.end() <= other.start() || other.end() <= self.start()
    }
}

/// Exact `|Q ∩ E|`.
pub fn intersect_measure(e: &ArcSet, q: &DyadicArc) -> Measure {
    ticks_to_ratio(e.overlap_ticks(q.start(), q.end()))
}

/// `lhs_ticks · den ≥ num · rhs_ticks · scale` style comparisons without rounding.
fn ge_frac(m: u64, len: u64, num: i128, den: i128, factor_num: i128, factor_den: i128) -> bool {
    // m / len ≥ (num/den)·(factor_num/factor_den)
    (m as i128) * den * factor_den >= (len as i128) * num * factor_num
}

fn gt_frac(m: u64, len: u64, num: i128, den: i128) -> bool {
    (m as i128) * den > (len as i128) * num
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCore {
    pub core: ArcSet,
    pub stopping: Vec<DyadicArc>,
    pub lambda: Measure,
}

/// `λ = 1 − |E|/2`; the maximal dyadic arcs `I` with `|I ∩ Eᶜ| > λ|I|`,
/// and `E′ = E \ ∪I`.
pub fn density_core(e: &ArcSet) -> Result<DensityCore> {
    let m = e.measure();
    if m == Measure::from_integer(0) {
        return Err(Error::Precondition("density core needs |E| > 0".into()));
    }
    let lambda = Measure::from_integer(1) - m / 2;
    let ec = e.complement();
    let (ln, ld) = (*lambda.numer(), *lambda.denom());
    let mut stopping = Vec::new();
    let mut stack = vec![DyadicArc::root()];
    let mut unresolved = 0usize;
    while let Some(q) = stack.pop() {
        let bad = ec.overlap_ticks(q.start(), q.end());
        if bad == 0 {
            continue;
        }
        if gt_frac(bad, q.len_ticks(), ln, ld) {
            stopping.push(q);
        } else if q.level == DEPTH_CAP {
            unresolved += 1;
        } else {
            let [l, r] = q.children();
            stack.push(r);
            stack.push(l);
        }
    }
    if unresolved > 0 {
        return Err(Error::DepthCap { cap: DEPTH_CAP, unresolved });
    }
    stopping.sort();
    let core = e.difference(&ArcSet::union_dyadic(&stopping));
    Ok(DensityCore { core, stopping, lambda })
}

/// `|I(rζ) ∩ E| / |I(rζ)|` for the arc of length `2^{-k}` centered at the tick `zeta`.
pub fn local_density(e: &ArcSet, zeta: u64, k: u32) -> Measure {
    let len = 1u64 << (RESOLUTION_BITS - k);
    Measure::new(e.overlap_circular(zeta, len / 2) as i128, len as i128)
}

/// Exact check `|I(rζ) ∩ E| ≥ |E|/8 · |I(rζ)|` for `r = 1 − 2^{-k}`.
pub fn density_bound_holds(e: &ArcSet, zeta: u64, k: u32) -> bool {
    local_density(e, zeta, k) * 8 >= e.measure()
}

/// Sample points of a set: left endpoints, midpoints and last ticks of each piece.
pub fn sample_points(set: &ArcSet) -> Vec<u64> {
    set.pieces().iter().flat_map(|&(a, b)| [a, a + (b - a) / 2, b - 1]).collect()
}

/// Maximal dyadic `Q` with `|Q ∩ E| ≥ ½λ|Q|`, searched from the root.
pub fn wik_decomposition(e: &ArcSet, lambda: Measure) -> Result<Vec<DyadicArc>> {
    let zero = Measure::from_integer(0);
    if lambda <= zero || lambda >= Measure::from_integer(1) {
        return Err(Error::Precondition(format!("λ = {lambda} outside (0, 1)")));
    }
    if e.measure() > lambda {
        return Err(Error::Precondition(format!("|E| = {} exceeds λ = {lambda}", e.measure())));
    }
    let (ln, ld) = (*lambda.numer(), *lambda.denom());
    let mut out = Vec::new();
    let mut stack = vec![DyadicArc::root()];
    let mut unresolved = 0usize;
    while let Some(q) = stack.pop() {
        let m = e.overlap_ticks(q.start(), q.end());
        if m == 0 {
            continue;
        }
        if ge_frac(m, q.len_ticks(), ln, ld, 1, 2) {
            out.push(q);
        } else if q.level == DEPTH_CAP {
            unresolved += 1;
        } else {
            let [l, r] = q.children();
            stack.push(r);
            stack.push(l);
        }
    }
    if unresolved > 0 {
        return Err(Error::DepthCap { cap: DEPTH_CAP, unresolved });
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikVerification {
    pub sandwich: bool,
    pub disjoint_interiors: bool,
    pub coverage_residue_zero: bool,
}

impl WikVerification {
    pub fn all(&self) -> bool {
        self.sandwich && self.disjoint_interiors && self.coverage_residue_zero
    }
}

pub fn verify_wik(e: &ArcSet, lambda: Measure, family: &[DyadicArc]) -> WikVerification {
    let sandwich = family.iter().all(|q| {
        let m = intersect_measure(e, q);
        m >= lambda * q.measure() / 2 && m <= lambda * q.measure()
    });
    let disjoint_interiors = family
        .iter()
        .enumerate()
        .all(|(i, p)| family[i + 1..].iter().all(|q| p.end() <= q.start() || q.end() <= p.start()));
    let coverage_residue_zero = e.difference(&ArcSet::union_dyadic(family)).is_empty();
    WikVerification { sandwich, disjoint_interiors, coverage_residue_zero }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityVerification {
    pub core_nonempty: bool,
    pub stopping_violates: bool,
    pub ratio_bound: bool,
    pub samples: usize,
}

impl DensityVerification {
    pub fn all(&self) -> bool {
        self.core_nonempty && self.stopping_violates && self.ratio_bound
    }
}

/// Rechecks a density core: `|E′| > 0`, every stopping arc violates the
/// density rule, and the ratio bound holds at the sample points of `E′`
/// for `r = 1 − 2^{-k}`, `k = 1..=max_k`.
pub fn verify_density(e: &ArcSet, dc: &DensityCore, max_k: u32, extra_samples: &[u64]) -> DensityVerification {
    let ec = e.complement();
    let stopping_violates =
        dc.stopping.iter().all(|q| ticks_to_ratio(ec.overlap_ticks(q.start(), q.end())) > dc.lambda * q.measure());
    let mut pts = sample_points(&dc.core);
    pts.extend(extra_samples.iter().copied().filter(|&t| dc.core.contains_tick(t)));
    let ratio_bound = pts.iter().all(|&z| (1..=max_k).all(|k| density_bound_holds(e, z, k)));
    DensityVerification {
        core_nonempty: !dc.core.is_empty(),
        stopping_violates,
        ratio_bound,
        samples: pts.len() * max_k as usize,
    }
}

/// JSON report for a decomposition run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub mode: String,
    pub lambda: [i64; 2],
    pub input_snapped: bool,
    pub input: Vec<[i64; 4]>,
    pub measure: [i64; 2],
    pub family: Vec<[i64; 4]>,
    pub dyadic: Vec<(u32, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core: Option<Vec<[i64; 4]>>,
    pub verification: serde_json::Value,
    pub verified: bool,
}

fn frac(m: Measure) -> [i64; 2] {
    [*m.numer() as i64, *m.denom() as i64]
}

pub fn report_wik(e: &ArcSet, snapped: bool, lambda: Measure) -> Result<DecompositionReport> {
    let fam = wik_decomposition(e, lambda)?;
    let v = verify_wik(e, lambda, &fam);
    Ok(DecompositionReport {
        mode: "wik".into(),
        lambda: frac(lambda),
        input_snapped: snapped,
        input: e.to_fractions(),
        measure: frac(e.measure()),
        family: ArcSet { pieces: fam.iter().map(|q| (q.start(), q.end())).collect() }.to_fractions(),
        dyadic: fam.iter().map(|q| (q.level, q.index)).collect(),
        core: None,
        verified: v.all(),
        verification: serde_json::to_value(&v)?,
    })
}

pub fn report_density(e: &ArcSet, snapped: bool, max_k: u32) -> Result<DecompositionReport> {
    let dc = density_core(e)?;
    let v = verify_density(e, &dc, max_k, &[]);
    Ok(DecompositionReport {
        mode: "density".into(),
        lambda: frac(dc.lambda),
        input_snapped: snapped,
        input: e.to_fractions(),
        measure: frac(e.measure()),
        family: ArcSet { pieces: dc.stopping.iter().map(|q| (q.start(), q.end())).collect() }.to_fractions(),
        dyadic: dc.stopping.iter().map(|q| (q.level, q.index)).collect(),
        core: Some(dc.core.to_fractions()),
        verified: v.all(),
        verification: serde_json::to_value(&v)?,
    })
}
