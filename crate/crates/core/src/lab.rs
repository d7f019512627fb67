//! Drivers behind the command-line tool: configured sweeps, the symbol
//! gallery, decomposition and selection runs, and the identity suite.
//!
//! Every output is a pure function of its inputs and seed. Worker counts
//! only size the thread pool and never reach an output file.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{
    l_statistic, verdict, w2_statistic, Classification, CriterionProfile, Kind, Sweep, SweepParams, VerdictReport,
};
use crate::disc::{moebius, poisson, poisson_arc_lower_constant, DiscPoint, C};
use crate::dyadic::{self, ArcSet, DecompositionReport, Measure, FULL};
use crate::error::{Error, Result};
use crate::hardy::{composite_norm_routes, garsia_gamma, QuadConfig};
use crate::leibov::{self, combination_seminorm, select_subsequence, SelectionCertificate, TestSequence};
use crate::nevanlinna::{counting_function, to_rational};
use crate::symbol::{compose, validate_self_map, SelfMap, Symbol};

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const MAX_WORKERS: usize = 256;
/// Deepest `k` at which the density ratio is rechecked in decomposition runs.
pub const DENSITY_MAX_K: u32 = 12;
/// Points per gallery entry in the `W2 ≥ L` check.
pub const DOMINANCE_SAMPLES: usize = 4;
pub const DOMINANCE_TOL: f64 = 1e-10;
pub const ROUTES_TOL: f64 = 1e-8;
pub const COUNTING_TOL: f64 = 1e-10;

fn c(x: f64, y: f64) -> C {
    Complex64::new(x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: PathBuf,
    pub json: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

/// A single-symbol sweep. Relative output paths resolve against the
/// directory passed to [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub symbol: Symbol,
    #[serde(default = "default_symbol_id")]
    pub symbol_id: String,
    pub criteria: Vec<Kind>,
    #[serde(default)]
    pub params: SweepParams,
    pub outputs: Outputs,
    /// Thread-pool size; 0 picks the rayon default.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_symbol_id() -> String {
    "symbol".into()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::EmptySweep("no criteria selected"));
        }
        if self.workers > MAX_WORKERS {
            return Err(Error::Config(format!("workers must be at most {MAX_WORKERS}")));
        }
        if self.symbol_id.is_empty() || self.symbol_id.contains(['/', '\\']) {
            return Err(Error::Config("symbol_id must be a nonempty file-name-safe string".into()));
        }
        self.params.validate()
    }
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Profile rows sorted by (kind, approach); 17 significant digits, LF endings.
pub fn profiles_csv(profiles: &[CriterionProfile]) -> Result<String> {
    let mut rows: Vec<(String, f64, f64, usize, u64)> = profiles
        .iter()
        .flat_map(|p| {
            p.points.iter().map(move |q| (p.kind.to_string(), q.approach, q.value, q.grid_size, q.tau_cap_hits))
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["kind", "approach", "value", "grid_size", "tau_cap_hits"]).map_err(io)?;
    for (kind, approach, value, grid, hits) in rows {
        w.write_record([kind, format!("{approach:.16e}"), format!("{value:.16e}"), grid.to_string(), hits.to_string()])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Line plot of every profile against its ladder index.
pub fn profiles_svg(title: &str, profiles: &[CriterionProfile]) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 420.0, 50.0, 170.0, 30.0, 40.0);
    let steps = profiles.iter().map(|p| p.points.len()).max().unwrap_or(1).max(2) - 1;
    let ymax = profiles.iter().flat_map(|p| p.values()).fold(1.0, f64::max);
    let x = |i: usize| left + (w - left - right) * i as f64 / steps as f64;
    let y = |v: f64| top + (h - top - bottom) * (1.0 - v / ymax);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="18">{}</text>"#, escape(title));
    let _ = writeln!(s, r#"<path d="M{left} {top} V{:.1} H{:.1}" fill="none" stroke="black"/>"#, h - bottom, w - right);
    for v in [0.0, 0.5 * ymax, ymax] {
        let _ = writeln!(s, r#"<text x="8" y="{:.1}">{v:.2}</text>"#, y(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">ladder level</text>"#, w / 2.0 - 60.0, h - 10.0);
    for (n, p) in profiles.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> =
            p.points.iter().enumerate().map(|(i, q)| format!("{:.1},{:.1}", x(i), y(q.value))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        let ly = top + 14.0 * n as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
            w - right + 10.0,
            escape(&p.kind.to_string())
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn to_json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub symbol_id: String,
    pub symbol: Symbol,
    pub sup_modulus: f64,
    pub seed: u64,
    pub params: SweepParams,
    pub verdict: VerdictReport,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub profiles: Vec<CriterionProfile>,
    pub report: SweepReport,
}

/// Profiles for every configured criterion. `L` is always computed because
/// the verdict rests on it; it reaches the outputs only when requested.
pub fn compute_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let phi = validate_self_map(&cfg.symbol)?;
    let sweep = Sweep::new(&phi, &cfg.params)?;
    let mut kinds = cfg.criteria.clone();
    kinds.sort_by_key(|k| k.to_string());
    kinds.dedup();
    let profiles = sweep.profiles(&kinds, &cfg.symbol_id)?;
    let verdict = if kinds.contains(&Kind::L) {
        verdict(&profiles, &cfg.params)?
    } else {
        let mut all = profiles.clone();
        all.push(sweep.profile(Kind::L, &cfg.symbol_id)?);
        let mut v = verdict(&all, &cfg.params)?;
        v.sub_verdicts.remove(&Kind::L.to_string());
        v
    };
    let report = SweepReport {
        symbol_id: cfg.symbol_id.clone(),
        symbol: cfg.symbol.clone(),
        sup_modulus: phi.certificate().sup(),
        seed: cfg.seed,
        params: cfg.params.clone(),
        verdict,
    };
    Ok(SweepOutcome { profiles, report })
}

/// Runs the sweep on a pool of `cfg.workers` threads and writes the CSV,
/// JSON and optional SVG outputs.
pub fn run_sweep(cfg: &SweepConfig, base: &Path) -> Result<SweepOutcome> {
    cfg.validate()?;
    let out = thread_pool(cfg.workers)?.install(|| compute_sweep(cfg))?;
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    fs::write(resolve(&cfg.outputs.csv), profiles_csv(&out.profiles)?)?;
    fs::write(resolve(&cfg.outputs.json), to_json_line(&out.report))?;
    if let Some(svg) = &cfg.outputs.svg {
        fs::write(resolve(svg), profiles_svg(&cfg.symbol_id, &out.profiles))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    Compact,
    NonCompact,
}

impl Expected {
    pub fn matches(self, c: Classification) -> bool {
        matches!(
            (self, c),
            (Expected::Compact, Classification::CompactEvidence)
                | (Expected::NonCompact, Classification::NonCompactEvidence)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub symbol: Symbol,
    pub expected: Expected,
    pub provenance: String,
}

fn entry(name: &str, symbol: Symbol, expected: Expected, provenance: &str) -> GalleryEntry {
    GalleryEntry { name: name.into(), symbol, expected, provenance: provenance.into() }
}

pub fn gallery() -> Vec<GalleryEntry> {
    use Expected::*;
    vec![
        entry(
            "constant-0.3",
            Symbol::constant(c(0.3, 0.0)),
            Compact,
            "sup|φ| = 0.3 < 1, so every criterion is vacuous",
        ),
        entry("half-z", Symbol::poly_real(&[0.0, 0.5]), Compact, "sup|φ| = 0.5 < 1"),
        entry("identity", Symbol::identity(), NonCompact, "inner; σ_{φ(a)}∘φ∘σ_a is a rotation of norm one"),
        entry("z-squared", Symbol::monomial(2), NonCompact, "finite Blaschke product, hence inner with L ≡ 1"),
        entry("moebius-0.5", Symbol::moebius(c(0.5, 0.0)), NonCompact, "disc automorphism, hence inner"),
        entry(
            "half-one-plus-z",
            Symbol::poly_real(&[0.5, 0.5]),
            NonCompact,
            "touches the circle only at 1 with angular derivative 1/2; (S2) holds yet (L) fails",
        ),
        entry(
            "moebius-0.7-after-0.9z",
            compose(&Symbol::moebius(c(0.7, 0.0)), &Symbol::scale(0.9, Symbol::identity())),
            Compact,
            "sup|φ| = σ_0.7(-0.9) ≈ 0.98 < 1",
        ),
        entry(
            "half-z-plus-half-z2",
            Symbol::poly_real(&[0.0, 0.5, 0.5]),
            NonCompact,
            "touches the circle at 1 with finite angular derivative 3/2",
        ),
    ]
}

fn point_at(rng: &mut ChaCha8Rng, max_bits: f64) -> C {
    let r = 1.0 - 2f64.powf(-rng.gen_range(0.0..=max_bits));
    Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

/// `n` points `(1 − 2^{-u}) e^{iθ}` with `u` uniform on `[0, max_bits]`.
pub fn sample_points(rng: &mut ChaCha8Rng, n: usize, max_bits: f64) -> Vec<C> {
    (0..n).map(|_| point_at(rng, max_bits)).collect()
}

/// Smallest `W2(φ(a)) − L(a)` over `points`, where each `W2` grid contains
/// the witnessing point `a`.
pub fn dominance_margin(phi: &SelfMap, points: &[C], depth: usize, angles: usize, cfg: &QuadConfig) -> Result<f64> {
    let margins = points
        .par_iter()
        .map(|&a| {
            let ap = DiscPoint::interior(a)?;
            let l = l_statistic(phi, &ap, cfg)?;
            let w2 = w2_statistic(phi, &DiscPoint::interior(phi.at(a))?, &[a], depth, angles, cfg)?;
            Ok(w2 - l)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(margins.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryRow {
    pub name: String,
    pub expected: Expected,
    pub classification: Classification,
    pub matches: bool,
    pub s2_satisfied: Option<bool>,
    pub l_final: f64,
    pub w2_dominance_margin: f64,
    pub reason: String,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GallerySummary {
    pub depth: usize,
    pub seed: u64,
    pub rows: Vec<GalleryRow>,
    pub all_match: bool,
    pub any_inconsistent: bool,
}

impl GallerySummary {
    /// 0 when every verdict matches, 3 on an inconsistent row, else 2.
    pub fn exit_code(&self) -> i32 {
        if self.any_inconsistent {
            3
        } else if !self.all_match {
            2
        } else {
            0
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([
            "name",
            "expected",
            "classification",
            "match",
            "s2_satisfied",
            "l_final",
            "w2_dominance_margin",
        ])
        .map_err(io)?;
        for r in &self.rows {
            let expected = serde_json::to_value(r.expected)?.as_str().unwrap_or_default().to_string();
            let s2 = r.s2_satisfied.map_or("n/a".to_string(), |b| b.to_string());
            w.write_record([
                r.name.clone(),
                expected,
                r.classification.to_string(),
                r.matches.to_string(),
                s2,
                format!("{:.16e}", r.l_final),
                format!("{:.16e}", r.w2_dominance_margin),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Per-entry result of a gallery run.
#[derive(Debug, Clone)]
pub struct GalleryResult {
    pub entry: GalleryEntry,
    pub profiles: Vec<CriterionProfile>,
    pub verdict: VerdictReport,
    pub row: GalleryRow,
}

fn gallery_one(index: usize, e: &GalleryEntry, params: &SweepParams, seed: u64) -> Result<GalleryResult> {
    let phi = validate_self_map(&e.symbol)?;
    let sweep = Sweep::new(&phi, params)?;
    let profiles = sweep.profiles(&Kind::all(), &e.name)?;
    let v = verdict(&profiles, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let pts = sample_points(&mut rng, DOMINANCE_SAMPLES, params.depth as f64);
    let margin = dominance_margin(&phi, &pts, params.depth, params.w2_angles, &params.quad)?;
    let l_final = profiles.iter().find(|p| p.kind == Kind::L).and_then(|p| p.final_value()).unwrap_or(0.0);
    let row = GalleryRow {
        name: e.name.clone(),
        expected: e.expected,
        classification: v.classification,
        matches: e.expected.matches(v.classification),
        s2_satisfied: v.s2_satisfied,
        l_final,
        w2_dominance_margin: margin,
        reason: v.reason.clone(),
        provenance: e.provenance.clone(),
    };
    Ok(GalleryResult { entry: e.clone(), profiles, verdict: v, row })
}

/// Full gallery at ladder depth `depth`.
pub fn compute_gallery(depth: usize, seed: u64) -> Result<(GallerySummary, Vec<GalleryResult>)> {
    let params = SweepParams::with_depth(depth);
    params.validate()?;
    let entries = gallery();
    let results =
        entries.par_iter().enumerate().map(|(i, e)| gallery_one(i, e, &params, seed)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<GalleryRow> = results.iter().map(|r| r.row.clone()).collect();
    let summary = GallerySummary {
        depth,
        seed,
        all_match: rows.iter().all(|r| r.matches),
        any_inconsistent: rows.iter().any(|r| r.classification == Classification::Inconsistent),
        rows,
    };
    Ok((summary, results))
}

#[derive(Debug, Clone, Serialize)]
struct EntryReport<'a> {
    entry: &'a GalleryEntry,
    verdict: &'a VerdictReport,
    w2_dominance_margin: f64,
}

/// Writes `summary.{csv,json}` and `<name>.{csv,json}` (plus `.svg` on
/// request) into `out`.
pub fn run_gallery(depth: usize, out: &Path, workers: usize, seed: u64, svg: bool) -> Result<GallerySummary> {
    if workers > MAX_WORKERS {
        return Err(Error::Config(format!("workers must be at most {MAX_WORKERS}")));
    }
    let (summary, results) = thread_pool(workers)?.install(|| compute_gallery(depth, seed))?;
    fs::create_dir_all(out)?;
    for r in &results {
        let name = &r.entry.name;
        fs::write(out.join(format!("{name}.csv")), profiles_csv(&r.profiles)?)?;
        let report =
            EntryReport { entry: &r.entry, verdict: &r.verdict, w2_dominance_margin: r.row.w2_dominance_margin };
        fs::write(out.join(format!("{name}.json")), to_json_line(&report))?;
        if svg {
            fs::write(out.join(format!("{name}.svg")), profiles_svg(name, &r.profiles))?;
        }
    }
    fs::write(out.join("summary.csv"), summary.to_csv()?)?;
    fs::write(out.join("summary.json"), to_json_line(&summary))?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecomposeMode {
    Density,
    Wik,
}

/// Input arc set: half-open arcs `[start, end)` in turns, as `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSetInput {
    pub arcs: Vec<[String; 2]>,
}

fn parse_fraction(s: &str) -> Result<[i64; 2]> {
    let r: num_rational::Ratio<i64> = s.trim().parse().map_err(|_| Error::Config(format!("bad fraction {s:?}")))?;
    Ok([*r.numer(), *r.denom()])
}

pub fn parse_lambda(s: &str) -> Result<Measure> {
    let [p, q] = parse_fraction(s)?;
    Ok(Measure::new(p as i128, q as i128))
}

pub fn parse_arcset(json: &str) -> Result<(ArcSet, bool)> {
    let input: ArcSetInput = serde_json::from_str(json)?;
    let arcs = input
        .arcs
        .iter()
        .map(|[a, b]| {
            let ([na, da], [nb, db]) = (parse_fraction(a)?, parse_fraction(b)?);
            Ok([na, da, nb, db])
        })
        .collect::<Result<Vec<_>>>()?;
    ArcSet::from_fractions(&arcs)
}

/// Wik mode needs `λ`; density mode derives `λ = 1 − |E|/2` and rejects one.
pub fn run_decompose(set_json: &str, mode: DecomposeMode, lambda: Option<Measure>) -> Result<DecompositionReport> {
    let (e, snapped) = parse_arcset(set_json)?;
    match (mode, lambda) {
        (DecomposeMode::Wik, Some(l)) => dyadic::report_wik(&e, snapped, l),
        (DecomposeMode::Wik, None) => Err(Error::Config("wik mode needs --lambda".into())),
        (DecomposeMode::Density, None) => dyadic::report_density(&e, snapped, DENSITY_MAX_K),
        (DecomposeMode::Density, Some(_)) => {
            Err(Error::Config("density mode derives λ = 1 − |E|/2; drop --lambda".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationCheck {
    pub lambda: Vec<C>,
    pub sup_lambda: f64,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeibovReport {
    pub depth: usize,
    pub seed: u64,
    pub certificate: SelectionCertificate,
    pub certificate_verified: bool,
    pub combinations: Vec<CombinationCheck>,
    pub combinations_within_bounds: bool,
}

impl LeibovReport {
    pub fn passed(&self) -> bool {
        self.certificate_verified && self.combinations_within_bounds
    }
}

/// Random finitely supported coefficients: each entry vanishes with
/// probability ⅓, and at least one is nonzero.
pub fn random_lambda(rng: &mut ChaCha8Rng, len: usize) -> Vec<C> {
    loop {
        let lambda: Vec<C> = (0..len)
            .map(|_| {
                if rng.gen_bool(1.0 / 3.0) {
                    C::default()
                } else {
                    Complex64::from_polar(rng.gen_range(0.05..=1.0), rng.gen_range(0.0..2.0 * PI))
                }
            })
            .collect();
        if lambda.iter().any(|z| z.norm() > 0.0) {
            return lambda;
        }
    }
}

/// Certificate for `b_n = 1 − 2^{-n}` plus `trials` combination checks.
pub fn run_leibov(depth: usize, trials: usize, seed: u64) -> Result<LeibovReport> {
    if !(1..=12).contains(&depth) {
        return Err(Error::Config("leibov depth must lie in 1..=12".into()));
    }
    let seq = TestSequence::dyadic(leibov::DEFAULT_SEQUENCE_LEN);
    let cert = select_subsequence(&seq, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambdas: Vec<Vec<C>> = (0..trials).map(|_| random_lambda(&mut rng, depth)).collect();
    let combinations: Vec<CombinationCheck> = lambdas
        .into_par_iter()
        .map(|lambda| {
            let sup_lambda = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
            match combination_seminorm(&cert, &lambda) {
                Ok(est) => CombinationCheck { lambda, sup_lambda, value: Some(est.value), error: None },
                Err(e) => CombinationCheck { lambda, sup_lambda, value: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(LeibovReport {
        depth,
        seed,
        certificate_verified: cert.verified(),
        combinations_within_bounds: combinations.iter().all(|c| c.error.is_none()),
        certificate: cert,
        combinations,
    })
}

/// One identity of the cross-module suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest deviation (or smallest margin, for one-sided bounds).
    pub worst: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `‖σ_{φ(a)}∘φ∘σ_a‖²` by samples, the `ρ²`-Poisson integral and Taylor
/// coefficients, for `per_symbol` random `a` with `|a| ≤ 1 − 2^{-10}`.
pub fn check_composite_routes(
    symbols: &[SelfMap],
    per_symbol: usize,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Result<IdentityCheck> {
    let cfg = QuadConfig { n0: n, ..QuadConfig::default() };
    let cases: Vec<(usize, C)> = (0..symbols.len())
        .flat_map(|s| sample_points(rng, per_symbol, 10.0).into_iter().map(move |a| (s, a)))
        .collect();
    let errs = cases
        .par_iter()
        .map(|&(s, a)| {
            let r = composite_norm_routes(symbols[s].symbol(), a, &cfg)?;
            Ok((r.direct - r.poisson).abs().max((r.direct - r.taylor).abs()).max((r.poisson - r.taylor).abs()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviation_check("composite-three-routes", &errs, ROUTES_TOL))
}

fn deviation_check(name: &str, errs: &[f64], tol: f64) -> IdentityCheck {
    IdentityCheck {
        name: name.into(),
        cases: errs.len(),
        failures: errs.iter().filter(|&&e| !(e < tol)).count(),
        worst: errs.iter().copied().fold(0.0, f64::max),
        tolerance: tol,
    }
}

/// `γ(σ_b − b, a) = √(1 − |σ_b(a)|²)` for random `a, b` with `|a|, |b| ≤ 1 − 2^{-6}`.
pub fn check_garsia_closed_form(cases: usize, rng: &mut ChaCha8Rng, cfg: &QuadConfig) -> Result<IdentityCheck> {
    let pairs: Vec<(C, C)> = (0..cases).map(|_| (point_at(rng, 6.0), point_at(rng, 6.0))).collect();
    let errs = pairs
        .par_iter()
        .map(|&(b, a)| {
            let f = Symbol::sum(vec![(c(1.0, 0.0), Symbol::moebius(b)), (c(1.0, 0.0), Symbol::constant(-b))]);
            let g = garsia_gamma(&f, &DiscPoint::interior(a)?, cfg)?.gamma;
            Ok((g - (1.0 - moebius(b, a).norm_sqr()).sqrt()).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviation_check("garsia-closed-form", &errs, ROUTES_TOL))
}

/// `N(zⁿ, w) = log(1/|w|)` for `n ≤ max_n` and random `2^{-10} < |w| < 1 − 2^{-10}`.
pub fn check_counting_power(max_n: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<IdentityCheck> {
    let ws: Vec<C> = (0..cases)
        .map(|_| {
            let m = if rng.gen_bool(0.5) {
                2f64.powf(-rng.gen_range(1.0..10.0))
            } else {
                1.0 - 2f64.powf(-rng.gen_range(1.0..10.0))
            };
            Complex64::from_polar(m, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let mut errs = Vec::with_capacity(max_n * cases);
    for n in 1..=max_n {
        let psi = to_rational(&Symbol::monomial(n))?;
        for &w in &ws {
            let got = counting_function(&psi, &DiscPoint::interior(w)?)?;
            errs.push((got.value - (1.0 / w.norm()).ln()).abs());
        }
    }
    Ok(deviation_check("counting-power", &errs, COUNTING_TOL))
}

/// Extremes of `|I(a)| · P_a(ζ)` over random `ζ ∈ I(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonRatios {
    pub cases: usize,
    pub min: f64,
    pub max: f64,
    /// Samples with ratio below ¼.
    pub below_quarter: usize,
    /// `|a|` at the minimum.
    pub argmin_modulus: f64,
}

/// `cases` pairs with `|a| = 1 − 2^{-u}`, `u` uniform on `[0, max_bits]`,
/// and `ζ` uniform on `I(a)`.
pub fn poisson_arc_ratios(cases: usize, max_bits: f64, rng: &mut ChaCha8Rng) -> PoissonRatios {
    let mut out = PoissonRatios { cases, min: f64::INFINITY, max: 0.0, below_quarter: 0, argmin_modulus: 0.0 };
    for _ in 0..cases {
        let a = point_at(rng, max_bits);
        let len = 1.0 - a.norm();
        let theta = a.arg() + 2.0 * PI * len * (rng.gen::<f64>() - 0.5);
        let ratio = len * poisson(a, Complex64::from_polar(1.0, theta));
        if ratio < out.min {
            out.min = ratio;
            out.argmin_modulus = a.norm();
        }
        out.max = out.max.max(ratio);
        out.below_quarter += (ratio < 0.25) as usize;
    }
    out
}

/// Random finite unions of dyadic arcs with endpoints down to level 20.
pub fn random_arcset(rng: &mut ChaCha8Rng) -> ArcSet {
    let pieces: Vec<(u64, u64)> = (0..rng.gen_range(0..6))
        .map(|_| {
            let level = rng.gen_range(1..=20u32);
            let unit = FULL >> level;
            let start = rng.gen_range(0..1u64 << level);
            let len = rng.gen_range(1..=((1u64 << level) - start).min(8));
            (start * unit, (start + len) * unit)
        })
        .collect();
    ArcSet::from_ticks(pieces).expect("pieces lie in [0, 1)")
}

/// Wik postconditions and density-core ratio bounds on `cases` fuzzed sets.
pub fn check_dyadic_fuzz(cases: usize, rng: &mut ChaCha8Rng) -> Result<[IdentityCheck; 2]> {
    let (mut wik_cases, mut wik_fail, mut dens_cases, mut dens_fail) = (0, 0, 0, 0);
    for _ in 0..cases {
        let e = random_arcset(rng);
        let m = e.measure();
        let lo = ((*m.numer() * 17 + *m.denom() - 1) / *m.denom()).max(1);
        if lo <= 16 {
            let lambda = Measure::new(rng.gen_range(lo..=16), 17);
            wik_cases += 1;
            let fam = dyadic::wik_decomposition(&e, lambda)?;
            wik_fail += (!dyadic::verify_wik(&e, lambda, &fam).all()) as usize;
        }
        if !e.is_empty() {
            dens_cases += 1;
            let dc = dyadic::density_core(&e)?;
            let extra: Vec<u64> = (0..16).map(|_| rng.gen_range(0..FULL)).collect();
            dens_fail += (!dyadic::verify_density(&e, &dc, DENSITY_MAX_K, &extra).all()) as usize;
        }
    }
    let exact =
        |name: &str, cases, failures| IdentityCheck { name: name.into(), cases, failures, worst: 0.0, tolerance: 0.0 };
    Ok([exact("wik-sandwich", wik_cases, wik_fail), exact("density-core-ratio", dens_cases, dens_fail)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub poisson: PoissonRatios,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

/// The cross-module identity suite at trapezoid size `n`.
pub fn run_identities(n: usize, seed: u64) -> Result<IdentityReport> {
    if !n.is_power_of_two() || !(64..=1 << 20).contains(&n) {
        return Err(Error::Config("--n must be a power of two in [64, 2^20]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = gallery().iter().map(|e| validate_self_map(&e.symbol)).collect::<Result<Vec<_>>>()?;
    let mut checks = vec![
        check_composite_routes(&symbols, 20, &mut rng, n)?,
        check_garsia_closed_form(1000, &mut rng, &QuadConfig { n0: n, ..QuadConfig::default() })?,
        check_counting_power(8, 100, &mut rng)?,
    ];
    let poisson = poisson_arc_ratios(10_000, 12.0, &mut rng);
    let sharp = poisson_arc_lower_constant();
    checks.push(IdentityCheck {
        name: "poisson-arc-upper".into(),
        cases: poisson.cases,
        failures: (poisson.max > 2.0) as usize,
        worst: poisson.max,
        tolerance: 2.0,
    });
    checks.push(IdentityCheck {
        name: "poisson-arc-lower-sharp".into(),
        cases: poisson.cases,
        failures: (poisson.min < sharp - 1e-12) as usize,
        worst: poisson.min,
        tolerance: sharp,
    });
    checks.extend(check_dyadic_fuzz(1000, &mut rng)?);
    Ok(IdentityReport { n, seed, checks, poisson })
}
