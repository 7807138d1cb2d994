//! Named numerical suites. Each suite checks one statement about the family
//! over deterministic samples and returns a [`VerificationReport`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    boettcher_value, internal_ray_point, phi_j, superattracting_coefficient, SliceSpec,
    DEFAULT_BOETTCHER_EPS,
};
use crate::geometry::{
    center_a_k, ellipse_margin_minimizer, ellipse_margin_poly, k_annulus, m_annulus, regime_thresholds,
    spine_point, subfamily_b_bounds, v_minus_bound_near_eighth, v_minus_bound_near_eighth_limit, EllipseSpec,
    GeometryError, PolarRegion, SpineOrder,
};
use crate::maps::MapParams;
use crate::render::{classify_grid, PlaneKind, PlaneSpec, Viewport};

pub const DEFAULT_SEED: u64 = 0x6d63_6d75_6c6c_656e;
pub const REPORT_SCHEMA: &str =
    "# mcmullen-report v1: one record per line; kinds suite|statement|residual|note|timing|case; fields key=value; reals carry 17 significant digits";

/// Seeds of a bounded-orbit test count as bounded when they stay below this
/// modulus.
pub const ORBIT_BAILOUT: f64 = 1e8;
/// Extra steps after the checked window that an orbit must also survive.
pub const ESCAPE_TAIL: u32 = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("bad configuration: {0}")]
    BadConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SuiteId {
    CriticalParity,
    CPatterns,
    Involution,
    SizeOfB,
    KAnnulus,
    Regime,
    Spine,
    Ellipse,
    UEllipse,
    LnTable,
    MAnnulus,
    MDisk,
    Boettcher,
    RayDoubling,
    PhiCenters,
    PhiInjectivity,
}

impl SuiteId {
    pub const ALL: [SuiteId; 16] = [
        SuiteId::CriticalParity,
        SuiteId::CPatterns,
        SuiteId::Involution,
        SuiteId::SizeOfB,
        SuiteId::KAnnulus,
        SuiteId::Regime,
        SuiteId::Spine,
        SuiteId::Ellipse,
        SuiteId::UEllipse,
        SuiteId::LnTable,
        SuiteId::MAnnulus,
        SuiteId::MDisk,
        SuiteId::Boettcher,
        SuiteId::RayDoubling,
        SuiteId::PhiCenters,
        SuiteId::PhiInjectivity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SuiteId::CriticalParity => "critical-parity",
            SuiteId::CPatterns => "c-patterns",
            SuiteId::Involution => "involution",
            SuiteId::SizeOfB => "sizeofb",
            SuiteId::KAnnulus => "k-annulus",
            SuiteId::Regime => "regime",
            SuiteId::Spine => "spine",
            SuiteId::Ellipse => "ellipse",
            SuiteId::UEllipse => "u-ellipse",
            SuiteId::LnTable => "Ln-table",
            SuiteId::MAnnulus => "m-annulus",
            SuiteId::MDisk => "m-disk",
            SuiteId::Boettcher => "boettcher",
            SuiteId::RayDoubling => "ray-doubling",
            SuiteId::PhiCenters => "phi-centers",
            SuiteId::PhiInjectivity => "phi-injectivity",
        }
    }

    pub fn parse(s: &str) -> Result<SuiteId, VerifyError> {
        SuiteId::ALL
            .iter()
            .copied()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }

    /// The statement the suite checks, in words.
    pub fn statement(&self) -> &'static str {
        match self {
            SuiteId::CriticalParity => "critical points w_k with k even map to v+, with k odd to v-",
            SuiteId::CPatterns => "at a_k the critical value v- is fixed for odd k and maps to v+ for even k",
            SuiteId::Involution => "R(h_a(z)) = R(z) for the involution h_a(z) = a^(1/n)/z",
            SuiteId::SizeOfB => "| |a|^(1/2n) - 2|a|^(1/2) | <= |b_n0(a)| <= sqrt(4|a| + |a|^(1/n))",
            SuiteId::KAnnulus => "bounded orbits of the subfamily with |a| < 1 stay in A(|a|^(1/n)/2, 2)",
            SuiteId::Regime => "q_n increases in (3.6, 4) and rho_n decreases, where h_n(q_n) = 4 and h_n(rho_n) = rho_n",
            SuiteId::Spine => "the spine has |v-| = 1; its limit cardioid has a cusp at 0 and real maximum 1/4",
            SuiteId::Ellipse => "if |v-| <= 2 then the closed disk of radius 2 lies inside the ellipse E",
            SuiteId::UEllipse => "R maps the polar rectangle U'_(a,k) into the half of E around v+ (k even) or v- (k odd)",
            SuiteId::LnTable => "|v-| < L(n) whenever |a - 1/8| < 1/32, with L(n) under the tabulated bounds",
            SuiteId::MAnnulus => "the boundedness locus lies in the annulus 0.028 < |a - 1/8| < 0.40 (large n)",
            SuiteId::MDisk => "the boundedness locus lies in the disk |a| < 1/2 + 0.01 (large n)",
            SuiteId::Boettcher => "near v+ the subfamily is conjugate to w -> w^2 by the Boettcher coordinate",
            SuiteId::RayDoubling => "internal rays satisfy r(Gamma_rho(t)) = Gamma_(rho^2)(2t)",
            SuiteId::PhiCenters => "Phi_j vanishes at the center a_(2j) of its component",
            SuiteId::PhiInjectivity => "Phi_j takes pairwise distinct values in the open unit disk on its component",
        }
    }

    pub fn residual_definition(&self) -> &'static str {
        match self {
            SuiteId::CriticalParity => "max over k of |R(w_k) - v_parity| / (1 + |v_parity|)",
            SuiteId::CPatterns => "|r(v-) - target| / (1 + |target|), target v- for odd k and v+ for even k",
            SuiteId::Involution => "|R(h_a(z)) - R(z)| / (1 + |R(z)|)",
            SuiteId::SizeOfB => "largest excess of |b| past either bound, divided by 1 + |b|",
            SuiteId::KAnnulus => "number of iterates of bounded seeds outside the annulus",
            SuiteId::Regime => "|h_n(x) - target| at the computed root; ordering cases give the size of any violation",
            SuiteId::Spine => "max | |v-(a)| - 1 | over samples; cardioid cases give distance to the stated value",
            SuiteId::Ellipse => "largest focal-distance sum over 2*semi_major (inside when below 1); g_n cases give -min g_n",
            SuiteId::UEllipse => "count of sampled images outside E or on the wrong side of the minor axis",
            SuiteId::LnTable => "L(n) against the tabulated bound; sampled cases give max |v-| / L(n)",
            SuiteId::MAnnulus => "number of bounded grid parameters outside the annulus",
            SuiteId::MDisk => "number of bounded grid parameters outside the disk",
            SuiteId::Boettcher => "max |phi(r(z)) - phi(z)^2| over basin samples; |Phi_j(center)|; relative c2 error",
            SuiteId::RayDoubling => "|r(Gamma_rho(t)) - Gamma_(rho^2)(2t)|, and |phi(Gamma_rho(t)) - rho e^(2 pi i t)|",
            SuiteId::PhiCenters => "|Phi_j(a_(2j))|",
            SuiteId::PhiInjectivity => "1e-9 over the smallest pairwise distance of Phi_j values (distinct when below 1)",
        }
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self, SuiteId::MAnnulus | SuiteId::MDisk)
    }

    fn default_n_range(&self) -> (u32, u32) {
        match self {
            SuiteId::Regime | SuiteId::Ellipse => (3, 12),
            SuiteId::MAnnulus => (20, 20),
            SuiteId::MDisk => (8, 12),
            SuiteId::Boettcher | SuiteId::RayDoubling => (4, 6),
            SuiteId::PhiInjectivity => (4, 5),
            _ => (3, 8),
        }
    }

    fn default_samples(&self) -> usize {
        match self {
            SuiteId::Involution => 10_000,
            SuiteId::KAnnulus => 12,
            SuiteId::PhiInjectivity => 500,
            SuiteId::Boettcher => 100,
            _ => 200,
        }
    }

    fn default_grid(&self) -> usize {
        match self {
            SuiteId::MAnnulus => 400,
            SuiteId::MDisk => 200,
            _ => 80,
        }
    }

    fn default_max_iter(&self) -> u32 {
        match self {
            SuiteId::KAnnulus => 500,
            _ => 512,
        }
    }
}

/// Suite inputs. Unset fields fall back to per-suite defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub n_range: Option<(u32, u32)>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub max_iter: Option<u32>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_range: None,
            samples: None,
            grid: None,
            max_iter: None,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
struct Resolved {
    n_lo: u32,
    n_hi: u32,
    samples: usize,
    grid: usize,
    max_iter: u32,
    seed: u64,
}

impl SuiteConfig {
    fn resolve(&self, id: SuiteId) -> Result<Resolved, VerifyError> {
        let (n_lo, n_hi) = self.n_range.unwrap_or_else(|| id.default_n_range());
        if n_lo < 3 || n_lo > n_hi {
            return Err(VerifyError::BadConfig("n range must satisfy 3 <= lo <= hi"));
        }
        let r = Resolved {
            n_lo,
            n_hi,
            samples: self.samples.unwrap_or_else(|| id.default_samples()),
            grid: self.grid.unwrap_or_else(|| id.default_grid()),
            max_iter: self.max_iter.unwrap_or_else(|| id.default_max_iter()),
            seed: self.seed,
        };
        if r.samples == 0 || r.grid == 0 || r.max_iter == 0 {
            return Err(VerifyError::BadConfig("samples, grid and max_iter must be positive"));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRecord {
    /// Input summary; cases are sorted by this key.
    pub key: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite_id: String,
    pub statement: String,
    pub residual_definition: String,
    pub empirical: bool,
    pub config: String,
    pub notes: Vec<String>,
    pub cases: Vec<CaseRecord>,
    pub max_residual: f64,
    pub passed: bool,
    pub runtime_ms: u64,
}

/// Reals with 17 significant digits, which round-trip through parsing.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Double-quoted, with backslashes and quotes escaped.
pub fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl VerificationReport {
    /// Line records without the schema header. Timing is opt-in since it is
    /// the only field that varies between identical runs.
    pub fn to_text(&self, timing: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "suite id={} empirical={} passed={} max_residual={} cases={} config={}",
            self.suite_id,
            self.empirical,
            self.passed,
            fmt_real(self.max_residual),
            self.cases.len(),
            quote(&self.config)
        );
        let _ = writeln!(out, "statement suite={} text={}", self.suite_id, quote(&self.statement));
        let _ = writeln!(out, "residual suite={} text={}", self.suite_id, quote(&self.residual_definition));
        for note in &self.notes {
            let _ = writeln!(out, "note suite={} text={}", self.suite_id, quote(note));
        }
        if timing {
            let _ = writeln!(out, "timing suite={} runtime_ms={}", self.suite_id, self.runtime_ms);
        }
        for c in &self.cases {
            let _ = writeln!(
                out,
                "case suite={} key={} residual={} tolerance={} pass={}",
                self.suite_id,
                quote(&c.key),
                fmt_real(c.residual),
                fmt_real(c.tolerance),
                c.pass
            );
        }
        out
    }
}

/// Schema header followed by every report.
pub fn reports_to_text(reports: &[VerificationReport], timing: bool) -> String {
    let mut out = String::from(REPORT_SCHEMA);
    out.push('\n');
    for r in reports {
        out.push_str(&r.to_text(timing));
    }
    out
}

#[derive(Default)]
struct Collector {
    cases: Vec<CaseRecord>,
    notes: Vec<String>,
}

impl Collector {
    /// Case passing when `residual < tolerance`.
    fn below(&mut self, key: String, residual: f64, tolerance: f64) {
        let pass = residual < tolerance;
        self.push(key, residual, tolerance, pass);
    }

    fn push(&mut self, key: String, residual: f64, tolerance: f64, pass: bool) {
        self.cases.push(CaseRecord {
            key,
            residual,
            tolerance,
            pass,
        });
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
}

pub fn run_suite_named(name: &str, config: &SuiteConfig) -> Result<VerificationReport, VerifyError> {
    run_suite(SuiteId::parse(name)?, config)
}

pub fn run_suite(id: SuiteId, config: &SuiteConfig) -> Result<VerificationReport, VerifyError> {
    let cfg = config.resolve(id)?;
    let start = Instant::now();
    let mut col = Collector::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match id {
        SuiteId::CriticalParity => critical_parity(&cfg, &mut rng, &mut col),
        SuiteId::CPatterns => c_patterns(&cfg, &mut col),
        SuiteId::Involution => involution(&cfg, &mut rng, &mut col),
        SuiteId::SizeOfB => size_of_b(&cfg, &mut rng, &mut col),
        SuiteId::KAnnulus => k_annulus_suite(&cfg, &mut rng, &mut col),
        SuiteId::Regime => regime(&cfg, &mut col),
        SuiteId::Spine => spine(&cfg, &mut col),
        SuiteId::Ellipse => ellipse(&cfg, &mut rng, &mut col),
        SuiteId::UEllipse => u_ellipse(&cfg, &mut rng, &mut col),
        SuiteId::LnTable => ln_table(&cfg, &mut rng, &mut col),
        SuiteId::MAnnulus => m_annulus_suite(&cfg, &mut col),
        SuiteId::MDisk => m_disk(&cfg, &mut col),
        SuiteId::Boettcher => boettcher(&cfg, &mut rng, &mut col),
        SuiteId::RayDoubling => ray_doubling(&cfg, &mut col),
        SuiteId::PhiCenters => phi_centers(&cfg, &mut col),
        SuiteId::PhiInjectivity => phi_injectivity(&cfg, &mut col),
    }
    let mut cases = col.cases;
    cases.sort_by(|a, b| a.key.cmp(&b.key));
    let max_residual = cases.iter().map(|c| c.residual).fold(f64::NEG_INFINITY, f64::max);
    let passed = !cases.is_empty() && cases.iter().all(|c| c.pass);
    let mut notes = col.notes;
    if id.is_empirical() {
        notes.insert(0, "EMPIRICAL: checked on a finite grid for the listed n only".to_string());
    }
    Ok(VerificationReport {
        suite_id: id.name().to_string(),
        statement: id.statement().to_string(),
        residual_definition: id.residual_definition().to_string(),
        empirical: id.is_empirical(),
        config: format!(
            "n={}:{} samples={} grid={} max_iter={} seed={}",
            cfg.n_lo, cfg.n_hi, cfg.samples, cfg.grid, cfg.max_iter, cfg.seed
        ),
        notes,
        cases,
        max_residual,
        passed,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn random_modulus_arg(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    let r = rng.gen_range(lo..=hi);
    let theta = rng.gen_range(-PI..PI);
    Complex64::from_polar(r, theta)
}

fn random_disk(rng: &mut ChaCha8Rng, center: Complex64, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    center + Complex64::from_polar(r, rng.gen_range(-PI..PI))
}

/// Even indices among `n - 1, n, n + 1`.
pub fn middle_even_centers(n: u32) -> Vec<u32> {
    [n - 1, n, n + 1].into_iter().filter(|k| k % 2 == 0).collect()
}

fn critical_parity(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.samples {
            let a = random_modulus_arg(rng, 0.01, 4.0);
            let b = random_disk(rng, Complex64::new(0.0, 0.0), 2.0);
            let p = MapParams::general(n, a, b).expect("nonzero a");
            let set = p.critical_set();
            for (k, w) in set.points.iter().enumerate() {
                let target = if k % 2 == 0 { set.v_plus } else { set.v_minus };
                let r = (p.step(*w) - target).norm() / (1.0 + target.norm());
                worst = worst.max(r);
            }
        }
        col.below(format!("n={n:03}"), worst, 1e-9);
    }
}

fn c_patterns(cfg: &Resolved, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        for k in 1..2 * n {
            let a = center_a_k(n, k).expect("k in range");
            let p = MapParams::subfamily(n, a).expect("nonzero center");
            let target = if k % 2 == 1 { p.v_minus() } else { p.v_plus() };
            let r = (p.step(p.v_minus()) - target).norm() / (1.0 + target.norm());
            col.below(format!("n={n:03} k={k:03}"), r, 1e-9);
        }
    }
    if (cfg.n_lo..=cfg.n_hi).contains(&3) {
        let p = MapParams::general(3, Complex64::new(0.125, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        let vm = p.v_minus();
        col.below("n=003 exact a=1/8 b=0".to_string(), (p.step(vm) - vm).norm(), 1e-12);
    }
}

fn involution(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    let mut worst = vec![0.0f64; (cfg.n_hi - cfg.n_lo + 1) as usize];
    for _ in 0..cfg.samples {
        let n = rng.gen_range(cfg.n_lo..=cfg.n_hi);
        let a = random_modulus_arg(rng, 0.01, 4.0);
        let b = random_disk(rng, Complex64::new(0.0, 0.0), 2.0);
        let p = MapParams::general(n, a, b).unwrap();
        let scale = a.norm().powf(1.0 / (2 * n) as f64);
        let z = random_modulus_arg(rng, 0.5 * scale, 2.0 * scale);
        let rz = p.step(z);
        let rh = p.step(p.involution(z).unwrap());
        let slot = &mut worst[(n - cfg.n_lo) as usize];
        *slot = slot.max((rh - rz).norm() / (1.0 + rz.norm()));
    }
    for (i, w) in worst.into_iter().enumerate() {
        col.below(format!("n={:03}", cfg.n_lo + i as u32), w, 1e-9);
    }
}

fn size_of_b(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.samples {
            let a = random_modulus_arg(rng, 1e-4, 16.0);
            let p = MapParams::subfamily(n, a).unwrap();
            let b = p.b().norm();
            let (lo, hi) = subfamily_b_bounds(n, a.norm());
            worst = worst.max((lo - b).max(b - hi).max(0.0) / (1.0 + b));
        }
        col.below(format!("n={n:03}"), worst, 1e-12);
    }
}

/// Whether the orbit of `z` stays below [`ORBIT_BAILOUT`] for `steps` plus
/// [`ESCAPE_TAIL`] iterations, with the number of iterates among the first
/// `steps + 1` (seed included) that fall outside `annulus`.
pub fn bounded_orbit_annulus_violations(
    p: &MapParams,
    z: Complex64,
    steps: u32,
    annulus: &crate::geometry::AnnulusBounds,
) -> (bool, u32) {
    let mut z = z;
    let mut outside = 0;
    for k in 0..=steps + ESCAPE_TAIL {
        let r = z.norm();
        if !r.is_finite() || !(1e-300..=ORBIT_BAILOUT).contains(&r) {
            return (false, outside);
        }
        if k <= steps && !annulus.contains(z) {
            outside += 1;
        }
        z = p.step(z);
    }
    (true, outside)
}

/// Counts violations over a `grid × grid` lattice on `[-2.2, 2.2]²`.
pub fn k_annulus_grid_check(p: &MapParams, grid: usize, steps: u32) -> (usize, u64) {
    let annulus = k_annulus(p);
    let vp = Viewport::square(Complex64::new(0.0, 0.0), 4.4, grid).expect("positive grid");
    (0..grid)
        .into_par_iter()
        .map(|j| {
            let mut bounded = 0usize;
            let mut viol = 0u64;
            for i in 0..grid {
                let (b, out) = bounded_orbit_annulus_violations(p, vp.pixel_to_plane(i, j), steps, &annulus);
                if b {
                    bounded += 1;
                    viol += out as u64;
                }
            }
            (bounded, viol)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
}

fn k_annulus_suite(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    let mut total_bounded = 0;
    for s in 0..cfg.samples {
        let n = rng.gen_range(cfg.n_lo..=cfg.n_hi);
        let a = random_disk(rng, Complex64::new(0.0, 0.0), 1.0);
        let p = MapParams::subfamily(n, a).unwrap();
        let (bounded, viol) = k_annulus_grid_check(&p, cfg.grid, cfg.max_iter);
        total_bounded += bounded;
        col.push(
            format!("param={s:04} n={n:03} a=({},{})", fmt_real(a.re), fmt_real(a.im)),
            viol as f64,
            0.0,
            viol == 0,
        );
    }
    col.note(format!(
        "{total_bounded} bounded seeds; an orbit counts as bounded when it stays under {} for max_iter + {ESCAPE_TAIL} steps",
        fmt_real(ORBIT_BAILOUT)
    ));
}

fn regime(cfg: &Resolved, col: &mut Collector) {
    let mut prev: Option<(f64, f64)> = None;
    let q_limit = 15.0 / 4.0;
    let rho_limit = 2.0 + 5f64.sqrt();
    for n in cfg.n_lo..=cfg.n_hi {
        let t = regime_thresholds(n).expect("n >= 3");
        let h = |x: f64| crate::geometry::h_n(n, x);
        col.below(format!("n={n:03} h(q)=4"), (h(t.q_n) - 4.0).abs(), 1e-9);
        col.below(format!("n={n:03} h(rho)=rho"), (h(t.rho_n) - t.rho_n).abs(), 1e-9);
        let in_range = 3.6 < t.q_n && t.q_n < 4.0 && 4.0 < t.rho_n && t.rho_n < 4.4;
        col.push(format!("n={n:03} ranges"), 0.0, 0.0, in_range);
        let limits = t.q_n < q_limit && t.rho_n > rho_limit;
        col.push(format!("n={n:03} limits"), (t.q_n - q_limit).max(rho_limit - t.rho_n), 0.0, limits);
        if let Some((q, rho)) = prev {
            let ok = t.q_n > q && t.rho_n < rho;
            col.push(format!("n={n:03} monotone"), (q - t.q_n).max(t.rho_n - rho).max(0.0), 0.0, ok);
        }
        if n == 3 {
            col.below("n=003 q matches 3.6163".to_string(), (t.q_n - 3.6163).abs(), 5e-4);
            col.below("n=003 rho matches 4.3739".to_string(), (t.rho_n - 4.3739).abs(), 5e-4);
        }
        prev = Some((t.q_n, t.rho_n));
    }
    col.note(format!(
        "limits as n grows: q_n -> 15/4, rho_n -> 2 + sqrt(5) = {}",
        fmt_real(rho_limit)
    ));
}

fn spine(cfg: &Resolved, col: &mut Collector) {
    let samples = cfg.samples;
    for n in cfg.n_lo..=cfg.n_hi {
        let mut worst: f64 = 0.0;
        let (mut kept, mut off, mut cycled, mut failed) = (0, 0, 0, 0);
        for i in 0..samples {
            let theta = 2.0 * PI * i as f64 / samples as f64;
            match spine_point(SpineOrder::Finite(n), theta) {
                Ok(a) => {
                    let p = MapParams::subfamily(n, a).unwrap();
                    worst = worst.max((p.v_minus().norm() - 1.0).abs());
                    kept += 1;
                }
                Err(GeometryError::OffBranch { .. }) => off += 1,
                Err(GeometryError::NoConvergence { .. }) => cycled += 1,
                Err(_) => failed += 1,
            }
        }
        col.push(format!("n={n:03}"), worst, 1e-8, worst < 1e-8 && failed == 0 && kept > 0);
        col.note(format!(
            "n={n}: {kept} of {samples} angles solved, {off} on the other branch, {cycled} cycling across the cut"
        ));
    }
    let zero = spine_point(SpineOrder::Infinite, 0.0).unwrap();
    col.below("limit theta=0 is 1/4".to_string(), (zero - 0.25).norm(), 1e-15);
    let cusp = spine_point(SpineOrder::Infinite, PI).unwrap();
    col.below("limit theta=pi is 0".to_string(), cusp.norm(), 1e-15);
    let max_re = (0..samples)
        .map(|i| spine_point(SpineOrder::Infinite, 2.0 * PI * i as f64 / samples as f64).unwrap().re)
        .fold(f64::NEG_INFINITY, f64::max);
    col.push("limit real maximum".to_string(), (max_re - 0.25).abs(), 1e-15, max_re <= 0.25 + 1e-15);
}

fn ellipse(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        let mut min_g = f64::INFINITY;
        for i in 1..=cfg.samples {
            let x = 4.0 * i as f64 / cfg.samples as f64;
            min_g = min_g.min(ellipse_margin_poly(n, x));
        }
        let xn = ellipse_margin_minimizer(n);
        min_g = min_g.min(ellipse_margin_poly(n, xn));
        col.push(format!("n={n:03} g_n positive"), -min_g, 0.0, min_g > 0.0);
        let dg = |x: f64| 2.0 * n as f64 * x.powi(2 * n as i32 - 1) - 2f64.powi(n as i32 - 1);
        let sign_change = dg(xn - 1e-6) < 0.0 && dg(xn + 1e-6) > 0.0;
        col.push(format!("n={n:03} g_n minimizer"), dg(xn).abs(), 0.0, sign_change);

        let mut worst_ratio: f64 = 0.0;
        let mut worst_focal: f64 = 0.0;
        let mut used = 0;
        while used < cfg.samples {
            let a = random_disk(rng, Complex64::new(0.0, 0.0), 4.0);
            let Ok(p) = MapParams::subfamily(n, a) else { continue };
            if p.v_minus().norm() > 2.0 {
                continue;
            }
            used += 1;
            let e = EllipseSpec::for_map(&p);
            // The axes differ by 2|a|/2^n, far below the resolution of 2^n.
            let gap = 2.0 * a.norm() / 2f64.powi(n as i32);
            let focal = (gap * (e.semi_major + e.semi_minor)).sqrt();
            worst_focal = worst_focal.max((focal - 2.0 * a.norm().sqrt()).abs() / focal);
            for m in 0..64 {
                let z = Complex64::from_polar(2.0, 2.0 * PI * m as f64 / 64.0);
                let sum = (z - e.foci.0).norm() + (z - e.foci.1).norm();
                worst_ratio = worst_ratio.max(sum / (2.0 * e.semi_major));
            }
        }
        col.below(format!("n={n:03} disk inside E"), worst_ratio, 1.0);
        col.below(format!("n={n:03} focal distance"), worst_focal, 1e-9);
    }
    col.note("semi-axes 2^n + |a|/2^n and 2^n - |a|/2^n, the pair whose foci are the critical values".to_string());
}

fn u_ellipse(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        let mut bad = 0u32;
        for _ in 0..cfg.samples {
            let a = random_modulus_arg(rng, 0.01, 2.0);
            let b = random_disk(rng, Complex64::new(0.0, 0.0), 1.0);
            let p = MapParams::general(n, a, b).unwrap();
            let e = EllipseSpec::for_map(&p);
            let k = rng.gen_range(0..2 * n);
            let region = PolarRegion::new(n, a, k).unwrap();
            let (lo, hi) = (region.modulus_lo, region.modulus_hi);
            let r = lo + (hi - lo) * rng.gen_range(0.01..0.99);
            let arg = region.arg_center + region.arg_half_width * rng.gen_range(-0.98..0.98);
            let z = Complex64::from_polar(r, arg);
            let w = p.step(z);
            let (near, far) = if k % 2 == 0 { (p.v_plus(), p.v_minus()) } else { (p.v_minus(), p.v_plus()) };
            if !e.contains(w) || (w - near).norm() > (w - far).norm() {
                bad += 1;
            }
        }
        col.push(format!("n={n:03}"), bad as f64, 0.0, bad == 0);
    }
}

/// The tabulated upper bounds for `L(n)`; `None` stands for the limit.
pub const LN_TABLE: [(Option<u32>, f64); 11] = [
    (Some(3), 0.95),
    (Some(4), 0.87),
    (Some(5), 0.82),
    (Some(6), 0.8),
    (Some(7), 0.77),
    (Some(10), 0.73),
    (Some(15), 0.7),
    (Some(25), 0.66),
    (Some(50), 0.64),
    (Some(100), 0.63),
    (None, 0.62),
];

fn ln_table(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    for (n, bound) in LN_TABLE {
        let (label, l) = match n {
            Some(n) => (format!("{n:03}"), v_minus_bound_near_eighth(n)),
            None => ("inf".to_string(), v_minus_bound_near_eighth_limit()),
        };
        col.below(format!("n={label} L(n) < {bound}"), l, bound);
        if let Some(n) = n {
            let mut worst: f64 = 0.0;
            for _ in 0..cfg.samples {
                let a = random_disk(rng, Complex64::new(0.125, 0.0), 1.0 / 32.0);
                let p = MapParams::subfamily(n, a).unwrap();
                worst = worst.max(p.v_minus().norm() / l);
            }
            col.below(format!("n={label} sampled |v-| / L(n)"), worst, 1.0);
        }
    }
}

/// Bounded parameters of the fixed-critical slice of degree `n` on a
/// `grid × grid` window of half-width `half` centered at 0.
pub fn bounded_parameters(n: u32, grid: usize, half: f64, max_iter: u32) -> Vec<Complex64> {
    let spec = PlaneSpec::new(PlaneKind::ParameterSlice(SliceSpec::FixedCrit { n }), max_iter);
    let vp = Viewport::square(Complex64::new(0.0, 0.0), 2.0 * half, grid).expect("positive grid");
    let g = classify_grid(&spec, &vp);
    let mut out = Vec::new();
    for j in 0..grid {
        for i in 0..grid {
            if g.get(i, j).is_bounded() {
                out.push(vp.pixel_to_plane(i, j));
            }
        }
    }
    out
}

/// Annulus radii used by the empirical containment check.
pub const M_ANNULUS_RADII: (f64, f64) = (0.028, 0.40);
/// Parameters with `|a|` above this are not examined by the annulus check.
pub const M_ANNULUS_WINDOW: f64 = 0.6;
pub const M_DISK_RADIUS: f64 = 0.51;

fn m_annulus_suite(cfg: &Resolved, col: &mut Collector) {
    let ann = m_annulus(M_ANNULUS_RADII.0, M_ANNULUS_RADII.1);
    let mut holds_from: Option<u32> = None;
    for n in cfg.n_lo..=cfg.n_hi {
        let pts: Vec<_> = bounded_parameters(n, cfg.grid, M_ANNULUS_WINDOW, cfg.max_iter)
            .into_iter()
            .filter(|a| a.norm() <= M_ANNULUS_WINDOW)
            .collect();
        let viol = pts.iter().filter(|a| !ann.contains(**a)).count();
        col.push(format!("n={n:03}"), viol as f64, 0.0, viol == 0);
        col.note(format!("n={n}: {} bounded grid parameters", pts.len()));
        if viol == 0 {
            holds_from.get_or_insert(n);
        } else {
            holds_from = None;
        }
    }
    match holds_from {
        Some(n) => col.note(format!("containment holds for every checked n from {n}")),
        None => col.note("containment fails at the largest checked n".to_string()),
    }
}

fn m_disk(cfg: &Resolved, col: &mut Collector) {
    let mut holds_from: Option<u32> = None;
    for n in cfg.n_lo..=cfg.n_hi {
        let pts = bounded_parameters(n, cfg.grid, 1.1, cfg.max_iter);
        let viol = pts.iter().filter(|a| a.norm() >= M_DISK_RADIUS).count();
        col.push(format!("n={n:03}"), viol as f64, 0.0, viol == 0);
        if viol == 0 {
            holds_from.get_or_insert(n);
        } else {
            holds_from = None;
        }
    }
    match holds_from {
        Some(n) => col.note(format!("containment holds for every checked n from {n}")),
        None => col.note("containment fails at the largest checked n".to_string()),
    }
}

/// Largest `|φ(r(z)) - φ(z)²|` over `samples` random points of the basin near
/// `v_plus` with `|φ(z)| ≤ 0.95`, and the number of points used.
pub fn boettcher_functional_residual(p: &MapParams, samples: usize, rng: &mut ChaCha8Rng) -> (f64, usize) {
    let vp = p.v_plus();
    let mut used = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while used < samples && attempts < 100 * samples {
        attempts += 1;
        let z = random_disk(rng, vp, 0.5 * vp.norm());
        let Ok(phi) = boettcher_value(p, z, DEFAULT_BOETTCHER_EPS) else { continue };
        if phi.modulus > 0.95 {
            continue;
        }
        let Ok(next) = boettcher_value(p, p.step(z), DEFAULT_BOETTCHER_EPS) else { continue };
        used += 1;
        worst = worst.max((next.value - phi.value * phi.value).norm());
    }
    (worst, used)
}

/// Relative gap between `c₂` and the central second difference of `r` at
/// `v_plus`.
pub fn c2_finite_difference_error(p: &MapParams) -> f64 {
    let vp = p.v_plus();
    let h = 1e-4 * vp.norm();
    let second = (p.step(vp + h) - 2.0 * p.step(vp) + p.step(vp - h)) / (h * h);
    let c2 = superattracting_coefficient(p);
    (second / 2.0 - c2).norm() / c2.norm()
}

fn boettcher(cfg: &Resolved, rng: &mut ChaCha8Rng, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        for k in middle_even_centers(n) {
            let a = center_a_k(n, k).unwrap();
            let p = MapParams::subfamily(n, a).unwrap();
            let (worst, used) = boettcher_functional_residual(&p, cfg.samples, rng);
            col.push(
                format!("n={n:03} k={k:03} functional equation"),
                worst,
                1e-6,
                worst < 1e-6 && used == cfg.samples,
            );
            let phi = phi_j(n, k / 2, a).map(|v| v.value.norm()).unwrap_or(f64::INFINITY);
            col.below(format!("n={n:03} k={k:03} Phi at center"), phi, 1e-8);
            col.below(format!("n={n:03} k={k:03} c2 finite difference"), c2_finite_difference_error(&p), 1e-6);
        }
    }
}

pub const RAY_ANGLES: [(u32, u32); 5] = [(0, 1), (1, 8), (1, 3), (1, 2), (5, 7)];
pub const RAY_RADIUS: f64 = 0.9;
pub const RAY_DEPTH: u32 = 10;

/// `|r(Γ_ρ(t)) - Γ_{ρ²}(2t)|` and `|φ(Γ_ρ(t)) - ρ e^{2πit}|`.
pub fn ray_residuals(p: &MapParams, t: f64, rho: f64, m: u32) -> (f64, f64) {
    let here = internal_ray_point(p, t, rho, m);
    let there = internal_ray_point(p, (2.0 * t).fract(), rho * rho, m - 1);
    let (Ok(z), Ok(w)) = (here, there) else {
        return (f64::INFINITY, f64::INFINITY);
    };
    let doubling = (p.step(z) - w).norm();
    let round_trip = boettcher_value(p, z, DEFAULT_BOETTCHER_EPS)
        .map(|v| (v.value - Complex64::from_polar(rho, 2.0 * PI * t)).norm())
        .unwrap_or(f64::INFINITY);
    (doubling, round_trip)
}

fn ray_doubling(cfg: &Resolved, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        for k in middle_even_centers(n) {
            let p = MapParams::subfamily(n, center_a_k(n, k).unwrap()).unwrap();
            for (num, den) in RAY_ANGLES {
                let t = num as f64 / den as f64;
                let (d, r) = ray_residuals(&p, t, RAY_RADIUS, RAY_DEPTH);
                col.below(format!("n={n:03} k={k:03} t={num}/{den} doubling"), d, 1e-6);
                col.below(format!("n={n:03} k={k:03} t={num}/{den} round trip"), r, 1e-6);
            }
        }
    }
}

fn phi_centers(cfg: &Resolved, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        for j in 1..n {
            let a = center_a_k(n, 2 * j).unwrap();
            let r = phi_j(n, j, a).map(|v| v.value.norm()).unwrap_or(f64::INFINITY);
            col.below(format!("n={n:03} j={j:03}"), r, 1e-8);
        }
    }
}

/// `Φ_j` on a polar grid of `samples` points around `a_{2j}`, shrinking the
/// grid until every point lies in the component.
pub fn phi_grid_values(n: u32, j: u32, samples: usize) -> Option<Vec<Complex64>> {
    let center = center_a_k(n, 2 * j).ok()?;
    let rings = (samples as f64).sqrt().floor().max(1.0) as usize;
    let spokes = samples.div_ceil(rings);
    let mut radius = 0.25 * center.norm();
    for _ in 0..20 {
        let mut values = Vec::with_capacity(samples);
        'grid: for ring in 0..rings {
            for spoke in 0..spokes {
                if values.len() == samples {
                    break 'grid;
                }
                let r = radius * (ring + 1) as f64 / rings as f64;
                let theta = 2.0 * PI * (spoke as f64 + 0.5 * (ring % 2) as f64) / spokes as f64;
                match phi_j(n, j, center + Complex64::from_polar(r, theta)) {
                    Ok(v) => values.push(v.value),
                    Err(_) => break 'grid,
                }
            }
        }
        if values.len() == samples {
            return Some(values);
        }
        radius /= 2.0;
    }
    None
}

fn phi_injectivity(cfg: &Resolved, col: &mut Collector) {
    for n in cfg.n_lo..=cfg.n_hi {
        for j in 1..n {
            let key = format!("n={n:03} j={j:03}");
            let Some(values) = phi_grid_values(n, j, cfg.samples) else {
                col.push(key, f64::INFINITY, 1.0, false);
                continue;
            };
            let mut min_gap = f64::INFINITY;
            for (i, u) in values.iter().enumerate() {
                for v in &values[i + 1..] {
                    min_gap = min_gap.min((u - v).norm());
                }
            }
            let inside = values.iter().all(|v| v.norm() < 1.0);
            let ratio = 1e-9 / min_gap;
            col.push(key, ratio, 1.0, ratio < 1.0 && inside);
        }
    }
    col.note("injectivity is sampled only; surjectivity onto the disk is not checked".to_string());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: SuiteId) -> SuiteConfig {
        SuiteConfig {
            samples: Some(match id {
                SuiteId::Involution => 500,
                SuiteId::KAnnulus => 2,
                SuiteId::Boettcher => 20,
                SuiteId::PhiInjectivity => 100,
                _ => 40,
            }),
            grid: Some(match id {
                SuiteId::MAnnulus | SuiteId::MDisk => 100,
                _ => 40,
            }),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn names_round_trip() {
        for id in SuiteId::ALL {
            assert_eq!(SuiteId::parse(id.name()).unwrap(), id);
        }
        assert_eq!(
            SuiteId::parse("nope"),
            Err(VerifyError::UnknownSuite("nope".to_string()))
        );
    }

    #[test]
    fn every_suite_passes_at_small_scale() {
        for id in SuiteId::ALL {
            let r = run_suite(id, &small(id)).unwrap();
            let failing: Vec<_> = r.cases.iter().filter(|c| !c.pass).collect();
            assert!(r.passed, "{}: {:?} notes {:?}", r.suite_id, failing, r.notes);
            assert_eq!(r.max_residual, r.cases.iter().map(|c| c.residual).fold(f64::NEG_INFINITY, f64::max));
        }
    }

    #[test]
    fn reports_are_reproducible_and_sorted() {
        let cfg = SuiteConfig {
            samples: Some(30),
            ..SuiteConfig::default()
        };
        let a = run_suite(SuiteId::CriticalParity, &cfg).unwrap().to_text(false);
        let b = run_suite(SuiteId::CriticalParity, &cfg).unwrap().to_text(false);
        assert_eq!(a, b);
        let r = run_suite(SuiteId::CPatterns, &SuiteConfig::default()).unwrap();
        assert!(r.cases.windows(2).all(|w| w[0].key <= w[1].key));
        assert!(r.max_residual < 1e-9);
        let other = SuiteConfig { seed: 7, ..cfg };
        assert_ne!(a, run_suite(SuiteId::CriticalParity, &other).unwrap().to_text(false));
    }

    #[test]
    fn empirical_suites_are_labelled() {
        let r = run_suite(SuiteId::MDisk, &small(SuiteId::MDisk)).unwrap();
        assert!(r.empirical);
        assert!(r.to_text(false).contains("EMPIRICAL"));
    }

    #[test]
    fn real_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_real(0.125), "1.2500000000000000e-1");
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SuiteConfig {
            n_range: Some((2, 5)),
            ..SuiteConfig::default()
        };
        assert!(run_suite(SuiteId::Spine, &cfg).is_err());
    }
}
