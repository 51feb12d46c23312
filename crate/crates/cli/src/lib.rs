//! Command implementations behind the `lattice-segments` binary.
//!
//! Everything here is deterministic for a fixed configuration: randomized
//! samplers require a seed, experiment rows are generated and written in grid
//! order, and floats are printed with the shortest round-trip formatting, so
//! repeated runs produce byte-identical CSV bodies.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use lattice_segments::geometry::radius_from_angle;
use lattice_segments::interval::{sqrt_bounds, RatInterval};
use lattice_segments::lattice::write_point_set;
use lattice_segments::{
    bound_pipeline_with_h, build_covering, enumerate_sphere_with_budget, height_bound,
    kappa_estimate, slice, ApproxMode, Direction, Error as CoreError, PipelineReport, Segment,
    SegmentCount, SpherePointSet, SphereSpec,
};

pub const CSV_SCHEMA: &str = "# lattice-segments v1";

/// Exit-code contract: 0 success, 1 exact-chain violation, 2 budget,
/// 3 demanded exactness unavailable; 64 usage, 70 other failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("exact chain violated: {0}")]
    ExactChainViolation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("exact result demanded but unavailable: {0}")]
    ExactnessUnavailable(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ExactChainViolation(_) => 1,
            CliError::Budget(_) => 2,
            CliError::ExactnessUnavailable(_) => 3,
            CliError::Usage(_) => 64,
            CliError::Failure(_) => 70,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            CoreError::Precision => CliError::ExactnessUnavailable(e.to_string()),
            CoreError::Io(_) => CliError::Failure(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// parsing helpers
// ---------------------------------------------------------------------------

/// Parses `p/q` or a bare integer into an exact rational.
pub fn parse_ratio(s: &str) -> CliResult<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| CliError::Usage(format!("bad integer `{t}` in rational `{s}`")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(CliError::Usage(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse_int(num)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// `p/q`, or just `p` for integers.
pub fn format_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_i64_list(s: &str) -> CliResult<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Usage(format!("bad integer `{t}`")))
        })
        .collect()
}

pub fn parse_f64_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad float `{t}`")))
        })
        .collect()
}

/// `idx=p/q` pairs separated by commas, e.g. `0=1/2,1=1/3`.
pub fn parse_mask(s: &str) -> CliResult<BTreeMap<usize, BigRational>> {
    let mut mask = BTreeMap::new();
    for item in s.split(',') {
        let (idx, frac) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("mask entry `{item}` is not idx=p/q")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad mask index `{idx}`")))?;
        mask.insert(idx, parse_ratio(frac)?);
    }
    Ok(mask)
}

// ---------------------------------------------------------------------------
// segment assembly from flags
// ---------------------------------------------------------------------------

/// Raw segment description from the command line.
#[derive(Clone, Debug, Default)]
pub struct SegmentSpec {
    pub d: usize,
    pub n: u64,
    pub dir: Option<String>,
    pub dir_real: Option<String>,
    pub mask: Option<String>,
    pub rho1: Option<String>,
    pub rho2: Option<String>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
}

impl SegmentSpec {
    pub fn sphere(&self) -> CliResult<SphereSpec> {
        SphereSpec::new(self.d, self.n).map_err(CliError::from)
    }

    pub fn direction(&self) -> CliResult<Direction> {
        match (&self.dir, &self.dir_real) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "give either --dir or --dir-real, not both".into(),
            )),
            (Some(b), None) => {
                if self.mask.is_some() {
                    return Err(CliError::Usage("--mask applies only to --dir-real".into()));
                }
                Ok(Direction::rational(parse_i64_list(b)?).map_err(CliError::from)?)
            }
            (None, Some(v)) => {
                let v = parse_f64_list(v)?;
                let mask = match &self.mask {
                    Some(m) => parse_mask(m)?,
                    None => BTreeMap::new(),
                };
                Ok(Direction::real_with_mask(v, mask).map_err(CliError::from)?)
            }
            (None, None) => Err(CliError::Usage(
                "a direction is required: --dir or --dir-real".into(),
            )),
        }
    }

    fn radius(
        &self,
        sphere: &SphereSpec,
        rho: &Option<String>,
        theta: Option<f64>,
        what: &str,
    ) -> CliResult<Option<BigRational>> {
        match (rho, theta) {
            (Some(_), Some(_)) => Err(CliError::Usage(format!(
                "give either --{what} or the matching --theta flag, not both"
            ))),
            (Some(r), None) => Ok(Some(parse_ratio(r)?)),
            (None, Some(t)) => {
                let r = radius_from_angle(sphere, t).map_err(CliError::from)?;
                Ok(Some(BigRational::from_float(r).ok_or_else(|| {
                    CliError::Usage("angle produced a non-finite radius".into())
                })?))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn segment(&self) -> CliResult<Segment> {
        let sphere = self.sphere()?;
        let dir = self.direction()?;
        let rho1 = self
            .radius(&sphere, &self.rho1, self.theta1, "rho1")?
            .ok_or_else(|| CliError::Usage("outer radius required: --rho1 or --theta1".into()))?;
        let rho2 = self
            .radius(&sphere, &self.rho2, self.theta2, "rho2")?
            .unwrap_or_else(BigRational::zero);
        Segment::new(sphere, dir, rho1, rho2).map_err(CliError::from)
    }
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

pub fn cmd_enumerate(
    d: usize,
    n: u64,
    out: Option<&Path>,
    budget: Option<u64>,
    mut stdout: impl std::io::Write,
) -> CliResult<()> {
    let sphere = SphereSpec::new(d, n).map_err(CliError::from)?;
    let budget = budget.unwrap_or(lattice_segments::lattice::DEFAULT_ENUM_BUDGET);
    let pts = enumerate_sphere_with_budget(&sphere, budget)?;
    if let Some(path) = out {
        let mut f = fs::File::create(path)?;
        write_point_set(&pts, &mut f).map_err(CliError::from)?;
    }
    writeln!(stdout, "{}", pts.len())?;
    Ok(())
}

pub fn cmd_count(
    spec: &SegmentSpec,
    exact_demanded: bool,
    budget: Option<u64>,
    mut stdout: impl std::io::Write,
) -> CliResult<()> {
    let seg = spec.segment()?;
    let budget = budget.unwrap_or(lattice_segments::lattice::DEFAULT_ENUM_BUDGET);
    let pts = enumerate_sphere_with_budget(seg.sphere(), budget)?;
    let count = lattice_segments::count_segment(&seg, &pts);
    let segment_echo = serde_json::json!({
        "d": spec.d,
        "n": spec.n,
        "direction": spec.dir.clone().or_else(|| spec.dir_real.clone()).unwrap_or_default(),
        "rho1": format_ratio(seg.rho1()),
        "rho2": format_ratio(seg.rho2()),
    });
    let out = match count {
        SegmentCount::Exact(c) => serde_json::json!({
            "count": c,
            "exact": true,
            "segment": segment_echo,
        }),
        SegmentCount::Interval { lo, hi } => {
            if exact_demanded {
                return Err(CliError::ExactnessUnavailable(format!(
                    "count is uncertain in [{lo}, {hi}]: float-direction verdicts \
                     within tolerance of the boundary"
                )));
            }
            serde_json::json!({
                "count_interval": [lo, hi],
                "exact": false,
                "segment": segment_echo,
            })
        }
    };
    writeln!(stdout, "{}", serde_json::to_string_pretty(&out).unwrap())?;
    Ok(())
}

pub fn cmd_slice(
    d: usize,
    n: u64,
    b: &[i64],
    out: Option<&Path>,
    budget: Option<u64>,
    mut stdout: impl std::io::Write,
) -> CliResult<()> {
    let sphere = SphereSpec::new(d, n).map_err(CliError::from)?;
    let budget = budget.unwrap_or(lattice_segments::lattice::DEFAULT_ENUM_BUDGET);
    let pts = enumerate_sphere_with_budget(&sphere, budget)?;
    let hist = slice(&pts, b).map_err(CliError::from)?;
    if hist.was_normalized() {
        eprintln!(
            "warning: normal was not primitive; using {:?}",
            hist.normal()
        );
    }
    match out {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            hist.write_csv(&mut f).map_err(CliError::from)?;
        }
        None => hist.write_csv(&mut stdout).map_err(CliError::from)?,
    }
    Ok(())
}

pub fn cmd_kappa(
    d: usize,
    n: u64,
    max_norm: u64,
    sweep_budget: Option<u64>,
    enum_budget: Option<u64>,
    mut stdout: impl std::io::Write,
) -> CliResult<()> {
    let sphere = SphereSpec::new(d, n).map_err(CliError::from)?;
    let pts = enumerate_sphere_with_budget(
        &sphere,
        enum_budget.unwrap_or(lattice_segments::lattice::DEFAULT_ENUM_BUDGET),
    )?;
    let est = match sweep_budget {
        Some(b) => lattice_segments::slicing::kappa_estimate_with_budget(&pts, max_norm, b)?,
        None => kappa_estimate(&pts, max_norm)?,
    };
    let witnesses: Vec<serde_json::Value> = est
        .witnesses
        .iter()
        .map(|(b, t)| serde_json::json!({ "normal": b, "t": t }))
        .collect();
    let out = serde_json::json!({
        "lower_bound": est.value,
        "candidate_norm_bound": est.candidate_bound,
        "witnesses": witnesses,
        "note": "max bucket over the swept normals; a lower bound for the true hyperplane maximum",
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&out).unwrap())?;
    Ok(())
}

fn approx_to_json(ap: &lattice_segments::DirectionApproximation) -> serde_json::Value {
    let rq = ap.rq.as_ref().map(|i| {
        serde_json::json!({
            "s": i.s,
            "modulus": i.modulus.to_string(),
            "k_abs_lo": format_ratio(&i.k_abs_lo),
            "k_abs_hi": format_ratio(&i.k_abs_hi),
        })
    });
    serde_json::json!({
        "a": ap.a,
        "q": ap.q,
        "h": ap.h,
        "exponent": ap.exponent,
        "norm_constant": format_ratio(&ap.norm_constant),
        "norm_bound": format_ratio(&ap.norm_bound),
        "angle_constant": format_ratio(&ap.angle_constant),
        "angle_bound": format_ratio(&ap.angle_bound),
        "chord_upper": format_ratio(&ap.chord_upper),
        "rq": rq,
    })
}

pub fn cmd_approx(
    beta: &[f64],
    mask: Option<&str>,
    h: u64,
    rational_quotients: bool,
    mut stdout: impl std::io::Write,
) -> CliResult<()> {
    let mask = match mask {
        Some(m) => parse_mask(m)?,
        None => BTreeMap::new(),
    };
    let dir = Direction::real_with_mask(beta.to_vec(), mask).map_err(CliError::from)?;
    let ap = if rational_quotients {
        lattice_segments::approx_direction_rational_quotients(&dir, h)?
    } else {
        lattice_segments::approx_direction(&dir, h)?
    };
    writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(&approx_to_json(&ap)).unwrap()
    )?;
    Ok(())
}

pub fn cmd_cover(
    spec: &SegmentSpec,
    a: &[i64],
    budget: Option<u64>,
    mut stdout: impl std::io::Write,
) -> CliResult<()> {
    let seg = spec.segment()?;
    let cov = build_covering(&seg, a)?;
    let budget = budget.unwrap_or(lattice_segments::lattice::DEFAULT_ENUM_BUDGET);
    let pts = enumerate_sphere_with_budget(seg.sphere(), budget)?;
    let mut containment_ok = true;
    let mut count_s_hi = 0u64;
    for p in pts.iter() {
        if lattice_segments::segment_contains(&seg, p) != lattice_segments::Verdict::Out {
            count_s_hi += 1;
            if !cov.contains(p) {
                containment_ok = false;
            }
        }
    }
    let height = height_bound(&cov);
    let out = serde_json::json!({
        "a": cov.a(),
        "sin_half_phi_upper": format_ratio(cov.sin_half_phi_upper()),
        "rho1_prime": format_ratio(cov.rho1_prime()),
        "rho2_prime": format_ratio(cov.rho2_prime()),
        "inner_empty": cov.inner_empty(),
        "h_prime": height.approx,
        "h_prime_numerator_over_sqrt_n": format_ratio(&height.numerator),
        "h_prime_over_r_theta_phi": height.ratio_r_theta_phi,
        "count_s_upper": count_s_hi,
        "count_s_prime": cov.count(&pts),
        "containment_ok": containment_ok,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&out).unwrap())?;
    if !containment_ok {
        return Err(CliError::ExactChainViolation(
            "a point of the segment escaped the covering".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify: experiment configuration and sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
pub struct NRange {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Generic,
    RationalQuotients {
        mask_size: usize,
    },
}

fn default_inner_thetas() -> Vec<f64> {
    vec![0.0]
}

fn default_lattice_directions() -> usize {
    4
}

fn default_random_directions() -> usize {
    2
}

/// Configuration of a `verify` sweep. All grids must be non-empty; the seed
/// is mandatory whenever the sampler draws random directions.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub n_values: Vec<u64>,
    #[serde(default)]
    pub n_range: Option<NRange>,
    pub thetas: Vec<f64>,
    #[serde(default = "default_inner_thetas")]
    pub inner_thetas: Vec<f64>,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default = "default_lattice_directions")]
    pub lattice_directions: usize,
    #[serde(default = "default_random_directions")]
    pub random_directions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub h_values: Option<Vec<u64>>,
    #[serde(default)]
    pub enum_budget: Option<u64>,
    pub out_csv: PathBuf,
    pub out_summary: PathBuf,
}

impl VerifyConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: VerifyConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dims.is_empty() || self.thetas.is_empty() || self.inner_thetas.is_empty() {
            return Err(CliError::Usage(
                "dims/thetas/inner_thetas must be non-empty".into(),
            ));
        }
        if self.n_list().is_empty() {
            return Err(CliError::Usage("n grid is empty".into()));
        }
        let needs_seed =
            self.random_directions > 0 || matches!(self.mode, ModeConfig::RationalQuotients { .. });
        if needs_seed && self.seed.is_none() {
            return Err(CliError::Usage(
                "seed is mandatory when the sampler draws random directions".into(),
            ));
        }
        if let Some(hs) = &self.h_values {
            if hs.is_empty() || hs.contains(&0) {
                return Err(CliError::Usage(
                    "h_values must be non-empty positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn n_list(&self) -> Vec<u64> {
        let mut out = self.n_values.clone();
        if let Some(r) = &self.n_range {
            let mut n = r.start;
            while n <= r.end {
                out.push(n);
                if r.step == 0 {
                    break;
                }
                n += r.step;
            }
        }
        out
    }
}

/// One CSV row of a verify sweep.
#[derive(Clone, Debug)]
pub struct BoundRow {
    pub d: usize,
    pub n: u64,
    pub theta: f64,
    pub theta_inner: f64,
    pub mode: String,
    pub s: Option<usize>,
    pub direction: String,
    pub h: u64,
    pub a: Vec<i64>,
    pub abs_a: f64,
    pub phi_upper: f64,
    pub count_s_lo: u64,
    pub count_s_hi: u64,
    pub count_sprime: u64,
    pub slices_hit: u64,
    pub kappa_b: u64,
    pub planes_bound: u64,
    pub bound_value: u64,
    pub ratio_thm: f64,
    pub holds_exact_chain: bool,
}

pub const CSV_COLUMNS: &str = "d,n,theta,theta_inner,mode,s,direction,h,a,abs_a,phi_upper,\
count_s_lo,count_s_hi,count_sprime,slices_hit,kappa_b,planes_bound,bound_value,ratio_thm,\
holds_exact_chain";

impl BoundRow {
    fn from_report(rep: &PipelineReport, theta: f64, theta_inner: f64, direction: String) -> Self {
        let mode = match rep.mode {
            ApproxMode::Generic => "generic".to_string(),
            ApproxMode::RationalQuotients => "rational_quotients".to_string(),
        };
        BoundRow {
            d: rep.d,
            n: rep.n,
            theta,
            theta_inner,
            mode,
            s: rep.s,
            direction,
            h: rep.h_param,
            a: rep.a.clone(),
            abs_a: rep.abs_a,
            phi_upper: rep.phi_upper,
            count_s_lo: rep.count_s.lo(),
            count_s_hi: rep.count_s.hi(),
            count_sprime: rep.count_sprime,
            slices_hit: rep.slices_hit,
            kappa_b: rep.kappa_b,
            planes_bound: rep.planes_bound,
            bound_value: rep.bound_value,
            ratio_thm: rep.ratio_thm,
            holds_exact_chain: rep.holds_exact_chain,
        }
    }

    pub fn csv(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|c| c.to_string()).collect();
        let s = self.s.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.d,
            self.n,
            self.theta,
            self.theta_inner,
            self.mode,
            s,
            self.direction,
            self.h,
            a.join(";"),
            self.abs_a,
            self.phi_upper,
            self.count_s_lo,
            self.count_s_hi,
            self.count_sprime,
            self.slices_hit,
            self.kappa_b,
            self.planes_bound,
            self.bound_value,
            self.ratio_thm,
            self.holds_exact_chain
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub d: usize,
    pub mode: String,
    pub rows: usize,
    pub max_ratio_thm: f64,
    pub max_ratio_at: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiEntry {
    pub d: usize,
    pub n: u64,
    pub theta: f64,
    pub psi: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub schema: String,
    pub rows: usize,
    pub chain_failures: usize,
    pub groups: Vec<GroupSummary>,
    pub empirical_psi: Vec<PsiEntry>,
}

fn per_pair_rng(seed: u64, d: usize, n: u64) -> ChaCha8Rng {
    let mixed = seed
        ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ n.wrapping_mul(0xD1B5_4A32_D192_ED03);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Directions for one `(d, n)` cell, with CSV labels.
fn sample_directions(
    cfg: &VerifyConfig,
    pts: &SpherePointSet,
    d: usize,
    n: u64,
) -> CliResult<Vec<(String, Direction)>> {
    let mut out = Vec::new();
    match &cfg.mode {
        ModeConfig::Generic => {
            // lattice-point directions first: an apex on a lattice point is
            // the adversarial case
            let mut taken = 0;
            for p in pts.iter() {
                if taken >= cfg.lattice_directions {
                    break;
                }
                if p.coords.iter().all(|&c| c == 0) {
                    continue;
                }
                let first = p.coords.iter().find(|&&c| c != 0).unwrap();
                if *first < 0 {
                    continue; // one representative per antipodal pair
                }
                let label: Vec<String> = p.coords.iter().map(|c| c.to_string()).collect();
                let dir = Direction::real_normalized(p.coords.iter().map(|&c| c as f64).collect())
                    .map_err(CliError::from)?;
                out.push((format!("lat:{}", label.join(";")), dir));
                taken += 1;
            }
            if cfg.random_directions > 0 {
                let mut rng = per_pair_rng(cfg.seed.unwrap(), d, n);
                for i in 0..cfg.random_directions {
                    out.push((format!("rnd:{i}"), random_unit_direction(&mut rng, d)?));
                }
            }
        }
        ModeConfig::RationalQuotients { mask_size } => {
            if *mask_size < 2 || *mask_size > d {
                return Err(CliError::Usage(format!(
                    "mask_size must be in [2, d]; got {mask_size} for d = {d}"
                )));
            }
            let mut rng = per_pair_rng(cfg.seed.unwrap(), d, n);
            let count = cfg.random_directions.max(1);
            for i in 0..count {
                out.push((
                    format!("rq:{i}"),
                    random_masked_direction(&mut rng, d, *mask_size)?,
                ));
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(
            "no directions sampled: raise lattice_directions or random_directions".into(),
        ));
    }
    Ok(out)
}

fn random_unit_direction(rng: &mut ChaCha8Rng, d: usize) -> CliResult<Direction> {
    loop {
        let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return Direction::real_normalized(w).map_err(CliError::from);
        }
    }
}

/// Direction whose first `mask_size` coordinates are declared exact
/// fractions of a rescaling; the rest are float noise.
fn random_masked_direction(
    rng: &mut ChaCha8Rng,
    d: usize,
    mask_size: usize,
) -> CliResult<Direction> {
    loop {
        let mut w = Vec::with_capacity(d);
        let mut mask = BTreeMap::new();
        for i in 0..mask_size {
            let num = rng.gen_range(1..=4i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
            let den = rng.gen_range(1..=4i64);
            let f = BigRational::new(BigInt::from(num), BigInt::from(den));
            w.push(num as f64 / den as f64);
            mask.insert(i, f);
        }
        for _ in mask_size..d {
            let x: f64 = rng.sample(StandardNormal);
            w.push(2.0 * x);
        }
        let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        let v: Vec<f64> = w.iter().map(|c| c / norm).collect();
        return Direction::real_with_mask(v, mask).map_err(CliError::from);
    }
}

struct RowSpec {
    pts: Arc<SpherePointSet>,
    theta: f64,
    theta_inner: f64,
    direction_label: String,
    direction: Direction,
    h_override: Option<u64>,
    mode: ApproxMode,
}

/// Runs the sweep described by `cfg`; returns the rows in grid order plus the
/// summary. Pure in the config (no output files touched).
pub fn run_verify(cfg: &VerifyConfig) -> CliResult<(Vec<BoundRow>, VerifySummary)> {
    cfg.validate()?;
    let enum_budget = cfg
        .enum_budget
        .unwrap_or(lattice_segments::lattice::DEFAULT_ENUM_BUDGET);
    let mode = match cfg.mode {
        ModeConfig::Generic => ApproxMode::Generic,
        ModeConfig::RationalQuotients { .. } => ApproxMode::RationalQuotients,
    };

    // enumerate each sphere once
    let mut spheres: HashMap<(usize, u64), Arc<SpherePointSet>> = HashMap::new();
    for &d in &cfg.dims {
        for &n in &cfg.n_list() {
            let sphere = SphereSpec::new(d, n).map_err(CliError::from)?;
            let pts = enumerate_sphere_with_budget(&sphere, enum_budget)?;
            spheres.insert((d, n), Arc::new(pts));
        }
    }

    let h_slots: Vec<Option<u64>> = match &cfg.h_values {
        Some(hs) => hs.iter().map(|&h| Some(h)).collect(),
        None => vec![None],
    };

    let mut specs = Vec::new();
    for &d in &cfg.dims {
        for &n in &cfg.n_list() {
            let pts = spheres[&(d, n)].clone();
            let dirs = sample_directions(cfg, &pts, d, n)?;
            for &theta in &cfg.thetas {
                for &theta_inner in &cfg.inner_thetas {
                    for (label, dir) in &dirs {
                        for h in &h_slots {
                            specs.push(RowSpec {
                                pts: pts.clone(),
                                theta,
                                theta_inner,
                                direction_label: label.clone(),
                                direction: dir.clone(),
                                h_override: *h,
                                mode,
                            });
                        }
                    }
                }
            }
        }
    }

    let rows: Vec<CliResult<BoundRow>> = specs
        .par_iter()
        .map(|spec| {
            let sphere = *spec.pts.sphere();
            let theta1 = spec.theta_inner + spec.theta;
            let rho1 = radius_from_angle(&sphere, theta1).map_err(CliError::from)?;
            let rho2 = radius_from_angle(&sphere, spec.theta_inner).map_err(CliError::from)?;
            let rho1 = BigRational::from_float(rho1)
                .ok_or_else(|| CliError::Usage("non-finite radius".into()))?;
            let rho2 = BigRational::from_float(rho2)
                .ok_or_else(|| CliError::Usage("non-finite radius".into()))?;
            if rho1 <= rho2 {
                return Err(CliError::Usage(format!(
                    "theta grid too fine: rho1 <= rho2 at theta={} inner={}",
                    spec.theta, spec.theta_inner
                )));
            }
            let seg =
                Segment::new(sphere, spec.direction.clone(), rho1, rho2).map_err(CliError::from)?;
            let rep = bound_pipeline_with_h(&seg, &spec.pts, spec.mode, spec.h_override)?;
            Ok(BoundRow::from_report(
                &rep,
                spec.theta,
                spec.theta_inner,
                spec.direction_label.clone(),
            ))
        })
        .collect();
    let rows: Vec<BoundRow> = rows.into_iter().collect::<CliResult<_>>()?;

    // summary: per (d, mode) max ratio, per (d, n, theta) empirical psi
    let mut groups: BTreeMap<(usize, String), (usize, f64, String)> = BTreeMap::new();
    let mut psi: BTreeMap<(usize, u64, String), u64> = BTreeMap::new();
    let mut failures = 0usize;
    for row in &rows {
        if !row.holds_exact_chain {
            failures += 1;
        }
        let g = groups.entry((row.d, row.mode.clone())).or_insert((
            0,
            f64::NEG_INFINITY,
            String::new(),
        ));
        g.0 += 1;
        if row.ratio_thm > g.1 {
            g.1 = row.ratio_thm;
            g.2 = format!("n={} theta={} dir={}", row.n, row.theta, row.direction);
        }
        let key = (row.d, row.n, format!("{}", row.theta));
        let p = psi.entry(key).or_insert(0);
        *p = (*p).max(row.count_s_hi);
    }
    let summary = VerifySummary {
        schema: CSV_SCHEMA.trim_start_matches("# ").to_string(),
        rows: rows.len(),
        chain_failures: failures,
        groups: groups
            .into_iter()
            .map(|((d, mode), (rows, max, at))| GroupSummary {
                d,
                mode,
                rows,
                max_ratio_thm: max,
                max_ratio_at: at,
            })
            .collect(),
        empirical_psi: psi
            .into_iter()
            .map(|((d, n, theta), count)| PsiEntry {
                d,
                n,
                theta: theta.parse().unwrap_or(f64::NAN),
                psi: count,
            })
            .collect(),
    };
    Ok((rows, summary))
}

/// Renders the CSV body (schema comment, column header, rows).
pub fn render_csv(rows: &[BoundRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_SCHEMA}");
    let _ = writeln!(out, "{CSV_COLUMNS}");
    for row in rows {
        let _ = writeln!(out, "{}", row.csv());
    }
    out
}

pub fn cmd_verify(config_path: &Path, mut stdout: impl std::io::Write) -> CliResult<()> {
    let cfg = VerifyConfig::from_path(config_path)?;
    let (rows, summary) = run_verify(&cfg)?;
    fs::write(&cfg.out_csv, render_csv(&rows))?;
    fs::write(
        &cfg.out_summary,
        serde_json::to_string_pretty(&summary).unwrap(),
    )?;
    writeln!(
        stdout,
        "{} rows, {} chain failures; csv: {}, summary: {}",
        summary.rows,
        summary.chain_failures,
        cfg.out_csv.display(),
        cfg.out_summary.display()
    )?;
    if summary.chain_failures > 0 {
        for row in rows.iter().filter(|r| !r.holds_exact_chain) {
            eprintln!("FAILED ROW: {}", row.csv());
        }
        return Err(CliError::ExactChainViolation(format!(
            "{} rows violated the exact chain",
            summary.chain_failures
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// independent brute-force oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum OracleVerdict {
    In,
    Out,
    Unsure,
}

/// Comparison thresholds for one cap: the value under test is `F·s` with a
/// positive factor bracket `F ∈ [f_lo, f_hi]`, so `F·s ≥ c` certainly holds
/// when `s ≥ c/f_lo` (for `s ≥ 0`) or `s ≥ c/f_hi` (for `s < 0`), and
/// certainly fails with the endpoints swapped.
struct CapThresholds {
    in_pos: BigRational,
    in_neg: BigRational,
    out_pos: BigRational,
    out_neg: BigRational,
}

impl CapThresholds {
    fn new(c: &BigRational, f: &RatInterval) -> Self {
        CapThresholds {
            in_pos: c / f.lo(),
            in_neg: c / f.hi(),
            out_pos: c / f.hi(),
            out_neg: c / f.lo(),
        }
    }

    fn verdict(&self, s: &BigRational) -> OracleVerdict {
        let nonneg = !s.is_negative();
        let in_thr = if nonneg { &self.in_pos } else { &self.in_neg };
        if s >= in_thr {
            return OracleVerdict::In;
        }
        let out_thr = if nonneg { &self.out_pos } else { &self.out_neg };
        if s < out_thr {
            return OracleVerdict::Out;
        }
        OracleVerdict::Unsure
    }
}

/// Independent segment-count oracle: fresh nested-loop enumeration plus
/// direct interval membership with 256-bit square-root brackets. Returns a
/// `[lo, hi]` interval that must contain the exact count.
pub fn brute_force_segment_count_oracle(seg: &Segment) -> CliResult<(u64, u64)> {
    let d = seg.sphere().dim();
    let n = seg.sphere().n();
    if d > 4 || n > 10_000 {
        return Err(CliError::Budget(format!(
            "oracle limited to d <= 4, n <= 10000; got d={d}, n={n}"
        )));
    }
    // plain coordinate loops, independent of the production enumerator
    fn rec(d: usize, rem: i64, acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if d == 0 {
            if rem == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let bound = (rem as f64).sqrt() as i64 + 1;
        for x in -bound..=bound {
            if x * x <= rem {
                acc.push(x);
                rec(d - 1, rem - x * x, acc, out);
                acc.pop();
            }
        }
    }
    let mut points = Vec::new();
    rec(d, n as i64, &mut Vec::new(), &mut points);

    let u = seg.direction().exact_vector();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let c1 = BigRational::from_integer(BigInt::from(n)) - seg.rho1() * &half;
    let c2 = BigRational::from_integer(BigInt::from(n)) - seg.rho2() * &half;

    // the value under test is √n·(u·x)/|u|; its positive factor √n/|u| is
    // bracketed once at 256 bits and folded into per-cap thresholds, so each
    // point costs an integer dot product and a comparison (n ≥ 1: a valid
    // segment needs rho1 ≤ 4n and rho1 > 0)
    let (nl, nh) = sqrt_bounds(&BigRational::from_integer(BigInt::from(n)), 256);
    let norm_sq: BigRational = u.iter().map(|c| c * c).sum();
    let (ul, uh) = sqrt_bounds(&norm_sq, 256);
    let factor = RatInterval::new(nl, nh).div(&RatInterval::new(ul, uh));
    let outer_thr = CapThresholds::new(&c1, &factor);
    let inner_thr = CapThresholds::new(&c2, &factor);

    // scale the direction to integers over one common denominator
    let mut denom = BigInt::from(1);
    for c in &u {
        denom = num_integer::Integer::lcm(&denom, c.denom());
    }
    let scaled: Vec<BigInt> = u
        .iter()
        .map(|c| (c * BigRational::from_integer(denom.clone())).to_integer())
        .collect();

    let mut lo = 0u64;
    let mut hi = 0u64;
    for p in &points {
        let dot: BigInt = scaled
            .iter()
            .zip(p)
            .map(|(m, &xi)| m * BigInt::from(xi))
            .sum();
        let s = BigRational::new(dot, denom.clone());
        let verdict = match (outer_thr.verdict(&s), inner_thr.verdict(&s)) {
            (OracleVerdict::Out, _) | (_, OracleVerdict::In) => OracleVerdict::Out,
            (OracleVerdict::In, OracleVerdict::Out) => OracleVerdict::In,
            _ => OracleVerdict::Unsure,
        };
        match verdict {
            OracleVerdict::In => {
                lo += 1;
                hi += 1;
            }
            OracleVerdict::Unsure => hi += 1,
            OracleVerdict::Out => {}
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_parsing_round_trips() {
        let r = parse_ratio("-3/4").unwrap();
        assert_eq!(format_ratio(&r), "-3/4");
        assert_eq!(format_ratio(&parse_ratio("10").unwrap()), "10");
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn mask_parsing() {
        let m = parse_mask("0=1/2,2=-1/3").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(format_ratio(&m[&2]), "-1/3");
    }

    #[test]
    fn oracle_matches_exact_count_simple() {
        let spec = SegmentSpec {
            d: 2,
            n: 25,
            dir: Some("1,0".into()),
            rho1: Some("50".into()),
            rho2: Some("2".into()),
            ..Default::default()
        };
        let seg = spec.segment().unwrap();
        let (lo, hi) = brute_force_segment_count_oracle(&seg).unwrap();
        assert!(lo <= 6 && 6 <= hi, "oracle [{lo}, {hi}] misses 6");
    }

    #[test]
    fn oracle_empty_sphere() {
        let spec = SegmentSpec {
            d: 3,
            n: 7,
            dir: Some("1,1,1".into()),
            rho1: Some("10".into()),
            rho2: Some("1".into()),
            ..Default::default()
        };
        let seg = spec.segment().unwrap();
        assert_eq!(brute_force_segment_count_oracle(&seg).unwrap(), (0, 0));
    }

    #[test]
    fn oracle_brackets_apex_on_full_sphere() {
        // the apex (1,1) sits on the degenerate inner boundary and the
        // antipode (−1,−1) on the outer one; both are Unsure under the
        // interval brackets, so the oracle returns [2, 4] around the true 3
        let spec = SegmentSpec {
            d: 2,
            n: 2,
            dir: Some("1,1".into()),
            rho1: Some("8".into()),
            rho2: Some("0".into()),
            ..Default::default()
        };
        let seg = spec.segment().unwrap();
        let (lo, hi) = brute_force_segment_count_oracle(&seg).unwrap();
        assert!(lo <= 3 && 3 <= hi);
        assert_eq!((lo, hi), (2, 4));
    }

    #[test]
    fn oracle_rejects_oversize() {
        let spec = SegmentSpec {
            d: 3,
            n: 20_000,
            dir: Some("1,0,0".into()),
            rho1: Some("100".into()),
            rho2: Some("0".into()),
            ..Default::default()
        };
        let seg = spec.segment().unwrap();
        assert!(matches!(
            brute_force_segment_count_oracle(&seg),
            Err(CliError::Budget(_))
        ));
    }
}
