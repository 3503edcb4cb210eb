//! Command-line front end: classification, sweeps, normal forms, conjugacies and bound suites.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bcnf_core::invariant_sets::{find_fixed_point, find_period_two};
use bcnf_core::map_core::{iterate, MapConfig, PiecewiseMap, Side};
use bcnf_core::normal_form_matcher::NormalFormParams;
use bcnf_core::pipeline::{analyze, match_normal_form, NormalFormReport};
use bcnf_core::poly::Poly1;
use bcnf_core::region_classifier::{classify, RegionClass};
use bcnf_core::verifier::{check_appendix_bounds, chi_triple, AppendixGrid, BoundReport, VerifyOptions};
use bcnf_core::BcnfError;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub mod svg;

pub const GENERATOR: &str = concat!("bcnf ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] BcnfError),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    /// Conjugacy built but the verification report did not pass.
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "Io",
            CliError::Usage(_) => "Usage",
            CliError::VerificationFailed(_) => "VerificationFailed",
            CliError::Failed(_) => "Failed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "RegionUnsupported" => 2,
            "HypothesisViolation" => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bcnf", version, about = "Border-collision normal forms for 1-D piecewise-smooth maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Map (or sweep / bounds) configuration in JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region of a slope pair, from --a-l/--a-r or from a map config.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        a_l: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a_r: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Bifurcation diagram, cobwebs and attractor samples over a mu grid.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Normal-form parameters at one mu.
    Match {
        #[command(flatten)]
        common: Common,
    },
    /// Conjugacy samples and verification report at one mu.
    Conjugate {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Iterate-bound and difference-quotient suites.
    VerifyBounds {
        #[command(flatten)]
        common: Common,
    },
}

/// Runs a parsed command; returns the text for standard output.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Classify { a_l, a_r, common } => cmd_classify(a_l, a_r, &common),
        Command::Sweep { common } => cmd_sweep(&common),
        Command::Match { common } => cmd_match(&common),
        Command::Conjugate { samples, common } => cmd_conjugate(&common, samples),
        Command::VerifyBounds { common } => cmd_verify_bounds(&common),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Full-precision float for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Common {
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn need_config(common: &Common) -> CliResult<&Path> {
    common.config.as_deref().ok_or_else(|| CliError::Usage("--config is required".into()))
}

fn need_mu(common: &Common) -> CliResult<f64> {
    common.mu.ok_or_else(|| CliError::Usage("--mu is required".into()))
}

pub fn load_map(path: &Path) -> CliResult<PiecewiseMap> {
    Ok(MapConfig::from_json(&read(path)?)?)
}

// classify

pub fn cmd_classify(a_l: Option<f64>, a_r: Option<f64>, common: &Common) -> CliResult<String> {
    let (a_l, a_r) = match (a_l, a_r, &common.config) {
        (Some(l), Some(r), _) => (l, r),
        (None, None, Some(path)) => {
            let d = bcnf_core::map_core::extract_bifurcation_data(&load_map(path)?)?;
            (d.a_l, d.a_r)
        }
        _ => return Err(CliError::Usage("give --a-l and --a-r, or --config".into())),
    };
    #[derive(Serialize)]
    struct Out {
        a_l: f64,
        a_r: f64,
        #[serde(flatten)]
        region: RegionClass,
    }
    Ok(to_json(&Out { a_l, a_r, region: classify(a_l, a_r) }))
}

// match

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormFile {
    #[serde(flatten)]
    pub params: NormalFormParams,
    pub region: RegionClass,
    pub reflected: bool,
}

impl From<NormalFormReport> for NormalFormFile {
    fn from(r: NormalFormReport) -> Self {
        NormalFormFile { params: r.params, region: r.region, reflected: r.reflected }
    }
}

pub fn cmd_match(common: &Common) -> CliResult<String> {
    let map = load_map(need_config(common)?)?;
    let mu = need_mu(common)?;
    let (reduced, g) = match_normal_form(&map, mu)?;
    let file = NormalFormFile { params: g.params, region: reduced.region, reflected: reduced.flipped };
    let text = to_json(&file);
    if let Some(out) = &common.out {
        write(out, "normal_form.json", &text)?;
    }
    Ok(text)
}

// conjugate

#[derive(Debug, Serialize)]
struct ConjugateSummary {
    pass: bool,
    conjugacies: usize,
    residual_sup: f64,
    failures: Vec<String>,
}

pub fn cmd_conjugate(common: &Common, samples: usize) -> CliResult<String> {
    let map = load_map(need_config(common)?)?;
    let mu = need_mu(common)?;
    let a = analyze(&map, mu)?;
    let out = common.out_dir();
    let report = a.verify(&VerifyOptions { seed: common.seed, ..VerifyOptions::default() })?;
    write(&out, "normal_form.json", &to_json(&NormalFormFile::from(a.normal_form_report())))?;
    for k in 0..a.conjugacies.len() {
        let mut csv = String::from("x,h,dh,interval_id\n");
        for s in a.sample_conjugacy(k, samples)? {
            writeln!(csv, "{},{},{},{}", num(s.x), num(s.h), num(s.dh), s.interval_id).unwrap();
        }
        write(&out, &format!("conjugacy_{k}.csv"), &csv)?;
    }
    write(&out, "verification.json", &to_json(&report))?;
    if !report.pass {
        return Err(CliError::VerificationFailed(report.failures.join("; ")));
    }
    Ok(to_json(&ConjugateSummary {
        pass: report.pass,
        conjugacies: a.conjugacies.len(),
        residual_sup: report.residual_sup,
        failures: report.failures,
    }))
}

// sweep

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MapSource {
    Path(PathBuf),
    Inline(MapConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub map: MapSource,
    pub mu_min: f64,
    pub mu_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Overrides the map's half-width.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_transient")]
    pub transient: usize,
    #[serde(default = "default_record")]
    pub record: usize,
    #[serde(default)]
    pub seed: u64,
    /// mu values that get a cobweb file; defaults to the two ends of the grid.
    #[serde(default)]
    pub cobweb: Option<Vec<f64>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_steps() -> usize {
    101
}
fn default_delta() -> f64 {
    0.1
}
fn default_transient() -> usize {
    500
}
fn default_record() -> usize {
    64
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Core(BcnfError::InvalidConfig(m.into())));
        if !(self.mu_min < 0.0 && 0.0 < self.mu_max) {
            return bad("need mu_min < 0 < mu_max");
        }
        if self.steps < 2 {
            return bad("need steps >= 2");
        }
        if let Some(p) = self.p {
            if p <= 0.0 || p.is_nan() {
                return bad("need p > 0");
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("need delta in (0, 1)");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|i| self.mu_min + (self.mu_max - self.mu_min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Reads either a sweep config or a bare map config (which gets a default grid over its mu range).
pub fn load_sweep(path: &Path) -> CliResult<(SweepConfig, PiecewiseMap)> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| BcnfError::InvalidConfig(e.to_string()))?;
    let cfg: SweepConfig = if value.get("map").is_some() {
        serde_json::from_value(value).map_err(|e| BcnfError::InvalidConfig(e.to_string()))?
    } else {
        let mc: MapConfig = serde_json::from_value(value).map_err(|e| BcnfError::InvalidConfig(e.to_string()))?;
        let (lo, hi) = mc.mu_range.unwrap_or((-mc.p, mc.p));
        SweepConfig {
            map: MapSource::Inline(mc),
            mu_min: lo,
            mu_max: hi,
            steps: default_steps(),
            p: None,
            delta: default_delta(),
            transient: default_transient(),
            record: default_record(),
            seed: 0,
            cobweb: None,
            out: None,
        }
    };
    cfg.validate()?;
    let mut map = match &cfg.map {
        MapSource::Inline(mc) => mc.build()?,
        MapSource::Path(p) => {
            let base = path.parent().unwrap_or(Path::new("."));
            load_map(&base.join(p))?
        }
    };
    if let Some(p) = cfg.p {
        map = map.with_half_width(p);
    }
    Ok((cfg, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Virtual,
    Cycle,
}

impl Stability {
    fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Virtual => "virtual",
            Stability::Cycle => "cycle",
        }
    }
}

/// One point of an analytic branch. Branch ids: 0 = x_L, 1 = x_R, 2 = u_L, 3 = u_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub mu: f64,
    pub branch_id: usize,
    pub x: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSlice {
    pub mu: f64,
    pub branches: Vec<BranchPoint>,
    pub attractor: Vec<f64>,
}

pub fn branches_at(map: &PiecewiseMap, mu: f64) -> Vec<BranchPoint> {
    let p = map.half_width();
    let mut out = Vec::new();
    for (id, side) in [(0, Side::Left), (1, Side::Right)] {
        let Ok(fp) = find_fixed_point(map, mu, side) else { continue };
        if fp.location.abs() > p {
            continue;
        }
        let stability = if !fp.admissible {
            Stability::Virtual
        } else if fp.multiplier.abs() < 1.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        out.push(BranchPoint { mu, branch_id: id, x: fp.location, stability });
    }
    if let Ok(c) = find_period_two(map, mu) {
        if c.u_l < 0.0 && c.u_r > 0.0 && c.u_l > -p && c.u_r < p {
            out.push(BranchPoint { mu, branch_id: 2, x: c.u_l, stability: Stability::Cycle });
            out.push(BranchPoint { mu, branch_id: 3, x: c.u_r, stability: Stability::Cycle });
        }
    }
    out
}

/// Points visited after the transient from a few fixed starting points.
pub fn attractor_at(map: &PiecewiseMap, mu: f64, transient: usize, record: usize) -> Vec<f64> {
    let p = map.half_width();
    let mut pts = Vec::new();
    for x0 in [-0.5 * p, -0.05 * p, 0.05 * p, 0.5 * p] {
        let orbit = iterate(map, x0, mu, transient + record);
        if orbit.escaped || orbit.points.len() < transient + record + 1 {
            continue;
        }
        pts.extend_from_slice(&orbit.points[transient + 1..]);
    }
    pts
}

pub fn sweep(map: &PiecewiseMap, cfg: &SweepConfig) -> Vec<SweepSlice> {
    cfg.grid()
        .into_par_iter()
        .map(|mu| SweepSlice {
            mu,
            branches: branches_at(map, mu),
            attractor: attractor_at(map, mu, cfg.transient, cfg.record),
        })
        .collect()
}

pub fn cobweb_csv(map: &PiecewiseMap, mu: f64, x0: f64, steps: usize) -> String {
    let orbit = iterate(map, x0, mu, steps);
    let mut csv = String::from("step,x,f(x)\n");
    for (k, w) in orbit.points.windows(2).enumerate() {
        writeln!(csv, "{k},{},{}", num(w[0]), num(w[1])).unwrap();
    }
    csv
}

fn cobweb_start(map: &PiecewiseMap, cfg: &SweepConfig, mu: f64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ mu.to_bits());
    let p = map.half_width();
    rng.gen_range(-0.5 * p..0.5 * p)
}

pub fn cmd_sweep(common: &Common) -> CliResult<String> {
    let (mut cfg, map) = load_sweep(need_config(common)?)?;
    if common.seed != 0 {
        cfg.seed = common.seed;
    }
    let out = common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let slices = sweep(&map, &cfg);

    let mut diag = String::from("mu,branch_id,x,stability\n");
    let mut attr = String::from("mu,x\n");
    for s in &slices {
        for b in &s.branches {
            writeln!(diag, "{},{},{},{}", num(b.mu), b.branch_id, num(b.x), b.stability.name()).unwrap();
        }
        for &x in &s.attractor {
            writeln!(attr, "{},{}", num(s.mu), num(x)).unwrap();
        }
    }
    write(&out, "bifurcation_diagram.csv", &diag)?;
    write(&out, "attractor.csv", &attr)?;

    let cobweb_mus = match common.mu {
        Some(mu) => vec![mu],
        None => cfg.cobweb.clone().unwrap_or_else(|| vec![cfg.mu_min, cfg.mu_max]),
    };
    let mut webs = Vec::new();
    for &mu in &cobweb_mus {
        let x0 = cobweb_start(&map, &cfg, mu);
        let csv = cobweb_csv(&map, mu, x0, 60);
        write(&out, &format!("cobweb_{mu}.csv"), &csv)?;
        webs.push((mu, iterate(&map, x0, mu, 60).points));
    }
    let first = webs.first().map(|(mu, pts)| (*mu, pts.as_slice()));
    write(&out, "diagram.svg", &svg::diagram(&map, &slices, first))?;

    #[derive(Serialize)]
    struct Summary {
        steps: usize,
        branch_points: usize,
        attractor_points: usize,
        cobweb: Vec<f64>,
    }
    Ok(to_json(&Summary {
        steps: slices.len(),
        branch_points: slices.iter().map(|s| s.branches.len()).sum(),
        attractor_points: slices.iter().map(|s| s.attractor.len()).sum(),
        cobweb: cobweb_mus,
    }))
}

// verify-bounds

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixCase {
    pub lambda: f64,
    /// Coefficients of `x^2, x^3, ...`.
    pub higher: Vec<f64>,
    #[serde(default)]
    pub k: Option<f64>,
    /// Grid radius as a fraction of `r`; ignored when `radius` is given.
    #[serde(default = "default_frac")]
    pub radius_frac: f64,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_one")]
    pub r_scale: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChiCase {
    pub lambda: f64,
    pub c_f: f64,
    pub c_g: f64,
    pub chi: f64,
    #[serde(default = "default_frac")]
    pub radius_frac: f64,
    #[serde(default = "default_chi_samples")]
    pub samples: usize,
}

fn default_frac() -> f64 {
    0.9
}
fn default_points() -> usize {
    500
}
fn default_n_max() -> usize {
    60
}
fn default_one() -> f64 {
    1.0
}
fn default_chi_samples() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub appendix: Vec<AppendixCase>,
    #[serde(default)]
    pub chi: Vec<ChiCase>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let appendix = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&c| AppendixCase {
                lambda: 0.5,
                higher: vec![c],
                k: None,
                radius_frac: default_frac(),
                radius: None,
                points: default_points(),
                n_max: default_n_max(),
                r_scale: 1.0,
            })
            .collect();
        let chi =
            vec![ChiCase { lambda: 0.5, c_f: 1.0, c_g: -1.0, chi: 1.2, radius_frac: default_frac(), samples: 1000 }];
        BoundsConfig { appendix, chi }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome<C> {
    pub case: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsFile {
    pub appendix: Vec<CaseOutcome<AppendixCase>>,
    pub chi: Vec<CaseOutcome<ChiCase>>,
    pub violations: usize,
    pub hypothesis_violations: usize,
}

pub fn run_appendix_case(c: &AppendixCase) -> bcnf_core::Result<BoundReport> {
    let mut coeffs = vec![0.0, c.lambda];
    coeffs.extend_from_slice(&c.higher);
    let f = Poly1::new(coeffs);
    let radius = match c.radius {
        Some(r) => r,
        None => {
            let k2 = f.nth_derivative(2);
            // r from |f''| at 0 is a first guess; the checker re-measures K on the grid
            let k = c.k.unwrap_or_else(|| 1.05 * k2.eval(0.0).abs()).max(1e-12);
            c.radius_frac * c.lambda * (1.0 - c.lambda) / (10.0 * k)
        }
    };
    let k = c.k.or_else(|| {
        let lo = bcnf_core::verifier::second_derivative_bound(&f, -radius, radius);
        Some((1.05 * lo).max(1e-12))
    });
    check_appendix_bounds(&f, c.lambda, k, &AppendixGrid { radius, points: c.points, n_max: c.n_max }, c.r_scale)
}

pub fn run_chi_case(c: &ChiCase) -> bcnf_core::Result<BoundReport> {
    chi_triple(c.lambda, c.c_f, c.c_g, c.chi, c.radius_frac, c.samples)?.check()
}

fn outcome<C>(case: C, r: bcnf_core::Result<BoundReport>) -> CaseOutcome<C> {
    match r {
        Ok(rep) => CaseOutcome { case, report: Some(rep), error: None },
        Err(e) => CaseOutcome {
            case,
            report: None,
            error: Some(serde_json::json!({ "error": e.kind(), "message": e.to_string() })),
        },
    }
}

pub fn cmd_verify_bounds(common: &Common) -> CliResult<String> {
    let cfg = match &common.config {
        Some(path) => {
            serde_json::from_str::<BoundsConfig>(&read(path)?).map_err(|e| BcnfError::InvalidConfig(e.to_string()))?
        }
        None => BoundsConfig::default(),
    };
    let appendix: Vec<_> = cfg.appendix.iter().map(|c| outcome(c.clone(), run_appendix_case(c))).collect();
    let chi: Vec<_> = cfg.chi.iter().map(|c| outcome(c.clone(), run_chi_case(c))).collect();
    let reports = appendix.iter().filter_map(|o| o.report.as_ref()).chain(chi.iter().filter_map(|o| o.report.as_ref()));
    let violations = reports.map(|r| r.violations).sum();
    let errors: Vec<&serde_json::Value> =
        appendix.iter().filter_map(|o| o.error.as_ref()).chain(chi.iter().filter_map(|o| o.error.as_ref())).collect();
    let hypothesis_violations = errors.iter().filter(|e| e["error"] == "HypothesisViolation").count();
    let first_other = errors.iter().find(|e| e["error"] != "HypothesisViolation").map(|e| e["message"].to_string());
    let file = BoundsFile { appendix, chi, violations, hypothesis_violations };
    let text = to_json(&file);
    write(&common.out_dir(), "bounds.json", &text)?;
    if hypothesis_violations > 0 {
        return Err(BcnfError::HypothesisViolation(format!(
            "{hypothesis_violations} case(s) violate the hypotheses; see bounds.json"
        ))
        .into());
    }
    if let Some(msg) = first_other {
        return Err(CliError::Failed(msg));
    }
    if violations > 0 {
        return Err(CliError::VerificationFailed(format!("{violations} bound violation(s)")));
    }
    Ok(text)
}
