//! Command-line driver: constructs generator sets, runs spectral and
//! invariance checks, emits diagnostic trend tables, and reproduces the
//! bundled end-to-end scenarios with embedded assertions.
//!
//! Exit codes: 0 success, 1 failed expectation or scenario assertion,
//! 2 configuration error, 3 inconclusive verdict under `--strict`.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use sislab::diagnostics::{
    decay_sup, default_h_schedule, gagliardo_trend, trace_continuity_scan, DecayReport,
    SobolevTrendReport, TraceJump, Trend,
};
use sislab::fiber::{
    frame_report, gram_fiber_with, FrameReport, FrameVerdict, SetGeometry, DEFAULT_EIG_FLOOR,
    DEFAULT_RANK_TOL, TRUNC_EXCLUDE_THRESHOLD,
};
use sislab::genlib::{make_preset, GeneratorSet};
use sislab::grid::GridSpec;
use sislab::invariance::{check_gamma_invariance, InvarianceReport, InvarianceVerdict};
use sislab::lattice::{FundamentalDomain, Group};
use sislab::report::{csv_preamble, envelope_json, fibers_csv, fmt_e, gram_fiber_rows};
use sislab::{Error, Result};

const EXIT_MISMATCH: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sislab",
    version,
    about = "Fiberwise analysis of finitely generated shift-invariant spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a generator set and write it as JSON
    Construct(ConstructArgs),
    /// Frame/Riesz spectrum and extra-invariance verdicts
    Check(CheckArgs),
    /// Decay and smoothness trend tables
    Diagnose(DiagnoseArgs),
    /// Run a named end-to-end scenario with embedded assertions
    Reproduce(ReproduceArgs),
}

/// Where the generator set comes from: a JSON file or a built-in preset.
#[derive(Args)]
struct SourceArgs {
    /// Generator-set JSON file (as written by `construct`)
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    gens: Option<PathBuf>,
    /// Built-in preset: sinc | hat | regular | sparse | sparse-family
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Preset parameters as key=value pairs (e.g. --params k=1 d=2)
    #[arg(long, value_name = "KEY=VAL", num_args = 1..)]
    params: Vec<String>,
    /// Override the shift lattice: "Z", "Z^2", "1/2 Z", or a basis matrix
    #[arg(long, value_name = "GROUP")]
    lattice: Option<String>,
}

impl SourceArgs {
    fn resolve(&self) -> Result<GeneratorSet> {
        let mut set = match (&self.gens, &self.preset) {
            (Some(path), None) => {
                if !self.params.is_empty() {
                    return Err(Error::Config("--params only applies to --preset".into()));
                }
                GeneratorSet::from_json_str(&fs::read_to_string(path)?)?
            }
            (None, Some(name)) => make_preset(name, &parse_params(&self.params)?)?,
            (None, None) => {
                return Err(Error::Config(
                    "provide a generator source: --gens PATH or --preset NAME".into(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap rejects --gens with --preset"),
        };
        if let Some(lit) = &self.lattice {
            let lattice = Group::parse(lit)?;
            set = GeneratorSet::new(lattice, set.generators)?;
        }
        Ok(set)
    }

    fn echo(&self, set: &GeneratorSet) -> SourceEcho {
        SourceEcho {
            origin: match (&self.gens, &self.preset) {
                (Some(p), _) => format!("file:{}", p.display()),
                (_, Some(name)) => format!("preset:{name}"),
                _ => "unspecified".into(),
            },
            params: parse_params(&self.params).unwrap_or_default(),
            lattice: set.lattice.to_literal(),
            generators: set.generators.iter().map(|g| g.label.clone()).collect(),
            dim: set.dim,
        }
    }
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter '{item}' is not of the form key=value")))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("duplicate parameter '{k}'")));
        }
    }
    Ok(map)
}

/// Resolved generator source, echoed into every artifact.
#[derive(Serialize)]
struct SourceEcho {
    origin: String,
    params: BTreeMap<String, String>,
    lattice: String,
    generators: Vec<String>,
    dim: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Expectation {
    /// The space gains the translations in --gamma
    Invariant,
    /// The space does not gain them
    NotInvariant,
    /// The translates form a Riesz basis
    Riesz,
    /// The translates form a frame (Riesz or not)
    Frame,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Json,
    Csv,
}

fn write_out(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output file (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn run_construct(args: &ConstructArgs) -> Result<ExitCode> {
    let set = args.source.resolve()?;
    let mut json = set.to_json_string()?;
    json.push('\n');
    write_out(&args.out, &json)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Translation group to test for extra invariance: "R", "1/2 Z", ...
    #[arg(long, value_name = "GROUP")]
    gamma: Option<String>,
    /// Samples per axis (default: 4096 in 1-d, 256 in 2-d, 64 beyond)
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Sample a random interior point of each grid cell instead of its corner
    #[arg(long)]
    jitter: bool,
    /// Seed for randomized grid options
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Relative eigenvalue threshold for numerical rank
    #[arg(long, value_name = "X", default_value_t = DEFAULT_RANK_TOL)]
    tau: f64,
    /// Eigenvalue floor below which a frame lower bound is corroborated
    /// on a refined grid
    #[arg(long, value_name = "X", default_value_t = DEFAULT_EIG_FLOOR)]
    floor: f64,
    /// Assert the outcome; exit 1 if it does not hold
    #[arg(long, value_enum, value_name = "WHAT")]
    expect: Option<Expectation>,
    /// Exit 3 instead of 1 when an invariance verdict is inconclusive
    #[arg(long)]
    strict: bool,
    /// Output file (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: json report or csv fiber-spectrum dump
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Serialize)]
struct CheckConfig {
    command: &'static str,
    source: SourceEcho,
    gamma: Option<String>,
    grid: GridSpec,
    tau: f64,
    floor: f64,
    expect: Option<Expectation>,
    strict: bool,
}

#[derive(Serialize)]
struct ExpectationEcho {
    expected: Expectation,
    satisfied: bool,
}

#[derive(Serialize)]
struct CheckPayload {
    frame: FrameReport,
    invariance: Option<InvarianceReport>,
    expectation: Option<ExpectationEcho>,
}

fn run_check(args: &CheckArgs) -> Result<ExitCode> {
    let set = args.source.resolve()?;
    let mut grid = args
        .grid
        .map(GridSpec::regular)
        .unwrap_or_else(|| GridSpec::default_for_dim(set.dim));
    if args.jitter {
        grid = grid.with_jitter(args.seed);
    }
    let gamma = args.gamma.as_deref().map(Group::parse).transpose()?;
    let frame = frame_report(&set, grid, args.tau, args.floor)?;
    let invariance = match &gamma {
        Some(g) => Some(check_gamma_invariance(&set, g, grid, args.tau)?),
        None => None,
    };

    let mut satisfied = true;
    let mut inconclusive = false;
    if let Some(exp) = args.expect {
        match exp {
            Expectation::Invariant | Expectation::NotInvariant => {
                let inv = invariance.as_ref().ok_or_else(|| {
                    Error::Config("--expect invariant/not-invariant requires --gamma".into())
                })?;
                let want = if exp == Expectation::Invariant {
                    InvarianceVerdict::Invariant
                } else {
                    InvarianceVerdict::NotInvariant
                };
                satisfied = inv.verdict == want;
                inconclusive = inv.verdict == InvarianceVerdict::Inconclusive;
            }
            Expectation::Riesz => satisfied = frame.verdict == FrameVerdict::Riesz,
            Expectation::Frame => {
                satisfied = matches!(
                    frame.verdict,
                    FrameVerdict::Riesz | FrameVerdict::FrameNotRiesz
                )
            }
        }
    }
    if let Some(inv) = &invariance {
        inconclusive |= inv.verdict == InvarianceVerdict::Inconclusive;
    }

    let config = CheckConfig {
        command: "check",
        source: args.source.echo(&set),
        gamma: gamma.as_ref().map(Group::to_literal),
        grid,
        tau: args.tau,
        floor: args.floor,
        expect: args.expect,
        strict: args.strict,
    };
    match args.format {
        Format::Json => {
            let payload = CheckPayload {
                frame,
                invariance,
                expectation: args.expect.map(|expected| ExpectationEcho {
                    expected,
                    satisfied,
                }),
            };
            write_out(&args.out, &envelope_json(&config, &payload)?)?;
        }
        Format::Csv => {
            let rows = gram_fiber_rows(&set, grid, args.tau)?;
            write_out(&args.out, &fibers_csv(&config, set.dim, set.r(), &rows)?)?;
        }
    }

    if args.strict && inconclusive {
        return Ok(ExitCode::from(EXIT_INCONCLUSIVE));
    }
    if !satisfied {
        return Ok(ExitCode::from(EXIT_MISMATCH));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Exponents for weighted decay sups
    #[arg(long = "decay-s", value_name = "S", num_args = 1.., default_values_t = vec![0.5])]
    decay_s: Vec<f64>,
    /// Exponents for truncated seminorm trends (each in (0,1))
    #[arg(long = "sobolev-s", value_name = "S", num_args = 1.., default_values_t = vec![0.5])]
    sobolev_s: Vec<f64>,
    /// Frequency window radius for seminorm schedules
    #[arg(long, value_name = "X", default_value_t = 8.0)]
    omega_cap: f64,
    /// Samples per axis for decay scans
    #[arg(long, value_name = "N", default_value_t = 512)]
    grid: usize,
    /// Output file (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Serialize)]
struct DiagnoseConfig {
    command: &'static str,
    source: SourceEcho,
    decay_s: Vec<f64>,
    sobolev_s: Vec<f64>,
    omega_cap: f64,
    grid: GridSpec,
}

#[derive(Serialize)]
struct DecayRow {
    generator: String,
    #[serde(flatten)]
    report: DecayReport,
}

#[derive(Serialize)]
struct SobolevRow {
    generator: String,
    #[serde(flatten)]
    report: SobolevTrendReport,
}

#[derive(Serialize)]
struct DiagnosePayload {
    decay: Vec<DecayRow>,
    /// Empty for multi-dimensional sets: seminorm trends are
    /// one-dimensional (analyze tensor factors separately).
    sobolev: Vec<SobolevRow>,
}

fn run_diagnose(args: &DiagnoseArgs) -> Result<ExitCode> {
    let set = args.source.resolve()?;
    let grid = GridSpec::regular(args.grid);
    let mut decay = Vec::new();
    for gen in &set.generators {
        for &s in &args.decay_s {
            decay.push(DecayRow {
                generator: gen.label.clone(),
                report: decay_sup(gen, s, grid)?,
            });
        }
    }
    let mut sobolev = Vec::new();
    if set.dim == 1 {
        let schedule = default_h_schedule(args.omega_cap);
        for gen in &set.generators {
            for &s in &args.sobolev_s {
                sobolev.push(SobolevRow {
                    generator: gen.label.clone(),
                    report: gagliardo_trend(gen, s, &schedule)?,
                });
            }
        }
    }
    let config = DiagnoseConfig {
        command: "diagnose",
        source: args.source.echo(&set),
        decay_s: args.decay_s.clone(),
        sobolev_s: args.sobolev_s.clone(),
        omega_cap: args.omega_cap,
        grid,
    };
    match args.format {
        Format::Json => {
            let payload = DiagnosePayload { decay, sobolev };
            write_out(&args.out, &envelope_json(&config, &payload)?)?;
        }
        Format::Csv => {
            let mut csv = csv_preamble(&config)?;
            csv.push_str("# decay block sups\n");
            csv.push_str("generator,s,block,sup\n");
            for row in &decay {
                for (k, sup) in row.report.block_sups.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{k},{}\n",
                        row.generator,
                        fmt_e(row.report.s),
                        fmt_e(*sup)
                    ));
                }
            }
            csv.push_str("# truncated seminorm schedule\n");
            csv.push_str("generator,s,omega_cap,h,value\n");
            for row in &sobolev {
                for e in &row.report.entries {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        row.generator,
                        fmt_e(row.report.s),
                        fmt_e(e.omega_cap),
                        fmt_e(e.h),
                        fmt_e(e.value)
                    ));
                }
            }
            write_out(&args.out, &csv)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Scenario {
    /// Orthonormal smooth pair: Gramian = identity, translation-invariant
    RegularPair,
    /// Two-dimensional tensor family (r = 4): the same checks
    RegularFamily,
    /// Sparse dyadic series: normalization, half-shift invariance,
    /// critical decay
    SparseSeries,
    /// Fiber-trace jumps of the indicator and the smooth pair
    TraceJumps,
    /// Log-divergent truncated seminorm of the indicator
    SobolevDivergence,
    /// Per-level decay growth above the critical exponent
    DecayDivergence,
    /// Curve samples of the smooth pair for plotting
    PairCurves,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Scenario to run
    #[arg(value_enum, value_name = "SCENARIO")]
    name: Scenario,
    /// Directory receiving the artifact bundle
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

struct ScenarioCtx {
    out: PathBuf,
    failures: Vec<String>,
}

impl ScenarioCtx {
    fn write(&self, name: &str, content: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, content)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn check(&mut self, ok: bool, what: &str) {
        if ok {
            println!("assert ok: {what}");
        } else {
            eprintln!("ASSERTION FAILED: {what}");
            self.failures.push(what.to_string());
        }
    }
}

/// Invariance evidence compacted for artifact bundles.
#[derive(Serialize)]
struct InvarianceSummary {
    verdict: InvarianceVerdict,
    grid: GridSpec,
    tau: f64,
    samples: usize,
    excluded: usize,
    violations: usize,
    weak_violations: usize,
    /// True when `rank G = Σ rank A` held at every non-excluded sample.
    rank_identity_everywhere: bool,
    min_rank_g: Option<usize>,
    max_rank_g: Option<usize>,
}

fn summarize(inv: &InvarianceReport) -> InvarianceSummary {
    InvarianceSummary {
        verdict: inv.verdict,
        grid: inv.grid,
        tau: inv.tau,
        samples: inv.samples,
        excluded: inv.excluded,
        violations: inv.violations,
        weak_violations: inv.weak_violations,
        rank_identity_everywhere: inv.fibers.iter().all(|f| f.ok),
        min_rank_g: inv.fibers.iter().map(|f| f.rank_g).min(),
        max_rank_g: inv.fibers.iter().map(|f| f.rank_g).max(),
    }
}

#[derive(Serialize)]
struct GramIdentityReport {
    samples: usize,
    /// Max over samples of the entrywise distance to the identity matrix.
    max_residual: f64,
    bound: f64,
    holds: bool,
}

fn gram_identity_scan(set: &GeneratorSet, grid: GridSpec, bound: f64) -> Result<GramIdentityReport> {
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let geom = SetGeometry::new(set)?;
    let r = set.r();
    let points = grid.points(&domain)?;
    let mut max_residual = 0.0f64;
    for omega in &points {
        let m = gram_fiber_with(&geom, set, omega)?;
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (m.entries[(i, j)] - Complex64::new(target, 0.0)).norm();
                max_residual = max_residual.max(dev);
            }
        }
    }
    Ok(GramIdentityReport {
        samples: points.len(),
        max_residual,
        bound,
        holds: max_residual < bound,
    })
}

#[derive(Serialize)]
struct ScenarioConfig {
    command: &'static str,
    scenario: Scenario,
    preset: &'static str,
    params: BTreeMap<&'static str, String>,
    grid: GridSpec,
    tau: f64,
}

fn scenario_config(
    scenario: Scenario,
    preset: &'static str,
    params: &[(&'static str, &str)],
    grid: GridSpec,
) -> ScenarioConfig {
    ScenarioConfig {
        command: "reproduce",
        scenario,
        preset,
        params: params.iter().map(|&(k, v)| (k, v.to_string())).collect(),
        grid,
        tau: DEFAULT_RANK_TOL,
    }
}

fn preset_set(name: &str, params: &[(&'static str, &str)]) -> Result<GeneratorSet> {
    let map: BTreeMap<String, String> = params
        .iter()
        .map(|&(k, v)| (k.to_string(), v.to_string()))
        .collect();
    make_preset(name, &map)
}

fn scenario_regular(ctx: &mut ScenarioCtx, scenario: Scenario, d: usize) -> Result<()> {
    let (samples, bound, dstr): (usize, f64, &str) = if d == 1 {
        (4096, 1e-10, "1")
    } else {
        (256, 1e-9, "2")
    };
    let params: &[(&'static str, &str)] = &[("k", "1"), ("d", dstr)];
    let set = preset_set("regular", params)?;
    let grid = GridSpec::regular(samples);
    let config = scenario_config(scenario, "regular", params, grid);

    let gram = gram_identity_scan(&set, grid, bound)?;
    ctx.write("gram_identity.json", &envelope_json(&config, &gram)?)?;

    let inv = check_gamma_invariance(&set, &Group::FullSpace { dim: d }, grid, DEFAULT_RANK_TOL)?;
    let summary = summarize(&inv);
    ctx.write("invariance.json", &envelope_json(&config, &summary)?)?;
    if d == 1 {
        let rows = gram_fiber_rows(&set, grid, DEFAULT_RANK_TOL)?;
        ctx.write("fibers.csv", &fibers_csv(&config, set.dim, set.r(), &rows)?)?;
    }

    ctx.check(
        gram.holds,
        &format!(
            "Gramian is the identity within {bound:.0e} (max residual {:.3e})",
            gram.max_residual
        ),
    );
    ctx.check(
        inv.verdict == InvarianceVerdict::Invariant,
        "space is translation-invariant",
    );
    ctx.check(
        summary.rank_identity_everywhere
            && summary.min_rank_g == Some(set.r())
            && summary.max_rank_g == Some(set.r()),
        &format!("rank G = sum of translate ranks = {} at every sample", set.r()),
    );
    Ok(())
}

#[derive(Serialize)]
struct NormalizationReport {
    samples: usize,
    excluded: usize,
    /// Max |G_11(ω) − 1| over well-resolved samples.
    max_deviation: f64,
    /// Max |G_11(ω) − 1| over all samples.
    max_deviation_all: f64,
    /// Reference unit: the squared amplitude of the first missing level.
    unit: f64,
    /// `max_deviation / unit`.
    c_measured: f64,
    c_bound: f64,
    holds: bool,
}

fn scenario_sparse(ctx: &mut ScenarioCtx) -> Result<()> {
    let params: &[(&'static str, &str)] = &[("n", "2"), ("j", "8")];
    let set = preset_set("sparse", params)?;
    let grid = GridSpec::regular(4096);
    let config = scenario_config(Scenario::SparseSeries, "sparse", params, grid);

    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let geom = SetGeometry::new(&set)?;
    let mut max_dev = 0.0f64;
    let mut max_dev_all = 0.0f64;
    let mut excluded = 0usize;
    let points = grid.points(&domain)?;
    for omega in &points {
        let m = gram_fiber_with(&geom, &set, omega)?;
        let dev = (m.entries[(0, 0)].re - 1.0).abs();
        max_dev_all = max_dev_all.max(dev);
        if m.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            excluded += 1;
        } else {
            max_dev = max_dev.max(dev);
        }
    }
    let unit = 4.0f64.powi(-8);
    let norm = NormalizationReport {
        samples: points.len(),
        excluded,
        max_deviation: max_dev,
        max_deviation_all: max_dev_all,
        unit,
        c_measured: max_dev / unit,
        c_bound: 3.0,
        holds: max_dev <= 3.0 * unit,
    };
    ctx.write("normalization.json", &envelope_json(&config, &norm)?)?;

    let gamma = Group::parse("1/2 Z")?;
    let inv = check_gamma_invariance(&set, &gamma, grid, DEFAULT_RANK_TOL)?;
    ctx.write("invariance.json", &envelope_json(&config, &summarize(&inv))?)?;

    let decay = decay_sup(&set.generators[0], 0.5, GridSpec::regular(512))?;
    ctx.write("decay.json", &envelope_json(&config, &decay)?)?;

    ctx.check(
        norm.holds,
        &format!(
            "translates are normalized within {:.1}·4^-8 (measured c = {:.3})",
            norm.c_bound, norm.c_measured
        ),
    );
    ctx.check(
        inv.verdict == InvarianceVerdict::Invariant,
        "space gains invariance under half-integer shifts",
    );
    ctx.check(
        decay.trend == Trend::Bounded && decay.sup <= 2.0,
        &format!(
            "critical decay weight stays bounded (sup {:.4}, trend {:?})",
            decay.sup, decay.trend
        ),
    );
    Ok(())
}

#[derive(Serialize)]
struct TraceScanReport {
    generator_set: String,
    spectral_constant: f64,
    threshold: f64,
    jumps: Vec<TraceJump>,
}

fn scenario_trace(ctx: &mut ScenarioCtx) -> Result<()> {
    let grid = GridSpec::regular(256);
    let s = 1.0;
    let mut csv_rows: Vec<(String, &TraceJump)> = Vec::new();
    let sinc = preset_set("sinc", &[])?;
    let pair = preset_set("regular", &[("k", "1"), ("d", "1")])?;
    let jumps_sinc = trace_continuity_scan(&sinc, &Group::FullSpace { dim: 1 }, grid, s)?;
    let jumps_pair = trace_continuity_scan(&pair, &Group::FullSpace { dim: 1 }, grid, s)?;

    for (file, name, preset, jumps) in [
        ("trace_sinc.json", "sinc", "sinc", &jumps_sinc),
        ("trace_regular.json", "regular", "regular", &jumps_pair),
    ] {
        let config = scenario_config(Scenario::TraceJumps, preset, &[], grid);
        let report = TraceScanReport {
            generator_set: name.to_string(),
            spectral_constant: s,
            threshold: 0.5 / s,
            jumps: jumps.clone(),
        };
        ctx.write(file, &envelope_json(&config, &report)?)?;
        for j in jumps {
            csv_rows.push((name.to_string(), j));
        }
    }

    let config = scenario_config(Scenario::TraceJumps, "sinc+regular", &[], grid);
    let mut csv = csv_preamble(&config)?;
    csv.push_str("generator_set,omega,omega_next,trace_before,trace_after\n");
    for (name, j) in &csv_rows {
        csv.push_str(&format!(
            "{name},{},{},{},{}\n",
            fmt_e(j.omega[0]),
            fmt_e(j.omega_next[0]),
            fmt_e(j.trace_before),
            fmt_e(j.trace_after)
        ));
    }
    ctx.write("trace_jumps.csv", &csv)?;

    for (name, jumps) in [("indicator", &jumps_sinc), ("smooth pair", &jumps_pair)] {
        ctx.check(
            jumps
                .iter()
                .any(|j| (j.trace_after - j.trace_before).abs() >= 0.5),
            &format!("{name}: at least one trace jump of magnitude >= 0.5"),
        );
    }
    Ok(())
}

fn scenario_sobolev(ctx: &mut ScenarioCtx) -> Result<()> {
    let schedule = default_h_schedule(8.0);
    let grid = GridSpec::regular(512);
    let sinc = preset_set("sinc", &[])?;
    let pair = preset_set("regular", &[("k", "1"), ("d", "1")])?;

    let config = scenario_config(Scenario::SobolevDivergence, "sinc", &[], grid);
    let rep = gagliardo_trend(&sinc.generators[0], 0.5, &schedule)?;
    ctx.write("sobolev_indicator.json", &envelope_json(&config, &rep)?)?;
    let mut csv = csv_preamble(&config)?;
    csv.push_str("omega_cap,h,value\n");
    for e in &rep.entries {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_e(e.omega_cap),
            fmt_e(e.h),
            fmt_e(e.value)
        ));
    }
    ctx.write("sobolev_schedule.csv", &csv)?;

    let config2 = scenario_config(
        Scenario::SobolevDivergence,
        "regular",
        &[("k", "1"), ("d", "1")],
        grid,
    );
    let smooth = gagliardo_trend(&pair.generators[0], 0.5, &schedule)?;
    ctx.write("sobolev_smooth.json", &envelope_json(&config2, &smooth)?)?;

    ctx.check(
        rep.trend == Trend::Diverging,
        "indicator seminorm diverges as the cutoff shrinks",
    );
    let incs: Vec<f64> = rep
        .entries
        .windows(2)
        .map(|w| w[1].value - w[0].value)
        .collect();
    let ratios: Vec<f64> = incs.iter().map(|i| i / std::f64::consts::LN_2).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    ctx.check(
        !ratios.is_empty() && ratios.iter().all(|r| (r - mean).abs() <= 0.2 * mean),
        &format!("increments per cutoff halving are a fixed multiple of log 2 (ratios {ratios:.3?})"),
    );
    ctx.check(
        smooth.trend == Trend::Bounded,
        "smooth generator's seminorm converges",
    );
    Ok(())
}

fn scenario_decay(ctx: &mut ScenarioCtx) -> Result<()> {
    let params: &[(&'static str, &str)] = &[("n", "2"), ("j", "8")];
    let set = preset_set("sparse", params)?;
    let gen = &set.generators[0];
    let grid = GridSpec::regular(512);
    let config = scenario_config(Scenario::DecayDivergence, "sparse", params, grid);

    let above = decay_sup(gen, 0.6, grid)?;
    let critical = decay_sup(gen, 0.5, grid)?;
    ctx.write("decay_above_critical.json", &envelope_json(&config, &above)?)?;
    ctx.write("decay_critical.json", &envelope_json(&config, &critical)?)?;

    let mut csv = csv_preamble(&config)?;
    csv.push_str("s,block,sup\n");
    for rep in [&critical, &above] {
        for (k, sup) in rep.block_sups.iter().enumerate() {
            csv.push_str(&format!("{},{k},{}\n", fmt_e(rep.s), fmt_e(*sup)));
        }
    }
    ctx.write("decay_blocks.csv", &csv)?;

    ctx.check(
        above.trend == Trend::Diverging,
        "decay weight diverges above the critical exponent",
    );
    let b = &above.block_sups;
    let per_level_ok = (4..b.len()).all(|j| b[j] / b[j - 1] >= 1.1);
    let cumulative = b.last().unwrap() / b[3];
    ctx.check(
        per_level_ok && cumulative >= 1.3,
        &format!(
            "per-level growth >= 1.1 with cumulative factor {cumulative:.3} >= 1.3 over the top levels"
        ),
    );
    ctx.check(
        critical.trend == Trend::Bounded && critical.sup <= 2.0,
        &format!("critical exponent stays bounded (sup {:.4})", critical.sup),
    );
    Ok(())
}

fn scenario_curves(ctx: &mut ScenarioCtx) -> Result<()> {
    let params: &[(&'static str, &str)] = &[("k", "1"), ("d", "1")];
    let set = preset_set("regular", params)?;
    let grid = GridSpec::regular(601);
    let config = scenario_config(Scenario::PairCurves, "regular", params, grid);

    let n = 600usize;
    let mut csv = csv_preamble(&config)?;
    csv.push_str("omega,phi1_hat,phi2_hat\n");
    let mut max_interior_dev = 0.0f64;
    let mut max_exterior = 0.0f64;
    for k in 0..=n {
        let omega = -0.5 + 3.0 * k as f64 / n as f64;
        let v1 = set.generators[0].eval(&[omega]).re;
        let v2 = set.generators[1].eval(&[omega]).re;
        csv.push_str(&format!("{},{},{}\n", fmt_e(omega), fmt_e(v1), fmt_e(v2)));
        let norm2 = v1 * v1 + v2 * v2;
        if (0.0..2.0).contains(&omega) {
            max_interior_dev = max_interior_dev.max((norm2 - 1.0).abs());
        } else {
            max_exterior = max_exterior.max(norm2);
        }
    }
    ctx.write("curves.csv", &csv)?;

    ctx.check(
        max_interior_dev <= 1e-12,
        &format!("pointwise norm is 1 on the support (max deviation {max_interior_dev:.2e})"),
    );
    ctx.check(
        max_exterior == 0.0,
        "both curves vanish outside the support",
    );
    Ok(())
}

fn run_reproduce(args: &ReproduceArgs) -> Result<ExitCode> {
    fs::create_dir_all(&args.out)?;
    let mut ctx = ScenarioCtx {
        out: args.out.clone(),
        failures: Vec::new(),
    };
    match args.name {
        Scenario::RegularPair => scenario_regular(&mut ctx, Scenario::RegularPair, 1)?,
        Scenario::RegularFamily => scenario_regular(&mut ctx, Scenario::RegularFamily, 2)?,
        Scenario::SparseSeries => scenario_sparse(&mut ctx)?,
        Scenario::TraceJumps => scenario_trace(&mut ctx)?,
        Scenario::SobolevDivergence => scenario_sobolev(&mut ctx)?,
        Scenario::DecayDivergence => scenario_decay(&mut ctx)?,
        Scenario::PairCurves => scenario_curves(&mut ctx)?,
    }
    if ctx.failures.is_empty() {
        println!("scenario passed");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} assertion(s) failed", ctx.failures.len());
        Ok(ExitCode::from(EXIT_MISMATCH))
    }
}

// ---------------------------------------------------------------------------

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Cmd::Construct(args) => run_construct(args),
        Cmd::Check(args) => run_check(args),
        Cmd::Diagnose(args) => run_diagnose(args),
        Cmd::Reproduce(args) => run_reproduce(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
