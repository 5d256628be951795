//! The `splitshower` command line.
//!
//! Exit codes: 0 on success, 1 on runtime or data errors (including failed
//! theory checks), 2 on usage errors. Options may also come from a TOML
//! file given with `--config`; keys are the long flag names, either at the
//! top level or in a table named after the subcommand, and flags on the
//! command line take precedence. The seed falls back to `SPLITSHOWER_SEED`.

use std::f64::consts::{FRAC_PI_3, PI};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::calibrate::calibrate_dataset;
use crate::entanglement::{c_circuit, c_qcd, concurrence_pure, concurrence_wootters};
use crate::error::Error;
use crate::io::{self, CheckRow, ProngRow};
use crate::jets::{Algorithm, ClusterSpec, EventSkip, FractionMode, ProngRecipe, SelectionCuts};
use crate::noise::{NoiseModel, RunBatch};
use crate::plot::{self, Style};
use crate::qcd::{amplitude_ratio_check, rho_sc};
use crate::shower::{by_rank, rejection_rate, run_shower, Readout, ShowerConfig};
use crate::splitter::{
    composed_concurrence_scan, max_relative_deviation, predicted_block_reduced, predicted_reduced_ab,
    simulated_reduced, ShowerTopology, SplittingParams, TopologyKind,
};
use crate::stats::{compare, Histogram};

pub const SEED_ENV: &str = "SPLITSHOWER_SEED";

#[derive(Debug, Parser)]
#[command(name = "splitshower", version, about = "Quantum splitting circuits: checks, calibration, showers and jets")]
pub struct Cli {
    /// TOML file with default option values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the closed forms against simulation and each other
    TheoryCheck(TheoryCheckArgs),
    /// Solve circuit parameters for a sample of momentum fractions
    Calibrate(CalibrateArgs),
    /// Run a batch of circuit executions and histogram the prong fractions
    Shower(ShowerArgs),
    /// Decluster jets from constituent events into prong fractions
    Jets(JetsArgs),
    /// Compare two fraction samples (KS and chi-square)
    Compare(CompareArgs),
    /// Concurrence of the composed three-prong circuit versus QCD
    ScanConcurrence(ScanArgs),
}

#[derive(Debug, Args)]
pub struct TheoryCheckArgs {
    /// Number of z grid points (default 1000)
    #[arg(long)]
    pub grid: Option<usize>,
    /// CSV report path
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// CSV with a `z` or `fraction` column
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Parameter CSV to write
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// SVG of the gamma1 distribution
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShowerArgs {
    /// two-prong, three-dominant, three-secondary, four-balanced or four-dominant
    #[arg(long)]
    pub topology: Option<String>,
    /// Parameter CSV from `calibrate`
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enable the noise model (implied by any of the noise levels)
    #[arg(long)]
    pub noise: bool,
    /// Two-qubit depolarizing probability
    #[arg(long)]
    pub depol: Option<f64>,
    /// Readout flip probability 0 -> 1
    #[arg(long)]
    pub p01: Option<f64>,
    /// Readout flip probability 1 -> 0
    #[arg(long)]
    pub p10: Option<f64>,
    /// Use the shifted high-side estimators instead of raw wire readings
    #[arg(long)]
    pub postprocess: bool,
    /// Per-run CSV
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Histogram CSV (defaults to <output>.hist.csv)
    #[arg(long)]
    pub histograms: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JetsArgs {
    /// JSON-lines constituent file
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Prong-fraction CSV to write
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub n_prongs: Option<usize>,
    /// per-jet-pt, pair-min or pair-max
    #[arg(long)]
    pub z_mode: Option<String>,
    #[arg(long)]
    pub jet_pt_min: Option<f64>,
    #[arg(long)]
    pub abs_eta_max: Option<f64>,
    #[arg(long)]
    pub constituent_pt_min: Option<f64>,
    #[arg(long)]
    pub jet_radius: Option<f64>,
    #[arg(long)]
    pub subjet_radius: Option<f64>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Column to compare (default: fraction, z or frac1, whichever exists)
    #[arg(long)]
    pub column: Option<String>,
    /// Keep only rows with this prong_rank
    #[arg(long)]
    pub rank: Option<i64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// CSV report path
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Momentum fraction of the first splitting
    #[arg(long)]
    pub z_first: Option<f64>,
    /// Number of evenly spaced z' values
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub z_min: Option<f64>,
    #[arg(long)]
    pub z_max: Option<f64>,
    /// Explicit comma-separated z' values (overrides the grid)
    #[arg(long, value_delimiter = ',')]
    pub z_prime: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Option values from the config file.
#[derive(Debug, Default)]
pub struct Settings {
    table: toml::Table,
    section: &'static str,
}

impl Settings {
    pub fn load(path: Option<&Path>, section: &'static str) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Settings { table: toml::Table::new(), section });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(Error::Data { path: path.into(), message: e.to_string() }))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| usage(format!("config {}: {}", path.display(), e.message())))?;
        Ok(Settings { table, section })
    }

    fn lookup(&self, key: &str) -> Option<&toml::Value> {
        fn find<'t>(t: &'t toml::Table, key: &str) -> Option<&'t toml::Value> {
            t.get(key).or_else(|| t.get(&key.replace('-', "_")))
        }
        self.table
            .get(self.section)
            .and_then(|v| v.as_table())
            .and_then(|t| find(t, key))
            .or_else(|| find(&self.table, key))
    }

    /// Value of `key` parsed as `T`; strings and numbers are both accepted.
    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        let Some(v) = self.lookup(key) else { return Ok(None) };
        let text = match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        text.parse::<T>().map(Some).map_err(|_| usage(format!("config value for '{key}' is invalid: {text}")))
    }

    fn flag(&self, key: &str, cli: bool) -> CliResult<bool> {
        Ok(cli || self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn pick<T: FromStr>(cli: Option<T>, s: &Settings, key: &str, default: T) -> CliResult<T> {
    Ok(match cli {
        Some(v) => v,
        None => s.get(key)?.unwrap_or(default),
    })
}

fn required<T: FromStr>(cli: Option<T>, s: &Settings, key: &str) -> CliResult<T> {
    match cli {
        Some(v) => Ok(v),
        None => s.get(key)?.ok_or_else(|| usage(format!("missing required option --{key}"))),
    }
}

fn seed(cli: Option<u64>, s: &Settings) -> CliResult<u64> {
    if let Some(v) = cli.or(s.get("seed")?) {
        return Ok(v);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}='{v}' is not an integer"))),
        Err(_) => Ok(0),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.verbose {
        let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    } else {
        let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a parsed command; `Ok` carries the exit code.
pub fn execute(cli: &Cli) -> CliResult<i32> {
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::TheoryCheck(a) => cmd_theory_check(a, &Settings::load(cfg, "theory-check")?),
        Command::Calibrate(a) => cmd_calibrate(a, &Settings::load(cfg, "calibrate")?),
        Command::Shower(a) => cmd_shower(a, &Settings::load(cfg, "shower")?),
        Command::Jets(a) => cmd_jets(a, &Settings::load(cfg, "jets")?),
        Command::Compare(a) => cmd_compare(a, &Settings::load(cfg, "compare")?),
        Command::ScanConcurrence(a) => cmd_scan(a, &Settings::load(cfg, "scan-concurrence")?),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Deterministic low-discrepancy points covering the block's angle domain.
fn angle_points(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let u = (0.5 + k as f64 * 0.618_033_988_749_895).fract();
            let v = (0.5 + k as f64 * 0.754_877_666_246_693).fract();
            (FRAC_PI_3 * u, PI * v)
        })
        .collect()
}

fn max_elementwise(a: &crate::qsim::DensityMatrix, b: &crate::qsim::DensityMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            worst = worst.max((a.get(i, j) - b.get(i, j)).norm());
        }
    }
    worst
}

fn check_row(check: &str, points: usize, err: f64, tol: f64) -> CheckRow {
    CheckRow {
        check: check.into(),
        points,
        max_abs_error: err,
        tolerance: tol,
        status: if err <= tol { "pass" } else { "fail" }.into(),
    }
}

/// The theory checks on a `grid`-point z grid over `[1e-3, 1 − 1e-3]`
/// (a single point means `z = 0.5`).
pub fn theory_checks(grid: usize) -> crate::Result<Vec<CheckRow>> {
    let zs = linspace(1e-3, 1.0 - 1e-3, grid);
    let mut wootters = 0.0f64;
    let mut valid = 0.0f64;
    let mut swap = 0.0f64;
    let mut ratio = 0.0f64;
    let ratio0 = amplitude_ratio_check(zs[0])?;
    let perm = [0usize, 2, 1, 3];
    for &z in &zs {
        let rho = rho_sc(z)?;
        let m = rho.matrix();
        wootters = wootters.max((concurrence_wootters(m)?.value() - c_qcd(z)?.value()).abs());
        let min_eig = m.eigenvalues()[0];
        valid = valid.max((m.trace().re - 1.0).abs()).max((-min_eig).max(0.0));
        let mirror = rho_sc(1.0 - z)?;
        for i in 0..4 {
            for j in 0..4 {
                swap = swap.max((m.get(perm[i], perm[j]) - mirror.matrix().get(i, j)).norm());
            }
        }
        ratio = ratio.max((amplitude_ratio_check(z)? - ratio0).abs());
    }
    let pts = angle_points(grid.min(50));
    let (mut block, mut composed, mut conc) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &(g1, g3)) in pts.iter().enumerate() {
        let p = SplittingParams::new(g1, g3)?;
        let t = ShowerTopology::new(TopologyKind::TwoProng, vec![p])?;
        let (ra, rb) = predicted_block_reduced(&p);
        let sa = simulated_reduced(&t, &[0])?;
        block = block.max(max_elementwise(&sa, &ra)).max(max_elementwise(&simulated_reduced(&t, &[1])?, &rb));
        conc = conc.max((concurrence_pure(&sa)?.value() - c_circuit(g1, g3)?.value()).abs());
        let (h1, h3) = pts[(k + 1) % pts.len()];
        let p1 = SplittingParams::new(h1, h3)?;
        let t3 = ShowerTopology::new(TopologyKind::ThreeDominant, vec![p1, p])?;
        let (ca, cb) = predicted_reduced_ab(p1.z(), &p)?;
        composed = composed
            .max(max_elementwise(&simulated_reduced(&t3, &[0])?, &ca))
            .max(max_elementwise(&simulated_reduced(&t3, &[1])?, &cb));
    }
    Ok(vec![
        check_row("wootters_vs_c_qcd", zs.len(), wootters, 1e-8),
        check_row("spin_density_valid", zs.len(), valid, 1e-10),
        check_row("spin_density_swap_symmetry", zs.len(), swap, 1e-12),
        check_row("amplitude_ratio_constant", zs.len(), ratio, 1e-12),
        check_row("block_reduced_states", pts.len(), block, 1e-10),
        check_row("block_concurrence", pts.len(), conc, 1e-9),
        check_row("three_dominant_reduced_states", pts.len(), composed, 1e-10),
    ])
}

fn cmd_theory_check(a: &TheoryCheckArgs, s: &Settings) -> CliResult<i32> {
    let grid: usize = pick(a.grid, s, "grid", 1000)?;
    if grid == 0 {
        return Err(usage("--grid must be at least 1"));
    }
    let report: Option<PathBuf> = a.report.clone().or(s.get("report")?);
    let rows = theory_checks(grid)?;
    if grid == 1 {
        let rho = rho_sc(0.5)?;
        println!(
            "z = 0.5: c_qcd = {}, Wootters = {}",
            c_qcd(0.5)?.value(),
            concurrence_wootters(rho.matrix())?.value()
        );
    }
    for r in &rows {
        println!("{:<32} {:>5} points  max|err| = {:.3e}  tol = {:.0e}  {}", r.check, r.points, r.max_abs_error, r.tolerance, r.status);
    }
    if let Some(p) = report {
        io::write_checks(&p, &rows)?;
    }
    Ok(if rows.iter().all(|r| r.status == "pass") { 0 } else { 1 })
}

fn cmd_calibrate(a: &CalibrateArgs, s: &Settings) -> CliResult<i32> {
    let input: PathBuf = required(a.input.clone(), s, "input")?;
    let output: PathBuf = required(a.output.clone(), s, "output")?;
    let plot_path: Option<PathBuf> = a.plot.clone().or(s.get("plot")?);
    let zs = io::read_z_samples(&input)?;
    let report = calibrate_dataset(&zs)?;
    io::write_params(&output, &report.records)?;
    println!(
        "accepted {}, rejected {}, reflected {}",
        report.records.len(),
        report.rejected.len(),
        report.reflected
    );
    for r in report.rejected.iter().take(10) {
        eprintln!("  row {} (z = {}): {}", r.index + 1, r.z, r.reason);
    }
    if report.rejected.len() > 10 {
        eprintln!("  ... {} more", report.rejected.len() - 10);
    }
    if let Some(p) = plot_path {
        let g1: Vec<f64> = report.records.iter().map(|r| r.params.gamma1()).collect();
        let h = Histogram::from_values(&g1, 0.0, FRAC_PI_3, 20)?;
        plot::save(&p, &plot::histograms_svg(&[("gamma1", &h)], "calibrated gamma1", "gamma1 [rad]"));
    }
    Ok(0)
}

fn cmd_shower(a: &ShowerArgs, s: &Settings) -> CliResult<i32> {
    let kind: TopologyKind = pick::<String>(a.topology.clone(), s, "topology", "three-dominant".into())?
        .parse()
        .map_err(|e: Error| usage(e.to_string()))?;
    let params_path: PathBuf = required(a.params.clone(), s, "params")?;
    let output: PathBuf = required(a.output.clone(), s, "output")?;
    let runs: u64 = pick(a.runs, s, "runs", 500)?;
    let shots: u64 = pick(a.shots, s, "shots", 1024)?;
    let bins: usize = pick(a.bins, s, "bins", 20)?;
    if runs == 0 || shots == 0 || bins == 0 {
        return Err(usage("--runs, --shots and --bins must be at least 1"));
    }
    let seed = seed(a.seed, s)?;
    let depol: Option<f64> = a.depol.or(s.get("depol")?);
    let p01: Option<f64> = a.p01.or(s.get("p01")?);
    let p10: Option<f64> = a.p10.or(s.get("p10")?);
    let noisy = s.flag("noise", a.noise)? || depol.is_some() || p01.is_some() || p10.is_some();
    let noise = if noisy {
        let d = NoiseModel::default();
        NoiseModel::new(p01.unwrap_or(d.readout_p01), p10.unwrap_or(d.readout_p10), depol.unwrap_or(d.twoqubit_depol))
            .map_err(|e| usage(e.to_string()))?
    } else {
        NoiseModel::noiseless()
    };
    let readout = if s.flag("postprocess", a.postprocess)? { Readout::Postprocessed } else { Readout::Raw };
    let hist_path: PathBuf = match a.histograms.clone().or(s.get("histograms")?) {
        Some(p) => p,
        None => output.with_extension("hist.csv"),
    };
    let plot_path: Option<PathBuf> = a.plot.clone().or(s.get("plot")?);

    let params: Vec<SplittingParams> = io::read_params(&params_path)?.into_iter().map(|r| r.params).collect();
    if params.is_empty() {
        return Err(Error::EmptyDataset.into());
    }
    let cfg = ShowerConfig { kind, batch: RunBatch::new(runs, shots, seed)?, noise, readout };
    info!("running {runs} x {shots} shots of {kind} ({readout}) with seed {seed}");
    let records = run_shower(&params, &cfg)?;
    let n = kind.n_prongs();
    io::write_runs(&output, &records, n)?;
    let columns = by_rank(&records, n);
    let hists = columns
        .iter()
        .map(|c| Histogram::from_values(c, 0.0, 1.0, bins))
        .collect::<crate::Result<Vec<_>>>()?;
    io::write_histograms(&hist_path, &hists)?;
    println!("runs {runs}, accepted {}, rejection rate {:.4}", columns[0].len(), rejection_rate(&records));
    for (k, c) in columns.iter().enumerate() {
        if !c.is_empty() {
            println!("  prong {}: mean {:.5}", k + 1, crate::stats::mean(c));
        }
    }
    if let Some(p) = plot_path {
        let labels: Vec<String> = (1..=n).map(|k| format!("prong {k}")).collect();
        let series: Vec<(&str, &Histogram)> = labels.iter().map(String::as_str).zip(hists.iter()).collect();
        plot::save(&p, &plot::histograms_svg(&series, &format!("{kind} prong fractions"), "momentum fraction"));
    }
    Ok(0)
}

fn cmd_jets(a: &JetsArgs, s: &Settings) -> CliResult<i32> {
    let input: PathBuf = required(a.input.clone(), s, "input")?;
    let output: PathBuf = required(a.output.clone(), s, "output")?;
    let n_prongs: usize = pick(a.n_prongs, s, "n-prongs", 2)?;
    if n_prongs < 2 {
        return Err(usage("--n-prongs must be at least 2"));
    }
    let default_mode = if n_prongs == 2 { "pair-max" } else { "per-jet-pt" };
    let mode: FractionMode = pick::<String>(a.z_mode.clone(), s, "z-mode", default_mode.into())?
        .parse()
        .map_err(|e: Error| usage(e.to_string()))?;
    if mode != FractionMode::PerJetPt && n_prongs != 2 {
        return Err(usage("pair fraction modes need --n-prongs 2"));
    }
    let d = SelectionCuts::default();
    let cuts = SelectionCuts::new(
        pick(a.jet_pt_min, s, "jet-pt-min", d.jet_pt_min)?,
        pick(a.abs_eta_max, s, "abs-eta-max", d.abs_eta_max)?,
        pick(a.constituent_pt_min, s, "constituent-pt-min", d.constituent_pt_min)?,
    )
    .map_err(|e| usage(e.to_string()))?;
    let jet_spec = ClusterSpec::new(Algorithm::AntiKt, pick(a.jet_radius, s, "jet-radius", 0.8)?).map_err(|e| usage(e.to_string()))?;
    let subjet_spec =
        ClusterSpec::new(Algorithm::CamAachen, pick(a.subjet_radius, s, "subjet-radius", 0.4)?).map_err(|e| usage(e.to_string()))?;
    let plot_path: Option<PathBuf> = a.plot.clone().or(s.get("plot")?);
    let recipe = ProngRecipe { jet_spec, subjet_spec, cuts, n_prongs, mode };

    let events = io::read_events(&input)?;
    if events.is_empty() {
        return Err(Error::Data { path: input, message: "no events".into() }.into());
    }
    let mut rows = Vec::new();
    let (mut empty, mut unselected, mut small) = (0usize, 0usize, 0usize);
    for (event_id, ev) in events.iter().enumerate() {
        match crate::jets::event_prong_fractions(ev, &recipe)? {
            Ok(fr) => rows.extend(fr.into_iter().enumerate().map(|(k, fraction)| ProngRow {
                event_id: event_id as u64,
                prong_rank: k + 1,
                fraction,
            })),
            Err(EventSkip::Empty) => empty += 1,
            Err(EventSkip::NoSelectedJet) => unselected += 1,
            Err(EventSkip::TooFewConstituents { .. }) => small += 1,
        }
    }
    if empty > 0 {
        warn!("skipped {empty} empty events");
    }
    io::write_prong_fractions(&output, &rows)?;
    println!(
        "events {}, with fractions {}, empty {empty}, no selected jet {unselected}, too few constituents {small}",
        events.len(),
        events.len() - empty - unselected - small
    );
    if let Some(p) = plot_path {
        let leading: Vec<f64> = rows.iter().filter(|r| r.prong_rank == 1).map(|r| r.fraction).collect();
        let h = Histogram::from_values(&leading, 0.0, 1.0, 20)?;
        plot::save(&p, &plot::histograms_svg(&[("leading prong", &h)], "jet prong fractions", "momentum fraction"));
    }
    Ok(0)
}

fn detect_column(path: &Path) -> crate::Result<String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Data { path: path.into(), message: e.to_string() })?;
    let headers = r.headers()?.clone();
    ["fraction", "z", "frac1"]
        .into_iter()
        .find(|c| headers.iter().any(|h| h.trim() == *c))
        .map(String::from)
        .ok_or_else(|| Error::Data { path: path.into(), message: "no fraction, z or frac1 column; use --column".into() })
}

fn cmd_compare(a: &CompareArgs, s: &Settings) -> CliResult<i32> {
    let bins: usize = pick(a.bins, s, "bins", 20)?;
    if bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    let column: Option<String> = a.column.clone().or(s.get("column")?);
    let rank: Option<i64> = a.rank.or(s.get("rank")?);
    let report_path: Option<PathBuf> = a.report.clone().or(s.get("report")?);
    let plot_path: Option<PathBuf> = a.plot.clone().or(s.get("plot")?);
    let read = |p: &Path| -> crate::Result<Vec<f64>> {
        let col = match &column {
            Some(c) => c.clone(),
            None => detect_column(p)?,
        };
        let v = io::read_column(p, &col, rank.map(|r| ("prong_rank", r)))?;
        if v.is_empty() {
            return Err(Error::Data { path: p.into(), message: format!("column '{col}' has no values") });
        }
        Ok(v)
    };
    let xa = read(&a.a)?;
    let xb = read(&a.b)?;
    let r = compare(&xa, &xb, 0.0, 1.0, bins)?;
    println!(
        "KS {:.6} (1% critical {:.6}), chi2 {:.4} over {} bins, samples {} and {}",
        r.ks_statistic, r.ks_critical_1pct, r.chi2, r.n_bins, r.samples_a, r.samples_b
    );
    if let Some(p) = report_path {
        let mut w = csv::Writer::from_path(&p).map_err(Error::from)?;
        w.serialize(r).map_err(Error::from)?;
        w.flush().map_err(Error::from)?;
    }
    if let Some(p) = plot_path {
        let ha = Histogram::from_values(&xa, 0.0, 1.0, bins)?;
        let hb = Histogram::from_values(&xb, 0.0, 1.0, bins)?;
        let la = a.a.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "a".into());
        let lb = a.b.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "b".into());
        plot::save(&p, &plot::histograms_svg(&[(&la, &ha), (&lb, &hb)], "fraction comparison", "momentum fraction"));
    }
    Ok(0)
}

fn cmd_scan(a: &ScanArgs, s: &Settings) -> CliResult<i32> {
    let z_first: f64 = required(a.z_first, s, "z-first")?;
    let output: PathBuf = required(a.output.clone(), s, "output")?;
    let plot_path: Option<PathBuf> = a.plot.clone().or(s.get("plot")?);
    let grid: Vec<f64> = match &a.z_prime {
        Some(v) => v.clone(),
        None => {
            let n: usize = pick(a.points, s, "points", 45)?;
            let lo: f64 = pick(a.z_min, s, "z-min", 0.55)?;
            let hi: f64 = pick(a.z_max, s, "z-max", 0.99)?;
            if n == 0 || !(hi >= lo) {
                return Err(usage("need --points >= 1 and --z-max >= --z-min"));
            }
            if n == 1 {
                vec![lo]
            } else {
                linspace(lo, hi, n)
            }
        }
    };
    if grid.is_empty() {
        return Err(usage("empty z' grid"));
    }
    let points = composed_concurrence_scan(z_first, &grid)?;
    io::write_scan(&output, &points)?;
    println!("z_first {z_first}: max relative deviation {:.4}% over {} points", 100.0 * max_relative_deviation(&points), points.len());
    if let Some(p) = plot_path {
        let circuit: Vec<(f64, f64)> = points.iter().map(|p| (p.z_prime, p.concurrence_circuit)).collect();
        let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let qcd: Vec<(f64, f64)> = linspace(lo, hi, 200).into_iter().map(|z| (z, c_qcd(z).map(|c| c.value()).unwrap_or(0.0))).collect();
        plot::save(
            &p,
            &plot::curves_svg(
                &[("circuit", &circuit, Style::Dots), ("QCD", &qcd, Style::Line)],
                &format!("concurrence, first splitting z = {z_first}"),
                "z'",
                "concurrence",
            ),
        );
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_lookup_prefers_section() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "runs = 10\nseed = 3\n[shower]\nruns = 20\nz_min = 0.6\n").unwrap();
        let s = Settings::load(Some(&p), "shower").unwrap();
        assert_eq!(s.get::<u64>("runs").unwrap(), Some(20));
        assert_eq!(s.get::<u64>("seed").unwrap(), Some(3));
        assert_eq!(s.get::<f64>("z-min").unwrap(), Some(0.6));
        assert_eq!(s.get::<u64>("shots").unwrap(), None);
        assert!(matches!(s.get::<u64>("z-min"), Err(CliError::Usage(_))));
        assert_eq!(pick(Some(5u64), &s, "runs", 1).unwrap(), 5);
    }

    #[test]
    fn single_point_theory_check_passes() {
        let rows = theory_checks(1).unwrap();
        assert!(rows.iter().all(|r| r.status == "pass"), "{rows:?}");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["splitshower", "theory-check", "--grid", "abc"]), 2);
        assert_eq!(run_from(["splitshower", "nonsense"]), 2);
        assert_eq!(run_from(["splitshower", "--help"]), 0);
    }
}
