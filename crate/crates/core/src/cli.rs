//! Command-line driver: validation suites, benchmark matrices, model tables.
//!
//! Options come from an optional flat `key=value` file (`--config`) and
//! from flags; flags win. Keys use underscores in the file and dashes on
//! the command line (`nt_stores` / `--nt-stores`).
//!
//! Bench presets for KNL-scale lattices:
//!
//! | preset      | lx × ly        |
//! |-------------|----------------|
//! | `medium`    | 1024 × 8192    |
//! | `large`     | 2304 × 8192    |
//! | `xlarge`    | 4608 × 12288   |

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::Parser;

use crate::energy::{energy_to_solution, CounterProvider, SysfsProvider};
use crate::kernels::{KernelError, LatticeState, Schedule, Workers};
use crate::layout::{LatticeGeometry, LayoutDescriptor, LayoutError, LayoutKind};
use crate::metrics::{
    csv_header, timing_harness, BenchReport, BenchRow, CellSpec, KernelKind, TrafficModel,
};
use crate::model::{VelocityModel, COLLIDE_FLOPS_PER_SITE, NPOP};
use crate::validation::{random_physical_state, run_validation, Comparison, ValidationConfig};

pub const BENCH_DEFAULT_GEOMETRY: (usize, usize) = (256, 1024);

pub const PRESETS: [(&str, (usize, usize)); 3] = [
    ("medium", (1024, 8192)),
    ("large", (2304, 8192)),
    ("xlarge", (4608, 12288)),
];

const KEYS: [&str; 19] = [
    "mode",
    "lx",
    "ly",
    "preset",
    "layouts",
    "vl",
    "workers",
    "schedule",
    "iterations",
    "warmup",
    "steps",
    "omega",
    "traffic",
    "nt_stores",
    "energy",
    "output",
    "seed",
    "flops_per_site",
    "tolerance",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value {value:?} for `{key}`: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{0}` must be at least 1")]
    Zero(&'static str),
    #[error("omega = {0} outside (0, 2)")]
    Omega(f64),
    #[error("lattice {lx}x{ly} with vl = {vl}: {source}")]
    Geometry {
        lx: usize,
        ly: usize,
        vl: usize,
        #[source]
        source: LayoutError,
    },
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Args(#[from] clap::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Validate,
    Bench,
    DumpModel,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "validate" => Ok(Mode::Validate),
            "bench" => Ok(Mode::Bench),
            "dump-model" => Ok(Mode::DumpModel),
            other => Err(format!(
                "unknown mode `{other}` (validate, bench, dump-model)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Validate => "validate",
            Mode::Bench => "bench",
            Mode::DumpModel => "dump-model",
        })
    }
}

/// Effective configuration after defaults, file and flags are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub geometries: Vec<(usize, usize)>,
    pub layouts: Vec<LayoutKind>,
    pub vls: Vec<usize>,
    pub workers: Vec<usize>,
    pub schedule: Schedule,
    pub iterations: usize,
    pub warmup: usize,
    /// Full steps per validation case.
    pub steps: usize,
    pub omega: f64,
    pub traffic: TrafficModel,
    pub nt_stores: bool,
    pub energy: bool,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub flops_per_site: f64,
    /// Relative tolerance for validation; `None` is bitwise.
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        let v = ValidationConfig::default();
        let bench = mode == Mode::Bench;
        Self {
            mode,
            geometries: if bench {
                vec![BENCH_DEFAULT_GEOMETRY]
            } else {
                v.geometries
            },
            layouts: LayoutKind::ALL.to_vec(),
            vls: if bench { vec![8] } else { v.vls },
            workers: if bench {
                vec![std::thread::available_parallelism().map_or(1, |n| n.get())]
            } else {
                vec![v.workers]
            },
            schedule: Schedule::Dynamic,
            iterations: 50,
            warmup: 5,
            steps: v.steps,
            omega: v.omega,
            traffic: TrafficModel::Rfo,
            nt_stores: false,
            energy: false,
            output: None,
            seed: v.seed,
            flops_per_site: COLLIDE_FLOPS_PER_SITE as f64,
            tolerance: None,
        }
    }

    fn check(&self) -> Result<(), ConfigError> {
        for (name, n) in [
            ("layouts", self.layouts.len()),
            ("vl", self.vls.len()),
            ("workers", self.workers.len()),
            ("iterations", self.iterations),
            ("steps", self.steps),
        ] {
            if n == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        if self.workers.contains(&0) {
            return Err(ConfigError::Zero("workers"));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(ConfigError::Omega(self.omega));
        }
        for &(lx, ly) in &self.geometries {
            for &vl in &self.vls {
                LatticeGeometry::new(lx, ly, vl).map_err(|source| ConfigError::Geometry {
                    lx,
                    ly,
                    vl,
                    source,
                })?;
            }
        }
        Ok(())
    }

    /// One `key=value` line per setting, in a fixed order.
    pub fn echo(&self) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let geoms: Vec<String> = self
            .geometries
            .iter()
            .map(|(x, y)| format!("{x}x{y}"))
            .collect();
        let layouts: Vec<&str> = self.layouts.iter().map(|l| l.name()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "mode={}", self.mode);
        match self.geometries.as_slice() {
            [(lx, ly)] => {
                let _ = writeln!(s, "lx={lx}\nly={ly}");
            }
            _ => {
                let _ = writeln!(s, "# lattices={}", geoms.join(","));
            }
        }
        let _ = writeln!(s, "layouts={}", layouts.join(","));
        let _ = writeln!(s, "vl={}", list(&self.vls));
        let _ = writeln!(s, "workers={}", list(&self.workers));
        let _ = writeln!(
            s,
            "schedule={}",
            match self.schedule {
                Schedule::Static => "static",
                Schedule::Dynamic => "dynamic",
            }
        );
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "warmup={}", self.warmup);
        let _ = writeln!(s, "steps={}", self.steps);
        let _ = writeln!(s, "omega={}", self.omega);
        let _ = writeln!(s, "traffic={}", self.traffic);
        let _ = writeln!(s, "nt_stores={}", self.nt_stores);
        let _ = writeln!(s, "energy={}", self.energy);
        let _ = writeln!(
            s,
            "output={}",
            self.output
                .as_ref()
                .map_or("-".to_string(), |p| p.display().to_string())
        );
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "flops_per_site={}", self.flops_per_site);
        let _ = writeln!(
            s,
            "tolerance={}",
            self.tolerance
                .map_or("bitwise".to_string(), |t| t.to_string())
        );
        s
    }

    pub fn validation_config(&self) -> ValidationConfig {
        ValidationConfig {
            geometries: self.geometries.clone(),
            vls: self.vls.clone(),
            layouts: self.layouts.clone(),
            steps: self.steps,
            seed: self.seed,
            omega: self.omega,
            workers: self.workers.iter().copied().max().unwrap_or(1),
            comparison: self
                .tolerance
                .map_or(Comparison::Bitwise, Comparison::Relative),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "d2q37",
    about = "D2Q37 lattice Boltzmann layouts: validate, bench, dump-model"
)]
struct Flags {
    /// validate | bench | dump-model
    mode: Option<String>,
    /// Flat key=value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lx: Option<String>,
    #[arg(long)]
    ly: Option<String>,
    /// medium (1024x8192), large (2304x8192) or xlarge (4608x12288).
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated: aos,soa,csoa,caosoa.
    #[arg(long)]
    layouts: Option<String>,
    /// Comma-separated cluster lengths.
    #[arg(long, alias = "vls")]
    vl: Option<String>,
    /// Comma-separated worker counts.
    #[arg(long)]
    workers: Option<String>,
    /// static | dynamic
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    /// nt | rfo
    #[arg(long)]
    traffic: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    nt_stores: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    energy: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    flops_per_site: Option<String>,
    /// Relative tolerance for validation instead of bitwise comparison.
    #[arg(long)]
    tolerance: Option<String>,
}

impl Flags {
    fn into_pairs(self) -> Vec<(&'static str, String)> {
        let Flags {
            mode,
            config: _,
            lx,
            ly,
            preset,
            layouts,
            vl,
            workers,
            schedule,
            iterations,
            warmup,
            steps,
            omega,
            traffic,
            nt_stores,
            energy,
            output,
            seed,
            flops_per_site,
            tolerance,
        } = self;
        [
            ("mode", mode),
            ("lx", lx),
            ("ly", ly),
            ("preset", preset),
            ("layouts", layouts),
            ("vl", vl),
            ("workers", workers),
            ("schedule", schedule),
            ("iterations", iterations),
            ("warmup", warmup),
            ("steps", steps),
            ("omega", omega),
            ("traffic", traffic),
            ("nt_stores", nt_stores),
            ("energy", energy),
            ("output", output),
            ("seed", seed),
            ("flops_per_site", flops_per_site),
            ("tolerance", tolerance),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

/// Parse a flat `key=value` file. `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.into(),
        value: v.into(),
        reason: e.to_string(),
    })
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| value(key, s))
        .collect()
}

/// Merge `file` (already read) and `argv` (including the program name)
/// into a validated configuration.
pub fn parse_config<I, S>(argv: I, file: Option<&str>) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let flags = Flags::try_parse_from(argv)?;
    let mut map = match file {
        Some(text) => parse_config_file(text)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags.into_pairs() {
        map.insert(k.to_string(), v);
    }
    from_map(&map)
}

/// Like [`parse_config`], reading the file named by `--config` if given.
pub fn load_config(argv: &[String]) -> Result<RunConfig, ConfigError> {
    let flags = Flags::try_parse_from(argv)?;
    let text = match &flags.config {
        Some(path) => Some(
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?,
        ),
        None => None,
    };
    parse_config(argv, text.as_deref())
}

fn from_map(map: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let mode: Mode = match get("mode") {
        Some(v) => value("mode", v)?,
        None => Mode::Validate,
    };
    let mut cfg = RunConfig::defaults(mode);

    let mut geometry = None;
    if let Some(p) = get("preset") {
        let (_, g) =
            PRESETS
                .iter()
                .find(|(name, _)| *name == p)
                .ok_or_else(|| ConfigError::Value {
                    key: "preset".into(),
                    value: p.into(),
                    reason: "expected medium, large or xlarge".into(),
                })?;
        geometry = Some(*g);
    }
    let lx: Option<usize> = get("lx").map(|v| value("lx", v)).transpose()?;
    let ly: Option<usize> = get("ly").map(|v| value("ly", v)).transpose()?;
    if lx.is_some() || ly.is_some() {
        let base = geometry.unwrap_or(BENCH_DEFAULT_GEOMETRY);
        geometry = Some((lx.unwrap_or(base.0), ly.unwrap_or(base.1)));
    }
    if let Some(g) = geometry {
        cfg.geometries = vec![g];
    }

    if let Some(v) = get("layouts") {
        cfg.layouts = list("layouts", v)?;
    }
    if let Some(v) = get("vl") {
        cfg.vls = list("vl", v)?;
    }
    if let Some(v) = get("workers") {
        cfg.workers = list("workers", v)?;
    }
    if let Some(v) = get("schedule") {
        cfg.schedule = value("schedule", v)?;
    }
    if let Some(v) = get("iterations") {
        cfg.iterations = value("iterations", v)?;
    }
    if let Some(v) = get("warmup") {
        cfg.warmup = value("warmup", v)?;
    }
    if let Some(v) = get("steps") {
        cfg.steps = value("steps", v)?;
    }
    if let Some(v) = get("omega") {
        cfg.omega = value("omega", v)?;
    }
    if let Some(v) = get("nt_stores") {
        cfg.nt_stores = value("nt_stores", v)?;
    }
    // the accounting follows the store kind unless set explicitly
    cfg.traffic = match get("traffic") {
        Some(v) => value("traffic", v)?,
        None if cfg.nt_stores => TrafficModel::Nt,
        None => TrafficModel::Rfo,
    };
    if let Some(v) = get("energy") {
        cfg.energy = value("energy", v)?;
    }
    if let Some(v) = get("output") {
        cfg.output = (v != "-").then(|| PathBuf::from(v));
    }
    if let Some(v) = get("seed") {
        cfg.seed = value("seed", v)?;
    }
    if let Some(v) = get("flops_per_site") {
        cfg.flops_per_site = value("flops_per_site", v)?;
    }
    if let Some(v) = get("tolerance") {
        cfg.tolerance = match v {
            "bitwise" => None,
            _ => Some(value("tolerance", v)?),
        };
    }
    cfg.check()?;
    Ok(cfg)
}

/// Rows of one benchmark matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    /// Whether any row carries energy figures.
    pub energy_columns: bool,
}

impl BenchTable {
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{}", csv_header(self.energy_columns))?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv(self.energy_columns))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

fn cell_state(
    model: &Arc<VelocityModel>,
    kind: LayoutKind,
    lx: usize,
    ly: usize,
    vl: usize,
    canonical: &[f64],
    nt_stores: bool,
) -> Result<LatticeState, KernelError> {
    let geometry = LatticeGeometry::new(lx, ly, vl)?;
    let desc = LayoutDescriptor::d2q37(kind, geometry);
    let mut state = LatticeState::from_canonical(desc, model.clone(), canonical)?;
    state.set_streaming_stores(nt_stores);
    state.halo_exchange();
    // fill `nxt` so collide has populations to read
    state.propagate(&Workers::serial());
    Ok(state)
}

/// Time one kernel, reading energy counters right around the timed loop.
fn time_kernel(
    state: &mut LatticeState,
    kernel: KernelKind,
    cfg: &RunConfig,
    workers: &Workers,
    energy: &mut Option<&mut dyn CounterProvider>,
) -> Result<(crate::metrics::Timing, Option<crate::energy::EnergyReport>), KernelError> {
    let omega = cfg.omega;
    let run = |s: &mut LatticeState| -> Result<(), KernelError> {
        match kernel {
            KernelKind::Propagate => {
                s.propagate(workers);
                Ok(())
            }
            KernelKind::Collide => s.collide(omega, workers),
            KernelKind::Step => s.step(omega, workers),
        }
    };
    for _ in 0..cfg.warmup {
        run(state)?;
    }
    let before = energy.as_mut().and_then(|p| p.read_counters().ok());
    let mut timing = timing_harness(|| run(state), cfg.iterations, 0)?;
    let after = energy.as_mut().and_then(|p| p.read_counters().ok());
    timing.warmup = cfg.warmup;
    let report = match (before, after) {
        (Some(b), Some(a)) => match energy_to_solution(&b, &a, timing.samples.len() as u64) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("{kernel}: energy not recorded: {e}");
                None
            }
        },
        _ => None,
    };
    Ok((timing, report))
}

/// Run every `layout × vl × workers` cell and time propagate, collide and a
/// full step in each. A failing cell becomes error rows; the run goes on.
pub fn run_bench_matrix(
    cfg: &RunConfig,
    model: &Arc<VelocityModel>,
    mut energy: Option<&mut dyn CounterProvider>,
) -> BenchTable {
    let mut rows = Vec::new();
    for &(lx, ly) in &cfg.geometries {
        let canonical = random_physical_state(lx, ly, model, cfg.seed).to_canonical();
        for &layout in &cfg.layouts {
            for &vl in &cfg.vls {
                for &threads in &cfg.workers {
                    let fail = |message: String| {
                        KernelKind::ALL.map(|kernel| BenchRow::Failed {
                            kernel,
                            layout,
                            vl,
                            workers: threads,
                            message: message.clone(),
                        })
                    };
                    let workers = match Workers::new(threads, cfg.schedule) {
                        Ok(w) => w,
                        Err(e) => {
                            rows.extend(fail(e.to_string()));
                            continue;
                        }
                    };
                    let mut state =
                        match cell_state(model, layout, lx, ly, vl, &canonical, cfg.nt_stores) {
                            Ok(s) => s,
                            Err(e) => {
                                rows.extend(fail(e.to_string()));
                                continue;
                            }
                        };
                    for kernel in KernelKind::ALL {
                        let spec = CellSpec {
                            kernel,
                            layout,
                            vl,
                            workers: threads,
                            lx,
                            ly,
                            npop: NPOP,
                            flops_per_site: cfg.flops_per_site,
                            traffic: cfg.traffic,
                            streaming_stores: cfg.nt_stores,
                        };
                        let row = time_kernel(&mut state, kernel, cfg, &workers, &mut energy)
                            .map_err(|e| e.to_string())
                            .and_then(|(timing, e)| {
                                let mut r =
                                    BenchReport::new(spec, &timing).map_err(|e| e.to_string())?;
                                r.energy = e;
                                Ok(r)
                            });
                        rows.push(match row {
                            Ok(r) => BenchRow::Ok(r),
                            Err(message) => BenchRow::Failed {
                                kernel,
                                layout,
                                vl,
                                workers: threads,
                                message,
                            },
                        });
                        log::info!("{layout} vl={vl} workers={threads} {kernel} done");
                    }
                }
            }
        }
    }
    let energy_columns = rows
        .iter()
        .any(|r| r.report().is_some_and(|r| r.energy.is_some()));
    BenchTable {
        rows,
        energy_columns,
    }
}

/// Best MLUPS per layout and kernel, relative to the better of AoS and SoA.
pub fn trend_report(table: &BenchTable) -> String {
    let mut s = String::from("kernel     layout   best MLUPS   vs best(AoS,SoA)\n");
    for kernel in KernelKind::ALL {
        let best = |layout: LayoutKind| {
            table
                .rows
                .iter()
                .filter_map(BenchRow::report)
                .filter(|r| r.kernel == kernel && r.layout == layout)
                .map(|r| r.mlups)
                .fold(None, |acc: Option<f64>, m| {
                    Some(acc.map_or(m, |a| a.max(m)))
                })
        };
        let baseline = [LayoutKind::Aos, LayoutKind::Soa]
            .into_iter()
            .filter_map(best)
            .fold(None, |acc: Option<f64>, m| {
                Some(acc.map_or(m, |a| a.max(m)))
            });
        for layout in LayoutKind::ALL {
            let Some(m) = best(layout) else { continue };
            let ratio = baseline.map_or("-".to_string(), |b| format!("{:.2}x", m / b));
            let _ = writeln!(
                s,
                "{:<10} {:<8} {:>10.2}   {}",
                kernel.name(),
                layout.name(),
                m,
                ratio
            );
        }
    }
    s
}

fn open_output(cfg: &RunConfig) -> io::Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => Box::new(io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Execute `cfg`. Returns the process exit status: 1 if validation failed,
/// 0 otherwise. Benchmark slowness or failed cells are not errors.
pub fn execute(cfg: &RunConfig, log_out: &mut dyn Write) -> io::Result<i32> {
    let model = match VelocityModel::d2q37() {
        Ok(m) => Arc::new(m),
        Err(e) => {
            writeln!(log_out, "model construction failed: {e}")?;
            return Ok(1);
        }
    };
    match cfg.mode {
        Mode::Validate => {
            let report = run_validation(&cfg.validation_config(), &model);
            let mut out = open_output(cfg)?;
            writeln!(out, "{report}")?;
            out.flush()?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Mode::DumpModel => {
            let mut out = open_output(cfg)?;
            model.write_table(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Mode::Bench => {
            let mut sysfs = None;
            if cfg.energy {
                match SysfsProvider::discover() {
                    Ok(p) => sysfs = Some(p),
                    Err(e) => {
                        writeln!(log_out, "energy: {e}; continuing without energy columns")?;
                    }
                }
            }
            let provider = sysfs.as_mut().map(|p| p as &mut dyn CounterProvider);
            let table = run_bench_matrix(cfg, &model, provider);
            let mut out = open_output(cfg)?;
            table.write_csv(&mut out)?;
            out.flush()?;
            write!(log_out, "{}", trend_report(&table))?;
            Ok(0)
        }
    }
}

/// Entry point for the binary. Config errors exit with status 2.
pub fn main_with_args(argv: &[String]) -> i32 {
    let mut err = io::stderr().lock();
    let cfg = match load_config(argv) {
        Ok(c) => c,
        Err(ConfigError::Args(e)) => {
            let _ = e.print();
            // --help and --version are not errors
            return if e.use_stderr() { 2 } else { 0 };
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let _ = write!(err, "{}", cfg.echo());
    match execute(&cfg, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
