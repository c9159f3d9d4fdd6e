//! Figures of merit and the timing harness.
//!
//! * MLUPS: `lx * ly / (t * 1e6)`.
//! * Bandwidth: every population is read once and written once; without
//!   streaming stores each write also costs a read-for-ownership, so one
//!   element moves 2 (`nt`) or 3 (`rfo`) times.
//! * Flop rate: `lx * ly * flops_per_site / (t * 1e9)`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::energy::EnergyReport;
use crate::layout::LayoutKind;

/// Version of the CSV column set below.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("iteration time must be positive, got {0}")]
    NonPositiveTime(f64),
}

fn check_time(t: f64) -> Result<(), MetricsError> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(MetricsError::NonPositiveTime(t))
    }
}

/// Memory transfers charged per population element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficModel {
    /// Read plus non-temporal write.
    Nt,
    /// Read, read-for-ownership, write.
    Rfo,
}

impl TrafficModel {
    pub fn transfers(self) -> f64 {
        match self {
            TrafficModel::Nt => 2.0,
            TrafficModel::Rfo => 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrafficModel::Nt => "nt",
            TrafficModel::Rfo => "rfo",
        }
    }
}

impl fmt::Display for TrafficModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrafficModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nt" => Ok(TrafficModel::Nt),
            "rfo" => Ok(TrafficModel::Rfo),
            other => Err(format!(
                "unknown traffic model `{other}` (expected nt or rfo)"
            )),
        }
    }
}

pub fn mlups(lx: usize, ly: usize, t_iter: f64) -> Result<f64, MetricsError> {
    check_time(t_iter)?;
    Ok((lx * ly) as f64 / (t_iter * 1e6))
}

pub fn propagate_gbps(
    lx: usize,
    ly: usize,
    npop: usize,
    t_iter: f64,
    traffic: TrafficModel,
) -> Result<f64, MetricsError> {
    check_time(t_iter)?;
    Ok((lx * ly * npop * 8) as f64 * traffic.transfers() / (t_iter * 1e9))
}

pub fn collide_gflops(
    lx: usize,
    ly: usize,
    flops_per_site: f64,
    t_iter: f64,
) -> Result<f64, MetricsError> {
    check_time(t_iter)?;
    Ok((lx * ly) as f64 * flops_per_site / (t_iter * 1e9))
}

/// Per-iteration wall times of one timed run.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub samples: Vec<f64>,
    pub warmup: usize,
    pub median: f64,
    pub min: f64,
    /// Smallest observable step of the monotonic clock, seconds.
    pub clock_resolution: f64,
}

pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Smallest nonzero difference between consecutive `Instant` readings.
/// Measured once per process.
pub fn clock_resolution() -> f64 {
    static RESOLUTION: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *RESOLUTION.get_or_init(measure_resolution)
}

fn measure_resolution() -> f64 {
    let mut best = Duration::MAX;
    for _ in 0..200 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best.as_secs_f64()
}

/// Run `kernel` `warmup` times untimed, then `iterations` times timed.
pub fn timing_harness<E>(
    mut kernel: impl FnMut() -> Result<(), E>,
    iterations: usize,
    warmup: usize,
) -> Result<Timing, E> {
    let iterations = iterations.max(1);
    for _ in 0..warmup {
        kernel()?;
    }
    let mut samples = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let start = Instant::now();
        kernel()?;
        samples.push(start.elapsed().as_secs_f64());
    }
    Ok(Timing {
        median: median(&samples),
        min: samples.iter().copied().fold(f64::INFINITY, f64::min),
        samples,
        warmup,
        clock_resolution: clock_resolution(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Propagate,
    Collide,
    /// Halo exchange, propagate and collide.
    Step,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Propagate, KernelKind::Collide, KernelKind::Step];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Propagate => "propagate",
            KernelKind::Collide => "collide",
            KernelKind::Step => "step",
        }
    }

    /// Population sweeps (one read and one write of every element) per
    /// iteration.
    pub fn sweeps(self) -> f64 {
        match self {
            KernelKind::Propagate | KernelKind::Collide => 1.0,
            KernelKind::Step => 2.0,
        }
    }

    pub fn does_arithmetic(self) -> bool {
        !matches!(self, KernelKind::Propagate)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Derived figures for one `(kernel, layout, vl, workers)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub kernel: KernelKind,
    pub layout: LayoutKind,
    pub vl: usize,
    pub workers: usize,
    pub lx: usize,
    pub ly: usize,
    pub npop: usize,
    pub iterations: usize,
    pub warmup: usize,
    pub t_median: f64,
    pub t_min: f64,
    pub clock_resolution: f64,
    pub mlups: f64,
    pub gbps: f64,
    pub gflops: f64,
    pub flops_per_site: f64,
    pub traffic: TrafficModel,
    pub streaming_stores: bool,
    pub energy: Option<EnergyReport>,
}

/// What a benchmark cell measured, before deriving rates.
#[derive(Debug, Clone, Copy)]
pub struct CellSpec {
    pub kernel: KernelKind,
    pub layout: LayoutKind,
    pub vl: usize,
    pub workers: usize,
    pub lx: usize,
    pub ly: usize,
    pub npop: usize,
    pub flops_per_site: f64,
    pub traffic: TrafficModel,
    pub streaming_stores: bool,
}

impl BenchReport {
    /// Derive all rates from the median iteration time.
    pub fn new(spec: CellSpec, timing: &Timing) -> Result<Self, MetricsError> {
        let t = timing.median;
        let mlups = mlups(spec.lx, spec.ly, t)?;
        let gbps =
            spec.kernel.sweeps() * propagate_gbps(spec.lx, spec.ly, spec.npop, t, spec.traffic)?;
        let gflops = if spec.kernel.does_arithmetic() {
            collide_gflops(spec.lx, spec.ly, spec.flops_per_site, t)?
        } else {
            0.0
        };
        Ok(Self {
            kernel: spec.kernel,
            layout: spec.layout,
            vl: spec.vl,
            workers: spec.workers,
            lx: spec.lx,
            ly: spec.ly,
            npop: spec.npop,
            iterations: timing.samples.len(),
            warmup: timing.warmup,
            t_median: t,
            t_min: timing.min,
            clock_resolution: timing.clock_resolution,
            mlups,
            gbps,
            gflops,
            flops_per_site: spec.flops_per_site,
            traffic: spec.traffic,
            streaming_stores: spec.streaming_stores,
            energy: None,
        })
    }
}

/// Format with 6 significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mant, e) = s.split_once('e').unwrap();
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

pub const CSV_COLUMNS: [&str; 20] = [
    "schema_version",
    "kernel",
    "layout",
    "vl",
    "workers",
    "lx",
    "ly",
    "iterations",
    "warmup",
    "t_median_s",
    "t_min_s",
    "clock_resolution_s",
    "mlups",
    "gbps",
    "gflops",
    "flops_per_site",
    "traffic_model",
    "nt_stores",
    "status",
    "message",
];

pub const CSV_ENERGY_COLUMNS: [&str; 5] = [
    "joules_package_per_iter",
    "joules_dram_per_iter",
    "joules_total_per_iter",
    "avg_power_w",
    "energy_window_s",
];

/// One CSV row: a report, or a failed cell.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchRow {
    Ok(BenchReport),
    Failed {
        kernel: KernelKind,
        layout: LayoutKind,
        vl: usize,
        workers: usize,
        message: String,
    },
}

pub fn csv_header(energy: bool) -> String {
    let mut cols: Vec<&str> = CSV_COLUMNS.to_vec();
    if energy {
        cols.extend(CSV_ENERGY_COLUMNS);
    }
    cols.join(",")
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl BenchRow {
    pub fn report(&self) -> Option<&BenchReport> {
        match self {
            BenchRow::Ok(r) => Some(r),
            BenchRow::Failed { .. } => None,
        }
    }

    pub fn csv(&self, energy: bool) -> String {
        let mut fields: Vec<String> = match self {
            BenchRow::Ok(r) => vec![
                CSV_SCHEMA_VERSION.to_string(),
                r.kernel.to_string(),
                r.layout.to_string(),
                r.vl.to_string(),
                r.workers.to_string(),
                r.lx.to_string(),
                r.ly.to_string(),
                r.iterations.to_string(),
                r.warmup.to_string(),
                sig6(r.t_median),
                sig6(r.t_min),
                sig6(r.clock_resolution),
                sig6(r.mlups),
                sig6(r.gbps),
                sig6(r.gflops),
                sig6(r.flops_per_site),
                r.traffic.to_string(),
                r.streaming_stores.to_string(),
                "ok".into(),
                String::new(),
            ],
            BenchRow::Failed {
                kernel,
                layout,
                vl,
                workers,
                message,
            } => {
                let mut v = vec![
                    CSV_SCHEMA_VERSION.to_string(),
                    kernel.to_string(),
                    layout.to_string(),
                    vl.to_string(),
                    workers.to_string(),
                ];
                v.resize(CSV_COLUMNS.len() - 2, String::new());
                v.push("error".into());
                v.push(csv_escape(message));
                v
            }
        };
        if energy {
            match self.report().and_then(|r| r.energy.as_ref()) {
                Some(e) => fields.extend([
                    sig6(e.joules_package),
                    sig6(e.joules_dram),
                    sig6(e.joules_total),
                    sig6(e.avg_power_w),
                    sig6(e.duration_s),
                ]),
                None => fields.extend(std::iter::repeat_n(String::new(), CSV_ENERGY_COLUMNS.len())),
            }
        }
        fields.join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_rates() {
        assert_eq!(mlups(1, 1_000_000, 1.0).unwrap(), 1.0);
        let nt = propagate_gbps(64, 64, 37, 0.01, TrafficModel::Nt).unwrap();
        let rfo = propagate_gbps(64, 64, 37, 0.01, TrafficModel::Rfo).unwrap();
        assert!((rfo / nt - 1.5).abs() < 1e-15);
        let a = collide_gflops(128, 128, 1000.0, 0.02).unwrap();
        let b = collide_gflops(128, 128, 1000.0, 0.04).unwrap();
        assert!((a / b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_time_is_rejected() {
        assert_eq!(mlups(1, 1, 0.0), Err(MetricsError::NonPositiveTime(0.0)));
        assert!(propagate_gbps(1, 1, 37, -1.0, TrafficModel::Nt).is_err());
        assert!(collide_gflops(1, 1, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn median_and_minimum() {
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let mut calls = 0;
        let t = timing_harness(
            || {
                calls += 1;
                Ok::<(), ()>(())
            },
            1,
            5,
        )
        .unwrap();
        assert_eq!(calls, 6);
        assert_eq!(t.samples.len(), 1);
        assert_eq!(t.median, t.min);
        assert!(t.clock_resolution > 0.0);
    }

    #[test]
    fn harness_propagates_kernel_errors() {
        let r = timing_harness(|| Err::<(), _>("boom"), 3, 0);
        assert_eq!(r, Err("boom"));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(166.770_606_361_829), "166.771");
        assert_eq!(sig6(0.0125), "0.0125");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(2.5e-9), "2.5e-9");
        assert_eq!(sig6(-3.0), "-3");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn failed_rows_keep_column_count() {
        let row = BenchRow::Failed {
            kernel: KernelKind::Collide,
            layout: LayoutKind::Soa,
            vl: 8,
            workers: 2,
            message: "site (x=1, y=2): bad".into(),
        };
        for energy in [false, true] {
            let line = row.csv(energy);
            let header = csv_header(energy);
            // the quoted message holds one comma
            assert_eq!(line.split(',').count() - 1, header.split(',').count());
            assert!(line.contains("error"));
        }
    }
}
