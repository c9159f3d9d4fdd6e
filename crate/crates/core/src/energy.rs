//! Energy-to-solution from RAPL counters (Package and DRAM domains).
//!
//! Counters are read only at benchmark phase boundaries. A counter is
//! cumulative microjoules that wraps at `max_range_uj`; at most one wrap per
//! window is assumed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

/// Environment variable overriding the powercap sysfs root.
pub const POWERCAP_ROOT_ENV: &str = "D2Q37_POWERCAP_ROOT";
pub const DEFAULT_POWERCAP_ROOT: &str = "/sys/class/powercap";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("energy counters unsupported: {0}")]
    Unsupported(String),
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("after-sample timestamp {after} ns is not later than before-sample {before} ns")]
    NonIncreasingTime { before: u64, after: u64 },
    #[error("domain {0} missing from one of the samples")]
    MissingDomain(EnergyDomain),
    #[error("counter reading {value} outside [0, {max}]")]
    OutOfRange { value: u64, max: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyDomain {
    Package,
    Dram,
}

impl fmt::Display for EnergyDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyDomain::Package => "package",
            EnergyDomain::Dram => "dram",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergySample {
    pub domain: EnergyDomain,
    /// Zone name as reported by the provider, e.g. `package-0`.
    pub zone: String,
    pub energy_uj: u64,
    pub max_range_uj: u64,
    /// Monotonic nanoseconds, taken just before the counter read.
    pub timestamp_ns: u64,
}

/// Per-iteration energy over one measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub joules_package: f64,
    pub joules_dram: f64,
    pub joules_total: f64,
    pub avg_power_w: f64,
    pub duration_s: f64,
}

/// Anything that can read the energy counters.
pub trait CounterProvider {
    fn read_counters(&mut self) -> Result<Vec<EnergySample>, EnergyError>;
}

/// Nanoseconds since the first call in this process.
pub fn monotonic_ns() -> u64 {
    static EPOCH: OnceLock<Instant> = OnceLock::new();
    EPOCH.get_or_init(Instant::now).elapsed().as_nanos() as u64
}

/// Counter difference assuming at most one wrap.
pub fn wrapped_delta(before: u64, after: u64, max_range: u64) -> u64 {
    if max_range == 0 {
        return after.wrapping_sub(before);
    }
    ((after as u128 + max_range as u128 - before as u128) % max_range as u128) as u64
}

pub fn energy_to_solution(
    before: &[EnergySample],
    after: &[EnergySample],
    iterations: u64,
) -> Result<EnergyReport, EnergyError> {
    if iterations == 0 {
        return Err(EnergyError::ZeroIterations);
    }
    let mut joules = [0.0f64; 2];
    let mut t0 = u64::MAX;
    let mut t1 = 0u64;
    for b in before {
        let a = after
            .iter()
            .find(|a| a.domain == b.domain && a.zone == b.zone)
            .ok_or(EnergyError::MissingDomain(b.domain))?;
        for s in [a, b] {
            if s.energy_uj > s.max_range_uj {
                return Err(EnergyError::OutOfRange {
                    value: s.energy_uj,
                    max: s.max_range_uj,
                });
            }
        }
        if a.timestamp_ns <= b.timestamp_ns {
            return Err(EnergyError::NonIncreasingTime {
                before: b.timestamp_ns,
                after: a.timestamp_ns,
            });
        }
        let delta = wrapped_delta(b.energy_uj, a.energy_uj, b.max_range_uj);
        if b.max_range_uj > 0 && delta > b.max_range_uj / 2 {
            log::warn!(
                "{} zone {}: delta {delta} uJ exceeds half the wrap range; a second wrap would go unnoticed",
                b.domain,
                b.zone
            );
        }
        let slot = match b.domain {
            EnergyDomain::Package => 0,
            EnergyDomain::Dram => 1,
        };
        joules[slot] += delta as f64 * 1e-6;
        t0 = t0.min(b.timestamp_ns);
        t1 = t1.max(a.timestamp_ns);
    }
    let n = iterations as f64;
    let duration_s = if t1 > t0 {
        (t1 - t0) as f64 * 1e-9
    } else {
        0.0
    };
    let joules_package = joules[0] / n;
    let joules_dram = joules[1] / n;
    let joules_total = joules_package + joules_dram;
    let avg_power_w = if duration_s > 0.0 {
        joules_total * n / duration_s
    } else {
        0.0
    };
    Ok(EnergyReport {
        joules_package,
        joules_dram,
        joules_total,
        avg_power_w,
        duration_s,
    })
}

#[derive(Debug, Clone)]
struct Zone {
    domain: EnergyDomain,
    name: String,
    energy: PathBuf,
    max_range_uj: u64,
}

/// Reads the Linux powercap hierarchy (`energy_uj`, `max_energy_range_uj`
/// and `name` in each zone directory).
#[derive(Debug, Clone)]
pub struct SysfsProvider {
    zones: Vec<Zone>,
}

fn read_trimmed(path: &Path) -> Result<String, EnergyError> {
    fs::read_to_string(path)
        .map(|s| s.trim().to_string())
        .map_err(|e| EnergyError::Unsupported(format!("{}: {e}", path.display())))
}

fn read_u64(path: &Path) -> Result<u64, EnergyError> {
    let s = read_trimmed(path)?;
    s.parse()
        .map_err(|_| EnergyError::Unsupported(format!("{}: not a number: {s:?}", path.display())))
}

impl SysfsProvider {
    /// Use `$D2Q37_POWERCAP_ROOT`, or the standard sysfs location.
    pub fn discover() -> Result<Self, EnergyError> {
        let root = std::env::var_os(POWERCAP_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_POWERCAP_ROOT));
        Self::at(&root)
    }

    pub fn at(root: &Path) -> Result<Self, EnergyError> {
        let entries = fs::read_dir(root)
            .map_err(|e| EnergyError::Unsupported(format!("{}: {e}", root.display())))?;
        let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        dirs.sort();
        let mut seen = Vec::new();
        let mut zones = Vec::new();
        for dir in dirs {
            let Ok(name) = read_trimmed(&dir.join("name")) else {
                continue;
            };
            let domain = if name.starts_with("package") {
                EnergyDomain::Package
            } else if name == "dram" {
                EnergyDomain::Dram
            } else {
                continue;
            };
            // sub-zones also show up as top-level symlinks
            let canon = fs::canonicalize(&dir).unwrap_or_else(|_| dir.clone());
            if seen.contains(&canon) {
                continue;
            }
            seen.push(canon);
            let energy = dir.join("energy_uj");
            read_u64(&energy)?;
            zones.push(Zone {
                domain,
                // dram zones share a name across sockets
                name: format!(
                    "{name}@{}",
                    dir.file_name().unwrap_or_default().to_string_lossy()
                ),
                energy,
                max_range_uj: read_u64(&dir.join("max_energy_range_uj"))?,
            });
        }
        if zones.is_empty() {
            return Err(EnergyError::Unsupported(format!(
                "no package or dram zones under {}",
                root.display()
            )));
        }
        Ok(Self { zones })
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }
}

impl CounterProvider for SysfsProvider {
    fn read_counters(&mut self) -> Result<Vec<EnergySample>, EnergyError> {
        self.zones
            .iter()
            .map(|z| {
                let timestamp_ns = monotonic_ns();
                Ok(EnergySample {
                    domain: z.domain,
                    zone: z.name.clone(),
                    energy_uj: read_u64(&z.energy)?,
                    max_range_uj: z.max_range_uj,
                    timestamp_ns,
                })
            })
            .collect()
    }
}

/// Scripted counters: constant power per domain, driven by a virtual clock.
#[derive(Debug, Clone)]
pub struct FakeProvider {
    domains: Vec<FakeDomain>,
    now_ns: u64,
    /// Virtual nanoseconds added by every `read_counters`.
    pub tick_ns: u64,
}

#[derive(Debug, Clone)]
struct FakeDomain {
    domain: EnergyDomain,
    energy_uj: u64,
    max_range_uj: u64,
    power_w: f64,
    carry_uj: f64,
}

impl FakeProvider {
    pub fn new() -> Self {
        Self {
            domains: Vec::new(),
            now_ns: 1,
            tick_ns: 0,
        }
    }

    pub fn with_domain(mut self, domain: EnergyDomain, power_w: f64, max_range_uj: u64) -> Self {
        self.domains.push(FakeDomain {
            domain,
            energy_uj: 0,
            max_range_uj,
            power_w,
            carry_uj: 0.0,
        });
        self
    }

    /// Force a counter value, e.g. just below the wrap point.
    pub fn set_counter(&mut self, domain: EnergyDomain, energy_uj: u64) {
        for d in self.domains.iter_mut().filter(|d| d.domain == domain) {
            d.energy_uj = energy_uj;
        }
    }

    /// Add raw microjoules to a counter, wrapping at its range.
    pub fn bump(&mut self, domain: EnergyDomain, uj: u64) {
        for d in self.domains.iter_mut().filter(|d| d.domain == domain) {
            d.energy_uj = ((d.energy_uj as u128 + uj as u128) % d.max_range_uj as u128) as u64;
        }
    }

    /// Move the virtual clock forward, accumulating energy at constant power.
    pub fn advance(&mut self, seconds: f64) {
        self.now_ns += (seconds * 1e9).round() as u64;
        for d in &mut self.domains {
            let uj = d.power_w * seconds * 1e6 + d.carry_uj;
            let whole = uj.floor();
            d.carry_uj = uj - whole;
            d.energy_uj = ((d.energy_uj as u128 + whole as u128) % d.max_range_uj as u128) as u64;
        }
    }
}

impl Default for FakeProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl CounterProvider for FakeProvider {
    fn read_counters(&mut self) -> Result<Vec<EnergySample>, EnergyError> {
        if self.tick_ns > 0 {
            self.advance(self.tick_ns as f64 * 1e-9);
        }
        Ok(self
            .domains
            .iter()
            .map(|d| EnergySample {
                domain: d.domain,
                zone: d.domain.to_string(),
                energy_uj: d.energy_uj,
                max_range_uj: d.max_range_uj,
                timestamp_ns: self.now_ns,
            })
            .collect())
    }
}

/// Always reports the platform as unsupported.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCounters;

impl CounterProvider for NoCounters {
    fn read_counters(&mut self) -> Result<Vec<EnergySample>, EnergyError> {
        Err(EnergyError::Unsupported(
            "no energy counters configured".into(),
        ))
    }
}
