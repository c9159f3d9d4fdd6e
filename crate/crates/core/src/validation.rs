//! Scalar reference lattice and the cross-layout validation suite.
//!
//! [`OracleLattice`] is a plain `[x][y][p]` array with periodic neighbours
//! found by explicit modular arithmetic. It shares no index code with the
//! `layout` module; the only thing both sides have in common is the per-site
//! model math and the canonical dump order used to compare them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernels::{Buffer, LatticeState, Schedule, Workers};
use crate::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};
use crate::model::{Macros, ModelError, VelocityModel, NPOP};

/// Halo-free reference lattice, value of `(x, y, p)` at `(x * ly + y) * npop + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLattice {
    pub lx: usize,
    pub ly: usize,
    pub npop: usize,
    pub data: Vec<f64>,
}

impl OracleLattice {
    pub fn zeros(lx: usize, ly: usize, npop: usize) -> Self {
        Self {
            lx,
            ly,
            npop,
            data: vec![0.0; lx * ly * npop],
        }
    }

    pub fn at(&self, x: usize, y: usize, p: usize) -> f64 {
        self.data[(x * self.ly + y) * self.npop + p]
    }

    pub fn at_mut(&mut self, x: usize, y: usize, p: usize) -> &mut f64 {
        &mut self.data[(x * self.ly + y) * self.npop + p]
    }

    /// Values in canonical dump order `(p * lx + x) * ly + y`.
    pub fn to_canonical(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.data.len()];
        for x in 0..self.lx {
            for y in 0..self.ly {
                for p in 0..self.npop {
                    out[(p * self.lx + x) * self.ly + y] = self.at(x, y, p);
                }
            }
        }
        out
    }

    pub fn from_canonical(lx: usize, ly: usize, npop: usize, data: &[f64]) -> Self {
        let mut lat = Self::zeros(lx, ly, npop);
        for p in 0..npop {
            for x in 0..lx {
                for y in 0..ly {
                    *lat.at_mut(x, y, p) = data[(p * lx + x) * ly + y];
                }
            }
        }
        lat
    }
}

/// Pull streaming with periodic wrap: `out[x][y][p] = in[x - cx_p][y - cy_p][p]`.
pub fn oracle_propagate(lat: &OracleLattice, velocities: &[[i32; 2]]) -> OracleLattice {
    assert_eq!(velocities.len(), lat.npop);
    let (lx, ly) = (lat.lx as i64, lat.ly as i64);
    let mut out = OracleLattice::zeros(lat.lx, lat.ly, lat.npop);
    for x in 0..lx {
        for y in 0..ly {
            for (p, c) in velocities.iter().enumerate() {
                let sx = (x - c[0] as i64).rem_euclid(lx) as usize;
                let sy = (y - c[1] as i64).rem_euclid(ly) as usize;
                *out.at_mut(x as usize, y as usize, p) = lat.at(sx, sy, p);
            }
        }
    }
    out
}

/// Site-by-site collision through [`VelocityModel::collide_site`].
pub fn oracle_collide(
    lat: &OracleLattice,
    omega: f64,
    model: &VelocityModel,
) -> Result<OracleLattice, ModelError> {
    let mut out = lat.clone();
    for x in 0..lat.lx {
        for y in 0..lat.ly {
            let f: [f64; NPOP] = std::array::from_fn(|p| lat.at(x, y, p));
            let g = model.collide_site(&f, omega)?;
            for (p, v) in g.into_iter().enumerate() {
                *out.at_mut(x, y, p) = v;
            }
        }
    }
    Ok(out)
}

/// A reproducible, physical, slightly off-equilibrium lattice: local
/// equilibria with `rho in [0.9, 1.1]`, `|u_i| <= 0.07`, `temp/t0 in
/// [0.85, 1.15]`, each population perturbed by up to 1%.
pub fn random_physical_state(
    lx: usize,
    ly: usize,
    model: &VelocityModel,
    seed: u64,
) -> OracleLattice {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lat = OracleLattice::zeros(lx, ly, NPOP);
    for x in 0..lx {
        for y in 0..ly {
            let m = Macros::new(
                rng.random_range(0.9..1.1),
                rng.random_range(-0.07..0.07),
                rng.random_range(-0.07..0.07),
                model.t0() * rng.random_range(0.85..1.15),
            );
            let feq = model.equilibrium(&m);
            for (p, v) in feq.into_iter().enumerate() {
                *lat.at_mut(x, y, p) = v * (1.0 + rng.random_range(-0.01..0.01));
            }
        }
    }
    lat
}

/// How kernel results are compared with the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparison {
    Bitwise,
    /// Relative tolerance, for kernel variants that reorder arithmetic.
    Relative(f64),
}

impl Comparison {
    fn matches(self, expected: f64, actual: f64) -> bool {
        match self {
            Comparison::Bitwise => expected.to_bits() == actual.to_bits(),
            Comparison::Relative(tol) => {
                (expected - actual).abs() <= tol * expected.abs().max(actual.abs())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    pub geometries: Vec<(usize, usize)>,
    pub vls: Vec<usize>,
    pub layouts: Vec<LayoutKind>,
    pub steps: usize,
    pub seed: u64,
    pub omega: f64,
    pub workers: usize,
    pub comparison: Comparison,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            geometries: vec![(16, 32), (64, 128)],
            vls: vec![1, 2, 4, 8],
            layouts: LayoutKind::ALL.to_vec(),
            steps: 10,
            seed: 2017,
            omega: 1.2,
            workers: 4,
            comparison: Comparison::Bitwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Propagate,
    Collide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub step: usize,
    pub phase: Phase,
    pub x: usize,
    pub y: usize,
    pub p: usize,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Diverged(Divergence),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub lx: usize,
    pub ly: usize,
    pub layout: LayoutKind,
    pub vl: usize,
    pub outcome: Outcome,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = format!("{}x{} {:<6} vl={}", self.lx, self.ly, self.layout, self.vl);
        match &self.outcome {
            Outcome::Pass => write!(f, "PASS {head}"),
            Outcome::Diverged(d) => write!(
                f,
                "FAIL {head}: step {} {:?} first differs at x={} y={} p={} (expected {:e}, got {:e})",
                d.step, d.phase, d.x, d.y, d.p, d.expected, d.actual
            ),
            Outcome::Error(e) => write!(f, "FAIL {head}: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub cases: Vec<CaseReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(CaseReport::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for case in &self.cases {
            writeln!(f, "{case}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} cases, {} passed, {} failed",
            self.cases.len(),
            self.cases.len() - failed,
            failed
        )
    }
}

fn first_divergence(
    expected: &OracleLattice,
    actual_canonical: &[f64],
    cmp: Comparison,
    step: usize,
    phase: Phase,
) -> Option<Divergence> {
    let (lx, ly) = (expected.lx, expected.ly);
    for x in 0..lx {
        for y in 0..ly {
            for p in 0..expected.npop {
                let e = expected.at(x, y, p);
                let a = actual_canonical[(p * lx + x) * ly + y];
                if !cmp.matches(e, a) {
                    return Some(Divergence {
                        step,
                        phase,
                        x,
                        y,
                        p,
                        expected: e,
                        actual: a,
                    });
                }
            }
        }
    }
    None
}

/// Run the configured matrix against the oracle.
pub fn run_validation(cfg: &ValidationConfig, model: &Arc<VelocityModel>) -> ValidationReport {
    run_validation_with(cfg, model, |_| {})
}

/// As [`run_validation`], letting `prepare` alter each kernel state before
/// it runs (fault injection).
pub fn run_validation_with(
    cfg: &ValidationConfig,
    model: &Arc<VelocityModel>,
    prepare: impl Fn(&mut LatticeState),
) -> ValidationReport {
    let workers = match Workers::new(cfg.workers, Schedule::Dynamic) {
        Ok(w) => w,
        Err(e) => {
            return ValidationReport {
                cases: vec![CaseReport {
                    lx: 0,
                    ly: 0,
                    layout: LayoutKind::Aos,
                    vl: 0,
                    outcome: Outcome::Error(e.to_string()),
                }],
            }
        }
    };
    let mut cases = Vec::new();
    for &(lx, ly) in &cfg.geometries {
        let init = random_physical_state(lx, ly, model, cfg.seed);
        let trajectory = oracle_trajectory(&init, cfg.steps, cfg.omega, model);
        for &layout in &cfg.layouts {
            for &vl in &cfg.vls {
                let outcome = run_case(
                    cfg,
                    model,
                    &workers,
                    &init,
                    &trajectory,
                    layout,
                    lx,
                    ly,
                    vl,
                    &prepare,
                );
                cases.push(CaseReport {
                    lx,
                    ly,
                    layout,
                    vl,
                    outcome,
                });
            }
        }
    }
    ValidationReport { cases }
}

type Trajectory = Result<Vec<(OracleLattice, OracleLattice)>, (usize, ModelError)>;

fn oracle_trajectory(
    init: &OracleLattice,
    steps: usize,
    omega: f64,
    model: &VelocityModel,
) -> Trajectory {
    let mut out = Vec::with_capacity(steps);
    let mut cur = init.clone();
    for s in 0..steps {
        let moved = oracle_propagate(&cur, model.velocities());
        let collided = oracle_collide(&moved, omega, model).map_err(|e| (s, e))?;
        cur = collided.clone();
        out.push((moved, collided));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_case(
    cfg: &ValidationConfig,
    model: &Arc<VelocityModel>,
    workers: &Workers,
    init: &OracleLattice,
    trajectory: &Trajectory,
    layout: LayoutKind,
    lx: usize,
    ly: usize,
    vl: usize,
    prepare: &impl Fn(&mut LatticeState),
) -> Outcome {
    let trajectory = match trajectory {
        Ok(t) => t,
        Err((s, e)) => return Outcome::Error(format!("oracle failed at step {s}: {e}")),
    };
    let geometry = match LatticeGeometry::new(lx, ly, vl) {
        Ok(g) => g,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    let desc = LayoutDescriptor::d2q37(layout, geometry);
    let mut state = match LatticeState::from_canonical(desc, model.clone(), &init.to_canonical()) {
        Ok(s) => s,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    prepare(&mut state);
    for (step, (moved, collided)) in trajectory.iter().enumerate() {
        state.halo_exchange();
        state.propagate(workers);
        let got = state.dump_buffer(Buffer::Next);
        if let Some(d) = first_divergence(moved, &got, cfg.comparison, step, Phase::Propagate) {
            return Outcome::Diverged(d);
        }
        if let Err(e) = state.collide(cfg.omega, workers) {
            return Outcome::Error(format!("step {step}: {e}"));
        }
        let got = state.dump();
        if let Some(d) = first_divergence(collided, &got, cfg.comparison, step, Phase::Collide) {
            return Outcome::Diverged(d);
        }
    }
    Outcome::Pass
}
