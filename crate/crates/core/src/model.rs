//! The D2Q37 velocity model: velocity set, quadrature weights and the
//! per-site thermal BGK collision.
//!
//! Weights and the lattice temperature `t0` are not tabulated anywhere; they
//! are recovered by matching the discrete moments of the velocity set against
//! those of a Gaussian of variance `t0` up to eighth order. The collision
//! relaxes towards a fourth-order Hermite expansion of the Maxwellian.
//!
//! All per-site math is written over `W` independent lanes so that the scalar
//! path (`W = 1`) and the clustered paths perform exactly the same sequence of
//! IEEE operations per lane.

use std::fmt;
use std::io::{self, Write};

use nalgebra::{SMatrix, SVector};

/// Number of populations per lattice site.
pub const NPOP: usize = 37;

/// Squared norms of the eight velocity shells, in canonical order.
pub const SHELL_NORMS2: [i32; 8] = [0, 1, 2, 4, 5, 8, 9, 10];

/// Largest velocity component; also the halo depth the stencil needs.
pub const HALO_EXTENT: usize = 3;

/// Floating point operations of one [`VelocityModel::collide_site`] call,
/// counted from the implementation of `collide_lanes` (per lane).
///
/// | stage                               | flops |
/// |-------------------------------------|-------|
/// | moments rho, jx, jy, e2 (37×7)      | 259   |
/// | velocity, temperature               | 8     |
/// | site-level polynomial coefficients  | 12    |
/// | per population equilibrium (37×32)  | 1184  |
/// | relaxation (37×3)                   | 111   |
pub const COLLIDE_FLOPS_PER_SITE: u64 = 1574;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("no t0 in ({lo}, {hi}) gives all-positive shell weights")]
    NoPositiveRoot { lo: f64, hi: f64 },
    #[error("non-physical state: density {rho} is not positive")]
    NonPhysical { rho: f64 },
    #[error("model table line {line}: {msg}")]
    Table { line: usize, msg: String },
}

/// Macroscopic fields of one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Macros {
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub temp: f64,
}

impl Macros {
    pub fn new(rho: f64, ux: f64, uy: f64, temp: f64) -> Self {
        Self { rho, ux, uy, temp }
    }

    /// Ideal-gas pressure `rho * temp`.
    pub fn pressure(&self) -> f64 {
        self.rho * self.temp
    }
}

/// A group of velocities sharing the same squared norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shell {
    pub norm2: i32,
    pub members: Vec<usize>,
}

/// All integer vectors with a D2Q37 squared norm and components in [-3, 3],
/// sorted by squared norm, then `cx`, then `cy`.
pub fn build_velocity_set() -> Vec<[i32; 2]> {
    let mut set = Vec::with_capacity(NPOP);
    for cx in -3..=3 {
        for cy in -3..=3 {
            if SHELL_NORMS2.contains(&(cx * cx + cy * cy)) {
                set.push([cx, cy]);
            }
        }
    }
    set.sort_by_key(|&[cx, cy]| (cx * cx + cy * cy, cx, cy));
    set
}

/// Partition of velocity indices by squared norm.
pub fn shells_of(velocities: &[[i32; 2]]) -> Vec<Shell> {
    let mut shells: Vec<Shell> = Vec::new();
    for (i, &[cx, cy]) in velocities.iter().enumerate() {
        let norm2 = cx * cx + cy * cy;
        match shells.iter_mut().find(|s| s.norm2 == norm2) {
            Some(s) => s.members.push(i),
            None => shells.push(Shell {
                norm2,
                members: vec![i],
            }),
        }
    }
    shells.sort_by_key(|s| s.norm2);
    shells
}

/// Monomials cx^a cy^b used as moment conditions, with the Gaussian value
/// coefficient: the condition reads `sum w c^m = coef * t0^order`.
const MOMENT_CONDITIONS: [(u32, u32, f64); 9] = [
    (0, 0, 1.0),
    (2, 0, 1.0),
    (4, 0, 3.0),
    (2, 2, 1.0),
    (6, 0, 15.0),
    (4, 2, 3.0),
    (8, 0, 105.0),
    (6, 2, 15.0),
    (4, 4, 9.0),
];

/// The nine conditions have rank 8 in the shell weights; the first eight are
/// degenerate, so the linear solve uses all but cx⁸ and cx⁸ fixes `t0`.
const CLOSING_CONDITION: usize = 6;

fn monomial(c: [i32; 2], a: u32, b: u32) -> f64 {
    (c[0] as f64).powi(a as i32) * (c[1] as f64).powi(b as i32)
}

fn gaussian_moment(cond: (u32, u32, f64), t0: f64) -> f64 {
    let order = (cond.0 + cond.1) / 2;
    cond.2 * t0.powi(order as i32)
}

struct MomentSystem {
    // shell sums of each monomial: rows = conditions, cols = shells
    table: [[f64; 8]; 9],
}

impl MomentSystem {
    fn new(velocities: &[[i32; 2]], shells: &[Shell]) -> Self {
        let mut table = [[0.0; 8]; 9];
        for (r, &(a, b, _)) in MOMENT_CONDITIONS.iter().enumerate() {
            for (k, shell) in shells.iter().enumerate() {
                table[r][k] = shell
                    .members
                    .iter()
                    .map(|&i| monomial(velocities[i], a, b))
                    .sum();
            }
        }
        Self { table }
    }

    /// Shell weights solving every condition except the closing one at `t0`.
    fn weights_at(&self, t0: f64) -> Option<[f64; 8]> {
        let rows: Vec<usize> = (0..9).filter(|&r| r != CLOSING_CONDITION).collect();
        let a = SMatrix::<f64, 8, 8>::from_fn(|r, k| self.table[rows[r]][k]);
        let b = SVector::<f64, 8>::from_fn(|r, _| gaussian_moment(MOMENT_CONDITIONS[rows[r]], t0));
        let x = a.lu().solve(&b)?;
        let mut w = [0.0; 8];
        w.copy_from_slice(x.as_slice());
        Some(w)
    }

    /// Residual of the closing (cx⁸) condition.
    fn closing_residual(&self, t0: f64) -> f64 {
        match self.weights_at(t0) {
            Some(w) => {
                let row = &self.table[CLOSING_CONDITION];
                let lhs: f64 = (0..8).map(|k| row[k] * w[k]).sum();
                lhs - gaussian_moment(MOMENT_CONDITIONS[CLOSING_CONDITION], t0)
            }
            None => f64::NAN,
        }
    }
}

/// Derive shell-symmetric weights and the lattice temperature by moment
/// matching. Returns per-velocity weights in the order of `velocities`.
///
/// `t0` is located by scanning (0.1, 2.0) in steps of 1e-3 for sign changes of
/// the closing cx⁸ condition, then bisecting each bracket to machine precision;
/// the first root with all-positive weights wins.
pub fn derive_weights(velocities: &[[i32; 2]]) -> Result<(Vec<f64>, f64), ModelError> {
    const LO: f64 = 0.1;
    const HI: f64 = 2.0;
    const STEP: f64 = 1e-3;

    let shells = shells_of(velocities);
    if shells.len() != 8 {
        return Err(ModelError::NoPositiveRoot { lo: LO, hi: HI });
    }
    let system = MomentSystem::new(velocities, &shells);

    let steps = ((HI - LO) / STEP).round() as usize;
    let mut prev_t = LO;
    let mut prev_r = system.closing_residual(prev_t);
    for n in 1..=steps {
        let t = LO + n as f64 * STEP;
        let r = system.closing_residual(t);
        if prev_r.is_finite() && r.is_finite() && prev_r.signum() != r.signum() {
            let t0 = bisect(|t| system.closing_residual(t), prev_t, t, prev_r);
            if let Some(shell_w) = system.weights_at(t0) {
                if shell_w.iter().all(|&w| w > 0.0) {
                    let mut weights = vec![0.0; velocities.len()];
                    for (k, shell) in shells.iter().enumerate() {
                        for &i in &shell.members {
                            weights[i] = shell_w[k];
                        }
                    }
                    return Ok((weights, t0));
                }
            }
        }
        prev_t = t;
        prev_r = r;
    }
    Err(ModelError::NoPositiveRoot { lo: LO, hi: HI })
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut g_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// The D2Q37 velocity set together with its quadrature.
#[derive(Clone)]
pub struct VelocityModel {
    velocities: Vec<[i32; 2]>,
    shells: Vec<Shell>,
    weights: Vec<f64>,
    t0: f64,
    cx: [f64; NPOP],
    cy: [f64; NPOP],
    c2: [f64; NPOP],
    w: [f64; NPOP],
    hermite: HermiteConstants,
}

/// Per-population and global constants of the equilibrium polynomial.
#[derive(Debug, Clone)]
struct HermiteConstants {
    inv_t0: f64,
    h2: f64,
    h3: f64,
    h4: f64,
    three_t0sq: f64,
    // c² - 2t0
    k2: [f64; NPOP],
    // 3(c² - 4t0)
    k3: [f64; NPOP],
    // c⁴ - 8t0c² + 8t0²
    k4: [f64; NPOP],
    // c² - 6t0
    k5: [f64; NPOP],
    // t0(4t0 - c²)
    k6: [f64; NPOP],
}

impl HermiteConstants {
    fn new(c2: &[f64; NPOP], t0: f64) -> Self {
        let t0sq = t0 * t0;
        Self {
            inv_t0: 1.0 / t0,
            h2: 1.0 / (2.0 * t0sq),
            h3: 1.0 / (6.0 * t0sq * t0),
            h4: 1.0 / (24.0 * t0sq * t0sq),
            three_t0sq: 3.0 * t0sq,
            k2: std::array::from_fn(|p| c2[p] - 2.0 * t0),
            k3: std::array::from_fn(|p| 3.0 * (c2[p] - 4.0 * t0)),
            k4: std::array::from_fn(|p| c2[p] * c2[p] - 8.0 * t0 * c2[p] + 8.0 * t0sq),
            k5: std::array::from_fn(|p| c2[p] - 6.0 * t0),
            k6: std::array::from_fn(|p| t0 * (4.0 * t0 - c2[p])),
        }
    }
}

impl fmt::Debug for VelocityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityModel")
            .field("npop", &self.velocities.len())
            .field("t0", &self.t0)
            .finish()
    }
}

impl VelocityModel {
    /// Build the canonical D2Q37 model, deriving its weights.
    pub fn d2q37() -> Result<Self, ModelError> {
        let velocities = build_velocity_set();
        let (weights, t0) = derive_weights(&velocities)?;
        Ok(Self::from_parts(velocities, weights, t0))
    }

    fn from_parts(velocities: Vec<[i32; 2]>, weights: Vec<f64>, t0: f64) -> Self {
        let mut cx = [0.0; NPOP];
        let mut cy = [0.0; NPOP];
        let mut c2 = [0.0; NPOP];
        let mut w = [0.0; NPOP];
        for p in 0..NPOP {
            cx[p] = velocities[p][0] as f64;
            cy[p] = velocities[p][1] as f64;
            c2[p] = cx[p] * cx[p] + cy[p] * cy[p];
            w[p] = weights[p];
        }
        let shells = shells_of(&velocities);
        let hermite = HermiteConstants::new(&c2, t0);
        Self {
            velocities,
            shells,
            weights,
            t0,
            cx,
            cy,
            c2,
            w,
            hermite,
        }
    }

    pub fn velocities(&self) -> &[[i32; 2]] {
        &self.velocities
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn npop(&self) -> usize {
        NPOP
    }

    pub fn halo_extent(&self) -> usize {
        self.velocities
            .iter()
            .map(|c| c[0].unsigned_abs().max(c[1].unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Index of the rest velocity (0, 0).
    pub fn rest_index(&self) -> usize {
        0
    }

    /// Index of velocity `c`, if present.
    pub fn index_of(&self, c: [i32; 2]) -> Option<usize> {
        self.velocities.iter().position(|&v| v == c)
    }

    pub fn macros(&self, f: &[f64; NPOP]) -> Result<Macros, ModelError> {
        let lanes = lanes_of(f);
        let m = self.macros_lanes::<1>(&lanes);
        if m.rho[0].is_nan() || m.rho[0] <= 0.0 {
            return Err(ModelError::NonPhysical { rho: m.rho[0] });
        }
        Ok(Macros {
            rho: m.rho[0],
            ux: m.ux[0],
            uy: m.uy[0],
            temp: m.temp[0],
        })
    }

    pub fn equilibrium(&self, m: &Macros) -> [f64; NPOP] {
        let lanes = LaneMacros::<1> {
            rho: [m.rho],
            ux: [m.ux],
            uy: [m.uy],
            temp: [m.temp],
        };
        let mut out = [[0.0; 1]; NPOP];
        self.equilibrium_lanes(&lanes, &mut out);
        let mut feq = [0.0; NPOP];
        for p in 0..NPOP {
            feq[p] = out[p][0];
        }
        feq
    }

    /// One BGK relaxation step at a single site.
    pub fn collide_site(&self, f: &[f64; NPOP], omega: f64) -> Result<[f64; NPOP], ModelError> {
        let mut lanes = lanes_of(f);
        self.collide_lanes::<1>(&mut lanes, omega)
            .map_err(|e| e.error)?;
        let mut out = [0.0; NPOP];
        for p in 0..NPOP {
            out[p] = lanes[p][0];
        }
        Ok(out)
    }

    pub(crate) fn macros_lanes<const W: usize>(&self, f: &[[f64; W]; NPOP]) -> LaneMacros<W> {
        let mut rho = [0.0; W];
        let mut jx = [0.0; W];
        let mut jy = [0.0; W];
        let mut e2 = [0.0; W];
        for p in 0..NPOP {
            let (cx, cy, c2) = (self.cx[p], self.cy[p], self.c2[p]);
            for l in 0..W {
                let fp = f[p][l];
                rho[l] += fp;
                jx[l] += cx * fp;
                jy[l] += cy * fp;
                e2[l] += c2 * fp;
            }
        }
        let mut m = LaneMacros {
            rho,
            ux: [0.0; W],
            uy: [0.0; W],
            temp: [0.0; W],
        };
        for l in 0..W {
            let ux = jx[l] / rho[l];
            let uy = jy[l] / rho[l];
            m.ux[l] = ux;
            m.uy[l] = uy;
            m.temp[l] = 0.5 * (e2[l] / rho[l] - (ux * ux + uy * uy));
        }
        m
    }

    pub(crate) fn equilibrium_lanes<const W: usize>(
        &self,
        m: &LaneMacros<W>,
        out: &mut [[f64; W]; NPOP],
    ) {
        let k = &self.hermite;

        // Site-level coefficients; e = temp - t0 is the thermal deviation.
        let mut u2 = [0.0; W];
        let mut e = [0.0; W];
        let mut a2c = [0.0; W];
        let mut a3c = [0.0; W];
        let mut a4s = [0.0; W];
        let mut a4c = [0.0; W];
        let mut e6 = [0.0; W];
        let mut e3sq = [0.0; W];
        for l in 0..W {
            let uu = m.ux[l] * m.ux[l] + m.uy[l] * m.uy[l];
            let el = m.temp[l] - self.t0;
            u2[l] = uu;
            e[l] = el;
            a2c[l] = self.t0 * uu;
            a3c[l] = 3.0 * a2c[l];
            a4s[l] = 2.0 * a3c[l];
            a4c[l] = k.three_t0sq * uu * uu;
            e6[l] = 6.0 * el;
            e3sq[l] = 3.0 * el * el;
        }

        for p in 0..NPOP {
            let (cx, cy, w) = (self.cx[p], self.cy[p], self.w[p]);
            let (k2, k3, k4, k5, k6) = (k.k2[p], k.k3[p], k.k4[p], k.k5[p], k.k6[p]);
            for l in 0..W {
                let s = m.ux[l] * cx + m.uy[l] * cy;
                let ss = s * s;
                let el = e[l];
                let a2 = ss - a2c[l] + el * k2;
                let a3 = s * (ss - a3c[l] + el * k3);
                let a4 =
                    ss * ss - a4s[l] * ss + a4c[l] + e6[l] * (ss * k5 + u2[l] * k6) + e3sq[l] * k4;
                let poly = 1.0 + s * k.inv_t0 + a2 * k.h2 + a3 * k.h3 + a4 * k.h4;
                out[p][l] = w * m.rho[l] * poly;
            }
        }
    }

    /// BGK relaxation of `W` independent sites in place. On a non-physical
    /// lane nothing is written.
    pub(crate) fn collide_lanes<const W: usize>(
        &self,
        f: &mut [[f64; W]; NPOP],
        omega: f64,
    ) -> Result<(), LaneError> {
        let m = self.macros_lanes(f);
        for l in 0..W {
            if m.rho[l].is_nan() || m.rho[l] <= 0.0 {
                return Err(LaneError {
                    lane: l,
                    error: ModelError::NonPhysical { rho: m.rho[l] },
                });
            }
        }
        let mut feq = [[0.0; W]; NPOP];
        self.equilibrium_lanes(&m, &mut feq);
        for p in 0..NPOP {
            for l in 0..W {
                f[p][l] += omega * (feq[p][l] - f[p][l]);
            }
        }
        Ok(())
    }

    /// Write the model as `index cx cy weight` rows, 17 significant digits.
    pub fn write_table(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "# d2q37 model table")?;
        writeln!(out, "# t0 {:.16e}", self.t0)?;
        writeln!(out, "# index cx cy weight")?;
        for (i, (c, w)) in self.velocities.iter().zip(&self.weights).enumerate() {
            writeln!(out, "{} {} {} {:.16e}", i, c[0], c[1], w)?;
        }
        Ok(())
    }

    /// Parse a table written by [`VelocityModel::write_table`].
    pub fn parse_table(text: &str) -> Result<Self, ModelError> {
        let mut t0 = None;
        let mut velocities = Vec::new();
        let mut weights = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |msg: &str| ModelError::Table {
                line: line_no,
                msg: msg.to_string(),
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut parts = rest.split_whitespace();
                if parts.next() == Some("t0") {
                    let v = parts.next().ok_or_else(|| err("missing t0 value"))?;
                    t0 = Some(v.parse::<f64>().map_err(|_| err("bad t0 value"))?);
                }
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 4 {
                return Err(err("expected 4 columns"));
            }
            let idx: usize = cols[0].parse().map_err(|_| err("bad index"))?;
            if idx != velocities.len() {
                return Err(err("indices must be consecutive from 0"));
            }
            let cx: i32 = cols[1].parse().map_err(|_| err("bad cx"))?;
            let cy: i32 = cols[2].parse().map_err(|_| err("bad cy"))?;
            let w: f64 = cols[3].parse().map_err(|_| err("bad weight"))?;
            velocities.push([cx, cy]);
            weights.push(w);
        }
        let t0 = t0.ok_or(ModelError::Table {
            line: 0,
            msg: "missing t0 header".into(),
        })?;
        if velocities.len() != NPOP {
            return Err(ModelError::Table {
                line: 0,
                msg: format!("expected {NPOP} rows, found {}", velocities.len()),
            });
        }
        Ok(Self::from_parts(velocities, weights, t0))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LaneMacros<const W: usize> {
    pub rho: [f64; W],
    pub ux: [f64; W],
    pub uy: [f64; W],
    pub temp: [f64; W],
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LaneError {
    pub lane: usize,
    pub error: ModelError,
}

fn lanes_of(f: &[f64; NPOP]) -> [[f64; 1]; NPOP] {
    let mut lanes = [[0.0; 1]; NPOP];
    for p in 0..NPOP {
        lanes[p][0] = f[p];
    }
    lanes
}
