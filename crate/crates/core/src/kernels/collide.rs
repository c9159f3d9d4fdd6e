use crate::layout::LayoutKind;
use crate::model::{VelocityModel, NPOP};

use super::propagate::{physical_columns, Column};
use super::state::LatticeState;
use super::{KernelError, Workers};

/// Collide `W` sites whose populations are read with `read(p, lane)` and
/// written back with `write(p, lane, value)`. On failure returns the
/// offending lane and error, having written nothing.
#[inline(always)]
fn collide_block<const W: usize>(
    model: &VelocityModel,
    omega: f64,
    read: impl Fn(usize, usize) -> f64,
    mut write: impl FnMut(usize, usize, f64),
) -> Result<(), (usize, crate::model::ModelError)> {
    let mut f = [[0.0; W]; NPOP];
    for (p, row) in f.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = read(p, l);
        }
    }
    model
        .collide_lanes::<W>(&mut f, omega)
        .map_err(|e| (e.lane, e.error))?;
    for (p, row) in f.iter().enumerate() {
        for (l, &v) in row.iter().enumerate() {
            write(p, l, v);
        }
    }
    Ok(())
}

/// Widest lane block used for a cluster of `lanes` elements.
const MAX_BLOCK: usize = 8;

macro_rules! dispatch_width {
    ($w:expr, $body:ident, $($arg:expr),*) => {
        match $w {
            1 => $body::<1>($($arg),*),
            2 => $body::<2>($($arg),*),
            4 => $body::<4>($($arg),*),
            _ => $body::<8>($($arg),*),
        }
    };
}

struct Ctx<'a> {
    model: &'a VelocityModel,
    omega: f64,
    src: &'a [f64],
    col_base: usize,
    rs: usize,
    ps: usize,
    lanes: usize,
    rows: usize,
    hy: usize,
    x: usize,
}

impl Ctx<'_> {
    fn site_error(&self, lane: usize, j: usize, source: crate::model::ModelError) -> KernelError {
        let y = lane * self.rows + j - self.hy;
        KernelError::Site {
            x: self.x,
            y,
            source,
        }
    }
}

/// SoA: blocks of `W` consecutive sites of one column.
fn soa_block<const W: usize>(
    c: &Ctx<'_>,
    parts: &mut [&mut [f64]],
    j: usize,
) -> Result<(), KernelError> {
    collide_block::<W>(
        c.model,
        c.omega,
        |p, l| c.src[p * c.ps + c.col_base + j + l],
        |p, l, v| parts[p][j + l] = v,
    )
    .map_err(|(l, e)| c.site_error(0, j + l, e))
}

/// CSoA: lanes `k0..k0 + W` of the cluster at row `j`.
fn csoa_block<const W: usize>(
    c: &Ctx<'_>,
    parts: &mut [&mut [f64]],
    j: usize,
    k0: usize,
) -> Result<(), KernelError> {
    let local = j * c.rs + k0;
    collide_block::<W>(
        c.model,
        c.omega,
        |p, l| c.src[p * c.ps + c.col_base + local + l],
        |p, l, v| parts[p][local + l] = v,
    )
    .map_err(|(l, e)| c.site_error(k0 + l, j, e))
}

/// CAoSoA: lanes `k0..k0 + W` of the 37 clusters at row `j`.
fn caosoa_block<const W: usize>(
    c: &Ctx<'_>,
    dst: &mut [f64],
    j: usize,
    k0: usize,
) -> Result<(), KernelError> {
    let local = j * c.rs + k0;
    let lanes = c.lanes;
    collide_block::<W>(
        c.model,
        c.omega,
        |p, l| c.src[c.col_base + local + p * lanes + l],
        |p, l, v| dst[local + p * lanes + l] = v,
    )
    .map_err(|(l, e)| c.site_error(k0 + l, j, e))
}

impl LatticeState {
    /// Relax every physical site of the next buffer and store the result in
    /// the current buffer.
    pub fn collide(&mut self, omega: f64, workers: &Workers) -> Result<(), KernelError> {
        if !(omega > 0.0 && omega < 2.0) {
            return Err(KernelError::InvalidOmega(omega));
        }
        let d = self.desc;
        let model: &VelocityModel = &self.model;
        let src: &[f64] = &self.nxt;
        let cols = physical_columns(&mut self.prv, &d);

        let hy = d.geometry.hy;
        let rows = d.rows();
        let cs = d.col_stride();
        let rs = d.row_stride();
        let ps = d.pop_stride();
        let lanes = d.lanes();
        let width = lanes.min(MAX_BLOCK);

        let run = |col: Column<'_>| -> Result<(), KernelError> {
            let Column { big_x, mut parts } = col;
            let c = Ctx {
                model,
                omega,
                src,
                col_base: big_x * cs,
                rs,
                ps,
                lanes,
                rows,
                hy,
                x: big_x - d.geometry.hx,
            };
            match d.kind {
                LayoutKind::Aos => {
                    let dst = &mut parts[0];
                    for j in hy..hy + rows {
                        let local = j * rs;
                        collide_block::<1>(
                            model,
                            omega,
                            |p, _| src[c.col_base + local + p],
                            |p, _, v| dst[local + p] = v,
                        )
                        .map_err(|(_, e)| c.site_error(0, j, e))?;
                    }
                }
                LayoutKind::Soa => {
                    let end = hy + rows;
                    let mut j = hy;
                    while j + MAX_BLOCK <= end {
                        soa_block::<MAX_BLOCK>(&c, &mut parts, j)?;
                        j += MAX_BLOCK;
                    }
                    while j < end {
                        soa_block::<1>(&c, &mut parts, j)?;
                        j += 1;
                    }
                }
                LayoutKind::Csoa => {
                    for j in hy..hy + rows {
                        for k0 in (0..lanes).step_by(width) {
                            dispatch_width!(width, csoa_block, &c, &mut parts, j, k0)?;
                        }
                    }
                }
                LayoutKind::Caosoa => {
                    let dst = &mut parts[0];
                    for j in hy..hy + rows {
                        for k0 in (0..lanes).step_by(width) {
                            dispatch_width!(width, caosoa_block, &c, dst, j, k0)?;
                        }
                    }
                }
            }
            Ok(())
        };
        workers.run(cols, run)
    }

    /// One full update: halo exchange, propagate, collide.
    pub fn step(&mut self, omega: f64, workers: &Workers) -> Result<(), KernelError> {
        self.halo_exchange();
        self.propagate(workers);
        self.collide(omega, workers)?;
        self.time_step += 1;
        Ok(())
    }

    pub fn run(&mut self, steps: usize, omega: f64, workers: &Workers) -> Result<(), KernelError> {
        for _ in 0..steps {
            self.step(omega, workers)?;
        }
        Ok(())
    }
}
