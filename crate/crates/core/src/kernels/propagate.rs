use crate::layout::{LayoutDescriptor, LayoutKind};

use super::state::LatticeState;
use super::stream::{copy_run, fence};
use super::Workers;

/// Mutable views of one physical x-column: one slice for layouts that keep a
/// column contiguous (AoS, CAoSoA), one per population otherwise.
pub(super) struct Column<'a> {
    pub big_x: usize,
    pub parts: Vec<&'a mut [f64]>,
}

pub(super) fn physical_columns<'a>(buf: &'a mut [f64], d: &LayoutDescriptor) -> Vec<Column<'a>> {
    let g = d.geometry;
    let cs = d.col_stride();
    let keep = |bx: usize| bx >= g.hx && bx < g.hx + g.lx;
    match d.kind {
        LayoutKind::Aos | LayoutKind::Caosoa => buf
            .chunks_mut(cs)
            .enumerate()
            .filter(|(bx, _)| keep(*bx))
            .map(|(big_x, col)| Column {
                big_x,
                parts: vec![col],
            })
            .collect(),
        LayoutKind::Soa | LayoutKind::Csoa => {
            let mut cols: Vec<Column<'a>> = (0..g.padded_lx())
                .map(|big_x| Column {
                    big_x,
                    parts: Vec::with_capacity(d.npop),
                })
                .collect();
            for plane in buf.chunks_mut(d.pop_stride()) {
                for (bx, col) in plane.chunks_mut(cs).enumerate() {
                    cols[bx].parts.push(col);
                }
            }
            cols.retain(|c| keep(c.big_x));
            cols
        }
    }
}

#[inline]
fn shifted(idx: usize, off: isize) -> usize {
    idx.wrapping_add_signed(off)
}

impl LatticeState {
    /// Pull every population into the next buffer:
    /// `nxt[r][p] = prv[r - c_p][p]`. Requires fresh halos in `prv`.
    pub fn propagate(&mut self, workers: &Workers) {
        let d = self.desc;
        let prv: &[f64] = &self.prv;
        let off = self.offsets.as_slice();
        let nt = self.streaming_stores;
        let cols = physical_columns(&mut self.nxt, &d);

        let hy = d.geometry.hy;
        let rows = d.rows();
        let cs = d.col_stride();
        let rs = d.row_stride();
        let ps = d.pop_stride();
        let lanes = d.lanes();
        let npop = d.npop;

        let run = |col: Column<'_>| -> Result<(), ()> {
            let Column { big_x, mut parts } = col;
            let col_base = big_x * cs;
            match d.kind {
                LayoutKind::Aos => {
                    let dst = &mut parts[0];
                    for j in hy..hy + rows {
                        let local = j * rs;
                        for p in 0..npop {
                            dst[local + p] = prv[shifted(col_base + local + p, off[p])];
                        }
                    }
                }
                LayoutKind::Soa | LayoutKind::Csoa => {
                    let start = hy * rs;
                    let len = rows * rs;
                    for (p, dst) in parts.iter_mut().enumerate() {
                        let src = shifted(p * ps + col_base + start, off[p]);
                        copy_run(&mut dst[start..start + len], &prv[src..src + len], nt);
                    }
                }
                LayoutKind::Caosoa => {
                    let dst = &mut parts[0];
                    for j in hy..hy + rows {
                        for p in 0..npop {
                            let local = j * rs + p * lanes;
                            let src = shifted(col_base + local, off[p]);
                            copy_run(&mut dst[local..local + lanes], &prv[src..src + lanes], nt);
                        }
                    }
                }
            }
            fence(nt);
            Ok(())
        };
        let _ = workers.run(cols, run);
    }
}
