use std::sync::Arc;

use crate::aligned::AlignedBuf;
use crate::layout::{self, LayoutDescriptor, SiteCoord};
use crate::model::{Macros, VelocityModel, NPOP};

use super::KernelError;

/// Per-population pull offsets, in elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetTable {
    off: Vec<isize>,
}

impl OffsetTable {
    pub fn new(desc: &LayoutDescriptor, model: &VelocityModel) -> Self {
        Self {
            off: model
                .velocities()
                .iter()
                .map(|&c| desc.pull_offset(c))
                .collect(),
        }
    }

    pub fn get(&self, p: usize) -> isize {
        self.off[p]
    }

    /// Overwrite one entry. Only useful to inject faults in tests.
    pub fn set(&mut self, p: usize, value: isize) {
        self.off[p] = value;
    }

    pub fn as_slice(&self) -> &[isize] {
        &self.off
    }
}

/// Which population buffer to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Buffer {
    /// Current populations (post-collide).
    Current,
    /// Post-propagate populations.
    Next,
}

/// Double-buffered populations in one layout.
#[derive(Debug, Clone)]
pub struct LatticeState {
    pub(super) desc: LayoutDescriptor,
    pub(super) model: Arc<VelocityModel>,
    pub(super) prv: AlignedBuf,
    pub(super) nxt: AlignedBuf,
    pub(super) offsets: OffsetTable,
    pub(super) halo: Vec<(usize, usize)>,
    pub(super) time_step: u64,
    pub(super) streaming_stores: bool,
}

impl LatticeState {
    /// A zero-filled lattice. Populate it before stepping.
    pub fn new(desc: LayoutDescriptor, model: Arc<VelocityModel>) -> Result<Self, KernelError> {
        let need = model.halo_extent();
        let g = &desc.geometry;
        if g.hx < need || g.hy < need {
            return Err(KernelError::HaloTooShallow {
                hx: g.hx,
                hy: g.hy,
                need,
            });
        }
        if desc.npop != NPOP {
            return Err(KernelError::PopulationMismatch {
                got: desc.npop,
                want: NPOP,
            });
        }
        Ok(Self {
            offsets: OffsetTable::new(&desc, &model),
            halo: desc.halo_pairs(),
            prv: AlignedBuf::zeroed(desc.len()),
            nxt: AlignedBuf::zeroed(desc.len()),
            desc,
            model,
            time_step: 0,
            streaming_stores: false,
        })
    }

    /// A lattice at local equilibrium with the fields returned by `fields`.
    pub fn from_macros(
        desc: LayoutDescriptor,
        model: Arc<VelocityModel>,
        fields: impl Fn(usize, usize) -> Macros,
    ) -> Result<Self, KernelError> {
        let mut state = Self::new(desc, model)?;
        for x in 0..desc.geometry.lx {
            for y in 0..desc.geometry.ly {
                let f = state.model.equilibrium(&fields(x, y));
                state.set_site(x, y, &f);
            }
        }
        Ok(state)
    }

    /// A lattice loaded from canonical (p, x, y)-ordered values.
    pub fn from_canonical(
        desc: LayoutDescriptor,
        model: Arc<VelocityModel>,
        data: &[f64],
    ) -> Result<Self, KernelError> {
        let mut state = Self::new(desc, model)?;
        state.load_canonical(data)?;
        Ok(state)
    }

    pub fn descriptor(&self) -> &LayoutDescriptor {
        &self.desc
    }

    pub fn model(&self) -> &Arc<VelocityModel> {
        &self.model
    }

    pub fn time_step(&self) -> u64 {
        self.time_step
    }

    pub fn offsets(&self) -> &OffsetTable {
        &self.offsets
    }

    pub fn offsets_mut(&mut self) -> &mut OffsetTable {
        &mut self.offsets
    }

    pub fn streaming_stores(&self) -> bool {
        self.streaming_stores
    }

    /// Toggle non-temporal stores in propagate. Results are unaffected.
    pub fn set_streaming_stores(&mut self, on: bool) {
        self.streaming_stores = on;
    }

    pub fn buffer(&self, which: Buffer) -> &[f64] {
        match which {
            Buffer::Current => &self.prv,
            Buffer::Next => &self.nxt,
        }
    }

    fn site_base(&self, x: usize, y: usize) -> usize {
        let (bx, j, lane) = self.desc.slot_of(x, y);
        self.desc.storage_index(bx, j, lane, 0)
    }

    pub fn get(&self, c: SiteCoord) -> Result<f64, KernelError> {
        Ok(self.prv[self.desc.index(c)?])
    }

    pub fn set(&mut self, c: SiteCoord, value: f64) -> Result<(), KernelError> {
        let idx = self.desc.index(c)?;
        self.prv[idx] = value;
        Ok(())
    }

    /// The 37 current populations of physical site `(x, y)`.
    pub fn site(&self, x: usize, y: usize) -> [f64; NPOP] {
        let base = self.site_base(x, y);
        let ps = self.desc.pop_stride();
        std::array::from_fn(|p| self.prv[base + p * ps])
    }

    pub fn set_site(&mut self, x: usize, y: usize, f: &[f64; NPOP]) {
        let base = self.site_base(x, y);
        let ps = self.desc.pop_stride();
        for (p, &v) in f.iter().enumerate() {
            self.prv[base + p * ps] = v;
        }
    }

    pub fn macros_at(&self, x: usize, y: usize) -> Result<Macros, KernelError> {
        self.model
            .macros(&self.site(x, y))
            .map_err(|source| KernelError::Site { x, y, source })
    }

    fn canonical_len(&self) -> usize {
        self.desc.geometry.sites() * NPOP
    }

    /// Physical values of one buffer in canonical order: index
    /// `(p * lx + x) * ly + y`.
    pub fn dump_buffer(&self, which: Buffer) -> Vec<f64> {
        let buf = self.buffer(which);
        let (lx, ly) = (self.desc.geometry.lx, self.desc.geometry.ly);
        let ps = self.desc.pop_stride();
        let mut out = vec![0.0; self.canonical_len()];
        for x in 0..lx {
            for y in 0..ly {
                let base = self.site_base(x, y);
                for p in 0..NPOP {
                    out[(p * lx + x) * ly + y] = buf[base + p * ps];
                }
            }
        }
        out
    }

    /// Current populations in canonical order.
    pub fn dump(&self) -> Vec<f64> {
        self.dump_buffer(Buffer::Current)
    }

    pub fn load_canonical(&mut self, data: &[f64]) -> Result<(), KernelError> {
        if data.len() != self.canonical_len() {
            return Err(KernelError::DataSize {
                got: data.len(),
                want: self.canonical_len(),
            });
        }
        let (lx, ly) = (self.desc.geometry.lx, self.desc.geometry.ly);
        let ps = self.desc.pop_stride();
        for x in 0..lx {
            for y in 0..ly {
                let base = self.site_base(x, y);
                for p in 0..NPOP {
                    self.prv[base + p * ps] = data[(p * lx + x) * ly + y];
                }
            }
        }
        Ok(())
    }

    /// The same lattice in another layout (or cluster length). Current
    /// populations are copied bitwise; halos are left for the next exchange.
    pub fn convert(&self, to: LayoutDescriptor) -> Result<LatticeState, KernelError> {
        let prv = layout::convert(&self.prv, &self.desc, &to)?;
        let mut out = LatticeState::new(to, self.model.clone())?;
        out.prv = prv;
        out.time_step = self.time_step;
        out.streaming_stores = self.streaming_stores;
        Ok(out)
    }

    /// Sum over physical sites of (mass, x-momentum, y-momentum, energy),
    /// energy being `sum |c|² f / 2`.
    pub fn global_moments(&self) -> [f64; 4] {
        let mut acc = [0.0; 4];
        let g = self.desc.geometry;
        for x in 0..g.lx {
            for y in 0..g.ly {
                let f = self.site(x, y);
                for (p, &[cx, cy]) in self.model.velocities().iter().enumerate() {
                    acc[0] += f[p];
                    acc[1] += cx as f64 * f[p];
                    acc[2] += cy as f64 * f[p];
                    acc[3] += 0.5 * (cx * cx + cy * cy) as f64 * f[p];
                }
            }
        }
        acc
    }
}

impl LatticeState {
    /// Current populations as a layout-independent dump.
    pub fn to_dump(&self) -> crate::dump::LatticeDump {
        let g = self.desc.geometry;
        crate::dump::LatticeDump {
            lx: g.lx,
            ly: g.ly,
            npop: NPOP,
            data: self.dump(),
        }
    }
}
