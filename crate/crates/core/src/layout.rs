//! Lattice memory layouts as pure index maps.
//!
//! Four layouts are supported:
//!
//! * `Aos`: the populations of one site are contiguous.
//! * `Soa`: one plane per population, sites contiguous along `y`.
//! * `Csoa`: like `Soa`, but every `y` column is cut into `vl` lane strips of
//!   height `ly / vl` and the `vl` sites at the same offset of each strip form
//!   one contiguous, aligned cluster.
//! * `Caosoa`: the clusters of all populations for one `(x, row)` position are
//!   stored one after the other.
//!
//! Every layout is padded by `hx` ghost columns on each side of `x`. AoS and
//! SoA pad each column by `hy` ghost rows; the clustered layouts pad each lane
//! strip instead, so that a `y` shift never crosses lanes inside a cluster.
//!
//! Addresses are expressed with four strides (column, row, population, lane):
//! `index = X * col + j * row + p * pop + lane`, where `X = x + hx` and `j` is
//! the padded row inside the column or strip.

use std::fmt;
use std::str::FromStr;

use crate::aligned::{AlignedBuf, BUFFER_ALIGN};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("lattice extents must be positive (lx={lx}, ly={ly})")]
    EmptyLattice { lx: usize, ly: usize },
    #[error("vl={0} must be a power of two")]
    VlNotPowerOfTwo(usize),
    #[error("ly divisible by vl violated: ly={ly}, vl={vl}")]
    LyNotDivisible { ly: usize, vl: usize },
    #[error("coordinate (x={x}, y={y}, p={p}) outside {lx}x{ly}x{npop}")]
    OutOfRange {
        x: usize,
        y: usize,
        p: usize,
        lx: usize,
        ly: usize,
        npop: usize,
    },
    #[error("layout geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("buffer has {got} elements, layout needs {want}")]
    BufferSize { got: usize, want: usize },
    #[error("unknown layout `{0}` (expected aos, soa, csoa or caosoa)")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayoutKind {
    Aos,
    Soa,
    Csoa,
    Caosoa,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 4] = [
        LayoutKind::Aos,
        LayoutKind::Soa,
        LayoutKind::Csoa,
        LayoutKind::Caosoa,
    ];

    pub fn is_clustered(self) -> bool {
        matches!(self, LayoutKind::Csoa | LayoutKind::Caosoa)
    }

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Aos => "aos",
            LayoutKind::Soa => "soa",
            LayoutKind::Csoa => "csoa",
            LayoutKind::Caosoa => "caosoa",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aos" => Ok(LayoutKind::Aos),
            "soa" => Ok(LayoutKind::Soa),
            "csoa" => Ok(LayoutKind::Csoa),
            "caosoa" => Ok(LayoutKind::Caosoa),
            other => Err(LayoutError::UnknownKind(other.to_string())),
        }
    }
}

/// Physical extents, halo widths and cluster length of a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGeometry {
    pub lx: usize,
    pub ly: usize,
    pub hx: usize,
    pub hy: usize,
    pub vl: usize,
}

impl LatticeGeometry {
    /// Geometry with the 3-deep halos the D2Q37 stencil needs.
    pub fn new(lx: usize, ly: usize, vl: usize) -> Result<Self, LayoutError> {
        Self::with_halo(
            lx,
            ly,
            vl,
            crate::model::HALO_EXTENT,
            crate::model::HALO_EXTENT,
        )
    }

    pub fn with_halo(
        lx: usize,
        ly: usize,
        vl: usize,
        hx: usize,
        hy: usize,
    ) -> Result<Self, LayoutError> {
        if lx == 0 || ly == 0 {
            return Err(LayoutError::EmptyLattice { lx, ly });
        }
        if vl == 0 || !vl.is_power_of_two() {
            return Err(LayoutError::VlNotPowerOfTwo(vl));
        }
        if !ly.is_multiple_of(vl) {
            return Err(LayoutError::LyNotDivisible { ly, vl });
        }
        Ok(Self { lx, ly, hx, hy, vl })
    }

    /// Sites per lane strip, `ly / vl`.
    pub fn strip(&self) -> usize {
        self.ly / self.vl
    }

    pub fn sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn padded_lx(&self) -> usize {
        self.lx + 2 * self.hx
    }
}

/// A physical (halo-free) site and population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteCoord {
    pub x: usize,
    pub y: usize,
    pub p: usize,
}

impl SiteCoord {
    pub fn new(x: usize, y: usize, p: usize) -> Self {
        Self { x, y, p }
    }
}

fn check(c: SiteCoord, g: &LatticeGeometry, npop: usize) -> Result<(), LayoutError> {
    if c.x >= g.lx || c.y >= g.ly || c.p >= npop {
        return Err(LayoutError::OutOfRange {
            x: c.x,
            y: c.y,
            p: c.p,
            lx: g.lx,
            ly: g.ly,
            npop,
        });
    }
    Ok(())
}

/// Element index of `c` in the array-of-structures layout.
pub fn addr_aos(c: SiteCoord, g: &LatticeGeometry, npop: usize) -> Result<usize, LayoutError> {
    check(c, g, npop)?;
    let big_x = c.x + g.hx;
    Ok((big_x * (g.ly + 2 * g.hy) + (c.y + g.hy)) * npop + c.p)
}

/// Element index of `c` in the structure-of-arrays layout.
pub fn addr_soa(c: SiteCoord, g: &LatticeGeometry, npop: usize) -> Result<usize, LayoutError> {
    check(c, g, npop)?;
    let plane = g.padded_lx() * (g.ly + 2 * g.hy);
    Ok(c.p * plane + (c.x + g.hx) * (g.ly + 2 * g.hy) + (c.y + g.hy))
}

fn lane_and_row(c: SiteCoord, g: &LatticeGeometry) -> (usize, usize) {
    let strip = g.strip();
    (c.y / strip, c.y % strip + g.hy)
}

/// `(cluster, lane)` of `c` in the clustered structure-of-arrays layout.
/// The element index is `cluster * vl + lane`.
pub fn addr_csoa(
    c: SiteCoord,
    g: &LatticeGeometry,
    npop: usize,
) -> Result<(usize, usize), LayoutError> {
    check(c, g, npop)?;
    let sy = g.strip() + 2 * g.hy;
    let cplane = g.padded_lx() * sy;
    let (lane, j) = lane_and_row(c, g);
    Ok((c.p * cplane + (c.x + g.hx) * sy + j, lane))
}

/// `(cluster, lane)` of `c` in the clustered array-of-structures-of-arrays
/// layout. The element index is `cluster * vl + lane`.
pub fn addr_caosoa(
    c: SiteCoord,
    g: &LatticeGeometry,
    npop: usize,
) -> Result<(usize, usize), LayoutError> {
    check(c, g, npop)?;
    let sy = g.strip() + 2 * g.hy;
    let (lane, j) = lane_and_row(c, g);
    Ok((((c.x + g.hx) * sy + j) * npop + c.p, lane))
}

/// A layout kind bound to a geometry and population count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutDescriptor {
    pub kind: LayoutKind,
    pub geometry: LatticeGeometry,
    pub npop: usize,
    /// Byte boundary of every buffer start.
    pub alignment: usize,
}

impl LayoutDescriptor {
    pub fn new(kind: LayoutKind, geometry: LatticeGeometry, npop: usize) -> Self {
        Self {
            kind,
            geometry,
            npop,
            alignment: BUFFER_ALIGN,
        }
    }

    pub fn d2q37(kind: LayoutKind, geometry: LatticeGeometry) -> Self {
        Self::new(kind, geometry, crate::model::NPOP)
    }

    /// Cluster length actually used: `vl` for clustered layouts, 1 otherwise.
    pub fn lanes(&self) -> usize {
        if self.kind.is_clustered() {
            self.geometry.vl
        } else {
            1
        }
    }

    /// Physical rows per lane strip (the whole column for AoS/SoA).
    pub fn rows(&self) -> usize {
        self.geometry.ly / self.lanes()
    }

    /// Padded rows per lane strip.
    pub fn padded_rows(&self) -> usize {
        self.rows() + 2 * self.geometry.hy
    }

    pub fn row_stride(&self) -> usize {
        match self.kind {
            LayoutKind::Aos => self.npop,
            LayoutKind::Soa => 1,
            LayoutKind::Csoa => self.lanes(),
            LayoutKind::Caosoa => self.npop * self.lanes(),
        }
    }

    pub fn col_stride(&self) -> usize {
        match self.kind {
            LayoutKind::Aos | LayoutKind::Caosoa => self.padded_rows() * self.row_stride(),
            LayoutKind::Soa | LayoutKind::Csoa => self.padded_rows() * self.lanes(),
        }
    }

    pub fn pop_stride(&self) -> usize {
        match self.kind {
            LayoutKind::Aos => 1,
            LayoutKind::Soa | LayoutKind::Csoa => self.geometry.padded_lx() * self.col_stride(),
            LayoutKind::Caosoa => self.lanes(),
        }
    }

    /// Total elements including halos.
    pub fn len(&self) -> usize {
        self.geometry.padded_lx() * self.padded_rows() * self.lanes() * self.npop
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element index of storage slot `(X, j, lane)` for population `p`.
    #[inline]
    pub fn storage_index(&self, big_x: usize, j: usize, lane: usize, p: usize) -> usize {
        big_x * self.col_stride() + j * self.row_stride() + lane + p * self.pop_stride()
    }

    /// Storage slot `(X, j, lane)` of physical site `(x, y)`.
    #[inline]
    pub fn slot_of(&self, x: usize, y: usize) -> (usize, usize, usize) {
        let rows = self.rows();
        (x + self.geometry.hx, y % rows + self.geometry.hy, y / rows)
    }

    /// Physical site stored at padded slot `(X, j, lane)`, with periodic
    /// wrap-around for halo slots.
    pub fn site_at(&self, big_x: usize, j: usize, lane: usize) -> (usize, usize) {
        let g = &self.geometry;
        let x = (big_x as isize - g.hx as isize).rem_euclid(g.lx as isize) as usize;
        let y = (lane as isize * self.rows() as isize + j as isize - g.hy as isize)
            .rem_euclid(g.ly as isize) as usize;
        (x, y)
    }

    pub fn index(&self, c: SiteCoord) -> Result<usize, LayoutError> {
        check(c, &self.geometry, self.npop)?;
        let (bx, j, lane) = self.slot_of(c.x, c.y);
        Ok(self.storage_index(bx, j, lane, c.p))
    }

    /// Signed element offset of the pull read for velocity `c`, identical
    /// for every site and lane.
    pub fn pull_offset(&self, c: [i32; 2]) -> isize {
        -(c[0] as isize * self.col_stride() as isize + c[1] as isize * self.row_stride() as isize)
    }

    /// Whether padded slot `(X, j)` lies in a halo.
    pub fn is_halo(&self, big_x: usize, j: usize) -> bool {
        let g = &self.geometry;
        big_x < g.hx || big_x >= g.hx + g.lx || j < g.hy || j >= g.hy + self.rows()
    }

    /// `(destination, source)` element indices (population 0) of every halo
    /// slot and the physical slot holding its periodic image. Add
    /// `p * pop_stride()` for population `p`.
    pub fn halo_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for big_x in 0..self.geometry.padded_lx() {
            for j in 0..self.padded_rows() {
                if !self.is_halo(big_x, j) {
                    continue;
                }
                for lane in 0..self.lanes() {
                    let (x, y) = self.site_at(big_x, j, lane);
                    let (sx, sj, sl) = self.slot_of(x, y);
                    pairs.push((
                        self.storage_index(big_x, j, lane, 0),
                        self.storage_index(sx, sj, sl, 0),
                    ));
                }
            }
        }
        pairs
    }

    pub fn same_lattice(&self, other: &LayoutDescriptor) -> bool {
        let (a, b) = (&self.geometry, &other.geometry);
        a.lx == b.lx && a.ly == b.ly && self.npop == other.npop
    }
}

/// Copy every physical value from `src` (in layout `from`) into a fresh
/// buffer in layout `to`. Halo slots of the result are zero.
pub fn convert(
    src: &[f64],
    from: &LayoutDescriptor,
    to: &LayoutDescriptor,
) -> Result<AlignedBuf, LayoutError> {
    if !from.same_lattice(to) {
        return Err(LayoutError::GeometryMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            from.geometry.lx, from.geometry.ly, from.npop, to.geometry.lx, to.geometry.ly, to.npop
        )));
    }
    if src.len() != from.len() {
        return Err(LayoutError::BufferSize {
            got: src.len(),
            want: from.len(),
        });
    }
    let mut out = AlignedBuf::zeroed(to.len());
    let g = &from.geometry;
    for x in 0..g.lx {
        for y in 0..g.ly {
            let (fx, fj, fl) = from.slot_of(x, y);
            let (tx, tj, tl) = to.slot_of(x, y);
            let fb = from.storage_index(fx, fj, fl, 0);
            let tb = to.storage_index(tx, tj, tl, 0);
            for p in 0..from.npop {
                out[tb + p * to.pop_stride()] = src[fb + p * from.pop_stride()];
            }
        }
    }
    Ok(out)
}
