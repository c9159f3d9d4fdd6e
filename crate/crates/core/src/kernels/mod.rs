//! Propagate, collide and halo exchange over any [`LayoutKind`].
//!
//! A [`LatticeState`] owns two population buffers. `prv` holds the current
//! populations; a full [`LatticeState::step`] refreshes its halos, pulls
//! every population into `nxt` and collides `nxt` back into `prv`.
//!
//! Work is split by physical x-column. Each worker writes only its own
//! columns, and every per-site computation uses the canonical population
//! order, so results do not depend on the worker count, the schedule or the
//! layout.
//!
//! [`LayoutKind`]: crate::layout::LayoutKind

mod collide;
mod halo;
mod propagate;
mod state;
mod stream;
mod workers;

pub use state::{Buffer, LatticeState, OffsetTable};
pub use workers::{Schedule, Workers};

use crate::layout::LayoutError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("halo ({hx}, {hy}) too shallow for a stencil of extent {need}")]
    HaloTooShallow { hx: usize, hy: usize, need: usize },
    #[error("layout has {got} populations, model has {want}")]
    PopulationMismatch { got: usize, want: usize },
    #[error("relaxation rate {0} outside (0, 2)")]
    InvalidOmega(f64),
    #[error("site (x={x}, y={y}): {source}")]
    Site {
        x: usize,
        y: usize,
        #[source]
        source: ModelError,
    },
    #[error("canonical data has {got} values, lattice needs {want}")]
    DataSize { got: usize, want: usize },
    #[error(transparent)]
    Layout(#[from] LayoutError),
}
