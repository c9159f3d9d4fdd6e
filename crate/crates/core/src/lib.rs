//! D2Q37 lattice Boltzmann kernels over four interchangeable memory
//! layouts (AoS, SoA, CSoA, CAoSoA), with an oracle validator, a
//! benchmark harness and RAPL energy accounting.
//!
//! ```no_run
//! use std::sync::Arc;
//! use d2q37::kernels::{LatticeState, Schedule, Workers};
//! use d2q37::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};
//! use d2q37::model::{Macros, VelocityModel};
//!
//! let model = Arc::new(VelocityModel::d2q37()?);
//! let desc = LayoutDescriptor::d2q37(LayoutKind::Caosoa, LatticeGeometry::new(256, 1024, 8)?);
//! let t0 = model.t0();
//! let mut state = LatticeState::from_macros(desc, model, |_, _| Macros::new(1.0, 0.0, 0.0, t0))?;
//! state.run(100, 1.2, &Workers::new(4, Schedule::Dynamic)?)?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

// Population loops index several parallel arrays by `p`.
#![allow(clippy::needless_range_loop)]

pub mod aligned;
pub mod cli;
pub mod dump;
pub mod energy;
pub mod kernels;
pub mod layout;
pub mod metrics;
pub mod model;
pub mod validation;
