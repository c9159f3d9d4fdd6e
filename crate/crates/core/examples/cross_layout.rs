//! Run the same initial state in every layout and cluster length, check
//! the results agree bit for bit, and round-trip a lattice dump.
//!
//!     cargo run --release --example cross_layout

use std::sync::Arc;

use d2q37::dump::LatticeDump;
use d2q37::kernels::{LatticeState, Schedule, Workers};
use d2q37::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};
use d2q37::model::VelocityModel;
use d2q37::validation::random_physical_state;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Arc::new(VelocityModel::d2q37()?);
    let (lx, ly, steps, omega) = (32, 64, 20, 1.3);
    let init = random_physical_state(lx, ly, &model, 7).to_canonical();
    let workers = Workers::new(4, Schedule::Dynamic)?;

    let mut reference: Option<Vec<f64>> = None;
    for kind in LayoutKind::ALL {
        for vl in [1, 2, 4, 8] {
            let desc = LayoutDescriptor::d2q37(kind, LatticeGeometry::new(lx, ly, vl)?);
            let mut state = LatticeState::from_canonical(desc, model.clone(), &init)?;
            state.run(steps, omega, &workers)?;
            let out = state.dump();
            let same = match &reference {
                None => {
                    reference = Some(out);
                    true
                }
                Some(r) => r.iter().zip(&out).all(|(a, b)| a.to_bits() == b.to_bits()),
            };
            println!(
                "{kind:<7} vl={vl}: {}",
                if same { "identical" } else { "DIFFERENT" }
            );
        }
    }

    // switch layouts halfway through a run
    let desc = LayoutDescriptor::d2q37(LayoutKind::Aos, LatticeGeometry::new(lx, ly, 1)?);
    let mut state = LatticeState::from_canonical(desc, model.clone(), &init)?;
    state.run(steps / 2, omega, &workers)?;
    let mut state = state.convert(LayoutDescriptor::d2q37(
        LayoutKind::Caosoa,
        LatticeGeometry::new(lx, ly, 8)?,
    ))?;
    state.run(steps - steps / 2, omega, &workers)?;
    let same = state.dump() == *reference.as_ref().unwrap();
    println!(
        "AoS -> CAoSoA mid-run: {}",
        if same { "identical" } else { "DIFFERENT" }
    );

    let mut bytes = Vec::new();
    state.to_dump().write_to(&mut bytes)?;
    let back = LatticeDump::read_from(bytes.as_slice())?;
    println!(
        "dump: {} bytes, {}x{}x{} values, round trip {}",
        bytes.len(),
        back.lx,
        back.ly,
        back.npop,
        if back.data == state.dump() {
            "exact"
        } else {
            "BROKEN"
        }
    );
    Ok(())
}
