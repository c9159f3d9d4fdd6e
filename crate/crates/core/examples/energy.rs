//! Energy-to-solution around a short run: RAPL counters when the host
//! exposes them, otherwise a synthetic 50 W source.
//!
//!     cargo run --release --example energy

use std::sync::Arc;

use d2q37::energy::{
    energy_to_solution, CounterProvider, EnergyDomain, FakeProvider, SysfsProvider,
};
use d2q37::kernels::{LatticeState, Schedule, Workers};
use d2q37::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};
use d2q37::model::VelocityModel;
use d2q37::validation::random_physical_state;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut provider: Box<dyn CounterProvider> = match SysfsProvider::discover() {
        Ok(p) => {
            println!("reading {} RAPL zones", p.zone_count());
            Box::new(p)
        }
        Err(e) => {
            println!("{e}; using a synthetic 40 W + 10 W source");
            let mut fake = FakeProvider::new()
                .with_domain(EnergyDomain::Package, 40.0, 262_143_328_850)
                .with_domain(EnergyDomain::Dram, 10.0, 65_712_999_613);
            fake.tick_ns = 500_000_000;
            Box::new(fake)
        }
    };

    let model = Arc::new(VelocityModel::d2q37()?);
    let (lx, ly, iterations) = (128, 512, 50);
    let desc = LayoutDescriptor::d2q37(LayoutKind::Caosoa, LatticeGeometry::new(lx, ly, 8)?);
    let init = random_physical_state(lx, ly, &model, 1).to_canonical();
    let mut state = LatticeState::from_canonical(desc, model, &init)?;
    let workers = Workers::new(
        std::thread::available_parallelism().map_or(1, |n| n.get()),
        Schedule::Dynamic,
    )?;

    let before = provider.read_counters()?;
    state.run(iterations, 1.2, &workers)?;
    let after = provider.read_counters()?;
    let r = energy_to_solution(&before, &after, iterations as u64)?;
    println!("package   {:.6} J/iteration", r.joules_package);
    println!("dram      {:.6} J/iteration", r.joules_dram);
    println!("total     {:.6} J/iteration", r.joules_total);
    println!(
        "average   {:.2} W over {:.3} s",
        r.avg_power_w, r.duration_s
    );
    Ok(())
}
