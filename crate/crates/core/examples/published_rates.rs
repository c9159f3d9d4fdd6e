//! Bandwidth, flop rate and MLUPS recomputed from published kernel timings
//! on a 1024 x 8192 lattice with 6600 flops per site.
//!
//!     cargo run --example published_rates

use d2q37::metrics::{collide_gflops, mlups, propagate_gbps, TrafficModel};
use d2q37::model::COLLIDE_FLOPS_PER_SITE;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = [
        ("KNC 7120P", 1024, 8192, 49.9, 180.9),
        ("GK210", 1024, 8192, 32.3, 71.1),
        ("P100", 1024, 8192, 12.5, 24.1),
        ("E5-2697v4", 1024, 8192, 98.06, 173.42),
        ("KNL flat/quad", 1024, 8192, 12.5, 50.3),
        ("KNL cache/quad", 1024, 8192, 19.65, 51.42),
        ("KNL cache/quad", 4608, 12288, 506.64, 550.25),
    ];
    println!(
        "{:<16} {:>12} {:>10} {:>10} {:>10} {:>10}",
        "processor", "lattice", "prop GB/s", "coll GF/s", "coll MLUPS", "rfo GB/s"
    );
    for (name, lx, ly, tp, tc) in rows {
        println!(
            "{:<16} {:>12} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            name,
            format!("{lx}x{ly}"),
            propagate_gbps(lx, ly, 37, tp * 1e-3, TrafficModel::Nt)?,
            collide_gflops(lx, ly, 6600.0, tc * 1e-3)?,
            mlups(lx, ly, tc * 1e-3)?,
            propagate_gbps(lx, ly, 37, tp * 1e-3, TrafficModel::Rfo)?,
        );
    }
    println!(
        "\nthis crate's collide counts {COLLIDE_FLOPS_PER_SITE} flops per site; \
         pass --flops-per-site 6600 to the bench to report on the same scale"
    );
    Ok(())
}
