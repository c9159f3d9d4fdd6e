//! Time propagate, collide and a full step over every layout and print
//! the CSV plus a short comparison against AoS/SoA.
//!
//!     cargo run --release --example bench_matrix [lx ly]

use std::sync::Arc;

use d2q37::cli::{run_bench_matrix, trend_report, Mode, RunConfig};
use d2q37::model::VelocityModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse())
        .collect::<Result<_, _>>()?;
    let mut cfg = RunConfig::defaults(Mode::Bench);
    if let [lx, ly] = args[..] {
        cfg.geometries = vec![(lx, ly)];
    }
    cfg.iterations = 20;
    cfg.warmup = 3;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    cfg.workers = if threads > 1 {
        vec![1, threads]
    } else {
        vec![1]
    };

    let model = Arc::new(VelocityModel::d2q37()?);
    let table = run_bench_matrix(&cfg, &model, None);
    print!("{}", table.to_csv());
    println!();
    print!("{}", trend_report(&table));
    Ok(())
}
