//! The oracle validation suite, then the same suite against a kernel with
//! one deliberately wrong pull offset.
//!
//!     cargo run --release --example validate

use std::sync::Arc;

use d2q37::model::VelocityModel;
use d2q37::validation::{run_validation, run_validation_with, ValidationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Arc::new(VelocityModel::d2q37()?);
    let cfg = ValidationConfig::default();
    let report = run_validation(&cfg, &model);
    println!("{report}\n");

    let east = model.index_of([1, 0]).expect("east velocity");
    let faulty = ValidationConfig {
        geometries: vec![(16, 32)],
        vls: vec![4],
        ..cfg
    };
    let report = run_validation_with(&faulty, &model, |state| {
        let off = state.offsets().get(east);
        state.offsets_mut().set(east, off + 1);
    });
    for case in report.failures().take(2) {
        println!("{case}");
    }
    Ok(())
}
