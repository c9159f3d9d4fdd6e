//! Decay of a sinusoidal shear wave, compared with the BGK viscosity
//! `nu = t0 (1/omega - 1/2)`.
//!
//!     cargo run --release --example shear_wave

use std::f64::consts::PI;
use std::sync::Arc;

use d2q37::kernels::{LatticeState, Workers};
use d2q37::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};
use d2q37::model::{Macros, VelocityModel};

fn amplitude(s: &LatticeState) -> Result<f64, Box<dyn std::error::Error>> {
    let g = s.descriptor().geometry;
    let (mut re, mut im) = (0.0, 0.0);
    for x in 0..g.lx {
        for y in 0..g.ly {
            let ux = s.macros_at(x, y)?.ux;
            let k = 2.0 * PI * y as f64 / g.ly as f64;
            re += ux * k.cos();
            im -= ux * k.sin();
        }
    }
    Ok(2.0 * re.hypot(im) / (g.lx * g.ly) as f64)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Arc::new(VelocityModel::d2q37()?);
    let (lx, ly, steps) = (4, 256, 2000);
    let k = 2.0 * PI / ly as f64;
    let workers = Workers::serial();
    println!("omega   nu(measured)   nu(theory)   rel.err");
    for omega in [0.8, 1.0, 1.5, 1.8] {
        let desc = LayoutDescriptor::d2q37(LayoutKind::Csoa, LatticeGeometry::new(lx, ly, 4)?);
        let t0 = model.t0();
        let mut s = LatticeState::from_macros(desc, model.clone(), |_, y| {
            Macros::new(1.0, 0.01 * (k * y as f64).sin(), 0.0, t0)
        })?;
        // skip the initial transient before fitting the exponential
        s.run(100, omega, &workers)?;
        let a0 = amplitude(&s)?;
        s.run(steps, omega, &workers)?;
        let a1 = amplitude(&s)?;
        let nu = (a0 / a1).ln() / (k * k * steps as f64);
        let theory = t0 * (1.0 / omega - 0.5);
        println!(
            "{omega:<7} {nu:<14.6} {theory:<12.6} {:.2e}",
            (nu - theory).abs() / theory
        );
    }
    Ok(())
}
