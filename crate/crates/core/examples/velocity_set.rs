//! The 37 velocities, their shells and the derived quadrature weights.
//!
//!     cargo run --example velocity_set

use d2q37::model::VelocityModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = VelocityModel::d2q37()?;
    println!("t0 = {:.16}", model.t0());
    println!("{:>6} {:>7} {:>22}  members", "|c|^2", "count", "weight");
    for shell in model.shells() {
        let w = model.weights()[shell.members[0]];
        let members: Vec<String> = shell
            .members
            .iter()
            .map(|&i| {
                let c = model.velocities()[i];
                format!("({},{})", c[0], c[1])
            })
            .collect();
        println!(
            "{:>6} {:>7} {:>22.16e}  {}",
            shell.norm2,
            shell.members.len(),
            w,
            members.join(" ")
        );
    }
    let sum: f64 = model.weights().iter().sum();
    println!("sum of weights - 1 = {:.2e}", sum - 1.0);
    Ok(())
}
