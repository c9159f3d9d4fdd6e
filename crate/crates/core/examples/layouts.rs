//! Where each layout puts the populations of a tiny lattice.
//!
//! Two populations on a 4x8 lattice with no halo and vl = 2, so the
//! orderings are easy to read. Slots are printed in memory order.
//!
//!     cargo run --example layouts

use d2q37::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (lx, ly, npop) = (4, 8, 2);
    let g = LatticeGeometry::with_halo(lx, ly, 2, 0, 0)?;
    for kind in LayoutKind::ALL {
        let desc = LayoutDescriptor::new(kind, g, npop);
        let mut slots = vec![String::from("."); desc.len()];
        for x in 0..lx {
            for y in 0..ly {
                for p in 0..npop {
                    let idx = desc.index(d2q37::layout::SiteCoord::new(x, y, p))?;
                    slots[idx] = format!("{}{x}:{y}", ["a", "b"][p]);
                }
            }
        }
        println!("{kind}, one x-column per line:");
        for chunk in slots.chunks(desc.col_stride()) {
            println!("  {}", chunk.join(" "));
        }
        println!();
    }
    println!("`a1:5` is population a of site x=1, y=5.");
    Ok(())
}
