//! Double-layer error along rays into a starfish, against the panel estimate.

use qbx_core::estimates::PoleHeight;
use qbx_core::harness::planar::starfish_study;

fn main() -> qbx_core::Result<()> {
    let level = 1e-6;
    for panels in [35, 70] {
        let rays = starfish_study(panels, 16, 5, (1e-3, 0.4, 120), PoleHeight::TwoDOverL)?;
        println!("{panels} panels, distance where the error falls to {level:.0e}:");
        for ray in &rays {
            let m = ray.crossing(&ray.measured, level);
            let e = ray.crossing(&ray.estimate, level);
            if let (Some(m), Some(e)) = (m, e) {
                println!("  panel {:>2}: measured {m:.4e}, estimated {e:.4e}, ratio {:.3}", ray.panel, e / m);
            }
        }
    }
    Ok(())
}
