//! Spherical-harmonic QBX expansion about a center near a sphere, evaluated
//! at a surface point, with the coefficients checked against the Legendre route.

use qbx_core::qbx::{legendre_coefficients, qbx3d_coefficients, SurfaceGrid};

fn main() -> qbx_core::Result<()> {
    // Unit sphere, density z: the single layer is z / 3 inside.
    let grid = SurfaceGrid::spheroid_gl(1.0, 1.0, 240, 8, 24)?;
    let sigma = |y: [f64; 3]| y[2];
    let r = 0.15;
    let target = [0.0, 0.6, 0.8];
    let center = [0.0, 0.6 * (1.0 - r), 0.8 * (1.0 - r)];
    let exp = qbx3d_coefficients(&grid, sigma, center, 12, r)?;
    let legendre = legendre_coefficients(&grid, sigma, center, target, 12)?;
    let sums = exp.partial_sums_complex(target)?;
    let mut acc = 0.0;
    for (p, c) in legendre.iter().enumerate() {
        acc += r.powi(p as i32) * c;
        println!("p={p:>2}  harmonics {:.12}  legendre {:.12}", sums[p].re, acc);
    }
    println!("exact 4 pi z / 3 = {:.12}", 4.0 * std::f64::consts::PI * 0.8 / 3.0);
    Ok(())
}
