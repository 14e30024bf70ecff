//! Helmholtz QBX coefficients on a flat panel: measured error per coefficient
//! against its estimate, for two wavenumbers.

use num_complex::Complex64;
use qbx_core::harness::planar::helmholtz_panel_study;
use qbx_core::qbx::helmholtz_coefficients;
use qbx_core::quadrature::{panelize, Segment};
use std::sync::Arc;

fn main() -> qbx_core::Result<()> {
    for omega in [1.0, 5.0] {
        println!("omega = {omega}");
        for c in helmholtz_panel_study(1.0, 16, 0.1, omega, 10)? {
            println!("  l={:>2} measured {:.3e} estimate {:.3e}", c.ell, c.measured, c.estimate);
        }
    }

    // The expansion itself, evaluated near the panel.
    let seg = Arc::new(Segment { start: Complex64::new(-0.5, 0.0), end: Complex64::new(0.5, 0.0) });
    let pc = panelize(seg, 4, 16)?;
    let center = Complex64::new(0.0, 0.1);
    let exp = helmholtz_coefficients(&pc, |_| 1.0, center, 12, 2.0, 0.1)?;
    let u = exp.evaluate(Complex64::new(0.0, 0.02))?;
    println!("u(0.02 i) = {:.12} {:+.12} i", u.re, u.im);
    Ok(())
}
