//! 2D Laplace QBX on the unit circle: truncation and quadrature error per order.

use std::f64::consts::PI;

use qbx_core::estimates::{estimate_qbx2d, Qbx2dForm, QbxConfig, QbxGeometry};
use qbx_core::harness::planar::{qbx2d_circle_study, CircleDensity};

fn main() -> qbx_core::Result<()> {
    let h = 2.0 * PI / 20.0;
    let density = CircleDensity::sin_pow10();
    let cfg = QbxConfig::new(30, 0.1 * h, 100, h, QbxGeometry::Circle2d)?.with_sigma(density.sup_norm());
    let split = qbx2d_circle_study(&cfg, &density, 7)?;
    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "p", "e_T", "e_Q", "estimate", "upper bound");
    for p in (1..=30).step_by(3) {
        let c = cfg.with_order(p);
        println!(
            "{p:>3} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            split.e_t[p],
            split.e_q[p],
            estimate_qbx2d(&c, Qbx2dForm::Sum)?.magnitude,
            estimate_qbx2d(&c, Qbx2dForm::UpperBound)?.magnitude
        );
    }
    Ok(())
}
