//! Spheroid quadrature errors: each direction resolved on its own, then the full grid.

use qbx_core::estimates::find_tstar;
use qbx_core::harness::surface::{envelope_check, spheroid_full_study, spheroid_gl_scan, spheroid_trapz_scan};

fn main() -> qbx_core::Result<()> {
    let r = 0.2;
    for (a, c) in [(2.0, 1.0), (1.0, 2.0)] {
        if let Ok(cs) = find_tstar(a, c, r) {
            println!("a={a} c={c}: slowest cross section at t = {:.6}", cs.t_c);
        }
        let trap = spheroid_trapz_scan(a, c, r, 4, (4, 400))?;
        let gl = spheroid_gl_scan(a, c, r, 4, (4, 400))?;
        for (dir, scan) in [("trapezoid", &trap), ("gauss-legendre", &gl)] {
            for l in [0, 2, 4] {
                if let Some(e) = envelope_check(scan, l, 1e-11, 1e-3, 5) {
                    println!("  {dir:<14} l={l}: n {}..{} estimate/envelope in [{:.2}, {:.2}]", e.n_first, e.n_last, e.ratio_min, e.ratio_max);
                }
            }
        }
    }

    let full = spheroid_full_study(1.0, 2.0, r, 80, 40, 6)?;
    for (p, (m, e)) in full.e_q.iter().zip(&full.estimate).enumerate() {
        println!("full grid p={p}: e_Q {m:.3e}, estimate {e:.3e}");
    }
    Ok(())
}
