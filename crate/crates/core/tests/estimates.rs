use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbx_core::estimates::*;
use qbx_core::harness::precise::hp_remainder;
use qbx_core::harness::reference::{reference_integral, Domain};
use qbx_core::kernels::Singularity;
use qbx_core::quadrature::{cached_rule, panelize, Circle, RuleKind};
use qbx_core::remainder::{sqrt_exterior, KernelKind};
use qbx_core::specfun::erf;
use qbx_core::Error;

fn gl_sum(n: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    cached_rule(RuleKind::GaussLegendre, n).unwrap().apply(f, None).unwrap()
}

/// First n at which `err(n)` drops below `level`.
fn first_below(level: f64, err: impl Fn(usize) -> f64) -> usize {
    (2..2000).find(|&n| err(n) < level).expect("error never dropped below level")
}

#[test]
fn classic_bound_values() {
    let b = 0.4;
    let est = classic_gl_bound(20, 2.0, ln_sup_derivative_g1(40, b).exp()).unwrap();
    let exact = 2.0 / b * (1.0 / b).atan();
    let measured = (exact - gl_sum(20, |x| Complex64::new(1.0 / (x * x + b * b), 0.0)).re).abs();
    // The 20-point error is 1.77e-6.
    assert!(est.magnitude > 10.0 && measured < 1e-5, "bound {} measured {measured}", est.magnitude);

    assert_eq!(classic_gl_bound(5, 2.0, 0.0).unwrap().magnitude, 0.0);

    // One point, f = x^2: the bound 2/3 is attained.
    let bound = classic_gl_bound(1, 2.0, 2.0).unwrap().magnitude;
    let err = 2.0 / 3.0 - gl_sum(1, |x| Complex64::new(x * x, 0.0)).re;
    assert!(bound >= err * (1.0 - 1e-14));
    assert!(classic_gl_bound(0, 2.0, 1.0).is_err());
}

#[test]
fn gl_complex_theorem_near_1e8() {
    let s = Singularity::interval(0.0, 0.2, 1.0).unwrap();
    let z0 = s.z0();
    let exact = ((1.0 - z0) / (-1.0 - z0)).ln();
    let err = |n: usize| (exact - gl_sum(n, |x| 1.0 / (x - z0))).norm();
    let n = first_below(1e-8, err);
    let est = estimate_gl_complex(&s, n, GlComplexForm::Theorem).unwrap().magnitude;
    let ratio = est / err(n);
    assert!((0.5..=2.0).contains(&ratio), "n={n} ratio={ratio}");

    let e50 = estimate_gl_complex(&s, 50, GlComplexForm::Theorem).unwrap().magnitude;
    assert_relative_eq!(e50, 2.0 * PI / (z0 + sqrt_exterior(z0)).norm().powi(101), max_relative = 1e-12);
}

#[test]
fn gl_complex_order_ratio() {
    let n = 30;
    let (s1, s10) = (Singularity::interval(0.2, 0.3, 1.0).unwrap(), Singularity::interval(0.2, 0.3, 10.0).unwrap());
    let w = sqrt_exterior(s1.z0()).norm();
    let ratio = estimate_gl_complex(&s10, n, GlComplexForm::Theorem).unwrap().magnitude
        / estimate_gl_complex(&s1, n, GlComplexForm::Theorem).unwrap().magnitude;
    assert_relative_eq!(ratio, ((2 * n + 1) as f64 / w).powi(9) / 362880.0, max_relative = 1e-12);
}

#[test]
fn simplified_form_dominates_off_centre_poles() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let a = rng.gen_range(0.3..0.9) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.gen_range(0.01..0.2);
        let n = rng.gen_range(10..80);
        let s = Singularity::interval(a, b, 1.0).unwrap();
        let theorem = estimate_gl_complex(&s, n, GlComplexForm::Theorem).unwrap().magnitude;
        let simple = estimate_gl_complex(&s, n, GlComplexForm::Simplified).unwrap().magnitude;
        assert!(simple >= theorem, "a={a} b={b} n={n}");
    }
}

#[test]
fn gl_cartesian_envelope_off_centre() {
    let (a, b): (f64, f64) = (0.3, 0.2);
    let s = Singularity::interval(a, b, 1.0).unwrap();
    let exact = (((1.0 - a) / b).atan() + ((1.0 + a) / b).atan()) / b;
    let err = |n: usize| (exact - gl_sum(n, |x| Complex64::new(1.0 / ((x - a).powi(2) + b * b), 0.0)).re).abs();
    // The measured error oscillates in n; compare near its local envelope at the 1e-8 level.
    let n = first_below(1e-8, err);
    let measured = (n.saturating_sub(3)..=n + 3).map(err).fold(0.0, f64::max);
    let envelope = (n.saturating_sub(3)..=n + 3)
        .map(|m| estimate_gl_cartesian(&s, m, GlCartesianForm::Theorem).unwrap().magnitude)
        .fold(0.0, f64::max);
    let ratio = envelope / measured;
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "n={n} ratio={ratio}");
}

#[test]
fn centred_pole_bounds_off_centre_errors() {
    let b: f64 = 0.2;
    let centred = Singularity::interval(0.0, b, 1.0).unwrap();
    for a in [0.3f64, 0.6, -0.45] {
        let exact = (((1.0 - a) / b).atan() + ((1.0 + a) / b).atan()) / b;
        for n in (10..=120).step_by(5) {
            let measured = (exact - gl_sum(n, |x| Complex64::new(1.0 / ((x - a).powi(2) + b * b), 0.0)).re).abs();
            if measured < 1e-13 {
                break;
            }
            let bound = estimate_gl_cartesian(&centred, n, GlCartesianForm::Theorem).unwrap().magnitude;
            assert!(measured <= bound, "a={a} n={n} measured={measured} bound={bound}");
        }
    }
}

#[test]
fn full_cartesian_form_contract() {
    let s = Singularity::interval(0.0, 0.2, 5.0).unwrap();
    assert!(matches!(estimate_gl_cartesian(&s, 6, GlCartesianForm::FullPLe3), Err(Error::UnsupportedCombination(_))));
    let w = estimate_gl_cartesian(&s, 6, GlCartesianForm::WorstCaseA0).unwrap();
    assert!(w.magnitude.is_finite() && w.magnitude > 0.0);
    let half = Singularity::interval(0.0, 0.2, 1.5).unwrap();
    assert!(estimate_gl_cartesian(&half, 30, GlCartesianForm::WorstCaseA0).unwrap().magnitude.is_finite());
}

#[test]
fn trapezoid_complex_values() {
    let s = Singularity::circle(0.2, 1.0).unwrap();
    let e = estimate_trapz_complex(&s, 100).unwrap().magnitude;
    assert_relative_eq!(e, 2.0 * PI * 1.2f64.powi(-101), max_relative = 1e-12);

    let s = Singularity::circle(0.2, 3.0).unwrap();
    let n = 40;
    let ratio = estimate_trapz_complex(&s, 2 * n).unwrap().magnitude / estimate_trapz_complex(&s, n).unwrap().magnitude;
    let expect = 1.2f64.powi(-(n as i32)) * ((2 * n + 3) as f64 / (n + 3) as f64).powi(2);
    assert_relative_eq!(ratio, expect, max_relative = 1e-12);
}

#[test]
fn trapezoid_complex_order_ten_window() {
    let s = Singularity::circle(0.2, 10.0).unwrap();
    let mut seen = 0;
    for n in (20..=300).step_by(10) {
        let measured = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Complex, &s, n).unwrap().norm();
        if !(1e-12..=1e-3).contains(&measured) {
            continue;
        }
        let ratio = estimate_trapz_complex(&s, n).unwrap().magnitude / measured;
        assert!((0.5..=2.0).contains(&ratio), "n={n} ratio={ratio}");
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn trapezoid_cartesian_values() {
    let s = Singularity::circle(0.2, 1.0).unwrap();
    let measured = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Cartesian, &s, 60).unwrap().norm();
    let est = estimate_trapz_cartesian(&s, 60).unwrap().magnitude;
    assert_relative_eq!(est, 4.0 * PI / 0.44 * 1.2f64.powi(-60), max_relative = 1e-12);
    assert!((0.5..=2.0).contains(&(est / measured)), "ratio {}", est / measured);

    // Order 5 starts low (0.28 at n = 40) and climbs monotonically towards 1.
    let s = Singularity::circle(0.2, 5.0).unwrap();
    let mut last = 0.0;
    for n in (40..=300).step_by(20) {
        let measured = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Cartesian, &s, n).unwrap().norm();
        let ratio = estimate_trapz_cartesian(&s, n).unwrap().magnitude / measured;
        assert!(ratio > last, "n={n} ratio={ratio}");
        assert!(n < 80 || (0.5..=2.0).contains(&ratio), "n={n} ratio={ratio}");
        last = ratio;
    }
}

#[test]
fn trapezoid_cartesian_bounds_rotated_pole() {
    for p in [1.0, 2.0] {
        let centred = Singularity::circle(0.2, p).unwrap();
        for angle in [0.3, 1.1, 2.0] {
            let s = Singularity::circle_at(angle, 0.2, p).unwrap();
            for n in (20..=200).step_by(13) {
                let measured = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Cartesian, &s, n).unwrap().norm();
                let on_axis = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Cartesian, &centred, n).unwrap().norm();
                assert!(measured <= on_axis * (1.0 + 1e-6), "p={p} angle={angle} n={n}");
                // The estimate is asymptotic: on the axis it sits up to 13% under the error at n = 40.
                if n >= 40 {
                    let est = estimate_trapz_cartesian(&s, n).unwrap().magnitude;
                    assert!(measured <= 1.15 * est, "p={p} angle={angle} n={n}");
                }
            }
        }
    }
}

#[test]
fn density_weighting() {
    let s = Singularity::interval(0.0, 0.2, 1.0).unwrap();
    let e = estimate_gl_complex(&s, 20, GlComplexForm::Theorem).unwrap();
    assert_relative_eq!(density_weighted(&e, Complex64::new(1.0, 0.0)).magnitude, e.magnitude, max_relative = 1e-15);
    assert_relative_eq!(density_weighted(&e, Complex64::new(0.0, 10.0)).magnitude, 10.0 * e.magnitude, max_relative = 1e-14);
}

#[test]
fn oscillating_density_scaling() {
    // sigma = x^3 e^{2ix} against g_1 with b = 0.2, weighted by b^3 cosh(2b).
    let (b, k, m) = (0.2f64, 3, 2.0);
    let f = |x: f64| Complex64::from_polar(x.powi(k) / (x * x + b * b), m * x);
    let exact = reference_integral(f, Domain::Interval { lo: -1.0, hi: 1.0 }, 1e-15).unwrap();
    let err = |n: usize| (exact - gl_sum(n, f)).norm();
    let n = first_below(1e-8, err);
    let s = Singularity::interval(0.0, b, 1.0).unwrap();
    let base = estimate_gl_cartesian(&s, n, GlCartesianForm::Theorem).unwrap();
    let est = density_weighted(&base, Complex64::new(b.powi(k) * (m * b).cosh(), 0.0));
    let ratio = est.magnitude / err(n);
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "n={n} ratio={ratio}");
}

#[test]
fn panel_estimate_far_and_near() {
    let pc = panelize(std::sync::Arc::new(Circle::unit()), 20, 16).unwrap();
    let sig = vec![1.0; 20];
    let far = estimate_panel_dbl_layer(&pc, &sig, Complex64::new(0.0, 0.0), PoleHeight::DOverL).unwrap();
    assert!(far.magnitude <= 1e-15);
    let on = pc.curve().point(0.1);
    assert!(matches!(
        estimate_panel_dbl_layer(&pc, &sig, on, PoleHeight::DOverL),
        Err(Error::SingularTarget(_))
    ));
    let z = Complex64::from_polar(0.97, 0.2);
    let one = panel_pole_map(&pc, 0, z, PoleHeight::DOverL).unwrap();
    let two = panel_pole_map(&pc, 0, z, PoleHeight::TwoDOverL).unwrap();
    assert_relative_eq!(two.b, 2.0 * one.b, max_relative = 1e-15);
    assert_eq!(one.a, two.a);
}

fn circle_cfg(p: usize) -> QbxConfig {
    QbxConfig::new(p, 0.1 * 2.0 * PI / 20.0, 100, 2.0 * PI / 20.0, QbxGeometry::Circle2d).unwrap()
}

#[test]
fn qbx2d_forms() {
    let ub1 = estimate_qbx2d(&circle_cfg(1), Qbx2dForm::UpperBound).unwrap().magnitude;
    let ub30 = estimate_qbx2d(&circle_cfg(30), Qbx2dForm::UpperBound).unwrap().magnitude;
    assert_eq!(ub1, ub30);
    assert_relative_eq!(ub1, 2.0 * PI * (2.0 * PI / 20.0) / 400.0, max_relative = 1e-14);

    for (n, ratio) in [(10, 0.05), (100, 0.1), (400, 0.3)] {
        for p in [0, 1, 5, 20, 60] {
            let cfg = QbxConfig::new(p, ratio * 0.5, n, 0.5, QbxGeometry::Panel2d).unwrap().with_sigma(3.0);
            let sum = estimate_qbx2d(&cfg, Qbx2dForm::Sum).unwrap().magnitude;
            let gam = estimate_qbx2d(&cfg, Qbx2dForm::IncompleteGamma).unwrap().magnitude;
            assert_relative_eq!(sum, gam, max_relative = 1e-12);
            let by_terms: f64 = (0..=p)
                .map(|j| cfg.r.powi(j as i32) * estimate_qbx2d(&cfg, Qbx2dForm::PerCoefficient(j)).unwrap().magnitude)
                .sum();
            assert_relative_eq!(sum, by_terms, max_relative = 1e-12);
        }
    }
}

#[test]
fn estimates_fall_with_n_and_grow_with_order() {
    for b in [0.05, 0.2, 0.5] {
        for p in [1.0f64, 2.0, 3.0, 5.0] {
            // Past n = 2p / b every factor n^{p-1} is outrun by the exponential.
            let n0 = (2.0 * p / b).ceil() as usize;
            let estimates = |s: &Singularity, n: usize| {
                [
                    estimate_gl_complex(s, n, GlComplexForm::Theorem).unwrap().magnitude,
                    estimate_gl_complex(s, n, GlComplexForm::Simplified).unwrap().magnitude,
                    estimate_gl_cartesian(s, n, GlCartesianForm::WorstCaseA0).unwrap().magnitude,
                    estimate_trapz_complex(&Singularity::circle(b, s.p).unwrap(), n).unwrap().magnitude,
                    estimate_trapz_cartesian(&Singularity::circle(b, s.p).unwrap(), n).unwrap().magnitude,
                ]
            };
            let s = Singularity::interval(0.0, b, p).unwrap();
            let next = Singularity::interval(0.0, b, p + 1.0).unwrap();
            for n in [n0, n0 + 7, 3 * n0] {
                let (now, later, higher) = (estimates(&s, n), estimates(&s, n + 1), estimates(&next, n));
                for i in 0..now.len() {
                    assert!(later[i] < now[i], "form {i} b={b} p={p} n={n}");
                    assert!(higher[i] > now[i], "form {i} b={b} p={p} n={n}");
                }
            }
        }
    }
}

#[test]
fn patch_forms() {
    let cfg = QbxConfig::new(12, 0.2, 48, 2.0, QbxGeometry::Patch3d).unwrap().with_sigma(0.7);
    let sum = estimate_qbx3d_patch(&cfg, PatchForm::Sum).unwrap().magnitude;
    let by_level: f64 = (0..=12)
        .map(|l| 0.7 * cfg.r.powi(l as i32) * estimate_qbx3d_patch(&cfg, PatchForm::KernelLevel(l)).unwrap().magnitude)
        .sum();
    assert_relative_eq!(sum, by_level, max_relative = 1e-12);

    // B_0 = 1: the l = 0 term is 2 pi^{3/2} / Gamma(1/2) (h / n) e^{-4nr/h} = 2 pi (h / n) e^{-x}.
    let cfg0 = cfg.with_order(0).with_sigma(1.0);
    let expect = 2.0 * PI * cfg.h / cfg.n as f64 * (-cfg.decay()).exp();
    assert_relative_eq!(estimate_qbx3d_patch(&cfg0, PatchForm::Sum).unwrap().magnitude, expect, max_relative = 1e-12);

    assert!(erf((96.0f64 / 0.2).sqrt()) >= 1.0 - 1e-6);
}

#[test]
fn helmholtz_forms() {
    let cfg = QbxConfig::new(10, 0.1, 16, 1.0, QbxGeometry::Panel2d).unwrap();
    for omega in [1.0, 5.0] {
        for l in 0..10 {
            let a = estimate_helmholtz(&cfg, omega, HelmholtzForm::PerCoefficient(l)).unwrap().magnitude;
            let b = estimate_helmholtz(&cfg, omega, HelmholtzForm::PerCoefficient(l + 1)).unwrap().magnitude;
            assert_relative_eq!(b / a, 8.0 * 16.0 / omega, max_relative = 1e-12);
        }
        let neg = estimate_helmholtz(&cfg, omega, HelmholtzForm::PerCoefficient(-4)).unwrap().magnitude;
        let pos = estimate_helmholtz(&cfg, omega, HelmholtzForm::PerCoefficient(4)).unwrap().magnitude;
        assert_eq!(neg, pos);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let cfg = QbxConfig::new(rng.gen_range(1..40), rng.gen_range(0.01..0.3), rng.gen_range(4..200), rng.gen_range(0.3..3.0), QbxGeometry::Panel2d)
            .unwrap();
        let t1 = estimate_helmholtz(&cfg, 1.0, HelmholtzForm::Total).unwrap().magnitude;
        let t2 = estimate_helmholtz(&cfg, 17.0, HelmholtzForm::Total).unwrap().magnitude;
        assert_eq!(t1.to_bits(), t2.to_bits());
        let laplace = estimate_qbx2d(&cfg, Qbx2dForm::Simplified).unwrap().magnitude;
        assert_relative_eq!(t1 / laplace, 1.0 / (2.0 * PI), max_relative = 1e-12);
    }
    assert!(estimate_helmholtz(&cfg, 0.0, HelmholtzForm::Total).is_err());
}

#[test]
fn spheroid_contact_point() {
    for (a, c) in [(1.0, 2.0), (1.0, 1.0), (0.5, 3.0)] {
        let cs = find_tstar(a, c, 0.2).unwrap();
        assert_eq!(cs.t_c, PI / 2.0);
        assert_relative_eq!(cs.normal_norm, c, max_relative = 1e-15);
        assert_relative_eq!(cs.k, (c * c + a * 0.2f64).sqrt(), max_relative = 1e-14);
        assert!(cs.beta < 1.0 && cs.u0.im > 0.0 && cs.k > 0.0);
    }
    let cfg = QbxConfig::new(4, 0.2, 30, 1.0, QbxGeometry::Spheroid { a: 2.0, c: 1.0, n_s: 60 }).unwrap();
    assert!(matches!(estimate_spheroid(&cfg, SpheroidPart::GlCompact(2)), Err(Error::UnsupportedCombination(_))));
    assert!(estimate_spheroid(&cfg, SpheroidPart::GlCrossSection(2)).unwrap().magnitude.is_finite());
}

#[test]
fn spheroid_convergence_base_shape() {
    let beta = |a: f64, c: f64, t: f64| SpheroidCrossSection::new(a, c, 0.2, t).unwrap().beta;
    for (a, c) in [(1.0, 2.0), (2.0, 1.0), (4.0, 1.0)] {
        for d in [0.1, 0.5, 1.2] {
            assert_relative_eq!(beta(a, c, PI / 2.0 + d), beta(a, c, PI / 2.0 - d), max_relative = 1e-13);
        }
    }
    let grid: Vec<f64> = (1..2000).map(|i| PI * i as f64 / 2000.0).collect();
    let maxima = |a: f64, c: f64| -> Vec<f64> {
        let v: Vec<f64> = grid.iter().map(|&t| beta(a, c, t)).collect();
        (1..v.len() - 1).filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1]).map(|i| grid[i]).collect()
    };
    let m = maxima(1.0, 2.0);
    assert_eq!(m.len(), 1);
    assert!((m[0] - PI / 2.0).abs() < 2e-3);
    for ratio in [2.0, 4.0] {
        let m = maxima(ratio, 1.0);
        assert_eq!(m.len(), 2, "a/c = {ratio}: {m:?}");
        assert!((m[0] + m[1] - PI).abs() < 4e-3);
        let cs = find_tstar(ratio, 1.0, 0.2).unwrap();
        assert!((cs.t_c - m[0]).abs() < 2e-3, "t* {} grid {}", cs.t_c, m[0]);
        assert!(cs.beta >= beta(ratio, 1.0, m[0]) - 1e-12);
    }
}
