//! Acceptance run: every criterion prints one PASS/FAIL line with its measured
//! figures; the process exits nonzero if any fails. Tolerances are pinned below.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbx_core::estimates::{
    classic_gl_bound, estimate_helmholtz, estimate_qbx2d, estimate_qbx3d_patch, ln_sup_derivative_g1, HelmholtzForm,
    PatchForm, PoleHeight, Qbx2dForm, QbxConfig, QbxGeometry,
};
use qbx_core::harness::experiments::DEFAULT_SEED;
use qbx_core::harness::model::{band_check, default_step, ls_slope, model_scan, ModelCase};
use qbx_core::harness::planar::{helmholtz_panel_study, qbx2d_circle_study, starfish_study, CircleDensity};
use qbx_core::harness::precise::hp_remainder;
use qbx_core::harness::surface::{envelope_check, patch_study, spheroid_gl_scan, spheroid_trapz_scan, PolynomialDensity};
use qbx_core::kernels::Singularity;
use qbx_core::quadrature::{cached_rule, RuleKind};
use qbx_core::remainder::{cartesian_residues, residue_remainder, sqrt_exterior, KernelKind, ResidueVariant};
use qbx_core::specfun::{bessel_jy_all, legendre_p, spherical_harmonic, SphericalAngles};
use qbx_core::Result;

const RULE_EXACTNESS_TOL: f64 = 1e-13;
const RULE_BUDGET: Duration = Duration::from_secs(1);

const RESIDUE_IDENTITY_TOL: f64 = 1e-9;
const RESIDUE_MEASURED_FLOOR: f64 = 1e-13;
const RESIDUE_BUDGET: Duration = Duration::from_secs(5);

const BAND_WINDOW: (f64, f64) = (1e-12, 1e-3);
const BAND_RATIO: (f64, f64) = (0.2, 5.0);
const BAND_SLOPE_MISMATCH: f64 = 0.05;
/// Upper n of each scan; every scan must reach the bottom of the window before it.
const BAND_N_MAX: usize = 4000;
const BAND_BUDGET: Duration = Duration::from_secs(60);

const CLASSIC_MARGIN: f64 = 1e6;
const CLASSIC_MEASURED_MAX: f64 = 1e-5;

/// One order of magnitude either way.
const ONE_ORDER: (f64, f64) = (0.1, 10.0);
/// Changes between orders below this level are roundoff and do not count against monotonicity.
const QBX2D_ROUNDOFF: f64 = 1e-13;
const QBX2D_TRACK_ORDERS: (usize, usize) = (5, 40);
const QBX2D_BOUND_SLACK: f64 = 10.0;
const QBX2D_BUDGET: Duration = Duration::from_secs(120);

const PATCH_N: usize = 48;
const PATCH_R: f64 = 0.2;
const PATCH_ORDER: usize = 15;
const PATCH_SLOPE_TOL: f64 = 0.3;
/// e_T samples below this are at the reference's accuracy and are left out of the slope fit.
const PATCH_SLOPE_FLOOR: f64 = 1e-12;
const PATCH_BUDGET: Duration = Duration::from_secs(600);

const SPHEROID_R: f64 = 0.2;
const SPHEROID_LMAX: usize = 10;
const SPHEROID_N: (usize, usize) = (4, 1200);
const SPHEROID_WINDOW: (f64, f64) = (1e-11, 1e-3);
const SPHEROID_ENVELOPE: usize = 5;
const SPHEROID_BUDGET: Duration = Duration::from_secs(600);

const STARFISH_LEVEL: f64 = 1e-6;
const STARFISH_CASES: [(usize, f64); 2] = [(35, 0.30), (70, 0.15)];

const HELMHOLTZ_LMAX: usize = 10;

const ADDITION_TOL: f64 = 1e-12;
const WRONSKIAN_TOL: f64 = 1e-10;
const CONJUGATE_TOL: f64 = 1e-13;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn rule_exactness() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in [4, 8, 16, 32] {
        let rule = cached_rule(RuleKind::GaussLegendre, n)?;
        for k in 0..2 * n {
            let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
            let q = rule.apply(|x| Complex64::new(x.powi(k as i32), 0.0), None)?;
            worst = worst.max((q.re - exact).abs());
        }
    }
    let trap = cached_rule(RuleKind::TrapezoidalPeriodic, 32)?;
    let mut worst_trap = 0.0f64;
    for k in -31i32..=31 {
        let exact = if k == 0 { 2.0 * PI } else { 0.0 };
        let q = trap.apply(|t| Complex64::from_polar(1.0, k as f64 * t), None)?;
        worst_trap = worst_trap.max((q - exact).norm());
    }
    outcome(
        worst <= RULE_EXACTNESS_TOL && worst_trap <= RULE_EXACTNESS_TOL,
        format!("max GL error {worst:.2e}, max trapezoid error {worst_trap:.2e} (tol {RULE_EXACTNESS_TOL:.0e})"),
    )
}

fn residue_identity() -> Result<Outcome> {
    let (mut worst, mut checked, mut skipped) = (0.0f64, 0, 0);
    for p in [1.0, 2.0, 3.0] {
        for b in [0.1, 0.3, 1.0] {
            let s = Singularity::circle(b, p)?;
            for n in (20..=120).step_by(20) {
                let measured = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Complex, &s, n)?;
                if measured.norm() < RESIDUE_MEASURED_FLOOR {
                    skipped += 1;
                    continue;
                }
                let predicted =
                    residue_remainder(RuleKind::TrapezoidalPeriodic, &s, n, KernelKind::Complex, ResidueVariant::Full)?;
                worst = worst.max((predicted - measured).norm() / measured.norm());
                checked += 1;
            }
        }
    }
    outcome(
        worst <= RESIDUE_IDENTITY_TOL,
        format!("max relative deviation {worst:.2e} over {checked} points, {skipped} below {RESIDUE_MEASURED_FLOOR:.0e} (tol {RESIDUE_IDENTITY_TOL:.0e})"),
    )
}

fn theorem_bands() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for case in ModelCase::ALL {
        let cartesian = matches!(case, ModelCase::GlCartesian | ModelCase::TrapzCartesian);
        let ps: &[f64] = if cartesian { &[1.0, 1.5, 2.0, 3.0, 5.0, 5.5, 10.0] } else { &[1.0, 2.0, 3.0, 5.0, 10.0] };
        let (mut rmin, mut rmax, mut smax, mut points) = (f64::INFINITY, 0.0f64, 0.0f64, 0);
        for &p in ps {
            for b in [0.05, 0.1, 0.2, 0.5] {
                let scan = model_scan(case, p, b, default_step(b), BAND_N_MAX)?;
                let reached = scan.last().is_some_and(|pt| pt.measured < BAND_WINDOW.0);
                match band_check(&scan, BAND_WINDOW.0, BAND_WINDOW.1) {
                    Some(bc) => {
                        rmin = rmin.min(bc.ratio_min);
                        rmax = rmax.max(bc.ratio_max);
                        smax = smax.max(bc.slope_mismatch);
                        points += bc.points;
                        let ok = reached
                            && within(bc.ratio_min, BAND_RATIO)
                            && within(bc.ratio_max, BAND_RATIO)
                            && bc.slope_mismatch <= BAND_SLOPE_MISMATCH;
                        if !ok {
                            failures.push(format!(
                                "{case} p={p} b={b}: ratio [{:.3}, {:.3}] slope {:.3} reached={reached}",
                                bc.ratio_min, bc.ratio_max, bc.slope_mismatch
                            ));
                        }
                    }
                    None => failures.push(format!("{case} p={p} b={b}: fewer than two samples in the window")),
                }
            }
        }
        summary.push(format!("{case}: ratio [{rmin:.3}, {rmax:.3}] slope {smax:.3} ({points} pts)"));
    }
    let mut detail = summary.join("; ");
    if !failures.is_empty() {
        detail = format!("{detail}; failing: {}", failures.join("; "));
    }
    outcome(failures.is_empty(), format!("{detail} (band [{}, {}], slope {BAND_SLOPE_MISMATCH})", BAND_RATIO.0, BAND_RATIO.1))
}

fn classic_bound() -> Result<Outcome> {
    let (b, n) = (0.4, 20);
    let bound = classic_gl_bound(n, 2.0, ln_sup_derivative_g1(2 * n, b).exp())?.magnitude;
    let exact = 2.0 / b * (1.0 / b).atan();
    let rule = cached_rule(RuleKind::GaussLegendre, n)?;
    let q = rule.apply(|x| Complex64::new(1.0 / (x * x + b * b), 0.0), None)?.re;
    let measured = (exact - q).abs();
    outcome(
        measured <= CLASSIC_MEASURED_MAX && bound >= CLASSIC_MARGIN * measured,
        format!("bound {bound:.3e}, measured {measured:.4e}, factor {:.2e} (need >= {CLASSIC_MARGIN:.0e}, measured <= {CLASSIC_MEASURED_MAX:.0e})", bound / measured),
    )
}

fn monotone(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| {
        let (a, b) = if increasing { (w[0], w[1]) } else { (w[1], w[0]) };
        b >= a || a.max(b) <= QBX2D_ROUNDOFF
    })
}

fn qbx2d_circle() -> Result<Outcome> {
    let h = 2.0 * PI / 20.0;
    let r = 0.1 * h;
    let (_, pmax) = QBX2D_TRACK_ORDERS;
    let density = CircleDensity::sin_pow10();
    let cfg = QbxConfig::new(pmax, r, 100, h, QbxGeometry::Circle2d)?.with_sigma(density.sup_norm());
    let split = qbx2d_circle_study(&cfg, &density, 1)?;
    let e_t = &split.e_t[1..];
    let e_q = &split.e_q[1..];
    let (mut tmin, mut tmax) = (f64::INFINITY, 0.0f64);
    let mut bound_ok = true;
    let mut bound_min = f64::INFINITY;
    for p in 1..=pmax {
        let c = cfg.with_order(p);
        let measured = split.e_q[p];
        let ub = estimate_qbx2d(&c, Qbx2dForm::UpperBound)?.magnitude;
        bound_ok &= QBX2D_BOUND_SLACK * ub >= measured;
        bound_min = bound_min.min(QBX2D_BOUND_SLACK * ub / measured);
        if p >= QBX2D_TRACK_ORDERS.0 {
            let ratio = estimate_qbx2d(&c, Qbx2dForm::Sum)?.magnitude / measured;
            tmin = tmin.min(ratio);
            tmax = tmax.max(ratio);
        }
    }
    let (dec, inc) = (monotone(e_t, false), monotone(e_q, true));
    outcome(
        dec && inc && within(tmin, ONE_ORDER) && within(tmax, ONE_ORDER) && bound_ok,
        format!(
            "e_T decreasing {dec}, e_Q increasing {inc} (roundoff {QBX2D_ROUNDOFF:.0e}); sum/e_Q in [{tmin:.3}, {tmax:.3}] for p {}..{}; min slack*bound/e_Q {bound_min:.3e}",
            QBX2D_TRACK_ORDERS.0, QBX2D_TRACK_ORDERS.1
        ),
    )
}

fn patch() -> Result<Outcome> {
    let density = PolynomialDensity::random(15, DEFAULT_SEED);
    let study = patch_study(PATCH_N, PATCH_R, PATCH_ORDER, &density)?;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for l in 0..=PATCH_ORDER {
        let cfg = QbxConfig::new(l, PATCH_R, PATCH_N, 2.0, QbxGeometry::Patch3d)?.with_sigma(study.sigma_at_target.abs());
        let ratio = estimate_qbx3d_patch(&cfg, PatchForm::Sum)?.magnitude / study.e_q[l];
        rmin = rmin.min(ratio);
        rmax = rmax.max(ratio);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = study
        .e_t
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > PATCH_SLOPE_FLOOR)
        .map(|(p, &e)| (p as f64, e.log10()))
        .unzip();
    let slope = ls_slope(&x, &y);
    let target = PATCH_R.log10();
    outcome(
        within(rmin, ONE_ORDER) && within(rmax, ONE_ORDER) && x.len() >= 2 && (slope - target).abs() <= PATCH_SLOPE_TOL,
        format!(
            "estimate/e_Q in [{rmin:.3}, {rmax:.3}] for l <= {PATCH_ORDER}; e_T slope {slope:.3} vs log10 r {target:.3} over {} orders (tol {PATCH_SLOPE_TOL})",
            x.len()
        ),
    )
}

fn spheroid() -> Result<Outcome> {
    let mut failures = Vec::new();
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for (a, c) in [(2.0, 1.0), (1.0, 2.0)] {
        let scans = [
            ("trapezoid", spheroid_trapz_scan(a, c, SPHEROID_R, SPHEROID_LMAX, SPHEROID_N)?),
            ("gl", spheroid_gl_scan(a, c, SPHEROID_R, SPHEROID_LMAX, SPHEROID_N)?),
        ];
        for (dir, scan) in &scans {
            for l in 0..=SPHEROID_LMAX {
                match envelope_check(scan, l, SPHEROID_WINDOW.0, SPHEROID_WINDOW.1, SPHEROID_ENVELOPE) {
                    Some(ec) => {
                        rmin = rmin.min(ec.ratio_min);
                        rmax = rmax.max(ec.ratio_max);
                        if !(within(ec.ratio_min, ONE_ORDER) && within(ec.ratio_max, ONE_ORDER)) {
                            failures.push(format!("{dir} a={a} c={c} l={l}: [{:.3}, {:.3}]", ec.ratio_min, ec.ratio_max));
                        }
                    }
                    None => failures.push(format!("{dir} a={a} c={c} l={l}: empty window")),
                }
            }
        }
    }
    let mut detail = format!("estimate/envelope in [{rmin:.3}, {rmax:.3}] over both shapes, both directions, l <= {SPHEROID_LMAX}");
    if !failures.is_empty() {
        detail = format!("{detail}; failing: {}", failures.join("; "));
    }
    outcome(failures.is_empty(), detail)
}

fn starfish() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (panels, tol) in STARFISH_CASES {
        let rays = starfish_study(panels, 16, 20, (1e-3, 0.4, 300), PoleHeight::TwoDOverL)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut missing = 0;
        for ray in &rays {
            match (ray.crossing(&ray.estimate, STARFISH_LEVEL), ray.crossing(&ray.measured, STARFISH_LEVEL)) {
                (Some(e), Some(m)) => {
                    lo = lo.min(e / m);
                    hi = hi.max(e / m);
                }
                _ => missing += 1,
            }
        }
        let ok = missing == 0 && (lo - 1.0).abs() <= tol && (hi - 1.0).abs() <= tol;
        pass &= ok;
        parts.push(format!("N={panels}: crossing ratio [{lo:.3}, {hi:.3}] (tol {tol}), {missing} rays without crossing"));
    }
    outcome(pass, parts.join("; "))
}

fn helmholtz() -> Result<Outcome> {
    let (h, n, r) = (1.0, 16, 0.1);
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for omega in [1.0, 5.0] {
        for c in helmholtz_panel_study(h, n, r, omega, HELMHOLTZ_LMAX)? {
            rmin = rmin.min(c.estimate / c.measured);
            rmax = rmax.max(c.estimate / c.measured);
        }
    }
    let cfg = QbxConfig::new(HELMHOLTZ_LMAX, r, n, h, QbxGeometry::Panel2d)?;
    let totals: Vec<u64> = [0.01, 1.0, 5.0, 100.0]
        .iter()
        .map(|&w| estimate_helmholtz(&cfg, w, HelmholtzForm::Total).map(|e| e.magnitude.to_bits()))
        .collect::<Result<_>>()?;
    let identical = totals.windows(2).all(|w| w[0] == w[1]);
    outcome(
        within(rmin, ONE_ORDER) && within(rmax, ONE_ORDER) && identical,
        format!("estimate/measured in [{rmin:.3}, {rmax:.3}] for l <= {HELMHOLTZ_LMAX}, omega h in {{1, 5}}; total form bitwise equal across omega: {identical}"),
    )
}

fn properties() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut addition = 0.0f64;
    for _ in 0..500 {
        let l = rng.gen_range(0..=12usize);
        let (t1, p1, t2, p2) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let (a, b) = (SphericalAngles::new(t1, p1)?, SphericalAngles::new(t2, p2)?);
        let mut s = Complex64::new(0.0, 0.0);
        for m in -(l as i64)..=(l as i64) {
            s += spherical_harmonic(l, -m, a)? * spherical_harmonic(l, m, b)?;
        }
        s *= 4.0 * PI / (2 * l + 1) as f64;
        let cos_g = t1.cos() * t2.cos() + t1.sin() * t2.sin() * (p1 - p2).cos();
        addition = addition.max((s - legendre_p(l, cos_g).0).norm());
    }

    let mut wronskian = 0.0f64;
    for k in 0..60 {
        let x = 0.1 * 1.1f64.powi(k);
        let (j, y) = bessel_jy_all(21, x)?;
        for l in 0..=20 {
            // J_l Y_{l+1} - J_{l+1} Y_l = -2 / (pi x).
            let w = j[l] * y[l + 1] - j[l + 1] * y[l];
            let expect = -2.0 / (PI * x);
            wronskian = wronskian.max(((w - expect) / expect).abs());
        }
    }

    let mut branch_failures = 0;
    for _ in 0..10_000 {
        let z = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let w = sqrt_exterior(z);
        let squared = (w * w - (z * z - 1.0)).norm() <= 1e-12 * (z * z - 1.0).norm().max(1.0);
        if !(squared && (z + w).norm() >= 1.0 - 1e-12) {
            branch_failures += 1;
        }
    }

    let mut pairing = 0.0f64;
    for _ in 0..500 {
        let p = rng.gen_range(1..=4) as f64;
        let n = rng.gen_range(4..80);
        let (a, b) = (rng.gen_range(-0.8..0.8), rng.gen_range(0.05..1.0));
        for (rule, s) in [
            (RuleKind::GaussLegendre, Singularity::interval(a, b, p)?),
            (RuleKind::TrapezoidalPeriodic, Singularity::circle_at(a, b, p)?),
        ] {
            let [r0, r1] = cartesian_residues(rule, &s, n)?;
            pairing = pairing.max((r1 - r0.conj()).norm() / r0.norm());
            let pred = residue_remainder(rule, &s, n, KernelKind::Cartesian, ResidueVariant::Asymptotic)?;
            pairing = pairing.max(pred.im.abs() / pred.norm());
        }
    }
    outcome(
        addition <= ADDITION_TOL && wronskian <= WRONSKIAN_TOL && branch_failures == 0 && pairing <= CONJUGATE_TOL,
        format!(
            "addition {addition:.2e} (tol {ADDITION_TOL:.0e}); Wronskian {wronskian:.2e} (tol {WRONSKIAN_TOL:.0e}); exterior branch failures {branch_failures}/10000; conjugate pairing {pairing:.2e} (tol {CONJUGATE_TOL:.0e})"
        ),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let checks: [(&str, Check, Option<Duration>); 10] = [
        ("1 rule exactness", rule_exactness, Some(RULE_BUDGET)),
        ("2 trapezoid residue identity", residue_identity, Some(RESIDUE_BUDGET)),
        ("3 model-kernel ratio bands", theorem_bands, Some(BAND_BUDGET)),
        ("4 classic bound overshoot", classic_bound, None),
        ("5 2D QBX on the circle", qbx2d_circle, Some(QBX2D_BUDGET)),
        ("6 3D flat patch", patch, Some(PATCH_BUDGET)),
        ("7 spheroid cross sections", spheroid, Some(SPHEROID_BUDGET)),
        ("8 starfish contours", starfish, None),
        ("9 Helmholtz coefficients", helmholtz, None),
        ("10 property suites", properties, None),
    ];
    let mut failed = 0;
    for (name, check, budget) in checks {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget_note = budget.map(|b| format!(", budget {:.0} s", b.as_secs_f64())).unwrap_or_default();
        println!("{} [{name}] {detail} [{:.2} s{budget_note}]", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        if !pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
