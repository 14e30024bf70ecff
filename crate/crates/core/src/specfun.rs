//! Special functions: Legendre polynomials, spherical harmonics, integer-order
//! Bessel functions of real argument, and the gamma family.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest Bessel order supported.
pub const MAX_BESSEL_ORDER: usize = 60;

/// P_n(x) and P_n'(x) by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x.abs()) == 0.0 {
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// P_n(z) and P_n'(z) for complex argument.
pub fn legendre_p_complex(n: usize, z: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    if n == 0 {
        return (one, Complex64::new(0.0, 0.0));
    }
    let (mut p0, mut p1) = (one, z);
    // Derivatives follow the differentiated recurrence, valid at z = +-1 too.
    let (mut d0, mut d1) = (Complex64::new(0.0, 0.0), one);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        let d2 = ((2.0 * kf - 1.0) * (p1 + z * d1) - (kf - 1.0) * d0) / kf;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// P_0(x), ..., P_lmax(x).
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax >= 1 {
        out.push(x);
    }
    for k in 2..=lmax {
        let kf = k as f64;
        let v = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(v);
    }
    out
}

/// Associated Legendre function P_l^m(x), m >= 0, without the Condon-Shortley phase.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= (2 * k - 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let v = (x * (2 * ll - 1) as f64 * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = v;
    }
    pm1
}

/// Polar and azimuthal angle of a direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAngles {
    theta: f64,
    phi: f64,
}

impl SphericalAngles {
    /// `theta` in [0, pi]; `phi` is reduced into [0, 2 pi).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::invalid(format!("polar angle {theta} outside [0, pi]")));
        }
        Ok(SphericalAngles { theta, phi: phi.rem_euclid(2.0 * PI) })
    }

    /// Direction of a nonzero vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let rho = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if rho == 0.0 {
            return Err(Error::invalid("zero vector has no direction"));
        }
        let theta = (v[2] / rho).clamp(-1.0, 1.0).acos();
        SphericalAngles::new(theta, v[1].atan2(v[0]))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Y_l^m with the normalization sqrt((2l+1)/(4pi) (l-|m|)!/(l+|m|)!) P_l^{|m|}(cos theta) e^{i m phi}.
pub fn spherical_harmonic(l: usize, m: i64, angles: SphericalAngles) -> Result<Complex64> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(Error::invalid(format!("|m| = {am} exceeds l = {l}")));
    }
    let all = spherical_harmonics_all(l, angles);
    Ok(all[ylm_index(l, m)])
}

/// Position of (l, m) in the flat layout used by [`spherical_harmonics_all`].
pub fn ylm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Y_l^m for all 0 <= l <= lmax, |m| <= l, laid out by [`ylm_index`].
///
/// Uses the normalized recurrence, so no factorial ratios overflow.
pub fn spherical_harmonics_all(lmax: usize, angles: SphericalAngles) -> Vec<Complex64> {
    let x = angles.theta.cos();
    let s = angles.theta.sin();
    let mut out = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
    let mut pmm = 0.5 / PI.sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        let e = Complex64::from_polar(1.0, m as f64 * angles.phi);
        let mut put = |l: usize, v: f64| {
            out[l * l + l + m] = e * v;
            out[l * l + l - m] = e.conj() * v;
        };
        put(m, pmm);
        if m == lmax {
            break;
        }
        let mf = m as f64;
        let mut p_prev = pmm;
        let mut p_cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
        put(m + 1, p_cur);
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let v = a * (x * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = v;
            put(l, v);
        }
    }
    out
}

/// J_0(x), ..., J_lmax(x) by Miller's downward recurrence, normalized with
/// J_0 + 2 sum_k J_2k = 1. Accurate for every x > 0.
pub fn bessel_j_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel functions need x > 0, got {x}")));
    }
    let top = (lmax as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize + 2;
    start += start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            norm *= 1e-250;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j[k - 1];
        }
    }
    norm += j[0];
    j.truncate(lmax + 1);
    if j.len() < lmax + 1 {
        j.resize(lmax + 1, 0.0);
    }
    for v in j.iter_mut() {
        *v /= norm;
    }
    Ok(j)
}

/// J_0(x), ..., J_lmax(x) together with Y_0(x), ..., Y_lmax(x).
///
/// Y_0 and Y_1 come from Neumann's series over the Miller J values; higher
/// orders from the upward recurrence, which is stable for Y.
pub fn bessel_jy_all(lmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let kmax = (x + 30.0 + (40.0 * x).sqrt()) as usize + 2;
    let jl = bessel_j_all(kmax.max(lmax + 1), x)?;
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < jl.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * jl[2 * k] / k as f64;
        s1 += sign * (jl[2 * k - 1] - jl[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = 2.0 / PI * lg * jl[0] - 4.0 / PI * s0;
    let y1 = -2.0 / PI * (jl[0] / x - lg * jl[1]) + 2.0 / PI * s1;
    let mut y = Vec::with_capacity(lmax + 1);
    y.push(y0);
    if lmax >= 1 {
        y.push(y1);
    }
    for l in 1..lmax {
        let v = 2.0 * l as f64 / x * y[l] - y[l - 1];
        y.push(v);
    }
    let mut j = jl;
    j.truncate(lmax + 1);
    Ok((j, y))
}

fn check_order(l: usize) -> Result<()> {
    if l > MAX_BESSEL_ORDER {
        return Err(Error::invalid(format!("Bessel order {l} above {MAX_BESSEL_ORDER}")));
    }
    Ok(())
}

/// J_l(x).
pub fn bessel_j(l: usize, x: f64) -> Result<f64> {
    check_order(l)?;
    Ok(bessel_j_all(l, x)?[l])
}

/// Y_l(x).
pub fn neumann_y(l: usize, x: f64) -> Result<f64> {
    check_order(l)?;
    Ok(bessel_jy_all(l, x)?.1[l])
}

/// H_l^(1)(x) = J_l(x) + i Y_l(x).
pub fn hankel1(l: usize, x: f64) -> Result<Complex64> {
    check_order(l)?;
    let (j, y) = bessel_jy_all(l, x)?;
    Ok(Complex64::new(j[l], y[l]))
}

/// H_l^(1)(x) for a signed order, using H_{-l} = (-1)^l H_l.
pub fn hankel1_signed(l: i64, x: f64) -> Result<Complex64> {
    let h = hankel1(l.unsigned_abs() as usize, x)?;
    Ok(if l < 0 && l % 2 != 0 { -h } else { h })
}

/// H_0^(1)(x), ..., H_lmax^(1)(x).
pub fn hankel1_all(lmax: usize, x: f64) -> Result<Vec<Complex64>> {
    check_order(lmax)?;
    let (j, y) = bessel_jy_all(lmax, x)?;
    Ok(j.into_iter().zip(y).map(|(a, b)| Complex64::new(a, b)).collect())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, nine coefficients).
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Gamma(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

/// ln n!.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 30 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    ln_gamma_unchecked(n as f64 + 1.0)
}

/// Upper incomplete gamma Gamma(p, x) for integer p >= 1, via
/// (p-1)! e^{-x} sum_{j<p} x^j / j!.
pub fn upper_incomplete_gamma(p: usize, x: f64) -> Result<f64> {
    Ok(ln_upper_incomplete_gamma(p, x)?.exp())
}

/// ln Gamma(p, x) for integer p >= 1.
pub fn ln_upper_incomplete_gamma(p: usize, x: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Domain("incomplete gamma needs p >= 1".into()));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    Ok(ln_factorial(p - 1) - x + ln_exp_partial_sum(p - 1, x))
}

/// ln sum_{j=0}^{m} x^j / j!, evaluated around its largest term.
pub fn ln_exp_partial_sum(m: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let logs: Vec<f64> = (0..=m).map(|j| j as f64 * lx - ln_factorial(j)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + logs.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_values() {
        assert_relative_eq!(legendre_p(2, 0.5).0, -0.125, epsilon = 1e-15);
        for n in 0..=50 {
            assert_relative_eq!(legendre_p(n, 1.0).0, 1.0, epsilon = 1e-13);
        }
        let (p, dp) = legendre_p_complex(3, Complex64::new(0.3, 0.0));
        assert_relative_eq!(p.re, legendre_p(3, 0.3).0, epsilon = 1e-15);
        assert_relative_eq!(dp.re, legendre_p(3, 0.3).1, epsilon = 1e-14);
    }

    #[test]
    fn assoc_matches_direct() {
        // P_2^1 = 3 x sqrt(1-x^2), P_2^2 = 3 (1-x^2)
        let x: f64 = 0.4;
        assert_relative_eq!(assoc_legendre(2, 1, x), 3.0 * x * (1.0 - x * x).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(assoc_legendre(2, 2, x), 3.0 * (1.0 - x * x), epsilon = 1e-14);
    }

    #[test]
    fn harmonics_match_assoc_legendre() {
        let ang = SphericalAngles::new(0.7, 1.3).unwrap();
        for l in 0..8usize {
            for m in -(l as i64)..=(l as i64) {
                let am = m.unsigned_abs() as usize;
                let ratio: f64 = ((l - am + 1)..=(l + am)).map(|k| k as f64).product();
                let norm = ((2 * l + 1) as f64 / (4.0 * PI) / ratio).sqrt();
                let want = Complex64::from_polar(norm * assoc_legendre(l, am, 0.7f64.cos()), m as f64 * 1.3);
                let got = spherical_harmonic(l, m, ang).unwrap();
                assert!((got - want).norm() < 1e-13, "l={l} m={m}");
            }
        }
        assert!(spherical_harmonic(2, 3, ang).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma(5.5).unwrap(), 52.34277778455352, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-13);
        for x in [0.0, 1.0, 5.0] {
            assert_relative_eq!(upper_incomplete_gamma(1, x).unwrap(), (-x).exp(), max_relative = 1e-14);
        }
        assert!(ln_gamma(0.0).is_err());
        assert!(upper_incomplete_gamma(1, -1.0).is_err());
        assert_relative_eq!(erf(10.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bessel_small_argument() {
        assert_relative_eq!(bessel_j(0, 1e-10).unwrap(), 1.0, epsilon = 1e-12);
        let x = 1e-4;
        let v = x * neumann_y(1, x).unwrap();
        assert!((v + 2.0 / PI).abs() < 0.01 * 2.0 / PI);
        assert!(bessel_j(0, 0.0).is_err());
    }

    #[test]
    fn bessel_known_values() {
        // Reference values to 16 digits.
        assert_relative_eq!(bessel_j(0, 1.0).unwrap(), 0.7651976865579666, max_relative = 1e-14);
        assert_relative_eq!(neumann_y(0, 1.0).unwrap(), 0.08825696421567696, max_relative = 1e-13);
        assert_relative_eq!(neumann_y(1, 10.0).unwrap(), 0.24901542420695386, max_relative = 1e-13);
        assert_relative_eq!(bessel_j(5, 30.0).unwrap(), -0.14324029551207706, max_relative = 1e-12);
    }
}
