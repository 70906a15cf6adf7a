//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: usize = 48;
/// Beyond this many integrand evaluations, pending intervals are accepted
/// as they are and their error estimates reported.
const MAX_EVALUATIONS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol |I|)` by recursive
/// bisection. Intervals are processed in a fixed order, so the result is
/// deterministic.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain("interval", b - a, "finite interval with a <= b"));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (whole, err) = gk15(&f, a, b);
    let mut evaluations = 15;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut stack = vec![(a, b, whole, err, 0usize)];
    let target = |v: f64| abs_tol.max(rel_tol * v.abs());
    let global = target(whole);
    while let Some((lo, hi, v, e, depth)) = stack.pop() {
        let width_share = (hi - lo) / (b - a);
        if e <= global * width_share
            || depth >= MAX_DEPTH
            || e <= f64::EPSILON * v.abs()
            || evaluations >= MAX_EVALUATIONS
        {
            value += v;
            error += e;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        stack.push((mid, hi, v2, e2, depth + 1));
        stack.push((lo, mid, v1, e1, depth + 1));
    }
    if !value.is_finite() {
        return Err(Error::Degenerate("integrand is not finite".into()));
    }
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(r.value, 10.5 - 9.0, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_normalization() {
        let s = 1e-3;
        let pdf = |x: f64| (-0.5 * (x / s).powi(2)).exp() / (s * std::f64::consts::TAU.sqrt());
        let r = integrate(pdf, -8.0 * s, 8.0 * s, 1e-14, 1e-13).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x| (30.0 * x).sin().powi(2), 0.0, std::f64::consts::PI, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-11);
    }

    #[test]
    fn bad_interval() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9, 1e-9).is_err());
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-9, 1e-9).unwrap().value, 0.0);
    }
}
