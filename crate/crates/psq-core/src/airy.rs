//! Airy function of the first kind and its derivative.
//!
//! Maclaurin series for |x| <= 8, asymptotic expansions beyond. The Maclaurin
//! branch accumulates in double-double arithmetic: near x = -8 the series
//! cancels about seven digits, which plain f64 summation cannot afford at the
//! 1e-10 accuracy this module promises. The asymptotic branches use the
//! standard (u_k, v_k) coefficient recurrences, truncated where the terms
//! stop helping.
//!
//! The negative working range ends at -12 (OutOfRange below); the positive
//! side has no cap since the expansion only improves as x grows and the
//! values decay below every tolerance.

use crate::error::GridError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::sync::OnceLock;

/// Ai(0) = 3^(-2/3)/Gamma(2/3) and -Ai'(0) = 3^(-1/3)/Gamma(1/3) to
/// double-double precision, split exactly from their 34-digit decimal
/// expansions. Full precision matters: the scaled evaluator multiplies by
/// e^{eps x}, which amplifies any absolute error of the series constants.
fn dd_constants() -> (Dd, Dd) {
    static CONSTS: OnceLock<(Dd, Dd)> = OnceLock::new();
    *CONSTS.get_or_init(|| {
        let parse = |digits: &str, scale: u32| -> Dd {
            let value = BigRational::new(
                digits.parse::<BigInt>().unwrap(),
                BigInt::from(10u8).pow(scale),
            );
            let hi = value.to_f64().unwrap();
            let lo = (&value - BigRational::from_float(hi).unwrap()).to_f64().unwrap();
            Dd { hi, lo }
        };
        (
            parse("3550280538878172392600631860041832", 34),
            parse("2588194037928067984051835601892040", 34),
        )
    })
}

const NEG_LIMIT: f64 = -12.0;
const SERIES_LIMIT: f64 = 8.0;
const ASYM_TERMS: usize = 14;

/// Minimal double-double value for compensated series accumulation.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

fn dd_add(a: Dd, b: Dd) -> Dd {
    let (s, e) = two_sum(a.hi, b.hi);
    let (hi, lo) = quick_two_sum(s, e + a.lo + b.lo);
    Dd { hi, lo }
}

fn dd_mul(a: Dd, b: Dd) -> Dd {
    let (p, e) = two_prod(a.hi, b.hi);
    let (hi, lo) = quick_two_sum(p, e + a.hi * b.lo + a.lo * b.hi);
    Dd { hi, lo }
}

fn dd_div_f64(a: Dd, d: f64) -> Dd {
    let q1 = a.hi / d;
    let (p, e) = two_prod(q1, d);
    let r = ((a.hi - p) - e) + a.lo;
    let (hi, lo) = quick_two_sum(q1, r / d);
    Dd { hi, lo }
}

/// Sum a hypergeometric-type series: term_{k+1} = term_k * x3 / denom(k),
/// starting from `first`. Returns the double-double sum.
fn series_sum(first: Dd, x3: Dd, denom: impl Fn(usize) -> f64) -> Dd {
    let mut term = first;
    let mut sum = first;
    for k in 0..200 {
        term = dd_div_f64(dd_mul(term, x3), denom(k));
        sum = dd_add(sum, term);
        if term.hi.abs() < 1e-25 * sum.hi.abs().max(1e-30) {
            break;
        }
    }
    sum
}

fn ai_series_dd(x: f64) -> Dd {
    let (c1, c2) = dd_constants();
    let x3 = dd_mul(dd_mul(Dd::from(x), Dd::from(x)), Dd::from(x));
    let f = series_sum(Dd::from(1.0), x3, |k| ((3 * k + 2) * (3 * k + 3)) as f64);
    let g = series_sum(Dd::from(x), x3, |k| ((3 * k + 3) * (3 * k + 4)) as f64);
    dd_add(dd_mul(f, c1), dd_mul(g, Dd { hi: -c2.hi, lo: -c2.lo }))
}

fn ai_series(x: f64) -> f64 {
    ai_series_dd(x).to_f64()
}

fn ai_prime_series(x: f64) -> f64 {
    let (c1, c2) = dd_constants();
    let x3 = dd_mul(dd_mul(Dd::from(x), Dd::from(x)), Dd::from(x));
    let x2 = dd_mul(Dd::from(x), Dd::from(x));
    // f'(x): first term x^2/2, ratio x^3/((3k+3)(3k+5)) for the k-th step
    let fp = series_sum(dd_div_f64(x2, 2.0), x3, |k| ((3 * k + 3) * (3 * k + 5)) as f64);
    // g'(x): first term 1, ratio x^3/((3k+1)(3k+3))
    let gp = series_sum(Dd::from(1.0), x3, |k| ((3 * k + 1) * (3 * k + 3)) as f64);
    dd_add(dd_mul(fp, c1), dd_mul(gp, Dd { hi: -c2.hi, lo: -c2.lo })).to_f64()
}

/// u_k and v_k of the asymptotic expansions, k = 0..ASYM_TERMS.
fn asym_coeffs() -> ([f64; ASYM_TERMS], [f64; ASYM_TERMS]) {
    let mut u = [0.0; ASYM_TERMS];
    let mut v = [0.0; ASYM_TERMS];
    u[0] = 1.0;
    v[0] = 1.0;
    for k in 1..ASYM_TERMS {
        let kk = k as f64;
        u[k] = u[k - 1] * (6.0 * kk - 5.0) * (6.0 * kk - 3.0) * (6.0 * kk - 1.0)
            / ((2.0 * kk - 1.0) * 216.0 * kk);
        v[k] = u[k] * (6.0 * kk + 1.0) / (1.0 - 6.0 * kk);
    }
    (u, v)
}

/// Alternating asymptotic tail sum_{k} (-1)^k c_k / zeta^k over one parity
/// class, truncated when terms stop decreasing.
fn asym_tail(coeffs: &[f64], zeta: f64, parity: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = parity;
    let mut sign = 1.0;
    while k < coeffs.len() {
        let term = coeffs[k] / zeta.powi(k as i32);
        if term.abs() >= last {
            break;
        }
        sum += sign * term;
        last = term.abs();
        k += 2;
        sign = -sign;
    }
    sum
}

fn ai_asym_pos(x: f64) -> f64 {
    let (u, _) = asym_coeffs();
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term.abs() >= last {
            break;
        }
        sum += sign * term;
        sign = -sign;
        last = term.abs();
    }
    (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt() * x.powf(0.25)) * sum
}

fn ai_prime_asym_pos(x: f64) -> f64 {
    let (_, v) = asym_coeffs();
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut last = f64::INFINITY;
    for (k, &vk) in v.iter().enumerate() {
        let term = vk / zeta.powi(k as i32);
        if term.abs() >= last {
            break;
        }
        sum += sign * term;
        sign = -sign;
        last = term.abs();
    }
    -x.powf(0.25) * (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt()) * sum
}

fn ai_asym_neg(x: f64) -> f64 {
    let z = -x;
    let (u, _) = asym_coeffs();
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let phase = zeta - std::f64::consts::FRAC_PI_4;
    let even = asym_tail(&u, zeta, 0);
    let odd = asym_tail(&u, zeta, 1);
    (phase.cos() * even + phase.sin() * odd) / (std::f64::consts::PI.sqrt() * z.powf(0.25))
}

fn ai_prime_asym_neg(x: f64) -> f64 {
    let z = -x;
    let (_, v) = asym_coeffs();
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let phase = zeta - std::f64::consts::FRAC_PI_4;
    let even = asym_tail(&v, zeta, 0);
    let odd = asym_tail(&v, zeta, 1);
    z.powf(0.25) / std::f64::consts::PI.sqrt() * (phase.sin() * even - phase.cos() * odd)
}

/// Ai(x). Accurate to 1e-10 on the working range x >= -12.
pub fn airy_ai(x: f64) -> Result<f64, GridError> {
    if !x.is_finite() || x < NEG_LIMIT {
        return Err(GridError::OutOfRange(x));
    }
    if x.abs() <= SERIES_LIMIT {
        Ok(ai_series(x))
    } else if x > 0.0 {
        Ok(ai_asym_pos(x))
    } else {
        Ok(ai_asym_neg(x))
    }
}

/// Ai'(x). Same range and accuracy as [`airy_ai`].
pub fn airy_ai_prime(x: f64) -> Result<f64, GridError> {
    if !x.is_finite() || x < NEG_LIMIT {
        return Err(GridError::OutOfRange(x));
    }
    if x.abs() <= SERIES_LIMIT {
        Ok(ai_prime_series(x))
    } else if x > 0.0 {
        Ok(ai_prime_asym_pos(x))
    } else {
        Ok(ai_prime_asym_neg(x))
    }
}

/// `Ai(x) * exp(eps * x)` without intermediate rounding of Ai.
///
/// The plain product `airy_ai(x)? * (eps*x).exp()` is useless in the decaying
/// region: rounding Ai to f64 first costs `|Ai| * 2^-52 * e^{eps x}`, which
/// for eps ~ 2.5 reaches order one near x = 10. Here the series value stays
/// in double-double until the exponential is folded in, and the asymptotic
/// branch combines the exponents analytically.
pub fn airy_ai_scaled_exp(x: f64, eps: f64) -> Result<f64, GridError> {
    if !x.is_finite() || x < NEG_LIMIT {
        return Err(GridError::OutOfRange(x));
    }
    // the double-double series keeps the absolute error below ~1e-23 e^{zeta}
    // out to x = 10, past which the asymptotic form is accurate enough
    if x.abs() <= 10.0 {
        let ai = ai_series_dd(x);
        let scale = (eps * x).exp();
        Ok(ai.hi * scale + ai.lo * scale)
    } else if x > 0.0 {
        let (u, _) = asym_coeffs();
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let mut sum = 0.0;
        let mut sign = 1.0;
        let mut last = f64::INFINITY;
        for (k, &uk) in u.iter().enumerate() {
            let term = uk / zeta.powi(k as i32);
            if term.abs() >= last {
                break;
            }
            sum += sign * term;
            sign = -sign;
            last = term.abs();
        }
        Ok((eps * x - zeta).exp() / (2.0 * std::f64::consts::PI.sqrt() * x.powf(0.25)) * sum)
    } else {
        Ok(ai_asym_neg(x) * (eps * x).exp())
    }
}

/// Function object bundling Ai and Ai'.
#[derive(Clone, Copy, Debug, Default)]
pub struct AiryEval;

impl AiryEval {
    pub fn ai(&self, x: f64) -> Result<f64, GridError> {
        airy_ai(x)
    }

    pub fn ai_prime(&self, x: f64) -> Result<f64, GridError> {
        airy_ai_prime(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// Quadrature oracle: the oscillatory integral representation rotated
    /// onto the ray t = s e^{i pi/6}, where it decays like exp(-s^3/3):
    /// Ai(x) = (1/pi) Re[ e^{i pi/6} int_0^inf e^{-s^3/3 - xs/2} e^{i sqrt(3) x s/2} ds ].
    fn oracle_ai(x: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6);
        let integrand = |s: f64| -> Complex64 {
            let damp = (-s * s * s / 3.0 - x * s / 2.0).exp();
            let osc = Complex64::from_polar(1.0, 3f64.sqrt() * x * s / 2.0);
            rot * damp * osc
        };
        let upper = upper_cut(x);
        simpson_complex(&integrand, 0.0, upper, 1e-12).re / std::f64::consts::PI
    }

    fn oracle_ai_prime(x: f64) -> f64 {
        // d/dx brings down i t; with t = s e^{i pi/6} and dt = e^{i pi/6} ds
        // the constant phase is i e^{i pi/6} e^{i pi/6} = e^{i 5pi/6}
        let rot = Complex64::from_polar(1.0, 5.0 * std::f64::consts::FRAC_PI_6);
        let integrand = |s: f64| -> Complex64 {
            let damp = (-s * s * s / 3.0 - x * s / 2.0).exp();
            let osc = Complex64::from_polar(1.0, 3f64.sqrt() * x * s / 2.0);
            rot * s * damp * osc
        };
        let upper = upper_cut(x);
        simpson_complex(&integrand, 0.0, upper, 1e-12).re / std::f64::consts::PI
    }

    fn upper_cut(x: f64) -> f64 {
        // exp(-s^3/3 - x s/2) < 1e-20 past this point
        let mut s = 6.0f64;
        while s * s * s / 3.0 + x * s / 2.0 < 46.0 {
            s += 0.5;
        }
        s
    }

    fn simpson_complex(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
        fn rule(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
            (fa + 4.0 * fm + fb) * (h / 6.0)
        }
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> Complex64,
            a: f64,
            b: f64,
            fa: Complex64,
            fm: Complex64,
            fb: Complex64,
            whole: Complex64,
            tol: f64,
            depth: u32,
        ) -> Complex64 {
            let m = 0.5 * (a + b);
            let flm = f(0.5 * (a + m));
            let frm = f(0.5 * (m + b));
            let left = rule(fa, flm, fm, m - a);
            let right = rule(fm, frm, fb, b - m);
            let delta = left + right - whole;
            if depth == 0 || delta.norm() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = rule(fa, fm, fb, b - a);
        rec(f, a, b, fa, fm, fb, whole, tol, 28)
    }

    #[test]
    fn value_at_zero() {
        assert!((airy_ai(0.0).unwrap() - 0.35502805388781724).abs() < 1e-14);
        assert!((airy_ai_prime(0.0).unwrap() + 0.25881940379280680).abs() < 1e-14);
    }

    #[test]
    fn matches_quadrature_oracle() {
        // sweep across both series and asymptotic branches
        let xs = [
            -11.5, -10.0, -8.5, -8.0, -7.5, -5.0, -2.0, -0.5, 0.3, 1.0, 3.0, 6.0, 8.0, 10.5,
        ];
        for &x in &xs {
            let mine = airy_ai(x).unwrap();
            let orc = oracle_ai(x);
            assert!(
                (mine - orc).abs() < 2e-10,
                "Ai({x}) = {mine} vs oracle {orc} (diff {})",
                (mine - orc).abs()
            );
            let mine = airy_ai_prime(x).unwrap();
            let orc = oracle_ai_prime(x);
            assert!(
                (mine - orc).abs() < 5e-10,
                "Ai'({x}) = {mine} vs oracle {orc} (diff {})",
                (mine - orc).abs()
            );
        }
    }

    #[test]
    fn first_zero() {
        // classical location of the first zero of Ai
        let a1 = -2.338107410459767;
        assert!(airy_ai(a1).unwrap().abs() < 1e-10);
    }

    #[test]
    fn ode_self_consistency() {
        // Ai''(x) = x Ai(x), with Ai'' from Richardson-extrapolated central
        // differences of Ai'
        let second = |x: f64| {
            let h = 1e-3;
            let d = |hh: f64| {
                (airy_ai_prime(x + hh).unwrap() - airy_ai_prime(x - hh).unwrap()) / (2.0 * hh)
            };
            (4.0 * d(h / 2.0) - d(h)) / 3.0
        };
        for &x in &[-9.0, -6.5, -3.0, -1.0, 0.0, 0.7, 2.5, 5.0, 7.5, 9.0] {
            let lhs = second(x);
            let rhs = x * airy_ai(x).unwrap();
            assert!(
                (lhs - rhs).abs() < 1e-10,
                "x = {x}: Ai'' = {lhs} vs x Ai = {rhs}"
            );
        }
    }

    #[test]
    fn decaying_tail_beyond_working_range() {
        // the positive side keeps evaluating (values decay to zero)
        let v = airy_ai(40.0).unwrap();
        assert!(v > 0.0 && v < 1e-60);
        // the negative side is capped
        assert!(matches!(airy_ai(-12.5), Err(GridError::OutOfRange(_))));
    }
}
