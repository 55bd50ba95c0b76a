//! The Groenewold star product and series built on it.
//!
//! `f ★ g = sum_s (i*hbar/2)^s / s! sum_t (-1)^t C(s,t) (d_q^{s-t} d_p^t f)(d_p^{s-t} d_q^t g)`
//!
//! The series terminates on the total degree of a polynomial factor, so every
//! product here is exact. Two exponential-phase factors are rejected: that
//! regime belongs to the sampled-grid layer.

use crate::coeff::Coeff;
use crate::error::AlgebraError;
use crate::exppoly::{ExpPoly, PhaseFn};
use crate::gauss::GaussRat;
use crate::poly::PhasePoly;

pub(crate) fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for j in 0..k {
        acc = acc * (n - j) as i64 / (j + 1) as i64;
    }
    acc
}

/// `(i*hbar/2)^s / s!` as an exact coefficient.
fn series_prefactor(s: u32) -> Coeff {
    let mut fact = GaussRat::one();
    for j in 1..=s as i64 {
        fact = &fact * &GaussRat::from_int(j);
    }
    let half_i = GaussRat::i_ratio(1, 2).powi(s as i32);
    Coeff::hbar_pow(s as i32).scale(&(&half_i * &fact.inv()))
}

/// Star product of two polynomials; terminates at min of the total degrees.
pub fn star_poly(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    let smax = f.total_degree().min(g.total_degree());
    let mut out = PhasePoly::zero();
    // derivative ladders: f_d[t] = d_q^{s-t} d_p^t f built incrementally per s
    for s in 0..=smax {
        let pre = series_prefactor(s);
        let mut inner = PhasePoly::zero();
        for t in 0..=s {
            let mut df = f.clone();
            for _ in 0..(s - t) {
                df = df.deriv_q();
            }
            for _ in 0..t {
                df = df.deriv_p();
            }
            if df.is_zero() {
                continue;
            }
            let mut dg = g.clone();
            for _ in 0..(s - t) {
                dg = dg.deriv_p();
            }
            for _ in 0..t {
                dg = dg.deriv_q();
            }
            if dg.is_zero() {
                continue;
            }
            let sign = if t % 2 == 0 { 1 } else { -1 };
            let c = Coeff::from_int(sign * binomial(s, t));
            inner = inner.add(&df.mul(&dg).scale(&c));
        }
        out = out.add(&inner.scale(&pre));
    }
    out
}

/// Polynomial ★ exponential; terminates on the polynomial's total degree.
pub fn star_poly_exp(f: &PhasePoly, g: &ExpPoly) -> ExpPoly {
    let smax = f.total_degree();
    let mut out = ExpPoly::new(PhasePoly::zero(), g.phase().clone());
    for s in 0..=smax {
        let pre = series_prefactor(s);
        for t in 0..=s {
            let mut df = f.clone();
            for _ in 0..(s - t) {
                df = df.deriv_q();
            }
            for _ in 0..t {
                df = df.deriv_p();
            }
            if df.is_zero() {
                continue;
            }
            let mut dg = g.clone();
            for _ in 0..(s - t) {
                dg = dg.deriv_p();
            }
            for _ in 0..t {
                dg = dg.deriv_q();
            }
            let sign = if t % 2 == 0 { 1 } else { -1 };
            let c = pre.mul(&Coeff::from_int(sign * binomial(s, t)));
            out = out
                .try_add(&dg.mul_poly(&df).scale(&c))
                .expect("derivatives preserve the phase");
        }
    }
    out
}

/// Exponential ★ polynomial; terminates on the polynomial's total degree.
pub fn star_exp_poly(f: &ExpPoly, g: &PhasePoly) -> ExpPoly {
    let smax = g.total_degree();
    let mut out = ExpPoly::new(PhasePoly::zero(), f.phase().clone());
    for s in 0..=smax {
        let pre = series_prefactor(s);
        for t in 0..=s {
            let mut dg = g.clone();
            for _ in 0..(s - t) {
                dg = dg.deriv_p();
            }
            for _ in 0..t {
                dg = dg.deriv_q();
            }
            if dg.is_zero() {
                continue;
            }
            let mut df = f.clone();
            for _ in 0..(s - t) {
                df = df.deriv_q();
            }
            for _ in 0..t {
                df = df.deriv_p();
            }
            let sign = if t % 2 == 0 { 1 } else { -1 };
            let c = pre.mul(&Coeff::from_int(sign * binomial(s, t)));
            out = out
                .try_add(&df.mul_poly(&dg).scale(&c))
                .expect("derivatives preserve the phase");
        }
    }
    out
}

/// Star product on the exact layer. Exp ★ Exp is an error.
pub fn star(f: &PhaseFn, g: &PhaseFn) -> Result<PhaseFn, AlgebraError> {
    match (f, g) {
        (PhaseFn::Poly(a), PhaseFn::Poly(b)) => Ok(star_poly(a, b).into()),
        (PhaseFn::Poly(a), PhaseFn::Exp(b)) => Ok(star_poly_exp(a, b).into()),
        (PhaseFn::Exp(a), PhaseFn::Poly(b)) => Ok(star_exp_poly(a, b).into()),
        (PhaseFn::Exp(_), PhaseFn::Exp(_)) => Err(AlgebraError::UnsupportedProduct),
    }
}

/// Moyal bracket `{f,g}^M = f★g - g★f`.
pub fn moyal_bracket(f: &PhaseFn, g: &PhaseFn) -> Result<PhaseFn, AlgebraError> {
    let fg = star(f, g)?;
    let gf = star(g, f)?;
    match (fg, gf) {
        (PhaseFn::Poly(a), PhaseFn::Poly(b)) => Ok(a.sub(&b).into()),
        (PhaseFn::Exp(a), PhaseFn::Exp(b)) => Ok(a.try_sub(&b)?.into()),
        _ => unreachable!("star preserves the operand kind split"),
    }
}

/// Moyal bracket specialized to polynomials.
pub fn moyal_bracket_poly(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    star_poly(f, g).sub(&star_poly(g, f))
}

/// Classical Poisson bracket `d_q f d_p g - d_p f d_q g` (used by the hbar->0 checks).
pub fn poisson_bracket(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    f.deriv_q().mul(&g.deriv_p()).sub(&f.deriv_p().mul(&g.deriv_q()))
}

/// k-fold star power `f★f★...★f`; `f★0 = 1`.
pub fn star_power(f: &PhasePoly, k: u32) -> PhasePoly {
    let mut acc = PhasePoly::one();
    for _ in 0..k {
        acc = star_poly(&acc, f);
    }
    acc
}

/// Truncated star exponential: term k of `e_*^{lambda f}` is `lambda^k f^{★k} / k!`.
/// Returns one polynomial per power of lambda, `0..=order`.
pub fn star_exponential(f: &PhasePoly, lambda: &Coeff, order: u32) -> Vec<PhasePoly> {
    let mut terms = Vec::with_capacity(order as usize + 1);
    let mut power = PhasePoly::one(); // f^{★k}
    let mut scalar = Coeff::one(); // lambda^k / k!
    for k in 0..=order {
        if k > 0 {
            power = star_poly(&power, f);
            scalar = scalar
                .mul(lambda)
                .scale(&GaussRat::from_ratio(1, k as i64));
        }
        terms.push(power.scale(&scalar));
    }
    terms
}

/// Neumann series for the star inverse of `f = c(1 - n)` with invertible
/// constant part `c`: returns `c^{-1} sum_{j<=order} n^{★j}` so that
/// `f ★ result = 1 - n^{★(order+1)}`.
pub fn star_inverse_series(f: &PhasePoly, order: u32) -> Result<PhasePoly, AlgebraError> {
    let c = f.constant_term();
    if c.is_zero() {
        return Err(AlgebraError::NonInvertibleConstantTerm);
    }
    let c_inv = c.inv_unit()?;
    let n = PhasePoly::one().sub(&f.scale(&c_inv));
    let mut acc = PhasePoly::zero();
    let mut n_pow = PhasePoly::one();
    for j in 0..=order {
        if j > 0 {
            n_pow = star_poly(&n_pow, &n);
        }
        acc = acc.add(&n_pow);
    }
    Ok(acc.scale(&c_inv))
}
