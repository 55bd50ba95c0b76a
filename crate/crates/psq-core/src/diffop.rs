//! Polynomial-coefficient differential operators on phase space.
//!
//! `DiffOp` represents `sum_jk  c_jk(q,p) d_q^j d_p^k`. Left and right star
//! multiplication by a polynomial are finite operators of this kind, which
//! gives the Lie operator `f★ - ★f` and the argument-shifted potentials
//! `V(q ± i*hbar*d_p/2)` in closed form.

use crate::coeff::Coeff;
use crate::exppoly::{ExpPoly, PhaseFn};
use crate::gauss::GaussRat;
use crate::poly::PhasePoly;
use crate::star::binomial;
use std::collections::BTreeMap;

/// `sum_{(j,k)} coeff_{jk}(q,p) * d_q^j d_p^k`, exact.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffOp {
    terms: BTreeMap<(u32, u32), PhasePoly>,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp { terms: BTreeMap::new() }
    }

    pub fn term(j: u32, k: u32, coeff: PhasePoly) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((j, k), coeff);
        }
        DiffOp { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &PhasePoly)> {
        self.terms.iter()
    }

    fn insert(&mut self, key: (u32, u32), c: PhasePoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.neg());
        }
        out
    }

    pub fn apply_poly(&self, f: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(j, k), coeff) in &self.terms {
            let mut df = f.clone();
            for _ in 0..j {
                df = df.deriv_q();
            }
            for _ in 0..k {
                df = df.deriv_p();
            }
            out = out.add(&coeff.mul(&df));
        }
        out
    }

    pub fn apply_exp(&self, f: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::new(PhasePoly::zero(), f.phase().clone());
        for (&(j, k), coeff) in &self.terms {
            let mut df = f.clone();
            for _ in 0..j {
                df = df.deriv_q();
            }
            for _ in 0..k {
                df = df.deriv_p();
            }
            out = out
                .try_add(&df.mul_poly(coeff))
                .expect("derivatives preserve the phase");
        }
        out
    }

    pub fn apply(&self, f: &PhaseFn) -> PhaseFn {
        match f {
            PhaseFn::Poly(p) => self.apply_poly(p).into(),
            PhaseFn::Exp(e) => self.apply_exp(e).into(),
        }
    }
}

/// `(i*hbar/2)^s / s!` with an extra sign, shared with the star series.
fn series_coeff(s: u32, t: u32) -> Coeff {
    let mut fact = GaussRat::one();
    for j in 1..=s as i64 {
        fact = &fact * &GaussRat::from_int(j);
    }
    let half_i = GaussRat::i_ratio(1, 2).powi(s as i32);
    let sign = if t % 2 == 0 { 1 } else { -1 };
    Coeff::hbar_pow(s as i32)
        .scale(&(&half_i * &fact.inv()))
        .mul(&Coeff::from_int(sign * binomial(s, t)))
}

/// The operator `f★` (left star multiplication by a polynomial f):
/// `sum_{s,t} [(i hbar/2)^s/s! (-1)^t C(s,t) d_q^{s-t} d_p^t f] d_q^t d_p^{s-t}`.
pub fn left_star_op(f: &PhasePoly) -> DiffOp {
    let mut out = DiffOp::zero();
    for s in 0..=f.total_degree() {
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
            out.insert((t, s - t), df.scale(&series_coeff(s, t)));
        }
    }
    out
}

/// The operator `★f` (right star multiplication by a polynomial f):
/// `sum_{s,t} [(i hbar/2)^s/s! (-1)^t C(s,t) d_p^{s-t} d_q^t f] d_q^{s-t} d_p^t`.
pub fn right_star_op(f: &PhasePoly) -> DiffOp {
    let mut out = DiffOp::zero();
    for s in 0..=f.total_degree() {
        for t in 0..=s {
            let mut df = f.clone();
            for _ in 0..(s - t) {
                df = df.deriv_p();
            }
            for _ in 0..t {
                df = df.deriv_q();
            }
            if df.is_zero() {
                continue;
            }
            out.insert((s - t, t), df.scale(&series_coeff(s, t)));
        }
    }
    out
}

/// Lie operator of a polynomial symbol: `L_f = f★ - ★f`, so that
/// `L_f u = {f, u}^M` for every u.
pub fn lie_operator_of(f: &PhasePoly) -> DiffOp {
    left_star_op(f).sub(&right_star_op(f))
}

/// Argument-shifted potential `V(q + sign * i*hbar*d_p/2)` for V a polynomial
/// in q alone: `sum_k V^(k)(q)/k! (sign * i*hbar/2)^k d_p^k`.
pub fn bopp_shifted_potential(v: &PhasePoly, sign: i32) -> DiffOp {
    debug_assert!(!v.depends_on_p(), "potential must depend on q only");
    let mut out = DiffOp::zero();
    let mut dv = v.clone();
    let mut fact = GaussRat::one();
    for k in 0..=v.degree_q() {
        if k > 0 {
            dv = dv.deriv_q();
            fact = &fact * &GaussRat::from_int(k as i64);
        }
        let shift = GaussRat::i_ratio(sign as i64, 2).powi(k as i32);
        let c = Coeff::hbar_pow(k as i32).scale(&(&shift * &fact.inv()));
        out.insert((0, k), dv.scale(&c));
    }
    out
}
