//! Normal-ordered operator polynomials with `[qhat, phat] = i*hbar`, and the
//! Weyl quantization / dequantization maps.
//!
//! Internally every operator is kept in normal order (all qhat factors to the
//! left). Weyl-symmetric ordering appears only at the quantize/dequantize
//! boundary, where the monomial `q^m p^n` maps to the McCoy symmetrization
//! `2^{-m} sum_j C(m,j) qhat^j phat^n qhat^{m-j}`.

use crate::coeff::Coeff;
use crate::gauss::GaussRat;
use crate::poly::PhasePoly;
use crate::star::{binomial, star_poly};
use std::collections::BTreeMap;
use std::fmt;

/// `sum c_mn qhat^m phat^n` in normal order.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct OpPoly {
    terms: BTreeMap<(u32, u32), Coeff>,
}

impl OpPoly {
    pub fn zero() -> Self {
        OpPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        OpPoly::monomial(0, 0, Coeff::one())
    }

    pub fn qhat() -> Self {
        OpPoly::monomial(1, 0, Coeff::one())
    }

    pub fn phat() -> Self {
        OpPoly::monomial(0, 1, Coeff::one())
    }

    pub fn monomial(m: u32, n: u32, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((m, n), c);
        }
        OpPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: u32, n: u32) -> Coeff {
        self.terms.get(&(m, n)).cloned().unwrap_or_else(Coeff::zero)
    }

    fn insert(&mut self, key: (u32, u32), c: Coeff) {
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

    pub fn add(&self, other: &OpPoly) -> OpPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &OpPoly) -> OpPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OpPoly {
        OpPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> OpPoly {
        if c.is_zero() {
            return OpPoly::zero();
        }
        let mut out = OpPoly::zero();
        for (k, t) in &self.terms {
            out.insert(*k, t.mul(c));
        }
        out
    }
}

/// Normal-ordered product of two basis elements:
/// `qhat^a phat^b * qhat^c phat^d`, using
/// `phat^b qhat^c = sum_k (-i hbar)^k k! C(b,k) C(c,k) qhat^{c-k} phat^{b-k}`.
fn basis_mul(a: u32, b: u32, c: u32, d: u32) -> OpPoly {
    let mut out = OpPoly::zero();
    let mut factorial = GaussRat::one();
    for k in 0..=b.min(c) {
        if k > 0 {
            factorial = &factorial * &GaussRat::from_int(k as i64);
        }
        let scalar = &GaussRat::i_ratio(-1, 1).powi(k as i32)
            * &(&factorial * &GaussRat::from_int(binomial(b, k) * binomial(c, k)));
        let coeff = Coeff::hbar_pow(k as i32).scale(&scalar);
        out.insert((a + c - k, b + d - k), coeff);
    }
    out
}

/// Exact normal-ordered operator product.
pub fn op_mul(lhs: &OpPoly, rhs: &OpPoly) -> OpPoly {
    let mut out = OpPoly::zero();
    for (&(a, b), ca) in &lhs.terms {
        for (&(c, d), cb) in &rhs.terms {
            let prod = basis_mul(a, b, c, d).scale(&ca.mul(cb));
            out = out.add(&prod);
        }
    }
    out
}

/// `[A, B] = AB - BA`.
pub fn op_commutator(a: &OpPoly, b: &OpPoly) -> OpPoly {
    op_mul(a, b).sub(&op_mul(b, a))
}

/// Weyl quantization by McCoy symmetrization, extended linearly.
pub fn quantize(f: &PhasePoly) -> OpPoly {
    let mut out = OpPoly::zero();
    for (&(m, n), c) in f.terms() {
        let mut sym = OpPoly::zero();
        for j in 0..=m {
            let left = OpPoly::monomial(j, n, Coeff::one());
            let right = OpPoly::monomial(m - j, 0, Coeff::one());
            sym = sym.add(&op_mul(&left, &right).scale(&Coeff::from_int(binomial(m, j))));
        }
        let half_pow = GaussRat::from_ratio(1, 2).powi(m as i32);
        out = out.add(&sym.scale(&c.scale(&half_pow)));
    }
    out
}

/// Weyl symbol of a normal-ordered operator: the basis element
/// `qhat^m phat^n` maps to `q^m ★ p^n`, extended linearly.
pub fn dequantize(a: &OpPoly) -> PhasePoly {
    let mut out = PhasePoly::zero();
    for (&(m, n), c) in &a.terms {
        let sym = star_poly(
            &PhasePoly::monomial(m, 0, Coeff::one()),
            &PhasePoly::monomial(0, n, Coeff::one()),
        );
        out = out.add(&sym.scale(c));
    }
    out
}

/// Truncated conjugation series `e^{lambda f} u e^{-lambda f}`:
/// term k is `lambda^k / k! ad_f^k(u)`, exact at every order.
pub fn op_conjugate_series(f: &OpPoly, u: &OpPoly, lambda: &Coeff, order: u32) -> Vec<OpPoly> {
    let mut terms = Vec::with_capacity(order as usize + 1);
    let mut ad = u.clone();
    let mut scalar = Coeff::one();
    for k in 0..=order {
        if k > 0 {
            ad = op_commutator(f, &ad);
            scalar = scalar
                .mul(lambda)
                .scale(&GaussRat::from_ratio(1, k as i64));
        }
        terms.push(ad.scale(&scalar));
    }
    terms
}

impl fmt::Display for OpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&(u32, u32)> = self.terms.keys().collect();
        keys.sort_by_key(|&&(m, n)| (std::cmp::Reverse(m + n), std::cmp::Reverse(m)));
        for (idx, key) in keys.iter().enumerate() {
            let c = &self.terms[key];
            let &&(m, n) = key;
            let mut vars = String::new();
            if m > 0 {
                vars.push_str("qhat");
                if m > 1 {
                    vars.push_str(&format!("^{m}"));
                }
            }
            if n > 0 {
                if !vars.is_empty() {
                    vars.push('*');
                }
                vars.push_str("phat");
                if n > 1 {
                    vars.push_str(&format!("^{n}"));
                }
            }
            let rendered = if vars.is_empty() {
                c.to_string()
            } else if c.is_one() {
                vars
            } else if c.as_unit().is_some() {
                format!("{c}*{vars}")
            } else {
                format!("({c})*{vars}")
            };
            if idx > 0 {
                if let Some(rest) = rendered.strip_prefix('-') {
                    write!(f, " - {rest}")?;
                    continue;
                }
                write!(f, " + ")?;
            }
            write!(f, "{rendered}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for OpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
