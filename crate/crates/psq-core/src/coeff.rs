//! The exact coefficient ring: Laurent polynomials in `hbar` and declared formal
//! parameters over Gaussian rationals.
//!
//! Negative powers are allowed so that generating-function phases like
//! `i*(q^2+p^2)/hbar` and scaling-matrix entries like `1/k` stay inside the ring.
//! Canonical form: sorted term map, no zero coefficients, no zero exponents.

use crate::error::AlgebraError;
use crate::gauss::GaussRat;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// Interned symbol id. `hbar` is always id 0.
pub type SymbolId = u32;

fn registry() -> &'static Mutex<Vec<String>> {
    static REG: OnceLock<Mutex<Vec<String>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(vec!["hbar".to_string()]))
}

/// Intern a symbol name, returning its id. Idempotent.
pub fn intern_symbol(name: &str) -> SymbolId {
    let mut reg = registry().lock().unwrap();
    if let Some(idx) = reg.iter().position(|s| s == name) {
        return idx as SymbolId;
    }
    reg.push(name.to_string());
    (reg.len() - 1) as SymbolId
}

/// Name of an interned symbol.
pub fn symbol_name(id: SymbolId) -> String {
    registry().lock().unwrap()[id as usize].clone()
}

pub const HBAR: SymbolId = 0;

/// Sparse exponent vector: sorted `(symbol, exponent)` pairs, exponents nonzero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Mono(Vec<(SymbolId, i32)>);

impl Mono {
    pub fn unit() -> Self {
        Mono(Vec::new())
    }

    pub fn var(sym: SymbolId, exp: i32) -> Self {
        if exp == 0 {
            Mono::unit()
        } else {
            Mono(vec![(sym, exp)])
        }
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent_of(&self, sym: SymbolId) -> i32 {
        self.0
            .iter()
            .find(|(s, _)| *s == sym)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out: Vec<(SymbolId, i32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (sa, ea) = self.0[i];
            let (sb, eb) = other.0[j];
            if sa < sb {
                out.push((sa, ea));
                i += 1;
            } else if sb < sa {
                out.push((sb, eb));
                j += 1;
            } else {
                if ea + eb != 0 {
                    out.push((sa, ea + eb));
                }
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Mono(out)
    }

    pub fn inv(&self) -> Mono {
        Mono(self.0.iter().map(|&(s, e)| (s, -e)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SymbolId, i32)> {
        self.0.iter()
    }

    /// Remove `sym` from the monomial, returning its exponent.
    fn strip(&self, sym: SymbolId) -> (i32, Mono) {
        let exp = self.exponent_of(sym);
        let rest = Mono(self.0.iter().copied().filter(|(s, _)| *s != sym).collect());
        (exp, rest)
    }
}

/// Exact scalar coefficient: an element of Q(i)[hbar^±1, params^±1].
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Coeff {
    terms: BTreeMap<Mono, GaussRat>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Coeff::from_gauss(GaussRat::one())
    }

    pub fn i() -> Self {
        Coeff::from_gauss(GaussRat::i())
    }

    pub fn from_gauss(g: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !g.is_zero() {
            terms.insert(Mono::unit(), g);
        }
        Coeff { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::from_gauss(GaussRat::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Coeff::from_gauss(GaussRat::from_ratio(num, den))
    }

    /// `num/den * i`.
    pub fn i_ratio(num: i64, den: i64) -> Self {
        Coeff::from_gauss(GaussRat::i_ratio(num, den))
    }

    pub fn hbar() -> Self {
        Coeff::sym_pow(HBAR, 1)
    }

    pub fn hbar_pow(exp: i32) -> Self {
        Coeff::sym_pow(HBAR, exp)
    }

    pub fn sym(id: SymbolId) -> Self {
        Coeff::sym_pow(id, 1)
    }

    pub fn sym_pow(id: SymbolId, exp: i32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(id, exp), GaussRat::one());
        Coeff { terms }
    }

    pub fn param(name: &str) -> Self {
        Coeff::sym(intern_symbol(name))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::unit())
                .map(|g| g.is_one())
                .unwrap_or(false)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &GaussRat)> {
        self.terms.iter()
    }

    fn insert(&mut self, m: Mono, g: GaussRat) {
        if g.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(g);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &g;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        let mut out = self.clone();
        for (m, g) in &other.terms {
            out.insert(m.clone(), g.clone());
        }
        out
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(m, g)| (m.clone(), -g)).collect(),
        }
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (ma, ga) in &self.terms {
            for (mb, gb) in &other.terms {
                out.insert(ma.mul(mb), ga * gb);
            }
        }
        out
    }

    pub fn scale(&self, g: &GaussRat) -> Coeff {
        if g.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * g)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Coeff {
        let mut acc = Coeff::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// A unit of the Laurent ring is a single term; returns its parts.
    pub fn as_unit(&self) -> Option<(&Mono, &GaussRat)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Inverse of a unit (single-term) element.
    pub fn inv_unit(&self) -> Result<Coeff, AlgebraError> {
        let (m, g) = self
            .as_unit()
            .ok_or_else(|| AlgebraError::NotInvertible(self.to_string()))?;
        let mut terms = BTreeMap::new();
        terms.insert(m.inv(), g.inv());
        Ok(Coeff { terms })
    }

    /// The purely constant part (coefficient of the unit monomial).
    pub fn constant_part(&self) -> GaussRat {
        self.terms
            .get(&Mono::unit())
            .cloned()
            .unwrap_or_else(GaussRat::zero)
    }

    /// Substitute an exact value for a symbol. Fails on negative powers of a zero value.
    pub fn substitute(&self, sym: SymbolId, value: &GaussRat) -> Result<Coeff, AlgebraError> {
        let mut out = Coeff::zero();
        for (m, g) in &self.terms {
            let (exp, rest) = m.strip(sym);
            if exp < 0 && value.is_zero() {
                return Err(AlgebraError::DivisionByZero(symbol_name(sym)));
            }
            let factor = if exp == 0 {
                GaussRat::one()
            } else if value.is_zero() {
                // positive power of zero
                GaussRat::zero()
            } else {
                value.powi(exp)
            };
            out.insert(rest, &factor * g);
        }
        Ok(out)
    }

    /// Coefficient of `sym^power` (collecting over that symbol only).
    pub fn coeff_of_power(&self, sym: SymbolId, power: i32) -> Coeff {
        let mut out = Coeff::zero();
        for (m, g) in &self.terms {
            let (exp, rest) = m.strip(sym);
            if exp == power {
                out.insert(rest, g.clone());
            }
        }
        out
    }

    /// All powers of `sym` that occur.
    pub fn powers_of(&self, sym: SymbolId) -> Vec<i32> {
        let mut ps: Vec<i32> = self.terms.keys().map(|m| m.exponent_of(sym)).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    /// Numeric evaluation. `bind` maps symbol ids to complex values; `hbar` is id 0.
    pub fn eval(&self, bind: &dyn Fn(SymbolId) -> Option<Complex64>) -> Result<Complex64, AlgebraError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, g) in &self.terms {
            let mut factor = g.to_complex();
            for &(sym, exp) in m.iter() {
                let v = bind(sym).ok_or_else(|| AlgebraError::UnboundSymbol(symbol_name(sym)))?;
                factor *= v.powi(exp);
            }
            total += factor;
        }
        Ok(total)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, g) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write_term(f, m, g, true)?;
        }
        Ok(())
    }
}

/// Shared term printer: `coeff * sym^k * ... / sym^k / ...`, grammar-compatible.
pub(crate) fn write_term(
    f: &mut fmt::Formatter<'_>,
    m: &Mono,
    g: &GaussRat,
    coeff_if_unit: bool,
) -> fmt::Result {
    let mut wrote = false;
    let minus_one = GaussRat::from_int(-1);
    if m.is_unit() || (!g.is_one() && *g != minus_one) {
        if g.is_one() && !m.is_unit() {
            // skip leading 1*
        } else {
            // products and quotients associate left, so a rational or pure
            // imaginary prefix needs no parentheses
            write!(f, "{g}")?;
            wrote = true;
        }
    } else if *g == minus_one {
        write!(f, "-")?;
    }
    for &(sym, exp) in m.iter() {
        if exp > 0 {
            if wrote {
                write!(f, "*")?;
            }
            wrote = true;
            write!(f, "{}", symbol_name(sym))?;
            if exp > 1 {
                write!(f, "^{exp}")?;
            }
        }
    }
    if !wrote && coeff_if_unit {
        write!(f, "1")?;
        wrote = true;
    }
    for &(sym, exp) in m.iter() {
        if exp < 0 {
            if !wrote {
                write!(f, "1")?;
                wrote = true;
            }
            write!(f, "/{}", symbol_name(sym))?;
            if exp < -1 {
                write!(f, "^{}", -exp)?;
            }
        }
    }
    Ok(())
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_is_id_zero() {
        assert_eq!(intern_symbol("hbar"), HBAR);
        let lam = intern_symbol("lambda");
        assert_eq!(symbol_name(lam), "lambda");
    }

    #[test]
    fn ring_ops_are_canonical() {
        let h = Coeff::hbar();
        let a = h.mul(&Coeff::i()).add(&Coeff::from_int(2));
        let b = Coeff::from_int(2).add(&Coeff::i().mul(&h));
        assert_eq!(a, b);
        assert!(a.sub(&b).is_zero());
    }

    #[test]
    fn laurent_inverse_of_unit() {
        let h2 = Coeff::hbar_pow(2).mul(&Coeff::i_ratio(3, 4));
        let inv = h2.inv_unit().unwrap();
        assert!(h2.mul(&inv).is_one());
        let sum = Coeff::hbar().add(&Coeff::one());
        assert!(sum.inv_unit().is_err());
    }

    #[test]
    fn substitute_hbar_zero() {
        let c = Coeff::hbar().mul(&Coeff::from_int(5)).add(&Coeff::from_int(3));
        let sub = c.substitute(HBAR, &GaussRat::zero()).unwrap();
        assert_eq!(sub, Coeff::from_int(3));
        let laurent = Coeff::hbar_pow(-1);
        assert!(laurent.substitute(HBAR, &GaussRat::zero()).is_err());
    }

    #[test]
    fn display_is_grammar_friendly() {
        let c = Coeff::i_ratio(1, 2).mul(&Coeff::hbar());
        assert_eq!(c.to_string(), "1/2*i*hbar");
        let inv = Coeff::hbar_pow(-1).mul(&Coeff::i());
        assert_eq!(inv.to_string(), "i/hbar");
    }
}
