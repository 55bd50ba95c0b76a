//! Sparse phase-space polynomials `sum c_mn q^m p^n` with exact coefficients.

use crate::coeff::{Coeff, SymbolId};
use crate::error::AlgebraError;
use crate::gauss::GaussRat;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// A polynomial in the phase-space variables q and p over [`Coeff`].
#[derive(Clone, PartialEq, Eq, Default)]
pub struct PhasePoly {
    terms: BTreeMap<(u32, u32), Coeff>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        PhasePoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        PhasePoly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((0, 0), c);
        }
        PhasePoly { terms }
    }

    pub fn q() -> Self {
        PhasePoly::monomial(1, 0, Coeff::one())
    }

    pub fn p() -> Self {
        PhasePoly::monomial(0, 1, Coeff::one())
    }

    pub fn monomial(m: u32, n: u32, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((m, n), c);
        }
        PhasePoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&(m, n)| m == 0 && n == 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: u32, n: u32) -> Coeff {
        self.terms.get(&(m, n)).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(0, 0)
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

    pub fn add(&self, other: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &PhasePoly) -> PhasePoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PhasePoly {
        PhasePoly {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(ma, na), ca) in &self.terms {
            for (&(mb, nb), cb) in &other.terms {
                out.insert((ma + mb, na + nb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> PhasePoly {
        if c.is_zero() {
            return PhasePoly::zero();
        }
        let mut out = PhasePoly::zero();
        for (k, t) in &self.terms {
            out.insert(*k, t.mul(c));
        }
        out
    }

    pub fn pow(&self, k: u32) -> PhasePoly {
        let mut acc = PhasePoly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact d/dq; lowers the q-degree by one.
    pub fn deriv_q(&self) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(m, n), c) in &self.terms {
            if m > 0 {
                out.insert((m - 1, n), c.mul(&Coeff::from_int(m as i64)));
            }
        }
        out
    }

    /// Exact d/dp; lowers the p-degree by one.
    pub fn deriv_p(&self) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(m, n), c) in &self.terms {
            if n > 0 {
                out.insert((m, n - 1), c.mul(&Coeff::from_int(n as i64)));
            }
        }
        out
    }

    /// Exact antiderivative in q with zero constant.
    pub fn antideriv_q(&self) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(m, n), c) in &self.terms {
            let inv = GaussRat::from_ratio(1, (m + 1) as i64);
            out.insert((m + 1, n), c.scale(&inv));
        }
        out
    }

    pub fn degree_q(&self) -> u32 {
        self.terms.keys().map(|&(m, _)| m).max().unwrap_or(0)
    }

    pub fn degree_p(&self) -> u32 {
        self.terms.keys().map(|&(_, n)| n).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(m, n)| m + n).max().unwrap_or(0)
    }

    pub fn depends_on_q(&self) -> bool {
        self.terms.keys().any(|&(m, _)| m > 0)
    }

    pub fn depends_on_p(&self) -> bool {
        self.terms.keys().any(|&(_, n)| n > 0)
    }

    /// Pointwise composition: substitute polynomials for q and p.
    pub fn compose(&self, q_sub: &PhasePoly, p_sub: &PhasePoly) -> PhasePoly {
        // cache powers to avoid re-multiplying
        let mut q_pows: Vec<PhasePoly> = vec![PhasePoly::one()];
        let mut p_pows: Vec<PhasePoly> = vec![PhasePoly::one()];
        for _ in 0..self.degree_q() {
            let last = q_pows.last().unwrap().mul(q_sub);
            q_pows.push(last);
        }
        for _ in 0..self.degree_p() {
            let last = p_pows.last().unwrap().mul(p_sub);
            p_pows.push(last);
        }
        let mut out = PhasePoly::zero();
        for (&(m, n), c) in &self.terms {
            out = out.add(&q_pows[m as usize].mul(&p_pows[n as usize]).scale(c));
        }
        out
    }

    /// Substitute an exact value for a coefficient symbol.
    pub fn substitute_symbol(&self, sym: SymbolId, value: &GaussRat) -> Result<PhasePoly, AlgebraError> {
        let mut out = PhasePoly::zero();
        for (k, c) in &self.terms {
            out.insert(*k, c.substitute(sym, value)?);
        }
        Ok(out)
    }

    /// Collect by powers of a coefficient symbol: power -> polynomial part.
    pub fn collect_powers(&self, sym: SymbolId) -> BTreeMap<i32, PhasePoly> {
        let mut out: BTreeMap<i32, PhasePoly> = BTreeMap::new();
        for (&(m, n), c) in &self.terms {
            for pow in c.powers_of(sym) {
                let part = c.coeff_of_power(sym, pow);
                if !part.is_zero() {
                    out.entry(pow)
                        .or_insert_with(PhasePoly::zero)
                        .insert((m, n), part);
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Numeric evaluation at a phase-space point with symbol bindings.
    pub fn eval(
        &self,
        q: Complex64,
        p: Complex64,
        bind: &dyn Fn(SymbolId) -> Option<Complex64>,
    ) -> Result<Complex64, AlgebraError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (&(m, n), c) in &self.terms {
            total += c.eval(bind)? * q.powu(m) * p.powu(n);
        }
        Ok(total)
    }

    /// Compile to `(m, n, value)` triples for fast repeated numeric evaluation.
    pub fn compile(
        &self,
        bind: &dyn Fn(SymbolId) -> Option<Complex64>,
    ) -> Result<Vec<(u32, u32, Complex64)>, AlgebraError> {
        self.terms
            .iter()
            .map(|(&(m, n), c)| Ok((m, n, c.eval(bind)?)))
            .collect()
    }
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first, then higher q-degree
        let mut keys: Vec<&(u32, u32)> = self.terms.keys().collect();
        keys.sort_by_key(|&&(m, n)| (std::cmp::Reverse(m + n), std::cmp::Reverse(m)));
        for (idx, key) in keys.iter().enumerate() {
            let c = &self.terms[key];
            let &&(m, n) = key;
            let vars = match (m, n) {
                (0, 0) => String::new(),
                (m, 0) if m == 1 => "q".to_string(),
                (m, 0) => format!("q^{m}"),
                (0, n) if n == 1 => "p".to_string(),
                (0, n) => format!("p^{n}"),
                (1, 1) => "q*p".to_string(),
                (m, 1) => format!("q^{m}*p"),
                (1, n) => format!("q*p^{n}"),
                (m, n) => format!("q^{m}*p^{n}"),
            };
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

impl fmt::Debug for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
