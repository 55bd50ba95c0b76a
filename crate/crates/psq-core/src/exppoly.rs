//! Exponential-phase functions `P(q,p) * exp(S(q,p))` with polynomial `P`, `S`.
//!
//! Closed under d/dq, d/dp and under star products against polynomials, which is
//! exactly what generating functions like `exp(i*(q^2+p^2)/hbar)` require.

use crate::coeff::{Coeff, SymbolId};
use crate::error::AlgebraError;
use crate::poly::PhasePoly;
use num_complex::Complex64;
use std::fmt;

/// `prefactor * exp(phase)`. The zero function is canonicalized to phase 0.
#[derive(Clone, PartialEq, Eq)]
pub struct ExpPoly {
    prefactor: PhasePoly,
    phase: PhasePoly,
}

impl ExpPoly {
    pub fn new(prefactor: PhasePoly, phase: PhasePoly) -> Self {
        if prefactor.is_zero() {
            ExpPoly { prefactor, phase: PhasePoly::zero() }
        } else {
            ExpPoly { prefactor, phase }
        }
    }

    /// `exp(phase)` with unit prefactor.
    pub fn from_phase(phase: PhasePoly) -> Self {
        ExpPoly::new(PhasePoly::one(), phase)
    }

    pub fn prefactor(&self) -> &PhasePoly {
        &self.prefactor
    }

    pub fn phase(&self) -> &PhasePoly {
        &self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor.is_zero()
    }

    pub fn deriv_q(&self) -> ExpPoly {
        let pre = self.prefactor.deriv_q().add(&self.prefactor.mul(&self.phase.deriv_q()));
        ExpPoly::new(pre, self.phase.clone())
    }

    pub fn deriv_p(&self) -> ExpPoly {
        let pre = self.prefactor.deriv_p().add(&self.prefactor.mul(&self.phase.deriv_p()));
        ExpPoly::new(pre, self.phase.clone())
    }

    pub fn mul_poly(&self, g: &PhasePoly) -> ExpPoly {
        ExpPoly::new(self.prefactor.mul(g), self.phase.clone())
    }

    pub fn scale(&self, c: &Coeff) -> ExpPoly {
        ExpPoly::new(self.prefactor.scale(c), self.phase.clone())
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly::new(self.prefactor.neg(), self.phase.clone())
    }

    /// Ordinary product: phases add, prefactors multiply.
    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        ExpPoly::new(
            self.prefactor.mul(&other.prefactor),
            self.phase.add(&other.phase),
        )
    }

    /// Sum, defined only when the phases agree (or one side is zero).
    pub fn try_add(&self, other: &ExpPoly) -> Result<ExpPoly, AlgebraError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.phase != other.phase {
            return Err(AlgebraError::PhaseMismatch(
                self.phase.to_string(),
                other.phase.to_string(),
            ));
        }
        Ok(ExpPoly::new(self.prefactor.add(&other.prefactor), self.phase.clone()))
    }

    pub fn try_sub(&self, other: &ExpPoly) -> Result<ExpPoly, AlgebraError> {
        self.try_add(&other.neg())
    }

    pub fn eval(
        &self,
        q: Complex64,
        p: Complex64,
        bind: &dyn Fn(SymbolId) -> Option<Complex64>,
    ) -> Result<Complex64, AlgebraError> {
        Ok(self.prefactor.eval(q, p, bind)? * self.phase.eval(q, p, bind)?.exp())
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefactor.is_zero() {
            return write!(f, "0");
        }
        if self.phase.is_zero() {
            return write!(f, "{}", self.prefactor);
        }
        if self.prefactor == PhasePoly::one() {
            write!(f, "exp({})", self.phase)
        } else {
            write!(f, "({})*exp({})", self.prefactor, self.phase)
        }
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A phase-space function in the exact layer: polynomial or exponential-phase.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PhaseFn {
    Poly(PhasePoly),
    Exp(ExpPoly),
}

impl PhaseFn {
    pub fn is_zero(&self) -> bool {
        match self {
            PhaseFn::Poly(f) => f.is_zero(),
            PhaseFn::Exp(e) => e.is_zero(),
        }
    }

    pub fn as_poly(&self) -> Option<&PhasePoly> {
        match self {
            PhaseFn::Poly(f) => Some(f),
            PhaseFn::Exp(_) => None,
        }
    }

    pub fn eval(
        &self,
        q: Complex64,
        p: Complex64,
        bind: &dyn Fn(SymbolId) -> Option<Complex64>,
    ) -> Result<Complex64, AlgebraError> {
        match self {
            PhaseFn::Poly(f) => f.eval(q, p, bind),
            PhaseFn::Exp(e) => e.eval(q, p, bind),
        }
    }
}

impl fmt::Display for PhaseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseFn::Poly(x) => write!(f, "{x}"),
            PhaseFn::Exp(x) => write!(f, "{x}"),
        }
    }
}

impl From<PhasePoly> for PhaseFn {
    fn from(f: PhasePoly) -> Self {
        PhaseFn::Poly(f)
    }
}

impl From<ExpPoly> for PhaseFn {
    fn from(e: ExpPoly) -> Self {
        PhaseFn::Exp(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;

    #[test]
    fn derivative_stays_in_type() {
        // d/dq [ exp(lambda*q^2) ] = 2*lambda*q * exp(lambda*q^2)
        let lam = Coeff::param("lambda");
        let phase = PhasePoly::monomial(2, 0, lam.clone());
        let f = ExpPoly::from_phase(phase.clone());
        let fq = f.deriv_q();
        assert_eq!(fq.phase(), &phase);
        assert_eq!(
            fq.prefactor(),
            &PhasePoly::monomial(1, 0, lam.mul(&Coeff::from_int(2)))
        );
    }

    #[test]
    fn add_requires_equal_phase() {
        let a = ExpPoly::from_phase(PhasePoly::q());
        let b = ExpPoly::from_phase(PhasePoly::p());
        assert!(a.try_add(&b).is_err());
        let z = a.try_sub(&a).unwrap();
        assert!(z.is_zero());
        assert!(z.try_add(&b).is_ok());
    }
}
