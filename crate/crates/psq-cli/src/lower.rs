//! Lowering of parsed expressions into the exact layer (polynomials and
//! exponential-phase functions) or into one-variable closed forms for the
//! numeric solvers.

use crate::expr::{Expr, Func};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use psq_core::closedform::ClosedForm;
use psq_core::coeff::{intern_symbol, Coeff};
use psq_core::exppoly::{ExpPoly, PhaseFn};
use psq_core::gauss::GaussRat;
use psq_core::poly::PhasePoly;
use psq_core::star::{moyal_bracket, star};
use std::collections::BTreeSet;
use std::fmt;

/// Errors raised while giving an expression a meaning.
#[derive(Clone, Debug, PartialEq)]
pub enum LowerError {
    UnknownSymbol(String),
    NonConstantDivisor(String),
    NotInvertible(String),
    SumOfDifferentPhases,
    ExpOfNonPolynomial,
    TranscendentalInExactContext(&'static str),
    UnsupportedStar,
    NotAPolynomial(String),
    NotOneVariable(String),
}

impl fmt::Display for LowerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerError::UnknownSymbol(s) => {
                write!(f, "unknown symbol `{s}` (declare parameters with --param)")
            }
            LowerError::NonConstantDivisor(s) => {
                write!(f, "division by a non-constant expression: {s}")
            }
            LowerError::NotInvertible(s) => write!(f, "cannot invert `{s}` exactly"),
            LowerError::SumOfDifferentPhases => {
                write!(f, "sum of exponentials with different phases is not representable")
            }
            LowerError::ExpOfNonPolynomial => {
                write!(f, "exp(...) requires a polynomial argument")
            }
            LowerError::TranscendentalInExactContext(name) => {
                write!(f, "`{name}` is only available in closed-form (numeric) contexts")
            }
            LowerError::UnsupportedStar => {
                write!(f, "star product of two exponentials is not supported exactly")
            }
            LowerError::NotAPolynomial(s) => write!(f, "expected a polynomial, found {s}"),
            LowerError::NotOneVariable(s) => {
                write!(f, "closed-form context admits only functions of q, found `{s}`")
            }
        }
    }
}

impl std::error::Error for LowerError {}

/// The declared parameter environment.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    params: BTreeSet<String>,
}

impl Scope {
    pub fn with_params(names: &[String]) -> Scope {
        Scope { params: names.iter().cloned().collect() }
    }

    fn knows(&self, name: &str) -> bool {
        self.params.contains(name)
    }
}

fn rational_to_gauss(r: &BigRational) -> GaussRat {
    GaussRat::new(r.clone(), num_traits::Zero::zero())
}

/// Lower to the exact layer.
pub fn lower_exact(expr: &Expr, scope: &Scope) -> Result<PhaseFn, LowerError> {
    match expr {
        Expr::Num(r) => Ok(PhasePoly::constant(Coeff::from_gauss(rational_to_gauss(r))).into()),
        Expr::ImaginaryUnit => Ok(PhasePoly::constant(Coeff::i()).into()),
        Expr::Sym(name) => match name.as_str() {
            "q" => Ok(PhasePoly::q().into()),
            "p" => Ok(PhasePoly::p().into()),
            "hbar" => Ok(PhasePoly::constant(Coeff::hbar()).into()),
            // printed operator monomials re-enter through the same grammar
            "qhat" | "phat" => Err(LowerError::UnknownSymbol(name.clone())),
            other if scope.knows(other) => {
                Ok(PhasePoly::constant(Coeff::sym(intern_symbol(other))).into())
            }
            other => Err(LowerError::UnknownSymbol(other.to_string())),
        },
        Expr::Neg(a) => {
            let a = lower_exact(a, scope)?;
            Ok(match a {
                PhaseFn::Poly(f) => f.neg().into(),
                PhaseFn::Exp(e) => e.neg().into(),
            })
        }
        Expr::Add(a, b) => add_phase(lower_exact(a, scope)?, lower_exact(b, scope)?, false),
        Expr::Sub(a, b) => add_phase(lower_exact(a, scope)?, lower_exact(b, scope)?, true),
        Expr::Mul(a, b) => {
            let a = lower_exact(a, scope)?;
            let b = lower_exact(b, scope)?;
            Ok(match (a, b) {
                (PhaseFn::Poly(x), PhaseFn::Poly(y)) => x.mul(&y).into(),
                (PhaseFn::Poly(x), PhaseFn::Exp(y)) => y.mul_poly(&x).into(),
                (PhaseFn::Exp(x), PhaseFn::Poly(y)) => x.mul_poly(&y).into(),
                (PhaseFn::Exp(x), PhaseFn::Exp(y)) => x.mul(&y).into(),
            })
        }
        Expr::Div(a, b) => {
            let a = lower_exact(a, scope)?;
            let b = lower_exact(b, scope)?;
            let divisor = match b {
                PhaseFn::Poly(f) if f.is_constant() => f.constant_term(),
                other => return Err(LowerError::NonConstantDivisor(other.to_string())),
            };
            let inv = divisor
                .inv_unit()
                .map_err(|_| LowerError::NotInvertible(divisor.to_string()))?;
            Ok(match a {
                PhaseFn::Poly(f) => f.scale(&inv).into(),
                PhaseFn::Exp(e) => e.scale(&inv).into(),
            })
        }
        Expr::Pow(a, k) => {
            let a = lower_exact(a, scope)?;
            Ok(match a {
                PhaseFn::Poly(f) => f.pow(*k).into(),
                PhaseFn::Exp(e) => {
                    let mut acc = ExpPoly::from_phase(PhasePoly::zero());
                    for _ in 0..*k {
                        acc = acc.mul(&e);
                    }
                    acc.into()
                }
            })
        }
        Expr::Call(Func::Exp, args) => match lower_exact(&args[0], scope)? {
            PhaseFn::Poly(phase) => Ok(ExpPoly::from_phase(phase).into()),
            PhaseFn::Exp(_) => Err(LowerError::ExpOfNonPolynomial),
        },
        Expr::Call(Func::Star, args) => {
            let a = lower_exact(&args[0], scope)?;
            let b = lower_exact(&args[1], scope)?;
            star(&a, &b).map_err(|_| LowerError::UnsupportedStar)
        }
        Expr::Call(Func::Bracket, args) => {
            let a = lower_exact(&args[0], scope)?;
            let b = lower_exact(&args[1], scope)?;
            moyal_bracket(&a, &b).map_err(|_| LowerError::UnsupportedStar)
        }
        Expr::Call(Func::Ln, _) => Err(LowerError::TranscendentalInExactContext("ln")),
        Expr::Call(Func::Sqrt, _) => Err(LowerError::TranscendentalInExactContext("sqrt")),
    }
}

fn add_phase(a: PhaseFn, b: PhaseFn, subtract: bool) -> Result<PhaseFn, LowerError> {
    match (a, b) {
        (PhaseFn::Poly(x), PhaseFn::Poly(y)) => {
            Ok(if subtract { x.sub(&y) } else { x.add(&y) }.into())
        }
        (PhaseFn::Exp(x), PhaseFn::Exp(y)) => {
            let y = if subtract { y.neg() } else { y };
            x.try_add(&y).map(Into::into).map_err(|_| LowerError::SumOfDifferentPhases)
        }
        (PhaseFn::Poly(x), PhaseFn::Exp(y)) if x.is_zero() => {
            Ok(if subtract { y.neg() } else { y }.into())
        }
        (PhaseFn::Exp(x), PhaseFn::Poly(y)) if y.is_zero() => Ok(x.into()),
        _ => Err(LowerError::SumOfDifferentPhases),
    }
}

/// Lower to a polynomial, rejecting exponentials.
pub fn lower_poly(expr: &Expr, scope: &Scope) -> Result<PhasePoly, LowerError> {
    match lower_exact(expr, scope)? {
        PhaseFn::Poly(f) => Ok(f),
        other @ PhaseFn::Exp(_) => Err(LowerError::NotAPolynomial(other.to_string())),
    }
}

/// Lower to an exponential-phase function (a plain polynomial is wrapped
/// with zero phase).
pub fn lower_exp(expr: &Expr, scope: &Scope) -> Result<ExpPoly, LowerError> {
    match lower_exact(expr, scope)? {
        PhaseFn::Exp(e) => Ok(e),
        PhaseFn::Poly(f) => Ok(ExpPoly::new(f, PhasePoly::zero())),
    }
}

/// Lower to a one-variable closed form in q for the numeric solvers.
pub fn lower_closed(expr: &Expr) -> Result<ClosedForm, LowerError> {
    match expr {
        Expr::Num(r) => Ok(ClosedForm::Const(Complex64::new(
            r.to_f64().unwrap_or(f64::NAN),
            0.0,
        ))),
        Expr::ImaginaryUnit => Ok(ClosedForm::Const(Complex64::new(0.0, 1.0))),
        Expr::Sym(name) => match name.as_str() {
            "q" => Ok(ClosedForm::var()),
            other => Err(LowerError::NotOneVariable(other.to_string())),
        },
        Expr::Neg(a) => Ok(lower_closed(a)?.neg()),
        Expr::Add(a, b) => Ok(lower_closed(a)?.add(lower_closed(b)?)),
        Expr::Sub(a, b) => Ok(lower_closed(a)?.sub(lower_closed(b)?)),
        Expr::Mul(a, b) => Ok(lower_closed(a)?.mul(lower_closed(b)?)),
        Expr::Div(a, b) => Ok(lower_closed(a)?.div(lower_closed(b)?)),
        Expr::Pow(a, k) => Ok(lower_closed(a)?.powi(*k as i32)),
        Expr::Call(Func::Exp, args) => Ok(lower_closed(&args[0])?.exp()),
        Expr::Call(Func::Ln, args) => Ok(lower_closed(&args[0])?.ln()),
        Expr::Call(Func::Sqrt, args) => Ok(lower_closed(&args[0])?.sqrt()),
        Expr::Call(f, _) => Err(LowerError::NotOneVariable(format!("{f:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn scope() -> Scope {
        Scope::with_params(&["lambda".to_string(), "nu".to_string()])
    }

    #[test]
    fn lowers_polynomials() {
        let f = lower_poly(&parse("q*p + i*hbar/2").unwrap(), &scope()).unwrap();
        let expect = PhasePoly::q()
            .mul(&PhasePoly::p())
            .add(&PhasePoly::constant(Coeff::i_ratio(1, 2).mul(&Coeff::hbar())));
        assert_eq!(f, expect);
    }

    #[test]
    fn star_and_bracket_evaluate() {
        let f = lower_poly(&parse("star(p, q)").unwrap(), &scope()).unwrap();
        let expect = PhasePoly::q()
            .mul(&PhasePoly::p())
            .sub(&PhasePoly::constant(Coeff::i_ratio(1, 2).mul(&Coeff::hbar())));
        assert_eq!(f, expect);
        let b = lower_poly(&parse("bracket(q, p)").unwrap(), &scope()).unwrap();
        assert_eq!(b, PhasePoly::constant(Coeff::i().mul(&Coeff::hbar())));
    }

    #[test]
    fn exponentials_lower_to_exp_poly() {
        let e = lower_exp(&parse("exp((i/hbar)*(q^2+p^2))").unwrap(), &scope()).unwrap();
        let i_over_h = Coeff::i().mul(&Coeff::hbar_pow(-1));
        let expect = ExpPoly::from_phase(
            PhasePoly::monomial(2, 0, i_over_h.clone()).add(&PhasePoly::monomial(0, 2, i_over_h)),
        );
        assert_eq!(e, expect);
    }

    #[test]
    fn rejects_unknowns_and_bad_division() {
        assert!(matches!(
            lower_poly(&parse("alpha*q").unwrap(), &scope()),
            Err(LowerError::UnknownSymbol(_))
        ));
        assert!(matches!(
            lower_poly(&parse("1/q").unwrap(), &scope()),
            Err(LowerError::NonConstantDivisor(_))
        ));
        assert!(matches!(
            lower_poly(&parse("ln(q)").unwrap(), &scope()),
            Err(LowerError::TranscendentalInExactContext(_))
        ));
    }

    #[test]
    fn parameters_become_coefficients() {
        let f = lower_poly(&parse("nu*q^2").unwrap(), &scope()).unwrap();
        assert_eq!(f, PhasePoly::monomial(2, 0, Coeff::param("nu")));
    }

    #[test]
    fn closed_forms_accept_transcendentals() {
        let f = lower_closed(&parse("1/q").unwrap()).unwrap();
        let v = f.eval_real(0.25);
        assert!((v - Complex64::new(4.0, 0.0)).norm() < 1e-14);
        let g = lower_closed(&parse("ln(q)").unwrap()).unwrap();
        assert!((g.eval_real(1.0)).norm() < 1e-14);
        assert!(lower_closed(&parse("p").unwrap()).is_err());
    }
}
