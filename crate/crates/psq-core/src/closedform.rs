//! Symbolic one-variable scalar functions: evaluable at complex points and
//! formally differentiable.
//!
//! This is the carrier for non-polynomial transformation data such as
//! `Q = 1/q`, `Q = ln q`, `Q = e^q`, superpotentials built from Gaussians, and
//! the square-root expressions of the worked point-transformation cases.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Expression tree over a single variable.
#[derive(Clone, Debug)]
pub enum ClosedForm {
    Const(Complex64),
    Var,
    Add(Arc<ClosedForm>, Arc<ClosedForm>),
    Sub(Arc<ClosedForm>, Arc<ClosedForm>),
    Mul(Arc<ClosedForm>, Arc<ClosedForm>),
    Div(Arc<ClosedForm>, Arc<ClosedForm>),
    /// Integer power (negative allowed).
    Powi(Arc<ClosedForm>, i32),
    Sqrt(Arc<ClosedForm>),
    Ln(Arc<ClosedForm>),
    Exp(Arc<ClosedForm>),
}

impl ClosedForm {
    pub fn constant(re: f64) -> Self {
        ClosedForm::Const(Complex64::new(re, 0.0))
    }

    pub fn var() -> Self {
        ClosedForm::Var
    }

    pub fn add(self, rhs: ClosedForm) -> Self {
        ClosedForm::Add(Arc::new(self), Arc::new(rhs))
    }

    pub fn sub(self, rhs: ClosedForm) -> Self {
        ClosedForm::Sub(Arc::new(self), Arc::new(rhs))
    }

    pub fn mul(self, rhs: ClosedForm) -> Self {
        ClosedForm::Mul(Arc::new(self), Arc::new(rhs))
    }

    pub fn div(self, rhs: ClosedForm) -> Self {
        ClosedForm::Div(Arc::new(self), Arc::new(rhs))
    }

    pub fn powi(self, k: i32) -> Self {
        ClosedForm::Powi(Arc::new(self), k)
    }

    pub fn sqrt(self) -> Self {
        ClosedForm::Sqrt(Arc::new(self))
    }

    pub fn ln(self) -> Self {
        ClosedForm::Ln(Arc::new(self))
    }

    pub fn exp(self) -> Self {
        ClosedForm::Exp(Arc::new(self))
    }

    pub fn neg(self) -> Self {
        ClosedForm::constant(-1.0).mul(self)
    }

    pub fn scale(self, k: f64) -> Self {
        ClosedForm::constant(k).mul(self)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            ClosedForm::Const(c) => *c,
            ClosedForm::Var => z,
            ClosedForm::Add(a, b) => a.eval(z) + b.eval(z),
            ClosedForm::Sub(a, b) => a.eval(z) - b.eval(z),
            ClosedForm::Mul(a, b) => a.eval(z) * b.eval(z),
            ClosedForm::Div(a, b) => a.eval(z) / b.eval(z),
            ClosedForm::Powi(a, k) => a.eval(z).powi(*k),
            ClosedForm::Sqrt(a) => a.eval(z).sqrt(),
            ClosedForm::Ln(a) => a.eval(z).ln(),
            ClosedForm::Exp(a) => a.eval(z).exp(),
        }
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Formal derivative; another closed form.
    pub fn deriv(&self) -> ClosedForm {
        match self {
            ClosedForm::Const(_) => ClosedForm::constant(0.0),
            ClosedForm::Var => ClosedForm::constant(1.0),
            ClosedForm::Add(a, b) => a.deriv().add(b.deriv()),
            ClosedForm::Sub(a, b) => a.deriv().sub(b.deriv()),
            ClosedForm::Mul(a, b) => a
                .deriv()
                .mul((**b).clone())
                .add((**a).clone().mul(b.deriv())),
            ClosedForm::Div(a, b) => a
                .deriv()
                .mul((**b).clone())
                .sub((**a).clone().mul(b.deriv()))
                .div((**b).clone().powi(2)),
            ClosedForm::Powi(a, k) => ClosedForm::constant(*k as f64)
                .mul((**a).clone().powi(k - 1))
                .mul(a.deriv()),
            ClosedForm::Sqrt(a) => a
                .deriv()
                .div(ClosedForm::constant(2.0).mul((**a).clone().sqrt())),
            ClosedForm::Ln(a) => a.deriv().div((**a).clone()),
            ClosedForm::Exp(a) => a.deriv().mul(self.clone()),
        }
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)
                } else {
                    write!(f, "({}+{}i)", c.re, c.im)
                }
            }
            ClosedForm::Var => write!(f, "q"),
            ClosedForm::Add(a, b) => write!(f, "({a} + {b})"),
            ClosedForm::Sub(a, b) => write!(f, "({a} - {b})"),
            ClosedForm::Mul(a, b) => write!(f, "({a}*{b})"),
            ClosedForm::Div(a, b) => write!(f, "({a}/{b})"),
            ClosedForm::Powi(a, k) => write!(f, "{a}^{k}"),
            ClosedForm::Sqrt(a) => write!(f, "sqrt({a})"),
            ClosedForm::Ln(a) => write!(f, "ln({a})"),
            ClosedForm::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
