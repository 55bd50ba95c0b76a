//! Canonical transformations as first-class objects.
//!
//! A transformation is a pair (Q, P) with `{Q,P}^M = i*hbar`. It can be built
//! from a generating function F through the inverse-free relations
//! `F★q = Q★F`, `F★p = P★F`, from a symplectic matrix, or from a Lie series.
//! Everything in this module is exact; the numeric point-transformation
//! solvers live in [`crate::pointct`].

use crate::coeff::Coeff;
use crate::error::CtError;
use crate::exppoly::ExpPoly;
use crate::gauss::GaussRat;
use crate::poly::PhasePoly;
use crate::star::{moyal_bracket_poly, star_exp_poly, star_poly_exp};
use std::fmt;

/// One transformed coordinate: polynomial or exponential-phase.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CtComponent {
    Poly(PhasePoly),
    Exp(ExpPoly),
}

impl CtComponent {
    pub fn as_poly(&self) -> Option<&PhasePoly> {
        match self {
            CtComponent::Poly(f) => Some(f),
            CtComponent::Exp(_) => None,
        }
    }
}

impl fmt::Display for CtComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtComponent::Poly(x) => write!(f, "{x}"),
            CtComponent::Exp(x) => write!(f, "{x}"),
        }
    }
}

/// A canonical pair (Q, P). Pairs with polynomial components emitted by this
/// module always satisfy `{Q,P}^M = i*hbar` exactly.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CanonicalPair {
    pub q_image: CtComponent,
    pub p_image: CtComponent,
}

impl CanonicalPair {
    pub fn from_polys(q_image: PhasePoly, p_image: PhasePoly) -> Self {
        CanonicalPair {
            q_image: CtComponent::Poly(q_image),
            p_image: CtComponent::Poly(p_image),
        }
    }

    pub fn identity() -> Self {
        CanonicalPair::from_polys(PhasePoly::q(), PhasePoly::p())
    }
}

/// Exact canonicity residual `{Q,P}^M - i*hbar` for polynomial pairs.
/// Zero iff the pair is canonical.
pub fn canonicity_residual(ct: &CanonicalPair) -> Result<PhasePoly, CtError> {
    match (&ct.q_image, &ct.p_image) {
        (CtComponent::Poly(q), CtComponent::Poly(p)) => {
            let bracket = moyal_bracket_poly(q, p);
            Ok(bracket.sub(&PhasePoly::constant(Coeff::i().mul(&Coeff::hbar()))))
        }
        _ => Err(CtError::UnsupportedVariant(
            "canonicity of exponential components is checked on the grid".into(),
        )),
    }
}

/// Exact canonicity check: `{Q,P}^M = i*hbar`.
pub fn canonicity_check(ct: &CanonicalPair) -> Result<bool, CtError> {
    Ok(canonicity_residual(ct)?.is_zero())
}

/// A symplectic 2x2 matrix (ad - bc = 1) over the coefficient ring, acting as
/// `(q, p) -> (a q + b p, c q + d p)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearCt {
    a: Coeff,
    b: Coeff,
    c: Coeff,
    d: Coeff,
}

impl LinearCt {
    pub fn new(a: Coeff, b: Coeff, c: Coeff, d: Coeff) -> Result<Self, CtError> {
        let det = a.mul(&d).sub(&b.mul(&c));
        if !det.is_one() {
            return Err(CtError::NotSymplectic(det.to_string()));
        }
        Ok(LinearCt { a, b, c, d })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self, CtError> {
        LinearCt::new(
            Coeff::from_int(a),
            Coeff::from_int(b),
            Coeff::from_int(c),
            Coeff::from_int(d),
        )
    }

    pub fn identity() -> Self {
        LinearCt::from_ints(1, 0, 0, 1).unwrap()
    }

    /// The interchange `(q,p) -> (p,-q)`.
    pub fn interchange() -> Self {
        LinearCt::from_ints(0, 1, -1, 0).unwrap()
    }

    pub fn entries(&self) -> (&Coeff, &Coeff, &Coeff, &Coeff) {
        (&self.a, &self.b, &self.c, &self.d)
    }

    /// Matrix product (self * rhs).
    pub fn matmul(&self, rhs: &LinearCt) -> LinearCt {
        LinearCt {
            a: self.a.mul(&rhs.a).add(&self.b.mul(&rhs.c)),
            b: self.a.mul(&rhs.b).add(&self.b.mul(&rhs.d)),
            c: self.c.mul(&rhs.a).add(&self.d.mul(&rhs.c)),
            d: self.c.mul(&rhs.b).add(&self.d.mul(&rhs.d)),
        }
    }

    pub fn q_image(&self) -> PhasePoly {
        PhasePoly::monomial(1, 0, self.a.clone()).add(&PhasePoly::monomial(0, 1, self.b.clone()))
    }

    pub fn p_image(&self) -> PhasePoly {
        PhasePoly::monomial(1, 0, self.c.clone()).add(&PhasePoly::monomial(0, 1, self.d.clone()))
    }

    pub fn to_pair(&self) -> CanonicalPair {
        CanonicalPair::from_polys(self.q_image(), self.p_image())
    }
}

/// Action of a linear transformation on a polynomial: `u(aq+bp, cq+dp)`.
pub fn linear_act(l: &LinearCt, u: &PhasePoly) -> PhasePoly {
    u.compose(&l.q_image(), &l.p_image())
}

/// Compact generating function of a linear transformation:
/// `F = exp(2iA [b p^2 - c q^2 + (a-d) q p] / hbar)` with `A = 1/(a+d+2)`.
/// Requires `a+d+2` to be an invertible constant; `a+d+2 = 0` is singular.
pub fn linear_gf(l: &LinearCt) -> Result<ExpPoly, CtError> {
    let trace2 = l.a.add(&l.d).add(&Coeff::from_int(2));
    if trace2.is_zero() {
        return Err(CtError::SingularCayley);
    }
    let a_cayley = trace2.inv_unit()?;
    let scalar = Coeff::i_ratio(2, 1)
        .mul(&a_cayley)
        .mul(&Coeff::hbar_pow(-1));
    let quad = PhasePoly::monomial(0, 2, l.b.clone())
        .sub(&PhasePoly::monomial(2, 0, l.c.clone()))
        .add(&PhasePoly::monomial(1, 1, l.a.sub(&l.d)));
    Ok(ExpPoly::from_phase(quad.scale(&scalar)))
}

/// Three-factor decomposition parameters (alpha, beta, k) with
/// `a = (1 + 4 hbar^2 alpha beta) k`, `b = -2 i hbar alpha / k`,
/// `c = 2 i hbar beta k`, `d = 1/k`. Rejects `d = 0` (the interchange block).
pub fn linear_decompose(l: &LinearCt) -> Result<(Coeff, Coeff, Coeff), CtError> {
    if l.d.is_zero() {
        return Err(CtError::DegenerateDecomposition);
    }
    let k = l.d.inv_unit()?;
    // alpha = (i/2) b k / hbar, beta = (-i/2) c d / hbar
    let alpha = Coeff::i_ratio(1, 2)
        .mul(&l.b)
        .mul(&k)
        .mul(&Coeff::hbar_pow(-1));
    let beta = Coeff::i_ratio(-1, 2)
        .mul(&l.c)
        .mul(&l.d)
        .mul(&Coeff::hbar_pow(-1));
    // consistency: a = (1 + 4 hbar^2 alpha beta) k follows from ad - bc = 1
    let rebuilt = Coeff::one()
        .add(
            &Coeff::from_int(4)
                .mul(&Coeff::hbar_pow(2))
                .mul(&alpha)
                .mul(&beta),
        )
        .mul(&k);
    debug_assert!(rebuilt.sub(&l.a).is_zero());
    Ok((alpha, beta, k))
}

/// The three elementary flows of the decomposition as substitution matrices.
pub fn decomposition_factors(alpha: &Coeff, beta: &Coeff, k: &Coeff) -> Result<[LinearCt; 3], CtError> {
    let m2ih = Coeff::i_ratio(-2, 1).mul(&Coeff::hbar());
    let p2ih = Coeff::i_ratio(2, 1).mul(&Coeff::hbar());
    let first = LinearCt::new(Coeff::one(), m2ih.mul(alpha), Coeff::zero(), Coeff::one())?;
    let second = LinearCt::new(Coeff::one(), Coeff::zero(), p2ih.mul(beta), Coeff::one())?;
    let third = LinearCt::new(k.clone(), Coeff::zero(), Coeff::zero(), k.inv_unit()?)?;
    Ok([first, second, third])
}

/// Gauge transformation generated by `exp(lambda f(q))`: `(q, p + i hbar lambda f'(q))`.
pub fn gauge_ct(f: &PhasePoly, lambda: &Coeff) -> Result<CanonicalPair, CtError> {
    if f.depends_on_p() {
        return Err(CtError::UnsupportedVariant("gauge exponent must depend on q only".into()));
    }
    let shift = f
        .deriv_q()
        .scale(&Coeff::i().mul(&Coeff::hbar()).mul(lambda));
    let pair = CanonicalPair::from_polys(PhasePoly::q(), PhasePoly::p().add(&shift));
    debug_assert!(canonicity_check(&pair).unwrap());
    Ok(pair)
}

/// Generating function of the gauge transformation `(q, p + u(q))`:
/// `F = exp(-(i/hbar) integral u dq)`.
pub fn gauge_gf_from_ct(u: &PhasePoly) -> Result<ExpPoly, CtError> {
    if u.depends_on_p() {
        return Err(CtError::UnsupportedVariant("gauge shift must depend on q only".into()));
    }
    let phase = u
        .antideriv_q()
        .scale(&Coeff::i().neg().mul(&Coeff::hbar_pow(-1)));
    Ok(ExpPoly::from_phase(phase))
}

/// Residual pair of the inverse-free generating-function relations:
/// `(F★q - Q★F, F★p - P★F)`. Both zero iff F generates (Q, P).
pub fn verify_gf_relation(
    f: &ExpPoly,
    q_image: &PhasePoly,
    p_image: &PhasePoly,
) -> Result<(ExpPoly, ExpPoly), CtError> {
    let r_q = star_exp_poly(f, &PhasePoly::q()).try_sub(&star_poly_exp(q_image, f))?;
    let r_p = star_exp_poly(f, &PhasePoly::p()).try_sub(&star_poly_exp(p_image, f))?;
    Ok((r_q, r_p))
}

/// Lie-series conjugation `e_*^{lambda f} ★ u ★ e_*^{-lambda f}`:
/// term k is `lambda^k / k! (ad_f)^k u` with `ad_f = {f, .}^M`.
/// Terminates exactly when `ad_f` is nilpotent on u.
pub fn lie_conjugate(f: &PhasePoly, u: &PhasePoly, lambda: &Coeff, order: u32) -> Vec<PhasePoly> {
    let mut terms = Vec::with_capacity(order as usize + 1);
    let mut ad = u.clone();
    let mut scalar = Coeff::one();
    for k in 0..=order {
        if k > 0 {
            ad = moyal_bracket_poly(f, &ad);
            scalar = scalar
                .mul(lambda)
                .scale(&GaussRat::from_ratio(1, k as i64));
        }
        terms.push(ad.scale(&scalar));
    }
    terms
}

/// Sum of a Lie-conjugation series that is known to terminate (the remaining
/// `ad` power vanishes). Errors if it has not terminated by `max_order`.
pub fn lie_conjugate_exact(
    f: &PhasePoly,
    u: &PhasePoly,
    lambda: &Coeff,
    max_order: u32,
) -> Result<PhasePoly, CtError> {
    let mut total = u.clone();
    let mut ad = u.clone();
    let mut scalar = Coeff::one();
    for k in 1..=max_order {
        ad = moyal_bracket_poly(f, &ad);
        if ad.is_zero() {
            return Ok(total);
        }
        scalar = scalar
            .mul(lambda)
            .scale(&GaussRat::from_ratio(1, k as i64));
        total = total.add(&ad.scale(&scalar));
    }
    ad = moyal_bracket_poly(f, &ad);
    if ad.is_zero() {
        Ok(total)
    } else {
        Err(CtError::UnsupportedVariant(
            "Lie series did not terminate; exponent is not nilpotent on this argument".into(),
        ))
    }
}

/// A generating function, tagged by how its action is computed.
#[derive(Clone, Debug)]
pub enum GeneratingFn {
    /// `exp(lambda f(q))` with f polynomial.
    Gauge { f: PhasePoly, lambda: Coeff },
    /// `exp(lambda [f(q) p + g(q)])`; data for the numeric point solvers.
    PointOrdinary { f: PhasePoly, g: PhasePoly, lambda: Coeff },
    /// A symplectic matrix.
    Linear(LinearCt),
    /// `exp(i (q^2 + p^2)/hbar)`, acting as `u -> u(p, -q)`.
    Interchange,
    /// `exp(-(i nu / 3 hbar) q^3)`, the cubic gauge of the worked nonlinear case.
    CubicGauge { nu: Coeff },
    /// An explicit exponential-phase function; verified, never acted with.
    Explicit(ExpPoly),
}

impl GeneratingFn {
    /// The generating function as an exponential-phase object.
    pub fn to_exp(&self) -> Result<ExpPoly, CtError> {
        match self {
            GeneratingFn::Gauge { f, lambda } => {
                if f.depends_on_p() {
                    return Err(CtError::UnsupportedVariant("gauge exponent must depend on q only".into()));
                }
                Ok(ExpPoly::from_phase(f.scale(lambda)))
            }
            GeneratingFn::PointOrdinary { f, g, lambda } => {
                let phase = f.mul(&PhasePoly::p()).add(g).scale(lambda);
                Ok(ExpPoly::from_phase(phase))
            }
            GeneratingFn::Linear(l) => linear_gf(l),
            GeneratingFn::Interchange => linear_gf(&LinearCt::interchange()),
            GeneratingFn::CubicGauge { nu } => {
                let lambda = Coeff::i_ratio(-1, 3).mul(nu).mul(&Coeff::hbar_pow(-1));
                Ok(ExpPoly::from_phase(PhasePoly::monomial(3, 0, lambda)))
            }
            GeneratingFn::Explicit(e) => Ok(e.clone()),
        }
    }

    /// The canonical pair this generating function produces, when exact.
    pub fn to_pair(&self) -> Result<CanonicalPair, CtError> {
        match self {
            GeneratingFn::Gauge { f, lambda } => gauge_ct(f, lambda),
            GeneratingFn::Linear(l) => Ok(l.to_pair()),
            GeneratingFn::Interchange => Ok(LinearCt::interchange().to_pair()),
            GeneratingFn::CubicGauge { nu } => {
                let shift = PhasePoly::monomial(2, 0, nu.clone());
                Ok(CanonicalPair::from_polys(PhasePoly::q(), PhasePoly::p().add(&shift)))
            }
            GeneratingFn::PointOrdinary { .. } => Err(CtError::UnsupportedVariant(
                "point transformations are solved numerically".into(),
            )),
            GeneratingFn::Explicit(_) => Err(CtError::UnsupportedVariant("explicit".into())),
        }
    }
}

/// Exact action of a known transformation on a polynomial.
///
/// Linear and interchange act by substitution; gauge variants act by the
/// terminating Lie series (substitution alone misses the hbar corrections of
/// nonlinear conjugation). `Explicit` and `PointOrdinary` have no exact
/// polynomial action; use the two-sided relation checks instead.
pub fn gauge_transform_known_ct(gf: &GeneratingFn, u: &PhasePoly) -> Result<PhasePoly, CtError> {
    match gf {
        GeneratingFn::Linear(l) => Ok(linear_act(l, u)),
        GeneratingFn::Interchange => Ok(linear_act(&LinearCt::interchange(), u)),
        GeneratingFn::Gauge { f, lambda } => {
            let bound = u.degree_p() + 1;
            lie_conjugate_exact(f, u, lambda, bound)
        }
        GeneratingFn::CubicGauge { nu } => {
            let f = PhasePoly::monomial(3, 0, Coeff::one());
            let lambda = Coeff::i_ratio(-1, 3).mul(nu).mul(&Coeff::hbar_pow(-1));
            let bound = u.degree_p() + 1;
            lie_conjugate_exact(&f, u, &lambda, bound)
        }
        GeneratingFn::PointOrdinary { .. } => Err(CtError::UnsupportedVariant("point-ordinary".into())),
        GeneratingFn::Explicit(_) => Err(CtError::UnsupportedVariant("explicit".into())),
    }
}

/// Transformation pair read off a one-variable-exponent generating function:
/// `Q = q - i hbar (d_p F) ★ F^{-1}`, `P = p + i hbar (d_q F) ★ F^{-1}`.
/// For a q-only or p-only phase the ordinary inverse is the star inverse and
/// both star products collapse to pointwise ones, so the pair is exact.
pub fn ct_from_gf_defnalt(f: &ExpPoly) -> Result<CanonicalPair, CtError> {
    if !f.prefactor().is_constant() || f.prefactor().constant_term().as_unit().is_none() {
        return Err(CtError::UnsupportedVariant(
            "prefactor must be a constant unit".into(),
        ));
    }
    let phase = f.phase();
    let i_hbar = Coeff::i().mul(&Coeff::hbar());
    if !phase.depends_on_p() {
        let p_image = PhasePoly::p().add(&phase.deriv_q().scale(&i_hbar));
        let pair = CanonicalPair::from_polys(PhasePoly::q(), p_image);
        debug_assert!(canonicity_check(&pair).unwrap());
        Ok(pair)
    } else if !phase.depends_on_q() {
        let q_image = PhasePoly::q().sub(&phase.deriv_p().scale(&i_hbar));
        let pair = CanonicalPair::from_polys(q_image, PhasePoly::p());
        debug_assert!(canonicity_check(&pair).unwrap());
        Ok(pair)
    } else {
        Err(CtError::MixedPhase)
    }
}
