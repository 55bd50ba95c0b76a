//! Intertwining of potential-form Hamilton functions.
//!
//! `L` intertwines `H0 = p^2 + V0(q)` and `H1 = p^2 + V1(q)` when
//! `L ★ H0 = H1 ★ L`. With the ansatz `L = p - i phi(q)` this is the
//! supersymmetric pairing `V0 = phi^2 - hbar phi'`, `V1 = phi^2 + hbar phi'`,
//! governed by a Riccati equation that the Darboux substitution
//! `phi = -hbar phi0'/phi0` linearizes. The two-potential differential form
//! `V1(q + i hbar d_p/2) L = V0(q - i hbar d_p/2) L + 2 i hbar p d_q L`
//! also relates potentials that are not intertwined in the SUSY sense.
//!
//! Checks are inverse-free throughout: star inverses of exponential-phase
//! functions are never formed.

use crate::closedform::ClosedForm;
use crate::coeff::Coeff;
use crate::diffop::bopp_shifted_potential;
use crate::error::{AlgebraError, CtError, PointSolveError};
use crate::exppoly::PhaseFn;
use crate::poly::PhasePoly;
use crate::star::{star_exp_poly, star_poly, star_poly_exp};
use num_complex::Complex64;

/// Partner potentials and optional superpotential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialPair {
    pub v0: PhasePoly,
    pub v1: PhasePoly,
    pub phi: Option<PhasePoly>,
}

/// An intertwining function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intertwiner {
    pub l: PhaseFn,
}

/// Build the partner pair of a polynomial superpotential:
/// `V0 = phi^2 - hbar phi'`, `V1 = phi^2 + hbar phi'`, `L = p - i phi`.
pub fn susy_pair_from_phi(phi: &PhasePoly) -> Result<(PotentialPair, Intertwiner), CtError> {
    if phi.depends_on_p() {
        return Err(CtError::UnsupportedVariant(
            "superpotential must depend on q only".into(),
        ));
    }
    let phi2 = phi.mul(phi);
    let h_dphi = phi.deriv_q().scale(&Coeff::hbar());
    let pair = PotentialPair {
        v0: phi2.sub(&h_dphi),
        v1: phi2.add(&h_dphi),
        phi: Some(phi.clone()),
    };
    let l = PhasePoly::p().sub(&phi.scale(&Coeff::i()));
    Ok((pair, Intertwiner { l: PhaseFn::Poly(l) }))
}

/// Exact intertwining residual `L ★ H0 - H1 ★ L` for polynomial H0, H1.
pub fn intertwine_residual(
    l: &PhaseFn,
    h0: &PhasePoly,
    h1: &PhasePoly,
) -> Result<PhaseFn, AlgebraError> {
    match l {
        PhaseFn::Poly(lp) => Ok(star_poly(lp, h0).sub(&star_poly(h1, lp)).into()),
        PhaseFn::Exp(le) => {
            let lhs = star_exp_poly(le, h0);
            let rhs = star_poly_exp(h1, le);
            Ok(lhs.try_sub(&rhs)?.into())
        }
    }
}

/// Exact residual of the two-potential relation
/// `V1(q + i hbar d_p/2) L - V0(q - i hbar d_p/2) L - 2 i hbar p d_q L`.
/// Zero iff L intertwines `p^2 + V0` and `p^2 + V1`.
pub fn two_potentials_residual(
    l: &PhaseFn,
    v0: &PhasePoly,
    v1: &PhasePoly,
) -> Result<PhaseFn, AlgebraError> {
    let shift_plus = bopp_shifted_potential(v1, 1);
    let shift_minus = bopp_shifted_potential(v0, -1);
    let transport = Coeff::i_ratio(2, 1).mul(&Coeff::hbar());
    match l {
        PhaseFn::Poly(lp) => {
            let out = shift_plus
                .apply_poly(lp)
                .sub(&shift_minus.apply_poly(lp))
                .sub(&PhasePoly::p().mul(&lp.deriv_q()).scale(&transport));
            Ok(out.into())
        }
        PhaseFn::Exp(le) => {
            let out = shift_plus
                .apply_exp(le)
                .try_sub(&shift_minus.apply_exp(le))?
                .try_sub(&le.deriv_q().mul_poly(&PhasePoly::p()).scale(&transport))?;
            Ok(out.into())
        }
    }
}

/// Darboux step: given a zero mode `phi0` of `-hbar^2 d_q^2 + V0`, return the
/// superpotential `phi = -hbar phi0'/phi0` and the max sampled Riccati
/// residual `|V0 - (phi^2 - hbar phi')|`.
pub fn darboux_phi_from_zeromode(
    phi0: &ClosedForm,
    v0: &ClosedForm,
    hbar: f64,
    samples: &[f64],
) -> Result<(ClosedForm, f64), PointSolveError> {
    let phi = phi0.deriv().scale(-hbar).div(phi0.clone());
    let dphi = phi.deriv();
    let mut worst: f64 = 0.0;
    for &q in samples {
        if phi0.eval_real(q).norm() < 1e-12 {
            return Err(PointSolveError::ZeroNode(q));
        }
        let phi_v = phi.eval_real(q);
        let res = v0.eval_real(q) - (phi_v * phi_v - hbar * dphi.eval_real(q));
        worst = worst.max(res.norm());
    }
    Ok((phi, worst))
}

/// Per-sample report of the five-step construction data.
#[derive(Clone, Debug)]
pub struct FiveStepSample {
    pub q: f64,
    /// |upsilon^2 - (q - i*m*f/2)|: the Q = q^2 functional relation
    pub q_relation: f64,
    /// |(2+imf')/(2-imf') - Qtilde(upsilon)| for Qtilde(x) = 1/(2x)
    pub qtilde_relation: f64,
    /// |chi|: the chi = 0 gauge consistency giving P = p/(2q)
    pub chi_residual: f64,
}

/// Verify the generating data of the `Q = q^2, P = p/(2q)` point step used by
/// the five-step construction:
/// `f = (i/m)[2q + 1 + s]`, `g = (hbar/(2m)) ln[(1+s)/s^2]`, `s = sqrt(1+8q)`.
///
/// `lambda` is the real numeric transformation parameter; `hbar` enters chi
/// through `m = hbar*lambda`.
pub fn five_step_verify(
    lambda: f64,
    hbar: f64,
    samples: &[f64],
) -> Result<Vec<FiveStepSample>, PointSolveError> {
    if lambda == 0.0 {
        return Err(PointSolveError::DomainError("lambda must be nonzero".into()));
    }
    let m = hbar * lambda;
    let mut out = Vec::with_capacity(samples.len());
    for &q in samples {
        if 1.0 + 8.0 * q <= 0.0 {
            return Err(PointSolveError::DomainError(format!(
                "1 + 8q = {} is not positive at q = {q}",
                1.0 + 8.0 * q
            )));
        }
        if q == 0.0 {
            return Err(PointSolveError::DomainError(
                "q = 0: the transformed momentum p/(2q) is singular".into(),
            ));
        }
        let s = (1.0 + 8.0 * q).sqrt();
        let i_over_m = Complex64::new(0.0, 1.0 / m);
        let f = i_over_m * (2.0 * q + 1.0 + s);
        let fp = i_over_m * (2.0 + 4.0 / s);
        // upsilon = q + i m f/2 = -(1+s)/2, real
        let upsilon = Complex64::new(q, 0.0) + Complex64::new(0.0, 0.5 * m) * f;
        // Q(upsilon) = q - i m f / 2
        let q_minus = Complex64::new(q, 0.0) - Complex64::new(0.0, 0.5 * m) * f;
        let q_relation = (upsilon * upsilon - q_minus).norm();
        // Qtilde of the target transformation is 1/(2x)
        let qt_target = Complex64::new(1.0, 0.0) / (2.0 * upsilon);
        let imfp = Complex64::new(0.0, m) * fp;
        let qt_formula = (Complex64::new(2.0, 0.0) + imfp) / (Complex64::new(2.0, 0.0) - imfp);
        let qtilde_relation = (qt_formula - qt_target).norm();
        // g'(q) = (hbar/(2m)) (4/s) [1/(1+s) - 2/s]
        let gp = Complex64::new(
            hbar / (2.0 * m) * (4.0 / s) * (1.0 / (1.0 + s) - 2.0 / s),
            0.0,
        );
        // Qtilde'(x) = -1/(2x^2) for the target
        let qt_prime = Complex64::new(-1.0, 0.0) / (2.0 * upsilon * upsilon);
        let chi = Complex64::new(0.0, 0.5 * m) * (Complex64::new(1.0, 0.0) + qt_formula) * gp
            - Complex64::new(0.25 * m * hbar, 0.0) * qt_prime * fp;
        out.push(FiveStepSample {
            q,
            q_relation,
            qtilde_relation,
            chi_residual: chi.norm(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::ExpPoly;
    use crate::pointct::linspace;

    fn p2_plus(v: &PhasePoly) -> PhasePoly {
        PhasePoly::monomial(0, 2, Coeff::one()).add(v)
    }

    #[test]
    fn susy_pair_linear_phi() {
        // phi = q: V0 = q^2 - hbar, V1 = q^2 + hbar, L = p - i q
        let (pair, l) = susy_pair_from_phi(&PhasePoly::q()).unwrap();
        let q2 = PhasePoly::monomial(2, 0, Coeff::one());
        assert_eq!(pair.v0, q2.sub(&PhasePoly::constant(Coeff::hbar())));
        assert_eq!(pair.v1, q2.add(&PhasePoly::constant(Coeff::hbar())));
        let expect_l = PhasePoly::p().sub(&PhasePoly::monomial(1, 0, Coeff::i()));
        assert_eq!(l.l, PhaseFn::Poly(expect_l));
        // zero residual both ways
        let r = intertwine_residual(&l.l, &p2_plus(&pair.v0), &p2_plus(&pair.v1)).unwrap();
        assert!(r.is_zero());
        let r = two_potentials_residual(&l.l, &pair.v0, &pair.v1).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn susy_pair_trivial_and_quadratic() {
        let (pair, l) = susy_pair_from_phi(&PhasePoly::zero()).unwrap();
        assert!(pair.v0.is_zero() && pair.v1.is_zero());
        assert_eq!(l.l, PhaseFn::Poly(PhasePoly::p()));
        // phi = q^2: V0 = q^4 - 2 hbar q, V1 = q^4 + 2 hbar q
        let (pair, _) = susy_pair_from_phi(&PhasePoly::monomial(2, 0, Coeff::one())).unwrap();
        let q4 = PhasePoly::monomial(4, 0, Coeff::one());
        let two_h_q = PhasePoly::monomial(1, 0, Coeff::hbar().mul(&Coeff::from_int(2)));
        assert_eq!(pair.v0, q4.sub(&two_h_q));
        assert_eq!(pair.v1, q4.add(&two_h_q));
    }

    #[test]
    fn intertwine_residual_trivial() {
        let h = p2_plus(&PhasePoly::q());
        let one = PhaseFn::Poly(PhasePoly::one());
        assert!(intertwine_residual(&one, &h, &h).unwrap().is_zero());
    }

    #[test]
    fn susy_polynomial_family_is_exact() {
        for degree in 0..=4u32 {
            let mut phi = PhasePoly::zero();
            for k in 0..=degree {
                phi = phi.add(&PhasePoly::monomial(k, 0, Coeff::from_int(1 + k as i64)));
            }
            let (pair, l) = susy_pair_from_phi(&phi).unwrap();
            let r = intertwine_residual(&l.l, &p2_plus(&pair.v0), &p2_plus(&pair.v1)).unwrap();
            assert!(r.is_zero(), "degree {degree}");
            let r2 = two_potentials_residual(&l.l, &pair.v0, &pair.v1).unwrap();
            assert!(r2.is_zero(), "degree {degree}");
        }
    }

    #[test]
    fn nonintertwining_gf_solves_two_potentials() {
        // L = exp(-2i (q p + 4 p^3/3)/hbar) relates V0 = q to V1 = 0
        let minus_2i_over_h = Coeff::i_ratio(-2, 1).mul(&Coeff::hbar_pow(-1));
        let phase = PhasePoly::q()
            .mul(&PhasePoly::p())
            .add(&PhasePoly::monomial(0, 3, Coeff::from_ratio(4, 3)))
            .scale(&minus_2i_over_h);
        let l = PhaseFn::Exp(ExpPoly::from_phase(phase));
        let r = two_potentials_residual(&l, &PhasePoly::q(), &PhasePoly::zero()).unwrap();
        assert!(r.is_zero());
        // and the equivalent star form: L ★ (p^2+q) - p^2 ★ L = 0
        let r = intertwine_residual(&l, &p2_plus(&PhasePoly::q()), &p2_plus(&PhasePoly::zero())).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn two_potentials_p_only_trivial() {
        // L = p with equal constant potentials: every term vanishes. For a
        // non-constant shared potential the two argument shifts do not cancel
        // (odd derivatives survive), and both residual routes agree on that.
        let l = PhaseFn::Poly(PhasePoly::p());
        let v_const = PhasePoly::constant(Coeff::from_int(5));
        assert!(two_potentials_residual(&l, &v_const, &v_const).unwrap().is_zero());
        let v = PhasePoly::q();
        let r2 = two_potentials_residual(&l, &v, &v).unwrap();
        let r1 = intertwine_residual(&l, &p2_plus(&v), &p2_plus(&v)).unwrap();
        match (r1, r2) {
            (PhaseFn::Poly(a), PhaseFn::Poly(b)) => {
                assert_eq!(a, b.neg());
                assert!(!a.is_zero());
            }
            _ => panic!("expected polynomial residuals"),
        }
    }

    #[test]
    fn gauge_relation_form_of_the_ansatz() {
        // exp(-Phi/hbar) ★ p - (p - i phi) ★ exp(-Phi/hbar) = 0 for Phi' = phi
        let phi = PhasePoly::q()
            .add(&PhasePoly::monomial(2, 0, Coeff::from_int(3)));
        let phase = phi.antideriv_q().scale(&Coeff::hbar_pow(-1)).neg();
        let gf = ExpPoly::from_phase(phase);
        let lhs = star_exp_poly(&gf, &PhasePoly::p());
        let l = PhasePoly::p().sub(&phi.scale(&Coeff::i()));
        let rhs = star_poly_exp(&l, &gf);
        assert!(lhs.try_sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn transformed_coordinate_identity() {
        // L★q - q★L = -i hbar d_p L = -i hbar for L = p - i phi
        let phi = PhasePoly::monomial(2, 0, Coeff::from_int(2));
        let l = PhasePoly::p().sub(&phi.scale(&Coeff::i()));
        let lhs = star_poly(&l, &PhasePoly::q()).sub(&star_poly(&PhasePoly::q(), &l));
        let expect = l
            .deriv_p()
            .scale(&Coeff::i().neg().mul(&Coeff::hbar()));
        assert_eq!(lhs, expect);
        assert_eq!(
            lhs,
            PhasePoly::constant(Coeff::i().neg().mul(&Coeff::hbar()))
        );
    }

    #[test]
    fn darboux_gaussian_zero_mode() {
        // phi0 = exp(-q^2/(2 hbar)), V0 = q^2 - hbar: phi = q
        let hbar = 1.0;
        let phi0 = ClosedForm::var()
            .powi(2)
            .scale(-1.0 / (2.0 * hbar))
            .exp();
        let v0 = ClosedForm::var().powi(2).sub(ClosedForm::constant(hbar));
        let samples = linspace(-1.5, 1.5, 11);
        let (phi, resid) = darboux_phi_from_zeromode(&phi0, &v0, hbar, &samples).unwrap();
        assert!(resid <= 1e-10, "Riccati residual {resid}");
        for &q in &samples {
            assert!((phi.eval_real(q) - Complex64::new(q, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn darboux_constant_and_cosh_modes() {
        let hbar = 1.0;
        // constant zero mode, V0 = 0: phi = 0
        let phi0 = ClosedForm::constant(2.0);
        let v0 = ClosedForm::constant(0.0);
        let (phi, resid) = darboux_phi_from_zeromode(&phi0, &v0, hbar, &linspace(-1.0, 1.0, 5)).unwrap();
        assert!(resid <= 1e-12);
        assert!(phi.eval_real(0.3).norm() < 1e-12);
        // cosh-type mode: phi0 = cosh(q/sqrt(hbar)), induced V0 = hbar^2 phi0''/phi0 = hbar
        let scale = 1.0 / hbar.sqrt();
        let cosh = ClosedForm::var()
            .scale(scale)
            .exp()
            .add(ClosedForm::var().scale(-scale).exp())
            .scale(0.5);
        let v0 = ClosedForm::constant(hbar);
        let (_, resid) = darboux_phi_from_zeromode(&cosh, &v0, hbar, &linspace(-1.2, 1.2, 9)).unwrap();
        assert!(resid <= 1e-10, "cosh residual {resid}");
    }

    #[test]
    fn darboux_zero_node_detected() {
        let phi0 = ClosedForm::var(); // vanishes at q = 0
        let v0 = ClosedForm::constant(0.0);
        let out = darboux_phi_from_zeromode(&phi0, &v0, 1.0, &[0.0]);
        assert!(matches!(out, Err(PointSolveError::ZeroNode(_))));
    }

    #[test]
    fn five_step_hand_value() {
        // q = 1: upsilon = -2, upsilon^2 = 4 and q - i m f/2 = (4+1+3)/2 = 4
        let out = five_step_verify(0.5, 1.0, &[1.0]).unwrap();
        assert!(out[0].q_relation < 1e-12);
        assert!(out[0].qtilde_relation < 1e-12);
        assert!(out[0].chi_residual < 1e-12);
    }

    #[test]
    fn five_step_sweep() {
        let samples = linspace(0.5, 2.0, 32);
        let out = five_step_verify(0.7, 1.0, &samples).unwrap();
        for s in out {
            assert!(s.q_relation <= 1e-9, "q_relation {} at {}", s.q_relation, s.q);
            assert!(s.qtilde_relation <= 1e-9);
            assert!(s.chi_residual <= 1e-9, "chi {} at {}", s.chi_residual, s.q);
        }
    }

    #[test]
    fn five_step_domain_errors() {
        assert!(matches!(
            five_step_verify(0.5, 1.0, &[-0.2]),
            Err(PointSolveError::DomainError(_))
        ));
        assert!(matches!(
            five_step_verify(0.5, 1.0, &[0.0]),
            Err(PointSolveError::DomainError(_))
        ));
    }
}
