//! Numeric solvers for point transformations `Q = Q(q)`, `P = Qtilde(q) p + chi(q)`.
//!
//! The generating exponent is `lambda [f(q) p + g(q)]`. All solvers take the
//! real parameter `m` (the numeric value of `hbar*lambda`), so the working
//! relations are
//!
//! ```text
//!   Q(upsilon) = q - i*m*f(q)/2,      upsilon = q + i*m*f(q)/2,
//!   Qtilde(upsilon) = (2 + i*m*f'(q)) / (2 - i*m*f'(q)),
//!   chi(upsilon) = (i*m/2)(1 + Qtilde(upsilon)) g'(q)
//!                - (m*hbar/4) Qtilde'(upsilon) f'(q).
//! ```
//!
//! With this convention the worked cases come out as the closed forms
//! `f = (2/m) sqrt(1 - q^2)` for `Q = 1/q` and `g = -(hbar/(2m)) ln(q^2-1)`,
//! and the solutions for `Q = ln q`, `Q = e^q` are complex Newton targets.

use crate::closedform::ClosedForm;
use crate::error::PointSolveError;
use num_complex::Complex64;

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITERS: usize = 100;

/// One solved sample of the generating data.
#[derive(Clone, Debug)]
pub struct PointSample {
    pub q: f64,
    pub f: Complex64,
    pub residual: f64,
}

/// Safeguarded complex Newton iteration for `target(z) = 0`.
fn newton(
    target: &dyn Fn(Complex64) -> Complex64,
    dtarget: &dyn Fn(Complex64) -> Complex64,
    guess: Complex64,
    q_label: f64,
) -> Result<(Complex64, f64), PointSolveError> {
    let mut z = guess;
    // rounding dirt in a near-real seed can select the wrong branch of an
    // interior square root; snap it onto the axis
    if z.im.abs() < 1e-12 * (1.0 + z.re.abs()) {
        z.im = 0.0;
    }
    let mut r = target(z);
    for _ in 0..NEWTON_MAX_ITERS {
        if r.norm() <= NEWTON_TOL {
            return Ok((z, r.norm()));
        }
        let d = dtarget(z);
        if d.norm() < 1e-300 {
            break;
        }
        let mut step = r / d;
        // backtrack until the residual decreases
        let mut accepted = false;
        for _ in 0..40 {
            let z_new = z - step;
            let r_new = target(z_new);
            if r_new.norm() < r.norm() {
                z = z_new;
                r = r_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r.norm() <= NEWTON_TOL {
        Ok((z, r.norm()))
    } else {
        Err(PointSolveError::NoConvergence {
            q: q_label,
            residual: r.norm(),
            iters: NEWTON_MAX_ITERS,
        })
    }
}

/// Solve `Q(q + i*m*f/2) = q - i*m*f/2` for `f` at each sample point.
///
/// `guess` seeds the first sample; later samples continue from the previous
/// solution. The per-sample residual is the module's own oracle.
pub fn point_ct_inverse(
    q_fn: &ClosedForm,
    m: f64,
    samples: &[f64],
    guess: Complex64,
) -> Result<Vec<PointSample>, PointSolveError> {
    if m == 0.0 {
        return Err(PointSolveError::DomainError("m must be nonzero".into()));
    }
    let dq_fn = q_fn.deriv();
    let half_im = Complex64::new(0.0, 0.5 * m);
    let mut out = Vec::with_capacity(samples.len());
    let mut seed = guess;
    for &q in samples {
        let qc = Complex64::new(q, 0.0);
        let target = |f: Complex64| q_fn.eval(qc + half_im * f) - (qc - half_im * f);
        let dtarget = |f: Complex64| dq_fn.eval(qc + half_im * f) * half_im + half_im;
        let (f, residual) = newton(&target, &dtarget, seed, q)?;
        seed = f;
        out.push(PointSample { q, f, residual });
    }
    Ok(out)
}

/// Forward data of the point transformation generated by
/// `exp(lambda [f(q) p + g(q)])`, evaluated per point.
pub struct PointCtForward<'a> {
    f: &'a ClosedForm,
    df: ClosedForm,
    ddf: ClosedForm,
    dg: ClosedForm,
    m: f64,
    hbar: f64,
}

/// Evaluated forward transformation at one point x:
/// `Q(x)`, and `P(x, p) = p_coeff * p + p_shift`.
#[derive(Clone, Debug)]
pub struct ForwardSample {
    pub x: f64,
    /// preimage q with upsilon(q) = x
    pub preimage: Complex64,
    pub q_image: Complex64,
    pub p_coeff: Complex64,
    pub p_shift: Complex64,
}

impl<'a> PointCtForward<'a> {
    pub fn new(f: &'a ClosedForm, g: &ClosedForm, m: f64, hbar: f64) -> Self {
        PointCtForward {
            f,
            df: f.deriv(),
            ddf: f.deriv().deriv(),
            dg: g.deriv(),
            m,
            hbar,
        }
    }

    /// upsilon(q) = q + i*m*f(q)/2.
    pub fn upsilon(&self, q: Complex64) -> Complex64 {
        q + Complex64::new(0.0, 0.5 * self.m) * self.f.eval(q)
    }

    /// Solve upsilon(q) = x from the supplied seed.
    pub fn preimage(&self, x: f64, seed: Complex64) -> Result<Complex64, PointSolveError> {
        let xc = Complex64::new(x, 0.0);
        let half_im = Complex64::new(0.0, 0.5 * self.m);
        let target = |q: Complex64| q + half_im * self.f.eval(q) - xc;
        let dtarget = |q: Complex64| Complex64::new(1.0, 0.0) + half_im * self.df.eval(q);
        let (q, _) = newton(&target, &dtarget, seed, x)?;
        Ok(q)
    }

    /// Qtilde at upsilon(q), from the generating data.
    fn qtilde_at(&self, q: Complex64) -> Result<Complex64, PointSolveError> {
        let imfp = Complex64::new(0.0, self.m) * self.df.eval(q);
        let den = Complex64::new(2.0, 0.0) - imfp;
        if den.norm() < 1e-12 {
            return Err(PointSolveError::SingularDenominator(q.re));
        }
        Ok((Complex64::new(2.0, 0.0) + imfp) / den)
    }

    /// d/dx Qtilde evaluated at upsilon(q): chain rule through upsilon.
    fn qtilde_prime_at(&self, q: Complex64) -> Result<Complex64, PointSolveError> {
        let imfp = Complex64::new(0.0, self.m) * self.df.eval(q);
        let den = Complex64::new(2.0, 0.0) - imfp;
        if den.norm() < 1e-12 {
            return Err(PointSolveError::SingularDenominator(q.re));
        }
        // d/dq (2+i m f')/(2-i m f') = 4 i m f'' / (2 - i m f')^2
        let dt_dq = Complex64::new(0.0, 4.0 * self.m) * self.ddf.eval(q) / (den * den);
        let ups_prime = Complex64::new(1.0, 0.0)
            + Complex64::new(0.0, 0.5 * self.m) * self.df.eval(q);
        if ups_prime.norm() < 1e-12 {
            return Err(PointSolveError::SingularDenominator(q.re));
        }
        Ok(dt_dq / ups_prime)
    }

    /// chi evaluated at upsilon(q).
    fn chi_at(&self, q: Complex64) -> Result<Complex64, PointSolveError> {
        let qt = self.qtilde_at(q)?;
        let qtp = self.qtilde_prime_at(q)?;
        let term1 = Complex64::new(0.0, 0.5 * self.m)
            * (Complex64::new(1.0, 0.0) + qt)
            * self.dg.eval(q);
        let term2 = Complex64::new(0.25 * self.m * self.hbar, 0.0) * qtp * self.f.deriv().eval(q);
        Ok(term1 - term2)
    }

    /// Evaluate (Q, P) at the point x, seeding the upsilon-inverse from `seed`.
    pub fn eval(&self, x: f64, seed: Complex64) -> Result<ForwardSample, PointSolveError> {
        let q = self.preimage(x, seed)?;
        let q_image = q - Complex64::new(0.0, 0.5 * self.m) * self.f.eval(q);
        Ok(ForwardSample {
            x,
            preimage: q,
            q_image,
            p_coeff: self.qtilde_at(q)?,
            p_shift: self.chi_at(q)?,
        })
    }

    /// Evaluate over a sample sweep with continuation seeding.
    pub fn eval_sweep(&self, xs: &[f64]) -> Result<Vec<ForwardSample>, PointSolveError> {
        let mut out = Vec::with_capacity(xs.len());
        let mut seed = Complex64::new(xs.first().copied().unwrap_or(0.0), 0.0);
        for &x in xs {
            let s = self.eval(x, seed)?;
            seed = s.preimage;
            out.push(s);
        }
        Ok(out)
    }

    /// Sampled canonicity residual of the produced pair.
    ///
    /// The Moyal bracket of (Q, Qtilde p + chi) is `i hbar (Q'(x) Qtilde(x) - 1)`,
    /// and `Q' Qtilde = 1` holds algebraically whenever the preimage solve is
    /// exact; what remains to sample is the preimage equation residual
    /// `|upsilon(q*(x)) - x|`, reported here as the max over the sweep.
    pub fn canonicity_residual(&self, xs: &[f64]) -> Result<f64, PointSolveError> {
        let mut worst: f64 = 0.0;
        let mut seed = Complex64::new(xs.first().copied().unwrap_or(0.0), 0.0);
        for &x in xs {
            let s = self.eval(x, seed)?;
            seed = s.preimage;
            worst = worst.max((self.upsilon(s.preimage) - Complex64::new(x, 0.0)).norm());
        }
        Ok(worst)
    }

    /// Finite-difference cross-check of `Q'(x) Qtilde(x) = 1` over the sweep.
    /// Meaningful on data whose preimages stay away from branch cuts.
    pub fn canonicity_residual_fd(&self, xs: &[f64], h: f64) -> Result<f64, PointSolveError> {
        let mut worst: f64 = 0.0;
        let mut seed = Complex64::new(xs.first().copied().unwrap_or(0.0), 0.0);
        for &x in xs {
            let s = self.eval(x, seed)?;
            seed = s.preimage;
            let splus = self.eval(x + h, seed)?;
            let sminus = self.eval(x - h, seed)?;
            let dq = (splus.q_image - sminus.q_image) / Complex64::new(2.0 * h, 0.0);
            worst = worst.max((dq * s.p_coeff - Complex64::new(1.0, 0.0)).norm());
        }
        Ok(worst)
    }
}

/// Adaptive Simpson quadrature for complex integrands.
fn simpson(
    f: &dyn Fn(f64) -> Result<Complex64, PointSolveError>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64, PointSolveError> {
    fn rule(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
        (fa + Complex64::new(4.0, 0.0) * fm + fb) * Complex64::new(h / 6.0, 0.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> Result<Complex64, PointSolveError>,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Result<Complex64, PointSolveError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let left = rule(fa, flm, fm, m - a);
        let right = rule(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return Ok(left + right + delta / Complex64::new(15.0, 0.0));
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = rule(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// The chi = 0 gauge fixing: integrate
/// `g(q) = -(i*hbar/2) int [Qtilde'(upsilon)/(1 + Qtilde(upsilon))] f'(q) dq`
/// from the anchor point, with `g(anchor.0) = anchor.1`.
///
/// The integrand only determines g up to a constant (rescaling the
/// generating function), which is what the anchor pins down.
pub fn point_g_from_f(
    f: &ClosedForm,
    m: f64,
    hbar: f64,
    samples: &[f64],
    anchor: (f64, Complex64),
) -> Result<Vec<Complex64>, PointSolveError> {
    let df = f.deriv();
    let ddf = f.deriv().deriv();
    let integrand = move |q: f64| -> Result<Complex64, PointSolveError> {
        let qc = Complex64::new(q, 0.0);
        let imfp = Complex64::new(0.0, m) * df.eval(qc);
        let den = Complex64::new(2.0, 0.0) - imfp;
        if den.norm() < 1e-12 {
            return Err(PointSolveError::SingularDenominator(q));
        }
        let qt = (Complex64::new(2.0, 0.0) + imfp) / den;
        let one_plus = Complex64::new(1.0, 0.0) + qt;
        if one_plus.norm() < 1e-12 {
            return Err(PointSolveError::SingularIntegrand(q));
        }
        let dt_dq = Complex64::new(0.0, 4.0 * m) * ddf.eval(qc) / (den * den);
        let ups_prime = Complex64::new(1.0, 0.0) + Complex64::new(0.0, 0.5 * m) * df.eval(qc);
        if ups_prime.norm() < 1e-12 {
            return Err(PointSolveError::SingularDenominator(q));
        }
        let qt_prime = dt_dq / ups_prime;
        Ok(Complex64::new(0.0, -0.5 * hbar) * qt_prime / one_plus * df.eval(qc))
    };
    let mut out = Vec::with_capacity(samples.len());
    for &q in samples {
        let val = simpson(&integrand, anchor.0, q, 1e-13)?;
        out.push(anchor.1 + val);
    }
    Ok(out)
}

/// Does `Qtilde'(upsilon) = d/dq [Qtilde(upsilon(q))]` hold at every sample?
/// True for scaling-type data (f'' = 0), generally false.
pub fn point_case_iv_predicate(
    f: &ClosedForm,
    m: f64,
    samples: &[f64],
    tol: f64,
) -> Result<bool, PointSolveError> {
    let g_zero = ClosedForm::constant(0.0);
    let fwd = PointCtForward::new(f, &g_zero, m, 1.0);
    let df = f.deriv();
    let ddf = f.deriv().deriv();
    for &q in samples {
        let qc = Complex64::new(q, 0.0);
        let lhs = fwd.qtilde_prime_at(qc)?;
        let imfp = Complex64::new(0.0, m) * df.eval(qc);
        let den = Complex64::new(2.0, 0.0) - imfp;
        let rhs = Complex64::new(0.0, 4.0 * m) * ddf.eval(qc) / (den * den);
        if (lhs - rhs).norm() > tol * rhs.norm().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Time-1 flow of `dq/dt = -i*m*f(q)` from q0: the coordinate image of the
/// star-exponential point transformation. Classic fourth-order Runge-Kutta
/// with enough steps for 1e-10 accuracy on smooth flows.
pub fn flow_a(f: &ClosedForm, m: f64, q0: f64) -> Result<Complex64, PointSolveError> {
    const STEPS: usize = 4096;
    const BOUND: f64 = 1e9;
    let rate = Complex64::new(0.0, -m);
    let rhs = |q: Complex64| rate * f.eval(q);
    let h = 1.0 / STEPS as f64;
    let mut q = Complex64::new(q0, 0.0);
    for step in 0..STEPS {
        let k1 = rhs(q);
        let k2 = rhs(q + k1 * Complex64::new(0.5 * h, 0.0));
        let k3 = rhs(q + k2 * Complex64::new(0.5 * h, 0.0));
        let k4 = rhs(q + k3 * Complex64::new(h, 0.0));
        q += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
        if !q.is_finite() || q.norm() > BOUND {
            return Err(PointSolveError::FlowEscape {
                q0,
                t: (step + 1) as f64 * h,
                bound: BOUND,
            });
        }
    }
    Ok(q)
}

/// Uniform samples on [lo, hi], inclusive of both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reciprocal() -> ClosedForm {
        ClosedForm::var().powi(-1)
    }

    #[test]
    fn inverse_identity_gives_zero_f() {
        let q_fn = ClosedForm::var();
        let samples = linspace(0.5, 2.0, 8);
        let out = point_ct_inverse(&q_fn, 0.5, &samples, Complex64::new(0.3, 0.1)).unwrap();
        for s in out {
            assert!(s.f.norm() < 1e-10, "f = {} at q = {}", s.f, s.q);
        }
    }

    #[test]
    fn inverse_reciprocal_matches_closed_form() {
        // Q = 1/q on (0,1): f = (2/m) sqrt(1-q^2)
        let m = 0.5;
        let samples = linspace(0.15, 0.85, 16);
        let out = point_ct_inverse(&reciprocal(), m, &samples, Complex64::new(1.0, 0.0)).unwrap();
        for s in &out {
            let expect = 2.0 / m * (1.0 - s.q * s.q).sqrt();
            assert!(
                (s.f - Complex64::new(expect, 0.0)).norm() < 1e-10,
                "q = {}: f = {} vs {}",
                s.q,
                s.f,
                expect
            );
            assert!(s.residual <= 1e-10);
        }
    }

    #[test]
    fn inverse_log_and_exp_converge() {
        let m = 0.5;
        let samples = linspace(1.5, 3.0, 12);
        let out = point_ct_inverse(&ClosedForm::var().ln(), m, &samples, Complex64::new(1.0, 1.0)).unwrap();
        for s in &out {
            assert!(s.residual <= 1e-10);
        }
        let out = point_ct_inverse(&ClosedForm::var().exp(), m, &samples, Complex64::new(1.0, 1.0)).unwrap();
        for s in &out {
            assert!(s.residual <= 1e-10);
        }
    }

    #[test]
    fn forward_constant_f_is_complex_shift() {
        // f = c1: Q(x) = x - i m c1, Qtilde = 1, chi(x) = i m g'(x - i m c1/2)
        let m = 0.4;
        let c1 = 1.5;
        let f = ClosedForm::constant(c1);
        let g = ClosedForm::var().powi(2); // g' = 2q
        let fwd = PointCtForward::new(&f, &g, m, 1.0);
        let x = 0.8;
        let s = fwd.eval(x, Complex64::new(x, 0.0)).unwrap();
        let expect_q = Complex64::new(x, -m * c1);
        assert!((s.q_image - expect_q).norm() < 1e-10);
        assert!((s.p_coeff - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let arg = Complex64::new(x, -0.5 * m * c1);
        let expect_chi = Complex64::new(0.0, m) * 2.0 * arg;
        assert!((s.p_shift - expect_chi).norm() < 1e-10, "{} vs {}", s.p_shift, expect_chi);
    }

    #[test]
    fn forward_scaling_case() {
        // f = q, g = 0: Q = k q, P = p/k with k = (2-im)/(2+im)
        let m = 0.7;
        let f = ClosedForm::var();
        let g = ClosedForm::constant(0.0);
        let fwd = PointCtForward::new(&f, &g, m, 1.0);
        let k = Complex64::new(2.0, -m) / Complex64::new(2.0, m);
        for &x in &[0.3, 1.0, 2.5] {
            let s = fwd.eval(x, Complex64::new(x, 0.0)).unwrap();
            assert!((s.q_image - k * x).norm() < 1e-9, "x = {x}");
            assert!((s.p_coeff - 1.0 / k).norm() < 1e-9);
            assert!(s.p_shift.norm() < 1e-10);
        }
    }

    #[test]
    fn forward_quadratic_case_matches_closed_form() {
        // f = q^2, g = 0 on the branch connected to the identity: with
        // eta = sqrt(1 + 2 i m x) (so eta(upsilon(q)) = 1 + i m q),
        //   Q(x) = 2 (eta - 1)/(i m) - x,
        //   Qtilde(x) = eta/(2 - eta),
        //   chi(x) = -m hbar (eta - 1)/(eta (2 - eta)^2).
        // Derived by inverting upsilon in closed form; the +/- branch pair of
        // the square root picks the other preimage family.
        let m = 0.3;
        let f = ClosedForm::var().powi(2);
        let g = ClosedForm::constant(0.0);
        let hbar = 1.0;
        let fwd = PointCtForward::new(&f, &g, m, hbar);
        for &x in &[0.2, 0.6, 1.1] {
            let s = fwd.eval(x, Complex64::new(x, 0.0)).unwrap();
            let eta = (Complex64::new(1.0, 0.0) + Complex64::new(0.0, 2.0 * m * x)).sqrt();
            let im = Complex64::new(0.0, m);
            let expect_q = (eta - 1.0) * 2.0 / im - x;
            assert!((s.q_image - expect_q).norm() < 1e-9, "x = {x}: {} vs {}", s.q_image, expect_q);
            let expect_coeff = eta / (Complex64::new(2.0, 0.0) - eta);
            assert!((s.p_coeff - expect_coeff).norm() < 1e-9);
            let expect_chi = Complex64::new(-m * hbar, 0.0) * (eta - 1.0)
                / (eta * (Complex64::new(2.0, 0.0) - eta).powi(2));
            assert!((s.p_shift - expect_chi).norm() < 1e-9, "x = {x}: {} vs {}", s.p_shift, expect_chi);
        }
    }

    #[test]
    fn forward_inverse_round_trip_on_reciprocal() {
        // Solve f from Q = 1/q, then the forward map built from the closed-form
        // f reproduces Q at every sample point.
        let m = 0.5;
        let f = ClosedForm::constant(2.0 / m)
            .mul(ClosedForm::constant(1.0).sub(ClosedForm::var().powi(2)).sqrt());
        let g = ClosedForm::constant(0.0);
        let fwd = PointCtForward::new(&f, &g, m, 1.0);
        for &x in linspace(0.15, 0.85, 16).iter() {
            let s = fwd.eval(x, Complex64::new(x, 0.0)).unwrap();
            assert!(
                (s.q_image - Complex64::new(1.0 / x, 0.0)).norm() < 1e-9,
                "x = {x}: Q = {}",
                s.q_image
            );
        }
        let resid = fwd.canonicity_residual(&linspace(0.2, 0.8, 8)).unwrap();
        assert!(resid < 1e-9, "canonicity residual {resid}");
    }

    #[test]
    fn canonicity_fd_cross_check_on_scaling() {
        // cut-free data: f = q. Q = k q is entire, so the finite-difference
        // product check is applicable and should be ~h^2 accurate.
        let f = ClosedForm::var();
        let g = ClosedForm::constant(0.0);
        let fwd = PointCtForward::new(&f, &g, 0.5, 1.0);
        let resid = fwd.canonicity_residual_fd(&linspace(0.5, 2.0, 6), 1e-5).unwrap();
        assert!(resid < 1e-8, "fd canonicity residual {resid}");
    }

    #[test]
    fn g_from_f_scaling_is_constant() {
        // f = q: the integrand vanishes identically, so g is the anchor constant
        let f = ClosedForm::var();
        let samples = linspace(0.5, 2.0, 6);
        let g = point_g_from_f(&f, 0.5, 1.0, &samples, (1.0, Complex64::new(0.0, 0.0))).unwrap();
        for v in g {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn g_from_f_reciprocal_matches_log() {
        // f = (2/m) sqrt(1-q^2) (Q = 1/q): g = -(hbar/(2m)) ln(q^2 - 1) up to the anchor
        let m = 0.5;
        let hbar = 1.0;
        let f = ClosedForm::constant(2.0 / m)
            .mul(ClosedForm::constant(1.0).sub(ClosedForm::var().powi(2)).sqrt());
        let reference = |q: f64| {
            let z = Complex64::new(q * q - 1.0, 0.0);
            Complex64::new(-hbar / (2.0 * m), 0.0) * z.ln()
        };
        let samples = linspace(0.15, 0.85, 16);
        let anchor = (samples[0], reference(samples[0]));
        let g = point_g_from_f(&f, m, hbar, &samples, anchor).unwrap();
        for (q, v) in samples.iter().zip(&g) {
            assert!(
                (v - reference(*q)).norm() < 1e-9,
                "q = {q}: {} vs {}",
                v,
                reference(*q)
            );
        }
    }

    #[test]
    fn g_from_f_quadratic_kills_chi() {
        // f = q^2: g only exists through the quadrature; validate it by the
        // chi residual, differentiating the returned samples by Richardson
        // extrapolation
        let m = 0.4;
        let hbar = 1.0;
        let f = ClosedForm::var().powi(2);
        let qs = linspace(0.3, 1.3, 6);
        let h = 1e-2;
        let g_at = |x: f64| {
            point_g_from_f(&f, m, hbar, &[x], (0.3, Complex64::new(0.0, 0.0))).unwrap()[0]
        };
        for &q in &qs {
            let d = |hh: f64| (g_at(q + hh) - g_at(q - hh)) / Complex64::new(2.0 * hh, 0.0);
            let gp = (d(h / 2.0) * 4.0 - d(h)) / Complex64::new(3.0, 0.0);
            // chi(upsilon(q)) with this g'
            let qc = Complex64::new(q, 0.0);
            let df = f.deriv();
            let ddf = f.deriv().deriv();
            let imfp = Complex64::new(0.0, m) * df.eval(qc);
            let den = Complex64::new(2.0, 0.0) - imfp;
            let qt = (Complex64::new(2.0, 0.0) + imfp) / den;
            let dt_dq = Complex64::new(0.0, 4.0 * m) * ddf.eval(qc) / (den * den);
            let ups_prime = Complex64::new(1.0, 0.0) + Complex64::new(0.0, 0.5 * m) * df.eval(qc);
            let qt_prime = dt_dq / ups_prime;
            let chi = Complex64::new(0.0, 0.5 * m) * (Complex64::new(1.0, 0.0) + qt) * gp
                - Complex64::new(0.25 * m * hbar, 0.0) * qt_prime * df.eval(qc);
            assert!(chi.norm() <= 1e-9, "chi = {chi} at q = {q}");
        }
    }

    #[test]
    fn case_iv_predicate_examples() {
        let samples = linspace(0.4, 1.6, 9);
        assert!(point_case_iv_predicate(&ClosedForm::var(), 0.5, &samples, 1e-9).unwrap());
        assert!(point_case_iv_predicate(&ClosedForm::constant(2.0), 0.5, &samples, 1e-9).unwrap());
        assert!(!point_case_iv_predicate(&ClosedForm::var().powi(2), 0.5, &samples, 1e-9).unwrap());
    }

    #[test]
    fn flow_examples() {
        let m = 0.5;
        // constant field: A(q) = q - i m
        let a = flow_a(&ClosedForm::constant(1.0), m, 0.7).unwrap();
        assert!((a - Complex64::new(0.7, -m)).norm() < 1e-10);
        // linear field: A(q) = exp(-i m) q
        let a = flow_a(&ClosedForm::var(), m, 1.3).unwrap();
        let expect = Complex64::new(0.0, -m).exp() * 1.3;
        assert!((a - expect).norm() < 1e-10);
        // quadratic field: A(q) = q / (1 + i m q)
        let a = flow_a(&ClosedForm::var().powi(2), m, 0.9).unwrap();
        let expect = Complex64::new(0.9, 0.0) / (Complex64::new(1.0, 0.0) + Complex64::new(0.0, m * 0.9));
        assert!((a - expect).norm() < 1e-10);
    }

    #[test]
    fn flow_agrees_with_forward_on_constants() {
        // the star-exponential and ordinary-exponential point maps coincide
        // for constant f
        let m = 0.6;
        let c = 1.5;
        let f = ClosedForm::constant(c);
        let g = ClosedForm::constant(0.0);
        let fwd = PointCtForward::new(&f, &g, m, 1.0);
        let x = 0.4;
        let s = fwd.eval(x, Complex64::new(x, 0.0)).unwrap();
        let flow = flow_a(&f, m, x).unwrap();
        assert!((s.q_image - flow).norm() < 1e-10);
    }
}
