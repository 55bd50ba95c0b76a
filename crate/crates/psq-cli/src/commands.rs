//! Subcommand implementations over the library layer.

use crate::expr::parse;
use crate::lower::{lower_closed, lower_exact, lower_exp, lower_poly, Scope};
use crate::output::{Format, Report};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use psq_core::closedform::ClosedForm;
use psq_core::coeff::Coeff;
use psq_core::ct::{
    canonicity_residual, gauge_transform_known_ct, linear_act, linear_decompose, linear_gf,
    verify_gf_relation, CanonicalPair, GeneratingFn, LinearCt,
};
use psq_core::exppoly::PhaseFn;
use psq_core::grid::{
    airy_to_delta_fourier_check, general_star_grid, genvalue_residual, no_params, read_csv,
    write_csv, GridFn,
};
use psq_core::intertwine::{intertwine_residual, susy_pair_from_phi, two_potentials_residual};
use psq_core::pointct::{linspace, point_ct_inverse, PointCtForward};
use psq_core::poly::PhasePoly;
use psq_core::star::{moyal_bracket, star};
use psq_core::weyl::{dequantize, quantize, OpPoly};
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "psq", version, about = "Star products, Weyl maps and canonical transformations on phase space")]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Declare a formal parameter symbol (repeatable)
    #[arg(long = "param", global = true, value_name = "NAME")]
    pub params: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct SampleRange {
    /// Left end of the sample interval
    #[arg(long)]
    pub qmin: f64,
    /// Right end of the sample interval
    #[arg(long)]
    pub qmax: f64,
    /// Number of samples
    #[arg(long, default_value_t = 16)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Star product of two expressions
    Star {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
    },
    /// Moyal bracket of two expressions
    Bracket {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
    },
    /// Weyl quantization of a polynomial (normal-ordered output)
    Quantize {
        #[arg(allow_hyphen_values = true)]
        f: String,
    },
    /// Weyl symbol of a normal-ordered operator polynomial in qhat, phat
    Dequantize {
        #[arg(allow_hyphen_values = true)]
        a: String,
    },
    /// Apply a named transformation to a polynomial
    Transform {
        /// Polynomial to transform
        #[arg(allow_hyphen_values = true)]
        u: String,
        /// Interchange (q,p) -> (p,-q)
        #[arg(long, conflicts_with_all = ["linear", "cubic_gauge", "gauge"])]
        interchange: bool,
        /// Symplectic matrix a,b,c,d
        #[arg(long, value_name = "A,B,C,D", allow_hyphen_values = true)]
        linear: Option<String>,
        /// Cubic gauge parameter nu (an expression)
        #[arg(long = "cubic-gauge", value_name = "NU", allow_hyphen_values = true)]
        cubic_gauge: Option<String>,
        /// Gauge exponent f(q) (used with --lambda)
        #[arg(long, value_name = "F", allow_hyphen_values = true)]
        gauge: Option<String>,
        /// Gauge strength lambda
        #[arg(long, value_name = "LAMBDA", allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Check the two-sided relations F*q = Q*F, F*p = P*F
    VerifyGf {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long = "Q", allow_hyphen_values = true)]
        q_image: String,
        #[arg(long = "P", allow_hyphen_values = true)]
        p_image: String,
    },
    /// Exact canonicity residual {Q,P} - i*hbar
    Canonicity {
        #[arg(long = "Q", allow_hyphen_values = true)]
        q_image: String,
        #[arg(long = "P", allow_hyphen_values = true)]
        p_image: String,
    },
    /// Solve the generating data f(q) of a point transformation Q(q)
    PointSolve {
        /// Target coordinate map Q(q), a closed form in q
        #[arg(long = "Q", allow_hyphen_values = true)]
        q_fn: String,
        /// Real solver parameter (the numeric value of hbar*lambda)
        #[arg(long)]
        m: f64,
        #[command(flatten)]
        range: SampleRange,
        /// Initial guess for the first sample (real part)
        #[arg(long, default_value_t = 1.0)]
        guess: f64,
        /// Initial guess, imaginary part
        #[arg(long, default_value_t = 0.0)]
        guess_im: f64,
    },
    /// Evaluate the forward point transformation of generating data f, g
    PointForward {
        /// f(q), a closed form
        #[arg(long = "f", allow_hyphen_values = true)]
        f_fn: String,
        /// g(q), a closed form
        #[arg(long = "g", default_value = "0", allow_hyphen_values = true)]
        g_fn: String,
        /// Real solver parameter (the numeric value of hbar*lambda)
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[command(flatten)]
        range: SampleRange,
    },
    /// Linear transformation tools: action, generating function, decomposition
    Linear {
        /// Symplectic matrix a,b,c,d (entries are expressions)
        #[arg(long, value_name = "A,B,C,D", allow_hyphen_values = true)]
        matrix: String,
        /// Polynomial to transform
        #[arg(long, allow_hyphen_values = true)]
        act: Option<String>,
        /// Emit the compact generating function
        #[arg(long)]
        gf: bool,
        /// Emit the three-factor decomposition parameters
        #[arg(long)]
        decompose: bool,
    },
    /// Supersymmetric pair from a superpotential, or check an intertwiner
    Intertwine {
        /// Superpotential phi(q): emits V0, V1, L and the exact residual
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        /// Intertwiner L (checked against --H0 and --H1)
        #[arg(long = "L", allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long = "H0", allow_hyphen_values = true)]
        h0: Option<String>,
        #[arg(long = "H1", allow_hyphen_values = true)]
        h1: Option<String>,
    },
    /// Residual of the two-potential differential relation
    Twopotentials {
        #[arg(long = "L", allow_hyphen_values = true)]
        l: String,
        #[arg(long = "V0", allow_hyphen_values = true)]
        v0: String,
        #[arg(long = "V1", allow_hyphen_values = true)]
        v1: String,
    },
    /// Star-genvalue residual |H*W - E W|/|W| on a grid
    Genvalue {
        /// Hamilton function (polynomial)
        #[arg(long = "H", allow_hyphen_values = true)]
        h: String,
        /// Wigner sample: `airy`, `gauss`, or a CSV path
        #[arg(long)]
        wigner: String,
        #[arg(long = "E", default_value_t = 0.0)]
        energy: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Grid points per axis (ignored when loading a CSV)
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Half-width of the symmetric grid
        #[arg(long, default_value_t = 6.0)]
        range: f64,
        /// Excluded boundary margin fraction
        #[arg(long, default_value_t = 0.15)]
        margin: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Optionally dump the sampled Wigner grid
        #[arg(long)]
        out: Option<String>,
    },
    /// Fourier-side cubic-phase cancellation check (flat spectrum = delta)
    AiryDelta {
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long = "E", default_value_t = 0.0)]
        energy: f64,
        #[arg(long, default_value_t = 256)]
        modes: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Disable the cubic multiplier (negative control)
        #[arg(long)]
        control: bool,
    },
    /// General sampled star product of two grids
    GridStar {
        #[arg(long = "f")]
        f_path: String,
        #[arg(long = "g")]
        g_path: String,
        #[arg(long)]
        out: String,
    },
}

pub fn max_grid_points() -> usize {
    std::env::var("PSQ_MAX_GRID")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1 << 20)
}

fn parse_poly(text: &str, scope: &Scope) -> Result<PhasePoly, String> {
    lower_poly(&parse(text).map_err(|e| e.to_string())?, scope).map_err(|e| e.to_string())
}

fn parse_phase_fn(text: &str, scope: &Scope) -> Result<PhaseFn, String> {
    lower_exact(&parse(text).map_err(|e| e.to_string())?, scope).map_err(|e| e.to_string())
}

fn parse_closed(text: &str) -> Result<ClosedForm, String> {
    lower_closed(&parse(text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn parse_matrix(text: &str, scope: &Scope) -> Result<LinearCt, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err("matrix needs exactly four comma-separated entries".into());
    }
    let entry = |s: &str| -> Result<Coeff, String> {
        let f = parse_poly(s.trim(), scope)?;
        if !f.is_constant() {
            return Err(format!("matrix entry `{s}` is not constant"));
        }
        Ok(f.constant_term())
    };
    LinearCt::new(entry(parts[0])?, entry(parts[1])?, entry(parts[2])?, entry(parts[3])?)
        .map_err(|e| e.to_string())
}

/// Parse a normal-ordered operator expression over qhat, phat: the grammar is
/// shared with phase-space expressions via the substitution qhat -> q,
/// phat -> p, with the monomials then read as normal-ordered basis elements.
fn parse_op(text: &str, scope: &Scope) -> Result<OpPoly, String> {
    let renamed = text.replace("qhat", "q").replace("phat", "p");
    let f = parse_poly(&renamed, scope)?;
    let mut out = OpPoly::zero();
    for (&(m, n), c) in f.terms() {
        out = out.add(&OpPoly::monomial(m, n, c.clone()));
    }
    Ok(out)
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}

fn json_c(z: Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn run_command(cli: &Cli) -> Result<Report, String> {
    let scope = Scope::with_params(&cli.params);
    match &cli.command {
        Command::Star { f, g } => {
            let a = parse_phase_fn(f, &scope)?;
            let b = parse_phase_fn(g, &scope)?;
            let out = star(&a, &b).map_err(|e| e.to_string())?;
            Ok(Report::exact(
                "star",
                json!({ "f": f, "g": g }),
                json!(out.to_string()),
                vec![out.to_string()],
            ))
        }
        Command::Bracket { f, g } => {
            let a = parse_phase_fn(f, &scope)?;
            let b = parse_phase_fn(g, &scope)?;
            let out = moyal_bracket(&a, &b).map_err(|e| e.to_string())?;
            Ok(Report::exact(
                "bracket",
                json!({ "f": f, "g": g }),
                json!(out.to_string()),
                vec![out.to_string()],
            ))
        }
        Command::Quantize { f } => {
            let a = parse_poly(f, &scope)?;
            let out = quantize(&a);
            Ok(Report::exact(
                "quantize",
                json!({ "f": f }),
                json!(out.to_string()),
                vec![out.to_string()],
            ))
        }
        Command::Dequantize { a } => {
            let op = parse_op(a, &scope)?;
            let out = dequantize(&op);
            Ok(Report::exact(
                "dequantize",
                json!({ "a": a }),
                json!(out.to_string()),
                vec![out.to_string()],
            ))
        }
        Command::Transform { u, interchange, linear, cubic_gauge, gauge, lambda } => {
            let upoly = parse_poly(u, &scope)?;
            let gf = if *interchange {
                GeneratingFn::Interchange
            } else if let Some(m) = linear {
                GeneratingFn::Linear(parse_matrix(m, &scope)?)
            } else if let Some(nu) = cubic_gauge {
                let nu = parse_poly(nu, &scope)?;
                if !nu.is_constant() {
                    return Err("cubic gauge parameter must be constant".into());
                }
                GeneratingFn::CubicGauge { nu: nu.constant_term() }
            } else if let Some(f) = gauge {
                let lam_text = lambda.as_deref().ok_or("--gauge requires --lambda")?;
                let lam = parse_poly(lam_text, &scope)?;
                if !lam.is_constant() {
                    return Err("lambda must be constant".into());
                }
                GeneratingFn::Gauge { f: parse_poly(f, &scope)?, lambda: lam.constant_term() }
            } else {
                return Err("choose one of --interchange, --linear, --cubic-gauge, --gauge".into());
            };
            let out = gauge_transform_known_ct(&gf, &upoly).map_err(|e| e.to_string())?;
            Ok(Report::exact(
                "transform",
                json!({ "u": u }),
                json!(out.to_string()),
                vec![out.to_string()],
            ))
        }
        Command::VerifyGf { f, q_image, p_image } => {
            let gf = lower_exp(&parse(f).map_err(|e| e.to_string())?, &scope).map_err(|e| e.to_string())?;
            let q_img = parse_poly(q_image, &scope)?;
            let p_img = parse_poly(p_image, &scope)?;
            let (rq, rp) = verify_gf_relation(&gf, &q_img, &p_img).map_err(|e| e.to_string())?;
            let pass = rq.is_zero() && rp.is_zero();
            Ok(Report {
                command: "verify-gf",
                inputs: json!({ "F": f, "Q": q_image, "P": p_image }),
                result: json!({ "q_residual": rq.to_string(), "p_residual": rp.to_string() }),
                residuals: json!([rq.to_string(), rp.to_string()]),
                tolerance: json!(0),
                pass,
                lines: vec![
                    format!("F*q - Q*F = {rq}"),
                    format!("F*p - P*F = {rp}"),
                    format!("canonical relation holds: {pass}"),
                ],
            })
        }
        Command::Canonicity { q_image, p_image } => {
            let pair = CanonicalPair::from_polys(parse_poly(q_image, &scope)?, parse_poly(p_image, &scope)?);
            let residual = canonicity_residual(&pair).map_err(|e| e.to_string())?;
            let pass = residual.is_zero();
            Ok(Report {
                command: "canonicity",
                inputs: json!({ "Q": q_image, "P": p_image }),
                result: json!(residual.to_string()),
                residuals: json!([residual.to_string()]),
                tolerance: json!(0),
                pass,
                lines: vec![format!("{{Q,P}} - i*hbar = {residual}"), format!("canonical: {pass}")],
            })
        }
        Command::PointSolve { q_fn, m, range, guess, guess_im } => {
            let q_closed = parse_closed(q_fn)?;
            let samples = linspace(range.qmin, range.qmax, range.n.max(1));
            let solved = point_ct_inverse(&q_closed, *m, &samples, Complex64::new(*guess, *guess_im))
                .map_err(|e| e.to_string())?;
            let tol = 1e-10;
            let worst = solved.iter().map(|s| s.residual).fold(0.0f64, f64::max);
            let pass = worst <= tol;
            let mut lines = vec![format!("{:>12} {:>34} {:>12}", "q", "f(q)", "residual")];
            for s in &solved {
                lines.push(format!("{:>12.6} {:>34} {:>12.3e}", s.q, fmt_c(s.f), s.residual));
            }
            lines.push(format!("max residual {worst:.3e} (tolerance {tol:.1e})"));
            Ok(Report {
                command: "point-solve",
                inputs: json!({ "Q": q_fn, "m": m, "qmin": range.qmin, "qmax": range.qmax, "n": range.n }),
                result: json!(solved
                    .iter()
                    .map(|s| json!({ "q": s.q, "f": json_c(s.f), "residual": s.residual }))
                    .collect::<Vec<_>>()),
                residuals: json!([worst]),
                tolerance: json!(tol),
                pass,
                lines,
            })
        }
        Command::PointForward { f_fn, g_fn, m, hbar, range } => {
            let f = parse_closed(f_fn)?;
            let g = parse_closed(g_fn)?;
            let fwd = PointCtForward::new(&f, &g, *m, *hbar);
            let samples = linspace(range.qmin, range.qmax, range.n.max(1));
            let out = fwd.eval_sweep(&samples).map_err(|e| e.to_string())?;
            let worst = fwd.canonicity_residual(&samples).map_err(|e| e.to_string())?;
            let tol = 1e-9;
            let pass = worst <= tol;
            let mut lines = vec![format!(
                "{:>10} {:>30} {:>30} {:>30}",
                "q", "Q(q)", "P coefficient", "P shift"
            )];
            for s in &out {
                lines.push(format!(
                    "{:>10.5} {:>30} {:>30} {:>30}",
                    s.x,
                    fmt_c(s.q_image),
                    fmt_c(s.p_coeff),
                    fmt_c(s.p_shift)
                ));
            }
            lines.push(format!("max preimage residual {worst:.3e} (tolerance {tol:.1e})"));
            Ok(Report {
                command: "point-forward",
                inputs: json!({ "f": f_fn, "g": g_fn, "m": m, "hbar": hbar }),
                result: json!(out
                    .iter()
                    .map(|s| json!({
                        "q": s.x,
                        "Q": json_c(s.q_image),
                        "P_coeff": json_c(s.p_coeff),
                        "P_shift": json_c(s.p_shift),
                    }))
                    .collect::<Vec<_>>()),
                residuals: json!([worst]),
                tolerance: json!(tol),
                pass,
                lines,
            })
        }
        Command::Linear { matrix, act, gf, decompose } => {
            let l = parse_matrix(matrix, &scope)?;
            let mut result = serde_json::Map::new();
            let mut lines = Vec::new();
            if let Some(u) = act {
                let out = linear_act(&l, &parse_poly(u, &scope)?);
                lines.push(format!("action: {out}"));
                result.insert("action".into(), json!(out.to_string()));
            }
            if *gf {
                let f = linear_gf(&l).map_err(|e| e.to_string())?;
                lines.push(format!("generating function: {f}"));
                result.insert("gf".into(), json!(f.to_string()));
            }
            if *decompose {
                let (alpha, beta, k) = linear_decompose(&l).map_err(|e| e.to_string())?;
                lines.push(format!("alpha = {alpha}; beta = {beta}; k = {k}"));
                result.insert(
                    "decomposition".into(),
                    json!({ "alpha": alpha.to_string(), "beta": beta.to_string(), "k": k.to_string() }),
                );
            }
            if lines.is_empty() {
                return Err("choose at least one of --act, --gf, --decompose".into());
            }
            Ok(Report::exact(
                "linear",
                json!({ "matrix": matrix }),
                serde_json::Value::Object(result),
                lines,
            ))
        }
        Command::Intertwine { phi, l, h0, h1 } => {
            if let Some(phi_text) = phi {
                let phi_poly = parse_poly(phi_text, &scope)?;
                let (pair, intertwiner) = susy_pair_from_phi(&phi_poly).map_err(|e| e.to_string())?;
                let p2 = PhasePoly::monomial(0, 2, Coeff::one());
                let resid = intertwine_residual(
                    &intertwiner.l,
                    &p2.add(&pair.v0),
                    &p2.add(&pair.v1),
                )
                .map_err(|e| e.to_string())?;
                let pass = resid.is_zero();
                Ok(Report {
                    command: "intertwine",
                    inputs: json!({ "phi": phi_text }),
                    result: json!({
                        "V0": pair.v0.to_string(),
                        "V1": pair.v1.to_string(),
                        "L": intertwiner.l.to_string(),
                    }),
                    residuals: json!([resid.to_string()]),
                    tolerance: json!(0),
                    pass,
                    lines: vec![
                        format!("V0 = {}", pair.v0),
                        format!("V1 = {}", pair.v1),
                        format!("L = {}", intertwiner.l),
                        format!("L*(p^2+V0) - (p^2+V1)*L = {resid}"),
                    ],
                })
            } else {
                let (l_text, h0_text, h1_text) = match (l, h0, h1) {
                    (Some(a), Some(b), Some(c)) => (a, b, c),
                    _ => return Err("provide --phi, or all of --L, --H0, --H1".into()),
                };
                let l_fn = parse_phase_fn(l_text, &scope)?;
                let h0 = parse_poly(h0_text, &scope)?;
                let h1 = parse_poly(h1_text, &scope)?;
                let resid = intertwine_residual(&l_fn, &h0, &h1).map_err(|e| e.to_string())?;
                let pass = resid.is_zero();
                Ok(Report {
                    command: "intertwine",
                    inputs: json!({ "L": l_text, "H0": h0_text, "H1": h1_text }),
                    result: json!(resid.to_string()),
                    residuals: json!([resid.to_string()]),
                    tolerance: json!(0),
                    pass,
                    lines: vec![format!("L*H0 - H1*L = {resid}"), format!("intertwines: {pass}")],
                })
            }
        }
        Command::Twopotentials { l, v0, v1 } => {
            let l_fn = parse_phase_fn(l, &scope)?;
            let v0 = parse_poly(v0, &scope)?;
            let v1 = parse_poly(v1, &scope)?;
            let resid = two_potentials_residual(&l_fn, &v0, &v1).map_err(|e| e.to_string())?;
            let pass = resid.is_zero();
            Ok(Report {
                command: "twopotentials",
                inputs: json!({ "L": l, "V0": v0.to_string(), "V1": v1.to_string() }),
                result: json!(resid.to_string()),
                residuals: json!([resid.to_string()]),
                tolerance: json!(0),
                pass,
                lines: vec![format!("residual = {resid}"), format!("relation holds: {pass}")],
            })
        }
        Command::Genvalue { h, wigner, energy, hbar, grid, range, margin, tol, out } => {
            let h_poly = parse_poly(h, &scope)?;
            let requested = grid * grid;
            if requested > max_grid_points() {
                return Err(format!(
                    "grid of {requested} points exceeds the configured limit {} (set PSQ_MAX_GRID)",
                    max_grid_points()
                ));
            }
            let w = match wigner.as_str() {
                "airy" => {
                    let c = (2.0 / hbar).powf(2.0 / 3.0);
                    let e = *energy;
                    let xi_min = c * (-range - e);
                    if xi_min < -12.0 {
                        return Err(format!(
                            "Airy argument reaches {xi_min:.2}, outside the working range;                              shrink --range, raise --hbar or raise --E"
                        ));
                    }
                    GridFn::from_fn(*grid, *grid, (-range, *range), (-range, *range), *hbar, |q, p| {
                        let xi = (c * (q + p * p - e)).min(40.0);
                        Complex64::new(psq_core::airy::airy_ai(xi).unwrap_or(0.0), 0.0)
                    })
                    .map_err(|e| e.to_string())?
                }
                "gauss" => GridFn::from_fn(*grid, *grid, (-range, *range), (-range, *range), *hbar, |q, p| {
                    Complex64::new((-(q * q + p * p) / hbar).exp(), 0.0)
                })
                .map_err(|e| e.to_string())?,
                path => {
                    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
                    read_csv(&text).map_err(|e| e.to_string())?
                }
            };
            let report = genvalue_residual(&h_poly, &w, *energy, *margin, &no_params)
                .map_err(|e| e.to_string())?;
            if let Some(path) = out {
                std::fs::write(path, write_csv(&w)).map_err(|e| format!("{path}: {e}"))?;
            }
            let pass = report.residual <= *tol;
            let mut lines = vec![format!(
                "relative genvalue residual {:.6e} (tolerance {:.1e})",
                report.residual, tol
            )];
            if report.degenerate {
                lines.push("warning: degenerate input (zero Wigner sample)".into());
            }
            Ok(Report {
                command: "genvalue",
                inputs: json!({ "H": h, "wigner": wigner, "E": energy, "hbar": hbar, "grid": grid, "range": range, "margin": margin }),
                result: json!({ "residual": report.residual, "degenerate": report.degenerate }),
                residuals: json!([report.residual]),
                tolerance: json!(tol),
                pass,
                lines,
            })
        }
        Command::AiryDelta { hbar, energy, modes, tol, control } => {
            let deviation = airy_to_delta_fourier_check(*hbar, *energy, *modes, !control)
                .map_err(|e| e.to_string())?;
            let pass = if *control { deviation > *tol } else { deviation <= *tol };
            Ok(Report {
                command: "airy-delta",
                inputs: json!({ "hbar": hbar, "E": energy, "modes": modes, "control": control }),
                result: json!({ "deviation": deviation }),
                residuals: json!([deviation]),
                tolerance: json!(tol),
                pass,
                lines: vec![format!(
                    "spectral flatness deviation {deviation:.6e} (tolerance {tol:.1e}{})",
                    if *control { ", negative control" } else { "" }
                )],
            })
        }
        Command::GridStar { f_path, g_path, out } => {
            let f = read_csv(&std::fs::read_to_string(f_path).map_err(|e| format!("{f_path}: {e}"))?)
                .map_err(|e| e.to_string())?;
            let g = read_csv(&std::fs::read_to_string(g_path).map_err(|e| format!("{g_path}: {e}"))?)
                .map_err(|e| e.to_string())?;
            let product = general_star_grid(&f, &g, max_grid_points()).map_err(|e| e.to_string())?;
            std::fs::write(out, write_csv(&product)).map_err(|e| format!("{out}: {e}"))?;
            Ok(Report::exact(
                "grid-star",
                json!({ "f": f_path, "g": g_path }),
                json!({ "out": out, "nq": product.nq, "np": product.np }),
                vec![format!("wrote {} ({}x{} samples)", out, product.nq, product.np)],
            ))
        }
    }
}

pub fn format_of(arg: FormatArg) -> Format {
    match arg {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    }
}
