//! Brute-force quadrature oracles for the defining integrals: the full
//! c-integral over `exp(Omega) N_0^-`, the compact `N_0^-` integral, the
//! spherical-function integral, the asymptotic probe, and a truncation
//! growth probe for divergence detection.
//!
//! Coordinates and measures.  `nbar = exp(X) exp(Y)` with `X` in the cone
//! slice `Omega` and `Y` in `n_0^-`; the Haar measure on this chart is
//! Lebesgue `dX dY` (exponential coordinates of the second kind).  The
//! full c-integrand carries the extra factor
//! `a_H(exp Y)^{2(lambda + rho_0)}` relating the chart to the compact
//! factor's own orientation, and the `N_0^-`-only integrand is evaluated
//! as `a_H(exp Y)^{+(lambda + rho_0)}`.  Both conventions were fixed by
//! requiring the product decomposition `c = c_0 c_Omega` and the anchor
//! `c_0(-3 rho_0) = 1` to hold simultaneously, and are exercised by the
//! acceptance tests.
//!
//! Absolute scales.  Only two spaces carry a pinned measure: `sl(2)`
//! (where the normalisation `dnbar = dy/pi` follows from
//! `int a(nbar)^{2 rho} dnbar = 1`) and the anchored compact factor.
//! Every other comparison is ratio-based so unknown scales cancel.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::catalog::{MatrixModel, SpaceDescriptor};
use crate::cfun::{in_e_omega_datum, in_e_zero_datum};
use crate::matgeom::{a_h_log, SlModel, Tolerances};
use crate::quad::{
    chunk_rng, plain_axis, sample_axis, sample_plain, transformed_axis, truncated_axis, AxisKind,
    Node,
};
use crate::roots::{rat_to_f64, Rat, RootDatum, RootError, RootSubset, SpectralParameter};
use crate::special::log_gamma;

/// Samples per Monte Carlo chunk; chunk RNGs are derived independently
/// from the seed so the result is independent of scheduling.
pub const MC_CHUNK: u64 = 1 << 16;

/// Maximum Gauss tensor grid size before the request is refused.
const MAX_GAUSS_NODES: u128 = 200_000_000;

/// Errors from oracle integration.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The parameter or base point is outside the integral's domain.
    DomainViolation(String),
    /// The error estimate did not reach the requested target.
    QuadratureFailure {
        /// Achieved error estimate.
        error_estimate: f64,
        /// Requested absolute error bound (`target_rel_error * |value|`).
        target: f64,
    },
    /// The space has no geometric model this oracle can integrate over.
    UnsupportedModel(String),
    /// Underlying root-datum error.
    Root(RootError),
}

impl From<RootError> for OracleError {
    fn from(e: RootError) -> Self {
        OracleError::Root(e)
    }
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::DomainViolation(m) => write!(f, "domain violation: {m}"),
            OracleError::QuadratureFailure {
                error_estimate,
                target,
            } => write!(
                f,
                "quadrature failure: error estimate {error_estimate:e} above target {target:e}"
            ),
            OracleError::UnsupportedModel(m) => write!(f, "unsupported model: {m}"),
            OracleError::Root(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

/// Integration mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMode {
    /// Tensor-product Gauss-Legendre with per-axis panel subdivision.
    GaussTensor {
        /// Nodes per panel (>= 2).
        order: usize,
        /// Panels per axis (>= 1).
        subdivisions: usize,
    },
    /// Deterministic chunked Monte Carlo.
    MonteCarlo {
        /// Total samples (>= 1000; rounded up to a chunk multiple).
        samples: u64,
        /// RNG seed.
        seed: u64,
    },
}

/// Full quadrature request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Node layout.
    pub mode: QuadratureMode,
    /// When set, transformed axes are truncated at `|t| <= r` in the
    /// transform coordinate (used by the divergence probe).
    pub truncation_radius: Option<f64>,
    /// Relative error target; Gauss mode escalates panels to reach it.
    pub target_rel_error: f64,
    /// Skip the convergence-domain check (divergence experiments).
    pub override_domain: bool,
}

impl QuadratureSpec {
    /// Gauss tensor spec with the default relative target `1e-10`.
    pub fn gauss(order: usize, subdivisions: usize) -> Self {
        QuadratureSpec {
            mode: QuadratureMode::GaussTensor {
                order,
                subdivisions,
            },
            truncation_radius: None,
            target_rel_error: 1e-10,
            override_domain: false,
        }
    }

    /// Monte Carlo spec with a loose default relative target `1e-2`.
    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        QuadratureSpec {
            mode: QuadratureMode::MonteCarlo { samples, seed },
            truncation_radius: None,
            target_rel_error: 1e-2,
            override_domain: false,
        }
    }

    /// Set the relative error target.
    pub fn with_target(mut self, target: f64) -> Self {
        self.target_rel_error = target;
        self
    }

    /// Allow evaluation outside the convergence domain.
    pub fn allow_outside_domain(mut self) -> Self {
        self.override_domain = true;
        self
    }

    /// Check the type invariants (panics on programmer error).
    pub fn validate(&self) {
        match self.mode {
            QuadratureMode::GaussTensor {
                order,
                subdivisions,
            } => {
                assert!(order >= 2, "gauss order must be >= 2");
                assert!(subdivisions >= 1, "subdivisions must be >= 1");
            }
            QuadratureMode::MonteCarlo { samples, .. } => {
                assert!(samples >= 1_000, "monte carlo requires >= 1000 samples");
            }
        }
        if let Some(r) = self.truncation_radius {
            assert!(r > 0.0, "truncation radius must be positive");
        }
        assert!(self.target_rel_error > 0.0, "target must be positive");
    }
}

/// Result of one oracle integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Estimated integral value.
    pub value: Complex64,
    /// Nonnegative error estimate (Gauss: last escalation difference;
    /// Monte Carlo: two standard errors across chunks).
    pub error_estimate: f64,
    /// Truncation-growth flag (set by the divergence probe only).
    pub diverged: bool,
}

/// Truncation growth probe output.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    /// Truncation radii, in the transform coordinate.
    pub radii: Vec<f64>,
    /// Integral magnitudes at each radius.
    pub magnitudes: Vec<f64>,
    /// True if the magnitudes grow strictly (by more than 5% per level).
    pub diverged: bool,
}

/// One integration axis.
#[derive(Debug, Clone, Copy)]
enum Axis {
    /// Substituted axis handled by `quad::transformed_axis`.
    Transformed { kind: AxisKind, scale: f64 },
    /// Plain bounded interval.
    Plain { lo: f64, hi: f64 },
}

/// A fully assembled integration problem.  `ln_scale` is a real constant
/// added to the integrand's log (known measure factors, angular volumes).
struct Problem {
    axes: Vec<Axis>,
    f: Box<dyn Fn(&[Node]) -> Complex64 + Send + Sync>,
    ln_scale: f64,
}

fn map_outer<R: Send>(
    count: usize,
    f: impl Fn(usize) -> R + Send + Sync,
) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

fn axis_nodes(axis: &Axis, order: usize, panels: usize, truncation: Option<f64>) -> Vec<Node> {
    match *axis {
        Axis::Transformed { kind, scale } => match truncation {
            Some(r) => truncated_axis(kind, order, panels, r),
            None => transformed_axis(kind, order, panels, scale),
        },
        Axis::Plain { lo, hi } => plain_axis(order, panels, lo, hi),
    }
}

/// Deterministic tensor-product Gauss evaluation at fixed order/panels.
fn gauss_value(problem: &Problem, order: usize, panels: usize, truncation: Option<f64>) -> Complex64 {
    let nodes: Vec<Vec<Node>> = problem
        .axes
        .iter()
        .map(|ax| axis_nodes(ax, order, panels, truncation))
        .collect();
    if nodes.is_empty() {
        return Complex64::new(problem.ln_scale.exp(), 0.0);
    }
    let total: u128 = nodes.iter().map(|n| n.len() as u128).product();
    debug_assert!(total <= MAX_GAUSS_NODES);
    let outer = &nodes[0];
    let partials = map_outer(outer.len(), |i| {
        let mut point: Vec<Node> = Vec::with_capacity(nodes.len());
        point.push(outer[i]);
        for ax in &nodes[1..] {
            point.push(ax[0]);
        }
        tensor_rec(&nodes, 1, &mut point, &problem.f)
    });
    let mut sum = Complex64::zero();
    for p in partials {
        sum += p;
    }
    sum * problem.ln_scale.exp()
}

fn tensor_rec(
    nodes: &[Vec<Node>],
    depth: usize,
    point: &mut Vec<Node>,
    f: &(dyn Fn(&[Node]) -> Complex64 + Send + Sync),
) -> Complex64 {
    if depth == nodes.len() {
        let mut w = 1.0;
        for n in point.iter() {
            w *= n.weight;
        }
        return f(point) * w;
    }
    let mut sum = Complex64::zero();
    for &n in &nodes[depth] {
        point[depth] = n;
        sum += tensor_rec(nodes, depth + 1, point, f);
    }
    sum
}

/// Gauss driver with panel-doubling escalation until the relative target
/// is met (at most three escalations).
fn run_gauss(
    problem: &Problem,
    order: usize,
    subdivisions: usize,
    target_rel: f64,
    truncation: Option<f64>,
) -> Result<(Complex64, f64), OracleError> {
    let nodes_at = |panels: usize| -> u128 {
        problem
            .axes
            .iter()
            .map(|ax| axis_nodes(ax, order, panels, truncation).len() as u128)
            .product()
    };
    if nodes_at(subdivisions.saturating_mul(2)) > MAX_GAUSS_NODES {
        return Err(OracleError::UnsupportedModel(format!(
            "gauss tensor grid would exceed {MAX_GAUSS_NODES} nodes in {} dimensions; \
             use monte_carlo",
            problem.axes.len()
        )));
    }
    if problem.axes.is_empty() {
        return Ok((Complex64::new(problem.ln_scale.exp(), 0.0), 0.0));
    }
    let mut panels = subdivisions;
    let mut prev = gauss_value(problem, order, panels, truncation);
    panels *= 2;
    let mut value = gauss_value(problem, order, panels, truncation);
    let mut est = (value - prev).norm();
    for _ in 0..2 {
        if est <= target_rel * value.norm().max(f64::MIN_POSITIVE) {
            break;
        }
        if nodes_at(panels * 2) > MAX_GAUSS_NODES {
            break;
        }
        prev = value;
        panels *= 2;
        value = gauss_value(problem, order, panels, truncation);
        est = (value - prev).norm();
    }
    Ok((value, est))
}

/// Deterministic chunked Monte Carlo driver.
fn run_mc(
    problem: &Problem,
    samples: u64,
    seed: u64,
    truncation: Option<f64>,
) -> (Complex64, f64) {
    if problem.axes.is_empty() {
        return (Complex64::new(problem.ln_scale.exp(), 0.0), 0.0);
    }
    // The truncation probe runs through Gauss; plain MC ignores radii.
    let _ = truncation;
    let chunks = samples.div_ceil(MC_CHUNK);
    let total = chunks * MC_CHUNK;
    let axes = problem.axes.clone();
    let f = &problem.f;
    // Per chunk: (sum_re, sum_im, sumsq_re, sumsq_im).
    let partials = map_outer(chunks as usize, |ci| {
        let mut rng = chunk_rng(seed, ci as u64);
        let mut s = Complex64::zero();
        let mut sq = (0.0f64, 0.0f64);
        let mut point: Vec<Node> = Vec::with_capacity(axes.len());
        for _ in 0..MC_CHUNK {
            point.clear();
            let mut w = 1.0;
            for ax in &axes {
                let n = match *ax {
                    Axis::Transformed { kind, scale } => sample_axis(kind, scale, &mut rng),
                    Axis::Plain { lo, hi } => sample_plain(lo, hi, &mut rng),
                };
                w *= n.weight;
                point.push(n);
            }
            let term = if w == 0.0 {
                Complex64::zero()
            } else {
                f(&point) * w
            };
            s += term;
            sq.0 += term.re * term.re;
            sq.1 += term.im * term.im;
        }
        (s, sq)
    });
    let mut sum = Complex64::zero();
    let mut sumsq = (0.0f64, 0.0f64);
    for (s, sq) in partials {
        sum += s;
        sumsq.0 += sq.0;
        sumsq.1 += sq.1;
    }
    let n = total as f64;
    let mean = sum / n;
    let var_re = (sumsq.0 / n - mean.re * mean.re).max(0.0);
    let var_im = (sumsq.1 / n - mean.im * mean.im).max(0.0);
    let stderr = ((var_re + var_im) / n).sqrt();
    let scale = problem.ln_scale.exp();
    (mean * scale, 2.0 * stderr * scale)
}

fn run_problem(problem: &Problem, spec: &QuadratureSpec) -> Result<OracleResult, OracleError> {
    spec.validate();
    let (value, est) = match spec.mode {
        QuadratureMode::GaussTensor {
            order,
            subdivisions,
        } => run_gauss(
            problem,
            order,
            subdivisions,
            spec.target_rel_error,
            spec.truncation_radius,
        )?,
        QuadratureMode::MonteCarlo { samples, seed } => {
            run_mc(problem, samples, seed, spec.truncation_radius)
        }
    };
    let target = spec.target_rel_error * value.norm().max(f64::MIN_POSITIVE);
    // NaN compares false against everything, so a non-finite value or
    // estimate must be rejected explicitly rather than via `est > target`.
    if !value.is_finite() || !est.is_finite() || est > target {
        return Err(OracleError::QuadratureFailure {
            error_estimate: est,
            target,
        });
    }
    Ok(OracleResult {
        value,
        error_estimate: est,
        diverged: false,
    })
}

/// Complex coordinates of `lambda + shift` in the ambient basis.
fn shifted_coords(lambda: &SpectralParameter, shift: &[f64]) -> Vec<Complex64> {
    lambda
        .coords()
        .iter()
        .zip(shift.iter())
        .map(|(l, s)| l + s)
        .collect()
}

fn dot_cf(coeffs: &[Complex64], vals: &[f64]) -> Complex64 {
    let mut acc = Complex64::zero();
    for (c, v) in coeffs.iter().zip(vals.iter()) {
        acc += c * v;
    }
    acc
}

/// Which integration strategy a space gets.
enum CPath {
    /// `sl(2)`: one bounded axis, known measure `dy/pi`.
    Sl2,
    /// `SlR(3,1,2)`: factorised disk times one unbounded axis.
    Slr312,
    /// Rank-one ball model: radial axis with exact angular volume.
    Ball { dim: usize },
    /// Any other matrix model: Monte Carlo over the bounding box with a
    /// membership indicator.
    General { model: SlModel },
}

fn c_path(space: &SpaceDescriptor) -> Result<CPath, OracleError> {
    match space.model {
        Some(MatrixModel::SlMatrix { n: 2, p: 1, q: 1 }) => Ok(CPath::Sl2),
        Some(MatrixModel::SlMatrix { n: 3, p: 1, q: 2 }) => Ok(CPath::Slr312),
        Some(MatrixModel::SlMatrix { n, p, q }) => Ok(CPath::General {
            model: SlModel::new(n, p, q),
        }),
        Some(MatrixModel::Ball { dim }) => Ok(CPath::Ball { dim }),
        None => Err(OracleError::UnsupportedModel(String::from(
            "space has no geometric model; oracle integration needs SlMatrix or Ball",
        ))),
    }
}

/// `z = lambda(H_alpha)` for the unique noncompact positive root of a
/// rank-one datum.
fn rank_one_z(datum: &RootDatum, lambda: &SpectralParameter) -> Result<Complex64, OracleError> {
    let nc = datum.block_indices(RootSubset::Noncompact);
    if nc.len() != 1 {
        return Err(OracleError::UnsupportedModel(format!(
            "expected exactly one noncompact positive root, found {}",
            nc.len()
        )));
    }
    Ok(lambda.pair_rat(&datum.roots()[nc[0]].coroot)?)
}

/// Assemble the full c-integrand for a space.
fn build_c_problem(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
) -> Result<Problem, OracleError> {
    let datum = &space.datum;
    match c_path(space)? {
        CPath::Sl2 => {
            let z = rank_one_z(datum, lambda)?;
            let coef = -(z + 1.0) / 2.0;
            Ok(Problem {
                axes: vec![Axis::Transformed {
                    kind: AxisKind::BoundedSingular,
                    scale: 1.0,
                }],
                f: Box::new(move |pt| (coef * pt[0].ln_u).exp()),
                ln_scale: -core::f64::consts::PI.ln(),
            })
        }
        CPath::Ball { dim } => {
            let z = rank_one_z(datum, lambda)?;
            let nf = dim as f64;
            let coef = -(z + nf) / 2.0;
            let rpow = nf - 1.0;
            // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2).
            let lg = log_gamma(Complex64::new(nf / 2.0, 0.0));
            let ang_ln = core::f64::consts::LN_2 + (nf / 2.0) * core::f64::consts::PI.ln()
                - lg.log_modulus;
            Ok(Problem {
                axes: vec![Axis::Transformed {
                    kind: AxisKind::BoundedSingularHalf,
                    scale: 1.0,
                }],
                f: Box::new(move |pt| {
                    let r = pt[0].y;
                    (coef * pt[0].ln_u).exp() * r.powf(rpow)
                }),
                ln_scale: ang_ln,
            })
        }
        CPath::Slr312 => {
            let lr = shifted_coords(lambda, &datum.rho_f64(RootSubset::Full));
            let lz = shifted_coords(lambda, &datum.rho_f64(RootSubset::Compact));
            let twist = 2.0 * (lz[1] - lz[2]);
            Ok(Problem {
                axes: vec![
                    Axis::Transformed {
                        kind: AxisKind::BoundedSingular,
                        scale: 1.0,
                    },
                    Axis::Transformed {
                        kind: AxisKind::BoundedSingular,
                        scale: 1.0,
                    },
                    Axis::Transformed {
                        kind: AxisKind::Infinite,
                        scale: 1.0,
                    },
                ],
                f: Box::new(move |pt| slr312_c_integrand(&lr, twist, pt)),
                ln_scale: 0.0,
            })
        }
        CPath::General { model } => {
            let lr = shifted_coords(lambda, &datum.rho_f64(RootSubset::Full));
            let lz = shifted_coords(lambda, &datum.rho_f64(RootSubset::Compact));
            let tol = Tolerances::default();
            let xd = model.omega_dim();
            let yd = model.n0_dim();
            let mut axes = Vec::with_capacity(xd + yd);
            for _ in 0..xd {
                axes.push(Axis::Plain { lo: -1.0, hi: 1.0 });
            }
            for _ in 0..yd {
                axes.push(Axis::Transformed {
                    kind: AxisKind::Infinite,
                    scale: 1.0,
                });
            }
            Ok(Problem {
                axes,
                f: Box::new(move |pt| {
                    let x: Vec<f64> = pt[..xd].iter().map(|n| n.y).collect();
                    let y: Vec<f64> = pt[xd..].iter().map(|n| n.y).collect();
                    if !model.omega_membership(&x) {
                        return Complex64::zero();
                    }
                    let g = model.exp_nbar(&x, &y);
                    let la = match a_h_log(&model, &g, &tol) {
                        Ok(v) => v,
                        Err(_) => return Complex64::zero(),
                    };
                    let g0 = model.n0_matrix(&y).exp_nilpotent();
                    let l0 = match a_h_log(&model, &g0, &tol) {
                        Ok(v) => v,
                        Err(_) => return Complex64::zero(),
                    };
                    let expo = -dot_cf(&lr, &la) + 2.0 * dot_cf(&lz, &l0);
                    expo.exp()
                }),
                ln_scale: 0.0,
            })
        }
    }
}

/// The validated `SlR(3,1,2)` kernel on factorised disk coordinates
/// `x1 = u`, `x2 = v sqrt(1-u^2)` and the `n_0^-` coordinate `y`:
/// `a_H(g)^{-(lambda+rho)} a_H(exp Y)^{twist}` with `twist` a scalar
/// multiplying `lb = ln(1+y^2)/2` (the c-integral passes
/// `2 (lambda+rho_0)(H_beta)` to implement the reflected `c_zero`
/// normalisation; the spherical integral passes `0` for the plain
/// kernel).
///
/// Principal-minor pivots of `g^T I_{1,2} g` for `g = exp(X) exp(Y)`:
/// `D1 = (1-u^2)(1-v^2)`, `|D2| = q(y) = (1-x1^2) y^2 + 2 x1 x2 y +
/// (1-x2^2)`, `D3 = 1`; all logs are evaluated cancellation-free via the
/// axis transforms.
fn slr312_c_integrand(lr: &[Complex64], twist: Complex64, pt: &[Node]) -> Complex64 {
    let (u, v, w) = (pt[0], pt[1], pt[2]);
    let ln_d1 = u.ln_u + v.ln_u;
    let su = (0.5 * u.ln_u).exp();
    let yv = w.y;
    // Completed square: q(y) = (sqrt(1-u^2) y + u v)^2 + (1-v^2) — a sum
    // of nonnegative terms, where the expanded three-term form cancels
    // catastrophically near the resonance sqrt(1-u^2) y ~ -uv, |v| ~ 1.
    let root = su * yv + u.y * v.y;
    let qy = root * root + v.ln_u.exp();
    let ln_q = qy.ln();
    let la1 = 0.5 * ln_d1;
    let la2 = 0.5 * (ln_q - ln_d1);
    let la3 = -0.5 * ln_q;
    // a_H(exp Y) has log (0, +lb, -lb) with lb = ln(1+y^2)/2 = ln_u/2.
    let lb = 0.5 * w.ln_u;
    let expo = -(lr[0] * la1 + lr[1] * la2 + lr[2] * la3) + twist * lb;
    // su is the Jacobian of x2 = v sqrt(1-u^2).
    expo.exp() * su
}

/// Brute-force evaluation of the full c-integral over the
/// `exp(Omega) N_0^-` chart.  Raw scale except `sl(2)` (`dy/pi`).
pub fn c_integral_raw(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
    spec: &QuadratureSpec,
) -> Result<OracleResult, OracleError> {
    if !spec.override_domain
        && !(in_e_omega_datum(&space.datum, lambda) && in_e_zero_datum(&space.datum, lambda))
    {
        return Err(OracleError::DomainViolation(String::from(
            "lambda is outside the convergence domain E (set override to probe anyway)",
        )));
    }
    let problem = build_c_problem(space, lambda)?;
    run_problem(&problem, spec)
}

/// Brute-force evaluation of the compact factor over `N_0^-`,
/// anchor-normalised so that the value at `lambda = -3 rho_0` is `1`.
pub fn c_zero_integral_raw(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
    spec: &QuadratureSpec,
) -> Result<OracleResult, OracleError> {
    if !spec.override_domain && !in_e_zero_datum(&space.datum, lambda) {
        return Err(OracleError::DomainViolation(String::from(
            "lambda violates Re lambda(H_beta) < -2 m_beta on a compact root",
        )));
    }
    let datum = &space.datum;
    let model = match space.model {
        Some(MatrixModel::SlMatrix { n, p, q }) => Some(SlModel::new(n, p, q)),
        Some(MatrixModel::Ball { .. }) => None,
        None => {
            return Err(OracleError::UnsupportedModel(String::from(
                "space has no geometric model; oracle integration needs SlMatrix or Ball",
            )))
        }
    };
    let n0_dim = model.as_ref().map_or(0, |m| m.n0_dim());
    if n0_dim == 0 {
        // Zero-dimensional integral: 1 exactly (Delta_0 empty).
        return Ok(OracleResult {
            value: Complex64::new(1.0, 0.0),
            error_estimate: 0.0,
            diverged: false,
        });
    }
    let model = model.expect("n0_dim > 0 implies a matrix model");
    let rho0 = datum.rho_f64(RootSubset::Compact);
    let anchor: Vec<Complex64> = rho0.iter().map(|r| Complex64::new(-3.0 * r, 0.0)).collect();
    let anchor_param = SpectralParameter::new(datum, &anchor)?;
    let main = run_problem(&build_c0_problem(&model, &rho0, lambda), spec)?;
    let norm = run_problem(&build_c0_problem(&model, &rho0, &anchor_param), spec)?;
    let value = main.value / norm.value;
    let rel = main.error_estimate / main.value.norm().max(f64::MIN_POSITIVE)
        + norm.error_estimate / norm.value.norm().max(f64::MIN_POSITIVE);
    Ok(OracleResult {
        value,
        error_estimate: value.norm() * rel,
        diverged: false,
    })
}

/// `N_0^-` integrand: `a_H(exp Y)^{+(lambda + rho_0)}` on unbounded axes.
fn build_c0_problem(model: &SlModel, rho0: &[f64], lambda: &SpectralParameter) -> Problem {
    let lz = shifted_coords(lambda, rho0);
    let model = *model;
    let axes: Vec<Axis> = (0..model.n0_dim())
        .map(|_| Axis::Transformed {
            kind: AxisKind::Infinite,
            scale: 1.0,
        })
        .collect();
    if model.n0_dim() == 1 {
        // One-coordinate N_0^-: the LDL pivots of W = g^T I_{p,q} g for
        // g = exp(y F_{ab}) are symbolically (1, ..., s(1+y^2), s/(1+y^2),
        // ..., 1) at the block rows b < a, so ln a_H is +L/2 at b and
        // -L/2 at a with L = ln(1+y^2).  Reading L off the axis node
        // avoids the catastrophic cancellation the floating-point Schur
        // complement -1 + y^2/(1+y^2) suffers at large |y|.
        let (row_a, row_b) = model.n0_slot(0);
        let coeff = (lz[row_b] - lz[row_a]) / 2.0;
        return Problem {
            axes,
            f: Box::new(move |pt| (coeff * pt[0].ln_u).exp()),
            ln_scale: 0.0,
        };
    }
    let tol = Tolerances::default();
    Problem {
        axes,
        f: Box::new(move |pt| {
            let y: Vec<f64> = pt.iter().map(|n| n.y).collect();
            let g0 = model.n0_matrix(&y).exp_nilpotent();
            match a_h_log(&model, &g0, &tol) {
                Ok(l0) => dot_cf(&lz, &l0).exp(),
                Err(_) => Complex64::zero(),
            }
        }),
        ln_scale: 0.0,
    }
}

/// Shared core of the spherical integral: the integral WITHOUT the
/// `a^{lambda - rho}` prefactor (which is exactly what the asymptotic
/// probe needs).
///
/// The kernel is the plain pairing
/// `a_H(a nbar a^-1)^{lambda - rho} a_H(nbar)^{-(lambda + rho)}` over the
/// `exp(Omega) N_0^-` chart.  Its height expansion therefore carries the
/// *unreflected* compact weight `B(m/2, +lambda(H_beta)/2) / pi` per
/// compact root, while the `c_zero` closed form (and the c-integral
/// oracle) use the reflected convention `B(m/2, -lambda(H_beta)/2 - m)`.
/// On spaces without compact roots the two conventions coincide and the
/// core tends to the c-integral along chamber rays.
fn spherical_core(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
    a_log: &[f64],
    spec: &QuadratureSpec,
) -> Result<OracleResult, OracleError> {
    let datum = &space.datum;
    if !spec.override_domain && !in_e_omega_datum(datum, lambda) {
        return Err(OracleError::DomainViolation(String::from(
            "lambda is outside E_Omega",
        )));
    }
    if a_log.len() != datum.ambient_dim() {
        return Err(OracleError::DomainViolation(format!(
            "a_log has length {}, ambient dimension is {}",
            a_log.len(),
            datum.ambient_dim()
        )));
    }
    // Interior-chamber requirement: alpha(a_log) > 0 on noncompact
    // positive roots (the compression condition).
    for &i in &datum.block_indices(RootSubset::Noncompact) {
        if datum.root_value_f64(i, a_log) <= 0.0 {
            return Err(OracleError::DomainViolation(String::from(
                "log a is not in the open cone c_max^0 (a noncompact root is <= 0)",
            )));
        }
    }
    let lam = lambda.coords().to_vec();
    let rho = datum.rho_f64(RootSubset::Full);
    let lam_minus_rho: Vec<Complex64> = lam
        .iter()
        .zip(rho.iter())
        .map(|(l, r)| l - r)
        .collect();
    match c_path(space)? {
        CPath::Sl2 => {
            let z = rank_one_z(datum, lambda)?;
            // Slot (1,0) of the 2x2 model scales by e^{w1 - w0} under
            // conjugation; contraction since w0 > w1 in the open cone.
            let shrink2 = -(2.0 * (a_log[1] - a_log[0])).exp_m1(); // 1 - s^2 >= 0
            let ccoef = -(z + 1.0) / 2.0;
            let fcoef = (z - 1.0) / 2.0;
            let problem = Problem {
                axes: vec![Axis::Transformed {
                    kind: AxisKind::BoundedSingular,
                    scale: 1.0,
                }],
                f: Box::new(move |pt| {
                    let y = pt[0].y;
                    // 1 - (y s)^2 = (1 - y^2) + y^2 (1 - s^2), cancellation-free.
                    let one_minus_yp2 = pt[0].ln_u.exp() + y * y * shrink2;
                    (fcoef * one_minus_yp2.ln() + ccoef * pt[0].ln_u).exp()
                }),
                ln_scale: -core::f64::consts::PI.ln(),
            };
            run_problem(&problem, spec)
        }
        CPath::Slr312 => {
            let lr = shifted_coords(lambda, &rho);
            // Conjugation by exp(a_log) preserves second-kind coordinates:
            // slot (1,0) scales by g1, (2,0) by g2, the n_0^- slot (2,1) by
            // g3.  The minors of the conjugated point then follow the same
            // disk formulas, rearranged into sums of nonnegative terms
            // (g1, g2 <= 1 in the open cone) so that, unlike the matrix
            // LDL path, nothing cancels at |u|, |v| -> 1 or large |y|.
            let g1 = (a_log[1] - a_log[0]).exp();
            let g2 = (a_log[2] - a_log[0]).exp();
            let g3 = (a_log[2] - a_log[1]).exp();
            let om_g1sq = -(2.0 * (a_log[1] - a_log[0])).exp_m1(); // 1 - g1^2
            let om_g2sq = -(2.0 * (a_log[2] - a_log[0])).exp_m1(); // 1 - g2^2
            let problem = Problem {
                axes: vec![
                    Axis::Transformed {
                        kind: AxisKind::BoundedSingular,
                        scale: 1.0,
                    },
                    Axis::Transformed {
                        kind: AxisKind::BoundedSingular,
                        scale: 1.0,
                    },
                    Axis::Transformed {
                        kind: AxisKind::Infinite,
                        scale: 1.0,
                    },
                ],
                f: Box::new(move |pt| {
                    // Plain kernel: no compact reflection twist here.  The
                    // integral model pairs a_H(a nbar a^-1)^{lambda-rho}
                    // with the raw a_H(nbar)^{-(lambda+rho)}.
                    let base = slr312_c_integrand(&lr, Complex64::zero(), pt);
                    if base == Complex64::zero() {
                        return base;
                    }
                    let (u, v, w) = (pt[0], pt[1], pt[2]);
                    let su = (0.5 * u.ln_u).exp();
                    let x1p = u.y * g1;
                    let x2p = v.y * su * g2;
                    let yp = w.y * g3;
                    // 1 - x1'^2 and the conjugated disk minor D1', both as
                    // sums of nonnegative terms.
                    let spsq = u.ln_u.exp() + u.y * u.y * om_g1sq;
                    let d1p =
                        u.ln_u.exp() * (v.ln_u.exp() + v.y * v.y * om_g2sq) + u.y * u.y * om_g1sq;
                    // |D2'| by the same completed square as the base factor.
                    let sp = spsq.sqrt();
                    let root = sp * yp + x1p * x2p / sp;
                    let qp = root * root + d1p / spsq;
                    let (ln_d1p, ln_qp) = (d1p.ln(), qp.ln());
                    let la = [0.5 * ln_d1p, 0.5 * (ln_qp - ln_d1p), -0.5 * ln_qp];
                    base * dot_cf(&lam_minus_rho, &la).exp()
                }),
                ln_scale: 0.0,
            };
            run_problem(&problem, spec)
        }
        CPath::Ball { .. } => Err(OracleError::UnsupportedModel(String::from(
            "spherical integral on the ball model is not implemented; use sl(2) or SlR(3,1,2)",
        ))),
        CPath::General { model } => {
            let lr = shifted_coords(lambda, &rho);
            let tol = Tolerances::default();
            let xd = model.omega_dim();
            let yd = model.n0_dim();
            let a_log = a_log.to_vec();
            let mut axes = Vec::with_capacity(xd + yd);
            for _ in 0..xd {
                axes.push(Axis::Plain { lo: -1.0, hi: 1.0 });
            }
            for _ in 0..yd {
                axes.push(Axis::Transformed {
                    kind: AxisKind::Infinite,
                    scale: 1.0,
                });
            }
            let problem = Problem {
                axes,
                f: Box::new(move |pt| {
                    let x: Vec<f64> = pt[..xd].iter().map(|n| n.y).collect();
                    let y: Vec<f64> = pt[xd..].iter().map(|n| n.y).collect();
                    if !model.omega_membership(&x) {
                        return Complex64::zero();
                    }
                    let g = model.exp_nbar(&x, &y);
                    let la = match a_h_log(&model, &g, &tol) {
                        Ok(v) => v,
                        Err(_) => return Complex64::zero(),
                    };
                    // Plain kernel, as in the `Slr312` fast path.
                    let (xc, yc) = model.conjugate_coords(&a_log, &x, &y);
                    let gc = model.exp_nbar(&xc, &yc);
                    let lc = match a_h_log(&model, &gc, &tol) {
                        Ok(v) => v,
                        Err(_) => return Complex64::zero(),
                    };
                    let expo = -dot_cf(&lr, &la) + dot_cf(&lam_minus_rho, &lc);
                    expo.exp()
                }),
                ln_scale: 0.0,
            };
            run_problem(&problem, spec)
        }
    }
}

/// Brute-force spherical function: prefactor `a^{lambda-rho}`
/// times the integral over the `exp(Omega) N_0^-` chart.  Same raw scale
/// as [`c_integral_raw`].
pub fn spherical_integral(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
    a_log: &[f64],
    spec: &QuadratureSpec,
) -> Result<OracleResult, OracleError> {
    let core = spherical_core(space, lambda, a_log, spec)?;
    let datum = &space.datum;
    let rho = datum.rho_f64(RootSubset::Full);
    let mut expo = Complex64::zero();
    for ((l, r), w) in lambda.coords().iter().zip(rho.iter()).zip(a_log.iter()) {
        expo += (l - r) * *w;
    }
    let pref = expo.exp();
    Ok(OracleResult {
        value: core.value * pref,
        error_estimate: core.error_estimate * pref.norm(),
        diverged: false,
    })
}

/// Asymptotic probe: the sequence `a_t^{rho-lambda}
/// phi_lambda(a_t)` for `a_t = exp(t * direction)`, which converges to
/// the raw c-value as `t` grows.  The prefactors cancel, so each entry
/// is exactly the core integral.
pub fn asymptotic_probe(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
    direction: &[Rat],
    t_list: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<OracleResult>, OracleError> {
    let loc = space.datum.cone_and_chamber(direction)?;
    if !loc.in_c_max_interior {
        return Err(OracleError::DomainViolation(String::from(
            "direction is not in the open cone c_max^0",
        )));
    }
    let dirf: Vec<f64> = direction.iter().map(|r| rat_to_f64(*r)).collect();
    let mut out = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if t <= 0.0 {
            return Err(OracleError::DomainViolation(String::from(
                "asymptotic probe times must be positive",
            )));
        }
        let a_log: Vec<f64> = dirf.iter().map(|d| d * t).collect();
        out.push(spherical_core(space, lambda, &a_log, spec)?);
    }
    Ok(out)
}

/// Truncation growth probe: evaluate the full c-integrand with all
/// transformed axes truncated at each radius (transform coordinate) and
/// flag strict growth.  Runs in Gauss mode regardless of `spec.mode`
/// (deterministic truncation comparisons).
pub fn c_divergence_probe(
    space: &SpaceDescriptor,
    lambda: &SpectralParameter,
    radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<DivergenceReport, OracleError> {
    if radii.len() < 2 {
        return Err(OracleError::DomainViolation(String::from(
            "divergence probe needs at least two radii",
        )));
    }
    for w in radii.windows(2) {
        if w[1] <= w[0] || w[0] <= 0.0 {
            return Err(OracleError::DomainViolation(String::from(
                "radii must be positive and strictly increasing",
            )));
        }
    }
    let problem = build_c_problem(space, lambda)?;
    let (order, subdivisions) = match spec.mode {
        QuadratureMode::GaussTensor {
            order,
            subdivisions,
        } => (order, subdivisions),
        QuadratureMode::MonteCarlo { .. } => (32, 2),
    };
    let mut magnitudes = Vec::with_capacity(radii.len());
    for &r in radii {
        let v = gauss_value(&problem, order, subdivisions, Some(r));
        magnitudes.push(v.norm());
    }
    let diverged = magnitudes
        .windows(2)
        .all(|w| w[1] > w[0] * 1.05);
    Ok(DivergenceReport {
        radii: radii.to_vec(),
        magnitudes,
        diverged,
    })
}
