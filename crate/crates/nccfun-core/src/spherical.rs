//! Harish-Chandra series machinery: the Gamma recursion, the building
//! blocks `Phi_lambda`, the expansion formula for `phi_lambda`, the
//! Riemannian spherical function of the compact sub-datum, spherical
//! characters, and formal dimensions.
//!
//! Recursion sign.  The recursion implemented here is
//! `((mu,mu) - 2(mu,lambda)) Gamma_mu = 2 sum_alpha m_alpha sum_{k>=1}
//! Gamma_{mu-2k alpha} (mu + rho - 2k alpha - lambda, alpha)`, i.e. with
//! `-lambda` in the final pairing.  The `+lambda` variant fails every
//! independent check (the chamber-ray asymptotics and the integral
//! oracle), while this sign reproduces them to quadrature accuracy; the
//! acceptance suite pins it.  One-step consequence for `sl(2)`:
//! `Gamma_{2 alpha} = (1-z)/(2(2-z))` with `z = lambda(H_alpha)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::cfun::{CFunError, CFunSpec};
use crate::roots::{
    rat_to_f64, Rat, RootDatum, RootError, RootSubset, SpectralParameter,
};

/// Relative genericity threshold for the recursion divisors.
pub const GENERICITY_RELATIVE: f64 = 1e-8;

/// Height cap for adaptive series evaluation.
const MAX_HEIGHT: u32 = 400;

/// Errors from series evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum SphericalError {
    /// A recursion divisor `(mu,mu) - 2(mu,lambda)` fell under the
    /// genericity threshold at the reported lattice point.
    NonGenericParameter {
        /// Simple-root coordinates of the offending lattice point.
        mu: Vec<u32>,
        /// The divisor magnitude that failed the threshold.
        margin: f64,
    },
    /// `a_log` is not in the required open chamber.
    ChamberViolation,
    /// The tail bound failed to certify within the height cap.
    NoConvergence,
    /// A needed c-value is a pole (or, for denominators, zero).
    PoleAtParameter,
    /// Underlying root-datum error.
    Root(RootError),
    /// Underlying c-function error.
    CFun(CFunError),
}

impl From<RootError> for SphericalError {
    fn from(e: RootError) -> Self {
        SphericalError::Root(e)
    }
}

impl From<CFunError> for SphericalError {
    fn from(e: CFunError) -> Self {
        SphericalError::CFun(e)
    }
}

impl core::fmt::Display for SphericalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SphericalError::NonGenericParameter { mu, margin } => write!(
                f,
                "non-generic parameter: divisor magnitude {margin:e} at lattice point {mu:?}"
            ),
            SphericalError::ChamberViolation => {
                write!(f, "base point is not in the open positive chamber")
            }
            SphericalError::NoConvergence => {
                write!(f, "series tail bound failed to certify within the height cap")
            }
            SphericalError::PoleAtParameter => {
                write!(f, "a required c-value is singular at this parameter")
            }
            SphericalError::Root(e) => write!(f, "{e}"),
            SphericalError::CFun(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SphericalError {}

/// Computed Gamma coefficients for one `(datum, lambda)` pair.
#[derive(Debug, Clone)]
pub struct GammaTable {
    max_height: u32,
    coefficients: BTreeMap<Vec<u32>, Complex64>,
    genericity_margin: f64,
    num_simples: usize,
}

impl GammaTable {
    /// `Gamma_mu` in simple-root coordinates (zero when absent).
    pub fn coefficient(&self, mu: &[u32]) -> Complex64 {
        self.coefficients
            .get(mu)
            .copied()
            .unwrap_or_else(Complex64::zero)
    }

    /// Largest height stored.
    pub fn max_height(&self) -> u32 {
        self.max_height
    }

    /// Smallest recursion-divisor magnitude encountered.
    pub fn genericity_margin(&self) -> f64 {
        self.genericity_margin
    }

    /// Number of simple roots (lattice rank).
    pub fn num_simples(&self) -> usize {
        self.num_simples
    }

    /// All stored coefficients in deterministic (lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.coefficients.iter()
    }
}

/// Per-root data precomputed for the recursion.
struct RecursionRoot {
    simple_coords: Vec<u32>,
    multiplicity: f64,
    /// `(rho, alpha)`.
    rho_pair: f64,
    /// `(alpha, alpha)`.
    norm_sq: f64,
    /// `(lambda, alpha)`.
    lam_pair: Complex64,
    /// `gc[i] = sum_j (alpha_i, alpha_j) c_j`, so `(mu, alpha) = mu . gc`.
    gram_times_coords: Vec<f64>,
}

fn simple_gram(datum: &RootDatum) -> Result<Vec<Vec<f64>>, RootError> {
    let simples = datum.simple_indices();
    let mut g = vec![vec![0.0; simples.len()]; simples.len()];
    for (i, &si) in simples.iter().enumerate() {
        for (j, &sj) in simples.iter().enumerate() {
            let v = datum.dual_inner_rat(
                &datum.roots()[si].coords,
                &datum.roots()[sj].coords,
            )?;
            g[i][j] = rat_to_f64(v);
        }
    }
    Ok(g)
}

fn recursion_roots(
    datum: &RootDatum,
    simple_lam: &[Complex64],
    gram: &[Vec<f64>],
) -> Result<Vec<RecursionRoot>, RootError> {
    let rho = datum.rho(RootSubset::Full);
    let mut out = Vec::new();
    for &i in &datum.positive_indices() {
        let entry = &datum.roots()[i];
        let coords = entry
            .simple_coords
            .clone()
            .expect("positive roots carry simple coordinates");
        let norm_sq = rat_to_f64(entry.norm_sq);
        let rho_h = rat_to_f64(crate::roots::dot_rat(&rho, &entry.coroot));
        let mut lam_pair = Complex64::zero();
        let mut gc = vec![0.0; coords.len()];
        for ix in 0..coords.len() {
            lam_pair += simple_lam[ix] * coords[ix] as f64;
            for j in 0..coords.len() {
                gc[ix] += gram[ix][j] * coords[j] as f64;
            }
        }
        out.push(RecursionRoot {
            simple_coords: coords,
            multiplicity: entry.multiplicity as f64,
            rho_pair: rho_h * norm_sq / 2.0,
            norm_sq,
            lam_pair,
            gram_times_coords: gc,
        });
    }
    Ok(out)
}

/// Enumerate all lattice points of a given height in `r` coordinates,
/// lexicographically.
fn lattice_points(r: usize, height: u32, out: &mut Vec<Vec<u32>>) {
    fn rec(r: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if r == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            rec(r - 1, left - v, prefix, out);
            prefix.pop();
        }
    }
    if r == 0 {
        return;
    }
    let mut prefix = Vec::with_capacity(r);
    rec(r, height, &mut prefix, out);
}

/// Build the Gamma table for `lambda` up to `max_height` (the
/// `-lambda`-sign recursion; see the module docs).
pub fn gamma_table(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    max_height: u32,
) -> Result<GammaTable, SphericalError> {
    let simples = datum.simple_indices().to_vec();
    let r = simples.len();
    let mut coefficients = BTreeMap::new();
    coefficients.insert(vec![0u32; r], Complex64::new(1.0, 0.0));
    if r == 0 {
        return Ok(GammaTable {
            max_height,
            coefficients,
            genericity_margin: f64::INFINITY,
            num_simples: 0,
        });
    }
    let gram = simple_gram(datum)?;
    // (alpha_i, lambda) per simple root.
    let mut simple_lam = Vec::with_capacity(r);
    for &si in &simples {
        let entry = &datum.roots()[si];
        let z = lambda.pair_rat(&entry.coroot)?;
        simple_lam.push(z * (rat_to_f64(entry.norm_sq) / 2.0));
    }
    let roots = recursion_roots(datum, &simple_lam, &gram)?;
    let mut margin = f64::INFINITY;
    let mut points = Vec::new();
    for h in 1..=max_height {
        points.clear();
        lattice_points(r, h, &mut points);
        for mu in &points {
            // (mu, mu) and (mu, lambda).
            let mut mumu = 0.0;
            let mut mulam = Complex64::zero();
            for i in 0..r {
                mulam += simple_lam[i] * mu[i] as f64;
                for j in 0..r {
                    mumu += gram[i][j] * (mu[i] as f64) * (mu[j] as f64);
                }
            }
            let divisor = Complex64::new(mumu, 0.0) - 2.0 * mulam;
            let scale = 1.0 + mumu.abs() + 2.0 * mulam.norm();
            if divisor.norm() <= GENERICITY_RELATIVE * scale {
                return Err(SphericalError::NonGenericParameter {
                    mu: mu.clone(),
                    margin: divisor.norm(),
                });
            }
            margin = margin.min(divisor.norm());
            let mut rhs = Complex64::zero();
            let mut nu = vec![0u32; r];
            for root in &roots {
                // (mu, alpha) from the precomputed Gram action.
                let mut mu_alpha = 0.0;
                for i in 0..r {
                    mu_alpha += root.gram_times_coords[i] * mu[i] as f64;
                }
                let mut contrib = Complex64::zero();
                let mut k = 1u32;
                'k_loop: loop {
                    for i in 0..r {
                        let step = 2 * k * root.simple_coords[i];
                        if mu[i] < step {
                            break 'k_loop;
                        }
                        nu[i] = mu[i] - step;
                    }
                    let gamma_nu = match coefficients.get(&nu) {
                        Some(g) => *g,
                        None => Complex64::zero(),
                    };
                    if gamma_nu != Complex64::zero() {
                        let pairing = Complex64::new(
                            mu_alpha + root.rho_pair - 2.0 * k as f64 * root.norm_sq,
                            0.0,
                        ) - root.lam_pair;
                        contrib += gamma_nu * pairing;
                    }
                    k += 1;
                }
                rhs += contrib * root.multiplicity;
            }
            let value = 2.0 * rhs / divisor;
            coefficients.insert(mu.clone(), value);
        }
    }
    Ok(GammaTable {
        max_height,
        coefficients,
        genericity_margin: margin,
        num_simples: r,
    })
}

/// A certified partial series value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    /// `a^{lambda-rho} sum_mu Gamma_mu a^{-mu}` truncated at `height`.
    pub value: Complex64,
    /// Absolute bound on the discarded tail (same units as `value`).
    pub tail_bound: f64,
    /// Truncation height used.
    pub height: u32,
}

/// Simple-root pairings `alpha_i(a_log)`; `ChamberViolation` unless all
/// are strictly positive (equivalently all of `Delta^+` is positive).
fn chamber_values(datum: &RootDatum, a_log: &[f64]) -> Result<Vec<f64>, SphericalError> {
    if a_log.len() != datum.ambient_dim() {
        return Err(SphericalError::Root(RootError::DimensionMismatch {
            expected: datum.ambient_dim(),
            got: a_log.len(),
        }));
    }
    let mut vals = Vec::new();
    for &si in datum.simple_indices() {
        let v = datum.root_value_f64(si, a_log);
        if v <= 0.0 {
            return Err(SphericalError::ChamberViolation);
        }
        vals.push(v);
    }
    Ok(vals)
}

/// `exp((lambda - rho)(a_log))`.
fn leading_prefactor(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    a_log: &[f64],
) -> Complex64 {
    let rho = datum.rho_f64(RootSubset::Full);
    let mut expo = Complex64::zero();
    for ((l, r), w) in lambda.coords().iter().zip(rho.iter()).zip(a_log.iter()) {
        expo += (l - r) * *w;
    }
    expo.exp()
}

/// Evaluate the truncated series and certify its tail via the empirical
/// coefficient bound `|Gamma_mu| <= C (1+h)^d` (safety factor 10).
fn series_with_tail(
    table: &GammaTable,
    simple_vals: &[f64],
    prefactor_norm: f64,
) -> (Complex64, f64) {
    let r = table.num_simples;
    let mut sum = Complex64::zero();
    let mut max_at_height: BTreeMap<u32, f64> = BTreeMap::new();
    for (mu, gamma) in table.iter() {
        let mut t = 0.0;
        let mut h = 0u32;
        for (c, v) in mu.iter().zip(simple_vals.iter()) {
            t += *c as f64 * v;
            h += c;
        }
        sum += gamma * (-t).exp();
        if h > 0 {
            let m = max_at_height.entry(h).or_insert(0.0);
            *m = (*m).max(gamma.norm());
        }
    }
    if r == 0 {
        return (sum, 0.0);
    }
    // Fit ln M_h ~ ln C + d ln(1+h) over nonzero heights.
    let pts: Vec<(f64, f64)> = max_at_height
        .iter()
        .filter(|(_, m)| **m > 0.0)
        .map(|(h, m)| (((1 + h) as f64).ln(), m.ln()))
        .collect();
    let d = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in &pts {
            num += (x - mx) * (y - my);
            den += (x - mx) * (x - mx);
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    // C so the bound holds on every computed height, then safety 10.
    let mut c_fit = 1.0f64; // covers Gamma_0 = 1
    for (h, m) in &max_at_height {
        if *m > 0.0 {
            c_fit = c_fit.max(m / ((1 + h) as f64).powf(d));
        }
    }
    c_fit *= 10.0;
    let r_geom = simple_vals
        .iter()
        .fold(f64::NEG_INFINITY, |acc, v| acc.max(-v))
        .exp();
    debug_assert!(r_geom < 1.0);
    // Lattice points per height <= (1+h)^{r-1}.
    let power = d + (r as f64 - 1.0);
    let mut tail = 0.0f64;
    let mut h = table.max_height + 1;
    loop {
        let term = c_fit * ((1 + h) as f64).powf(power) * r_geom.powi(h as i32);
        tail += term;
        if term < 1e-300 || (tail > 0.0 && term < 1e-16 * tail) || h > table.max_height + 100_000 {
            break;
        }
        h += 1;
    }
    (sum, tail * prefactor_norm)
}

/// `Phi_lambda(exp a_log)` truncated at a fixed height, with its
/// certified tail bound.
pub fn phi_series_at_height(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    a_log: &[f64],
    height: u32,
) -> Result<PhiValue, SphericalError> {
    let simple_vals = chamber_values(datum, a_log)?;
    let table = gamma_table(datum, lambda, height)?;
    let pref = leading_prefactor(datum, lambda, a_log);
    let (sum, tail) = series_with_tail(&table, &simple_vals, pref.norm());
    Ok(PhiValue {
        value: pref * sum,
        tail_bound: tail,
        height,
    })
}

/// `Phi_lambda(exp a_log)` with the height raised adaptively until the
/// certified tail is below `target_rel` of the value.
pub fn phi_series(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    a_log: &[f64],
    target_rel: f64,
) -> Result<PhiValue, SphericalError> {
    assert!(target_rel > 0.0, "target must be positive");
    let mut height = 12u32;
    loop {
        let phi = phi_series_at_height(datum, lambda, a_log, height)?;
        if phi.tail_bound <= target_rel * phi.value.norm().max(f64::MIN_POSITIVE) {
            return Ok(phi);
        }
        if height >= MAX_HEIGHT {
            return Err(SphericalError::NoConvergence);
        }
        height = (height * 2).min(MAX_HEIGHT);
    }
}

/// Series expansion with an explicit c-function convention:
/// `phi_lambda(a) = sum_{w in W_0} c(w lambda) Phi_{w lambda}(a)`.
pub fn spherical_function_with(
    cfs: &CFunSpec,
    lambda: &SpectralParameter,
    a_log: &[f64],
    target_rel: f64,
) -> Result<Complex64, SphericalError> {
    let datum = cfs.datum();
    let group = datum.little_weyl_group()?;
    let mut sum = Complex64::zero();
    for w in &group {
        let wl = datum.weyl_act(w, lambda);
        let c = cfs.c_full(&wl);
        if c.is_pole() {
            return Err(SphericalError::PoleAtParameter);
        }
        let cval = c.value().expect("finite by the pole check");
        let phi = phi_series(datum, &wl, a_log, target_rel)?;
        sum += cval * phi.value;
    }
    Ok(sum)
}

/// Series expansion under the `kappa := 1` convention.
pub fn spherical_function(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    a_log: &[f64],
    target_rel: f64,
) -> Result<Complex64, SphericalError> {
    let cfs = CFunSpec::new(datum)?;
    spherical_function_with(&cfs, lambda, a_log, target_rel)
}

/// The compact sub-datum: same ambient space and Gram form, grading
/// vector zero, positive system `Delta_0^+`.
pub fn compact_subdatum(datum: &RootDatum) -> Result<RootDatum, RootError> {
    let d = datum.ambient_dim();
    let flat = datum.gram();
    let gram: Vec<Vec<Rat>> = (0..d).map(|i| flat[i * d..(i + 1) * d].to_vec()).collect();
    let t0 = vec![Rat::zero(); d];
    let positives: Vec<(Vec<Rat>, u32)> = datum
        .block_indices(RootSubset::Compact)
        .iter()
        .map(|&i| {
            let e = &datum.roots()[i];
            (e.coords.clone(), e.multiplicity)
        })
        .collect();
    RootDatum::new(d, gram, t0, &positives, datum.canonicalization())
}

/// Riemannian spherical function `phi^0_lambda` of `G(0)/K cap H`:
/// the expansion machinery over the compact sub-datum with `c_0`.
pub fn riemannian_spherical(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    a_log: &[f64],
    target_rel: f64,
) -> Result<Complex64, SphericalError> {
    if datum.block_indices(RootSubset::Compact).is_empty() {
        // Delta_0 empty: phi^0 = a^lambda.
        if a_log.len() != datum.ambient_dim() {
            return Err(SphericalError::Root(RootError::DimensionMismatch {
                expected: datum.ambient_dim(),
                got: a_log.len(),
            }));
        }
        let mut expo = Complex64::zero();
        for (l, w) in lambda.coords().iter().zip(a_log.iter()) {
            expo += l * *w;
        }
        return Ok(expo.exp());
    }
    let sub = compact_subdatum(datum)?;
    let lambda0 = SpectralParameter::new(&sub, lambda.coords())?;
    let cfs = CFunSpec::new(&sub)?;
    let group = sub.little_weyl_group()?;
    let mut sum = Complex64::zero();
    for w in &group {
        let wl = sub.weyl_act(w, &lambda0);
        let c = cfs.c_zero(&wl);
        if c.is_pole() {
            return Err(SphericalError::PoleAtParameter);
        }
        let cval = c.value().expect("finite by the pole check");
        let phi = phi_series(&sub, &wl, a_log, target_rel)?;
        sum += cval * phi.value;
    }
    Ok(sum)
}

/// `lambda + rho` as a parameter on the datum.
fn shift_by_rho(
    datum: &RootDatum,
    lambda: &SpectralParameter,
) -> Result<SpectralParameter, RootError> {
    let rho = datum.rho_f64(RootSubset::Full);
    let coords: Vec<Complex64> = lambda
        .coords()
        .iter()
        .zip(rho.iter())
        .map(|(l, r)| l + r)
        .collect();
    SpectralParameter::new(datum, &coords)
}

/// Spherical character with an explicit convention carrier:
/// `Theta_lambda = sum_w [c(w(lambda+rho))/c(lambda+rho)]
/// Phi_{w(lambda+rho)}`, evaluated through convention-free c-ratios so
/// the result cannot depend on `kappa` or `kappa_0`.
pub fn spherical_character_with(
    cfs: &CFunSpec,
    lambda: &SpectralParameter,
    a_log: &[f64],
    target_rel: f64,
) -> Result<Complex64, SphericalError> {
    let datum = cfs.datum();
    let mu = shift_by_rho(datum, lambda)?;
    if cfs.c_full(&mu).order != 0 {
        return Err(SphericalError::PoleAtParameter);
    }
    let group = datum.little_weyl_group()?;
    let mut sum = Complex64::zero();
    for w in &group {
        let wmu = datum.weyl_act(w, &mu);
        let ratio = cfs.c_ratio(&wmu, &mu);
        if ratio.is_pole() {
            return Err(SphericalError::PoleAtParameter);
        }
        let rval = ratio.value().expect("finite by the pole check");
        let phi = phi_series(datum, &wmu, a_log, target_rel)?;
        sum += rval * phi.value;
    }
    Ok(sum)
}

/// Spherical character, convention-free.
pub fn spherical_character(
    datum: &RootDatum,
    lambda: &SpectralParameter,
    a_log: &[f64],
    target_rel: f64,
) -> Result<Complex64, SphericalError> {
    let cfs = CFunSpec::new(datum)?;
    spherical_character_with(&cfs, lambda, a_log, target_rel)
}

/// Formal dimension under `kappa := 1`, up to one global
/// positive constant: `d(lambda) = c_{G/H}(lambda + rho_H) *
/// c_{G_C/G}(lambda + rho_G)^{-1}`.
pub fn formal_dimension(
    datum_gh: &RootDatum,
    datum_gcg: &RootDatum,
    lambda: &[Complex64],
) -> Result<f64, SphericalError> {
    if datum_gh.ambient_dim() != datum_gcg.ambient_dim() {
        return Err(SphericalError::Root(RootError::DimensionMismatch {
            expected: datum_gh.ambient_dim(),
            got: datum_gcg.ambient_dim(),
        }));
    }
    let lam_gh = SpectralParameter::new(datum_gh, lambda)?;
    let lam_gcg = SpectralParameter::new(datum_gcg, lambda)?;
    let cf_gh = CFunSpec::new(datum_gh)?;
    let cf_gcg = CFunSpec::new(datum_gcg)?;
    let c1 = cf_gh.c_full(&shift_by_rho(datum_gh, &lam_gh)?);
    let c2 = cf_gcg.c_full(&shift_by_rho(datum_gcg, &lam_gcg)?);
    if c1.order != 0 || c2.order != 0 {
        return Err(SphericalError::PoleAtParameter);
    }
    let d = c1.div(&c2);
    Ok(d.value().expect("finite by the order checks").re)
}

/// Group-case formal dimension: `d(lambda) = c_{H_C/H}(lambda + rho)^{-1}`
/// under `kappa := 1`, up to one global constant.
pub fn formal_dimension_group_case(
    datum_hc_h: &RootDatum,
    lambda: &SpectralParameter,
) -> Result<f64, SphericalError> {
    let cfs = CFunSpec::new(datum_hc_h)?;
    let c = cfs.c_full(&shift_by_rho(datum_hc_h, lambda)?);
    if c.order != 0 {
        return Err(SphericalError::PoleAtParameter);
    }
    Ok(c.recip().value().expect("finite by the order check").re)
}

/// Harish-Chandra's dimension formula:
/// `d(lambda) = prod_{alpha in Delta^+} <lambda+rho, alpha> / <rho, alpha>`.
///
/// Each factor equals `(lambda+rho)(H_alpha) / rho(H_alpha)` — the
/// `(alpha, alpha)/2` normalisations cancel — so the product is
/// manifestly invariant under rescaling the Gram form.
pub fn hc_formal_dimension(
    datum: &RootDatum,
    lambda: &SpectralParameter,
) -> Result<Complex64, SphericalError> {
    let rho = datum.rho(RootSubset::Full);
    let mut prod = Complex64::new(1.0, 0.0);
    for &i in &datum.positive_indices() {
        let entry = &datum.roots()[i];
        let den = rat_to_f64(crate::roots::dot_rat(&rho, &entry.coroot));
        if den == 0.0 {
            return Err(SphericalError::PoleAtParameter);
        }
        let num = lambda.pair_rat(&entry.coroot)? + den;
        prod *= num / den;
    }
    Ok(prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_complex_group_a, build_rank_one_lorentz, build_slr};
    use crate::cfun::KappaConvention;
    use crate::oracle::{spherical_integral, QuadratureSpec};
    use crate::roots::Canonicalization;
    use num_complex::Complex64;

    fn param(datum: &RootDatum, coords: &[f64]) -> SpectralParameter {
        SpectralParameter::from_real(datum, coords).unwrap()
    }

    fn sl2_param(datum: &RootDatum, z: f64) -> SpectralParameter {
        param(datum, &[z / 2.0, -z / 2.0])
    }

    /// Independent scalar form of the sl(2) recursion
    /// (ambient gram identity, alpha = (1, -1), m = 1):
    /// `Gamma_{2k} = (2 / (4k(2k - z))) sum_j Gamma_{2(k-j)} (4k + 1 - 4j - z)`.
    fn sl2_gamma_direct(z: f64, terms: usize) -> Vec<f64> {
        let mut g = vec![0.0; terms + 1];
        g[0] = 1.0;
        for k in 1..=terms {
            let mut rhs = 0.0;
            for j in 1..=k {
                rhs += g[k - j] * (4.0 * k as f64 + 1.0 - 4.0 * j as f64 - z);
            }
            g[k] = 2.0 * rhs / (4.0 * k as f64 * (2.0 * k as f64 - z));
        }
        g
    }

    /// Direct 2000-term sl(2) series: `e^{(z-1) t} sum_k Gamma_{2k} e^{-2kx}`
    /// with `x = alpha(a_log) = 2t`.
    fn sl2_phi_direct(z: f64, t: f64, terms: usize) -> f64 {
        let g = sl2_gamma_direct(z, terms);
        let x = 2.0 * t;
        let mut sum = 0.0;
        for (k, gk) in g.iter().enumerate() {
            sum += gk * (-2.0 * k as f64 * x).exp();
        }
        ((z - 1.0) * t).exp() * sum
    }

    #[test]
    fn gamma_table_sl2_examples() {
        let datum = build_slr(2, 1).unwrap().datum;
        let lambda = sl2_param(&datum, -3.0);
        let table = gamma_table(&datum, &lambda, 6).unwrap();
        assert_eq!(table.num_simples(), 1);
        assert_eq!(table.coefficient(&[0]), Complex64::new(1.0, 0.0));
        // Odd multiples of alpha never appear.
        assert_eq!(table.coefficient(&[1]), Complex64::new(0.0, 0.0));
        assert_eq!(table.coefficient(&[3]), Complex64::new(0.0, 0.0));
        // Gamma_{2 alpha} = (1 - z) / (2 (2 - z)) = 0.4 at z = -3.
        let g2 = table.coefficient(&[2]);
        assert!((g2 - Complex64::new(0.4, 0.0)).norm() < 1e-14);
        // Whole table against the independent scalar recursion.
        let direct = sl2_gamma_direct(-3.0, 3);
        for k in 0..=3usize {
            let got = table.coefficient(&[2 * k as u32]);
            assert!((got.re - direct[k]).abs() < 1e-13 && got.im == 0.0);
        }
        assert!(table.genericity_margin() > 1.0);
    }

    #[test]
    fn gamma_table_is_invariant_under_gram_rescaling() {
        let reference = build_slr(3, 1).unwrap().datum;
        let n = 3;
        let gram2: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rat::from_integer(2) } else { Rat::zero() })
                    .collect()
            })
            .collect();
        let positives: Vec<(Vec<Rat>, u32)> = (0..reference.num_positive())
            .map(|i| (reference.roots()[i].coords.clone(), 1))
            .collect();
        let scaled = RootDatum::new(
            n,
            gram2,
            reference.grading_vector().to_vec(),
            &positives,
            Canonicalization::SumZero,
        )
        .unwrap();
        let coords = [-2.3, -0.9, 3.2];
        let a = gamma_table(&reference, &param(&reference, &coords), 8).unwrap();
        let b = gamma_table(&scaled, &param(&scaled, &coords), 8).unwrap();
        for (mu, va) in a.iter() {
            let vb = b.coefficient(mu);
            assert!(
                (va - vb).norm() <= 1e-12 * va.norm().max(1.0),
                "Gamma at {mu:?} moved under rescaling: {va} vs {vb}"
            );
        }
    }

    #[test]
    fn phi_height_zero_is_the_prefactor() {
        let datum = build_slr(3, 1).unwrap().datum;
        let lambda = param(&datum, &[-2.0, -1.0, 3.0]);
        let a_log = [0.8, 0.1, -0.9];
        let phi = phi_series_at_height(&datum, &lambda, &a_log, 0).unwrap();
        let rho = datum.rho_f64(RootSubset::Full);
        let mut expo = Complex64::zero();
        for i in 0..3 {
            expo += (lambda.coords()[i] - rho[i]) * a_log[i];
        }
        assert_eq!(phi.value, expo.exp());
        assert_eq!(phi.height, 0);
    }

    #[test]
    fn phi_rejects_points_outside_the_chamber() {
        let datum = build_slr(3, 1).unwrap().datum;
        let lambda = param(&datum, &[-2.0, -1.0, 3.0]);
        // a_2 - a_3 < 0 breaks the second simple-root condition.
        let err = phi_series(&datum, &lambda, &[0.5, -0.6, 0.1], 1e-8).unwrap_err();
        assert_eq!(err, SphericalError::ChamberViolation);
    }

    #[test]
    fn sl2_phi_matches_a_2000_term_direct_sum() {
        let datum = build_slr(2, 1).unwrap().datum;
        for &(z, t) in &[(-3.0, 2.0), (-1.5, 1.0), (0.4, 1.5)] {
            let lambda = sl2_param(&datum, z);
            let phi = phi_series(&datum, &lambda, &[t, -t], 1e-13).unwrap();
            let direct = sl2_phi_direct(z, t, 2000);
            assert!(
                (phi.value.re - direct).abs() <= 1e-12 * direct.abs(),
                "z={z} t={t}: {} vs {direct}",
                phi.value.re
            );
            assert!(phi.value.im == 0.0);
        }
    }

    #[test]
    fn tail_bound_certifies_the_truncation() {
        let datum = build_slr(3, 1).unwrap().datum;
        let lambda = param(&datum, &[-2.3, -0.9, 3.2]);
        let a_log = [0.7, 0.1, -0.8];
        let low = phi_series_at_height(&datum, &lambda, &a_log, 16).unwrap();
        let high = phi_series_at_height(&datum, &lambda, &a_log, 64).unwrap();
        let moved = (high.value - low.value).norm();
        assert!(
            moved <= low.tail_bound,
            "tail bound {:.3e} failed to cover the observed remainder {moved:.3e}",
            low.tail_bound
        );
        // The adaptive driver reaches its relative target.
        let phi = phi_series(&datum, &lambda, &a_log, 1e-10).unwrap();
        assert!(phi.tail_bound <= 1e-10 * phi.value.norm());
    }

    #[test]
    fn non_generic_parameters_report_the_lattice_point() {
        let datum = build_slr(2, 1).unwrap().datum;
        // z = 2 makes the divisor vanish at mu = 2 alpha.
        let err = gamma_table(&datum, &sl2_param(&datum, 2.0), 4).unwrap_err();
        match err {
            SphericalError::NonGenericParameter { mu, margin } => {
                assert_eq!(mu, vec![2]);
                assert!(margin < 1e-8);
            }
            other => panic!("expected NonGenericParameter, got {other:?}"),
        }
    }

    #[test]
    fn expansion_is_weyl_invariant_in_lambda() {
        let datum = build_slr(3, 1).unwrap().datum;
        let cfs = CFunSpec::new(&datum).unwrap();
        let lambda = SpectralParameter::new(
            &datum,
            &[
                Complex64::new(-2.31, 0.4),
                Complex64::new(-0.77, 0.0),
                Complex64::new(3.08, -0.4),
            ],
        )
        .unwrap();
        let a_log = [0.9, 0.2, -1.1];
        let base = spherical_function_with(&cfs, &lambda, &a_log, 1e-12).unwrap();
        for w in datum.little_weyl_group().unwrap() {
            let moved = datum.weyl_act(&w, &lambda);
            let got = spherical_function_with(&cfs, &moved, &a_log, 1e-12).unwrap();
            assert!((got - base).norm() <= 1e-11 * base.norm());
        }
    }

    #[test]
    fn rank_one_expansion_is_a_single_term() {
        let space = build_rank_one_lorentz(2).unwrap();
        let datum = &space.datum;
        let cfs = CFunSpec::new(datum).unwrap();
        let lambda = param(datum, &[-1.6, 1.6]);
        let a_log = [0.9, -0.9];
        assert_eq!(datum.little_weyl_group().unwrap().len(), 1);
        let phi = spherical_function_with(&cfs, &lambda, &a_log, 1e-12).unwrap();
        let c = cfs.c_full(&lambda).value().unwrap();
        let series = phi_series(datum, &lambda, &a_log, 1e-12).unwrap();
        assert!((phi - c * series.value).norm() <= 1e-14 * phi.norm());
    }

    #[test]
    fn riemannian_reduces_to_a_character_without_compact_roots() {
        let space = build_rank_one_lorentz(3).unwrap();
        let lambda = param(&space.datum, &[-1.2, 1.2]);
        let a_log = [0.4, -0.4];
        let got = riemannian_spherical(&space.datum, &lambda, &a_log, 1e-10).unwrap();
        let expect = ((-1.2f64 * 0.4) + (1.2 * -0.4)).exp();
        assert!((got - Complex64::new(expect, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn riemannian_is_invariant_under_the_compact_weyl_group() {
        let datum = build_slr(3, 1).unwrap().datum;
        // W(Delta_0) swaps the last two coordinates.
        let lambda = param(&datum, &[0.3, -2.1, 1.8]);
        let swapped = param(&datum, &[0.3, 1.8, -2.1]);
        let a_log = [0.0, 0.5, -0.5];
        let a = riemannian_spherical(&datum, &lambda, &a_log, 1e-12).unwrap();
        let b = riemannian_spherical(&datum, &swapped, &a_log, 1e-12).unwrap();
        assert!((a - b).norm() <= 1e-11 * a.norm());
    }

    #[test]
    fn compact_subdatum_shape() {
        let datum = build_slr(3, 1).unwrap().datum;
        let sub = compact_subdatum(&datum).unwrap();
        assert_eq!(sub.ambient_dim(), 3);
        assert_eq!(sub.num_positive(), 1);
        assert!(sub.grading_vector().iter().all(|r| r.is_zero()));
        assert!(sub.block_indices(RootSubset::Noncompact).is_empty());
    }

    #[test]
    fn character_at_rank_one_is_phi_at_the_shifted_parameter() {
        let space = build_rank_one_lorentz(2).unwrap();
        let datum = &space.datum;
        let lambda = param(datum, &[-2.2, 2.2]);
        let a_log = [0.8, -0.8];
        let theta = spherical_character(datum, &lambda, &a_log, 1e-12).unwrap();
        // lambda + rho = (-2.2 + 1, 2.2 - 1).
        let shifted = param(datum, &[-1.2, 1.2]);
        let phi = phi_series(datum, &shifted, &a_log, 1e-12).unwrap();
        assert!((theta - phi.value).norm() <= 1e-14 * theta.norm());
    }

    #[test]
    fn character_times_c_recovers_the_spherical_function() {
        let datum = build_slr(3, 1).unwrap().datum;
        let cfs = CFunSpec::new(&datum).unwrap();
        let lambda = param(&datum, &[-2.31, -0.77, 3.08]);
        let shifted = param(&datum, &[-1.31, -0.77, 2.08]);
        let a_log = [1.0, 0.15, -1.15];
        let theta = spherical_character_with(&cfs, &lambda, &a_log, 1e-13).unwrap();
        let c = cfs.c_full(&shifted).value().unwrap();
        let phi = spherical_function_with(&cfs, &shifted, &a_log, 1e-13).unwrap();
        assert!((theta * c - phi).norm() <= 1e-12 * phi.norm());
    }

    #[test]
    fn character_is_independent_of_the_kappa_convention() {
        let datum = build_slr(3, 1).unwrap().datum;
        let lambda = param(&datum, &[-2.31, -0.77, 3.08]);
        let a_log = [0.9, 0.2, -1.1];
        let unit = CFunSpec::new(&datum).unwrap();
        let scaled = CFunSpec::with_kappa(&datum, KappaConvention::Calibrated(2.5)).unwrap();
        let a = spherical_character_with(&unit, &lambda, &a_log, 1e-13).unwrap();
        let b = spherical_character_with(&scaled, &lambda, &a_log, 1e-13).unwrap();
        assert!((a - b).norm() <= 1e-14 * a.norm());
    }

    #[test]
    fn group_case_dimension_matches_harish_chandra_up_to_one_constant() {
        let datum = build_complex_group_a(2, 1).unwrap().datum;
        let mut ratios = Vec::new();
        for k in 1..=10 {
            let lambda = sl2_param(&datum, k as f64);
            let ours = formal_dimension_group_case(&datum, &lambda).unwrap();
            let hc = hc_formal_dimension(&datum, &lambda).unwrap();
            assert!(hc.im == 0.0);
            ratios.push(ours / hc.re);
        }
        let first = ratios[0];
        for r in &ratios {
            assert!((r - first).abs() <= 1e-10 * first.abs(), "ratios: {ratios:?}");
        }
    }

    #[test]
    fn hc_dimension_examples() {
        let datum = build_slr(3, 1).unwrap().datum;
        // d(0) = prod rho(H)/rho(H) = 1 exactly.
        let zero = param(&datum, &[0.0, 0.0, 0.0]);
        assert_eq!(hc_formal_dimension(&datum, &zero).unwrap(), Complex64::new(1.0, 0.0));
        // Invariant under Gram rescaling (coroots are form-independent).
        let n = 3;
        let gram2: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rat::from_integer(2) } else { Rat::zero() })
                    .collect()
            })
            .collect();
        let positives: Vec<(Vec<Rat>, u32)> = (0..datum.num_positive())
            .map(|i| (datum.roots()[i].coords.clone(), 1))
            .collect();
        let scaled = RootDatum::new(
            n,
            gram2,
            datum.grading_vector().to_vec(),
            &positives,
            Canonicalization::SumZero,
        )
        .unwrap();
        let coords = [-2.3, -0.9, 3.2];
        let a = hc_formal_dimension(&datum, &param(&datum, &coords)).unwrap();
        let b = hc_formal_dimension(&scaled, &param(&scaled, &coords)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn formal_dimension_with_matching_data_is_trivial() {
        let datum = build_slr(3, 1).unwrap().datum;
        let lambda = [
            Complex64::new(-2.3, 0.0),
            Complex64::new(-0.9, 0.0),
            Complex64::new(3.2, 0.0),
        ];
        let d = formal_dimension(&datum, &datum, &lambda).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn integral_model_expands_with_unreflected_compact_weights() {
        // The brute-force integral pairs the plain kernel
        // a_H(a nbar a^-1)^{lambda-rho} a_H(nbar)^{-(lambda+rho)}, so its
        // expansion carries the unreflected compact weight
        // B(1/2, +lambda(H_beta)/2) per compact root instead of the
        // reflected c_zero convention B(1/2, -lambda(H_beta)/2 - 1); the
        // two conventions agree exactly when Delta_0 is empty (covered by
        // the sl(2) tests).  With the raw dX dy chart measure the match
        // is on the nose: no normalisation constant is left over.
        let space = build_slr(3, 1).unwrap();
        let datum = &space.datum;
        // Generic point of E: the frozen grid point (-2, -1, 3) is
        // unusable here because its Weyl image (-2, 3, -1) lands on a
        // c_0 pole.
        let lambda = param(datum, &[-2.1, -1.05, 3.15]);
        let cfs = CFunSpec::new(datum).unwrap();
        let group = datum.little_weyl_group().unwrap();
        let coroot = datum.roots()[datum.block_indices(RootSubset::Compact)[0]]
            .coroot
            .clone();
        let spec = QuadratureSpec::gauss(32, 2).with_target(1e-8);
        for a_log in [[1.4, 0.1, -1.5], [2.0, -0.2, -1.8]] {
            let mut series = Complex64::zero();
            for w in &group {
                let wl = datum.weyl_act(w, &lambda);
                let c_om = cfs.c_omega(&wl).value().unwrap();
                let zc = wl.pair_rat(&coroot).unwrap();
                let c0_lit = crate::special::beta(Complex64::new(0.5, 0.0), zc / 2.0)
                    .value()
                    .unwrap();
                series += c_om * c0_lit * phi_series(datum, &wl, &a_log, 1e-12).unwrap().value;
            }
            let oracle = spherical_integral(&space, &lambda, &a_log, &spec).unwrap();
            let rel = (series - oracle.value).norm() / series.norm();
            assert!(rel <= 1e-6, "a_log={a_log:?}: relative gap {rel:.3e}");
        }
    }

    #[test]
    fn continuation_beyond_the_convergence_domain() {
        // phi_lambda continues meromorphically past E_Omega.  The
        // library path (closed-form c + lattice series) is checked against
        // an independent composition: direct Beta values and the scalar
        // sl(2) recursion summed to depth 2000.
        let datum = build_slr(2, 1).unwrap().datum;
        let t = 1.25;
        for &z in &[1.5, 2.5, 3.4] {
            let lambda = sl2_param(&datum, z);
            let got = spherical_function(&datum, &lambda, &[t, -t], 1e-13).unwrap();
            let c_plus = crate::special::beta(
                Complex64::new(0.5, 0.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            )
            .value()
            .unwrap();
            // W_0 = W(Delta_0) is trivial for sl(2) (Delta_0 is empty),
            // so the expansion is the single term c(lambda) Phi_lambda.
            let direct = c_plus * sl2_phi_direct(z, t, 2000);
            assert!(
                (got - direct).norm() <= 1e-10 * direct.norm(),
                "z={z}: {got} vs {direct}"
            );
        }
    }

    #[test]
    fn regularity_of_phi_over_n_omega_at_a_c_pole() {
        // phi_lambda blows up like the n_Omega pole as lambda
        // approaches z = 1, but phi / n_Omega stays regular.
        let datum = build_slr(2, 1).unwrap().datum;
        let cfs = CFunSpec::new(&datum).unwrap();
        let a_log = [1.0, -1.0];
        let probe = |eps: f64| -> (f64, Complex64) {
            let lambda = sl2_param(&datum, 1.0 + eps);
            let phi = spherical_function(&datum, &lambda, &a_log, 1e-12).unwrap();
            let n = cfs.n_omega(&lambda).value().unwrap();
            (phi.norm(), phi / n)
        };
        let (mag2, reg2) = probe(1e-2);
        let (mag3, reg3) = probe(1e-3);
        let growth = mag3 / mag2;
        assert!(growth > 5.0, "expected ~1/eps blowup, growth {growth:.3}");
        let drift = (reg3 - reg2).norm() / reg2.norm();
        assert!(drift < 0.1, "regularised values drifted by {drift:.3e}");
    }
}
