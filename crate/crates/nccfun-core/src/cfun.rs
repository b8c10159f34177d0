//! Closed-form c-functions: the noncompact product formula, the
//! Gindikin-Karpelevic compact factor, their product, convergence domains,
//! the numerator, and exact pole reports.
//!
//! Conventions.  All evaluations use the "hat" normalisation `kappa := 1`
//! unless a calibrated `kappa` is supplied; the compact factor carries its
//! own constant `kappa_0`, fixed once per datum by the anchor
//! `c_0(-3 rho_0) = 1` (the unique point where the defining integral
//! reduces to the measure normalisation).  Everything downstream that must
//! be convention-free consumes [`CFunSpec::c_ratio`], which never touches
//! either constant.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::roots::{
    rat_to_f64, Rat, RootDatum, RootError, RootSubset, SpectralParameter,
};
use crate::special::{beta, log_gamma, CValue};

/// Errors from c-function construction and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum CFunError {
    /// The compact root block is non-reduced; the adopted factor does not
    /// apply.
    UnreducedCompactPart,
    /// The `-3 rho_0` anchor is singular for this datum, so `kappa_0`
    /// cannot be fixed.
    AnchorSingular,
    /// A pole-report line is degenerate; the message says how.
    DegenerateDirection(String),
    /// Underlying root-datum error.
    Root(RootError),
}

impl From<RootError> for CFunError {
    fn from(e: RootError) -> Self {
        CFunError::Root(e)
    }
}

impl core::fmt::Display for CFunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CFunError::UnreducedCompactPart => {
                write!(f, "compact root block is non-reduced")
            }
            CFunError::AnchorSingular => {
                write!(f, "c_0 anchor point -3 rho_0 is singular for this datum")
            }
            CFunError::DegenerateDirection(msg) => write!(f, "degenerate direction: {msg}"),
            CFunError::Root(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CFunError {}

/// Normalisation convention for the unknown positive constant `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaConvention {
    /// `kappa := 1` ("hat" functions).
    Unit,
    /// A calibrated positive value (e.g. the oracle-measured `1/pi` for
    /// `sl(2)`).
    Calibrated(f64),
}

/// Evaluator for the c-functions of one root datum.
///
/// `kappa_0` is computed eagerly at construction, so evaluation is
/// read-only afterwards.
#[derive(Debug, Clone)]
pub struct CFunSpec {
    datum: RootDatum,
    kappa: KappaConvention,
    kappa0_ln: f64,
}

impl CFunSpec {
    /// Build with the unit kappa convention.
    pub fn new(datum: &RootDatum) -> Result<Self, CFunError> {
        CFunSpec::with_kappa(datum, KappaConvention::Unit)
    }

    /// Build with an explicit kappa convention.
    pub fn with_kappa(datum: &RootDatum, kappa: KappaConvention) -> Result<Self, CFunError> {
        if let KappaConvention::Calibrated(v) = kappa {
            assert!(v > 0.0, "calibrated kappa must be positive");
        }
        // Non-reduced Delta_0 is rejected at datum construction; re-check
        // defensively (custom call paths could bypass catalog).
        let compact = datum.block_indices(RootSubset::Compact);
        for &i in &compact {
            let doubled: Vec<Rat> = datum.roots()[i]
                .coords
                .iter()
                .map(|c| *c * Rat::from_integer(2))
                .collect();
            if datum.index_of_root(&doubled).is_some() {
                return Err(CFunError::UnreducedCompactPart);
            }
        }
        // kappa_0 from the anchor c_0(-3 rho_0) = 1.
        let rho0 = datum.rho(RootSubset::Compact);
        let mut anchor = CValue::one();
        for &i in &compact {
            let r = &datum.roots()[i];
            // lambda(H_beta) at lambda = -3 rho_0.
            let pairing = -Rat::from_integer(3) * crate::roots::dot_rat(&rho0, &r.coroot);
            let m = r.multiplicity as f64;
            let b = beta(
                Complex64::new(m / 2.0, 0.0),
                Complex64::new(-rat_to_f64(pairing) / 2.0 - m, 0.0),
            );
            anchor = anchor.mul(&b);
        }
        if anchor.order != 0 {
            return Err(CFunError::AnchorSingular);
        }
        Ok(CFunSpec {
            datum: datum.clone(),
            kappa,
            kappa0_ln: -anchor.log_modulus,
        })
    }

    /// The underlying datum.
    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    /// The kappa convention in force.
    pub fn kappa(&self) -> KappaConvention {
        self.kappa
    }

    /// `ln kappa_0` (anchor-normalised compact constant).
    pub fn kappa0_ln(&self) -> f64 {
        self.kappa0_ln
    }

    fn kappa_ln(&self) -> f64 {
        match self.kappa {
            KappaConvention::Unit => 0.0,
            KappaConvention::Calibrated(v) => v.ln(),
        }
    }

    /// Strict convergence domain of the `Omega` integral:
    /// `Re lambda(H_alpha) < 2 - m_alpha` on all noncompact positive
    /// roots (boundary counts as outside).
    pub fn in_e_omega(&self, lambda: &SpectralParameter) -> bool {
        in_e_omega_datum(&self.datum, lambda)
    }

    /// Convergence domain of the compact factor's defining integral:
    /// `Re lambda(H_beta) < -2 m_beta` on all compact positive roots.
    pub fn in_e_zero(&self, lambda: &SpectralParameter) -> bool {
        in_e_zero_datum(&self.datum, lambda)
    }

    /// Full-integral domain: both conditions.
    pub fn in_e(&self, lambda: &SpectralParameter) -> bool {
        self.in_e_omega(lambda) && self.in_e_zero(lambda)
    }

    /// Product of the `Omega` Beta factors for `lambda`, without any
    /// constants.
    fn c_omega_hat(&self, lambda: &SpectralParameter) -> CValue {
        let mut acc = CValue::one();
        for &i in &self.datum.block_indices(RootSubset::Noncompact) {
            let r = &self.datum.roots()[i];
            let z = lambda.pair_rat(&r.coroot).expect("dimension checked");
            let m = r.multiplicity as f64;
            let b = beta(
                Complex64::new(m / 2.0, 0.0),
                -z / 2.0 + (1.0 - m / 2.0),
            );
            acc = acc.mul(&b);
        }
        acc
    }

    /// Compact Beta factors for `lambda`, without `kappa_0`.
    fn c_zero_hat(&self, lambda: &SpectralParameter) -> CValue {
        let mut acc = CValue::one();
        for &i in &self.datum.block_indices(RootSubset::Compact) {
            let r = &self.datum.roots()[i];
            let z = lambda.pair_rat(&r.coroot).expect("dimension checked");
            let m = r.multiplicity as f64;
            let b = beta(Complex64::new(m / 2.0, 0.0), -z / 2.0 - m);
            acc = acc.mul(&b);
        }
        acc
    }

    /// The noncompact factor `c_Omega(lambda)` (product of Beta
    /// factors, `kappa` per the convention).
    pub fn c_omega(&self, lambda: &SpectralParameter) -> CValue {
        self.c_omega_hat(lambda).scale_ln(self.kappa_ln())
    }

    /// The compact factor `c_0(lambda)`, anchor-normalised so that
    /// `c_0(-3 rho_0) = 1`.
    pub fn c_zero(&self, lambda: &SpectralParameter) -> CValue {
        self.c_zero_hat(lambda).scale_ln(self.kappa0_ln)
    }

    /// The full c-function `c = c_0 * c_Omega`.
    pub fn c_full(&self, lambda: &SpectralParameter) -> CValue {
        self.c_zero(lambda).mul(&self.c_omega(lambda))
    }

    /// Convention-free ratio `c(lambda_1) / c(lambda_2)`: neither `kappa`
    /// nor `kappa_0` is ever added, so conventions cannot leak in.
    pub fn c_ratio(&self, lambda1: &SpectralParameter, lambda2: &SpectralParameter) -> CValue {
        let n1 = self.c_omega_hat(lambda1).mul(&self.c_zero_hat(lambda1));
        let n2 = self.c_omega_hat(lambda2).mul(&self.c_zero_hat(lambda2));
        n1.div(&n2)
    }

    /// The numerator `n_Omega(lambda)`: the lambda-dependent Gamma factors
    /// of `c_Omega` (constants dropped).
    pub fn n_omega(&self, lambda: &SpectralParameter) -> CValue {
        let mut acc = CValue::one();
        for &i in &self.datum.block_indices(RootSubset::Noncompact) {
            let r = &self.datum.roots()[i];
            let z = lambda.pair_rat(&r.coroot).expect("dimension checked");
            let m = r.multiplicity as f64;
            let g = log_gamma(-z / 2.0 + (1.0 - m / 2.0));
            acc = acc.mul(&g);
        }
        acc
    }
}

/// `Re lambda(H_alpha) < 2 - m_alpha` on all noncompact positive roots
/// (strict; the convergence domain of the `Omega` integral).
pub fn in_e_omega_datum(datum: &RootDatum, lambda: &SpectralParameter) -> bool {
    datum.block_indices(RootSubset::Noncompact).iter().all(|&i| {
        let r = &datum.roots()[i];
        let v = lambda.pair_rat(&r.coroot).expect("dimension checked");
        v.re < 2.0 - r.multiplicity as f64
    })
}

/// `Re lambda(H_beta) < -2 m_beta` on all compact positive roots
/// (strict; the convergence domain of the `N_0^-` integral).
pub fn in_e_zero_datum(datum: &RootDatum, lambda: &SpectralParameter) -> bool {
    datum.block_indices(RootSubset::Compact).iter().all(|&i| {
        let r = &datum.roots()[i];
        let v = lambda.pair_rat(&r.coroot).expect("dimension checked");
        v.re < -2.0 * r.multiplicity as f64
    })
}

/// The specialised main-example formula (4.8) for `Sl(n, R)/SO(p, q)`:
/// `pi^{pq/2} prod_{i <= p < j} Gamma(x_{ij} + 1/2) / Gamma(x_{ij} + 1)`
/// with `x_{ij} = (lambda_j - lambda_i)/2` (`kappa := 1`).
pub fn c_main_example(n: usize, p: usize, lambda: &[Complex64]) -> CValue {
    assert!(p >= 1 && p < n, "main example requires 1 <= p < n");
    assert_eq!(lambda.len(), n, "lambda length must equal n");
    let q = n - p;
    let mut acc = CValue::from_polar_ln((p * q) as f64 / 2.0 * core::f64::consts::PI.ln(), 0.0);
    for i in 0..p {
        for j in p..n {
            let x = (lambda[j] - lambda[i]) / 2.0;
            let num = log_gamma(x + 0.5);
            let den = log_gamma(x + 1.0);
            acc = acc.mul(&num.div(&den));
        }
    }
    acc
}

/// One pole of `c_Omega` on a parameter line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoleHit {
    /// Exact line parameter of the pole.
    pub t: Rat,
    /// Total pole order (sum over contributing roots).
    pub total_order: u32,
    /// Contributing noncompact positive roots (index into
    /// `datum.roots()`) with their individual orders.
    pub contributions: Vec<(usize, u32)>,
}

/// Exact poles of `c_Omega` along the line `lambda_0 + t * direction`,
/// for `t` in the closed window.
///
/// Solves `lambda(H_alpha) = 2 - m_alpha + 2k`, `k` a nonnegative integer,
/// per noncompact positive root, entirely in rational arithmetic.
pub fn pole_report(
    datum: &RootDatum,
    lambda0: &[Rat],
    direction: &[Rat],
    window: (Rat, Rat),
) -> Result<Vec<PoleHit>, CFunError> {
    if direction.iter().all(|d| d.is_zero()) {
        return Err(CFunError::DegenerateDirection(String::from(
            "direction is the zero vector",
        )));
    }
    let (t_lo, t_hi) = window;
    if t_lo > t_hi {
        return Err(CFunError::DegenerateDirection(String::from(
            "window is empty (lower bound exceeds upper bound)",
        )));
    }
    let mut any_varying = false;
    let mut hits: alloc::collections::BTreeMap<Rat, Vec<(usize, u32)>> =
        alloc::collections::BTreeMap::new();
    for &i in &datum.block_indices(RootSubset::Noncompact) {
        let r = &datum.roots()[i];
        let a = datum.pair_rat(lambda0, &r.coroot)?;
        let b = datum.pair_rat(direction, &r.coroot)?;
        let base = Rat::from_integer(2 - r.multiplicity as i128);
        if b.is_zero() {
            // Constant pairing: either never a pole, or identically one.
            let diff = a - base;
            let half = diff / Rat::from_integer(2);
            if half.is_integer() && half >= Rat::zero() {
                return Err(CFunError::DegenerateDirection(String::from(
                    "line lies entirely inside a pole hyperplane (constant singular pairing)",
                )));
            }
            continue;
        }
        any_varying = true;
        // t(k) = (base + 2k - a) / b; find integer k >= 0 with t in window.
        // t in [t_lo, t_hi]  <=>  k in an exact rational interval.
        let k_at = |t: Rat| -> Rat { (t * b + a - base) / Rat::from_integer(2) };
        let (k_a, k_b) = (k_at(t_lo), k_at(t_hi));
        let (k_min, k_max) = if k_a <= k_b { (k_a, k_b) } else { (k_b, k_a) };
        let k_start = k_min.ceil().to_integer().max(0);
        let k_end = k_max.floor().to_integer();
        let mut k = k_start;
        while k <= k_end {
            let t = (base + Rat::from_integer(2 * k) - a) / b;
            debug_assert!(t >= t_lo && t <= t_hi);
            hits.entry(t).or_default().push((i, 1));
            k += 1;
        }
    }
    if !any_varying {
        return Err(CFunError::DegenerateDirection(String::from(
            "every root pairing is constant along the line and none is singular",
        )));
    }
    Ok(hits
        .into_iter()
        .map(|(t, contributions)| PoleHit {
            total_order: contributions.iter().map(|(_, o)| o).sum(),
            t,
            contributions,
        })
        .collect())
}

/// Convenience: exact rational `rho` pairing for anchor-style points
/// (`lambda = s * rho_subset`).
pub fn scaled_rho(datum: &RootDatum, subset: RootSubset, scale: Rat) -> Vec<Rat> {
    datum
        .rho(subset)
        .iter()
        .map(|r| *r * scale)
        .collect()
}

/// Floating-point coordinates of `scale * rho_subset`.
pub fn scaled_rho_f64(datum: &RootDatum, subset: RootSubset, scale: f64) -> Vec<f64> {
    datum
        .rho(subset)
        .iter()
        .map(|r| rat_to_f64(*r) * scale)
        .collect()
}

/// Helper for tests and the CLI: build a `SpectralParameter` from real
/// coordinates on the datum.
pub fn real_parameter(datum: &RootDatum, coords: &[f64]) -> SpectralParameter {
    SpectralParameter::from_real(datum, coords).expect("coordinate length matches datum")
}

/// Helper: `lambda = base + t * dir` as a `SpectralParameter`.
pub fn line_parameter(
    datum: &RootDatum,
    base: &[f64],
    dir: &[f64],
    t: f64,
) -> SpectralParameter {
    let coords: Vec<Complex64> = base
        .iter()
        .zip(dir.iter())
        .map(|(b, d)| Complex64::new(b + t * d, 0.0))
        .collect();
    SpectralParameter::new(datum, &coords).expect("coordinate length matches datum")
}

/// Exact-to-float conversion for rational parameter points.
pub fn rat_coords_to_f64(coords: &[Rat]) -> Vec<f64> {
    coords.iter().map(|r| rat_to_f64(*r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_rank_one_lorentz, build_slr};
    use crate::roots::SpectralParameter;
    use core::f64::consts::PI;

    fn param(datum: &RootDatum, coords: &[f64]) -> SpectralParameter {
        SpectralParameter::from_real(datum, coords).expect("dimensions match")
    }

    fn cparam(datum: &RootDatum, coords: &[(f64, f64)]) -> SpectralParameter {
        let c: Vec<Complex64> = coords
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        SpectralParameter::new(datum, &c).expect("dimensions match")
    }

    /// sl(2) parameter with `lambda(H_alpha) = z`.
    fn sl2_param(datum: &RootDatum, z: f64) -> SpectralParameter {
        param(datum, &[z / 2.0, -z / 2.0])
    }

    #[test]
    fn e_omega_examples() {
        let sl2 = build_slr(2, 1).unwrap().datum;
        let spec = CFunSpec::new(&sl2).unwrap();
        assert!(spec.in_e_omega(&sl2_param(&sl2, 0.0)));
        // The boundary z = 2 - m = 1 counts as outside.
        assert!(!spec.in_e_omega(&sl2_param(&sl2, 1.0)));
        assert!(!spec.in_e_omega(&sl2_param(&sl2, 1.5)));
        let d312 = build_slr(3, 1).unwrap().datum;
        let spec312 = CFunSpec::new(&d312).unwrap();
        assert!(spec312.in_e_omega(&param(&d312, &[-2.0, -1.0, 3.0])));
    }

    #[test]
    fn c_omega_sl2_examples() {
        let sl2 = build_slr(2, 1).unwrap().datum;
        let spec = CFunSpec::new(&sl2).unwrap();
        // z = 0: B(1/2, 1/2) = pi under kappa := 1 ...
        let at0 = spec.c_omega(&sl2_param(&sl2, 0.0)).value().unwrap();
        assert!((at0 - Complex64::new(PI, 0.0)).norm() < 1e-13);
        // ... and the calibrated kappa = 1/pi gives c(0) = 1.
        let cal = CFunSpec::with_kappa(&sl2, KappaConvention::Calibrated(1.0 / PI)).unwrap();
        let at0 = cal.c_omega(&sl2_param(&sl2, 0.0)).value().unwrap();
        assert!((at0 - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        // z = -3: B(1/2, 2) = 4/3.
        let atm3 = spec.c_full(&sl2_param(&sl2, -3.0)).value().unwrap();
        assert!((atm3 - Complex64::new(4.0 / 3.0, 0.0)).norm() < 1e-13);
        // z = 1: pole of order 1 (B(1/2, 0) singular).
        let pole = spec.c_omega(&sl2_param(&sl2, 1.0));
        assert!(pole.is_pole());
        assert_eq!(pole.pole_order(), 1);
    }

    #[test]
    fn c_values_slr312_frozen_point() {
        let datum = build_slr(3, 1).unwrap().datum;
        let spec = CFunSpec::new(&datum).unwrap();
        let lambda = param(&datum, &[-2.0, -1.0, 3.0]);
        // Pairings -1 and -5 on Delta_n^+: B(1/2,1) B(1/2,3) = 2 * 16/15.
        let co = spec.c_omega(&lambda).value().unwrap();
        assert!((co - Complex64::new(32.0 / 15.0, 0.0)).norm() < 1e-13);
        // lambda(H_{eps2 - eps3}) = -4: c_0 = B(1/2,1)/B(1/2,1/2) = 2/pi.
        let cz = spec.c_zero(&lambda).value().unwrap();
        assert!((cz - Complex64::new(2.0 / PI, 0.0)).norm() < 1e-13);
        let cf = spec.c_full(&lambda).value().unwrap();
        assert!((cf - Complex64::new(64.0 / (15.0 * PI), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn c_zero_is_one_when_compact_part_is_empty() {
        let datum = build_rank_one_lorentz(3).unwrap().datum;
        let spec = CFunSpec::new(&datum).unwrap();
        let lambda = param(&datum, &[-2.0, 2.0]);
        let cz = spec.c_zero(&lambda);
        assert_eq!(cz.log_modulus, 0.0);
        assert_eq!(cz.order, 0);
        // c_full = c_omega exactly when Delta_0 is empty.
        let cf = spec.c_full(&lambda);
        let co = spec.c_omega(&lambda);
        assert_eq!(cf.log_modulus, co.log_modulus);
        assert_eq!(cf.phase, co.phase);
    }

    #[test]
    fn c_zero_anchor_holds_across_the_catalog() {
        for datum in [
            build_slr(3, 1).unwrap().datum,
            build_slr(4, 2).unwrap().datum,
            crate::catalog::build_complex_group_a(3, 1).unwrap().datum,
        ] {
            let spec = CFunSpec::new(&datum).unwrap();
            let anchor = crate::cfun::scaled_rho_f64(&datum, RootSubset::Compact, -3.0);
            let lambda = param(&datum, &anchor);
            let cz = spec.c_zero(&lambda).value().unwrap();
            assert!(
                (cz - Complex64::new(1.0, 0.0)).norm() < 1e-13,
                "anchor violated: c_0(-3 rho_0) = {cz}"
            );
        }
    }

    #[test]
    fn main_example_matches_product_formula_at_the_frozen_point() {
        let datum = build_slr(3, 1).unwrap().datum;
        let spec = CFunSpec::new(&datum).unwrap();
        let lambda = param(&datum, &[-2.0, -1.0, 3.0]);
        let main = c_main_example(3, 1, lambda.coords()).value().unwrap();
        assert!((main - Complex64::new(32.0 / 15.0, 0.0)).norm() < 1e-13);
        let prod = spec.c_omega(&lambda).value().unwrap();
        assert!((main - prod).norm() < 1e-13);
    }

    #[test]
    fn main_example_reduces_to_sl2_beta() {
        let datum = build_slr(2, 1).unwrap().datum;
        for &z in &[-4.0, -2.5, -1.0, 0.0, 0.5] {
            let lambda = sl2_param(&datum, z);
            let main = c_main_example(2, 1, lambda.coords()).value().unwrap();
            let b = crate::special::beta(
                Complex64::new(0.5, 0.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            )
            .value()
            .unwrap();
            assert!((main - b).norm() < 1e-13 * b.norm().max(1.0));
        }
    }

    #[test]
    fn main_example_pole_location() {
        let datum = build_slr(2, 1).unwrap().datum;
        // Pole iff some (lambda_j - lambda_i)/2 + 1/2 is a nonpositive
        // integer: z = 1 gives exponent 0.
        let pole = c_main_example(2, 1, sl2_param(&datum, 1.0).coords());
        assert!(pole.is_pole());
        let fine = c_main_example(2, 1, sl2_param(&datum, 0.99).coords());
        assert!(!fine.is_pole());
    }

    #[test]
    fn rank_one_closed_form_ratio_is_constant() {
        // c_omega(lambda) / B(n/2, 1 - (z+n)/2) constant over a 20-point
        // grid (rank-one closed form vs the product formula); the two agree, so pin
        // the constant to 1 with spread 1e-10.
        for n in 1..=4usize {
            let datum = build_rank_one_lorentz(n).unwrap().datum;
            let spec = CFunSpec::new(&datum).unwrap();
            let entry = &datum.roots()[datum.classify().n_plus[0]];
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..20 {
                let z = -9.0 + 0.45 * k as f64; // stays inside z < 2 - n
                let lambda = param(&datum, &[z / 2.0, -z / 2.0]);
                let zval = lambda.pair_rat(&entry.coroot).unwrap().re;
                let b = crate::special::beta(
                    Complex64::new(n as f64 / 2.0, 0.0),
                    Complex64::new(1.0 - (zval + n as f64) / 2.0, 0.0),
                );
                let ratio = spec.c_omega(&lambda).div(&b).value().unwrap();
                lo = lo.min(ratio.re);
                hi = hi.max(ratio.re);
                assert!(ratio.im.abs() < 1e-14);
            }
            assert!(hi - lo <= 1e-10, "spread {} at n = {n}", hi - lo);
        }
    }

    #[test]
    fn splitting_identity_in_log_scale() {
        let datum = build_slr(3, 1).unwrap().datum;
        let spec = CFunSpec::new(&datum).unwrap();
        for coords in [
            [(-2.0, 0.0), (-1.0, 0.0), (3.0, 0.0)],
            [(-3.5, 0.25), (0.1, -1.0), (3.4, 0.75)],
            [(-2.2, -0.4), (-0.9, 0.0), (3.1, 0.4)],
        ] {
            let lambda = cparam(&datum, &coords);
            let full = spec.c_full(&lambda);
            let split = spec.c_zero(&lambda).mul(&spec.c_omega(&lambda));
            assert!((full.log_modulus - split.log_modulus).abs() <= 1e-14);
            assert!((full.phase - split.phase).abs() <= 1e-14);
            assert_eq!(full.order, split.order);
        }
    }

    #[test]
    fn n_omega_cancels_every_c_omega_pole() {
        let sl2 = build_slr(2, 1).unwrap().datum;
        let spec = CFunSpec::new(&sl2).unwrap();
        for &z in &[1.0, 3.0, 5.0] {
            let lambda = sl2_param(&sl2, z);
            let c = spec.c_omega(&lambda);
            assert!(c.is_pole());
            let reg = c.div(&spec.n_omega(&lambda));
            assert_eq!(reg.order, 0, "pole left uncancelled at z = {z}");
            assert!(reg.value().unwrap().norm().is_finite());
        }
        // Same on the pole hyperplane lambda(H_{eps1-eps2}) = 1 of
        // SlR(3,1,2).
        let datum = build_slr(3, 1).unwrap().datum;
        let spec = CFunSpec::new(&datum).unwrap();
        let lambda = param(&datum, &[0.4, -0.6, 0.2]);
        let c = spec.c_omega(&lambda);
        assert!(c.is_pole());
        let reg = c.div(&spec.n_omega(&lambda));
        assert_eq!(reg.order, 0);
    }

    #[test]
    fn pole_report_sl2_odd_integers() {
        let datum = build_slr(2, 1).unwrap().datum;
        let zero = vec![Rat::from_integer(0); 2];
        // Line lambda = t * alpha/... : direction with lambda(H_alpha) = t.
        let dir = vec![Rat::new(1, 2), Rat::new(-1, 2)];
        let hits = pole_report(&datum, &zero, &dir, (Rat::from_integer(-10), Rat::from_integer(10)))
            .unwrap();
        let ts: Vec<i128> = hits
            .iter()
            .map(|h| {
                assert!(h.t.is_integer());
                assert_eq!(h.total_order, 1);
                h.t.to_integer()
            })
            .collect();
        assert_eq!(ts, vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn pole_report_rejects_zero_direction() {
        let datum = build_slr(2, 1).unwrap().datum;
        let zero = vec![Rat::from_integer(0); 2];
        assert!(matches!(
            pole_report(&datum, &zero, &zero, (Rat::from_integer(0), Rat::from_integer(1))),
            Err(CFunError::DegenerateDirection(_))
        ));
    }

    #[test]
    fn pole_report_weyl_invariant_for_invariant_directions() {
        // Direction T0 is W_0-invariant, so the pole set along
        // lambda_0 + t T0 matches the one along w lambda_0 + t T0.
        let datum = build_slr(3, 1).unwrap().datum;
        let lambda0 = vec![Rat::from_integer(0), Rat::from_integer(1), Rat::from_integer(-1)];
        let dir = datum.grading_vector().to_vec();
        let w = datum
            .little_weyl_group()
            .unwrap()
            .into_iter()
            .find(|w| !w.is_identity())
            .unwrap();
        let moved = w.act_rat(&lambda0);
        let window = (Rat::from_integer(-20), Rat::from_integer(20));
        let a = pole_report(&datum, &lambda0, &dir, window).unwrap();
        let b = pole_report(&datum, &moved, &dir, window).unwrap();
        let ta: Vec<Rat> = a.iter().map(|h| h.t).collect();
        let tb: Vec<Rat> = b.iter().map(|h| h.t).collect();
        assert_eq!(ta, tb);
    }
}
