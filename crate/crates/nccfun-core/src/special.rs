//! Complex log-Gamma and Beta in a log-scale representation with explicit
//! pole and zero bookkeeping.
//!
//! All closed forms in this crate are products of Gamma and Beta factors
//! over root systems; in higher rank those products overflow `f64` long
//! before the final value does, so every factor is kept as a [`CValue`]:
//! `exp(log_modulus) * e^{i phase}` together with a signed singularity
//! order.  Poles are values, not errors.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Tolerance for recognising a nonpositive integer argument as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// A nonzero complex value in log-scale, or a pole/zero of known order.
///
/// Finite values reconstruct as `exp(log_modulus) * exp(i * phase)`.  When
/// `order > 0` the value is a pole of that order and `log_modulus`/`phase`
/// carry the *regularised* part (the limit of `(z - z0)^order * f(z)`,
/// composed multiplicatively through products and quotients); callers must
/// check [`CValue::is_pole`] before treating the pair as a value.  When
/// `order < 0` the value is an exact zero of order `-order`, with the
/// analogous regularised part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CValue {
    /// Natural log of the modulus of the (regularised) value.
    pub log_modulus: f64,
    /// Argument of the (regularised) value, wrapped to `(-pi, pi]`.
    pub phase: f64,
    /// Signed singularity order: positive = pole, negative = zero.
    pub order: i32,
}

impl CValue {
    /// The multiplicative unit.
    pub fn one() -> Self {
        CValue {
            log_modulus: 0.0,
            phase: 0.0,
            order: 0,
        }
    }

    /// A finite nonzero value.
    pub fn finite(value: Complex64) -> Self {
        debug_assert!(value.norm() > 0.0, "finite CValue must be nonzero");
        CValue {
            log_modulus: value.norm().ln(),
            phase: wrap_phase(value.arg()),
            order: 0,
        }
    }

    /// A value specified in log-scale: `exp(log_modulus) * e^{i phase}`.
    pub fn from_polar_ln(log_modulus: f64, phase: f64) -> Self {
        CValue {
            log_modulus,
            phase: wrap_phase(phase),
            order: 0,
        }
    }

    /// A pole of the given order with regularised part `exp(log_modulus) *
    /// e^{i phase}`.
    pub fn pole(order: u32, log_modulus: f64, phase: f64) -> Self {
        debug_assert!(order >= 1);
        CValue {
            log_modulus,
            phase: wrap_phase(phase),
            order: order as i32,
        }
    }

    /// Whether the value is a pole.
    pub fn is_pole(&self) -> bool {
        self.order > 0
    }

    /// Pole order (0 for finite values and zeros).
    pub fn pole_order(&self) -> u32 {
        if self.order > 0 {
            self.order as u32
        } else {
            0
        }
    }

    /// Whether the value is an exact zero.
    pub fn is_zero(&self) -> bool {
        self.order < 0
    }

    /// The value as a complex number: `None` for poles, `Some(0)` for
    /// zeros, the reconstructed value otherwise.
    pub fn value(&self) -> Option<Complex64> {
        if self.order > 0 {
            None
        } else if self.order < 0 {
            Some(Complex64::new(0.0, 0.0))
        } else {
            Some(Complex64::from_polar(self.log_modulus.exp(), self.phase))
        }
    }

    /// The regularised part as a complex number, valid for any order.
    pub fn regularised(&self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }

    /// Product of two values; orders add, regularised parts multiply.
    pub fn mul(&self, other: &CValue) -> CValue {
        CValue {
            log_modulus: self.log_modulus + other.log_modulus,
            phase: wrap_phase(self.phase + other.phase),
            order: self.order + other.order,
        }
    }

    /// Quotient of two values; orders subtract.
    pub fn div(&self, other: &CValue) -> CValue {
        CValue {
            log_modulus: self.log_modulus - other.log_modulus,
            phase: wrap_phase(self.phase - other.phase),
            order: self.order - other.order,
        }
    }

    /// Multiplicative inverse; poles become zeros and vice versa.
    pub fn recip(&self) -> CValue {
        CValue {
            log_modulus: -self.log_modulus,
            phase: wrap_phase(-self.phase),
            order: -self.order,
        }
    }

    /// Multiply by the positive real scalar `exp(dln)`.
    pub fn scale_ln(&self, dln: f64) -> CValue {
        CValue {
            log_modulus: self.log_modulus + dln,
            phase: self.phase,
            order: self.order,
        }
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let shifted = phase + PI;
    let mut w = shifted - (shifted / (2.0 * PI)).floor() * (2.0 * PI) - PI;
    if w <= -PI {
        w += 2.0 * PI;
    }
    // Euclidean reduction lands in [-pi, pi); move the closed end to +pi.
    if w == -PI {
        w = PI;
    }
    w
}

// Lanczos approximation, g = 7, 9 terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Log-Gamma core for `Re z >= 0.5` (any consistent branch).
fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEFF[0], 0.0);
    for (i, &c) in LANCZOS_COEFF.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    let half_log_2pi = 0.918_938_533_204_672_7;
    (zm1 + 0.5) * t.ln() - t + half_log_2pi + acc.ln()
}

/// `log(sin(pi z))` without overflow for large `|Im z|` (branch is only
/// consistent up to multiples of `2 pi i`, which is harmless in log-scale
/// representations whose phase is wrapped).
fn log_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let half_log = Complex64::new(core::f64::consts::LN_2, 0.0);
    if z.im >= 0.0 {
        // sin(pi z) = -e^{-i pi z} (1 - e^{2 i pi z}) / (2 i)
        let small = (i * PI * z * 2.0).exp();
        -i * PI * z + (Complex64::new(1.0, 0.0) - small).ln() - half_log
            + Complex64::new(0.0, PI / 2.0)
    } else {
        // sin(pi z) = e^{i pi z} (1 - e^{-2 i pi z}) / (2 i)
        let small = (-i * PI * z * 2.0).exp();
        i * PI * z + (Complex64::new(1.0, 0.0) - small).ln() - half_log
            - Complex64::new(0.0, PI / 2.0)
    }
}

/// Log-Gamma as a complex number for `z` away from the poles; the branch is
/// consistent modulo `2 pi i` (exact on the principal branch for
/// `Re z >= 0.5`).
pub fn log_gamma_complex(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lanczos_log_gamma(z)
    } else {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
        Complex64::new(PI.ln(), 0.0) - log_sin_pi(z) - lanczos_log_gamma(Complex64::new(1.0, 0.0) - z)
    }
}

/// Nearest nonpositive-integer pole of Gamma, if `z` is within
/// [`POLE_TOLERANCE`] of one.
fn gamma_pole_at(z: Complex64) -> Option<u32> {
    if z.im.abs() > POLE_TOLERANCE {
        return None;
    }
    let k = (-z.re).round();
    if k < 0.0 || (z.re + k).abs() > POLE_TOLERANCE {
        return None;
    }
    Some(k as u32)
}

/// The Gamma function as a [`CValue`].
///
/// At a pole `z = -k` the regularised part is the residue
/// `(-1)^k / k!`; elsewhere the value is `exp(log_gamma)`.
pub fn log_gamma(z: Complex64) -> CValue {
    if let Some(k) = gamma_pole_at(z) {
        // Residue of Gamma at -k is (-1)^k / k!.
        let log_fact = lanczos_log_gamma(Complex64::new(k as f64 + 1.0, 0.0)).re;
        let phase = if k % 2 == 0 { 0.0 } else { PI };
        return CValue::pole(1, -log_fact, phase);
    }
    let lg = log_gamma_complex(z);
    CValue::from_polar_ln(lg.re, lg.im)
}

/// The Beta function `B(a, b) = Gamma(a) Gamma(b) / Gamma(a+b)` as a
/// [`CValue`], with pole/zero orders combined through the ledger.
pub fn beta(a: Complex64, b: Complex64) -> CValue {
    let ga = log_gamma(a);
    let gb = log_gamma(b);
    let gab = log_gamma(a + b);
    ga.mul(&gb).div(&gab)
}
