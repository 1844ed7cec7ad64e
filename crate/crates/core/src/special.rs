//! Standard normal helpers with tail-safe logarithms.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument the Mills-type ratio uses its asymptotic series.
pub const ASYMPTOTIC_CUTOFF: f64 = -35.0;

pub fn normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub fn normal_pdf(z: f64) -> f64 {
    normal_ln_pdf(z).exp()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `phi(z) / Phi(z)`.
pub fn inverse_mills(z: f64) -> f64 {
    if z < ASYMPTOTIC_CUTOFF {
        let w = 1.0 / (z * z);
        // Phi(z) ~ phi(z)/(-z) * (1 - w + 3w^2 - 15w^3 + 105w^4)
        let series = 1.0 + w * (-1.0 + w * (3.0 + w * (-15.0 + w * 105.0)));
        -z / series
    } else {
        normal_pdf(z) / normal_cdf(z)
    }
}

/// `(R, R (R + z), R (R + z) + (R + z)^2 - 1)` with `R = phi(z)/Phi(z)`.
///
/// The last two cancel badly far in the left tail and overflow when formed
/// naively, so they switch to their asymptotic series there.
pub fn mills_terms(z: f64) -> (f64, f64, f64) {
    let r = inverse_mills(z);
    if z < ASYMPTOTIC_CUTOFF {
        let x = 1.0 / (z * z);
        let re = 1.0 + x * (-1.0 + x * (6.0 + x * (-50.0 + x * (518.0 - 6354.0 * x))));
        let k = x * x * (2.0 + x * (-26.0 + x * (330.0 - 4546.0 * x)));
        (r, re, k)
    } else {
        let e = r + z;
        (r, r * e, r * e + e * e - 1.0)
    }
}

pub fn normal_ln_cdf(z: f64) -> f64 {
    if z < ASYMPTOTIC_CUTOFF {
        normal_ln_pdf(z) - inverse_mills(z).ln()
    } else if z > 0.0 {
        (-0.5 * libm::erfc(z * FRAC_1_SQRT_2)).ln_1p()
    } else {
        normal_cdf(z).ln()
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Log of the Student t normalising constant `c(nu)`.
pub fn student_t_ln_norm(nu: f64) -> f64 {
    ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI).ln()
}

pub const LN2: f64 = LN_2;
