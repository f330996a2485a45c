//! Closed-form reference volumes and the pushforward density on Gram
//! coordinates.
//!
//! The central object is [`hilbert_density`]: the density of the volume
//! measure of (R^m)^k pushed forward to the space of Gram matrices. It is
//! a constant times a power of det G,
//!
//! ```text
//! lambda(G) = 2^-k * prod_{j=1..k} vol(S^{m-j}) * (det G)^{(m-k-1)/2},
//! ```
//!
//! smooth on the interior for k < m and divergent like (det G)^{-1/2} at
//! the rank boundary when k = m. All constants are evaluated in log space
//! through a Lanczos log-gamma accurate to better than 1e-14.

use crate::error::{Error, Result};
use crate::linalg::{semidefinite_cholesky, GramMatrix};
use std::f64::consts::TAU;

/// Lanczos parameters (g = 7, nine coefficients). Relative accuracy of
/// `lgamma` is below 3e-15 on [0.5, 100], measured against 40-digit
/// reference values. The coefficients keep their published digits even
/// past f64 resolution so they can be checked against the source table.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
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

#[allow(clippy::excessive_precision)]
const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_74; // ln sqrt(2 pi)
const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2: f64 = std::f64::consts::LN_2;

/// Natural log of the gamma function for x > 0; unchecked internal form.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "lgamma needs a positive argument, got {x}");
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return LN_PI - (std::f64::consts::PI * x).sin().ln() - lgamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut s = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_TWO_PI + (z + 0.5) * t.ln() - t + s.ln()
}

/// Natural log of the gamma function.
///
/// # Errors
///
/// Fails with [`Error::GammaDomain`] when `x <= 0` (or is not finite).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::GammaDomain { x });
    }
    Ok(lgamma(x))
}

/// Log of the surface volume of the unit n-sphere S^n in R^{n+1}:
/// ln( 2 pi^{(n+1)/2} / Gamma((n+1)/2) ).
pub(crate) fn log_sphere_volume(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    LN_2 + h * LN_PI - lgamma(h)
}

/// Surface volume of the unit n-sphere S^n in R^{n+1}.
///
/// `sphere_volume(0) = 2` (two points), `sphere_volume(1) = 2 pi`,
/// `sphere_volume(2) = 4 pi`. Evaluated by the two-step recurrence
/// vol(S^n) = 2 pi / (n - 1) * vol(S^{n-2}), which keeps the small
/// values exactly representable (the log-space form would return
/// 2 - 7e-16 for n = 0).
pub fn sphere_volume(n: usize) -> f64 {
    let mut volume = if n % 2 == 0 { 2.0 } else { TAU };
    let mut dim = 2 + n % 2;
    while dim <= n {
        volume *= TAU / (dim - 1) as f64;
        dim += 2;
    }
    volume
}

/// Volume of the full orthogonal group O_m under the metric inherited
/// from m x m matrices:
///
/// ```text
/// vol(O_m) = 2^m sqrt(pi)^{m(m+1)/2} / prod_{j=1..m} Gamma(j/2)
///          = prod_{j=0..m-1} vol(S^j).
/// ```
pub fn orthogonal_group_volume(m: usize) -> f64 {
    assert!(m >= 1, "orthogonal_group_volume needs m >= 1");
    let mut log = m as f64 * LN_2 + (m * (m + 1)) as f64 / 4.0 * LN_PI;
    for j in 1..=m {
        log -= lgamma(j as f64 / 2.0);
    }
    log.exp()
}

/// Volume of the quotient O_m / O_{m-k}: the product
/// `prod_{j=1..k} vol(S^{m-j})` of the sphere volumes swept out by k
/// orthonormal frame vectors.
///
/// # Errors
///
/// Fails with [`Error::NotCoregular`] when k > m.
pub fn stiefel_volume(m: usize, k: usize) -> Result<f64> {
    Ok(log_stiefel_volume(m, k)?.exp())
}

pub(crate) fn log_stiefel_volume(m: usize, k: usize) -> Result<f64> {
    if k > m {
        return Err(Error::NotCoregular { k, m });
    }
    Ok((1..=k).map(|j| log_sphere_volume(m - j)).sum())
}

/// The density of the pushforward measure at one Gram matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityValue {
    /// Density value; `+inf` at a singular point, `0` on the rank
    /// boundary when the exponent of det G is positive.
    pub value: f64,
    /// Natural log of the value; `-inf` and `+inf` mirror the cases above.
    pub log_value: f64,
    /// Set exactly when k = m and det G vanishes within tolerance, where
    /// the density diverges like (det G)^{-1/2}.
    pub singular: bool,
}

/// Evaluates the pushforward density at G for tuples of k vectors in R^m.
///
/// The determinant is taken from the squared pivots of the semidefinite
/// factorization, so the rank-boundary decision follows the same
/// `tol * max_diag` clamping rule as [`semidefinite_cholesky`].
///
/// # Errors
///
/// * [`Error::NotCoregular`] when k > m.
/// * [`Error::NotInImage`] when G is not positive semidefinite within
///   tolerance.
pub fn hilbert_density(g: &GramMatrix, m: usize, tol: f64) -> Result<DensityValue> {
    let k = g.k();
    if k > m {
        return Err(Error::NotCoregular { k, m });
    }
    let w = semidefinite_cholesky(g, tol).map_err(|e| match e {
        Error::NotPositiveSemidefinite { index, pivot } => Error::NotInImage { index, pivot },
        other => other,
    })?;

    let log_const = log_stiefel_volume(m, k)? - k as f64 * LN_2;
    let exponent = (m as f64 - k as f64 - 1.0) / 2.0;

    // log det G = 2 sum ln w_ii; -inf on the rank boundary.
    let mut log_det = 0.0;
    let mut deficient = false;
    for i in 0..k {
        let d = w.diag(i);
        if d == 0.0 {
            deficient = true;
        } else {
            log_det += 2.0 * d.ln();
        }
    }

    if deficient {
        return Ok(if exponent < 0.0 {
            // k = m: the density blows up at the rank boundary.
            DensityValue {
                value: f64::INFINITY,
                log_value: f64::INFINITY,
                singular: true,
            }
        } else if exponent == 0.0 {
            // k = m - 1: det G enters with power zero; the density is the
            // same constant everywhere, boundary included.
            DensityValue {
                value: log_const.exp(),
                log_value: log_const,
                singular: false,
            }
        } else {
            DensityValue {
                value: 0.0,
                log_value: f64::NEG_INFINITY,
                singular: false,
            }
        });
    }

    let log_value = log_const + exponent * log_det;
    Ok(DensityValue {
        value: log_value.exp(),
        log_value,
        singular: false,
    })
}
