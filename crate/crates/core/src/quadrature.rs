//! One-dimensional Gaussian quadrature rules.
//!
//! Nodes are found by Newton iteration on the orthogonal-polynomial
//! recurrences with the standard asymptotic initial guesses; weights come
//! from the derivative at the root. Each rule integrates polynomials up
//! to degree 2n - 1 exactly against its weight function, which the tests
//! pin down through moment identities at ~1e-13 relative accuracy.

use crate::measure::lgamma;

const MAX_NEWTON: usize = 200;

/// Gauss-Hermite rule: nodes and weights for integrals
/// `int_-inf^inf f(x) e^{-x^2} dx ~= sum w_i f(x_i)`.
///
/// Panics if `n` is zero or large enough (> 64) that the hard-coded
/// initial guesses are no longer trustworthy.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!((1..=64).contains(&n), "gauss_hermite supports 1..=64 nodes");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_NEWTON {
            // Orthonormal Hermite recurrence keeps values in range.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // Present nodes in increasing order.
    x.reverse();
    w.reverse();
    (x, w)
}

/// Generalized Gauss-Laguerre rule: nodes and weights for integrals
/// `int_0^inf f(x) x^alpha e^{-x} dx ~= sum w_i f(x_i)`, alpha > -1.
pub fn gauss_laguerre(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!((1..=64).contains(&n), "gauss_laguerre supports 1..=64 nodes");
    assert!(alpha > -1.0, "gauss_laguerre needs alpha > -1");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut z = match i {
            0 => (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha),
            1 => x[0] + (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                x[i - 1]
                    + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                        * (x[i - 1] - x[i - 2])
                        / (1.0 + 0.3 * alpha)
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..MAX_NEWTON {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 + alpha - z) * p2 - (jf + alpha) * p3) / (jf + 1.0);
            }
            pp = (nf * p1 - (nf + alpha) * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() + 1e-300 {
                break;
            }
        }
        x[i] = z;
        w[i] = -(lgamma(alpha + nf) - lgamma(nf)).exp() / (pp * nf * p2);
    }
    (x, w)
}

/// Gauss-Legendre rule on the interval [a, b]: nodes and weights for
/// `int_a^b f(x) dx ~= sum w_i f(x_i)`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!((1..=128).contains(&n), "gauss_legendre supports 1..=128 nodes");
    assert!(b > a, "gauss_legendre needs a nonempty interval");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mid = 0.5 * (a + b);
    let len = 0.5 * (b - a);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..MAX_NEWTON {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = mid - len * z;
        x[n - 1 - i] = mid + len * z;
        w[i] = 2.0 * len / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
