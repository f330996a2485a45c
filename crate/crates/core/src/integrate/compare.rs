//! Cross-checking the three integration routes against each other and
//! against closed-form values.
//!
//! Each route gets its own derived seed so the Monte Carlo streams are
//! independent; agreement is then judged on z-scores. A pair with
//! combined statistical error uses |difference| / sigma with a pass
//! threshold of 4. A pair of deterministic values (two quadratures, or
//! quadrature against a closed form) has sigma 0, so its relative
//! difference is mapped onto the same scale: z = 4 · rel / 1e-6, which
//! passes exactly when the relative difference is at most 1e-6.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::DEFAULT_TOL;

use super::ambient::integrate_ambient_mc;
use super::wspace::{integrate_domain_w, integrate_orbit_u};
use super::{validate_request, IntegralEstimate, InvariantIntegrand, Method, WScheme};

/// Pass threshold on the z-scale.
const Z_THRESHOLD: f64 = 4.0;
/// Relative tolerance for pairs of deterministic values.
const DETERMINISTIC_RTOL: f64 = 1e-6;

/// One pairwise agreement check. `b` is `None` when the comparison is
/// against the closed-form value rather than another estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConsistencyCheck {
    pub a: Method,
    pub b: Option<Method>,
    pub difference: f64,
    pub z: f64,
    pub pass: bool,
}

/// Every estimate produced for one (integrand, k, m) request, plus all
/// pairwise checks and checks against the closed form when one exists.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub integrand: String,
    pub k: usize,
    pub m: usize,
    pub estimates: Vec<IntegralEstimate>,
    pub exact: Option<f64>,
    pub checks: Vec<ConsistencyCheck>,
    pub z_max: f64,
    pub pass: bool,
}

impl ConsistencyReport {
    /// Largest z over the checks that involve `method`; 0 when none do.
    pub fn z_max_for(&self, method: Method) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.a == method || c.b == Some(method))
            .map(|c| c.z)
            .fold(0.0, f64::max)
    }

    /// Whether every check involving `method` passes.
    pub fn passes_for(&self, method: Method) -> bool {
        self.checks
            .iter()
            .filter(|c| c.a == method || c.b == Some(method))
            .all(|c| c.pass)
    }

    /// The estimate carrying `method`'s tag, if one was produced.
    pub fn estimate_for(&self, method: Method) -> Option<&IntegralEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }
}

/// Runs every route that applies to (k, m), then cross-checks all
/// results pairwise and against the closed form when the integrand has
/// one. The ambient route always applies; the two orbit-space routes
/// require k <= m. Routes draw from seeds base, base+1, base+2 so their
/// streams never overlap.
pub fn compare_methods(
    g: &InvariantIntegrand,
    k: usize,
    m: usize,
    scheme: &WScheme,
) -> Result<ConsistencyReport> {
    validate_request(g, k)?;
    let base_seed = scheme.mc.seed;
    let mut estimates = Vec::new();

    let mut ambient_mc = scheme.mc;
    ambient_mc.seed = base_seed;
    estimates.push(integrate_ambient_mc(g, k, m, &ambient_mc)?);

    if k <= m {
        let mut domain_scheme = *scheme;
        domain_scheme.mc.seed = base_seed.wrapping_add(1);
        estimates.push(integrate_domain_w(g, k, m, &domain_scheme)?);

        let mut orbit_scheme = *scheme;
        orbit_scheme.mc.seed = base_seed.wrapping_add(2);
        estimates.push(integrate_orbit_u(g, k, m, &orbit_scheme)?);
    }

    let exact = g.exact_value(k, m);
    let mut checks = Vec::new();
    for i in 0..estimates.len() {
        for j in (i + 1)..estimates.len() {
            checks.push(check_pair(
                &estimates[i],
                estimates[j].value,
                estimates[j].std_error,
                Some(estimates[j].method),
            ));
        }
    }
    if let Some(value) = exact {
        for estimate in &estimates {
            checks.push(check_pair(estimate, value, 0.0, None));
        }
    }

    let z_max = checks.iter().map(|c| c.z).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.pass);
    Ok(ConsistencyReport {
        integrand: g.name().to_string(),
        k,
        m,
        estimates,
        exact,
        checks,
        z_max,
        pass,
    })
}

fn check_pair(
    a: &IntegralEstimate,
    b_value: f64,
    b_std_error: f64,
    b: Option<Method>,
) -> ConsistencyCheck {
    let difference = (a.value - b_value).abs();
    let sigma = a.std_error.hypot(b_std_error);
    let z = if sigma > DEFAULT_TOL * difference.max(1.0) {
        difference / sigma
    } else {
        let scale = a.value.abs().max(b_value.abs()).max(1.0);
        Z_THRESHOLD * (difference / scale) / DETERMINISTIC_RTOL
    };
    ConsistencyCheck {
        a: a.method,
        b,
        difference,
        z,
        pass: z <= Z_THRESHOLD,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{integrand_by_name, McConfig, WSchemeChoice};
    use super::*;
    use std::f64::consts::PI;

    fn scheme(samples: u64, seed: u64) -> WScheme {
        WScheme {
            mc: McConfig {
                samples,
                seed,
                ..McConfig::default()
            },
            ..WScheme::default()
        }
    }

    #[test]
    fn gaussian_family_agrees_across_all_routes() {
        let g = integrand_by_name("gauss-exp-trace").unwrap();
        let report = compare_methods(&g, 1, 2, &scheme(60_000, 71)).unwrap();
        assert_eq!(report.estimates.len(), 3);
        assert_eq!(report.exact, Some(PI));
        // Three pairwise checks plus three against the closed form.
        assert_eq!(report.checks.len(), 6);
        assert!(report.pass, "z_max = {}", report.z_max);
        assert!(report.z_max < Z_THRESHOLD);
        for method in [Method::AmbientMc, Method::Quadrature, Method::OrbitU] {
            assert!(report.estimate_for(method).is_some(), "missing {method}");
            assert!(report.passes_for(method));
        }
    }

    #[test]
    fn compactly_supported_indicator_matches_ball_volume() {
        let g = integrand_by_name("ball-indicator").unwrap();
        let report = compare_methods(&g, 1, 3, &scheme(200_000, 72)).unwrap();
        assert!(report.pass, "z_max = {}", report.z_max);
        assert!((report.exact.unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        // The indicator has no quadrature route, so every estimate is
        // Monte Carlo with a positive statistical error.
        for estimate in &report.estimates {
            assert!(estimate.std_error > 0.0);
        }
    }

    #[test]
    fn injected_jacobian_fault_is_detected() {
        let g = integrand_by_name("gauss-exp-trace").unwrap();
        let mut faulted = scheme(150_000, 73);
        faulted.choice = WSchemeChoice::MonteCarlo;
        faulted.jacobian_log2_offset = -4;
        let report = compare_methods(&g, 2, 3, &faulted).unwrap();
        assert!(!report.pass);
        assert!(report.z_max > Z_THRESHOLD);
        assert!(!report.passes_for(Method::OrbitU));
        assert!(report.z_max_for(Method::OrbitU) > Z_THRESHOLD);
        // The unfaulted pair still agrees with each other and the value.
        let ambient_vs_domain = report
            .checks
            .iter()
            .find(|c| c.a == Method::AmbientMc && c.b == Some(Method::DomainW))
            .unwrap();
        assert!(ambient_vs_domain.pass);
    }

    #[test]
    fn deterministic_pairs_are_judged_on_relative_error() {
        let g = integrand_by_name("gauss-exp-trace").unwrap();
        let mut quad = scheme(50_000, 74);
        quad.choice = WSchemeChoice::Quadrature;
        let report = compare_methods(&g, 1, 3, &quad).unwrap();
        assert!(report.pass, "z_max = {}", report.z_max);
        // Both orbit-space routes collapsed to deterministic rules.
        let deterministic: Vec<_> = report
            .estimates
            .iter()
            .filter(|e| e.std_error == 0.0)
            .collect();
        assert_eq!(deterministic.len(), 2);
        // Their mutual check used the relative-error scale and is far
        // below threshold.
        let pair = report
            .checks
            .iter()
            .find(|c| c.a == Method::Quadrature && c.b == Some(Method::Quadrature))
            .unwrap();
        assert!(pair.z < 1.0, "z = {}", pair.z);
    }

    #[test]
    fn reports_are_deterministic_for_fixed_seeds() {
        let g = integrand_by_name("gauss-trace-poly").unwrap();
        let first = compare_methods(&g, 1, 2, &scheme(40_000, 75)).unwrap();
        let second = compare_methods(&g, 1, 2, &scheme(40_000, 75)).unwrap();
        for (a, b) in first.estimates.iter().zip(&second.estimates) {
            assert_eq!(a.value.to_bits(), b.value.to_bits());
            assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        }
        assert_eq!(first.z_max.to_bits(), second.z_max.to_bits());
    }

    #[test]
    fn minimum_matrix_size_is_enforced_before_any_sampling() {
        let g = integrand_by_name("poly:u22").unwrap();
        assert!(compare_methods(&g, 1, 3, &scheme(10, 76)).is_err());
    }
}
