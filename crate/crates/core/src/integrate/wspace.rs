//! Integration over the triangular fundamental domain and, through it,
//! over the Gram image against the pushforward density.
//!
//! Both routes parametrize configurations by a triangular factor W with
//! nonnegative diagonal. The domain route integrates
//! `angular_volume · f(W·Wᵀ) · prod_i w_ii^{m-i}` directly; the orbit
//! route weights each point by the pushforward density times the
//! volume factor of W -> W·Wᵀ, which is analytically the same thing —
//! the density's boundary singularity in the square case cancels
//! exactly against the vanishing volume factor. The orbit route
//! computes the density product explicitly through `hilbert_density`
//! wherever that is numerically safe (k < m, interior points) and
//! through the cancelled closed form otherwise, so agreement between
//! the routes is a real check, not a tautology.
//!
//! Gaussian-decay integrands in at most [`MAX_QUADRATURE_DIMS`]
//! triangular coordinates get deterministic tensor quadrature:
//! Gauss-Hermite across off-diagonal coordinates and generalized
//! Gauss-Laguerre matched to the `w^{m-i}` weight on diagonal ones
//! (via t = w², so the rule's `t^{(m-i-1)/2} e^{-t}` weight is exactly
//! the diagonal factor). The integrand's own Gaussian envelope is
//! divided out pointwise; for polynomial-times-Gaussian integrands the
//! remaining smooth factor is integrated exactly up to the node-count
//! degree.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{tri_len, GramMatrix, TriangularFactor, DEFAULT_TOL};
use crate::measure::{hilbert_density, log_stiefel_volume};
use crate::quadrature::{gauss_hermite, gauss_laguerre};
use crate::reduction::angular_volume;

use super::{
    chunked_moments, log_jacobian_w_to_u, moments_to_estimate, validate_mc, validate_request,
    DecayClass, IntegralEstimate, InvariantIntegrand, Method, WScheme, WSchemeChoice,
    MAX_QUADRATURE_DIMS, QUADRATURE_NODE_RANGE,
};

/// Relative diagonal floor below which the orbit route stops evaluating
/// the density and volume factor separately and switches to their
/// cancelled closed form: the two logs grow oppositely unbounded and
/// their sum would lose precision.
const ORBIT_EXPLICIT_FLOOR: f64 = 1e-6;

/// Estimates the full ambient integral through the fundamental domain:
/// the angular volume times the integral of `f(W·Wᵀ) prod_i w_ii^{m-i}`
/// over triangular factors. Scheme choice `Auto` picks deterministic
/// tensor quadrature when the integrand is Gaussian-decay and
/// k(k+1)/2 <= [`MAX_QUADRATURE_DIMS`], Monte Carlo with half-normal
/// diagonal proposals otherwise.
///
/// # Errors
///
/// [`Error::NotCoregular`] for k > m; [`Error::QuadratureUnavailable`]
/// when quadrature is forced for a non-Gaussian integrand;
/// [`Error::InvalidInput`] for bad budgets or a forced grid in too many
/// dimensions.
pub fn integrate_domain_w(
    g: &InvariantIntegrand,
    k: usize,
    m: usize,
    scheme: &WScheme,
) -> Result<IntegralEstimate> {
    validate_request(g, k)?;
    if k > m {
        return Err(Error::NotCoregular { k, m });
    }
    if quadrature_applies(g, k, scheme)? {
        let (value, nodes) = domain_quadrature(g, k, m, scheme.nodes_per_dim)?;
        Ok(IntegralEstimate {
            value,
            std_error: 0.0,
            samples_or_nodes: nodes,
            method: Method::Quadrature,
        })
    } else {
        validate_mc(&scheme.mc)?;
        let dims = tri_len(k);
        // Proposal: off-diagonals N(0, 1/2), diagonals half-normal with
        // the same scale; q(W) = 2^k pi^{-D/2} e^{-sum of squares}.
        let log_proposal_const = 0.5 * dims as f64 * PI.ln() - k as f64 * LN_2;
        let (sum, sumsq) = chunked_moments(
            scheme.mc.samples,
            scheme.mc.chunk_size,
            scheme.mc.seed,
            |rng: &mut ChaCha8Rng| {
                let (w, sq) = sample_triangular(k, m, rng);
                let value = g.eval_orbit(&w.gram());
                if value == 0.0 {
                    return 0.0;
                }
                let mut log_weight = log_proposal_const + sq;
                for i in 0..k {
                    let exponent = (m - i - 1) as f64;
                    if exponent > 0.0 {
                        log_weight += exponent * w.diag(i).ln();
                    }
                }
                value * log_weight.exp()
            },
        );
        Ok(moments_to_estimate(
            sum,
            sumsq,
            scheme.mc.samples,
            angular_volume(k, m)?,
            Method::DomainW,
        ))
    }
}

/// Estimates the same integral as an integral over the Gram image
/// against the pushforward density, pulled back through G = W·Wᵀ. Each
/// point is weighted by density × volume factor, evaluated explicitly
/// through [`hilbert_density`] and the triangular volume factor on
/// interior points with k < m, and through their cancelled closed form
/// (frame volume times `prod w_ii^{m-i}`) in the square case k = m,
/// where the density alone is singular at the boundary.
///
/// Scheme choice `Auto` is Monte Carlo — this route exists to exercise
/// the density machinery pointwise; forcing `Quadrature` reweights the
/// domain rule's nodes through the density product instead (Gaussian
/// decay and small dimension only).
///
/// # Errors
///
/// As for [`integrate_domain_w`].
pub fn integrate_orbit_u(
    g: &InvariantIntegrand,
    k: usize,
    m: usize,
    scheme: &WScheme,
) -> Result<IntegralEstimate> {
    validate_request(g, k)?;
    if k > m {
        return Err(Error::NotCoregular { k, m });
    }
    let log_frame = log_stiefel_volume(m, k)?;
    let fault_shift = scheme.jacobian_log2_offset as f64 * LN_2;
    if scheme.choice == WSchemeChoice::Quadrature {
        if !matches!(g.decay(), DecayClass::Gaussian) {
            return Err(Error::QuadratureUnavailable {
                integrand: g.name().to_string(),
            });
        }
        require_grid_dims(k)?;
        let (value, nodes) = orbit_quadrature(g, k, m, scheme.nodes_per_dim, log_frame, fault_shift)?;
        return Ok(IntegralEstimate {
            value,
            std_error: 0.0,
            samples_or_nodes: nodes,
            method: Method::Quadrature,
        });
    }
    validate_mc(&scheme.mc)?;
    let dims = tri_len(k);
    let log_proposal_const = 0.5 * dims as f64 * PI.ln() - k as f64 * LN_2;
    let (sum, sumsq) = chunked_moments(
        scheme.mc.samples,
        scheme.mc.chunk_size,
        scheme.mc.seed,
        |rng: &mut ChaCha8Rng| {
            let (w, sq) = sample_triangular(k, m, rng);
            let gmat = w.gram();
            let value = g.eval_orbit(&gmat);
            if value == 0.0 {
                return 0.0;
            }
            let log_change = orbit_log_change_of_variables(&w, &gmat, m, log_frame);
            value * (log_change + fault_shift + log_proposal_const + sq).exp()
        },
    );
    Ok(moments_to_estimate(
        sum,
        sumsq,
        scheme.mc.samples,
        1.0,
        Method::OrbitU,
    ))
}

/// Log of density × volume factor at W. Explicit product wherever both
/// factors are individually well-conditioned; cancelled closed form
/// `log frame volume + sum (m-i) log w_ii` otherwise.
fn orbit_log_change_of_variables(
    w: &TriangularFactor,
    gmat: &GramMatrix,
    m: usize,
    log_frame: f64,
) -> f64 {
    let k = w.k();
    let mut min_diag = f64::INFINITY;
    for i in 0..k {
        min_diag = min_diag.min(w.diag(i));
    }
    if k < m && min_diag > ORBIT_EXPLICIT_FLOOR * w.max_diag() {
        if let (Ok(density), Ok(log_jac)) = (
            hilbert_density(gmat, m, DEFAULT_TOL),
            log_jacobian_w_to_u(w),
        ) {
            if density.log_value.is_finite() {
                return density.log_value + log_jac;
            }
        }
    }
    let mut log = log_frame;
    for i in 0..k {
        let exponent = (m - i - 1) as f64;
        if exponent > 0.0 {
            log += exponent * w.diag(i).ln();
        }
    }
    log
}

/// Draws a triangular factor from the Monte Carlo proposal (standard
/// deviation 1/sqrt(2) per coordinate, diagonals folded to be
/// nonnegative) and returns it with the sum of squared coordinates.
fn sample_triangular(k: usize, m: usize, rng: &mut ChaCha8Rng) -> (TriangularFactor, f64) {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut lower = Vec::with_capacity(tri_len(k));
    let mut sq = 0.0;
    for i in 0..k {
        for j in 0..=i {
            let z: f64 = rng.sample(StandardNormal);
            let x = if i == j { scale * z.abs() } else { scale * z };
            sq += x * x;
            lower.push(x);
        }
    }
    let w = TriangularFactor::from_lower(k, m, lower)
        .expect("sampled triangular coordinates are always valid");
    (w, sq)
}

fn quadrature_applies(g: &InvariantIntegrand, k: usize, scheme: &WScheme) -> Result<bool> {
    match scheme.choice {
        WSchemeChoice::Auto => {
            Ok(matches!(g.decay(), DecayClass::Gaussian) && tri_len(k) <= MAX_QUADRATURE_DIMS)
        }
        WSchemeChoice::Quadrature => {
            if !matches!(g.decay(), DecayClass::Gaussian) {
                return Err(Error::QuadratureUnavailable {
                    integrand: g.name().to_string(),
                });
            }
            require_grid_dims(k)?;
            Ok(true)
        }
        WSchemeChoice::MonteCarlo => Ok(false),
    }
}

fn require_grid_dims(k: usize) -> Result<()> {
    let dims = tri_len(k);
    if dims > MAX_QUADRATURE_DIMS {
        return Err(Error::InvalidInput(format!(
            "tensor quadrature grids at most {MAX_QUADRATURE_DIMS} triangular coordinates; \
             k = {k} has {dims}"
        )));
    }
    Ok(())
}

/// One quadrature dimension: node coordinate values, rule weights, and
/// the positive envelope exponent that cancels the integrand's own
/// Gaussian factor at each node.
struct DimRule {
    values: Vec<f64>,
    weights: Vec<f64>,
    envelopes: Vec<f64>,
}

/// Builds the per-coordinate rules in packed lower-triangular order.
fn grid_rules(k: usize, m: usize, nodes_per_dim: usize) -> Result<Vec<DimRule>> {
    if !QUADRATURE_NODE_RANGE.contains(&nodes_per_dim) {
        return Err(Error::InvalidInput(format!(
            "nodes_per_dim must lie in {}..={}, got {}",
            QUADRATURE_NODE_RANGE.start(),
            QUADRATURE_NODE_RANGE.end(),
            nodes_per_dim
        )));
    }
    let (hermite_nodes, hermite_weights) = gauss_hermite(nodes_per_dim);
    let mut rules = Vec::with_capacity(tri_len(k));
    for i in 0..k {
        for j in 0..=i {
            if i == j {
                // Diagonal coordinate with weight w^{m-i-1} e^{-w^2} on
                // (0, inf): substitute t = w^2 and use the generalized
                // Laguerre rule with alpha = (m-i-2)/2 … in 0-based
                // terms alpha = (exponent - 1)/2.
                let exponent = (m - i - 1) as f64;
                let alpha = 0.5 * (exponent - 1.0);
                let (t_nodes, t_weights) = gauss_laguerre(nodes_per_dim, alpha);
                rules.push(DimRule {
                    values: t_nodes.iter().map(|t| t.sqrt()).collect(),
                    weights: t_weights.iter().map(|b| 0.5 * b).collect(),
                    envelopes: t_nodes,
                });
            } else {
                rules.push(DimRule {
                    values: hermite_nodes.clone(),
                    weights: hermite_weights.clone(),
                    envelopes: hermite_nodes.iter().map(|x| x * x).collect(),
                });
            }
        }
    }
    Ok(rules)
}

/// Walks the full tensor grid, calling `point_value(W, G, envelope)`
/// with the rule weight product already applied to the running sum.
fn tensor_sum(
    k: usize,
    m: usize,
    rules: &[DimRule],
    mut point_value: impl FnMut(&TriangularFactor, &GramMatrix, f64) -> f64,
) -> (f64, u64) {
    let dims = rules.len();
    let nodes_per_dim = rules[0].values.len();
    let mut index = vec![0usize; dims];
    let mut total = 0.0;
    let mut count = 0u64;
    loop {
        let mut lower = Vec::with_capacity(dims);
        let mut weight = 1.0;
        let mut envelope = 0.0;
        for (d, rule) in rules.iter().enumerate() {
            lower.push(rule.values[index[d]]);
            weight *= rule.weights[index[d]];
            envelope += rule.envelopes[index[d]];
        }
        let w = TriangularFactor::from_lower(k, m, lower)
            .expect("quadrature nodes are always valid coordinates");
        let gmat = w.gram();
        total += weight * point_value(&w, &gmat, envelope);
        count += 1;

        let mut d = 0;
        loop {
            if d == dims {
                return (total, count);
            }
            index[d] += 1;
            if index[d] < nodes_per_dim {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

fn domain_quadrature(
    g: &InvariantIntegrand,
    k: usize,
    m: usize,
    nodes_per_dim: usize,
) -> Result<(f64, u64)> {
    let rules = grid_rules(k, m, nodes_per_dim)?;
    let (total, nodes) = tensor_sum(k, m, &rules, |_, gmat, envelope| {
        g.eval_orbit(gmat) * envelope.exp()
    });
    Ok((total * angular_volume(k, m)?, nodes))
}

/// The domain rule with every node reweighted through the density
/// product: divide out the rule's built-in `w^{m-i}` diagonal weight
/// and multiply density × volume factor instead. Analytically identical
/// to `domain_quadrature`; numerically it runs the density machinery at
/// every node, which is the point.
fn orbit_quadrature(
    g: &InvariantIntegrand,
    k: usize,
    m: usize,
    nodes_per_dim: usize,
    log_frame: f64,
    fault_shift: f64,
) -> Result<(f64, u64)> {
    let rules = grid_rules(k, m, nodes_per_dim)?;
    Ok(tensor_sum(k, m, &rules, |w, gmat, envelope| {
        let value = g.eval_orbit(gmat);
        if value == 0.0 {
            return 0.0;
        }
        let mut log_built_in = 0.0;
        for i in 0..k {
            let exponent = (m - i - 1) as f64;
            if exponent > 0.0 {
                log_built_in += exponent * w.diag(i).ln();
            }
        }
        let log_change = orbit_log_change_of_variables(w, gmat, m, log_frame);
        value * (envelope + log_change + fault_shift - log_built_in).exp()
    }))
}
