//! Invariant integrals computed several independent ways.
//!
//! For a function of k vectors in R^m that only depends on the Gram
//! matrix of inner products, the same number can be computed as
//!
//! - an ambient integral over all k·m coordinates ([`integrate_ambient_mc`]),
//! - an integral over the triangular fundamental domain with the weight
//!   `prod_i w_ii^{m-i}` and the angular volume in front
//!   ([`integrate_domain_w`]), or
//! - an integral over the Gram image against the pushforward density,
//!   pulled back through `G = W W^T` ([`integrate_orbit_u`]).
//!
//! All three must agree, and [`compare_methods`] turns that into a
//! machine-checkable report. Deterministic tensor quadrature covers
//! Gaussian-decay integrands in up to six triangular coordinates;
//! everything else uses importance-sampled Monte Carlo.
//!
//! # Determinism
//!
//! Monte Carlo runs are chunked: chunk c draws from an independent
//! counter-based stream derived from (seed, c), partial sums are
//! combined in chunk order. Results are bit-identical for a fixed seed
//! and chunk size no matter how many worker threads execute the chunks.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, GramMatrix, TriangularFactor, VectorTuple, DEFAULT_TOL};
use crate::sampling::random_vector_tuple;

mod ambient;
mod compare;
mod registry;
mod wspace;

pub use ambient::integrate_ambient_mc;
pub use compare::{compare_methods, ConsistencyCheck, ConsistencyReport};
pub use registry::{builtin_integrands, integrand_by_name};
pub use wspace::{integrate_domain_w, integrate_orbit_u};

/// Largest number of triangular coordinates the tensor-product
/// quadrature will grid up; beyond this the grid size explodes and
/// Monte Carlo takes over.
pub const MAX_QUADRATURE_DIMS: usize = 6;

/// Supported node counts per quadrature dimension. The upper end keeps
/// the positive-envelope evaluation (see `wspace`) far away from f64
/// overflow and the grids at desk scale.
pub const QUADRATURE_NODE_RANGE: std::ops::RangeInclusive<usize> = 2..=24;

// ---------------------------------------------------------------------------
// Estimates and configuration
// ---------------------------------------------------------------------------

/// How an estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Importance-sampled Monte Carlo over all k·m vector coordinates.
    AmbientMc,
    /// Monte Carlo over the triangular fundamental domain.
    DomainW,
    /// Integration against the pushforward density on the Gram image.
    OrbitU,
    /// Deterministic tensor-product quadrature over the fundamental
    /// domain.
    Quadrature,
}

impl Method {
    /// The kebab-case tag used in reports and CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            Method::AmbientMc => "ambient-mc",
            Method::DomainW => "domain-w",
            Method::OrbitU => "orbit-u",
            Method::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One integral estimate: the value, its standard error (zero for
/// deterministic quadrature, sample standard deviation over the square
/// root of the sample count for Monte Carlo), the number of samples or
/// grid nodes spent, and the method that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples_or_nodes: u64,
    pub method: Method,
}

/// Monte Carlo budget and reproducibility knobs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    /// Total number of samples (at least 2).
    pub samples: u64,
    /// Seed for the counter-based chunk streams.
    pub seed: u64,
    /// Chunk length; part of the reproducibility contract, since the
    /// estimate depends on (seed, chunk_size) but never on thread count.
    pub chunk_size: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 1_000_000,
            seed: 0,
            chunk_size: 65_536,
        }
    }
}

/// How to integrate over the triangular fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WSchemeChoice {
    /// Tensor quadrature when the integrand has Gaussian decay and the
    /// coordinate count is at most [`MAX_QUADRATURE_DIMS`]; Monte Carlo
    /// otherwise.
    Auto,
    /// Force tensor quadrature; errors when it does not apply.
    Quadrature,
    /// Force Monte Carlo.
    MonteCarlo,
}

/// Scheme for the fundamental-domain routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WScheme {
    pub choice: WSchemeChoice,
    /// Nodes per quadrature dimension (within [`QUADRATURE_NODE_RANGE`]).
    pub nodes_per_dim: usize,
    pub mc: McConfig,
    /// Negative-control hook for the verification harness: the
    /// orbit-route change-of-variables factor is scaled by
    /// 2^(this offset). Zero in all real use; setting it to -2k flips
    /// the factor 2^k to 2^-k and must make consistency checks fail.
    pub jacobian_log2_offset: i32,
}

impl Default for WScheme {
    fn default() -> Self {
        WScheme {
            choice: WSchemeChoice::Auto,
            nodes_per_dim: 12,
            mc: McConfig::default(),
            jacobian_log2_offset: 0,
        }
    }
}

// ---------------------------------------------------------------------------
// InvariantIntegrand
// ---------------------------------------------------------------------------

/// Decay behavior an integrand declares at registration; it decides the
/// Monte Carlo proposal and whether matched-weight quadrature applies.
/// Never inferred from the integrand itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayClass {
    /// Dominated by exp(-tr G) = exp(-sum of squared coordinates);
    /// Gaussian proposals and Hermite/Laguerre quadrature apply.
    Gaussian,
    /// Supported inside the centered box of the given half width in
    /// every coordinate; uniform-box proposals apply.
    Compact { half_width: f64 },
}

/// Ambient view: evaluates on the raw vector tuple.
pub type AmbientFn = dyn Fn(&VectorTuple) -> f64 + Send + Sync;
/// Gram view: evaluates on the matrix of inner products.
pub type OrbitFn = dyn Fn(&GramMatrix) -> f64 + Send + Sync;
/// Closed-form value for a given (k, m), when one is known.
pub type ExactFn = dyn Fn(usize, usize) -> Option<f64> + Send + Sync;

/// A named integrand with two views that must agree: `f` on vector
/// tuples and `F` on Gram matrices, related by f(V) = F(gram(V)).
/// Registration verifies that identity on random tuples and rejects
/// mismatched pairs, so no integration route can silently compute a
/// different number than another.
#[derive(Clone)]
pub struct InvariantIntegrand {
    name: String,
    decay: DecayClass,
    /// Smallest k the Gram view can evaluate (a polynomial referencing
    /// u_{3,3} needs k >= 3).
    min_k: usize,
    ambient: Arc<AmbientFn>,
    orbit: Arc<OrbitFn>,
    exact: Arc<ExactFn>,
}

impl fmt::Debug for InvariantIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvariantIntegrand")
            .field("name", &self.name)
            .field("decay", &self.decay)
            .field("min_k", &self.min_k)
            .finish_non_exhaustive()
    }
}

/// Tolerance for the two-view agreement checked at registration.
const REGISTRATION_TOL: f64 = 1e-12;

impl InvariantIntegrand {
    /// Registers an integrand whose Gram view is defined for every
    /// k >= 1. Checks f(V) = F(gram(V)) on a fixed battery of random
    /// tuples and refuses inconsistent pairs.
    pub fn new(
        name: impl Into<String>,
        decay: DecayClass,
        ambient: Arc<AmbientFn>,
        orbit: Arc<OrbitFn>,
    ) -> Result<Self> {
        Self::with_min_k(name, decay, 1, ambient, orbit)
    }

    /// Registers an integrand whose Gram view needs at least `min_k`
    /// vectors.
    pub fn with_min_k(
        name: impl Into<String>,
        decay: DecayClass,
        min_k: usize,
        ambient: Arc<AmbientFn>,
        orbit: Arc<OrbitFn>,
    ) -> Result<Self> {
        let name = name.into();
        if min_k == 0 {
            return Err(Error::InvalidInput("min_k must be at least 1".into()));
        }
        let integrand = InvariantIntegrand {
            name,
            decay,
            min_k,
            ambient,
            orbit,
            exact: Arc::new(|_, _| None),
        };
        integrand.check_views()?;
        Ok(integrand)
    }

    /// Attaches a closed-form value for (k, m) pairs that have one.
    pub fn with_exact(mut self, exact: Arc<ExactFn>) -> Self {
        self.exact = exact;
        self
    }

    fn check_views(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF_EE00);
        for k in self.min_k..=self.min_k + 2 {
            for m in k..=self.min_k + 3 {
                for _ in 0..4 {
                    let v = random_vector_tuple(k, m, &mut rng);
                    let via_ambient = (self.ambient)(&v);
                    let via_orbit = (self.orbit)(&gram(&v));
                    let scale = via_ambient.abs().max(via_orbit.abs()).max(1.0);
                    let defect = (via_ambient - via_orbit).abs() / scale;
                    if defect.is_nan() || defect > REGISTRATION_TOL {
                        return Err(Error::InconsistentIntegrand {
                            name: self.name.clone(),
                            k,
                            m,
                            defect,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    /// Smallest number of vectors the Gram view supports.
    pub fn min_k(&self) -> usize {
        self.min_k
    }

    /// Evaluates the ambient view f(V).
    pub fn eval_ambient(&self, v: &VectorTuple) -> f64 {
        (self.ambient)(v)
    }

    /// Evaluates the Gram view F(G).
    pub fn eval_orbit(&self, g: &GramMatrix) -> f64 {
        (self.orbit)(g)
    }

    /// The closed-form value of the full ambient integral at (k, m), if
    /// known.
    pub fn exact_value(&self, k: usize, m: usize) -> Option<f64> {
        (self.exact)(k, m)
    }
}

// ---------------------------------------------------------------------------
// Change of variables between triangular and Gram coordinates
// ---------------------------------------------------------------------------

/// The volume-scaling factor of the map W -> W·W^T from triangular
/// coordinates to Gram matrices at an interior point:
/// `2^k · prod_i prod_{j<=i} w_jj`, which equals
/// `2^k · sqrt(|G_1| · … · |G_k|)` for the leading principal minors of
/// the image.
///
/// # Errors
///
/// [`Error::BoundaryPoint`] when any diagonal entry is zero within
/// `DEFAULT_TOL` relative to the largest one (the map is singular
/// there).
pub fn jacobian_w_to_u(w: &TriangularFactor) -> Result<f64> {
    let k = w.k();
    let floor = DEFAULT_TOL * w.max_diag();
    let mut value = (k as f64).exp2();
    for i in 0..k {
        for j in 0..=i {
            let d = w.diag(j);
            if d <= floor {
                return Err(Error::BoundaryPoint { index: j });
            }
            value *= d;
        }
    }
    Ok(value)
}

/// Natural log of [`jacobian_w_to_u`], for weight products that would
/// overflow or cancel in linear scale.
pub(crate) fn log_jacobian_w_to_u(w: &TriangularFactor) -> Result<f64> {
    let k = w.k();
    let floor = DEFAULT_TOL * w.max_diag();
    let mut log = k as f64 * std::f64::consts::LN_2;
    for j in 0..k {
        let d = w.diag(j);
        if d <= floor {
            return Err(Error::BoundaryPoint { index: j });
        }
        log += (k - j) as f64 * d.ln();
    }
    Ok(log)
}

/// Recovers the triangular diagonal from a Gram matrix alone:
/// w_ii = sqrt(|G_i| / |G_{i-1}|) over the leading principal minors
/// (|G_0| = 1). Agrees with the diagonal of the semidefinite Cholesky
/// factor wherever both are defined.
///
/// # Errors
///
/// [`Error::BoundaryPoint`] at the first index whose minor ratio is not
/// positive beyond `DEFAULT_TOL` relative to the largest diagonal entry
/// (rank-deficient or indefinite input).
pub fn diag_from_minors(g: &GramMatrix) -> Result<Vec<f64>> {
    let minors = crate::linalg::leading_minors(g);
    let floor = DEFAULT_TOL * g.max_diag();
    let mut diag = Vec::with_capacity(g.k());
    let mut prev = 1.0;
    // minors[0] is the empty minor 1; ratios start at |G_1| / |G_0|.
    for (i, &minor) in minors.iter().enumerate().skip(1) {
        let ratio = minor / prev;
        if ratio.is_nan() || ratio <= floor {
            return Err(Error::BoundaryPoint { index: i - 1 });
        }
        diag.push(ratio.sqrt());
        prev = minor;
    }
    Ok(diag)
}

// ---------------------------------------------------------------------------
// Deterministic chunked Monte Carlo engine
// ---------------------------------------------------------------------------

fn validate_mc(mc: &McConfig) -> Result<()> {
    if mc.samples < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples for a standard error, got {}",
            mc.samples
        )));
    }
    if mc.chunk_size == 0 {
        return Err(Error::InvalidInput("chunk_size must be positive".into()));
    }
    Ok(())
}

fn validate_request(g: &InvariantIntegrand, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k < g.min_k() {
        return Err(Error::InvalidInput(format!(
            "integrand '{}' references Gram entries up to index {} and needs k >= {}, got k = {}",
            g.name(),
            g.min_k(),
            g.min_k(),
            k
        )));
    }
    Ok(())
}

/// Runs `samples` evaluations of `sample_value` split into fixed-size
/// chunks, chunk c drawing from the ChaCha stream (seed, c + 1), and
/// returns (sum, sum of squares) combined in chunk order. The thread
/// count never affects the result.
fn chunked_moments<F>(samples: u64, chunk_size: usize, seed: u64, sample_value: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Send + Sync,
{
    let chunk = chunk_size as u64;
    let chunks = samples.div_ceil(chunk);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c + 1);
            let len = chunk.min(samples - c * chunk);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..len {
                let value = sample_value(&mut rng);
                sum += value;
                sumsq += value * value;
            }
            (sum, sumsq)
        })
        .collect();
    partials
        .into_iter()
        .fold((0.0, 0.0), |(s, q), (ps, pq)| (s + ps, q + pq))
}

/// Turns chunked (sum, sumsq) moments into a mean and its standard
/// error, with an optional constant multiplier applied to every sample.
fn moments_to_estimate(
    sum: f64,
    sumsq: f64,
    samples: u64,
    scale: f64,
    method: Method,
) -> IntegralEstimate {
    let n = samples as f64;
    let mean = sum / n;
    let variance = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
    IntegralEstimate {
        value: scale * mean,
        std_error: scale.abs() * (variance / n).sqrt(),
        samples_or_nodes: samples,
        method,
    }
}
