//! Importance-sampled Monte Carlo over all k·m vector coordinates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::VectorTuple;

use super::{
    chunked_moments, moments_to_estimate, validate_mc, validate_request, DecayClass,
    IntegralEstimate, InvariantIntegrand, McConfig, Method,
};

/// Estimates the ambient integral of `g` over all of (R^m)^k by
/// importance sampling: standard normal proposals for Gaussian-decay
/// integrands (weight f/phi), uniform-box proposals with the analytic
/// box volume for compactly supported ones. Deterministic for fixed
/// (seed, chunk_size); see the module notes on chunking.
pub fn integrate_ambient_mc(
    g: &InvariantIntegrand,
    k: usize,
    m: usize,
    mc: &McConfig,
) -> Result<IntegralEstimate> {
    validate_request(g, k)?;
    validate_mc(mc)?;
    let dims = k * m;
    let (sum, sumsq) = match g.decay() {
        DecayClass::Gaussian => {
            // Proposal N(0, I): weight f(V) · (2 pi)^{d/2} e^{+|V|^2/2}.
            // Deliberately wider than the integrands' own e^{-|V|^2}
            // envelope, so the weights stay bounded.
            let log_norm = 0.5 * dims as f64 * (2.0 * std::f64::consts::PI).ln();
            chunked_moments(mc.samples, mc.chunk_size, mc.seed, |rng: &mut ChaCha8Rng| {
                let mut flat = Vec::with_capacity(dims);
                let mut sq = 0.0;
                for _ in 0..dims {
                    let z: f64 = rng.sample(StandardNormal);
                    sq += z * z;
                    flat.push(z);
                }
                let value = g.eval_ambient(&VectorTuple::from_flat(k, m, flat));
                if value == 0.0 {
                    0.0
                } else {
                    value * (log_norm + 0.5 * sq).exp()
                }
            })
        }
        DecayClass::Compact { half_width } => {
            // Proposal uniform on the centered box: weight f(V) · (2a)^d.
            let volume = (2.0 * half_width).powi(dims as i32);
            chunked_moments(mc.samples, mc.chunk_size, mc.seed, |rng: &mut ChaCha8Rng| {
                let mut flat = Vec::with_capacity(dims);
                for _ in 0..dims {
                    let u: f64 = rng.gen();
                    flat.push(half_width * (2.0 * u - 1.0));
                }
                g.eval_ambient(&VectorTuple::from_flat(k, m, flat)) * volume
            })
        }
    };
    Ok(moments_to_estimate(
        sum,
        sumsq,
        mc.samples,
        1.0,
        Method::AmbientMc,
    ))
}
