//! Expected information gain with the measurement marginalized out, and the
//! cheaper single-hypothetical-measurement variant.

use super::QuadratureSpec;
use crate::belief::SourcePosterior;
use crate::error::Result;
use crate::field::{PlumeParams, Point};

/// E_m[IG(m | candidate)] in bits against the fixed `prior`.
///
/// The posterior predictive is a Gaussian mixture over hypotheses, so the
/// integral is done per mixture component with Gauss–Hermite nodes:
/// Σ_s p(s) Σ_k w_k IG(f_s + √2 σ ξ_k).
pub fn eig_exact(
    post: &SourcePosterior,
    prior: &SourcePosterior,
    candidate: Point,
    params: &PlumeParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    let (nodes, weights) = quad.nodes();
    let sigma = params.noise_sigma;
    let f = post.predicted_concentrations(candidate, params);
    let mut scratch = Vec::with_capacity(f.len());
    let mut total = 0.0;
    for (s, &lp) in post.log_probs().iter().enumerate() {
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let p = lp.exp();
        if p == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (xi, w) in nodes.iter().zip(&weights) {
            let m = f[s] + std::f64::consts::SQRT_2 * sigma * xi;
            inner += w * post.info_gain_after(prior, &f, m, sigma, &mut scratch)?;
        }
        total += p * inner;
    }
    Ok(total)
}

/// Posterior-mean measurement Σ_s f(candidate, s)·p(s).
pub fn expected_measurement(post: &SourcePosterior, candidate: Point, params: &PlumeParams) -> f64 {
    post.predicted_concentrations(candidate, params)
        .iter()
        .zip(post.log_probs())
        .map(|(f, lp)| f * lp.exp())
        .sum()
}

/// IG (bits, against `prior`) after observing the posterior-mean measurement.
pub fn eig_at_expected_measurement(
    post: &SourcePosterior,
    prior: &SourcePosterior,
    candidate: Point,
    params: &PlumeParams,
) -> Result<f64> {
    let f = post.predicted_concentrations(candidate, params);
    let m_bar: f64 = f.iter().zip(post.log_probs()).map(|(f, lp)| f * lp.exp()).sum();
    let mut scratch = Vec::with_capacity(f.len());
    post.info_gain_after(prior, &f, m_bar, params.noise_sigma, &mut scratch)
}
