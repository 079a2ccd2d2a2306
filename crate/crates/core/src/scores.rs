//! Partial-score algebra: adequacy from dual conditional cross-entropies,
//! domain score with clip and cut-off, embedding cosine similarity, and the
//! multiplicative combiner.
//!
//! All entropies are consumed in nats/token. Every partial lives in [0, 1]
//! and the combined score is their product, so a single zero partial
//! excludes a pair outright.

use crate::error::{Error, Result};

/// Flags for the adequacy score. Both default to on; switching one off
/// drops the corresponding term (the two ablations).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdqConfig {
    pub use_abs_difference: bool,
    pub use_ce_weighting: bool,
}

impl Default for AdqConfig {
    fn default() -> Self {
        AdqConfig { use_abs_difference: true, use_ce_weighting: true }
    }
}

/// Domain-score cut-off; pairs whose clipped perplexity ratio falls below
/// `cutoff` are hard-rejected (score 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomConfig {
    pub cutoff: f64,
}

impl DomConfig {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cutoff) {
            return Err(Error::usage(format!("cutoff must be in [0,1], got {cutoff}")));
        }
        Ok(DomConfig { cutoff })
    }
}

impl Default for DomConfig {
    fn default() -> Self {
        DomConfig { cutoff: 0.0 }
    }
}

/// Adequacy of a pair from the two inverse-direction conditional
/// cross-entropies: divergence is penalized by their absolute difference
/// and improbability by their average, then the sum is negated and
/// exponentiated into (0, 1].
pub fn adq(h_fwd: f64, h_bwd: f64, cfg: AdqConfig) -> Result<f64> {
    if !h_fwd.is_finite() || !h_bwd.is_finite() {
        return Err(Error::data(format!(
            "adq requires finite cross-entropies, got {h_fwd} and {h_bwd}"
        )));
    }
    let mut penalty = 0.0;
    if cfg.use_abs_difference {
        penalty += (h_fwd - h_bwd).abs();
    }
    if cfg.use_ce_weighting {
        penalty += 0.5 * (h_fwd + h_bwd);
    }
    Ok((-penalty).exp())
}

/// Domain score: the target sentence's perplexity ratio between the
/// out-of-domain and in-domain models, clipped to at most 1 and zeroed
/// below the cut-off.
///
/// The clip is `min(dom', 1)`: a strong in-domain preference must not be
/// able to override the other partials, while a low score still penalizes.
pub fn dom(h_in: f64, h_out: f64, cfg: DomConfig) -> Result<f64> {
    if !h_in.is_finite() || !h_out.is_finite() {
        return Err(Error::data(format!(
            "dom requires finite cross-entropies, got {h_in} and {h_out}"
        )));
    }
    let ratio = (-(h_in - h_out)).exp();
    let clipped = ratio.min(1.0);
    Ok(if clipped >= cfg.cutoff { clipped } else { 0.0 })
}

/// Outcome of the similarity score. Degenerate inputs (empty vector list,
/// dimension mismatch, zero-norm mean) score 0 but are reported so callers
/// can keep a diagnostic count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimOutcome {
    Score(f64),
    Degenerate,
}

impl SimOutcome {
    /// Score with degenerate inputs collapsed to 0.
    pub fn value(self) -> f64 {
        match self {
            SimOutcome::Score(v) => v,
            SimOutcome::Degenerate => 0.0,
        }
    }
}

/// Mean-pools each side's token vectors and returns their cosine
/// similarity clamped to [0, 1]. Anti-correlated pairs are worthless, not
/// errors, so negative cosines clamp to 0.
pub fn sim(vecs_x: &[Vec<f64>], vecs_y: &[Vec<f64>]) -> SimOutcome {
    let sx = match mean_pool(vecs_x) {
        Some(v) => v,
        None => return SimOutcome::Degenerate,
    };
    let sy = match mean_pool(vecs_y) {
        Some(v) => v,
        None => return SimOutcome::Degenerate,
    };
    if sx.len() != sy.len() {
        return SimOutcome::Degenerate;
    }
    let dot: f64 = sx.iter().zip(&sy).map(|(a, b)| a * b).sum();
    let nx = sx.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = sy.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return SimOutcome::Degenerate;
    }
    SimOutcome::Score((dot / (nx * ny)).clamp(0.0, 1.0))
}

fn mean_pool(vecs: &[Vec<f64>]) -> Option<Vec<f64>> {
    let first = vecs.first()?;
    let dim = first.len();
    if dim == 0 || vecs.iter().any(|v| v.len() != dim) {
        return None;
    }
    let mut mean = vec![0.0; dim];
    for v in vecs {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let n = vecs.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Some(mean)
}

/// Clamps each named partial to [0, 1] and returns the product. A zero
/// factor makes the result exactly 0.
pub fn combine(partials: &[(&str, f64)]) -> Result<f64> {
    let mut total = 1.0;
    for (name, value) in partials {
        if !value.is_finite() {
            return Err(Error::data(format!("scorer {name} produced non-finite value {value}")));
        }
        total *= value.clamp(0.0, 1.0);
    }
    Ok(total)
}
