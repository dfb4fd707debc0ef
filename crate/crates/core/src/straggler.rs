//! Per-worker completion statistics.
//!
//! Each worker draws one slowdown `X ~ Exp(μ)` per iteration and finishes
//! its `s`-th task at `s·(α + X)`. Hence
//! `Pr(at least s done by t) = 1 − e^{−μ(t/s − α)}` for `t ≥ sα`, and the
//! exact-count probabilities are differences of consecutive survival terms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StragglerParams {
    /// Average number of computations per unit time.
    pub mu: f64,
    /// Minimum time per computation.
    pub alpha: f64,
}

impl StragglerParams {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Parameter(format!("alpha must be nonnegative, got {alpha}")));
        }
        Ok(Self { mu, alpha })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.mu, self.alpha).map(|_| ())
    }
}

impl Default for StragglerParams {
    fn default() -> Self {
        Self { mu: 10.0, alpha: 0.01 }
    }
}

/// `Pr(at least s tasks finished by t)`.
fn at_least(s: usize, t: f64, p: &StragglerParams) -> f64 {
    if s == 0 {
        return 1.0;
    }
    let s = s as f64;
    if t < s * p.alpha {
        0.0
    } else {
        -(-p.mu * (t / s - p.alpha)).exp_m1()
    }
}

/// Probability that a worker with load `load` has finished exactly `s`
/// tasks by time `t`.
///
/// For `0 < s < r` this is `0` below `sα`, `1 − e^{−μ(t/s−α)}` on
/// `[sα, (s+1)α)` and `e^{−μ(t/(s+1)−α)} − e^{−μ(t/s−α)}` from `(s+1)α` on.
/// `s = 0` and `s = r` drop the missing lower and upper terms.
pub fn p_exact(s: usize, t: f64, load: usize, params: &StragglerParams) -> Result<f64> {
    if s > load {
        return Err(Error::Parameter(format!("task count {s} exceeds the load {load}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Parameter(format!("time must be nonnegative, got {t}")));
    }
    let upper = if s == load { 0.0 } else { at_least(s + 1, t, params) };
    Ok((at_least(s, t, params) - upper).max(0.0))
}

/// `[p_exact(0, t), …, p_exact(r, t)]`.
pub fn p_exact_all(t: f64, load: usize, params: &StragglerParams) -> Result<Vec<f64>> {
    (0..=load).map(|s| p_exact(s, t, load, params)).collect()
}

/// One worker's slowdown `X ~ Exp(μ)`.
pub fn sample_slowdown<R: Rng + ?Sized>(params: &StragglerParams, rng: &mut R) -> f64 {
    Exp::new(params.mu).expect("mu validated positive").sample(rng)
}

/// Finish times of tasks `1..=r` for a worker with slowdown `x`.
pub fn completion_times(load: usize, params: &StragglerParams, x: f64) -> Vec<f64> {
    (1..=load).map(|s| s as f64 * (params.alpha + x)).collect()
}

/// Samples finish times `t_s = s·(α + X)` for `s = 1..=r`.
pub fn sample_completion_times<R: Rng + ?Sized>(load: usize, params: &StragglerParams, rng: &mut R) -> Vec<f64> {
    let x = sample_slowdown(params, rng);
    completion_times(load, params, x)
}

/// Independent stream for trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
