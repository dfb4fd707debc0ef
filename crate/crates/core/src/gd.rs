//! Linear-regression gradient descent over the simulated cluster.
//!
//! The loss is `L(θ) = ‖y − Xθ‖² / 2N` with gradient `(Wθ − b)/N`, where
//! `W = XᵀX` is split into `M` row blocks and `b = Xᵀy`. Each iteration the
//! master decodes whichever block products `W_i·θ` it can from the coded
//! task results received before the iteration ends, and blocks it could not
//! decode contribute zero to the update.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decoder::decode_values;
use crate::schedule::build;
use crate::sim::{simulate_trace, threshold_for};
use crate::straggler::trial_rng;
use crate::{Codeword, Error, MdsPoints, Result, Scheme, StragglerParams};

#[derive(Clone, Debug)]
pub struct RegressionProblem {
    x: DMatrix<f64>,
    y: DVector<f64>,
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    blocks: usize,
}

impl RegressionProblem {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, blocks: usize) -> Result<Self> {
        let (n, l) = x.shape();
        if n == 0 || l == 0 {
            return Err(Error::Dimension("empty data matrix".into()));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!("{} labels for {n} samples", y.len())));
        }
        if blocks == 0 || l % blocks != 0 {
            return Err(Error::Dimension(format!(
                "{blocks} blocks do not divide {l} features"
            )));
        }
        let gram = x.transpose() * &x;
        let xty = x.transpose() * &y;
        Ok(Self { x, y, gram, xty, blocks })
    }

    /// Standard-normal `X` and `θ*`, `y = Xθ* + noise·ε`.
    pub fn synthetic(samples: usize, features: usize, blocks: usize, noise: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let x = DMatrix::from_fn(samples, features, |_, _| normal());
        let truth = DVector::from_fn(features, |_, _| normal());
        let eps = DVector::from_fn(samples, |_, _| normal());
        let y = &x * truth + eps * noise;
        Self::new(x, y, blocks)
    }

    pub fn samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn features(&self) -> usize {
        self.x.ncols()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_height(&self) -> usize {
        self.features() / self.blocks
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn xty(&self) -> &DVector<f64> {
        &self.xty
    }

    /// Row block `W_i`.
    pub fn block(&self, i: usize) -> DMatrix<f64> {
        let h = self.block_height();
        self.gram.rows(i * h, h).into_owned()
    }

    pub fn loss(&self, theta: &DVector<f64>) -> f64 {
        let r = &self.y - &self.x * theta;
        r.norm_squared() / (2.0 * self.samples() as f64)
    }

    /// `(Wθ − b)/N`.
    pub fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        (&self.gram * theta - &self.xty) / self.samples() as f64
    }

    /// Power-iteration estimate of `λ_max(W)/N`.
    pub fn curvature_estimate(&self) -> f64 {
        let n = self.samples() as f64;
        let mut v = DVector::from_element(self.features(), 1.0).normalize();
        let mut lambda = 0.0;
        for _ in 0..1000 {
            let w = &self.gram * &v;
            let next = v.dot(&w);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = w / norm;
            if (next - lambda).abs() <= 1e-13 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda / n
    }

    /// Largest Gershgorin row bound of `W/N`.
    pub fn gershgorin_bound(&self) -> f64 {
        let n = self.samples() as f64;
        self.gram
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>() / n)
            .fold(0.0, f64::max)
    }

    /// Worker computation: `(Σ c·W_b)·θ`, with padded blocks treated as zero.
    pub fn coded_product(&self, cw: &Codeword, theta: &DVector<f64>) -> DVector<f64> {
        let h = self.block_height();
        let mut coded = DMatrix::<f64>::zeros(h, self.features());
        for &(b, c) in cw.terms() {
            if b < self.blocks {
                coded += self.gram.rows(b * h, h) * c as f64;
            }
        }
        coded * theta
    }
}

/// Exact `W_i·θ` for every block.
pub fn block_products(problem: &RegressionProblem, theta: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    if theta.len() != problem.features() {
        return Err(Error::Dimension(format!(
            "θ has {} entries for {} features",
            theta.len(),
            problem.features()
        )));
    }
    let h = problem.block_height();
    Ok((0..problem.blocks())
        .map(|i| problem.gram.rows(i * h, h) * theta)
        .collect())
}

#[derive(Clone, Debug)]
pub struct GdState {
    pub theta: DVector<f64>,
    pub iteration: usize,
    pub learning_rate: f64,
    pub loss_history: Vec<f64>,
}

impl GdState {
    pub fn new(problem: &RegressionProblem, learning_rate: f64) -> Self {
        let theta = DVector::zeros(problem.features());
        let loss = problem.loss(&theta);
        Self {
            theta,
            iteration: 0,
            learning_rate,
            loss_history: vec![loss],
        }
    }
}

/// One step using exact products of the `recovered` blocks.
pub fn gd_step(state: &GdState, recovered: &BTreeSet<usize>, problem: &RegressionProblem) -> Result<GdState> {
    let products = block_products(problem, &state.theta)?;
    let values: BTreeMap<usize, Vec<f64>> = recovered
        .iter()
        .map(|&i| {
            products
                .get(i)
                .map(|p| (i, p.as_slice().to_vec()))
                .ok_or_else(|| Error::Dimension(format!("block {i} out of range")))
        })
        .collect::<Result<_>>()?;
    gd_step_decoded(state, &values, problem)
}

/// One step from decoded block products; missing blocks leave their
/// coordinates untouched.
pub fn gd_step_decoded(
    state: &GdState,
    decoded: &BTreeMap<usize, Vec<f64>>,
    problem: &RegressionProblem,
) -> Result<GdState> {
    let h = problem.block_height();
    let n = problem.samples() as f64;
    let mut theta = state.theta.clone();
    for (&i, value) in decoded {
        if i >= problem.blocks() || value.len() != h {
            return Err(Error::Dimension(format!("bad decoded block {i}")));
        }
        for (k, v) in value.iter().enumerate() {
            let row = i * h + k;
            theta[row] -= state.learning_rate * (v - problem.xty[row]) / n;
        }
    }
    let mut loss_history = state.loss_history.clone();
    loss_history.push(problem.loss(&theta));
    Ok(GdState {
        theta,
        iteration: state.iteration + 1,
        learning_rate: state.learning_rate,
        loss_history,
    })
}

/// `1 / λ̂` with `λ̂` the power-iteration estimate of `λ_max(W)/N`.
pub fn default_learning_rate(problem: &RegressionProblem) -> f64 {
    1.0 / problem.curvature_estimate()
}

/// Full-gradient descent computed from `W` directly; returns losses
/// starting with `L(0)`.
pub fn centralized_gd(problem: &RegressionProblem, iterations: usize, eta: f64) -> Vec<f64> {
    let mut theta = DVector::zeros(problem.features());
    let mut losses = vec![problem.loss(&theta)];
    for _ in 0..iterations {
        theta -= problem.gradient(&theta) * eta;
        losses.push(problem.loss(&theta));
    }
    losses
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub scheme: Scheme,
    pub workers: usize,
    pub load: usize,
    pub params: StragglerParams,
    pub tolerance_rate: f64,
    pub seed: u64,
    pub mds_points: MdsPoints,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdIteration {
    pub completion_time: f64,
    /// Blocks decoded and used in the update.
    pub recovered: usize,
    /// Largest per-block `‖decoded − W_iθ‖∞ / ‖W_iθ‖∞`.
    pub max_decode_error: f64,
}

#[derive(Clone, Debug)]
pub struct GdRun {
    pub learning_rate: f64,
    /// `losses[0]` is the starting loss, `losses[k]` the loss after step `k`.
    pub losses: Vec<f64>,
    pub iterations: Vec<GdIteration>,
    pub theta: DVector<f64>,
}

impl GdRun {
    pub fn total_time(&self) -> f64 {
        self.iterations.iter().map(|i| i.completion_time).sum()
    }
}

/// Runs `iterations` steps. Iteration `k` draws fresh worker slowdowns from
/// stream `(seed, k)`, ends once the tolerance threshold is met, and decodes
/// the received task results exactly.
pub fn run_gd(problem: &RegressionProblem, cfg: &GdConfig, iterations: usize, eta: Option<f64>) -> Result<GdRun> {
    let eta = eta.unwrap_or_else(|| default_learning_rate(problem));
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Parameter(format!("learning rate must be positive, got {eta}")));
    }
    cfg.params.validate()?;
    let m = problem.blocks();
    let schedule = build(cfg.scheme, m, cfg.workers, cfg.load, cfg.mds_points)?;
    let m_prime = match cfg.scheme {
        Scheme::Mcc => m,
        _ => threshold_for(cfg.tolerance_rate, m)?,
    };

    let mut state = GdState::new(problem, eta);
    let mut log = Vec::with_capacity(iterations);
    for k in 0..iterations {
        let mut rng = trial_rng(cfg.seed, k as u64);
        let trace = simulate_trace(&schedule, cfg.scheme.delivery(), &cfg.params, &mut rng)?;
        let outcome = trace.outcome(m_prime);
        let received: Vec<Codeword> = trace.delivered(&schedule, outcome.load).cloned().collect();
        let results: Vec<Vec<f64>> = received
            .iter()
            .map(|cw| problem.coded_product(cw, &state.theta).as_slice().to_vec())
            .collect();
        let decoded = decode_values(&received, &results, m)?;

        let direct = block_products(problem, &state.theta)?;
        let max_decode_error = decoded
            .iter()
            .map(|(&i, v)| relative_error(v, direct[i].as_slice()))
            .fold(0.0, f64::max);

        state = gd_step_decoded(&state, &decoded, problem)?;
        log.push(GdIteration {
            completion_time: outcome.completion_time,
            recovered: decoded.len(),
            max_decode_error,
        });
    }
    Ok(GdRun {
        learning_rate: eta,
        losses: state.loss_history,
        iterations: log,
        theta: state.theta,
    })
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if diff == 0.0 {
        return 0.0;
    }
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    diff / scale
}
