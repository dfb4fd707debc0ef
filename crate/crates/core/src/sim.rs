//! Monte Carlo iteration simulator.
//!
//! A trial draws one slowdown per worker, orders every message arrival in
//! time and feeds the carried codewords to an incremental decoder. The
//! iteration ends at the first arrival after which at least `M'` blocks are
//! recoverable; load and volume count every message that arrived by then.
//!
//! Trial `i` always uses the random stream `(master_seed, i)`, so schemes
//! and tolerance levels are compared on the same worker slowdowns and the
//! output does not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::IncrementalDecoder;
use crate::schedule::build;
use crate::straggler::{completion_times, sample_slowdown, trial_rng};
use crate::{Codeword, Delivery, Error, MdsPoints, Result, ScheduleMatrix, Scheme, StragglerParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub blocks: usize,
    pub workers: usize,
    pub load: usize,
    pub params: StragglerParams,
    pub tolerance_rate: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub mds_points: MdsPoints,
    /// Worker threads for trial execution; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    /// `K = M = 20`, `r = 3`, `μ = 10`, `α = 0.01`, 10⁴ trials.
    pub fn reference(scheme: Scheme) -> Self {
        Self {
            scheme,
            blocks: 20,
            workers: 20,
            load: 3,
            params: StragglerParams::default(),
            tolerance_rate: 0.0,
            trials: 10_000,
            master_seed: 2020,
            mds_points: MdsPoints::default(),
            threads: None,
        }
    }

    /// Blocks required to end an iteration. MCC always needs all of them.
    pub fn threshold(&self) -> Result<usize> {
        match self.scheme {
            Scheme::Mcc => Ok(self.blocks),
            _ => threshold_for(self.tolerance_rate, self.blocks),
        }
    }

    pub fn schedule(&self) -> Result<ScheduleMatrix> {
        build(self.scheme, self.blocks, self.workers, self.load, self.mds_points)
    }
}

/// `M' = ⌈(1 − tolerance)·M⌉`, computed as `M − ⌊tolerance·M⌋` with a small
/// guard so that e.g. `0.05 · 20` counts as exactly one skipped block.
pub fn threshold_for(tolerance_rate: f64, blocks: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&tolerance_rate) {
        return Err(Error::Parameter(format!(
            "tolerance rate must lie in [0, 1], got {tolerance_rate}"
        )));
    }
    let skipped = (tolerance_rate * blocks as f64 + 1e-9).floor() as usize;
    Ok(blocks - skipped.min(blocks))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationOutcome {
    pub completion_time: f64,
    /// Messages received up to and including the completion time.
    pub load: usize,
    /// Received data in units of a full `Wθ`.
    pub volume: f64,
    pub recovered: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub worker: usize,
    /// Rows of the worker's column carried by this message.
    pub tasks: std::ops::Range<usize>,
}

/// All message arrivals of one iteration with the decoder state after each.
#[derive(Clone, Debug)]
pub struct ArrivalTrace {
    pub arrivals: Vec<Arrival>,
    /// Recovered true blocks after processing `arrivals[..=i]`.
    pub recovered_after: Vec<usize>,
    units_per_message: usize,
    num_blocks: usize,
}

impl ArrivalTrace {
    /// Ends the iteration at the first arrival reaching `m_prime` blocks.
    /// Returns an infinite time when the threshold is never reached.
    pub fn outcome(&self, m_prime: usize) -> IterationOutcome {
        if m_prime == 0 {
            return IterationOutcome {
                completion_time: 0.0,
                load: 0,
                volume: 0.0,
                recovered: 0,
            };
        }
        let Some(first) = self.recovered_after.iter().position(|&r| r >= m_prime) else {
            return IterationOutcome {
                completion_time: f64::INFINITY,
                load: self.arrivals.len(),
                volume: self.volume(self.arrivals.len()),
                recovered: self.recovered_after.last().copied().unwrap_or(0),
            };
        };
        let t = self.arrivals[first].time;
        let mut last = first;
        while last + 1 < self.arrivals.len() && self.arrivals[last + 1].time <= t {
            last += 1;
        }
        IterationOutcome {
            completion_time: t,
            load: last + 1,
            volume: self.volume(last + 1),
            recovered: self.recovered_after[last],
        }
    }

    fn volume(&self, messages: usize) -> f64 {
        (messages * self.units_per_message) as f64 / self.num_blocks as f64
    }

    /// Codewords delivered by the first `messages` arrivals.
    pub fn delivered<'a>(&'a self, s: &'a ScheduleMatrix, messages: usize) -> impl Iterator<Item = &'a Codeword> + 'a {
        self.arrivals[..messages]
            .iter()
            .flat_map(move |a| a.tasks.clone().map(move |row| s.cell(row, a.worker)))
    }
}

/// Builds the arrival trace for given per-worker slowdowns.
pub fn trace_from_slowdowns(
    s: &ScheduleMatrix,
    mode: Delivery,
    params: &StragglerParams,
    slowdowns: &[f64],
) -> Result<ArrivalTrace> {
    if slowdowns.len() != s.workers() {
        return Err(Error::Dimension(format!(
            "{} slowdowns for {} workers",
            slowdowns.len(),
            s.workers()
        )));
    }
    let r = s.load();
    let mut arrivals = Vec::with_capacity(s.workers() * r);
    for (worker, &x) in slowdowns.iter().enumerate() {
        let times = completion_times(r, params, x);
        match mode {
            Delivery::MultiMessage => arrivals.extend(times.iter().enumerate().map(|(row, &time)| Arrival {
                time,
                worker,
                tasks: row..row + 1,
            })),
            Delivery::Bundled => arrivals.push(Arrival {
                time: times[r - 1],
                worker,
                tasks: 0..r,
            }),
        }
    }
    // stable: ties keep worker, then task order
    arrivals.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut dec = IncrementalDecoder::for_schedule(s);
    let mut recovered_after = Vec::with_capacity(arrivals.len());
    let mut recovered = 0;
    for a in &arrivals {
        if recovered < s.num_blocks() {
            for row in a.tasks.clone() {
                recovered = dec.insert(s.cell(row, a.worker));
            }
        }
        recovered_after.push(recovered);
    }
    Ok(ArrivalTrace {
        arrivals,
        recovered_after,
        units_per_message: match mode {
            Delivery::MultiMessage => 1,
            Delivery::Bundled => r,
        },
        num_blocks: s.num_blocks(),
    })
}

/// Samples one slowdown per worker (in worker order) and builds the trace.
pub fn simulate_trace<R: Rng + ?Sized>(
    s: &ScheduleMatrix,
    mode: Delivery,
    params: &StragglerParams,
    rng: &mut R,
) -> Result<ArrivalTrace> {
    let xs: Vec<f64> = (0..s.workers()).map(|_| sample_slowdown(params, rng)).collect();
    trace_from_slowdowns(s, mode, params, &xs)
}

pub fn simulate_iteration<R: Rng + ?Sized>(
    s: &ScheduleMatrix,
    mode: Delivery,
    m_prime: usize,
    params: &StragglerParams,
    rng: &mut R,
) -> Result<IterationOutcome> {
    if m_prime > s.num_blocks() {
        return Err(Error::Parameter(format!(
            "threshold {m_prime} exceeds the block count {}",
            s.num_blocks()
        )));
    }
    Ok(simulate_trace(s, mode, params, rng)?.outcome(m_prime))
}

/// Sample mean with a 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub ci: f64,
}

impl Summary {
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
        let values: Vec<f64> = values.collect();
        for &v in &values {
            n += 1;
            sum += v;
        }
        if n == 0 {
            return Self::default();
        }
        let mean = sum / n as f64;
        for &v in &values {
            sq += (v - mean) * (v - mean);
        }
        let ci = if n > 1 {
            1.96 * (sq / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, ci }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub time: Summary,
    pub load: Summary,
    pub volume: Summary,
    pub recovered: Summary,
}

impl Aggregate {
    pub fn of(outcomes: &[IterationOutcome]) -> Self {
        Self {
            trials: outcomes.len(),
            time: Summary::of(outcomes.iter().map(|o| o.completion_time)),
            load: Summary::of(outcomes.iter().map(|o| o.load as f64)),
            volume: Summary::of(outcomes.iter().map(|o| o.volume)),
            recovered: Summary::of(outcomes.iter().map(|o| o.recovered as f64)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: SimConfig,
    pub threshold: usize,
    pub aggregate: Aggregate,
    /// Per-trial outcomes in trial order.
    pub outcomes: Vec<IterationOutcome>,
}

pub fn run_experiment(config: &SimConfig) -> Result<Experiment> {
    let mut rows = sweep(config, &[config.scheme], &[config.tolerance_rate])?;
    let row = rows.pop().expect("one scheme, one tolerance");
    Ok(Experiment {
        config: config.clone(),
        threshold: row.threshold,
        aggregate: row.aggregate,
        outcomes: row.outcomes,
    })
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub tolerance: f64,
    pub threshold: usize,
    pub aggregate: Aggregate,
    pub outcomes: Vec<IterationOutcome>,
}

/// Runs every `(scheme, tolerance)` pair of the grid; `base.scheme` and
/// `base.tolerance_rate` are ignored. Rows are scheme-major in the given order.
pub fn sweep_tolerance(base: &SimConfig, schemes: &[Scheme], grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Parameter("tolerance grid is empty".into()));
    }
    sweep(base, schemes, grid)
}

fn sweep(base: &SimConfig, schemes: &[Scheme], grid: &[f64]) -> Result<Vec<SweepRow>> {
    if base.trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    base.params.validate()?;
    let mut rows = Vec::new();
    for &scheme in schemes {
        let cfg = SimConfig { scheme, ..base.clone() };
        let schedule = cfg.schedule()?;
        let thresholds = grid
            .iter()
            .map(|&tol| SimConfig { tolerance_rate: tol, ..cfg.clone() }.threshold())
            .collect::<Result<Vec<_>>>()?;

        let run = || {
            (0..base.trials as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(base.master_seed, i);
                    let trace = simulate_trace(&schedule, scheme.delivery(), &base.params, &mut rng)?;
                    Ok(thresholds.iter().map(|&m| trace.outcome(m)).collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()
        };
        let per_trial = with_threads(base.threads, run)??;

        for (g, (&tol, &m)) in grid.iter().zip(&thresholds).enumerate() {
            let outcomes: Vec<IterationOutcome> = per_trial.iter().map(|o| o[g]).collect();
            rows.push(SweepRow {
                scheme,
                tolerance: tol,
                threshold: m,
                aggregate: Aggregate::of(&outcomes),
                outcomes,
            });
        }
    }
    Ok(rows)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}
