//! Exhaustive score-vector analysis.
//!
//! Every score vector in `{0..r}^K` is decoded and the passing vectors are
//! grouped by cumulative type `N = (N_0, …, N_r)`. Because all workers share
//! the same statistics, a vector's probability depends only on its type, so
//! `Pr(T < t) = Σ_N count(N) · ∏_s P_s(t)^{N_s}`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::decoder::{received_codewords, recoverable_blocks, ScoreVector};
use crate::quadrature::adaptive_simpson;
use crate::straggler::{p_exact_all, StragglerParams};
use crate::{Delivery, Error, Result, ScheduleMatrix};

/// Default cap on the number of enumerated score vectors.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// `counts[s]` is the number of workers that finished exactly `s` tasks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CumulativeType {
    counts: Vec<usize>,
}

impl CumulativeType {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Parameter("a cumulative type needs at least N_0".into()));
        }
        Ok(Self { counts })
    }

    /// Builds from `(N_r, …, N_0)`, the order used in the published tables.
    pub fn from_descending(desc: &[usize]) -> Result<Self> {
        Self::new(desc.iter().rev().copied().collect())
    }

    pub fn of_scores(scores: &[usize], load: usize) -> Self {
        let mut counts = vec![0; load + 1];
        for &c in scores {
            counts[c] += 1;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn load(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn workers(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of score vectors with this type.
    pub fn multiplicity(&self) -> u128 {
        let mut remaining = self.workers() as u128;
        let mut out: u128 = 1;
        for &n in &self.counts {
            out *= binomial(remaining, n as u128);
            remaining -= n as u128;
        }
        out
    }

    /// Key for listing types with `N_r` descending, then `N_{r-1}`, ….
    fn descending_key(&self) -> Vec<std::cmp::Reverse<usize>> {
        self.counts.iter().rev().map(|&n| std::cmp::Reverse(n)).collect()
    }
}

impl fmt::Display for CumulativeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .counts
            .iter()
            .enumerate()
            .rev()
            .map(|(s, n)| format!("N{s}={n}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TypeCount {
    /// Vectors of this type that meet the threshold.
    pub passing: u64,
    /// All vectors of this type.
    pub total: u64,
}

/// Passing score-vector counts per cumulative type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeCountTable {
    pub workers: usize,
    pub load: usize,
    pub m_prime: usize,
    pub entries: BTreeMap<CumulativeType, TypeCount>,
}

impl TypeCountTable {
    pub fn passing(&self, ty: &CumulativeType) -> u64 {
        self.entries.get(ty).map_or(0, |c| c.passing)
    }

    /// All types, `N_r` descending first.
    pub fn types_descending(&self) -> Vec<(&CumulativeType, &TypeCount)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by_key(|(ty, _)| ty.descending_key());
        v
    }

    /// Types with at least one passing vector, `N_r` descending first.
    pub fn passing_types(&self) -> Vec<(&CumulativeType, u64)> {
        self.types_descending()
            .into_iter()
            .filter(|(_, c)| c.passing > 0)
            .map(|(ty, c)| (ty, c.passing))
            .collect()
    }
}

/// Decodes every score vector of `s` and counts, per type, those recovering
/// at least `m_prime` blocks.
pub fn count_recoverable_by_type(
    s: &ScheduleMatrix,
    mode: Delivery,
    m_prime: usize,
    budget: u128,
) -> Result<TypeCountTable> {
    if m_prime > s.num_blocks() {
        return Err(Error::Parameter(format!(
            "threshold {m_prime} exceeds the block count {}",
            s.num_blocks()
        )));
    }
    let base = s.load() as u128 + 1;
    let vectors = u32::try_from(s.workers())
        .ok()
        .and_then(|k| base.checked_pow(k))
        .unwrap_or(u128::MAX);
    if vectors > budget {
        return Err(Error::BudgetExceeded { vectors, budget });
    }
    let vectors = vectors as u64;

    const CHUNK: u64 = 4096;
    let chunks = vectors.div_ceil(CHUNK);
    let entries = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<BTreeMap<CumulativeType, TypeCount>> {
            let mut local = BTreeMap::new();
            let mut scores = vec![0usize; s.workers()];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(vectors) {
                let mut rest = idx;
                for x in scores.iter_mut() {
                    *x = (rest % base as u64) as usize;
                    rest /= base as u64;
                }
                let ty = CumulativeType::of_scores(&scores, s.load());
                let sv = ScoreVector::new(scores.clone(), s.load())?;
                let received = received_codewords(s, &sv, mode)?;
                let pass = recoverable_blocks(&received, s.num_blocks()).recovered() >= m_prime;
                let e: &mut TypeCount = local.entry(ty).or_default();
                e.total += 1;
                e.passing += pass as u64;
            }
            Ok(local)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (ty, c) in b {
                let e = a.entry(ty).or_default();
                e.total += c.total;
                e.passing += c.passing;
            }
            Ok(a)
        })?;

    Ok(TypeCountTable {
        workers: s.workers(),
        load: s.load(),
        m_prime,
        entries,
    })
}

/// Probability of one particular score vector of type `ty` at time `t`:
/// `∏_s P_s(t)^{N_s}`.
pub fn type_probability(ty: &CumulativeType, t: f64, params: &StragglerParams, load: usize) -> Result<f64> {
    if ty.load() != load {
        return Err(Error::Parameter(format!(
            "type has {} entries but the load is {load}",
            ty.counts().len()
        )));
    }
    let p = p_exact_all(t, load, params)?;
    Ok(product(ty, &p))
}

fn product(ty: &CumulativeType, p: &[f64]) -> f64 {
    ty.counts()
        .iter()
        .zip(p)
        .map(|(&n, &ps)| ps.powi(n as i32))
        .product()
}

/// `Pr(T < t)`: passing counts weighted by per-vector type probabilities.
pub fn completion_cdf(table: &TypeCountTable, t: f64, params: &StragglerParams) -> Result<f64> {
    let p = p_exact_all(t, table.load, params)?;
    let sum: f64 = table
        .types_descending()
        .into_iter()
        .filter(|(_, c)| c.passing > 0)
        .map(|(ty, c)| c.passing as f64 * product(ty, &p))
        .sum();
    Ok(sum.clamp(0.0, 1.0))
}

/// Integration tolerance per piece for [`expected_completion_time`].
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Survival level at which the tail is truncated.
pub const TAIL_CUTOFF: f64 = 1e-9;

/// `E[T] = ∫_0^∞ (1 − Pr(T < t)) dt`.
///
/// The integrand has kinks at multiples of `α` up to `rα`; each of those
/// pieces and the smooth tail are integrated separately with adaptive
/// Simpson (absolute tolerance [`QUADRATURE_TOL`]). The tail ends once the
/// survival drops below [`TAIL_CUTOFF`].
pub fn expected_completion_time(table: &TypeCountTable, params: &StragglerParams) -> Result<f64> {
    params.validate()?;
    let all_done = CumulativeType::of_scores(&vec![table.load; table.workers], table.load);
    if table.passing(&all_done) == 0 {
        return Err(Error::Infeasible(format!(
            "the threshold {} is not met even when every task finishes",
            table.m_prime
        )));
    }
    let survival = |t: f64| 1.0 - completion_cdf(table, t, params).expect("t is nonnegative");

    let mut knots = vec![0.0];
    if params.alpha > 0.0 {
        knots.extend((1..=table.load).map(|s| s as f64 * params.alpha));
    }
    let mut end = knots.last().copied().unwrap_or(0.0).max(1.0 / params.mu);
    while survival(end) >= TAIL_CUTOFF {
        end *= 2.0;
    }
    knots.push(end);

    Ok(knots
        .windows(2)
        .map(|w| adaptive_simpson(&survival, w[0], w[1], QUADRATURE_TOL))
        .sum())
}
