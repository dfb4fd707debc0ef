//! Exact recoverability decisions for received task results.
//!
//! Block `i` is recoverable when `e_i` lies in the rational row space of the
//! received coefficient vectors. Blocks with index `≥ M` are zero padding:
//! they are known a priori and enter the system as free unit rows.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::exact::{Echelon, ExactInt, Overflow};
use crate::{Codeword, Delivery, Error, Result, ScheduleMatrix};

/// Completed-task counts per worker, each in `[0, r]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScoreVector(Vec<usize>);

impl ScoreVector {
    pub fn new(counts: Vec<usize>, load: usize) -> Result<Self> {
        if let Some((j, &c)) = counts.iter().enumerate().find(|&(_, &c)| c > load) {
            return Err(Error::Dimension(format!(
                "worker {j} completed {c} tasks but the load is {load}"
            )));
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn workers(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryReport {
    pub recoverable: BTreeSet<usize>,
    /// Rank of the received system once padded blocks are accounted for.
    pub rank: usize,
    pub full: bool,
    pub num_blocks: usize,
}

impl RecoveryReport {
    pub fn recovered(&self) -> usize {
        self.recoverable.len()
    }
}

/// Codewords the master holds given score vector `scores`.
///
/// Multi-message delivery yields the first `c_j` tasks of every worker;
/// bundled delivery yields a worker's whole column only when `c_j = r`.
/// Output is ordered by worker, then task.
pub fn received_codewords(s: &ScheduleMatrix, scores: &ScoreVector, mode: Delivery) -> Result<Vec<Codeword>> {
    if scores.workers() != s.workers() {
        return Err(Error::Dimension(format!(
            "score vector has {} entries for {} workers",
            scores.workers(),
            s.workers()
        )));
    }
    if let Some(&c) = scores.counts().iter().find(|&&c| c > s.load()) {
        return Err(Error::Dimension(format!("score {c} exceeds the load {}", s.load())));
    }
    let mut out = Vec::new();
    for (j, &c) in scores.counts().iter().enumerate() {
        let take = match mode {
            Delivery::MultiMessage => c,
            Delivery::Bundled if c == s.load() => c,
            Delivery::Bundled => 0,
        };
        out.extend(s.column(j).take(take).cloned());
    }
    Ok(out)
}

/// Decides which of the `num_blocks` true blocks the codewords determine.
pub fn recoverable_blocks(codewords: &[Codeword], num_blocks: usize) -> RecoveryReport {
    let mut dec = IncrementalDecoder::new(num_blocks, padded_width(codewords, num_blocks));
    for cw in codewords {
        dec.insert(cw);
    }
    dec.report()
}

fn padded_width(codewords: &[Codeword], num_blocks: usize) -> usize {
    codewords
        .iter()
        .flat_map(Codeword::blocks)
        .map(|b| b + 1)
        .max()
        .unwrap_or(0)
        .max(num_blocks)
}

/// Whether at least `m_prime` blocks were recovered.
pub fn meets_threshold(report: &RecoveryReport, m_prime: usize) -> Result<bool> {
    if m_prime > report.num_blocks {
        return Err(Error::Parameter(format!(
            "threshold {m_prime} exceeds the block count {}",
            report.num_blocks
        )));
    }
    Ok(report.recovered() >= m_prime)
}

/// Iterative peeling: repeatedly resolve codewords with one unknown block.
/// Weaker than elimination on cyclic structures.
pub fn peel_recoverable(codewords: &[Codeword], num_blocks: usize) -> BTreeSet<usize> {
    let mut known: BTreeSet<usize> = codewords
        .iter()
        .flat_map(Codeword::blocks)
        .filter(|&b| b >= num_blocks)
        .collect();
    loop {
        let mut progressed = false;
        for cw in codewords {
            let mut unknown = cw.blocks().filter(|b| !known.contains(b));
            if let (Some(b), None) = (unknown.next(), unknown.next()) {
                known.insert(b);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    known.retain(|&b| b < num_blocks);
    known
}

enum Basis {
    Small(Echelon<i128>),
    Big(Echelon<BigInt>),
}

/// Elimination state fed one codeword at a time, in arrival order.
pub struct IncrementalDecoder {
    num_blocks: usize,
    width: usize,
    basis: Basis,
    history: Vec<Codeword>,
}

impl IncrementalDecoder {
    /// `width` is the padded block count; padded blocks start out known.
    pub fn new(num_blocks: usize, width: usize) -> Self {
        let width = width.max(num_blocks);
        let mut basis = Echelon::<i128>::new(width, width);
        for p in num_blocks..width {
            let mut row = vec![0i128; width];
            row[p] = 1;
            basis.insert(row).expect("unit rows cannot overflow");
        }
        Self {
            num_blocks,
            width,
            basis: Basis::Small(basis),
            history: Vec::new(),
        }
    }

    pub fn for_schedule(s: &ScheduleMatrix) -> Self {
        Self::new(s.num_blocks(), s.padded_blocks())
    }

    /// Adds one codeword and returns the number of recovered true blocks.
    pub fn insert(&mut self, cw: &Codeword) -> usize {
        self.history.push(cw.clone());
        let dense = cw.dense(self.width);
        let overflowed = match &mut self.basis {
            Basis::Small(e) => e.insert(dense.iter().map(|&c| c as i128).collect()).is_err(),
            Basis::Big(e) => {
                e.insert(dense.iter().map(|&c| BigInt::from(c)).collect())
                    .expect("bigint elimination cannot overflow");
                false
            }
        };
        if overflowed {
            self.promote();
        }
        self.recovered()
    }

    fn promote(&mut self) {
        let mut e = Echelon::<BigInt>::new(self.width, self.width);
        for p in self.num_blocks..self.width {
            let mut row = vec![BigInt::from(0); self.width];
            row[p] = BigInt::from(1);
            e.insert(row).expect("bigint");
        }
        for cw in &self.history {
            e.insert(cw.dense(self.width).into_iter().map(BigInt::from).collect())
                .expect("bigint");
        }
        self.basis = Basis::Big(e);
    }

    pub fn recovered(&self) -> usize {
        let padded = self.width - self.num_blocks;
        match &self.basis {
            Basis::Small(e) => e.unit_rows() - padded,
            Basis::Big(e) => e.unit_rows() - padded,
        }
    }

    pub fn is_full(&self) -> bool {
        self.recovered() == self.num_blocks
    }

    pub fn report(&self) -> RecoveryReport {
        let padded = self.width - self.num_blocks;
        let (recoverable, rank) = match &self.basis {
            Basis::Small(e) => (
                (0..self.num_blocks).filter(|&b| e.is_recoverable(b)).collect::<BTreeSet<_>>(),
                e.rank(),
            ),
            Basis::Big(e) => (
                (0..self.num_blocks).filter(|&b| e.is_recoverable(b)).collect::<BTreeSet<_>>(),
                e.rank(),
            ),
        };
        let full = recoverable.len() == self.num_blocks;
        RecoveryReport {
            recoverable,
            rank: rank - padded,
            full,
            num_blocks: self.num_blocks,
        }
    }
}

/// Recovers block values from task results by solving the integer system
/// exactly, then applying the rational combination to the `f64` results.
///
/// `results[k]` is the computed value of `codewords[k]`; all results must
/// share one length. Returns the values of every recoverable true block.
pub fn decode_values(
    codewords: &[Codeword],
    results: &[Vec<f64>],
    num_blocks: usize,
) -> Result<BTreeMap<usize, Vec<f64>>> {
    if codewords.len() != results.len() {
        return Err(Error::Dimension(format!(
            "{} codewords but {} results",
            codewords.len(),
            results.len()
        )));
    }
    let len = results.first().map_or(0, Vec::len);
    if results.iter().any(|r| r.len() != len) {
        return Err(Error::Dimension("task results differ in length".into()));
    }
    let width = padded_width(codewords, num_blocks);
    match solve_combinations::<i128>(codewords, num_blocks, width) {
        Ok(c) => Ok(apply(c, results, len)),
        Err(Overflow) => {
            let c = solve_combinations::<BigInt>(codewords, num_blocks, width)
                .expect("bigint elimination cannot overflow");
            Ok(apply(c, results, len))
        }
    }
}

/// For each recoverable block: `(block, weights)` with `W_block·θ = Σ weights[k]·results[k]`.
fn solve_combinations<T: ExactInt>(
    codewords: &[Codeword],
    num_blocks: usize,
    width: usize,
) -> std::result::Result<Vec<(usize, Vec<f64>)>, Overflow> {
    let n = codewords.len();
    let mut e = Echelon::<T>::new(width + n, width);
    let zero = T::from_i64(0);
    for p in num_blocks..width {
        let mut row = vec![zero.clone(); width + n];
        row[p] = T::from_i64(1);
        e.insert(row)?;
    }
    for (k, cw) in codewords.iter().enumerate() {
        let mut row: Vec<T> = cw.dense(width).into_iter().map(T::from_i64).collect();
        row.resize(width + n, zero.clone());
        // block part minus the provenance marker: row·x − 1·result_k = 0
        row[width + k] = T::from_i64(-1);
        e.insert(row)?;
    }
    let mut out = Vec::new();
    for b in 0..num_blocks {
        if let Some(row) = e.unit_row(b) {
            let d = row.coeffs[b].to_f64();
            // d·W_b + Σ a_k·(−result_k) = 0  ⇒  W_b = −Σ a_k/d · result_k
            let weights = row.coeffs[width..].iter().map(|a| -a.to_f64() / d).collect();
            out.push((b, weights));
        }
    }
    Ok(out)
}

fn apply(combos: Vec<(usize, Vec<f64>)>, results: &[Vec<f64>], len: usize) -> BTreeMap<usize, Vec<f64>> {
    combos
        .into_iter()
        .map(|(b, weights)| {
            let mut v = vec![0.0; len];
            for (w, r) in weights.iter().zip(results) {
                if *w != 0.0 {
                    for (x, y) in v.iter_mut().zip(r) {
                        *x += w * y;
                    }
                }
            }
            (b, v)
        })
        .collect()
}
