use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use super::validate::column_distinct_feasible;
use crate::{Codeword, Error, Result, ScheduleMatrix, Scheme};

/// Evaluation points of the MDS (Vandermonde) code used by MCC.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdsPoints {
    /// `x_k = (2k − K − 1)/(K − 1)`: equally spaced on `[−1, 1]`. Rows are
    /// scaled to integers. Keeps floating-point decoding accurate.
    #[default]
    Centered,
    /// `x_k = k` for worker `k = 1..K`.
    Linear,
    /// `x_k = 2^(k-1)`.
    PowersOfTwo,
}

impl std::str::FromStr for MdsPoints {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(MdsPoints::Centered),
            "linear" => Ok(MdsPoints::Linear),
            "powers_of_two" => Ok(MdsPoints::PowersOfTwo),
            other => Err(Error::Parameter(format!(
                "unknown MDS points `{other}` (expected centered, linear or powers_of_two)"
            ))),
        }
    }
}

impl MdsPoints {
    /// Point of `worker` (0-based) among `workers` as a fraction `p/q`.
    fn point(self, worker: usize, workers: usize) -> Result<(i64, i64)> {
        match self {
            MdsPoints::Centered => Ok((2 * worker as i64 + 1 - workers as i64, (workers as i64 - 1).max(1))),
            MdsPoints::Linear => Ok((worker as i64 + 1, 1)),
            MdsPoints::PowersOfTwo => 1i64
                .checked_shl(worker as u32)
                .filter(|&x| x > 0)
                .map(|x| (x, 1))
                .ok_or_else(|| Error::CoefficientOverflow(format!("2^{worker} does not fit in i64"))),
        }
    }
}

/// `[p^j · q^(g−1−j)]` for `j < g`, divided by its content.
fn vandermonde_row(p: i64, q: i64, g: usize) -> Result<Vec<i64>> {
    let overflow = || Error::CoefficientOverflow(format!("({p}/{q})^{} does not fit in i64", g - 1));
    let pow = |base: i64, e: usize| -> Result<i64> {
        (0..e).try_fold(1i64, |acc, _| acc.checked_mul(base).ok_or_else(overflow))
    };
    let row = (0..g)
        .map(|j| pow(p, j)?.checked_mul(pow(q, g - 1 - j)?).ok_or_else(overflow))
        .collect::<Result<Vec<i64>>>()?;
    let content = row.iter().fold(0i64, |a, &b| a.gcd(&b));
    Ok(row.into_iter().map(|c| c / content).collect())
}

/// Right rotation by `d` places; negative `d` rotates left.
pub fn circshift<T: Clone>(v: &[T], d: isize) -> Vec<T> {
    let mut out = v.to_vec();
    if !out.is_empty() {
        let k = d.rem_euclid(out.len() as isize) as usize;
        out.rotate_right(k);
    }
    out
}

/// Builds the schedule for `scheme`; `points` only affects MCC.
pub fn build(scheme: Scheme, blocks: usize, workers: usize, load: usize, points: MdsPoints) -> Result<ScheduleMatrix> {
    match scheme {
        Scheme::Mcc => build_mcc(blocks, workers, load, points),
        Scheme::UcMmc => build_uc_mmc(blocks, workers, load),
        Scheme::Cpgc => build_cpgc(blocks, workers, load),
    }
}

/// Uncoded shifted schedule: worker `j` runs blocks `j, j+1, …, j+r-1 (mod M)`.
pub fn build_uc_mmc(blocks: usize, workers: usize, load: usize) -> Result<ScheduleMatrix> {
    if blocks == 0 || workers == 0 || load == 0 || load > blocks {
        return Err(Error::Dimension(format!(
            "UC-MMC needs 1 <= r <= M and M, K >= 1 (got M={blocks}, K={workers}, r={load})"
        )));
    }
    let cells = (0..load)
        .flat_map(|i| (0..workers).map(move |j| Codeword::unit((i + j) % blocks)))
        .collect();
    ScheduleMatrix::from_cells(Scheme::UcMmc, load, workers, blocks, blocks, cells)
}

/// MDS-coded schedule. Blocks are zero-padded to `r·⌈M/r⌉`; row `i` encodes
/// the group `{i, i+r, i+2r, …}` with a Vandermonde code, so any `⌈M/r⌉`
/// workers' row-`i` results determine the whole group.
pub fn build_mcc(blocks: usize, workers: usize, load: usize, points: MdsPoints) -> Result<ScheduleMatrix> {
    if blocks == 0 || workers == 0 || load == 0 {
        return Err(Error::Dimension(format!(
            "MCC needs positive dimensions (got M={blocks}, K={workers}, r={load})"
        )));
    }
    let group = blocks.div_ceil(load);
    if workers < group {
        return Err(Error::Infeasible(format!(
            "K={workers} workers cannot recover groups of {group} blocks"
        )));
    }
    let padded = load * group;

    let powers = (0..workers)
        .map(|k| {
            let (p, q) = points.point(k, workers)?;
            vandermonde_row(p, q, group)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(load * workers);
    for i in 0..load {
        for pk in &powers {
            let terms = (0..group)
                .filter(|&j| pk[j] != 0)
                .map(|j| (i + j * load, pk[j]))
                .collect();
            cells.push(Codeword::new(terms)?);
        }
    }
    ScheduleMatrix::from_cells(Scheme::Mcc, load, workers, blocks, padded, cells)
}

enum Shift {
    Fixed(isize),
    Search,
}

/// Coded partial gradient schedule for `M = K` even.
///
/// Row 1 is the identity. For `K = 4, r = 2` the fixed 4×2 matrix is
/// returned. Otherwise row 2 is built from the adjacent and stride-two
/// pairings (shifted left by one), row 3 from the mirror (right by one) and
/// half-offset (left by two) pairings, each spanning half of the columns.
/// Later rows use wider strides and rotated offsets with a searched shift.
/// A final pass swaps cells within a row half to remove repeated blocks
/// from a column.
pub fn build_cpgc(blocks: usize, workers: usize, load: usize) -> Result<ScheduleMatrix> {
    if blocks != workers {
        return Err(Error::Unsupported(format!(
            "CPGC needs M = K (got M={blocks}, K={workers})"
        )));
    }
    if blocks < 2 || !blocks.is_multiple_of(2) {
        return Err(Error::Unsupported(format!("CPGC needs an even M >= 2 (got {blocks})")));
    }
    if load == 0 || load > blocks {
        return Err(Error::Unsupported(format!(
            "CPGC needs 1 <= r <= M (got r={load}, M={blocks})"
        )));
    }
    let n = blocks;

    let mut cells: Vec<Codeword> = (0..n).map(Codeword::unit).collect();
    if n == 4 && load == 2 {
        for (a, b) in [(2, 3), (0, 2), (1, 3), (0, 1)] {
            cells.push(Codeword::pair(a, b)?);
        }
        return ScheduleMatrix::from_cells(Scheme::Cpgc, load, n, n, n, cells);
    }
    cells.resize(load * n, Codeword::unit(0));
    let mut s = ScheduleMatrix::from_cells(Scheme::Cpgc, load, n, n, n, cells)?;

    let half = n / 2;
    for row in 1..load {
        let (left, right) = match row {
            1 => (
                (Partition::adjacent(n)?, Shift::Fixed(-1)),
                (Partition::stride(n, 2)?, Shift::Fixed(-1)),
            ),
            2 => (
                (Partition::mirror(n)?, Shift::Fixed(1)),
                (Partition::half_offset(n, 0)?, Shift::Fixed(-2)),
            ),
            _ => (
                (Partition::stride(n, row)?, Shift::Search),
                (Partition::half_offset(n, row - 2)?, Shift::Search),
            ),
        };
        place_half(&mut s, row, 0, &left.0, left.1);
        place_half(&mut s, row, half, &right.0, right.1);
    }

    repair_columns(&mut s);

    if column_distinct_feasible(n, load) {
        if let Some(col) = (0..n).find(|&c| column_has_repeat(&s, c)) {
            return Err(Error::Unsupported(format!(
                "no column-distinct CPGC placement found for M=K={n}, r={load} (column {col})"
            )));
        }
    }
    Ok(s)
}

fn place_half(s: &mut ScheduleMatrix, row: usize, start: usize, partition: &Partition, shift: Shift) {
    let words = partition.codewords();
    let d = match shift {
        Shift::Fixed(d) => d,
        Shift::Search => {
            let half = words.len() as isize;
            let candidates = std::iter::once(0).chain((1..=half).flat_map(|k| [-k, k]));
            let mut best = (usize::MAX, 0);
            for d in candidates {
                let shifted = circshift(&words, d);
                let clashes = shifted
                    .iter()
                    .enumerate()
                    .filter(|(k, cw)| (0..row).any(|r| shares_block(s.cell(r, start + k), cw)))
                    .count();
                if clashes < best.0 {
                    best = (clashes, d);
                }
                if clashes == 0 {
                    break;
                }
            }
            best.1
        }
    };
    for (k, cw) in circshift(&words, d).into_iter().enumerate() {
        s.set_cell(row, start + k, cw);
    }
}

fn shares_block(a: &Codeword, b: &Codeword) -> bool {
    a.blocks().any(|x| b.contains(x))
}

fn cell_clashes(s: &ScheduleMatrix, row: usize, col: usize) -> bool {
    let cw = s.cell(row, col);
    (0..s.load()).any(|r| r != row && shares_block(s.cell(r, col), cw))
}

pub(super) fn column_has_repeat(s: &ScheduleMatrix, col: usize) -> bool {
    (0..s.load()).any(|r| cell_clashes(s, r, col))
}

/// For every clashing cell, from the last row upward, swap with the nearest
/// cell of the same row and half that leaves both columns clash-free. Rows
/// that still clash are then re-placed top-down by a perfect matching of
/// cells to columns, each cell preferring its current column. A row with no
/// such matching is rebuilt from other partition families.
fn repair_columns(s: &mut ScheduleMatrix) {
    repair_within_halves(s);
    for row in 1..s.load() {
        if !(0..s.workers()).any(|c| clashes_above(s, row, c, s.cell(row, c))) || rematch_row(s, row) {
            continue;
        }
        let families = partition_families(s.workers());
        'search: for left in &families {
            for right in &families {
                place_half(s, row, 0, left, Shift::Fixed(0));
                place_half(s, row, s.workers() / 2, right, Shift::Fixed(0));
                if rematch_row(s, row) {
                    break 'search;
                }
            }
        }
    }
}

fn partition_families(n: usize) -> Vec<Partition> {
    let half = n / 2;
    let mut out = vec![Partition::adjacent(n), Partition::mirror(n)];
    out.extend((2..=half).map(|st| Partition::stride(n, st)));
    out.extend((0..half).map(|rot| Partition::half_offset(n, rot)));
    out.into_iter().filter_map(|p| p.ok()).collect()
}

fn clashes_above(s: &ScheduleMatrix, row: usize, col: usize, cw: &Codeword) -> bool {
    (0..row).any(|r| shares_block(s.cell(r, col), cw))
}

/// Kuhn's augmenting paths over cells × columns; leaves the row unchanged
/// when no perfect matching exists.
fn rematch_row(s: &mut ScheduleMatrix, row: usize) -> bool {
    let k = s.workers();
    let cells: Vec<Codeword> = s.row(row).to_vec();
    let allowed: Vec<Vec<usize>> = cells
        .iter()
        .enumerate()
        .map(|(i, cw)| {
            let mut cols: Vec<usize> = (0..k).filter(|&c| !clashes_above(s, row, c, cw)).collect();
            cols.sort_by_key(|&c| (c.abs_diff(i), c));
            cols
        })
        .collect();

    fn augment(i: usize, allowed: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &c in &allowed[i] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            if owner[c].is_none_or(|j| augment(j, allowed, owner, seen)) {
                owner[c] = Some(i);
                return true;
            }
        }
        false
    }

    let mut owner = vec![None; k];
    for i in 0..k {
        if !augment(i, &allowed, &mut owner, &mut vec![false; k]) {
            return false;
        }
    }
    for (c, i) in owner.into_iter().enumerate() {
        s.set_cell(row, c, cells[i.expect("perfect matching")].clone());
    }
    true
}

fn repair_within_halves(s: &mut ScheduleMatrix) {
    let k = s.workers();
    let half = k / 2;
    for row in (1..s.load()).rev() {
        for col in 0..k {
            if !cell_clashes(s, row, col) {
                continue;
            }
            let (lo, hi) = if col < half { (0, half) } else { (half, k) };
            let mut partners: Vec<usize> = (lo..hi).filter(|&c| c != col).collect();
            partners.sort_by_key(|&c| (c.abs_diff(col), c));
            for c in partners {
                s.swap_cells(row, col, c);
                if !cell_clashes(s, row, col) && !cell_clashes(s, row, c) {
                    break;
                }
                s.swap_cells(row, col, c);
            }
        }
    }
}
