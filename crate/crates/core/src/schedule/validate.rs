use std::collections::HashMap;
use std::fmt;

use super::build::column_has_repeat;
use crate::{ScheduleMatrix, Scheme};

/// One problem found by [`validate_schedule`]. Rows and columns are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    IndexOutOfRange { row: usize, col: usize, block: usize },
    /// Unsorted or duplicate indices, a zero coefficient, or no terms.
    NonCanonical { row: usize, col: usize },
    DegreeExceeded { row: usize, col: usize, degree: usize },
    NonUnitCoefficient { row: usize, col: usize },
    /// First-row task is not a single uncoded block.
    CodedFirstRow { col: usize },
    /// First row is not worker `j` → block `j`.
    FirstRowNotIdentity { col: usize },
    ColumnRepeat { col: usize, block: usize },
    /// A coded row cannot be split into two disjoint pairings of all blocks.
    RowNotTwoPartitions { row: usize },
    DuplicateCodeword { first: (usize, usize), second: (usize, usize) },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::IndexOutOfRange { row, col, block } => {
                write!(f, "cell ({row},{col}) references block {block} outside the padded range")
            }
            Finding::NonCanonical { row, col } => write!(f, "cell ({row},{col}) is not canonical"),
            Finding::DegreeExceeded { row, col, degree } => {
                write!(f, "cell ({row},{col}) has degree {degree} > 2")
            }
            Finding::NonUnitCoefficient { row, col } => {
                write!(f, "cell ({row},{col}) has a coefficient other than 1")
            }
            Finding::CodedFirstRow { col } => write!(f, "first task of worker {col} is coded"),
            Finding::FirstRowNotIdentity { col } => {
                write!(f, "first task of worker {col} is not block {col}")
            }
            Finding::ColumnRepeat { col, block } => {
                write!(f, "block {block} appears more than once in column {col}")
            }
            Finding::RowNotTwoPartitions { row } => {
                write!(f, "row {row} is not the union of two disjoint pairings")
            }
            Finding::DuplicateCodeword { first, second } => {
                write!(f, "cells {first:?} and {second:?} hold the same codeword")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Column distinctness is impossible when one CPGC column needs more
/// block slots (`1 + 2(r-1)`) than there are blocks.
pub(super) fn column_distinct_feasible(blocks: usize, load: usize) -> bool {
    2 * (load - 1) < blocks
}

/// Checks canonical form everywhere, plus the CPGC structural rules:
/// degree ≤ 2 with unit coefficients, an uncoded identity first row, no
/// block repeated within a column, and coded rows that split into two
/// disjoint pairings. Column repeats are downgraded to warnings when the
/// column has more term slots than blocks.
pub fn validate_schedule(s: &ScheduleMatrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    let cpgc = s.scheme() == Scheme::Cpgc;

    for row in 0..s.load() {
        for col in 0..s.workers() {
            let cw = s.cell(row, col);
            if let Some(block) = cw.blocks().find(|&b| b >= s.padded_blocks()) {
                v.push(Finding::IndexOutOfRange { row, col, block });
            }
            if !cw.is_canonical() {
                v.push(Finding::NonCanonical { row, col });
            }
            if !cpgc {
                continue;
            }
            if cw.degree() > 2 {
                v.push(Finding::DegreeExceeded { row, col, degree: cw.degree() });
            }
            if cw.terms().iter().any(|&(_, c)| c != 1) {
                v.push(Finding::NonUnitCoefficient { row, col });
            }
        }
    }

    if cpgc {
        for col in 0..s.workers() {
            let first = s.cell(0, col);
            if first.degree() != 1 || first.terms()[0].1 != 1 {
                v.push(Finding::CodedFirstRow { col });
            } else if s.num_blocks() == s.workers() && first.terms()[0].0 != col {
                v.push(Finding::FirstRowNotIdentity { col });
            }
        }
        if s.num_blocks() == s.workers() {
            for row in 1..s.load() {
                if !splits_into_two_pairings(s, row) {
                    v.push(Finding::RowNotTwoPartitions { row });
                }
            }
        }
    }

    for col in 0..s.workers() {
        if !column_has_repeat(s, col) {
            continue;
        }
        let slots: usize = s.column(col).map(|c| c.degree()).sum();
        let mut seen = HashMap::new();
        for block in s.column(col).flat_map(|c| c.blocks()) {
            *seen.entry(block).or_insert(0usize) += 1;
        }
        let mut repeated: Vec<usize> = seen.into_iter().filter(|&(_, n)| n > 1).map(|(b, _)| b).collect();
        repeated.sort_unstable();
        for block in repeated {
            let finding = Finding::ColumnRepeat { col, block };
            if slots > s.padded_blocks() {
                report.warnings.push(finding);
            } else {
                report.violations.push(finding);
            }
        }
    }

    if cpgc {
        let mut first_seen: HashMap<&crate::Codeword, (usize, usize)> = HashMap::new();
        for row in 0..s.load() {
            for col in 0..s.workers() {
                let cw = s.cell(row, col);
                if let Some(&first) = first_seen.get(cw) {
                    report.warnings.push(Finding::DuplicateCodeword { first, second: (row, col) });
                } else {
                    first_seen.insert(cw, (row, col));
                }
            }
        }
    }
    report
}

/// A row of `M` pairs over `M` blocks is two disjoint pairings exactly when
/// every block has degree two and every cycle of the pair graph is even.
fn splits_into_two_pairings(s: &ScheduleMatrix, row: usize) -> bool {
    let n = s.num_blocks();
    let cells = s.row(row);
    if cells.iter().any(|c| c.degree() != 2 || !c.is_canonical()) {
        return false;
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, cw) in cells.iter().enumerate() {
        for b in cw.blocks() {
            if b >= n {
                return false;
            }
            incident[b].push(e);
        }
    }
    if incident.iter().any(|edges| edges.len() != 2) {
        return false;
    }
    let mut used = vec![false; cells.len()];
    for start in 0..cells.len() {
        if used[start] {
            continue;
        }
        let origin = cells[start].terms()[0].0;
        let mut node = cells[start].terms()[1].0;
        let mut edge = start;
        used[edge] = true;
        let mut length = 1;
        while node != origin {
            edge = *incident[node].iter().find(|&&e| e != edge).expect("degree two");
            used[edge] = true;
            length += 1;
            let t = cells[edge].terms();
            node = if t[0].0 == node { t[1].0 } else { t[0].0 };
        }
        if length % 2 != 0 {
            return false;
        }
    }
    true
}
