//! Published recoverability counts for the `M = K = 4, r = 2` example,
//! used to self-check the enumeration.

use std::fmt;

use crate::analysis::{count_recoverable_by_type, CumulativeType, TypeCountTable, DEFAULT_BUDGET};
use crate::schedule::build;
use crate::{MdsPoints, Result, Scheme};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceRow {
    pub label: &'static str,
    /// Type as printed, `(N_2, N_1, N_0)`.
    pub printed: [usize; 3],
    /// Type the counts belong to. Differs from `printed` only where the
    /// printed label is inconsistent with `K = 4`.
    pub actual: [usize; 3],
    pub mcc: u64,
    pub uc_mmc: u64,
    pub cpgc: u64,
}

impl ReferenceRow {
    pub fn cumulative_type(&self) -> CumulativeType {
        CumulativeType::from_descending(&self.actual).expect("three entries")
    }

    pub fn label_mismatch(&self) -> bool {
        self.printed != self.actual
    }
}

const fn row(label: &'static str, t: [usize; 3], mcc: u64, uc_mmc: u64, cpgc: u64) -> ReferenceRow {
    ReferenceRow { label, printed: t, actual: t, mcc, uc_mmc, cpgc }
}

/// Full recovery (`M' = 4`).
pub const FULL_RECOVERY: [ReferenceRow; 9] = [
    row("N1", [4, 0, 0], 1, 1, 1),
    row("N2", [3, 1, 0], 4, 4, 4),
    row("N3", [3, 0, 1], 4, 4, 4),
    row("N4", [2, 2, 0], 6, 6, 6),
    row("N5", [2, 1, 1], 12, 8, 12),
    row("N6", [2, 0, 2], 6, 2, 6),
    row("N7", [1, 3, 0], 0, 4, 4),
    row("N8", [1, 2, 1], 0, 4, 8),
    // printed as N2=0,N1=4,N0=1, which sums to five workers
    ReferenceRow {
        label: "N9",
        printed: [0, 4, 1],
        actual: [0, 4, 0],
        mcc: 0,
        uc_mmc: 1,
        cpgc: 1,
    },
];

/// Partial recovery with at least three of four blocks (`M' = 3`).
pub const PARTIAL_RECOVERY: [ReferenceRow; 11] = [
    row("N1", [4, 0, 0], 1, 1, 1),
    row("N2", [3, 1, 0], 4, 4, 4),
    row("N3", [3, 0, 1], 4, 4, 4),
    row("N4", [2, 2, 0], 6, 6, 6),
    row("N5", [2, 1, 1], 12, 12, 12),
    row("N6", [2, 0, 2], 6, 6, 6),
    row("N7", [1, 3, 0], 0, 4, 4),
    row("N8", [1, 2, 1], 0, 12, 12),
    row("N9", [1, 1, 2], 0, 8, 8),
    row("N10", [0, 4, 0], 0, 1, 1),
    row("N11", [0, 3, 1], 0, 4, 4),
];

/// CPGC coefficients of the full-recovery CDF over `N1..N9`.
pub const CPGC_FULL_CDF_COEFFICIENTS: [u64; 9] = [1, 4, 4, 6, 12, 6, 4, 8, 1];

/// Type tables of the three `M = K = 4, r = 2` schedules at `m_prime`, in
/// [`Scheme::ALL`] order.
pub fn enumerate_example(m_prime: usize) -> Result<[TypeCountTable; 3]> {
    let tables = Scheme::ALL.map(|scheme| {
        let s = build(scheme, 4, 4, 2, MdsPoints::PowersOfTwo)?;
        count_recoverable_by_type(&s, scheme.delivery(), m_prime, DEFAULT_BUDGET)
    });
    let [a, b, c] = tables;
    Ok([a?, b?, c?])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub label: String,
    pub scheme: Option<Scheme>,
    pub expected: u64,
    pub found: u64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scheme {
            Some(s) => write!(f, "{} {s}: expected {}, found {}", self.label, self.expected, self.found),
            None => write!(f, "{}: not listed, found {} passing vectors", self.label, self.found),
        }
    }
}

/// Cells where the enumeration disagrees with `rows`, plus passing types
/// that `rows` omits.
pub fn compare(rows: &[ReferenceRow], tables: &[TypeCountTable; 3]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for row in rows {
        let ty = row.cumulative_type();
        for ((scheme, t), expected) in Scheme::ALL.iter().zip(tables).zip([row.mcc, row.uc_mmc, row.cpgc]) {
            let found = t.passing(&ty);
            if found != expected {
                out.push(Mismatch { label: row.label.into(), scheme: Some(*scheme), expected, found });
            }
        }
    }
    for t in tables {
        for (ty, found) in t.passing_types() {
            if !rows.iter().any(|r| r.cumulative_type() == *ty) {
                out.push(Mismatch { label: ty.to_string(), scheme: None, expected: 0, found });
            }
        }
    }
    out
}
