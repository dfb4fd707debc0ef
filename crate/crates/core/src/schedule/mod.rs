//! Computation scheduling matrices.
//!
//! A schedule is an `r × K` grid: cell `(i, j)` is the `i`-th task executed
//! by worker `j`, expressed as an integer combination of block indices.
//! Indices are 0-based internally; the text rendering uses 1-based `W`
//! names (`W1+2W3`).

mod build;
mod partition;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use build::{build, build_cpgc, build_mcc, build_uc_mmc, circshift, MdsPoints};
pub use partition::Partition;
pub use validate::{validate_schedule, Finding, ValidationReport};

/// Which of the three schemes produced a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "MCC")]
    Mcc,
    #[serde(rename = "UC_MMC")]
    UcMmc,
    #[serde(rename = "CPGC")]
    Cpgc,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Mcc, Scheme::UcMmc, Scheme::Cpgc];

    /// How workers report results under this scheme.
    pub fn delivery(self) -> Delivery {
        match self {
            Scheme::Mcc => Delivery::Bundled,
            Scheme::UcMmc | Scheme::Cpgc => Delivery::MultiMessage,
        }
    }

    /// Lower-case identifier used in file names and configs.
    pub fn slug(self) -> &'static str {
        match self {
            Scheme::Mcc => "mcc",
            Scheme::UcMmc => "uc-mmc",
            Scheme::Cpgc => "cpgc",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Mcc => "MCC",
            Scheme::UcMmc => "UC-MMC",
            Scheme::Cpgc => "CPGC",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mcc" => Ok(Scheme::Mcc),
            "uc-mmc" | "ucmmc" => Ok(Scheme::UcMmc),
            "cpgc" => Ok(Scheme::Cpgc),
            other => Err(Error::Parameter(format!(
                "unknown scheme `{other}` (expected mcc, uc-mmc or cpgc)"
            ))),
        }
    }
}

/// Result delivery protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Delivery {
    /// One message per completed task, sent immediately.
    MultiMessage,
    /// One message per worker, sent only after all `r` tasks finish.
    Bundled,
}

/// Sparse integer combination of block indices.
///
/// Canonical codewords have strictly increasing indices and nonzero
/// coefficients. [`Codeword::from_raw_terms`] skips canonicalization so
/// that malformed cells can be fed to the validator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Codeword {
    terms: Vec<(usize, i64)>,
}

impl Codeword {
    /// Builds a canonical codeword, sorting terms by block index.
    pub fn new(mut terms: Vec<(usize, i64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Codeword("a codeword needs at least one term".into()));
        }
        if let Some(&(b, _)) = terms.iter().find(|&&(_, c)| c == 0) {
            return Err(Error::Codeword(format!("zero coefficient on block {b}")));
        }
        terms.sort_unstable_by_key(|&(b, _)| b);
        if let Some(w) = terms.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Codeword(format!("block {} appears twice", w[0].0)));
        }
        Ok(Self { terms })
    }

    /// Degree-one codeword `W_block`.
    pub fn unit(block: usize) -> Self {
        Self {
            terms: vec![(block, 1)],
        }
    }

    /// Degree-two codeword `W_a + W_b`.
    pub fn pair(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![(a, 1), (b, 1)])
    }

    /// Stores `terms` verbatim, without sorting or duplicate checks.
    pub fn from_raw_terms(terms: Vec<(usize, i64)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(usize, i64)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.len()
    }

    pub fn blocks(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|&(b, _)| b)
    }

    pub fn contains(&self, block: usize) -> bool {
        self.terms.iter().any(|&(b, _)| b == block)
    }

    pub fn is_canonical(&self) -> bool {
        !self.terms.is_empty()
            && self.terms.iter().all(|&(_, c)| c != 0)
            && self.terms.windows(2).all(|w| w[0].0 < w[1].0)
    }

    /// Dense coefficient vector of length `width`.
    pub fn dense(&self, width: usize) -> Vec<i64> {
        let mut v = vec![0; width];
        for &(b, c) in &self.terms {
            v[b] += c;
        }
        v
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &(b, c)) in self.terms.iter().enumerate() {
            match (k, c) {
                (0, 1) => {}
                (0, -1) => f.write_str("-")?,
                (0, c) => write!(f, "{c}")?,
                (_, 1) => f.write_str("+")?,
                (_, -1) => f.write_str("-")?,
                (_, c) if c < 0 => write!(f, "{c}")?,
                (_, c) => write!(f, "+{c}")?,
            }
            write!(f, "W{}", b + 1)?;
        }
        Ok(())
    }
}

/// An `r × K` grid of codewords with execution order down each column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDump")]
pub struct ScheduleMatrix {
    scheme: Scheme,
    load: usize,
    workers: usize,
    num_blocks: usize,
    padded_blocks: usize,
    /// Row-major.
    cells: Vec<Codeword>,
}

#[derive(Deserialize)]
struct ScheduleDump {
    scheme: Scheme,
    load: usize,
    workers: usize,
    num_blocks: usize,
    padded_blocks: usize,
    cells: Vec<Codeword>,
}

impl TryFrom<ScheduleDump> for ScheduleMatrix {
    type Error = Error;

    fn try_from(d: ScheduleDump) -> Result<Self> {
        ScheduleMatrix::from_cells(d.scheme, d.load, d.workers, d.num_blocks, d.padded_blocks, d.cells)
    }
}

impl ScheduleMatrix {
    /// Assembles a schedule from row-major cells, checking shape and index range.
    pub fn from_cells(
        scheme: Scheme,
        load: usize,
        workers: usize,
        num_blocks: usize,
        padded_blocks: usize,
        cells: Vec<Codeword>,
    ) -> Result<Self> {
        if load == 0 || workers == 0 || num_blocks == 0 {
            return Err(Error::Dimension(format!(
                "load={load}, workers={workers}, blocks={num_blocks} must all be positive"
            )));
        }
        if padded_blocks < num_blocks {
            return Err(Error::Dimension(format!(
                "padded block count {padded_blocks} is below the block count {num_blocks}"
            )));
        }
        if cells.len() != load * workers {
            return Err(Error::Dimension(format!(
                "expected {} cells for a {load}x{workers} schedule, got {}",
                load * workers,
                cells.len()
            )));
        }
        if let Some(b) = cells.iter().flat_map(Codeword::blocks).find(|&b| b >= padded_blocks) {
            return Err(Error::Dimension(format!(
                "block index {b} outside [0, {padded_blocks})"
            )));
        }
        Ok(Self {
            scheme,
            load,
            workers,
            num_blocks,
            padded_blocks,
            cells,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Computation load `r` (number of rows).
    pub fn load(&self) -> usize {
        self.load
    }

    /// Worker count `K` (number of columns).
    pub fn workers(&self) -> usize {
        self.workers
    }

    /// True block count `M`.
    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Block count including zero padding.
    pub fn padded_blocks(&self) -> usize {
        self.padded_blocks
    }

    pub fn delivery(&self) -> Delivery {
        self.scheme.delivery()
    }

    /// Task `row` (0-based) of worker `col` (0-based).
    pub fn cell(&self, row: usize, col: usize) -> &Codeword {
        &self.cells[row * self.workers + col]
    }

    pub fn set_cell(&mut self, row: usize, col: usize, cw: Codeword) {
        self.cells[row * self.workers + col] = cw;
    }

    pub(crate) fn swap_cells(&mut self, row: usize, a: usize, b: usize) {
        self.cells.swap(row * self.workers + a, row * self.workers + b);
    }

    /// Worker `col`'s tasks in execution order.
    pub fn column(&self, col: usize) -> impl Iterator<Item = &Codeword> + '_ {
        (0..self.load).map(move |row| self.cell(row, col))
    }

    pub fn row(&self, row: usize) -> &[Codeword] {
        &self.cells[row * self.workers..(row + 1) * self.workers]
    }

    pub fn cells(&self) -> &[Codeword] {
        &self.cells
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parameter(format!("bad schedule json: {e}")))
    }
}

impl fmt::Display for ScheduleMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} r={} K={} M={} padded={}",
            self.scheme, self.load, self.workers, self.num_blocks, self.padded_blocks
        )?;
        for row in 0..self.load {
            let line: Vec<String> = self.row(row).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join("  "))?;
        }
        Ok(())
    }
}
