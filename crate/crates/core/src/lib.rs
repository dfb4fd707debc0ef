//! Straggler-tolerant distributed gradient computation.
//!
//! The crate models a master that splits `W = XᵀX` into `M` row blocks and
//! hands coded or uncoded block products to `K` workers, each running at
//! most `r` tasks per iteration. Three schedules are provided:
//!
//! * **MCC**: an MDS code per row, results sent once all tasks finish.
//! * **UC-MMC**: cyclically shifted uncoded blocks, one message per task.
//! * **CPGC**: an uncoded first task followed by degree-two codewords drawn
//!   from disjoint pairings, one message per task.
//!
//! Around those schedules sit an exact (integer) decoder, the per-worker
//! shifted-exponential completion model, exhaustive score-vector analysis,
//! a Monte Carlo simulator and an end-to-end gradient descent demo.

pub mod analysis;
pub mod decoder;
mod error;
mod exact;
pub mod gd;
pub mod quadrature;
pub mod reference;
pub mod report;
pub mod schedule;
pub mod sim;
pub mod straggler;

pub use error::{Error, Result};
pub use schedule::{Codeword, Delivery, MdsPoints, ScheduleMatrix, Scheme};
pub use straggler::StragglerParams;
