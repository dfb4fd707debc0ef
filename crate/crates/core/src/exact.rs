//! Fraction-free Gauss–Jordan elimination over the integers.
//!
//! Rows are kept primitive (content divided out, pivot positive) so that
//! entries stay small. The basis is in reduced form: every pivot column is
//! zero in all other rows. The row space over ℚ is exactly the span of the
//! inserted rows, so `e_i` is in the span iff the row pivoted at `i` has no
//! other nonzero coefficient.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub(crate) trait ExactInt: Clone + PartialEq + std::fmt::Debug {
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn negate(&self) -> Self;
    /// `a·x − b·y`, `None` on overflow.
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    /// Nonnegative gcd.
    fn gcd_with(&self, other: &Self) -> Self;
    fn div_exact(&self, d: &Self) -> Self;
    fn is_one(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl ExactInt for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn negate(&self) -> Self {
        -*self
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)
    }
    fn gcd_with(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        *self / *d
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn negate(&self) -> Self {
        -self
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn gcd_with(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_one(&self) -> bool {
        *self == BigInt::from(1)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug)]
pub(crate) struct Overflow;

/// A row over `width` block coefficients followed by `aug` provenance entries.
#[derive(Clone, Debug)]
pub(crate) struct Row<T> {
    pub coeffs: Vec<T>,
    pub pivot: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Echelon<T> {
    width: usize,
    rows: Vec<Row<T>>,
    pivot_row: Vec<Option<usize>>,
    /// Number of rows whose block part is a single pivot entry.
    unit_rows: usize,
}

impl<T: ExactInt> Echelon<T> {
    /// `width` counts all entries per row; only the first `blocks` take part
    /// in pivoting, the rest are carried along.
    pub fn new(width: usize, blocks: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
            pivot_row: vec![None; blocks],
            unit_rows: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn unit_rows(&self) -> usize {
        self.unit_rows
    }

    fn blocks(&self) -> usize {
        self.pivot_row.len()
    }

    /// Row pivoted at block `i`, when that row is a multiple of `e_i`.
    pub fn unit_row(&self, block: usize) -> Option<&Row<T>> {
        let row = &self.rows[self.pivot_row[block]?];
        self.is_unit(row).then_some(row)
    }

    pub fn is_recoverable(&self, block: usize) -> bool {
        self.unit_row(block).is_some()
    }

    fn is_unit(&self, row: &Row<T>) -> bool {
        row.coeffs[..self.blocks()]
            .iter()
            .enumerate()
            .all(|(j, c)| j == row.pivot || c.is_zero())
    }

    /// Inserts a row; returns whether it was independent of the basis.
    /// After `Err(Overflow)` the basis is inconsistent and must be rebuilt.
    pub fn insert(&mut self, mut v: Vec<T>) -> Result<bool, Overflow> {
        debug_assert_eq!(v.len(), self.width);
        let blocks = self.blocks();
        for row in &self.rows {
            let p = row.pivot;
            if v[p].is_zero() {
                continue;
            }
            eliminate(&mut v, &row.coeffs, p)?;
        }
        let Some(pivot) = v[..blocks].iter().position(|c| !c.is_zero()) else {
            return Ok(false);
        };
        normalize(&mut v, pivot);

        for k in 0..self.rows.len() {
            if !self.rows[k].coeffs[pivot].is_zero() {
                eliminate(&mut self.rows[k].coeffs, &v, pivot)?;
                let p = self.rows[k].pivot;
                normalize(&mut self.rows[k].coeffs, p);
            }
        }
        self.pivot_row[pivot] = Some(self.rows.len());
        self.rows.push(Row { coeffs: v, pivot });
        self.unit_rows = self.rows.iter().filter(|r| self.is_unit(r)).count();
        Ok(true)
    }
}

/// `target ← src[p]/g · target − target[p]/g · src`, making `target[p]` zero.
fn eliminate<T: ExactInt>(target: &mut [T], src: &[T], p: usize) -> Result<(), Overflow> {
    let g = src[p].gcd_with(&target[p]);
    let a = src[p].div_exact(&g);
    let b = target[p].div_exact(&g);
    for (t, s) in target.iter_mut().zip(src) {
        if s.is_zero() && (t.is_zero() || a.is_one()) {
            continue;
        }
        *t = T::mul_sub(&a, t, &b, s).ok_or(Overflow)?;
    }
    let mut content = T::from_i64(0);
    for t in target.iter() {
        if !t.is_zero() {
            content = content.gcd_with(t);
            if content.is_one() {
                return Ok(());
            }
        }
    }
    if !content.is_zero() {
        for t in target.iter_mut() {
            *t = t.div_exact(&content);
        }
    }
    Ok(())
}

/// Divides out the content and makes the pivot positive.
fn normalize<T: ExactInt>(v: &mut [T], pivot: usize) {
    let mut content = T::from_i64(0);
    for t in v.iter() {
        if !t.is_zero() {
            content = content.gcd_with(t);
        }
    }
    if v[pivot].is_negative() {
        content = content.negate();
    }
    if !content.is_zero() && !content.is_one() {
        for t in v.iter_mut() {
            *t = t.div_exact(&content);
        }
    }
}
