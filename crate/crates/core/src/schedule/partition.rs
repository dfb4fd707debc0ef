use crate::{Codeword, Error, Result};

/// A disjoint pairing of `[0, n)`; each pair becomes one degree-two codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pairs: Vec<[usize; 2]>,
}

impl Partition {
    /// Checks that `pairs` is a disjoint cover of `[0, n)` with no self-pairs.
    pub fn new(n: usize, pairs: Vec<[usize; 2]>) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::Dimension(format!("cannot pair an odd number ({n}) of blocks")));
        }
        let mut seen = vec![false; n];
        for &[a, b] in &pairs {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::Dimension(format!("pair index {x} outside [0, {n})")));
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(Error::Dimension(format!("block {x} paired twice")));
                }
            }
        }
        if pairs.len() * 2 != n {
            return Err(Error::Dimension(format!(
                "{} pairs do not cover {n} blocks",
                pairs.len()
            )));
        }
        Ok(Self { pairs })
    }

    /// `(0,1), (2,3), …`
    pub fn adjacent(n: usize) -> Result<Self> {
        Self::new(n, (0..n / 2).map(|k| [2 * k, 2 * k + 1]).collect())
    }

    /// Pairs `b+k` with `b+k+stride` inside consecutive windows of `2·stride`.
    /// A short trailing window is paired with the largest stride that fits it.
    /// `stride = 2` gives `(0,2), (1,3), (4,6), (5,7), …`.
    pub fn stride(n: usize, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Parameter("pairing stride must be positive".into()));
        }
        let mut pairs = Vec::with_capacity(n / 2);
        let mut base = 0;
        while base < n {
            let s = stride.min((n - base) / 2);
            if s == 0 {
                break;
            }
            pairs.extend((0..s).map(|k| [base + k, base + k + s]));
            base += 2 * s;
        }
        Self::new(n, pairs)
    }

    /// `(k, n-1-k)` for `k < n/2`.
    pub fn mirror(n: usize) -> Result<Self> {
        Self::new(n, (0..n / 2).map(|k| [k, n - 1 - k]).collect())
    }

    /// `(k, n/2 + (k + rotation) mod n/2)` for `k < n/2`; rotation 0 is the plain half offset.
    pub fn half_offset(n: usize, rotation: usize) -> Result<Self> {
        let h = n / 2;
        if h == 0 {
            return Self::new(n, Vec::new());
        }
        Self::new(n, (0..h).map(|k| [k, h + (k + rotation) % h]).collect())
    }

    pub fn pairs(&self) -> &[[usize; 2]] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn codewords(&self) -> Vec<Codeword> {
        self.pairs
            .iter()
            .map(|&[a, b]| Codeword::pair(a, b).expect("partition pairs are distinct"))
            .collect()
    }
}
