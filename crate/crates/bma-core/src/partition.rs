use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::Error;

/// Partition of `d` coordinates into `L >= 1` contiguous blocks of positive
/// sizes. `offsets` holds the prefix sums: `offsets[0] = 0`,
/// `offsets[L] = d`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self, Error> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        if let Some(pos) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("block {pos} has size 0")));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for &s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(Self { sizes, offsets })
    }

    /// All-singleton partition of `d` coordinates.
    pub fn singletons(d: usize) -> Result<Self, Error> {
        Self::new(vec![1; d])
    }

    /// One block covering all `d` coordinates.
    pub fn single_block(d: usize) -> Result<Self, Error> {
        Self::new(vec![d])
    }

    /// Number of blocks `L`.
    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    /// Total dimension `d`.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Coordinate range of block `i`.
    pub fn range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// True when every block boundary of `coarse` is also a boundary of
    /// `self` and both partitions cover the same dimension.
    pub fn refines(&self, coarse: &Partition) -> bool {
        if self.dim() != coarse.dim() {
            return false;
        }
        // Both offset lists are sorted; walk them together.
        let mut fine = self.offsets.iter().peekable();
        for boundary in &coarse.offsets {
            loop {
                match fine.next() {
                    Some(f) if f == boundary => break,
                    Some(f) if f < boundary => continue,
                    _ => return false,
                }
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses the comma-separated text form, e.g. `2,5,3`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let sizes: Result<Vec<usize>, Error> = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPartition(format!("bad block size '{tok}': {e}")))
            })
            .collect();
        Partition::new(sizes?)
    }
}
