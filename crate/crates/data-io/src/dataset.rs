use crate::{Error, Result};

/// A classification dataset: `n` samples of `p` features in `[0, 1]` with
/// integer labels below `classes`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<f64>, // n x p, row-major
    pub labels: Vec<usize>,
    pub n: usize,
    pub p: usize,
    pub classes: usize,
    pub name: String,
    pub checksum: u64,
}

impl Dataset {
    pub fn new(
        inputs: Vec<f64>,
        labels: Vec<usize>,
        p: usize,
        classes: usize,
        name: String,
        checksum: u64,
    ) -> Result<Self> {
        let n = labels.len();
        if inputs.len() != n * p {
            return Err(Error::InvalidArgument(format!(
                "{n} samples x {p} features needs {} values, got {}",
                n * p,
                inputs.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range 0..{classes}"
            )));
        }
        if let Some(bad) = inputs.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite input value {bad}"
            )));
        }
        Ok(Self {
            inputs,
            labels,
            n,
            p,
            classes,
            name,
            checksum,
        })
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.p..(i + 1) * self.p]
    }

    /// Splits off the first `n_head` samples into one dataset and the rest
    /// into another.
    pub fn split(&self, n_head: usize) -> Result<(Dataset, Dataset)> {
        if n_head > self.n {
            return Err(Error::InvalidArgument(format!(
                "cannot take {n_head} of {} samples",
                self.n
            )));
        }
        let head = Dataset::new(
            self.inputs[..n_head * self.p].to_vec(),
            self.labels[..n_head].to_vec(),
            self.p,
            self.classes,
            format!("{}[..{n_head}]", self.name),
            self.checksum,
        )?;
        let tail = Dataset::new(
            self.inputs[n_head * self.p..].to_vec(),
            self.labels[n_head..].to_vec(),
            self.p,
            self.classes,
            format!("{}[{n_head}..]", self.name),
            self.checksum,
        )?;
        Ok((head, tail))
    }

    /// Reorders samples by `order` (a permutation of `0..n`).
    pub fn reordered(&self, order: &[usize]) -> Result<Dataset> {
        if order.len() != self.n {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut inputs = Vec::with_capacity(self.inputs.len());
        let mut labels = Vec::with_capacity(self.n);
        for &i in order {
            inputs.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(
            inputs,
            labels,
            self.p,
            self.classes,
            self.name.clone(),
            self.checksum,
        )
    }
}

/// FNV-1a over raw bytes; used as the dataset source checksum.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}
