use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::fnv1a;
use crate::{Dataset, Error, Result};

/// Seeded Gaussian blob classification data: `classes` cluster centers, one
/// point per sample at `center + spread * N(0, I)`, labels assigned round
/// robin (balanced within one). Features are min-max scaled per dimension
/// into `[0, 1]`. The same seed always produces byte-identical data.
pub fn synth_blobs(n: usize, p: usize, classes: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || p == 0 || classes == 0 {
        return Err(Error::InvalidArgument(format!(
            "blob sizes must be positive: n={n}, p={p}, classes={classes}"
        )));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(Error::InvalidArgument(format!("bad spread {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![0.0; classes * p];
    for c in centers.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *c = 2.0 * z;
    }
    let mut inputs = vec![0.0; n * p];
    let mut labels = vec![0usize; n];
    for i in 0..n {
        let label = i % classes;
        labels[i] = label;
        for j in 0..p {
            let z: f64 = StandardNormal.sample(&mut rng);
            inputs[i * p + j] = centers[label * p + j] + spread * z;
        }
    }
    // Min-max scale each feature into [0, 1]; constant features map to 1/2.
    for j in 0..p {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            lo = lo.min(inputs[i * p + j]);
            hi = hi.max(inputs[i * p + j]);
        }
        let range = hi - lo;
        for i in 0..n {
            let x = &mut inputs[i * p + j];
            *x = if range > 0.0 { (*x - lo) / range } else { 0.5 };
        }
    }
    let checksum = {
        let mut bytes = Vec::with_capacity(inputs.len() * 8);
        for x in &inputs {
            bytes.extend_from_slice(&x.to_bits().to_le_bytes());
        }
        fnv1a(&bytes)
    };
    Dataset::new(
        inputs,
        labels,
        p,
        classes,
        format!("blobs(n={n},p={p},c={classes},seed={seed})"),
        checksum,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_datasets() {
        let a = synth_blobs(50, 3, 4, 0.2, 9).unwrap();
        let b = synth_blobs(50, 3, 4, 0.2, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_blobs(50, 3, 4, 0.2, 10).unwrap();
        assert_ne!(a.checksum, c.checksum);
    }

    #[test]
    fn zero_spread_collapses_clusters_to_centers() {
        let ds = synth_blobs(30, 2, 3, 0.0, 4).unwrap();
        for label in 0..3 {
            let reference: Vec<usize> = (0..ds.n).filter(|&i| ds.labels[i] == label).collect();
            let first = ds.sample(reference[0]).to_vec();
            for &i in &reference[1..] {
                assert_eq!(ds.sample(i), &first[..]);
            }
        }
    }

    #[test]
    fn labels_are_balanced_within_one() {
        let ds = synth_blobs(31, 2, 4, 0.3, 1).unwrap();
        let mut counts = vec![0usize; 4];
        for &y in &ds.labels {
            counts[y] += 1;
        }
        let max = counts.iter().max().unwrap();
        let min = counts.iter().min().unwrap();
        assert!(max - min <= 1, "counts {counts:?}");
    }

    #[test]
    fn features_live_in_unit_interval() {
        let ds = synth_blobs(100, 5, 3, 0.7, 2).unwrap();
        assert!(ds.inputs.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(synth_blobs(0, 2, 2, 0.1, 0).is_err());
        assert!(synth_blobs(10, 0, 2, 0.1, 0).is_err());
        assert!(synth_blobs(10, 2, 0, 0.1, 0).is_err());
    }
}
