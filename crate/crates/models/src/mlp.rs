use bma_core::Partition;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{dimension_error, Error, Result};

/// Fully connected network with hyperbolic tangent hidden activations and a
/// softmax cross-entropy output layer. Parameters are flattened per layer as
/// `[W_1, b_1, W_2, b_2, ...]` with each weight matrix stored row-major, one
/// row per output unit.
#[derive(Debug, Clone)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
}

/// What a parameter segment holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Weights,
    Bias,
}

/// One labeled slice of the flattened parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub layer: usize,
    pub kind: ParamKind,
    /// Output unit within the layer; present at unit granularity.
    pub unit: Option<usize>,
    pub offset: usize,
    pub len: usize,
}

/// Ordered segments tiling `[0, d)` without gaps or overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    pub segments: Vec<Segment>,
}

/// Block granularity for grouping network parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    /// One block for each layer's weights and one for its biases.
    Layer,
    /// One block per output unit's incoming weights and one per unit's bias.
    Unit,
}

impl MlpModel {
    /// `layer_sizes` runs from the input dimension to the class count and
    /// needs at least one layer (two entries).
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least input and output sizes, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument("zero-sized layer".into()));
        }
        Ok(Self { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Seeded initialization: weights uniform in
    /// `[-sqrt(6/(n_in+n_out)), +sqrt(6/(n_in+n_out))]` per layer, biases
    /// zero.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = Vec::with_capacity(self.param_count());
        for w in self.layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let bound = (6.0 / (n_in + n_out) as f64).sqrt();
            for _ in 0..n_in * n_out {
                theta.push(rng.random_range(-bound..bound));
            }
            theta.extend(std::iter::repeat_n(0.0, n_out));
        }
        theta
    }

    fn check_theta(&self, theta: &[f64], op: &'static str) -> Result<()> {
        if theta.len() != self.param_count() {
            return Err(dimension_error(
                op,
                format!(
                    "theta has {} entries, model has {}",
                    theta.len(),
                    self.param_count()
                ),
            ));
        }
        Ok(())
    }

    /// Forward pass for one sample; returns per-layer activations (input
    /// first, logits last).
    fn forward(&self, theta: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let mut activations = Vec::with_capacity(self.layer_sizes.len());
        activations.push(x.to_vec());
        let mut offset = 0;
        let last = self.num_layers() - 1;
        for (layer, w) in self.layer_sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &theta[offset..offset + n_in * n_out];
            let biases = &theta[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let input = activations.last().unwrap();
            let mut out = Vec::with_capacity(n_out);
            for unit in 0..n_out {
                let row = &weights[unit * n_in..(unit + 1) * n_in];
                let mut z: f64 = biases[unit];
                for (wi, xi) in row.iter().zip(input) {
                    z += wi * xi;
                }
                out.push(if layer == last { z } else { z.tanh() });
            }
            activations.push(out);
        }
        activations
    }

    /// Mean softmax cross-entropy and its gradient by reverse-mode
    /// differentiation over a batch. `inputs` is row-major
    /// `batch x input_dim`.
    pub fn loss_grad(
        &self,
        theta: &[f64],
        inputs: &[f64],
        labels: &[usize],
    ) -> Result<(f64, Vec<f64>)> {
        self.check_theta(theta, "mlp_loss_grad")?;
        let p = self.input_dim();
        let batch = labels.len();
        if batch == 0 {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        if inputs.len() != batch * p {
            return Err(dimension_error(
                "mlp_loss_grad",
                format!("inputs has {} values, expected {batch} x {p}", inputs.len()),
            ));
        }
        let classes = self.num_classes();
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range 0..{classes}"
            )));
        }

        let mut loss = 0.0;
        let mut grad = vec![0.0; theta.len()];
        let inv = 1.0 / batch as f64;
        for (sample, &label) in labels.iter().enumerate() {
            let x = &inputs[sample * p..(sample + 1) * p];
            let activations = self.forward(theta, x);
            let logits = activations.last().unwrap();
            let (sample_loss, mut delta) = softmax_cross_entropy(logits, label);
            loss += inv * sample_loss;
            for d in &mut delta {
                *d *= inv;
            }
            self.backward(theta, &activations, delta, &mut grad);
        }
        Ok((loss, grad))
    }

    /// Backpropagates one sample's output delta, accumulating into `grad`.
    fn backward(
        &self,
        theta: &[f64],
        activations: &[Vec<f64>],
        mut delta: Vec<f64>,
        grad: &mut [f64],
    ) {
        let mut layer_offsets = Vec::with_capacity(self.num_layers());
        let mut offset = 0;
        for w in self.layer_sizes.windows(2) {
            layer_offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        for layer in (0..self.num_layers()).rev() {
            let n_in = self.layer_sizes[layer];
            let n_out = self.layer_sizes[layer + 1];
            let base = layer_offsets[layer];
            let input = &activations[layer];
            for (unit, &du) in delta.iter().enumerate() {
                let row = &mut grad[base + unit * n_in..base + (unit + 1) * n_in];
                for (g, xi) in row.iter_mut().zip(input) {
                    *g += du * xi;
                }
                grad[base + n_in * n_out + unit] += du;
            }
            if layer == 0 {
                break;
            }
            // delta_prev = W' delta, gated by tanh'(a) = 1 - a^2.
            let weights = &theta[base..base + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for (unit, &du) in delta.iter().enumerate() {
                let row = &weights[unit * n_in..(unit + 1) * n_in];
                for (pv, wi) in prev.iter_mut().zip(row) {
                    *pv += wi * du;
                }
            }
            for (pv, a) in prev.iter_mut().zip(input) {
                *pv *= 1.0 - a * a;
            }
            delta = prev;
        }
    }

    /// Per-sample loss gradient; used by the Fisher accumulation.
    pub fn sample_grad(&self, theta: &[f64], x: &[f64], label: usize) -> Result<Vec<f64>> {
        let (_, grad) = self.loss_grad(theta, x, &[label])?;
        Ok(grad)
    }

    /// Class prediction by logit argmax.
    pub fn predict(&self, theta: &[f64], x: &[f64]) -> Result<usize> {
        self.check_theta(theta, "mlp_predict")?;
        let activations = self.forward(theta, x);
        let logits = activations.last().unwrap();
        Ok(argmax(logits))
    }

    /// Fraction of samples whose argmax prediction matches the label.
    pub fn accuracy(&self, theta: &[f64], inputs: &[f64], labels: &[usize]) -> Result<f64> {
        let p = self.input_dim();
        let mut hits = 0usize;
        for (sample, &label) in labels.iter().enumerate() {
            if self.predict(theta, &inputs[sample * p..(sample + 1) * p])? == label {
                hits += 1;
            }
        }
        Ok(hits as f64 / labels.len().max(1) as f64)
    }
}

/// Loss and output delta (`softmax - onehot`) for one sample.
fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    let loss = total.ln() - (logits[label] - max);
    let mut delta: Vec<f64> = exp.iter().map(|&e| e / total).collect();
    delta[label] -= 1.0;
    (loss, delta)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Partition of the flattened parameters at the requested granularity, with
/// the labeled layout describing every block.
pub fn partition_for_model(model: &MlpModel, granularity: Granularity) -> (Partition, ParamLayout) {
    let mut sizes = Vec::new();
    let mut segments = Vec::new();
    let mut offset = 0;
    for (layer, w) in model.layer_sizes().windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        match granularity {
            Granularity::Layer => {
                segments.push(Segment {
                    layer,
                    kind: ParamKind::Weights,
                    unit: None,
                    offset,
                    len: n_in * n_out,
                });
                sizes.push(n_in * n_out);
                offset += n_in * n_out;
                segments.push(Segment {
                    layer,
                    kind: ParamKind::Bias,
                    unit: None,
                    offset,
                    len: n_out,
                });
                sizes.push(n_out);
                offset += n_out;
            }
            Granularity::Unit => {
                for unit in 0..n_out {
                    segments.push(Segment {
                        layer,
                        kind: ParamKind::Weights,
                        unit: Some(unit),
                        offset,
                        len: n_in,
                    });
                    sizes.push(n_in);
                    offset += n_in;
                }
                for unit in 0..n_out {
                    segments.push(Segment {
                        layer,
                        kind: ParamKind::Bias,
                        unit: Some(unit),
                        offset,
                        len: 1,
                    });
                    sizes.push(1);
                    offset += 1;
                }
            }
        }
    }
    let partition = Partition::new(sizes).expect("model layers are non-empty");
    (partition, ParamLayout { segments })
}

impl ParamLayout {
    /// Checks that the segments tile `[0, d)` in order.
    pub fn tiles(&self, d: usize) -> bool {
        let mut expected = 0;
        for s in &self.segments {
            if s.offset != expected || s.len == 0 {
                return false;
            }
            expected += s.len;
        }
        expected == d
    }
}
