//! Fully connected network over a flat parameter vector with hand-written
//! backpropagation.
//!
//! Layer `l` stores its weights row-major as `[in][out]` followed by its
//! `out` biases. Hidden layers use the configured activation; the output
//! layer is linear.

use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Softplus,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Softplus => softplus(x),
        }
    }

    /// Derivative expressed through the pre-activation `x` and output `y`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Softplus => sigmoid(x),
        }
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    inputs: usize,
    outputs: usize,
    offset: usize,
}

impl LayerShape {
    fn weight_len(&self) -> usize {
        self.inputs * self.outputs
    }

    fn len(&self) -> usize {
        self.weight_len() + self.outputs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<LayerShape>,
    activation: Activation,
    pub params: Vec<f64>,
}

/// Intermediate values kept for the backward pass.
pub struct ForwardCache {
    /// Input of each layer; the last entry is the network output.
    activations: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("non-empty network")
    }
}

impl Mlp {
    /// Zero-initialized network with layer widths `sizes` (input first).
    pub fn zeros(sizes: &[usize], activation: Activation) -> Self {
        assert!(sizes.len() >= 2, "need input and output widths");
        let mut offset = 0;
        let layers = sizes
            .windows(2)
            .map(|w| {
                let shape = LayerShape {
                    inputs: w[0],
                    outputs: w[1],
                    offset,
                };
                offset += shape.len();
                shape
            })
            .collect();
        Self {
            layers,
            activation,
            params: vec![0.0; offset],
        }
    }

    /// Orthogonal weights scaled by `hidden_gain`, output layer by
    /// `output_gain`; zero biases.
    pub fn orthogonal<R: Rng + ?Sized>(
        sizes: &[usize],
        activation: Activation,
        hidden_gain: f64,
        output_gain: f64,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(sizes, activation);
        let last = net.layers.len() - 1;
        for (l, shape) in net.layers.clone().into_iter().enumerate() {
            let gain = if l == last { output_gain } else { hidden_gain };
            let w = orthogonal_matrix(shape.inputs, shape.outputs, rng);
            let dst = &mut net.params[shape.offset..shape.offset + shape.weight_len()];
            for (d, s) in dst.iter_mut().zip(w.iter()) {
                *d = gain * s;
            }
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.outputs).unwrap_or(0)
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Widths from input to output.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    fn weights(&self, shape: &LayerShape) -> ArrayView2<'_, f64> {
        let w = &self.params[shape.offset..shape.offset + shape.weight_len()];
        ArrayView2::from_shape((shape.inputs, shape.outputs), w).expect("layer shape")
    }

    fn biases(&self, shape: &LayerShape) -> ArrayView1<'_, f64> {
        let start = shape.offset + shape.weight_len();
        ArrayView1::from(&self.params[start..start + shape.outputs])
    }

    /// Bias slice of the output layer.
    pub fn output_bias_mut(&mut self) -> &mut [f64] {
        let shape = *self.layers.last().expect("non-empty network");
        let start = shape.offset + shape.weight_len();
        &mut self.params[start..start + shape.outputs]
    }

    /// Forward pass over a batch (rows are samples).
    pub fn forward(&self, input: ArrayView2<'_, f64>) -> ForwardCache {
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(last);
        activations.push(input.to_owned());
        for (l, shape) in self.layers.iter().enumerate() {
            let mut z = activations[l].dot(&self.weights(shape));
            z += &self.biases(shape);
            if l == last {
                activations.push(z);
            } else {
                let act = self.activation;
                let y = z.mapv(|x| act.apply(x));
                pre.push(z);
                activations.push(y);
            }
        }
        ForwardCache { activations, pre }
    }

    /// Forward pass for one input vector.
    pub fn forward_one(&self, input: &[f64]) -> Vec<f64> {
        let view = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        self.forward(view).output().iter().copied().collect()
    }

    /// Accumulates parameter gradients into `grads` given `d_output`, the
    /// loss gradient with respect to the network output.
    pub fn backward(&self, cache: &ForwardCache, d_output: Array2<f64>, grads: &mut [f64]) {
        debug_assert_eq!(grads.len(), self.params.len());
        let mut delta = d_output;
        for (l, shape) in self.layers.iter().enumerate().rev() {
            let input = &cache.activations[l];
            let w_len = shape.weight_len();
            let (gw, rest) = grads[shape.offset..shape.offset + shape.len()].split_at_mut(w_len);
            let mut gw = ArrayViewMut2::from_shape((shape.inputs, shape.outputs), gw).expect("layer shape");
            gw += &input.t().dot(&delta);
            for (g, d) in rest.iter_mut().zip(delta.sum_axis(Axis(0)).iter()) {
                *g += d;
            }
            if l > 0 {
                let mut upstream = delta.dot(&self.weights(shape).t());
                let act = self.activation;
                ndarray::Zip::from(&mut upstream)
                    .and(&cache.pre[l - 1])
                    .and(&cache.activations[l])
                    .for_each(|u, &x, &y| *u *= act.derivative(x, y));
                delta = upstream;
            }
        }
    }
}

/// Matrix of shape `(rows, cols)` with orthonormal rows or columns,
/// whichever are fewer.
fn orthogonal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let (n, m) = if rows < cols { (rows, cols) } else { (cols, rows) };
    // n orthonormal vectors of length m via modified Gram-Schmidt.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    Array2::from_shape_fn(
        (rows, cols),
        |(r, c)| {
            if rows < cols {
                basis[r][c]
            } else {
                basis[c][r]
            }
        },
    )
}
