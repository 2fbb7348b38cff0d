//! Small dense network used as the classical Q-function baseline.
//!
//! Parameters are stored in one flat vector, layer by layer, each layer as
//! its `out × in` weight matrix (row-major) followed by its `out` biases.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    #[default]
    Linear,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Input size, hidden sizes, output size.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub head: OutputHead,
}

impl MlpConfig {
    pub fn new(layer_sizes: Vec<usize>, head: OutputHead) -> Self {
        MlpConfig {
            layer_sizes,
            activation: Activation::Relu,
            head,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "invalid layer sizes {:?}",
                self.layer_sizes
            )));
        }
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().expect("validated sizes")
    }

    /// Σ over layers of `in · out + out`.
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// He-uniform weights scaled by fan-in and zero biases.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.param_count());
        for w in self.layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        params
    }

    fn check(&self, params: &[f64], input: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Dimension {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        if input.len() != self.n_inputs() {
            return Err(Error::Dimension {
                expected: self.n_inputs(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Pre-activations and activations of every layer, input first.
    fn forward_trace(&self, params: &[f64], input: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n_layers = self.layer_sizes.len() - 1;
        let mut pre = Vec::with_capacity(n_layers);
        let mut act = Vec::with_capacity(n_layers + 1);
        act.push(input.to_vec());
        let mut offset = 0;
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &params[offset..offset + n_in * n_out];
            let bias = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let x = &act[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| {
                    bias[o]
                        + weights[o * n_in..(o + 1) * n_in]
                            .iter()
                            .zip(x)
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                })
                .collect();
            let a = if l + 1 < n_layers {
                match self.activation {
                    Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
                }
            } else {
                match self.head {
                    OutputHead::Linear => z.clone(),
                    OutputHead::Softmax => softmax(&z),
                }
            };
            pre.push(z);
            act.push(a);
        }
        (pre, act)
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Result<Vec<f64>> {
        self.check(params, input)?;
        let (_, mut act) = self.forward_trace(params, input);
        Ok(act.pop().expect("at least one layer"))
    }

    /// Outputs and the gradient of `Σ_a upstream[a] · output[a]` with respect
    /// to every parameter.
    pub fn backward(
        &self,
        params: &[f64],
        input: &[f64],
        upstream: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(params, input)?;
        if upstream.len() != self.n_outputs() {
            return Err(Error::Dimension {
                expected: self.n_outputs(),
                got: upstream.len(),
            });
        }
        let (pre, act) = self.forward_trace(params, input);
        let n_layers = pre.len();
        let outputs = act[n_layers].clone();

        // gradient with respect to the last pre-activation
        let mut delta: Vec<f64> = match self.head {
            OutputHead::Linear => upstream.to_vec(),
            OutputHead::Softmax => {
                let dot: f64 = upstream.iter().zip(&outputs).map(|(u, y)| u * y).sum();
                outputs
                    .iter()
                    .zip(upstream)
                    .map(|(y, u)| y * (u - dot))
                    .collect()
            }
        };

        let offsets: Vec<usize> = self
            .layer_sizes
            .windows(2)
            .scan(0, |acc, w| {
                let start = *acc;
                *acc += w[0] * w[1] + w[1];
                Some(start)
            })
            .collect();
        let mut grad = vec![0.0; params.len()];
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let offset = offsets[l];
            let x = &act[l];
            for o in 0..n_out {
                for i in 0..n_in {
                    grad[offset + o * n_in + i] = delta[o] * x[i];
                }
                grad[offset + n_in * n_out + o] = delta[o];
            }
            if l > 0 {
                let weights = &params[offset..offset + n_in * n_out];
                delta = (0..n_in)
                    .map(|i| {
                        if pre[l - 1][i] <= 0.0 {
                            return 0.0;
                        }
                        (0..n_out).map(|o| weights[o * n_in + i] * delta[o]).sum()
                    })
                    .collect();
            }
        }
        Ok((outputs, grad))
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}
