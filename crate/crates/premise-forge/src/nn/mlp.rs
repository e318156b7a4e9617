//! A small feed-forward binary classifier: rectified hidden layers and a
//! logistic output, trained with binary cross-entropy.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{ForgeError, Result};

/// Layer weights, biases, and the seed used to initialize them.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// Layer widths, `[input, hidden..., 1]`.
    pub layer_dims: Vec<usize>,
    /// Row-major `out x in` weight matrices per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Per-parameter gradients with the same shapes as the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Gradients {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (mine, theirs) in self.weights.iter_mut().zip(&other.weights) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t * scale;
            }
        }
        for (mine, theirs) in self.biases.iter_mut().zip(&other.biases) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t * scale;
            }
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Binary cross-entropy with the probability clamped away from 0 and 1.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

impl MlpModel {
    /// Builds a model with symmetric uniform init scaled by fan-in.
    pub fn new_seeded(layer_dims: &[usize], seed: u64) -> Result<MlpModel> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(ForgeError::Invalid(format!(
                "bad layer dims {:?}",
                layer_dims
            )));
        }
        if *layer_dims.last().unwrap() != 1 {
            return Err(ForgeError::Invalid("output layer must have one unit".into()));
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            seed,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(ForgeError::DimMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Activations per layer, starting with the input itself. Hidden layers
    /// are rectified; the last activation is the output probability.
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.weights.len();
        let mut activations = Vec::with_capacity(layers + 1);
        activations.push(input.to_vec());
        for l in 0..layers {
            let fan_in = self.layer_dims[l];
            let fan_out = self.layer_dims[l + 1];
            let prev = &activations[l];
            let mut next = vec![0.0; fan_out];
            for o in 0..fan_out {
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                let mut z = self.biases[l][o];
                for (w, a) in row.iter().zip(prev) {
                    z += w * a;
                }
                next[o] = if l + 1 == layers { sigmoid(z) } else { z.max(0.0) };
            }
            activations.push(next);
        }
        activations
    }

    /// Probability that the input is a positive example.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        self.check_input(input)?;
        Ok(*self.forward_trace(input).last().unwrap().first().unwrap())
    }

    pub fn loss(&self, input: &[f64], label: f64) -> Result<f64> {
        Ok(bce_loss(self.forward(input)?, label))
    }

    /// Analytic gradient of the binary cross-entropy for one example.
    pub fn backward(&self, input: &[f64], label: f64) -> Result<(f64, Gradients)> {
        self.check_input(input)?;
        let activations = self.forward_trace(input);
        let layers = self.weights.len();
        let p = activations[layers][0];
        let loss = bce_loss(p, label);

        let mut grads = Gradients::zeros_like(self);
        // logistic + cross-entropy collapses to p - y at the output
        let mut delta = vec![p - label];
        for l in (0..layers).rev() {
            let fan_in = self.layer_dims[l];
            let fan_out = self.layer_dims[l + 1];
            let prev = &activations[l];
            for o in 0..fan_out {
                grads.biases[l][o] = delta[o];
                let row = &mut grads.weights[l][o * fan_in..(o + 1) * fan_in];
                for (g, a) in row.iter_mut().zip(prev) {
                    *g = delta[o] * a;
                }
            }
            if l > 0 {
                let mut next_delta = vec![0.0; fan_in];
                for (i, nd) in next_delta.iter_mut().enumerate() {
                    // rectifier derivative: activations already hold max(z, 0)
                    if prev[i] > 0.0 {
                        let mut sum = 0.0;
                        for (o, d) in delta.iter().enumerate() {
                            sum += self.weights[l][o * fan_in + i] * d;
                        }
                        *nd = sum;
                    }
                }
                delta = next_delta;
            }
        }
        Ok((loss, grads))
    }

    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= lr * gi;
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            for (bi, gi) in b.iter_mut().zip(g) {
                *bi -= lr * gi;
            }
        }
    }

    /// Compares the analytic gradient against central finite differences
    /// over every parameter, returning the maximum relative error.
    pub fn gradient_check(&self, input: &[f64], label: f64) -> Result<f64> {
        const STEP: f64 = 1e-4;
        let (_, analytic) = self.backward(input, label)?;
        let mut worst: f64 = 0.0;
        let mut probe = self.clone();
        for l in 0..self.weights.len() {
            for i in 0..self.weights[l].len() {
                let original = self.weights[l][i];
                probe.weights[l][i] = original + STEP;
                let plus = probe.loss(input, label)?;
                probe.weights[l][i] = original - STEP;
                let minus = probe.loss(input, label)?;
                probe.weights[l][i] = original;
                let numeric = (plus - minus) / (2.0 * STEP);
                worst = worst.max(relative_error(analytic.weights[l][i], numeric));
            }
            for i in 0..self.biases[l].len() {
                let original = self.biases[l][i];
                probe.biases[l][i] = original + STEP;
                let plus = probe.loss(input, label)?;
                probe.biases[l][i] = original - STEP;
                let minus = probe.loss(input, label)?;
                probe.biases[l][i] = original;
                let numeric = (plus - minus) / (2.0 * STEP);
                worst = worst.max(relative_error(analytic.biases[l][i], numeric));
            }
        }
        Ok(worst)
    }
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_outputs_half() {
        let mut model = MlpModel::new_seeded(&[3, 4, 1], 0).unwrap();
        for w in model.weights.iter_mut() {
            w.fill(0.0);
        }
        let p = model.forward(&[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn hand_computed_linear_model() {
        // p = sigmoid(0.5*1 + (-1)*2 + 0.25) = sigmoid(-1.25)
        let mut model = MlpModel::new_seeded(&[2, 1], 0).unwrap();
        model.weights[0] = vec![0.5, -1.0];
        model.biases[0] = vec![0.25];
        let p = model.forward(&[1.0, 2.0]).unwrap();
        let expected = 1.0 / (1.0 + (1.25f64).exp());
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn rectifier_kills_negative_preactivation() {
        // one hidden unit with negative pre-activation contributes nothing
        let mut model = MlpModel::new_seeded(&[1, 2, 1], 0).unwrap();
        model.weights[0] = vec![1.0, -1.0]; // h = [x, -x]
        model.biases[0] = vec![0.0, 0.0];
        model.weights[1] = vec![1.0, 1.0];
        model.biases[1] = vec![0.0];
        let p = model.forward(&[2.0]).unwrap();
        // only the positive path survives: sigmoid(2)
        assert!((p - sigmoid(2.0)).abs() < 1e-15);
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let model = MlpModel::new_seeded(&[3, 1], 0).unwrap();
        assert!(matches!(
            model.forward(&[1.0]),
            Err(ForgeError::DimMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn linear_gradient_matches_closed_form() {
        // single logistic layer: dL/dw_i = (p - y) x_i, dL/db = p - y
        let mut model = MlpModel::new_seeded(&[3, 1], 7).unwrap();
        model.weights[0] = vec![0.2, -0.4, 0.6];
        model.biases[0] = vec![0.1];
        let x = [1.5, -2.0, 0.5];
        let y = 1.0;
        let p = model.forward(&x).unwrap();
        let (_, grads) = model.backward(&x, y).unwrap();
        for i in 0..3 {
            assert!((grads.weights[0][i] - (p - y) * x[i]).abs() < 1e-12);
        }
        assert!((grads.biases[0][0] - (p - y)).abs() < 1e-12);
    }

    #[test]
    fn zero_model_bias_gradient_is_half_minus_label() {
        let mut model = MlpModel::new_seeded(&[2, 1], 0).unwrap();
        model.weights[0].fill(0.0);
        let (_, grads) = model.backward(&[0.0, 0.0], 1.0).unwrap();
        assert!((grads.biases[0][0] - (0.5 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gradient_check_small_model() {
        let model = MlpModel::new_seeded(&[4, 8, 1], 3).unwrap();
        let input = [0.3, -0.7, 1.2, 0.05];
        let err = model.gradient_check(&input, 1.0).unwrap();
        assert!(err < 1e-4, "max relative error {}", err);
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = MlpModel::new_seeded(&[5, 3, 1], 42).unwrap();
        let b = MlpModel::new_seeded(&[5, 3, 1], 42).unwrap();
        assert_eq!(a, b);
        let c = MlpModel::new_seeded(&[5, 3, 1], 43).unwrap();
        assert_ne!(a, c);
    }
}
