use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{Matrix, Params};
use super::{sigmoid, Network};

/// One sigmoid hidden layer and a sigmoid output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// Hidden x inputs.
    pub w: Matrix,
    pub b: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        MlpParams {
            w: Matrix::zeros(hidden, inputs),
            b: vec![0.0; hidden],
            w_out: vec![0.0; hidden],
            b_out: vec![0.0],
        }
    }

    /// Xavier hidden weights; the readout starts at zero.
    pub fn init<R: Rng + ?Sized>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        MlpParams {
            w: Matrix::xavier(hidden, inputs, rng),
            ..Self::zeros(inputs, hidden)
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.cols
    }

    pub fn hidden(&self) -> usize {
        self.w.rows
    }

    /// Returns `(Y, H)`.
    pub fn forward(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut h = self.b.clone();
        self.w.matvec_add(x, &mut h);
        h.iter_mut().for_each(|v| *v = sigmoid(*v));
        let z = self.b_out[0] + self.w_out.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>();
        (sigmoid(z), h)
    }
}

impl Params for MlpParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![&self.w.data, &self.b, &self.w_out, &self.b_out]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.w.data, &mut self.b, &mut self.w_out, &mut self.b_out]
    }
}

impl Network for MlpParams {
    type Input = Vec<f64>;

    fn predict(&self, x: &Vec<f64>) -> f64 {
        self.forward(x).0
    }

    fn accumulate(&self, x: &Vec<f64>, y: f64, scale: f64, g: &mut Self) -> f64 {
        let (p, h) = self.forward(x);
        let dz = scale * (p - y);
        g.b_out[0] += dz;
        let mut da = vec![0.0; h.len()];
        for (i, &hi) in h.iter().enumerate() {
            g.w_out[i] += dz * hi;
            da[i] = dz * self.w_out[i] * hi * (1.0 - hi);
            g.b[i] += da[i];
        }
        g.w.add_outer(&da, x);
        p
    }

    fn output_bias_mut(&mut self) -> &mut f64 {
        &mut self.b_out[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_give_half() {
        let m = MlpParams::zeros(3, 128);
        let (y, h) = m.forward(&[0.3, -2.0, 7.0]);
        assert_eq!(y, 0.5);
        assert!(h.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn two_unit_hand_evaluation() {
        let m = MlpParams {
            w: Matrix {
                rows: 2,
                cols: 3,
                data: vec![0.5, -1.0, 0.25, -0.5, 2.0, 1.0],
            },
            b: vec![0.1, -0.2],
            w_out: vec![1.5, -0.75],
            b_out: vec![0.05],
        };
        // Hidden pre-activations for x = (1, 0, 1): 0.85 and 0.3.
        let h1 = 1.0 / (1.0 + (-0.85f64).exp());
        let h2 = 1.0 / (1.0 + (-0.3f64).exp());
        let y = 1.0 / (1.0 + (-(0.05 + 1.5 * h1 - 0.75 * h2)).exp());
        let (got, h) = m.forward(&[1.0, 0.0, 1.0]);
        assert!((h[0] - h1).abs() < 1e-15 && (h[1] - h2).abs() < 1e-15);
        assert!((got - y).abs() < 1e-15);
    }
}
