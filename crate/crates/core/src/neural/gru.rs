use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{Matrix, Params};
use super::{sigmoid, Network};

/// One GRU layer. The update gate reads the concatenation `[h_prev, x]`;
/// the reset gate and candidate use separate input and recurrent matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruLayer {
    /// Hidden x (hidden + inputs).
    pub w_z: Matrix,
    pub b_z: Vec<f64>,
    pub w_r: Matrix,
    pub u_r: Matrix,
    pub b_r: Vec<f64>,
    pub w_h: Matrix,
    pub u_h: Matrix,
    pub b_h: Vec<f64>,
}

/// Intermediate values of one cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrace {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h: Vec<f64>,
}

impl GruLayer {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        GruLayer {
            w_z: Matrix::zeros(hidden, hidden + inputs),
            b_z: vec![0.0; hidden],
            w_r: Matrix::zeros(hidden, inputs),
            u_r: Matrix::zeros(hidden, hidden),
            b_r: vec![0.0; hidden],
            w_h: Matrix::zeros(hidden, inputs),
            u_h: Matrix::zeros(hidden, hidden),
            b_h: vec![0.0; hidden],
        }
    }

    pub fn init<R: Rng + ?Sized>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        GruLayer {
            w_z: Matrix::xavier(hidden, hidden + inputs, rng),
            w_r: Matrix::xavier(hidden, inputs, rng),
            u_r: Matrix::xavier(hidden, hidden, rng),
            w_h: Matrix::xavier(hidden, inputs, rng),
            u_h: Matrix::xavier(hidden, hidden, rng),
            ..Self::zeros(inputs, hidden)
        }
    }

    pub fn hidden(&self) -> usize {
        self.b_z.len()
    }

    pub fn inputs(&self) -> usize {
        self.w_r.cols
    }

    pub fn cell(&self, x: &[f64], h_prev: &[f64]) -> CellTrace {
        let mut z = self.b_z.clone();
        self.w_z.matvec_add(&[h_prev, x].concat(), &mut z);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));

        let mut r = self.b_r.clone();
        self.w_r.matvec_add(x, &mut r);
        self.u_r.matvec_add(h_prev, &mut r);
        r.iter_mut().for_each(|v| *v = sigmoid(*v));

        let gated: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
        let mut candidate = self.b_h.clone();
        self.w_h.matvec_add(x, &mut candidate);
        self.u_h.matvec_add(&gated, &mut candidate);
        candidate.iter_mut().for_each(|v| *v = v.tanh());

        let h = (0..z.len())
            .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * candidate[i])
            .collect();
        CellTrace {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            z,
            r,
            candidate,
            h,
        }
    }

    /// Backpropagates `dh` through one step. Accumulates parameter gradients
    /// into `g` and returns `(d x, d h_prev)`.
    pub fn cell_backward(&self, t: &CellTrace, dh: &[f64], g: &mut GruLayer) -> (Vec<f64>, Vec<f64>) {
        let hn = self.hidden();
        let mut dx = vec![0.0; t.x.len()];
        let mut dhp: Vec<f64> = (0..hn).map(|i| dh[i] * (1.0 - t.z[i])).collect();

        let da_h: Vec<f64> = (0..hn)
            .map(|i| dh[i] * t.z[i] * (1.0 - t.candidate[i] * t.candidate[i]))
            .collect();
        let gated: Vec<f64> = t.r.iter().zip(&t.h_prev).map(|(a, b)| a * b).collect();
        g.w_h.add_outer(&da_h, &t.x);
        g.u_h.add_outer(&da_h, &gated);
        add(&mut g.b_h, &da_h);
        self.w_h.matvec_t_add(&da_h, &mut dx);
        let mut dgated = vec![0.0; hn];
        self.u_h.matvec_t_add(&da_h, &mut dgated);

        let da_r: Vec<f64> = (0..hn)
            .map(|i| dgated[i] * t.h_prev[i] * t.r[i] * (1.0 - t.r[i]))
            .collect();
        for i in 0..hn {
            dhp[i] += dgated[i] * t.r[i];
        }
        g.w_r.add_outer(&da_r, &t.x);
        g.u_r.add_outer(&da_r, &t.h_prev);
        add(&mut g.b_r, &da_r);
        self.w_r.matvec_t_add(&da_r, &mut dx);
        self.u_r.matvec_t_add(&da_r, &mut dhp);

        let da_z: Vec<f64> = (0..hn)
            .map(|i| dh[i] * (t.candidate[i] - t.h_prev[i]) * t.z[i] * (1.0 - t.z[i]))
            .collect();
        let joined = [t.h_prev.as_slice(), t.x.as_slice()].concat();
        g.w_z.add_outer(&da_z, &joined);
        add(&mut g.b_z, &da_z);
        let mut djoined = vec![0.0; joined.len()];
        self.w_z.matvec_t_add(&da_z, &mut djoined);
        for i in 0..hn {
            dhp[i] += djoined[i];
        }
        for (d, j) in dx.iter_mut().zip(&djoined[hn..]) {
            *d += j;
        }
        (dx, dhp)
    }

    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            &self.w_z.data,
            &self.b_z,
            &self.w_r.data,
            &self.u_r.data,
            &self.b_r,
            &self.w_h.data,
            &self.u_h.data,
            &self.b_h,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            &mut self.w_z.data,
            &mut self.b_z,
            &mut self.w_r.data,
            &mut self.u_r.data,
            &mut self.b_r,
            &mut self.w_h.data,
            &mut self.u_h.data,
            &mut self.b_h,
        ]
    }
}

fn add(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Stacked GRU layers with a sigmoid readout of the last hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub layers: Vec<GruLayer>,
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

/// Equal-length steps, one per feature family.
pub type Sequence = Vec<Vec<f64>>;

impl GruParams {
    pub fn zeros(inputs: usize, hidden: usize, layers: usize) -> Self {
        GruParams {
            layers: (0..layers)
                .map(|l| GruLayer::zeros(if l == 0 { inputs } else { hidden }, hidden))
                .collect(),
            w_out: vec![0.0; hidden],
            b_out: vec![0.0],
        }
    }

    /// Xavier recurrent weights; zero biases and readout.
    pub fn init<R: Rng + ?Sized>(inputs: usize, hidden: usize, layers: usize, rng: &mut R) -> Self {
        GruParams {
            layers: (0..layers)
                .map(|l| GruLayer::init(if l == 0 { inputs } else { hidden }, hidden, rng))
                .collect(),
            ..Self::zeros(inputs, hidden, layers)
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_out.len()
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    /// Per-layer traces, each starting from `h_0 = 0`.
    pub fn run(&self, seq: &[Vec<f64>]) -> Vec<Vec<CellTrace>> {
        let mut input: Vec<Vec<f64>> = seq.to_vec();
        let mut traces = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let mut h = vec![0.0; layer.hidden()];
            let mut steps = Vec::with_capacity(input.len());
            for x in &input {
                let t = layer.cell(x, &h);
                h = t.h.clone();
                steps.push(t);
            }
            input = steps.iter().map(|t| t.h.clone()).collect();
            traces.push(steps);
        }
        traces
    }

    fn readout(&self, h: &[f64]) -> f64 {
        sigmoid(self.b_out[0] + self.w_out.iter().zip(h).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn forward(&self, seq: &[Vec<f64>]) -> f64 {
        let traces = self.run(seq);
        let last = traces.last().and_then(|t| t.last()).map(|t| t.h.clone());
        self.readout(&last.unwrap_or_else(|| vec![0.0; self.hidden()]))
    }
}

impl Params for GruParams {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = self.layers.iter().flat_map(GruLayer::tensors).collect();
        v.push(&self.w_out);
        v.push(&self.b_out);
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = self.layers.iter_mut().flat_map(GruLayer::tensors_mut).collect();
        v.push(&mut self.w_out);
        v.push(&mut self.b_out);
        v
    }
}

impl Network for GruParams {
    type Input = Sequence;

    fn predict(&self, x: &Sequence) -> f64 {
        self.forward(x)
    }

    fn accumulate(&self, seq: &Sequence, y: f64, scale: f64, g: &mut Self) -> f64 {
        let traces = self.run(seq);
        let steps = seq.len();
        let h_last = &traces[traces.len() - 1][steps - 1].h;
        let p = self.readout(h_last);
        let dz = scale * (p - y);
        g.b_out[0] += dz;
        add(&mut g.w_out, &h_last.iter().map(|h| dz * h).collect::<Vec<_>>());

        // Gradient w.r.t. each step's output of the layer being processed.
        let mut d_out: Vec<Vec<f64>> = vec![vec![0.0; self.hidden()]; steps];
        d_out[steps - 1] = self.w_out.iter().map(|w| dz * w).collect();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let mut d_in = vec![vec![0.0; layer.inputs()]; steps];
            let mut carry = vec![0.0; layer.hidden()];
            for t in (0..steps).rev() {
                let dh: Vec<f64> = d_out[t].iter().zip(&carry).map(|(a, b)| a + b).collect();
                let (dx, dhp) = layer.cell_backward(&traces[l][t], &dh, &mut g.layers[l]);
                d_in[t] = dx;
                carry = dhp;
            }
            d_out = d_in;
        }
        p
    }

    fn output_bias_mut(&mut self) -> &mut f64 {
        &mut self.b_out[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layer(seed: u64) -> GruLayer {
        GruLayer::init(3, 4, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn closed_update_gate_keeps_state() {
        let mut l = layer(1);
        l.b_z.fill(-60.0);
        let h_prev = [0.3, -0.2, 0.9, -0.7];
        let t = l.cell(&[1.0, -1.0, 0.5], &h_prev);
        let d: f64 = t.h.iter().zip(&h_prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(d < 1e-6);
    }

    #[test]
    fn open_update_gate_takes_candidate() {
        let mut l = layer(2);
        l.b_z.fill(60.0);
        let t = l.cell(&[1.0, -1.0, 0.5], &[0.3, -0.2, 0.9, -0.7]);
        let d: f64 = t.h.iter().zip(&t.candidate).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(d < 1e-6);
    }

    #[test]
    fn two_unit_hand_evaluation() {
        let l = GruLayer {
            w_z: Matrix { rows: 2, cols: 3, data: vec![0.1, 0.2, 0.3, -0.1, 0.0, 0.5] },
            b_z: vec![0.0, 0.1],
            w_r: Matrix { rows: 2, cols: 1, data: vec![0.4, -0.4] },
            u_r: Matrix { rows: 2, cols: 2, data: vec![0.2, 0.0, 0.0, 0.2] },
            b_r: vec![0.0, 0.0],
            w_h: Matrix { rows: 2, cols: 1, data: vec![1.0, -1.0] },
            u_h: Matrix { rows: 2, cols: 2, data: vec![0.5, 0.0, 0.0, 0.5] },
            b_h: vec![0.0, 0.0],
        };
        let x = [1.0];
        let hp = [0.5, -0.5];
        let s = |v: f64| 1.0 / (1.0 + (-v).exp());
        let z = [s(0.1 * 0.5 + 0.2 * -0.5 + 0.3), s(-0.1 * 0.5 + 0.5 + 0.1)];
        let r = [s(0.4 + 0.1), s(-0.4 - 0.1)];
        let c = [(1.0 + 0.5 * r[0] * 0.5f64).tanh(), (-1.0 + 0.5 * r[1] * -0.5f64).tanh()];
        let h = [(1.0 - z[0]) * 0.5 + z[0] * c[0], (1.0 - z[1]) * -0.5 + z[1] * c[1]];
        let t = l.cell(&x, &hp);
        for i in 0..2 {
            assert!((t.z[i] - z[i]).abs() < 1e-15);
            assert!((t.r[i] - r[i]).abs() < 1e-15);
            assert!((t.h[i] - h[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_params_give_half() {
        let g = GruParams::zeros(4, 64, 2);
        assert_eq!(g.forward(&vec![vec![1.0, 2.0, 3.0, 4.0]; 3]), 0.5);
    }

    #[test]
    fn step_order_matters() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut g = GruParams::init(2, 8, 2, &mut rng);
        g.w_out = (0..8).map(|i| (i as f64 - 3.5) / 4.0).collect();
        let seq = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let rev: Vec<Vec<f64>> = seq.iter().rev().cloned().collect();
        assert_ne!(g.forward(&seq), g.forward(&rev));
    }
}
