//! Dense layers with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fully connected layer, `y = W x + b`, weights stored row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Weights uniform in `±1/sqrt(in_dim)`, zero bias.
    pub fn fan_in_uniform<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        let weight = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            in_dim,
            out_dim,
            weight,
            bias: vec![0.0; out_dim],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.in_dim, self.out_dim)
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        self.weight
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    /// Accumulates `dL/dW`, `dL/db` into `grad` and, if requested, writes `dL/dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Dense, dx: Option<&mut [f64]>) {
        for (i, &g) in dy.iter().enumerate() {
            grad.bias[i] += g;
            if g != 0.0 {
                let row = &mut grad.weight[i * self.in_dim..(i + 1) * self.in_dim];
                for (w, v) in row.iter_mut().zip(x) {
                    *w += g * v;
                }
            }
        }
        if let Some(dx) = dx {
            dx.iter_mut().for_each(|d| *d = 0.0);
            for (row, &g) in self.weight.chunks_exact(self.in_dim).zip(dy) {
                if g != 0.0 {
                    for (d, w) in dx.iter_mut().zip(row) {
                        *d += g * w;
                    }
                }
            }
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.weight.iter().chain(self.bias.iter())
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weight.iter_mut().chain(self.bias.iter_mut())
    }
}

pub fn relu_in_place(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Zeroes gradient entries whose activation was clipped by ReLU.
pub fn relu_backward(post: &[f64], grad: &mut [f64]) {
    for (g, &a) in grad.iter_mut().zip(post) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_backward_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layer = Dense::fan_in_uniform(3, 2, &mut rng);
        let x = [0.3, -0.7, 1.1];
        let dy = [0.5, -2.0];
        let loss = |l: &Dense, x: &[f64]| {
            l.forward(x)
                .iter()
                .zip(&dy)
                .map(|(y, g)| y * g)
                .sum::<f64>()
        };
        let mut grad = layer.zeros_like();
        let mut dx = [0.0; 3];
        layer.backward(&x, &dy, &mut grad, Some(&mut dx));
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (loss(&layer, &xp) - loss(&layer, &xm)) / (2.0 * h);
            assert!((fd - dx[j]).abs() < 1e-8);
        }
        for i in 0..layer.weight.len() {
            let mut p = layer.clone();
            let mut m = layer.clone();
            p.weight[i] += h;
            m.weight[i] -= h;
            let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * h);
            assert!((fd - grad.weight[i]).abs() < 1e-8);
        }
        assert_eq!(grad.bias, dy.to_vec());
    }

    #[test]
    fn softmax_properties() {
        let p = softmax(&[0.0, 0.0, 0.0, 0.0]);
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert!((entropy(&p) - 4f64.ln()).abs() < 1e-12);
        let big = softmax(&[1000.0, 0.0]);
        assert!((big[0] - 1.0).abs() < 1e-12 && big.iter().all(|x| x.is_finite()));
        let ls = log_softmax(&[1.0, 2.0, 3.0]);
        let s = softmax(&[1.0, 2.0, 3.0]);
        for (a, b) in ls.iter().zip(&s) {
            assert!((a - b.ln()).abs() < 1e-12);
        }
    }
}
