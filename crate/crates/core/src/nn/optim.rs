use serde::{Deserialize, Serialize};

use super::{real, Params, Real, ScorerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

pub trait Optimizer<T: Real> {
    fn step(&mut self, params: &mut Params<T>, grads: &Params<T>);
}

pub struct Sgd {
    pub lr: f64,
}

impl<T: Real> Optimizer<T> for Sgd {
    fn step(&mut self, params: &mut Params<T>, grads: &Params<T>) {
        let lr: T = real(self.lr);
        for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
            p.scaled_add(-lr, g);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Params<T>,
    pub v: Params<T>,
}

impl<T: Real> Adam<T> {
    pub fn new(config: &ScorerConfig, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Params::zeros(config),
            v: Params::zeros(config),
        }
    }
}

impl<T: Real> Optimizer<T> for Adam<T> {
    fn step(&mut self, params: &mut Params<T>, grads: &Params<T>) {
        self.t += 1;
        let (b1, b2): (T, T) = (real(self.beta1), real(self.beta2));
        let one = T::one();
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        let step: T = real(self.lr * c2.sqrt() / c1);
        let eps: T = real(self.eps * c2.sqrt());
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *p = *p - step * *m / (v.sqrt() + eps);
            });
        }
    }
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`; returns the norm before clipping.
pub fn clip_grad_norm<T: Real>(grads: &mut Params<T>, max_norm: f64) -> f64 {
    let norm = grads
        .tensors()
        .iter()
        .flat_map(|t| t.iter())
        .map(|v| v.to_f64().unwrap_or(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        grads.scale(real(max_norm / norm));
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScorerConfig {
        ScorerConfig {
            embed_dim: 2,
            hidden_dim: 2,
            layers: 1,
            ..Default::default()
        }
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let c = cfg();
        let mut p = Params::<f64>::zeros(&c);
        let mut g = Params::<f64>::zeros(&c);
        g.bilinear.fill(3.0);
        g.value_b.fill(-0.5);
        let mut adam = Adam::new(&c, 0.01);
        adam.step(&mut p, &g);
        assert!(p.bilinear.iter().all(|&v| (v + 0.01).abs() < 1e-9));
        assert!((p.value_b[[0, 0]] - 0.01).abs() < 1e-9);
        assert!(p.embed.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sgd_step_and_clipping() {
        let c = cfg();
        let mut p = Params::<f64>::zeros(&c);
        let mut g = Params::<f64>::zeros(&c);
        g.value_b.fill(4.0);
        Sgd { lr: 0.5 }.step(&mut p, &g);
        assert_eq!(p.value_b[[0, 0]], -2.0);
        assert_eq!(clip_grad_norm(&mut g, 1.0), 4.0);
        assert!((g.value_b[[0, 0]] - 1.0).abs() < 1e-12);
    }
}
