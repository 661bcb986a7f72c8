//! A small fully connected action-value network with hand-written backprop.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::replay::Transition;
use super::{Action, ActionMask};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            out.push(self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        }
    }
}

/// ReLU hidden layers, linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNet {
    pub layers: Vec<Dense>,
}

/// Gradient buffers shaped like a [`QNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl QNet {
    /// He-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = (6.0 / inputs as f64).sqrt();
                let mut d = Dense::zeros(inputs, outputs);
                d.weights.iter_mut().for_each(|v| *v = rng.random_range(-bound..bound));
                d
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self { layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect() }
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().expect("non-empty network").outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.forward_into(&cur, &mut next);
            if k < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn forward_batch(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| self.forward(x)).collect()
    }

    /// Pre-activations of every layer; used for backprop and kink detection.
    pub fn pre_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut cur = x.to_vec();
        let mut pre = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward_into(&cur, &mut z);
            cur = if k < last { z.iter().map(|v| v.max(0.0)).collect() } else { z.clone() };
            pre.push(z);
        }
        pre
    }

    /// Mean squared TD error of Q(obs)[a] against fixed `targets`, and its
    /// gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &[Transition], targets: &[f64]) -> (f64, Gradients) {
        let mut grads = Gradients { layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect() };
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for (tr, &y) in batch.iter().zip(targets) {
            // Forward, keeping each layer's input and pre-activation.
            let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
            let mut pres: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
            let mut cur = tr.obs.0.to_vec();
            for (k, layer) in self.layers.iter().enumerate() {
                let mut z = Vec::new();
                layer.forward_into(&cur, &mut z);
                inputs.push(cur);
                cur = if k < last { z.iter().map(|v| v.max(0.0)).collect() } else { z.clone() };
                pres.push(z);
            }
            let a = tr.action.index();
            let err = cur[a] - y;
            loss += err * err / n;

            let mut delta = vec![0.0; self.output_len()];
            delta[a] = 2.0 * err / n;
            for k in (0..self.layers.len()).rev() {
                let layer = &self.layers[k];
                let g = &mut grads.layers[k];
                for o in 0..layer.outputs {
                    if delta[o] == 0.0 {
                        continue;
                    }
                    g.bias[o] += delta[o];
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, x) in row.iter_mut().zip(&inputs[k]) {
                        *gw += delta[o] * x;
                    }
                }
                if k == 0 {
                    break;
                }
                let mut prev = vec![0.0; layer.inputs];
                for o in 0..layer.outputs {
                    if delta[o] == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, w) in prev.iter_mut().zip(row) {
                        *p += delta[o] * w;
                    }
                }
                // Through the ReLU of the previous layer.
                for (p, z) in prev.iter_mut().zip(&pres[k - 1]) {
                    if *z <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        (loss, grads)
    }

    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            l.weights.iter_mut().zip(&g.weights).for_each(|(w, d)| *w -= lr * d);
            l.bias.iter_mut().zip(&g.bias).for_each(|(b, d)| *b -= lr * d);
        }
    }

    /// All parameters, layer by layer (weights then bias).
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|v| *v = it.next().unwrap());
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Greedy action among those the mask allows; ties to the lowest index.
    pub fn greedy(&self, obs: &[f64], mask: ActionMask) -> Action {
        let q = self.forward(obs);
        let mut best: Option<(usize, f64)> = None;
        for (a, &v) in q.iter().enumerate() {
            if !mask.allows(Action::from_index(a)) {
                continue;
            }
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((a, v));
            }
        }
        Action::from_index(best.expect("mask allows at least one action").0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let net: QNet = serde_json::from_str(s)?;
        for w in net.layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::config("checkpoint layer shapes do not chain"));
            }
        }
        for l in &net.layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::config("checkpoint layer sizes are inconsistent"));
            }
        }
        Ok(net)
    }
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}

/// TD targets r + γ(1 − done)·max_{a' allowed} Q_target(next_obs)[a'].
pub fn td_targets(target: &QNet, batch: &[Transition], gamma: f64, mask: ActionMask) -> Vec<f64> {
    batch
        .iter()
        .map(|tr| {
            if tr.done {
                return tr.reward;
            }
            let q = target.forward(tr.next_obs.as_slice());
            let best = q
                .iter()
                .enumerate()
                .filter(|(a, _)| mask.allows(Action::from_index(*a)))
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            tr.reward + gamma * best
        })
        .collect()
}

/// One SGD step on the online network; returns the pre-step loss.
pub fn td_train_step(net: &mut QNet, target: &QNet, batch: &[Transition], gamma: f64, lr: f64) -> f64 {
    td_train_step_masked(net, target, batch, gamma, lr, ActionMask::ALL)
}

pub fn td_train_step_masked(
    net: &mut QNet,
    target: &QNet,
    batch: &[Transition],
    gamma: f64,
    lr: f64,
    mask: ActionMask,
) -> f64 {
    assert!(!batch.is_empty(), "empty training batch");
    let targets = td_targets(target, batch, gamma, mask);
    let (loss, grads) = net.loss_and_grad(batch, &targets);
    net.sgd_step(&grads, lr);
    loss
}
