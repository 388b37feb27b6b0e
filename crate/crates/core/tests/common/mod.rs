#![allow(dead_code)]

use hybspec::autodiff::{Gradients, Tape};
use hybspec::graph::{generate_sbm, Graph, SbmConfig};
use hybspec::models::{forward, Branch, ForwardRngs, GraphContext, ModelConfig, ModelParams};

pub fn sbm(c: usize, h: f64, seed: u64) -> Graph {
    generate_sbm(&SbmConfig { c, h, seed, ..Default::default() }).unwrap()
}

pub struct Step {
    pub grads: Gradients,
    pub excluded: Vec<Branch>,
    pub collapsed: bool,
    pub first_event: Option<hybspec::models::StabilityEvent>,
}

/// One training-mode forward and backward on the graph's own train mask.
pub fn step(g: &Graph, cfg: &ModelConfig, params: &ModelParams, seed: u64) -> Step {
    let ctx = GraphContext::new(g, cfg.k).unwrap();
    let mut tape = Tape::new();
    let out = forward(&mut tape, &ctx, params, cfg, true, &mut ForwardRngs::new(seed)).unwrap();
    let loss = tape.nll_loss(out.head, g.labels(), &g.split().unwrap().train).unwrap();
    Step {
        grads: tape.backward(loss).unwrap(),
        excluded: out.excluded,
        collapsed: out.collapsed,
        first_event: out.events.into_iter().next(),
    }
}

/// `(name, bit patterns)` of the gradient of every parameter in `branch`.
pub fn branch_grad_bits(params: &ModelParams, grads: &Gradients, branch: Branch) -> Vec<(String, Option<Vec<u64>>)> {
    (0..params.params.len())
        .filter(|&s| params.branch_of(s) == branch)
        .map(|s| {
            let bits = grads.param(s).map(|m| m.data().iter().map(|v| v.to_bits()).collect());
            (params.params[s].name.clone(), bits)
        })
        .collect()
}
