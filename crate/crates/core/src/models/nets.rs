use rand_chacha::ChaCha8Rng;

use super::conv::{conv_forward, ConvInput};
use super::{init_rng, ActivationOrder, Branch, ConvSlots, EventLocation, FusionGuard, Layout, ModelConfig, ModelParams, StabilityEvent};
use crate::autodiff::{NodeId, Tape};
use crate::error::{Error, Result};
use crate::graph::{Graph, SpectralOperators};
use crate::linalg::CsrMatrix;
use crate::poly::{cheb_propagate, BasisStack, FilterKind};

/// Per-graph data shared by every forward pass: the spectral operators and
/// the Chebyshev terms of the (constant) input features.
#[derive(Clone, Debug)]
pub struct GraphContext<'g> {
    pub graph: &'g Graph,
    pub ops: SpectralOperators,
    cheb_input: BasisStack,
}

impl<'g> GraphContext<'g> {
    pub fn new(graph: &'g Graph, k: usize) -> Result<Self> {
        let ops = SpectralOperators::for_graph(graph)?;
        let cheb_input = cheb_propagate(&ops.l_hat, graph.features(), k)?;
        Ok(Self { graph, ops, cheb_input })
    }

    pub fn degree(&self) -> usize {
        self.cheb_input.degree()
    }

    fn operator(&self, kind: FilterKind) -> &CsrMatrix {
        match kind {
            FilterKind::Cheb => &self.ops.l_hat,
            FilterKind::Krawtchouk => &self.ops.l_scaled,
        }
    }
}

/// Dropout streams, one per branch so branches never share randomness.
#[derive(Clone, Debug)]
pub struct ForwardRngs {
    pub het: ChaCha8Rng,
    pub stab: ChaCha8Rng,
    pub fused: ChaCha8Rng,
}

impl ForwardRngs {
    pub fn new(seed: u64) -> Self {
        Self {
            het: init_rng(seed, "dropout.het"),
            stab: init_rng(seed, "dropout.stab"),
            fused: init_rng(seed, "dropout.fused"),
        }
    }

    fn for_branch(&mut self, branch: Branch) -> &mut ChaCha8Rng {
        match branch {
            Branch::Het => &mut self.het,
            Branch::Stab => &mut self.stab,
            Branch::Fused => &mut self.fused,
        }
    }
}

/// Nodes and diagnostics of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardOutput {
    /// Reported log-probability head (`out_final` for v4).
    pub head: NodeId,
    pub out_het: Option<NodeId>,
    pub out_stab: Option<NodeId>,
    /// v4 branches dropped by the fusion guard in this pass.
    pub excluded: Vec<Branch>,
    /// First non-finite value per branch and layer; `epoch` is left at 0.
    pub events: Vec<StabilityEvent>,
    /// No usable head: non-finite head (single, v3, unguarded v4) or both
    /// v4 branches non-finite.
    pub collapsed: bool,
}

struct Pass<'a, 'c> {
    ctx: &'a GraphContext<'c>,
    params: &'a ModelParams,
    cfg: &'a ModelConfig,
    train: bool,
    events: Vec<StabilityEvent>,
}

impl<'a> Pass<'a, '_> {
    fn event(&mut self, branch: Branch, location: EventLocation, max_abs_before: f64) {
        self.events.push(StabilityEvent {
            epoch: 0,
            branch,
            location,
            max_abs_before,
        });
    }

    fn conv(&mut self, tape: &mut Tape<'a>, slots: &ConvSlots, input: ConvInput<'a>, branch: Branch, layer: usize) -> Result<NodeId> {
        let out = conv_forward(
            tape,
            &self.params.params,
            slots,
            self.ctx.operator(slots.kind),
            input,
            self.cfg.lattice_size(),
            self.cfg.krawtchouk_scaling,
        )?;
        if let Some(order) = out.first_nonfinite_order {
            self.event(branch, EventLocation::BasisOrder { layer, order }, out.max_abs_before);
        } else {
            let probe = tape.value(out.out).finite_probe();
            if !probe.is_finite {
                self.event(branch, EventLocation::LayerOutput { layer }, out.max_abs_before);
            }
        }
        Ok(out.out)
    }

    fn first_input(&self, tape: &mut Tape<'a>, kind: FilterKind) -> ConvInput<'a> {
        match kind {
            FilterKind::Cheb => ConvInput::Precomputed(&self.ctx.cheb_input),
            FilterKind::Krawtchouk => ConvInput::Node(tape.constant_ref(self.ctx.graph.features())),
        }
    }

    fn activate(&self, tape: &mut Tape<'a>, h: NodeId, rng: &mut ChaCha8Rng) -> NodeId {
        let rate = self.cfg.dropout;
        match self.cfg.activation_order {
            ActivationOrder::ReluOfDropout => {
                let d = tape.dropout(h, rate, self.train, rng);
                tape.relu(d)
            }
            ActivationOrder::DropoutOfRelu => {
                let r = tape.relu(h);
                tape.dropout(r, rate, self.train, rng)
            }
        }
    }

    fn head(&mut self, tape: &mut Tape<'a>, logits: NodeId, branch: Branch) -> NodeId {
        let logp = tape.log_softmax_rows(logits);
        let probe = tape.value(logp).finite_probe();
        if !probe.is_finite {
            self.event(branch, EventLocation::Head, probe.max_abs);
        }
        logp
    }

    fn two_layer(&mut self, tape: &mut Tape<'a>, layers: &(ConvSlots, ConvSlots), branch: Branch, rngs: &mut ForwardRngs) -> Result<NodeId> {
        let (l1, l2) = layers;
        let input = self.first_input(tape, l1.kind);
        let h = self.conv(tape, l1, input, branch, 1)?;
        let h = self.activate(tape, h, rngs.for_branch(branch));
        let logits = self.conv(tape, l2, ConvInput::Node(h), branch, 2)?;
        Ok(self.head(tape, logits, branch))
    }
}

fn is_finite(tape: &Tape<'_>, id: NodeId) -> bool {
    tape.value(id).is_finite()
}

fn check_context(ctx: &GraphContext<'_>, params: &ModelParams, cfg: &ModelConfig) -> Result<()> {
    if ctx.degree() != cfg.k {
        return Err(Error::Config(format!("graph context built for K = {}, model has K = {}", ctx.degree(), cfg.k)));
    }
    if ctx.graph.num_features() != params.num_features || ctx.graph.num_classes() != params.num_classes {
        return Err(Error::Config(format!(
            "model expects {} features / {} classes, graph has {} / {}",
            params.num_features,
            params.num_classes,
            ctx.graph.num_features(),
            ctx.graph.num_classes()
        )));
    }
    Ok(())
}

/// ChebyNet or KrawtchoukNet: conv → activation → conv → log-softmax.
pub fn single_branch_forward<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext<'_>,
    params: &'a ModelParams,
    cfg: &'a ModelConfig,
    train: bool,
    rngs: &mut ForwardRngs,
) -> Result<ForwardOutput> {
    check_context(ctx, params, cfg)?;
    let Layout::Single { layer1, layer2 } = &params.layout else {
        return Err(Error::Config("single_branch_forward needs a single-branch layout".into()));
    };
    let branch = match layer1.kind {
        FilterKind::Cheb => Branch::Stab,
        FilterKind::Krawtchouk => Branch::Het,
    };
    let mut pass = Pass { ctx, params, cfg, train, events: Vec::new() };
    let head = pass.two_layer(tape, &(layer1.clone(), layer2.clone()), branch, rngs)?;
    let collapsed = !is_finite(tape, head);
    let (out_het, out_stab) = match branch {
        Branch::Het => (Some(head), None),
        _ => (None, Some(head)),
    };
    Ok(ForwardOutput { head, out_het, out_stab, excluded: Vec::new(), events: pass.events, collapsed })
}

/// Early fusion: both branches at every layer, concatenated into one shared
/// representation, then a `2C → C` projection. There is no guard.
pub fn hyb_v3_forward<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext<'_>,
    params: &'a ModelParams,
    cfg: &'a ModelConfig,
    train: bool,
    rngs: &mut ForwardRngs,
) -> Result<ForwardOutput> {
    check_context(ctx, params, cfg)?;
    let Layout::HybV3 { het1, stab1, het2, stab2, proj } = &params.layout else {
        return Err(Error::Config("hyb_v3_forward needs a v3 layout".into()));
    };
    let mut pass = Pass { ctx, params, cfg, train, events: Vec::new() };
    let input = pass.first_input(tape, FilterKind::Krawtchouk);
    let x_het = pass.conv(tape, het1, input, Branch::Het, 1)?;
    let x_stab = pass.conv(tape, stab1, ConvInput::Precomputed(&ctx.cheb_input), Branch::Stab, 1)?;
    let h = tape.concat_cols(x_het, x_stab)?;
    let h = pass.activate(tape, h, &mut rngs.fused);
    let y_het = pass.conv(tape, het2, ConvInput::Node(h), Branch::Het, 2)?;
    let y_stab = pass.conv(tape, stab2, ConvInput::Node(h), Branch::Stab, 2)?;
    let y = tape.concat_cols(y_het, y_stab)?;
    let w = tape.param(*proj, &params.params[*proj].value);
    let logits = tape.matmul(y, w)?;
    let head = pass.head(tape, logits, Branch::Fused);
    let collapsed = !is_finite(tape, head);
    Ok(ForwardOutput { head, out_het: None, out_stab: None, excluded: Vec::new(), events: pass.events, collapsed })
}

/// Late fusion: two full models on disjoint parameters, heads averaged.
///
/// With [`FusionGuard::MaskNonfinite`] a branch whose head has any
/// non-finite entry is left out, so `head` is then exactly the other
/// branch's node and the loss never reaches the excluded parameters.
pub fn hyb_v4_forward<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext<'_>,
    params: &'a ModelParams,
    cfg: &'a ModelConfig,
    train: bool,
    rngs: &mut ForwardRngs,
) -> Result<ForwardOutput> {
    check_context(ctx, params, cfg)?;
    let Layout::HybV4 { het, stab } = &params.layout else {
        return Err(Error::Config("hyb_v4_forward needs a v4 layout".into()));
    };
    let mut pass = Pass { ctx, params, cfg, train, events: Vec::new() };
    let out_het = pass.two_layer(tape, het, Branch::Het, rngs)?;
    let out_stab = pass.two_layer(tape, stab, Branch::Stab, rngs)?;
    let (het_ok, stab_ok) = (is_finite(tape, out_het), is_finite(tape, out_stab));

    let mut excluded = Vec::new();
    let (head, collapsed) = match cfg.fusion_guard {
        FusionGuard::Off => {
            let head = tape.mean_pair(out_het, out_stab)?;
            (head, !is_finite(tape, head))
        }
        FusionGuard::MaskNonfinite => match (het_ok, stab_ok) {
            (true, true) => (tape.mean_pair(out_het, out_stab)?, false),
            (false, true) => {
                excluded.push(Branch::Het);
                (out_stab, false)
            }
            (true, false) => {
                excluded.push(Branch::Stab);
                (out_het, false)
            }
            (false, false) => {
                excluded.extend([Branch::Het, Branch::Stab]);
                (tape.mean_pair(out_het, out_stab)?, true)
            }
        },
    };
    Ok(ForwardOutput {
        head,
        out_het: Some(out_het),
        out_stab: Some(out_stab),
        excluded,
        events: pass.events,
        collapsed,
    })
}

/// Dispatch on `cfg.variant`.
pub fn forward<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext<'_>,
    params: &'a ModelParams,
    cfg: &'a ModelConfig,
    train: bool,
    rngs: &mut ForwardRngs,
) -> Result<ForwardOutput> {
    use super::Variant::*;
    match cfg.variant {
        Cheby | Krawtchouk => single_branch_forward(tape, ctx, params, cfg, train, rngs),
        HybV3 => hyb_v3_forward(tape, ctx, params, cfg, train, rngs),
        HybV4 => hyb_v4_forward(tape, ctx, params, cfg, train, rngs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, SbmConfig};
    use crate::models::Variant;

    fn graph() -> Graph {
        generate_sbm(&SbmConfig { n: 60, c: 3, h: 0.5, avg_degree: 4.0, f: 6, seed: 5, ..Default::default() }).unwrap()
    }

    fn run(g: &Graph, cfg: &ModelConfig, params: &ModelParams, train: bool) -> Vec<f64> {
        let ctx = GraphContext::new(g, cfg.k).unwrap();
        let mut tape = Tape::new();
        let out = forward(&mut tape, &ctx, params, cfg, train, &mut ForwardRngs::new(1)).unwrap();
        tape.value(out.head).data().to_vec()
    }

    #[test]
    fn heads_normalize_for_every_variant() {
        let g = graph();
        for variant in Variant::ALL {
            let cfg = ModelConfig::new(variant, 3);
            let params = ModelParams::init(&cfg, g.num_features(), g.num_classes(), 2).unwrap();
            let ctx = GraphContext::new(&g, 3).unwrap();
            let mut tape = Tape::new();
            let out = forward(&mut tape, &ctx, &params, &cfg, false, &mut ForwardRngs::new(1)).unwrap();
            assert!(!out.collapsed && out.events.is_empty(), "{variant:?}");
            // the v4 head averages log-probabilities, so only its branches normalize
            let heads = match variant {
                Variant::HybV4 => vec![out.out_het.unwrap(), out.out_stab.unwrap()],
                _ => vec![out.head],
            };
            for h in heads {
                for row in tape.value(h).data().chunks(3) {
                    let s: f64 = row.iter().map(|v| v.exp()).sum();
                    assert!((s - 1.0).abs() < 1e-8, "{variant:?}: {s}");
                }
            }
        }
    }

    #[test]
    fn v4_head_is_mean_of_finite_branches() {
        let g = graph();
        let cfg = ModelConfig::new(Variant::HybV4, 2);
        let params = ModelParams::init(&cfg, g.num_features(), g.num_classes(), 2).unwrap();
        let ctx = GraphContext::new(&g, 2).unwrap();
        let mut tape = Tape::new();
        let out = forward(&mut tape, &ctx, &params, &cfg, false, &mut ForwardRngs::new(0)).unwrap();
        let (h, s) = (tape.value(out.out_het.unwrap()), tape.value(out.out_stab.unwrap()));
        let want = h.zip_map(s, |a, b| 0.5 * (a + b)).unwrap();
        assert_eq!(tape.value(out.head), &want);
    }

    #[test]
    fn context_degree_must_match() {
        let g = graph();
        let cfg = ModelConfig::new(Variant::Cheby, 3);
        let params = ModelParams::init(&cfg, g.num_features(), g.num_classes(), 0).unwrap();
        let ctx = GraphContext::new(&g, 2).unwrap();
        let mut tape = Tape::new();
        assert!(forward(&mut tape, &ctx, &params, &cfg, false, &mut ForwardRngs::new(0)).is_err());
    }

    #[test]
    fn eval_mode_ignores_rng_state() {
        let g = graph();
        let cfg = ModelConfig::new(Variant::HybV3, 2);
        let params = ModelParams::init(&cfg, g.num_features(), g.num_classes(), 4).unwrap();
        let a = run(&g, &cfg, &params, false);
        let ctx = GraphContext::new(&g, 2).unwrap();
        let mut tape = Tape::new();
        let out = forward(&mut tape, &ctx, &params, &cfg, false, &mut ForwardRngs::new(99)).unwrap();
        assert_eq!(tape.value(out.head).data(), &a[..]);
    }
}
