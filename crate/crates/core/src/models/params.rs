use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, Variant};
use crate::autodiff::Param;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::poly::FilterKind;

/// Parameter slots of one polynomial conv layer.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvSlots {
    pub kind: FilterKind,
    /// One `fan_in × fan_out` weight per order `0..=K`.
    pub weights: Vec<usize>,
    /// Pre-sigmoid shape parameter, Krawtchouk layers only.
    pub raw_p: Option<usize>,
    pub fan_in: usize,
    pub fan_out: usize,
}

/// How the flat parameter list maps onto the architecture.
#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// One 2-layer model (ChebyNet or KrawtchoukNet).
    Single { layer1: ConvSlots, layer2: ConvSlots },
    /// Both branches at each layer, concatenated, then a `2C × C` projection.
    HybV3 {
        het1: ConvSlots,
        stab1: ConvSlots,
        het2: ConvSlots,
        stab2: ConvSlots,
        proj: usize,
    },
    /// Two complete 2-layer models sharing nothing.
    HybV4 {
        het: (ConvSlots, ConvSlots),
        stab: (ConvSlots, ConvSlots),
    },
}

/// Flat list of named parameters plus the layout that gives them meaning.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub params: Vec<Param>,
    pub layout: Layout,
    pub num_features: usize,
    pub num_classes: usize,
}

/// Stream id for a named RNG purpose, so each branch draws independently.
fn stream_id(tag: &str) -> u64 {
    // FNV-1a; only needs to be stable across runs and platforms
    tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Deterministic RNG for `(seed, tag)`.
pub fn init_rng(seed: u64, tag: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tag));
    rng
}

struct Builder<'c> {
    cfg: &'c ModelConfig,
    seed: u64,
    params: Vec<Param>,
}

impl Builder<'_> {
    /// Weights `U(−b, b)` with `b = 1/sqrt(fan_in·(K+1))`; `raw_p` starts at
    /// `cfg.raw_p_init`.
    fn conv(&mut self, prefix: &str, kind: FilterKind, fan_in: usize, fan_out: usize) -> ConvSlots {
        let mut rng = init_rng(self.seed, prefix);
        let orders = self.cfg.k + 1;
        let bound = 1.0 / ((fan_in * orders) as f64).sqrt();
        let weights = (0..orders)
            .map(|k| {
                let data = (0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect();
                self.push(format!("{prefix}.w{k}"), DenseMatrix::new(fan_in, fan_out, data).expect("shape"))
            })
            .collect();
        let raw_p = (kind == FilterKind::Krawtchouk)
            .then(|| self.push(format!("{prefix}.raw_p"), DenseMatrix::scalar(self.cfg.raw_p_init)));
        ConvSlots {
            kind,
            weights,
            raw_p,
            fan_in,
            fan_out,
        }
    }

    fn push(&mut self, name: String, value: DenseMatrix) -> usize {
        self.params.push(Param::new(name, value));
        self.params.len() - 1
    }
}

impl ModelParams {
    pub fn init(cfg: &ModelConfig, num_features: usize, num_classes: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if num_features == 0 || num_classes == 0 {
            return Err(Error::Config("need at least one feature and one class".into()));
        }
        let (f, h, c) = (num_features, cfg.hidden, num_classes);
        let mut b = Builder {
            cfg,
            seed,
            params: Vec::new(),
        };
        use FilterKind::{Cheb, Krawtchouk};
        let layout = match cfg.variant {
            Variant::Cheby => Layout::Single {
                layer1: b.conv("stab.l1", Cheb, f, h),
                layer2: b.conv("stab.l2", Cheb, h, c),
            },
            Variant::Krawtchouk => Layout::Single {
                layer1: b.conv("het.l1", Krawtchouk, f, h),
                layer2: b.conv("het.l2", Krawtchouk, h, c),
            },
            Variant::HybV3 => {
                let het1 = b.conv("het.l1", Krawtchouk, f, h);
                let stab1 = b.conv("stab.l1", Cheb, f, h);
                let het2 = b.conv("het.l2", Krawtchouk, 2 * h, c);
                let stab2 = b.conv("stab.l2", Cheb, 2 * h, c);
                let mut rng = init_rng(seed, "fused.proj");
                let bound = 1.0 / ((2 * c) as f64).sqrt();
                let data = (0..2 * c * c).map(|_| rng.random_range(-bound..bound)).collect();
                let proj = b.push("fused.proj".into(), DenseMatrix::new(2 * c, c, data)?);
                Layout::HybV3 {
                    het1,
                    stab1,
                    het2,
                    stab2,
                    proj,
                }
            }
            Variant::HybV4 => {
                let het = (b.conv("het.l1", Krawtchouk, f, h), b.conv("het.l2", Krawtchouk, h, c));
                let stab = (b.conv("stab.l1", Cheb, f, h), b.conv("stab.l2", Cheb, h, c));
                Layout::HybV4 { het, stab }
            }
        };
        Ok(Self {
            params: b.params,
            layout,
            num_features,
            num_classes,
        })
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(Param::numel).sum()
    }

    pub fn find(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn find_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    /// Branch a parameter belongs to, from its name prefix.
    pub fn branch_of(&self, slot: usize) -> super::Branch {
        let name = &self.params[slot].name;
        if name.starts_with("het.") {
            super::Branch::Het
        } else if name.starts_with("stab.") {
            super::Branch::Stab
        } else {
            super::Branch::Fused
        }
    }

    /// Current `p = sigmoid(raw_p)` of every Krawtchouk layer.
    pub fn krawtchouk_p(&self) -> Vec<(String, f64)> {
        self.params
            .iter()
            .filter(|p| p.name.ends_with(".raw_p"))
            .map(|p| (p.name.clone(), crate::autodiff::sigmoid(p.value.get(0, 0))))
            .collect()
    }
}

/// Closed-form scalar parameter count for `(K, H, F, C)`.
///
/// * ChebyNet: `(K+1)(FH + HC)`
/// * KrawtchoukNet: `(K+1)(FH + HC) + 2`
/// * v3: `(K+1)(2FH + 4HC) + 2C² + 2`
/// * v4: `2(K+1)(FH + HC) + 2`
pub fn expected_param_count(variant: Variant, k: usize, h: usize, f: usize, c: usize) -> usize {
    let orders = k + 1;
    let single = orders * (f * h + h * c);
    match variant {
        Variant::Cheby => single,
        Variant::Krawtchouk => single + 2,
        Variant::HybV3 => orders * (2 * f * h + 4 * h * c) + 2 * c * c + 2,
        Variant::HybV4 => 2 * single + 2,
    }
}
