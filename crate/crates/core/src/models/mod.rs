//! The four architectures: ChebyNet, KrawtchoukNet, HybSpecNet-v3 (layer-wise
//! concatenation) and HybSpecNet-v4 (late fusion of two independent models).
//!
//! Parameters of the stable branch are named `stab.*` and those of the
//! adaptive branch `het.*` in every variant, so a v4 model and a stand-alone
//! ChebyNet built from the same seed start from identical stable weights.

mod checkpoint;
mod conv;
mod nets;
mod params;
mod response;

use serde::{Deserialize, Serialize};

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use conv::{conv_forward, ConvInput, ConvOutput};
pub use nets::{forward, hyb_v3_forward, hyb_v4_forward, single_branch_forward, ForwardOutput, ForwardRngs, GraphContext};
pub use params::{expected_param_count, init_rng, ConvSlots, Layout, ModelParams};
pub use response::{filter_responses, operator_eigenvalue, LayerResponse};

use crate::error::{Error, Result};
use crate::poly::{Lattice, OrderScaling};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Cheby,
    Krawtchouk,
    HybV3,
    HybV4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::HybV3, Variant::HybV4, Variant::Krawtchouk, Variant::Cheby];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Cheby => "cheby",
            Variant::Krawtchouk => "krawtchouk",
            Variant::HybV3 => "hyb_v3",
            Variant::HybV4 => "hyb_v4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model variant {s:?}")))
    }
}

/// Order of the hidden-layer nonlinearity and dropout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationOrder {
    /// `ReLU(Dropout(x))`, the order written in the layer equation.
    #[default]
    ReluOfDropout,
    /// `Dropout(ReLU(x))`, the common implementation order.
    DropoutOfRelu,
}

/// What v4 does with a branch whose head is non-finite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionGuard {
    /// Plain average; a non-finite branch makes the fused head non-finite.
    Off,
    /// Drop the non-finite branch from the average and the loss.
    #[default]
    MaskNonfinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Polynomial degree.
    pub k: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub activation_order: ActivationOrder,
    /// Only consulted by v4; v3 has no guard.
    pub fusion_guard: FusionGuard,
    /// Initial pre-sigmoid Krawtchouk shape parameter (`p = sigmoid(raw_p)`).
    pub raw_p_init: f64,
    pub lattice: Lattice,
    pub krawtchouk_scaling: OrderScaling,
    /// v4 only: add per-branch NLL terms for surviving branches.
    pub aux_branch_loss: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Cheby,
            k: 3,
            hidden: 16,
            dropout: 0.5,
            activation_order: ActivationOrder::default(),
            fusion_guard: FusionGuard::default(),
            raw_p_init: 0.0,
            lattice: Lattice::default(),
            krawtchouk_scaling: OrderScaling::default(),
            aux_branch_loss: false,
        }
    }
}

impl ModelConfig {
    pub fn new(variant: Variant, k: usize) -> Self {
        Self {
            variant,
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("polynomial degree K must be at least 1".into()));
        }
        if self.hidden < 1 {
            return Err(Error::Config("hidden width must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !self.raw_p_init.is_finite() {
            return Err(Error::Config("raw_p_init must be finite".into()));
        }
        if self.lattice.size_for(self.k) < self.k {
            return Err(Error::Config(format!(
                "Krawtchouk lattice {} smaller than K = {}",
                self.lattice.size_for(self.k),
                self.k
            )));
        }
        Ok(())
    }

    pub fn lattice_size(&self) -> usize {
        self.lattice.size_for(self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Het,
    Stab,
    Fused,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Het => "het",
            Branch::Stab => "stab",
            Branch::Fused => "fused",
        }
    }
}

/// Where a non-finite value was first seen.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventLocation {
    /// Propagated basis term `P_order · X` of a conv layer (layers count from 1).
    BasisOrder { layer: usize, order: usize },
    /// Output of a conv layer (after the weighted sum over orders).
    LayerOutput { layer: usize },
    /// A log-probability head.
    Head,
    /// Gradient of a named parameter; its update was skipped.
    Gradient { param: String },
}

/// First non-finite occurrence at one location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEvent {
    pub epoch: usize,
    pub branch: Branch,
    pub location: EventLocation,
    /// Largest finite magnitude seen upstream of the overflow.
    pub max_abs_before: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        assert!(ModelConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { dropout: 1.0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { hidden: 0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { lattice: Lattice::Fixed(2), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
        assert!(Variant::parse("gcn").is_err());
    }
}
