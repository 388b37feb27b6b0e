use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, Split};
use crate::error::{Error, Result};

/// Train and validation fractions; the remainder is the test set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.6, val: 0.2 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        if !(self.train > 0.0 && self.val >= 0.0 && self.train + self.val < 1.0) {
            return Err(Error::Config(format!(
                "split ratios train = {}, val = {} leave no test set",
                self.train, self.val
            )));
        }
        Ok(())
    }
}

/// One stratified random split: within each class the nodes are shuffled
/// and cut at `round(train·n_c)` and `round((train+val)·n_c)`.
pub fn random_split(g: &Graph, ratios: SplitRatios, seed: u64) -> Result<Split> {
    ratios.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    stratified(g, ratios, &mut rng)
}

/// `k` independent stratified random splits (default ratios 60/20/20).
///
/// Each fold's test set is disjoint from that fold's train and validation
/// sets. Fold `i` draws from its own stream so adding folds never changes
/// earlier ones.
pub fn make_folds(g: &Graph, k: usize, ratios: SplitRatios, seed: u64) -> Result<Vec<Split>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    ratios.validate()?;
    let counts = g.class_counts();
    if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &c)| c > 0 && c < k) {
        return Err(Error::Config(format!(
            "class {class} has {count} nodes, fewer than the {k} folds"
        )));
    }
    (0..k)
        .map(|fold| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(fold as u64 + 1);
            stratified(g, ratios, &mut rng)
        })
        .collect()
}

fn stratified(g: &Graph, ratios: SplitRatios, rng: &mut ChaCha8Rng) -> Result<Split> {
    let n = g.n();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); g.num_classes()];
    for (i, &l) in g.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut train = vec![false; n];
    let mut val = vec![false; n];
    let mut test = vec![false; n];
    for members in &mut by_class {
        members.shuffle(rng);
        let nc = members.len() as f64;
        let cut_train = (ratios.train * nc).round() as usize;
        let cut_val = (((ratios.train + ratios.val) * nc).round() as usize).max(cut_train);
        for (pos, &node) in members.iter().enumerate() {
            if pos < cut_train {
                train[node] = true;
            } else if pos < cut_val {
                val[node] = true;
            } else {
                test[node] = true;
            }
        }
    }
    Split::new(train, val, test)
}
