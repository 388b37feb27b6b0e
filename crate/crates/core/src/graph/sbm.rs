use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{random_split, Graph, SplitRatios};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Planted-partition graph with a target edge homophily.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbmConfig {
    pub n: usize,
    /// Number of classes.
    pub c: usize,
    /// Target fraction of intra-class edges.
    pub h: f64,
    pub avg_degree: f64,
    /// Feature dimension; the first `c` columns carry the class centroid.
    pub f: usize,
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            n: 400,
            c: 4,
            h: 0.5,
            avg_degree: 8.0,
            f: 16,
            feature_noise: 1.0,
            seed: 0,
        }
    }
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c == 0 || self.n < self.c {
            return Err(Error::Config(format!("need 1 <= c <= n, got c = {}, n = {}", self.c, self.n)));
        }
        if !(0.0..=1.0).contains(&self.h) {
            return Err(Error::Config(format!("homophily {} outside [0, 1]", self.h)));
        }
        if !(self.avg_degree >= 0.0 && self.avg_degree < self.n as f64) {
            return Err(Error::Config(format!(
                "average degree {} must lie in [0, n)",
                self.avg_degree
            )));
        }
        if self.f < self.c {
            return Err(Error::Config(format!(
                "feature dimension {} smaller than class count {}",
                self.f, self.c
            )));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return Err(Error::Config("feature noise must be a finite non-negative std-dev".into()));
        }
        Ok(())
    }

    /// Intra- and inter-class edge probabilities.
    ///
    /// Solves `p_in / (p_in + (c−1) p_out) = h` together with
    /// `(m−1) p_in + (n−m) p_out = avg_degree`, where `m = n / c`.
    pub fn edge_probabilities(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let n = self.n as f64;
        let c = self.c as f64;
        let m = n / c;
        let d = self.avg_degree;
        let (p_in, p_out) = if self.c == 1 {
            (d / (n - 1.0).max(1.0), 0.0)
        } else if self.h == 0.0 {
            (0.0, d / (n - m))
        } else {
            let ratio = (1.0 - self.h) / (self.h * (c - 1.0));
            let p_in = d / ((m - 1.0) + (n - m) * ratio);
            (p_in, p_in * ratio)
        };
        for (name, p) in [("intra-class", p_in), ("inter-class", p_out)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Config(format!("{name} edge probability {p} is not in [0, 1]")));
            }
        }
        Ok((p_in, p_out))
    }
}

/// Samples a graph. Bit-reproducible for a fixed config.
///
/// The returned graph carries a stratified random 60/20/20 split drawn from
/// the same seed.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<Graph> {
    let (p_in, p_out) = cfg.edge_probabilities()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut labels: Vec<usize> = (0..cfg.n).map(|i| i % cfg.c).collect();
    labels.shuffle(&mut rng);

    let mut triplets = Vec::new();
    for i in 0..cfg.n {
        for j in i + 1..cfg.n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                triplets.push((i, j, 1.0));
                triplets.push((j, i, 1.0));
            }
        }
    }
    let adjacency = CsrMatrix::from_triplets(cfg.n, triplets)?;

    let noise = Normal::new(0.0, cfg.feature_noise).map_err(|e| Error::Config(e.to_string()))?;
    let mut features = DenseMatrix::zeros(cfg.n, cfg.f);
    for (i, &label) in labels.iter().enumerate() {
        let row = features.row_mut(i);
        for v in row.iter_mut() {
            *v = noise.sample(&mut rng);
        }
        row[label] += 1.0;
    }

    let g = Graph::new(adjacency, features, labels, cfg.c, None)?;
    let split = random_split(&g, SplitRatios::default(), cfg.seed ^ SPLIT_SALT)?;
    g.with_split(split)
}

const SPLIT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Fraction of edges whose endpoints share a label (`NaN` for an edgeless graph).
pub fn edge_homophily(g: &Graph) -> f64 {
    let adj = g.adjacency();
    let labels = g.labels();
    let (mut same, mut total) = (0usize, 0usize);
    for r in 0..g.n() {
        for (c, _) in adj.row(r) {
            total += 1;
            if labels[r] == labels[c] {
                same += 1;
            }
        }
    }
    same as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(h: f64, seed: u64) -> SbmConfig {
        SbmConfig {
            n: 400,
            c: 4,
            h,
            avg_degree: 8.0,
            f: 8,
            feature_noise: 0.5,
            seed,
        }
    }

    #[test]
    fn full_homophily_has_no_cross_edges() {
        let g = generate_sbm(&cfg(1.0, 3)).unwrap();
        assert!(g.num_edges() > 0);
        assert_eq!(edge_homophily(&g), 1.0);
    }

    #[test]
    fn chance_homophily_equalizes_probabilities() {
        let (p_in, p_out) = cfg(0.25, 0).edge_probabilities().unwrap();
        assert!((p_in - p_out).abs() <= 1e-15 * p_in);
    }

    #[test]
    fn measured_homophily_tracks_target() {
        for seed in 0..10 {
            let h = edge_homophily(&generate_sbm(&cfg(0.9, seed)).unwrap());
            assert!((h - 0.9).abs() <= 0.05, "seed {seed}: {h}");
        }
    }

    #[test]
    fn expected_degree_is_respected() {
        let g = generate_sbm(&cfg(0.3, 11)).unwrap();
        let mean_deg = 2.0 * g.num_edges() as f64 / g.n() as f64;
        assert!((mean_deg - 8.0).abs() < 0.8, "{mean_deg}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = generate_sbm(&cfg(0.1, 42)).unwrap();
        let b = generate_sbm(&cfg(0.1, 42)).unwrap();
        assert_eq!(a.adjacency(), b.adjacency());
        let bits = |g: &Graph| g.features().data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.labels(), b.labels());
        assert_eq!(a.split(), b.split());
    }

    #[test]
    fn infeasible_configs_error() {
        let dense = SbmConfig { n: 8, c: 2, h: 1.0, avg_degree: 7.5, ..cfg(1.0, 0) };
        assert!(matches!(dense.edge_probabilities(), Err(Error::Config(_))));
        assert!(SbmConfig { h: 1.5, ..cfg(0.5, 0) }.validate().is_err());
        assert!(SbmConfig { avg_degree: 400.0, ..cfg(0.5, 0) }.validate().is_err());
        assert!(SbmConfig { f: 2, ..cfg(0.5, 0) }.validate().is_err());
    }
}
