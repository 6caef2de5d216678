//! Ancestral sampling from a decomposable distribution.
//!
//! Cliques are visited in running-intersection order; each clique draws the
//! values of its new variables conditioned on its separator, which earlier
//! cliques have already assigned.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::Rng;

use crate::chordal::{Decomposition, VarSet};
use crate::estimate::FittedModel;
use crate::schema::Schema;

#[derive(Debug, Clone)]
struct Group {
    cumulative: Vec<f64>,
    cells: Vec<u64>,
}

#[derive(Debug, Clone)]
struct Step {
    sep: VarSet,
    residual: Vec<usize>,
    groups: HashMap<u64, Group>,
}

#[derive(Debug, Clone)]
pub struct AncestralSampler {
    schema: Arc<Schema>,
    steps: Vec<Step>,
}

impl AncestralSampler {
    /// Builds a sampler from non-negative weights over each clique's cells
    /// (projection keys). Weights are normalized within each separator
    /// configuration, so they act as conditional tables.
    pub fn from_clique_weights(
        schema: Arc<Schema>,
        decomposition: &Decomposition,
        weights: Vec<Vec<(u64, f64)>>,
    ) -> Self {
        let cliques = decomposition.cliques();
        assert_eq!(cliques.len(), weights.len());
        let steps = cliques
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(j, (&clique, cells))| {
                let sep = if j == 0 {
                    VarSet::empty()
                } else {
                    decomposition.separators()[j - 1]
                };
                let mut grouped: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
                for (key, w) in cells {
                    if w > 0.0 {
                        grouped
                            .entry(schema.project_key(key, sep))
                            .or_default()
                            .push((key, w));
                    }
                }
                let groups = grouped
                    .into_iter()
                    .map(|(s, mut cells)| {
                        cells.sort_by_key(|&(k, _)| k);
                        let mut acc = 0.0;
                        let cumulative = cells
                            .iter()
                            .map(|&(_, w)| {
                                acc += w;
                                acc
                            })
                            .collect();
                        (
                            s,
                            Group {
                                cumulative,
                                cells: cells.into_iter().map(|(k, _)| k).collect(),
                            },
                        )
                    })
                    .collect();
                Step {
                    sep,
                    residual: clique.difference(sep).iter().collect(),
                    groups,
                }
            })
            .collect();
        Self { schema, steps }
    }

    /// Sampler for the fitted joint of a model.
    pub fn from_fitted(model: &FittedModel) -> Self {
        let weights = model
            .clique_tables()
            .iter()
            .map(|t| t.iter().map(|(k, c)| (k, c as f64)).collect())
            .collect();
        Self::from_clique_weights(model.schema_arc().clone(), model.decomposition(), weights)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Draws one complete instance into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [u32]) {
        for step in &self.steps {
            let sep_key = self.schema.project_values(out, step.sep);
            let group = step
                .groups
                .get(&sep_key)
                .expect("separator configuration reachable from earlier cliques");
            let total = *group.cumulative.last().expect("groups are non-empty");
            let u = rng.random::<f64>() * total;
            let idx = group
                .cumulative
                .partition_point(|&c| c <= u)
                .min(group.cells.len() - 1);
            let cell = group.cells[idx];
            for &v in &step.residual {
                out[v] = self.schema.value_of(cell, v);
            }
        }
    }

    /// Draws `n` instances and returns their cell counts keyed by cell key.
    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R, n: u64) -> HashMap<u64, u64> {
        let mut buf = vec![0u32; self.schema.arity()];
        let mut counts = HashMap::new();
        for _ in 0..n {
            self.sample_into(rng, &mut buf);
            *counts.entry(self.schema.cell_key(&buf)).or_insert(0) += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::ModelGraph;
    use crate::estimate::fit;
    use crate::schema::parse_dataset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_stay_in_fitted_support() {
        let ds = parse_dataset("A,B,S\n0,0,0\n1,1,0\n0,1,1\n0,1,1\n", "S", ',').unwrap();
        let g = ModelGraph::from_edges(3, [(0, 2), (1, 2)]).unwrap();
        let m = fit(&ds, &g).unwrap();
        let sampler = AncestralSampler::from_fitted(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let counts = sampler.sample_counts(&mut rng, 4000);
        for (&k, &c) in &counts {
            let p = m.joint_probability_key(k);
            assert!(p > 0.0);
            let freq = c as f64 / 4000.0;
            assert!((freq - p).abs() < 0.03, "freq {freq} vs p {p}");
        }
    }
}
