//! Synthetic datasets drawn from a known decomposable model.
//!
//! Each clique gets a random conditional table for its new variables
//! given its separator, with every conditional drawn uniformly from the
//! probability simplex. Sampling is ancestral, so no joint table is built.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chordal::{
    decompose, notation, notation_groups, parse_notation, Decomposition, ModelGraph, VarSet,
};
use crate::error::{Error, Result};
use crate::sampler::AncestralSampler;
use crate::schema::{Dataset, FeatureVariable, Instance, Schema};

/// Level counts per variable: a default plus named overrides,
/// written `3` or `2,S=6,E=3` or `S=6` (default 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpec {
    pub default: usize,
    pub overrides: Vec<(String, usize)>,
}

impl Default for LevelSpec {
    fn default() -> Self {
        Self {
            default: 2,
            overrides: Vec::new(),
        }
    }
}

impl LevelSpec {
    pub fn levels_for(&self, name: &str) -> usize {
        self.overrides
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, k)| *k)
            .unwrap_or(self.default)
    }
}

impl std::str::FromStr for LevelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |part: &str| Error::InvalidConfig(format!("bad level spec `{part}`"));
        let mut spec = LevelSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, k) = match part.split_once('=') {
                Some((n, k)) => (Some(n.trim()), k.trim()),
                None => (None, part),
            };
            let k: usize = k.parse().map_err(|_| bad(part))?;
            if k < 1 {
                return Err(bad(part));
            }
            match name {
                Some(n) => spec.overrides.push((n.to_string(), k)),
                None => spec.default = k,
            }
        }
        Ok(spec)
    }
}

/// A decomposable distribution with random parameters.
#[derive(Debug, Clone)]
pub struct SyntheticModel {
    schema: Arc<Schema>,
    graph: ModelGraph,
    decomposition: Decomposition,
    sampler: AncestralSampler,
    conditionals: Vec<std::collections::HashMap<u64, f64>>,
}

impl SyntheticModel {
    /// Variables are taken from the notation in order of first appearance;
    /// `class_name`, when it names one of them, becomes the class column.
    pub fn random(
        model_notation: &str,
        levels: &LevelSpec,
        class_name: Option<&str>,
        seed: u64,
    ) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        for group in notation_groups(model_notation)? {
            for n in group {
                if !names.contains(&n) {
                    names.push(n);
                }
            }
        }
        if names.is_empty() {
            return Err(Error::Notation("model names no variables".into()));
        }
        if let Some(pos) = class_name.and_then(|c| names.iter().position(|n| n == c)) {
            let class = names.remove(pos);
            names.push(class);
        }
        let graph = parse_notation(model_notation, &names)?;
        let mut vars = names
            .iter()
            .map(|n| {
                FeatureVariable::new(
                    n.clone(),
                    (0..levels.levels_for(n)).map(|i| i.to_string()).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let class = vars.pop().expect("at least one variable");
        let schema = Arc::new(Schema::new(vars, class)?);
        let decomposition = decompose(&graph)?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let mut conditionals = Vec::new();
        let mut weights = Vec::new();
        for (j, &clique) in decomposition.cliques().iter().enumerate() {
            let sep = if j == 0 {
                VarSet::empty()
            } else {
                decomposition.separators()[j - 1]
            };
            let cells = enumerate_cells(&schema, clique);
            let raw: Vec<(u64, f64)> = cells
                .into_iter()
                .map(|k| (k, -(1.0 - rng.random::<f64>()).ln()))
                .collect();
            let mut totals = std::collections::HashMap::new();
            for &(k, w) in &raw {
                *totals.entry(schema.project_key(k, sep)).or_insert(0.0) += w;
            }
            let normalized: Vec<(u64, f64)> = raw
                .iter()
                .map(|&(k, w)| (k, w / totals[&schema.project_key(k, sep)]))
                .collect();
            conditionals.push(normalized.iter().copied().collect());
            weights.push(normalized);
        }
        let sampler =
            AncestralSampler::from_clique_weights(schema.clone(), &decomposition, weights);
        Ok(Self {
            schema,
            graph,
            decomposition,
            sampler,
            conditionals,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn graph(&self) -> &ModelGraph {
        &self.graph
    }

    pub fn notation(&self) -> String {
        notation(
            &self.graph,
            &self.schema.names(),
            Some(self.schema.class_index()),
        )
        .expect("generator graph is decomposable")
    }

    /// Exact probability of a complete instance under the generator.
    pub fn probability(&self, values: &[u32]) -> f64 {
        self.decomposition
            .cliques()
            .iter()
            .zip(&self.conditionals)
            .map(|(&c, table)| table[&self.schema.project_values(values, c)])
            .product()
    }

    pub fn sample(&self, n: u64, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut buf = vec![0u32; self.schema.arity()];
        let rows = (0..n)
            .map(|_| {
                self.sampler.sample_into(&mut rng, &mut buf);
                (Instance(buf.clone()), 1)
            })
            .collect();
        Dataset::from_rows(self.schema.clone(), rows)
    }
}

/// All projection keys of cells over `vars`, in mixed-radix order.
fn enumerate_cells(schema: &Schema, vars: VarSet) -> Vec<u64> {
    let mut keys = vec![0u64];
    for v in vars.iter() {
        let stride = schema.strides()[v];
        let k = schema.variable(v).cardinality() as u64;
        keys = keys
            .iter()
            .flat_map(|&base| (0..k).map(move |x| base + x * stride))
            .collect();
    }
    keys
}

/// Output of [`gen_synthetic`].
#[derive(Debug, Clone)]
pub struct Generated {
    /// Delimited text in the ingestion format.
    pub text: String,
    /// Generating model in clique notation.
    pub notation: String,
    pub dataset: Dataset,
}

/// Draws `n` rows from a randomly parameterized model. Parameters and
/// samples use separate streams of the same seed.
pub fn gen_synthetic(
    model_notation: &str,
    levels: &LevelSpec,
    n: u64,
    seed: u64,
    class_name: Option<&str>,
) -> Result<Generated> {
    if n == 0 {
        return Err(Error::InvalidConfig("N must be positive".into()));
    }
    let model = SyntheticModel::random(model_notation, levels, class_name, seed)?;
    let dataset = model.sample(n, seed)?;
    Ok(Generated {
        text: dataset.to_delimited(','),
        notation: model.notation(),
        dataset,
    })
}
