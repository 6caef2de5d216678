//! Closed-form maximum-likelihood fits of decomposable models.
//!
//! The fitted joint is the product of clique marginals divided by the
//! product of separator marginals, each normalized by N. Only observed
//! marginal cells are stored; no table over all q instances is ever built.

use std::collections::HashMap;
use std::sync::Arc;

use crate::chordal::{decompose, is_decomposable, Decomposition, Edge, ModelGraph, VarSet};
use crate::error::{Error, Result};
use crate::schema::{Dataset, Schema};

/// Observed counts over a subset of variables, keyed by projection key.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    vars: VarSet,
    counts: HashMap<u64, u64>,
    total: u64,
}

impl MarginalTable {
    pub fn from_dataset(dataset: &Dataset, vars: VarSet) -> Self {
        Self {
            vars,
            counts: dataset.marginal(vars),
            total: dataset.total(),
        }
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count_key(&self, key: u64) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Count of the cell matching `values` (a complete instance) on these variables.
    pub fn count(&self, schema: &Schema, values: &[u32]) -> u64 {
        self.count_key(schema.project_values(values, self.vars))
    }

    /// Number of cells with a positive count.
    pub fn nonzero_cells(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// Observed cells as level tuples (variables in ascending index order).
    pub fn tuples(&self, schema: &Schema) -> Vec<(Vec<u32>, u64)> {
        let mut out: Vec<_> = self
            .counts
            .iter()
            .map(|(&k, &c)| (self.vars.iter().map(|i| schema.value_of(k, i)).collect(), c))
            .collect();
        out.sort();
        out
    }

    pub fn marginalize(&self, schema: &Schema, onto: VarSet) -> MarginalTable {
        debug_assert!(onto.is_subset(self.vars));
        let mut counts = HashMap::new();
        for (&k, &c) in &self.counts {
            *counts.entry(schema.project_key(k, onto)).or_insert(0) += c;
        }
        MarginalTable {
            vars: onto,
            counts,
            total: self.total,
        }
    }
}

/// How the adjusted degrees of freedom of a fitted model are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DofRule {
    /// Positive clique cells minus positive separator cells.
    #[default]
    CliqueCells,
    /// Number of complete instances with positive fitted probability.
    FittedSupport,
}

/// A decomposable model fitted to a dataset by its marginal frequencies.
#[derive(Debug, Clone)]
pub struct FittedModel {
    schema: Arc<Schema>,
    graph: ModelGraph,
    decomposition: Decomposition,
    clique_tables: Vec<MarginalTable>,
    separator_tables: Vec<MarginalTable>,
    total: u64,
}

pub fn fit(dataset: &Dataset, graph: &ModelGraph) -> Result<FittedModel> {
    let schema = dataset.schema_arc().clone();
    if graph.n() != schema.arity() {
        return Err(Error::ArityMismatch {
            graph: graph.n(),
            schema: schema.arity(),
        });
    }
    let decomposition = decompose(graph)?;
    let clique_tables = decomposition
        .cliques()
        .iter()
        .map(|&c| MarginalTable::from_dataset(dataset, c))
        .collect();
    let separator_tables = decomposition
        .separators()
        .iter()
        .map(|&s| MarginalTable::from_dataset(dataset, s))
        .collect();
    Ok(FittedModel {
        schema,
        graph: graph.clone(),
        decomposition,
        clique_tables,
        separator_tables,
        total: dataset.total(),
    })
}

impl FittedModel {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn graph(&self) -> &ModelGraph {
        &self.graph
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn clique_tables(&self) -> &[MarginalTable] {
        &self.clique_tables
    }

    pub fn separator_tables(&self) -> &[MarginalTable] {
        &self.separator_tables
    }

    /// Sample size N the model was fitted on.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Fitted probability of a complete instance.
    ///
    /// A zero separator count forces a zero clique count in the same
    /// product, so 0/0 resolves to 0.
    pub fn joint_probability(&self, values: &[u32]) -> f64 {
        let n = self.total as f64;
        let mut p = 1.0;
        for t in &self.clique_tables {
            let c = t.count(&self.schema, values);
            if c == 0 {
                return 0.0;
            }
            p *= c as f64 / n;
        }
        for t in &self.separator_tables {
            let c = t.count(&self.schema, values);
            if c == 0 {
                return 0.0;
            }
            p /= c as f64 / n;
        }
        p
    }

    pub fn joint_probability_key(&self, key: u64) -> f64 {
        self.joint_probability(self.schema.decode(key).values())
    }

    pub fn adjusted_dof(&self, rule: DofRule) -> u64 {
        match rule {
            DofRule::CliqueCells => {
                let cliques: usize = self.clique_tables.iter().map(|t| t.nonzero_cells()).sum();
                let seps: usize = self
                    .separator_tables
                    .iter()
                    .map(|t| t.nonzero_cells())
                    .sum();
                cliques.saturating_sub(seps) as u64
            }
            DofRule::FittedSupport => self.fitted_support_size(),
        }
    }

    /// Number of complete instances with positive fitted probability,
    /// counted by message passing over the clique tree.
    pub fn fitted_support_size(&self) -> u64 {
        let mut weights: Vec<HashMap<u64, u128>> = self
            .clique_tables
            .iter()
            .map(|t| t.iter().map(|(k, _)| (k, 1u128)).collect())
            .collect();
        let d = &self.decomposition;
        for j in (1..d.cliques().len()).rev() {
            let sep = d.separators()[j - 1];
            let parent = d.parents()[j - 1];
            let mut message: HashMap<u64, u128> = HashMap::new();
            for (&k, &w) in &weights[j] {
                *message.entry(self.schema.project_key(k, sep)).or_insert(0) += w;
            }
            for (&k, w) in weights[parent].iter_mut() {
                *w *= message
                    .get(&self.schema.project_key(k, sep))
                    .copied()
                    .unwrap_or(0);
            }
        }
        weights
            .first()
            .map(|w| w.values().sum::<u128>())
            .unwrap_or(0)
            .min(u64::MAX as u128) as u64
    }
}

pub fn joint_probability(model: &FittedModel, values: &[u32]) -> f64 {
    model.joint_probability(values)
}

pub fn adjusted_dof(model: &FittedModel) -> u64 {
    model.adjusted_dof(DofRule::CliqueCells)
}

/// Star graph joining every feature to the class variable.
pub fn naive_bayes_graph(schema: &Schema) -> ModelGraph {
    let class = schema.class_index();
    let mut g = ModelGraph::empty(schema.arity()).expect("schema arity within graph capacity");
    for f in 0..class {
        g.add_edge(Edge::new(f, class));
    }
    debug_assert!(is_decomposable(&g));
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{boundary_graph, Boundary};
    use crate::schema::{parse_dataset, Instance};

    fn binary_data(rows: &[[u32; 4]]) -> Dataset {
        // F1, F2, F3, S all binary.
        let mut text = String::from("F1,F2,F3,S\n0,0,0,0\n1,1,1,1\n");
        for r in rows {
            text.push_str(&format!("{},{},{},{}\n", r[0], r[1], r[2], r[3]));
        }
        parse_dataset(&text, "S", ',').unwrap()
    }

    #[test]
    fn saturated_reproduces_frequencies() {
        let ds = binary_data(&[[0, 1, 0, 1], [0, 1, 0, 1], [1, 0, 0, 0]]);
        let m = fit(&ds, &boundary_graph(4, Boundary::Saturated).unwrap()).unwrap();
        assert_eq!(m.clique_tables().len(), 1);
        for &(key, count) in ds.cells() {
            let p = m.joint_probability_key(key);
            assert!((p - count as f64 / ds.total() as f64).abs() < 1e-15);
        }
        assert_eq!(adjusted_dof(&m), ds.cells().len() as u64);
    }

    #[test]
    fn independence_has_singleton_tables() {
        let ds = binary_data(&[]);
        let m = fit(&ds, &boundary_graph(4, Boundary::Independence).unwrap()).unwrap();
        assert!(m.clique_tables().iter().all(|t| t.vars().len() == 1));
        assert!(m.separator_tables().iter().all(|t| t.vars().is_empty()));
        // Four binary singletons, three empty separators of one cell each.
        assert_eq!(adjusted_dof(&m), 5);
    }

    #[test]
    fn separator_table_is_consistent() {
        let ds = binary_data(&[[0, 1, 1, 0], [1, 1, 0, 1], [1, 0, 1, 1]]);
        let g = ModelGraph::from_edges(4, [(0, 3), (1, 3), (2, 3), (1, 2)]).unwrap();
        let m = fit(&ds, &g).unwrap();
        let s = VarSet::singleton(3);
        assert_eq!(m.separator_tables()[0].vars(), s);
        for t in m.clique_tables() {
            assert_eq!(
                t.marginalize(ds.schema(), s).counts,
                m.separator_tables()[0].counts
            );
        }
    }

    #[test]
    fn two_clique_plug_in() {
        // f(F1=1,S=1)=20, f(F2=1,F3=1,S=1)=10, f(S=1)=40, N=100.
        let mut rows = Vec::new();
        let mut push =
            |v: [u32; 4], k: usize| rows.extend(std::iter::repeat_n(Instance(v.to_vec()), k));
        push([1, 1, 1, 1], 10);
        push([1, 0, 0, 1], 10);
        push([0, 0, 1, 1], 20);
        push([0, 0, 0, 0], 60);
        let ds = {
            let base = binary_data(&[]);
            crate::schema::Dataset::from_instances(base.schema_arc().clone(), rows).unwrap()
        };
        let g = ModelGraph::from_edges(4, [(0, 3), (1, 3), (2, 3), (1, 2)]).unwrap();
        let m = fit(&ds, &g).unwrap();
        let p = m.joint_probability(&[1, 1, 1, 1]);
        assert!((p - 0.20 * 0.10 / 0.40).abs() < 1e-15);
    }

    #[test]
    fn dof_examples() {
        let ds = parse_dataset("F,S\n0,0\n0,1\n1,0\n1,1\n", "S", ',').unwrap();
        let m = fit(&ds, &ModelGraph::from_edges(2, [(0, 1)]).unwrap()).unwrap();
        assert_eq!(adjusted_dof(&m), 4);

        let ds = parse_dataset("F1,F2,S\n0,0,0\n1,1,0\n0,1,1\n1,0,1\n", "S", ',').unwrap();
        let m = fit(&ds, &ModelGraph::from_edges(3, [(0, 2), (1, 2)]).unwrap()).unwrap();
        assert_eq!(adjusted_dof(&m), 6);
    }

    #[test]
    fn fitted_support_counts_positive_cells() {
        let ds = parse_dataset("F1,F2,S\n0,0,0\n1,1,0\n0,1,1\n", "S", ',').unwrap();
        let g = ModelGraph::from_edges(3, [(0, 2), (1, 2)]).unwrap();
        let m = fit(&ds, &g).unwrap();
        let mut brute = 0;
        for a in 0..2 {
            for b in 0..2 {
                for s in 0..2 {
                    if m.joint_probability(&[a, b, s]) > 0.0 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(m.fitted_support_size(), brute);
        let ind = fit(&ds, &ModelGraph::empty(3).unwrap()).unwrap();
        assert_eq!(ind.fitted_support_size(), 8);
    }

    #[test]
    fn rejects_bad_graphs() {
        let ds = binary_data(&[]);
        let cycle = ModelGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(fit(&ds, &cycle).unwrap_err(), Error::NotDecomposable);
        let small = ModelGraph::empty(3).unwrap();
        assert!(matches!(fit(&ds, &small), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn naive_bayes_shapes() {
        let ds = binary_data(&[]);
        let g = naive_bayes_graph(ds.schema());
        assert_eq!(g.complexity(), 3);
        assert!(g.edges().iter().all(|e| e.hi() == 3));
        let ds = parse_dataset("S\na\nb\n", "S", ',');
        // A header with only the class column has no features.
        assert!(ds.is_err());
        let class = crate::schema::FeatureVariable::new("S", vec!["a".into()]).unwrap();
        let bare = Schema::new(vec![], class).unwrap();
        assert_eq!(naive_bayes_graph(&bare).complexity(), 0);
    }
}
