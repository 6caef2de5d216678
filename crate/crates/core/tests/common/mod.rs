//! Independent oracles shared by the integration tests. None of these call
//! into the library's chordal, estimation or classification code.

#![allow(dead_code)]

use std::sync::Arc;

use dmsel::chordal::ModelGraph;
use dmsel::schema::{Dataset, FeatureVariable, Instance, Schema};
use dmsel::Edge;
use rand::Rng;

/// All graphs on `n` vertices, indexed by an edge bitmask over the pairs
/// `(i, j)`, `i < j`, in lexicographic order.
pub fn all_graphs(n: usize) -> impl Iterator<Item = ModelGraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e);
        ModelGraph::from_edges(n, edges).unwrap()
    })
}

fn adjacent(g: &ModelGraph, a: usize, b: usize) -> bool {
    a != b && g.has_edge(Edge::new(a, b))
}

/// Chordal iff no vertex subset of size ≥ 4 induces a cycle.
pub fn brute_force_chordal(g: &ModelGraph) -> bool {
    let n = g.n();
    for mask in 0u32..1 << n {
        let verts: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        if verts.len() >= 4 && induces_cycle(g, &verts) {
            return false;
        }
    }
    true
}

fn induces_cycle(g: &ModelGraph, verts: &[usize]) -> bool {
    // A connected graph in which every vertex has degree 2 is a cycle.
    let deg_two = verts
        .iter()
        .all(|&v| verts.iter().filter(|&&u| adjacent(g, u, v)).count() == 2);
    if !deg_two {
        return false;
    }
    let mut seen = vec![verts[0]];
    let mut stack = vec![verts[0]];
    while let Some(v) = stack.pop() {
        for &u in verts {
            if adjacent(g, u, v) && !seen.contains(&u) {
                seen.push(u);
                stack.push(u);
            }
        }
    }
    seen.len() == verts.len()
}

/// A uniformly chosen chordal graph on `n` vertices (rejection sampling).
pub fn random_chordal<R: Rng>(rng: &mut R, n: usize) -> ModelGraph {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.5) {
                    edges.push((i, j));
                }
            }
        }
        let g = ModelGraph::from_edges(n, edges).unwrap();
        if brute_force_chordal(&g) {
            return g;
        }
    }
}

/// Maximal cliques by exhaustive subset search.
pub fn brute_force_cliques(g: &ModelGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let complete = |m: u32| {
        (0..n).all(|a| {
            (0..n).all(|b| a == b || m >> a & 1 == 0 || m >> b & 1 == 0 || adjacent(g, a, b))
        })
    };
    let cliques: Vec<u32> = (1u32..1 << n).filter(|&m| complete(m)).collect();
    cliques
        .iter()
        .filter(|&&m| !cliques.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..n).filter(|v| m >> v & 1 == 1).collect())
        .collect()
}

/// Schema with variables `X0..X{n-2}` and class `S`, given level counts.
pub fn schema_with_levels(levels: &[usize]) -> Arc<Schema> {
    let var = |name: String, k: usize| {
        FeatureVariable::new(name, (0..k).map(|i| format!("v{i}")).collect()).unwrap()
    };
    let (class_k, feats) = levels.split_last().unwrap();
    let features = feats
        .iter()
        .enumerate()
        .map(|(i, &k)| var(format!("X{i}"), k))
        .collect();
    Arc::new(Schema::new(features, var("S".into(), *class_k)).unwrap())
}

/// Every complete instance of a schema, in mixed-radix order with the
/// first variable varying fastest.
pub fn all_cells(levels: &[usize]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &k in levels {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..k as u32).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Random counts in `0..=max` over every cell, with at least one positive.
pub fn random_table<R: Rng>(rng: &mut R, levels: &[usize], max: u64) -> Dataset {
    let schema = schema_with_levels(levels);
    loop {
        let rows: Vec<(Instance, u64)> = all_cells(levels)
            .into_iter()
            .map(|v| (Instance(v), rng.random_range(0..=max)))
            .filter(|(_, c)| *c > 0)
            .collect();
        if !rows.is_empty() {
            return Dataset::from_rows(schema.clone(), rows).unwrap();
        }
    }
}

/// Dense observed table aligned with `all_cells(levels)`.
pub fn dense_counts(ds: &Dataset, levels: &[usize]) -> Vec<f64> {
    all_cells(levels)
        .iter()
        .map(|v| ds.count(v) as f64)
        .collect()
}

fn marginal_index(cell: &[u32], vars: &[usize], levels: &[usize]) -> usize {
    vars.iter()
        .fold(0, |acc, &v| acc * levels[v] + cell[v] as usize)
}

/// Marginal of a dense table over `vars`.
pub fn dense_marginal(table: &[f64], vars: &[usize], levels: &[usize]) -> Vec<f64> {
    let size: usize = vars.iter().map(|&v| levels[v]).product();
    let mut out = vec![0.0; size];
    for (cell, &p) in all_cells(levels).iter().zip(table) {
        out[marginal_index(cell, vars, levels)] += p;
    }
    out
}

/// Iterative proportional fitting of the hierarchical model generated by
/// `cliques`, from the uniform table, as probabilities.
pub fn ipf(observed: &[f64], cliques: &[Vec<usize>], levels: &[usize]) -> Vec<f64> {
    let total: f64 = observed.iter().sum();
    let cells = all_cells(levels);
    let mut fitted = vec![1.0 / cells.len() as f64; cells.len()];
    let targets: Vec<Vec<f64>> = cliques
        .iter()
        .map(|c| {
            dense_marginal(observed, c, levels)
                .iter()
                .map(|x| x / total)
                .collect()
        })
        .collect();
    for _ in 0..1000 {
        let mut change: f64 = 0.0;
        for (c, target) in cliques.iter().zip(&targets) {
            let current = dense_marginal(&fitted, c, levels);
            for (cell, p) in cells.iter().zip(fitted.iter_mut()) {
                let i = marginal_index(cell, c, levels);
                let new = if current[i] > 0.0 {
                    *p * target[i] / current[i]
                } else {
                    0.0
                };
                change = change.max((new - *p).abs());
                *p = new;
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    fitted
}

/// The textbook Naive Bayes rule from per-feature conditional counts:
/// argmax_s f(s) ∏_i f(x_i, s) / f(s), lowest index on ties, abstaining
/// when every score is zero. Scores are compared exactly as fractions
/// ∏_i f(x_i, s) / f(s)^(k-1).
pub fn independent_product_predict(ds: &Dataset, context: &[u32]) -> Option<u32> {
    let schema = ds.schema();
    let class = schema.class_index();
    let k = context.len() as u32;
    let mut best: Option<(u128, u128, u32)> = None;
    for s in 0..schema.class_var().cardinality() as u32 {
        let mut class_count = 0u128;
        let mut joint = vec![0u128; context.len()];
        for (inst, c) in ds.rows() {
            let v = inst.values();
            if v[class] != s {
                continue;
            }
            class_count += *c as u128;
            for (i, &x) in context.iter().enumerate() {
                if v[i] == x {
                    joint[i] += *c as u128;
                }
            }
        }
        if class_count == 0 {
            continue;
        }
        let num: u128 = joint.iter().product::<u128>() * if k == 0 { class_count } else { 1 };
        let den: u128 = class_count.pow(k.saturating_sub(1));
        if num == 0 {
            continue;
        }
        if best.is_none_or(|(bn, bd, _)| num * bd > bn * den) {
            best = Some((num, den, s));
        }
    }
    best.map(|(_, _, s)| s)
}
