//! Model graphs and their clique decompositions.
//!
//! A decomposable model is identified with a chordal graph over the schema
//! variables. Chordality is tested with maximum-cardinality search (MCS);
//! the maximal cliques in MCS order satisfy the running-intersection
//! property and give the closed-form factorization used by `estimate`.

use std::fmt;

use crate::error::{Error, Result};

/// A set of variable indices, stored as a 64-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(u64);

impl VarSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        VarSet(0)
    }

    pub fn singleton(i: usize) -> Self {
        VarSet(1 << i)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        indices.into_iter().fold(Self::empty(), |s, i| s.with(i))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        VarSet(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        VarSet(self.0 & !(1 << i))
    }

    pub fn union(self, other: Self) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An undirected edge in canonical form (`lo < hi`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    /// Canonicalizes the pair. Panics on a self-loop.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "self-loops are not edges");
        Edge {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    pub fn vars(self) -> VarSet {
        VarSet::from_indices([self.lo, self.hi])
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// Undirected graph on `n` variables; edges are interdependencies.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModelGraph {
    n: usize,
    adj: Vec<VarSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Saturated,
    Independence,
}

/// Whether neighbours are generated by adding or removing one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeChange {
    Add,
    Remove,
}

impl ModelGraph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > VarSet::CAPACITY {
            return Err(Error::Graph(format!(
                "{n} variables exceed the supported maximum of {}",
                VarSet::CAPACITY
            )));
        }
        Ok(Self {
            n,
            adj: vec![VarSet::empty(); n],
        })
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for (a, b) in edges {
            if a == b {
                return Err(Error::Graph(format!("self-loop on {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Graph(format!(
                    "edge {a}-{b} out of range for n = {n}"
                )));
            }
            g.add_edge(Edge::new(a, b));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.adj[e.lo].contains(e.hi)
    }

    pub fn add_edge(&mut self, e: Edge) {
        self.adj[e.lo] = self.adj[e.lo].with(e.hi);
        self.adj[e.hi] = self.adj[e.hi].with(e.lo);
    }

    pub fn remove_edge(&mut self, e: Edge) {
        self.adj[e.lo] = self.adj[e.lo].without(e.hi);
        self.adj[e.hi] = self.adj[e.hi].without(e.lo);
    }

    pub fn with_edge(&self, e: Edge) -> Self {
        let mut g = self.clone();
        g.add_edge(e);
        g
    }

    pub fn without_edge(&self, e: Edge) -> Self {
        let mut g = self.clone();
        g.remove_edge(e);
        g
    }

    pub fn neighbors(&self, v: usize) -> VarSet {
        self.adj[v]
    }

    /// Edges in canonical lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        (0..self.n)
            .flat_map(|i| {
                self.adj[i]
                    .iter()
                    .filter(move |&j| j > i)
                    .map(move |j| Edge::new(i, j))
            })
            .collect()
    }

    /// Number of edges: the model's complexity level.
    pub fn complexity(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn is_complete_on(&self, set: VarSet) -> bool {
        set.iter().all(|v| set.without(v).is_subset(self.adj[v]))
    }

    /// Edge set difference `self \ other`, both on the same variables.
    pub fn edges_not_in(&self, other: &ModelGraph) -> Vec<Edge> {
        self.edges()
            .into_iter()
            .filter(|&e| !other.has_edge(e))
            .collect()
    }
}

impl fmt::Debug for ModelGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelGraph(n={}, edges=[", self.n)?;
        for (k, e) in self.edges().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "])")
    }
}

pub fn boundary_graph(n: usize, kind: Boundary) -> Result<ModelGraph> {
    if n == 0 {
        return Err(Error::Graph("a model needs at least one variable".into()));
    }
    let mut g = ModelGraph::empty(n)?;
    if kind == Boundary::Saturated {
        let all = VarSet::full(n);
        for v in 0..n {
            g.adj[v] = all.without(v);
        }
    }
    Ok(g)
}

pub fn complexity(g: &ModelGraph) -> usize {
    g.complexity()
}

/// Maximum-cardinality search visiting order.
///
/// At every step the unvisited vertex with the most visited neighbours is
/// taken; ties go to the lowest index.
pub fn mcs_order(g: &ModelGraph) -> Vec<usize> {
    let mut visited = VarSet::empty();
    let mut weight = vec![0usize; g.n];
    let mut order = Vec::with_capacity(g.n);
    for _ in 0..g.n {
        let v = (0..g.n)
            .filter(|&v| !visited.contains(v))
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unvisited vertex remains");
        visited = visited.with(v);
        order.push(v);
        for u in g.adj[v].difference(visited).iter() {
            weight[u] += 1;
        }
    }
    order
}

/// Chordality test: in an MCS order, every vertex's earlier neighbours
/// must be pairwise adjacent.
pub fn is_decomposable(g: &ModelGraph) -> bool {
    let mut visited = VarSet::empty();
    for v in mcs_order(g) {
        let earlier = g.adj[v].intersection(visited);
        if !g.is_complete_on(earlier) {
            return false;
        }
        visited = visited.with(v);
    }
    true
}

/// Maximal cliques in running-intersection order with their separators.
///
/// `separators[j]` and `parents[j]` belong to `cliques[j + 1]`: the
/// separator is that clique's intersection with all earlier cliques and
/// `parents[j]` is the first earlier clique containing it. Separators of
/// disconnected components are empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    cliques: Vec<VarSet>,
    separators: Vec<VarSet>,
    parents: Vec<usize>,
}

impl Decomposition {
    pub fn cliques(&self) -> &[VarSet] {
        &self.cliques
    }

    pub fn separators(&self) -> &[VarSet] {
        &self.separators
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// The unique clique containing both endpoints, if exactly one does.
    pub fn clique_containing(&self, vars: VarSet) -> Option<VarSet> {
        let mut found = self.cliques.iter().filter(|c| vars.is_subset(**c));
        match (found.next(), found.next()) {
            (Some(c), None) => Some(*c),
            _ => None,
        }
    }
}

pub fn decompose(g: &ModelGraph) -> Result<Decomposition> {
    let order = mcs_order(g);
    let mut visited = VarSet::empty();
    let mut candidates = Vec::with_capacity(g.n);
    for &v in &order {
        let earlier = g.adj[v].intersection(visited);
        if !g.is_complete_on(earlier) {
            return Err(Error::NotDecomposable);
        }
        candidates.push(earlier.with(v));
        visited = visited.with(v);
    }
    // A candidate can only be contained in a later one.
    let cliques: Vec<VarSet> = candidates
        .iter()
        .enumerate()
        .filter(|(i, c)| !candidates[i + 1..].iter().any(|d| c.is_subset(*d)))
        .map(|(_, c)| *c)
        .collect();

    let mut separators = Vec::with_capacity(cliques.len().saturating_sub(1));
    let mut parents = Vec::with_capacity(cliques.len().saturating_sub(1));
    let mut covered = cliques.first().copied().unwrap_or_default();
    for (j, &c) in cliques.iter().enumerate().skip(1) {
        let sep = c.intersection(covered);
        let parent = cliques[..j]
            .iter()
            .position(|&p| sep.is_subset(p))
            .expect("running intersection holds for MCS clique order");
        separators.push(sep);
        parents.push(parent);
        covered = covered.union(c);
    }
    Ok(Decomposition {
        cliques,
        separators,
        parents,
    })
}

/// Decomposable graphs one edge away from `g`, in canonical edge order.
pub fn enumerate_neighbors(g: &ModelGraph, change: EdgeChange) -> Vec<(Edge, ModelGraph)> {
    let mut out = Vec::new();
    for i in 0..g.n {
        for j in i + 1..g.n {
            let e = Edge::new(i, j);
            let candidate = match (change, g.has_edge(e)) {
                (EdgeChange::Add, false) => g.with_edge(e),
                (EdgeChange::Remove, true) => g.without_edge(e),
                _ => continue,
            };
            if is_decomposable(&candidate) {
                out.push((e, candidate));
            }
        }
    }
    out
}

/// Renders a graph as a parenthesized clique list such as `(C2 E S)(C1 C3 S)`.
///
/// Names inside a clique are sorted with the class variable (if given) last;
/// cliques are sorted by their name sequence. Isolated variables are
/// omitted, and a graph without edges renders as `()`.
pub fn notation(g: &ModelGraph, names: &[String], class_index: Option<usize>) -> Result<String> {
    if names.len() != g.n {
        return Err(Error::ArityMismatch {
            graph: g.n,
            schema: names.len(),
        });
    }
    let d = decompose(g)?;
    let mut groups: Vec<Vec<(bool, &str)>> = d
        .cliques()
        .iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let mut g: Vec<(bool, &str)> = c
                .iter()
                .map(|i| (Some(i) == class_index, names[i].as_str()))
                .collect();
            g.sort();
            g
        })
        .collect();
    groups.sort();
    if groups.is_empty() {
        return Ok("()".to_string());
    }
    Ok(groups
        .iter()
        .map(|g| {
            let names: Vec<&str> = g.iter().map(|(_, n)| *n).collect();
            format!("({})", names.join(" "))
        })
        .collect())
}

/// Splits notation into its parenthesized groups of names.
pub fn notation_groups(text: &str) -> Result<Vec<Vec<String>>> {
    let mut groups = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Notation(format!("expected `(` at `{rest}`")))?;
        let close = body
            .find(')')
            .ok_or_else(|| Error::Notation("unbalanced parenthesis".into()))?;
        let inner = &body[..close];
        if inner.contains('(') {
            return Err(Error::Notation("nested parenthesis".into()));
        }
        let names: Vec<String> = inner.split_whitespace().map(str::to_string).collect();
        if !names.is_empty() {
            groups.push(names);
        }
        rest = body[close + 1..].trim_start();
    }
    Ok(groups)
}

/// Parses notation against known variable names. Every group is made
/// complete; the resulting graph must be decomposable.
pub fn parse_notation(text: &str, names: &[String]) -> Result<ModelGraph> {
    let mut g = ModelGraph::empty(names.len())?;
    for group in notation_groups(text)? {
        let idx = group
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::Notation(format!("unknown variable `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if i == j {
                    return Err(Error::Notation(format!(
                        "`{}` repeated in a clique",
                        names[i]
                    )));
                }
                g.add_edge(Edge::new(i, j));
            }
        }
    }
    if !is_decomposable(&g) {
        return Err(Error::NotDecomposable);
    }
    Ok(g)
}
