//! Nested one-edge comparisons computed on a single clique.
//!
//! If a decomposable model loses the edge `u–v`, which lies in exactly one
//! of its maximal cliques `C`, the other factors cancel and
//!
//! ```text
//! ΔG²  = 2 Σ_c f(c) ln( f(c) f(s) / (f(c∖v) f(c∖u)) )
//! Δdof = nz(C) − nz(C∖v) − nz(C∖u) + nz(S)
//! ```
//!
//! with `S = C ∖ {u, v}`. The same clique marginal is all the Monte Carlo
//! exact test needs: under the simpler model the `C`-marginal is
//! `f(c∖v) f(c∖u) / (N f(s))`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chordal::{decompose, Edge, ModelGraph, VarSet};
use crate::criteria::DeltaStats;
use crate::error::{Error, Result};
use crate::schema::Dataset;

/// The clique of the larger model that carries the edge under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeContext {
    pub edge: Edge,
    pub clique: VarSet,
    pub separator: VarSet,
}

impl EdgeContext {
    /// `complex` must be decomposable and contain `edge` in exactly one
    /// maximal clique (equivalently, `complex − edge` is decomposable).
    pub fn new(complex: &ModelGraph, edge: Edge) -> Result<Self> {
        if !complex.has_edge(edge) {
            return Err(Error::NotNested);
        }
        let clique = decompose(complex)?
            .clique_containing(edge.vars())
            .ok_or(Error::NotDecomposable)?;
        Ok(Self {
            edge,
            clique,
            separator: clique.difference(edge.vars()),
        })
    }

    fn side_lo(&self) -> VarSet {
        self.separator.with(self.edge.lo())
    }

    fn side_hi(&self) -> VarSet {
        self.separator.with(self.edge.hi())
    }
}

/// Marginal counts sorted by key, with a lookup index.
#[derive(Debug)]
pub struct Marginal {
    sorted: Vec<(u64, u64)>,
    index: HashMap<u64, u64>,
}

impl Marginal {
    fn new(map: HashMap<u64, u64>) -> Self {
        let mut sorted: Vec<_> = map.iter().map(|(&k, &c)| (k, c)).collect();
        sorted.sort_unstable();
        Self { sorted, index: map }
    }

    pub fn get(&self, key: u64) -> u64 {
        self.index.get(&key).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> &[(u64, u64)] {
        &self.sorted
    }

    pub fn nonzero(&self) -> usize {
        self.sorted.len()
    }
}

/// Memoized marginals of one dataset, shareable across threads.
#[derive(Debug)]
pub struct MarginalCache<'a> {
    dataset: &'a Dataset,
    map: Mutex<HashMap<VarSet, Arc<Marginal>>>,
}

impl<'a> MarginalCache<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        Self {
            dataset,
            map: Mutex::new(HashMap::new()),
        }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn get(&self, vars: VarSet) -> Arc<Marginal> {
        if let Some(m) = self.map.lock().expect("cache lock").get(&vars) {
            return m.clone();
        }
        let m = Arc::new(Marginal::new(self.dataset.marginal(vars)));
        self.map
            .lock()
            .expect("cache lock")
            .entry(vars)
            .or_insert(m)
            .clone()
    }
}

/// ΔG² and Δdof between `complex` and `complex − edge`.
pub fn local_delta(cache: &MarginalCache<'_>, ctx: &EdgeContext) -> DeltaStats {
    let schema = cache.dataset().schema();
    let c = cache.get(ctx.clique);
    let a = cache.get(ctx.side_lo());
    let b = cache.get(ctx.side_hi());
    let s = cache.get(ctx.separator);
    let mut g2 = 0.0;
    for &(key, n) in c.cells() {
        let na = a.get(schema.project_key(key, ctx.side_lo()));
        let nb = b.get(schema.project_key(key, ctx.side_hi()));
        let ns = s.get(schema.project_key(key, ctx.separator));
        let n = n as f64;
        g2 += n * (n.ln() + (ns as f64).ln() - (na as f64).ln() - (nb as f64).ln());
    }
    let dof = c.nonzero() as i64 - a.nonzero() as i64 - b.nonzero() as i64 + s.nonzero() as i64;
    DeltaStats {
        delta_g2: (2.0 * g2).max(0.0),
        delta_dof: dof.max(0) as u64,
    }
}

/// Support of the simpler model's clique marginal with sampling weights.
struct CliqueSupport {
    cumulative: Vec<f64>,
    // (lo-side index, hi-side index, separator index) per support cell.
    cells: Vec<(u32, u32, u32)>,
    n_lo: usize,
    n_hi: usize,
    n_sep: usize,
}

impl CliqueSupport {
    fn build(cache: &MarginalCache<'_>, ctx: &EdgeContext) -> Self {
        let schema = cache.dataset().schema();
        let a = cache.get(ctx.side_lo());
        let b = cache.get(ctx.side_hi());
        let s = cache.get(ctx.separator);
        let sep_index: HashMap<u64, usize> = s
            .cells()
            .iter()
            .enumerate()
            .map(|(i, &(k, _))| (k, i))
            .collect();
        let mut lo_by_sep: Vec<Vec<(u32, u64)>> = vec![Vec::new(); s.nonzero()];
        for (i, &(k, n)) in a.cells().iter().enumerate() {
            lo_by_sep[sep_index[&schema.project_key(k, ctx.separator)]].push((i as u32, n));
        }
        let mut hi_by_sep: Vec<Vec<(u32, u64)>> = vec![Vec::new(); s.nonzero()];
        for (i, &(k, n)) in b.cells().iter().enumerate() {
            hi_by_sep[sep_index[&schema.project_key(k, ctx.separator)]].push((i as u32, n));
        }
        let mut cumulative = Vec::new();
        let mut cells = Vec::new();
        let mut acc = 0.0;
        for (si, &(_, ns)) in s.cells().iter().enumerate() {
            for &(ai, na) in &lo_by_sep[si] {
                for &(bi, nb) in &hi_by_sep[si] {
                    acc += na as f64 * nb as f64 / ns as f64;
                    cumulative.push(acc);
                    cells.push((ai, bi, si as u32));
                }
            }
        }
        Self {
            cumulative,
            cells,
            n_lo: a.nonzero(),
            n_hi: b.nonzero(),
            n_sep: s.nonzero(),
        }
    }

    fn replicate_delta<R: Rng>(&self, rng: &mut R, n: u64, buf: &mut ReplicateBuffers) -> f64 {
        buf.reset(self);
        let total = *self.cumulative.last().expect("non-empty support");
        for _ in 0..n {
            let u = rng.random::<f64>() * total;
            let k = self
                .cumulative
                .partition_point(|&c| c <= u)
                .min(self.cells.len() - 1);
            buf.cell[k] += 1;
        }
        for (k, &(a, b, s)) in self.cells.iter().enumerate() {
            let c = buf.cell[k];
            buf.lo[a as usize] += c;
            buf.hi[b as usize] += c;
            buf.sep[s as usize] += c;
        }
        let mut g2 = 0.0;
        for (k, &(a, b, s)) in self.cells.iter().enumerate() {
            let c = buf.cell[k];
            if c == 0 {
                continue;
            }
            let ratio = (c as f64 * buf.sep[s as usize] as f64)
                / (buf.lo[a as usize] as f64 * buf.hi[b as usize] as f64);
            g2 += c as f64 * ratio.ln();
        }
        (2.0 * g2).max(0.0)
    }
}

#[derive(Default)]
struct ReplicateBuffers {
    cell: Vec<u64>,
    lo: Vec<u64>,
    hi: Vec<u64>,
    sep: Vec<u64>,
}

impl ReplicateBuffers {
    fn reset(&mut self, s: &CliqueSupport) {
        for (v, len) in [
            (&mut self.cell, s.cells.len()),
            (&mut self.lo, s.n_lo),
            (&mut self.hi, s.n_hi),
            (&mut self.sep, s.n_sep),
        ] {
            v.clear();
            v.resize(len, 0);
        }
    }
}

/// Whether a replicate statistic counts as at least as extreme as observed.
pub(crate) fn at_least(replicate: f64, observed: f64) -> bool {
    replicate >= observed - 1e-9 * (1.0 + observed.abs())
}

/// Random stream for replicate `r`: independent of evaluation order.
pub(crate) fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// Monte Carlo exact conditional p-value of dropping `ctx.edge`, sampling
/// only the clique marginal. Returns `(1 + hits) / (R + 1)`.
pub fn local_exact_significance(
    cache: &MarginalCache<'_>,
    ctx: &EdgeContext,
    observed: f64,
    replicates: usize,
    seed: u64,
) -> f64 {
    let support = CliqueSupport::build(cache, ctx);
    let n = cache.dataset().total();
    let hits: usize = (0..replicates)
        .into_par_iter()
        .map_init(ReplicateBuffers::default, |buf, r| {
            let mut rng = replicate_rng(seed, r);
            usize::from(at_least(
                support.replicate_delta(&mut rng, n, buf),
                observed,
            ))
        })
        .sum();
    (1 + hits) as f64 / (replicates + 1) as f64
}
