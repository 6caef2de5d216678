//! Forward (FSS) and backward (BSS) sequential search over decomposable models.
//!
//! Every step scores all decomposable one-edge neighbours of the current
//! model by the nested difference against it, picks the extremal candidate
//! and either moves to it or stops. Ties go to the canonical edge order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::chordal::{boundary_graph, enumerate_neighbors, Boundary, Edge, EdgeChange, ModelGraph};
use crate::criteria::{
    chi2_significance, g_squared, information_criterion, ln_chi2_significance, CriterionConfig,
    CriterionKind, DeltaStats,
};
use crate::error::{Error, Result};
use crate::estimate::{fit, DofRule};
use crate::local::{local_delta, local_exact_significance, EdgeContext, MarginalCache};
use crate::schema::{Dataset, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Forward sequential search from the model of independence.
    Forward,
    /// Backward sequential search from the saturated model.
    Backward,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Backward, Direction::Forward];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "fss",
            Direction::Backward => "bss",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fss" | "forward" => Ok(Direction::Forward),
            "bss" | "backward" => Ok(Direction::Backward),
            other => Err(Error::InvalidConfig(format!("unknown direction `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub direction: Direction,
    pub criterion: CriterionConfig,
    /// Defaults to `n(n−1)/2`.
    pub max_steps: Option<usize>,
    /// Use the acceptance directions as literally worded for significance
    /// tests: FSS accepts `p > α`, BSS accepts `p < α`.
    pub literal_alpha_rule: bool,
    pub dof_rule: DofRule,
}

impl SearchConfig {
    pub fn new(direction: Direction, criterion: CriterionConfig) -> Self {
        Self {
            direction,
            criterion,
            max_steps: None,
            literal_alpha_rule: false,
            dof_rule: DofRule::CliqueCells,
        }
    }
}

/// One accepted model along the search path.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStep {
    /// Complexity (edge count) of `model`.
    pub level: usize,
    /// `None` for the starting model.
    pub chosen_edge: Option<Edge>,
    pub model: ModelGraph,
    /// IC value for aic/bic, p-value for chi2/exact.
    pub criterion_value: Option<f64>,
    pub delta: Option<DeltaStats>,
    pub g_squared: f64,
    pub candidates_evaluated: usize,
}

/// Score of one hypothesized neighbour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub edge: Edge,
    pub delta: DeltaStats,
    /// IC value or p-value.
    pub value: f64,
    /// Ordering key: IC value, or ln p for significance tests.
    pub rank: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The best hypothesized model failed the acceptance rule.
    Rejected,
    /// Independence (BSS) or saturation (FSS) was reached.
    BoundaryReached,
    /// No decomposable neighbour exists.
    NoCandidates,
    MaxSteps,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Rejected => "rejected",
            StopReason::BoundaryReached => "boundary",
            StopReason::NoCandidates => "no_candidates",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub final_model: ModelGraph,
    pub trace: Vec<SearchStep>,
    pub stop_reason: StopReason,
    /// Best candidate of the final frontier when the search stopped on rejection.
    pub rejected: Option<CandidateScore>,
    /// Feature indices adjacent to the class variable in `final_model`.
    pub selected_features: Vec<usize>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the Monte Carlo stream for one candidate at one level.
fn candidate_seed(seed: u64, level: usize, edge: Edge) -> u64 {
    let tag = ((level as u64) << 40) ^ ((edge.lo() as u64) << 20) ^ edge.hi() as u64;
    splitmix(seed ^ splitmix(tag))
}

struct Scorer<'a> {
    cache: MarginalCache<'a>,
    config: SearchConfig,
    kappa: Option<f64>,
}

impl Scorer<'_> {
    fn score(
        &self,
        current: &ModelGraph,
        edge: Edge,
        neighbor: &ModelGraph,
    ) -> Result<CandidateScore> {
        let (simpler, complex) = match self.config.direction {
            Direction::Forward => (current, neighbor),
            Direction::Backward => (neighbor, current),
        };
        let ctx = EdgeContext::new(complex, edge)?;
        let mut delta = local_delta(&self.cache, &ctx);
        if self.config.dof_rule == DofRule::FittedSupport {
            let ds = self.cache.dataset();
            let rule = DofRule::FittedSupport;
            delta.delta_dof = fit(ds, complex)?
                .adjusted_dof(rule)
                .saturating_sub(fit(ds, simpler)?.adjusted_dof(rule));
        }
        let crit = &self.config.criterion;
        let (value, rank) = match crit.kind {
            CriterionKind::Aic | CriterionKind::Bic => {
                let ic = information_criterion(delta, self.kappa.expect("kappa for IC criteria"));
                (ic, ic)
            }
            CriterionKind::Chi2 => (chi2_significance(delta), ln_chi2_significance(delta)),
            CriterionKind::Exact => {
                let seed = candidate_seed(crit.seed, current.complexity(), edge);
                let p = local_exact_significance(
                    &self.cache,
                    &ctx,
                    delta.delta_g2,
                    crit.mc_replicates,
                    seed,
                );
                (p, p.ln())
            }
        };
        Ok(CandidateScore {
            edge,
            delta,
            value,
            rank,
        })
    }

    /// Whether `a` should replace the incumbent `b` (which precedes `a` in
    /// canonical order, so exact ties keep `b`).
    fn better(&self, a: &CandidateScore, b: &CandidateScore) -> bool {
        let forward = self.config.direction == Direction::Forward;
        if self.config.criterion.kind.is_significance_test() {
            // FSS wants the most significant improvement, BSS the least
            // significant degradation; equal p falls back to ΔG².
            if a.rank != b.rank {
                return (a.rank < b.rank) == forward;
            }
            if a.delta.delta_g2 != b.delta.delta_g2 {
                return (a.delta.delta_g2 > b.delta.delta_g2) == forward;
            }
            false
        } else if forward {
            a.rank > b.rank
        } else {
            a.rank < b.rank
        }
    }

    fn accepts(&self, best: &CandidateScore) -> bool {
        let forward = self.config.direction == Direction::Forward;
        let crit = &self.config.criterion;
        if crit.kind.is_significance_test() {
            let p = best.value;
            match (forward, self.config.literal_alpha_rule) {
                (true, false) => p < crit.alpha,
                (false, false) => p >= crit.alpha,
                (true, true) => p > crit.alpha,
                (false, true) => p < crit.alpha,
            }
        } else if forward {
            best.value > 0.0
        } else {
            best.value <= 0.0
        }
    }
}

/// Runs a sequential search on `dataset`.
pub fn select_model(dataset: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
    config.criterion.validate()?;
    let schema = dataset.schema();
    let n = schema.arity();
    let lattice_height = n * (n - 1) / 2;
    let max_steps = config.max_steps.unwrap_or(lattice_height);
    let (start, change, boundary_level) = match config.direction {
        Direction::Forward => (Boundary::Independence, EdgeChange::Add, lattice_height),
        Direction::Backward => (Boundary::Saturated, EdgeChange::Remove, 0),
    };
    let scorer = Scorer {
        cache: MarginalCache::new(dataset),
        config: *config,
        kappa: config.criterion.kappa(dataset.total()),
    };

    let mut current = boundary_graph(n, start)?;
    let mut trace = vec![SearchStep {
        level: current.complexity(),
        chosen_edge: None,
        model: current.clone(),
        criterion_value: None,
        delta: None,
        g_squared: g_squared(dataset, &fit(dataset, &current)?)?,
        candidates_evaluated: 0,
    }];
    let mut rejected = None;

    let stop_reason = loop {
        if current.complexity() == boundary_level {
            break StopReason::BoundaryReached;
        }
        if trace.len() > max_steps {
            break StopReason::MaxSteps;
        }
        let neighbors = enumerate_neighbors(&current, change);
        if neighbors.is_empty() {
            break StopReason::NoCandidates;
        }
        let scores = neighbors
            .par_iter()
            .map(|(edge, g)| scorer.score(&current, *edge, g))
            .collect::<Result<Vec<_>>>()?;
        let mut best_idx = 0;
        for i in 1..scores.len() {
            if scorer.better(&scores[i], &scores[best_idx]) {
                best_idx = i;
            }
        }
        let best = scores[best_idx];
        if !scorer.accepts(&best) {
            rejected = Some(best);
            break StopReason::Rejected;
        }
        current = neighbors[best_idx].1.clone();
        trace.push(SearchStep {
            level: current.complexity(),
            chosen_edge: Some(best.edge),
            model: current.clone(),
            criterion_value: Some(best.value),
            delta: Some(best.delta),
            g_squared: g_squared(dataset, &fit(dataset, &current)?)?,
            candidates_evaluated: scores.len(),
        });
    };

    let class = schema.class_index();
    let selected_features = (0..class)
        .filter(|&f| current.has_edge(Edge::new(f, class)))
        .collect();
    Ok(SearchResult {
        final_model: current,
        trace,
        stop_reason,
        rejected,
        selected_features,
    })
}

/// Features partitioned by adjacency to the class variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureReport {
    pub retained: Vec<String>,
    pub dropped: Vec<String>,
}

pub fn feature_report(model: &ModelGraph, schema: &Schema) -> FeatureReport {
    let class = schema.class_index();
    let (mut retained, mut dropped) = (Vec::new(), Vec::new());
    for (i, f) in schema.features().iter().enumerate() {
        if model.has_edge(Edge::new(i, class)) {
            retained.push(f.name().to_string());
        } else {
            dropped.push(f.name().to_string());
        }
    }
    FeatureReport { retained, dropped }
}
