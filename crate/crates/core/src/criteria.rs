//! Model evaluation criteria.
//!
//! All criteria judge a nested pair of models that differ by one edge:
//! the likelihood-ratio statistic of the difference (ΔG²) together with the
//! difference in adjusted degrees of freedom (Δdof). Significance tests
//! turn the pair into an upper-tail p-value, either from the χ²
//! approximation or from a Monte Carlo exact conditional distribution;
//! information criteria use `IC_κ = ΔG² − κ·Δdof`.

use rayon::prelude::*;

use crate::chordal::ModelGraph;
use crate::error::{Error, Result};
use crate::estimate::{fit, DofRule, FittedModel};
use crate::local::{at_least, replicate_rng};
use crate::sampler::AncestralSampler;
use crate::schema::Dataset;
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    Aic,
    Bic,
    Chi2,
    Exact,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 4] = [Self::Chi2, Self::Exact, Self::Aic, Self::Bic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Aic => "aic",
            Self::Bic => "bic",
            Self::Chi2 => "chi2",
            Self::Exact => "exact",
        }
    }

    pub fn is_significance_test(self) -> bool {
        matches!(self, Self::Chi2 | Self::Exact)
    }
}

impl std::str::FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Self::Aic),
            "bic" => Ok(Self::Bic),
            "chi2" | "g2" => Ok(Self::Chi2),
            "exact" => Ok(Self::Exact),
            other => Err(Error::InvalidConfig(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Which criterion to apply and its parameters.
///
/// `alpha` is only read by `chi2` and `exact`; `mc_replicates` and `seed`
/// only by `exact`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionConfig {
    pub kind: CriterionKind,
    pub alpha: f64,
    pub mc_replicates: usize,
    pub seed: u64,
}

impl CriterionConfig {
    pub const DEFAULT_ALPHA: f64 = 0.0001;
    pub const DEFAULT_REPLICATES: usize = 999;

    pub fn new(kind: CriterionKind) -> Self {
        Self {
            kind,
            alpha: Self::DEFAULT_ALPHA,
            mc_replicates: Self::DEFAULT_REPLICATES,
            seed: 0,
        }
    }

    pub fn aic() -> Self {
        Self::new(CriterionKind::Aic)
    }

    pub fn bic() -> Self {
        Self::new(CriterionKind::Bic)
    }

    pub fn chi2(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::new(CriterionKind::Chi2)
        }
    }

    pub fn exact(alpha: f64, mc_replicates: usize, seed: u64) -> Self {
        Self {
            alpha,
            mc_replicates,
            seed,
            ..Self::new(CriterionKind::Exact)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_significance_test() && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.kind == CriterionKind::Exact && self.mc_replicates < 1 {
            return Err(Error::InvalidConfig(
                "mc_replicates must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Penalty weight κ for information criteria, given sample size N.
    pub fn kappa(&self, n: u64) -> Option<f64> {
        match self.kind {
            CriterionKind::Aic => Some(2.0),
            CriterionKind::Bic => Some((n as f64).ln()),
            _ => None,
        }
    }
}

/// Statistics of a nested comparison between a simpler and a more complex model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeltaStats {
    pub delta_g2: f64,
    pub delta_dof: u64,
}

/// Likelihood-ratio statistic `2 Σ f_i ln(f_i / e_i)` over observed cells.
pub fn g_squared(dataset: &Dataset, model: &FittedModel) -> Result<f64> {
    if model.total() != dataset.total() || model.schema() != dataset.schema() {
        return Err(Error::ModelMismatch);
    }
    let schema = dataset.schema();
    let ln_n = (dataset.total() as f64).ln();
    // ln e_i = ln N + Σ ln(c/N) − Σ ln(s/N); the ln N terms collapse to one coefficient.
    let n_cliques = model.clique_tables().len() as f64;
    let n_seps = model.separator_tables().len() as f64;
    let ln_n_coeff = 1.0 - n_cliques + n_seps;
    let mut values = vec![0u32; schema.arity()];
    let mut sum = 0.0;
    for &(key, f) in dataset.cells() {
        for (i, v) in values.iter_mut().enumerate() {
            *v = schema.value_of(key, i);
        }
        let mut ln_e = ln_n_coeff * ln_n;
        for t in model.clique_tables() {
            let c = t.count(schema, &values);
            if c == 0 {
                return Err(Error::ModelMismatch);
            }
            ln_e += (c as f64).ln();
        }
        for t in model.separator_tables() {
            ln_e -= (t.count(schema, &values) as f64).ln();
        }
        sum += f as f64 * ((f as f64).ln() - ln_e);
    }
    Ok((2.0 * sum).max(0.0))
}

/// `2 Σ f ln(f / e)` over `(observed, expected)` pairs; zero observations contribute nothing.
pub fn likelihood_ratio(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    2.0 * pairs
        .into_iter()
        .filter(|&(f, _)| f > 0.0)
        .map(|(f, e)| f * (f / e).ln())
        .sum::<f64>()
}

/// χ² CDF with positive integer degrees of freedom.
pub fn chi_square_cdf(x: f64, dof: i64) -> Result<f64> {
    if dof <= 0 {
        return Err(Error::InvalidDof(dof));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "x must be non-negative, got {x}"
        )));
    }
    Ok(special::chi_square_cdf(x, dof as f64))
}

/// Whether `simpler` is `complex` with at most one edge removed.
pub fn is_nested(simpler: &ModelGraph, complex: &ModelGraph) -> bool {
    simpler.n() == complex.n()
        && simpler.edges_not_in(complex).is_empty()
        && complex.edges_not_in(simpler).len() <= 1
}

pub fn delta_statistics(
    dataset: &Dataset,
    simpler: &FittedModel,
    complex: &FittedModel,
) -> Result<DeltaStats> {
    delta_statistics_with(dataset, simpler, complex, DofRule::CliqueCells)
}

pub fn delta_statistics_with(
    dataset: &Dataset,
    simpler: &FittedModel,
    complex: &FittedModel,
    rule: DofRule,
) -> Result<DeltaStats> {
    if !is_nested(simpler.graph(), complex.graph()) {
        return Err(Error::NotNested);
    }
    let delta_g2 = (g_squared(dataset, simpler)? - g_squared(dataset, complex)?).max(0.0);
    let delta_dof = complex
        .adjusted_dof(rule)
        .saturating_sub(simpler.adjusted_dof(rule));
    Ok(DeltaStats {
        delta_g2,
        delta_dof,
    })
}

/// Upper-tail χ² probability of the nested difference; Δdof is floored at 1.
pub fn chi2_significance(delta: DeltaStats) -> f64 {
    special::chi_square_sf(delta.delta_g2, delta.delta_dof.max(1) as f64)
}

/// Natural log of [`chi2_significance`], which stays ordered where the
/// p-value itself underflows.
pub fn ln_chi2_significance(delta: DeltaStats) -> f64 {
    special::ln_chi_square_sf(delta.delta_g2, delta.delta_dof.max(1) as f64)
}

/// `IC_κ = ΔG² − κ·Δdof`.
pub fn information_criterion(delta: DeltaStats, kappa: f64) -> f64 {
    delta.delta_g2 - kappa * delta.delta_dof as f64
}

/// Monte Carlo exact conditional p-value of the nested difference.
///
/// The simpler model is fitted to `dataset`; `mc_replicates` datasets of
/// size N are sampled from its joint, both graphs are refitted to each,
/// and the p-value is `(1 + #{ΔG²* ≥ ΔG²}) / (R + 1)`. Replicate `r` uses
/// its own random stream derived from `(seed, r)`, so the result does not
/// depend on how replicates are scheduled.
pub fn exact_conditional_significance(
    dataset: &Dataset,
    simpler_graph: &ModelGraph,
    complex_graph: &ModelGraph,
    config: &CriterionConfig,
) -> Result<f64> {
    config.validate()?;
    if config.mc_replicates < 1 {
        return Err(Error::InvalidConfig(
            "mc_replicates must be at least 1".into(),
        ));
    }
    if !is_nested(simpler_graph, complex_graph) {
        return Err(Error::NotNested);
    }
    let simpler = fit(dataset, simpler_graph)?;
    let complex = fit(dataset, complex_graph)?;
    let observed = delta_statistics(dataset, &simpler, &complex)?.delta_g2;
    if simpler_graph == complex_graph {
        // Every replicate ties at zero.
        return Ok(1.0);
    }
    let sampler = AncestralSampler::from_fitted(&simpler);
    let n = dataset.total();
    let schema = dataset.schema_arc().clone();
    let hits = (0..config.mc_replicates)
        .into_par_iter()
        .map(|r| -> Result<usize> {
            let mut rng = replicate_rng(config.seed, r);
            let counts = sampler.sample_counts(&mut rng, n);
            let synthetic = Dataset::from_cell_counts(schema.clone(), counts)?;
            let d = delta_statistics(
                &synthetic,
                &fit(&synthetic, simpler_graph)?,
                &fit(&synthetic, complex_graph)?,
            )?;
            Ok(usize::from(at_least(d.delta_g2, observed)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok((1 + hits) as f64 / (config.mc_replicates + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{boundary_graph, Boundary, Edge};
    use crate::schema::parse_dataset;

    #[test]
    fn saturated_g2_is_zero() {
        let ds = parse_dataset("A,B,S\n0,0,0\n0,1,1\n0,1,1\n1,1,0\n", "S", ',').unwrap();
        let m = fit(&ds, &boundary_graph(3, Boundary::Saturated).unwrap()).unwrap();
        assert_eq!(g_squared(&ds, &m).unwrap(), 0.0);
    }

    #[test]
    fn g2_formula_on_three_one() {
        // Observed (3, 1) against expected (2, 2); frozen from a 40-digit evaluation.
        let g2 = likelihood_ratio([(3.0, 2.0), (1.0, 2.0)]);
        assert!((g2 - 1.046_496_287_529_095_7).abs() < 1e-14);
        assert_eq!(likelihood_ratio([(0.0, 2.0), (4.0, 4.0)]), 0.0);
    }

    #[test]
    fn g2_agrees_with_plain_formula() {
        let ds = parse_dataset(
            "A,B,S\n0,0,0\n0,0,0\n0,1,1\n1,1,0\n1,0,1\n1,1,1\n",
            "S",
            ',',
        )
        .unwrap();
        let m = fit(&ds, &ModelGraph::from_edges(3, [(0, 2)]).unwrap()).unwrap();
        let pairs = ds
            .cells()
            .iter()
            .map(|&(key, f)| (f as f64, ds.total() as f64 * m.joint_probability_key(key)));
        assert!((g_squared(&ds, &m).unwrap() - likelihood_ratio(pairs)).abs() < 1e-12);
    }

    #[test]
    fn g2_rejects_foreign_model() {
        let a = parse_dataset("A,S\n0,0\n1,1\n", "S", ',').unwrap();
        let b = parse_dataset("A,S\n0,0\n1,1\n1,1\n", "S", ',').unwrap();
        let m = fit(&b, &ModelGraph::empty(2).unwrap()).unwrap();
        assert_eq!(g_squared(&a, &m), Err(Error::ModelMismatch));
    }

    #[test]
    fn cdf_examples() {
        assert!((chi_square_cdf(2.0, 2).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert_eq!(chi_square_cdf(0.0, 5).unwrap(), 0.0);
        assert!((chi_square_cdf(4.0, 4).unwrap() - 0.593_994_150_290_161_9).abs() < 1e-12);
        assert_eq!(chi_square_cdf(1.0, 0), Err(Error::InvalidDof(0)));
    }

    #[test]
    fn chi2_significance_examples() {
        let p = chi2_significance(DeltaStats {
            delta_g2: 0.0,
            delta_dof: 3,
        });
        assert_eq!(p, 1.0);
        let p = chi2_significance(DeltaStats {
            delta_g2: 200.0,
            delta_dof: 1,
        });
        assert!(p < 1e-40);
        // χ²₁ 95% quantile is 3.841458820694124.
        let p = chi2_significance(DeltaStats {
            delta_g2: 3.841_458_820_694_124,
            delta_dof: 1,
        });
        assert!((p - 0.05).abs() < 1e-12);
        let p = chi2_significance(DeltaStats {
            delta_g2: 3.84,
            delta_dof: 1,
        });
        assert!((p - 0.0500).abs() < 5e-5);
    }

    #[test]
    fn information_criterion_examples() {
        let d = DeltaStats {
            delta_g2: 10.0,
            delta_dof: 3,
        };
        assert_eq!(information_criterion(d, 2.0), 4.0);
        let bic = information_criterion(d, 100f64.ln());
        assert!((bic - (10.0 - 3.0 * 4.605_170_185_988_091)).abs() < 1e-12);
        assert!((bic + 3.8155).abs() < 1e-4);
        assert_eq!(information_criterion(DeltaStats::default(), 7.0), 0.0);
    }

    #[test]
    fn delta_of_identical_fits_is_zero() {
        let ds = parse_dataset("A,B,S\n0,0,0\n0,1,1\n1,1,0\n", "S", ',').unwrap();
        let g = ModelGraph::from_edges(3, [(0, 2)]).unwrap();
        let m = fit(&ds, &g).unwrap();
        assert_eq!(
            delta_statistics(&ds, &m, &m).unwrap(),
            DeltaStats::default()
        );
        let far = fit(&ds, &boundary_graph(3, Boundary::Saturated).unwrap()).unwrap();
        let ind = fit(&ds, &ModelGraph::empty(3).unwrap()).unwrap();
        assert_eq!(delta_statistics(&ds, &ind, &far), Err(Error::NotNested));
    }

    #[test]
    fn independent_edge_has_no_signal() {
        // A and S independent by construction: every (a, s) pair equally often.
        let mut text = String::from("A,S\n");
        for a in 0..2 {
            for s in 0..3 {
                for _ in 0..5 {
                    text.push_str(&format!("{a},{s}\n"));
                }
            }
        }
        let ds = parse_dataset(&text, "S", ',').unwrap();
        let g = ModelGraph::from_edges(2, [(0, 1)]).unwrap();
        let d = delta_statistics(
            &ds,
            &fit(&ds, &ModelGraph::empty(2).unwrap()).unwrap(),
            &fit(&ds, &g).unwrap(),
        )
        .unwrap();
        assert!(d.delta_g2.abs() < 1e-12);
        assert_eq!(d.delta_dof, 2);
    }

    #[test]
    fn exact_test_degenerate_and_deterministic() {
        let ds = parse_dataset("A,B,S\n0,0,0\n0,1,1\n1,1,0\n1,0,1\n0,0,1\n", "S", ',').unwrap();
        let g = ModelGraph::from_edges(3, [(0, 2), (1, 2)]).unwrap();
        let cfg = CriterionConfig::exact(0.05, 50, 9);
        assert_eq!(
            exact_conditional_significance(&ds, &g, &g, &cfg).unwrap(),
            1.0
        );
        let complex = g.with_edge(Edge::new(0, 1));
        let p1 = exact_conditional_significance(&ds, &g, &complex, &cfg).unwrap();
        let p2 = exact_conditional_significance(&ds, &g, &complex, &cfg).unwrap();
        assert_eq!(p1, p2);
        let bad = CriterionConfig::exact(0.05, 0, 9);
        assert!(exact_conditional_significance(&ds, &g, &complex, &bad).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(CriterionConfig::chi2(0.0).validate().is_err());
        assert!(CriterionConfig::chi2(1.5).validate().is_err());
        assert!(CriterionConfig::aic().validate().is_ok());
        assert_eq!(CriterionConfig::bic().kappa(100), Some(100f64.ln()));
        assert_eq!(
            "exact".parse::<CriterionKind>().unwrap(),
            CriterionKind::Exact
        );
    }
}
