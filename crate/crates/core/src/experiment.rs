//! The comparison grid: every dataset under every search strategy and
//! criterion, plus the majority and Naive Bayes baselines.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::chordal::{notation, ModelGraph};
use crate::classify::{default_classifier, evaluate, Metrics};
use crate::criteria::{CriterionConfig, CriterionKind};
use crate::error::{Error, Result};
use crate::estimate::{fit, naive_bayes_graph, DofRule};
use crate::schema::{split, Dataset, Fraction};
use crate::search::{select_model, Direction, SearchConfig, SearchResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub split: Fraction,
    pub seed: u64,
    /// Seed for Monte Carlo replicates; falls back to `seed`.
    pub mc_seed: Option<u64>,
    pub alphas: Vec<f64>,
    pub mc_replicates: usize,
    pub literal_alpha_rule: bool,
    pub dof_rule: DofRule,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            split: Fraction::default(),
            seed: 0,
            mc_seed: None,
            alphas: vec![CriterionConfig::DEFAULT_ALPHA],
            mc_replicates: CriterionConfig::DEFAULT_REPLICATES,
            literal_alpha_rule: false,
            dof_rule: DofRule::CliqueCells,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Search {
        direction: Direction,
        criterion: CriterionKind,
        alpha: Option<f64>,
    },
    Default,
    NaiveBayes,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Search {
                direction,
                criterion,
                alpha: Some(a),
            } => format!("{direction}_{}_{a}", criterion.name()),
            Method::Search {
                direction,
                criterion,
                alpha: None,
            } => format!("{direction}_{}", criterion.name()),
            Method::Default => "default".into(),
            Method::NaiveBayes => "naive_bayes".into(),
        }
    }

    /// Grid columns in report order.
    pub fn grid(alphas: &[f64]) -> Vec<Method> {
        let mut out = Vec::new();
        for direction in Direction::ALL {
            for criterion in CriterionKind::ALL {
                if criterion.is_significance_test() {
                    for &a in alphas {
                        out.push(Method::Search {
                            direction,
                            criterion,
                            alpha: Some(a),
                        });
                    }
                } else {
                    out.push(Method::Search {
                        direction,
                        criterion,
                        alpha: None,
                    });
                }
            }
        }
        out.push(Method::Default);
        out.push(Method::NaiveBayes);
        out
    }
}

/// One (dataset, method) result.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub dataset: String,
    pub method: Method,
    pub metrics: Metrics,
    /// Edge count of the model; 0 for the majority baseline.
    pub complexity: usize,
    /// Clique notation of the model, empty for the majority baseline.
    pub model: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub datasets: Vec<String>,
    pub methods: Vec<Method>,
    /// Dataset-major, in `datasets` × `methods` order.
    pub records: Vec<CellRecord>,
}

/// Per-method means over datasets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Average {
    pub accuracy: f64,
    pub recall: f64,
    pub complexity: f64,
}

impl ExperimentReport {
    pub fn record(&self, dataset: &str, method: &Method) -> Option<&CellRecord> {
        self.records
            .iter()
            .find(|r| r.dataset == dataset && r.method == *method)
    }

    pub fn averages(&self) -> Vec<(Method, Average)> {
        self.methods
            .iter()
            .map(|m| {
                let rows: Vec<_> = self.records.iter().filter(|r| r.method == *m).collect();
                let k = rows.len().max(1) as f64;
                let avg = Average {
                    accuracy: rows.iter().map(|r| r.metrics.accuracy).sum::<f64>() / k,
                    recall: rows.iter().map(|r| r.metrics.recall).sum::<f64>() / k,
                    complexity: rows.iter().map(|r| r.complexity as f64).sum::<f64>() / k,
                };
                (*m, avg)
            })
            .collect()
    }

    /// One line per cell: dataset, method, accuracy, recall, complexity,
    /// test size, abstentions, model.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let d = delimiter;
        let mut out = format!(
            "dataset{d}method{d}accuracy{d}recall{d}complexity{d}n_test{d}n_abstained{d}model\n"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}",
                r.dataset,
                r.method.label(),
                r.metrics.accuracy,
                r.metrics.recall,
                r.complexity,
                r.metrics.n_test,
                r.metrics.n_abstained,
                r.model
            );
        }
        out
    }

    /// Aligned table of `accuracy (complexity)` with an average row.
    pub fn render_table(&self) -> String {
        let mut header = vec!["dataset".to_string()];
        header.extend(self.methods.iter().map(Method::label));
        let mut rows = vec![header];
        for ds in &self.datasets {
            let mut row = vec![ds.clone()];
            for m in &self.methods {
                row.push(match self.record(ds, m) {
                    Some(r) => format!("{} ({})", decimal4(r.metrics.accuracy), r.complexity),
                    None => "-".into(),
                });
            }
            rows.push(row);
        }
        let mut avg = vec!["average".to_string()];
        for (_, a) in self.averages() {
            avg.push(format!("{} ({:.1})", decimal4(a.accuracy), a.complexity));
        }
        rows.push(avg);

        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, w))| {
                    if c == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// `.7418` style: four decimals without the leading zero.
fn decimal4(x: f64) -> String {
    let s = format!("{x:.4}");
    match s.strip_prefix('0') {
        Some(rest) => rest.to_string(),
        None => s,
    }
}

fn cell_error(dataset: &str, method: &Method, e: Error) -> Error {
    Error::Cell {
        cell: format!("{dataset}/{}", method.label()),
        source: Box::new(e),
    }
}

/// Runs one grid cell on an already split dataset.
pub fn run_cell(
    train: &Dataset,
    test: &Dataset,
    method: &Method,
    config: &ExperimentConfig,
) -> Result<(Metrics, ModelGraph)> {
    match *method {
        Method::Default => {
            let metrics = evaluate(&default_classifier(train), test)?;
            Ok((metrics, ModelGraph::empty(train.schema().arity())?))
        }
        Method::NaiveBayes => {
            let g = naive_bayes_graph(train.schema());
            let metrics = evaluate(&fit(train, &g)?, test)?;
            Ok((metrics, g))
        }
        Method::Search {
            direction,
            criterion,
            alpha,
        } => {
            let mut crit = CriterionConfig::new(criterion);
            if let Some(a) = alpha {
                crit.alpha = a;
            }
            crit.mc_replicates = config.mc_replicates;
            crit.seed = config.mc_seed.unwrap_or(config.seed);
            let mut sc = SearchConfig::new(direction, crit);
            sc.literal_alpha_rule = config.literal_alpha_rule;
            sc.dof_rule = config.dof_rule;
            let result = select_model(train, &sc)?;
            let metrics = evaluate(&fit(train, &result.final_model)?, test)?;
            Ok((metrics, result.final_model))
        }
    }
}

/// Splits every dataset with `config.seed` and fills the grid. Cells run in
/// parallel; the report order is fixed.
pub fn run_experiment(
    datasets: &[(String, Dataset)],
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if config.alphas.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one alpha is required".into(),
        ));
    }
    let methods = Method::grid(&config.alphas);
    let splits = datasets
        .iter()
        .map(|(name, ds)| {
            split(ds, config.split, config.seed).map_err(|e| cell_error(name, &Method::Default, e))
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, Method)> = (0..datasets.len())
        .flat_map(|d| methods.iter().map(move |m| (d, *m)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(d, method)| {
            let name = &datasets[d].0;
            let (train, test) = &splits[d];
            let (metrics, graph) =
                run_cell(train, test, &method, config).map_err(|e| cell_error(name, &method, e))?;
            let schema = train.schema();
            let model = match method {
                Method::Default => String::new(),
                _ => notation(&graph, &schema.names(), Some(schema.class_index()))
                    .map_err(|e| cell_error(name, &method, e))?,
            };
            Ok(CellRecord {
                dataset: name.clone(),
                method,
                metrics,
                complexity: match method {
                    Method::Default => 0,
                    _ => graph.complexity(),
                },
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport {
        datasets: datasets.iter().map(|(n, _)| n.clone()).collect(),
        methods,
        records,
    })
}

/// One accepted model of a search trace, scored on held-out data.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub level: usize,
    /// Variable names of the edge added or removed at this step.
    pub edge: Option<(String, String)>,
    pub criterion_value: Option<f64>,
    pub delta_g2: Option<f64>,
    pub delta_dof: Option<u64>,
    pub g_squared: f64,
    pub accuracy: f64,
    pub recall: f64,
    pub model: String,
}

/// Fits every traced model on `train` and evaluates it on `test`.
pub fn trace_rows(result: &SearchResult, train: &Dataset, test: &Dataset) -> Result<Vec<TraceRow>> {
    let schema = train.schema();
    let names = schema.names();
    result
        .trace
        .iter()
        .map(|step| {
            let metrics = evaluate(&fit(train, &step.model)?, test)?;
            Ok(TraceRow {
                level: step.level,
                edge: step
                    .chosen_edge
                    .map(|e| (names[e.lo()].clone(), names[e.hi()].clone())),
                criterion_value: step.criterion_value,
                delta_g2: step.delta.map(|d| d.delta_g2),
                delta_dof: step.delta.map(|d| d.delta_dof),
                g_squared: step.g_squared,
                accuracy: metrics.accuracy,
                recall: metrics.recall,
                model: notation(&step.model, &names, Some(schema.class_index()))?,
            })
        })
        .collect()
}

pub fn export_trace(rows: &[TraceRow], delimiter: char) -> String {
    let d = delimiter;
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut out = format!("level{d}edge{d}criterion_value{d}delta_g2{d}delta_dof{d}g_squared{d}accuracy{d}recall{d}model\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}",
            r.level,
            opt(r.edge.as_ref().map(|(a, b)| format!("{a}-{b}"))),
            opt(r.criterion_value.map(|v| v.to_string())),
            opt(r.delta_g2.map(|v| v.to_string())),
            opt(r.delta_dof.map(|v| v.to_string())),
            r.g_squared,
            r.accuracy,
            r.recall,
            r.model
        );
    }
    out
}
