//! Induction of probabilistic classifiers over categorical data by
//! sequential selection of decomposable graphical models.
//!
//! The crate is organised bottom-up:
//!
//! * [`schema`]: categorical variables, encoded datasets, ingestion and splits.
//! * [`chordal`]: model graphs, chordality, clique decompositions, one-edge neighbours.
//! * [`estimate`]: closed-form maximum-likelihood fits of decomposable models.
//! * [`criteria`]: G², χ² and Monte Carlo significance, information criteria.
//! * [`search`]: forward and backward sequential search.
//! * [`classify`]: classifiers with abstention, baselines and metrics.
//! * [`experiment`] and [`synth`]: batch runs, reports, traces and synthetic data.

pub mod chordal;
pub mod classify;
pub mod criteria;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod local;
pub mod sampler;
pub mod schema;
pub mod search;
pub mod special;
pub mod synth;

pub use chordal::{Boundary, Decomposition, Edge, ModelGraph, VarSet};
pub use classify::{Classifier, DefaultClassifier, Metrics, Prediction};
pub use criteria::{CriterionConfig, CriterionKind, DeltaStats};
pub use error::{Error, ParseErrorKind, Result};
pub use estimate::{DofRule, FittedModel, MarginalTable};
pub use schema::{Dataset, FeatureVariable, Fraction, Instance, Schema};
pub use search::{Direction, SearchConfig, SearchResult, SearchStep, StopReason};
