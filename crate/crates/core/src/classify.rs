//! Classifiers over fitted models, the majority baseline, and metrics.

use crate::error::{Error, Result};
use crate::estimate::FittedModel;
use crate::schema::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prediction {
    Sense(u32),
    /// The parameters needed to pick a class could not be estimated.
    Abstain,
}

pub trait Classifier {
    /// Predicts the class from feature values (level indices, class excluded).
    fn predict(&self, context: &[u32]) -> Result<Prediction>;
}

/// Scores within this relative distance of the best count as tied, so that
/// mathematically equal products rounded differently still tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// Argmax of the fitted joint over classes; ties go to the lowest class
/// index, and an all-zero column abstains.
pub fn predict(model: &FittedModel, context: &[u32]) -> Result<Prediction> {
    let schema = model.schema();
    if context.len() + 1 != schema.arity() {
        return Err(Error::Nonconforming(format!(
            "expected {} feature values, got {}",
            schema.arity() - 1,
            context.len()
        )));
    }
    let mut values = Vec::with_capacity(schema.arity());
    values.extend_from_slice(context);
    values.push(0);
    for (i, &v) in context.iter().enumerate() {
        if v as usize >= schema.variable(i).cardinality() {
            // A level the model has never been told about.
            return Ok(Prediction::Abstain);
        }
    }
    let class = schema.class_index();
    let mut best = (0.0, Prediction::Abstain);
    for s in 0..schema.class_var().cardinality() as u32 {
        values[class] = s;
        let p = model.joint_probability(&values);
        if p > best.0 * (1.0 + TIE_TOLERANCE) {
            best = (p, Prediction::Sense(s));
        }
    }
    Ok(best.1)
}

/// Predicts from level labels; labels missing from the schema abstain.
pub fn predict_labels(model: &FittedModel, labels: &[&str]) -> Result<Prediction> {
    let schema = model.schema();
    if labels.len() + 1 != schema.arity() {
        return Err(Error::Nonconforming(format!(
            "expected {} feature values, got {}",
            schema.arity() - 1,
            labels.len()
        )));
    }
    let mut context = Vec::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        match schema.variable(i).level_index(l) {
            Some(v) => context.push(v),
            None => return Ok(Prediction::Abstain),
        }
    }
    predict(model, &context)
}

impl Classifier for FittedModel {
    fn predict(&self, context: &[u32]) -> Result<Prediction> {
        predict(self, context)
    }
}

/// Always answers the most frequent training class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefaultClassifier {
    sense: u32,
}

impl DefaultClassifier {
    pub fn sense(&self) -> u32 {
        self.sense
    }
}

impl Classifier for DefaultClassifier {
    fn predict(&self, _context: &[u32]) -> Result<Prediction> {
        Ok(Prediction::Sense(self.sense))
    }
}

pub fn default_classifier(train: &Dataset) -> DefaultClassifier {
    let k = train.schema().class_var().cardinality();
    let mut counts = vec![0u64; k];
    for (inst, c) in train.rows() {
        counts[inst.class_value() as usize] += c;
    }
    let mut sense = 0;
    for (s, &c) in counts.iter().enumerate() {
        if c > counts[sense] {
            sense = s;
        }
    }
    DefaultClassifier {
        sense: sense as u32,
    }
}

/// Accuracy counts abstentions as errors; recall is the share not abstained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub recall: f64,
    pub n_test: u64,
    pub n_correct: u64,
    pub n_abstained: u64,
}

impl Metrics {
    pub fn from_counts(n_test: u64, n_correct: u64, n_abstained: u64) -> Result<Self> {
        if n_test == 0 {
            return Err(Error::EmptyTestSet);
        }
        Ok(Self {
            accuracy: n_correct as f64 / n_test as f64,
            recall: (n_test - n_abstained) as f64 / n_test as f64,
            n_test,
            n_correct,
            n_abstained,
        })
    }
}

pub fn evaluate(classifier: &dyn Classifier, test: &Dataset) -> Result<Metrics> {
    let (mut n, mut correct, mut abstained) = (0, 0, 0);
    for (inst, c) in test.rows() {
        n += c;
        match classifier.predict(inst.context())? {
            Prediction::Sense(s) if s == inst.class_value() => correct += c,
            Prediction::Sense(_) => {}
            Prediction::Abstain => abstained += c,
        }
    }
    Metrics::from_counts(n, correct, abstained)
}
