//! Categorical data model: variables, schemas, encoded datasets.
//!
//! Every variable is identified by its position in the schema. Features
//! occupy positions `0..n-1` in header order and the class variable is
//! always last. A complete instance is encoded as a mixed-radix cell key
//! (`Σ value_i · stride_i`), and the projection of an instance onto a
//! subset of variables keeps the same strides, so marginal keys of
//! different variable subsets never need re-encoding.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chordal::VarSet;
use crate::error::{Error, ParseErrorKind, Result};

/// A categorical variable with an ordered inventory of level labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVariable {
    name: String,
    levels: Vec<String>,
}

impl FeatureVariable {
    pub fn new(name: impl Into<String>, levels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Schema("variable name is empty".into()));
        }
        if levels.is_empty() {
            return Err(Error::Schema(format!("variable `{name}` has no levels")));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &levels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Schema(format!(
                    "variable `{name}` has duplicate level `{l}`"
                )));
            }
        }
        Ok(Self { name, levels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, label: &str) -> Option<u32> {
        self.levels
            .iter()
            .position(|l| l == label)
            .map(|i| i as u32)
    }
}

/// Product of level counts over a set of variables, with overflow reported.
pub fn levels_product_of<'a>(vars: impl IntoIterator<Item = &'a FeatureVariable>) -> Result<u64> {
    vars.into_iter().try_fold(1u64, |acc, v| {
        acc.checked_mul(v.cardinality() as u64)
            .ok_or(Error::Overflow)
    })
}

/// Feature variables plus the distinguished class variable (last position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    features: Vec<FeatureVariable>,
    class_var: FeatureVariable,
    strides: Vec<u64>,
}

impl Schema {
    pub fn new(features: Vec<FeatureVariable>, class_var: FeatureVariable) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for v in features.iter().chain(std::iter::once(&class_var)) {
            if !names.insert(v.name()) {
                return Err(Error::Schema(format!("duplicate variable `{}`", v.name())));
            }
        }
        if features.len() + 1 > VarSet::CAPACITY {
            return Err(Error::Schema(format!(
                "at most {} variables are supported",
                VarSet::CAPACITY
            )));
        }
        let mut strides = Vec::with_capacity(features.len() + 1);
        let mut acc = 1u64;
        for v in features.iter().chain(std::iter::once(&class_var)) {
            strides.push(acc);
            acc = acc
                .checked_mul(v.cardinality() as u64)
                .ok_or(Error::Overflow)?;
        }
        Ok(Self {
            features,
            class_var,
            strides,
        })
    }

    pub fn features(&self) -> &[FeatureVariable] {
        &self.features
    }

    pub fn class_var(&self) -> &FeatureVariable {
        &self.class_var
    }

    /// Number of variables including the class, `n`.
    pub fn arity(&self) -> usize {
        self.features.len() + 1
    }

    pub fn class_index(&self) -> usize {
        self.features.len()
    }

    pub fn variable(&self, index: usize) -> &FeatureVariable {
        if index == self.features.len() {
            &self.class_var
        } else {
            &self.features[index]
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &FeatureVariable> {
        self.features.iter().chain(std::iter::once(&self.class_var))
    }

    pub fn names(&self) -> Vec<String> {
        self.variables().map(|v| v.name().to_string()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables().position(|v| v.name() == name)
    }

    /// Number of possible complete instances `q`.
    pub fn levels_product(&self) -> Result<u64> {
        levels_product_of(self.variables())
    }

    pub fn strides(&self) -> &[u64] {
        &self.strides
    }

    pub fn all_vars(&self) -> VarSet {
        VarSet::full(self.arity())
    }

    /// Encodes a complete instance. Values must already conform.
    pub fn cell_key(&self, values: &[u32]) -> u64 {
        values
            .iter()
            .zip(&self.strides)
            .map(|(&v, &s)| v as u64 * s)
            .sum()
    }

    /// Projection key of `values` onto `vars`.
    pub fn project_values(&self, values: &[u32], vars: VarSet) -> u64 {
        vars.iter()
            .map(|i| values[i] as u64 * self.strides[i])
            .sum()
    }

    /// Projection of an already-encoded key onto `vars`.
    pub fn project_key(&self, key: u64, vars: VarSet) -> u64 {
        vars.iter()
            .map(|i| self.value_of(key, i) as u64 * self.strides[i])
            .sum()
    }

    /// Level index of variable `var` inside an encoded key.
    pub fn value_of(&self, key: u64, var: usize) -> u32 {
        ((key / self.strides[var]) % self.variable(var).cardinality() as u64) as u32
    }

    pub fn decode(&self, key: u64) -> Instance {
        Instance((0..self.arity()).map(|i| self.value_of(key, i)).collect())
    }

    pub fn check_instance(&self, values: &[u32]) -> Result<()> {
        if values.len() != self.arity() {
            return Err(Error::Nonconforming(format!(
                "expected {} values, got {}",
                self.arity(),
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if v as usize >= self.variable(i).cardinality() {
                return Err(Error::Nonconforming(format!(
                    "level {v} out of range for `{}`",
                    self.variable(i).name()
                )));
            }
        }
        Ok(())
    }
}

/// One encoded observation: a level index per schema variable, class last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance(pub Vec<u32>);

impl Instance {
    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn class_value(&self) -> u32 {
        *self
            .0
            .last()
            .expect("instance has at least the class value")
    }

    pub fn context(&self) -> &[u32] {
        &self.0[..self.0.len() - 1]
    }
}

/// A multiset of instances over a shared schema.
///
/// Rows keep their insertion order (with multiplicities) so that a
/// serialized dataset re-parses to the same level encoding. Distinct cells
/// are cached sorted by key.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Arc<Schema>,
    rows: Vec<(Instance, u64)>,
    cells: Vec<(u64, u64)>,
    total: u64,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.cells == other.cells
    }
}

impl Dataset {
    pub fn from_rows(schema: Arc<Schema>, rows: Vec<(Instance, u64)>) -> Result<Self> {
        let mut cells = BTreeMap::new();
        let mut total = 0u64;
        for (inst, count) in &rows {
            schema.check_instance(inst.values())?;
            if *count == 0 {
                continue;
            }
            *cells.entry(schema.cell_key(inst.values())).or_insert(0) += count;
            total += count;
        }
        if total == 0 {
            return Err(Error::Schema(
                "dataset must contain at least one instance".into(),
            ));
        }
        let rows = rows.into_iter().filter(|(_, c)| *c > 0).collect();
        Ok(Self {
            schema,
            rows,
            cells: cells.into_iter().collect(),
            total,
        })
    }

    pub fn from_instances(schema: Arc<Schema>, instances: Vec<Instance>) -> Result<Self> {
        Self::from_rows(schema, instances.into_iter().map(|i| (i, 1)).collect())
    }

    /// Builds a dataset directly from encoded cell counts.
    pub fn from_cell_counts(
        schema: Arc<Schema>,
        counts: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in counts {
            if c > 0 {
                *map.entry(k).or_insert(0) += c;
            }
        }
        let rows = map.iter().map(|(&k, &c)| (schema.decode(k), c)).collect();
        Self::from_rows(schema, rows)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Sample size `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn rows(&self) -> &[(Instance, u64)] {
        &self.rows
    }

    /// Distinct observed cells `(key, count)`, sorted by key.
    pub fn cells(&self) -> &[(u64, u64)] {
        &self.cells
    }

    pub fn count(&self, values: &[u32]) -> u64 {
        let key = self.schema.cell_key(values);
        self.cells
            .binary_search_by_key(&key, |&(k, _)| k)
            .map(|i| self.cells[i].1)
            .unwrap_or(0)
    }

    /// Marginal counts over `vars`, keyed by projection key.
    pub fn marginal(&self, vars: VarSet) -> HashMap<u64, u64> {
        let mut out = HashMap::new();
        for &(key, count) in &self.cells {
            *out.entry(self.schema.project_key(key, vars)).or_insert(0) += count;
        }
        out
    }

    /// Same data with every multiplicity multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        Self::from_rows(
            self.schema.clone(),
            self.rows
                .iter()
                .map(|(i, c)| (i.clone(), c * factor))
                .collect(),
        )
    }

    /// Writes the dataset in the delimited format accepted by [`parse_dataset`],
    /// one line per unit of multiplicity.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let d = delimiter.to_string();
        let mut out = String::new();
        let names: Vec<&str> = self.schema.variables().map(|v| v.name()).collect();
        out.push_str(&names.join(&d));
        out.push('\n');
        for (inst, count) in &self.rows {
            let line: Vec<&str> = inst
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| self.schema.variable(i).levels()[v as usize].as_str())
                .collect();
            let line = line.join(&d);
            for _ in 0..*count {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }
}

/// Parses delimited text with a mandatory header into an encoded dataset.
///
/// Levels are inventoried per column in first-appearance order. Empty lines
/// are skipped; line numbers in errors are 1-based.
pub fn parse_dataset(text: &str, class_column: &str, delimiter: char) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        kind: ParseErrorKind::EmptyInput,
    })?;
    let columns: Vec<&str> = header.split(delimiter).map(str::trim).collect();
    let mut seen = std::collections::HashSet::new();
    for c in &columns {
        if !seen.insert(*c) {
            return Err(Error::Parse {
                line: header_line,
                kind: ParseErrorKind::DuplicateColumn(c.to_string()),
            });
        }
    }
    let class_pos = columns
        .iter()
        .position(|c| *c == class_column)
        .ok_or_else(|| Error::Parse {
            line: header_line,
            kind: ParseErrorKind::MissingClassColumn(class_column.to_string()),
        })?;
    if columns.len() < 2 {
        return Err(Error::Parse {
            line: header_line,
            kind: ParseErrorKind::NoFeatures,
        });
    }

    // Column order in the schema: features in header order, class last.
    let order: Vec<usize> = (0..columns.len())
        .filter(|&c| c != class_pos)
        .chain(std::iter::once(class_pos))
        .collect();
    let mut inventories: Vec<Vec<String>> = vec![Vec::new(); columns.len()];
    let mut lookup: Vec<HashMap<String, u32>> = vec![HashMap::new(); columns.len()];
    let mut encoded: Vec<Instance> = Vec::new();

    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(delimiter).map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: line_no,
                kind: ParseErrorKind::RaggedRow {
                    expected: columns.len(),
                    found: fields.len(),
                },
            });
        }
        let values = order
            .iter()
            .map(|&c| {
                let table = &mut lookup[c];
                match table.get(fields[c]) {
                    Some(&i) => i,
                    None => {
                        let i = inventories[c].len() as u32;
                        inventories[c].push(fields[c].to_string());
                        table.insert(fields[c].to_string(), i);
                        i
                    }
                }
            })
            .collect();
        encoded.push(Instance(values));
    }
    if encoded.is_empty() {
        return Err(Error::Parse {
            line: header_line + 1,
            kind: ParseErrorKind::NoRows,
        });
    }

    let mut vars = order
        .iter()
        .map(|&c| FeatureVariable::new(columns[c], std::mem::take(&mut inventories[c])))
        .collect::<Result<Vec<_>>>()?;
    let class_var = vars.pop().expect("class column present");
    let schema = Arc::new(Schema::new(vars, class_var)?);
    Dataset::from_instances(schema, encoded)
}

/// A rational fraction in `(0, 1)`, used for the test-share of a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num >= den {
            return Err(Error::InvalidFraction(format!("{num}/{den}")));
        }
        Ok(Self { num, den })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// `floor(n · self)` in exact integer arithmetic.
    pub fn floor_of(&self, n: u64) -> u64 {
        ((n as u128 * self.num as u128) / self.den as u128) as u64
    }
}

impl Default for Fraction {
    fn default() -> Self {
        Self { num: 1, den: 11 }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Accepts `a/b` or a plain decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFraction(s.to_string());
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            return Fraction::new(a, b).map_err(|_| bad());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(frac.len() as u32);
        let frac_num: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac_num))
            .ok_or_else(bad)?;
        Fraction::new(num, den).map_err(|_| bad())
    }
}

/// Random train/test partition; `|test| = floor(N · test_fraction)`.
///
/// The partition depends only on the dataset and `seed`. Both shares keep
/// the full schema.
pub fn split(dataset: &Dataset, test_fraction: Fraction, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = dataset.total();
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    let n_test = test_fraction.floor_of(n);
    if n_test == 0 || n_test >= n {
        return Err(Error::InvalidFraction(format!(
            "{test_fraction} leaves an empty share for N = {n}"
        )));
    }
    let mut units: Vec<usize> = dataset
        .rows()
        .iter()
        .enumerate()
        .flat_map(|(i, (_, c))| std::iter::repeat_n(i, *c as usize))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    units.shuffle(&mut rng);

    let mut test_counts = vec![0u64; dataset.rows().len()];
    for &i in &units[..n_test as usize] {
        test_counts[i] += 1;
    }
    let share = |pick: &dyn Fn(usize, u64) -> u64| {
        dataset
            .rows()
            .iter()
            .enumerate()
            .map(|(i, (inst, c))| (inst.clone(), pick(i, *c)))
            .collect::<Vec<_>>()
    };
    let test_rows = share(&|i, _| test_counts[i]);
    let train_rows = share(&|i, c| c - test_counts[i]);
    Ok((
        Dataset::from_rows(dataset.schema_arc().clone(), train_rows)?,
        Dataset::from_rows(dataset.schema_arc().clone(), test_rows)?,
    ))
}
