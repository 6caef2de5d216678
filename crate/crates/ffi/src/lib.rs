//! C interface to `dmsel`.
//!
//! Datasets and models are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`DmselStatus`]; on failure the
//! message is available from [`dmsel_last_error_message`] on the same thread.
//! Strings handed out by the library are released with [`dmsel_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use dmsel::chordal::{notation, parse_notation};
use dmsel::classify::evaluate;
use dmsel::estimate::fit;
use dmsel::schema::{parse_dataset, split, Fraction, Schema};
use dmsel::search::{select_model, Direction, SearchConfig};
use dmsel::{CriterionConfig, CriterionKind, Dataset, Error, ModelGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmselStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Schema = 4,
    Overflow = 5,
    Nonconforming = 6,
    InvalidFraction = 7,
    TooSmall = 8,
    Graph = 9,
    NotDecomposable = 10,
    ArityMismatch = 11,
    ModelMismatch = 12,
    NotNested = 13,
    InvalidDof = 14,
    InvalidConfig = 15,
    EmptyTestSet = 16,
    Notation = 17,
    Io = 18,
    Panic = 99,
}

impl From<&Error> for DmselStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => DmselStatus::Parse,
            Error::Schema(_) => DmselStatus::Schema,
            Error::Overflow => DmselStatus::Overflow,
            Error::Nonconforming(_) => DmselStatus::Nonconforming,
            Error::InvalidFraction(_) => DmselStatus::InvalidFraction,
            Error::TooSmall(_) => DmselStatus::TooSmall,
            Error::Graph(_) => DmselStatus::Graph,
            Error::NotDecomposable => DmselStatus::NotDecomposable,
            Error::ArityMismatch { .. } => DmselStatus::ArityMismatch,
            Error::ModelMismatch => DmselStatus::ModelMismatch,
            Error::NotNested => DmselStatus::NotNested,
            Error::InvalidDof(_) => DmselStatus::InvalidDof,
            Error::InvalidConfig(_) => DmselStatus::InvalidConfig,
            Error::EmptyTestSet => DmselStatus::EmptyTestSet,
            Error::Notation(_) => DmselStatus::Notation,
            Error::Io(_) => DmselStatus::Io,
            Error::Cell { source, .. } => DmselStatus::from(source.as_ref()),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmselDirection {
    Forward = 0,
    Backward = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmselCriterion {
    Aic = 0,
    Bic = 1,
    Chi2 = 2,
    Exact = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DmselMetrics {
    pub accuracy: f64,
    pub recall: f64,
    pub n_test: u64,
    pub n_correct: u64,
    pub n_abstained: u64,
}

/// Opaque dataset handle.
pub struct DmselDataset(Dataset);

/// Opaque model handle: a graph bound to the schema it was built for.
pub struct DmselModel {
    graph: ModelGraph,
    schema: Arc<Schema>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: DmselStatus, msg: impl Into<String>) -> DmselStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), DmselStatus>) -> DmselStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmselStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(DmselStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> DmselStatus {
    let status = DmselStatus::from(&e);
    fail(status, e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, DmselStatus> {
    if p.is_null() {
        return Err(fail(DmselStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(DmselStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, DmselStatus> {
    p.as_ref()
        .ok_or_else(|| fail(DmselStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), DmselStatus> {
    if p.is_null() {
        Err(fail(DmselStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dmsel_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn dmsel_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses delimited text with a header row. `delimiter` is an ASCII byte.
#[no_mangle]
pub unsafe extern "C" fn dmsel_dataset_parse(
    text: *const c_char,
    class_column: *const c_char,
    delimiter: c_char,
    out: *mut *mut DmselDataset,
) -> DmselStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let class = str_arg(class_column, "class_column")?;
        let ds = parse_dataset(text, class, delimiter as u8 as char).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DmselDataset(ds)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmsel_dataset_free(ds: *mut DmselDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Sample size N, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dmsel_dataset_total(ds: *const DmselDataset) -> u64 {
    ds.as_ref().map_or(0, |d| d.0.total())
}

/// Splits off a test share of `test_num / test_den` of the instances.
#[no_mangle]
pub unsafe extern "C" fn dmsel_dataset_split(
    ds: *const DmselDataset,
    test_num: u64,
    test_den: u64,
    seed: u64,
    out_train: *mut *mut DmselDataset,
    out_test: *mut *mut DmselDataset,
) -> DmselStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        out_arg(out_train, "out_train")?;
        out_arg(out_test, "out_test")?;
        let fraction = Fraction::new(test_num, test_den).map_err(lib_err)?;
        let (train, test) = split(&ds.0, fraction, seed).map_err(lib_err)?;
        *out_train = Box::into_raw(Box::new(DmselDataset(train)));
        *out_test = Box::into_raw(Box::new(DmselDataset(test)));
        Ok(())
    })
}

/// Sequential search. `alpha` is read by chi2 and exact; `mc_replicates`
/// and `seed` by exact only.
#[no_mangle]
pub unsafe extern "C" fn dmsel_select(
    ds: *const DmselDataset,
    direction: DmselDirection,
    criterion: DmselCriterion,
    alpha: f64,
    mc_replicates: usize,
    seed: u64,
    out: *mut *mut DmselModel,
) -> DmselStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        out_arg(out, "out")?;
        let kind = match criterion {
            DmselCriterion::Aic => CriterionKind::Aic,
            DmselCriterion::Bic => CriterionKind::Bic,
            DmselCriterion::Chi2 => CriterionKind::Chi2,
            DmselCriterion::Exact => CriterionKind::Exact,
        };
        let direction = match direction {
            DmselDirection::Forward => Direction::Forward,
            DmselDirection::Backward => Direction::Backward,
        };
        let config = SearchConfig::new(
            direction,
            CriterionConfig {
                kind,
                alpha,
                mc_replicates,
                seed,
            },
        );
        let result = select_model(&ds.0, &config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DmselModel {
            graph: result.final_model,
            schema: ds.0.schema_arc().clone(),
        }));
        Ok(())
    })
}

/// Builds a model from clique notation over the dataset's column names.
#[no_mangle]
pub unsafe extern "C" fn dmsel_model_parse(
    ds: *const DmselDataset,
    model_notation: *const c_char,
    out: *mut *mut DmselModel,
) -> DmselStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        out_arg(out, "out")?;
        let text = str_arg(model_notation, "notation")?;
        let schema = ds.0.schema_arc().clone();
        let graph = parse_notation(text, &schema.names()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DmselModel { graph, schema }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dmsel_model_free(m: *mut DmselModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of edges, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dmsel_model_complexity(m: *const DmselModel) -> usize {
    m.as_ref().map_or(0, |m| m.graph.complexity())
}

/// Clique notation; release with [`dmsel_string_free`].
#[no_mangle]
pub unsafe extern "C" fn dmsel_model_notation(
    m: *const DmselModel,
    out: *mut *mut c_char,
) -> DmselStatus {
    guard(|| {
        let m = ref_arg(m, "model")?;
        out_arg(out, "out")?;
        let s =
            notation(&m.graph, &m.schema.names(), Some(m.schema.class_index())).map_err(lib_err)?;
        *out = CString::new(s)
            .map_err(|_| fail(DmselStatus::Notation, "notation contains a nul byte"))?
            .into_raw();
        Ok(())
    })
}

/// Fits `model` on `train` and classifies `test`.
#[no_mangle]
pub unsafe extern "C" fn dmsel_evaluate(
    m: *const DmselModel,
    train: *const DmselDataset,
    test: *const DmselDataset,
    out: *mut DmselMetrics,
) -> DmselStatus {
    guard(|| {
        let m = ref_arg(m, "model")?;
        let train = ref_arg(train, "train")?;
        let test = ref_arg(test, "test")?;
        out_arg(out, "out")?;
        if train.0.schema() != m.schema.as_ref() || test.0.schema() != m.schema.as_ref() {
            return Err(lib_err(Error::ModelMismatch));
        }
        let fitted = fit(&train.0, &m.graph).map_err(lib_err)?;
        let r = evaluate(&fitted, &test.0).map_err(lib_err)?;
        *out = DmselMetrics {
            accuracy: r.accuracy,
            recall: r.recall,
            n_test: r.n_test,
            n_correct: r.n_correct,
            n_abstained: r.n_abstained,
        };
        Ok(())
    })
}

/// P(X ≤ x) for a χ² variable with `dof` degrees of freedom.
#[no_mangle]
pub unsafe extern "C" fn dmsel_chi_square_cdf(x: f64, dof: i64, out: *mut f64) -> DmselStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = dmsel::criteria::chi_square_cdf(x, dof).map_err(lib_err)?;
        Ok(())
    })
}
