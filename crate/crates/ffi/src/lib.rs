//! C ABI over the stratx library.
//!
//! Objects are opaque handles created by `stratx_*` constructors and
//! released with the matching `*_free`. Fallible calls return a
//! [`StratxStatus`]; on failure [`stratx_last_error`] describes the cause.
//! Handles are not thread-safe to free concurrently, but read-only calls on
//! one handle may run from several threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stratx::{
    catpd::{catstratpd, CatEffect, CatStratPDParams},
    export,
    numpd::{stratpd, PDCurve, StratPDParams},
    synth::{SynthKind, SynthSpec},
    ColumnMeta, Dataset, Error,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratxStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Bad parameter, column index, kind name or non-UTF-8 string.
    InvalidArgument = 2,
    /// File could not be read or written.
    Io = 3,
    /// Malformed or inconsistent input data.
    Data = 4,
    /// Too few supported feature values to build a curve.
    InsufficientSupport = 5,
    /// Category merging did not converge.
    MergeLimit = 6,
    /// Output buffer shorter than the object.
    BufferTooSmall = 7,
    /// Internal failure; the library caught a panic.
    Internal = 8,
}

/// Tuning parameters shared by both procedures. `min_slopes_per_x` is
/// ignored for categorical features.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct StratxParams {
    pub min_samples_leaf: usize,
    pub min_slopes_per_x: usize,
    pub ntrials: usize,
    pub max_features: f64,
    pub rng_seed: u64,
}

pub struct StratxDataset {
    inner: Dataset,
}

pub struct StratxCurve {
    inner: PDCurve,
}

pub struct StratxEffect {
    inner: CatEffect,
    labels: Vec<String>,
    c_labels: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> StratxStatus {
    match e {
        Error::Io { .. } => StratxStatus::Io,
        Error::InsufficientSupport => StratxStatus::InsufficientSupport,
        Error::MergePassLimit { .. } => StratxStatus::MergeLimit,
        Error::InvalidParams(_)
        | Error::ColumnOutOfRange { .. }
        | Error::MissingColumn(_)
        | Error::NotNumeric(_)
        | Error::NotCategorical(_) => StratxStatus::InvalidArgument,
        _ => StratxStatus::Data,
    }
}

struct Fail(StratxStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> StratxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StratxStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StratxStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(StratxStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Fail(
            StratxStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn out_arg<'a, T>(p: *mut *mut T) -> Result<&'a mut *mut T, Fail> {
    if p.is_null() {
        return Err(null("output pointer"));
    }
    *p = ptr::null_mut();
    Ok(&mut *p)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null("handle"))
}

fn write_file(
    path: &str,
    f: impl FnOnce(BufWriter<File>) -> stratx::Result<()>,
) -> Result<(), Fail> {
    let file = File::create(path).map_err(|e| Fail(StratxStatus::Io, format!("{path}: {e}")))?;
    f(BufWriter::new(file)).map_err(Fail::from)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stratx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn stratx_params_default() -> StratxParams {
    let p = StratPDParams::default();
    StratxParams {
        min_samples_leaf: p.min_samples_leaf,
        min_slopes_per_x: p.min_slopes_per_x,
        ntrials: p.ntrials,
        max_features: p.max_features,
        rng_seed: p.rng_seed,
    }
}

/// Loads a CSV with a header row. `categorical` lists `n_categorical`
/// column names to label-encode; it may be null when the count is 0.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_load_csv(
    path: *const c_char,
    response: *const c_char,
    categorical: *const *const c_char,
    n_categorical: usize,
    out: *mut *mut StratxDataset,
) -> StratxStatus {
    guard(|| {
        let out = out_arg(out)?;
        let path = str_arg(path, "path")?;
        let response = str_arg(response, "response")?;
        let mut cats = Vec::with_capacity(n_categorical);
        if n_categorical > 0 {
            if categorical.is_null() {
                return Err(null("categorical"));
            }
            for i in 0..n_categorical {
                cats.push(str_arg(*categorical.add(i), "categorical name")?);
            }
        }
        let inner = stratx::load_csv(path, response, &cats)?;
        *out = Box::into_raw(Box::new(StratxDataset { inner }));
        Ok(())
    })
}

/// Builds an all-numeric dataset from `n_cols` column-major columns of
/// `n_rows` values each. `names` may be null, giving `x0, x1, ...`.
///
/// # Safety
/// `values` must hold `n_rows * n_cols` doubles and `response` `n_rows`;
/// `names`, when given, must hold `n_cols` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_from_columns(
    values: *const f64,
    n_rows: usize,
    n_cols: usize,
    response: *const f64,
    names: *const *const c_char,
    out: *mut *mut StratxDataset,
) -> StratxStatus {
    guard(|| {
        let out = out_arg(out)?;
        if values.is_null() || response.is_null() {
            return Err(null("values or response"));
        }
        let total = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| Fail(StratxStatus::InvalidArgument, "dimensions overflow".into()))?;
        let flat = std::slice::from_raw_parts(values, total);
        let features: Vec<Vec<f64>> = flat
            .chunks(n_rows.max(1))
            .take(n_cols)
            .map(<[f64]>::to_vec)
            .collect();
        let mut meta = Vec::with_capacity(n_cols);
        for c in 0..n_cols {
            let name = if names.is_null() {
                format!("x{c}")
            } else {
                str_arg(*names.add(c), "column name")?.to_owned()
            };
            meta.push(ColumnMeta::numeric(name));
        }
        let y = std::slice::from_raw_parts(response, n_rows).to_vec();
        let inner = Dataset::new(features, meta, y)?;
        *out = Box::into_raw(Box::new(StratxDataset { inner }));
        Ok(())
    })
}

/// Generates one of the built-in datasets: `interaction`,
/// `noisy_quadratic`, `weather` or `bodyweight`.
///
/// # Safety
/// `kind` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_synth(
    kind: *const c_char,
    n: usize,
    sigma: f64,
    seed: u64,
    out: *mut *mut StratxDataset,
) -> StratxStatus {
    guard(|| {
        let out = out_arg(out)?;
        let kind: SynthKind = str_arg(kind, "kind")?.parse()?;
        let inner = SynthSpec {
            kind,
            n,
            sigma,
            seed,
        }
        .generate()?;
        *out = Box::into_raw(Box::new(StratxDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_n_rows(ds: *const StratxDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_rows())
}

/// # Safety
/// `ds` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_n_features(ds: *const StratxDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_features())
}

/// # Safety
/// `ds` must be a live handle; `name` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_column_index(
    ds: *const StratxDataset,
    name: *const c_char,
    out: *mut usize,
) -> StratxStatus {
    guard(|| {
        let ds = handle(ds)?;
        let name = str_arg(name, "name")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = ds
            .inner
            .column_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))?;
        Ok(())
    })
}

/// Writes the dataset as CSV, labels decoded and the response last.
///
/// # Safety
/// `ds` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_write_csv(
    ds: *const StratxDataset,
    path: *const c_char,
) -> StratxStatus {
    guard(|| {
        let ds = handle(ds)?;
        write_file(str_arg(path, "path")?, |w| ds.inner.write_csv(w))
    })
}

/// # Safety
/// `ds` must come from a `stratx_dataset_*` constructor and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn stratx_dataset_free(ds: *mut StratxDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

unsafe fn params_arg(p: *const StratxParams) -> StratxParams {
    p.as_ref()
        .copied()
        .unwrap_or_else(|| stratx_params_default())
}

/// Partial dependence curve of numeric feature `j`. `params` may be null
/// for defaults.
///
/// # Safety
/// `ds` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stratx_stratpd(
    ds: *const StratxDataset,
    j: usize,
    params: *const StratxParams,
    out: *mut *mut StratxCurve,
) -> StratxStatus {
    guard(|| {
        let out = out_arg(out)?;
        let ds = handle(ds)?;
        let p = params_arg(params);
        let inner = stratpd(
            &ds.inner,
            j,
            &StratPDParams {
                min_samples_leaf: p.min_samples_leaf,
                min_slopes_per_x: p.min_slopes_per_x,
                ntrials: p.ntrials,
                max_features: p.max_features,
                rng_seed: p.rng_seed,
            },
        )?;
        *out = Box::into_raw(Box::new(StratxCurve { inner }));
        Ok(())
    })
}

/// Number of kept points.
///
/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_curve_len(c: *const StratxCurve) -> usize {
    c.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_curve_ignored_rows(c: *const StratxCurve) -> usize {
    c.as_ref().map_or(0, |c| c.inner.ignored_rows)
}

/// Copies the curve into caller buffers of length `cap`; any buffer may be
/// null to skip it.
///
/// # Safety
/// `c` must be a live handle; non-null buffers must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn stratx_curve_copy(
    c: *const StratxCurve,
    x: *mut f64,
    pd_y: *mut f64,
    counts: *mut usize,
    cap: usize,
) -> StratxStatus {
    guard(|| {
        let c = &handle(c)?.inner;
        let n = c.len();
        if cap < n {
            return Err(Fail(
                StratxStatus::BufferTooSmall,
                format!("buffer holds {cap}, curve has {n} points"),
            ));
        }
        if !x.is_null() {
            ptr::copy_nonoverlapping(c.x.as_ptr(), x, n);
        }
        if !pd_y.is_null() {
            ptr::copy_nonoverlapping(c.pd_y.as_ptr(), pd_y, n);
        }
        if !counts.is_null() {
            ptr::copy_nonoverlapping(c.counts.as_ptr(), counts, n);
        }
        Ok(())
    })
}

/// Writes `x,pd_y,count` CSV.
///
/// # Safety
/// `c` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn stratx_curve_write_csv(
    c: *const StratxCurve,
    path: *const c_char,
) -> StratxStatus {
    guard(|| {
        let c = handle(c)?;
        write_file(str_arg(path, "path")?, |w| {
            export::write_curve_csv(&c.inner, w)
        })
    })
}

/// # Safety
/// `c` must come from [`stratx_stratpd`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stratx_curve_free(c: *mut StratxCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Per-category effect of categorical feature `j`. `params` may be null
/// for defaults.
///
/// # Safety
/// `ds` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stratx_catstratpd(
    ds: *const StratxDataset,
    j: usize,
    params: *const StratxParams,
    out: *mut *mut StratxEffect,
) -> StratxStatus {
    guard(|| {
        let out = out_arg(out)?;
        let ds = handle(ds)?;
        let p = params_arg(params);
        let inner = catstratpd(
            &ds.inner,
            j,
            &CatStratPDParams {
                min_samples_leaf: p.min_samples_leaf,
                ntrials: p.ntrials,
                max_features: p.max_features,
                rng_seed: p.rng_seed,
            },
        )?;
        let labels = ds.inner.meta(j)?.category_labels.clone();
        let c_labels = labels
            .iter()
            .map(|l| CString::new(l.replace('\0', " ")).unwrap_or_default())
            .collect();
        *out = Box::into_raw(Box::new(StratxEffect {
            inner,
            labels,
            c_labels,
        }));
        Ok(())
    })
}

/// Number of categories.
///
/// # Safety
/// `e` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_effect_len(e: *const StratxEffect) -> usize {
    e.as_ref().map_or(0, |e| e.inner.delta.len())
}

/// # Safety
/// `e` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_effect_ignored_rows(e: *const StratxEffect) -> usize {
    e.as_ref().map_or(0, |e| e.inner.ignored_rows)
}

/// Copies deltas (NaN for unsupported categories) and counts into caller
/// buffers of length `cap`; either may be null.
///
/// # Safety
/// `e` must be a live handle; non-null buffers must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn stratx_effect_copy(
    e: *const StratxEffect,
    delta: *mut f64,
    counts: *mut usize,
    cap: usize,
) -> StratxStatus {
    guard(|| {
        let e = &handle(e)?.inner;
        let n = e.delta.len();
        if cap < n {
            return Err(Fail(
                StratxStatus::BufferTooSmall,
                format!("buffer holds {cap}, effect has {n} categories"),
            ));
        }
        if !delta.is_null() {
            ptr::copy_nonoverlapping(e.delta.as_ptr(), delta, n);
        }
        if !counts.is_null() {
            ptr::copy_nonoverlapping(e.counts.as_ptr(), counts, n);
        }
        Ok(())
    })
}

/// Label of category `k`, valid while the handle lives, or null when `k`
/// is out of range.
///
/// # Safety
/// `e` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn stratx_effect_label(e: *const StratxEffect, k: usize) -> *const c_char {
    e.as_ref()
        .and_then(|e| e.c_labels.get(k))
        .map_or(ptr::null(), |l| l.as_ptr())
}

/// Writes `category_label,delta,count` CSV.
///
/// # Safety
/// `e` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn stratx_effect_write_csv(
    e: *const StratxEffect,
    path: *const c_char,
) -> StratxStatus {
    guard(|| {
        let e = handle(e)?;
        write_file(str_arg(path, "path")?, |w| {
            export::write_effect_csv(&e.inner, &e.labels, w)
        })
    })
}

/// # Safety
/// `e` must come from [`stratx_catstratpd`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stratx_effect_free(e: *mut StratxEffect) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
