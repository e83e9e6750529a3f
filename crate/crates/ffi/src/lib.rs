//! C ABI for `froc-core`.
//!
//! Every function returns a [`FrocStatus`]. On failure the message is kept in
//! thread-local storage and can be read with [`froc_last_error`]. Objects are
//! opaque handles created by this library and released with the matching
//! `*_free` function. Strings returned to the caller are released with
//! [`froc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use froc_core::data::{FrocDataset as CoreDataset, NegativeSubject, PositiveSubject};
use froc_core::distributions::Family;
use froc_core::empirical;
use froc_core::error::{ErrorClass, FrocError};
use froc_core::indices::{self, Index, IndexEstimate};
use froc_core::model::{self, IdcaFit};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Input data failed validation or parsing.
    Data = 3,
    /// Fitting or inference failed numerically.
    Numerical = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrocFamily {
    Normal = 0,
    Beta = 1,
}

impl From<FrocFamily> for Family {
    fn from(f: FrocFamily) -> Self {
        match f {
            FrocFamily::Normal => Family::Normal,
            FrocFamily::Beta => Family::Beta,
        }
    }
}

/// Point estimate with a two-sided `1 - alpha` interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrocIndexEstimate {
    pub value: f64,
    /// Named to stay clear of the `stderr` macro in `<stdio.h>`.
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
}

impl From<&IndexEstimate> for FrocIndexEstimate {
    fn from(e: &IndexEstimate) -> Self {
        FrocIndexEstimate {
            value: e.value,
            std_error: e.stderr,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            alpha: e.alpha,
        }
    }
}

/// Dataset counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrocSummary {
    pub k1: usize,
    pub k2: usize,
    pub total_lesions: usize,
    pub tp_marks: usize,
    pub fp_on_positives: usize,
    pub fp_on_negatives: usize,
}

/// Collects subjects one at a time.
pub struct FrocDatasetBuilder {
    positives: Vec<PositiveSubject>,
    negatives: Vec<NegativeSubject>,
}

pub struct FrocDataset(CoreDataset);

pub struct FrocFit(IdcaFit);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &FrocError) -> FrocStatus {
    match e {
        FrocError::InvalidArgument(_) => FrocStatus::InvalidArgument,
        FrocError::Io(_) => FrocStatus::Io,
        _ => match e.class() {
            ErrorClass::Data => FrocStatus::Data,
            ErrorClass::Numerical => FrocStatus::Numerical,
        },
    }
}

enum Failure {
    Null(&'static str),
    Core(FrocError),
}

impl From<FrocError> for Failure {
    fn from(e: FrocError) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

fn guard<F: FnOnce() -> Outcome>(f: F) -> FrocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            FrocStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            FrocStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            FrocStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(FrocError::InvalidArgument(format!("{what} is not UTF-8"))))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn froc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn froc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn froc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a dataset from a subjects CSV and a marks CSV.
///
/// # Safety
/// Path arguments must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_from_csv(
    subjects_path: *const c_char,
    marks_path: *const c_char,
    out: *mut *mut FrocDataset,
) -> FrocStatus {
    guard(|| {
        let out = get_mut(out, "out")?;
        *out = ptr::null_mut();
        let s = c_str(subjects_path, "subjects_path")?;
        let m = c_str(marks_path, "marks_path")?;
        let ds = CoreDataset::from_paths(s, m)?;
        *out = Box::into_raw(Box::new(FrocDataset(ds)));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn froc_dataset_builder_new() -> *mut FrocDatasetBuilder {
    Box::into_raw(Box::new(FrocDatasetBuilder {
        positives: Vec::new(),
        negatives: Vec::new(),
    }))
}

/// Adds a positive subject with `n_lesions` lesions.
///
/// `lesion_scores[i]` is the TP score of lesion `i`, NaN when it was missed.
/// `fp_scores` may be null when `n_fp` is 0.
///
/// # Safety
/// Array arguments must point to at least the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_builder_add_positive(
    builder: *mut FrocDatasetBuilder,
    id: *const c_char,
    lesion_scores: *const f64,
    n_lesions: usize,
    fp_scores: *const f64,
    n_fp: usize,
) -> FrocStatus {
    guard(|| {
        let b = get_mut(builder, "builder")?;
        let id = c_str(id, "id")?;
        let lesions = slice(lesion_scores, n_lesions, "lesion_scores")?;
        let fp = slice(fp_scores, n_fp, "fp_scores")?;
        let detected: Vec<bool> = lesions.iter().map(|x| !x.is_nan()).collect();
        let tp: Vec<f64> = lesions.iter().copied().filter(|x| !x.is_nan()).collect();
        b.positives
            .push(PositiveSubject::new(id, detected, tp, fp.to_vec())?);
        Ok(())
    })
}

/// # Safety
/// `fp_scores` must point to `n_fp` values or be null when `n_fp` is 0.
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_builder_add_negative(
    builder: *mut FrocDatasetBuilder,
    id: *const c_char,
    fp_scores: *const f64,
    n_fp: usize,
) -> FrocStatus {
    guard(|| {
        let b = get_mut(builder, "builder")?;
        let id = c_str(id, "id")?;
        let fp = slice(fp_scores, n_fp, "fp_scores")?;
        b.negatives.push(NegativeSubject::new(id, fp.to_vec())?);
        Ok(())
    })
}

/// Consumes the builder, which must not be used or freed afterwards, even
/// when this call fails.
///
/// # Safety
/// `builder` must come from [`froc_dataset_builder_new`].
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_builder_finish(
    builder: *mut FrocDatasetBuilder,
    out: *mut *mut FrocDataset,
) -> FrocStatus {
    guard(|| {
        if builder.is_null() {
            return Err(Failure::Null("builder"));
        }
        let b = Box::from_raw(builder);
        let out = get_mut(out, "out")?;
        let mut seen = std::collections::HashSet::new();
        for id in b
            .positives
            .iter()
            .map(|p| &p.id)
            .chain(b.negatives.iter().map(|n| &n.id))
        {
            if !seen.insert(id.clone()) {
                return Err(FrocError::InvalidData(format!("duplicate subject id '{id}'")).into());
            }
        }
        *out = Box::into_raw(Box::new(FrocDataset(CoreDataset::new(
            b.positives,
            b.negatives,
        ))));
        Ok(())
    })
}

/// # Safety
/// `builder` must come from [`froc_dataset_builder_new`] and not be finished.
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_builder_free(builder: *mut FrocDatasetBuilder) {
    if !builder.is_null() {
        drop(Box::from_raw(builder));
    }
}

/// # Safety
/// `ds` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_free(ds: *mut FrocDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_dataset_summary(
    ds: *const FrocDataset,
    out: *mut FrocSummary,
) -> FrocStatus {
    guard(|| {
        let ds = &get(ds, "dataset")?.0;
        let out = get_mut(out, "out")?;
        *out = FrocSummary {
            k1: ds.k1(),
            k2: ds.k2(),
            total_lesions: ds.total_lesions(),
            tp_marks: ds.total_detected(),
            fp_on_positives: ds.total_fp_positives(),
            fp_on_negatives: ds.total_fp_negatives(),
        };
        Ok(())
    })
}

/// Fits the IDCA model.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_fit(
    ds: *const FrocDataset,
    tp_family: FrocFamily,
    fp_family: FrocFamily,
    out: *mut *mut FrocFit,
) -> FrocStatus {
    guard(|| {
        let out = get_mut(out, "out")?;
        *out = ptr::null_mut();
        let ds = &get(ds, "dataset")?.0;
        let fit = model::fit(ds, tp_family.into(), fp_family.into())?;
        *out = Box::into_raw(Box::new(FrocFit(fit)));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from [`froc_fit`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn froc_fit_free(fit: *mut FrocFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

fn estimate(
    fit: &IdcaFit,
    index: Index,
    alpha: f64,
    logit: bool,
) -> Result<IndexEstimate, FrocError> {
    if logit {
        indices::ci_index_logit(fit, &index, alpha)
    } else {
        indices::ci_index(fit, &index, alpha)
    }
}

/// AFROC area with a delta-method interval; `logit` non-zero uses the logit scale.
///
/// # Safety
/// `fit` must be a live fit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_fit_auc(
    fit: *const FrocFit,
    alpha: f64,
    logit: i32,
    out: *mut FrocIndexEstimate,
) -> FrocStatus {
    guard(|| {
        let fit = &get(fit, "fit")?.0;
        let out = get_mut(out, "out")?;
        *out = (&estimate(fit, Index::Auc, alpha, logit != 0)?).into();
        Ok(())
    })
}

/// LLF at FPF `q` with a delta-method interval.
///
/// # Safety
/// `fit` must be a live fit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_fit_llf(
    fit: *const FrocFit,
    q: f64,
    alpha: f64,
    logit: i32,
    out: *mut FrocIndexEstimate,
) -> FrocStatus {
    guard(|| {
        let fit = &get(fit, "fit")?.0;
        let out = get_mut(out, "out")?;
        *out = (&estimate(fit, Index::LlfAtFpf(q), alpha, logit != 0)?).into();
        Ok(())
    })
}

/// Fitted curve at `n` FPF values. `fpf` and `llf` must each hold `n` values.
///
/// # Safety
/// `fit` must be a live fit handle; output arrays must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn froc_afroc_curve(
    fit: *const FrocFit,
    n: usize,
    fpf: *mut f64,
    llf: *mut f64,
) -> FrocStatus {
    guard(|| {
        let fit = &get(fit, "fit")?.0;
        if fpf.is_null() {
            return Err(Failure::Null("fpf"));
        }
        if llf.is_null() {
            return Err(Failure::Null("llf"));
        }
        let curve = indices::afroc_curve(&fit.params, n)?;
        let xs = std::slice::from_raw_parts_mut(fpf, n);
        let ys = std::slice::from_raw_parts_mut(llf, n);
        for (i, p) in curve.iter().enumerate() {
            xs[i] = p.fpf;
            ys[i] = p.llf;
        }
        Ok(())
    })
}

/// The fit as a JSON document; release with [`froc_string_free`].
///
/// # Safety
/// `fit` must be a live fit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_fit_to_json(
    fit: *const FrocFit,
    out: *mut *mut c_char,
) -> FrocStatus {
    guard(|| {
        let out = get_mut(out, "out")?;
        *out = ptr::null_mut();
        let fit = &get(fit, "fit")?.0;
        let json = fit.to_json()?;
        *out = CString::new(json)
            .map_err(|e| FrocError::InvalidData(e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_empirical_auc(ds: *const FrocDataset, out: *mut f64) -> FrocStatus {
    guard(|| {
        let ds = &get(ds, "dataset")?.0;
        let out = get_mut(out, "out")?;
        *out = empirical::empirical_auc(ds)?;
        Ok(())
    })
}

/// Empirical AFROC area with a bootstrap interval over `b` replicates.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn froc_bootstrap_auc(
    ds: *const FrocDataset,
    b: usize,
    alpha: f64,
    seed: u64,
    out: *mut FrocIndexEstimate,
) -> FrocStatus {
    guard(|| {
        let ds = &get(ds, "dataset")?.0;
        let out = get_mut(out, "out")?;
        *out = (&empirical::bootstrap_ci(ds, b, alpha, seed)?).into();
        Ok(())
    })
}
