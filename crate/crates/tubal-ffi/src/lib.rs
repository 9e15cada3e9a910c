//! C ABI over the tubal library.
//!
//! Conventions: tensors and masks are opaque handles created and destroyed
//! by this library; every function returns a [`TubalStatus`]; results come
//! back through out-pointers. On any non-OK status a human-readable message
//! is available from [`tubal_last_error_message`] until the next failing
//! call on the same thread. Indices are 0-based; the flat data layout is
//! frontal-slice-major, row-major within a slice, matching the `.t3d` file
//! payload order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use tubal::{
    default_lambda, sample_mask, solve_rtc, solve_tc, solve_trpca, tnn, tubal_ranks, AdmmConfig,
    Error, ObservationMask, Problem, SamplingModel, Tensor3, RANK_THRESHOLD,
};

/// Status code returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubalStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    IndexOutOfBounds = 4,
    NumericalFailure = 5,
    IoFailure = 6,
    BadFormat = 7,
}

/// Opaque dense third-order tensor.
pub struct TubalTensor {
    inner: Tensor3,
}

/// Opaque observation mask.
pub struct TubalMask {
    inner: ObservationMask,
}

/// Sampling model selector for mask construction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubalSampling {
    UniformWithoutReplacement = 0,
    Bernoulli = 1,
}

/// Problem selector for the default regularization weight.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubalProblem {
    Rtc = 0,
    Trpca = 1,
}

/// Solver options. `lambda <= 0` selects the theory default for the mask
/// rate; the remaining fields mirror the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TubalSolveOptions {
    pub lambda: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub growth: f64,
    pub eps: f64,
    pub max_iters: usize,
    /// Nonzero enables the conjugate-symmetry halving (the default).
    pub conj_symmetry: i32,
}

impl TubalSolveOptions {
    fn defaults() -> Self {
        let cfg = AdmmConfig::new(1.0);
        TubalSolveOptions {
            lambda: 0.0,
            mu0: cfg.mu0,
            mu_max: cfg.mu_max,
            growth: cfg.growth,
            eps: cfg.eps,
            max_iters: cfg.max_iters,
            conj_symmetry: 1,
        }
    }
}

/// Convergence diagnostics of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TubalSolveReport {
    pub converged: i32,
    pub iters: usize,
    pub residual_l: f64,
    pub residual_e: f64,
    pub residual_feasibility: f64,
    pub wall_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: TubalStatus, message: &str) -> TubalStatus {
    let sanitized: String = message.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
    status
}

fn fail_with(err: Error) -> TubalStatus {
    let status = match &err {
        Error::DimensionMismatch { .. } => TubalStatus::DimensionMismatch,
        Error::IndexOutOfBounds { .. } => TubalStatus::IndexOutOfBounds,
        Error::InvalidRank { .. }
        | Error::InvalidRate(_)
        | Error::InvalidSpec(_)
        | Error::ZeroTensor
        | Error::ZeroReference
        | Error::EmptySet
        | Error::IdenticalInputs => TubalStatus::InvalidArgument,
        Error::NumericalFailure(_)
        | Error::NonFiniteIterate { .. }
        | Error::ImaginaryResidueTooLarge { .. } => TubalStatus::NumericalFailure,
        Error::Io(_) => TubalStatus::IoFailure,
        Error::BadMagic { .. }
        | Error::TruncatedPayload { .. }
        | Error::DimOverflow(..)
        | Error::UnsupportedFormat(_)
        | Error::NonFiniteData(_)
        | Error::Parse(_) => TubalStatus::BadFormat,
    };
    fail(status, &err.to_string())
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn tubal_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, TubalStatus> {
    if ptr.is_null() {
        return Err(fail(TubalStatus::NullArgument, "path is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(TubalStatus::InvalidArgument, "path is not valid UTF-8")),
    }
}

macro_rules! require_nonnull {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            return fail(TubalStatus::NullArgument, concat!($name, " is null"));
        }
    };
}

/// Creates an `n1 x n2 x n3` tensor. `data` may be null for a zero tensor;
/// otherwise it must hold `n1 * n2 * n3` doubles in layout order.
///
/// # Safety
/// `out` must be a valid pointer; `data`, when non-null, must point to at
/// least `n1 * n2 * n3` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_new(
    n1: usize,
    n2: usize,
    n3: usize,
    data: *const f64,
    out: *mut *mut TubalTensor,
) -> TubalStatus {
    require_nonnull!(out, "out");
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return fail(TubalStatus::InvalidArgument, "dimensions must be positive");
    }
    let total = match n1.checked_mul(n2).and_then(|p| p.checked_mul(n3)) {
        Some(t) => t,
        None => return fail(TubalStatus::InvalidArgument, "dimensions overflow"),
    };
    let tensor = if data.is_null() {
        Tensor3::zeros((n1, n2, n3))
    } else {
        let values = std::slice::from_raw_parts(data, total);
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return fail(
                TubalStatus::InvalidArgument,
                &format!("non-finite value at flat index {bad}"),
            );
        }
        match Tensor3::from_vec((n1, n2, n3), values.to_vec()) {
            Ok(t) => t,
            Err(e) => return fail_with(e),
        }
    };
    *out = Box::into_raw(Box::new(TubalTensor { inner: tensor }));
    TubalStatus::Ok
}

/// Releases a tensor handle. Null is a no-op.
///
/// # Safety
/// `t` must be a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_free(t: *mut TubalTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// All pointers must be valid; `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_dims(
    t: *const TubalTensor,
    n1: *mut usize,
    n2: *mut usize,
    n3: *mut usize,
) -> TubalStatus {
    require_nonnull!(t, "tensor");
    require_nonnull!(n1, "n1");
    require_nonnull!(n2, "n2");
    require_nonnull!(n3, "n3");
    let dims = (*t).inner.dims();
    *n1 = dims.0;
    *n2 = dims.1;
    *n3 = dims.2;
    TubalStatus::Ok
}

/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_get(
    t: *const TubalTensor,
    i: usize,
    j: usize,
    k: usize,
    out: *mut f64,
) -> TubalStatus {
    require_nonnull!(t, "tensor");
    require_nonnull!(out, "out");
    let (n1, n2, n3) = (*t).inner.dims();
    if i >= n1 || j >= n2 || k >= n3 {
        return fail(TubalStatus::IndexOutOfBounds, "index out of bounds");
    }
    *out = (*t).inner.get(i, j, k);
    TubalStatus::Ok
}

/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_set(
    t: *mut TubalTensor,
    i: usize,
    j: usize,
    k: usize,
    value: f64,
) -> TubalStatus {
    require_nonnull!(t, "tensor");
    if !value.is_finite() {
        return fail(TubalStatus::InvalidArgument, "value must be finite");
    }
    let (n1, n2, n3) = (*t).inner.dims();
    if i >= n1 || j >= n2 || k >= n3 {
        return fail(TubalStatus::IndexOutOfBounds, "index out of bounds");
    }
    (*t).inner.set(i, j, k, value);
    TubalStatus::Ok
}

/// Copies the flat data (layout order) into `buffer`, which holds `len`
/// doubles; `len` must equal `n1 * n2 * n3`.
///
/// # Safety
/// `buffer` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_copy_data(
    t: *const TubalTensor,
    buffer: *mut f64,
    len: usize,
) -> TubalStatus {
    require_nonnull!(t, "tensor");
    require_nonnull!(buffer, "buffer");
    let data = (*t).inner.as_slice();
    if len != data.len() {
        return fail(
            TubalStatus::DimensionMismatch,
            "buffer length does not match tensor size",
        );
    }
    std::slice::from_raw_parts_mut(buffer, len).copy_from_slice(data);
    TubalStatus::Ok
}

/// Reads a `.t3d` file.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_read(path: *const c_char, out: *mut *mut TubalTensor) -> TubalStatus {
    require_nonnull!(out, "out");
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match tubal::io::read_tensor(&path) {
        Ok(t) => {
            *out = Box::into_raw(Box::new(TubalTensor { inner: t }));
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Writes a `.t3d` file (atomically).
///
/// # Safety
/// `t` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_write(t: *const TubalTensor, path: *const c_char) -> TubalStatus {
    require_nonnull!(t, "tensor");
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match tubal::io::write_tensor(&path, &(*t).inner) {
        Ok(()) => TubalStatus::Ok,
        Err(e) => fail_with(e),
    }
}

/// Draws an observation mask (see the library docs for the two models).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tubal_mask_sample(
    n1: usize,
    n2: usize,
    n3: usize,
    rate: f64,
    model: TubalSampling,
    seed: u64,
    out: *mut *mut TubalMask,
) -> TubalStatus {
    require_nonnull!(out, "out");
    let model = match model {
        TubalSampling::UniformWithoutReplacement => SamplingModel::UniformWithoutReplacement,
        TubalSampling::Bernoulli => SamplingModel::Bernoulli,
    };
    match sample_mask((n1, n2, n3), rate, model, seed) {
        Ok(mask) => {
            *out = Box::into_raw(Box::new(TubalMask { inner: mask }));
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// The full mask (every entry observed).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tubal_mask_full(
    n1: usize,
    n2: usize,
    n3: usize,
    out: *mut *mut TubalMask,
) -> TubalStatus {
    require_nonnull!(out, "out");
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return fail(TubalStatus::InvalidArgument, "dimensions must be positive");
    }
    *out = Box::into_raw(Box::new(TubalMask { inner: ObservationMask::full((n1, n2, n3)) }));
    TubalStatus::Ok
}

/// Number of observed entries.
///
/// # Safety
/// `m` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tubal_mask_len(m: *const TubalMask, out: *mut usize) -> TubalStatus {
    require_nonnull!(m, "mask");
    require_nonnull!(out, "out");
    *out = (*m).inner.len();
    TubalStatus::Ok
}

/// Reads a text mask file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tubal_mask_read(path: *const c_char, out: *mut *mut TubalMask) -> TubalStatus {
    require_nonnull!(out, "out");
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match tubal::io::read_mask(&path) {
        Ok(mask) => {
            *out = Box::into_raw(Box::new(TubalMask { inner: mask }));
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Writes a text mask file (atomically).
///
/// # Safety
/// `m` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tubal_mask_write(m: *const TubalMask, path: *const c_char) -> TubalStatus {
    require_nonnull!(m, "mask");
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match tubal::io::write_mask(&path, &(*m).inner) {
        Ok(()) => TubalStatus::Ok,
        Err(e) => fail_with(e),
    }
}

/// Releases a mask handle. Null is a no-op.
///
/// # Safety
/// `m` must be a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tubal_mask_free(m: *mut TubalMask) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// The theory-backed regularization weight for the given dims and rate.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tubal_default_lambda(
    n1: usize,
    n2: usize,
    n3: usize,
    rate: f64,
    problem: TubalProblem,
    out: *mut f64,
) -> TubalStatus {
    require_nonnull!(out, "out");
    let problem = match problem {
        TubalProblem::Rtc => Problem::Rtc,
        TubalProblem::Trpca => Problem::Trpca,
    };
    match default_lambda((n1, n2, n3), rate, problem) {
        Ok(lambda) => {
            *out = lambda;
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Fills `out` with the default solver options (`lambda = 0`, meaning
/// "choose the theory default at solve time").
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tubal_solve_options_default(out: *mut TubalSolveOptions) -> TubalStatus {
    require_nonnull!(out, "out");
    *out = TubalSolveOptions::defaults();
    TubalStatus::Ok
}

unsafe fn build_config(
    options: *const TubalSolveOptions,
    dims: (usize, usize, usize),
    rate: f64,
    problem: Problem,
) -> Result<AdmmConfig, TubalStatus> {
    let opts = if options.is_null() {
        TubalSolveOptions::defaults()
    } else {
        *options
    };
    let lambda = if opts.lambda > 0.0 {
        opts.lambda
    } else {
        default_lambda(dims, rate, problem).map_err(|e| fail_with(e))?
    };
    let mut cfg = AdmmConfig::new(lambda);
    cfg.mu0 = opts.mu0;
    cfg.mu_max = opts.mu_max;
    cfg.growth = opts.growth;
    cfg.eps = opts.eps;
    cfg.max_iters = opts.max_iters;
    cfg.conj_symmetry = opts.conj_symmetry != 0;
    Ok(cfg)
}

unsafe fn deliver_solution(
    result: tubal::RecoveryResult,
    out_low_rank: *mut *mut TubalTensor,
    out_sparse: *mut *mut TubalTensor,
    report: *mut TubalSolveReport,
) -> TubalStatus {
    if !report.is_null() {
        *report = TubalSolveReport {
            converged: result.converged as i32,
            iters: result.iters,
            residual_l: result.residuals[0],
            residual_e: result.residuals[1],
            residual_feasibility: result.residuals[2],
            wall_seconds: result.wall_time.as_secs_f64(),
        };
    }
    if !out_sparse.is_null() {
        *out_sparse = Box::into_raw(Box::new(TubalTensor { inner: result.e }));
    }
    *out_low_rank = Box::into_raw(Box::new(TubalTensor { inner: result.l }));
    TubalStatus::Ok
}

type SolveFn = fn(&Tensor3, &ObservationMask, &AdmmConfig) -> tubal::Result<tubal::RecoveryResult>;

unsafe fn solve_common(
    x: *const TubalTensor,
    mask: *const TubalMask,
    options: *const TubalSolveOptions,
    out_low_rank: *mut *mut TubalTensor,
    out_sparse: *mut *mut TubalTensor,
    report: *mut TubalSolveReport,
    solve: SolveFn,
) -> TubalStatus {
    require_nonnull!(x, "x");
    require_nonnull!(mask, "mask");
    require_nonnull!(out_low_rank, "out_low_rank");
    let x_ref = &(*x).inner;
    let mask_ref = &(*mask).inner;
    let cfg = match build_config(options, x_ref.dims(), mask_ref.rate(), Problem::Rtc) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| solve(x_ref, mask_ref, &cfg)));
    match outcome {
        Ok(Ok(result)) => deliver_solution(result, out_low_rank, out_sparse, report),
        Ok(Err(e)) => fail_with(e),
        Err(_) => fail(TubalStatus::NumericalFailure, "solver panicked"),
    }
}

/// Robust tensor completion. `options` and `out_sparse` and `report` may be
/// null; `out_low_rank` receives a new handle on success.
///
/// # Safety
/// Handles must be live; out-pointers, when non-null, must be valid.
#[no_mangle]
pub unsafe extern "C" fn tubal_solve_rtc(
    x: *const TubalTensor,
    mask: *const TubalMask,
    options: *const TubalSolveOptions,
    out_low_rank: *mut *mut TubalTensor,
    out_sparse: *mut *mut TubalTensor,
    report: *mut TubalSolveReport,
) -> TubalStatus {
    solve_common(x, mask, options, out_low_rank, out_sparse, report, solve_rtc)
}

/// Tensor completion (no sparse term on observed entries).
///
/// # Safety
/// As for [`tubal_solve_rtc`].
#[no_mangle]
pub unsafe extern "C" fn tubal_solve_tc(
    x: *const TubalTensor,
    mask: *const TubalMask,
    options: *const TubalSolveOptions,
    out_low_rank: *mut *mut TubalTensor,
    out_sparse: *mut *mut TubalTensor,
    report: *mut TubalSolveReport,
) -> TubalStatus {
    solve_common(x, mask, options, out_low_rank, out_sparse, report, solve_tc)
}

/// Tensor robust PCA (fully observed). The default lambda here is the
/// TRPCA one.
///
/// # Safety
/// As for [`tubal_solve_rtc`].
#[no_mangle]
pub unsafe extern "C" fn tubal_solve_trpca(
    x: *const TubalTensor,
    options: *const TubalSolveOptions,
    out_low_rank: *mut *mut TubalTensor,
    out_sparse: *mut *mut TubalTensor,
    report: *mut TubalSolveReport,
) -> TubalStatus {
    require_nonnull!(x, "x");
    require_nonnull!(out_low_rank, "out_low_rank");
    let x_ref = &(*x).inner;
    let cfg = match build_config(options, x_ref.dims(), 1.0, Problem::Trpca) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| solve_trpca(x_ref, &cfg)));
    match outcome {
        Ok(Ok(result)) => deliver_solution(result, out_low_rank, out_sparse, report),
        Ok(Err(e)) => fail_with(e),
        Err(_) => fail(TubalStatus::NumericalFailure, "solver panicked"),
    }
}

/// Tubal rank at a relative threshold; pass a negative threshold for the
/// default (1e-8).
///
/// # Safety
/// `t` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_tubal_rank(
    t: *const TubalTensor,
    threshold: f64,
    out: *mut usize,
) -> TubalStatus {
    require_nonnull!(t, "tensor");
    require_nonnull!(out, "out");
    let threshold = if threshold < 0.0 { RANK_THRESHOLD } else { threshold };
    match tubal_ranks(&(*t).inner, threshold) {
        Ok(report) => {
            *out = report.tubal_rank;
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Tubal nuclear norm.
///
/// # Safety
/// `t` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tubal_tensor_tnn(t: *const TubalTensor, out: *mut f64) -> TubalStatus {
    require_nonnull!(t, "tensor");
    require_nonnull!(out, "out");
    match tnn(&(*t).inner) {
        Ok(value) => {
            *out = value;
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Relative Frobenius error `||a - b||_F / ||b||_F`.
///
/// # Safety
/// Both handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tubal_rel_error(
    a: *const TubalTensor,
    b: *const TubalTensor,
    out: *mut f64,
) -> TubalStatus {
    require_nonnull!(a, "a");
    require_nonnull!(b, "b");
    require_nonnull!(out, "out");
    match tubal::experiments::rel_error(&(*a).inner, &(*b).inner) {
        Ok(value) => {
            *out = value;
            TubalStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}
