//! Exercises the C ABI the way a foreign binding would: through the raw
//! extern functions, handles, status codes, and the error-message slot.

use std::ffi::{CStr, CString};
use std::ptr;

use tubal_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tubal_last_error_message()).to_string_lossy().into_owned() }
}

unsafe fn make_tensor(n1: usize, n2: usize, n3: usize, data: Option<&[f64]>) -> *mut TubalTensor {
    let mut handle: *mut TubalTensor = ptr::null_mut();
    let status = tubal_tensor_new(
        n1,
        n2,
        n3,
        data.map_or(ptr::null(), |d| d.as_ptr()),
        &mut handle,
    );
    assert_eq!(status, TubalStatus::Ok, "{}", last_error());
    handle
}

/// A seeded Gaussian low-tubal-rank cube, handed over through the C
/// surface as a flat buffer.
unsafe fn low_rank_cube(n: usize, rank: usize, seed: u64) -> *mut TubalTensor {
    let spec = tubal::experiments::SyntheticSpec::cubic(n, rank, 1.0, 0.0, seed);
    let instance = tubal::experiments::gen_instance(&spec).unwrap();
    make_tensor(n, n, n, Some(instance.l0.as_slice()))
}

#[test]
fn tensor_lifecycle_and_data_access() {
    unsafe {
        let data: Vec<f64> = (0..24).map(|v| v as f64 / 3.0).collect();
        let t = make_tensor(2, 3, 4, Some(&data));

        let (mut n1, mut n2, mut n3) = (0usize, 0usize, 0usize);
        assert_eq!(tubal_tensor_dims(t, &mut n1, &mut n2, &mut n3), TubalStatus::Ok);
        assert_eq!((n1, n2, n3), (2, 3, 4));

        let mut value = 0.0;
        assert_eq!(tubal_tensor_get(t, 0, 0, 0, &mut value), TubalStatus::Ok);
        assert_eq!(value, 0.0);
        assert_eq!(tubal_tensor_get(t, 1, 2, 3, &mut value), TubalStatus::Ok);
        assert_eq!(value, 23.0 / 3.0);

        assert_eq!(tubal_tensor_set(t, 0, 1, 2, 7.5), TubalStatus::Ok);
        assert_eq!(tubal_tensor_get(t, 0, 1, 2, &mut value), TubalStatus::Ok);
        assert_eq!(value, 7.5);

        let mut buffer = vec![0.0f64; 24];
        assert_eq!(tubal_tensor_copy_data(t, buffer.as_mut_ptr(), 24), TubalStatus::Ok);
        assert_eq!(buffer[23], 23.0 / 3.0);

        assert_eq!(
            tubal_tensor_copy_data(t, buffer.as_mut_ptr(), 23),
            TubalStatus::DimensionMismatch
        );
        assert_eq!(tubal_tensor_get(t, 2, 0, 0, &mut value), TubalStatus::IndexOutOfBounds);
        assert!(!last_error().is_empty());

        tubal_tensor_free(t);
        tubal_tensor_free(ptr::null_mut()); // explicit no-op
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut out: *mut TubalTensor = ptr::null_mut();
        assert_eq!(tubal_tensor_new(2, 2, 2, ptr::null(), ptr::null_mut()), TubalStatus::NullArgument);
        assert_eq!(tubal_tensor_new(0, 2, 2, ptr::null(), &mut out), TubalStatus::InvalidArgument);
        assert!(last_error().contains("positive"));

        let mut lambda = 0.0;
        assert_eq!(
            tubal_default_lambda(10, 10, 10, 0.0, TubalProblem::Rtc, &mut lambda),
            TubalStatus::InvalidArgument
        );

        let nan_payload = [0.0, f64::NAN];
        assert_eq!(
            tubal_tensor_new(2, 1, 1, nan_payload.as_ptr(), &mut out),
            TubalStatus::InvalidArgument
        );
        assert!(last_error().contains("non-finite"));
    }
}

#[test]
fn file_roundtrip_through_the_abi() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("t.t3d").to_str().unwrap()).unwrap();

        let data: Vec<f64> = (0..12).map(|v| (v as f64).sin()).collect();
        let t = make_tensor(3, 2, 2, Some(&data));
        assert_eq!(tubal_tensor_write(t, path.as_ptr()), TubalStatus::Ok);

        let mut back: *mut TubalTensor = ptr::null_mut();
        assert_eq!(tubal_tensor_read(path.as_ptr(), &mut back), TubalStatus::Ok);
        let mut buffer = vec![0.0f64; 12];
        assert_eq!(tubal_tensor_copy_data(back, buffer.as_mut_ptr(), 12), TubalStatus::Ok);
        assert_eq!(buffer, data);

        let missing = CString::new(dir.path().join("missing.t3d").to_str().unwrap()).unwrap();
        let mut nope: *mut TubalTensor = ptr::null_mut();
        assert_eq!(tubal_tensor_read(missing.as_ptr(), &mut nope), TubalStatus::IoFailure);

        tubal_tensor_free(t);
        tubal_tensor_free(back);
    }
}

#[test]
fn mask_sampling_and_files() {
    unsafe {
        let mut mask: *mut TubalMask = ptr::null_mut();
        assert_eq!(
            tubal_mask_sample(10, 10, 10, 0.3, TubalSampling::UniformWithoutReplacement, 7, &mut mask),
            TubalStatus::Ok
        );
        let mut len = 0usize;
        assert_eq!(tubal_mask_len(mask, &mut len), TubalStatus::Ok);
        assert_eq!(len, 300);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("m.txt").to_str().unwrap()).unwrap();
        assert_eq!(tubal_mask_write(mask, path.as_ptr()), TubalStatus::Ok);
        let mut back: *mut TubalMask = ptr::null_mut();
        assert_eq!(tubal_mask_read(path.as_ptr(), &mut back), TubalStatus::Ok);
        let mut len2 = 0usize;
        assert_eq!(tubal_mask_len(back, &mut len2), TubalStatus::Ok);
        assert_eq!(len2, 300);

        let mut bad: *mut TubalMask = ptr::null_mut();
        assert_eq!(
            tubal_mask_sample(4, 4, 4, 1.5, TubalSampling::Bernoulli, 0, &mut bad),
            TubalStatus::InvalidArgument
        );

        tubal_mask_free(mask);
        tubal_mask_free(back);
    }
}

#[test]
fn default_lambda_matches_formula() {
    unsafe {
        let mut lambda = 0.0;
        assert_eq!(
            tubal_default_lambda(100, 100, 100, 0.9, TubalProblem::Rtc, &mut lambda),
            TubalStatus::Ok
        );
        assert!((lambda - 1.0 / 9000f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            tubal_default_lambda(100, 100, 100, 0.5, TubalProblem::Trpca, &mut lambda),
            TubalStatus::Ok
        );
        assert!((lambda - 0.01).abs() < 1e-15);
    }
}

#[test]
fn trpca_separates_clean_low_rank() {
    unsafe {
        let x = low_rank_cube(10, 2, 3);
        let mut opts = TubalSolveOptions {
            lambda: 0.0,
            mu0: 0.0,
            mu_max: 0.0,
            growth: 0.0,
            eps: 0.0,
            max_iters: 0,
            conj_symmetry: 1,
        };
        assert_eq!(tubal_solve_options_default(&mut opts), TubalStatus::Ok);
        assert_eq!(opts.max_iters, 500);

        let mut l: *mut TubalTensor = ptr::null_mut();
        let mut e: *mut TubalTensor = ptr::null_mut();
        let mut report = TubalSolveReport {
            converged: 0,
            iters: 0,
            residual_l: 0.0,
            residual_e: 0.0,
            residual_feasibility: 0.0,
            wall_seconds: 0.0,
        };
        let status = tubal_solve_trpca(x, &opts, &mut l, &mut e, &mut report);
        assert_eq!(status, TubalStatus::Ok, "{}", last_error());
        assert_eq!(report.converged, 1);

        let mut rel = f64::INFINITY;
        assert_eq!(tubal_rel_error(l, x, &mut rel), TubalStatus::Ok);
        assert!(rel <= 1e-6, "rel error {rel:.3e}");

        let mut rank = usize::MAX;
        assert_eq!(tubal_tensor_tubal_rank(l, -1.0, &mut rank), TubalStatus::Ok);
        assert!(rank <= 2, "rank {rank}");

        let mut nuclear = 0.0;
        assert_eq!(tubal_tensor_tnn(l, &mut nuclear), TubalStatus::Ok);
        assert!(nuclear > 0.0);

        tubal_tensor_free(x);
        tubal_tensor_free(l);
        tubal_tensor_free(e);
    }
}

#[test]
fn rtc_recovers_under_mask_and_reports_mismatch() {
    unsafe {
        let x = low_rank_cube(12, 2, 5);
        let mut mask: *mut TubalMask = ptr::null_mut();
        assert_eq!(
            tubal_mask_sample(12, 12, 12, 0.8, TubalSampling::UniformWithoutReplacement, 11, &mut mask),
            TubalStatus::Ok
        );

        let mut l: *mut TubalTensor = ptr::null_mut();
        let status = tubal_solve_rtc(x, mask, ptr::null(), &mut l, ptr::null_mut(), ptr::null_mut());
        assert_eq!(status, TubalStatus::Ok, "{}", last_error());
        let mut rel = f64::INFINITY;
        assert_eq!(tubal_rel_error(l, x, &mut rel), TubalStatus::Ok);
        assert!(rel <= 1e-4, "rel error {rel:.3e}");

        // mismatched mask dims surface as a dimension error with a message
        let mut small_mask: *mut TubalMask = ptr::null_mut();
        assert_eq!(tubal_mask_full(4, 4, 4, &mut small_mask), TubalStatus::Ok);
        let mut l2: *mut TubalTensor = ptr::null_mut();
        assert_eq!(
            tubal_solve_tc(x, small_mask, ptr::null(), &mut l2, ptr::null_mut(), ptr::null_mut()),
            TubalStatus::DimensionMismatch
        );
        assert!(last_error().contains("(12, 12, 12)"));

        tubal_tensor_free(x);
        tubal_tensor_free(l);
        tubal_mask_free(mask);
        tubal_mask_free(small_mask);
    }
}

#[test]
fn generated_header_declares_the_surface() {
    let header_path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/tubal.h");
    let header = std::fs::read_to_string(header_path).expect("cbindgen header missing");
    for needle in [
        "typedef struct TubalTensor TubalTensor;",
        "typedef struct TubalMask TubalMask;",
        "TUBAL_STATUS_OK",
        "tubal_solve_rtc",
        "tubal_solve_tc",
        "tubal_solve_trpca",
        "tubal_tensor_read",
        "tubal_mask_sample",
        "tubal_last_error_message",
    ] {
        assert!(header.contains(needle), "header lacks {needle:?}");
    }
}
