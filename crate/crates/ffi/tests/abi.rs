use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ggfit_ffi::*;

fn last_error() -> String {
    let p = ggfit_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn gg_sample(m: usize, s: f64, n: usize, seed: u64) -> *mut GgfitSample {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ggfit_sample_gg(m, s, 0.5, n, seed, 0, &mut out) }, GgfitStatus::Ok);
    out
}

#[test]
fn version_matches_the_library() {
    let v = unsafe { CStr::from_ptr(ggfit_version()) }.to_str().unwrap();
    assert_eq!(v, ggfit::VERSION);
}

#[test]
fn sample_round_trip_and_entropy_agree_with_the_library() {
    let data = [0.0, 0.0, 1.0, 0.5, -2.0, 3.0, 0.25, -1.0];
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { ggfit_sample_from_rows(data.as_ptr(), 4, 2, &mut handle) }, GgfitStatus::Ok);
    let (mut n, mut m) = (0, 0);
    assert_eq!(unsafe { ggfit_sample_shape(handle, &mut n, &mut m) }, GgfitStatus::Ok);
    assert_eq!((n, m), (4, 2));
    let mut back = [0.0; 8];
    assert_eq!(unsafe { ggfit_sample_copy(handle, back.as_mut_ptr(), 8) }, GgfitStatus::Ok);
    assert_eq!(back, data);
    assert_eq!(unsafe { ggfit_sample_copy(handle, back.as_mut_ptr(), 7) }, GgfitStatus::InvalidArgument);

    let mut h = 0.0;
    assert_eq!(unsafe { ggfit_knn_entropy(handle, 2, &mut h) }, GgfitStatus::Ok);
    let direct = ggfit::knn_entropy(&ggfit::Sample::new(data.to_vec(), 2).unwrap(), 2).unwrap().value;
    assert_eq!(h.to_bits(), direct.to_bits());
    unsafe { ggfit_sample_free(handle) };

    let gg = gg_sample(2, 1.5, 300, 9);
    let mut t = 0.0;
    assert_eq!(unsafe { ggfit_test_statistic(gg, 1.5, 1, &mut t) }, GgfitStatus::Ok);
    let lib = ggfit::GGParams::isotropic(2, 1.5).unwrap().sample(300, ggfit::RandomStream::new(9, 0)).unwrap();
    assert_eq!(t.to_bits(), ggfit::test_statistic(&lib, 1.5, 1).unwrap().to_bits());
    unsafe { ggfit_sample_free(gg) };
}

#[test]
fn errors_map_to_status_codes() {
    let dup = [1.0, 2.0, 1.0];
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { ggfit_sample_from_rows(dup.as_ptr(), 3, 1, &mut handle) }, GgfitStatus::Ok);
    let mut h = 0.0;
    assert_eq!(unsafe { ggfit_knn_entropy(handle, 1, &mut h) }, GgfitStatus::DuplicatePoints);
    assert!(last_error().contains("rows 0 and 2"), "{}", last_error());
    assert_eq!(unsafe { ggfit_knn_entropy(handle, 5, &mut h) }, GgfitStatus::InvalidArgument);
    unsafe { ggfit_sample_free(handle) };

    assert_eq!(unsafe { ggfit_knn_entropy(ptr::null(), 1, &mut h) }, GgfitStatus::NullPointer);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ggfit_sample_gg(2, -1.0, 0.5, 10, 0, 0, &mut out) }, GgfitStatus::InvalidArgument);
    assert!(out.is_null());
    assert_eq!(unsafe { ggfit_sample_student_t(1, 3.0, 10, 0, 0, ptr::null_mut()) }, GgfitStatus::NullPointer);

    let bad = CString::new("{\"format\": 1}").unwrap();
    let mut table = ptr::null_mut();
    assert_eq!(unsafe { ggfit_table_from_json(bad.as_ptr(), &mut table) }, GgfitStatus::InvalidArgument);

    // A successful call clears the message.
    let ok = gg_sample(1, 2.0, 10, 1);
    assert!(ggfit_last_error_message().is_null());
    unsafe {
        ggfit_sample_free(ok);
        ggfit_sample_free(ptr::null_mut());
        ggfit_table_free(ptr::null_mut());
        ggfit_string_free(ptr::null_mut());
    }
}

#[test]
fn tables_and_tests_through_the_abi() {
    let alphas = [0.05, 0.1];
    let mut table = ptr::null_mut();
    let status = unsafe { ggfit_table_simulate(2, 2.0, 400, 1, alphas.as_ptr(), 2, 200, 11, 0, &mut table) };
    assert_eq!(status, GgfitStatus::Ok);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ggfit_table_to_json(table, &mut json) }, GgfitStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { ggfit_table_from_json(json, &mut copy) }, GgfitStatus::Ok);
    unsafe { ggfit_string_free(json) };
    let lib = ggfit::critical_values(2, 2.0, 400, 1, &alphas, 200, ggfit::RandomStream::new(11, 0)).unwrap();
    assert_eq!(text, lib.to_json().unwrap());

    let st = {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { ggfit_sample_student_t(2, 3.0, 400, 5, 0, &mut out) }, GgfitStatus::Ok);
        out
    };
    let mut a = std::mem::MaybeUninit::<GgfitOutcome>::uninit();
    assert_eq!(unsafe { ggfit_run_test(st, 2.0, 1, 0.05, copy, GgfitTail::Left, a.as_mut_ptr()) }, GgfitStatus::Ok);
    let a = unsafe { a.assume_init() };
    let mut b = std::mem::MaybeUninit::<GgfitOutcome>::uninit();
    let status = unsafe { ggfit_run_test_fresh(st, 2.0, 1, 0.05, 200, 11, 0, GgfitTail::Left, b.as_mut_ptr()) };
    assert_eq!(status, GgfitStatus::Ok);
    let b = unsafe { b.assume_init() };
    assert_eq!(a.critical_lower.to_bits(), b.critical_lower.to_bits());
    assert_eq!(a.reject, a.statistic <= a.critical_lower);
    assert_eq!((a.n, a.m, a.k), (400, 2, 1));
    assert!(a.critical_upper.is_nan());

    let mut two = std::mem::MaybeUninit::<GgfitOutcome>::uninit();
    let status = unsafe { ggfit_run_test(st, 2.0, 1, 0.1, table, GgfitTail::TwoSided, two.as_mut_ptr()) };
    assert_eq!(status, GgfitStatus::Ok);
    let two = unsafe { two.assume_init() };
    assert!(two.critical_lower < two.critical_upper);

    let other = gg_sample(2, 2.0, 399, 1);
    let mut o = std::mem::MaybeUninit::<GgfitOutcome>::uninit();
    let status = unsafe { ggfit_run_test(other, 2.0, 1, 0.05, table, GgfitTail::Left, o.as_mut_ptr()) };
    assert_eq!(status, GgfitStatus::Lookup);

    unsafe {
        ggfit_sample_free(other);
        ggfit_sample_free(st);
        ggfit_table_free(copy);
        ggfit_table_free(table);
    }
}

fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include").join("ggfit.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["ggfit_sample_gg", "ggfit_run_test_fresh", "GGFIT_STATUS_DUPLICATE_POINTS", "typedef struct GgfitSample"] {
        assert!(text.contains(name), "{name} missing from header");
    }

    // Test builds leave the static library beside the test binary in deps/.
    let lib = [artifact_dir().join("deps"), artifact_dir()]
        .iter()
        .map(|d| d.join("libggfit_ffi.a"))
        .find(|p| p.exists())
        .expect("static library built alongside the tests");
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests").join("c").join("smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(stdout.trim(), format!("ggfit {} ok", ggfit::VERSION));
}
