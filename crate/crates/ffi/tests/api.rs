use std::ffi::CStr;
use std::ptr;

use gms_ffi::*;

fn last_error() -> Option<String> {
    let p = gms_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn haystack(n1: usize, n0: usize, dim: usize, d: usize, seed: u64) -> (*mut GmsPoints, Vec<f64>) {
    let mut pts = ptr::null_mut();
    let mut basis = vec![0.0; dim * d];
    let st = unsafe {
        gms_haystack(n1, n0, dim, d, 0.0, seed, &mut pts, basis.as_mut_ptr(), basis.len())
    };
    assert_eq!(st, GmsStatus::Ok);
    (pts, basis)
}

#[test]
fn recover_haystack_end_to_end() {
    let (pts, truth) = haystack(125, 125, 10, 5, 3);
    let mut n = 0;
    let mut dim = 0;
    assert_eq!(unsafe { gms_points_shape(pts, &mut n, &mut dim) }, GmsStatus::Ok);
    assert_eq!((n, dim), (250, 10));

    let mut res = ptr::null_mut();
    assert_eq!(unsafe { gms_recover(pts, 5, 0.0, 0, &mut res) }, GmsStatus::Ok);
    let (mut amb, mut d) = (0, 0);
    assert_eq!(unsafe { gms_result_dims(res, &mut amb, &mut d) }, GmsStatus::Ok);
    assert_eq!((amb, d), (10, 5));

    let mut basis = vec![0.0; 50];
    assert_eq!(unsafe { gms_result_basis(res, basis.as_mut_ptr(), 50) }, GmsStatus::Ok);
    let mut err = f64::NAN;
    let st = unsafe { gms_recovery_error(basis.as_ptr(), 5, truth.as_ptr(), 5, 10, &mut err) };
    assert_eq!(st, GmsStatus::Ok);
    assert!(err < 1e-8, "{err}");

    let mut q = vec![0.0; 100];
    assert_eq!(unsafe { gms_result_q(res, q.as_mut_ptr(), 100) }, GmsStatus::Ok);
    let trace: f64 = (0..10).map(|i| q[i * 10 + i]).sum();
    assert!((trace - 1.0).abs() < 1e-12);

    let (mut its, mut conv, mut obj) = (0, false, f64::NAN);
    assert_eq!(unsafe { gms_result_solve_info(res, &mut its, &mut conv, &mut obj) }, GmsStatus::Ok);
    assert!(its > 0 && its <= 100);
    assert!(obj.is_finite() && obj > 0.0);

    unsafe {
        gms_result_free(res);
        gms_points_free(pts);
    }
}

#[test]
fn dimension_is_estimated_when_zero() {
    let (pts, _) = haystack(125, 125, 10, 5, 4);
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { gms_recover(pts, 0, 0.0, 0, &mut res) }, GmsStatus::Ok);
    let mut d = 0;
    unsafe { gms_result_dims(res, ptr::null_mut(), &mut d) };
    assert_eq!(d, 5);
    unsafe {
        gms_result_free(res);
        gms_points_free(pts);
    }
}

#[test]
fn row_major_points_round_trip() {
    let data = [1.0, 0.0, 0.0, 2.0, 3.0, 4.0];
    let mut pts = ptr::null_mut();
    assert_eq!(unsafe { gms_points_new(data.as_ptr(), 3, 2, &mut pts) }, GmsStatus::Ok);
    let (mut n, mut dim) = (0, 0);
    unsafe { gms_points_shape(pts, &mut n, &mut dim) };
    assert_eq!((n, dim), (3, 2));
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { gms_recover(pts, 1, 0.0, 0, &mut res) }, GmsStatus::Ok);
    unsafe {
        gms_result_free(res);
        gms_points_free(pts);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut pts = ptr::null_mut();
    let st = unsafe { gms_points_new(ptr::null(), 3, 2, &mut pts) };
    assert_eq!(st, GmsStatus::NullPointer);
    assert!(pts.is_null());
    assert!(last_error().unwrap().contains("data"));

    let data = [f64::NAN, 1.0];
    assert_eq!(unsafe { gms_points_new(data.as_ptr(), 1, 2, &mut pts) }, GmsStatus::Numerical);

    assert_eq!(unsafe { gms_points_new(data.as_ptr(), 1, 0, &mut pts) }, GmsStatus::InvalidArgument);

    let mut res = ptr::null_mut();
    assert_eq!(unsafe { gms_recover(ptr::null(), 1, 0.0, 0, &mut res) }, GmsStatus::NullPointer);

    let (pts, _) = haystack(20, 20, 4, 2, 5);
    assert_eq!(unsafe { gms_recover(pts, 4, 0.0, 0, &mut res) }, GmsStatus::InvalidArgument);
    assert!(res.is_null());
    assert!(last_error().is_some());

    assert_eq!(unsafe { gms_recover(pts, 2, 0.0, 0, &mut res) }, GmsStatus::Ok);
    assert!(last_error().is_none(), "success clears the message");
    let mut small = [0.0; 3];
    assert_eq!(
        unsafe { gms_result_basis(res, small.as_mut_ptr(), small.len()) },
        GmsStatus::BufferTooSmall
    );
    unsafe {
        gms_result_free(res);
        gms_points_free(pts);
    }
}

#[test]
fn last_error_is_thread_local() {
    let mut pts = ptr::null_mut();
    unsafe { gms_points_new(ptr::null(), 1, 1, &mut pts) };
    assert!(last_error().is_some());
    std::thread::spawn(|| assert!(last_error().is_none()))
        .join()
        .unwrap();
}

#[test]
fn free_accepts_null() {
    unsafe {
        gms_points_free(ptr::null_mut());
        gms_result_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_manifest() {
    let v = unsafe { CStr::from_ptr(gms_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gms.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from gms.h");
    }
    assert!(header.contains("GMS_STATUS_BUFFER_TOO_SMALL = 4"));
}

#[test]
fn c_program_links_against_static_library() {
    if std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler on PATH; skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let archive = profile_dir.join("libgms_ffi.a");
    assert!(archive.exists(), "{} not built", archive.display());
    let manifest = env!("CARGO_MANIFEST_DIR");
    let out = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("gms_smoke");
    let status = std::process::Command::new("cc")
        .arg(format!("{manifest}/examples/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = std::process::Command::new(&out).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}");
    assert!(stdout.contains("expected failure: points is null"), "{stdout}");
}
