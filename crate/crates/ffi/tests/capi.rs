use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use amac_ffi::*;

fn last_error() -> String {
    let p = amac_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn example4_bounds_and_vertex() {
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(amac_channel_example4(&mut w), AmacStatus::Ok);
        assert_eq!(amac_channel_num_senders(w), 2);
        let input = [0.5; 4];
        let mut b = [0.0; 3];
        assert_eq!(amac_polytope_bounds(w, input.as_ptr(), 4, b.as_mut_ptr(), 3), AmacStatus::Ok);
        assert!((b[0] - 0.655639).abs() < 1e-6 && (b[1] - 0.655639).abs() < 1e-6);
        assert!((b[2] - 0.704434).abs() < 1e-6);
        let order = [0usize, 1];
        let mut v = [0.0; 2];
        assert_eq!(amac_vertex(w, input.as_ptr(), 4, order.as_ptr(), v.as_mut_ptr()), AmacStatus::Ok);
        assert!((v[0] - 0.048795).abs() < 1e-6 && (v[1] - 0.655639).abs() < 1e-6);
        let mut member = -1;
        assert_eq!(amac_union_contains(w, v.as_ptr(), &mut member), AmacStatus::Ok);
        assert_eq!(member, 1);
        amac_channel_free(w);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    unsafe {
        let mut w = ptr::null_mut();
        // second row sums to 0.9
        let t = [1.0, 0.0, 0.5, 0.4];
        let inputs = [2usize];
        assert_eq!(amac_channel_new(inputs.as_ptr(), 1, 2, t.as_ptr(), 4, &mut w), AmacStatus::InvalidChannel);
        assert!(w.is_null());
        assert!(last_error().contains("row 1"));

        assert_eq!(amac_channel_example4(ptr::null_mut()), AmacStatus::NullPointer);
        let mut b = [0.0; 3];
        assert_eq!(amac_polytope_bounds(ptr::null(), [0.5; 4].as_ptr(), 4, b.as_mut_ptr(), 3), AmacStatus::NullPointer);

        assert_eq!(amac_channel_bsc(0.1, &mut w), AmacStatus::Ok);
        assert!(amac_last_error_message().is_null());
        assert_eq!(amac_polytope_bounds(w, [0.5; 2].as_ptr(), 2, b.as_mut_ptr(), 3), AmacStatus::ShapeMismatch);
        assert_eq!(amac_polytope_bounds(w, [0.7, 0.7].as_ptr(), 2, b.as_mut_ptr(), 1), AmacStatus::InvalidDistribution);
        let order = [1usize];
        assert_eq!(amac_vertex(w, [0.5; 2].as_ptr(), 2, order.as_ptr(), b.as_mut_ptr()), AmacStatus::InvalidArgument);
        amac_channel_free(w);
        amac_channel_free(ptr::null_mut());
    }
}

#[test]
fn runs_json_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new(
        r#"{"seed": 4, "channel": {"kind": "named", "name": "example4"},
            "task": {"kind": "converse", "n": 8, "rates": [0.25, 0.25], "input": [[0.5, 0.5], [0.5, 0.5]]}}"#,
    )
    .unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(amac_run_config(cfg.as_ptr(), out.as_ptr(), &mut s), AmacStatus::Ok);
        let summary: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        amac_string_free(s);
        assert!(PathBuf::from(summary["csv"].as_str().unwrap()).exists());

        let bad = CString::new(r#"{"channel": {"kind": "named", "name": "example4"}}"#).unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(amac_run_config(bad.as_ptr(), out.as_ptr(), &mut s), AmacStatus::Config);
        assert!(s.is_null());
        assert!(last_error().contains("seed") || last_error().contains("task"));
    }
}

#[test]
fn c_program_links_against_the_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/amac.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["amac_channel_new", "amac_polytope_bounds", "amac_last_error_message", "amac_run_config"] {
        assert!(text.contains(f), "header lacks {f}");
    }
    // target/<profile>/deps/<test> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libamac_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
