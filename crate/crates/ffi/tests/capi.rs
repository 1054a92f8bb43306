use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qpke_sim_ffi::*;

fn last_error() -> String {
    let p = qs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut libc::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { qs_string_free(p) };
    s
}

#[test]
fn everlasting_round_trip_and_single_use_key() {
    unsafe {
        let rng = qs_rng_new(1, 0);
        for m in [0u8, 1] {
            let mut kp = ptr::null_mut();
            assert_eq!(qs_ev_keygen(8, 8, rng, &mut kp), QsStatus::Ok);
            let mut ct = ptr::null_mut();
            assert_eq!(qs_ev_encrypt(kp, m, rng, &mut ct), QsStatus::Ok);
            let mut out = 7u8;
            assert_eq!(qs_ev_decrypt(kp, ct, &mut out), QsStatus::Ok);
            assert_eq!(out, m);
            assert!(take_string(qs_ev_ciphertext_to_string(ct)).starts_with("EV "));
            let mut again = ptr::null_mut();
            assert_eq!(qs_ev_encrypt(kp, m, rng, &mut again), QsStatus::KeyConsumed);
            assert!(again.is_null());
            qs_ev_ciphertext_free(ct);
            qs_ev_keypair_free(kp);
        }
        qs_rng_free(rng);
    }
}

#[test]
fn invalid_arguments_report_errors() {
    unsafe {
        let rng = qs_rng_new(2, 0);
        let mut kp = ptr::null_mut();
        assert_eq!(qs_ev_keygen(0, 8, rng, &mut kp), QsStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(qs_ev_keygen(8, 8, ptr::null_mut(), &mut kp), QsStatus::NullPointer);
        assert_eq!(qs_ev_keygen(8, 8, rng, &mut kp), QsStatus::Ok);
        let mut ct = ptr::null_mut();
        assert_eq!(qs_ev_encrypt(kp, 2, rng, &mut ct), QsStatus::InvalidArgument);
        assert!(last_error().contains("0 or 1"));
        assert_eq!(qs_ev_ciphertext_is_abort(ptr::null()), 0);
        assert!(qs_ev_ciphertext_to_string(ptr::null()).is_null());
        qs_ev_keypair_free(kp);
        qs_ev_keypair_free(ptr::null_mut());
        qs_rng_free(rng);
    }
}

#[test]
fn qkd_transcript_through_bytes() {
    unsafe {
        let rng = qs_rng_new(3, 0);
        let mut t = ptr::null_mut();
        assert_eq!(qs_qkd_session(2, 8, rng, &mut t), QsStatus::Ok);
        assert_eq!(qs_transcript_agree(t), 1);
        let alice = take_string(qs_transcript_outcome(t, QsParty::Alice));
        assert!(alice.starts_with("key "));
        let mut buf = QsBuffer { data: ptr::null_mut(), len: 0 };
        assert_eq!(qs_transcript_encode(t, &mut buf), QsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(qs_transcript_decode(buf.data, buf.len, &mut back), QsStatus::Ok);
        assert_eq!(take_string(qs_transcript_outcome(back, QsParty::Bob)), alice);
        let mut bad = ptr::null_mut();
        assert_eq!(qs_transcript_decode(buf.data, 3, &mut bad), QsStatus::Parse);
        qs_buffer_free(buf);
        qs_transcript_free(back);
        qs_transcript_free(t);
        qs_rng_free(rng);
    }
}

#[test]
fn experiment_runs_from_config_text() {
    let cfg = CString::new("experiment = qkd\nscenario = identity\nlambda = 2\ntrials = 20\nseed = 5\n").unwrap();
    let mut report = ptr::null_mut();
    let status = unsafe { qs_run_experiment(cfg.as_ptr(), &mut report) };
    assert_eq!(status, QsStatus::Ok);
    let text = take_string(report);
    assert!(text.lines().any(|l| l == "agreements 20/20"), "{text}");

    let bad = CString::new("experiment = nope\n").unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { qs_run_experiment(bad.as_ptr(), &mut report) }, QsStatus::InvalidArgument);
    assert!(report.is_null());
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/qpke_sim.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct QsRng QsRng;"));
    assert!(header.contains("QS_STATUS_KEY_CONSUMED = 4"));
}

// `cargo test` links the rlib only; build the archive into the same target
// directory so dependencies are reused.
fn static_lib() -> PathBuf {
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().to_path_buf();
    let status = Command::new(env!("CARGO"))
        .args(["build", "--lib", "--quiet", "--manifest-path"])
        .arg(crate_dir().join("Cargo.toml"))
        .arg("--target-dir")
        .arg(&target)
        .status()
        .expect("cargo runs");
    assert!(status.success());
    target.join("debug/libqpke_sim_ffi.a")
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = static_lib();
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("qpke_sim_smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
