use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use udlearn_ffi::*;

const THE_BOOK: &str = "1\tthe\t_\tDET\t_\t_\t2\tdet\t_\t_\n2\tbook\t_\tNOUN\t_\t_\t0\troot\t_\t_\n\n";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/toy")
        .join(name)
}

fn corpus(text: &str) -> *mut UdlCorpus {
    let text = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { udl_corpus_parse(text.as_ptr(), &mut out) }, UdlStatus::Ok);
    out
}

fn last_error() -> String {
    let p = udl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn round_trip_and_transform() {
    unsafe {
        let c = corpus(THE_BOOK);
        assert_eq!(udl_corpus_len(c), 1);
        assert_eq!(udl_corpus_token_count(c), 2);

        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(udl_corpus_write(c, &mut text), UdlStatus::Ok);
        assert_eq!(CStr::from_ptr(text).to_str().unwrap(), THE_BOOK);
        udl_string_free(text);

        let name = CString::new("det").unwrap();
        let mut out = ptr::null_mut();
        let mut stats = UdlTransformStats::default();
        assert_eq!(udl_transform(c, name.as_ptr(), &mut out, &mut stats), UdlStatus::Ok);
        assert!(stats.changed);
        assert_eq!(stats.arcs_rewritten, 1);

        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(udl_corpus_write(out, &mut text), UdlStatus::Ok);
        let written = CStr::from_ptr(text).to_str().unwrap().to_string();
        assert!(written.contains("1\tthe\t_\tDET\t_\t_\t0\troot"));
        assert!(written.contains("2\tbook\t_\tNOUN\t_\t_\t1\tdet"));
        udl_string_free(text);

        let mut m = UdlMetrics::default();
        assert_eq!(udl_metrics(c, &mut m), UdlStatus::Ok);
        assert!(m.has_distance);
        assert_eq!(m.distance, 1.0);
        assert_eq!(m.derivation_complexity, 6);

        udl_corpus_free(out);
        udl_corpus_free(c);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        let bad = CString::new("1\tthe\t_\n").unwrap();
        assert_eq!(udl_corpus_parse(bad.as_ptr(), &mut out), UdlStatus::Format);
        assert!(last_error().contains("line 1"));
        assert!(out.is_null());

        assert_eq!(udl_corpus_parse(ptr::null(), &mut out), UdlStatus::NullPointer);
        let c = corpus(THE_BOOK);
        let name = CString::new("verbgroup").unwrap();
        assert_eq!(
            udl_transform(c, name.as_ptr(), &mut out, ptr::null_mut()),
            UdlStatus::InvalidArgument
        );
        let missing = CString::new("/nonexistent/model.txt").unwrap();
        let mut model = ptr::null_mut();
        assert_eq!(udl_model_load(missing.as_ptr(), &mut model), UdlStatus::Io);

        let other = corpus("1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n\n");
        let mut uas = UdlUas::default();
        assert_eq!(udl_evaluate(c, other, &mut uas), UdlStatus::Mismatch);

        // A successful call clears the message.
        assert_eq!(udl_evaluate(c, c, &mut uas), UdlStatus::Ok);
        assert!(udl_last_error().is_null());
        udl_corpus_free(other);
        udl_corpus_free(c);
        udl_corpus_free(ptr::null_mut());
        udl_model_free(ptr::null_mut());
    }
}

#[test]
fn train_parse_evaluate() {
    unsafe {
        let mut train_set = ptr::null_mut();
        let mut test = ptr::null_mut();
        let p = CString::new(fixture("train.conllu").to_str().unwrap()).unwrap();
        assert_eq!(udl_corpus_read(p.as_ptr(), &mut train_set), UdlStatus::Ok);
        let p = CString::new(fixture("test.conllu").to_str().unwrap()).unwrap();
        assert_eq!(udl_corpus_read(p.as_ptr(), &mut test), UdlStatus::Ok);

        let mut model = ptr::null_mut();
        assert_eq!(udl_train(train_set, ptr::null(), 3, 7, 1, 0.9, &mut model), UdlStatus::Ok);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("m.txt").to_str().unwrap()).unwrap();
        assert_eq!(udl_model_save(model, path.as_ptr()), UdlStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(udl_model_load(path.as_ptr(), &mut loaded), UdlStatus::Ok);

        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(udl_parse(model, test, &mut a), UdlStatus::Ok);
        assert_eq!(udl_parse(loaded, test, &mut b), UdlStatus::Ok);
        let (mut ua, mut ub) = (UdlUas::default(), UdlUas::default());
        assert_eq!(udl_evaluate(test, a, &mut ua), UdlStatus::Ok);
        assert_eq!(udl_evaluate(test, b, &mut ub), UdlStatus::Ok);
        assert_eq!((ua.correct, ua.total), (ub.correct, ub.total));
        assert!(ua.uas > 90.0, "{}", ua.uas);

        assert_eq!(
            udl_train(train_set, ptr::null(), 0, 1, 1, 0.9, &mut model),
            UdlStatus::InvalidArgument
        );

        for c in [a, b, train_set, test] {
            udl_corpus_free(c);
        }
        udl_model_free(model);
        udl_model_free(loaded);
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "udlearn.h"

int main(void) {
    const char *text = "1\tthe\t_\tDET\t_\t_\t2\tdet\t_\t_\n2\tbook\t_\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
    UdlCorpus *corpus = NULL;
    if (udl_corpus_parse(text, &corpus) != UDL_STATUS_OK) return 1;
    UdlCorpus *out = NULL;
    UdlTransformStats stats;
    if (udl_transform(corpus, "det", &out, &stats) != UDL_STATUS_OK) return 2;
    UdlMetrics m;
    if (udl_metrics(out, &m) != UDL_STATUS_OK) return 3;
    if (udl_corpus_parse("1\tx\n", &corpus) != UDL_STATUS_FORMAT) return 4;
    if (udl_last_error() == NULL) return 5;
    printf("%d %zu %llu\n", stats.changed, stats.arcs_rewritten,
           (unsigned long long)m.derivation_complexity);
    udl_corpus_free(out);
    udl_corpus_free(corpus);
    return 0;
}
"#;

/// Compile a C program against the generated header and the static library.
#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libudlearn_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let output = Command::new(&bin).output().unwrap();
    assert!(output.status.success(), "exit {:?}", output.status);
    // The inverted tree root -> the -> book derives as "AA": A and AA.
    let stdout = String::from_utf8(output.stdout).unwrap();
    let fields: Vec<&str> = stdout.split_whitespace().collect();
    assert_eq!(fields, ["1", "1", "2"]);
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
