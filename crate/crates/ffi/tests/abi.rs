use std::ffi::{CStr, CString};
use std::ptr;

use unrest_ffi::*;
use unrest_filter::features::FeatureConfig;
use unrest_filter::harness::train_on;
use unrest_filter::ingest::{write_records, AnalyzedTweet};
use unrest_filter::svm::TrainConfig;
use unrest_filter::synth::{generate, SynthConfig};

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    uf_string_free(p);
    s
}

fn last_error() -> String {
    let p = uf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn corpus(n: usize) -> Vec<AnalyzedTweet> {
    generate(&SynthConfig {
        size: n,
        seed: 1,
        ..SynthConfig::default()
    })
    .unwrap()
}

#[test]
fn normalize_round_trip() {
    let mut out = ptr::null_mut();
    let text = c("see http://t.co/ab 42 #demo");
    assert_eq!(unsafe { uf_normalize(text.as_ptr(), &mut out) }, UfStatus::Ok);
    assert_eq!(unsafe { take(out) }, r##"["see","LINK","NUMBER","#demo"]"##);
    assert!(uf_last_error().is_null());

    assert_eq!(unsafe { uf_normalize(ptr::null(), &mut out) }, UfStatus::NullArgument);
    assert!(last_error().contains("text"));
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { uf_normalize(bad.as_ptr().cast(), &mut out) },
        UfStatus::InvalidUtf8
    );
}

#[test]
fn metrics_through_the_abi() {
    let a = [1, 1, 0, 0, 1, 0];
    let b = [1, 1, 0, 0, 0, 1];
    let mut v = 0.0;
    unsafe {
        assert_eq!(uf_cohen_kappa(a.as_ptr(), b.as_ptr(), 6, &mut v), UfStatus::Ok);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(uf_percent_agreement(a.as_ptr(), b.as_ptr(), 6, &mut v), UfStatus::Ok);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(
            uf_cohen_kappa(a.as_ptr(), b.as_ptr(), 0, &mut v),
            UfStatus::InvalidArgument
        );

        let m = [1.0, 2.0, 2.0, 3.0, 3.0, 4.0];
        assert_eq!(uf_icc_absolute(m.as_ptr(), 3, 2, &mut v), UfStatus::Ok);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let flat = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(uf_icc_absolute(flat.as_ptr(), 2, 2, &mut v), UfStatus::Degenerate);
    }
}

#[test]
fn classifier_matches_library_scores() {
    let data = corpus(300);
    let refs: Vec<&AnalyzedTweet> = data.iter().collect();
    let trained = train_on(&refs, &FeatureConfig::preset("lex1").unwrap(), &TrainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let vp = dir.path().join("vocab.tsv");
    let mp = dir.path().join("model.txt");
    std::fs::write(&vp, trained.vocab.to_text()).unwrap();
    std::fs::write(&mp, trained.model.to_text()).unwrap();

    let mut h = ptr::null_mut();
    unsafe {
        let (vp, mp) = (c(vp.to_str().unwrap()), c(mp.to_str().unwrap()));
        assert_eq!(uf_classifier_load(vp.as_ptr(), mp.as_ptr(), &mut h), UfStatus::Ok);
        let mut n = 0;
        assert_eq!(uf_classifier_vocab_size(h, &mut n), UfStatus::Ok);
        assert_eq!(n, trained.vocab.len());
        for t in &data[..50] {
            let text = c(&t.tweet.text);
            let mut s = f64::NAN;
            assert_eq!(uf_classifier_score_text(h, text.as_ptr(), &mut s), UfStatus::Ok);
            assert_eq!(s, trained.score(t), "{}", t.id());
        }
        uf_classifier_free(h);

        let mut h2 = ptr::null_mut();
        let v = c(&trained.vocab.to_text());
        assert_eq!(
            uf_classifier_from_text(v.as_ptr(), c("garbage").as_ptr(), &mut h2),
            UfStatus::Parse
        );
        assert!(h2.is_null());
        let missing = c("/nonexistent/vocab.tsv");
        assert_eq!(
            uf_classifier_load(missing.as_ptr(), missing.as_ptr(), &mut h2),
            UfStatus::Io
        );
        uf_classifier_free(ptr::null_mut());
    }
}

#[test]
fn session_lifecycle() {
    let data = corpus(200);
    let dir = tempfile::tempdir().unwrap();
    let pool = dir.path().join("pool.jsonl");
    let mut buf = Vec::new();
    write_records(&mut buf, &data).unwrap();
    std::fs::write(&pool, buf).unwrap();
    let sdir = c(dir.path().join("s").to_str().unwrap());
    let cfg = c(r#"{"retrain_batch":20,"stop_set_size":50,"seed":3,
        "features":{"lemma_orders":[1],"pos_orders":[],"min_count":3},
        "train":{"c":null,"tolerance":0.001,"max_epochs":1000,"seed":0},
        "stop":{"threshold":0.99,"window":3},
        "normalization":null}"#);

    unsafe {
        let mut s = ptr::null_mut();
        // A malformed config is rejected before anything is written.
        let status = uf_session_create(
            sdir.as_ptr(),
            c(pool.to_str().unwrap()).as_ptr(),
            ptr::null(),
            cfg.as_ptr(),
            &mut s,
        );
        assert_eq!(status, UfStatus::Parse, "{}", last_error());

        let pool_c = c(pool.to_str().unwrap());
        assert_eq!(
            uf_session_create(sdir.as_ptr(), pool_c.as_ptr(), ptr::null(), ptr::null(), &mut s),
            UfStatus::Ok,
            "{}",
            last_error()
        );
        let mut out = ptr::null_mut();
        let annot = c("ffi");
        for i in 0..50 {
            assert_eq!(uf_session_next_batch(s, 1, &mut out), UfStatus::Ok);
            let q: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
            let id = q[0]["id"].as_str().unwrap();
            let gold = data.iter().find(|t| t.id() == id).unwrap().label().unwrap().as_int();
            assert_eq!(
                uf_session_submit_label(s, c(id).as_ptr(), gold.into(), annot.as_ptr(), &mut out),
                UfStatus::Ok
            );
            let ack: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
            assert_eq!(ack["labeled_count"], i + 1);
        }
        let mut pending = false;
        assert_eq!(uf_session_retrain_pending(s, &mut pending), UfStatus::Ok);
        assert!(pending);
        let mut ran = 0;
        assert_eq!(uf_session_run_pending_retrains(s, &mut ran), UfStatus::Ok);
        assert_eq!(ran, 1);
        assert_eq!(
            uf_session_submit_label(s, c("nope").as_ptr(), 1, annot.as_ptr(), &mut out),
            UfStatus::UnknownId
        );
        let id = c(data[0].id());
        assert_eq!(
            uf_session_submit_label(s, id.as_ptr(), 5, annot.as_ptr(), &mut out),
            UfStatus::InvalidArgument
        );
        assert_eq!(uf_session_status(s, &mut out), UfStatus::Ok);
        let st: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(st["labeled"], 50);
        assert_eq!(st["model_version"], 1);
        uf_session_free(s);

        let mut reopened = ptr::null_mut();
        assert_eq!(uf_session_open(sdir.as_ptr(), &mut reopened), UfStatus::Ok);
        assert_eq!(uf_session_status(reopened, &mut out), UfStatus::Ok);
        let again: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(again, st);
        uf_session_free(reopened);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(uf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
