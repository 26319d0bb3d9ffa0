//! Compiles a C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

use unrest_filter::features::FeatureConfig;
use unrest_filter::harness::train_on;
use unrest_filter::ingest::{AnalyzedTweet, Tweet};
use unrest_filter::svm::TrainConfig;
use unrest_filter::synth::{generate, SynthConfig};

/// The static library cargo built alongside this test, in
/// `<target>/<profile>/deps/`.
fn static_lib() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().join("libunrest_ffi.a")
}

#[test]
fn c_program_links_and_scores() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = static_lib();
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .expect("a C compiler is available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let data = generate(&SynthConfig {
        size: 200,
        seed: 4,
        ..SynthConfig::default()
    })
    .unwrap();
    let refs: Vec<&AnalyzedTweet> = data.iter().collect();
    let trained = train_on(&refs, &FeatureConfig::preset("lex1").unwrap(), &TrainConfig::default()).unwrap();
    let vp = tmp.path().join("vocab.tsv");
    let mp = tmp.path().join("model.txt");
    std::fs::write(&vp, trained.vocab.to_text()).unwrap();
    std::fs::write(&mp, trained.model.to_text()).unwrap();

    let run = Command::new(&exe).arg(&vp).arg(&mp).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let printed: f64 = String::from_utf8(run.stdout).unwrap().trim().parse().unwrap();
    let expected = trained.score(&AnalyzedTweet::passthrough(Tweet {
        id: String::new(),
        ts: 0,
        text: "rel001 rel002 rel003".into(),
        label: None,
    }));
    assert_eq!(printed, expected);
}
