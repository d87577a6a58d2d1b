mod common;

use mlq_core::codegen::{compile, CompileError};
use mlq_core::diag::{self, Severity};
use mlq_core::metamodel::resolve;
use mlq_core::runtime::{instantiate, RunOptions, RuntimeError};
use mlq_core::syntax::parse_model;
use mlq_core::validate::{apply_automl_defaults, check, needs_configuration};

/// The rule each seeded file breaks, read from its name: `v3_…` means V3.
fn intended(path: &std::path::Path) -> String {
    let stem = path.file_stem().unwrap().to_str().unwrap();
    stem.split('_').next().unwrap().to_uppercase()
}

#[test]
fn every_seeded_file_flags_exactly_its_rule() {
    let files = common::mlq_files(&common::corpus().join("invalid"));
    assert!(files.len() >= 10, "only {} seeded files", files.len());
    let mut seen = Vec::new();
    for path in &files {
        let name = path.file_name().unwrap().to_str().unwrap();
        let src = std::fs::read_to_string(path).unwrap();
        let model = common::model(&src, name);
        let (model, _) = apply_automl_defaults(&model);
        let errors: Vec<&str> = check(&model, needs_configuration(&model))
            .iter()
            .filter(|d| d.is_error())
            .map(|d| d.code)
            .collect();
        assert_eq!(errors, [intended(path).as_str()], "{name}");
        seen.push(intended(path));
    }
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 12, "one file per rule: {seen:?}");
}

#[test]
fn corpus_models_are_clean() {
    for (name, files) in common::MODELS {
        let (model, _) = apply_automl_defaults(&common::load_files(files));
        let errors: Vec<_> = check(&model, true).into_iter().filter(|d| d.is_error()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn common_library_alone_needs_a_configuration() {
    let model = common::load("smarthome_common.mlq");
    let codes: Vec<&str> = check(&model, needs_configuration(&model)).iter().map(|d| d.code).collect();
    assert_eq!(codes, ["C6"]);
}

#[test]
fn automl_notes_for_the_perceptron() {
    let (_, notes) = apply_automl_defaults(&common::load("smart_ping_pong.mlq"));
    assert!(notes.iter().all(|d| d.severity == Severity::Note));
    let text: Vec<&str> = notes.iter().map(|d| d.message.as_str()).collect();
    assert!(text.iter().any(|m| m.contains("standard scaler")), "{text:?}");
    let (_, notes) = apply_automl_defaults(&common::load("smart_ping_pong_dt.mlq"));
    assert!(!notes.iter().any(|d| d.message.contains("scaler")));
}

#[test]
fn fuzz_models_are_valid() {
    for seed in 0..60 {
        let src = common::fuzz::valid_model(seed);
        let model = common::model(&src, "fuzz.mlq");
        let diags = check(&model, true);
        assert!(diags.is_empty(), "seed {seed}: {diags:?}\n{src}");
    }
}

/// Anything the checker accepts must compile and instantiate without
/// shape errors.
#[test]
fn accepted_mutants_compile_and_instantiate() {
    let mut accepted = 0;
    for seed in 0..200u64 {
        let src = common::fuzz::mutate_lines(&common::fuzz::valid_model(seed % 50), seed);
        let Ok(unit) = parse_model(&src, "mutant.mlq") else { continue };
        let Ok(model) = resolve(&unit) else { continue };
        let (model, _) = apply_automl_defaults(&model);
        if diag::has_errors(&check(&model, true)) {
            continue;
        }
        accepted += 1;
        match compile(&model, "plan") {
            Ok(a) => assert_eq!(a.len(), 2),
            Err(CompileError::Invalid(d)) => panic!("seed {seed}: {d:?}\n{src}"),
            Err(e) => panic!("seed {seed}: {e}\n{src}"),
        }
        let config = common::sole_config(&model);
        let opts = RunOptions {
            max_steps: 200,
            ..RunOptions::default()
        };
        match instantiate(&model, &config, opts) {
            Ok(_) | Err(RuntimeError::Livelock(_)) => {}
            Err(e) => panic!("seed {seed}: {e}\n{src}"),
        }
    }
    assert!(accepted >= 20, "only {accepted} mutants accepted");
}
