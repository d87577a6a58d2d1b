mod common;

use proptest::prelude::*;

use mlq_core::syntax::{emit_canonical, parse_model, parse_with_diagnostics, reconstruct, tokenize};

fn all_corpus_files() -> Vec<std::path::PathBuf> {
    let mut files = common::mlq_files(&common::corpus());
    files.extend(common::mlq_files(&common::corpus().join("invalid")));
    files
}

#[test]
fn corpus_round_trips_through_canonical_text() {
    let files = all_corpus_files();
    assert!(files.len() >= 20);
    for path in files {
        let name = path.display().to_string();
        let src = std::fs::read_to_string(&path).unwrap();
        let first = parse_model(&src, &name).unwrap_or_else(|d| panic!("{name}: {d:?}"));
        let text = emit_canonical(&first);
        let second = parse_model(&text, &name).unwrap_or_else(|d| panic!("{name}: {d:?}\n{text}"));
        assert_eq!(first, second, "{name}");
        assert_eq!(emit_canonical(&second), text, "{name}: canonical text is a fixed point");
    }
}

#[test]
fn corpus_tokens_reconstruct_the_source() {
    for path in all_corpus_files() {
        let src = std::fs::read_to_string(&path).unwrap();
        let (tokens, diags) = tokenize(&src, "f");
        assert!(diags.is_empty(), "{}", path.display());
        assert_eq!(reconstruct(&tokens), src);
    }
}

#[test]
fn fuzz_models_round_trip() {
    for seed in 0..50 {
        let src = common::fuzz::valid_model(seed);
        let a = parse_model(&src, "fuzz").unwrap_or_else(|d| panic!("seed {seed}: {d:?}\n{src}"));
        let b = parse_model(&emit_canonical(&a), "fuzz").unwrap();
        assert_eq!(a, b, "seed {seed}");
    }
}

#[test]
fn mutants_never_panic_and_always_explain_failure() {
    for seed in 0..300u64 {
        let src = common::fuzz::mutate(&common::fuzz::valid_model(seed % 40), seed);
        let (unit, diags) = parse_with_diagnostics(&src, "mutant");
        if let Ok(strict) = parse_model(&src, "mutant") {
            assert_eq!(strict, unit);
            let again = parse_model(&emit_canonical(&strict), "mutant").unwrap();
            assert_eq!(strict, again, "seed {seed}");
        } else {
            assert!(diags.iter().any(|d| d.is_error()), "seed {seed}");
        }
    }
}

#[test]
fn deep_nesting_is_reported_not_overflowed() {
    let deep = format!(
        "thing T {{ property x : Int32 = {}1{} }}",
        "(".repeat(5000),
        ")".repeat(5000)
    );
    assert!(parse_model(&deep, "deep").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tokenizing_is_lossless(src in "\\PC{0,200}") {
        let (tokens, _) = tokenize(&src, "p");
        prop_assert_eq!(reconstruct(&tokens), src);
    }

    #[test]
    fn tokenizing_model_like_text_is_lossless(
        parts in prop::collection::vec(
            prop::sample::select(vec![
                "thing", " ", "\n", "{", "}", "\"str\"", "\"un", "// c\n", "/* b */", "/* open",
                "1.5", "42", "x", "->", "?", "!", "@a", "==", "<=", "\t", "é",
            ]),
            0..60,
        )
    ) {
        let src: String = parts.concat();
        let (tokens, _) = tokenize(&src, "p");
        prop_assert_eq!(reconstruct(&tokens), src.clone());
        let _ = parse_with_diagnostics(&src, "p");
    }
}
