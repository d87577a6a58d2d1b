#![allow(dead_code)]

pub mod fuzz;

use std::path::{Path, PathBuf};

use mlq_core::metamodel::{resolve, ResolvedModel};
use mlq_core::runtime::RunOptions;
use mlq_core::syntax::{parse_model, AstUnit};

/// Every runnable corpus model, as the files that make it up.
pub const MODELS: &[(&str, &[&str])] = &[
    ("ping_pong", &["ping_pong.mlq"]),
    ("smart_ping_pong", &["smart_ping_pong.mlq"]),
    ("smart_ping_pong_dt", &["smart_ping_pong_dt.mlq"]),
    ("scenario1", &["smarthome_common.mlq", "scenario1.mlq"]),
    ("scenario2", &["smarthome_common.mlq", "scenario2.mlq"]),
    ("scenario3", &["smarthome_common.mlq", "scenario3.mlq"]),
    ("scenario4", &["smarthome_common.mlq", "scenario4.mlq"]),
    ("clock_sampler", &["clock_sampler.mlq"]),
];

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// All `.mlq` files directly under `dir`, sorted.
pub fn mlq_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "mlq"))
        .collect();
    v.sort();
    v
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> ResolvedModel {
    model(&read(name), name)
}

pub fn model(src: &str, file: &str) -> ResolvedModel {
    let unit = parse_model(src, file).unwrap_or_else(|d| panic!("{file}: {d:?}"));
    resolve(&unit).unwrap_or_else(|d| panic!("{file}: {d:?}"))
}

/// Parses, merges and resolves several corpus files.
pub fn load_files(files: &[&str]) -> ResolvedModel {
    let units = files
        .iter()
        .map(|f| parse_model(&read(f), f).unwrap_or_else(|d| panic!("{f}: {d:?}")));
    let unit = AstUnit::merge(units);
    resolve(&unit).unwrap_or_else(|d| panic!("{files:?}: {d:?}"))
}

pub fn sole_config(model: &ResolvedModel) -> String {
    assert_eq!(model.configurations.len(), 1);
    model.configurations.keys().next().unwrap().clone()
}

/// Copy of the corpus data and model directories, so runs may append to
/// datasets and logs.
pub fn data_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&corpus().join("data"), &dir.path().join("data"));
    copy_tree(&corpus().join("models"), &dir.path().join("models"));
    dir
}

fn copy_tree(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &to);
        } else {
            std::fs::copy(entry.path(), to).unwrap();
        }
    }
}

pub fn opts(root: &Path) -> RunOptions {
    RunOptions {
        dataset_root: Some(root.to_path_buf()),
        ..RunOptions::default()
    }
}
