//! Attaching externally trained models to a component.

use std::path::Path;

use crate::document::read_model;
use crate::error::MlError;
use crate::model::TrainedModel;
use crate::spec::{DataAnalyticsSpec, Family};

/// File name of the model document inside a black-box model directory.
pub const MODEL_FILE: &str = "model.mlqm";

/// Loads `<dir>/model.mlqm` for a black-box component, checking its family
/// against the declared import algorithm and its schema against the
/// component's features.
pub fn load_blackbox(spec: &DataAnalyticsSpec, dir: &Path) -> Result<TrainedModel, MlError> {
    if !spec.blackbox_ml {
        return Err(MlError::Blackbox(format!("`{}` is not a black-box component", spec.name)));
    }
    let declared = spec.blackbox_import_algorithm.as_deref().unwrap_or("");
    let expected = Family::from_name(declared).ok_or_else(|| MlError::FamilyMismatch {
        expected: declared.to_string(),
        found: Family::KMeans,
    });
    if !dir.is_dir() {
        return Err(MlError::MissingArtifact(format!("directory {} does not exist", dir.display())));
    }
    let file = dir.join(MODEL_FILE);
    if !file.is_file() {
        return Err(MlError::MissingArtifact(format!(
            "{} contains no {MODEL_FILE}",
            dir.display()
        )));
    }
    let mut model = read_model(&file)?;
    match expected {
        Ok(f) if f == model.family => {}
        _ => {
            return Err(MlError::FamilyMismatch {
                expected: declared.to_string(),
                found: model.family,
            })
        }
    }
    let fingerprint = spec.schema().fingerprint();
    if model.fingerprint() != fingerprint {
        return Err(MlError::SchemaMismatch {
            model: model.fingerprint(),
            spec: fingerprint,
        });
    }
    if model.task != spec.task() {
        return Err(MlError::TaskMismatch {
            family: model.family,
            task: spec.task(),
        });
    }
    model.output = spec.prediction_results.as_ref().map(|f| f.ty);
    Ok(model)
}
