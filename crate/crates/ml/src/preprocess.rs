use crate::dataset::PreparedData;
use crate::spec::{DataAnalyticsSpec, ScalerKind};

/// Per-column affine transform `x' = (x - offset) / scale` fitted on the
/// train split. Unscaled columns carry offset 0 and scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedScaler {
    pub kind: ScalerKind,
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FittedScaler {
    pub fn identity(columns: usize) -> Self {
        FittedScaler {
            kind: ScalerKind::None,
            offset: vec![0.0; columns],
            scale: vec![1.0; columns],
        }
    }

    /// Fits on `rows`; returns the scaler and one note per column left
    /// unscaled because it is constant.
    pub fn fit(kind: ScalerKind, rows: &[Vec<f64>], columns: usize) -> (Self, Vec<usize>) {
        let mut scaler = FittedScaler::identity(columns);
        scaler.kind = kind;
        let mut constant = Vec::new();
        if kind == ScalerKind::None || rows.is_empty() {
            return (scaler, constant);
        }
        let n = rows.len() as f64;
        for j in 0..columns {
            let col = rows.iter().map(|r| r[j]);
            match kind {
                ScalerKind::Standard => {
                    let mean = col.clone().sum::<f64>() / n;
                    let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    let std = var.sqrt();
                    if std <= 1e-12 * mean.abs().max(1.0) {
                        constant.push(j);
                    } else {
                        scaler.offset[j] = mean;
                        scaler.scale[j] = std;
                    }
                }
                ScalerKind::MinMax => {
                    let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                    let range = hi - lo;
                    if range <= 1e-12 * lo.abs().max(1.0) {
                        constant.push(j);
                    } else {
                        scaler.offset[j] = lo;
                        scaler.scale[j] = range;
                    }
                }
                ScalerKind::None => unreachable!(),
            }
        }
        (scaler, constant)
    }

    pub fn transform(&self, row: &mut [f64]) {
        for ((v, o), s) in row.iter_mut().zip(&self.offset).zip(&self.scale) {
            *v = (*v - o) / s;
        }
    }
}

/// Fits the component's scaler on the train split and applies it to every row.
pub fn preprocess(spec: &DataAnalyticsSpec, mut data: PreparedData) -> (PreparedData, FittedScaler) {
    let kind = spec.scaler.unwrap_or(ScalerKind::None);
    let columns = spec.inputs().len();
    let (scaler, constant) = FittedScaler::fit(kind, data.train_x(), columns);
    for j in constant {
        let name = spec.inputs().get(j).map(|f| f.name.as_str()).unwrap_or("?");
        data.notes
            .push(format!("column `{name}` is constant on the train split; left unscaled"));
    }
    for row in data.x.iter_mut() {
        scaler.transform(row);
    }
    (data, scaler)
}
