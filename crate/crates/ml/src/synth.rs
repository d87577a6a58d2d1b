//! Seeded synthetic datasets: a noiseless line, two separable blobs, and a
//! smart-home load profile with nine appliances and an aggregate meter.

use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::format_timestamp;
use crate::error::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Line,
    Separable2d,
    SmarthomeClassify,
    SmarthomeCluster,
    SmarthomeRegress,
}

impl Preset {
    pub const NAMES: [&'static str; 5] = [
        "line",
        "separable-2d",
        "smarthome-classify",
        "smarthome-cluster",
        "smarthome-regress",
    ];
}

impl FromStr for Preset {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "line" => Preset::Line,
            "separable-2d" => Preset::Separable2d,
            "smarthome-classify" => Preset::SmarthomeClassify,
            "smarthome-cluster" => Preset::SmarthomeCluster,
            "smarthome-regress" => Preset::SmarthomeRegress,
            other => return Err(MlError::UnknownPreset(other.to_string())),
        })
    }
}

pub const APPLIANCES: [&str; 9] = [
    "fridge",
    "freezer_1",
    "freezer_2",
    "washing_machine",
    "dishwasher",
    "computer",
    "television",
    "electric_heater",
    "washer_dryer",
];

/// Index of the washer-dryer among the appliance columns.
pub const WASHER_DRYER: usize = 8;

#[derive(Debug, Clone, Copy, Default)]
pub struct SynthOptions {
    /// Prefix each row with a timestamp, starting 01-10-2013 00:00:00 and
    /// advancing 8 seconds per row.
    pub timestamps: bool,
    /// Drop the label column of the smart-home presets.
    pub unlabeled: bool,
}

pub fn start_time() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2013, 10, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

struct Appliance {
    period: usize,
    on_rows: usize,
    phase: usize,
    level: f64,
}

pub fn gen_synthetic(preset: &str, seed: u64, rows: usize, opts: SynthOptions) -> Result<String, MlError> {
    let preset: Preset = preset.parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let start = start_time();
    let stamp = |out: &mut String, i: usize| {
        if opts.timestamps {
            let t = start + Duration::seconds(8 * i as i64);
            let _ = write!(out, "{},", format_timestamp(&t));
        }
    };
    match preset {
        Preset::Line => {
            for i in 0..rows {
                stamp(&mut out, i);
                let _ = writeln!(out, "{},{}", i, 2 * i + 1);
            }
        }
        Preset::Separable2d => {
            for i in 0..rows {
                stamp(&mut out, i);
                let positive: bool = rng.gen();
                let c = if positive { 1.5 } else { -1.5 };
                let a = c + rng.gen_range(-1.0..1.0);
                let b = c + rng.gen_range(-1.0..1.0);
                let _ = writeln!(out, "{:.4},{:.4},{}", a, b, u8::from(positive));
            }
        }
        Preset::SmarthomeClassify | Preset::SmarthomeCluster | Preset::SmarthomeRegress => {
            let appliances: Vec<Appliance> = (0..APPLIANCES.len())
                .map(|a| {
                    let period = rng.gen_range(20..=120usize);
                    let duty = rng.gen_range(0.2..0.6);
                    let level = if a == WASHER_DRYER {
                        rng.gen_range(2100.0..2400.0)
                    } else {
                        rng.gen_range(420.0..580.0)
                    };
                    Appliance {
                        period,
                        on_rows: ((period as f64 * duty).round() as usize).max(1),
                        phase: rng.gen_range(0..period),
                        level,
                    }
                })
                .collect();
            for i in 0..rows {
                stamp(&mut out, i);
                let mut loads = [0.0f64; 9];
                for (load, app) in loads.iter_mut().zip(&appliances) {
                    let on = (i + app.phase) % app.period < app.on_rows;
                    *load = if on {
                        round3(app.level + rng.gen_range(-15.0..15.0))
                    } else {
                        round3(rng.gen_range(0.0..4.9))
                    };
                }
                let noise = rng.gen_range(-0.99..0.99);
                let aggregate = round3(loads.iter().sum::<f64>() + noise);
                for load in &loads {
                    let _ = write!(out, "{load:.3},");
                }
                let _ = write!(out, "{aggregate:.3}");
                let wd_on = loads[WASHER_DRYER] > 5.0;
                match preset {
                    Preset::SmarthomeRegress => {
                        let _ = write!(out, ",{:.3}", loads[WASHER_DRYER]);
                    }
                    _ if opts.unlabeled => {}
                    _ => {
                        let _ = write!(out, ",{}", u8::from(wd_on));
                    }
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for name in Preset::NAMES {
            let a = gen_synthetic(name, 10, 200, SynthOptions::default()).unwrap();
            let b = gen_synthetic(name, 10, 200, SynthOptions::default()).unwrap();
            assert_eq!(a, b, "{name}");
            assert_eq!(a.lines().count(), 200);
        }
        let a = gen_synthetic("smarthome-cluster", 1, 50, SynthOptions::default()).unwrap();
        let b = gen_synthetic("smarthome-cluster", 2, 50, SynthOptions::default()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            gen_synthetic("refit", 10, 5, SynthOptions::default()),
            Err(MlError::UnknownPreset(_))
        ));
    }

    #[test]
    fn aggregate_is_row_sum_plus_bounded_noise() {
        let csv = gen_synthetic("smarthome-classify", 10, 500, SynthOptions::default()).unwrap();
        for line in csv.lines() {
            let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cells.len(), 11);
            let sum: f64 = cells[..9].iter().sum();
            assert!((cells[9] - sum).abs() <= 1.0, "{line}");
            for load in &cells[..9] {
                assert!(*load < 5.0 || *load > 400.0, "{line}");
            }
            assert_eq!(cells[10] == 1.0, cells[WASHER_DRYER] > 400.0);
        }
    }

    #[test]
    fn timestamps_and_unlabeled() {
        let opts = SynthOptions {
            timestamps: true,
            unlabeled: true,
        };
        let csv = gen_synthetic("smarthome-cluster", 10, 3, opts).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("01-10-2013 00:00:00,"));
        assert!(lines[2].starts_with("01-10-2013 00:00:16,"));
        assert_eq!(lines[0].split(',').count(), 11);
    }

    #[test]
    fn line_preset() {
        let csv = gen_synthetic("line", 0, 3, SynthOptions::default()).unwrap();
        assert_eq!(csv, "0,1\n1,3\n2,5\n");
    }
}
