//! CSV rendering and atomic file output.
//!
//! Numeric cells are either finite decimals or the literal `diverged`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sparse_mcc::{FilterAggregate, MsdScale};

use crate::error::CliError;

pub const DIVERGED: &str = "diverged";

/// Formats a numeric cell. Magnitudes outside `[1e-4, 1e15)` use exponent
/// notation so tiny MSDs stay short; both forms round-trip exactly.
pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => {
            let a = v.abs();
            if a == 0.0 || (1e-4..1e15).contains(&a) {
                format!("{v}")
            } else {
                format!("{v:e}")
            }
        }
        _ => DIVERGED.to_string(),
    }
}

fn db(v: f64) -> f64 {
    MsdScale::Db.apply(v)
}

/// `iteration,mean_msd,std_msd[,mean_msd_db]`, one row per iteration.
pub fn msd_csv(agg: &FilterAggregate, iterations: u64, scale: MsdScale) -> String {
    let with_db = scale == MsdScale::Db;
    let mut out = String::from("iteration,mean_msd,std_msd");
    if with_db {
        out.push_str(",mean_msd_db");
    }
    out.push('\n');
    for k in 0..iterations as usize {
        let mean = agg.mean_msd.as_ref().map(|m| m[k]);
        let std = agg.std_msd.as_ref().map(|s| s[k]);
        let _ = write!(out, "{},{},{}", k + 1, cell(mean), cell(std));
        if with_db {
            let _ = write!(out, ",{}", cell(mean.map(db)));
        }
        out.push('\n');
    }
    out
}

pub const SUMMARY_HEADER: &str = "algorithm,steady_state_msd,diverged_trials,steady_state_std,first_divergence";

fn summary_fields(label: &str, agg: &FilterAggregate) -> String {
    let first = agg.first_divergence.map_or_else(String::new, |n| n.to_string());
    format!(
        "{label},{},{},{},{first}",
        cell(agg.steady_state_msd),
        agg.diverged_trials,
        cell(agg.steady_state_std)
    )
}

/// One row per filter. `steady_state_msd` is in the configured scale,
/// `steady_state_std` is linear, `first_divergence` is blank when no trial
/// diverged.
pub fn summary_csv(labels: &[String], filters: &[FilterAggregate]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for (label, agg) in labels.iter().zip(filters) {
        out.push_str(&summary_fields(label, agg));
        out.push('\n');
    }
    out
}

/// Header for `sweep.csv`; a leading `series_value` column appears when the
/// sweep has an outer series.
pub fn sweep_header(with_series: bool) -> String {
    let tail = "swept_value,algorithm,steady_state_msd,diverged_trials,steady_state_std,first_divergence";
    if with_series {
        format!("series_value,{tail}\n")
    } else {
        format!("{tail}\n")
    }
}

pub fn sweep_rows(point: &[f64], labels: &[String], filters: &[FilterAggregate]) -> String {
    let prefix: String = point.iter().map(|v| format!("{},", cell(Some(*v)))).collect();
    let mut out = String::new();
    for (label, agg) in labels.iter().zip(filters) {
        out.push_str(&prefix);
        out.push_str(&summary_fields(label, agg));
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path` via a temporary file in the same directory
/// followed by a rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_mcc::Algorithm;

    fn agg(mean: Option<Vec<f64>>) -> FilterAggregate {
        FilterAggregate {
            algorithm: Algorithm::Mcc,
            trials: 2,
            diverged_trials: if mean.is_some() { 0 } else { 2 },
            first_divergence: if mean.is_some() { None } else { Some(7) },
            std_msd: mean.as_ref().map(|m| vec![0.0; m.len()]),
            steady_state_msd: mean.as_ref().map(|m| m[m.len() - 1]),
            steady_state_std: mean.as_ref().map(|_| 0.0),
            mean_final_weights: None,
            mean_msd: mean,
        }
    }

    #[test]
    fn cells_never_leak_non_finite_tokens() {
        assert_eq!(cell(None), "diverged");
        assert_eq!(cell(Some(f64::NAN)), "diverged");
        assert_eq!(cell(Some(f64::INFINITY)), "diverged");
        assert_eq!(cell(Some(0.0)), "0");
        assert_eq!(cell(Some(0.25)), "0.25");
        assert_eq!(cell(Some(1.5e-7)), "1.5e-7");
        assert_eq!(cell(Some(-12.5)), "-12.5");
        for v in [1e-300, 3.3e-5, 0.1 + 0.2, 123456.789, 2e20] {
            assert_eq!(cell(Some(v)).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn msd_csv_shapes() {
        let a = agg(Some(vec![1.0, 0.0, 0.01]));
        let text = msd_csv(&a, 3, MsdScale::Db);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,mean_msd,std_msd,mean_msd_db");
        assert_eq!(lines[1], "1,1,0,0");
        assert!(lines[2].starts_with("2,0,0,-3"), "{}", lines[2]);
        assert_eq!(lines[3], "3,0.01,0,-20");
        assert_eq!(msd_csv(&a, 3, MsdScale::Linear).lines().next().unwrap(), "iteration,mean_msd,std_msd");

        let d = msd_csv(&agg(None), 2, MsdScale::Linear);
        assert_eq!(d, "iteration,mean_msd,std_msd\n1,diverged,diverged\n2,diverged,diverged\n");
    }

    #[test]
    fn summary_marks_divergence() {
        let labels = vec!["mcc".to_string(), "zalms".to_string()];
        let s = summary_csv(&labels, &[agg(Some(vec![0.5])), agg(None)]);
        assert_eq!(s, format!("{SUMMARY_HEADER}\nmcc,0.5,0,0,\nzalms,diverged,2,diverged,7\n"));
        let rows = sweep_rows(&[1.5], &labels[..1], &[agg(Some(vec![0.5]))]);
        assert_eq!(rows, "1.5,mcc,0.5,0,0,\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"a\n").unwrap();
        write_atomic(&path, b"b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
