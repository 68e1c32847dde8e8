//! Dataset ingestion, unit-box normalization, and a synthetic blob
//! generator for desk-scale benchmarks.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::clustering::Dataset;
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::seed::derive_rng;

/// Read a rectangular numeric CSV file.  `drop_columns` lists 0-based
/// raw-column indices to exclude (label columns); width checks run on
/// the raw row before dropping.
pub fn load_csv(path: &Path, has_header: bool, drop_columns: &[usize]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    let mut expected: Option<usize> = None;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        let got = record.len();
        let width = *expected.get_or_insert(got);
        if got != width {
            return Err(Error::CsvRagged {
                row,
                got,
                expected: width,
            });
        }
        let mut coords = Vec::with_capacity(got);
        for (col_idx, cell) in record.iter().enumerate() {
            if drop_columns.contains(&col_idx) {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::CsvCell {
                row,
                col: col_idx + 1,
                reason: format!("not a number: '{cell}'"),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvCell {
                    row,
                    col: col_idx + 1,
                    reason: format!("not finite: {value}"),
                });
            }
            coords.push(value);
        }
        rows.push(Vector::new(coords));
    }
    Dataset::new(rows)
}

/// Min-max scale every dimension to [0,1]; a constant dimension maps
/// to 0.
pub fn normalize_unit_box(dataset: &Dataset) -> Dataset {
    let d = dataset.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in dataset.points() {
        for (j, &v) in p.coords().iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let points = dataset
        .points()
        .iter()
        .map(|p| {
            Vector::new(
                p.coords()
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let range = hi[j] - lo[j];
                        if range > 0.0 {
                            (v - lo[j]) / range
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Dataset::new(points).expect("normalization preserves the dataset shape")
}

/// Gaussian blobs around `k_true` uniform centers in the unit cube,
/// normalized to the unit box.  Deterministic under `seed`.
pub fn synthetic_blobs(
    k_true: usize,
    per_cluster: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if k_true < 1 || per_cluster < 1 || dim < 1 {
        return Err(Error::Config(format!(
            "blob parameters must all be at least 1 (k_true={k_true}, per_cluster={per_cluster}, dim={dim})"
        )));
    }
    if !(spread > 0.0) {
        return Err(Error::Config(format!(
            "blob spread must be positive, got {spread}"
        )));
    }
    let mut rng = derive_rng(seed, "synthetic-blobs", &[]);
    let centers: Vec<Vector> = (0..k_true)
        .map(|_| Vector::new((0..dim).map(|_| rng.random::<f64>()).collect()))
        .collect();
    let mut points = Vec::with_capacity(k_true * per_cluster);
    for center in &centers {
        for _ in 0..per_cluster {
            let offset: Vec<f64> = (0..dim)
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    g * spread
                })
                .collect();
            points.push(center.add(&Vector::new(offset)));
        }
    }
    Ok(normalize_unit_box(&Dataset::new(points)?))
}
