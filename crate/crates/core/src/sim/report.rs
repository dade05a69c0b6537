use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub decoder: String,
    pub delta: f64,
    pub delta_db: f64,
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub lattice: String,
    pub lattices: usize,
    #[serde(default)]
    pub resampled_seeds: Vec<u64>,
    #[serde(default)]
    pub skipped: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub metadata: Metadata,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    decoder: &'a str,
    delta_db: f64,
    errors: u64,
    trials: u64,
    rate: f64,
    ci_lo: f64,
    ci_hi: f64,
}

impl ExperimentReport {
    pub fn row(&self, decoder: &str, delta: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.decoder == decoder && r.delta == delta)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(CsvRow {
                decoder: &r.decoder,
                delta_db: r.delta_db,
                errors: r.errors,
                trials: r.trials,
                rate: r.rate,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV table plus a JSON sidecar holding the full report.
    pub fn write_files(&self, csv_path: impl AsRef<Path>, json_path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(csv_path)?)?;
        std::fs::write(json_path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: u64,
    pub bin_hi: u64,
    pub count: u64,
}

/// Fixed-width histogram over `[min, max]`; bins are `[lo, hi)` except the last.
pub fn histogram(values: &[u64], width: u64) -> Vec<HistogramBin> {
    let (Some(&min), Some(&max)) = (values.iter().min(), values.iter().max()) else {
        return Vec::new();
    };
    let width = width.max(1);
    let lo0 = min - min % width;
    let bins = ((max - lo0) / width + 1) as usize;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin { bin_lo: lo0 + b as u64 * width, bin_hi: lo0 + (b as u64 + 1) * width, count: 0 })
        .collect();
    for &v in values {
        out[((v - lo0) / width) as usize].count += 1;
    }
    out
}
