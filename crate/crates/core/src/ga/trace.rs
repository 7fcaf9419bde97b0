use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ensure_parent;

/// Column order of trace CSV files.
pub const TRACE_COLUMNS: [&str; 12] = [
    "epoch",
    "mean_fitness",
    "max_fitness",
    "min_soft_feasible",
    "mean_soft_feasible",
    "min_hard",
    "mean_hard",
    "num_feasible",
    "num_optimal",
    "mean_crowding",
    "max_crowding",
    "elapsed_seconds",
];

/// Population statistics after one generation.
///
/// Soft statistics cover feasible chromosomes only and are empty when there are none.
/// Crowding statistics cover the matched parent/offspring pairs and are empty at epoch 0.
/// `num_optimal` is empty when the instance carries no certified optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub epoch: usize,
    pub mean_fitness: f64,
    pub max_fitness: f64,
    pub min_soft_feasible: Option<f64>,
    pub mean_soft_feasible: Option<f64>,
    pub min_hard: u64,
    pub mean_hard: f64,
    pub num_feasible: usize,
    pub num_optimal: Option<usize>,
    pub mean_crowding: Option<f64>,
    pub max_crowding: Option<u64>,
    pub elapsed_seconds: f64,
}

/// Renders records as CSV text with a header row.
pub fn trace_csv(records: &[GenerationRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn write_trace_csv(path: impl AsRef<Path>, records: &[GenerationRecord]) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let text = trace_csv(records)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<GenerationRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != TRACE_COLUMNS {
        return Err(Error::InvalidInput(format!(
            "{}: unexpected trace header {header:?}",
            path.display()
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(epoch: usize, feasible: bool) -> GenerationRecord {
        GenerationRecord {
            epoch,
            mean_fitness: 2800.5,
            max_fitness: 2900.25,
            min_soft_feasible: feasible.then_some(0.125),
            mean_soft_feasible: feasible.then_some(1.5),
            min_hard: 0,
            mean_hard: 3.5,
            num_feasible: usize::from(feasible),
            num_optimal: None,
            mean_crowding: (epoch > 0).then_some(12.5),
            max_crowding: (epoch > 0).then_some(40),
            elapsed_seconds: 0.75,
        }
    }

    #[test]
    fn round_trip_keeps_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t/trace.csv");
        let recs = vec![record(0, false), record(1, true)];
        write_trace_csv(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_COLUMNS.join(","));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "0,2800.5,2900.25,,,0,3.5,0,,,,0.75"
        );
        assert_eq!(read_trace_csv(&path).unwrap(), recs);
    }
}
