//! CSV and JSON readers/writers for service, query and reliability input files.
//!
//! Format is chosen by extension: `.json` is a JSON array, anything else is
//! comma-separated with a header row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EnergyQuery, EnergyService};
use crate::reliability::{ProvisionHistory, SocSeries};

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn read_records<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if is_json(path) {
        return Ok(serde_json::from_reader(BufReader::new(file))?);
    }
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn write_records<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    if is_json(path) {
        serde_json::to_writer_pretty(&mut out, records)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        return Ok(());
    }
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_services(path: impl AsRef<Path>) -> Result<Vec<EnergyService>> {
    read_records(path)
}

pub fn read_queries(path: impl AsRef<Path>) -> Result<Vec<EnergyQuery>> {
    read_records(path)
}

pub fn write_services(path: impl AsRef<Path>, services: &[EnergyService]) -> Result<()> {
    write_records(path, services)
}

pub fn write_queries(path: impl AsRef<Path>, queries: &[EnergyQuery]) -> Result<()> {
    write_records(path, queries)
}

#[derive(Debug, Deserialize)]
struct SocRow {
    owner_id: String,
    time_min: i64,
    soc: f64,
}

/// Reads `(owner_id, time_min, soc)` rows, grouped per owner in order of first appearance.
pub fn read_soc_series(path: impl AsRef<Path>) -> Result<Vec<SocSeries>> {
    let rows: Vec<SocRow> = read_records(path)?;
    let mut grouped: Vec<(String, Vec<(i64, f64)>)> = Vec::new();
    for row in rows {
        match grouped.iter_mut().find(|(o, _)| *o == row.owner_id) {
            Some((_, samples)) => samples.push((row.time_min, row.soc)),
            None => grouped.push((row.owner_id, vec![(row.time_min, row.soc)])),
        }
    }
    grouped
        .into_iter()
        .map(|(owner, mut samples)| {
            samples.sort_by_key(|s| s.0);
            SocSeries::new(owner, samples)
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct HistoryRow {
    owner_id: String,
    ss: u64,
    tps: u64,
}

pub fn read_provision_history(path: impl AsRef<Path>) -> Result<Vec<ProvisionHistory>> {
    let rows: Vec<HistoryRow> = read_records(path)?;
    Ok(rows
        .into_iter()
        .map(|r| ProvisionHistory {
            owner_id: r.owner_id,
            successful: r.ss,
            total: r.tps,
        })
        .collect())
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    reliability: f64,
}

/// Reads a single-column `reliability` file of precomputed scores.
pub fn read_reliability_scores(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let rows: Vec<ScoreRow> = read_records(path)?;
    rows.into_iter()
        .map(|r| {
            if (0.0..=1.0).contains(&r.reliability) {
                Ok(r.reliability)
            } else {
                Err(Error::field(
                    "reliability",
                    format!("{} is outside [0, 1]", r.reliability),
                ))
            }
        })
        .collect()
}
