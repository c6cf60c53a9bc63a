//! Reading and writing trajectories, graphs and edge gains.
//!
//! Trajectories are CSV with a `t,<name_1>,...,<name_D>` header. Values are written
//! in Rust's shortest round-trip decimal form (at most 17 significant digits), so
//! a written trajectory reads back bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::search::Edge;
use crate::types::{validate_trajectory, CausalGraph, GraphJson, Trajectory};

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            Error::Parse { line, message: format!("expected {expected_len} fields, found {len}") }
        }
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}

pub fn read_trajectory<R: Read>(reader: R) -> Result<Trajectory> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() || &header[0] != "t" {
        return Err(Error::Parse { line: 1, message: "header must start with column 't'".into() });
    }
    if header.len() < 2 {
        return Err(Error::Parse { line: 1, message: "no data columns".into() });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {} ('{}') is not a number: '{field}'", col + 1, &header[col]),
            })?;
            values.push(v);
        }
        times.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    if times.is_empty() {
        return Err(Error::Parse { line: 1, message: "no samples".into() });
    }
    validate_trajectory(&times, &rows, &names)?;
    Trajectory::from_rows(times, &rows, names)
}

/// Reads and validates a trajectory CSV file.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Trajectory> {
    read_trajectory(BufReader::new(File::open(path)?))
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend(traj.names().iter().cloned());
    w.write_record(&header).map_err(csv_error)?;
    for (i, t) in traj.timeline().times().iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend((0..traj.dim()).map(|j| traj.value(i, j).to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    write_trajectory(traj, BufWriter::new(File::create(path)?))
}

pub fn write_graph_json(graph: &CausalGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, &graph.to_json())?;
    writeln!(f)?;
    Ok(())
}

pub fn read_graph_json(path: impl AsRef<Path>) -> Result<CausalGraph> {
    let g: GraphJson = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    CausalGraph::from_json(&g)
}

/// Writes `source,target,gain` rows.
pub fn write_gains<W: Write>(gains: &[(Edge, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["source", "target", "gain"]).map_err(csv_error)?;
    for ((i, j), g) in gains {
        w.write_record([i.to_string(), j.to_string(), g.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gains_csv(gains: &[(Edge, f64)], path: impl AsRef<Path>) -> Result<()> {
    write_gains(gains, BufWriter::new(File::create(path)?))
}

pub fn read_gains<R: Read>(reader: R) -> Result<Vec<(Edge, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Parse { line, message: format!("invalid {what}") };
        if record.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 fields, found {}", record.len()) });
        }
        let i: usize = record[0].parse().map_err(|_| bad("source"))?;
        let j: usize = record[1].parse().map_err(|_| bad("target"))?;
        let g: f64 = record[2].parse().map_err(|_| bad("gain"))?;
        out.push(((i, j), g));
    }
    Ok(out)
}

pub fn read_gains_csv(path: impl AsRef<Path>) -> Result<Vec<(Edge, f64)>> {
    read_gains(BufReader::new(File::open(path)?))
}
