//! File formats: pool JSON, trade-log CSV and two-column curve CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use polar_amm::pool::{Trade, TradeResult};
use polar_amm::ticks::Segment;
use polar_amm::{FixedDecimal, PoolFile};
use serde::Serialize;

use crate::error::CliError;

pub fn read_pool(path: &Path) -> Result<PoolFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let pool: PoolFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{} is not a valid pool file: {e}", path.display())))?;
    pool.validate()?;
    Ok(pool)
}

pub fn write_pool(path: &Path, pool: &PoolFile) -> Result<(), CliError> {
    fs::write(path, to_json(pool)?)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    std::io::stdout().lock().write_all(to_json(value)?.as_bytes()).map_err(io_err)
}

pub fn read_trades(path: &Path) -> Result<Vec<Trade>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if headers != vec!["seq", "token_in", "token_out", "amount_in"] {
        return Err(CliError::Input(format!(
            "{}: expected header seq,token_in,token_out,amount_in",
            path.display()
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| CliError::Input(format!("{}: {e}", path.display()))))
        .collect()
}

fn csv_to<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(
            fs::File::create(p).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn write_rows<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv_to(sink(path)?);
    for row in rows {
        w.serialize(row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_trades(path: Option<&Path>, trades: &[Trade]) -> Result<(), CliError> {
    if trades.is_empty() {
        let mut w = sink(path)?;
        return writeln!(w, "seq,token_in,token_out,amount_in").map_err(io_err);
    }
    write_rows(path, trades)
}

pub fn write_outputs(path: &Path, outputs: &[TradeResult]) -> Result<(), CliError> {
    if outputs.is_empty() {
        return fs::write(path, "seq,amount_in,amount_out\n").map_err(io_err);
    }
    write_rows(Some(path), outputs)
}

pub fn write_segments(path: &Path, segments: &[Segment]) -> Result<(), CliError> {
    let mut w = csv_to(fs::File::create(path).map_err(io_err)?);
    w.write_record(["segment_index", "angle_from", "angle_to", "liquidity", "delta_in", "delta_out"])
        .map_err(io_err)?;
    for s in segments {
        w.write_record([
            s.index.to_string(),
            s.angle_from.to_string(),
            s.angle_to.to_string(),
            s.liquidity.to_string(),
            s.delta_in.to_string(),
            s.delta_out.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Two-column CSV on stdout.
pub fn print_columns(header: [&str; 2], rows: &[(FixedDecimal, FixedDecimal)]) -> Result<(), CliError> {
    let mut w = csv_to(std::io::stdout().lock());
    w.write_record(header).map_err(io_err)?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()]).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
