use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{AggregateRow, SweepOutput, SweepRecord};
use super::ExperimentError;

pub const RECORD_HEADER: [&str; 17] = [
    "topology",
    "rows",
    "cols",
    "mode",
    "lambda_mean",
    "sigma",
    "network_sample",
    "source",
    "target",
    "distance",
    "final_lambda",
    "entanglement",
    "destroyed",
    "integrity",
    "connectivity",
    "failed",
    "seed",
];

pub const AGGREGATE_HEADER: [&str; 7] =
    ["lambda_mean", "sigma", "distance", "mean_entanglement", "mean_integrity", "mean_connectivity", "count"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

/// `x` with 9 significant digits, as C's `%.9g`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn record_fields(r: &SweepRecord) -> [String; 17] {
    [
        r.topology.to_string(),
        r.rows.to_string(),
        r.cols.to_string(),
        r.mode.to_string(),
        fmt_sig9(r.lambda_mean),
        fmt_sig9(r.sigma),
        r.network_sample.to_string(),
        r.source.to_string(),
        r.target.to_string(),
        r.distance.to_string(),
        fmt_sig9(r.final_lambda),
        fmt_sig9(r.entanglement),
        r.destroyed.to_string(),
        fmt_sig9(r.integrity),
        fmt_sig9(r.connectivity),
        r.failed.to_string(),
        r.seed.to_string(),
    ]
}

fn aggregate_fields(a: &AggregateRow) -> [String; 7] {
    [
        fmt_sig9(a.lambda_mean),
        fmt_sig9(a.sigma),
        a.distance.to_string(),
        fmt_sig9(a.mean_entanglement),
        fmt_sig9(a.mean_integrity),
        fmt_sig9(a.mean_connectivity),
        a.count.to_string(),
    ]
}

fn csv_bytes<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn jsonl_bytes<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).expect("plain data serializes");
        out.push(b'\n');
    }
    out
}

/// Renders records and aggregates in `format`.
pub fn render(output: &SweepOutput, format: OutputFormat) -> (Vec<u8>, Vec<u8>) {
    match format {
        OutputFormat::Csv => (
            csv_bytes(RECORD_HEADER, output.records.iter().map(record_fields)),
            csv_bytes(AGGREGATE_HEADER, output.aggregates.iter().map(aggregate_fields)),
        ),
        OutputFormat::JsonLines => (jsonl_bytes(&output.records), jsonl_bytes(&output.aggregates)),
    }
}

/// Sibling file for the aggregates: `runs/x.csv` becomes `runs/x.agg.csv`.
pub fn aggregate_path(path: &Path, format: OutputFormat) -> PathBuf {
    let ext = match format {
        OutputFormat::Csv => "agg.csv",
        OutputFormat::JsonLines => "agg.jsonl",
    };
    path.with_extension(ext)
}

/// Writes records to `path` and aggregates next to it. Returns the
/// aggregate path.
pub fn emit(output: &SweepOutput, format: OutputFormat, path: &Path) -> Result<PathBuf, ExperimentError> {
    let (records, aggregates) = render(output, format);
    let agg = aggregate_path(path, format);
    write_file(path, &records)?;
    write_file(&agg, &aggregates)?;
    Ok(agg)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let io = |source| ExperimentError::Io { path: path.to_path_buf(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.flush().map_err(io)
}
