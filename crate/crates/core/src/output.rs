//! CSV and JSON writers for step records, comparison tables and timing
//! tables.
//!
//! Step-record CSV files open with one `#` metadata line, then a header row
//! whose column order is fixed for a given [`FORMAT_VERSION`]. The JSON
//! form carries the same metadata and one object per record keyed by the
//! [`StepRecord`] field names.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RunReport, StepRecord};
use crate::properties::PcmProperties;
use crate::scenario::{ComparisonReport, TimingRow};

/// Version of the step-record column layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown output format `{other}`"
            ))),
        }
    }
}

/// Provenance attached to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub artifact: String,
    pub version: String,
    pub format_version: u32,
    pub config_sha256: String,
    pub model: String,
    pub scenario: String,
    pub dt: f64,
    pub n_lay: usize,
}

impl Metadata {
    pub fn for_run(report: &RunReport, config_sha256: &str) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format_version: FORMAT_VERSION,
            config_sha256: config_sha256.into(),
            model: report.model.to_string(),
            scenario: report.scenario.clone(),
            dt: report.dt,
            n_lay: report.n_lay,
        }
    }

    fn comment_line(&self) -> String {
        format!(
            "# {} {} format={} config_sha256={} model={} scenario={} dt={} n_lay={}\n",
            self.artifact,
            self.version,
            self.format_version,
            self.config_sha256,
            self.model,
            self.scenario,
            self.dt,
            self.n_lay
        )
    }
}

/// Fixed scalar columns, in order, ahead of the per-layer columns.
pub const SCALAR_COLUMNS: [&str; 11] = [
    "clock",
    "t_int",
    "q_ref_per_pipe",
    "q_sec_per_pipe",
    "q_pcm_per_capsule",
    "charge_ratio",
    "t_sec_out",
    "t_sec_wall",
    "h_ref_out",
    "t_ref_out",
    "reverse_gradient",
];

/// Trace columns after the per-layer columns; entries are `;`-separated.
pub const TRACE_COLUMNS: [&str; 3] = [
    "sub_interval_durations",
    "sub_interval_layers",
    "sub_interval_q_pcm",
];

/// Header row for `n_lay` layers.
pub fn csv_header(n_lay: usize) -> Vec<String> {
    let mut header: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=n_lay).map(|k| format!("h_layer_{k}")));
    header.extend((1..=n_lay).map(|k| format!("t_layer_{k}")));
    header.extend(TRACE_COLUMNS.iter().map(|s| s.to_string()));
    header
}

fn joined<T>(items: impl Iterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.map(f).collect::<Vec<_>>().join(";")
}

fn csv_row(record: &StepRecord, props: &PcmProperties) -> Vec<String> {
    let mut row = vec![
        record.clock.to_string(),
        record.t_int.to_string(),
        record.q_ref_per_pipe.to_string(),
        record.q_sec_per_pipe.to_string(),
        record.q_pcm_per_capsule.to_string(),
        record.charge_ratio.to_string(),
        record.t_sec_out.to_string(),
        record.t_sec_wall.to_string(),
        record.h_ref_out.to_string(),
        record.t_ref_out.to_string(),
        record.reverse_gradient.to_string(),
    ];
    row.extend(record.layer_enthalpies.iter().map(f64::to_string));
    row.extend(record.layer_temperatures(props).iter().map(f64::to_string));
    let trace = &record.sub_intervals;
    row.push(joined(trace.iter(), |s| s.duration.to_string()));
    row.push(joined(trace.iter(), |s| {
        s.active_layer
            .map_or_else(|| "-".to_string(), |k| k.to_string())
    }));
    row.push(joined(trace.iter(), |s| s.q_pcm.to_string()));
    row
}

/// Writes the step records of a run as CSV.
pub fn write_records_csv<W: Write>(
    mut out: W,
    report: &RunReport,
    props: &PcmProperties,
    config_sha256: &str,
) -> Result<()> {
    out.write_all(
        Metadata::for_run(report, config_sha256)
            .comment_line()
            .as_bytes(),
    )?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(csv_header(report.n_lay))?;
    for record in &report.records {
        writer.write_record(csv_row(record, props))?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    clock: f64,
    t_int: f64,
    q_ref_per_pipe: f64,
    q_sec_per_pipe: f64,
    q_pcm_per_capsule: f64,
    charge_ratio: f64,
    t_sec_out: f64,
    t_sec_wall: f64,
    h_ref_out: f64,
    t_ref_out: f64,
    reverse_gradient: bool,
    layer_enthalpies: &'a [f64],
    layer_temperatures: Vec<f64>,
    sub_intervals: &'a [crate::model::SubInterval],
}

#[derive(Serialize)]
struct JsonRun<'a> {
    metadata: Metadata,
    records: Vec<JsonRecord<'a>>,
}

/// Writes the step records of a run as one JSON document.
pub fn write_records_json<W: Write>(
    mut out: W,
    report: &RunReport,
    props: &PcmProperties,
    config_sha256: &str,
) -> Result<()> {
    let records = report
        .records
        .iter()
        .map(|r| JsonRecord {
            clock: r.clock,
            t_int: r.t_int,
            q_ref_per_pipe: r.q_ref_per_pipe,
            q_sec_per_pipe: r.q_sec_per_pipe,
            q_pcm_per_capsule: r.q_pcm_per_capsule,
            charge_ratio: r.charge_ratio,
            t_sec_out: r.t_sec_out,
            t_sec_wall: r.t_sec_wall,
            h_ref_out: r.h_ref_out,
            t_ref_out: r.t_ref_out,
            reverse_gradient: r.reverse_gradient,
            layer_enthalpies: &r.layer_enthalpies,
            layer_temperatures: r.layer_temperatures(props),
            sub_intervals: &r.sub_intervals,
        })
        .collect();
    let doc = JsonRun {
        metadata: Metadata::for_run(report, config_sha256),
        records,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_records<W: Write>(
    out: W,
    format: OutputFormat,
    report: &RunReport,
    props: &PcmProperties,
    config_sha256: &str,
) -> Result<()> {
    match format {
        OutputFormat::Csv => write_records_csv(out, report, props, config_sha256),
        OutputFormat::Json => write_records_json(out, report, props, config_sha256),
    }
}

/// One row of the accuracy table: the error summary of one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub dt: f64,
    pub max_error: f64,
    pub mean_error: f64,
    pub speedup: f64,
    pub oracle_steps: usize,
    pub candidate_steps: usize,
}

impl From<&ComparisonReport> for ComparisonRow {
    fn from(r: &ComparisonReport) -> Self {
        Self {
            scenario: r.scenario.clone(),
            dt: r.candidate_dt,
            max_error: r.max_error,
            mean_error: r.mean_error,
            speedup: r.speedup,
            oracle_steps: r.oracle_steps,
            candidate_steps: r.candidate_steps,
        }
    }
}

fn write_table<W: Write, T: Serialize>(out: W, format: OutputFormat, rows: &[T]) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Accuracy table, one row per scenario and candidate step.
pub fn write_comparisons<W: Write>(
    out: W,
    format: OutputFormat,
    reports: &[ComparisonReport],
) -> Result<()> {
    let rows: Vec<ComparisonRow> = reports.iter().map(ComparisonRow::from).collect();
    write_table(out, format, &rows)
}

/// Timing table, one row per model and step.
pub fn write_timings<W: Write>(out: W, format: OutputFormat, rows: &[TimingRow]) -> Result<()> {
    write_table(out, format, rows)
}
