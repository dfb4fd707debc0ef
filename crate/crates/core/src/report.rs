//! CSV writers. Floats use Rust's shortest round-trip formatting, so equal
//! values always produce identical bytes.

use std::io::Write;

use crate::analysis::TypeCountTable;
use crate::gd::GdRun;
use crate::reference::ReferenceRow;
use crate::sim::{IterationOutcome, SweepRow};
use crate::Result;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

/// `type_N0,…,type_Nr,count`; all types, `N_r` descending first.
pub fn write_type_table<W: Write>(w: W, table: &TypeCountTable) -> Result<()> {
    let mut out = writer(w);
    let mut header: Vec<String> = (0..=table.load).map(|s| format!("type_N{s}")).collect();
    header.push("count".into());
    out.write_record(&header)?;
    for (ty, c) in table.types_descending() {
        let mut rec: Vec<String> = ty.counts().iter().map(ToString::to_string).collect();
        rec.push(c.passing.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `row,N2,N1,N0,MCC,UC_MMC,CPGC` with the enumerated count of each row's
/// type for the three schedules.
pub fn write_reference_table<W: Write>(w: W, rows: &[ReferenceRow], tables: &[TypeCountTable; 3]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["row", "N2", "N1", "N0", "MCC", "UC_MMC", "CPGC"])?;
    for row in rows {
        let ty = row.cumulative_type();
        let mut rec = vec![row.label.to_string()];
        rec.extend(row.actual.iter().map(ToString::to_string));
        rec.extend(tables.iter().map(|t| t.passing(&ty).to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `t,<column>…` with one value column per entry of `columns`.
pub fn write_curves<W: Write>(w: W, columns: &[String], grid: &[f64], values: &[Vec<f64>]) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(columns.iter().cloned());
    out.write_record(&header)?;
    for (i, t) in grid.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(values.iter().map(|col| col[i].to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `t,cdf`
pub fn write_cdf<W: Write>(w: W, grid: &[f64], cdf: &[f64]) -> Result<()> {
    write_curves(w, &["cdf".to_string()], grid, &[cdf.to_vec()])
}

pub const SWEEP_HEADER: [&str; 8] = [
    "scheme",
    "tolerance",
    "mean_T",
    "ci_T",
    "mean_load",
    "ci_load",
    "mean_volume",
    "ci_volume",
];

pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in rows {
        let a = &r.aggregate;
        out.write_record([
            r.scheme.slug().to_string(),
            r.tolerance.to_string(),
            a.time.mean.to_string(),
            a.time.ci.to_string(),
            a.load.mean.to_string(),
            a.load.ci.to_string(),
            a.volume.mean.to_string(),
            a.volume.ci.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_sweep(&mut buf, rows)?;
    Ok(buf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Time,
    Load,
    Volume,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Time, Metric::Load, Metric::Volume];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Time => "T",
            Metric::Load => "load",
            Metric::Volume => "volume",
        }
    }
}

/// Long format for plotting: `scheme,tolerance,metric,value,ci`.
pub fn write_metric_long<W: Write>(w: W, rows: &[SweepRow], metric: Metric) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["scheme", "tolerance", "metric", "value", "ci"])?;
    for r in rows {
        let s = match metric {
            Metric::Time => r.aggregate.time,
            Metric::Load => r.aggregate.load,
            Metric::Volume => r.aggregate.volume,
        };
        out.write_record([
            r.scheme.slug().to_string(),
            r.tolerance.to_string(),
            metric.name().to_string(),
            s.mean.to_string(),
            s.ci.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Per-trial dump: `trial,T,load,volume,recovered`.
pub fn write_trace<W: Write>(w: W, outcomes: &[IterationOutcome]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["trial", "T", "load", "volume", "recovered"])?;
    for (i, o) in outcomes.iter().enumerate() {
        out.write_record([
            i.to_string(),
            o.completion_time.to_string(),
            o.load.to_string(),
            o.volume.to_string(),
            o.recovered.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `iter,loss,T,recovered_blocks`; row 0 is the starting point.
pub fn write_gd<W: Write>(w: W, run: &GdRun) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["iter", "loss", "T", "recovered_blocks"])?;
    out.write_record(["0".to_string(), run.losses[0].to_string(), "0".into(), "0".into()])?;
    for (k, it) in run.iterations.iter().enumerate() {
        out.write_record([
            (k + 1).to_string(),
            run.losses[k + 1].to_string(),
            it.completion_time.to_string(),
            it.recovered.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `iter,loss` for a reference trajectory.
pub fn write_losses<W: Write>(w: W, losses: &[f64]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["iter", "loss"])?;
    for (k, l) in losses.iter().enumerate() {
        out.write_record([k.to_string(), l.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
