//! CSV output: the sweep metrics table and per-figure plot data.
//!
//! Numbers use Rust's shortest round-trip `Display` formatting, which is
//! locale independent and stable across platforms. Lines end in `\n`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::SimError;
use crate::simulation::{Estimate, MetricsRow};

pub const SCHEMA_VERSION: u32 = 1;

pub const METRICS_HEADER: [&str; 12] = [
    "scheme",
    "lambda_e",
    "density",
    "grid_power_w",
    "grid_power_stderr",
    "sum_rate_bps",
    "sum_rate_stderr",
    "ee_bits_per_joule",
    "ee_stderr",
    "unconverged_frac",
    "unserved_frac",
    "samples",
];

fn schema_comment(table: &str) -> String {
    format!("# hcn-sim {table} schema v{SCHEMA_VERSION}\n")
}

fn metrics_record(row: &MetricsRow) -> [String; 12] {
    [
        row.scheme.label().to_string(),
        row.lambda_e.to_string(),
        row.density.to_string(),
        row.grid_power.mean.to_string(),
        row.grid_power.stderr.to_string(),
        row.sum_rate.mean.to_string(),
        row.sum_rate.stderr.to_string(),
        row.energy_efficiency.mean.to_string(),
        row.energy_efficiency.stderr.to_string(),
        row.unconverged_fraction.to_string(),
        row.unserved_fraction.to_string(),
        row.samples.to_string(),
    ]
}

/// Streams metrics rows, flushing after each so an interrupted sweep keeps
/// every completed cell.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(mut sink: W) -> io::Result<Self> {
        sink.write_all(schema_comment("metrics").as_bytes())?;
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        inner.write_record(METRICS_HEADER)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn write_row(&mut self, row: &MetricsRow) -> io::Result<()> {
        self.inner.write_record(metrics_record(row))?;
        self.inner.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}

/// Renders a whole metrics table in memory.
pub fn metrics_csv(rows: &[MetricsRow]) -> io::Result<String> {
    let mut w = MetricsWriter::new(Vec::new())?;
    for r in rows {
        w.write_row(r)?;
    }
    let bytes = w.into_inner()?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

/// One of the three reproduced figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Power,
    Throughput,
    EnergyEfficiency,
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::Power, Figure::Throughput, Figure::EnergyEfficiency];

    pub fn stem(self) -> &'static str {
        match self {
            Figure::Power => "power",
            Figure::Throughput => "throughput",
            Figure::EnergyEfficiency => "ee",
        }
    }

    fn value_column(self) -> &'static str {
        match self {
            Figure::Power => "grid_power_w",
            Figure::Throughput => "sum_rate_bps",
            Figure::EnergyEfficiency => "ee_bits_per_joule",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Figure::Power => "On-grid power consumption",
            Figure::Throughput => "Network throughput",
            Figure::EnergyEfficiency => "Energy efficiency",
        }
    }

    fn y_label(self) -> &'static str {
        match self {
            Figure::Power => "grid power (W)",
            Figure::Throughput => "sum rate (bit/s)",
            Figure::EnergyEfficiency => "energy efficiency (bit/J)",
        }
    }

    fn pick(self, row: &MetricsRow) -> Estimate {
        match self {
            Figure::Power => row.grid_power,
            Figure::Throughput => row.sum_rate,
            Figure::EnergyEfficiency => row.energy_efficiency,
        }
    }
}

/// `(scheme, lambda_e)` series in first-appearance order.
pub fn series_keys(rows: &[MetricsRow]) -> Vec<(String, f64)> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in rows {
        let key = (r.scheme.label().to_string(), r.lambda_e);
        if !keys.iter().any(|k| k.0 == key.0 && k.1.to_bits() == key.1.to_bits()) {
            keys.push(key);
        }
    }
    keys
}

/// Long-format table for one figure: `scheme,lambda_e,density,<value>,stderr`.
pub fn figure_csv(rows: &[MetricsRow], figure: Figure) -> io::Result<String> {
    let mut buf = schema_comment(figure.stem()).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        w.write_record(["scheme", "lambda_e", "density", figure.value_column(), "stderr"])?;
        for r in rows {
            let e = figure.pick(r);
            w.write_record([
                r.scheme.label().to_string(),
                r.lambda_e.to_string(),
                r.density.to_string(),
                e.mean.to_string(),
                e.stderr.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Gnuplot script drawing every `(scheme, lambda_e)` series of a figure
/// from its long-format CSV.
pub fn gnuplot_script(rows: &[MetricsRow], figure: Figure) -> String {
    let stem = figure.stem();
    let mut s = String::new();
    s.push_str(&format!("# {} versus user density\n", figure.title()));
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{stem}.png'\n"));
    s.push_str(&format!("set title '{}'\n", figure.title()));
    s.push_str("set xlabel 'users per macro cell'\n");
    s.push_str(&format!("set ylabel '{}'\n", figure.y_label()));
    s.push_str("set key outside right\nset grid\n");
    let clauses: Vec<String> = series_keys(rows)
        .iter()
        .map(|(scheme, lambda)| {
            format!(
                "'{stem}.csv' skip 2 using 3:(strcol(1) eq '{scheme}' && $2 == {lambda} ? $4 : 1/0) \
                 with linespoints title '{scheme}, {lambda} J/s'"
            )
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&clauses.join(", \\\n     "));
    s.push('\n');
    s
}

/// Writes `power.csv`, `throughput.csv`, `ee.csv` and a `.gp` script for
/// each into `dir`, returning the paths written.
pub fn emit_plot_data(rows: &[MetricsRow], dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    if rows.is_empty() {
        return Err(SimError::EmptyGrid("metrics rows"));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for figure in Figure::ALL {
        let csv_path = dir.join(format!("{}.csv", figure.stem()));
        std::fs::write(&csv_path, figure_csv(rows, figure)?)?;
        written.push(csv_path);
        let gp_path = dir.join(format!("{}.gp", figure.stem()));
        std::fs::write(&gp_path, gnuplot_script(rows, figure))?;
        written.push(gp_path);
    }
    Ok(written)
}

/// Opens `path` for streaming metrics rows.
pub fn create_metrics_file(path: &Path) -> io::Result<MetricsWriter<BufWriter<File>>> {
    MetricsWriter::new(BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::SchemeKind;

    fn row(scheme: SchemeKind, lambda_e: f64, density: f64) -> MetricsRow {
        MetricsRow {
            scheme,
            density,
            lambda_e,
            grid_power: Estimate { mean: 1000.5, stderr: 2.25 },
            sum_rate: Estimate { mean: 3.0e6, stderr: 1e4 },
            energy_efficiency: Estimate { mean: 2998.5007496251874, stderr: 10.0 },
            unconverged_fraction: 0.0,
            unserved_fraction: 0.125,
            samples: 4,
            causality_violations: 0,
        }
    }

    #[test]
    fn header_is_exact() {
        let text = metrics_csv(&[]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# hcn-sim metrics schema v1"));
        assert_eq!(
            lines.next(),
            Some("scheme,lambda_e,density,grid_power_w,grid_power_stderr,sum_rate_bps,sum_rate_stderr,ee_bits_per_joule,ee_stderr,unconverged_frac,unserved_frac,samples")
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn rows_use_plain_decimal_formatting() {
        let text = metrics_csv(&[row(SchemeKind::ProposedJoint, 44.0, 25.0)]).unwrap();
        let last = text.lines().last().unwrap();
        assert_eq!(last, "proposed_joint,44,25,1000.5,2.25,3000000,10000,2998.5007496251874,10,0,0.125,4");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn thirty_rows_make_six_series() {
        let mut rows = Vec::new();
        for scheme in SchemeKind::ALL {
            for lambda in [44.0, 45.0] {
                for d in [0.0, 100.0, 200.0, 300.0, 400.0] {
                    rows.push(row(scheme, lambda, d));
                }
            }
        }
        assert_eq!(series_keys(&rows).len(), 6);
        let script = gnuplot_script(&rows, Figure::Power);
        assert_eq!(script.matches("with linespoints").count(), 6);
        let csv = figure_csv(&rows, Figure::Power).unwrap();
        assert_eq!(csv.lines().count(), 2 + 30);
    }

    #[test]
    fn empty_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plot_data(&[], dir.path()), Err(SimError::EmptyGrid(_))));
    }

    #[test]
    fn plot_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [row(SchemeKind::Joint, 44.0, 10.0)];
        let paths = emit_plot_data(&rows, dir.path()).unwrap();
        assert_eq!(paths.len(), 6);
        for p in paths {
            assert!(p.exists(), "{}", p.display());
        }
    }
}
