//! Rendering of rows as CSV, markdown or JSON lines.
//!
//! CSV and JSON lines carry full double precision (shortest round-trip
//! representation); markdown is for reading and rounds.

use birthflow_core::DistanceTable;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

/// A record with a markdown rendering alongside its serde form.
pub trait Row: Serialize {
    fn header() -> &'static [&'static str];
    fn markdown_cells(&self) -> Vec<String>;
}

pub fn render<R: Row>(rows: &[R], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            if rows.is_empty() {
                writer.write_record(R::header())?;
            }
            for row in rows {
                writer.serialize(row)?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
        Format::JsonLines => {
            let mut out = String::new();
            for row in rows {
                out.push_str(&serde_json::to_string(row)?);
                out.push('\n');
            }
            Ok(out)
        }
        Format::Markdown => {
            let header = R::header();
            let mut out = format!("| {} |\n", header.join(" | "));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in rows {
                out.push_str(&format!("| {} |\n", row.markdown_cells().join(" | ")));
            }
            Ok(out)
        }
    }
}

/// One cell of the distance table as persisted: `b,t,rho,kmax,grid_size,tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub b: f64,
    pub t: f64,
    pub rho: f64,
    pub kmax: usize,
    pub grid_size: usize,
    pub tail_bound: f64,
}

impl Row for TableRow {
    fn header() -> &'static [&'static str] {
        &["b", "t", "rho", "kmax", "grid_size", "tail_bound"]
    }

    fn markdown_cells(&self) -> Vec<String> {
        vec![
            self.b.to_string(),
            self.t.to_string(),
            format!("{:.3}", self.rho),
            self.kmax.to_string(),
            self.grid_size.to_string(),
            format!("{:.1e}", self.tail_bound),
        ]
    }
}

pub fn table_rows(table: &DistanceTable) -> Vec<TableRow> {
    table
        .iter()
        .map(|(b, t, rho, meta)| TableRow {
            b,
            t,
            rho,
            kmax: meta.kmax,
            grid_size: meta.grid_size,
            tail_bound: meta.tail_bound,
        })
        .collect()
}

/// The distance table in the chosen format. Markdown uses the grid layout:
/// one row per `b`, one column per `t`, three decimals.
pub fn render_table(table: &DistanceTable, format: Format) -> Result<String, CliError> {
    match format {
        Format::Markdown => {
            let mut out = String::from("| b \\ t |");
            for t in &table.t_values {
                out.push_str(&format!(" {t} |"));
            }
            out.push('\n');
            out.push_str(&format!("|---|{}\n", "---|".repeat(table.t_values.len())));
            for (bi, b) in table.b_values.iter().enumerate() {
                out.push_str(&format!("| {b} |"));
                for ti in 0..table.t_values.len() {
                    out.push_str(&format!(" {:.3} |", table.rho(bi, ti)));
                }
                out.push('\n');
            }
            Ok(out)
        }
        _ => render(&table_rows(table), format),
    }
}

pub fn read_table_csv(text: &str) -> Result<Vec<TableRow>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(CliError::from))
        .collect()
}
