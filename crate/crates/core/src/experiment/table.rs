//! Percentage confusion tables as published: a header row and a first column
//! of pattern names, percentages in the cells.
//!
//! ```text
//! true\pred,L1,L2,R1,...
//! L1,98,2,0,...
//! ```

use std::io::Read;

use super::ExperimentError;
use crate::haptics::{parse, MotorMask};
use crate::stats::ConfusionMatrix;

/// Five repetitions times eleven participants.
pub const DEFAULT_TRIALS_PER_ROW: u64 = 55;

#[derive(Debug, Clone, PartialEq)]
pub struct PercentTable {
    /// Row (true pattern) labels in file order.
    pub rows: Vec<MotorMask>,
    /// Column (perceived pattern) labels in file order.
    pub cols: Vec<MotorMask>,
    pub percent: Vec<Vec<f64>>,
}

fn table_err(line: usize, message: impl ToString) -> ExperimentError {
    ExperimentError::Table {
        line,
        message: message.to_string(),
    }
}

pub fn read_percent_table<R: Read>(input: R) -> Result<PercentTable, ExperimentError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| table_err(1, "empty table"))?
        .map_err(|e| table_err(1, e))?;
    let cols = header
        .iter()
        .skip(1)
        .map(|s| parse(s).map_err(|e| table_err(1, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut percent = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| table_err(line, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != cols.len() + 1 {
            return Err(table_err(
                line,
                format!("expected {} cells, found {}", cols.len() + 1, rec.len()),
            ));
        }
        rows.push(parse(&rec[0]).map_err(|e| table_err(line, e))?);
        let values = rec
            .iter()
            .skip(1)
            .map(|s| {
                let v: f64 = s
                    .parse()
                    .map_err(|e| table_err(line, format!("`{s}`: {e}")))?;
                if !(v >= 0.0) {
                    return Err(table_err(line, format!("negative percentage {v}")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>, _>>()?;
        percent.push(values);
    }
    if rows.len() != cols.len() {
        return Err(table_err(
            0,
            format!("{} rows but {} columns", rows.len(), cols.len()),
        ));
    }
    let mut sorted_rows = rows.clone();
    let mut sorted_cols = cols.clone();
    sorted_rows.sort();
    sorted_cols.sort();
    if sorted_rows != sorted_cols {
        return Err(table_err(1, "row and column labels differ"));
    }
    if sorted_rows.windows(2).any(|w| w[0] == w[1]) {
        return Err(table_err(1, "duplicate pattern label"));
    }
    Ok(PercentTable {
        rows,
        cols,
        percent,
    })
}

/// Converts percentages to counts, `round(p / 100 · trials_per_row)` per
/// cell. Rounding residue in the row sums is kept as is.
pub fn ingest_table(
    table: &PercentTable,
    trials_per_row: u64,
) -> Result<ConfusionMatrix, ExperimentError> {
    let col_index: Vec<usize> = table
        .rows
        .iter()
        .map(|r| {
            table
                .cols
                .iter()
                .position(|c| c == r)
                .ok_or_else(|| table_err(1, format!("no column for {}", r.log_name())))
        })
        .collect::<Result<_, _>>()?;
    let mut counts = Vec::with_capacity(table.rows.len());
    for row in &table.percent {
        let mut out = Vec::with_capacity(col_index.len());
        for &j in &col_index {
            let p = row[j];
            if !(p >= 0.0) {
                return Err(table_err(0, format!("negative percentage {p}")));
            }
            out.push((p / 100.0 * trials_per_row as f64).round() as u64);
        }
        counts.push(out);
    }
    Ok(ConfusionMatrix {
        labels: table.rows.iter().map(|m| m.log_name()).collect(),
        counts,
    })
}
