//! Tabular output. Empty cells stand for quantities the model does not have.

use std::io::{Read, Write};

use goldenrate_core::params::Field;
use goldenrate_core::state::Trajectory;
use goldenrate_core::thermo::thermo_report;
use serde::Serialize;

pub const SIMULATION_COLUMNS: [&str; 18] = [
    "t_s",
    "n_A",
    "n_B",
    "n_1",
    "n_2",
    "n_C",
    "m",
    "x_A",
    "x_B",
    "x_1",
    "x_2",
    "x_tls",
    "S_total_kB",
    "sigma_AB",
    "sigma_Atls",
    "sigma_Btls",
    "sigma_total",
    "Q_ext_total",
];

/// Appended after the fixed columns.
pub const EXTRA_COLUMNS: [&str; 1] = ["x_C"];

pub const RELATIVE_T_COLUMNS: [&str; 6] = ["T_A_rel", "T_B_rel", "T_1_rel", "T_2_rel", "T_C_rel", "T_tls_rel"];

/// Header plus rows of optional numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    ryu::Buffer::new().format(v).to_string()
}

pub fn simulation_table(traj: &Trajectory, relative_t: bool) -> Table {
    let (p, kind) = (&traj.params, traj.kind);
    let mut columns: Vec<String> = SIMULATION_COLUMNS.iter().chain(&EXTRA_COLUMNS).map(|c| c.to_string()).collect();
    if relative_t {
        columns.extend(RELATIVE_T_COLUMNS.iter().map(|c| c.to_string()));
    }
    let relative = |x: Option<f64>| x.map(|x| p.x0 / x);
    let rows = traj
        .samples
        .iter()
        .map(|sample| {
            let s = &sample.state;
            let r = thermo_report(sample.t, s, p, kind);
            let occ = |f: Field| kind.is_active(f).then(|| s.get(f));
            let mut row = vec![
                Some(sample.t),
                occ(Field::NA),
                occ(Field::NB),
                occ(Field::N1),
                occ(Field::N2),
                occ(Field::NC),
                Some(s.m),
                r.x_a,
                r.x_b,
                r.x_1,
                r.x_2,
                Some(r.x_tls),
                Some(r.s_total),
                r.sigma_ab,
                r.sigma_atls,
                r.sigma_btls,
                r.sigma_total,
                r.q_ext_total,
                r.x_c,
            ];
            if relative_t {
                row.extend([
                    relative(r.x_a),
                    relative(r.x_b),
                    relative(r.x_1),
                    relative(r.x_2),
                    relative(r.x_c),
                    relative(Some(r.x_tls)),
                ]);
            }
            row
        })
        .collect();
    Table { columns, rows }
}

pub fn write_csv<W: Write>(out: W, table: &Table) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.columns)?;
    let mut record = Vec::with_capacity(table.columns.len());
    for row in &table.rows {
        record.clear();
        record.extend(row.iter().map(|v| v.map(format_float).unwrap_or_default()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: `{text}` is not a number")]
    NotANumber { row: usize, column: String, text: String },
}

pub fn read_csv<R: Read>(input: R) -> Result<Table, ReadError> {
    let mut r = csv::Reader::from_reader(input);
    let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>().map(Some).map_err(|_| ReadError::NotANumber {
                    row: i + 1,
                    column: columns[j].clone(),
                    text: cell.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// JSON form: `{"columns": [...], "rows": [[...]]}` with `null` for empty cells.
pub fn write_json<W: Write>(out: W, table: &Table) -> serde_json::Result<()> {
    serde_json::to_writer(out, table)
}
