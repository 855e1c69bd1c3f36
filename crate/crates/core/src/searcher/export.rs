//! Wide CSV export of sweep tables: one row per grid point, one column per
//! report quantity.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::SweepTable;
use crate::error::Result;
use crate::report::{csv_err, RelationOutcome};

/// Leading columns, before the parameter columns.
pub const SWEEP_FIXED_COLUMNS: [&str; 1] = ["descriptor"];

fn moment_columns(n: usize) -> Vec<String> {
    let mut cols = Vec::new();
    for quad in ["q", "p"] {
        cols.extend((1..=n).map(|i| format!("mean_{quad}_{i}")));
    }
    for quad in ["q", "p"] {
        for i in 1..=n {
            cols.extend((i..=n).map(|j| format!("cov_{quad}_{i}_{j}")));
        }
    }
    cols
}

/// Writes the table with columns `descriptor`, `param_<name>…`, the moment
/// entries (`mean_q_1`, `cov_q_1_2`, … with 1-based particle labels), then
/// for each report `<key>.lhs`, `.rhs`, `.slack`, `.holds` and one
/// `<key>.<sub_value>` column per sub-value. Skipped relations get a
/// `<name>.status` column reading `not_applicable`. Cells a row does not
/// define are left empty.
pub fn write_sweep_csv<W: Write>(out: W, table: &SweepTable) -> Result<()> {
    let n = table.family.n_particles();
    let rows: Vec<BTreeMap<String, String>> = table
        .rows
        .iter()
        .map(|row| {
            let mut cells = BTreeMap::new();
            let m = &row.moments;
            for i in 0..n {
                cells.insert(format!("mean_q_{}", i + 1), m.mean_q[i].to_string());
                cells.insert(format!("mean_p_{}", i + 1), m.mean_p[i].to_string());
                for j in i..n {
                    cells.insert(format!("cov_q_{}_{}", i + 1, j + 1), m.cov_q[i][j].to_string());
                    cells.insert(format!("cov_p_{}_{}", i + 1, j + 1), m.cov_p[i][j].to_string());
                }
            }
            for o in &row.outcomes {
                match o {
                    RelationOutcome::Evaluated(r) => {
                        let k = r.key();
                        cells.insert(format!("{k}.lhs"), r.lhs.to_string());
                        cells.insert(format!("{k}.rhs"), r.rhs.to_string());
                        cells.insert(format!("{k}.slack"), r.slack.to_string());
                        cells.insert(format!("{k}.holds"), r.holds.to_string());
                        for (s, v) in &r.sub_values {
                            cells.insert(format!("{k}.{s}"), v.to_string());
                        }
                    }
                    RelationOutcome::NotApplicable { name, .. } => {
                        cells.insert(format!("{name}.status"), "not_applicable".to_string());
                    }
                }
            }
            cells
        })
        .collect();

    let moments = moment_columns(n);
    let fixed: BTreeSet<&String> = moments.iter().collect();
    let report_cols: BTreeSet<&String> =
        rows.iter().flat_map(|r| r.keys()).filter(|k| !fixed.contains(k)).collect();

    let mut header: Vec<String> = SWEEP_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(table.param_names.iter().map(|p| format!("param_{p}")));
    header.extend(moments.iter().cloned());
    header.extend(report_cols.iter().map(|s| s.to_string()));

    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(csv_err)?;
    for (row, cells) in table.rows.iter().zip(&rows) {
        let mut rec: Vec<String> = vec![row.descriptor.clone()];
        rec.extend(row.params.iter().map(|p| p.to_string()));
        for col in moments.iter().chain(report_cols.iter().copied()) {
            rec.push(cells.get(col).cloned().unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
