//! Plain CSV readers and writers for matrices, edge lists and traces.
//!
//! Numbers are written as `{:.16e}`, which is enough digits to read back the
//! same `f64`.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::admm::IterationRecord;
use crate::error::{Error, Result};
use crate::model::{Dataset, EdgeSet, SymmetricMatrix};
use crate::prior::PenaltySchedule;

fn parse_line(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| format!("{:?}: {e}", f.trim()))
        })
        .collect()
}

/// Reads a rectangular table of decimals. A first line that does not parse
/// as numbers is taken as a header and skipped; blank lines are ignored.
pub fn read_table(reader: impl BufRead) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen_first = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_line(&line);
        let first = !seen_first;
        seen_first = true;
        let row = match parsed {
            Ok(r) => r,
            Err(_) if first => continue,
            Err(msg) => return Err(Error::Parse { line: i + 1, msg }),
        };
        if let Some(w) = rows.first().map(Vec::len) {
            if row.len() != w {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("{} fields, expected {w}", row.len()),
                });
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(n, m, rows.into_iter().flatten()))
}

pub fn write_table(mut w: impl Write, m: &DMatrix<f64>, header: Option<&[String]>) -> Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for i in 0..m.nrows() {
        let fields: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_symmetric(reader: impl BufRead) -> Result<SymmetricMatrix> {
    SymmetricMatrix::new(read_table(reader)?)
}

pub fn read_dataset(reader: impl BufRead) -> Result<Dataset> {
    Dataset::new(read_table(reader)?)
}

/// One `u,v` pair per line, 0-based. A non-numeric first line is a header.
/// The vertex count must be supplied since isolated vertices leave no trace.
pub fn read_edges(reader: impl BufRead, order: usize) -> Result<EdgeSet> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [u, v] => u.parse::<usize>().ok().zip(v.parse::<usize>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => pairs.push(p),
            None if i == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected u,v, got {t:?}"),
                })
            }
        }
    }
    EdgeSet::new(order, pairs)
}

pub fn write_edges(mut w: impl Write, edges: &EdgeSet) -> Result<()> {
    for (u, v) in edges.edges() {
        writeln!(w, "{u},{v}")?;
    }
    Ok(())
}

/// Columns `index,H,h,tau,g` with 1-based index; `H` and `h` are blank on the
/// last row since they have one entry fewer than there are nodes.
pub fn write_schedule(mut w: impl Write, sched: &PenaltySchedule) -> Result<()> {
    writeln!(w, "index,H,h,tau,g")?;
    let (big_h, small_h) = (sched.rank_weights(), sched.lovasz_weights());
    for i in 0..sched.order() {
        let opt = |s: &[f64]| s.get(i).map_or(String::new(), |v| format!("{v:.16e}"));
        writeln!(
            w,
            "{},{},{},{},{:.16e}",
            i + 1,
            opt(big_h),
            opt(small_h),
            sched.expected_degrees()[i],
            sched.node_penalties()[i]
        )?;
    }
    Ok(())
}

/// One row per ranking round, or one row per iteration when there were none.
pub fn write_trace(mut w: impl Write, records: &[IterationRecord]) -> Result<()> {
    writeln!(
        w,
        "iteration,primal_residual,dual_residual,round,sweeps,asymmetry,ranking_changes,disagreements,objective"
    )?;
    for r in records {
        let head = format!(
            "{},{:.6e},{:.6e}",
            r.iteration, r.primal_residual, r.dual_residual
        );
        if r.rounds.is_empty() {
            writeln!(w, "{head},,,,,,")?;
        }
        for t in &r.rounds {
            writeln!(
                w,
                "{head},{},{},{:.6e},{},{},{:.10e}",
                t.round, t.sweeps, t.asymmetry, t.ranking_changes, t.disagreements, t.objective
            )?;
        }
    }
    Ok(())
}
