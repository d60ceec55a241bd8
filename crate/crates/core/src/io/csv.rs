//! CSV export.  Files start with `#` provenance lines followed by a header row.

use std::io::Write;

use crate::energetics::EnergyReport;
use crate::scalar::{to_f64, Real};

/// `t,E1,E2,D,balance_residual,max_theta,max_grad_d,L{p}_theta_acc…,L{p}_gradd_acc…`.
pub fn energy_csv_header<T: Real>(p_list: &[T]) -> String {
    let mut cols: Vec<String> = ["t", "E1", "E2", "D", "balance_residual", "max_theta", "max_grad_d"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(p_list.iter().map(|p| format!("L{}_theta_acc", to_f64(*p))));
    cols.extend(p_list.iter().map(|p| format!("L{}_gradd_acc", to_f64(*p))));
    cols.join(",")
}

fn provenance_lines(w: &mut impl Write, provenance: &str) -> std::io::Result<()> {
    for line in provenance.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_energy_csv<T: Real>(w: &mut impl Write, report: &EnergyReport<T>, provenance: &str) -> std::io::Result<()> {
    provenance_lines(w, provenance)?;
    writeln!(w, "{}", energy_csv_header(&report.p_list))?;
    for s in &report.samples {
        let mut row: Vec<String> = [
            s.t,
            s.e1,
            s.e2,
            s.dissipation,
            s.balance_residual,
            s.max_theta,
            s.max_grad_d,
        ]
        .iter()
        .map(|&v| fmt(to_f64(v)))
        .collect();
        row.extend(s.lp_theta_acc.iter().chain(&s.lp_gradd_acc).map(|&v| fmt(to_f64(v))));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Generic numeric table with a header row.
pub fn write_table_csv(
    w: &mut impl Write,
    provenance: &str,
    header: &[&str],
    rows: &[Vec<f64>],
) -> std::io::Result<()> {
    provenance_lines(w, provenance)?;
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        writeln!(w, "{}", r.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(","))?;
    }
    Ok(())
}
