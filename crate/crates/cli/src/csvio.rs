//! CSV sinks and sources for diagnostics and bound checks.
//!
//! One row per committed sample, full shortest-roundtrip decimal precision,
//! empty cells for quantities a run does not track. Bodies are byte
//! reproducible for identical configurations.

use std::fmt::Write as _;
use std::path::Path;

use muskat_core::diagnostics::{BoundCheck, DiagnosticsRecord};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const DIAGNOSTICS_HEADER: &str = "t,linf,l2,h_half,h_one,sigma,amplitude,min_f,min_node,max_f,max_node,entropy,arctan_mass,referee_energy,g_hhalf,entropy_diss_spectral,entropy_diss_symmetric,parity_residual,touch_value,touch_curvature,touch_lambda,touch_sigma,d_energy,dd_energy";

fn push_opt(row: &mut String, v: Option<f64>) {
    match v {
        Some(x) => write!(row, ",{x}").unwrap(),
        None => row.push(','),
    }
}

pub fn render_diagnostics(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{}",
            r.t, r.linf, r.l2, r.h_half, r.h_one
        )
        .unwrap();
        push_opt(&mut row, r.sigma);
        push_opt(&mut row, r.amplitude_param);
        write!(row, ",{},{},{},{}", r.min_f, r.min_node, r.max_f, r.max_node).unwrap();
        write!(
            row,
            ",{},{},{},{}",
            r.entropy, r.arctan_mass, r.referee_energy, r.g_hhalf
        )
        .unwrap();
        push_opt(&mut row, r.entropy_diss_spectral);
        push_opt(&mut row, r.entropy_diss_symmetric);
        push_opt(&mut row, r.parity_residual);
        push_opt(&mut row, r.touch_value);
        push_opt(&mut row, r.touch_curvature);
        push_opt(&mut row, r.touch_lambda);
        push_opt(&mut row, r.touch_sigma);
        push_opt(&mut row, r.d_energy);
        push_opt(&mut row, r.dd_energy);
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn write_diagnostics(records: &[DiagnosticsRecord], path: &Path) -> Result<(), CsvError> {
    std::fs::write(path, render_diagnostics(records))?;
    Ok(())
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>, CsvError> {
    let text = std::fs::read_to_string(path)?;
    parse_diagnostics(&text, &path.display().to_string())
}

fn field_f64(s: &str, origin: &str, line: usize, col: &str) -> Result<f64, CsvError> {
    s.parse::<f64>().map_err(|e| CsvError::Parse {
        path: origin.to_string(),
        line,
        msg: format!("column {col}: bad float '{s}': {e}"),
    })
}

fn field_opt(s: &str, origin: &str, line: usize, col: &str) -> Result<Option<f64>, CsvError> {
    if s.is_empty() {
        Ok(None)
    } else {
        field_f64(s, origin, line, col).map(Some)
    }
}

pub fn parse_diagnostics(text: &str, origin: &str) -> Result<Vec<DiagnosticsRecord>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == DIAGNOSTICS_HEADER => {}
        Some((_, h)) => {
            return Err(CsvError::Parse {
                path: origin.to_string(),
                line: 1,
                msg: format!("unexpected header '{h}'"),
            })
        }
        None => {
            return Err(CsvError::Parse {
                path: origin.to_string(),
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let ncols = DIAGNOSTICS_HEADER.split(',').count();
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ncols {
            return Err(CsvError::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: format!("expected {ncols} columns, found {}", cells.len()),
            });
        }
        let lineno = i + 1;
        let g = |j: usize, col: &str| field_f64(cells[j], origin, lineno, col);
        let o = |j: usize, col: &str| field_opt(cells[j], origin, lineno, col);
        let idx = |j: usize, col: &str| -> Result<usize, CsvError> {
            cells[j].parse::<usize>().map_err(|e| CsvError::Parse {
                path: origin.to_string(),
                line: lineno,
                msg: format!("column {col}: bad index '{}': {e}", cells[j]),
            })
        };
        out.push(DiagnosticsRecord {
            t: g(0, "t")?,
            linf: g(1, "linf")?,
            l2: g(2, "l2")?,
            h_half: g(3, "h_half")?,
            h_one: g(4, "h_one")?,
            sigma: o(5, "sigma")?,
            amplitude_param: o(6, "amplitude")?,
            min_f: g(7, "min_f")?,
            min_node: idx(8, "min_node")?,
            max_f: g(9, "max_f")?,
            max_node: idx(10, "max_node")?,
            entropy: g(11, "entropy")?,
            arctan_mass: g(12, "arctan_mass")?,
            referee_energy: g(13, "referee_energy")?,
            g_hhalf: g(14, "g_hhalf")?,
            entropy_diss_spectral: o(15, "entropy_diss_spectral")?,
            entropy_diss_symmetric: o(16, "entropy_diss_symmetric")?,
            parity_residual: o(17, "parity_residual")?,
            touch_value: o(18, "touch_value")?,
            touch_curvature: o(19, "touch_curvature")?,
            touch_lambda: o(20, "touch_lambda")?,
            touch_sigma: o(21, "touch_sigma")?,
            d_energy: o(22, "d_energy")?,
            dd_energy: o(23, "dd_energy")?,
        });
    }
    Ok(out)
}

pub fn render_bound_checks(checks: &[BoundCheck]) -> String {
    let mut out = String::from("name,t,measured,bound,satisfied,slack\n");
    for c in checks {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.name, c.t, c.measured, c.bound, c.satisfied, c.slack
        )
        .unwrap();
    }
    out
}

pub fn write_bound_checks(checks: &[BoundCheck], path: &Path) -> Result<(), CsvError> {
    std::fs::write(path, render_bound_checks(checks))?;
    Ok(())
}

/// Aligned finite-vs-infinite depth comparison table.
pub struct CompareRow {
    pub t: f64,
    pub linf_confined: f64,
    pub linf_deep: f64,
}

pub fn render_compare(rows: &[CompareRow]) -> String {
    let mut out = String::from("t,linf_confined,linf_deep,diff,ordering_ok\n");
    for r in rows {
        let diff = r.linf_confined - r.linf_deep;
        let ok = r.t == 0.0 || diff >= 0.0;
        writeln!(
            out,
            "{},{},{},{},{}",
            r.t, r.linf_confined, r.linf_deep, diff, ok
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use muskat_core::diagnostics::{record_spectral, RecordContext};
    use muskat_core::models::ModelSpec;
    use muskat_core::spectral::PeriodicField;

    #[test]
    fn diagnostics_roundtrip() {
        let f = PeriodicField::from_fn(64, "f", |x| 0.4 * x.cos()).unwrap();
        let ctx = RecordContext {
            model: ModelSpec::confined(std::f64::consts::FRAC_PI_2),
            parity: Some(muskat_core::diagnostics::Parity::Even),
            touch_node: None,
        };
        let records = vec![
            record_spectral(&f, 0.0, &ctx).unwrap(),
            record_spectral(&f, 0.25, &ctx).unwrap(),
        ];
        let text = render_diagnostics(&records);
        let parsed = parse_diagnostics(&text, "mem").unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].t, records[0].t);
        assert_eq!(parsed[1].h_half, records[1].h_half);
        assert_eq!(parsed[0].sigma, records[0].sigma);
        assert_eq!(parsed[0].entropy_diss_spectral, None);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = format!("{DIAGNOSTICS_HEADER}\n1,2,3\n");
        match parse_diagnostics(&text, "mem") {
            Err(CsvError::Parse { line: 2, .. }) => {}
            other => panic!("expected line-2 error, got {other:?}"),
        }
    }
}
