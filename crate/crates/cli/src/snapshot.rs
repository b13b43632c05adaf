//! State snapshots: 17-significant-digit decimal text plus grid metadata,
//! lossless after parsing.

use std::fmt::Write as _;
use std::path::Path;

use muskat_core::realline::LineInterface;
use muskat_core::runner::SimState;
use muskat_core::spectral::PeriodicField;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug)]
pub struct Snapshot {
    pub state: SimState,
    pub t: f64,
    pub label: String,
}

const FORMAT_LINE: &str = "muskat-snapshot-v1";

/// Serialize a state. Values print with 17 significant digits, which
/// round-trips every f64 exactly.
pub fn render_snapshot(state: &SimState, t: f64, label: &str) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_LINE);
    out.push('\n');
    match state {
        SimState::Spectral(f) => {
            writeln!(out, "backend = spectral").unwrap();
            writeln!(out, "label = {label}").unwrap();
            writeln!(out, "n = {}", f.n()).unwrap();
        }
        SimState::Line(itf) => {
            writeln!(out, "backend = realline").unwrap();
            writeln!(out, "label = {label}").unwrap();
            writeln!(out, "n = {}", itf.len()).unwrap();
            writeln!(out, "half_width = {:.16e}", itf.half_width()).unwrap();
        }
    }
    writeln!(out, "t = {t:.16e}").unwrap();
    out.push_str("data\n");
    for v in state.values() {
        writeln!(out, "{v:.16e}").unwrap();
    }
    out
}

pub fn emit_snapshot(state: &SimState, t: f64, label: &str, path: &Path) -> Result<(), SnapshotError> {
    std::fs::write(path, render_snapshot(state, t, label))?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let text = std::fs::read_to_string(path)?;
    parse_snapshot(&text, &path.display().to_string())
}

pub fn parse_snapshot(text: &str, origin: &str) -> Result<Snapshot, SnapshotError> {
    let err = |line: usize, msg: String| SnapshotError::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == FORMAT_LINE => {}
        Some((i, l)) => return Err(err(i + 1, format!("expected '{FORMAT_LINE}', got '{l}'"))),
        None => return Err(err(1, "empty snapshot file".into())),
    }

    let mut backend = None;
    let mut label = String::from("f");
    let mut n = None;
    let mut half_width = None;
    let mut t = 0.0_f64;
    let mut data_at = None;
    for (i, line) in lines.by_ref() {
        let line = line.trim();
        if line == "data" {
            data_at = Some(i + 1);
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(i + 1, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "backend" => backend = Some(value.to_string()),
            "label" => label = value.to_string(),
            "n" => {
                n = Some(value.parse::<usize>().map_err(|e| {
                    err(i + 1, format!("bad node count '{value}': {e}"))
                })?)
            }
            "half_width" => {
                half_width = Some(value.parse::<f64>().map_err(|e| {
                    err(i + 1, format!("bad half_width '{value}': {e}"))
                })?)
            }
            "t" => {
                t = value
                    .parse::<f64>()
                    .map_err(|e| err(i + 1, format!("bad time '{value}': {e}")))?
            }
            _ => return Err(err(i + 1, format!("unknown header key '{key}'"))),
        }
    }
    let data_line = data_at.ok_or_else(|| err(1, "missing 'data' section".into()))?;
    let n = n.ok_or_else(|| err(data_line, "missing node count".into()))?;
    let backend = backend.ok_or_else(|| err(data_line, "missing backend".into()))?;

    let mut values = Vec::with_capacity(n);
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|e| err(i + 1, format!("bad value '{line}': {e}")))?,
        );
    }
    if values.len() != n {
        return Err(err(
            data_line,
            format!("expected {n} values, found {}", values.len()),
        ));
    }

    let state = match backend.as_str() {
        "spectral" => SimState::Spectral(
            PeriodicField::new(values, label.clone())
                .map_err(|e| err(data_line, format!("{e}")))?,
        ),
        "realline" => {
            let l = half_width
                .ok_or_else(|| err(data_line, "realline snapshot needs half_width".into()))?;
            SimState::Line(
                LineInterface::uniform_from_values(l, values)
                    .map_err(|e| err(data_line, format!("{e}")))?,
            )
        }
        other => return Err(err(2, format!("unknown backend '{other}'"))),
    };
    Ok(Snapshot { state, t, label })
}
