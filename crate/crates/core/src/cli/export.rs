//! File outputs: trajectory and control CSVs, per-scenario reports.
//!
//! All floating-point values are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::controls::ControlSignal;
use crate::dynamics::Trajectory;
use crate::state_space::StateVector;
use crate::strategy::{ChainDiagnostic, PursuitReport};

/// An I/O failure tagged with the path involved.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct ExportError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError {
        path: path.to_path_buf(),
        source,
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExportError + '_ {
    move |e| ExportError {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    }
}

/// Writes `t,p_1..p_m,e_1..e_m`, one row per grid node.
pub fn emit_trajectory(traj: &Trajectory, destination: &Path) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(destination).map_err(csv_err(destination))?;
    let m = traj.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("p_{i}")));
    header.extend((1..=m).map(|i| format!("e_{i}")));
    w.write_record(&header).map_err(csv_err(destination))?;
    for ((t, p), e) in traj.times.iter().zip(&traj.p).zip(&traj.e) {
        let mut row = vec![format_f64(*t)];
        row.extend(p.coords().iter().map(|&c| format_f64(c)));
        row.extend(e.coords().iter().map(|&c| format_f64(c)));
        w.write_record(&row).map_err(csv_err(destination))?;
    }
    w.flush().map_err(io_err(destination))
}

/// Node data read back from a trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRows {
    pub times: Vec<f64>,
    pub p: Vec<StateVector>,
    pub e: Vec<StateVector>,
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryRows, ExportError> {
    let bad = |msg: String| ExportError {
        path: path.to_path_buf(),
        source: io::Error::new(io::ErrorKind::InvalidData, msg),
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let width = r.headers().map_err(csv_err(path))?.len();
    if width < 3 || width % 2 == 0 {
        return Err(bad(format!("unexpected column count {width}")));
    }
    let m = (width - 1) / 2;
    let mut out = TrajectoryRows {
        times: vec![],
        p: vec![],
        e: vec![],
    };
    for record in r.records() {
        let record = record.map_err(csv_err(path))?;
        let values = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("bad number `{f}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let vec = |s: &[f64]| StateVector::new(s.to_vec()).map_err(|e| bad(e.to_string()));
        out.times.push(values[0]);
        out.p.push(vec(&values[1..=m])?);
        out.e.push(vec(&values[m + 1..])?);
    }
    Ok(out)
}

/// Writes one row per control step: `k,t_start,u_1..u_m`.
pub fn emit_control(u: &ControlSignal, destination: &Path) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(destination).map_err(csv_err(destination))?;
    let mut header = vec!["k".to_string(), "t_start".to_string()];
    header.extend((1..=u.dim()).map(|i| format!("u_{i}")));
    w.write_record(&header).map_err(csv_err(destination))?;
    let grid = u.grid();
    for (k, v) in u.values().iter().enumerate() {
        let mut row = vec![k.to_string(), format_f64(grid.time(k))];
        row.extend(v.coords().iter().map(|&c| format_f64(c)));
        w.write_record(&row).map_err(csv_err(destination))?;
    }
    w.flush().map_err(io_err(destination))
}

fn vector_text(v: &StateVector) -> String {
    let items: Vec<String> = v.coords().iter().map(|&c| format_f64(c)).collect();
    format!("[{}]", items.join(", "))
}

/// Renders a pursuit report as `key = value` lines (valid TOML).
pub fn report_text(label: &str, report: &PursuitReport, z_rhs: f64) -> String {
    let mut s = String::new();
    let z = match report.z_satisfied {
        Some(b) => b.to_string(),
        None => "\"n/a\"".to_string(),
    };
    let _ = writeln!(s, "label = {label:?}");
    let _ = writeln!(s, "captured = {}", report.captured);
    let _ = writeln!(s, "miss = {}", format_f64(report.miss));
    let _ = writeln!(s, "tol_capture = {}", format_f64(report.tol_capture));
    let _ = writeln!(s, "strategy_energy = {}", format_f64(report.strategy_energy));
    let _ = writeln!(s, "gamma_sq = {}", format_f64(report.gamma_sq));
    let _ = writeln!(s, "strategy_admissible = {}", report.strategy_admissible);
    let _ = writeln!(s, "evader_energy = {}", format_f64(report.evader_energy));
    let _ = writeln!(s, "evader_admissible = {}", report.evader_admissible);
    let _ = writeln!(s, "z_rhs = {}", format_f64(z_rhs));
    let _ = writeln!(s, "z_satisfied = {z}");
    let _ = writeln!(s, "chain_premises = {}", report.chain.premises_hold());
    let _ = writeln!(s, "chain_conclusion = {}", report.chain.conclusion_holds());
    let _ = writeln!(s, "terminal_p = {}", vector_text(&report.terminal_p));
    let _ = writeln!(s, "terminal_e = {}", vector_text(&report.terminal_e));
    s
}

/// Renders the per-line chain diagnostic as TOML tables.
pub fn chain_text(chain: &ChainDiagnostic) -> String {
    let mut s = String::new();
    for line in &chain.lines {
        let _ = writeln!(s, "[{}]", line.label);
        let _ = writeln!(s, "statement = {:?}", line.statement);
        let _ = writeln!(s, "lhs = {}", format_f64(line.lhs));
        let _ = writeln!(s, "rhs = {}", format_f64(line.rhs));
        let _ = writeln!(s, "passed = {}", line.passed);
        let _ = writeln!(s, "diagnostic = {}", line.diagnostic);
        let _ = writeln!(s);
    }
    s
}

pub fn write_text(destination: &Path, text: &str) -> Result<(), ExportError> {
    fs::write(destination, text).map_err(io_err(destination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_original, GameParams};

    fn v(c: &[f64]) -> StateVector {
        StateVector::new(c.to_vec()).unwrap()
    }

    fn trajectory(n: usize) -> Trajectory {
        let p = GameParams::new(1.3, 1.0, 1.0, v(&[0.1, 0.2]), v(&[1.0, -0.3]), v(&[0.7, 0.1])).unwrap();
        let rows = |s: f64| (0..n).map(|k| v(&[s * (k as f64).sin(), 1.0 / 3.0])).collect();
        let mu = ControlSignal::new(rows(0.3), 1.3).unwrap();
        let nu = ControlSignal::new(rows(-1.1), 1.3).unwrap();
        simulate_original(&p, &mu, &nu).unwrap()
    }

    #[test]
    fn single_step_trajectory_has_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_trajectory(&trajectory(1), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,p_1,p_2,e_1,e_2");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn rows_and_columns_for_default_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_trajectory(&trajectory(256), &path).unwrap();
        let rows = read_trajectory(&path).unwrap();
        assert_eq!(rows.times.len(), 257);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let traj = trajectory(40);
        emit_trajectory(&traj, &path).unwrap();
        let rows = read_trajectory(&path).unwrap();
        assert_eq!(rows.times, traj.times);
        assert_eq!(rows.p, traj.p);
        assert_eq!(rows.e, traj.e);
    }

    #[test]
    fn io_failure_names_the_path() {
        let path = Path::new("/nonexistent-dir/for/sure/t.csv");
        let err = emit_trajectory(&trajectory(1), path).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/for/sure/t.csv"));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(1.0).parse::<f64>().unwrap(), 1.0);
    }
}
