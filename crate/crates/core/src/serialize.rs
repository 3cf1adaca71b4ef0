//! Flat-file formats: trajectory tables and per-node snapshots.
//!
//! All numbers are written with 17 significant digits so regression files
//! are stable across runs. Headers echo the resolved configuration as
//! `# key = value` lines.

use crate::flow::{Sample, Snapshot, Trajectory};
use crate::geometry::compute_shape_of;
use crate::grid::DomainGrid;
use std::io::{self, Write};

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write the per-sample monitor table. `header` rows are echoed as comments.
pub fn write_trajectory<W: Write>(
    w: &mut W,
    traj: &Trajectory,
    header: &[(String, String)],
) -> io::Result<()> {
    writeln!(w, "# icf trajectory v1")?;
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# termination = {}", traj.termination.label())?;
    writeln!(w, "{}", Sample::COLUMNS.join("\t"))?;
    for s in &traj.samples {
        let row: Vec<String> = s.column_values().iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", row.join("\t"))?;
    }
    Ok(())
}

/// Write one field snapshot with its geometry: angles, u, principal
/// curvatures, v, and the support function, one node per row.
pub fn write_snapshot<W: Write>(
    w: &mut W,
    grid: &DomainGrid,
    snap: &Snapshot,
    header: &[(String, String)],
) -> io::Result<()> {
    let shape = compute_shape_of(grid, &snap.u)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    writeln!(w, "# icf snapshot v1")?;
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# t = {}", fmt_f64(snap.t))?;
    writeln!(w, "# tau = {}", fmt_f64(snap.tau))?;
    if grid.dim() == 1 {
        writeln!(w, "theta\tu\tkappa\tv\tu_bar")?;
    } else {
        writeln!(w, "theta\tlambda\tu\tkappa_1\tkappa_2\tv\tu_bar")?;
    }
    for i in 0..grid.n_nodes() {
        let nd = grid.nodes()[i];
        let mut cols = vec![fmt_f64(nd[0])];
        if grid.dim() == 2 {
            cols.push(fmt_f64(nd[1]));
        }
        cols.push(fmt_f64(snap.u[i]));
        for &k in shape.kappa_at(i) {
            cols.push(fmt_f64(k));
        }
        cols.push(fmt_f64(shape.v[i]));
        cols.push(fmt_f64(shape.u_bar[i]));
        writeln!(w, "{}", cols.join("\t"))?;
    }
    Ok(())
}

/// A trajectory table read back from disk (used by the standalone plotter).
#[derive(Debug, Clone)]
pub struct TrajectoryTable {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Parse a trajectory file produced by [`write_trajectory`].
pub fn read_trajectory_table(text: &str) -> Result<TrajectoryTable, String> {
    let mut header = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                header.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split('\t').map(|s| s.to_string()).collect()),
            Some(cols) => {
                let vals: Result<Vec<f64>, _> =
                    line.split('\t').map(|s| s.parse::<f64>()).collect();
                let vals = vals.map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if vals.len() != cols.len() {
                    return Err(format!(
                        "line {}: expected {} columns, got {}",
                        lineno + 1,
                        cols.len(),
                        vals.len()
                    ));
                }
                rows.push(vals);
            }
        }
    }
    Ok(TrajectoryTable {
        header,
        columns: columns.ok_or("missing column header")?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{CurvatureFunction, CurvatureKind};
    use crate::flow::{run, FlowConfig, FlowMode};
    use crate::geometry::{make_initial, InitialShape};
    use crate::grid::build_circle_grid;
    use std::sync::Arc;

    #[test]
    fn trajectory_roundtrips_through_text() {
        let grid = Arc::new(build_circle_grid(32).unwrap());
        let u0 = make_initial(&grid, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let f = CurvatureFunction::new(CurvatureKind::Mean, 1).unwrap();
        let cfg = FlowConfig::new(0.5, f, FlowMode::Unrescaled { t_end: 0.2 });
        let traj = run(&u0, &cfg).unwrap();
        let mut buf = Vec::new();
        write_trajectory(
            &mut buf,
            &traj,
            &[("p".into(), "0.5".into()), ("shape".into(), "ellipse(2,1)".into())],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let table = read_trajectory_table(&text).unwrap();
        assert_eq!(table.rows.len(), traj.samples.len());
        let t = table.column("t").unwrap();
        for (a, b) in t.iter().zip(traj.samples.iter().map(|s| s.t)) {
            assert_eq!(*a, b, "17-digit write must round-trip bit-exactly");
        }
        assert!(table.header.iter().any(|(k, v)| k == "p" && v == "0.5"));
    }

    #[test]
    fn snapshot_has_expected_columns() {
        let grid = Arc::new(build_circle_grid(16).unwrap());
        let u0 = make_initial(&grid, &InitialShape::Sphere { r: 2.0 }).unwrap();
        let snap = crate::flow::Snapshot {
            t: 0.0,
            tau: 0.0,
            u: u0.u().to_vec(),
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &grid, &snap, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data_lines: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("theta"))
            .collect();
        assert_eq!(data_lines.len(), 16);
        let first: Vec<&str> = data_lines[0].split('\t').collect();
        assert_eq!(first.len(), 5);
        assert_eq!(first[1].parse::<f64>().unwrap(), 2.0);
    }
}
