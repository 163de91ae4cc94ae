//! Trajectory CSV files and JSON reports.

use std::fs::File;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::control::{RigidSolution, RodSolution};

/// One parsed row of a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub k: usize,
    pub t: f64,
    pub rotation: Matrix3<f64>,
    /// Present for rods.
    pub translation: Option<Vector3<f64>>,
    /// `w` (and `v` for rods); empty at `k = N`.
    pub algebra: Option<Vec<f64>>,
    /// `u`, or `f` then `l` for rods; empty at `k = N−1, N`.
    pub controls: Option<Vec<f64>>,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(rod: bool) -> Vec<String> {
    let mut h = vec!["k".to_string(), "t".to_string()];
    for i in 0..3 {
        for j in 0..3 {
            h.push(format!("R{i}{j}"));
        }
    }
    if rod {
        h.extend(["r1", "r2", "r3"].map(String::from));
    }
    h.extend(["w1", "w2", "w3"].map(String::from));
    if rod {
        h.extend(["v1", "v2", "v3", "f1", "f2", "f3", "l1", "l2", "l3"].map(String::from));
    } else {
        h.extend(["u1", "u2", "u3"].map(String::from));
    }
    h
}

pub fn write_rows(path: &Path, rows: &[TrajectoryRow], rod: bool) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let mut w = ::csv::Writer::from_writer(file);
    let err = |e: ::csv::Error| format!("cannot write {}: {e}", path.display());
    w.write_record(header(rod)).map_err(err)?;
    let (n_alg, n_ctrl) = if rod { (6, 6) } else { (3, 3) };
    for row in rows {
        let mut rec = vec![row.k.to_string(), fmt_f64(row.t)];
        rec.extend(row.rotation.transpose().iter().map(|x| fmt_f64(*x)));
        if rod {
            let t = row.translation.unwrap_or_else(Vector3::zeros);
            rec.extend(t.iter().map(|x| fmt_f64(*x)));
        }
        let cells = |v: &Option<Vec<f64>>, n: usize| match v {
            Some(v) => v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>(),
            None => vec![String::new(); n],
        };
        rec.extend(cells(&row.algebra, n_alg));
        rec.extend(cells(&row.controls, n_ctrl));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn read_rows(path: &Path) -> Result<Vec<TrajectoryRow>, String> {
    let mut r = ::csv::Reader::from_path(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let rod = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .any(|h| h == "r1");
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| -> Result<f64, String> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| format!("row {}, column {}: {e}", line + 1, i + 1))
        };
        let block = |start: usize, len: usize| -> Result<Option<Vec<f64>>, String> {
            if rec[start].is_empty() {
                return Ok(None);
            }
            (start..start + len).map(num).collect::<Result<Vec<_>, _>>().map(Some)
        };
        let k = rec[0].parse::<usize>().map_err(|e| format!("row {}: {e}", line + 1))?;
        let t = num(1)?;
        let rvals = (2..11).map(num).collect::<Result<Vec<_>, _>>()?;
        let rotation = Matrix3::from_row_slice(&rvals);
        let (translation, alg_at) = if rod {
            (Some(Vector3::new(num(11)?, num(12)?, num(13)?)), 14)
        } else {
            (None, 11)
        };
        let n = if rod { 6 } else { 3 };
        rows.push(TrajectoryRow {
            k,
            t,
            rotation,
            translation,
            algebra: block(alg_at, n)?,
            controls: block(alg_at + n, n)?,
        });
    }
    Ok(rows)
}

fn t_of(k: usize, h: f64) -> f64 {
    k as f64 * h
}

pub fn rigid_rows(sol: &RigidSolution) -> Vec<TrajectoryRow> {
    let traj = &sol.trajectory;
    let algebra = traj.algebra.as_ref();
    traj.points
        .iter()
        .enumerate()
        .map(|(k, g)| TrajectoryRow {
            k,
            t: t_of(k, traj.h),
            rotation: g.to_so3(),
            translation: None,
            algebra: algebra.and_then(|a| a.get(k)).map(|w| w.as_slice().to_vec()),
            controls: sol.controls.get(k).map(|u| u.as_slice().to_vec()),
        })
        .collect()
}

pub fn rod_rows(sol: &RodSolution) -> Vec<TrajectoryRow> {
    let traj = &sol.trajectory;
    let algebra = traj.algebra.as_ref();
    traj.points
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let m = g.to_se3();
            TrajectoryRow {
                k,
                t: t_of(k, traj.h),
                rotation: m.fixed_view::<3, 3>(0, 0).into_owned(),
                translation: Some(m.fixed_view::<3, 1>(0, 3).into_owned()),
                algebra: algebra.and_then(|a| a.get(k)).map(|w| w.as_slice().to_vec()),
                controls: sol.controls.get(k).map(|(f, l)| f.iter().chain(l.iter()).copied().collect()),
            }
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let r = crate::retraction::cay_so3(&Vector3::new(0.1, 1.0 / 3.0, -2.0f64.sqrt()));
        let rows = vec![
            TrajectoryRow {
                k: 0,
                t: 0.0,
                rotation: r,
                translation: Some(Vector3::new(std::f64::consts::PI, -1e-300, 7.0)),
                algebra: Some(vec![0.1, 0.2, 0.3, 1.0 / 7.0, 5e10, -0.0]),
                controls: Some(vec![1.0; 6]),
            },
            TrajectoryRow {
                k: 1,
                t: 0.1,
                rotation: r.transpose(),
                translation: Some(Vector3::zeros()),
                algebra: None,
                controls: None,
            },
        ];
        write_rows(&path, &rows, true).unwrap();
        assert_eq!(read_rows(&path).unwrap(), rows);
    }
}
