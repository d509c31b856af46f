//! File formats: CSV for traces, JSON for reports, raw little-endian arrays with a
//! JSON sidecar for fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::charge::ChargeTrajectory;
use crate::diagnostics::{ConvergenceRow, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::identities::IdentityRow;
use crate::model::SpatialGrid;
use crate::reconstruction::WavefunctionFrame;
use crate::scalar::Real;

/// Columns `t, re_q, im_q, re_q_dot, im_q_dot, re_f0, im_f0`.
pub fn write_charge_csv<T: Real>(path: &Path, traj: &ChargeTrajectory<T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "re_q", "im_q", "re_q_dot", "im_q_dot", "re_f0", "im_f0"])?;
    let dot = traj.q_dot.as_ref().ok_or_else(|| Error::InvalidArgument("trajectory has no q̇".into()))?;
    for (n, t) in traj.grid.nodes().iter().enumerate() {
        let row = [*t, traj.q[n].re, traj.q[n].im, dot[n].re, dot[n].im, traj.f0[n].re, traj.f0[n].im];
        w.serialize(row.map(|v| v.to_f64_lossy()))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x, re_psi, im_psi, abs2_psi, re_phi, im_phi`.
pub fn write_frame_csv<T: Real>(path: &Path, frame: &WavefunctionFrame<T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "re_psi", "im_psi", "abs2_psi", "re_phi", "im_phi"])?;
    for ((x, psi), phi) in frame.psi.nodes.iter().zip(&frame.psi.values).zip(&frame.phi.values) {
        let row = [*x, psi.re, psi.im, psi.norm_sqr(), phi.re, phi.im];
        w.serialize(row.map(|v| v.to_f64_lossy()))?;
    }
    w.flush()?;
    Ok(())
}

/// Describes a binary field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub field: String,
    pub dtype: String,
    pub layout: String,
    /// `[frames, points, 2]`, the last axis holding real and imaginary parts.
    pub shape: [usize; 3],
    pub times: Vec<f64>,
    pub half_width: f64,
    pub n_points: usize,
    pub x_first: f64,
    pub dx: f64,
}

/// Writes `ψ` of every frame as `f64` little-endian pairs, one frame per row.
pub fn write_field_binary<T: Real>(
    data_path: &Path,
    sidecar_path: &Path,
    frames: &[WavefunctionFrame<T>],
    grid: &SpatialGrid<T>,
) -> Result<FieldSidecar> {
    let mut w = BufWriter::new(File::create(data_path)?);
    for f in frames {
        if f.psi.len() != grid.n_points {
            return Err(Error::GridMismatch("frame does not match the spatial grid".into()));
        }
        for v in &f.psi.values {
            w.write_all(&v.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&v.im.to_f64_lossy().to_le_bytes())?;
        }
    }
    w.flush()?;
    let sidecar = FieldSidecar {
        field: "psi".into(),
        dtype: "float64-le".into(),
        layout: "row-major".into(),
        shape: [frames.len(), grid.n_points, 2],
        times: frames.iter().map(|f| f.t.to_f64_lossy()).collect(),
        half_width: grid.half_width.to_f64_lossy(),
        n_points: grid.n_points,
        x_first: grid.x(0).to_f64_lossy(),
        dx: grid.dx().to_f64_lossy(),
    };
    write_json(sidecar_path, &sidecar)?;
    Ok(sidecar)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_report_json(path: &Path, report: &DiagnosticsReport) -> Result<()> {
    write_json(path, report)
}

/// Columns `n_steps, h, error, order` (order empty on the first row).
pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n_steps", "h", "error", "order"])?;
    for r in rows {
        w.serialize((r.n_steps, r.h, r.error, r.order))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `name, measured, tolerance, order, order_floor, pass`.
pub fn write_identity_csv(path: &Path, rows: &[IdentityRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::with_orders;

    #[test]
    fn convergence_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        write_convergence_csv(&p, &with_orders(vec![(8, 0.125, 4.0), (16, 0.0625, 1.0)])).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n_steps,h,error,order");
        assert_eq!(lines[1], "8,0.125,4.0,");
        assert_eq!(lines[2], "16,0.0625,1.0,2.0");
    }
}
