use crate::error::{Error, Result};
use crate::solver::PhysicalParams;
use crate::spectral::{norm_a0, norm_v0, norm_v1, ScalarField, SpectralNorms, VelocityField};

use super::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryNorms {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Number of full sliding windows behind the Y and Z integrals.
    pub windows: usize,
}

/// Supremum over sliding windows of length `window` of the trapezoid
/// integral of equally spaced `values`. Windows are aligned to samples and
/// only full windows are used; returns the supremum and the window count.
pub fn sup_window_integral(values: &[f64], dt: f64, window: f64) -> Result<(f64, usize)> {
    let w = (window / dt).round() as usize;
    let span = values.len().saturating_sub(1) as f64 * dt;
    if w == 0 || values.len() < w + 1 {
        return Err(Error::SpanTooShort {
            span,
            required: window,
        });
    }
    let mut prefix = Vec::with_capacity(values.len());
    prefix.push(0.0);
    for k in 1..values.len() {
        prefix.push(prefix[k - 1] + 0.5 * dt * (values[k - 1] + values[k]));
    }
    let count = values.len() - w;
    let sup = (0..count)
        .map(|s| prefix[s + w] - prefix[s])
        .fold(0.0, f64::max);
    Ok((sup, count))
}

/// ||v||_X = sup_t ||v(t)||_{V0} / (nu lambda_1^(1/2)).
pub fn norm_x(v: &Trajectory, p: &PhysicalParams) -> f64 {
    let sup = v.v0_series().into_iter().fold(0.0, f64::max);
    sup / (p.nu * p.lambda1().sqrt())
}

/// Y-norm from per-sample ||w||_{V0} and |A0 w|^2.
pub fn norm_y_series(
    v0: &[f64],
    a0_sq: &[f64],
    dt: f64,
    p: &PhysicalParams,
) -> Result<(f64, usize)> {
    let big_t = p.window();
    let (int, n) = sup_window_integral(a0_sq, dt, big_t)?;
    let sup = v0.iter().cloned().fold(0.0, f64::max);
    Ok((
        sup / (p.nu * p.lambda1().sqrt()) + (int / (p.nu * p.lambda1())).sqrt(),
        n,
    ))
}

/// Z-norm from per-sample ||eta|| and |A1 eta|^2.
pub fn norm_z_series(
    h1: &[f64],
    a1_sq: &[f64],
    dt: f64,
    p: &PhysicalParams,
) -> Result<(f64, usize)> {
    let (int, n) = sup_window_integral(a1_sq, dt, p.window())?;
    let sup = h1.iter().cloned().fold(0.0, f64::max);
    Ok((sup + (p.nu * int).sqrt(), n))
}

/// Y-norm of a sequence of full velocity fields.
pub fn norm_y(w: &[VelocityField], dt: f64, p: &PhysicalParams) -> Result<f64> {
    let v0: Vec<f64> = w.iter().map(norm_v0).collect();
    let a0: Vec<f64> = w.iter().map(|u| norm_a0(u).powi(2)).collect();
    Ok(norm_y_series(&v0, &a0, dt, p)?.0)
}

/// Z-norm of a sequence of temperature fields.
pub fn norm_z(eta: &[ScalarField], dt: f64, p: &PhysicalParams) -> Result<f64> {
    let h1: Vec<f64> = eta.iter().map(norm_v1).collect();
    let a1: Vec<f64> = eta.iter().map(|e| e.area() * e.sum_k4()).collect();
    Ok(norm_z_series(&h1, &a1, dt, p)?.0)
}
