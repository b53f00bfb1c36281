use crate::error::{Error, Result};

use super::detform::DetformContext;
use super::norms::norm_x;
use super::trajectory::Trajectory;
use super::wmap::w_map_pair;

/// Empirical Lipschitz ratios of W~ at a pair of inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzProbe {
    /// ||v1 - v2||_X over the full input span.
    pub input_x: f64,
    /// Y-norm of W~(v1) - W~(v2) over the common tail.
    pub diff_y: f64,
    /// Z-norm of the temperature difference.
    pub diff_z: f64,
    /// ||I~_h (W~(v1) - W~(v2))||_X over the tail.
    pub projected_x: f64,
    pub ratio_y: f64,
    pub ratio_z: f64,
    pub ratio_projected: f64,
}

pub fn lipschitz_probe(
    v1: &Trajectory,
    v2: &Trajectory,
    ctx: &DetformContext,
) -> Result<LipschitzProbe> {
    let input_x = norm_x(&v1.sub(v2)?, &ctx.p);
    if input_x == 0.0 {
        return Err(Error::DivisionByZero);
    }
    let pair = w_map_pair(v1, v2, &ctx.p, &ctx.np, ctx.cfg, &ctx.spin)?;
    let dt = v1.dt_sample;
    let (diff_y, _) = pair.diff.norm_y(dt, &ctx.p)?;
    let (diff_z, _) = pair.diff.norm_z(dt, &ctx.p)?;
    let projected_x = norm_x(&pair.first.projected.sub(&pair.second.projected)?, &ctx.p);
    Ok(LipschitzProbe {
        input_x,
        diff_y,
        diff_z,
        projected_x,
        ratio_y: diff_y / input_x,
        ratio_z: diff_z / input_x,
        ratio_projected: projected_x / input_x,
    })
}
