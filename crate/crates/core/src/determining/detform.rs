//! The determining-form vector field and its exact reduction to a scalar ODE
//! for beta along the ray through v0.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nudging::NudgeParams;
use crate::solver::{PhysicalParams, StepperConfig};
use crate::spectral::VelocityField;

use super::norms::norm_x;
use super::trajectory::Trajectory;
use super::wmap::{w_map, SpinUpConfig, WOutput};

/// Everything a W-map evaluation needs besides the driving trajectory.
#[derive(Debug, Clone)]
pub struct DetformContext {
    pub p: PhysicalParams,
    pub np: NudgeParams,
    pub cfg: StepperConfig,
    pub spin: SpinUpConfig,
}

impl DetformContext {
    pub fn w(&self, v: &Trajectory) -> Result<WOutput> {
        w_map(v, &self.p, &self.np, self.cfg, &self.spin)
    }
}

#[derive(Debug, Clone)]
pub struct DetformRhs {
    /// -q^2 (v - I~_h u*) over the tail window.
    pub rhs: Trajectory,
    /// q = ||v - I~_h W(v)||_X
    pub q: f64,
    pub out_of_ball: bool,
}

/// dv/ds = -||v - I~_h W(v)||_X^2 (v - I~_h u*), evaluated over the tail of
/// the W-map. `rho` is the radius of the ball the theory covers; leaving it
/// only produces a warning.
pub fn detform_rhs(
    v: &Trajectory,
    ustar: &VelocityField,
    rho: Option<f64>,
    ctx: &DetformContext,
) -> Result<DetformRhs> {
    let vx = norm_x(v, &ctx.p);
    let out_of_ball = rho.is_some_and(|r| vx > r);
    if out_of_ball {
        log::warn!(
            "||v||_X = {vx:.4e} exceeds rho = {:.4e}",
            rho.unwrap_or(f64::NAN)
        );
    }
    let w = ctx.w(v)?;
    let q = w.q(v, &ctx.p);
    let tail = v.window(w.tail_start, v.len());
    let target = tail.constant(ustar);
    let rhs = tail.combine(-q * q, &target, q * q)?;
    Ok(DetformRhs {
        rhs,
        q,
        out_of_ball,
    })
}

/// Memoised f(beta) = ||beta v0 - I~_h W(beta v0)||_X^2 along a fixed ray.
pub struct BetaFunction<'a> {
    pub v0: &'a Trajectory,
    pub ctx: &'a DetformContext,
    cache: Mutex<HashMap<u64, f64>>,
}

impl<'a> BetaFunction<'a> {
    pub fn new(v0: &'a Trajectory, ctx: &'a DetformContext) -> Self {
        BetaFunction {
            v0,
            ctx,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn eval(&self, beta: f64) -> Result<f64> {
        if let Some(&f) = self
            .cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(&beta.to_bits())
        {
            return Ok(f);
        }
        let f = beta_f(beta, self.v0, self.ctx)?;
        // Values are deterministic, so a concurrent duplicate insert is harmless.
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(beta.to_bits(), f);
        Ok(f)
    }

    /// Evaluate on many points in parallel.
    pub fn eval_many(&self, betas: &[f64]) -> Result<Vec<f64>> {
        betas.par_iter().map(|&b| self.eval(b)).collect()
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

/// f(beta) = ||beta v0 - I~_h W(beta v0)||_X^2.
pub fn beta_f(beta: f64, v0: &Trajectory, ctx: &DetformContext) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} outside [0, 1]"
        )));
    }
    let v = v0.scaled(beta);
    let w = ctx.w(&v)?;
    Ok(w.q(&v, &ctx.p).powi(2))
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let mut e = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if e * d0 <= 0.0 {
                e = 0.0;
            } else if d0 * d1 <= 0.0 && e.abs() > 3.0 * d0.abs() {
                e = 3.0 * d0;
            }
            e
        };
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            d[0] = end(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Pchip { x, y, d }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
        );
        let (h01, h11) = (-2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaState {
    pub s: f64,
    pub beta: f64,
    /// Interpolated f(beta).
    pub f: f64,
}

#[derive(Debug, Clone)]
pub struct BetaPath {
    pub states: Vec<BetaState>,
    /// f sampled on the cache grid.
    pub grid: Vec<(f64, f64)>,
    /// |dbeta/ds| at the end of the run.
    pub final_rate: f64,
}

/// Settings of [`beta_evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaConfig {
    pub s_span: f64,
    /// Upper bound on the step in s.
    pub ode_ds: f64,
    /// Number of intervals of the uniform beta grid on [0, 1].
    pub grid_intervals: usize,
    /// Tolerance on |dbeta/ds| at s_span.
    pub rate_tolerance: f64,
}

impl Default for BetaConfig {
    fn default() -> Self {
        BetaConfig {
            s_span: 50.0,
            ode_ds: 0.5,
            grid_intervals: 8,
            rate_tolerance: 1e-3,
        }
    }
}

/// Integrate dbeta/ds = -beta f(beta), beta(0) = 1, with the classical
/// Runge-Kutta method on a PCHIP interpolant of f cached on a beta grid.
/// Steps that would increase beta or make it nonpositive are halved. Fails
/// with NoConvergence when |dbeta/ds| still exceeds the rate tolerance.
pub fn beta_evolve(bf: &BetaFunction, bc: &BetaConfig) -> Result<BetaPath> {
    let path = beta_path(bf, bc)?;
    if path.final_rate > bc.rate_tolerance {
        let s = path.states.last().map_or(0.0, |st| st.s);
        log::warn!(
            "beta still moving at s = {s}: |dbeta/ds| = {:.3e}",
            path.final_rate
        );
        return Err(Error::NoConvergence {
            rate: path.final_rate,
        });
    }
    Ok(path)
}

/// The integrated path without the convergence check.
pub fn beta_path(bf: &BetaFunction, bc: &BetaConfig) -> Result<BetaPath> {
    let n = bc.grid_intervals.max(2);
    let betas: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let fs = bf.eval_many(&betas)?;
    let fi = Pchip::new(betas.clone(), fs.clone());
    let rhs = |b: f64| -b * fi.eval(b).max(0.0);
    let fmax = fs.iter().cloned().fold(0.0, f64::max);
    let ds_max = if fmax > 0.0 {
        bc.ode_ds.min(0.5 / fmax)
    } else {
        bc.ode_ds
    };
    let mut states = vec![BetaState {
        s: 0.0,
        beta: 1.0,
        f: fi.eval(1.0),
    }];
    let (mut s, mut beta) = (0.0, 1.0);
    while s < bc.s_span {
        let mut ds = ds_max.min(bc.s_span - s);
        let next = loop {
            let k1 = rhs(beta);
            let k2 = rhs(beta + 0.5 * ds * k1);
            let k3 = rhs(beta + 0.5 * ds * k2);
            let k4 = rhs(beta + ds * k3);
            let b = beta + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (b <= beta && b > 0.0) || ds < 1e-12 {
                break b.min(beta).max(f64::MIN_POSITIVE);
            }
            ds *= 0.5;
        };
        s += ds;
        beta = next;
        states.push(BetaState {
            s,
            beta,
            f: fi.eval(beta),
        });
    }
    let final_rate = rhs(beta).abs();
    let grid = betas.into_iter().zip(fs).collect();
    Ok(BetaPath {
        states,
        grid,
        final_rate,
    })
}

/// A located zero of f in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRoot {
    pub beta: f64,
    pub f: f64,
}

/// Nontrivial zeros of f on (0, 1]: local minima of f on the grid refined by
/// golden-section search on sqrt(f), kept when f <= zero_tol ||v0||_X^2.
/// beta = 0 is always a zero and is not reported.
pub fn find_zeros(
    bf: &BetaFunction,
    grid_intervals: usize,
    zero_tol: f64,
    beta_tol: f64,
) -> Result<Vec<BetaRoot>> {
    let n = grid_intervals.max(2);
    let betas: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let fs = bf.eval_many(&betas)?;
    let scale = norm_x(bf.v0, &bf.ctx.p).powi(2);
    let thresh = zero_tol * scale;
    let mut roots: Vec<BetaRoot> = Vec::new();
    for i in 1..=n {
        let left_ok = fs[i] <= fs[i - 1];
        let right_ok = i == n || fs[i] <= fs[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let (mut a, mut b) = (betas[i - 1], if i == n { 1.0 } else { betas[i + 1] });
        let q = |x: f64| bf.eval(x).map(|f| f.max(0.0).sqrt());
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut qc, mut qd) = (q(c)?, q(d)?);
        while b - a > beta_tol {
            if qc <= qd {
                b = d;
                d = c;
                qd = qc;
                c = b - g * (b - a);
                qc = q(c)?;
            } else {
                a = c;
                c = d;
                qc = qd;
                d = a + g * (b - a);
                qd = q(d)?;
            }
        }
        // Include the grid node itself, which may be an exact zero (e.g. beta = 1).
        let mut best = BetaRoot {
            beta: 0.5 * (a + b),
            f: bf.eval(0.5 * (a + b))?,
        };
        if fs[i] < best.f {
            best = BetaRoot {
                beta: betas[i],
                f: fs[i],
            };
        }
        if best.f <= thresh
            && best.beta > 0.0
            && !roots
                .iter()
                .any(|r| (r.beta - best.beta).abs() < 2.0 * beta_tol)
        {
            roots.push(best);
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_reproduces_nodes_and_monotone_data() {
        let x = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let y = vec![0.0, 0.1, 0.1, 0.7, 2.0];
        let p = Pchip::new(x.clone(), y.clone());
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-14);
        }
        let mut prev = -1.0;
        for k in 0..=1000 {
            let v = p.eval(k as f64 / 1000.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }
}
