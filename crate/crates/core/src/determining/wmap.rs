//! The determining map: the bounded solution of the nudged system driven by
//! a trajectory, approximated by spin-up from zero.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nudging::{NudgeParams, NudgedStepper};
use crate::solver::{PhysicalParams, RBState, StepperConfig};
use crate::spectral::{norm_a0, norm_v0, norm_v1, SpectralNorms, VelocityField};

use super::norms::{norm_x, norm_y_series, norm_z_series, TrajectoryNorms};
use super::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinUpConfig {
    /// Transient discarded before the tail starts.
    pub tau_spin: f64,
    /// Stationarity tolerance, relative to ||v||_X.
    pub tolerance: f64,
    /// Start time offset of the second (checking) integration; None means
    /// T = 1/(nu lambda_1).
    pub offset: Option<f64>,
    /// Keep full (w, eta) states every this many samples of the tail
    /// (0 keeps none).
    pub record_stride: usize,
}

impl SpinUpConfig {
    /// Shortest admissible spin-up, 5/(kappa lambda_1).
    pub fn minimal(p: &PhysicalParams) -> Self {
        SpinUpConfig {
            tau_spin: 5.0 / (p.kappa * p.lambda1()),
            tolerance: 1e-8,
            offset: None,
            record_stride: 0,
        }
    }

    pub fn validate(&self, p: &PhysicalParams) -> Result<()> {
        let min = 5.0 / (p.kappa * p.lambda1());
        if !(self.tau_spin >= min * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "tau_spin = {} is below 5/(kappa lambda_1) = {min}",
                self.tau_spin
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter(
                "stationarity tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn offset(&self, p: &PhysicalParams) -> f64 {
        self.offset.unwrap_or_else(|| p.window())
    }
}

/// Per-sample scalar diagnostics of (w, eta).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormSeries {
    pub w_v0: Vec<f64>,
    pub w_a0_sq: Vec<f64>,
    pub eta_h1: Vec<f64>,
    pub eta_a1_sq: Vec<f64>,
}

impl NormSeries {
    fn push(&mut self, w: &VelocityField, eta: &crate::spectral::ScalarField) {
        self.w_v0.push(norm_v0(w));
        self.w_a0_sq.push(norm_a0(w).powi(2));
        self.eta_h1.push(norm_v1(eta));
        self.eta_a1_sq.push(eta.area() * eta.sum_k4());
    }

    fn push_diff(&mut self, a: &RBState, b: &RBState) {
        let w = a.u.sub(&b.u);
        let e = a.theta.sub(&b.theta);
        self.push(&w, &e);
    }

    fn trim(&mut self, k0: usize) {
        for v in [
            &mut self.w_v0,
            &mut self.w_a0_sq,
            &mut self.eta_h1,
            &mut self.eta_a1_sq,
        ] {
            v.drain(..k0.min(v.len()));
        }
    }

    pub fn norm_y(&self, dt: f64, p: &PhysicalParams) -> Result<(f64, usize)> {
        norm_y_series(&self.w_v0, &self.w_a0_sq, dt, p)
    }

    pub fn norm_z(&self, dt: f64, p: &PhysicalParams) -> Result<(f64, usize)> {
        norm_z_series(&self.eta_h1, &self.eta_a1_sq, dt, p)
    }
}

/// Numerical W~(v) on the converged tail.
#[derive(Debug, Clone)]
pub struct WOutput {
    /// Index into v of the first tail sample.
    pub tail_start: usize,
    /// I~_h w over the tail, at every sample.
    pub projected: Trajectory,
    pub series: NormSeries,
    /// Full states every `record_stride` samples of the tail.
    pub records: Vec<RBState>,
    /// Largest stationarity defect over the tail, in X units.
    pub defect: f64,
    pub tolerance: f64,
}

impl WOutput {
    pub fn norms(&self, p: &PhysicalParams) -> Result<TrajectoryNorms> {
        let dt = self.projected.dt_sample;
        let (y, windows) = self.series.norm_y(dt, p)?;
        let (z, _) = self.series.norm_z(dt, p)?;
        Ok(TrajectoryNorms {
            x: norm_x(&self.projected, p),
            y,
            z,
            windows,
        })
    }

    /// ||v - I~_h W(v)||_X over the tail.
    pub fn q(&self, v: &Trajectory, p: &PhysicalParams) -> f64 {
        let k0 = self.tail_start;
        let interp = &self.projected.interp;
        let mut sup: f64 = 0.0;
        let mut diff = vec![Complex64::new(0.0, 0.0); interp.packed_len()];
        for k in 0..self.projected.len() {
            for ((d, a), b) in diff
                .iter_mut()
                .zip(v.packed(k0 + k))
                .zip(self.projected.packed(k))
            {
                *d = a - b;
            }
            sup = sup.max(interp.packed_v0_sq(&diff));
        }
        sup.sqrt() / (p.nu * p.lambda1().sqrt())
    }
}

struct Lane<'a> {
    v: &'a Trajectory,
    main: RBState,
    check: Option<RBState>,
    series: NormSeries,
    projected: Vec<Vec<Complex64>>,
    defect: Vec<f64>,
    records: Vec<(usize, RBState)>,
    v_now: VelocityField,
    v_next: VelocityField,
}

/// Solver steps per trajectory sample.
fn substeps(v: &Trajectory, cfg: StepperConfig) -> Result<usize> {
    let s = (v.dt_sample / cfg.dt).round();
    if s < 1.0 || (s * cfg.dt - v.dt_sample).abs() > 1e-9 * v.dt_sample {
        return Err(Error::InvalidParameter(format!(
            "sample spacing {} is not a whole multiple of dt = {}",
            v.dt_sample, cfg.dt
        )));
    }
    Ok(s as usize)
}

fn advance(
    stepper: &NudgedStepper,
    state: &mut RBState,
    a: &VelocityField,
    b: &VelocityField,
    sub: usize,
) -> Result<()> {
    if sub == 1 {
        return stepper.step(state, a, b);
    }
    for j in 0..sub {
        let (s0, s1) = (j as f64 / sub as f64, (j + 1) as f64 / sub as f64);
        let mut v0 = a.scaled(1.0 - s0);
        v0.axpy(s0, b);
        let mut v1 = a.scaled(1.0 - s1);
        v1.axpy(s1, b);
        stepper.step(state, &v0, &v1)?;
    }
    Ok(())
}

/// Integrate the nudged system for every trajectory in lockstep.
/// `observe(k, mains)` sees the main states after sample k is reached.
/// Returns one output per lane; all tails start at the same sample.
pub(crate) fn run_lockstep(
    vs: &[&Trajectory],
    p: &PhysicalParams,
    np: &NudgeParams,
    cfg: StepperConfig,
    spin: &SpinUpConfig,
    mut observe: impl FnMut(usize, &[&RBState]),
) -> Result<Vec<WOutput>> {
    spin.validate(p)?;
    let v0 = vs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no trajectories given".into()))?;
    for v in vs {
        v0.check_compatible(v)?;
    }
    if !std::sync::Arc::ptr_eq(&v0.interp, &np.interp)
        && (v0.interp.base != np.interp.base || v0.interp.domain != np.interp.domain)
    {
        return Err(Error::GridMismatch);
    }
    let dt_s = v0.dt_sample;
    let sub = substeps(v0, cfg)?;
    let n = v0.len();
    let offset = spin.offset(p);
    let k_off = ((offset / dt_s).round() as usize).max(1);
    let k_spin = (spin.tau_spin / dt_s).ceil() as usize;
    let k_window = (p.window() / dt_s).round() as usize;
    let required = k_spin.max(k_off) + k_window;
    if n < required + 1 {
        return Err(Error::SpanTooShort {
            span: v0.span(),
            required: required as f64 * dt_s,
        });
    }
    let stepper = NudgedStepper::new(*p, cfg, np.clone())?;
    let grid = p.domain.grid();
    let start = {
        let mut s = RBState::zeros(&p.domain);
        s.t = v0.t0;
        s.u.pin_mean(p.a);
        s
    };
    let mut lanes: Vec<Lane> = vs
        .iter()
        .map(|v| Lane {
            v,
            main: start.clone(),
            check: None,
            series: NormSeries::default(),
            projected: Vec::with_capacity(n),
            defect: vec![f64::INFINITY; n],
            records: Vec::new(),
            v_now: VelocityField::zeros(&grid),
            v_next: VelocityField::zeros(&grid),
        })
        .collect();
    for lane in lanes.iter_mut() {
        lane.v.sample_into(0, &mut lane.v_now);
    }
    let scale = p.nu * p.lambda1().sqrt();
    let keep_from = k_spin.max(k_off);
    for k in 0..n {
        for lane in lanes.iter_mut() {
            if k == k_off {
                let mut s = start.clone();
                s.t = lane.v.time(k);
                lane.check = Some(s);
            }
            if let Some(c) = &lane.check {
                lane.defect[k] = norm_v0(&lane.main.u.sub(&c.u)) / scale;
            }
            lane.series.push(&lane.main.u, &lane.main.theta);
            lane.projected
                .push(np.interp.compress(&np.interp.apply(&lane.main.u)));
            if spin.record_stride > 0 && k >= keep_from && k % spin.record_stride == 0 {
                lane.records.push((k, lane.main.clone()));
            }
        }
        {
            let mains: Vec<&RBState> = lanes.iter().map(|l| &l.main).collect();
            observe(k, &mains);
        }
        if k + 1 == n {
            break;
        }
        for lane in lanes.iter_mut() {
            lane.v.sample_into(k + 1, &mut lane.v_next);
            advance(&stepper, &mut lane.main, &lane.v_now, &lane.v_next, sub)?;
            if let Some(c) = lane.check.as_mut() {
                advance(&stepper, c, &lane.v_now, &lane.v_next, sub)?;
            }
            std::mem::swap(&mut lane.v_now, &mut lane.v_next);
        }
    }
    // Common tail start: after the spin-up and after the last stationarity
    // violation of any lane.
    let mut ks = keep_from;
    for lane in &lanes {
        let tol = spin.tolerance * norm_x(lane.v, p);
        if let Some(last_bad) = (keep_from..n).rev().find(|&k| lane.defect[k] > tol) {
            ks = ks.max(last_bad + 1);
        }
    }
    if n < ks + k_window + 1 {
        // Report the defect over the last possible tail of the worst lane.
        let last = n - 1 - k_window;
        let (defect, tolerance) = lanes
            .iter()
            .map(|l| {
                let d = l.defect[last..].iter().cloned().fold(0.0, f64::max);
                (d, spin.tolerance * norm_x(l.v, p))
            })
            .max_by(|a, b| (a.0 - a.1).total_cmp(&(b.0 - b.1)))
            .expect("at least one lane");
        return Err(Error::TailNotConverged { defect, tolerance });
    }
    let mut out = Vec::with_capacity(lanes.len());
    for mut lane in lanes {
        lane.series.trim(ks);
        let packed = lane.projected.split_off(ks);
        let projected = Trajectory::from_packed(lane.v.time(ks), dt_s, np.interp.clone(), packed)?;
        let defect = lane.defect[ks..].iter().cloned().fold(0.0, f64::max);
        out.push(WOutput {
            tail_start: ks,
            projected,
            series: lane.series,
            records: lane
                .records
                .into_iter()
                .filter(|(k, _)| *k >= ks)
                .map(|(_, s)| s)
                .collect(),
            defect,
            tolerance: spin.tolerance * norm_x(lane.v, p),
        });
    }
    Ok(out)
}

/// W~(v): integrate the nudged system from (0, 0) at the start of v and
/// return the converged tail.
pub fn w_map(
    v: &Trajectory,
    p: &PhysicalParams,
    np: &NudgeParams,
    cfg: StepperConfig,
    spin: &SpinUpConfig,
) -> Result<WOutput> {
    let mut out = run_lockstep(&[v], p, np, cfg, spin, |_, _| {})?;
    Ok(out.pop().expect("one lane"))
}

/// Recover the full (w, eta) trajectory determined by a steady state of the
/// determining form. Fails with NotSteady if v is not (numerically) the
/// projection of its own W-image.
pub fn recover_solution(
    v: &Trajectory,
    p: &PhysicalParams,
    np: &NudgeParams,
    cfg: StepperConfig,
    spin: &SpinUpConfig,
    steady_tolerance: f64,
) -> Result<WOutput> {
    let out = w_map(v, p, np, cfg, spin)?;
    let q = out.q(v, p);
    let tol = steady_tolerance * norm_x(v, p);
    if q > tol {
        return Err(Error::NotSteady {
            defect: q,
            tolerance: tol,
        });
    }
    Ok(out)
}

/// Differences of two W-images over a common tail.
#[derive(Debug, Clone)]
pub struct PairOutput {
    pub first: WOutput,
    pub second: WOutput,
    /// Norm series of (w1 - w2, eta1 - eta2) over the tail.
    pub diff: NormSeries,
}

/// W~(v1) and W~(v2) computed in lockstep, with their difference tracked at
/// every sample.
pub fn w_map_pair(
    v1: &Trajectory,
    v2: &Trajectory,
    p: &PhysicalParams,
    np: &NudgeParams,
    cfg: StepperConfig,
    spin: &SpinUpConfig,
) -> Result<PairOutput> {
    let mut diff = NormSeries::default();
    let mut out = run_lockstep(&[v1, v2], p, np, cfg, spin, |_, m| {
        diff.push_diff(m[0], m[1])
    })?;
    let second = out.pop().expect("two lanes");
    let first = out.pop().expect("two lanes");
    diff.trim(first.tail_start);
    Ok(PairOutput {
        first,
        second,
        diff,
    })
}
