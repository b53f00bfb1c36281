//! The velocity-nudged auxiliary system and the synchronization experiment.

use std::sync::mpsc::sync_channel;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::{InterpolantKind, ModifiedInterpolant};
use crate::solver::{rb_rhs, PhysicalParams, RBState, Stepper, StepperConfig, Tendency};
use crate::spectral::{norm_l2, norm_v0, norm_v1, ScalarField, VelocityField};

#[derive(Debug, Clone)]
pub struct NudgeParams {
    pub mu: f64,
    pub interp: Arc<ModifiedInterpolant>,
    /// With a Fourier low-pass base, integrate the (diagonal) feedback exactly
    /// by operator splitting instead of explicitly.
    pub fold_lowpass: bool,
}

impl NudgeParams {
    pub fn new(mu: f64, interp: Arc<ModifiedInterpolant>) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive, got {mu}"
            )));
        }
        Ok(NudgeParams {
            mu,
            interp,
            fold_lowpass: true,
        })
    }

    /// Relaxation rate mu nu lambda_1.
    pub fn rate(&self, p: &PhysicalParams) -> f64 {
        self.mu * p.nu * p.lambda1()
    }

    fn split(&self) -> bool {
        self.fold_lowpass && matches!(self.interp.base, InterpolantKind::FourierLowpass(_))
    }
}

/// -mu nu lambda_1 (I~_h w - v), with the mean mode left alone.
pub fn feedback(
    w: &VelocityField,
    v: &VelocityField,
    p: &PhysicalParams,
    np: &NudgeParams,
) -> VelocityField {
    let mut f = np.interp.apply(w);
    f.axpy(-1.0, v);
    f.scale(-np.rate(p));
    f.u1.coeffs_mut()[0] = crate::spectral::ZERO;
    f.u2.coeffs_mut()[0] = crate::spectral::ZERO;
    f
}

/// Right-hand side of the nudged system: the Boussinesq tendency of (w, eta)
/// plus feedback in the momentum equation only.
pub fn aux_rhs(
    w: &VelocityField,
    eta: &ScalarField,
    v: &VelocityField,
    p: &PhysicalParams,
    np: &NudgeParams,
) -> Tendency {
    let state = RBState {
        u: w.clone(),
        theta: eta.clone(),
        t: 0.0,
    };
    let mut t = rb_rhs(&state, p);
    t.du.axpy(1.0, &feedback(w, v, p, np));
    t
}

/// Stepper for the nudged system driven by values of v at the two ends of
/// each step.
#[derive(Debug, Clone)]
pub struct NudgedStepper {
    pub inner: Stepper,
    pub np: NudgeParams,
    half_decay: f64,
}

impl NudgedStepper {
    pub fn new(p: PhysicalParams, cfg: StepperConfig, np: NudgeParams) -> Result<Self> {
        if np.interp.domain != p.domain {
            return Err(Error::GridMismatch);
        }
        let half_decay = (-np.rate(&p) * 0.5 * cfg.dt).exp();
        Ok(NudgedStepper {
            inner: Stepper::new(p, cfg)?,
            np,
            half_decay,
        })
    }

    pub fn dt(&self) -> f64 {
        self.inner.dt
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.inner.params
    }

    /// Exact relaxation of the retained modes towards a frozen v over half a step.
    fn relax(&self, w: &mut VelocityField, v: &VelocityField) {
        let e = self.half_decay;
        for &i in self.np.interp.range_indices().iter().filter(|&&i| i != 0) {
            for (wc, vc) in [(&mut w.u1, &v.u1), (&mut w.u2, &v.u2)] {
                let target = vc.coeffs()[i];
                let c = &mut wc.coeffs_mut()[i];
                *c = target + (*c - target) * e;
            }
        }
    }

    /// Advance by one step; `v_now`, `v_next` are the driving values at the
    /// start and end of the step.
    pub fn step(
        &self,
        state: &mut RBState,
        v_now: &VelocityField,
        v_next: &VelocityField,
    ) -> Result<()> {
        if self.np.split() {
            // Strang splitting: half relaxation, Boussinesq step, half relaxation.
            self.relax(&mut state.u, v_now);
            self.inner.step(state)?;
            self.relax(&mut state.u, v_next);
            return Ok(());
        }
        let p = self.inner.params;
        let (t0, dt) = (state.t, self.inner.dt);
        let np = &self.np;
        let force = move |w: &VelocityField, t: f64| {
            let s = ((t - t0) / dt).clamp(0.0, 1.0);
            let mut v = v_now.scaled(1.0 - s);
            v.axpy(s, v_next);
            feedback(w, &v, &p, np)
        };
        self.inner.step_forced(state, Some(&force))
    }
}

/// One driving sample: I~_h u at a solver step, packed on the retained
/// modes, plus the full reference state on recorded steps.
#[derive(Debug, Clone)]
pub struct DriveSample {
    pub packed: Vec<Complex64>,
    pub reference: Option<RBState>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SyncReport {
    pub t: Vec<f64>,
    /// ||w - u||_{V0}
    pub err_v0: Vec<f64>,
    /// |eta - theta|
    pub err_l2_theta: Vec<f64>,
    /// ||eta - theta||
    pub err_h1_theta: Vec<f64>,
    /// Fitted exponential rate of err_v0 + err_l2_theta.
    pub rate: f64,
    pub fit_window: (f64, f64),
    /// Ratio of the first to the last combined error.
    pub decay_factor: f64,
}

impl SyncReport {
    pub fn combined(&self) -> Vec<f64> {
        self.err_v0
            .iter()
            .zip(&self.err_l2_theta)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn final_errors(&self) -> (f64, f64, f64) {
        let last = |v: &Vec<f64>| v.last().copied().unwrap_or(0.0);
        (
            last(&self.err_v0),
            last(&self.err_l2_theta),
            last(&self.err_h1_theta),
        )
    }
}

/// Least-squares slope of log(e) against t over t >= t_start, stopping at
/// the first point where e has fallen below `floor` times its maximum.
pub fn fit_decay_rate(t: &[f64], e: &[f64], t_start: f64, floor: f64) -> (f64, (f64, f64)) {
    let emax = e.iter().cloned().fold(0.0, f64::max);
    let mut pts = Vec::new();
    for (&ti, &ei) in t.iter().zip(e) {
        if ti < t_start {
            continue;
        }
        if !(ei > floor * emax) {
            break;
        }
        pts.push((ti, ei.ln()));
    }
    if pts.len() < 2 {
        return (0.0, (t_start, t_start));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, (pts[0].0, pts[pts.len() - 1].0))
}

/// Settings of a synchronization run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncConfig {
    pub t_span: f64,
    /// Record errors every this many solver steps.
    pub record_stride: usize,
    /// Fraction of the span treated as transient for the rate fit.
    pub transient_fraction: f64,
    pub queue_bound: usize,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig {
            t_span: 20.0,
            record_stride: 20,
            transient_fraction: 0.1,
            queue_bound: 64,
        }
    }
}

/// Integrate the reference system from `u0` and emit the driving samples.
pub fn reference_drive(
    u0: &RBState,
    p: &PhysicalParams,
    cfg: StepperConfig,
    interp: &ModifiedInterpolant,
    sc: &SyncConfig,
    mut emit: impl FnMut(DriveSample) -> bool,
) -> Result<()> {
    let stepper = Stepper::new(*p, cfg)?;
    let n = stepper.steps_for(sc.t_span);
    let mut state = u0.clone();
    for k in 0..=n {
        if k > 0 {
            stepper.step(&mut state)?;
        }
        let sample = DriveSample {
            packed: interp.compress(&interp.apply(&state.u)),
            reference: (k % sc.record_stride.max(1) == 0 || k == n).then(|| state.clone()),
        };
        if !emit(sample) {
            break;
        }
    }
    Ok(())
}

/// Consume driving samples, integrate the nudged system from (0, 0) and
/// compare against the recorded reference states.
pub fn nudged_response(
    samples: impl IntoIterator<Item = DriveSample>,
    t0: f64,
    stepper: &NudgedStepper,
    sc: &SyncConfig,
) -> Result<SyncReport> {
    let interp = stepper.np.interp.clone();
    let mut state = RBState::zeros(&stepper.params().domain);
    state.t = t0;
    state.u.pin_mean(stepper.params().a);
    let mut report = SyncReport::default();
    let mut v_now = VelocityField::zeros(&stepper.params().domain.grid());
    let mut v_next = v_now.clone();
    let mut first = true;
    for s in samples {
        if first {
            interp.expand_into(&s.packed, &mut v_now);
            first = false;
        } else {
            interp.expand_into(&s.packed, &mut v_next);
            stepper.step(&mut state, &v_now, &v_next)?;
            std::mem::swap(&mut v_now, &mut v_next);
        }
        if let Some(r) = &s.reference {
            report.t.push(state.t);
            report.err_v0.push(norm_v0(&state.u.sub(&r.u)));
            let dth = state.theta.sub(&r.theta);
            report.err_l2_theta.push(norm_l2(&dth));
            report.err_h1_theta.push(norm_v1(&dth));
        }
    }
    let c = report.combined();
    if let (Some(&a), Some(&b)) = (c.first(), c.last()) {
        report.decay_factor = if b > 0.0 { a / b } else { f64::INFINITY };
        let start = t0 + sc.transient_fraction * sc.t_span;
        let (rate, win) = fit_decay_rate(&report.t, &c, start, 1e-13);
        report.rate = rate;
        report.fit_window = win;
    }
    Ok(report)
}

/// Run the reference on its own thread, streaming samples through a bounded
/// queue to the nudged integration on the calling thread.
pub fn synchronize_experiment(
    u0: &RBState,
    p: &PhysicalParams,
    cfg: StepperConfig,
    np: &NudgeParams,
    sc: &SyncConfig,
) -> Result<SyncReport> {
    let stepper = NudgedStepper::new(*p, cfg, np.clone())?;
    let (tx, rx) = sync_channel::<DriveSample>(sc.queue_bound.max(1));
    let interp = np.interp.clone();
    std::thread::scope(|scope| {
        let producer =
            scope.spawn(move || reference_drive(u0, p, cfg, &interp, sc, |s| tx.send(s).is_ok()));
        let report = nudged_response(rx.iter(), u0.t, &stepper, sc);
        let produced = producer.join().expect("reference thread panicked");
        produced?;
        report
    })
}

/// Same experiment with the reference samples precomputed.
pub fn synchronize_sequential(
    samples: Vec<DriveSample>,
    t0: f64,
    p: &PhysicalParams,
    cfg: StepperConfig,
    np: &NudgeParams,
    sc: &SyncConfig,
) -> Result<SyncReport> {
    let stepper = NudgedStepper::new(*p, cfg, np.clone())?;
    nudged_response(samples, t0, &stepper, sc)
}
