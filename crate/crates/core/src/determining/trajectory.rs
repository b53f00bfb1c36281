use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::ModifiedInterpolant;
use crate::nudging::reference_drive;
use crate::nudging::SyncConfig;
use crate::solver::{PhysicalParams, RBState, StepperConfig};
use crate::spectral::{norm_l2, random_velocity, VelocityField};

use super::norms::norm_x;

/// Uniformly sampled velocity trajectory in the range of I~_h, stored as
/// packed coefficients on the retained modes.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t0: f64,
    pub dt_sample: f64,
    pub interp: Arc<ModifiedInterpolant>,
    samples: Vec<Vec<Complex64>>,
}

impl Trajectory {
    /// Build from full fields, checking that each lies in the range of P_r.
    pub fn from_fields(
        t0: f64,
        dt_sample: f64,
        interp: Arc<ModifiedInterpolant>,
        fields: &[VelocityField],
    ) -> Result<Self> {
        check_dt(dt_sample)?;
        let mut samples = Vec::with_capacity(fields.len());
        for (k, u) in fields.iter().enumerate() {
            if u.domain() != &interp.domain {
                return Err(Error::GridMismatch);
            }
            let defect = interp.range_defect(u);
            if defect > 1e-12 * norm_l2(u).max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!(
                    "sample {k} is not in the range of the modified interpolant (defect {defect:.3e})"
                )));
            }
            samples.push(interp.compress(u));
        }
        Ok(Trajectory {
            t0,
            dt_sample,
            interp,
            samples,
        })
    }

    /// Build from packed samples produced by [`ModifiedInterpolant::compress`].
    pub fn from_packed(
        t0: f64,
        dt_sample: f64,
        interp: Arc<ModifiedInterpolant>,
        samples: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        check_dt(dt_sample)?;
        let n = interp.packed_len();
        if samples.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidParameter(
                "packed sample has the wrong length".into(),
            ));
        }
        Ok(Trajectory {
            t0,
            dt_sample,
            interp,
            samples,
        })
    }

    /// Sample f(t) at t0 + k dt for k < n, projecting each value with P_r.
    pub fn from_fn(
        t0: f64,
        dt_sample: f64,
        n: usize,
        interp: Arc<ModifiedInterpolant>,
        f: impl Fn(f64) -> VelocityField,
    ) -> Result<Self> {
        check_dt(dt_sample)?;
        let samples = (0..n)
            .map(|k| {
                let mut u = f(t0 + k as f64 * dt_sample);
                interp.project_range(&mut u);
                interp.compress(&u)
            })
            .collect();
        Ok(Trajectory {
            t0,
            dt_sample,
            interp,
            samples,
        })
    }

    pub fn zeros(
        t0: f64,
        dt_sample: f64,
        n: usize,
        interp: Arc<ModifiedInterpolant>,
    ) -> Result<Self> {
        check_dt(dt_sample)?;
        let z = vec![Complex64::new(0.0, 0.0); interp.packed_len()];
        Ok(Trajectory {
            t0,
            dt_sample,
            interp,
            samples: vec![z; n],
        })
    }

    /// Random quasi-periodic trajectory sum_j cos(omega_j t + phi_j) a_j(x)
    /// with `modes` random spatial profiles, scaled so that ||v||_X = `x_norm`.
    pub fn random(
        t0: f64,
        dt_sample: f64,
        n: usize,
        interp: Arc<ModifiedInterpolant>,
        p: &PhysicalParams,
        x_norm: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = interp.domain.grid();
        let k_cut = 1.0 / interp.h();
        let modes: Vec<(f64, f64, VelocityField)> = (0..3)
            .map(|_| {
                let omega = rng.gen_range(0.2..2.0) * p.nu * p.lambda1();
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let mut a = random_velocity(&grid, k_cut, 0.0, &mut rng);
                interp.project_range(&mut a);
                (omega, phase, a)
            })
            .collect();
        let v = Trajectory::from_fn(t0, dt_sample, n, interp, |t| {
            let mut u = VelocityField::zeros(&grid);
            for (omega, phase, a) in &modes {
                u.axpy((omega * (t - t0) + phase).cos(), a);
            }
            u
        })?;
        let x = norm_x(&v, p);
        if x == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(v.scaled(x_norm / x))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.len().saturating_sub(1) as f64 * self.dt_sample
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_sample
    }

    pub fn packed(&self, k: usize) -> &[Complex64] {
        &self.samples[k]
    }

    pub fn sample(&self, k: usize) -> VelocityField {
        self.interp.expand(&self.samples[k])
    }

    pub fn sample_into(&self, k: usize, out: &mut VelocityField) {
        self.interp.expand_into(&self.samples[k], out);
    }

    /// ||v(t_k)||_{V0} for every sample.
    pub fn v0_series(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| self.interp.packed_v0_sq(s).sqrt())
            .collect()
    }

    /// a self + b other, sample by sample.
    pub fn combine(&self, a: f64, other: &Trajectory, b: f64) -> Result<Trajectory> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * a + q * b).collect())
            .collect();
        Ok(Trajectory {
            samples,
            ..self.clone_header()
        })
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scaled(&self, s: f64) -> Trajectory {
        let samples = self
            .samples
            .iter()
            .map(|x| x.iter().map(|c| c * s).collect())
            .collect();
        Trajectory {
            samples,
            ..self.clone_header()
        }
    }

    /// Samples k0..k1 as a new trajectory.
    pub fn window(&self, k0: usize, k1: usize) -> Trajectory {
        Trajectory {
            t0: self.time(k0),
            samples: self.samples[k0..k1].to_vec(),
            ..self.clone_header()
        }
    }

    /// A trajectory that is constant in time.
    pub fn constant(&self, u: &VelocityField) -> Trajectory {
        let mut p = u.clone();
        self.interp.project_range(&mut p);
        let packed = self.interp.compress(&p);
        Trajectory {
            samples: vec![packed; self.len()],
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Trajectory {
        Trajectory {
            t0: self.t0,
            dt_sample: self.dt_sample,
            interp: self.interp.clone(),
            samples: Vec::new(),
        }
    }

    pub fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        let same_interp = Arc::ptr_eq(&self.interp, &other.interp)
            || (self.interp.base == other.interp.base && self.interp.domain == other.interp.domain);
        if !same_interp {
            return Err(Error::GridMismatch);
        }
        if self.len() != other.len()
            || (self.t0 - other.t0).abs() > 1e-9 * self.dt_sample
            || (self.dt_sample - other.dt_sample).abs() > 1e-12 * self.dt_sample
        {
            return Err(Error::InvalidParameter(
                "trajectories have different sampling".into(),
            ));
        }
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample spacing must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// A reference run: I~_h u sampled at every solver step, plus full states
/// every `record_stride` steps.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub projected: Trajectory,
    pub records: Vec<RBState>,
    pub record_stride: usize,
}

/// Integrate from `u0` for `span` time units and record the projected
/// trajectory at solver resolution.
pub fn record_reference(
    u0: &RBState,
    p: &PhysicalParams,
    cfg: StepperConfig,
    span: f64,
    interp: Arc<ModifiedInterpolant>,
    record_stride: usize,
) -> Result<ReferenceRun> {
    let sc = SyncConfig {
        t_span: span,
        record_stride: record_stride.max(1),
        ..SyncConfig::default()
    };
    let mut packed = Vec::new();
    let mut records = Vec::new();
    reference_drive(u0, p, cfg, &interp, &sc, |s| {
        packed.push(s.packed);
        if let Some(r) = s.reference {
            records.push(r);
        }
        true
    })?;
    let projected = Trajectory::from_packed(u0.t, cfg.dt, interp, packed)?;
    Ok(ReferenceRun {
        projected,
        records,
        record_stride: sc.record_stride,
    })
}
