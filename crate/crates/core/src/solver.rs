//! Integrating-factor Heun time stepping of the Boussinesq system on the
//! stress-free extended box.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bilinear::Advector;
use crate::error::{Error, Result};
use crate::spectral::{
    leray_in_place, norm_h2, norm_l2, norm_v0, random_scalar, random_velocity, DomainSpec, Grid,
    Parity, ScalarField, SpectralField, VelocityField,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub nu: f64,
    pub kappa: f64,
    pub g: f64,
    pub domain: DomainSpec,
    /// Prescribed integral of u1 over Omega.
    pub a: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, kappa: f64, g: f64, domain: DomainSpec) -> Result<Self> {
        let p = PhysicalParams {
            nu,
            kappa,
            g,
            domain,
            a: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.nu) {
            return Err(Error::InvalidParameter(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if !ok(self.kappa) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "g must be nonnegative, got {}",
                self.g
            )));
        }
        if !self.a.is_finite() {
            return Err(Error::InvalidParameter(
                "velocity average must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn lambda1(&self) -> f64 {
        self.domain.lambda1()
    }

    /// T = 1/(nu lambda_1), the natural time window.
    pub fn window(&self) -> f64 {
        1.0 / (self.nu * self.lambda1())
    }
}

#[derive(Debug, Clone)]
pub struct RBState {
    pub u: VelocityField,
    pub theta: ScalarField,
    pub t: f64,
}

impl RBState {
    pub fn zeros(domain: &DomainSpec) -> Self {
        let g = domain.grid();
        RBState {
            u: VelocityField::zeros(&g),
            theta: ScalarField::zeros(&g),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.theta.is_finite()
    }

    /// Seeded random data: isotropic spectrum cut at |m| <= Nx/6, projected
    /// onto divergence-free fields of the right parity, with root-mean-square
    /// value `amplitude` in each of u and theta.
    pub fn random(p: &PhysicalParams, amplitude: f64, seed: u64) -> Self {
        let g = p.domain.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k_cut = (p.domain.nx / 6) as f64 * 2.0 * std::f64::consts::PI / p.domain.length;
        let mut u = random_velocity(&g, k_cut, 1.0, &mut rng);
        let mut th = random_scalar(&g, Parity::OddX2, k_cut, 1.0, &mut rng);
        let rms = |x: f64| x / p.domain.area().sqrt();
        let su = rms(norm_l2(&u));
        if su > 0.0 {
            u.scale(amplitude / su);
        }
        let st = rms(norm_l2(&th));
        if st > 0.0 {
            th.scale(amplitude / st);
        }
        u.pin_mean(p.a);
        RBState {
            u,
            theta: ScalarField::new(th),
            t: 0.0,
        }
    }

    /// Re-impose every structural invariant: divergence-free, parity,
    /// 2/3-rule support, prescribed mean.
    pub fn canonicalize(&mut self, a: f64) {
        leray_in_place(&mut self.u);
        self.u.project_parity();
        self.u.dealias();
        self.u.pin_mean(a);
        self.theta.project_parity();
        self.theta.dealias();
    }
}

/// Time-derivative pair (du/dt, dtheta/dt).
#[derive(Debug, Clone)]
pub struct Tendency {
    pub du: VelocityField,
    pub dtheta: SpectralField,
}

impl Tendency {
    fn axpy(&mut self, a: f64, x: &Tendency) {
        self.du.axpy(a, &x.du);
        self.dtheta.axpy(a, &x.dtheta);
    }
}

/// Everything except diffusion: -P B0(u,u) + P(g theta e2) and
/// -B1(u,theta) + u2/l.
pub fn explicit_terms(u: &VelocityField, theta: &SpectralField, p: &PhysicalParams) -> Tendency {
    let adv = Advector::new(u);
    let mut du = VelocityField {
        u1: adv.advect(&u.u1),
        u2: adv.advect(&u.u2),
    };
    du.scale(-1.0);
    du.u2.axpy(p.g, theta);
    leray_in_place(&mut du);
    du.u1.coeffs_mut()[0] = crate::spectral::ZERO;
    du.u2.coeffs_mut()[0] = crate::spectral::ZERO;
    let mut dtheta = adv.advect(theta);
    dtheta.scale(-1.0);
    dtheta.axpy(1.0 / p.domain.half_height, &u.u2);
    Tendency { du, dtheta }
}

/// Full right-hand side including diffusion.
pub fn rb_rhs(state: &RBState, p: &PhysicalParams) -> Tendency {
    let mut t = explicit_terms(&state.u, &state.theta, p);
    let k2 = &state.grid().k2;
    add_diffusion(&mut t.du.u1, &state.u.u1, -p.nu, k2);
    add_diffusion(&mut t.du.u2, &state.u.u2, -p.nu, k2);
    add_diffusion(&mut t.dtheta, &state.theta, -p.kappa, k2);
    t
}

fn add_diffusion(out: &mut SpectralField, f: &SpectralField, coef: f64, k2: &[f64]) {
    for ((o, c), &k) in out.coeffs_mut().iter_mut().zip(f.coeffs()).zip(k2) {
        *o += c * (coef * k);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        Ok(StepperConfig { dt })
    }
}

/// Extra explicit velocity tendency f(w, t), e.g. a nudging term.
pub type Forcing<'a> = &'a (dyn Fn(&VelocityField, f64) -> VelocityField + Sync);

/// Integrating-factor Heun stepper with precomputed propagators.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub params: PhysicalParams,
    pub dt: f64,
    eu: Vec<f64>,
    et: Vec<f64>,
}

impl Stepper {
    pub fn new(params: PhysicalParams, cfg: StepperConfig) -> Result<Self> {
        params.validate()?;
        StepperConfig::new(cfg.dt)?;
        let g = params.domain.grid();
        let eu =
            g.k2.iter()
                .map(|k| (-params.nu * k * cfg.dt).exp())
                .collect();
        let et =
            g.k2.iter()
                .map(|k| (-params.kappa * k * cfg.dt).exp())
                .collect();
        Ok(Stepper {
            params,
            dt: cfg.dt,
            eu,
            et,
        })
    }

    fn propagate(&self, t: &mut Tendency) {
        scale_modes(&mut t.du.u1, &self.eu);
        scale_modes(&mut t.du.u2, &self.eu);
        scale_modes(&mut t.dtheta, &self.et);
    }

    fn evaluate(
        &self,
        u: &VelocityField,
        th: &SpectralField,
        t: f64,
        forcing: Option<Forcing>,
    ) -> Tendency {
        let mut n = explicit_terms(u, th, &self.params);
        if let Some(f) = forcing {
            let mut extra = f(u, t);
            extra.u1.coeffs_mut()[0] = crate::spectral::ZERO;
            n.du.axpy(1.0, &extra);
        }
        n
    }

    /// One step of the unforced system.
    pub fn step(&self, state: &mut RBState) -> Result<()> {
        self.step_forced(state, None)
    }

    /// One integrating-factor Heun step with an optional extra velocity
    /// tendency evaluated explicitly.
    pub fn step_forced(&self, state: &mut RBState, forcing: Option<Forcing>) -> Result<()> {
        let dt = self.dt;
        let t0 = state.t;
        let n0 = self.evaluate(&state.u, &state.theta, t0, forcing);
        // predictor: E (y + dt N(y))
        let mut pred = Tendency {
            du: state.u.clone(),
            dtheta: state.theta.theta.clone(),
        };
        pred.axpy(dt, &n0);
        self.propagate(&mut pred);
        let n1 = self.evaluate(&pred.du, &pred.dtheta, t0 + dt, forcing);
        // corrector: E y + dt/2 (E N(y) + N(pred))
        let mut next = Tendency {
            du: state.u.clone(),
            dtheta: state.theta.theta.clone(),
        };
        next.axpy(0.5 * dt, &n0);
        self.propagate(&mut next);
        next.axpy(0.5 * dt, &n1);
        state.u = next.du;
        state.theta.theta = next.dtheta;
        state.t = t0 + dt;
        state.canonicalize(self.params.a);
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok(())
    }

    pub fn steps_for(&self, span: f64) -> usize {
        (span / self.dt).round().max(0.0) as usize
    }
}

pub(crate) fn scale_modes(f: &mut SpectralField, factor: &[f64]) {
    for (c, &e) in f.coeffs_mut().iter_mut().zip(factor) {
        *c *= e;
    }
}

/// Advance `state0` to `t_end`, keeping a snapshot every `sample_every` time
/// units (rounded to whole steps). The first snapshot is the initial state.
pub fn simulate(
    state0: &RBState,
    p: &PhysicalParams,
    cfg: StepperConfig,
    t_end: f64,
    sample_every: f64,
) -> Result<Vec<RBState>> {
    if !(t_end > state0.t) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} must exceed the initial time {}",
            state0.t
        )));
    }
    let stepper = Stepper::new(*p, cfg)?;
    let stride = stepper.steps_for(sample_every).max(1);
    let n = stepper.steps_for(t_end - state0.t);
    let mut state = state0.clone();
    let mut out = vec![state.clone()];
    for k in 1..=n {
        stepper.step(&mut state)?;
        if k % stride == 0 {
            out.push(state.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorBounds {
    /// sup ||u||_{V0} after burn-in.
    pub j1: f64,
    /// sup of |u|/|Omega| + |A0 u| after burn-in, floored by c J1.
    pub j2: f64,
    pub t_j1: f64,
    pub t_j2: f64,
    /// Sampling window [burn_in, horizon].
    pub window: (f64, f64),
}

/// Lower bound c with ||u||_{H2} >= c ||u||_{V0} for every admissible field
/// on the grid.
pub fn h2_over_v0_floor(domain: &DomainSpec) -> f64 {
    let kmin =
        (2.0 * std::f64::consts::PI / domain.length).min(std::f64::consts::PI / domain.half_height);
    (1.0 / domain.area().sqrt()).min(kmin)
}

/// Run from seeded random data, discard `burn_in`, and record running suprema.
pub fn estimate_attractor_bounds(
    p: &PhysicalParams,
    cfg: StepperConfig,
    burn_in: f64,
    horizon: f64,
    seed: u64,
) -> Result<AttractorBounds> {
    if !(horizon > burn_in && burn_in >= 0.0) {
        return Err(Error::InvalidParameter(
            "need 0 <= burn_in < horizon".into(),
        ));
    }
    let stepper = Stepper::new(*p, cfg)?;
    let mut state = RBState::random(p, 1.0, seed);
    let n = stepper.steps_for(horizon);
    let mut b = AttractorBounds {
        j1: 0.0,
        j2: 0.0,
        t_j1: 0.0,
        t_j2: 0.0,
        window: (burn_in, horizon),
    };
    for _ in 0..n {
        stepper.step(&mut state)?;
        if state.t + 1e-12 < burn_in {
            continue;
        }
        let v0 = norm_v0(&state.u);
        let h2 = norm_h2(&state.u);
        if v0 > b.j1 {
            b.j1 = v0;
            b.t_j1 = state.t;
        }
        if h2 > b.j2 {
            b.j2 = h2;
            b.t_j2 = state.t;
        }
    }
    b.j2 = b.j2.max(h2_over_v0_floor(&p.domain) * b.j1);
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleReport {
    pub min: f64,
    pub max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub tolerance: f64,
    pub violated: bool,
}

/// Range of the total temperature theta + (1 - x2/l) over the physical
/// strip 0 <= x2 <= l, across all snapshots.
pub fn check_max_principle(snapshots: &[RBState]) -> MaxPrincipleReport {
    let tol = 1e-6;
    let mut r = MaxPrincipleReport {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        t_min: 0.0,
        t_max: 0.0,
        tolerance: tol,
        violated: false,
    };
    for s in snapshots {
        let d = s.theta.domain();
        let phys = s.theta.to_physical();
        for i in 0..d.nx {
            for j in 0..=d.ny / 2 {
                let tt = phys[i * d.ny + j] + 1.0 - d.x2(j) / d.half_height;
                if tt < r.min {
                    r.min = tt;
                    r.t_min = s.t;
                }
                if tt > r.max {
                    r.max = tt;
                    r.t_max = s.t;
                }
            }
        }
    }
    r.violated = r.min < -tol || r.max > 1.0 + tol;
    r
}
