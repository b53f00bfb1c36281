use rbdf_core::interp::{InterpolantKind, ModifiedInterpolant};
use rbdf_core::nudging::{
    aux_rhs, reference_drive, synchronize_experiment, synchronize_sequential, NudgeParams,
    NudgedStepper, SyncConfig,
};
use rbdf_core::solver::{rb_rhs, PhysicalParams, RBState, StepperConfig};
use rbdf_core::spectral::norm_l2;
use rbdf_core::{DomainSpec, Error};

mod common;

fn setup(nx: usize, g: f64, kind: InterpolantKind, mu: f64) -> (PhysicalParams, NudgeParams) {
    let d = DomainSpec::standard(nx, 2 * nx);
    let p = PhysicalParams::new(1.0, 1.0, g, d).unwrap();
    let m = ModifiedInterpolant::new(kind, d).unwrap();
    (p, NudgeParams::new(mu, m).unwrap())
}

fn cfg() -> StepperConfig {
    StepperConfig::new(0.01).unwrap()
}

#[test]
fn threaded_and_sequential_runs_agree_exactly() {
    let (p, np) = setup(16, 20.0, InterpolantKind::NodalBilinear(0.8), 20.0);
    let u0 = common::settled(&p, cfg(), 1.0, 1).unwrap();
    let sc = SyncConfig {
        t_span: 2.0,
        record_stride: 10,
        transient_fraction: 0.1,
        queue_bound: 4,
    };
    let mut samples = Vec::new();
    reference_drive(&u0, &p, cfg(), &np.interp, &sc, |s| {
        samples.push(s);
        true
    })
    .unwrap();
    let a = synchronize_sequential(samples, u0.t, &p, cfg(), &np, &sc).unwrap();
    let b = synchronize_experiment(&u0, &p, cfg(), &np, &sc).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.t.len(), 21);
}

#[test]
fn zero_reference_is_tracked_exactly() {
    let (p, np) = setup(16, 20.0, InterpolantKind::VolumeAverage(0.8), 20.0);
    let u0 = RBState::zeros(&p.domain);
    let sc = SyncConfig {
        t_span: 1.0,
        record_stride: 10,
        ..SyncConfig::default()
    };
    let r = synchronize_experiment(&u0, &p, cfg(), &np, &sc).unwrap();
    assert!(r.err_v0.iter().chain(&r.err_l2_theta).all(|&e| e == 0.0));
}

#[test]
fn temperature_equation_is_unchanged_by_nudging() {
    let (p, np) = setup(16, 20.0, InterpolantKind::NodalBilinear(0.8), 20.0);
    let a = RBState::random(&p, 1.0, 2);
    let v = RBState::random(&p, 1.0, 3).u;
    let nudged = aux_rhs(&a.u, &a.theta, &v, &p, &np);
    let free = rb_rhs(&a, &p);
    assert_eq!(nudged.dtheta.coeffs(), free.dtheta.coeffs());
    assert!(norm_l2(&nudged.du.sub(&free.du)) > 0.0);
}

#[test]
fn stronger_feedback_tracks_velocity_faster() {
    let mut errs = Vec::new();
    for mu in [2.0, 8.0, 32.0] {
        let (p, np) = setup(16, 20.0, InterpolantKind::NodalBilinear(0.8), mu);
        let u0 = common::settled(&p, cfg(), 2.0, 4).unwrap();
        let sc = SyncConfig {
            t_span: 1.0,
            record_stride: 100,
            ..SyncConfig::default()
        };
        let r = synchronize_experiment(&u0, &p, cfg(), &np, &sc).unwrap();
        errs.push(r.final_errors().0);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn explicit_and_split_lowpass_feedback_converge_together() {
    let (p, np) = setup(16, 20.0, InterpolantKind::FourierLowpass(0.5), 20.0);
    let u0 = common::settled(&p, cfg(), 2.0, 5).unwrap();
    let sc = SyncConfig {
        t_span: 4.0,
        record_stride: 400,
        ..SyncConfig::default()
    };
    let split = synchronize_experiment(&u0, &p, cfg(), &np, &sc).unwrap();
    let explicit = NudgeParams {
        fold_lowpass: false,
        ..np
    };
    let plain = synchronize_experiment(&u0, &p, cfg(), &explicit, &sc).unwrap();
    let (a, b) = (split.final_errors().0, plain.final_errors().0);
    assert!(a < 1e-2 * split.err_v0[0] && b < 1e-2 * plain.err_v0[0]);
}

#[test]
fn synchronization_rate_on_a_finer_grid() {
    let (p, np) = setup(32, 50.0, InterpolantKind::NodalBilinear(0.5), 50.0);
    let u0 = common::settled(&p, cfg(), 3.0, 6).unwrap();
    let sc = SyncConfig {
        t_span: 10.0,
        record_stride: 50,
        ..SyncConfig::default()
    };
    let r = synchronize_experiment(&u0, &p, cfg(), &np, &sc).unwrap();
    assert!(r.rate <= -0.25 * p.kappa * p.lambda1(), "rate {}", r.rate);
}

#[test]
fn mismatched_grids_and_bad_mu_are_rejected() {
    let (p, np) = setup(16, 1.0, InterpolantKind::NodalBilinear(0.8), 1.0);
    let other = PhysicalParams {
        domain: DomainSpec::standard(32, 64),
        ..p
    };
    assert!(matches!(
        NudgedStepper::new(other, cfg(), np.clone()),
        Err(Error::GridMismatch)
    ));
    assert!(NudgeParams::new(0.0, np.interp.clone()).is_err());
}
