use rbdf_core::solver::{
    check_max_principle, estimate_attractor_bounds, h2_over_v0_floor, simulate, PhysicalParams,
    RBState, Stepper, StepperConfig,
};
use rbdf_core::spectral::{norm_h1_seminorm, norm_l2};
use rbdf_core::{DomainSpec, Error, ScalarField, SpectralField};

fn params(g: f64) -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0, g, DomainSpec::standard(16, 32)).unwrap()
}

fn cfg(dt: f64) -> StepperConfig {
    StepperConfig::new(dt).unwrap()
}

fn same_bits(a: &RBState, b: &RBState) -> bool {
    let bits = |f: &SpectralField| {
        f.coeffs()
            .iter()
            .flat_map(|c| [c.re.to_bits(), c.im.to_bits()])
            .collect::<Vec<_>>()
    };
    bits(&a.u.u1) == bits(&b.u.u1)
        && bits(&a.u.u2) == bits(&b.u.u2)
        && bits(&a.theta.theta) == bits(&b.theta.theta)
}

#[test]
fn split_runs_are_bitwise_identical() {
    let p = params(30.0);
    let s0 = RBState::random(&p, 1.0, 11);
    let whole = simulate(&s0, &p, cfg(0.01), 2.0, 2.0)
        .unwrap()
        .pop()
        .unwrap();
    let half = simulate(&s0, &p, cfg(0.01), 1.0, 1.0)
        .unwrap()
        .pop()
        .unwrap();
    let rest = simulate(&half, &p, cfg(0.01), 2.0, 1.0)
        .unwrap()
        .pop()
        .unwrap();
    assert!(same_bits(&whole, &rest));
    let again = simulate(&s0, &p, cfg(0.01), 2.0, 2.0)
        .unwrap()
        .pop()
        .unwrap();
    assert!(same_bits(&whole, &again));
}

#[test]
fn pure_conduction_perturbation_decays_at_least_at_the_first_eigenvalue() {
    let p = params(0.0);
    let mut s = RBState::random(&p, 1.0, 2);
    s.u = rbdf_core::VelocityField::zeros(s.grid());
    let t_end = 3.0;
    let run = simulate(&s, &p, cfg(0.01), t_end, t_end).unwrap();
    let (a, b) = (norm_l2(&run[0].theta), norm_l2(&run[1].theta));
    let bound = (-p.kappa * p.lambda1() * t_end).exp();
    assert!(b <= a * bound * (1.0 + 1e-9), "{b} > {}", a * bound);
    assert_eq!(norm_l2(&run[1].u), 0.0);
}

#[test]
fn velocity_energy_balance_without_buoyancy() {
    let p = params(0.0);
    let s0 = RBState::random(&p, 1.0, 3);
    let dt = 0.002;
    let run = simulate(&s0, &p, cfg(dt), 1.0, dt).unwrap();
    let e: Vec<f64> = run.iter().map(|s| norm_l2(&s.u).powi(2)).collect();
    let d: Vec<f64> = run
        .iter()
        .map(|s| 2.0 * p.nu * norm_h1_seminorm(&s.u).powi(2))
        .collect();
    let dissipated: f64 = d.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    let lost = e[0] - e[e.len() - 1];
    assert!(
        (lost - dissipated).abs() <= 0.01 * lost,
        "{lost} vs {dissipated}"
    );
}

/// With nu = kappa = 1, l = pi and lambda_1 = 1 the functional
/// |u|^2/g + l |theta|^2 is nonincreasing whenever g < pi.
#[test]
fn subcritical_lyapunov_functional_decreases() {
    let p = params(1.0);
    let l = p.domain.half_height;
    let s0 = RBState::random(&p, 1.0, 4);
    let run = simulate(&s0, &p, cfg(0.01), 5.0, 0.1).unwrap();
    let e: Vec<f64> = run
        .iter()
        .map(|s| norm_l2(&s.u).powi(2) / p.g + l * norm_l2(&s.theta).powi(2))
        .collect();
    for w in e.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-10), "{} -> {}", w[0], w[1]);
    }
    assert!(e[e.len() - 1] < 0.05 * e[0]);
}

#[test]
fn attractor_bounds_respect_the_floor_and_window() {
    let p = params(50.0);
    let b = estimate_attractor_bounds(&p, cfg(0.01), 2.0, 4.0, 7).unwrap();
    assert!(b.j1 > 0.0);
    assert!(b.j2 >= h2_over_v0_floor(&p.domain) * b.j1);
    assert!(b.t_j1 >= 2.0 - 1e-9 && b.t_j1 <= 4.0 + 1e-9);
    assert_eq!(b.window, (2.0, 4.0));
    assert!(matches!(
        estimate_attractor_bounds(&p, cfg(0.01), 4.0, 2.0, 7),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn max_principle_holds_on_a_convecting_run() {
    let p = params(50.0);
    let s0 = RBState::random(&p, 0.1, 5);
    let run = simulate(&s0, &p, cfg(0.005), 5.0, 0.5).unwrap();
    let r = check_max_principle(&run);
    assert!(r.min >= -0.05 && r.max <= 1.05, "{r:?}");
}

#[test]
fn non_finite_state_is_reported() {
    let p = params(10.0);
    let mut s = RBState::random(&p, 1.0, 6);
    let mut th = s.theta.theta.clone();
    th.coeffs_mut()[1].re = f64::NAN;
    s.theta = ScalarField::new(th);
    let st = Stepper::new(p, cfg(0.01)).unwrap();
    assert!(matches!(st.step(&mut s), Err(Error::NonFinite { .. })));
}

#[test]
fn invalid_parameters_are_rejected() {
    let d = DomainSpec::standard(16, 32);
    assert!(PhysicalParams::new(0.0, 1.0, 1.0, d).is_err());
    assert!(PhysicalParams::new(1.0, -1.0, 1.0, d).is_err());
    assert!(PhysicalParams::new(1.0, 1.0, -1.0, d).is_err());
    assert!(StepperConfig::new(0.0).is_err());
    assert!(StepperConfig::new(f64::NAN).is_err());
    let p = params(1.0);
    let s = RBState::zeros(&p.domain);
    assert!(simulate(&s, &p, cfg(0.01), 0.0, 0.1).is_err());
}
