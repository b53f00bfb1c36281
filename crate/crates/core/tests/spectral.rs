use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rbdf_core::spectral::{
    laplacian_apply, leray_project, norm_a0, norm_h1_seminorm, norm_l2, norm_v0, norm_v0_sq,
    random_scalar, random_velocity, symmetry_project_as, Operator,
};
use rbdf_core::{DomainSpec, Parity, SpectralField, VelocityField};

fn domain() -> DomainSpec {
    DomainSpec::new(2.0 * PI, PI, 16, 32).unwrap()
}

/// A dealiased field with no parity, built from random physical samples.
fn unsymmetric(seed: u64) -> SpectralField {
    let g = domain().grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let even = random_scalar(&g, Parity::EvenX2, 10.0, 0.0, &mut rng);
    let odd = random_scalar(&g, Parity::OddX2, 10.0, 0.0, &mut rng);
    let mut c = even.coeffs().to_vec();
    for (a, b) in c.iter_mut().zip(odd.coeffs()) {
        *a += b;
    }
    SpectralField::from_coeffs(&g, Parity::EvenX2, c)
}

#[test]
fn even_projection_matches_physical_mirror() {
    let d = domain();
    let f = unsymmetric(1);
    let phys = f.to_physical();
    let even = symmetry_project_as(&f, Parity::EvenX2).to_physical();
    let scale = phys.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..d.nx {
        for j in 0..d.ny {
            let mirror = phys[i * d.ny + (d.ny - j) % d.ny];
            let want = 0.5 * (phys[i * d.ny + j] + mirror);
            assert!((even[i * d.ny + j] - want).abs() <= 1e-13 * scale);
        }
    }
}

#[test]
fn parity_parts_reconstruct_and_project_idempotently() {
    let f = unsymmetric(2);
    let e = symmetry_project_as(&f, Parity::EvenX2);
    let o = symmetry_project_as(&f, Parity::OddX2);
    let sum = e.add(&o);
    let err = sum.sub(&f);
    assert!(norm_l2(&err) <= 1e-13 * norm_l2(&f));
    let again = symmetry_project_as(&e, Parity::EvenX2);
    assert_eq!(again.coeffs(), e.coeffs());
}

#[test]
fn odd_function_has_no_even_part() {
    let g = domain().grid();
    let s = SpectralField::from_fn(&g, Parity::OddX2, |_, x2| x2.sin());
    let e = symmetry_project_as(&s, Parity::EvenX2);
    assert!(norm_l2(&e) <= 1e-14 * norm_l2(&s));
}

#[test]
fn leray_removes_gradients_and_keeps_solenoidal_fields() {
    let g = domain().grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // grad phi for phi even in x2: (d1 phi, d2 phi) is (even, odd).
    let phi = random_scalar(&g, Parity::EvenX2, 10.0, 0.0, &mut rng);
    let mut d1 = phi.clone();
    let mut d2 = phi.clone();
    d2.set_parity(Parity::OddX2);
    for m in 0..g.mh {
        for j in 0..g.domain.ny {
            let i = g.index(m, j);
            d1.coeffs_mut()[i] *= rbdf_core::Complex64::new(0.0, g.kx[m]);
            d2.coeffs_mut()[i] *= rbdf_core::Complex64::new(0.0, g.ky[j]);
        }
    }
    let grad = VelocityField::new(d1, d2);
    let p = leray_project(&grad.u1, &grad.u2);
    assert!(norm_l2(&p) <= 1e-14 * norm_l2(&grad));

    let u = random_velocity(&g, 10.0, 0.0, &mut rng);
    let pu = leray_project(&u.u1, &u.u2);
    assert!(norm_l2(&pu.sub(&u)) <= 1e-14 * norm_l2(&u));
    let ppu = leray_project(&pu.u1, &pu.u2);
    assert!(norm_l2(&ppu.sub(&pu)) <= 1e-14 * norm_l2(&u));
    assert!(pu.max_divergence() <= 1e-12 * norm_l2(&u));
}

#[test]
fn laplacian_eigenfunctions() {
    let g = domain().grid();
    let c = SpectralField::from_fn(&g, Parity::EvenX2, |_, _| 3.0);
    assert!(norm_l2(&laplacian_apply(&c, Operator::A0)) <= 1e-14);
    // With l = pi, sin(x2) has eigenvalue 1 and cos(2 x1) sin(3 x2) has 13.
    let f = SpectralField::from_fn(&g, Parity::OddX2, |x1, x2| {
        (2.0 * x1).cos() * (3.0 * x2).sin() + x2.sin()
    });
    let want = SpectralField::from_fn(&g, Parity::OddX2, |x1, x2| {
        13.0 * (2.0 * x1).cos() * (3.0 * x2).sin() + x2.sin()
    });
    let got = laplacian_apply(&f, Operator::A1);
    assert!(norm_l2(&got.sub(&want)) <= 1e-12 * norm_l2(&want));
}

#[test]
fn norm_inequalities_on_random_fields() {
    let d = domain();
    let g = d.grid();
    let lambda1 = d.lambda1();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let th = random_scalar(&g, Parity::OddX2, 8.0, 1.0, &mut rng);
        assert!(norm_l2(&th).powi(2) <= norm_h1_seminorm(&th).powi(2) / lambda1 * (1.0 + 1e-12));
        let mut u = random_velocity(&g, 8.0, 1.0, &mut rng);
        u.pin_mean(0.7);
        assert!(norm_l2(&u).powi(2) <= d.area() * norm_v0_sq(&u) * (1.0 + 1e-12));
        assert!((norm_v0(&u).powi(2) - norm_v0_sq(&u)).abs() <= 1e-12 * norm_v0_sq(&u));
    }
}

#[test]
fn transform_round_trip() {
    let g = domain().grid();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random_scalar(&g, Parity::OddX2, 10.0, 0.0, &mut rng);
    let back = SpectralField::from_physical(&g, Parity::OddX2, &f.to_physical());
    assert!(norm_l2(&back.sub(&f)) <= 1e-13 * norm_l2(&f));
}

/// |A0 u| against a sixth-order finite-difference Laplacian of the same
/// analytic field sampled on a much finer grid.
#[test]
fn a0_norm_matches_refined_finite_differences() {
    let d = domain();
    let g = d.grid();
    let u1 = |x1: f64, x2: f64| {
        x1.cos() * x2.cos() + 0.3 * (2.0 * x1).sin() + 0.2 * (x1 + 0.4).cos() * (3.0 * x2).cos()
    };
    let u2 = |x1: f64, x2: f64| x1.sin() * x2.sin() - 0.5 * (2.0 * x1).cos() * (2.0 * x2).sin();
    let u = VelocityField::new(
        SpectralField::from_fn(&g, Parity::EvenX2, u1),
        SpectralField::from_fn(&g, Parity::OddX2, u2),
    );
    let (nx, ny) = (256usize, 256usize);
    let (hx, hy) = (d.length / nx as f64, 2.0 * d.half_height / ny as f64);
    let c = [
        1.0 / 90.0,
        -3.0 / 20.0,
        1.5,
        -49.0 / 18.0,
        1.5,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let mut sum = 0.0;
    for f in [&u1 as &dyn Fn(f64, f64) -> f64, &u2] {
        for i in 0..nx {
            for j in 0..ny {
                let (x, y) = (i as f64 * hx, j as f64 * hy);
                let mut lap = 0.0;
                for (k, ck) in c.iter().enumerate() {
                    let s = k as f64 - 3.0;
                    lap += ck * (f(x + s * hx, y) / (hx * hx) + f(x, y + s * hy) / (hy * hy));
                }
                sum += lap * lap;
            }
        }
    }
    let fd = (sum * hx * hy).sqrt();
    let spectral = norm_a0(&u);
    assert!(
        (fd - spectral).abs() <= 1e-6 * spectral,
        "{fd} vs {spectral}"
    );
}

#[test]
fn shear_norms_closed_form() {
    let d = domain();
    let g = d.grid();
    let l = d.half_height;
    let u = VelocityField::new(
        SpectralField::from_fn(&g, Parity::EvenX2, |_, x2| (PI * x2 / l).cos()),
        SpectralField::zeros(&g, Parity::OddX2),
    );
    let lx = d.length * l;
    assert!((norm_l2(&u).powi(2) - lx).abs() <= 1e-12 * lx);
    let k2 = (PI / l).powi(2);
    assert!((norm_h1_seminorm(&u).powi(2) - k2 * lx).abs() <= 1e-12 * k2 * lx);
}
