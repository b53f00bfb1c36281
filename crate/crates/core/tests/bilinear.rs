use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rbdf_core::bilinear::{b0_apply, b0_form, b1_apply, Advector};
use rbdf_core::spectral::{norm_l2, random_scalar, random_velocity};
use rbdf_core::{DomainSpec, Parity, ScalarField, SpectralField, VelocityField};

mod common;
use common::direct_values;

fn grid(nx: usize, ny: usize) -> std::sync::Arc<rbdf_core::spectral::Grid> {
    DomainSpec::new(2.0 * PI, PI, nx, ny).unwrap().grid()
}

#[test]
fn single_mode_advection_matches_collocation() {
    let g = grid(8, 8);
    let u = VelocityField::new(
        SpectralField::from_fn(&g, Parity::EvenX2, |x1, x2| x1.cos() * x2.cos()),
        SpectralField::from_fn(&g, Parity::OddX2, |x1, x2| x1.sin() * x2.sin()),
    );
    let v = VelocityField::new(
        SpectralField::from_fn(&g, Parity::EvenX2, |x1, _| x1.sin()),
        SpectralField::from_fn(&g, Parity::OddX2, |x1, x2| x1.cos() * x2.sin()),
    );
    let got = b0_apply(&u, &v);
    let (u1, u2) = (direct_values(&u.u1, 0), direct_values(&u.u2, 0));
    for (vc, gc) in [(&v.u1, &got.u1), (&v.u2, &got.u2)] {
        let (d1, d2) = (direct_values(vc, 1), direct_values(vc, 2));
        let want: Vec<f64> = (0..d1.len())
            .map(|k| u1[k] * d1[k] + u2[k] * d2[k])
            .collect();
        let have = gc.to_physical();
        for (a, b) in have.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn products_land_in_their_parity_class() {
    let g = grid(32, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_velocity(&g, 8.0, 1.0, &mut rng);
    let th = random_scalar(&g, Parity::OddX2, 8.0, 1.0, &mut rng);
    let a = Advector::new(&u);
    for f in [&u.u1, &u.u2, &th] {
        let raw = a.advect_raw(f);
        let projected = a.advect(f);
        assert!(norm_l2(&raw.sub(&projected)) <= 1e-12 * norm_l2(&raw));
    }
}

#[test]
fn skew_symmetry_and_bilinearity() {
    let g = grid(32, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let u = random_velocity(&g, 8.0, 1.0, &mut rng);
        let v = random_velocity(&g, 8.0, 1.0, &mut rng);
        let w = random_velocity(&g, 8.0, 1.0, &mut rng);
        let (a, b) = (b0_form(&u, &v, &w), b0_form(&u, &w, &v));
        assert!((a + b).abs() <= 1e-12 * a.abs().max(b.abs()));
        let scaled = b0_form(&u.scaled(-2.5), &v, &w);
        assert!((scaled + 2.5 * a).abs() <= 1e-13 * a.abs());
    }
}

#[test]
fn advection_by_zero_and_of_constants_vanishes() {
    let g = grid(16, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_velocity(&g, 8.0, 1.0, &mut rng);
    let th = ScalarField::new(random_scalar(&g, Parity::OddX2, 8.0, 1.0, &mut rng));
    let zero = VelocityField::zeros(&g);
    assert_eq!(norm_l2(&b1_apply(&zero, &th).theta), 0.0);
    let mut c = VelocityField::zeros(&g);
    c.pin_mean(3.0);
    assert!(norm_l2(&b0_apply(&u, &c)) <= 1e-14);
}
