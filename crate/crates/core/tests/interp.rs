use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rbdf_core::interp::{
    apply_raw, apply_raw_velocity, fit_constants, range_dimension, InterpolantKind,
    ModifiedInterpolant,
};
use rbdf_core::spectral::{norm_l2, random_velocity};
use rbdf_core::{DomainSpec, Error, Parity, SpectralField, VelocityField};

fn smooth(x1: f64, x2: f64) -> f64 {
    (x1 + 0.3).sin() * x2.cos() + 0.4 * (2.0 * x2).cos() + 0.2 * x1.cos() * (3.0 * x2).cos()
}

/// 32 x 64 grid cut into 8 x 8 cells of 4 x 8 points, so every node sits on
/// a grid point.
fn exact_cells() -> (DomainSpec, f64) {
    (DomainSpec::standard(32, 64), 2.0 * PI / 8.0)
}

#[test]
fn nodal_matches_direct_bilinear_reconstruction() {
    let (d, h) = exact_cells();
    let g = d.grid();
    let f = SpectralField::from_fn(&g, Parity::EvenX2, smooth);
    let mut want = vec![0.0; d.nx * d.ny];
    for i in 0..d.nx {
        for j in 0..d.ny {
            let (x, y) = (d.x1(i), d.x2(j));
            let (cx, cy) = ((x / h).floor(), (y / h).floor());
            let (s, t) = (x / h - cx, y / h - cy);
            let node = |a: f64, b: f64| smooth(a * h, b * h);
            want[i * d.ny + j] = (1.0 - s) * (1.0 - t) * node(cx, cy)
                + s * (1.0 - t) * node(cx + 1.0, cy)
                + (1.0 - s) * t * node(cx, cy + 1.0)
                + s * t * node(cx + 1.0, cy + 1.0);
        }
    }
    let want = SpectralField::from_physical(&g, Parity::EvenX2, &want);
    let got = apply_raw(&InterpolantKind::NodalBilinear(h), &f).unwrap();
    assert!(norm_l2(&got.sub(&want)) <= 1e-12 * norm_l2(&want));
}

#[test]
fn volume_matches_direct_cell_means() {
    let (d, h) = exact_cells();
    let g = d.grid();
    let f = SpectralField::from_fn(&g, Parity::EvenX2, smooth);
    let (px, py) = (d.nx / 8, d.ny / 8);
    let mut want = vec![0.0; d.nx * d.ny];
    for i in 0..d.nx {
        for j in 0..d.ny {
            let (ci, cj) = (i / px * px, j / py * py);
            let mut s = 0.0;
            for a in ci..ci + px {
                for b in cj..cj + py {
                    s += smooth(d.x1(a), d.x2(b));
                }
            }
            want[i * d.ny + j] = s / (px * py) as f64;
        }
    }
    let want = SpectralField::from_physical(&g, Parity::EvenX2, &want);
    let got = apply_raw(&InterpolantKind::VolumeAverage(h), &f).unwrap();
    assert!(norm_l2(&got.sub(&want)) <= 1e-12 * norm_l2(&want));
}

#[test]
fn lowpass_is_identity_below_the_cut_and_error_grows_with_h() {
    let d = DomainSpec::standard(32, 64);
    let g = d.grid();
    let f = SpectralField::from_fn(&g, Parity::EvenX2, |x1, x2| x1.cos() * x2.cos() + 0.5);
    let got = apply_raw(&InterpolantKind::FourierLowpass(0.7), &f).unwrap();
    assert!(norm_l2(&got.sub(&f)) <= 1e-14 * norm_l2(&f));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_velocity(&g, 8.0, 1.0, &mut rng);
    let mut last = 0.0;
    for h in [0.15, 0.3, 0.6, 1.2] {
        let e =
            norm_l2(&u.sub(&apply_raw_velocity(&InterpolantKind::FourierLowpass(h), &u).unwrap()));
        assert!(e >= last);
        last = e;
    }
}

#[test]
fn modified_interpolant_is_linear_and_lands_in_its_range() {
    let d = DomainSpec::standard(32, 64);
    let g = d.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_velocity(&g, 8.0, 1.0, &mut rng);
    let v = random_velocity(&g, 8.0, 1.0, &mut rng);
    for base in [
        InterpolantKind::FourierLowpass(0.5),
        InterpolantKind::VolumeAverage(0.5),
        InterpolantKind::NodalBilinear(0.5),
    ] {
        let m = ModifiedInterpolant::new(base, d).unwrap();
        let lhs = m.apply(&u.scaled(2.0).add(&v.scaled(-3.0)));
        let rhs = m.apply(&u).scaled(2.0).add(&m.apply(&v).scaled(-3.0));
        assert!(norm_l2(&lhs.sub(&rhs)) <= 1e-12 * norm_l2(&lhs));
        let iu = m.apply(&u);
        assert!(m.range_defect(&iu) <= 1e-14 * norm_l2(&iu));
        assert_eq!(m.packed_len(), m.compress(&iu).len());
        assert_eq!(m.r, range_dimension(&d, 0.5));
    }
    let lp = ModifiedInterpolant::new(InterpolantKind::FourierLowpass(0.5), d).unwrap();
    let once = lp.apply(&u);
    assert!(norm_l2(&lp.apply(&once).sub(&once)) <= 1e-14 * norm_l2(&once));
}

#[test]
fn range_dimension_closed_form() {
    let d = DomainSpec::standard(32, 64);
    // |k|^2 <= 1.23 keeps the mean and the (0, 1) shear only.
    assert_eq!(range_dimension(&d, 0.9), 2);
    // |k|^2 <= 4 adds (1,1) twice and the (0, 2) shear.
    assert_eq!(range_dimension(&d, 0.5), 5);
}

#[test]
fn trivial_ensemble_gives_zero_constants() {
    let d = DomainSpec::standard(32, 64);
    let zero = VelocityField::zeros(&d.grid());
    let fit = fit_constants(
        InterpolantKind::NodalBilinear(0.5),
        &[zero.clone(), zero],
        &[0.5, 0.8],
    )
    .unwrap();
    assert_eq!(
        (fit.c0_hat, fit.c1_hat, fit.c2_hat, fit.max_ratio),
        (0.0, 0.0, 0.0, 0.0)
    );
    assert_eq!(fit.samples.len(), 4);
}

#[test]
fn envelope_covers_every_member() {
    let d = DomainSpec::standard(32, 64);
    let g = d.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ens: Vec<VelocityField> = (0..10)
        .map(|_| random_velocity(&g, 3.0, 1.0, &mut rng))
        .collect();
    let fit = fit_constants(InterpolantKind::NodalBilinear(0.5), &ens, &[1.2, 0.8, 0.5]).unwrap();
    for s in &fit.samples {
        assert!(s.error <= (fit.c1_hat * s.term1 + fit.c2_hat * s.term2) * (1.0 + 1e-12));
        assert!(s.error <= fit.c0_hat * s.term1 * (1.0 + 1e-12));
    }
    assert!((fit.max_ratio - 1.0).abs() <= 1e-12);
}

#[test]
fn small_h_is_rejected() {
    let d = DomainSpec::standard(16, 32);
    let f = SpectralField::zeros(&d.grid(), Parity::OddX2);
    for k in [
        InterpolantKind::NodalBilinear(0.3),
        InterpolantKind::VolumeAverage(0.3),
    ] {
        assert!(matches!(apply_raw(&k, &f), Err(Error::HTooSmall { .. })));
    }
    assert!(matches!(
        apply_raw(&InterpolantKind::FourierLowpass(0.05), &f),
        Err(Error::HTooSmall { .. })
    ));
    assert!(ModifiedInterpolant::new(InterpolantKind::FourierLowpass(10.0), d).is_err());
    assert!(InterpolantKind::parse("spline", 0.5).is_err());
}
