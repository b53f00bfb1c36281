use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use super::domain::Grid;
use super::field::{project_coeffs, Parity, ScalarField, SpectralField, VelocityField, ZERO};

/// Which linear operator: A0 acts on velocity, A1 on temperature. In the
/// stress-free setting both are -Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    A0,
    A1,
}

/// Project onto the field's own parity class.
pub fn symmetry_project(f: &SpectralField) -> SpectralField {
    symmetry_project_as(f, f.parity())
}

/// Project onto the requested parity class; the result carries that tag.
pub fn symmetry_project_as(f: &SpectralField, parity: Parity) -> SpectralField {
    let mut out = f.clone();
    out.set_parity(parity);
    project_coeffs(f.grid(), out.coeffs_mut(), parity);
    out
}

/// Helmholtz-Leray projection, mode by mode. The k = 0 mode is untouched.
pub fn leray_project(u1: &SpectralField, u2: &SpectralField) -> VelocityField {
    let mut u = VelocityField::new(u1.clone(), u2.clone());
    leray_in_place(&mut u);
    u
}

pub fn leray_in_place(u: &mut VelocityField) {
    let g = u.grid().clone();
    let ny = g.domain.ny;
    let VelocityField { u1, u2 } = u;
    let (c1, c2) = (u1.coeffs_mut(), u2.coeffs_mut());
    for m in 0..g.mh {
        let kx = g.kx[m];
        for j in 0..ny {
            let i = m * ny + j;
            let k2 = g.k2[i];
            if k2 == 0.0 {
                continue;
            }
            let ky = g.ky[j];
            let dot = (c1[i] * kx + c2[i] * ky) / k2;
            c1[i] -= dot * kx;
            c2[i] -= dot * ky;
        }
    }
}

/// Multiply every coefficient by |k|^2.
pub fn laplacian_apply(f: &SpectralField, _which: Operator) -> SpectralField {
    let mut out = f.clone();
    for (c, &k2) in out.coeffs_mut().iter_mut().zip(&f.grid().k2) {
        *c *= k2;
    }
    out
}

pub fn laplacian_apply_velocity(u: &VelocityField) -> VelocityField {
    VelocityField {
        u1: laplacian_apply(&u.u1, Operator::A0),
        u2: laplacian_apply(&u.u2, Operator::A0),
    }
}

/// Quantities from which every norm in the code is built. All sums are over
/// the full spectrum without the |Omega| factor.
pub trait SpectralNorms {
    /// sum |c|^2
    fn sum_sq(&self) -> f64;
    /// sum |k|^2 |c|^2
    fn sum_k2(&self) -> f64;
    /// sum |k|^4 |c|^2
    fn sum_k4(&self) -> f64;
    fn area(&self) -> f64;
}

impl SpectralNorms for SpectralField {
    fn sum_sq(&self) -> f64 {
        self.moment(0)
    }
    fn sum_k2(&self) -> f64 {
        self.moment(1)
    }
    fn sum_k4(&self) -> f64 {
        self.moment(2)
    }
    fn area(&self) -> f64 {
        self.domain().area()
    }
}

impl SpectralNorms for ScalarField {
    fn sum_sq(&self) -> f64 {
        self.theta.sum_sq()
    }
    fn sum_k2(&self) -> f64 {
        self.theta.sum_k2()
    }
    fn sum_k4(&self) -> f64 {
        self.theta.sum_k4()
    }
    fn area(&self) -> f64 {
        self.theta.domain().area()
    }
}

impl SpectralNorms for VelocityField {
    fn sum_sq(&self) -> f64 {
        self.u1.sum_sq() + self.u2.sum_sq()
    }
    fn sum_k2(&self) -> f64 {
        self.u1.sum_k2() + self.u2.sum_k2()
    }
    fn sum_k4(&self) -> f64 {
        self.u1.sum_k4() + self.u2.sum_k4()
    }
    fn area(&self) -> f64 {
        self.domain().area()
    }
}

/// |f|, the L2 norm over Omega.
pub fn norm_l2<F: SpectralNorms>(f: &F) -> f64 {
    (f.area() * f.sum_sq()).sqrt()
}

/// ||f||, the L2 norm of the gradient.
pub fn norm_h1_seminorm<F: SpectralNorms>(f: &F) -> f64 {
    (f.area() * f.sum_k2()).sqrt()
}

/// V1 norm (temperature): the gradient seminorm.
pub fn norm_v1<F: SpectralNorms>(f: &F) -> f64 {
    norm_h1_seminorm(f)
}

/// ||u||_{V0} = (|u|^2 / |Omega| + ||u||^2)^(1/2).
pub fn norm_v0<F: SpectralNorms>(f: &F) -> f64 {
    norm_v0_sq(f).sqrt()
}

pub fn norm_v0_sq<F: SpectralNorms>(f: &F) -> f64 {
    f.sum_sq() + f.area() * f.sum_k2()
}

/// |A f| = |Laplacian f| in L2.
pub fn norm_a0<F: SpectralNorms>(f: &F) -> f64 {
    (f.area() * f.sum_k4()).sqrt()
}

/// H2-type norm |u| / |Omega| + |A0 u| used for attractor bounds.
pub fn norm_h2<F: SpectralNorms>(f: &F) -> f64 {
    norm_l2(f) / f.area() + norm_a0(f)
}

/// (f, g) over Omega.
pub fn inner_l2(f: &VelocityField, g: &VelocityField) -> f64 {
    f.domain().area() * f.inner_raw(g)
}

/// Random smooth field: Gaussian coefficients on |k| <= k_cut with a
/// spectrum decaying like (1 + |k|^2)^(-decay/2), then dealiased and
/// parity-projected. Not normalised.
///
/// Random numbers are drawn mode by mode in a grid-independent order, so a
/// given seed yields the same function on every grid that resolves it.
pub fn random_scalar<R: Rng>(
    grid: &Arc<Grid>,
    parity: Parity,
    k_cut: f64,
    decay: f64,
    rng: &mut R,
) -> SpectralField {
    let d = grid.domain;
    let k1 = 2.0 * std::f64::consts::PI / d.length;
    let k2u = std::f64::consts::PI / d.half_height;
    let mmax = (k_cut / k1).floor() as i64;
    let nmax = (k_cut / k2u).floor() as i64;
    let mut f = SpectralField::zeros(grid, parity);
    for m in 0..=mmax {
        for n in -nmax..=nmax {
            let kk = (m as f64 * k1).powi(2) + (n as f64 * k2u).powi(2);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if kk > k_cut * k_cut || 3 * m as usize >= d.nx || 3 * n.unsigned_abs() as usize >= d.ny
            {
                continue;
            }
            let amp = (1.0 + kk).powf(-0.5 * decay);
            f.set_mode(m as usize, n, Complex64::new(re, im) * amp);
        }
    }
    f.project_parity();
    f.coeffs_mut()[0] = ZERO;
    f
}

/// Random divergence-free velocity with zero mean.
pub fn random_velocity<R: Rng>(
    grid: &Arc<Grid>,
    k_cut: f64,
    decay: f64,
    rng: &mut R,
) -> VelocityField {
    let u1 = random_scalar(grid, Parity::EvenX2, k_cut, decay, rng);
    let u2 = random_scalar(grid, Parity::OddX2, k_cut, decay, rng);
    let mut u = leray_project(&u1, &u2);
    u.project_parity();
    u.pin_mean(0.0);
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DomainSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn leray_single_mode_closed_form() {
        let d = DomainSpec::standard(16, 16);
        let g = d.grid();
        let mut u1 = SpectralField::zeros(&g, Parity::EvenX2);
        let mut u2 = SpectralField::zeros(&g, Parity::OddX2);
        u1.set_mode(1, 0, Complex64::new(1.0, 0.0));
        u2.set_mode(1, 0, Complex64::new(1.0, 0.0));
        let u = leray_project(&u1, &u2);
        assert!(u.u1.mode(1, 0).norm() < 1e-15);
        assert!((u.u2.mode(1, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn laplacian_mixed_mode() {
        let d = DomainSpec::new(3.0, 1.5, 16, 16).unwrap();
        let g = d.grid();
        let f = SpectralField::from_fn(&g, Parity::OddX2, |x, y| {
            (2.0 * PI * x / d.length).cos() * (PI * y / d.half_height).sin()
        });
        let lf = laplacian_apply(&f, Operator::A1);
        let ev = (2.0 * PI / d.length).powi(2) + (PI / d.half_height).powi(2);
        let diff = lf.sub(&f.scaled(ev));
        assert!(norm_l2(&diff) < 1e-12 * norm_l2(&lf));
    }

    #[test]
    fn shear_norms_closed_form() {
        let d = DomainSpec::new(2.0, 0.75, 16, 16).unwrap();
        let g = d.grid();
        let (ll, l) = (d.length, d.half_height);
        let u2 = SpectralField::from_fn(&g, Parity::OddX2, |_, y| (PI * y / l).sin());
        let u = VelocityField::new(SpectralField::zeros(&g, Parity::EvenX2), u2);
        let l2 = norm_l2(&u).powi(2);
        assert!((l2 - l * ll).abs() < 1e-12);
        let h1 = norm_h1_seminorm(&u).powi(2);
        assert!((h1 - (PI / l).powi(2) * l * ll).abs() < 1e-12);
        let v0 = norm_v0(&u).powi(2);
        assert!((v0 - (l * ll / (2.0 * l * ll) + (PI / l).powi(2) * l * ll)).abs() < 1e-12);
    }

    #[test]
    fn random_velocity_is_admissible() {
        let g = DomainSpec::standard(32, 32).grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_velocity(&g, 8.0, 1.0, &mut rng);
        assert!(u.max_divergence() < 1e-13 * norm_h1_seminorm(&u));
        assert_eq!(u.mean(), [0.0, 0.0]);
        let p1 = symmetry_project(&u.u1);
        assert!(norm_l2(&p1.sub(&u.u1)) < 1e-15);
    }
}
