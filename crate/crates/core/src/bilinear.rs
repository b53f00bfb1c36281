//! Dealiased pseudo-spectral advection (u . grad) f and the trilinear forms
//! built from it.

use rustfft::num_complex::Complex64;

use crate::spectral::{ScalarField, SpectralField, VelocityField};

/// An advecting velocity sampled on the physical grid, reusable for several
/// advected fields.
pub struct Advector {
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl Advector {
    pub fn new(u: &VelocityField) -> Self {
        Advector {
            u1: u.u1.to_physical(),
            u2: u.u2.to_physical(),
        }
    }

    /// (u . grad) f, dealiased, without parity projection.
    pub fn advect_raw(&self, f: &SpectralField) -> SpectralField {
        let g = f.grid().clone();
        let ny = g.domain.ny;
        let mut d1 = f.clone();
        let mut d2 = f.clone();
        {
            let (c1, c2) = (d1.coeffs_mut(), d2.coeffs_mut());
            for m in 0..g.mh {
                let ikx = Complex64::new(0.0, g.kx[m]);
                for j in 0..ny {
                    let i = m * ny + j;
                    c1[i] *= ikx;
                    c2[i] *= Complex64::new(0.0, g.ky[j]);
                }
            }
        }
        let p1 = d1.to_physical();
        let p2 = d2.to_physical();
        let prod: Vec<f64> = (0..p1.len())
            .map(|i| self.u1[i] * p1[i] + self.u2[i] * p2[i])
            .collect();
        let mut out = SpectralField::zeros(&g, f.parity());
        g.to_spectral(&prod, out.coeffs_mut());
        out.dealias();
        out
    }

    /// (u . grad) f, dealiased and projected onto the parity of f. For
    /// parity-consistent u this only removes roundoff.
    pub fn advect(&self, f: &SpectralField) -> SpectralField {
        let mut out = self.advect_raw(f);
        out.project_parity();
        out
    }
}

/// B0(u, v) = (u . grad) v. Not Leray-projected.
pub fn b0_apply(u: &VelocityField, v: &VelocityField) -> VelocityField {
    let a = Advector::new(u);
    VelocityField {
        u1: a.advect(&v.u1),
        u2: a.advect(&v.u2),
    }
}

/// B1(u, theta) = (u . grad) theta.
pub fn b1_apply(u: &VelocityField, theta: &ScalarField) -> ScalarField {
    ScalarField::new(Advector::new(u).advect(&theta.theta))
}

/// b0(u, v, w) = integral of ((u . grad) v) . w over Omega.
pub fn b0_form(u: &VelocityField, v: &VelocityField, w: &VelocityField) -> f64 {
    let area = u.domain().area();
    area * b0_apply(u, v).inner_raw(w)
}

/// b1(u, theta, phi) = integral of ((u . grad) theta) phi over Omega.
pub fn b1_form(u: &VelocityField, theta: &ScalarField, phi: &ScalarField) -> f64 {
    let area = u.domain().area();
    area * b1_apply(u, theta).inner_raw(phi)
}
