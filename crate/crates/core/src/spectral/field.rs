use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::domain::{DomainSpec, Grid};

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Symmetry of a field under x2 -> -x2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    EvenX2,
    OddX2,
}

impl Parity {
    /// Sign s with c(m, -n) = s c(m, n).
    pub fn sign(self) -> f64 {
        match self {
            Parity::EvenX2 => 1.0,
            Parity::OddX2 => -1.0,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::EvenX2 => Parity::OddX2,
            Parity::OddX2 => Parity::EvenX2,
        }
    }
}

/// Fourier coefficients on the stored half-spectrum plus a parity tag.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    parity: Parity,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, parity: Parity) -> Self {
        SpectralField {
            grid: grid.clone(),
            parity,
            coeffs: vec![ZERO; grid.spectral_len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, parity: Parity, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.spectral_len());
        SpectralField {
            grid: grid.clone(),
            parity,
            coeffs,
        }
    }

    /// Transform physical samples; the result is dealiased and symmetry-projected.
    pub fn from_physical(grid: &Arc<Grid>, parity: Parity, phys: &[f64]) -> Self {
        let mut f = Self::zeros(grid, parity);
        grid.to_spectral(phys, &mut f.coeffs);
        f.dealias();
        f.project_parity();
        f
    }

    /// Build from a function of (x1, x2) sampled on the grid.
    pub fn from_fn(grid: &Arc<Grid>, parity: Parity, f: impl Fn(f64, f64) -> f64) -> Self {
        let d = grid.domain;
        let mut phys = vec![0.0; grid.physical_len()];
        for i in 0..d.nx {
            for j in 0..d.ny {
                phys[i * d.ny + j] = f(d.x1(i), d.x2(j));
            }
        }
        Self::from_physical(grid, parity, &phys)
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.physical_len()];
        self.grid.to_physical(&self.coeffs, &mut out);
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.grid.domain
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn set_parity(&mut self, parity: Parity) {
        self.parity = parity;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn same_grid(&self, other: &SpectralField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.domain == other.grid.domain
    }

    /// Coefficient of mode (m, n) for any signed m, n.
    pub fn mode(&self, m: i64, n: i64) -> Complex64 {
        let g = &self.grid;
        if m >= 0 {
            self.coeffs[g.index(m as usize, g.n_index(n))]
        } else {
            self.coeffs[g.index((-m) as usize, g.n_index(-n))].conj()
        }
    }

    /// Set mode (m, n) with m >= 0. The caller is responsible for parity.
    pub fn set_mode(&mut self, m: usize, n: i64, value: Complex64) {
        let idx = self.grid.index(m, self.grid.n_index(n));
        self.coeffs[idx] = value;
    }

    pub fn fill_zero(&mut self) {
        self.coeffs.iter_mut().for_each(|c| *c = ZERO);
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    /// self += a * x
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert!(self.same_grid(x));
        for (c, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *c += v * a;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Zero every mode outside the 2/3-rule window.
    pub fn dealias(&mut self) {
        for (c, &k) in self.coeffs.iter_mut().zip(&self.grid.keep) {
            if !k {
                *c = ZERO;
            }
        }
    }

    /// Enforce the stored parity exactly and repair Hermitian symmetry on the
    /// m = 0 column (where both halves are stored).
    pub fn project_parity(&mut self) {
        project_coeffs(&self.grid, &mut self.coeffs, self.parity);
    }

    /// Sum over the full spectrum of w(m) * a * conj(b), i.e. (f, g) / |Omega|.
    pub fn inner_raw(&self, other: &SpectralField) -> f64 {
        weighted_sum(&self.grid, |i| (self.coeffs[i] * other.coeffs[i].conj()).re)
    }

    /// Sum of |k|^(2p) |c_k|^2 over the full spectrum.
    pub fn moment(&self, p: i32) -> f64 {
        let k2 = &self.grid.k2;
        weighted_sum(&self.grid, |i| k2[i].powi(p) * self.coeffs[i].norm_sqr())
    }
}

pub(crate) fn weighted_sum(grid: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    let ny = grid.domain.ny;
    let mut total = 0.0;
    for m in 0..grid.mh {
        let mut s = 0.0;
        for j in 0..ny {
            s += f(m * ny + j);
        }
        total += grid.weight[m] * s;
    }
    total
}

pub(crate) fn project_coeffs(grid: &Grid, coeffs: &mut [Complex64], parity: Parity) {
    let ny = grid.domain.ny;
    let s = parity.sign();
    for m in 0..grid.mh {
        let base = m * ny;
        for j in 0..=ny / 2 {
            let jm = grid.mirror(j);
            let a = coeffs[base + j];
            let b = coeffs[base + jm];
            let pa = 0.5 * (a + b * s);
            coeffs[base + j] = pa;
            coeffs[base + jm] = pa * s;
        }
    }
    // m = 0 column: c(0, -n) must equal conj(c(0, n)).
    for j in 0..=ny / 2 {
        let jm = grid.mirror(j);
        let a = coeffs[j];
        let b = coeffs[jm];
        let h = 0.5 * (a + b.conj());
        coeffs[j] = h;
        coeffs[jm] = h.conj();
    }
    // The m=0 column now satisfies both c(0,-n) = s c(0,n) and c(0,-n) =
    // conj(c(0,n)), hence c(0,n) is real (even) or imaginary (odd).
}

/// Velocity pair: u1 even in x2, u2 odd in x2.
#[derive(Clone, Debug)]
pub struct VelocityField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VelocityField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VelocityField {
            u1: SpectralField::zeros(grid, Parity::EvenX2),
            u2: SpectralField::zeros(grid, Parity::OddX2),
        }
    }

    pub fn new(u1: SpectralField, u2: SpectralField) -> Self {
        assert!(u1.same_grid(&u2), "velocity components on different grids");
        VelocityField { u1, u2 }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    pub fn domain(&self) -> &DomainSpec {
        self.u1.domain()
    }

    pub fn components(&self) -> [&SpectralField; 2] {
        [&self.u1, &self.u2]
    }

    pub fn components_mut(&mut self) -> [&mut SpectralField; 2] {
        [&mut self.u1, &mut self.u2]
    }

    pub fn scale(&mut self, s: f64) {
        self.u1.scale(s);
        self.u2.scale(s);
    }

    pub fn scaled(&self, s: f64) -> Self {
        VelocityField {
            u1: self.u1.scaled(s),
            u2: self.u2.scaled(s),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &VelocityField) {
        self.u1.axpy(a, &x.u1);
        self.u2.axpy(a, &x.u2);
    }

    pub fn add(&self, other: &VelocityField) -> Self {
        VelocityField {
            u1: self.u1.add(&other.u1),
            u2: self.u2.add(&other.u2),
        }
    }

    pub fn sub(&self, other: &VelocityField) -> Self {
        VelocityField {
            u1: self.u1.sub(&other.u1),
            u2: self.u2.sub(&other.u2),
        }
    }

    pub fn fill_zero(&mut self) {
        self.u1.fill_zero();
        self.u2.fill_zero();
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    pub fn dealias(&mut self) {
        self.u1.dealias();
        self.u2.dealias();
    }

    pub fn project_parity(&mut self) {
        self.u1.project_parity();
        self.u2.project_parity();
    }

    /// Spatial mean (1/|Omega|) * integral of u, i.e. the zero mode.
    pub fn mean(&self) -> [f64; 2] {
        [self.u1.coeffs()[0].re, self.u2.coeffs()[0].re]
    }

    /// Set the zero mode so that the integral of u over Omega equals `a`.
    /// Only the first component can carry a mean (u2 is odd).
    pub fn pin_mean(&mut self, a: f64) {
        let area = self.domain().area();
        self.u1.coeffs_mut()[0] = Complex64::new(a / area, 0.0);
        self.u2.coeffs_mut()[0] = ZERO;
    }

    pub fn inner_raw(&self, other: &VelocityField) -> f64 {
        self.u1.inner_raw(&other.u1) + self.u2.inner_raw(&other.u2)
    }

    pub fn moment(&self, p: i32) -> f64 {
        self.u1.moment(p) + self.u2.moment(p)
    }

    /// Largest |k . u_hat(k)| over all modes.
    pub fn max_divergence(&self) -> f64 {
        let g = self.grid();
        let ny = g.domain.ny;
        let mut worst: f64 = 0.0;
        for m in 0..g.mh {
            for j in 0..ny {
                let i = m * ny + j;
                let d = self.u1.coeffs()[i] * g.kx[m] + self.u2.coeffs()[i] * g.ky[j];
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Temperature fluctuation, odd in x2.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub theta: SpectralField,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField {
            theta: SpectralField::zeros(grid, Parity::OddX2),
        }
    }

    pub fn new(theta: SpectralField) -> Self {
        ScalarField { theta }
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        ScalarField {
            theta: self.theta.sub(&other.theta),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        ScalarField {
            theta: self.theta.add(&other.theta),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        ScalarField {
            theta: self.theta.scaled(s),
        }
    }
}

impl Deref for ScalarField {
    type Target = SpectralField;

    fn deref(&self) -> &SpectralField {
        &self.theta
    }
}

impl DerefMut for ScalarField {
    fn deref_mut(&mut self) -> &mut SpectralField {
        &mut self.theta
    }
}
