use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Boundary condition of the physical strip. Only the stress-free case can be
/// time-stepped; the no-slip case exists in the parameter audit only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundaryCondition {
    #[default]
    StressFree,
}

impl BoundaryCondition {
    pub fn code(self) -> u8 {
        match self {
            BoundaryCondition::StressFree => 0,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(BoundaryCondition::StressFree),
            c => Err(Error::Format(format!(
                "unknown boundary condition code {c}"
            ))),
        }
    }
}

/// Periodic box (0,L) x (-l,l) obtained by reflecting the strip (0,L) x (0,l)
/// across the bottom wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub length: f64,
    pub half_height: f64,
    pub nx: usize,
    pub ny: usize,
    pub bc: BoundaryCondition,
}

impl DomainSpec {
    pub fn new(length: f64, half_height: f64, nx: usize, ny: usize) -> Result<Self> {
        let d = DomainSpec {
            length,
            half_height,
            nx,
            ny,
            bc: BoundaryCondition::StressFree,
        };
        d.validate()?;
        Ok(d)
    }

    /// The 2pi x pi strip used throughout the test-suite (lambda_1 = 1).
    pub fn standard(nx: usize, ny: usize) -> Self {
        DomainSpec::new(2.0 * PI, PI, nx, ny).expect("standard domain is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "L must be positive, got {}",
                self.length
            )));
        }
        if !(self.half_height.is_finite() && self.half_height > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "l must be positive, got {}",
                self.half_height
            )));
        }
        for (name, n) in [("Nx", self.nx), ("Ny", self.ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidDomain(format!(
                    "{name} must be even and >= 4, got {n}"
                )));
            }
        }
        Ok(())
    }

    /// |Omega| = 2 l L, the area of the extended box.
    pub fn area(&self) -> f64 {
        2.0 * self.half_height * self.length
    }

    pub fn dx1(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dx2(&self) -> f64 {
        2.0 * self.half_height / self.ny as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.dx1()
    }

    /// Grid points run over [0, 2l); index j > Ny/2 stands for x2 - 2l < 0.
    pub fn x2(&self, j: usize) -> f64 {
        j as f64 * self.dx2()
    }

    pub fn lambda1(&self) -> f64 {
        eig_lambda1(self)
    }

    /// Shared FFT plans and wavenumber tables. Cached per distinct domain.
    pub fn grid(&self) -> Arc<Grid> {
        static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<Grid>>>> = OnceLock::new();
        let key = GridKey::from(self);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(key)
            .or_insert_with(|| Arc::new(Grid::build(*self)))
            .clone()
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L={} l={} {}x{}",
            self.length, self.half_height, self.nx, self.ny
        )
    }
}

#[derive(Hash, PartialEq, Eq)]
struct GridKey(u64, u64, usize, usize);

impl From<&DomainSpec> for GridKey {
    fn from(d: &DomainSpec) -> Self {
        GridKey(d.length.to_bits(), d.half_height.to_bits(), d.nx, d.ny)
    }
}

/// Smallest eigenvalue of -Laplacian on odd, 2l-periodic functions: (pi/l)^2.
pub fn eig_lambda1(domain: &DomainSpec) -> f64 {
    (PI / domain.half_height).powi(2)
}

/// Precomputed spectral tables for one domain.
///
/// Coefficients are stored for m in 0..=Nx/2 (the other half follows from
/// Hermitian symmetry) and every n, with linear index `m * ny + n_idx`.
pub struct Grid {
    pub domain: DomainSpec,
    pub mh: usize,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    /// Signed mode number for each n index.
    pub n_of: Vec<i64>,
    /// |k|^2 on the stored half-spectrum.
    pub k2: Vec<f64>,
    /// Multiplicity of each stored m in a full-spectrum sum.
    pub weight: Vec<f64>,
    /// 2/3-rule mask on the stored half-spectrum.
    pub keep: Vec<bool>,
    pub(crate) r2c: Arc<dyn RealToComplex<f64>>,
    pub(crate) c2r: Arc<dyn ComplexToReal<f64>>,
    pub(crate) fwd_y: Arc<dyn Fft<f64>>,
    pub(crate) inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl Grid {
    fn build(domain: DomainSpec) -> Self {
        let (nx, ny) = (domain.nx, domain.ny);
        let mh = nx / 2 + 1;
        let kx: Vec<f64> = (0..mh)
            .map(|m| 2.0 * PI * m as f64 / domain.length)
            .collect();
        let n_of: Vec<i64> = (0..ny)
            .map(|j| {
                if j < ny / 2 {
                    j as i64
                } else {
                    j as i64 - ny as i64
                }
            })
            .collect();
        let ky: Vec<f64> = n_of
            .iter()
            .map(|&n| PI * n as f64 / domain.half_height)
            .collect();
        let mut k2 = Vec::with_capacity(mh * ny);
        let mut keep = Vec::with_capacity(mh * ny);
        for (m, kxm) in kx.iter().enumerate() {
            for (kyj, nj) in ky.iter().zip(&n_of) {
                k2.push(kxm * kxm + kyj * kyj);
                keep.push(3 * m < nx && 3 * (nj.unsigned_abs() as usize) < ny);
            }
        }
        let weight = (0..mh)
            .map(|m| if m == 0 || 2 * m == nx { 1.0 } else { 2.0 })
            .collect();
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Grid {
            domain,
            mh,
            kx,
            ky,
            n_of,
            k2,
            weight,
            keep,
            r2c: rp.plan_fft_forward(nx),
            c2r: rp.plan_fft_inverse(nx),
            fwd_y: cp.plan_fft_forward(ny),
            inv_y: cp.plan_fft_inverse(ny),
        }
    }

    pub fn spectral_len(&self) -> usize {
        self.mh * self.domain.ny
    }

    pub fn physical_len(&self) -> usize {
        self.domain.nx * self.domain.ny
    }

    #[inline]
    pub fn index(&self, m: usize, n_idx: usize) -> usize {
        m * self.domain.ny + n_idx
    }

    /// Storage index of mode number n (negative allowed).
    #[inline]
    pub fn n_index(&self, n: i64) -> usize {
        n.rem_euclid(self.domain.ny as i64) as usize
    }

    /// Index of the x2-mirrored mode (m, -n).
    #[inline]
    pub fn mirror(&self, n_idx: usize) -> usize {
        (self.domain.ny - n_idx) % self.domain.ny
    }

    /// Forward transform with f = sum c_k e^{ik.x} normalisation.
    /// Physical layout is `i * ny + j`.
    pub fn to_spectral(&self, phys: &[f64], out: &mut [Complex64]) {
        let (nx, ny) = (self.domain.nx, self.domain.ny);
        assert_eq!(phys.len(), nx * ny);
        assert_eq!(out.len(), self.mh * ny);
        let mut row = self.r2c.make_input_vec();
        let mut row_hat = self.r2c.make_output_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for j in 0..ny {
            for i in 0..nx {
                row[i] = phys[i * ny + j];
            }
            self.r2c
                .process_with_scratch(&mut row, &mut row_hat, &mut scratch)
                .expect("buffer sizes match plan");
            for m in 0..self.mh {
                out[m * ny + j] = row_hat[m];
            }
        }
        self.fwd_y.process(out);
        let s = 1.0 / (nx * ny) as f64;
        for c in out.iter_mut() {
            *c *= s;
        }
    }

    /// Inverse of [`Grid::to_spectral`].
    pub fn to_physical(&self, coeffs: &[Complex64], out: &mut [f64]) {
        let (nx, ny) = (self.domain.nx, self.domain.ny);
        assert_eq!(coeffs.len(), self.mh * ny);
        assert_eq!(out.len(), nx * ny);
        let mut work = coeffs.to_vec();
        self.inv_y.process(&mut work);
        let mut row_hat = self.c2r.make_input_vec();
        let mut row = self.c2r.make_output_vec();
        let mut scratch = self.c2r.make_scratch_vec();
        for j in 0..ny {
            for m in 0..self.mh {
                row_hat[m] = work[m * ny + j];
            }
            row_hat[0].im = 0.0;
            row_hat[self.mh - 1].im = 0.0;
            self.c2r
                .process_with_scratch(&mut row_hat, &mut row, &mut scratch)
                .expect("buffer sizes match plan");
            for i in 0..nx {
                out[i * ny + j] = row[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda1_closed_forms() {
        assert!((eig_lambda1(&DomainSpec::standard(8, 8)) - 1.0).abs() < 1e-15);
        let unit = DomainSpec::new(1.0, 1.0, 8, 8).unwrap();
        assert!((eig_lambda1(&unit) - PI * PI).abs() < 1e-12);
        let half = DomainSpec::new(1.0, 0.5, 8, 8).unwrap();
        assert!((eig_lambda1(&half) / eig_lambda1(&unit) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(DomainSpec::new(1.0, 1.0, 6, 3).is_err());
        assert!(DomainSpec::new(1.0, 1.0, 2, 8).is_err());
        assert!(DomainSpec::new(-1.0, 1.0, 8, 8).is_err());
        assert!(DomainSpec::new(1.0, f64::NAN, 8, 8).is_err());
    }

    #[test]
    fn single_mode_transform() {
        let d = DomainSpec::standard(16, 16);
        let g = d.grid();
        // f = cos(x1) sin(x2) on the standard box: k = (1, 1) since l = pi.
        let mut phys = vec![0.0; g.physical_len()];
        for i in 0..d.nx {
            for j in 0..d.ny {
                phys[i * d.ny + j] = d.x1(i).cos() * d.x2(j).sin();
            }
        }
        let mut hat = vec![Complex64::new(0.0, 0.0); g.spectral_len()];
        g.to_spectral(&phys, &mut hat);
        // cos(a) sin(b) = (e^{ia}+e^{-ia})(e^{ib}-e^{-ib})/(4i)
        let expect = Complex64::new(0.0, -0.25);
        assert!((hat[g.index(1, 1)] - expect).norm() < 1e-14);
        assert!((hat[g.index(1, g.n_index(-1))] + expect).norm() < 1e-14);
        let total: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
        assert!((total - 2.0 * 0.0625).abs() < 1e-14);
        let mut back = vec![0.0; g.physical_len()];
        g.to_physical(&hat, &mut back);
        for (a, b) in phys.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
