//! Finite-rank interpolant operators I_h and the modified operator
//! I~_h = P_r I_h whose range consists of smooth divergence-free fields.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    leray_in_place, norm_h2, norm_l2, norm_v0, DomainSpec, Grid, SpectralField, VelocityField, ZERO,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterpolantKind {
    /// Orthogonal projection onto modes with |k| <= 1/h.
    FourierLowpass(f64),
    /// Cell averages over an h-sized partition, reconstructed piecewise constant.
    VolumeAverage(f64),
    /// Values at h-spaced nodes, reconstructed by periodic bilinear interpolation.
    NodalBilinear(f64),
}

impl InterpolantKind {
    pub fn h(&self) -> f64 {
        match *self {
            InterpolantKind::FourierLowpass(h)
            | InterpolantKind::VolumeAverage(h)
            | InterpolantKind::NodalBilinear(h) => h,
        }
    }

    pub fn with_h(&self, h: f64) -> Self {
        match self {
            InterpolantKind::FourierLowpass(_) => InterpolantKind::FourierLowpass(h),
            InterpolantKind::VolumeAverage(_) => InterpolantKind::VolumeAverage(h),
            InterpolantKind::NodalBilinear(_) => InterpolantKind::NodalBilinear(h),
        }
    }

    /// Nodal interpolation needs H2 control; the others only H1.
    pub fn is_type_two(&self) -> bool {
        matches!(self, InterpolantKind::NodalBilinear(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            InterpolantKind::FourierLowpass(_) => "lowpass",
            InterpolantKind::VolumeAverage(_) => "volume",
            InterpolantKind::NodalBilinear(_) => "nodal",
        }
    }

    pub fn parse(name: &str, h: f64) -> Result<Self> {
        match name {
            "lowpass" | "fourier" => Ok(InterpolantKind::FourierLowpass(h)),
            "volume" => Ok(InterpolantKind::VolumeAverage(h)),
            "nodal" => Ok(InterpolantKind::NodalBilinear(h)),
            other => Err(Error::Config(format!("unknown interpolant '{other}'"))),
        }
    }

    /// Check h against the domain and the grid resolution.
    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        let h = self.h();
        let hmax = domain.length.min(domain.half_height);
        if !(h.is_finite() && h > 0.0 && h < hmax) {
            return Err(Error::InvalidParameter(format!(
                "h = {h} must lie in (0, {hmax})"
            )));
        }
        let min = match self {
            InterpolantKind::FourierLowpass(_) => {
                // 1/h must not exceed the largest resolved wavenumber on either axis.
                let g = domain.grid();
                let kx = g.kx[(domain.nx - 1) / 3];
                let ky = g.ky[(domain.ny - 1) / 3];
                1.0 / kx.min(ky)
            }
            _ => 2.0 * domain.dx1().max(domain.dx2()),
        };
        if h < min {
            return Err(Error::HTooSmall { h, min });
        }
        Ok(())
    }
}

/// Node or cell-boundary positions along one axis: `cells` cells tiling
/// `n` grid points, boundary c at grid index round(c n / cells).
fn partition(n: usize, period: f64) -> impl Fn(f64) -> Vec<usize> {
    move |h: f64| {
        let cells = ((period / h).round() as usize).max(1);
        (0..=cells)
            .map(|c| ((c * n) as f64 / cells as f64).round() as usize)
            .collect()
    }
}

fn cell_bounds(domain: &DomainSpec, h: f64) -> (Vec<usize>, Vec<usize>) {
    (
        partition(domain.nx, domain.length)(h),
        partition(domain.ny, 2.0 * domain.half_height)(h),
    )
}

fn finish(grid: &Arc<Grid>, f: &SpectralField, phys: &[f64]) -> SpectralField {
    SpectralField::from_physical(grid, f.parity(), phys)
}

fn volume_average(f: &SpectralField, h: f64) -> SpectralField {
    let g = f.grid().clone();
    let d = g.domain;
    let vals = f.to_physical();
    let (bx, by) = cell_bounds(&d, h);
    let mut out = vec![0.0; vals.len()];
    for cx in bx.windows(2) {
        for cy in by.windows(2) {
            let (i0, i1, j0, j1) = (cx[0], cx[1], cy[0], cy[1]);
            if i1 == i0 || j1 == j0 {
                continue;
            }
            let mut s = 0.0;
            for i in i0..i1 {
                for j in j0..j1 {
                    s += vals[i * d.ny + j];
                }
            }
            let avg = s / ((i1 - i0) * (j1 - j0)) as f64;
            for i in i0..i1 {
                for j in j0..j1 {
                    out[i * d.ny + j] = avg;
                }
            }
        }
    }
    finish(&g, f, &out)
}

fn nodal_bilinear(f: &SpectralField, h: f64) -> SpectralField {
    let g = f.grid().clone();
    let d = g.domain;
    let vals = f.to_physical();
    let (bx, by) = cell_bounds(&d, h);
    let node = |i: usize, j: usize| vals[(i % d.nx) * d.ny + (j % d.ny)];
    let mut out = vec![0.0; vals.len()];
    for cx in bx.windows(2) {
        for cy in by.windows(2) {
            let (i0, i1, j0, j1) = (cx[0], cx[1], cy[0], cy[1]);
            if i1 == i0 || j1 == j0 {
                continue;
            }
            let (f00, f10, f01, f11) = (node(i0, j0), node(i1, j0), node(i0, j1), node(i1, j1));
            for i in i0..i1 {
                let s = (i - i0) as f64 / (i1 - i0) as f64;
                for j in j0..j1 {
                    let t = (j - j0) as f64 / (j1 - j0) as f64;
                    out[i * d.ny + j] = (1.0 - s) * (1.0 - t) * f00
                        + s * (1.0 - t) * f10
                        + (1.0 - s) * t * f01
                        + s * t * f11;
                }
            }
        }
    }
    finish(&g, f, &out)
}

fn lowpass(f: &SpectralField, h: f64) -> SpectralField {
    let cut = 1.0 / (h * h);
    let mut out = f.clone();
    for (c, &k2) in out.coeffs_mut().iter_mut().zip(&f.grid().k2) {
        if k2 > cut {
            *c = ZERO;
        }
    }
    out
}

/// I_h applied to one scalar component.
pub fn apply_raw(kind: &InterpolantKind, f: &SpectralField) -> Result<SpectralField> {
    kind.validate(f.domain())?;
    Ok(apply_unchecked(kind, f))
}

fn apply_unchecked(kind: &InterpolantKind, f: &SpectralField) -> SpectralField {
    match *kind {
        InterpolantKind::FourierLowpass(h) => lowpass(f, h),
        InterpolantKind::VolumeAverage(h) => volume_average(f, h),
        InterpolantKind::NodalBilinear(h) => nodal_bilinear(f, h),
    }
}

/// I_h applied componentwise to a velocity.
pub fn apply_raw_velocity(kind: &InterpolantKind, u: &VelocityField) -> Result<VelocityField> {
    kind.validate(u.domain())?;
    Ok(VelocityField {
        u1: apply_unchecked(kind, &u.u1),
        u2: apply_unchecked(kind, &u.u2),
    })
}

/// I~_h = P_r I_h, with P_r the Leray- and parity-projected spectral cutoff
/// |k|^2 <= 1/h^2.
#[derive(Debug)]
pub struct ModifiedInterpolant {
    pub base: InterpolantKind,
    pub domain: DomainSpec,
    /// Dimension of the range of P_r within divergence-free fields.
    pub r: usize,
    /// Half-spectrum storage indices retained by P_r.
    range: Vec<usize>,
    /// Per retained index: Parseval multiplicity and |k|^2.
    weight: Vec<f64>,
    k2: Vec<f64>,
}

impl ModifiedInterpolant {
    pub fn new(base: InterpolantKind, domain: DomainSpec) -> Result<Arc<Self>> {
        base.validate(&domain)?;
        let g = domain.grid();
        let cut = 1.0 / (base.h() * base.h());
        let range: Vec<usize> = (0..g.spectral_len())
            .filter(|&i| g.k2[i] <= cut && g.keep[i])
            .collect();
        let r = range_dimension(&domain, base.h());
        let weight = range.iter().map(|&i| g.weight[i / domain.ny]).collect();
        let k2 = range.iter().map(|&i| g.k2[i]).collect();
        Ok(Arc::new(ModifiedInterpolant {
            base,
            domain,
            r,
            range,
            weight,
            k2,
        }))
    }

    pub fn h(&self) -> f64 {
        self.base.h()
    }

    /// Storage indices of the retained modes.
    pub fn range_indices(&self) -> &[usize] {
        &self.range
    }

    /// P_r applied to an arbitrary velocity.
    pub fn project_range(&self, u: &mut VelocityField) {
        leray_in_place(u);
        u.project_parity();
        let g = u.grid().clone();
        let cut = 1.0 / (self.h() * self.h());
        for f in u.components_mut() {
            for (c, (&k2, &keep)) in f.coeffs_mut().iter_mut().zip(g.k2.iter().zip(&g.keep)) {
                if k2 > cut || !keep {
                    *c = ZERO;
                }
            }
        }
    }

    pub fn apply(&self, u: &VelocityField) -> VelocityField {
        let mut out = match self.base {
            InterpolantKind::FourierLowpass(_) => u.clone(),
            _ => VelocityField {
                u1: apply_unchecked(&self.base, &u.u1),
                u2: apply_unchecked(&self.base, &u.u2),
            },
        };
        self.project_range(&mut out);
        out
    }

    /// Coefficients of a range element on the retained index set: u1 then u2.
    pub fn compress(&self, u: &VelocityField) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.range.len());
        out.extend(self.range.iter().map(|&i| u.u1.coeffs()[i]));
        out.extend(self.range.iter().map(|&i| u.u2.coeffs()[i]));
        out
    }

    pub fn expand(&self, packed: &[Complex64]) -> VelocityField {
        let mut u = VelocityField::zeros(&self.domain.grid());
        self.expand_into(packed, &mut u);
        u
    }

    pub fn expand_into(&self, packed: &[Complex64], u: &mut VelocityField) {
        u.fill_zero();
        let n = self.range.len();
        for (k, &i) in self.range.iter().enumerate() {
            u.u1.coeffs_mut()[i] = packed[k];
            u.u2.coeffs_mut()[i] = packed[n + k];
        }
    }

    /// sum over the full spectrum of |k|^(2p) |c|^2 for a packed element.
    pub fn packed_moment(&self, packed: &[Complex64], p: i32) -> f64 {
        let n = self.range.len();
        let mut s = 0.0;
        for k in 0..n {
            let m = packed[k].norm_sqr() + packed[n + k].norm_sqr();
            s += self.weight[k] * self.k2[k].powi(p) * m;
        }
        s
    }

    /// ||u||_{V0}^2 of a packed element.
    pub fn packed_v0_sq(&self, packed: &[Complex64]) -> f64 {
        self.packed_moment(packed, 0) + self.domain.area() * self.packed_moment(packed, 1)
    }

    pub fn packed_len(&self) -> usize {
        2 * self.range.len()
    }

    /// Distance of u from the range of P_r: the L2 norm of what P_r removes.
    pub fn range_defect(&self, u: &VelocityField) -> f64 {
        let mut p = u.clone();
        self.project_range(&mut p);
        norm_l2(&u.sub(&p))
    }
}

/// Dimension of divergence-free (even, odd) fields with |k|^2 <= 1/h^2: the
/// mean mode, one shear mode per n >= 1, and two per (m >= 1, n >= 1).
pub fn range_dimension(domain: &DomainSpec, h: f64) -> usize {
    let g = domain.grid();
    let cut = 1.0 / (h * h);
    let mut r = 1;
    for m in 0..g.mh {
        for j in 1..domain.ny / 2 {
            if g.k2[g.index(m, j)] <= cut && g.keep[g.index(m, j)] {
                r += if m == 0 { 1 } else { 2 };
            }
        }
    }
    r
}

/// Measured interpolation errors for one ensemble member and one h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSample {
    pub h: f64,
    pub error: f64,
    /// h ||phi||_{H1}
    pub term1: f64,
    /// h^2 ||phi||_{H2}
    pub term2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsFit {
    pub kind: InterpolantKind,
    /// Type I envelope: max error / (h ||phi||_{H1}).
    pub c0_hat: f64,
    /// Type II envelope constants.
    pub c1_hat: f64,
    pub c2_hat: f64,
    /// Unscaled nonnegative least-squares coefficients.
    pub c1_ls: f64,
    pub c2_ls: f64,
    /// Largest error / bound ratio under the envelope (1 by construction
    /// when the ensemble is nontrivial).
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub samples: Vec<FitSample>,
}

/// Measure |phi - I_h phi| against h ||phi||_{H1} and h^2 ||phi||_{H2} over an
/// ensemble of velocity fields and a list of h values, and fit envelope
/// constants that bound every member.
pub fn fit_constants(
    kind: InterpolantKind,
    ensemble: &[VelocityField],
    hs: &[f64],
) -> Result<ConstantsFit> {
    let mut samples = Vec::with_capacity(ensemble.len() * hs.len());
    for &h in hs {
        let k = kind.with_h(h);
        for phi in ensemble {
            let ip = apply_raw_velocity(&k, phi)?;
            samples.push(FitSample {
                h,
                error: norm_l2(&phi.sub(&ip)),
                term1: h * norm_v0(phi),
                term2: h * h * norm_h2(phi),
            });
        }
    }
    Ok(fit_samples(kind, samples))
}

pub fn fit_samples(kind: InterpolantKind, samples: Vec<FitSample>) -> ConstantsFit {
    let c0_hat = samples
        .iter()
        .filter(|s| s.term1 > 0.0)
        .map(|s| s.error / s.term1)
        .fold(0.0, f64::max);
    let (c1_ls, c2_ls) = nnls2(&samples);
    let bound = |s: &FitSample, a: f64, b: f64| a * s.term1 + b * s.term2;
    let scale = samples
        .iter()
        .filter(|s| bound(s, c1_ls, c2_ls) > 0.0)
        .map(|s| s.error / bound(s, c1_ls, c2_ls))
        .fold(0.0, f64::max);
    let (c1_hat, c2_hat) = (scale * c1_ls, scale * c2_ls);
    let ratios: Vec<f64> = samples
        .iter()
        .map(|s| {
            let b = bound(s, c1_hat, c2_hat);
            if b > 0.0 {
                s.error / b
            } else {
                0.0
            }
        })
        .collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let mean_ratio = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    ConstantsFit {
        kind,
        c0_hat,
        c1_hat,
        c2_hat,
        c1_ls,
        c2_ls,
        max_ratio,
        mean_ratio,
        samples,
    }
}

/// Nonnegative least squares for error ~ a term1 + b term2, by enumerating
/// the active sets of the two-variable problem.
fn nnls2(samples: &[FitSample]) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in samples {
        s11 += s.term1 * s.term1;
        s12 += s.term1 * s.term2;
        s22 += s.term2 * s.term2;
        s1y += s.term1 * s.error;
        s2y += s.term2 * s.error;
    }
    let resid = |a: f64, b: f64| -> f64 {
        samples
            .iter()
            .map(|s| (s.error - a * s.term1 - b * s.term2).powi(2))
            .sum()
    };
    let mut cands = vec![(0.0, 0.0)];
    if s11 > 0.0 {
        cands.push(((s1y / s11).max(0.0), 0.0));
    }
    if s22 > 0.0 {
        cands.push((0.0, (s2y / s22).max(0.0)));
    }
    let det = s11 * s22 - s12 * s12;
    if det > 1e-14 * s11 * s22 {
        let a = (s22 * s1y - s12 * s2y) / det;
        let b = (s11 * s2y - s12 * s1y) / det;
        if a >= 0.0 && b >= 0.0 {
            cands.push((a, b));
        }
    }
    cands
        .into_iter()
        .min_by(|x, y| resid(x.0, x.1).total_cmp(&resid(y.0, y.1)))
        .unwrap_or((0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_velocity, Parity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn range_dimension_counts_modes() {
        let d = DomainSpec::standard(64, 128);
        // |k| <= 1: mean, (0,1) shear, and (1,0) excluded.
        assert_eq!(range_dimension(&d, 1.0), 2);
        // |k|^2 <= 2: adds (1,1) with two streamfunctions.
        assert_eq!(range_dimension(&d, 0.7), 4);
    }

    #[test]
    fn volume_average_of_constant() {
        let g = DomainSpec::standard(32, 64).grid();
        let f = SpectralField::from_fn(&g, Parity::EvenX2, |_, _| 2.5);
        let a = apply_raw(&InterpolantKind::VolumeAverage(0.7), &f).unwrap();
        assert!(norm_l2(&a.sub(&f)) < 1e-12);
    }

    #[test]
    fn h_validation() {
        let d = DomainSpec::standard(16, 32);
        let dd = InterpolantKind::NodalBilinear(0.1);
        assert!(matches!(dd.validate(&d), Err(Error::HTooSmall { .. })));
        assert!(InterpolantKind::NodalBilinear(4.0).validate(&d).is_err());
        assert!(InterpolantKind::FourierLowpass(0.5).validate(&d).is_ok());
    }

    #[test]
    fn modified_range_is_divergence_free() {
        let d = DomainSpec::standard(32, 64);
        let g = d.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_velocity(&g, 8.0, 1.0, &mut rng);
        let m = ModifiedInterpolant::new(InterpolantKind::NodalBilinear(0.5), d).unwrap();
        let v = m.apply(&u);
        assert!(v.max_divergence() <= 1e-12 * norm_l2(&v));
        assert!(m.range_defect(&v) <= 1e-14 * norm_l2(&v));
        let back = m.expand(&m.compress(&v));
        assert_eq!(norm_l2(&back.sub(&v)), 0.0);
    }

    #[test]
    fn nnls_recovers_exact_combination() {
        let samples: Vec<FitSample> = (1..6)
            .map(|i| {
                let (a, b) = (i as f64, (i * i) as f64 * 0.3);
                FitSample {
                    h: 1.0,
                    error: 0.5 * a + 2.0 * b,
                    term1: a,
                    term2: b,
                }
            })
            .collect();
        let (a, b) = nnls2(&samples);
        assert!((a - 0.5).abs() < 1e-10 && (b - 2.0).abs() < 1e-10);
    }
}
