//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rbdf_core::solver::{simulate, PhysicalParams, RBState, StepperConfig};
use rbdf_core::{Result, SpectralField, VelocityField};

/// Random data advanced through `burn_in`, with the clock reset to 0.
pub fn settled(p: &PhysicalParams, cfg: StepperConfig, burn_in: f64, seed: u64) -> Result<RBState> {
    let s0 = RBState::random(p, 1.0, seed);
    let mut u = simulate(&s0, p, cfg, burn_in, burn_in)?
        .pop()
        .expect("nonempty run");
    u.t = 0.0;
    Ok(u)
}

/// Physical values of f, d f/dx1 or d f/dx2 (deriv = 0, 1, 2) on the grid,
/// by direct summation of the Fourier series at every node.
pub fn direct_values(f: &SpectralField, deriv: u8) -> Vec<f64> {
    let d = *f.domain();
    let (nx, ny) = (d.nx as i64, d.ny as i64);
    let mut out = vec![0.0; d.nx * d.ny];
    for i in 0..d.nx {
        for j in 0..d.ny {
            let (x1, x2) = (d.x1(i), d.x2(j));
            let mut s = 0.0;
            for m in -nx / 2..nx / 2 {
                for n in -ny / 2..ny / 2 {
                    let c = f.mode(m, n);
                    if c.norm() == 0.0 {
                        continue;
                    }
                    let (k1, k2) = (
                        2.0 * PI * m as f64 / d.length,
                        PI * n as f64 / d.half_height,
                    );
                    let phase = k1 * x1 + k2 * x2;
                    let e = rbdf_core::Complex64::new(phase.cos(), phase.sin());
                    let factor = match deriv {
                        0 => rbdf_core::Complex64::new(1.0, 0.0),
                        1 => rbdf_core::Complex64::new(0.0, k1),
                        _ => rbdf_core::Complex64::new(0.0, k2),
                    };
                    s += (c * factor * e).re;
                }
            }
            out[i * d.ny + j] = s;
        }
    }
    out
}

fn cell(f: &SpectralField) -> f64 {
    let d = f.domain();
    d.dx1() * d.dx2()
}

/// Collocation quadrature of the integral of (u . grad) v . w.
pub fn brute_b0(u: &VelocityField, v: &VelocityField, w: &VelocityField) -> f64 {
    let uc = [direct_values(&u.u1, 0), direct_values(&u.u2, 0)];
    let mut total = 0.0;
    for (vb, wb) in [(&v.u1, &w.u1), (&v.u2, &w.u2)] {
        let (d1, d2, wv) = (
            direct_values(vb, 1),
            direct_values(vb, 2),
            direct_values(wb, 0),
        );
        for k in 0..wv.len() {
            total += (uc[0][k] * d1[k] + uc[1][k] * d2[k]) * wv[k];
        }
    }
    total * cell(&u.u1)
}

/// Collocation quadrature of the integral of (u . grad theta) phi.
pub fn brute_b1(u: &VelocityField, theta: &SpectralField, phi: &SpectralField) -> f64 {
    let (u1, u2) = (direct_values(&u.u1, 0), direct_values(&u.u2, 0));
    let (d1, d2, p) = (
        direct_values(theta, 1),
        direct_values(theta, 2),
        direct_values(phi, 0),
    );
    let total: f64 = (0..p.len())
        .map(|k| (u1[k] * d1[k] + u2[k] * d2[k]) * p[k])
        .sum();
    total * cell(theta)
}
