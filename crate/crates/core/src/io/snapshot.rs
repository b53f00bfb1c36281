use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{PhysicalParams, RBState};
use crate::spectral::{
    BoundaryCondition, DomainSpec, Parity, ScalarField, SpectralField, VelocityField,
};

pub const MAGIC: &[u8; 4] = b"RBDF";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub bc: u8,
    pub nx: u32,
    pub ny: u32,
    pub length: f64,
    pub half_height: f64,
    pub nu: f64,
    pub kappa: f64,
    pub g: f64,
    pub t: f64,
}

/// Physical-space values of (u1, u2, theta) on the Nx x Ny grid, row-major
/// with x1 as the slow index, little-endian f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &RBState, p: &PhysicalParams) -> Self {
        let d = &p.domain;
        Snapshot {
            header: SnapshotHeader {
                version: FORMAT_VERSION,
                bc: d.bc.code(),
                nx: d.nx as u32,
                ny: d.ny as u32,
                length: d.length,
                half_height: d.half_height,
                nu: p.nu,
                kappa: p.kappa,
                g: p.g,
                t: state.t,
            },
            u1: state.u.u1.to_physical(),
            u2: state.u.u2.to_physical(),
            theta: state.theta.to_physical(),
        }
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let h = &self.header;
        let mut d = DomainSpec::new(h.length, h.half_height, h.nx as usize, h.ny as usize)?;
        d.bc = BoundaryCondition::from_code(h.bc)?;
        Ok(d)
    }

    /// Rebuild the state; the transform re-applies the projections. The
    /// prescribed mean `a` is read off the data.
    pub fn to_state(&self) -> Result<(PhysicalParams, RBState)> {
        let d = self.domain()?;
        let g = d.grid();
        let u1 = SpectralField::from_physical(&g, Parity::EvenX2, &self.u1);
        let u2 = SpectralField::from_physical(&g, Parity::OddX2, &self.u2);
        let theta = SpectralField::from_physical(&g, Parity::OddX2, &self.theta);
        let mut p = PhysicalParams::new(self.header.nu, self.header.kappa, self.header.g, d)?;
        let u = VelocityField::new(u1, u2);
        p.a = u.mean()[0] * d.area();
        let mut state = RBState {
            u,
            theta: ScalarField::new(theta),
            t: self.header.t,
        };
        state.canonicalize(p.a);
        if !state.is_finite() {
            return Err(Error::Format("snapshot holds non-finite values".into()));
        }
        Ok((p, state))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let h = &self.header;
        let mut buf = Vec::with_capacity(4 + 13 + 48 + 8 * 3 * self.u1.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&h.version.to_le_bytes());
        buf.push(h.bc);
        buf.extend_from_slice(&h.nx.to_le_bytes());
        buf.extend_from_slice(&h.ny.to_le_bytes());
        for x in [h.length, h.half_height, h.nu, h.kappa, h.g, h.t] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        for field in [&self.u1, &self.u2, &self.theta] {
            for x in field.iter() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut cur = Cursor {
            bytes: &bytes,
            pos: 0,
        };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(cur.array()?);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        let bc = cur.take(1)?[0];
        let nx = u32::from_le_bytes(cur.array()?);
        let ny = u32::from_le_bytes(cur.array()?);
        let mut f = [0.0; 6];
        for x in f.iter_mut() {
            *x = f64::from_le_bytes(cur.array()?);
        }
        let header = SnapshotHeader {
            version,
            bc,
            nx,
            ny,
            length: f[0],
            half_height: f[1],
            nu: f[2],
            kappa: f[3],
            g: f[4],
            t: f[5],
        };
        let n = (nx as usize)
            .checked_mul(ny as usize)
            .ok_or_else(|| Error::Format("grid too large".into()))?;
        if bytes.len() - cur.pos != 3 * 8 * n {
            return Err(Error::Format(format!(
                "expected {} payload bytes for a {nx} x {ny} grid, found {}",
                3 * 8 * n,
                bytes.len() - cur.pos
            )));
        }
        let mut read_field = || -> Result<Vec<f64>> {
            (0..n)
                .map(|_| Ok(f64::from_le_bytes(cur.array()?)))
                .collect()
        };
        let u1 = read_field()?;
        let u2 = read_field()?;
        let theta = read_field()?;
        Ok(Snapshot {
            header,
            u1,
            u2,
            theta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Snapshot::read_from(fs::File::open(path)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Format("truncated snapshot".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice of length N"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_identical_roundtrip() {
        let d = DomainSpec::standard(16, 32);
        let p = PhysicalParams::new(1.0, 1.0, 10.0, d).unwrap();
        let mut s = RBState::random(&p, 1.0, 3);
        s.t = 1.25;
        let snap = Snapshot::from_state(&s, &p);
        let mut a = Vec::new();
        snap.write_to(&mut a).unwrap();
        let back = Snapshot::read_from(&a[..]).unwrap();
        let mut b = Vec::new();
        back.write_to(&mut b).unwrap();
        assert_eq!(a, b);
        let (p2, s2) = back.to_state().unwrap();
        assert_eq!(p2.domain, p.domain);
        assert!(crate::spectral::norm_l2(&s2.u.sub(&s.u)) < 1e-12);
        assert!(Snapshot::read_from(&a[..a.len() - 1]).is_err());
    }
}
