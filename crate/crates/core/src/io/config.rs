use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::audit::{AuditInput, BcCase, UniversalConstants};
use crate::determining::SpinUpConfig;
use crate::error::{Error, Result};
use crate::interp::InterpolantKind;
use crate::solver::{PhysicalParams, StepperConfig};
use crate::spectral::DomainSpec;

trait ConfigValue: Sized {
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> Option<String>;
}

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse().map_err(|e| format!("{e}"))
    }
    fn render(&self) -> Option<String> {
        Some(format!("{self:?}"))
    }
}

impl ConfigValue for usize {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse().map_err(|e| format!("{e}"))
    }
    fn render(&self) -> Option<String> {
        Some(self.to_string())
    }
}

impl ConfigValue for u64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse().map_err(|e| format!("{e}"))
    }
    fn render(&self) -> Option<String> {
        Some(self.to_string())
    }
}

impl ConfigValue for bool {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        match s {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(format!("expected a boolean, got '{s}'")),
        }
    }
    fn render(&self) -> Option<String> {
        Some(self.to_string())
    }
}

impl ConfigValue for String {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        Ok(s.to_string())
    }
    fn render(&self) -> Option<String> {
        Some(self.clone())
    }
}

impl<T: ConfigValue> ConfigValue for Option<T> {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        T::parse_value(s).map(Some)
    }
    fn render(&self) -> Option<String> {
        self.as_ref().and_then(|v| v.render())
    }
}

impl ConfigValue for Vec<f64> {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| f64::parse_value(x.trim()))
            .collect()
    }
    fn render(&self) -> Option<String> {
        Some(
            self.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(","),
        )
    }
}

macro_rules! run_config {
    ($( $(#[$doc:meta])* $name:ident : $ty:ty = $default:expr ),* $(,)?) => {
        /// Flat key = value run configuration; '#' starts a comment.
        #[derive(Debug, Clone, PartialEq)]
        pub struct RunConfig {
            $( $(#[$doc])* pub $name: $ty, )*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                RunConfig { $( $name: $default, )* }
            }
        }

        impl RunConfig {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($name)),*];

            /// Set one key from its text value.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $( stringify!($name) => {
                        self.$name = <$ty as ConfigValue>::parse_value(value)
                            .map_err(|e| Error::Config(format!("{key}: {e}")))?;
                    } )*
                    _ => return Err(Error::Config(format!("unknown key '{key}'"))),
                }
                Ok(())
            }

            /// Every set key, one per line, in a fixed order.
            pub fn to_text(&self) -> String {
                let mut s = String::new();
                $( if let Some(v) = ConfigValue::render(&self.$name) {
                    let _ = writeln!(s, "{} = {}", stringify!($name), v);
                } )*
                s
            }
        }
    };
}

run_config! {
    nu: f64 = 1.0,
    kappa: f64 = 1.0,
    g: f64 = 100.0,
    length: f64 = std::f64::consts::TAU,
    half_height: f64 = std::f64::consts::PI,
    nx: usize = 64,
    ny: usize = 128,
    /// Prescribed integral of u1.
    a: f64 = 0.0,
    dt: f64 = 0.005,
    t_end: f64 = 10.0,
    /// Snapshot spacing in time units.
    sample_every: f64 = 1.0,
    seed: u64 = 7,
    /// Root-mean-square size of random initial data.
    amplitude: f64 = 1.0,
    /// Restart from this snapshot instead of random data.
    init: Option<String> = None,
    /// Transient discarded before a reference trajectory is recorded.
    burn_in: f64 = 10.0,
    mu: f64 = 100.0,
    interp: String = "lowpass".to_string(),
    h: f64 = 0.25,
    fold_lowpass: bool = true,
    record_stride: usize = 20,
    span: f64 = 15.0,
    tau_spin: f64 = 5.0,
    spin_tolerance: f64 = 1e-8,
    spin_offset: Option<f64> = None,
    steady_tolerance: f64 = 1e-5,
    /// v0 = beta_scale * I~_h u for the determining-form run.
    beta_scale: f64 = 2.0,
    s_span: f64 = 50.0,
    ode_ds: f64 = 0.5,
    beta_grid: usize = 8,
    rate_tolerance: f64 = 1e-3,
    zero_tol: f64 = 1e-8,
    beta_tol: f64 = 1e-4,
    bc_case: String = "stressfree".to_string(),
    /// Attractor bounds; estimated from a run when absent.
    j1: Option<f64> = None,
    j2: Option<f64> = None,
    horizon: f64 = 20.0,
    rho: Option<f64> = None,
    c_l: f64 = 1.0,
    c_t: f64 = 1.0,
    c_b: f64 = 1.0,
    c_a: f64 = 1.0,
    c_e: f64 = 1.0,
    c0: f64 = 1.0,
    c1: f64 = 1.0,
    c2: f64 = 1.0,
    ct1: f64 = 1.0,
    ct2: f64 = 1.0,
    fit_members: usize = 10,
    fit_hs: Vec<f64> = vec![1.0, 0.7, 0.5, 0.35],
    out: String = "out".to_string(),
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.length, self.half_height, self.nx, self.ny)
    }

    pub fn physical(&self) -> Result<PhysicalParams> {
        let mut p = PhysicalParams::new(self.nu, self.kappa, self.g, self.domain()?)?;
        p.a = self.a;
        p.validate()?;
        Ok(p)
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        StepperConfig::new(self.dt)
    }

    pub fn interpolant(&self) -> Result<InterpolantKind> {
        InterpolantKind::parse(&self.interp, self.h)
    }

    pub fn spin(&self) -> Result<SpinUpConfig> {
        let s = SpinUpConfig {
            tau_spin: self.tau_spin,
            tolerance: self.spin_tolerance,
            offset: self.spin_offset,
            record_stride: 0,
        };
        s.validate(&self.physical()?)?;
        Ok(s)
    }

    pub fn universal(&self) -> UniversalConstants {
        UniversalConstants {
            c_l: self.c_l,
            c_t: self.c_t,
            c_b: self.c_b,
            c_a: self.c_a,
            c_e: self.c_e,
            c0: self.c0,
            c1: self.c1,
            c2: self.c2,
            ct1: self.ct1,
            ct2: self.ct2,
        }
    }

    /// Audit input with the given attractor bounds.
    pub fn audit_input(&self, j1: f64, j2: f64) -> Result<AuditInput> {
        let input = AuditInput {
            p: self.physical()?,
            bc: BcCase::parse(&self.bc_case)?,
            j1,
            j2,
            uc: self.universal(),
            mu: self.mu,
            h: self.h,
            rho: self.rho,
        };
        input.validate()?;
        Ok(input)
    }

    /// Check every value against the invariants of the type it feeds.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Config(s) => Error::Config(s),
            other => Error::Config(other.to_string()),
        };
        let p = self.physical().map_err(wrap)?;
        self.stepper().map_err(wrap)?;
        self.interpolant()
            .and_then(|k| k.validate(&p.domain))
            .map_err(wrap)?;
        self.spin().map_err(wrap)?;
        BcCase::parse(&self.bc_case).map_err(wrap)?;
        self.universal().validate().map_err(wrap)?;
        let positive = [
            ("t_end", self.t_end),
            ("sample_every", self.sample_every),
            ("amplitude", self.amplitude),
            ("mu", self.mu),
            ("span", self.span),
            ("s_span", self.s_span),
            ("ode_ds", self.ode_ds),
            ("beta_scale", self.beta_scale),
            ("horizon", self.horizon),
            ("steady_tolerance", self.steady_tolerance),
            ("zero_tol", self.zero_tol),
            ("beta_tol", self.beta_tol),
            ("rate_tolerance", self.rate_tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.burn_in.is_finite() && self.burn_in >= 0.0) {
            return Err(Error::Config(format!(
                "burn_in must be nonnegative, got {}",
                self.burn_in
            )));
        }
        for (name, v) in [("j1", self.j1), ("j2", self.j2), ("rho", self.rho)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.beta_grid < 2 || self.fit_members == 0 || self.record_stride == 0 {
            return Err(Error::Config(
                "beta_grid >= 2, fit_members >= 1 and record_stride >= 1 are required".into(),
            ));
        }
        if self.fit_hs.is_empty() || self.fit_hs.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::Config(
                "fit_hs must be a nonempty list of positive values".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rejection() {
        let text = "# demo\nnu = 0.5 # viscosity\nmu=250\nj1 = 3.25\nfit_hs = 0.5, 0.25\ninit = snap.bin\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.nu, 0.5);
        assert_eq!(c.j1, Some(3.25));
        assert_eq!(c.fit_hs, vec![0.5, 0.25]);
        let again = RunConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
        assert!(matches!(
            RunConfig::parse("bogus = 1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::parse("nu = -1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("dt"), Err(Error::Config(_))));
        assert_eq!(RunConfig::KEYS.len(), c.to_text().lines().count() + 3);
    }
}
