//! Sufficient conditions on (mu, h) and the constants behind them, for both
//! boundary-condition cases. Everything here is a pure function of
//! [`AuditInput`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::solver::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcCase {
    NoSlip,
    StressFree,
}

impl BcCase {
    pub fn name(self) -> &'static str {
        match self {
            BcCase::NoSlip => "noslip",
            BcCase::StressFree => "stressfree",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', '_'], "")
            .as_str()
        {
            "noslip" => Ok(BcCase::NoSlip),
            "stressfree" => Ok(BcCase::StressFree),
            other => Err(Error::Config(format!("unknown boundary case '{other}'"))),
        }
    }
}

/// Dimensionless constants of the functional inequalities and of the
/// interpolant. Their values are user-supplied; 1.0 is only a default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalConstants {
    /// Ladyzhenskaya
    pub c_l: f64,
    /// Titi logarithmic inequality
    pub c_t: f64,
    /// Brezis-Gallouet
    pub c_b: f64,
    /// Agmon
    pub c_a: f64,
    /// elliptic regularity
    pub c_e: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// c~1 of the modified interpolant
    pub ct1: f64,
    /// c~2 of the modified interpolant
    pub ct2: f64,
}

impl Default for UniversalConstants {
    fn default() -> Self {
        UniversalConstants {
            c_l: 1.0,
            c_t: 1.0,
            c_b: 1.0,
            c_a: 1.0,
            c_e: 1.0,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            ct1: 1.0,
            ct2: 1.0,
        }
    }
}

impl UniversalConstants {
    pub fn named(&self) -> [(&'static str, f64); 10] {
        [
            ("c_L", self.c_l),
            ("c_T", self.c_t),
            ("c_B", self.c_b),
            ("c_A", self.c_a),
            ("c_E", self.c_e),
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c~1", self.ct1),
            ("c~2", self.ct2),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "universal constant {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditInput {
    pub p: PhysicalParams,
    pub bc: BcCase,
    /// sup ||u||_{V0} on the attractor
    pub j1: f64,
    /// sup ||u||_{H2} on the attractor
    pub j2: f64,
    pub uc: UniversalConstants,
    pub mu: f64,
    pub h: f64,
    /// Radius of the ball in X; None means 4R.
    pub rho: Option<f64>,
}

impl AuditInput {
    pub fn validate(&self) -> Result<()> {
        self.p.validate()?;
        self.uc.validate()?;
        for (name, v) in [
            ("J1", self.j1),
            ("J2", self.j2),
            ("mu", self.mu),
            ("h", self.h),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(r) = self.rho {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rho must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }

    fn rho(&self) -> Result<f64> {
        match self.rho {
            Some(r) => Ok(r),
            None => Ok(compute_r_rho(self)?.1),
        }
    }
}

/// R = ((c~1 + 1) J1 + c~2 L J2)/(nu lambda_1^(1/2)) bounds ||I~_h u||_X on
/// the attractor; rho = 4R.
pub fn compute_r_rho(input: &AuditInput) -> Result<(f64, f64)> {
    let length = input.p.domain.length;
    if !(input.h < length) {
        return Err(Error::HNotLessThanL { h: input.h, length });
    }
    let uc = &input.uc;
    let r = ((uc.ct1 + 1.0) * input.j1 + uc.ct2 * length * input.j2)
        / (input.p.nu * input.p.lambda1().sqrt());
    Ok((r, 4.0 * r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub name: &'static str,
    pub value: f64,
    pub formula: &'static str,
}

/// Constants in dependency order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constants(pub Vec<Constant>);

impl Constants {
    fn push(&mut self, name: &'static str, value: f64, formula: &'static str) -> f64 {
        self.0.push(Constant {
            name,
            value,
            formula,
        });
        value
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constant> {
        self.0.iter()
    }
}

struct Sym {
    nu: f64,
    kappa: f64,
    g: f64,
    l: f64,
    lam: f64,
    area: f64,
    t: f64,
    mu: f64,
    rho: f64,
}

impl Sym {
    fn new(input: &AuditInput) -> Result<Self> {
        input.validate()?;
        let p = &input.p;
        Ok(Sym {
            nu: p.nu,
            kappa: p.kappa,
            g: p.g,
            l: p.domain.half_height,
            lam: p.lambda1(),
            area: p.domain.area(),
            t: p.window(),
            mu: input.mu,
            rho: input.rho()?,
        })
    }
}

/// K log K clamped at zero; the second value flags K < 1.
fn k_log_k(k: f64) -> (f64, bool) {
    if k <= 0.0 {
        return (0.0, true);
    }
    ((k * k.ln()).max(0.0), k < 1.0)
}

pub fn constants_noslip(input: &AuditInput) -> Result<Constants> {
    let s = Sym::new(input)?;
    let uc = &input.uc;
    let (nu, ka, l, lam, t, mu, rho) = (s.nu, s.kappa, s.l, s.lam, s.t, s.mu, s.rho);
    let r2 = rho * rho;
    let mut c = Constants::default();
    c.push("rho", rho, "rho = 4R unless given");
    c.push("T", t, "1/(nu lambda_1)");
    let k = c.push("K", 2.0 * s.area, "2|Omega|");
    let c1 = c.push("C1", 4.0 * nu * nu, "4 nu^2");
    c.push(
        "K1",
        27.0 * uc.c_l.powi(8) / (2.0 * nu.powi(3)),
        "27 c_L^8/(2 nu^3)",
    );
    let k2 = c.push(
        "K2",
        4.0 * (uc.c_t.powi(2) + uc.c_b.powi(2)) * r2 / (nu * nu * lam),
        "4(c_T^2 + c_B^2) rho^2/(nu^2 lambda_1)",
    );
    let (klk, small) = k_log_k(k2);
    c.push("K2logK2", klk, "max(K2 log K2, 0)");
    c.push(
        "K2_below_one",
        if small { 1.0 } else { 0.0 },
        "1 if K2 < 1 (log term clamped)",
    );
    let beta = c.push(
        "beta",
        k * k / 2.0 + t * (ka * lam * k * k / 4.0 + 4.0 * c1 * r2 / (ka * l * l * lam)),
        "K^2/2 + T(kappa lambda_1 K^2/(4 rho^2) + 4 C1/(kappa l^2 lambda_1)) rho^2",
    );
    let a1e = c.push(
        "a1_eta",
        8.0 * uc.c_l.powi(2) * c1 * lam * r2 * t / ka,
        "8 c_L^2 C1 lambda_1 rho^2 T/kappa",
    );
    let a2e = c.push(
        "a2_eta",
        8.0 * c1 * r2 * t / (l * l * ka),
        "8 C1 rho^2 T/(l^2 kappa)",
    );
    let c3 = c.push(
        "C3",
        (beta / ka + a2e) * a1e.exp(),
        "(beta/kappa + a2_eta) exp(a1_eta)",
    );
    let a1 = c.push(
        "a1",
        16.0 * uc.c_l.powi(2) * c1 * r2 * lam * t / ka
            + uc.c_l.powi(4) * nu * nu / (ka * ka)
                * c3
                * (c3 + (8.0 * uc.c_l.powi(2) * c1 * lam * c3 / ka + 8.0 * c1 / (l * l * ka)) * r2 * t),
        "4 c_L^2/kappa 4 C1 rho^2 lambda_1 T + c_L^4 nu^2/kappa^2 C3 [C3 + (8 c_L^2 C1 lambda_1 C3/kappa + 8 C1/(l^2 kappa)) rho^2 T]",
    );
    let k11 = c.push(
        "K11",
        t * (1.0 / (2.0 * nu) + 1.0 / (ka * l * l * lam)) * mu * nu.powi(3) * lam / ka,
        "T(1/(2 nu) + 1/(kappa l^2 lambda_1)) mu nu lambda_1 nu^2/kappa",
    );
    let k12 = c.push(
        "K12",
        mu * (lam * t + 1.0 / ka) * nu * nu / ka,
        "mu nu lambda_1/(kappa nu lambda_1) (lambda_1 T + 1/kappa) nu^2",
    );
    let k13 = c.push("K13", a1.exp() * (k11 + k12 / t), "exp(a1)(K11 + K12/T)");
    c.push(
        "Lip_Y",
        (mu * nu / ka).sqrt() + (4.0 * mu * nu * (lam * t + 1.0 / ka)).sqrt(),
        "sqrt(mu nu/kappa) + sqrt(4 mu nu (lambda_1 T + 1/kappa))",
    );
    c.push(
        "Lip_Z",
        k13.sqrt() + (nu * (k13 + a1 * k13 + k11) / ka).sqrt(),
        "sqrt(K13) + sqrt(nu (K13 + a1 K13 + K11)/kappa)",
    );
    Ok(c)
}

pub fn constants_stressfree(input: &AuditInput) -> Result<Constants> {
    let s = Sym::new(input)?;
    let uc = &input.uc;
    let (nu, ka, g, l, lam, area, t, mu, rho) =
        (s.nu, s.kappa, s.g, s.l, s.lam, s.area, s.t, s.mu, s.rho);
    let r2 = rho * rho;
    let mut c = Constants::default();
    c.push("rho", rho, "rho = 4R unless given");
    c.push("T", t, "1/(nu lambda_1)");
    let eps1 = c.push("eps1", 1.0 / area, "1/|Omega|");
    let eps2 = c.push("eps2", (nu * lam).powi(2), "(nu lambda_1)^2");
    let kt1 = c.push("K~1", (area / lam).sqrt(), "|Omega|^(1/2) lambda_1^(-1/2)");
    let ct0 = c.push("C~0", 2.0 * nu / (lam * ka), "2 nu/(lambda_1 kappa)");
    let ct1 = c.push(
        "C~1",
        8.0 * (2.0 * g * g * ct0 / nu + nu * lam * nu * nu * lam) / (nu * lam),
        "32 g^2/(lambda_1 kappa nu lambda_1) + 8 nu^2 lambda_1",
    );
    let kt2 = c.push(
        "K~2",
        kt1 * kt1 * ct1 / (ka * l * l),
        "K~1^2 C~1/(kappa l^2)",
    );
    let ct2 = c.push("C~2", 2.0 * kt2 / (lam * ka), "2 K~2/(lambda_1 kappa)");
    let kt3 = c.push(
        "K~3",
        27.0 / (4.0 * ka.powi(3)) * uc.c_l.powi(4) * area * area * ct1 * ct1,
        "27 c_L^4 |Omega|^2 C~1^2/(4 kappa^3)",
    );
    let kt4 = c.push(
        "K~4",
        2.0 * area * ct1 / (l * l * ka),
        "2|Omega| C~1/(l^2 kappa)",
    );
    let bt = c.push(
        "beta~",
        ct2 / 2.0 + t * (ka * lam * ct2 / 4.0 + ct1 / (ka * l * l * lam)),
        "C~2/2 + T(kappa lambda_1 C~2/4 + C~1/(kappa l^2 lambda_1))",
    );
    let ct3 = c.push("C~3", bt / ka, "beta~/kappa (window alpha = T)");
    let ct4 = c.push(
        "C~4",
        (ct3 + kt4 * t) * (2.0 * kt3 * t * r2 * r2).exp(),
        "(C~3 + K~4 T) exp(2 K~3 T rho^4)",
    );
    let k13 = c.push(
        "K13",
        uc.c_l.powi(2) * area.sqrt() / lam.sqrt() * ct4 * r2,
        "c_L^2 |Omega|^(1/2) lambda_1^(-1/2) C~4 rho^2",
    );
    let kh1 = c.push(
        "K^1",
        uc.c_a * uc.c_e * ct1.sqrt() * rho / area.sqrt(),
        "c_A c_E C~1^(1/2) rho/|Omega|^(1/2)",
    );
    let kh2 = c.push(
        "K^2",
        uc.c_a * uc.c_e * ct1.sqrt() * rho,
        "c_A c_E C~1^(1/2) rho",
    );
    let k14 = c.push(
        "K14",
        2.0 * kh1 * kh1 + 54.0 / nu.powi(3) * kh2.powi(4),
        "2 K^1^2 + 54 K^2^4/nu^3",
    );
    let kh3 = c.push(
        "K^3",
        uc.c_e * uc.c_l * ct1.sqrt() * rho,
        "c_E c_L C~1^(1/2) rho",
    );
    let kh4 = c.push(
        "K^4",
        uc.c_e * uc.c_l * area.powf(0.25) * ct1.sqrt() * rho,
        "c_E c_L |Omega|^(1/4) C~1^(1/2) rho",
    );
    let k15 = c.push(
        "K15",
        2.0 * kh3 * kh3 + 54.0 / nu.powi(3) * kh4.powi(4),
        "2 K^3^2 + 54 K^4^4/nu^3",
    );
    let buoy = 2.0 * g * g / (area * ka * eps2 * lam)
        + 2.0 * g * g / (ka * eps2)
        + kt1 * kt1 * eps2 / (ka * l * l);
    c.push(
        "S_energy",
        buoy,
        "2 g^2/(|Omega| kappa eps2 lambda_1) + 2 g^2/(kappa eps2) + K~1^2 eps2/(kappa l^2)",
    );
    c.push(
        "K16",
        buoy + eps1 * uc.c_l * ct1.sqrt() * rho * area.sqrt() + eps2 * k13 / ka + k15 / nu + k14 * area / nu,
        "S_energy + eps1 c_L C~1^(1/2) rho |Omega|^(1/2) + eps2 K13/kappa + K15/nu + K14 |Omega|/nu",
    );
    let c6 = c.push("C6", 8.0 * lam * nu.powi(3) / ka, "8 lambda_1 nu^3/kappa");
    let kt11 = c.push(
        "K~11",
        t * (1.0 / nu + 2.0 * area / (ka * l * l)) * mu * c6,
        "T(1/nu + 2|Omega|/(kappa l^2)) mu C6",
    );
    let a1 = c.push(
        "a1",
        4.0 * uc.c_l.powi(2) / ka * ct1 * r2 * t
            + uc.c_l.powi(4) * nu * nu / (ka * ka)
                * ct4
                * r2
                * (ct4 * r2 + t * (2.0 * kt3 * r2 * r2 * ct4 * r2 + kt4 * r2)),
        "4 c_L^2/kappa C~1 rho^2 T + c_L^4 nu^2/kappa^2 C~4 rho^2 [C~4 rho^2 + T(2 K~3 rho^4 C~4 rho^2 + K~4 rho^2)]",
    );
    let ave = 8.0 * mu * nu * lam * nu * nu * lam * t + 4.0 * mu * c6;
    let kt12 = c.push(
        "K~12",
        a1.exp() * (kt11 + ave / (ka * eps2 * t)),
        "exp(a1)[K~11 + (8 mu nu lambda_1 nu^2 lambda_1 T + 4 mu C6)/(kappa eps2 T)]",
    );
    c.push(
        "Lip_Y",
        (mu * c6).sqrt() / (nu * lam.sqrt()) + (ave / (nu * nu * lam)).sqrt(),
        "sqrt(mu C6)/(nu lambda_1^(1/2)) + sqrt((8 mu nu^3 lambda_1^2 T + 4 mu C6)/(nu^2 lambda_1))",
    );
    c.push(
        "Lip_Z",
        kt12.sqrt() + (nu * (kt12 + a1 * kt12 + kt11) / ka).sqrt(),
        "sqrt(K~12) + sqrt(nu (K~12 + a1 K~12 + K~11)/kappa)",
    );
    Ok(c)
}

pub fn constants(input: &AuditInput) -> Result<Constants> {
    match input.bc {
        BcCase::NoSlip => constants_noslip(input),
        BcCase::StressFree => constants_stressfree(input),
    }
}

/// Theoretical Lipschitz constants of W (Y-norm) and of the temperature
/// component (Z-norm) at the input's mu.
pub fn lipschitz_bound(input: &AuditInput) -> Result<(f64, f64)> {
    let c = constants(input)?;
    Ok((
        c.get("Lip_Y").unwrap_or(f64::NAN),
        c.get("Lip_Z").unwrap_or(f64::NAN),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Controls {
    /// A lower bound on mu.
    Mu,
    /// An upper bound on h.
    H,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub id: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub controls: Controls,
    pub satisfied: bool,
    /// Signed slack; nonnegative (positive for strict) when satisfied.
    pub margin: f64,
}

impl Condition {
    fn new(id: &'static str, lhs: f64, relation: Relation, rhs: f64, controls: Controls) -> Self {
        let margin = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge | Relation::Gt => lhs - rhs,
        };
        let satisfied = match relation {
            Relation::Gt => margin > 0.0,
            _ => margin >= 0.0,
        };
        Condition {
            id,
            lhs,
            rhs,
            relation,
            controls,
            satisfied,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub bc: BcCase,
    pub mu: f64,
    pub h: f64,
    pub r: Option<f64>,
    pub rho: f64,
    pub uc: UniversalConstants,
    pub constants: Constants,
    pub conditions: Vec<Condition>,
    /// (mu, h) found sufficient by a nudging run, if known.
    pub empirical: Option<(f64, f64)>,
}

impl AuditReport {
    pub fn all_satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }

    pub fn condition(&self, id: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "audit: {} boundary conditions, mu = {}, h = {}",
            self.bc.name(),
            self.mu,
            self.h
        );
        if let Some(r) = self.r {
            let _ = writeln!(s, "R = {r:.6e}, rho = {:.6e}", self.rho);
        } else {
            let _ = writeln!(s, "rho = {:.6e} (given)", self.rho);
        }
        let _ = writeln!(
            s,
            "universal constants (user-supplied; defaults are 1.0, no values are known):"
        );
        for (n, v) in self.uc.named() {
            let _ = writeln!(s, "  {n:<6} = {v}");
        }
        let _ = writeln!(s, "constants:");
        for c in self.constants.iter() {
            let _ = writeln!(s, "  {:<13} = {:<14.6e} {}", c.name, c.value, c.formula);
        }
        let _ = writeln!(s, "conditions:");
        for c in &self.conditions {
            let _ = writeln!(
                s,
                "  {:<16} {:.6e} {} {:.6e}  margin {:+.6e}  {}",
                c.id,
                c.lhs,
                c.relation.symbol(),
                c.rhs,
                c.margin,
                if c.satisfied { "PASS" } else { "FAIL" }
            );
        }
        if let Some((m, h)) = self.empirical {
            let _ = writeln!(
                s,
                "empirically sufficient: mu = {m}, h = {h} (theory at mu = {}, h = {})",
                self.mu, self.h
            );
        }
        s
    }

    /// CSV body: condition-id, lhs, rhs, margin, pass.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("condition,lhs,rhs,margin,pass\n");
        for c in &self.conditions {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{}",
                c.id, c.lhs, c.rhs, c.margin, c.satisfied
            );
        }
        s
    }
}

fn conditions_noslip(input: &AuditInput, c: &Constants) -> Vec<Condition> {
    let p = &input.p;
    let (nu, ka, g, lam, l) = (p.nu, p.kappa, p.g, p.lambda1(), p.domain.half_height);
    let (mu, h, uc) = (input.mu, input.h, &input.uc);
    let get = |n: &str| c.get(n).unwrap_or(f64::NAN);
    let (rho, k, c1, k1, klk) = (get("rho"), get("K"), get("C1"), get("K1"), get("K2logK2"));
    vec![
        Condition::new(
            "ns-h-linear",
            mu * lam.sqrt() * uc.c1 * h,
            Relation::Le,
            0.25,
            Controls::H,
        ),
        Condition::new(
            "ns-h-quartic",
            mu * lam * lam * 2.0 * uc.c2.powi(2) * h.powi(4),
            Relation::Le,
            0.125,
            Controls::H,
        ),
        Condition::new(
            "ns-mu-buoyancy",
            mu * nu * nu * lam * lam * c1,
            Relation::Gt,
            5.0 * g * g * k / (2.0 * rho * rho),
            Controls::Mu,
        ),
        Condition::new(
            "ns-mu-nonlinear",
            mu * nu / 4.0 - 16.0 * k1 * c1 * c1 * rho.powi(4),
            Relation::Gt,
            0.0,
            Controls::Mu,
        ),
        Condition::new(
            "ns-mu-lipschitz",
            mu * nu * lam / 2.0
                - g * g / (ka * (nu * lam).powi(2))
                - lam * nu / 4.0 * klk
                - 2.0 * uc.c_l.powi(2) * nu * nu / ka * rho * rho
                - 2.0 * nu * nu / (l * l * ka),
            Relation::Ge,
            ka * lam / 2.0,
            Controls::Mu,
        ),
    ]
}

fn conditions_stressfree(input: &AuditInput, c: &Constants) -> Vec<Condition> {
    let p = &input.p;
    let (nu, ka, lam, area) = (p.nu, p.kappa, p.lambda1(), p.domain.area());
    let (mu, h, uc) = (input.mu, input.h, &input.uc);
    let get = |n: &str| c.get(n).unwrap_or(f64::NAN);
    vec![
        Condition::new(
            "sf-mu-energy",
            mu * nu * lam / 4.0 - get("S_energy"),
            Relation::Ge,
            ka * lam / 2.0,
            Controls::Mu,
        ),
        Condition::new(
            "sf-mu-mean",
            mu * lam / 8.0 - 0.25 / area,
            Relation::Ge,
            0.0,
            Controls::Mu,
        ),
        Condition::new(
            "sf-mu-lipschitz",
            mu * nu * lam / 4.0 - get("K16"),
            Relation::Ge,
            ka * lam / 4.0,
            Controls::Mu,
        ),
        Condition::new(
            "sf-h-linear",
            uc.c1 * h / area.sqrt(),
            Relation::Le,
            0.125,
            Controls::H,
        ),
        Condition::new(
            "sf-h-quartic",
            2.0 * uc.c2.powi(2) * h.powi(4) * mu * lam / area,
            Relation::Le,
            0.125,
            Controls::H,
        ),
        Condition::new(
            "sf-h-mixed",
            mu * nu * lam * (uc.c1.powi(2) * h * h + uc.c2 * h * h),
            Relation::Le,
            nu / 2.0,
            Controls::H,
        ),
    ]
}

/// Evaluate every constant and condition at the input's (mu, h).
pub fn check_conditions(input: &AuditInput) -> Result<AuditReport> {
    let constants = constants(input)?;
    let conditions = match input.bc {
        BcCase::NoSlip => conditions_noslip(input, &constants),
        BcCase::StressFree => conditions_stressfree(input, &constants),
    };
    let r = match input.rho {
        Some(_) => None,
        None => Some(compute_r_rho(input)?.0),
    };
    Ok(AuditReport {
        bc: input.bc,
        mu: input.mu,
        h: input.h,
        r,
        rho: input.rho()?,
        uc: input.uc,
        constants,
        conditions,
        empirical: None,
    })
}

/// Smallest mu allowed by the mu-conditions, with the binding one named.
fn mu_lower_bounds(input: &AuditInput, c: &Constants) -> Vec<(&'static str, f64)> {
    let p = &input.p;
    let (nu, ka, g, lam, area, l) = (
        p.nu,
        p.kappa,
        p.g,
        p.lambda1(),
        p.domain.area(),
        p.domain.half_height,
    );
    let get = |n: &str| c.get(n).unwrap_or(f64::NAN);
    match input.bc {
        BcCase::StressFree => vec![
            (
                "sf-mu-energy",
                4.0 * (ka * lam / 2.0 + get("S_energy")) / (nu * lam),
            ),
            ("sf-mu-mean", 2.0 / (area * lam)),
            (
                "sf-mu-lipschitz",
                4.0 * (ka * lam / 4.0 + get("K16")) / (nu * lam),
            ),
        ],
        BcCase::NoSlip => {
            let rho = get("rho");
            let buoy = if g == 0.0 {
                0.0
            } else {
                5.0 * g * g * get("K") / (2.0 * rho * rho * nu * nu * lam * lam * get("C1"))
            };
            vec![
                ("ns-mu-buoyancy", buoy),
                (
                    "ns-mu-nonlinear",
                    64.0 * get("K1") * get("C1").powi(2) * rho.powi(4) / nu,
                ),
                (
                    "ns-mu-lipschitz",
                    2.0 / (nu * lam)
                        * (ka * lam / 2.0
                            + g * g / (ka * (nu * lam).powi(2))
                            + lam * nu / 4.0 * get("K2logK2")
                            + 2.0 * input.uc.c_l.powi(2) * nu * nu * rho * rho / ka
                            + 2.0 * nu * nu / (l * l * ka)),
                ),
            ]
        }
    }
}

/// Largest h allowed by the h-conditions at a given mu.
fn h_upper_bounds(input: &AuditInput, mu: f64) -> Vec<(&'static str, f64)> {
    let p = &input.p;
    let (lam, area) = (p.lambda1(), p.domain.area());
    let uc = &input.uc;
    match input.bc {
        BcCase::StressFree => vec![
            ("sf-h-linear", area.sqrt() / (8.0 * uc.c1)),
            (
                "sf-h-quartic",
                (area / (16.0 * uc.c2.powi(2) * mu * lam)).powf(0.25),
            ),
            (
                "sf-h-mixed",
                (1.0 / (2.0 * mu * lam * (uc.c1.powi(2) + uc.c2))).sqrt(),
            ),
        ],
        BcCase::NoSlip => vec![
            ("ns-h-linear", 1.0 / (4.0 * mu * lam.sqrt() * uc.c1)),
            (
                "ns-h-quartic",
                (1.0 / (16.0 * mu * lam * lam * uc.c2.powi(2))).powf(0.25),
            ),
        ],
    }
}

/// Smallest admissible mu and the largest h compatible with it. rho does
/// not depend on h as long as h < L, so one sweep reaches the fixed point.
/// The returned pair is replayed through [`check_conditions`].
pub fn suggest_mu_h(input: &AuditInput) -> Result<(f64, f64)> {
    let c = constants(input)?;
    let (binding, mu_min) = mu_lower_bounds(input, &c)
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one mu condition");
    if !mu_min.is_finite() {
        return Err(Error::Infeasible {
            binding: binding.into(),
            reason: format!("required mu is {mu_min}"),
        });
    }
    let mu = mu_min * (1.0 + 1e-9);
    let length = input.p.domain.length;
    let (hb, h_max) = h_upper_bounds(input, mu)
        .into_iter()
        .chain(std::iter::once(("h-below-L", length)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one h condition");
    if !(h_max.is_finite() && h_max > 0.0) {
        return Err(Error::Infeasible {
            binding: hb.into(),
            reason: format!("largest h is {h_max}"),
        });
    }
    let h = h_max * (1.0 - 1e-9);
    let replay = check_conditions(&AuditInput { mu, h, ..*input })?;
    if let Some(bad) = replay.conditions.iter().find(|c| !c.satisfied) {
        return Err(Error::Infeasible {
            binding: bad.id.into(),
            reason: format!("margin {:e} at the suggested pair", bad.margin),
        });
    }
    Ok((mu, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DomainSpec;
    use std::f64::consts::PI;

    fn unit_input(bc: BcCase) -> AuditInput {
        let d = DomainSpec::new(1.0, PI, 8, 8).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 0.0, d).unwrap();
        AuditInput {
            p,
            bc,
            j1: 1.0,
            j2: 1.0,
            uc: UniversalConstants::default(),
            mu: 1.0,
            h: 0.5,
            rho: None,
        }
    }

    #[test]
    fn r_rho_arithmetic() {
        let input = unit_input(BcCase::StressFree);
        let (r, rho) = compute_r_rho(&input).unwrap();
        assert!((r - 3.0).abs() < 1e-12 && (rho - 12.0).abs() < 1e-12);
        let bad = AuditInput { h: 1.0, ..input };
        assert!(matches!(
            compute_r_rho(&bad),
            Err(Error::HNotLessThanL { .. })
        ));
    }

    #[test]
    fn g_zero_stress_free_is_feasible() {
        let input = AuditInput {
            rho: Some(1e-3),
            ..unit_input(BcCase::StressFree)
        };
        let (mu, h) = suggest_mu_h(&input).unwrap();
        let rep = check_conditions(&AuditInput { mu, h, ..input }).unwrap();
        assert!(rep.all_satisfied(), "{}", rep.to_text());
    }

    #[test]
    fn huge_rho_is_infeasible() {
        let input = AuditInput {
            rho: Some(1e6),
            ..unit_input(BcCase::NoSlip)
        };
        assert!(
            suggest_mu_h(&input).is_ok_and(|(mu, _)| mu > 1e20) || suggest_mu_h(&input).is_err()
        );
        let sf = AuditInput {
            rho: Some(1e6),
            ..unit_input(BcCase::StressFree)
        };
        assert!(matches!(suggest_mu_h(&sf), Err(Error::Infeasible { .. })));
    }
}
