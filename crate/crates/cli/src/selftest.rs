//! Quick invariant checks on a coarse grid.

use std::f64::consts::PI;

use rbdf_core::audit::{compute_r_rho, AuditInput, BcCase, UniversalConstants};
use rbdf_core::bilinear::{b0_form, b1_form};
use rbdf_core::interp::{InterpolantKind, ModifiedInterpolant};
use rbdf_core::io::{RunConfig, Snapshot};
use rbdf_core::nudging::{synchronize_experiment, NudgeParams, SyncConfig};
use rbdf_core::solver::{PhysicalParams, RBState, StepperConfig};
use rbdf_core::spectral::norm_v0;
use rbdf_core::{DomainSpec, Result};

type Check = (&'static str, fn() -> Result<Option<String>>);

fn params(g: f64) -> Result<PhysicalParams> {
    PhysicalParams::new(1.0, 1.0, g, DomainSpec::new(2.0 * PI, PI, 16, 32)?)
}

fn trilinear_antisymmetry() -> Result<Option<String>> {
    let p = params(1.0)?;
    let a = RBState::random(&p, 1.0, 1);
    let b = RBState::random(&p, 1.0, 2);
    let c = RBState::random(&p, 1.0, 3);
    let scale = norm_v0(&a.u) * norm_v0(&b.u) * norm_v0(&c.u);
    let e0 = (b0_form(&a.u, &b.u, &c.u) + b0_form(&a.u, &c.u, &b.u)).abs() / scale;
    let e1 = (b1_form(&a.u, &b.theta, &c.theta) + b1_form(&a.u, &c.theta, &b.theta)).abs() / scale;
    let e2 = b0_form(&a.u, &b.u, &b.u).abs() / scale;
    let worst = e0.max(e1).max(e2);
    Ok((worst > 1e-10).then(|| format!("relative defect {worst:.3e}")))
}

fn snapshot_roundtrip() -> Result<Option<String>> {
    let p = params(10.0)?;
    let s = RBState::random(&p, 1.0, 4);
    let snap = Snapshot::from_state(&s, &p);
    let mut first = Vec::new();
    snap.write_to(&mut first)?;
    let back = Snapshot::read_from(&mut first.as_slice())?;
    let mut second = Vec::new();
    back.write_to(&mut second)?;
    Ok((first != second).then(|| "bytes differ after a round trip".to_string()))
}

fn config_roundtrip() -> Result<Option<String>> {
    let mut c = RunConfig::default();
    c.set("mu", "37.5")?;
    c.set("fit_hs", "1,0.5")?;
    let back = RunConfig::parse(&c.to_text())?;
    if back.to_text() != c.to_text() {
        return Ok(Some("text differs after a round trip".to_string()));
    }
    Ok(c.set("no_such_key", "1")
        .is_ok()
        .then(|| "unknown key accepted".to_string()))
}

fn audit_arithmetic() -> Result<Option<String>> {
    let p = PhysicalParams::new(1.0, 1.0, 0.0, DomainSpec::new(1.0, PI, 8, 8)?)?;
    let input = AuditInput {
        p,
        bc: BcCase::StressFree,
        j1: 1.0,
        j2: 1.0,
        uc: UniversalConstants::default(),
        mu: 1.0,
        h: 0.5,
        rho: None,
    };
    let (r, rho) = compute_r_rho(&input)?;
    let ok = (r - 3.0).abs() < 1e-12 && (rho - 12.0).abs() < 1e-12;
    Ok((!ok).then(|| format!("R = {r}, rho = {rho}, expected 3 and 12")))
}

fn nudging_decay() -> Result<Option<String>> {
    let p = params(10.0)?;
    let u0 = RBState::random(&p, 1.0, 5);
    let interp = ModifiedInterpolant::new(InterpolantKind::parse("lowpass", 0.5)?, p.domain)?;
    let np = NudgeParams::new(50.0, interp)?;
    let sc = SyncConfig {
        t_span: 10.0,
        record_stride: 100,
        ..SyncConfig::default()
    };
    let rep = synchronize_experiment(&u0, &p, StepperConfig::new(0.01)?, &np, &sc)?;
    let c = rep.combined();
    let (first, last) = (c[0], c[c.len() - 1]);
    Ok((!(last < 1e-3 * first)).then(|| format!("error went from {first:.3e} to {last:.3e}")))
}

/// Runs every check, printing one line each; true when all pass.
pub fn run() -> bool {
    let checks: [Check; 5] = [
        ("trilinear antisymmetry", trilinear_antisymmetry),
        ("snapshot round trip", snapshot_roundtrip),
        ("config round trip", config_roundtrip),
        ("audit arithmetic", audit_arithmetic),
        ("nudging decay", nudging_decay),
    ];
    let mut all = true;
    for (name, f) in checks {
        match f() {
            Ok(None) => println!("PASS {name}"),
            Ok(Some(why)) => {
                all = false;
                println!("FAIL {name}: {why}");
            }
            Err(e) => {
                all = false;
                println!("FAIL {name}: {e}");
            }
        }
    }
    all
}
