use std::fs;
use std::path::{Path, PathBuf};

use rbdf_core::audit::{check_conditions, suggest_mu_h};
use rbdf_core::determining::{
    beta_path, find_zeros, norm_x, record_reference, recover_solution, w_map, BetaConfig,
    BetaFunction, DetformContext, SpinUpConfig,
};
use rbdf_core::interp::{fit_constants, ModifiedInterpolant};
use rbdf_core::io::{write_csv, write_csv_body, RunConfig, Snapshot};
use rbdf_core::nudging::{synchronize_experiment, NudgeParams, SyncConfig};
use rbdf_core::solver::{
    estimate_attractor_bounds, simulate as run_simulation, PhysicalParams, RBState, Stepper,
};
use rbdf_core::spectral::{norm_h2, norm_l2, norm_v0, norm_v1};
use rbdf_core::{Error, Result};

fn out_dir(c: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&c.out);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn snapshot_name(dir: &Path, prefix: &str, t: f64, every: f64) -> PathBuf {
    dir.join(format!("{prefix}_{:06}.bin", (t / every).round() as i64))
}

/// Initial data: a snapshot if `init` is set, otherwise seeded random data.
fn initial_state(c: &RunConfig, p: &PhysicalParams) -> Result<RBState> {
    match &c.init {
        Some(path) => {
            let (sp, state) = Snapshot::load(Path::new(path))?.to_state()?;
            if sp.domain != p.domain || sp.nu != p.nu || sp.kappa != p.kappa || sp.g != p.g {
                return Err(Error::Config(format!(
                    "snapshot {path} does not match the configured parameters"
                )));
            }
            Ok(state)
        }
        None => Ok(RBState::random(p, c.amplitude, c.seed)),
    }
}

/// A state on (or near) the attractor at time 0: the initial data advanced
/// through the burn-in.
fn reference_start(c: &RunConfig, p: &PhysicalParams) -> Result<RBState> {
    let s0 = initial_state(c, p)?;
    let mut u0 = if c.burn_in > 0.0 {
        let t_end = s0.t + c.burn_in;
        run_simulation(&s0, p, c.stepper()?, t_end, c.burn_in)?
            .pop()
            .expect("nonempty run")
    } else {
        s0
    };
    u0.t = 0.0;
    Ok(u0)
}

/// Snapshots every `sample_every`; the run continues from the state read
/// back from each snapshot, so a restart reproduces it bit for bit.
pub fn simulate(c: &RunConfig) -> Result<()> {
    let p = c.physical()?;
    let stepper = Stepper::new(p, c.stepper()?)?;
    let dir = out_dir(c)?;
    let mut state = initial_state(c, &p)?;
    let restart = c.init.is_some();
    if !(c.t_end > state.t) {
        return Err(Error::Config(format!(
            "t_end = {} must exceed the initial time {}",
            c.t_end, state.t
        )));
    }
    let stride = stepper.steps_for(c.sample_every).max(1);
    let n = stepper.steps_for(c.t_end - state.t);
    let mut rows = Vec::new();
    let mut record = |s: &RBState, write: bool| -> Result<RBState> {
        rows.push(vec![
            s.t,
            norm_l2(&s.u),
            norm_v0(&s.u),
            norm_l2(&s.theta),
            norm_v1(&s.theta),
        ]);
        if !write {
            return Ok(s.clone());
        }
        let snap = Snapshot::from_state(s, &p);
        snap.save(&snapshot_name(&dir, "snap", s.t, c.sample_every))?;
        Ok(snap.to_state()?.1)
    };
    state = record(&state, !restart)?;
    for k in 1..=n {
        stepper.step(&mut state)?;
        if k % stride == 0 || k == n {
            state = record(&state, true)?;
        }
    }
    write_csv(
        &dir.join("energy.csv"),
        "simulate",
        &["t", "u_l2", "u_v0", "theta_l2", "theta_h1"],
        &rows,
    )?;
    println!(
        "simulated to t = {:.6}, {} records in {}",
        state.t,
        rows.len(),
        dir.display()
    );
    Ok(())
}

fn nudge_params(c: &RunConfig, p: &PhysicalParams) -> Result<NudgeParams> {
    let interp = ModifiedInterpolant::new(c.interpolant()?, p.domain)?;
    let mut np = NudgeParams::new(c.mu, interp)?;
    np.fold_lowpass = c.fold_lowpass;
    Ok(np)
}

pub fn nudge(c: &RunConfig) -> Result<()> {
    let p = c.physical()?;
    let np = nudge_params(c, &p)?;
    let u0 = reference_start(c, &p)?;
    let sc = SyncConfig {
        t_span: c.t_end,
        record_stride: c.record_stride,
        ..SyncConfig::default()
    };
    let rep = synchronize_experiment(&u0, &p, c.stepper()?, &np, &sc)?;
    let dir = out_dir(c)?;
    let comb = rep.combined();
    let rows: Vec<Vec<f64>> = (0..rep.t.len())
        .map(|k| {
            vec![
                rep.t[k],
                rep.err_v0[k],
                rep.err_l2_theta[k],
                rep.err_h1_theta[k],
                comb[k],
            ]
        })
        .collect();
    write_csv(
        &dir.join("sync.csv"),
        "nudge",
        &["t", "err_v0", "err_l2_theta", "err_h1_theta", "combined"],
        &rows,
    )?;
    let (ev, el, eh) = rep.final_errors();
    println!("modes retained: {}", np.interp.packed_len() / 2);
    println!("final errors: v0 {ev:.3e}, theta l2 {el:.3e}, theta h1 {eh:.3e}");
    println!(
        "decay factor {:.3e}, fitted rate {:.4} on [{:.2}, {:.2}]",
        rep.decay_factor, rep.rate, rep.fit_window.0, rep.fit_window.1
    );
    Ok(())
}

fn context(c: &RunConfig, p: &PhysicalParams) -> Result<DetformContext> {
    Ok(DetformContext {
        p: *p,
        np: nudge_params(c, p)?,
        cfg: c.stepper()?,
        spin: c.spin()?,
    })
}

pub fn wmap(c: &RunConfig) -> Result<()> {
    let p = c.physical()?;
    let ctx = context(c, &p)?;
    let u0 = reference_start(c, &p)?;
    let reference = record_reference(&u0, &p, ctx.cfg, c.span, ctx.np.interp.clone(), usize::MAX)?;
    let v = &reference.projected;
    let every = ctx.cfg.dt * (1.0 / ctx.cfg.dt).round().max(1.0);
    let spin = SpinUpConfig {
        record_stride: (every / v.dt_sample).round() as usize,
        ..ctx.spin
    };
    let w = w_map(v, &p, &ctx.np, ctx.cfg, &spin)?;
    let norms = w.norms(&p)?;
    let q = w.q(v, &p);
    let vx = norm_x(v, &p);
    let dir = out_dir(c)?;
    let rows: Vec<Vec<f64>> = (0..w.series.w_v0.len())
        .map(|k| {
            let s = &w.series;
            vec![
                w.projected.time(k),
                s.w_v0[k],
                s.w_a0_sq[k],
                s.eta_h1[k],
                s.eta_a1_sq[k],
            ]
        })
        .collect();
    write_csv(
        &dir.join("wmap_norms.csv"),
        "wmap",
        &["t", "w_v0", "w_a0_sq", "eta_h1", "eta_a1_sq"],
        &rows,
    )?;
    for s in &w.records {
        Snapshot::from_state(s, &p).save(&snapshot_name(&dir, "w", s.t, every))?;
    }
    println!(
        "tail starts at t = {:.4} (stationarity defect {:.3e}, tolerance {:.3e})",
        v.time(w.tail_start),
        w.defect,
        w.tolerance
    );
    println!(
        "||v||_X = {vx:.6e}, ||v - I_h W(v)||_X = {q:.3e} (relative {:.3e})",
        q / vx
    );
    println!(
        "||W(v)||_Y = {:.6e}, ||eta||_Z = {:.6e}, ||I_h W(v)||_X = {:.6e}",
        norms.y, norms.z, norms.x
    );
    Ok(())
}

pub fn detform(c: &RunConfig) -> Result<()> {
    let p = c.physical()?;
    let ctx = context(c, &p)?;
    let u0 = reference_start(c, &p)?;
    let reference = record_reference(
        &u0,
        &p,
        ctx.cfg,
        c.span,
        ctx.np.interp.clone(),
        c.record_stride,
    )?;
    let v0 = reference.projected.scaled(c.beta_scale);
    // Ball check against R built from the reference run's own bounds.
    let j1 = reference
        .records
        .iter()
        .map(|s| norm_v0(&s.u))
        .fold(0.0, f64::max);
    let j2 = reference
        .records
        .iter()
        .map(|s| norm_h2(&s.u))
        .fold(0.0, f64::max);
    if j1 > 0.0 && j2 > 0.0 {
        if let Ok((r, _)) = rbdf_core::audit::compute_r_rho(&c.audit_input(j1, j2)?) {
            let x = norm_x(&v0, &p);
            if x > 3.0 * r {
                log::warn!("||v0||_X = {x:.3e} lies outside the 3R ball (R = {r:.3e})");
            }
        }
    }
    let bf = BetaFunction::new(&v0, &ctx);
    let bc = BetaConfig {
        s_span: c.s_span,
        ode_ds: c.ode_ds,
        grid_intervals: c.beta_grid,
        rate_tolerance: c.rate_tolerance,
    };
    let dir = out_dir(c)?;
    let path = beta_path(&bf, &bc)?;
    let rows: Vec<Vec<f64>> = path.states.iter().map(|s| vec![s.s, s.beta, s.f]).collect();
    write_csv(
        &dir.join("detform.csv"),
        "detform",
        &["s", "beta", "f"],
        &rows,
    )?;
    let end = path.states.last().expect("nonempty path");
    println!(
        "beta({:.3}) = {:.6}, |dbeta/ds| = {:.3e}, {} W evaluations",
        end.s,
        end.beta,
        path.final_rate,
        bf.evaluations()
    );
    let roots = find_zeros(&bf, c.beta_grid, c.zero_tol, c.beta_tol)?;
    for r in &roots {
        println!("root: beta = {:.6} (f = {:.3e})", r.beta, r.f);
    }
    if roots.is_empty() {
        println!("no nontrivial zero of f on (0, 1]");
    }
    if let Some(r) = roots.last() {
        let every = (1.0 / ctx.cfg.dt).round().max(1.0) as usize;
        let spin = SpinUpConfig {
            record_stride: every,
            ..ctx.spin
        };
        let v = v0.scaled(r.beta);
        match recover_solution(&v, &p, &ctx.np, ctx.cfg, &spin, c.steady_tolerance) {
            Ok(w) => {
                for s in &w.records {
                    Snapshot::from_state(s, &p).save(&snapshot_name(
                        &dir,
                        "recovered",
                        s.t,
                        ctx.cfg.dt * every as f64,
                    ))?;
                }
                println!(
                    "recovered {} states from the steady state at beta = {:.6}",
                    w.records.len(),
                    r.beta
                );
            }
            Err(e) => log::warn!("recovery at beta = {:.6} failed: {e}", r.beta),
        }
    }
    if path.final_rate > c.rate_tolerance {
        return Err(Error::NoConvergence {
            rate: path.final_rate,
        });
    }
    Ok(())
}

pub fn audit(c: &RunConfig) -> Result<()> {
    let p = c.physical()?;
    let (j1, j2) = match (c.j1, c.j2) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let b = estimate_attractor_bounds(
                &p,
                c.stepper()?,
                c.burn_in,
                c.burn_in + c.horizon,
                c.seed,
            )?;
            println!(
                "estimated attractor bounds on [{}, {}]: J1 = {:.6e}, J2 = {:.6e}",
                b.window.0, b.window.1, b.j1, b.j2
            );
            (c.j1.unwrap_or(b.j1), c.j2.unwrap_or(b.j2))
        }
    };
    let input = c.audit_input(j1, j2)?;
    let report = check_conditions(&input)?;
    println!("{}", report.to_text());
    let suggestion = suggest_mu_h(&input);
    if let Ok((mu, h)) = &suggestion {
        println!("suggested: mu = {mu:.6e}, h = {h:.6e}");
    }
    let dir = out_dir(c)?;
    write_csv_body(&dir.join("audit.csv"), "audit", &report.to_csv())?;
    suggestion.map(|_| ())
}

pub fn interp_fit(c: &RunConfig) -> Result<()> {
    let p = c.physical()?;
    let kind = c.interpolant()?;
    let ensemble: Vec<_> = (0..c.fit_members as u64)
        .map(|k| RBState::random(&p, c.amplitude, c.seed + k).u)
        .collect();
    let fit = fit_constants(kind, &ensemble, &c.fit_hs)?;
    let dir = out_dir(c)?;
    let rows: Vec<Vec<f64>> = fit
        .samples
        .iter()
        .map(|s| vec![s.h, s.error, s.term1, s.term2])
        .collect();
    write_csv(
        &dir.join("interp_fit.csv"),
        "interp-fit",
        &["h", "error", "h_norm_h1", "h2_norm_h2"],
        &rows,
    )?;
    println!(
        "{}: c0 = {:.6e}, c1 = {:.6e}, c2 = {:.6e}, max ratio {:.4}",
        kind.name(),
        fit.c0_hat,
        fit.c1_hat,
        fit.c2_hat,
        fit.max_ratio
    );
    Ok(())
}
