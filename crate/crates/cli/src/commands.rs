//! One function per subcommand. Each resolves its parameters (recording
//! every default it fills in), runs the computation and returns the
//! artifacts without touching the disk.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use bzl_core::dynamics::{
    auto_cell_count, default_time_step, evolve as integrate, periodicity_classify, periodicity_classify_samples,
    LatticeState, DEFAULT_PERIODICITY_TOL, SAMPLES_PER_PERIOD,
};
use bzl_core::lattice::{ModelKind, ModelSpec};
use bzl_core::spectrum::{
    ladder_mismatch, sweep_delta, theta_exact, theta_wkb, ws_ladder_eigenvalues, DeltaRange, KGrid, SweepCurve,
    SweepOptions, DEFAULT_EPS_FLOOR, DEFAULT_K_POINTS, DEFAULT_MAX_DENSE_CELLS,
};
use bzl_core::walk::{
    qw_band_collapse_check, qw_continuum_check, qw_continuum_sweeps, qw_evolve, qw_pt_threshold, qw_quasi_energy,
    qw_static_band_spread, qw_sweep_delta, QwParams, QwState, FLATNESS_TOL,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{ClassifyArgs, EvolutionArgs, Figure, ModelArgs, NumericsArgs, WalkArgs};
use crate::error::{config_err, CliResult};
use crate::expr::{eval_expr, parse_range, parse_single};
use crate::output::{complex, Artifact, Csv, Field, Outcome};

pub const DEFAULT_K_TOL: f64 = 1e-9;
pub const DEFAULT_DIAG_CELLS: usize = 200;
pub const DEFAULT_N_Q: usize = 64;
pub const DEFAULT_PERIODS: f64 = 10.0;
pub const DEFAULT_TRANSIENT_PERIODS: f64 = 3.0;
pub const DEFAULT_MAP_THRESHOLD: f64 = 1e-12;

fn require<T: Clone>(value: &Option<T>, flag: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| config_err(format!("missing --{flag}")))
}

fn model_kind(m: &ModelArgs) -> CliResult<ModelKind> {
    Ok(require(&m.model, "model")?.parse()?)
}

fn model_at(m: &ModelArgs, delta: f64, out: &mut Outcome) -> CliResult<ModelSpec> {
    let spec = ModelSpec::new(model_kind(m)?, require(&m.t1, "t1")?, require(&m.t2, "t2")?, delta)?;
    out.param("model", spec.kind.to_string());
    out.param("t1", spec.t1);
    out.param("t2", spec.t2);
    Ok(spec)
}

fn single_model(m: &ModelArgs, out: &mut Outcome) -> CliResult<ModelSpec> {
    let delta = parse_single(&require(&m.delta, "delta")?, "delta")?;
    out.param("delta", delta);
    model_at(m, delta, out)
}

fn force(m: &ModelArgs, out: &mut Outcome) -> CliResult<f64> {
    let f = require(&m.force, "force")?;
    if !(f.is_finite() && f > 0.0) {
        return Err(config_err(format!("--force must be > 0, got {f}")));
    }
    out.param("force", f);
    Ok(f)
}

fn range(text: &Option<String>, out: &mut Outcome) -> CliResult<DeltaRange> {
    let r = parse_range(&require(text, "delta")?)?;
    out.param(
        "delta_range",
        json!({ "min": r.min, "max": r.max, "points": r.n_steps }),
    );
    Ok(r)
}

fn k_grid(n: &NumericsArgs, out: &mut Outcome) -> KGrid {
    let grid = KGrid {
        n_k: n.n_k.unwrap_or(DEFAULT_K_POINTS),
        tol: n.k_tol.unwrap_or(DEFAULT_K_TOL),
        ..KGrid::default()
    };
    out.param("n_k", grid.n_k);
    out.param("k_tol", grid.tol);
    out.param("max_n_k", grid.max_n_k);
    grid
}

fn eps_floor(n: &NumericsArgs, out: &mut Outcome) -> f64 {
    let eps = n.eps_floor.unwrap_or(DEFAULT_EPS_FLOOR);
    out.param("eps_floor", eps);
    eps
}

fn walk_at(w: &WalkArgs, delta: f64, out: &mut Outcome) -> CliResult<QwParams> {
    let beta1 = eval_expr(&require(&w.beta1, "beta1")?)?;
    let beta2 = eval_expr(&require(&w.beta2, "beta2")?)?;
    let p = QwParams::new(beta1, beta2, delta, require(&w.m, "m")?)?;
    out.param("beta1", p.beta1);
    out.param("beta2", p.beta2);
    out.param("m", p.m);
    Ok(p)
}

fn single_walk(w: &WalkArgs, out: &mut Outcome) -> CliResult<QwParams> {
    let delta = parse_single(&require(&w.delta, "delta")?, "delta")?;
    out.param("delta", delta);
    walk_at(w, delta, out)
}

fn threshold_json(t: bzl_core::Result<f64>) -> Value {
    t.map_or(Value::Null, Value::from)
}

fn sweep_csv(curve: &SweepCurve) -> Csv {
    let mut csv = Csv::new(&["delta", "re_theta", "im_theta", "re_theta_wkb", "im_theta_wkb"]);
    for p in &curve.points {
        csv.row([
            p.delta.into(),
            p.theta.re.into(),
            p.theta.im.into(),
            p.theta_wkb.map(|z| z.re).into(),
            p.theta_wkb.map(|z| z.im).into(),
        ]);
    }
    csv
}

fn report_curve(out: &mut Outcome, curve: &SweepCurve) {
    out.report("classification", curve.classification);
    out.report("transition", curve.transition);
    out.report("points", curve.points.len());
    let max_im = curve.points.iter().map(|p| p.theta.im).fold(0.0, f64::max);
    out.report("max_im_theta", max_im);
}

pub fn spectrum(m: &ModelArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let spec = single_model(m, &mut out)?;
    let f = force(m, &mut out)?;
    let res = theta_exact(&spec, f, k_grid(n, &mut out))?;
    out.report("theta", complex(res.theta));
    out.report("phi", complex(res.phi));
    out.report("period_t1", res.t1);
    out.report("period_t2", res.t2);
    out.report("n_k_used", res.n_k);
    out.report("pt_threshold", spec.pt_threshold());
    out.report("complex", res.theta.im > 0.0);
    Ok(out)
}

pub fn wkb(m: &ModelArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let spec = single_model(m, &mut out)?;
    let n_k = n.n_k.unwrap_or(DEFAULT_K_POINTS);
    out.param("n_k", n_k);
    let w = theta_wkb(&spec, n_k)?;
    out.report("theta_wkb", complex(w.theta));
    out.report("min_integrand", w.min_integrand);
    out.report("branch_warning", w.branch_warning);
    Ok(out)
}

pub fn ws_diag(m: &ModelArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let spec = single_model(m, &mut out)?;
    let f = force(m, &mut out)?;
    let n_cells = n.n_cells.unwrap_or(DEFAULT_DIAG_CELLS);
    let max_cells = n.max_cells.unwrap_or(DEFAULT_MAX_DENSE_CELLS);
    out.param("n_cells", n_cells);
    out.param("max_cells", max_cells);
    let eigs = ws_ladder_eigenvalues(&spec, f, n_cells, max_cells)?;
    let theta = theta_exact(&spec, f, k_grid(n, &mut out))?.theta;
    let mut csv = Csv::new(&["re", "im", "edge_weight", "interior"]);
    for e in &eigs {
        csv.row([
            e.value.re.into(),
            e.value.im.into(),
            e.edge_weight.into(),
            Field::Int(e.interior as i64),
        ]);
    }
    out.artifacts.push(Artifact::csv("eigenvalues.csv", csv));
    out.report("eigenvalues", eigs.len());
    out.report("interior", eigs.iter().filter(|e| e.interior).count());
    out.report("theta_exact", complex(theta));
    out.report("ladder_mismatch", ladder_mismatch(&eigs, theta, f));
    Ok(out)
}

pub fn sweep(m: &ModelArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let r = range(&m.delta, &mut out)?;
    let spec = model_at(m, r.min, &mut out)?;
    let f = force(m, &mut out)?;
    let opts = SweepOptions {
        grid: k_grid(n, &mut out),
        with_wkb: !n.no_wkb,
        eps_floor: eps_floor(n, &mut out),
    };
    out.param("wkb", opts.with_wkb);
    if opts.with_wkb {
        out.param("n_k_wkb", opts.grid.n_k);
    }
    let curve = sweep_delta(&spec, r, f, opts)?;
    report_curve(&mut out, &curve);
    out.report("pt_threshold", spec.pt_threshold());
    out.artifacts.push(Artifact::csv("sweep.csv", sweep_csv(&curve)));
    Ok(out)
}

fn transient_and_tol(e: &EvolutionArgs, out: &mut Outcome) -> CliResult<(f64, f64)> {
    let transient = e.transient.unwrap_or(DEFAULT_TRANSIENT_PERIODS);
    let tol = e.tol.unwrap_or(DEFAULT_PERIODICITY_TOL);
    if !(transient >= 0.0 && tol > 0.0) {
        return Err(config_err("--transient must be >= 0 and --tol > 0"));
    }
    out.param("transient_periods", transient);
    out.param("tol", tol);
    Ok((transient, tol))
}

/// Classification result, or `null` plus a reason when the trace does not
/// meet the classifier's preconditions.
fn classification_report(
    out: &mut Outcome,
    result: bzl_core::Result<bzl_core::dynamics::PeriodicityReport>,
) -> CliResult<()> {
    match result {
        Ok(rep) => {
            out.report("classification", rep.kind);
            out.report("mismatch", rep.mismatch);
            out.report("windows", rep.windows);
        }
        Err(e) if e.is_numerical_guard() => return Err(e.into()),
        Err(e) => {
            log::warn!("trace not classified: {e}");
            out.report("classification", Value::Null);
            out.report("classification_error", e.to_string());
        }
    }
    Ok(())
}

pub fn evolve(m: &ModelArgs, n: &NumericsArgs, e: &EvolutionArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let spec = single_model(m, &mut out)?;
    let f = force(m, &mut out)?;
    let t1 = 2.0 * PI / f;
    let n_cells = match n.n_cells {
        Some(c) => c,
        None => auto_cell_count(&spec, f)?,
    };
    let n0 = -((n_cells / 2) as i64);
    let op = spec.real_space_hamiltonian(f, n_cells, n0)?;
    let (dt, sample_every) = match (e.dt, e.sample_every) {
        (None, None) => default_time_step(&op, f)?,
        (None, Some(s)) => (default_time_step(&op, f)?.0, s),
        (Some(dt), s) => (
            dt,
            s.unwrap_or_else(|| ((t1 / (SAMPLES_PER_PERIOD as f64 * dt)).round() as usize).max(1)),
        ),
    };
    let t_end = match (e.t_end, e.periods) {
        (Some(t), _) => t,
        (None, p) => p.unwrap_or(DEFAULT_PERIODS) * t1,
    };
    let revival_cell = e.revival_offset.unwrap_or(0);
    let (transient, tol) = transient_and_tol(e, &mut out)?;
    out.param("n_cells", n_cells);
    out.param("n0", n0);
    out.param("dt", dt);
    out.param("sample_every", sample_every);
    out.param("t_end", t_end);
    out.param("revival_offset", revival_cell);

    let init = LatticeState::centered_excitation(n_cells)?;
    let traj = integrate(&spec, f, init, t_end, dt, sample_every, revival_cell)?;

    let mut map = Csv::new(&["t", "n", "sublattice", "abs_normalized_amplitude"]);
    for (i, &t) in traj.times.iter().enumerate() {
        for (j, &cell) in traj.cells.iter().enumerate() {
            map.row([t.into(), cell.into(), Field::Text("A"), traj.abs_a[i][j].into()]);
            map.row([t.into(), cell.into(), Field::Text("B"), traj.abs_b[i][j].into()]);
        }
    }
    let mut revival = Csv::new(&["t", "A", "log_amp"]);
    for ((&t, &a), &l) in traj.times.iter().zip(&traj.revival).zip(&traj.log_amp) {
        revival.row([t.into(), a.into(), l.into()]);
    }
    out.artifacts.push(Artifact::csv("trajectory.csv", map));
    out.artifacts.push(Artifact::csv("revival.csv", revival));

    classification_report(
        &mut out,
        periodicity_classify(&traj.revival, traj.sample_interval(), t1, transient * t1, tol),
    )?;
    out.report("period_t1", t1);
    out.report("samples", traj.times.len());
    out.report("final_log_amp", traj.log_amp.last().copied());
    out.report("growth_rate_last_period", traj.growth_rate(t1).ok());
    Ok(out)
}

/// First two numeric columns of a CSV file (header optional).
fn read_series(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(config_err(format!(
                "{}:{}: expected at least two columns",
                path.display(),
                i + 1
            )));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => {}
            _ => return Err(config_err(format!("{}:{}: non-numeric value", path.display(), i + 1))),
        }
    }
    Ok((xs, ys))
}

pub fn classify(c: &ClassifyArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let (xs, ys) = read_series(&c.input)?;
    let transient = c.transient.unwrap_or(DEFAULT_TRANSIENT_PERIODS);
    let tol = c.tol.unwrap_or(DEFAULT_PERIODICITY_TOL);
    out.param("input", c.input.display().to_string());
    out.param("transient_periods", transient);
    out.param("tol", tol);
    out.param("samples", ys.len());
    let result = match (c.force, c.m) {
        (Some(f), None) => {
            if !(f.is_finite() && f > 0.0) {
                return Err(config_err(format!("--force must be > 0, got {f}")));
            }
            if xs.len() < 2 {
                return Err(config_err("need at least two samples"));
            }
            let dt = xs[1] - xs[0];
            if xs
                .windows(2)
                .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0))
            {
                return Err(config_err("time column is not uniformly spaced"));
            }
            out.param("force", f);
            let t1 = 2.0 * PI / f;
            periodicity_classify(&ys, dt, t1, transient * t1, tol)
        }
        (None, Some(m)) => {
            out.param("m", m);
            let m = m as usize;
            periodicity_classify_samples(&ys, m, (transient * m as f64).round() as usize, tol)
        }
        _ => return Err(config_err("give exactly one of --force or --m")),
    };
    let rep = result?;
    out.report("classification", rep.kind);
    out.report("mismatch", rep.mismatch);
    out.report("windows", rep.windows);
    Ok(out)
}

fn n_q(n: &NumericsArgs, out: &mut Outcome) -> usize {
    let n_q = n.n_q.unwrap_or(DEFAULT_N_Q);
    out.param("n_q", n_q);
    n_q
}

pub fn qw_spectrum(w: &WalkArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let p = single_walk(w, &mut out)?;
    let n_q = n_q(n, &mut out);
    if n_q < 16 {
        return Err(config_err(format!("--n-q must be >= 16, got {n_q}")));
    }
    let qs: Vec<f64> = (0..n_q).map(|j| -PI + 2.0 * PI * j as f64 / n_q as f64).collect();
    let thetas: Vec<_> = qs.par_iter().map(|&q| qw_quasi_energy(q, &p)).collect();
    let mut csv = Csv::new(&["q", "re_theta", "im_theta"]);
    for (q, t) in qs.iter().zip(&thetas) {
        csv.row([(*q).into(), t.re.into(), t.im.into()]);
    }
    out.artifacts.push(Artifact::csv("qw_spectrum.csv", csv));
    out.report("theta", complex(qw_quasi_energy(0.0, &p)));
    out.report("force", p.force());
    out.report("band_spread", qw_band_collapse_check(&p, n_q)?);
    out.report("pt_threshold", threshold_json(qw_pt_threshold(p.beta1, p.beta2)));
    Ok(out)
}

pub fn qw_sweep(w: &WalkArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let r = range(&w.delta, &mut out)?;
    let p = walk_at(w, r.min, &mut out)?;
    let curve = qw_sweep_delta(&p, r, eps_floor(n, &mut out))?;
    report_curve(&mut out, &curve);
    out.report("pt_threshold", threshold_json(qw_pt_threshold(p.beta1, p.beta2)));
    out.artifacts.push(Artifact::csv("sweep.csv", sweep_csv(&curve)));
    Ok(out)
}

pub fn qw_evolve_cmd(w: &WalkArgs, e: &EvolutionArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let p = single_walk(w, &mut out)?;
    let m = p.m as usize;
    let steps = e.steps.unwrap_or(10 * m);
    let site = e.revival_offset.unwrap_or(0);
    let threshold = e.map_threshold.unwrap_or(DEFAULT_MAP_THRESHOLD);
    let (transient, tol) = transient_and_tol(e, &mut out)?;
    let n_max = QwState::n_max_for(steps) + site.unsigned_abs() as usize;
    out.param("steps", steps);
    out.param("n_max", n_max);
    out.param("revival_offset", site);
    out.param("map_threshold", threshold);

    let tr = qw_evolve(&p, QwState::single_pulse(n_max, 0)?, steps, site, true)?;
    let keep: Vec<usize> = (0..tr.sites.len())
        .filter(|&i| {
            tr.u_abs
                .iter()
                .zip(&tr.v_abs)
                .any(|(u, v)| u[i] > threshold || v[i] > threshold)
        })
        .collect();
    let mut map = Csv::new(&["m", "n", "abs_u", "abs_v"]);
    for (k, &step) in tr.steps.iter().enumerate() {
        for &i in &keep {
            map.row([
                step.into(),
                tr.sites[i].into(),
                tr.u_abs[k][i].into(),
                tr.v_abs[k][i].into(),
            ]);
        }
    }
    let mut rec = Csv::new(&["m", "A_m", "log_amp"]);
    for ((&step, &a), &l) in tr.steps.iter().zip(&tr.recurrence).zip(&tr.log_amp) {
        rec.row([step.into(), a.into(), l.into()]);
    }
    out.artifacts.push(Artifact::csv("qw_trajectory.csv", map));
    out.artifacts.push(Artifact::csv("recurrence.csv", rec));
    classification_report(
        &mut out,
        periodicity_classify_samples(&tr.recurrence, m, (transient * m as f64).round() as usize, tol),
    )?;
    out.report("theta", complex(qw_quasi_energy(0.0, &p)));
    out.report("final_log_amp", tr.log_amp.last().copied());
    Ok(out)
}

pub fn qw_flatness(w: &WalkArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let p = single_walk(w, &mut out)?;
    let n_q = n_q(n, &mut out);
    let spread = qw_band_collapse_check(&p, n_q)?;
    out.report("band_spread", spread);
    out.report("static_band_spread", qw_static_band_spread(&p, n_q)?);
    out.report("flat", spread < FLATNESS_TOL);
    out.report("flatness_tol", FLATNESS_TOL);
    Ok(out)
}

pub fn continuum_check(m: &ModelArgs, n: &NumericsArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    if let Some(kind) = &m.model {
        if kind.parse::<ModelKind>()? != ModelKind::RiceMele {
            return Err(config_err("continuum-check compares against the rice-mele model"));
        }
    }
    let t1 = require(&m.t1, "t1")?;
    let t2 = require(&m.t2, "t2")?;
    out.param("t1", t1);
    out.param("t2", t2);
    let f = force(m, &mut out)?;
    let r = range(&m.delta, &mut out)?;
    if r.n_steps == 1 {
        let c = qw_continuum_check(t1, t2, r.min, f)?;
        out.param(
            "walk",
            json!({ "beta1": c.params.beta1, "beta2": c.params.beta2, "m": c.params.m }),
        );
        out.report("force_continuum", c.force_continuum);
        out.report("theta_walk", complex(c.theta_qw));
        out.report("theta_rice_mele", complex(c.theta_rice_mele));
        out.report("im_difference", (c.theta_qw.im - c.theta_rice_mele.im).abs());
        return Ok(out);
    }
    let eps = eps_floor(n, &mut out);
    let (qw, rm) = qw_continuum_sweeps(t1, t2, f, r, eps)?;
    let mut csv = Csv::new(&[
        "delta",
        "re_theta_walk",
        "im_theta_walk",
        "re_theta_rice_mele",
        "im_theta_rice_mele",
    ]);
    for (a, b) in qw.points.iter().zip(&rm.points) {
        csv.row([
            a.delta.into(),
            a.theta.re.into(),
            a.theta.im.into(),
            b.theta.re.into(),
            b.theta.im.into(),
        ]);
    }
    out.artifacts.push(Artifact::csv("continuum.csv", csv));
    out.report(
        "walk",
        json!({ "classification": qw.classification, "transition": qw.transition }),
    );
    out.report(
        "rice_mele",
        json!({ "classification": rm.classification, "transition": rm.transition }),
    );
    let rel = match (qw.transition, rm.transition) {
        (Some(a), Some(b)) if b > 0.0 => Some((a - b).abs() / b),
        _ => None,
    };
    out.report("transition_relative_difference", rel);
    Ok(out)
}

fn preset_model(kind: &str, t1: f64, delta: &str, force: f64) -> ModelArgs {
    ModelArgs {
        model: Some(kind.into()),
        t1: Some(t1),
        t2: Some(1.0),
        delta: Some(delta.into()),
        force: Some(force),
    }
}

fn preset_walk(delta: &str, m: u32) -> WalkArgs {
    WalkArgs {
        beta1: Some(format!("{:?}", FRAC_PI_2 - 0.1)),
        beta2: Some(format!("{:?}", FRAC_PI_2 - 0.15)),
        delta: Some(delta.into()),
        m: Some(m),
    }
}

/// Figure presets; each panel's files are prefixed with its label.
pub fn repro(figure: Figure) -> CliResult<Outcome> {
    let numerics = NumericsArgs::default();
    let evolution = EvolutionArgs::default();
    let (kind, t1) = match figure {
        Figure::Fig1b | Figure::Fig1cd => ("model1", 0.2),
        _ => ("rice-mele", 0.4),
    };
    let parts: Vec<(String, Outcome)> = match figure {
        Figure::Fig1b | Figure::Fig2b => [0.2, 0.02]
            .into_iter()
            .map(|f| {
                Ok((
                    format!("F{f}"),
                    sweep(&preset_model(kind, t1, "0:1.2:120", f), &numerics)?,
                ))
            })
            .collect::<CliResult<_>>()?,
        Figure::Fig1cd | Figure::Fig2cd => ["0.4", "0.7"]
            .into_iter()
            .map(|d| {
                Ok((
                    format!("delta{d}"),
                    evolve(&preset_model(kind, t1, d, 0.2), &numerics, &evolution)?,
                ))
            })
            .collect::<CliResult<_>>()?,
        Figure::Fig3a => [61, 102]
            .into_iter()
            .map(|m| Ok((format!("M{m}"), qw_sweep(&preset_walk("0:0.1:100", m), &numerics)?)))
            .collect::<CliResult<_>>()?,
        Figure::Fig3bc => ["0.036", "0.06"]
            .into_iter()
            .map(|d| {
                let e = EvolutionArgs {
                    steps: Some(610),
                    ..Default::default()
                };
                Ok((format!("delta{d}"), qw_evolve_cmd(&preset_walk(d, 61), &e)?))
            })
            .collect::<CliResult<_>>()?,
    };
    let mut out = Outcome::combine(parts);
    out.param("figure", format!("{figure:?}").to_lowercase());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(delta: &str) -> ModelArgs {
        ModelArgs {
            model: Some("model1".into()),
            t1: Some(0.2),
            t2: Some(1.0),
            delta: Some(delta.into()),
            force: Some(0.2),
        }
    }

    #[test]
    fn missing_parameters_are_config_errors() {
        let m = ModelArgs {
            t1: None,
            ..model("0.7")
        };
        let e = spectrum(&m, &NumericsArgs::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("--t1"));
    }

    #[test]
    fn single_value_commands_reject_ranges() {
        assert_eq!(
            spectrum(&model("0:1:4"), &NumericsArgs::default())
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn spectrum_records_defaults() {
        let out = spectrum(&model("0.4"), &NumericsArgs::default()).unwrap();
        assert_eq!(out.params["n_k"], DEFAULT_K_POINTS);
        assert_eq!(out.params["k_tol"], DEFAULT_K_TOL);
        assert!(out.summary["theta"]["im"].as_f64().unwrap() < 1e-6);
    }

    #[test]
    fn sweep_without_wkb_leaves_columns_empty() {
        let n = NumericsArgs {
            no_wkb: true,
            ..Default::default()
        };
        let out = sweep(&model("0:1.2:12"), &n).unwrap();
        let csv = &out.artifacts[0].contents;
        assert_eq!(csv.lines().count(), 14);
        assert!(csv.lines().nth(1).unwrap().ends_with(",,"));
    }

    #[test]
    fn reads_series_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "t,A\n0,1\n0.5,0.25\n").unwrap();
        assert_eq!(read_series(&p).unwrap(), (vec![0.0, 0.5], vec![1.0, 0.25]));
        std::fs::write(&p, "0,1\n1,2\n").unwrap();
        assert_eq!(read_series(&p).unwrap().1, vec![1.0, 2.0]);
        std::fs::write(&p, "t,A\n0,x\n").unwrap();
        assert!(read_series(&p).is_err());
    }

    #[test]
    fn classify_needs_exactly_one_period_source() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "0,1\n1,1\n").unwrap();
        let c = ClassifyArgs {
            input: p,
            force: None,
            m: None,
            transient: None,
            tol: None,
        };
        assert_eq!(classify(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn walk_quasi_energy_table() {
        let w = WalkArgs {
            beta1: Some("pi/2-0.1".into()),
            beta2: Some("pi/2-0.15".into()),
            delta: Some("0.06".into()),
            m: Some(61),
        };
        let out = qw_spectrum(
            &w,
            &NumericsArgs {
                n_q: Some(16),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.artifacts[0].contents.lines().count(), 17);
        assert!(out.summary["band_spread"].as_f64().unwrap() < FLATNESS_TOL);
    }
}
