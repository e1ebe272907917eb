//! Two-step discrete-time quantum walk of light pulses in two coupled fiber
//! loops, with complex phases
//! `φ₁ = −iΔ/2 + Fm + π/2`, `φ₂ = +iΔ/2 + Fm − π/2` and force `F = 2π/M`.
//!
//! One substep with coupling angle `β` and phase `φ` maps
//!
//! ```text
//! u'_n = (cos β u_{n+1} + i sin β v_{n+1}) e^{−iφ}
//! v'_n = (cos β v_{n−1} + i sin β u_{n−1}) e^{+iφ}
//! ```
//!
//! and for plane waves `(u_n, v_n) = (x, y) e^{iqn}` it acts as
//! `D(q − φ) R(β)` with `D(α) = diag(e^{iα}, e^{−iα})` and
//! `R(β) = [[cos β, i sin β], [i sin β, cos β]]`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::ModelSpec;
use crate::linalg::{floquet_angle_of, ladder_distance, Mat2, C64, I};
use crate::spectrum::{ordered_product_scaled, theta_exact, DeltaRange, KGrid, SweepCurve, SweepPoint};
use crate::{Error, Result};

/// Coupling angles, gain/loss and the force denominator `M` (`F = 2π/M`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QwParams {
    pub beta1: f64,
    pub beta2: f64,
    pub delta: f64,
    pub m: u32,
}

impl QwParams {
    pub fn new(beta1: f64, beta2: f64, delta: f64, m: u32) -> Result<Self> {
        let p = Self { beta1, beta2, delta, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidInput(format!("M must be >= 2, got {}", self.m)));
        }
        if !(self.beta1.is_finite() && self.beta2.is_finite()) {
            return Err(Error::InvalidInput("coupling angles must be finite".into()));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidInput(format!("delta must be >= 0, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn force(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }
}

/// Phases `(φ₁, φ₂)` applied in the two substeps of step `m`.
pub fn qw_phases(m: i64, params: &QwParams) -> (C64, C64) {
    ramp_phases(params.force() * m as f64, params.delta)
}

fn ramp_phases(ramp: f64, delta: f64) -> (C64, C64) {
    (
        C64::new(ramp + FRAC_PI_2, -delta / 2.0),
        C64::new(ramp - FRAC_PI_2, delta / 2.0),
    )
}

fn coin(beta: f64) -> Mat2 {
    let (s, c) = beta.sin_cos();
    Mat2::new(C64::new(c, 0.0), I * s, I * s, C64::new(c, 0.0))
}

fn shift_phase(alpha: C64) -> Mat2 {
    Mat2::diag((I * alpha).exp(), (-I * alpha).exp())
}

fn step_matrix(q: f64, phi1: C64, phi2: C64, beta1: f64, beta2: f64) -> Mat2 {
    shift_phase(q - phi2) * coin(beta2) * shift_phase(q - phi1) * coin(beta1)
}

/// Bloch-space one-step map `U^{(m)}(q)`.
pub fn qw_bloch_step_matrix(q: f64, m: i64, params: &QwParams) -> Mat2 {
    let (phi1, phi2) = qw_phases(m, params);
    step_matrix(q, phi1, phi2, params.beta1, params.beta2)
}

/// Step matrix with the ramp switched off (`F·m ≡ 0`).
pub fn qw_static_step_matrix(q: f64, params: &QwParams) -> Mat2 {
    let (phi1, phi2) = ramp_phases(0.0, params.delta);
    step_matrix(q, phi1, phi2, params.beta1, params.beta2)
}

/// Unforced band energies `±acos(cos β₁ cos β₂ cos 2q + sin β₁ sin β₂ cosh Δ)`,
/// principal branch.
pub fn qw_dispersion_f0(q: f64, params: &QwParams) -> (C64, C64) {
    let arg = params.beta1.cos() * params.beta2.cos() * (2.0 * q).cos()
        + params.beta1.sin() * params.beta2.sin() * params.delta.cosh();
    let e = C64::new(arg, 0.0).acos();
    (e, -e)
}

/// Floquet exponent of the single static step at `q`.
pub fn qw_static_exponent(q: f64, params: &QwParams) -> C64 {
    floquet_angle_of(&qw_static_step_matrix(q, params), 0.0)
}

/// Gain/loss level where the unforced bands turn complex:
/// `|sin β₁ sin β₂| cosh Δc = 1 − |cos β₁ cos β₂|`, or 0 if no positive root.
pub fn qw_pt_threshold(beta1: f64, beta2: f64) -> Result<f64> {
    let s = (beta1.sin() * beta2.sin()).abs();
    if s < 1e-15 {
        return Err(Error::DegenerateCoin);
    }
    let arg = (1.0 - (beta1.cos() * beta2.cos()).abs()) / s;
    Ok(if arg >= 1.0 { arg.acosh() } else { 0.0 })
}

/// Propagator over one force period starting at step `m_start`,
/// `U^{(m_start+M−1)} ⋯ U^{(m_start)}`, as `mantissa · e^{log_scale}`.
pub fn qw_period_propagator(q: f64, m_start: i64, params: &QwParams) -> (Mat2, f64) {
    ordered_product_scaled(params.m as usize, |j| {
        qw_bloch_step_matrix(q, m_start + j as i64, params)
    })
}

/// Quasi-energy `θ(q) = μ/M`, where `e^{±iμ}` are the eigenvalues of the
/// one-period propagator `S = U^{(M)} ⋯ U^{(1)}`.
pub fn qw_quasi_energy(q: f64, params: &QwParams) -> C64 {
    let (s, log) = qw_period_propagator(q, 1, params);
    floquet_angle_of(&s, log) / params.m as f64
}

/// Largest deviation of `θ(q_j)` from `θ(q_0)` on a uniform grid of `n_q`
/// points, with `θ` compared modulo the ladder spacing `F`.
pub fn qw_band_collapse_check(params: &QwParams, n_q: usize) -> Result<f64> {
    if n_q < 16 {
        return Err(Error::InvalidInput(format!("n_q must be >= 16, got {n_q}")));
    }
    let thetas: Vec<C64> = q_grid(n_q)
        .into_par_iter()
        .map(|q| qw_quasi_energy(q, params))
        .collect();
    Ok(spread(&thetas, params.force()))
}

/// Same spread for the unforced walk (single static step); not flat.
pub fn qw_static_band_spread(params: &QwParams, n_q: usize) -> Result<f64> {
    if n_q < 16 {
        return Err(Error::InvalidInput(format!("n_q must be >= 16, got {n_q}")));
    }
    let exps: Vec<C64> = q_grid(n_q).into_iter().map(|q| qw_static_exponent(q, params)).collect();
    Ok(spread(&exps, 2.0 * PI))
}

fn spread(values: &[C64], period: f64) -> f64 {
    values
        .iter()
        .map(|&t| ladder_distance(t, values[0], period))
        .fold(0.0, f64::max)
}

fn q_grid(n_q: usize) -> Vec<f64> {
    (0..n_q).map(|j| -PI + 2.0 * PI * j as f64 / n_q as f64).collect()
}

/// Tolerance for the flatness gate of [`qw_sweep_delta`].
pub const FLATNESS_TOL: f64 = 1e-8;

/// `θ` at `q = 0` over a gain/loss range. Each point is first checked for
/// band collapse on a 16-point q-grid.
pub fn qw_sweep_delta(template: &QwParams, range: DeltaRange, eps_floor: f64) -> Result<SweepCurve> {
    range.validate()?;
    let points = range
        .values()
        .into_par_iter()
        .map(|delta| {
            let p = template.with_delta(delta);
            p.validate()?;
            let flat = qw_band_collapse_check(&p, 16)?;
            if flat > FLATNESS_TOL {
                return Err(Error::Convergence(format!(
                    "quasi-energy band not flat at delta = {delta}: spread {flat:.2e}"
                )));
            }
            Ok(SweepPoint {
                delta,
                theta: qw_quasi_energy(0.0, &p),
                theta_wkb: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepCurve::new(points, eps_floor)
}

/// Pulse amplitudes on sites `n ∈ [−n_max, n_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QwState {
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub n_max: usize,
    /// Steps taken so far; the next step uses phases of step `m + 1`.
    pub m: i64,
    /// True amplitudes are the stored ones times `e^{log_amp}`.
    pub log_amp: f64,
}

impl QwState {
    pub fn zeros(n_max: usize) -> Self {
        let len = 2 * n_max + 1;
        Self {
            u: vec![C64::new(0.0, 0.0); len],
            v: vec![C64::new(0.0, 0.0); len],
            n_max,
            m: 0,
            log_amp: 0.0,
        }
    }

    /// `u_n = δ_{n,site}`, `v = 0`.
    pub fn single_pulse(n_max: usize, site: i64) -> Result<Self> {
        let mut s = Self::zeros(n_max);
        let i = s
            .index(site)
            .ok_or_else(|| Error::InvalidInput(format!("site {site} outside ±{n_max}")))?;
        s.u[i] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Array large enough for `m_end` steps from a pulse at the origin.
    pub fn n_max_for(m_end: usize) -> usize {
        2 * m_end + 4
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn index(&self, n: i64) -> Option<usize> {
        let i = n + self.n_max as i64;
        (0..self.len() as i64).contains(&i).then_some(i as usize)
    }

    pub fn site(&self, i: usize) -> i64 {
        i as i64 - self.n_max as i64
    }

    /// Stored norm `√Σ(|u_n|² + |v_n|²)`.
    pub fn norm(&self) -> f64 {
        self.u.iter().chain(&self.v).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `ln` of the true norm.
    pub fn log_norm(&self) -> f64 {
        self.norm().ln() + self.log_amp
    }

    /// Sites carrying nonzero amplitude, as `(min, max)`.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |i: &usize| self.u[*i] != C64::new(0.0, 0.0) || self.v[*i] != C64::new(0.0, 0.0);
        let lo = (0..self.len()).find(nz)?;
        let hi = (0..self.len()).rev().find(nz)?;
        Some((self.site(lo), self.site(hi)))
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 && !(0.5..=2.0).contains(&n) {
            let inv = 1.0 / n;
            self.u.iter_mut().chain(self.v.iter_mut()).for_each(|z| *z *= inv);
            self.log_amp += n.ln();
        }
    }
}

fn substep(u: &[C64], v: &[C64], beta: f64, phi: C64) -> (Vec<C64>, Vec<C64>) {
    let len = u.len();
    let (s, c) = beta.sin_cos();
    let (eu, ev) = ((-I * phi).exp(), (I * phi).exp());
    let zero = C64::new(0.0, 0.0);
    let mut nu = vec![zero; len];
    let mut nv = vec![zero; len];
    for i in 0..len {
        if i + 1 < len {
            nu[i] = (c * u[i + 1] + I * s * v[i + 1]) * eu;
        }
        if i >= 1 {
            nv[i] = (c * v[i - 1] + I * s * u[i - 1]) * ev;
        }
    }
    (nu, nv)
}

/// One full two-substep update.
pub fn qw_step(state: &QwState, params: &QwParams) -> Result<QwState> {
    let len = state.len();
    let edge = |i: usize| state.u[i].norm_sqr() + state.v[i].norm_sqr() > 0.0;
    if len < 5 || [0, 1, len - 2, len - 1].into_iter().any(edge) {
        return Err(Error::BoundaryContamination {
            weight: [0, 1, len.saturating_sub(2), len.saturating_sub(1)]
                .into_iter()
                .filter(|&i| i < len)
                .map(|i| state.u[i].norm_sqr() + state.v[i].norm_sqr())
                .sum(),
            step: state.m as usize,
        });
    }
    let m = state.m + 1;
    let (phi1, phi2) = qw_phases(m, params);
    let (u, v) = substep(&state.u, &state.v, params.beta1, phi1);
    let (u, v) = substep(&u, &v, params.beta2, phi2);
    let mut next = QwState {
        u,
        v,
        n_max: state.n_max,
        m,
        log_amp: state.log_amp,
    };
    next.renormalize();
    Ok(next)
}

/// Recorded pulse dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QwTrajectory {
    pub steps: Vec<i64>,
    /// Sites of the map columns.
    pub sites: Vec<i64>,
    /// `|ũ_n^{(m)}|` per recorded step (empty when maps are not recorded).
    pub u_abs: Vec<Vec<f64>>,
    pub v_abs: Vec<Vec<f64>>,
    /// Recurrence amplitude `A_m = |ũ_site^{(m)}|`.
    pub recurrence: Vec<f64>,
    /// `ln` of the true norm at each recorded step.
    pub log_amp: Vec<f64>,
    pub final_state: QwState,
}

/// Iterates [`qw_step`] `m_end` times, recording every step including `m = 0`.
pub fn qw_evolve(
    params: &QwParams,
    init: QwState,
    m_end: usize,
    recurrence_site: i64,
    record_maps: bool,
) -> Result<QwTrajectory> {
    params.validate()?;
    let site = init
        .index(recurrence_site)
        .ok_or_else(|| Error::InvalidInput(format!("recurrence site {recurrence_site} outside array")))?;
    let sites: Vec<i64> = (0..init.len()).map(|i| init.site(i)).collect();
    let mut traj = QwTrajectory {
        steps: Vec::with_capacity(m_end + 1),
        sites,
        u_abs: Vec::new(),
        v_abs: Vec::new(),
        recurrence: Vec::with_capacity(m_end + 1),
        log_amp: Vec::with_capacity(m_end + 1),
        final_state: init,
    };
    let record = |s: &QwState, traj: &mut QwTrajectory| {
        let norm = s.norm();
        traj.steps.push(s.m);
        traj.recurrence.push(s.u[site].norm() / norm);
        traj.log_amp.push(s.log_norm());
        if record_maps {
            traj.u_abs.push(s.u.iter().map(|z| z.norm() / norm).collect());
            traj.v_abs.push(s.v.iter().map(|z| z.norm() / norm).collect());
        }
    };
    let mut state = traj.final_state.clone();
    record(&state, &mut traj);
    for _ in 0..m_end {
        state = qw_step(&state, params)?;
        record(&state, &mut traj);
    }
    traj.final_state = state;
    Ok(traj)
}

/// Side-by-side ladder offsets of the walk and of the continuous-time
/// Rice-Mele chain it approximates for small angles and rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumComparison {
    pub params: QwParams,
    /// Continuous-time force `2·(2π/M)` actually realized.
    pub force_continuum: f64,
    /// Walk quasi-energy per step.
    pub theta_qw: C64,
    pub theta_rice_mele: C64,
}

/// Walk with `β₁ = π/2 − t2`, `β₂ = π/2 + t1` and `M = round(4π/F)`.
pub fn qw_continuum_params(t1: f64, t2: f64, delta: f64, force_continuum: f64) -> Result<QwParams> {
    if !(force_continuum > 0.0 && force_continuum.is_finite()) {
        return Err(Error::InvalidInput(format!("force must be > 0, got {force_continuum}")));
    }
    let m = (4.0 * PI / force_continuum).round();
    if m < 2.0 || m > u32::MAX as f64 {
        return Err(Error::InvalidInput(format!("force {force_continuum} gives M = {m}")));
    }
    QwParams::new(FRAC_PI_2 - t2, FRAC_PI_2 + t1, delta, m as u32)
}

pub fn qw_continuum_check(t1: f64, t2: f64, delta: f64, force_continuum: f64) -> Result<ContinuumComparison> {
    for (name, v) in [("t1", t1), ("t2", t2), ("delta", delta), ("force", force_continuum)] {
        if v > 0.2 {
            log::warn!("{name} = {v} is outside the small-parameter regime of the continuum mapping");
        }
    }
    let params = qw_continuum_params(t1, t2, delta, force_continuum)?;
    let force = 2.0 * params.force();
    let rm = ModelSpec::rice_mele(t1, t2, delta)?;
    let theta_rice_mele = theta_exact(&rm, force, KGrid::default())?.theta;
    Ok(ContinuumComparison {
        params,
        force_continuum: force,
        theta_qw: qw_quasi_energy(0.0, &params),
        theta_rice_mele,
    })
}

/// Gain/loss sweeps of the walk and of the matching Rice-Mele chain.
pub fn qw_continuum_sweeps(
    t1: f64,
    t2: f64,
    force_continuum: f64,
    range: DeltaRange,
    eps_floor: f64,
) -> Result<(SweepCurve, SweepCurve)> {
    let params = qw_continuum_params(t1, t2, 0.0, force_continuum)?;
    let qw = qw_sweep_delta(&params, range, eps_floor)?;
    let rm = ModelSpec::rice_mele(t1, t2, 0.0)?;
    let opts = crate::spectrum::SweepOptions {
        with_wkb: false,
        eps_floor,
        ..Default::default()
    };
    let cont = crate::spectrum::sweep_delta(&rm, range, 2.0 * params.force(), opts)?;
    Ok((qw, cont))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reference(delta: f64, m: u32) -> QwParams {
        QwParams::new(FRAC_PI_2 - 0.1, FRAC_PI_2 - 0.15, delta, m).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn phase_schedule() {
        let p = QwParams::new(0.3, 0.4, 0.0, 61).unwrap();
        let (a, b) = qw_phases(0, &p);
        assert_eq!(a, c(FRAC_PI_2, 0.0));
        assert_eq!(b, c(-FRAC_PI_2, 0.0));

        let p = QwParams::new(0.3, 0.4, 0.06, 61).unwrap();
        let (a, b) = qw_phases(1, &p);
        assert_abs_diff_eq!(a.re, 2.0 * PI / 61.0 + FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.im, -0.03, epsilon = 1e-15);
        assert_abs_diff_eq!(b.re, 2.0 * PI / 61.0 - FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(b.im, 0.03, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(QwParams::new(0.3, 0.4, 0.0, 1).is_err());
        assert!(QwParams::new(f64::NAN, 0.4, 0.0, 10).is_err());
        assert!(QwParams::new(0.3, 0.4, -0.1, 10).is_err());
        assert!(matches!(qw_pt_threshold(0.0, 1.0), Err(Error::DegenerateCoin)));
    }

    #[test]
    fn pt_threshold_examples() {
        assert_abs_diff_eq!(qw_pt_threshold(FRAC_PI_2, FRAC_PI_2).unwrap(), 0.0, epsilon = 1e-15);
        let want = ((1.0 - (0.1f64.sin() * 0.15f64.sin())) / (0.1f64.cos() * 0.15f64.cos())).acosh();
        let got = qw_pt_threshold(FRAC_PI_2 - 0.1, FRAC_PI_2 - 0.15).unwrap();
        assert_abs_diff_eq!(got, want, epsilon = 1e-14);
        assert!((got - 0.0504).abs() < 1e-4);
    }

    #[test]
    fn zero_coupling_shifts_pulses() {
        // β = 0: u moves left and v moves right by one site per substep.
        let p = QwParams::new(0.0, 0.0, 0.0, 8).unwrap();
        let mut s = QwState::zeros(6);
        let (i0, i1) = (s.index(0).unwrap(), s.index(1).unwrap());
        s.u[i0] = c(1.0, 0.0);
        s.v[i1] = c(1.0, 0.0);
        let next = qw_step(&s, &p).unwrap();
        assert!(next.u[next.index(-2).unwrap()].norm() > 0.999);
        assert!(next.v[next.index(3).unwrap()].norm() > 0.999);
        assert_abs_diff_eq!(next.norm(), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn balanced_coupler_single_step() {
        // β₁ = β₂ = π/4, Δ = 0, ramp phases e^{∓iφ} with φ₁ = F + π/2, φ₂ = F − π/2.
        let p = QwParams::new(PI / 4.0, PI / 4.0, 0.0, 8).unwrap();
        let s = QwState::single_pulse(6, 0).unwrap();
        let next = qw_step(&s, &p).unwrap();
        let (phi1, phi2) = qw_phases(1, &p);
        let h = 0.5f64.sqrt();
        // first substep: u_{-1} = cos β e^{−iφ₁}, v_{1} = i sin β e^{iφ₁}
        let u1 = h * (-I * phi1).exp();
        let v1 = I * h * (I * phi1).exp();
        let want = [
            (-2, u1 * h * (-I * phi2).exp(), c(0.0, 0.0)),
            (0, I * h * v1 * (-I * phi2).exp(), I * h * u1 * (I * phi2).exp()),
            (2, c(0.0, 0.0), h * v1 * (I * phi2).exp()),
        ];
        for (n, u, v) in want {
            let i = next.index(n).unwrap();
            assert!((next.u[i] - u).norm() < 1e-15, "u_{n}");
            assert!((next.v[i] - v).norm() < 1e-15, "v_{n}");
        }
        assert_abs_diff_eq!(next.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hermitian_walk_is_unitary() {
        let p = reference(0.0, 61);
        let mut s = QwState::single_pulse(QwState::n_max_for(200), 0).unwrap();
        for _ in 0..200 {
            let before = s.norm();
            s = qw_step(&s, &p).unwrap();
            assert!((s.norm() - before).abs() < 1e-12);
        }
        assert_eq!(s.log_amp, 0.0);
    }

    #[test]
    fn light_cone() {
        let p = reference(0.06, 61);
        let tr = qw_evolve(
            &p,
            QwState::single_pulse(QwState::n_max_for(30), 0).unwrap(),
            30,
            0,
            false,
        )
        .unwrap();
        let (lo, hi) = tr.final_state.support().unwrap();
        assert!(lo >= -60 && hi <= 60);
        assert!(matches!(
            qw_evolve(&p, QwState::single_pulse(20, 0).unwrap(), 30, 0, false),
            Err(Error::BoundaryContamination { .. })
        ));
    }

    #[test]
    fn plane_wave_matches_bloch_matrix() {
        // A ring of L sites holds e^{iqn} exactly when q = 2πj/L; embed it in
        // a long open array and compare a window far from the edges.
        let p = reference(0.05, 61);
        let q = 2.0 * PI * 3.0 / 64.0;
        let (x, y) = (c(0.6, 0.2), c(-0.3, 0.7));
        let mut s = QwState::zeros(64);
        for i in 8..s.len() - 8 {
            let e = C64::from_polar(1.0, q * s.site(i) as f64);
            s.u[i] = x * e;
            s.v[i] = y * e;
        }
        s.m = 4;
        let next = qw_step(&s, &p).unwrap();
        let (bx, by) = qw_bloch_step_matrix(q, 5, &p).apply(x, y);
        let scale = next.log_amp.exp();
        for i in 20..s.len() - 20 {
            let e = C64::from_polar(1.0, q * s.site(i) as f64);
            assert!((next.u[i] * scale - bx * e).norm() < 1e-12);
            assert!((next.v[i] * scale - by * e).norm() < 1e-12);
        }
    }

    #[test]
    fn static_exponent_matches_dispersion() {
        for delta in [0.0, 0.036, 0.06] {
            let p = reference(delta, 61);
            for q in q_grid(64) {
                let got = qw_static_exponent(q, &p);
                let (e, _) = qw_dispersion_f0(q, &p);
                assert!(
                    ladder_distance(got, e, 2.0 * PI) < 1e-12,
                    "Δ={delta} q={q}: {got} vs {e}"
                );
            }
        }
    }

    #[test]
    fn static_band_is_dispersive() {
        assert!(qw_static_band_spread(&reference(0.0, 61), 64).unwrap() > 0.1);
    }

    #[test]
    fn forced_band_is_flat() {
        for m in [61, 102] {
            for delta in [0.0, 0.036, 0.06] {
                assert!(qw_band_collapse_check(&reference(delta, m), 64).unwrap() < 1e-8);
            }
        }
        assert!(qw_band_collapse_check(&reference(0.0, 61), 8).is_err());
    }

    #[test]
    fn period_start_is_irrelevant() {
        let p = reference(0.06, 61);
        let base = qw_quasi_energy(0.4, &p);
        for start in [0, 7, 30, 61] {
            let (s, log) = qw_period_propagator(0.4, start, &p);
            let theta = floquet_angle_of(&s, log) / 61.0;
            assert!(ladder_distance(theta, base, p.force()) < 1e-12, "start {start}");
        }
    }

    #[test]
    fn growth_follows_quasi_energy() {
        let p = reference(0.06, 61);
        let theta = qw_quasi_energy(0.0, &p);
        let m_end = 10 * 61;
        let tr = qw_evolve(
            &p,
            QwState::single_pulse(QwState::n_max_for(m_end), 0).unwrap(),
            m_end,
            0,
            false,
        )
        .unwrap();
        let slope = (tr.log_amp[m_end] - tr.log_amp[m_end - 61]) / 61.0;
        assert!((slope - theta.im).abs() < 0.05 * theta.im, "{slope} vs {}", theta.im);
    }

    #[test]
    fn sweep_rises_through_threshold() {
        let curve = qw_sweep_delta(&reference(0.0, 61), DeltaRange::new(0.0, 0.1, 26).unwrap(), 1e-6).unwrap();
        assert!(curve.im_theta_at(0.036).unwrap() < 0.2 * curve.im_theta_at(0.06).unwrap());
    }

    #[test]
    fn continuum_parameters() {
        let p = qw_continuum_params(0.05, 0.1, 0.02, 0.04).unwrap();
        assert_eq!(p.m, 314);
        assert_abs_diff_eq!(p.beta1, FRAC_PI_2 - 0.1);
        assert_abs_diff_eq!(p.beta2, FRAC_PI_2 + 0.05);
        let cmp = qw_continuum_check(0.05, 0.1, 0.1, 0.04).unwrap();
        assert!((cmp.theta_qw.im - cmp.theta_rice_mele.im).abs() < 0.05 * cmp.theta_rice_mele.im);
    }

    proptest! {
        #[test]
        fn step_matrix_is_unimodular(q in -PI..PI, m in -100i64..100, b1 in 0.0..PI, b2 in 0.0..PI, delta in 0.0..0.5f64) {
            let p = QwParams::new(b1, b2, delta, 61).unwrap();
            let d = qw_bloch_step_matrix(q, m, &p).det();
            prop_assert!((d - 1.0).norm() < 1e-12);
        }
    }
}
