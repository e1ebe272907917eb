//! Time-domain Bloch-Zener dynamics: fixed-step RK4 for `i dψ/dt = Hψ` on a
//! truncated lattice, revival amplitude, and periodicity classification.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{ModelSpec, RealSpaceOperator};
use crate::linalg::{C64, I};
use crate::{Error, Result};

/// Largest allowed `dt` times the Gershgorin spectral-radius bound.
pub const MAX_STEP_RADIUS: f64 = 0.1;
/// Edge weight (outermost two cells on each side) that aborts a run.
pub const EDGE_WEIGHT_LIMIT: f64 = 1e-6;
pub const SAMPLES_PER_PERIOD: usize = 64;
pub const MIN_STEPS_PER_PERIOD: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sublattice {
    A,
    B,
}

/// Amplitudes on cells `n0 .. n0 + N`, stored near unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// Physical index of the first stored cell.
    pub n0: i64,
    pub t: f64,
    /// True amplitudes are the stored ones times `e^{log_amp}`.
    pub log_amp: f64,
}

impl LatticeState {
    pub fn zeros(n_cells: usize, n0: i64) -> Self {
        Self {
            a: vec![C64::new(0.0, 0.0); n_cells],
            b: vec![C64::new(0.0, 0.0); n_cells],
            n0,
            t: 0.0,
            log_amp: 0.0,
        }
    }

    /// Unit excitation of one site; `cell` is a physical index.
    pub fn single_site(n_cells: usize, n0: i64, cell: i64, sub: Sublattice) -> Result<Self> {
        let mut s = Self::zeros(n_cells, n0);
        let i = s
            .index(cell)
            .ok_or_else(|| Error::InvalidInput(format!("cell {cell} outside lattice")))?;
        match sub {
            Sublattice::A => s.a[i] = C64::new(1.0, 0.0),
            Sublattice::B => s.b[i] = C64::new(1.0, 0.0),
        }
        Ok(s)
    }

    /// Lattice of `n_cells` cells centered on physical cell 0, excited on
    /// sublattice A there.
    pub fn centered_excitation(n_cells: usize) -> Result<Self> {
        Self::single_site(n_cells, -((n_cells / 2) as i64), 0, Sublattice::A)
    }

    pub fn n_cells(&self) -> usize {
        self.a.len()
    }

    pub fn index(&self, cell: i64) -> Option<usize> {
        let i = cell - self.n0;
        (0..self.n_cells() as i64).contains(&i).then_some(i as usize)
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn log_norm(&self) -> f64 {
        self.norm().ln() + self.log_amp
    }

    /// Interleaved `(a_0, b_0, a_1, …)` vector.
    pub fn to_interleaved(&self) -> Vec<C64> {
        self.a.iter().zip(&self.b).flat_map(|(&a, &b)| [a, b]).collect()
    }

    fn from_interleaved(psi: &[C64], n0: i64, t: f64, log_amp: f64) -> Self {
        let a = psi.iter().step_by(2).copied().collect();
        let b = psi.iter().skip(1).step_by(2).copied().collect();
        Self { a, b, n0, t, log_amp }
    }

    /// True amplitudes `(a, b)`, rescaled by `e^{log_amp}`.
    pub fn true_amplitudes(&self) -> (Vec<C64>, Vec<C64>) {
        let s = self.log_amp.exp();
        (
            self.a.iter().map(|z| z * s).collect(),
            self.b.iter().map(|z| z * s).collect(),
        )
    }
}

/// `N = 4·ceil(W/F) + 41` with `W` the Hermitian bandwidth.
pub fn auto_cell_count(model: &ModelSpec, force: f64) -> Result<usize> {
    if !(force.is_finite() && force > 0.0) {
        return Err(Error::InvalidInput(format!("auto-sizing needs force > 0, got {force}")));
    }
    Ok(4 * (model.hermitian_bandwidth() / force).ceil() as usize + 41)
}

/// Default step and sampling stride for an operator driven at `force`:
/// a multiple of 64 steps per Bloch period, at least 2000 and fine enough
/// for the spectral-radius guard. Returns `(dt, sample_every)` giving 64
/// samples per period.
pub fn default_time_step(op: &RealSpaceOperator, force: f64) -> Result<(f64, usize)> {
    if !(force.is_finite() && force > 0.0) {
        return Err(Error::InvalidInput(format!("default dt needs force > 0, got {force}")));
    }
    let period = 2.0 * PI / force;
    let needed = (period * op.spectral_radius_bound() / MAX_STEP_RADIUS).ceil() as usize + 1;
    let steps = needed.max(MIN_STEPS_PER_PERIOD).div_ceil(SAMPLES_PER_PERIOD) * SAMPLES_PER_PERIOD;
    Ok((period / steps as f64, steps / SAMPLES_PER_PERIOD))
}

/// Sampled trajectory with normalized amplitude maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Physical cell indices of the map columns.
    pub cells: Vec<i64>,
    /// `|ã_n(t)|` per sample.
    pub abs_a: Vec<Vec<f64>>,
    pub abs_b: Vec<Vec<f64>>,
    /// `ln` of the true norm per sample.
    pub log_amp: Vec<f64>,
    pub revival_cell: i64,
    /// `A(t) = |ã_{revival_cell}(t)|`.
    pub revival: Vec<f64>,
    pub final_state: LatticeState,
}

impl Trajectory {
    pub fn sample_interval(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Mean growth rate of `ln‖ψ‖` over the trailing `window` of time.
    pub fn growth_rate(&self, window: f64) -> Result<f64> {
        let dts = self.sample_interval();
        let n = (window / dts).round() as usize;
        if dts <= 0.0 || n == 0 || n >= self.times.len() {
            return Err(Error::InsufficientData(format!("growth window {window} not covered")));
        }
        let last = self.times.len() - 1;
        Ok((self.log_amp[last] - self.log_amp[last - n]) / (self.times[last] - self.times[last - n]))
    }
}

/// Integrates from `init` to `t_end` with step `dt`, sampling every
/// `sample_every` steps. The revival trace follows `revival_cell`.
pub fn evolve(
    model: &ModelSpec,
    force: f64,
    init: LatticeState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    revival_cell: i64,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) || !(t_end.is_finite() && t_end >= init.t) || sample_every == 0 {
        return Err(Error::InvalidInput(format!(
            "bad time grid: t_end {t_end}, dt {dt}, stride {sample_every}"
        )));
    }
    let op = model.real_space_hamiltonian(force, init.n_cells(), init.n0)?;
    let radius = op.spectral_radius_bound();
    if dt * radius >= MAX_STEP_RADIUS {
        return Err(Error::InvalidInput(format!(
            "dt·ρ = {:.3} exceeds {MAX_STEP_RADIUS} (dt {dt}, ρ ≤ {radius:.3})",
            dt * radius
        )));
    }
    let revival_index = init
        .index(revival_cell)
        .ok_or_else(|| Error::InvalidInput(format!("revival cell {revival_cell} outside lattice")))?;
    let n_steps = ((t_end - init.t) / dt).round() as usize;
    let n0 = init.n0;
    let t0 = init.t;
    let cells: Vec<i64> = (0..init.n_cells() as i64).map(|i| i + n0).collect();

    let mut traj = Trajectory {
        times: Vec::new(),
        cells,
        abs_a: Vec::new(),
        abs_b: Vec::new(),
        log_amp: Vec::new(),
        revival_cell,
        revival: Vec::new(),
        final_state: LatticeState::zeros(0, n0),
    };
    let record = |psi: &[C64], t: f64, log_amp: f64, traj: &mut Trajectory| {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let a: Vec<f64> = psi.iter().step_by(2).map(|z| z.norm() / norm).collect();
        let b: Vec<f64> = psi.iter().skip(1).step_by(2).map(|z| z.norm() / norm).collect();
        traj.times.push(t);
        traj.revival.push(a[revival_index]);
        traj.log_amp.push(norm.ln() + log_amp);
        traj.abs_a.push(a);
        traj.abs_b.push(b);
    };

    let mut psi = init.to_interleaved();
    let mut log_amp = init.log_amp;
    let dim = psi.len();
    let mut rk = Rk4::new(dim);
    record(&psi, t0, log_amp, &mut traj);
    for step in 1..=n_steps {
        rk.step(&op, &mut psi, dt);
        let total: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let edge: f64 = psi[..4].iter().chain(&psi[dim - 4..]).map(|z| z.norm_sqr()).sum();
        if !total.is_finite() {
            return Err(Error::Convergence(format!("state diverged at step {step}")));
        }
        if edge > EDGE_WEIGHT_LIMIT * total {
            return Err(Error::BoundaryContamination {
                weight: edge / total,
                step,
            });
        }
        let norm = total.sqrt();
        if !(0.5..=2.0).contains(&norm) {
            psi.iter_mut().for_each(|z| *z /= norm);
            log_amp += norm.ln();
        }
        if step % sample_every == 0 {
            record(&psi, t0 + step as f64 * dt, log_amp, &mut traj);
        }
    }
    traj.final_state = LatticeState::from_interleaved(&psi, n0, t0 + n_steps as f64 * dt, log_amp);
    Ok(traj)
}

/// Classical fourth-order Runge-Kutta for `dψ/dt = −iHψ`.
struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }

    fn rhs(op: &RealSpaceOperator, x: &[C64], out: &mut [C64]) {
        op.apply(x, out);
        out.iter_mut().for_each(|z| *z *= -I);
    }

    fn step(&mut self, op: &RealSpaceOperator, psi: &mut [C64], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        Self::rhs(op, psi, k1);
        for (t, (p, k)) in self.tmp.iter_mut().zip(psi.iter().zip(k1.iter())) {
            *t = p + k * (0.5 * dt);
        }
        Self::rhs(op, &self.tmp, k2);
        for (t, (p, k)) in self.tmp.iter_mut().zip(psi.iter().zip(k2.iter())) {
            *t = p + k * (0.5 * dt);
        }
        Self::rhs(op, &self.tmp, k3);
        for (t, (p, k)) in self.tmp.iter_mut().zip(psi.iter().zip(k3.iter())) {
            *t = p + k * dt;
        }
        Self::rhs(op, &self.tmp, k4);
        let w = dt / 6.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * w;
        }
    }
}

/// `|ã_cell(t)|` from a recorded trajectory.
pub fn revival_amplitude(traj: &Trajectory, cell: i64) -> Result<Vec<f64>> {
    let i = traj
        .cells
        .iter()
        .position(|&c| c == cell)
        .ok_or_else(|| Error::InvalidInput(format!("cell {cell} outside lattice")))?;
    Ok(traj.abs_a.iter().map(|row| row[i]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Periodicity {
    Periodic,
    Aperiodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub kind: Periodicity,
    /// Largest relative L2 difference between consecutive one-period windows.
    pub mismatch: f64,
    pub windows: usize,
}

pub const DEFAULT_PERIODICITY_TOL: f64 = 0.05;

/// Compares consecutive one-period windows after a transient. Needs at
/// least three full windows after `transient` samples.
pub fn periodicity_classify_samples(
    series: &[f64],
    samples_per_period: usize,
    transient: usize,
    tol: f64,
) -> Result<PeriodicityReport> {
    if samples_per_period == 0 {
        return Err(Error::InsufficientData("zero samples per period".into()));
    }
    let windows = series.len().saturating_sub(transient) / samples_per_period;
    if windows < 3 {
        return Err(Error::InsufficientData(format!(
            "{} samples give {windows} periods after a {transient}-sample transient, need 3",
            series.len()
        )));
    }
    let window = |w: usize| &series[transient + w * samples_per_period..transient + (w + 1) * samples_per_period];
    let mut mismatch = 0.0f64;
    for w in 0..windows - 1 {
        let (x, y) = (window(w), window(w + 1));
        let diff = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let base = x.iter().map(|p| p * p).sum::<f64>().sqrt();
        mismatch = mismatch.max(if base > 0.0 { diff / base } else { f64::INFINITY });
    }
    let kind = if mismatch < tol {
        Periodicity::Periodic
    } else {
        Periodicity::Aperiodic
    };
    Ok(PeriodicityReport {
        kind,
        mismatch,
        windows,
    })
}

/// Time-based front end: `series` sampled every `dt_sample`, period `t1`.
/// Sampling must be commensurate with `t1` at ≥ 64 samples per period.
pub fn periodicity_classify(
    series: &[f64],
    dt_sample: f64,
    t1: f64,
    transient: f64,
    tol: f64,
) -> Result<PeriodicityReport> {
    if !(dt_sample > 0.0 && t1 > 0.0 && transient >= 0.0) {
        return Err(Error::InsufficientData(
            "non-positive sampling interval or period".into(),
        ));
    }
    let per = t1 / dt_sample;
    let samples = per.round();
    if (per - samples).abs() > 1e-6 * per || (samples as usize) < SAMPLES_PER_PERIOD {
        return Err(Error::InsufficientData(format!(
            "need an integer number (>= {SAMPLES_PER_PERIOD}) of samples per period, got {per}"
        )));
    }
    periodicity_classify_samples(series, samples as usize, (transient / dt_sample).round() as usize, tol)
}

/// Convenience run with auto-sized lattice, default step and single-site
/// excitation of sublattice A at cell 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveSetup {
    pub n_cells: usize,
    pub dt: f64,
    pub sample_every: usize,
    pub t_end: f64,
}

impl EvolveSetup {
    /// `periods` Bloch periods on an auto-sized lattice.
    pub fn auto(model: &ModelSpec, force: f64, periods: f64) -> Result<Self> {
        let n_cells = auto_cell_count(model, force)?;
        let op = model.real_space_hamiltonian(force, n_cells, -((n_cells / 2) as i64))?;
        let (dt, sample_every) = default_time_step(&op, force)?;
        Ok(Self {
            n_cells,
            dt,
            sample_every,
            t_end: periods * 2.0 * PI / force,
        })
    }

    pub fn run(&self, model: &ModelSpec, force: f64) -> Result<Trajectory> {
        let init = LatticeState::centered_excitation(self.n_cells)?;
        evolve(model, force, init, self.t_end, self.dt, self.sample_every, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{theta_exact, KGrid};
    use approx::assert_abs_diff_eq;

    fn run(model: &ModelSpec, force: f64, init: LatticeState, t_end: f64, dt: f64) -> Trajectory {
        evolve(model, force, init, t_end, dt, 1, 0).unwrap()
    }

    #[test]
    fn dimer_rabi_oscillation() {
        let m = ModelSpec::model1(0.0, 1.0, 0.0).unwrap();
        let init = LatticeState::single_site(5, -2, 0, Sublattice::A).unwrap();
        let tr = evolve(&m, 0.0, init, 5.0, 1e-3, 10, 0).unwrap();
        for (t, a) in tr.times.iter().zip(&tr.revival) {
            assert!((a - t.cos().abs()).abs() < 1e-8, "t = {t}");
        }
        assert_abs_diff_eq!(*tr.times.last().unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let m = ModelSpec::rice_mele(0.4, 1.0, 0.3).unwrap();
        let init = || LatticeState::centered_excitation(31).unwrap();
        let final_a = |dt: f64| run(&m, 0.2, init(), 4.0, dt).final_state.true_amplitudes().0;
        let err = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        let (a, b, c) = (final_a(0.016), final_a(0.008), final_a(0.004));
        let ratio = err(&a, &b) / err(&b, &c);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn hermitian_norm_is_conserved() {
        for m in [
            ModelSpec::model1(0.2, 1.0, 0.0).unwrap(),
            ModelSpec::rice_mele(0.4, 1.0, 0.0).unwrap(),
        ] {
            let tr = EvolveSetup::auto(&m, 0.2, 10.0).unwrap().run(&m, 0.2).unwrap();
            assert!(tr.log_amp.iter().all(|l| l.abs() < 1e-6));
        }
    }

    #[test]
    fn growth_rate_matches_ladder() {
        let m = ModelSpec::model1(0.2, 1.0, 0.7).unwrap();
        let im = theta_exact(&m, 0.2, KGrid::default()).unwrap().theta.im;
        let tr = EvolveSetup::auto(&m, 0.2, 10.0).unwrap().run(&m, 0.2).unwrap();
        let rate = tr.growth_rate(2.0 * PI / 0.2).unwrap();
        assert!((rate - im).abs() < 0.05 * im, "{rate} vs {im}");
    }

    #[test]
    fn evolution_is_linear() {
        let m = ModelSpec::rice_mele(0.4, 1.0, 0.5).unwrap();
        let mk = |cell, sub| LatticeState::single_site(41, -20, cell, sub).unwrap();
        let mut both = mk(0, Sublattice::A);
        both.b[21] = C64::new(0.0, 2.0);
        let x = run(&m, 0.2, mk(0, Sublattice::A), 3.0, 0.01)
            .final_state
            .true_amplitudes();
        let y = run(&m, 0.2, mk(1, Sublattice::B), 3.0, 0.01)
            .final_state
            .true_amplitudes();
        let z = run(&m, 0.2, both, 3.0, 0.01).final_state.true_amplitudes();
        for i in 0..41 {
            assert!((z.0[i] - (x.0[i] + C64::new(0.0, 2.0) * y.0[i])).norm() < 1e-12);
            assert!((z.1[i] - (x.1[i] + C64::new(0.0, 2.0) * y.1[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn ramp_offset_is_a_global_phase() {
        let m = ModelSpec::model1(0.2, 1.0, 0.3).unwrap();
        // Exact for the flow; the RK4 error differs between gauges, so use a fine step.
        let a = run(
            &m,
            0.2,
            LatticeState::single_site(41, -20, 0, Sublattice::A).unwrap(),
            5.0,
            0.0025,
        );
        let b = evolve(
            &m,
            0.2,
            LatticeState::single_site(41, -17, 3, Sublattice::A).unwrap(),
            5.0,
            0.0025,
            1,
            3,
        )
        .unwrap();
        for (ra, rb) in a.abs_a.iter().zip(&b.abs_a) {
            for (p, q) in ra.iter().zip(rb) {
                assert!((p - q).abs() < 1e-10, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn boundary_contamination_aborts() {
        let m = ModelSpec::model1(0.2, 1.0, 0.0).unwrap();
        let r = evolve(&m, 0.2, LatticeState::centered_excitation(9).unwrap(), 30.0, 0.01, 1, 0);
        assert!(matches!(r, Err(Error::BoundaryContamination { .. })));
    }

    #[test]
    fn step_guard_rejects_large_dt() {
        let m = ModelSpec::model1(0.2, 1.0, 0.0).unwrap();
        let r = evolve(&m, 0.2, LatticeState::centered_excitation(41).unwrap(), 1.0, 0.5, 1, 0);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn auto_sizing() {
        let m = ModelSpec::model1(0.2, 1.0, 0.7).unwrap();
        assert_eq!(auto_cell_count(&m, 0.2).unwrap(), 4 * 7 + 41);
        let rm = ModelSpec::rice_mele(0.4, 1.0, 0.7).unwrap();
        assert_eq!(auto_cell_count(&rm, 0.2).unwrap(), 4 * 7 + 41);
        let s = EvolveSetup::auto(&m, 0.2, 10.0).unwrap();
        let period = 2.0 * PI / 0.2;
        assert_abs_diff_eq!(
            s.dt * (s.sample_every * SAMPLES_PER_PERIOD) as f64,
            period,
            epsilon = 1e-12
        );
        assert!(s.dt <= period / 2000.0);
    }

    #[test]
    fn revival_trace_matches_map() {
        let m = ModelSpec::model1(0.2, 1.0, 0.4).unwrap();
        let tr = run(&m, 0.2, LatticeState::centered_excitation(41).unwrap(), 2.0, 0.01);
        assert_eq!(revival_amplitude(&tr, 0).unwrap(), tr.revival);
        assert_eq!(tr.revival[0], 1.0);
        assert!(revival_amplitude(&tr, 100).is_err());
    }

    fn sampled(f: impl Fn(f64) -> f64, periods: usize) -> Vec<f64> {
        (0..periods * 64).map(|i| f(i as f64 / 64.0)).collect()
    }

    #[test]
    fn classifier_examples() {
        let periodic = sampled(|t| (2.0 * PI * t).cos().abs(), 10);
        let r = periodicity_classify(&periodic, 1.0 / 64.0, 1.0, 3.0, 0.05).unwrap();
        assert_eq!(r.kind, Periodicity::Periodic);
        assert!(r.mismatch < 1e-12);

        let beating = sampled(
            |t| ((2.0 * PI * t).cos() + (2.0 * 2f64.sqrt() * PI * t).cos()).abs() / 2.0,
            10,
        );
        assert_eq!(
            periodicity_classify(&beating, 1.0 / 64.0, 1.0, 3.0, 0.05).unwrap().kind,
            Periodicity::Aperiodic
        );
    }

    #[test]
    fn classifier_preconditions() {
        let s = sampled(|t| t.sin(), 5);
        assert!(matches!(
            periodicity_classify(&s, 1.0 / 64.0, 1.0, 3.0, 0.05),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            periodicity_classify(&s, 1.0 / 32.0, 1.0, 0.0, 0.05),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            periodicity_classify(&s, 0.3 / 64.0, 1.0, 0.0, 0.05),
            Err(Error::InsufficientData(_))
        ));
        assert!(periodicity_classify_samples(&s, 61, 0, 0.05).is_ok());
    }
}
