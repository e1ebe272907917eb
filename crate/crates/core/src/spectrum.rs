//! Wannier-Stark ladder offset `θ` of a driven two-band lattice.
//!
//! Under a dc force `F` the spectrum is `E = lF ± θ`, `θ = Fφ/2π`, where
//! `cos φ` is the half-trace of the k-ordered exponential
//! `U = T exp(−(i/F) ∮ H(k) dk)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::ModelSpec;
use crate::linalg::{eigen_decomposition, floquet_angle_of, ladder_distance, Mat2, C64, I};
use crate::{Error, Result};

pub const MIN_K_POINTS: usize = 16;
pub const DEFAULT_K_POINTS: usize = 4096;
/// Dense diagonalization cap, in cells.
pub const DEFAULT_MAX_DENSE_CELLS: usize = 2000;

/// Slices per independently-multiplied chunk of the ordered product. Fixed,
/// so the rounding pattern does not depend on the thread count.
const CHUNK: usize = 4096;
const RESCALE_ABOVE: f64 = 1e100;

/// Ladder offset together with the force and discretization it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsResult {
    pub theta: C64,
    pub phi: C64,
    pub force: f64,
    /// Ladder spacing period `2π/F`.
    pub t1: f64,
    /// `(π/φ)·T1`, only when `φ` is real to 1e-8.
    pub t2: Option<f64>,
    pub n_k: usize,
}

impl WsResult {
    fn from_phi(phi: C64, force: f64, n_k: usize) -> Self {
        let t1 = 2.0 * PI / force;
        let t2 = (phi.im.abs() < 1e-8 && phi.re > 0.0).then(|| PI / phi.re * t1);
        Self {
            theta: force * phi / (2.0 * PI),
            phi,
            force,
            t1,
            t2,
            n_k,
        }
    }
}

/// Step-count policy for [`theta_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub n_k: usize,
    /// Keep doubling `n_k` until successive `θ` agree to `tol`.
    pub refine: bool,
    pub tol: f64,
    pub max_n_k: usize,
}

impl Default for KGrid {
    fn default() -> Self {
        Self {
            n_k: DEFAULT_K_POINTS,
            refine: true,
            tol: 1e-9,
            max_n_k: 1 << 24,
        }
    }
}

impl KGrid {
    pub fn fixed(n_k: usize) -> Self {
        Self {
            n_k,
            refine: false,
            ..Self::default()
        }
    }
}

fn check_grid(force: f64, n_k: usize) -> Result<()> {
    if !(force.is_finite() && force > 0.0) {
        return Err(Error::InvalidInput(format!("force must be > 0, got {force}")));
    }
    if n_k < MIN_K_POINTS {
        return Err(Error::InvalidInput(format!("n_k must be >= {MIN_K_POINTS}, got {n_k}")));
    }
    Ok(())
}

/// Midpoint slice `exp(−i H(k) δk / F)`.
fn slice(model: &ModelSpec, k: f64, tau: f64) -> Mat2 {
    model.bloch_hamiltonian(k).scale(-I * tau).exp()
}

/// Ordered product with later slices on the left, as `mantissa · e^{log_scale}`.
pub(crate) fn ordered_product_scaled<F>(n: usize, factor: F) -> (Mat2, f64)
where
    F: Fn(usize) -> Mat2 + Sync,
{
    let chunks: Vec<(Mat2, f64)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Mat2::identity();
            let mut log = 0.0;
            for j in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc = factor(j) * acc;
                let s = acc.max_abs();
                if s > RESCALE_ABOVE {
                    acc = acc.scale(C64::new(1.0 / s, 0.0));
                    log += s.ln();
                }
            }
            (acc, log)
        })
        .collect();
    let mut acc = Mat2::identity();
    let mut log = 0.0;
    for (m, l) in chunks {
        acc = m * acc;
        log += l;
        let s = acc.max_abs();
        if s > RESCALE_ABOVE {
            acc = acc.scale(C64::new(1.0 / s, 0.0));
            log += s.ln();
        }
    }
    (acc, log)
}

/// The k-ordered exponential `U` on `n_k` midpoint slices. Slices are
/// ordered the way a Bloch wave traverses the zone under the ramp `+F·n`
/// (`dk/dt = −F`): starting at `k = π` and descending, with later slices
/// multiplying on the left. Entries overflow to infinity only when `|U|`
/// exceeds `f64`.
pub fn ordered_exponential(model: &ModelSpec, force: f64, n_k: usize) -> Result<Mat2> {
    check_grid(force, n_k)?;
    let (m, log) = ordered_exponential_scaled(model, force, n_k, 0);
    Ok(m.scale(C64::new(log.exp(), 0.0)))
}

/// Ordered exponential with the k-grid origin shifted by `shift` cells.
pub fn ordered_exponential_scaled(model: &ModelSpec, force: f64, n_k: usize, shift: usize) -> (Mat2, f64) {
    let dk = 2.0 * PI / n_k as f64;
    let tau = dk / force;
    ordered_product_scaled(n_k, |j| {
        let cell = (n_k - 1 - j + shift) % n_k;
        slice(model, -PI + (cell as f64 + 0.5) * dk, tau)
    })
}

fn theta_at(model: &ModelSpec, force: f64, n_k: usize) -> WsResult {
    let (m, log) = ordered_exponential_scaled(model, force, n_k, 0);
    let phi = floquet_angle_of(&m, log);
    WsResult::from_phi(phi, force, n_k)
}

/// Ladder offset from the ordered exponential.
pub fn theta_exact(model: &ModelSpec, force: f64, grid: KGrid) -> Result<WsResult> {
    check_grid(force, grid.n_k)?;
    let mut current = theta_at(model, force, grid.n_k);
    if !grid.refine {
        return Ok(current);
    }
    loop {
        let n = current.n_k * 2;
        if n > grid.max_n_k {
            return Err(Error::Convergence(format!(
                "theta not converged to {:.1e} at n_k = {} ({model:?}, F = {force})",
                grid.tol, current.n_k
            )));
        }
        let next = theta_at(model, force, n);
        let change = ladder_distance(next.theta, current.theta, force);
        current = next;
        if change < grid.tol {
            return Ok(current);
        }
    }
}

/// Adiabatic (WKB) estimate `θ ≈ (1/2π) ∮ E+(k) dk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbEstimate {
    pub theta: C64,
    /// Smallest `|E+|` met on the grid.
    pub min_integrand: f64,
    /// Set when the integrand came within 1e-12 of a zero, where the branch
    /// of the square root is not determined by continuity.
    pub branch_warning: bool,
}

pub fn theta_wkb(model: &ModelSpec, n_k: usize) -> Result<WkbEstimate> {
    if n_k < MIN_K_POINTS {
        return Err(Error::InvalidInput(format!("n_k must be >= {MIN_K_POINTS}, got {n_k}")));
    }
    let dk = 2.0 * PI / n_k as f64;
    let mut prev: Option<C64> = None;
    let mut sum = C64::new(0.0, 0.0);
    let mut min_integrand = f64::INFINITY;
    for j in 0..n_k {
        let k = -PI + j as f64 * dk;
        let (principal, _) = model.dispersion(k);
        let e = match prev {
            None => principal,
            Some(p) => {
                let (d_plus, d_minus) = ((principal - p).norm(), (principal + p).norm());
                // Comparable distances mean a passage through a zero of E²,
                // where continuity says nothing: keep the principal root.
                if d_minus < 0.5 * d_plus {
                    -principal
                } else {
                    principal
                }
            }
        };
        min_integrand = min_integrand.min(e.norm());
        sum += e;
        prev = Some(e);
    }
    let mut theta = sum * dk / (2.0 * PI);
    if theta.im < 0.0 {
        theta = -theta;
    }
    let branch_warning = min_integrand < 1e-12;
    if branch_warning {
        log::warn!("WKB integrand reaches {min_integrand:.2e}: branch tracking near an exceptional point");
    }
    Ok(WkbEstimate {
        theta,
        min_integrand,
        branch_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderEigenvalue {
    pub value: C64,
    /// Fraction of the eigenvector weight on the outermost two cells at
    /// either end.
    pub edge_weight: f64,
    pub interior: bool,
}

/// Dense spectrum of the truncated real-space operator with a centered
/// force ramp.
pub fn ws_ladder_eigenvalues(
    model: &ModelSpec,
    force: f64,
    n_cells: usize,
    max_cells: usize,
) -> Result<Vec<LadderEigenvalue>> {
    if n_cells < 16 {
        return Err(Error::InvalidInput(format!("need at least 16 cells, got {n_cells}")));
    }
    if n_cells > max_cells {
        return Err(Error::InvalidInput(format!(
            "{n_cells} cells exceeds the dense cap of {max_cells}"
        )));
    }
    if !(force.is_finite() && force > 0.0) {
        return Err(Error::InvalidInput(format!("force must be > 0, got {force}")));
    }
    let op = model.real_space_hamiltonian(force, n_cells, -((n_cells / 2) as i64))?;
    let dim = op.dim();
    let eig = eigen_decomposition(op.to_dense())?;
    let edge: Vec<usize> = (0..4).chain(dim - 4..dim).collect();
    Ok(eig
        .values
        .iter()
        .enumerate()
        .map(|(j, &value)| {
            let col = eig.vectors.column(j);
            let edge_weight: f64 = edge.iter().map(|&i| col[i].norm_sqr()).sum();
            LadderEigenvalue {
                value,
                edge_weight,
                interior: edge_weight < 1e-8,
            }
        })
        .collect())
}

/// Largest distance of an interior eigenvalue from the ladder `{lF ± θ}`.
pub fn ladder_mismatch(eigs: &[LadderEigenvalue], theta: C64, force: f64) -> f64 {
    eigs.iter()
        .filter(|e| e.interior)
        .map(|e| ladder_distance(e.value, theta, force))
        .fold(0.0, f64::max)
}

/// Evenly spaced gain/loss values, `n_steps` of them from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRange {
    pub min: f64,
    pub max: f64,
    pub n_steps: usize,
}

impl DeltaRange {
    pub fn new(min: f64, max: f64, n_steps: usize) -> Result<Self> {
        let r = Self { min, max, n_steps };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || !self.min.is_finite() || !self.max.is_finite() || self.min < 0.0 {
            return Err(Error::InvalidInput(format!("bad delta range {self:?}")));
        }
        if self.n_steps >= 2 && self.min >= self.max {
            return Err(Error::InvalidInput(format!(
                "delta range needs min < max, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n_steps == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n_steps - 1) as f64;
        (0..self.n_steps).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub theta: C64,
    pub theta_wkb: Option<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Sharp,
    Smooth,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
    pub classification: TransitionKind,
    pub transition: Option<f64>,
}

impl SweepCurve {
    /// Builds and classifies a curve; `Δ` must be strictly increasing.
    pub fn new(points: Vec<SweepPoint>, eps_floor: f64) -> Result<Self> {
        if points.windows(2).any(|w| w[1].delta <= w[0].delta) {
            return Err(Error::InvalidInput("sweep deltas must be strictly increasing".into()));
        }
        let samples: Vec<(f64, f64)> = points.iter().map(|p| (p.delta, p.theta.im)).collect();
        let (classification, transition) = classify_transition(&samples, eps_floor);
        Ok(Self {
            points,
            classification,
            transition,
        })
    }

    pub fn im_theta(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta.im).collect()
    }

    /// `Im θ` at the sample closest to `delta`.
    pub fn im_theta_at(&self, delta: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.delta - delta).abs().total_cmp(&(b.delta - delta).abs()))
            .map(|p| p.theta.im)
    }
}

pub const DEFAULT_EPS_FLOOR: f64 = 1e-6;

/// Options for [`sweep_delta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub grid: KGrid,
    pub with_wkb: bool,
    pub eps_floor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            grid: KGrid::default(),
            with_wkb: true,
            eps_floor: DEFAULT_EPS_FLOOR,
        }
    }
}

/// `θ` over a range of gain/loss values; points are evaluated in parallel.
pub fn sweep_delta(template: &ModelSpec, range: DeltaRange, force: f64, opts: SweepOptions) -> Result<SweepCurve> {
    range.validate()?;
    let points = range
        .values()
        .into_par_iter()
        .map(|delta| {
            let model = template.with_delta(delta);
            let theta = theta_exact(&model, force, opts.grid)?.theta;
            let theta_wkb = if opts.with_wkb {
                Some(theta_wkb(&model, opts.grid.n_k)?.theta)
            } else {
                None
            };
            Ok(SweepPoint {
                delta,
                theta,
                theta_wkb,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepCurve::new(points, opts.eps_floor)
}

/// Sharp/smooth classification of an `(Δ, Im θ)` curve.
///
/// The curve is `Sharp` when every sample is either below `ε` (a leading
/// prefix of at least two points) or above `10·ε` (everything after it);
/// `Δ*` is then the onset, the first crossing of `100·ε`. It is `Smooth`
/// when the samples before the rise level `max(100·ε, 5% of max Im θ)`,
/// apart from the Hermitian endpoint, all sit in `(ε, rise)`; `Δ*` is the
/// first crossing of the rise level. Crossings are linearly interpolated.
pub fn classify_transition(samples: &[(f64, f64)], eps_floor: f64) -> (TransitionKind, Option<f64>) {
    if samples.len() < 2 {
        return (TransitionKind::Undetermined, None);
    }
    let max_im = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if max_im <= 10.0 * eps_floor {
        return (TransitionKind::Undetermined, None);
    }
    let rise = (100.0 * eps_floor).max(0.05 * max_im);
    let Some(first) = samples.iter().position(|s| s.1 >= rise) else {
        return (TransitionKind::Undetermined, None);
    };

    let prefix = samples.iter().take_while(|s| s.1 < eps_floor).count();
    let sharp = prefix >= 2 && samples[prefix..].iter().all(|s| s.1 > 10.0 * eps_floor);
    if sharp {
        return (TransitionKind::Sharp, first_crossing(samples, 100.0 * eps_floor));
    }
    let crossing = first_crossing(samples, rise);
    let before = &samples[..first];
    let skip = usize::from(before.first().is_some_and(|s| s.1 < eps_floor));
    let smooth = before.len() > skip + 1 && before[skip..].iter().all(|s| s.1 > eps_floor && s.1 < rise);
    if smooth {
        (TransitionKind::Smooth, crossing)
    } else {
        (TransitionKind::Undetermined, crossing)
    }
}

fn first_crossing(samples: &[(f64, f64)], level: f64) -> Option<f64> {
    let first = samples.iter().position(|s| s.1 >= level)?;
    if first == 0 {
        return Some(samples[0].0);
    }
    let (d0, y0) = samples[first - 1];
    let (d1, y1) = samples[first];
    Some(d0 + (level - y0) / (y1 - y0) * (d1 - d0))
}

/// `T2·θ = π` identity helper for real ladders.
pub fn two_period_product(result: &WsResult) -> Option<f64> {
    result.t2.map(|t2| t2 * result.theta.re)
}
