//! Continuous-time two-band lattices with balanced gain and loss `±iΔ`.
//!
//! Fourier convention: `a_n ∼ e^{ikn}`, so a term `c·e^{−ikd}` in `H₁₂(k)`
//! couples `a_n` to `b_{n−d}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{Mat2, C64, I};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Dimer chain with `H₁₂ = H₂₁ = t2 + 2 t1 cos k`.
    Model1,
    /// Rice-Mele chain with `H₁₂ = t2 + t1 e^{−ik}`, `H₂₁ = H₁₂*`.
    RiceMele,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Model1 => "model1",
            ModelKind::RiceMele => "rice-mele",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "model1" | "model-1" => Ok(ModelKind::Model1),
            "rice-mele" | "ricemele" | "rm" => Ok(ModelKind::RiceMele),
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }
}

/// A continuous-time model together with its hoppings and gain/loss rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub t1: f64,
    pub t2: f64,
    pub delta: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, t1: f64, t2: f64, delta: f64) -> Result<Self> {
        let spec = Self { kind, t1, t2, delta };
        spec.validate()?;
        if let Some(msg) = spec.regime_warning() {
            log::warn!("{msg}");
        }
        Ok(spec)
    }

    pub fn model1(t1: f64, t2: f64, delta: f64) -> Result<Self> {
        Self::new(ModelKind::Model1, t1, t2, delta)
    }

    pub fn rice_mele(t1: f64, t2: f64, delta: f64) -> Result<Self> {
        Self::new(ModelKind::RiceMele, t1, t2, delta)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t1", self.t1), ("t2", self.t2), ("delta", self.delta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Model1 is meant for `t2 > 2 t1 > 0`; sweeps may cross it, so this is
    /// only advisory.
    pub fn regime_warning(&self) -> Option<String> {
        match self.kind {
            ModelKind::Model1 if !(self.t2 > 2.0 * self.t1 && self.t1 > 0.0) => Some(format!(
                "model1 outside t2 > 2 t1 > 0 (t1 = {}, t2 = {})",
                self.t1, self.t2
            )),
            _ => None,
        }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    /// Bloch Hamiltonian at wave number `k`.
    pub fn bloch_hamiltonian(&self, k: f64) -> Mat2 {
        let gain = I * self.delta;
        let (h12, h21) = match self.kind {
            ModelKind::Model1 => {
                let h = C64::new(self.t2 + 2.0 * self.t1 * k.cos(), 0.0);
                (h, h)
            }
            ModelKind::RiceMele => {
                let h = C64::new(self.t2, 0.0) + self.t1 * C64::from_polar(1.0, -k);
                (h, h.conj())
            }
        };
        Mat2::new(gain, h12, h21, -gain)
    }

    /// Squared band energy `h11² + h12·h21`.
    pub fn energy_squared(&self, k: f64) -> C64 {
        let h = self.bloch_hamiltonian(k);
        h.a11 * h.a11 + h.a12 * h.a21
    }

    /// `(E+, E−)` with `E+` the principal square root and `E− = −E+`.
    pub fn dispersion(&self, k: f64) -> (C64, C64) {
        let mut e2 = self.energy_squared(k);
        // Both models give a real E²; pin a signed-zero imaginary part so
        // negative E² maps onto +i|E|.
        if e2.im == 0.0 {
            e2.im = 0.0;
        }
        let e = e2.sqrt();
        (e, -e)
    }

    /// Gain/loss level at which the unforced band spectrum turns complex.
    pub fn pt_threshold(&self) -> f64 {
        match self.kind {
            ModelKind::Model1 => (self.t2 - 2.0 * self.t1).max(0.0),
            ModelKind::RiceMele => (self.t2 - self.t1).abs(),
        }
    }

    /// `max_k |E+(k)|` of the Hermitian (`Δ = 0`) lattice.
    pub fn hermitian_bandwidth(&self) -> f64 {
        match self.kind {
            ModelKind::Model1 => self.t2 + 2.0 * self.t1,
            ModelKind::RiceMele => self.t2 + self.t1,
        }
    }

    /// Open-boundary real-space operator with force ramp `F·(n + n0)` on
    /// cell `n = 0..n_cells`.
    pub fn real_space_hamiltonian(&self, force: f64, n_cells: usize, n0: i64) -> Result<RealSpaceOperator> {
        if n_cells < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 cells, got {n_cells}")));
        }
        if !(force.is_finite() && force >= 0.0) {
            return Err(Error::InvalidInput(format!("force must be >= 0, got {force}")));
        }
        Ok(self.build_operator(force, n_cells, n0, false))
    }

    /// Same hoppings on a ring of `n_cells` cells, without force.
    pub fn periodic_hamiltonian(&self, n_cells: usize) -> Result<RealSpaceOperator> {
        if n_cells < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 cells, got {n_cells}")));
        }
        Ok(self.build_operator(0.0, n_cells, 0, true))
    }

    fn build_operator(&self, force: f64, n_cells: usize, n0: i64, periodic: bool) -> RealSpaceOperator {
        let a = |n: usize| 2 * n;
        let b = |n: usize| 2 * n + 1;
        let mut diag = Vec::with_capacity(2 * n_cells);
        for n in 0..n_cells {
            let ramp = force * (n as i64 + n0) as f64;
            diag.push(C64::new(ramp, self.delta));
            diag.push(C64::new(ramp, -self.delta));
        }
        let mut hops = Vec::new();
        let mut couple = |i: usize, j: usize, v: f64| {
            if v != 0.0 {
                hops.push((i, j, C64::new(v, 0.0)));
                hops.push((j, i, C64::new(v, 0.0)));
            }
        };
        let next = |n: usize| {
            if n + 1 < n_cells {
                Some(n + 1)
            } else if periodic {
                Some(0)
            } else {
                None
            }
        };
        for n in 0..n_cells {
            couple(a(n), b(n), self.t2);
            if let Some(m) = next(n) {
                match self.kind {
                    // a_n ↔ b_{n±1}
                    ModelKind::Model1 => {
                        couple(a(n), b(m), self.t1);
                        couple(a(m), b(n), self.t1);
                    }
                    // a_{n+1} ↔ b_n
                    ModelKind::RiceMele => couple(a(m), b(n), self.t1),
                }
            }
        }
        hops.sort_by_key(|&(i, j, _)| (i, j));
        RealSpaceOperator {
            n_cells,
            n0,
            force,
            diag,
            hops,
        }
    }
}

/// Sparse banded operator on the interleaved basis `(a_0, b_0, a_1, b_1, …)`.
#[derive(Debug, Clone)]
pub struct RealSpaceOperator {
    pub n_cells: usize,
    pub n0: i64,
    pub force: f64,
    diag: Vec<C64>,
    /// Off-diagonal `(row, col, value)` entries, sorted by row.
    hops: Vec<(usize, usize, C64)>,
}

impl RealSpaceOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[C64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[(usize, usize, C64)] {
        &self.hops
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for &(i, j, v) in &self.hops {
            y[i] += v * x[j];
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, d) in self.diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        for &(i, j, v) in &self.hops {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest index distance of a nonzero entry from the diagonal.
    pub fn bandwidth(&self) -> usize {
        self.hops.iter().map(|&(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_radius_bound(&self) -> f64 {
        let mut row = self.diag.iter().map(|d| d.norm()).collect::<Vec<_>>();
        for &(i, _, v) in &self.hops {
            row[i] += v.norm();
        }
        row.into_iter().fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = self.to_dense();
        (&m - m.adjoint()).iter().all(|z| z.norm() <= tol)
    }
}

/// Uniform Brillouin-zone midpoints `k_j = −π + (j + ½)·2π/n`.
pub fn k_midpoints(n: usize) -> impl Iterator<Item = f64> + Clone {
    let dk = 2.0 * PI / n as f64;
    (0..n).map(move |j| -PI + (j as f64 + 0.5) * dk)
}
