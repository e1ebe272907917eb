//! Small dense linear algebra: 2×2 complex matrices with closed-form
//! exponentials, Floquet angles of unimodular matrices, and a dense complex
//! eigensolver for the truncated real-space operators.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl Mat2 {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, C64::new(0.0, 0.0), C64::new(0.0, 0.0), d2)
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn half_trace(&self) -> C64 {
        0.5 * self.trace()
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: C64, y: C64) -> (C64, C64) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }

    pub fn dist(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// `exp(self)` in closed form.
    ///
    /// With `B = A − (tr A / 2)·1` one has `B² = s²·1`, so
    /// `exp(A) = e^{tr A/2} (cosh s · 1 + sinh(s)/s · B)`.
    pub fn exp(&self) -> Self {
        let shift = self.half_trace();
        let b = Self::new(self.a11 - shift, self.a12, self.a21, self.a22 - shift);
        let s2 = b.a11 * b.a11 + b.a12 * b.a21;
        let (ch, shc) = cosh_sinhc(s2);
        let e = shift.exp();
        Self::new(
            e * (ch + shc * b.a11),
            e * shc * b.a12,
            e * shc * b.a21,
            e * (ch + shc * b.a22),
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 + r.a11, self.a12 + r.a12, self.a21 + r.a21, self.a22 + r.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 - r.a11, self.a12 - r.a12, self.a21 - r.a21, self.a22 - r.a22)
    }
}

/// `(cosh √x, sinh(√x)/√x)`, both entire in `x`, so the branch of the root
/// does not matter. Small arguments use the Taylor series.
fn cosh_sinhc(x: C64) -> (C64, C64) {
    if x.norm() < 1e-6 {
        let ch = 1.0 + x / 2.0 + x * x / 24.0;
        let shc = 1.0 + x / 6.0 + x * x / 120.0;
        (ch, shc)
    } else {
        let s = x.sqrt();
        (s.cosh(), s.sinh() / s)
    }
}

/// Eigenvalues `λ, 1/λ` of a unimodular 2×2 matrix with half-trace `w`,
/// returned as the root with `|λ| ≥ 1`.
fn dominant_root(w: C64) -> C64 {
    let r = (w * w - 1.0).sqrt();
    let (p, m) = (w + r, w - r);
    if p.norm() >= m.norm() {
        p
    } else {
        m
    }
}

/// Below this `|Im φ|` an angle counts as real when picking its sign.
const REAL_ANGLE_TOL: f64 = 1e-12;

/// Floquet angle `φ` of a unimodular matrix with half-trace `w`, i.e.
/// `cos φ = w`.
///
/// `±φ` and `φ + 2πl` describe the same pair of eigenvalues `e^{±iφ}`. The
/// representative has `Im φ ≥ 0` and `Re φ ∈ (−π, π]`; real angles are
/// reported in `[0, π]`.
pub fn floquet_angle(w: C64) -> C64 {
    if !w.re.is_finite() || !w.im.is_finite() {
        return C64::new(f64::NAN, f64::NAN);
    }
    if w.norm() > 1e150 {
        // λ ≈ 2w; the correction is O(1/w²).
        let ln_lambda = (2.0f64).ln() + w.ln();
        return representative(-ln_lambda.im, ln_lambda.re);
    }
    let lambda = dominant_root(w);
    representative(-lambda.arg(), lambda.norm().ln())
}

/// `φ = −arg λ + i ln|λ|` for the dominant root λ, with `Im φ ≥ 0`. A real
/// angle is reported with `Re φ ≥ 0`.
fn representative(re: f64, im: f64) -> C64 {
    let im = im.max(0.0);
    let re = if re < -PI + REAL_ANGLE_TOL { re + 2.0 * PI } else { re };
    if im < REAL_ANGLE_TOL && re < 0.0 {
        C64::new(-re, im)
    } else {
        C64::new(re, im)
    }
}

/// Floquet angle of a unimodular matrix given as `mantissa · e^{log_scale}`.
///
/// Uses the dominant eigenvalue `w ± √(((a₁₁ − a₂₂)/2)² + a₁₂a₂₁)`, which
/// stays accurate when the half-trace sits near `±1` (a near-degenerate
/// but diagonalizable matrix), unlike `arccos w`.
pub fn floquet_angle_of(m: &Mat2, log_scale: f64) -> C64 {
    let w = m.half_trace();
    let half_diff = (m.a11 - m.a22) * 0.5;
    let r = (half_diff * half_diff + m.a12 * m.a21).sqrt();
    let (p, q) = (w + r, w - r);
    let lambda = if p.norm() >= q.norm() { p } else { q };
    if !(lambda.re.is_finite() && lambda.im.is_finite()) || lambda.norm() == 0.0 {
        return C64::new(f64::NAN, f64::NAN);
    }
    representative(-lambda.arg(), lambda.norm().ln() + log_scale)
}

/// Distance between two ladder offsets, treating `θ` and `−θ + lF` as the
/// same ladder pair.
pub fn ladder_distance(a: C64, b: C64, spacing: f64) -> f64 {
    let fold = |z: C64| {
        let re = z.re - spacing * (z.re / spacing).round();
        C64::new(re, z.im).norm()
    };
    fold(a - b).min(fold(a + b))
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Eigenpairs of a dense complex matrix.
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, column `j` pairs with `values[j]`.
    pub vectors: DMatrix<C64>,
}

/// Complex Schur decomposition followed by back-substitution on the
/// triangular factor for the eigenvectors.
pub fn eigen_decomposition(m: DMatrix<C64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, not square",
            n,
            m.ncols()
        )));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Convergence("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * scale;

    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut y = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let lambda = values[k];
        y[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut pivot = t[(j, j)] - lambda;
            if pivot.norm() < small {
                pivot = C64::new(small, 0.0);
            }
            y[j] = -acc / pivot;
        }
        let mut col = vec![C64::new(0.0, 0.0); n];
        for (i, c) in col.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..=k {
                acc += q[(i, l)] * y[l];
            }
            *c = acc;
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (i, c) in col.into_iter().enumerate() {
            vectors[(i, k)] = c / norm;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_exp(a: &Mat2) -> Mat2 {
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..60 {
            term = (term * *a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn exp_matches_taylor_series() {
        let a = Mat2::new(
            C64::new(0.3, -0.2),
            C64::new(1.1, 0.4),
            C64::new(-0.7, 0.05),
            C64::new(0.1, 0.9),
        );
        assert!(a.exp().dist(&series_exp(&a)) < 1e-13);
    }

    #[test]
    fn exp_of_nilpotent_is_exact() {
        let z = C64::new(0.0, 0.0);
        let a = Mat2::new(z, C64::new(2.5, 0.0), z, z);
        let e = a.exp();
        assert_eq!(e.a12, C64::new(2.5, 0.0));
        assert_eq!(e.a11, C64::new(1.0, 0.0));
    }

    #[test]
    fn floquet_angle_inverts_cosine() {
        for w in [
            C64::new(0.3, 0.0),
            C64::new(-0.99, 0.0),
            C64::new(1.7, 0.0),
            C64::new(-3.2, 0.0),
            C64::new(0.4, 0.8),
        ] {
            let phi = floquet_angle(w);
            let back = phi.cos();
            // cos(±φ) = w; conjugate only for the real branch.
            assert!((back - w).norm() < 1e-12, "{w} -> {phi}");
            assert!(phi.im >= 0.0);
        }
        assert!((floquet_angle(C64::new(0.5, 0.0)).re - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn floquet_angle_large_argument() {
        let w = C64::new(-1e200, 0.0);
        let phi = floquet_angle(w);
        assert!((phi.re - PI).abs() < 1e-12);
        assert!((phi.im - (2e200f64).ln()).abs() < 1e-9);
        // diag(−2, ~0) scaled by e^1000: dominant eigenvalue −2e^1000
        let m = Mat2::diag(C64::new(-2.0, 0.0), C64::new(0.0, 0.0));
        let scaled = floquet_angle_of(&m, 1000.0);
        assert!((scaled.im - (1000.0 + 2f64.ln())).abs() < 1e-9);
        assert!((scaled.re - PI).abs() < 1e-12);
    }

    #[test]
    fn matrix_angle_is_accurate_near_identity() {
        // exp(−iσ_z·1e-9): arccos of the half-trace loses everything here.
        let m = Mat2::diag(C64::from_polar(1.0, -1e-9), C64::from_polar(1.0, 1e-9));
        let phi = floquet_angle_of(&m, 0.0);
        assert!((phi.re - 1e-9).abs() < 1e-22 && phi.im.abs() < 1e-22, "{phi}");
        let rot = Mat2::new(
            C64::new(0.6, 0.0),
            C64::new(-0.8, 0.0),
            C64::new(0.8, 0.0),
            C64::new(0.6, 0.0),
        );
        assert!((floquet_angle_of(&rot, 0.0) - floquet_angle(C64::new(0.6, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn eigen_decomposition_of_small_matrix() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.5),
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.3, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(0.7, 0.0),
                C64::new(0.2, -0.4),
            ],
        );
        let eig = eigen_decomposition(m.clone()).unwrap();
        for k in 0..3 {
            let v = eig.vectors.column(k);
            let r = &m * v - v * eig.values[k];
            assert!(r.norm() < 1e-12);
        }
    }
}
