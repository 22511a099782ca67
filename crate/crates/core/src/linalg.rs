//! Small dense linear algebra: 2×2 kernels for the chart/graph pipeline and
//! a minimal row-major matrix for orthogonal factors.

use crate::error::{Error, Result};
use crate::math;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Symmetric 2×2 matrix, the workhorse of the n = 2 grid pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    #[inline]
    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    #[inline]
    pub fn diag(a: f64, b: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: b }
    }

    /// Rank-one `v vᵀ`.
    #[inline]
    pub fn outer(v: [f64; 2]) -> Self {
        Sym2 { xx: v[0] * v[0], xy: v[0] * v[1], yy: v[1] * v[1] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    #[inline]
    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }

    #[inline]
    pub fn sub(&self, o: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }

    #[inline]
    pub fn scale(&self, c: f64) -> Sym2 {
        Sym2 { xx: c * self.xx, xy: c * self.xy, yy: c * self.yy }
    }

    #[inline]
    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    /// Frobenius inner product `Σᵢⱼ AᵢⱼBᵢⱼ` (off-diagonal counted twice).
    #[inline]
    pub fn dot(&self, o: &Sym2) -> f64 {
        self.xx * o.xx + self.yy * o.yy + 2.0 * self.xy * o.xy
    }

    #[inline]
    pub fn inverse(&self) -> Result<Sym2> {
        let d = self.det();
        if d == 0.0 {
            return Err(Error::Numeric(String::from("singular 2x2 matrix")));
        }
        Ok(Sym2 { xx: self.yy / d, xy: -self.xy / d, yy: self.xx / d })
    }

    /// Principal square root of an SPD matrix:
    /// `√M = (M + √det·I) / √(tr M + 2√det)`.
    pub fn sqrt_spd(&self) -> Result<Sym2> {
        let d = self.det();
        let t = self.trace();
        if !(d > 0.0 && t > 0.0) {
            return Err(Error::Numeric(String::from("matrix not positive definite")));
        }
        let s = math::sqrt(d);
        let denom = math::sqrt(t + 2.0 * s);
        Ok(Sym2 {
            xx: (self.xx + s) / denom,
            xy: self.xy / denom,
            yy: (self.yy + s) / denom,
        })
    }

    /// Eigenvalues in ascending order.
    #[inline]
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * (self.xx + self.yy);
        let d = 0.5 * (self.xx - self.yy);
        let r = math::hypot(d, self.xy);
        [m - r, m + r]
    }

    /// Eigenvalues (ascending) and an orthonormal eigenvector matrix `Q`
    /// with `Q` columns aligned to the returned order.
    pub fn eigen(&self) -> ([f64; 2], Mat2) {
        let lam = self.eigenvalues();
        if math::abs(self.xy) <= 1e-300 {
            // already diagonal; order columns to match ascending eigenvalues
            return if self.xx <= self.yy {
                (lam, Mat2::IDENTITY)
            } else {
                (lam, Mat2::new(0.0, 1.0, 1.0, 0.0))
            };
        }
        // eigenvector for lam[0]: (xy, lam0 - xx) or (lam0 - yy, xy), the
        // numerically larger of the two formulations
        let a = [self.xy, lam[0] - self.xx];
        let b = [lam[0] - self.yy, self.xy];
        let v = if a[0] * a[0] + a[1] * a[1] >= b[0] * b[0] + b[1] * b[1] { a } else { b };
        let norm = math::hypot(v[0], v[1]);
        let v0 = [v[0] / norm, v[1] / norm];
        // second eigenvector is the perpendicular
        let v1 = [-v0[1], v0[0]];
        (lam, Mat2::from_cols(v0, v1))
    }
}

/// General 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    #[inline]
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    #[inline]
    pub fn from_cols(c0: [f64; 2], c1: [f64; 2]) -> Self {
        Mat2 { a: c0[0], b: c1[0], c: c0[1], d: c1[1] }
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det == 0.0 {
            return Err(Error::Numeric(String::from("singular 2x2 matrix")));
        }
        Ok(Mat2 { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det })
    }

    #[inline]
    pub fn transpose(&self) -> Mat2 {
        Mat2 { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    #[inline]
    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// `A · S · Aᵀ` for symmetric `S`; the result is symmetric.
    pub fn sandwich(&self, s: &Sym2) -> Sym2 {
        let r0 = [
            self.a * s.xx + self.b * s.xy,
            self.a * s.xy + self.b * s.yy,
        ];
        let r1 = [
            self.c * s.xx + self.d * s.xy,
            self.c * s.xy + self.d * s.yy,
        ];
        Sym2 {
            xx: r0[0] * self.a + r0[1] * self.b,
            xy: r0[0] * self.c + r0[1] * self.d,
            yy: r1[0] * self.c + r1[1] * self.d,
        }
    }
}

/// `γ · S · γ` for symmetric `γ` and `S` (a symmetric sandwich).
#[inline]
pub fn sym_sandwich(gamma: &Sym2, s: &Sym2) -> Sym2 {
    Mat2::new(gamma.xx, gamma.xy, gamma.xy, gamma.yy).sandwich(s)
}

/// Dense row-major matrix; used for orthogonal factors and test oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Max-norm defect of `PᵀP − I`.
    pub fn orthogonality_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "orthogonality needs a square matrix");
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.get(k, i) * self.get(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(math::abs(s - target));
            }
        }
        worst
    }
}

/// Solves the small SPD system `A x = b` by unpivoted Cholesky, in place.
/// Intended for tiny systems (the pole fit's 5×5 normal equations).
pub fn solve_spd_small(a: &mut Matrix, b: &mut [f64]) -> Result<()> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    // factor A = L Lᵀ, L stored in the lower triangle
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= a.get(j, k) * a.get(j, k);
        }
        if d <= 0.0 {
            return Err(Error::Numeric(String::from("small SPD solve: not positive definite")));
        }
        let ljj = math::sqrt(d);
        a.set(j, j, ljj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= a.get(i, k) * a.get(j, k);
            }
            a.set(i, j, s / ljj);
        }
    }
    // forward then back substitution
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a.get(i, k) * b[k];
        }
        b[i] = s / a.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a.get(k, i) * b[k];
        }
        b[i] = s / a.get(i, i);
    }
    Ok(())
}
