//! Banded LU factorization with partial pivoting.
//!
//! LAPACK-style band storage: a matrix with `kl` subdiagonals and `ku`
//! superdiagonals is held column-major in a `(2kl + ku + 1) × n` array, entry
//! `(i, j)` at row `kl + ku + i − j` of column `j`; the extra `kl` leading
//! rows absorb pivoting fill. The factorization is unblocked — the per-column
//! rank-one update runs over contiguous column slices, which is where all the
//! time goes for the polar-grid Jacobians this backs.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
            ipiv: vec![0; n],
            factored: false,
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    /// Clears all entries so the storage can be refilled for a new system.
    pub fn reset(&mut self) {
        self.data.fill(0.0);
        self.factored = false;
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(
            i + self.ku >= j && j + self.kl >= i,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(!self.factored);
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// In-place LU with partial pivoting (dgbtrf layout, unblocked).
    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        // rightmost column touched by fill so far (LAPACK's JU)
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j among rows j..=j+km
            let col = j * ldab;
            let mut piv_off = 0usize;
            let mut piv_val = 0.0f64;
            for i in 0..=km {
                let cand = crate::math::abs(self.data[col + kv + i]);
                if cand > piv_val {
                    piv_val = cand;
                    piv_off = i;
                }
            }
            if piv_val == 0.0 {
                return Err(Error::Numeric(format!("singular system at column {j}")));
            }
            self.ipiv[j] = j + piv_off;
            ju = ju.max((j + ku + piv_off).min(n - 1)).max(j);
            if piv_off > 0 {
                // swap rows j and j+piv_off across columns j..=ju
                for c in j..=ju {
                    let base = c * ldab + (kv + j - c);
                    self.data.swap(base, base + piv_off);
                }
            }
            let pivot = self.data[col + kv];
            for i in 1..=km {
                self.data[col + kv + i] /= pivot;
            }
            if km == 0 || ju == j {
                continue;
            }
            // trailing update: rank-one over contiguous slices
            let (lcol, rest) = self.data.split_at_mut((j + 1) * ldab);
            let multipliers = &lcol[col + kv + 1..col + kv + 1 + km];
            for c in j + 1..=ju {
                let base = (c - j - 1) * ldab + (kv + j - c);
                let alpha = rest[base];
                if alpha == 0.0 {
                    continue;
                }
                let window = &mut rest[base + 1..base + 1 + km];
                for (w, m) in window.iter_mut().zip(multipliers) {
                    *w -= alpha * m;
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place using the computed factorization.
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "factor() must succeed before solve()");
        assert_eq!(b.len(), self.n);
        let (n, kl, ldab) = (self.n, self.kl, self.ldab);
        let kv = kl + self.ku;
        // L solve with row exchanges
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj == 0.0 {
                continue;
            }
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            for i in 1..=km {
                b[j + i] -= self.data[col + kv + i] * bj;
            }
        }
        // U solve
        for j in (0..n).rev() {
            let col = j * ldab;
            let xj = b[j] / self.data[col + kv];
            b[j] = xj;
            if xj == 0.0 {
                continue;
            }
            let reach = kv.min(j);
            for k in 1..=reach {
                b[j - k] -= self.data[col + kv - k] * xj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SplitMix64;

    /// Dense Gaussian elimination with partial pivoting, the test oracle.
    fn dense_solve(a: &mut [Vec<f64>], b: &mut [f64]) {
        let n = b.len();
        for j in 0..n {
            let mut p = j;
            for i in j + 1..n {
                if a[i][j].abs() > a[p][j].abs() {
                    p = i;
                }
            }
            a.swap(j, p);
            b.swap(j, p);
            for i in j + 1..n {
                let m = a[i][j] / a[j][j];
                if m == 0.0 {
                    continue;
                }
                for k in j..n {
                    a[i][k] -= m * a[j][k];
                }
                b[i] -= m * b[j];
            }
        }
        for j in (0..n).rev() {
            let mut s = b[j];
            for k in j + 1..n {
                s -= a[j][k] * b[k];
            }
            b[j] = s / a[j][j];
        }
    }

    #[test]
    fn random_band_systems_match_dense() {
        let mut rng = SplitMix64::new(21);
        for &(n, kl, ku) in &[(12usize, 3usize, 2usize), (40, 5, 5), (75, 9, 4)] {
            for _ in 0..5 {
                let mut band = BandMatrix::new(n, kl, ku);
                let mut dense = vec![vec![0.0f64; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i + ku >= j && j + kl >= i {
                            let v = rng.uniform(-1.0, 1.0)
                                + if i == j { 4.0 } else { 0.0 };
                            band.add(i, j, v);
                            dense[i][j] = v;
                        }
                    }
                }
                let x_true: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
                let mut rhs = vec![0.0f64; n];
                for i in 0..n {
                    for j in 0..n {
                        rhs[i] += dense[i][j] * x_true[j];
                    }
                }
                let mut b_band = rhs.clone();
                band.factor().unwrap();
                band.solve(&mut b_band);
                let mut b_dense = rhs;
                dense_solve(&mut dense, &mut b_dense);
                for i in 0..n {
                    assert!(
                        (b_band[i] - x_true[i]).abs() < 1e-10,
                        "band vs truth at {i}: {} vs {}",
                        b_band[i],
                        x_true[i]
                    );
                    assert!((b_band[i] - b_dense[i]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0,1],[1,0]] needs the row exchange
        let mut band = BandMatrix::new(2, 1, 1);
        band.add(0, 1, 1.0);
        band.add(1, 0, 1.0);
        band.factor().unwrap();
        let mut b = vec![2.0, 3.0];
        band.solve(&mut b);
        assert!((b[0] - 3.0).abs() < 1e-15);
        assert!((b[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_detected() {
        let mut band = BandMatrix::new(3, 1, 1);
        band.add(0, 0, 1.0);
        band.add(1, 1, 1.0);
        // column 2 left identically zero
        match band.factor() {
            Err(Error::Numeric(msg)) => assert!(msg.contains("column 2")),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn reset_allows_refill() {
        let mut band = BandMatrix::new(4, 1, 1);
        for i in 0..4 {
            band.add(i, i, 2.0);
        }
        band.factor().unwrap();
        band.reset();
        for i in 0..4 {
            band.add(i, i, 4.0);
        }
        band.factor().unwrap();
        let mut b = vec![4.0; 4];
        band.solve(&mut b);
        for x in b {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }
}
