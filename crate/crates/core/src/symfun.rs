//! Elementary symmetric functions, the Gårding cone Γ_r and the normalized
//! curvature function `f = (S_r / binom(n,r))^{1/r}`.
//!
//! `S_r(λ) = Σ λ_{i₁}···λ_{i_r}` over increasing index tuples, with the
//! conventions `S_0 = 1` and `H_r = S_r / S_r(1,…,1)` so that `H_r(1,…,1) = 1`.
//! The admissibility cone is `Γ_r = {λ : S_j(λ) > 0, j = 1..r}`, open and
//! convex; on it `f` is positive, concave and degree-1 homogeneous, and every
//! partial derivative `f_i` is strictly positive. Those facts are what the
//! elliptic solver leans on, and they are covered by the property suite.
//!
//! All functions here are pure and dimension-generic; fixed-size fast paths
//! for the n = 2 grid pipeline live in the consumer modules.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Candidate principal-curvature tuple. Operations validate that its length
/// matches the `n` of the governing [`CurvatureSpec`].
pub type EigenTuple = Vec<f64>;

/// Dimension `n` and curvature order `r` of the prescribed-curvature problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurvatureSpec {
    n: usize,
    r: usize,
}

impl CurvatureSpec {
    /// Curvature problem of order `r` in dimension `n`, requiring `1 < r ≤ n`.
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("dimension n = {n} must be at least 2")));
        }
        if !(1 < r && r <= n) {
            return Err(Error::Argument(format!(
                "curvature order r = {r} must satisfy 1 < r <= n = {n}"
            )));
        }
        Ok(CurvatureSpec { n, r })
    }

    /// Cone predicate of order `r` with the relaxed range `1 ≤ r ≤ n`;
    /// order 1 gives the mean-curvature half-space Γ₁.
    pub fn with_order(n: usize, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("dimension n = {n} must be at least 2")));
        }
        if !(1 <= r && r <= n) {
            return Err(Error::Argument(format!(
                "cone order r = {r} must satisfy 1 <= r <= n = {n}"
            )));
        }
        Ok(CurvatureSpec { n, r })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    fn check_len(&self, lam: &[f64]) -> Result<()> {
        if lam.len() != self.n {
            return Err(Error::Argument(format!(
                "tuple length {} does not match n = {}",
                lam.len(),
                self.n
            )));
        }
        Ok(())
    }
}

/// `binom(n, r)` as a float; this equals `S_r(1,…,1)`.
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut acc = 1.0f64;
    for k in 0..r {
        acc = acc * ((n - k) as f64) / ((k + 1) as f64);
    }
    acc
}

/// All elementary symmetric functions `S_0 .. S_n` of `lam`, by the stable
/// product-expansion recursion (coefficients of `Π (1 + λ_i t)`), not subset
/// enumeration.
pub fn elementary_all(lam: &[f64]) -> Vec<f64> {
    let n = lam.len();
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for (k, &x) in lam.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// Same recursion with entry `skip` left out, yielding `S_j(λ ∖ λ_skip)`.
fn elementary_all_excluding(lam: &[f64], skip: usize) -> Vec<f64> {
    let n = lam.len();
    let mut e = vec![0.0f64; n];
    e[0] = 1.0;
    let mut seen = 0usize;
    for (i, &x) in lam.iter().enumerate() {
        if i == skip {
            continue;
        }
        seen += 1;
        for j in (1..=seen).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `S_j(lam)` with `0 ≤ j ≤ n`; `S_0 = 1` by the empty-product convention.
pub fn elementary_sym(order: usize, lam: &[f64]) -> Result<f64> {
    let n = lam.len();
    if order > n {
        return Err(Error::OrderOutOfRange { order, n });
    }
    Ok(elementary_all(lam)[order])
}

/// True iff `S_j(lam) > 0` for every `j = 1..=r` (strict inequalities;
/// cone boundaries are excluded).
pub fn cone_contains(spec: &CurvatureSpec, lam: &[f64]) -> bool {
    cone_check(spec, lam).is_ok()
}

/// Cone membership with diagnostics: `Err` carries the first violated order
/// and the value of the offending `S_j`.
pub fn cone_check(spec: &CurvatureSpec, lam: &[f64]) -> Result<()> {
    spec.check_len(lam)?;
    let e = elementary_all(lam);
    for j in 1..=spec.r {
        if !(e[j] > 0.0) {
            return Err(Error::Inadmissible { node: None, order: j, value: e[j] });
        }
    }
    Ok(())
}

/// Worst cone margin `min_{j ≤ r} S_j(lam)`; positive iff `lam ∈ Γ_r`.
pub fn cone_margin(spec: &CurvatureSpec, lam: &[f64]) -> Result<f64> {
    spec.check_len(lam)?;
    let e = elementary_all(lam);
    let mut m = f64::INFINITY;
    for j in 1..=spec.r {
        m = m.min(e[j]);
    }
    Ok(m)
}

/// Normalized curvature `f(lam) = (S_r / binom(n,r))^{1/r}`, defined on Γ_r.
pub fn f_value(spec: &CurvatureSpec, lam: &[f64]) -> Result<f64> {
    cone_check(spec, lam)?;
    let sr = elementary_all(lam)[spec.r];
    Ok(math::powf(sr / binomial(spec.n, spec.r), 1.0 / spec.r as f64))
}

/// Gradient of `f`: `f_i = (1/r)(S_r/c)^{(1−r)/r} · S_{r−1}(λ∖i)/c` with
/// `c = binom(n,r)`. Strictly positive on Γ_r.
pub fn f_gradient(spec: &CurvatureSpec, lam: &[f64]) -> Result<EigenTuple> {
    let mut out = vec![0.0f64; lam.len()];
    f_gradient_into(spec, lam, &mut out)?;
    Ok(out)
}

/// Allocation-free variant of [`f_gradient`] for per-node hot loops.
pub fn f_gradient_into(spec: &CurvatureSpec, lam: &[f64], out: &mut [f64]) -> Result<()> {
    cone_check(spec, lam)?;
    if out.len() != lam.len() {
        return Err(Error::Argument(String::from("output length mismatch")));
    }
    let c = binomial(spec.n, spec.r);
    let r = spec.r as f64;
    let sr = elementary_all(lam)[spec.r];
    let prefactor = math::powf(sr / c, (1.0 - r) / r) / (r * c);
    for i in 0..lam.len() {
        let e_minus = elementary_all_excluding(lam, i);
        out[i] = prefactor * e_minus[spec.r - 1];
    }
    Ok(())
}

/// Symmetric n×n matrix in packed lower-triangular storage, so stored
/// symmetry is exact by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[Self::idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[Self::idx(i, j)] = v;
    }

    /// Full contraction `Σᵢⱼ AᵢⱼBᵢⱼ` (off-diagonal pairs counted twice).
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                s += w * self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    /// `Q · A · Qᵀ` for a square `Q`.
    pub fn conjugated(&self, q: &Matrix) -> SymMatrix {
        assert_eq!(q.rows(), self.n);
        assert_eq!(q.cols(), self.n);
        let n = self.n;
        // B = Q·A (dense), then C = B·Qᵀ, keep the symmetric half
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let qik = q.get(i, k);
                if qik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = b.get(i, j) + qik * self.get(k, j);
                    b.set(i, j, v);
                }
            }
        }
        SymMatrix::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += b.get(i, k) * q.get(j, k);
            }
            s
        })
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors by cyclic Jacobi
    /// rotations, with the closed-form path for n = 2. Repeated eigenvalues
    /// need no special handling downstream: only first derivatives of
    /// symmetric functions of the spectrum are consumed, and those are
    /// continuous across coalescence.
    pub fn eigen(&self) -> Result<(Vec<f64>, Matrix)> {
        let n = self.n;
        if n == 1 {
            return Ok((vec![self.get(0, 0)], Matrix::identity(1)));
        }
        if n == 2 {
            let s2 = crate::linalg::Sym2::new(self.get(0, 0), self.get(1, 0), self.get(1, 1));
            let (lam, q2) = s2.eigen();
            let mut q = Matrix::zeros(2, 2);
            q.set(0, 0, q2.a);
            q.set(0, 1, q2.b);
            q.set(1, 0, q2.c);
            q.set(1, 1, q2.d);
            return Ok((vec![lam[0], lam[1]], q));
        }
        // dense working copy
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, self.get(i, j));
            }
        }
        let mut v = Matrix::identity(n);
        let norm = {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
            math::sqrt(s)
        };
        let tol = 1e-15 * norm.max(f64::MIN_POSITIVE);
        let max_sweeps = 60;
        for _sweep in 0..max_sweeps {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off = off.max(math::abs(a.get(p, q)));
                }
            }
            if off <= tol {
                let mut lam: Vec<(f64, usize)> =
                    (0..n).map(|i| (a.get(i, i), i)).collect();
                lam.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut qout = Matrix::zeros(n, n);
                for (new_col, &(_, old_col)) in lam.iter().enumerate() {
                    for row in 0..n {
                        qout.set(row, new_col, v.get(row, old_col));
                    }
                }
                return Ok((lam.into_iter().map(|x| x.0).collect(), qout));
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if math::abs(apq) <= tol * 1e-2 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = {
                        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                        sign / (math::abs(theta) + math::sqrt(theta * theta + 1.0))
                    };
                    let c = 1.0 / math::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        Err(Error::Numeric(String::from("jacobi eigensolver did not converge")))
    }
}

/// First derivative matrix `F^{ij} = ∂F/∂a_ij` of `F(A) = f(λ(A))`:
/// with `A = Q diag(λ) Qᵀ`, `F^{ij} = Σ_k f_k(λ) q_ik q_jk`. Symmetric
/// positive definite and simultaneously diagonalizable with `A`.
pub fn matrix_f_derivative(spec: &CurvatureSpec, a: &SymMatrix) -> Result<SymMatrix> {
    if a.dim() != spec.n() {
        return Err(Error::Argument(format!(
            "matrix dimension {} does not match n = {}",
            a.dim(),
            spec.n()
        )));
    }
    let (lam, q) = a.eigen()?;
    let grad = f_gradient(spec, &lam)?;
    let n = spec.n();
    Ok(SymMatrix::from_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            s += grad[k] * q.get(i, k) * q.get(j, k);
        }
        s
    }))
}

/// Ratio `(Σ f_i λ_i²) / (λ_j·[λ_j>0] + Σ_{k≠j} f_k λ_k²)` probing the
/// bounded-ratio inequality on the slice `Γ_ψ = {ψ₀ ≤ f ≤ ψ₁}`.
///
/// `j` is a zero-based index. A nonpositive denominator is reported as
/// `f64::INFINITY`, which the property suite treats as failure evidence.
pub fn ivochkina_ratio(
    spec: &CurvatureSpec,
    lam: &[f64],
    j: usize,
    psi0: f64,
    psi1: f64,
) -> Result<f64> {
    if j >= lam.len() {
        return Err(Error::Argument(format!("index {j} out of range for n = {}", lam.len())));
    }
    let f = f_value(spec, lam)?;
    let slack = 1e-9 * (1.0 + math::abs(f));
    if f < psi0 - slack || f > psi1 + slack {
        return Err(Error::Argument(format!(
            "f = {f:e} outside the slice [{psi0:e}, {psi1:e}]"
        )));
    }
    let grad = f_gradient(spec, lam)?;
    let numerator: f64 = lam.iter().zip(&grad).map(|(&l, &g)| g * l * l).sum();
    let mut denominator = if lam[j] > 0.0 { lam[j] } else { 0.0 };
    for k in 0..lam.len() {
        if k != j {
            denominator += grad[k] * lam[k] * lam[k];
        }
    }
    if denominator <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(numerator / denominator)
}

/// Checks the orthogonal-matrix cofactor bound: if column `gamma` of an
/// orthogonal `P = [η_{lα}]` has tangential mass `Σ_{l<n} η_{lγ}² < K⁻²`,
/// then every other column satisfies
/// `Σ_{l<n} η_{lα}² ≥ ε₀²` with `ε₀ = 1 / (2 (n−1)^{1/2} (n−2)!)`,
/// a lower bound independent of `K`.
///
/// "`l < n`" sums over all rows but the last. Requires `K ≥ 2`, `P`
/// orthogonal to 1e−10 and the hypothesis to hold for column `gamma`
/// (zero-based); violations are argument errors, not `false`.
pub fn appendix_cofactor_check(p: &Matrix, k: f64, gamma: usize) -> Result<bool> {
    let n = p.rows();
    if p.cols() != n || n < 2 {
        return Err(Error::Argument(String::from("P must be square with n >= 2")));
    }
    if gamma >= n {
        return Err(Error::Argument(format!("column {gamma} out of range for n = {n}")));
    }
    if !(k >= 2.0) {
        return Err(Error::Argument(format!("K = {k} must be at least 2")));
    }
    let defect = p.orthogonality_defect();
    if defect > 1e-10 {
        return Err(Error::Argument(format!(
            "P is not orthogonal: max |PᵀP - I| = {defect:e}"
        )));
    }
    let tangential = |col: usize| -> f64 {
        (0..n - 1).map(|l| p.get(l, col) * p.get(l, col)).sum()
    };
    if !(tangential(gamma) < 1.0 / (k * k)) {
        return Err(Error::Argument(format!(
            "hypothesis fails: column {gamma} has tangential mass {:e} >= K^-2",
            tangential(gamma)
        )));
    }
    let mut factorial = 1.0f64;
    for m in 2..n - 1 {
        factorial *= m as f64;
    }
    let eps0 = 1.0 / (2.0 * math::sqrt((n - 1) as f64) * factorial);
    let bound = eps0 * eps0;
    for alpha in 0..n {
        if alpha != gamma && tangential(alpha) < bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SplitMix64;

    /// Subset-enumeration oracle for S_j; exponential, test-only, n ≤ ~12.
    fn elementary_enum(order: usize, lam: &[f64]) -> f64 {
        fn rec(order: usize, lam: &[f64], start: usize) -> f64 {
            if order == 0 {
                return 1.0;
            }
            let mut acc = 0.0;
            for i in start..lam.len() {
                acc += lam[i] * rec(order - 1, lam, i + 1);
            }
            acc
        }
        rec(order, lam, 0)
    }

    fn spec(n: usize, r: usize) -> CurvatureSpec {
        CurvatureSpec::with_order(n, r).unwrap()
    }

    #[test]
    fn spec_ranges() {
        assert!(CurvatureSpec::new(3, 2).is_ok());
        assert!(CurvatureSpec::new(3, 1).is_err());
        assert!(CurvatureSpec::new(3, 4).is_err());
        assert!(CurvatureSpec::with_order(3, 1).is_ok());
        assert!(CurvatureSpec::with_order(3, 0).is_err());
        assert!(CurvatureSpec::new(1, 1).is_err());
    }

    #[test]
    fn elementary_basic_values() {
        assert_eq!(elementary_sym(2, &[1.0, 1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(elementary_sym(0, &[4.0, -2.0, 7.5]).unwrap(), 1.0);
        // S_2(1,2,3) = 2 + 3 + 6
        let direct = elementary_sym(2, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(direct, elementary_enum(2, &[1.0, 2.0, 3.0]));
        assert_eq!(direct, 11.0);
        assert!(matches!(
            elementary_sym(4, &[1.0, 2.0, 3.0]),
            Err(Error::OrderOutOfRange { order: 4, n: 3 })
        ));
    }

    #[test]
    fn elementary_matches_enumeration_randomized() {
        let mut rng = SplitMix64::new(0x5eed);
        for n in 2..=6 {
            for _ in 0..40 {
                let lam: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
                let all = elementary_all(&lam);
                for j in 0..=n {
                    let oracle = elementary_enum(j, &lam);
                    assert!(
                        (all[j] - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()),
                        "n={n} j={j}: {} vs {}",
                        all[j],
                        oracle
                    );
                }
            }
        }
    }

    #[test]
    fn cone_examples() {
        assert!(cone_contains(&spec(3, 2), &[1.0, 1.0, 1.0]));
        // S_1 = 2.5 > 0 but S_2 = -1.5
        assert!(!cone_contains(&spec(2, 2), &[3.0, -0.5]));
        // boundary S_2 = 0 excluded by strictness
        assert!(!cone_contains(&spec(2, 2), &[0.0, 1.0]));
        let err = cone_check(&spec(2, 2), &[3.0, -0.5]).unwrap_err();
        assert_eq!(err, Error::Inadmissible { node: None, order: 2, value: -1.5 });
    }

    #[test]
    fn cone_nesting() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..200 {
            let lam = crate::sampling::sample_cone(&mut rng, &spec(4, 3));
            for r_lower in 1..3 {
                assert!(cone_contains(&spec(4, r_lower), &lam), "nesting failed at {lam:?}");
            }
        }
    }

    #[test]
    fn f_value_examples() {
        let s32 = spec(3, 2);
        assert_eq!(f_value(&s32, &[1.0, 1.0, 1.0]).unwrap(), 1.0);
        let expected = math::sqrt(elementary_enum(2, &[1.0, 2.0, 3.0]) / 3.0);
        let got = f_value(&s32, &[1.0, 2.0, 3.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        // homogeneity f(t,t) = t for n = r = 2
        let s22 = spec(2, 2);
        for &t in &[0.25, 1.0, 3.5] {
            assert!((f_value(&s22, &[t, t]).unwrap() - t).abs() < 1e-14);
        }
        assert!(matches!(
            f_value(&s22, &[1.0, -1.0]),
            Err(Error::Inadmissible { order: 1, .. })
        ));
    }

    /// Central finite differences of f_value over a sweep of steps; the
    /// best-step estimate is the independent oracle for the gradient.
    fn fd_gradient(sp: &CurvatureSpec, lam: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; lam.len()];
        for i in 0..lam.len() {
            let mut best = f64::NAN;
            let mut best_spread = f64::INFINITY;
            for &h in &[1e-4, 1e-5, 1e-6] {
                let mut hi = lam.to_vec();
                let mut lo = lam.to_vec();
                hi[i] += h;
                lo[i] -= h;
                let d = (f_value(sp, &hi).unwrap() - f_value(sp, &lo).unwrap()) / (2.0 * h);
                let mut hi2 = lam.to_vec();
                let mut lo2 = lam.to_vec();
                hi2[i] += 0.5 * h;
                lo2[i] -= 0.5 * h;
                let d2 =
                    (f_value(sp, &hi2).unwrap() - f_value(sp, &lo2).unwrap()) / h;
                let spread = (d - d2).abs();
                if spread < best_spread {
                    best_spread = spread;
                    best = d2;
                }
            }
            out[i] = best;
        }
        out
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s32 = spec(3, 2);
        let g = f_gradient(&s32, &[1.0, 1.0, 1.0]).unwrap();
        for &gi in &g {
            assert!((gi - 1.0 / 3.0).abs() < 1e-14);
        }
        let fd = fd_gradient(&s32, &[1.0, 1.0, 1.0]);
        for i in 0..3 {
            assert!((g[i] - fd[i]).abs() < 1e-9);
        }

        let s22 = spec(2, 2);
        let lam = [1.0, 4.0];
        let g = f_gradient(&s22, &lam).unwrap();
        assert!(g[0] > g[1], "concavity orders the gradient against the tuple");
        let fd = fd_gradient(&s22, &lam);
        for i in 0..2 {
            assert!((g[i] - fd[i]).abs() < 1e-8 * (1.0 + fd[i].abs()));
        }

        let mut rng = SplitMix64::new(99);
        for _ in 0..25 {
            let lam = crate::sampling::sample_cone(&mut rng, &spec(4, 3));
            let g = f_gradient(&spec(4, 3), &lam).unwrap();
            let fd = fd_gradient(&spec(4, 3), &lam);
            for i in 0..4 {
                assert!(
                    (g[i] - fd[i]).abs() < 1e-6 * (1.0 + fd[i].abs()),
                    "lam={lam:?} i={i}: {} vs {}",
                    g[i],
                    fd[i]
                );
            }
        }
    }

    #[test]
    fn euler_identity_on_cone_samples() {
        let mut rng = SplitMix64::new(2024);
        let sp = spec(3, 2);
        for _ in 0..500 {
            let lam = crate::sampling::sample_cone(&mut rng, &sp);
            let f = f_value(&sp, &lam).unwrap();
            let g = f_gradient(&sp, &lam).unwrap();
            let euler: f64 = g.iter().zip(&lam).map(|(a, b)| a * b).sum();
            assert!(
                (euler - f).abs() <= 1e-12 * (1.0 + f.abs()),
                "Euler defect at {lam:?}: {euler} vs {f}"
            );
        }
    }

    #[test]
    fn matrix_derivative_examples() {
        let s32 = spec(3, 2);
        let fij = matrix_f_derivative(&s32, &SymMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((fij.get(i, j) - want).abs() < 1e-12);
            }
        }
        // diagonal A reproduces the tuple gradient on the diagonal
        let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let fij = matrix_f_derivative(&s32, &a).unwrap();
        let g = f_gradient(&s32, &[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { g[i] } else { 0.0 };
                assert!((fij.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_derivative_matches_finite_differences() {
        let sp = spec(3, 2);
        let mut rng = SplitMix64::new(7);
        let mut checked = 0;
        while checked < 10 {
            let lam = crate::sampling::sample_cone(&mut rng, &sp);
            let q = crate::sampling::random_orthogonal(&mut rng, 3);
            let a = SymMatrix::diagonal(&lam).conjugated(&q);
            let (eig, _) = a.eigen().unwrap();
            if !cone_contains(&sp, &eig) {
                continue;
            }
            checked += 1;
            let fij = matrix_f_derivative(&sp, &a).unwrap();
            let fval = |m: &SymMatrix| -> f64 {
                let (l, _) = m.eigen().unwrap();
                f_value(&sp, &l).unwrap()
            };
            let h = 1e-6;
            for i in 0..3 {
                for j in 0..=i {
                    let mut hi = a.clone();
                    let mut lo = a.clone();
                    hi.set(i, j, a.get(i, j) + h);
                    lo.set(i, j, a.get(i, j) - h);
                    // symmetric-packed perturbation moves both (i,j) and (j,i),
                    // so the directional derivative is F^ij (i=j) or 2 F^ij
                    let fd = (fval(&hi) - fval(&lo)) / (2.0 * h);
                    let want = if i == j { fij.get(i, i) } else { 2.0 * fij.get(i, j) };
                    assert!(
                        (fd - want).abs() <= 1e-6 * (1.0 + want.abs()),
                        "entry ({i},{j}): fd {fd} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn orthogonal_invariance_of_matrix_derivative() {
        let sp = spec(4, 3);
        let mut rng = SplitMix64::new(31);
        for _ in 0..20 {
            let lam = crate::sampling::sample_cone(&mut rng, &sp);
            let a = SymMatrix::diagonal(&lam);
            let q = crate::sampling::random_orthogonal(&mut rng, 4);
            let lhs = matrix_f_derivative(&sp, &a.conjugated(&q)).unwrap();
            let rhs = matrix_f_derivative(&sp, &a).unwrap().conjugated(&q);
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (lhs.get(i, j) - rhs.get(i, j)).abs() < 1e-10,
                        "invariance defect at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn concavity_spot_check() {
        let sp = spec(3, 2);
        let mut rng = SplitMix64::new(555);
        for _ in 0..300 {
            let a = crate::sampling::sample_cone(&mut rng, &sp);
            let b = crate::sampling::sample_cone(&mut rng, &sp);
            let s = rng.uniform(0.0, 1.0);
            let mix: Vec<f64> =
                a.iter().zip(&b).map(|(&x, &y)| s * x + (1.0 - s) * y).collect();
            let lhs = f_value(&sp, &mix).unwrap();
            let rhs = s * f_value(&sp, &a).unwrap() + (1.0 - s) * f_value(&sp, &b).unwrap();
            assert!(lhs >= rhs - 1e-12, "concavity defect: {lhs} < {rhs}");
        }
    }

    #[test]
    fn ivochkina_ratio_basics() {
        let sp = spec(3, 2);
        let lam = [1.0, 1.0, 1.0];
        for j in 0..3 {
            let r = ivochkina_ratio(&sp, &lam, j, 0.5, 2.0).unwrap();
            assert!(r.is_finite() && r > 0.0);
        }
        assert!(ivochkina_ratio(&sp, &lam, 3, 0.5, 2.0).is_err());
        assert!(ivochkina_ratio(&sp, &lam, 0, 2.0, 3.0).is_err());
    }

    #[test]
    fn appendix_check_trivial_cases() {
        // identity with gamma = last column
        let p = Matrix::identity(4);
        assert!(appendix_cofactor_check(&p, 2.0, 3).unwrap());
        // permutation sending column 1 to the last row position
        let mut perm = Matrix::zeros(3, 3);
        perm.set(2, 1, 1.0); // column 1 concentrated in the last row
        perm.set(0, 0, 1.0);
        perm.set(1, 2, 1.0);
        assert!(appendix_cofactor_check(&perm, 2.0, 1).unwrap());
        // hypothesis violation is an argument error
        assert!(appendix_cofactor_check(&Matrix::identity(3), 2.0, 0).is_err());
        // K below 2 rejected
        assert!(appendix_cofactor_check(&Matrix::identity(3), 1.5, 2).is_err());
    }

    #[test]
    fn appendix_check_random_rotations() {
        let mut rng = SplitMix64::new(40_000);
        let mut accepted = 0;
        let mut draws = 0;
        while accepted < 200 && draws < 100_000 {
            draws += 1;
            let p = crate::sampling::random_orthogonal(&mut rng, 3);
            let mass = |col: usize| (0..2).map(|l| p.get(l, col).powi(2)).sum::<f64>();
            if let Some(gamma) = (0..3).find(|&c| mass(c) < 0.25) {
                accepted += 1;
                assert!(appendix_cofactor_check(&p, 2.0, gamma).unwrap());
            }
        }
        assert!(accepted >= 200, "rejection sampling starved: {accepted} of {draws}");
    }

    #[test]
    fn jacobi_reconstructs_spectrum() {
        let mut rng = SplitMix64::new(8);
        for n in 2..=5 {
            for _ in 0..20 {
                let a = SymMatrix::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
                let (lam, q) = a.eigen().unwrap();
                assert!(q.orthogonality_defect() < 1e-12);
                for w in lam.windows(2) {
                    assert!(w[0] <= w[1] + 1e-14);
                }
                let back = SymMatrix::diagonal(&lam).conjugated(&q);
                for i in 0..n {
                    for j in 0..n {
                        assert!(
                            (back.get(i, j) - a.get(i, j)).abs() < 1e-12,
                            "reconstruction defect at ({i},{j}) for n={n}"
                        );
                    }
                }
            }
        }
    }
}
