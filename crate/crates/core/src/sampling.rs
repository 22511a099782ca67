//! Deterministic samplers for the property-test layer.
//!
//! Everything here is seeded and allocation-light so that property suites
//! produce identical sample streams across runs and platforms (up to libm
//! rounding in the transcendental draws). The solver itself never draws
//! random numbers; these samplers feed the test and check-properties
//! surfaces only.

use crate::linalg::Matrix;
use crate::math;
use crate::symfun::{self, CurvatureSpec};
use alloc::vec::Vec;

/// SplitMix64: tiny, seedable, full-period generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = (self.next_u64() >> 11) as f64 + 1.0; // in [1, 2^53]
        let u1 = u1 * (1.0 / 9007199254740992.0); // in (0, 1]
        let u2 = self.unit();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
    }
}

/// Draws a tuple from Γ_r: alternates between the positive-orthant shell
/// (always admissible) and rejection-sampled mixed-sign tuples that sit
/// closer to the cone boundary, so both the convex and non-convex parts of
/// the cone get exercised.
pub fn sample_cone(rng: &mut SplitMix64, spec: &CurvatureSpec) -> Vec<f64> {
    let n = spec.n();
    if rng.next_u64() & 1 == 0 {
        return (0..n).map(|_| rng.uniform(0.05, 2.0)).collect();
    }
    for _ in 0..200 {
        let lam: Vec<f64> = (0..n).map(|_| rng.uniform(-0.6, 1.6)).collect();
        if symfun::cone_contains(spec, &lam) {
            return lam;
        }
    }
    // rejection starved (possible for large r); fall back to the orthant
    (0..n).map(|_| rng.uniform(0.05, 2.0)).collect()
}

/// Draws from the compact slice `Γ_ψ = {λ ∈ Γ_r : ψ₀ ≤ f(λ) ≤ ψ₁}` by
/// rescaling a cone sample; degree-1 homogeneity makes the rescaling exact.
pub fn sample_cone_slice(
    rng: &mut SplitMix64,
    spec: &CurvatureSpec,
    psi0: f64,
    psi1: f64,
) -> Vec<f64> {
    let mut lam = sample_cone(rng, spec);
    let f = symfun::f_value(spec, &lam).expect("cone sample admissible");
    let target = rng.uniform(psi0, psi1);
    let t = target / f;
    for x in lam.iter_mut() {
        *x *= t;
    }
    lam
}

/// Haar-ish random orthogonal matrix: Gaussian entries, modified
/// Gram–Schmidt on columns.
pub fn random_orthogonal(rng: &mut SplitMix64, n: usize) -> Matrix {
    loop {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, rng.normal());
            }
        }
        let mut ok = true;
        for col in 0..n {
            for prev in 0..col {
                let mut dot = 0.0;
                for row in 0..n {
                    dot += m.get(row, col) * m.get(row, prev);
                }
                for row in 0..n {
                    let v = m.get(row, col) - dot * m.get(row, prev);
                    m.set(row, col, v);
                }
            }
            let mut norm = 0.0;
            for row in 0..n {
                norm += m.get(row, col) * m.get(row, col);
            }
            let norm = math::sqrt(norm);
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for row in 0..n {
                m.set(row, col, m.get(row, col) / norm);
            }
        }
        if ok {
            return m;
        }
    }
}

/// Smooth random field over the given chart points: a low-order polynomial
/// perturbation `1 + amp·p(x/λ, y/λ)` with coefficients in [−1, 1], where λ
/// rescales the points into the unit disc. Small `amp` keeps radial graphs
/// built from such fields admissible; callers verify and resample.
pub fn random_smooth_chart_field(
    rng: &mut SplitMix64,
    chart_xy: &[[f64; 2]],
    amp: f64,
) -> Vec<f64> {
    let scale = chart_xy
        .iter()
        .map(|p| math::hypot(p[0], p[1]))
        .fold(0.0f64, f64::max)
        .max(1e-12);
    // coefficients for {x, y, x², xy, y², x³, x²y, xy², y³}
    let coeff: [f64; 9] = core::array::from_fn(|_| rng.uniform(-1.0, 1.0));
    chart_xy
        .iter()
        .map(|p| {
            let x = p[0] / scale;
            let y = p[1] / scale;
            let poly = coeff[0] * x
                + coeff[1] * y
                + coeff[2] * x * x
                + coeff[3] * x * y
                + coeff[4] * y * y
                + coeff[5] * x * x * x
                + coeff[6] * x * x * y
                + coeff[7] * x * y * y
                + coeff[8] * y * y * y;
            1.0 + amp * poly
        })
        .collect()
}
