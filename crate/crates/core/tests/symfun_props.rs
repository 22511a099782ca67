//! Property tests for the symmetric-function layer.
//!
//! Each property is an algebraic identity or inequality that must hold for
//! ANY admissible tuple, not just the worked examples in the unit tests.

use proptest::prelude::*;
use radgraph::sampling::{sample_cone, SplitMix64};
use radgraph::symfun::{
    cone_contains, elementary_all, elementary_sym, f_gradient, f_value, CurvatureSpec,
};

fn cone_tuple(n: usize, r: usize) -> impl Strategy<Value = Vec<f64>> {
    // drive the crate's own cone sampler from a proptest seed so shrinking
    // still lands on valid tuples
    any::<u64>().prop_map(move |seed| {
        let mut rng = SplitMix64::new(seed);
        sample_cone(&mut rng, &CurvatureSpec::with_order(n, r).unwrap())
    })
}

proptest! {
    /// Degree-1 homogeneity: f(t·λ) = t·f(λ) for t > 0.
    #[test]
    fn f_is_homogeneous(lam in cone_tuple(3, 2), t in 0.1f64..10.0) {
        let spec = CurvatureSpec::new(3, 2).unwrap();
        let scaled: Vec<f64> = lam.iter().map(|x| t * x).collect();
        let lhs = f_value(&spec, &scaled).unwrap();
        let rhs = t * f_value(&spec, &lam).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
            "homogeneity defect: {lhs} vs {rhs}");
    }

    /// Euler identity Σ f_i λ_i = f(λ), the equality case of the paperless
    /// concavity bound; forced by homogeneity.
    #[test]
    fn euler_identity(lam in cone_tuple(4, 3)) {
        let spec = CurvatureSpec::new(4, 3).unwrap();
        let f = f_value(&spec, &lam).unwrap();
        let g = f_gradient(&spec, &lam).unwrap();
        let euler: f64 = g.iter().zip(&lam).map(|(a, b)| a * b).sum();
        prop_assert!((euler - f).abs() <= 1e-12 * (1.0 + f.abs()));
    }

    /// Positivity package on the cone: f > 0, all f_i > 0, Σλ_i > 0.
    #[test]
    fn cone_positivity(lam in cone_tuple(3, 3)) {
        let spec = CurvatureSpec::new(3, 3).unwrap();
        prop_assert!(f_value(&spec, &lam).unwrap() > 0.0);
        prop_assert!(f_gradient(&spec, &lam).unwrap().iter().all(|&g| g > 0.0));
        prop_assert!(lam.iter().sum::<f64>() > 0.0);
    }

    /// Γ_r ⊂ Γ_{r'} for r' < r.
    #[test]
    fn cone_nesting(lam in cone_tuple(5, 4)) {
        for r in 1..4 {
            let lower = CurvatureSpec::with_order(5, r).unwrap();
            prop_assert!(cone_contains(&lower, &lam), "nesting broke at r = {r}");
        }
    }

    /// The recursion agrees with the defining alternating-sum structure:
    /// Σ_j (−1)^j S_j(λ) t^j = Π_i (1 − t·λ_i) at any t.
    #[test]
    fn generating_function(values in prop::collection::vec(-2.0f64..2.0, 2..7),
                           t in -1.0f64..1.0) {
        let e = elementary_all(&values);
        let lhs: f64 = e.iter().enumerate()
            .map(|(j, s)| s * (-t).powi(j as i32))
            .sum();
        let rhs: f64 = values.iter().map(|x| 1.0 - t * x).product();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
            "generating function defect at t = {t}");
    }

    /// S_j with one variable zeroed drops to the (n−1)-variable value.
    #[test]
    fn zero_padding(values in prop::collection::vec(-2.0f64..2.0, 2..6), j in 0usize..4) {
        prop_assume!(j <= values.len());
        let mut padded = values.clone();
        padded.push(0.0);
        let a = elementary_sym(j, &values).unwrap();
        let b = elementary_sym(j, &padded).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
