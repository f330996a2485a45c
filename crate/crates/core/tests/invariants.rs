//! Cross-module invariants checked against independent oracles: finite
//! differences for the change-of-variables Jacobian, dense elimination
//! for minors, and algebraic identities linking triangular diagonals,
//! minors, and the integration routes.

// Entry comparisons index both sides so failures name the entry.
#![allow(clippy::needless_range_loop)]

mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use orbint::{
    compare_methods, diag_from_minors, hilbert_density, integrand_by_name, integrate_domain_w,
    jacobian_w_to_u, leading_minors, angles_from_unit_vector, gram, is_in_image, reduce,
    vector_from_angles, EulerAngles, McConfig, Method, VectorTuple, WScheme, DEFAULT_TOL,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fd_jacobian_determinant, random_interior_factor, relative_gap};

/// prod_i w_ii^{m-i} (1-based exponents) equals
/// |G_k|^{(m-k)/2} * prod_{i<k} sqrt(|G_i|) for G = W W^T: the minor
/// ratios under the diagonal powers telescope.
#[test]
fn telescoping_identity_links_diagonal_powers_to_minors() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let m = rng.gen_range(1..=5);
        let k = rng.gen_range(1..=m);
        let w = random_interior_factor(k, m, &mut rng);
        let lhs: f64 = (0..k)
            .map(|i| w.diag(i).powi((m - i - 1) as i32))
            .product();
        let minors = leading_minors(&w.gram());
        let rhs = minors[k].powf(0.5 * (m - k) as f64)
            * minors[1..k].iter().map(|x| x.sqrt()).product::<f64>();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }
}

/// The closed-form |det d(W W^T)/dW| = 2^k * prod_j w_jj^{k-j+1} agrees
/// with central-difference determinants at random interior points.
#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for trial in 0..100 {
        let k = 1 + trial % 4;
        let w = random_interior_factor(k, k, &mut rng);
        let closed = jacobian_w_to_u(&w).unwrap();
        let fd = fd_jacobian_determinant(k, w.lower(), 1e-5);
        assert!(
            relative_gap(closed, fd) < 1e-6,
            "k={k}: closed {closed} vs finite-difference {fd}"
        );
    }
}

/// Recovering the triangular diagonal from minor ratios inverts the
/// Gram construction exactly on interior points.
#[test]
fn diag_from_minors_round_trips_through_gram() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..300 {
        let k = rng.gen_range(1..=5);
        let w = random_interior_factor(k, k, &mut rng);
        let recovered = diag_from_minors(&w.gram()).unwrap();
        for i in 0..k {
            assert_relative_eq!(recovered[i], w.diag(i), max_relative = 1e-12);
        }
    }
}

/// The deterministic tensor rule integrates the Gaussian family to near
/// machine precision on every grid-sized case.
#[test]
fn quadrature_is_exact_for_the_gaussian_family() {
    let g = integrand_by_name("gauss-exp-trace").unwrap();
    let scheme = WScheme::default();
    for (k, m) in [(1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4), (3, 3), (3, 4)] {
        let estimate = integrate_domain_w(&g, k, m, &scheme).unwrap();
        assert_eq!(estimate.method, Method::Quadrature);
        assert_eq!(estimate.std_error, 0.0);
        let exact = PI.powf(0.5 * (k * m) as f64);
        assert!(
            relative_gap(estimate.value, exact) < 1e-10,
            "({k},{m}): {} vs {exact}",
            estimate.value
        );
    }
}

/// Full reports are reproducible bit for bit from the seed, and distinct
/// seeds give distinct Monte Carlo values.
#[test]
fn consistency_reports_are_seed_deterministic() {
    let g = integrand_by_name("gauss-exp-trace").unwrap();
    let scheme = WScheme {
        mc: McConfig {
            samples: 30_000,
            seed: 107,
            ..McConfig::default()
        },
        ..WScheme::default()
    };
    let first = compare_methods(&g, 2, 3, &scheme).unwrap();
    let second = compare_methods(&g, 2, 3, &scheme).unwrap();
    for (a, b) in first.estimates.iter().zip(&second.estimates) {
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
    let mut reseeded_scheme = scheme;
    reseeded_scheme.mc.seed = 108;
    let reseeded = compare_methods(&g, 2, 3, &reseeded_scheme).unwrap();
    assert_ne!(
        first.estimates[0].value.to_bits(),
        reseeded.estimates[0].value.to_bits()
    );
}

/// A light cross-method agreement sweep; the full-scale version runs in
/// the acceptance battery.
#[test]
fn integration_routes_agree_on_a_spot_sample() {
    let g = integrand_by_name("gauss-trace-poly").unwrap();
    let scheme = WScheme {
        mc: McConfig {
            samples: 120_000,
            seed: 109,
            ..McConfig::default()
        },
        ..WScheme::default()
    };
    for (k, m) in [(1, 2), (2, 2), (2, 3)] {
        let report = compare_methods(&g, k, m, &scheme).unwrap();
        assert!(report.pass, "({k},{m}): z_max = {}", report.z_max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Gram matrices of arbitrary real tuples always pass the image
    /// membership test for their own ambient dimension.
    #[test]
    fn prop_gram_of_any_tuple_is_in_image(
        k in 1usize..=4,
        m in 1usize..=5,
        raw in prop::collection::vec(-10.0f64..10.0, 20),
    ) {
        let m = m.max(k);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..m).map(|j| raw[i * m + j]).collect())
            .collect();
        let v = VectorTuple::from_rows(rows).unwrap();
        prop_assert!(is_in_image(&gram(&v), m, DEFAULT_TOL).unwrap());
    }

    /// Reduction reconstructs the input tuple from its rotation and
    /// triangular factor, for arbitrary (even degenerate) inputs.
    #[test]
    fn prop_reduce_reconstructs_the_tuple(
        k in 1usize..=4,
        m in 1usize..=4,
        raw in prop::collection::vec(-5.0f64..5.0, 16),
    ) {
        let m = m.max(k);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..m).map(|j| raw[i * m + j]).collect())
            .collect();
        let v = VectorTuple::from_rows(rows).unwrap();
        let scale = v.as_flat().iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let reduction = reduce(&v).unwrap();
        let w = reduction.w.to_tuple();
        for i in 0..k {
            let rebuilt = reduction.rotation.apply(w.row(i));
            for j in 0..m {
                prop_assert!(
                    (rebuilt[j] - v.get(i, j)).abs() < 1e-9 * scale,
                    "row {i} col {j}: {} vs {}", rebuilt[j], v.get(i, j)
                );
            }
        }
    }

    /// Scaling a Gram matrix by c^2 scales the density by c^{k(m-k-1)}.
    #[test]
    fn prop_density_is_homogeneous(
        k in 1usize..=4,
        m in 1usize..=5,
        c in 0.25f64..4.0,
        seed in 0u64..1000,
    ) {
        let m = m.max(k + 1); // k < m so the density is finite
        prop_assume!(m <= 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_interior_factor(k, m, &mut rng).gram();
        let base = hilbert_density(&g, m, DEFAULT_TOL).unwrap();
        let scaled = hilbert_density(&g.scaled(c * c), m, DEFAULT_TOL).unwrap();
        let expected = base.value * c.powi((k * (m - k - 1)) as i32);
        prop_assert!(
            relative_gap(scaled.value, expected) < 1e-9,
            "k={k} m={m} c={c}: {} vs {expected}", scaled.value
        );
    }

    /// Angle -> vector -> angle -> vector is the identity on vectors.
    #[test]
    fn prop_direction_angles_round_trip(
        m in 2usize..=6,
        raw in prop::collection::vec(-1.5f64..1.5, 5),
    ) {
        let mut theta: Vec<f64> = raw[..m - 1].to_vec();
        // Last angle is azimuthal: open full circle.
        theta[m - 2] *= 2.0;
        let angles = EulerAngles::new(m, theta).unwrap();
        let v = vector_from_angles(&angles);
        let recovered = angles_from_unit_vector(&v).unwrap();
        let w = vector_from_angles(&recovered);
        for j in 0..m {
            prop_assert!((v[j] - w[j]).abs() < 1e-12);
        }
    }
}
