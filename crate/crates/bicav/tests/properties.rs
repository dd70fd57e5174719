//! Randomized cross-route checks: every quantity with two independent
//! derivation paths (closed form vs numeric eigenvalues, Cardano vs
//! bisection roots, slope rule vs full linearization, analytic vs finite
//! difference Jacobian) is compared over seeded ensembles.

mod common;

use bicav::dynamics::{
    derivatives, jacobian, linear_stability, settle_with, IntegratorOptions, MeanFieldState,
};
use bicav::params::inflate;
use bicav::sensing::sensitivity;
use bicav::spectrum::{eigenvalues_closed_form, eigenvalues_numeric, EffectiveMatrix};
use bicav::steadystate::{solve_intensity, solve_roots, CubicCoefficients};
use common::*;
use proptest::prelude::*;
use rand::Rng;

/// Mismatch allowance for a 2×2 eigenvalue pair: near a degeneracy the
/// discriminant cancels to rounding noise and both routes inherit its square
/// root, so the allowance widens only where the discriminant is small.
fn degeneracy_allowance(m: &EffectiveMatrix) -> f64 {
    let scale = (m.trace() * m.trace())
        .norm()
        .max(4.0 * m.determinant().norm());
    let disc = (m.trace() * m.trace() - m.determinant() * 4.0).norm();
    if disc > f64::EPSILON * scale {
        f64::EPSILON * scale / disc.sqrt()
    } else {
        (f64::EPSILON * scale).sqrt()
    }
}

proptest! {
    /// Closed-form and characteristic-polynomial eigenvalues agree as a set,
    /// and the trace identity λ₊ + λ₋ = −i(κ+Γ) holds to rounding. Rates are
    /// in units of Γ = 1.
    #[test]
    fn eigenvalue_routes_agree(
        d in -3.0..3.0f64,
        k in 0.0..0.1f64,
        phi in -1.5..1.5f64,
    ) {
        let m = EffectiveMatrix::from_rates(d, k, 1.0, phi).unwrap();
        let c = eigenvalues_closed_form(d, k, 1.0, phi).unwrap();
        let n = eigenvalues_numeric(&m);
        let direct = (c.lambda_plus - n.lambda_plus).norm()
            + (c.lambda_minus - n.lambda_minus).norm();
        let swapped = (c.lambda_plus - n.lambda_minus).norm()
            + (c.lambda_minus - n.lambda_plus).norm();
        let tol = 1e-9 + 8.0 * degeneracy_allowance(&m);
        prop_assert!(direct.min(swapped) <= tol,
            "eigenvalue mismatch {:e}", direct.min(swapped));
        let tr = c.lambda_plus + c.lambda_minus;
        prop_assert!((tr.re).abs() <= 1e-12 && (tr.im + (k + 1.0)).abs() <= 1e-12,
            "trace identity violated: {tr}");
    }

    /// The closed-form root extraction agrees with monotone-interval
    /// bisection across magnitudes spanning seven decades of Kerr strength
    /// and drive.
    #[test]
    fn cubic_solver_matches_bisection(
        d in -0.3..0.3f64,
        k in 0.002..0.03f64,
        phi in (-0.03 * std::f64::consts::PI)..(0.005 * std::f64::consts::PI),
        chi_exp in -13.0..-10.0f64,
        t_exp in -9.0..-4.0f64,
    ) {
        let r = bicav::params::ReducedParams {
            d, k, phi,
            chi_t: 10f64.powf(chi_exp),
            drive_t: 10f64.powf(t_exp),
        };
        let c = CubicCoefficients::from_reduced(&r).unwrap();
        let solved = solve_roots(&c).unwrap();
        let oracle = bisection_roots(&c);
        prop_assert_eq!(solved.len(), oracle.len(),
            "root count: solver {:?} vs oracle {:?}",
            solved.iter().map(|x| x.beta).collect::<Vec<_>>(), &oracle);
        for (s, o) in solved.iter().zip(&oracle) {
            prop_assert!((s.beta - o).abs() <= 1e-9 * o.abs().max(1.0),
                "root {:e} vs oracle {:e}", s.beta, o);
        }
    }
}

#[test]
fn cubic_solver_matches_bisection_inside_fold_windows() {
    let mut rng = rng(11);
    for _ in 0..400 {
        let r = random_bistable(&mut rng, 0.05);
        let c = CubicCoefficients::from_reduced(&r).unwrap();
        let solved = solve_roots(&c).unwrap();
        let oracle = bisection_roots(&c);
        assert_eq!(solved.len(), 3, "windowed drive must give 3 roots: {r:?}");
        assert_eq!(oracle.len(), 3, "oracle disagrees on count: {r:?}");
        for (s, o) in solved.iter().zip(&oracle) {
            assert!(
                (s.beta - o).abs() <= 1e-9 * o,
                "root {:e} vs oracle {:e} at {r:?}",
                s.beta,
                o
            );
        }
    }
}

#[test]
fn steady_states_are_fixed_points_of_the_flow() {
    let mut rng = rng(23);
    for _ in 0..300 {
        let p = inflate_damped(&random_any(&mut rng));
        for root in solve_intensity(&p).unwrap() {
            let s = MeanFieldState::from_steady(&root);
            let res = derivatives(&s, &p).unwrap().norm_inf();
            let bound = 1e-8 * p.gamma * s.norm_inf().max(1.0);
            assert!(
                res <= bound,
                "residual {res:.3e} above {bound:.3e} at beta {:.3e}",
                root.beta
            );
        }
    }
}

#[test]
fn slope_rule_matches_full_linearization_on_bistable_instances() {
    let mut rng = rng(37);
    for _ in 0..300 {
        let r = random_bistable(&mut rng, 0.1);
        let p = inflate_damped(&r);
        let states = solve_intensity(&p).unwrap();
        assert_eq!(states.len(), 3);
        for (i, root) in states.iter().enumerate() {
            let rep = linear_stability(&MeanFieldState::from_steady(root), &p).unwrap();
            assert_eq!(
                rep.stable, root.stable,
                "root {i} (beta {:.3e}) slope rule {} vs eigenvalues {:?} at {r:?}",
                root.beta, root.stable, rep.leading_eigenvalue
            );
            if i == 1 {
                assert!(rep.leading_eigenvalue.re > 0.0, "middle root must repel");
            }
        }
    }
}

#[test]
fn jacobian_matches_finite_differences_on_random_states() {
    let mut rng = rng(41);
    for _ in 0..50 {
        let p = inflate_damped(&random_any(&mut rng));
        let y = MeanFieldState {
            alpha1: num_complex::Complex64::new(
                rng.random_range(-1e5..1e5),
                rng.random_range(-1e5..1e5),
            ),
            alpha2: num_complex::Complex64::new(
                rng.random_range(-1e5..1e5),
                rng.random_range(-1e5..1e5),
            ),
            q: rng.random_range(-1e5..1e5),
            p: rng.random_range(-1e5..1e5),
        };
        let j = jacobian(&y, &p).unwrap();
        let jmax = j.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        let arr = y.to_array();
        for col in 0..6 {
            let h = 1e-2 * arr[col].abs().max(1.0);
            let mut up = arr;
            let mut dn = arr;
            up[col] += h;
            dn[col] -= h;
            let fu = derivatives(&MeanFieldState::from_array(&up), &p).unwrap();
            let fd = derivatives(&MeanFieldState::from_array(&dn), &p).unwrap();
            let (fu, fd) = (fu.to_array(), fd.to_array());
            for row in 0..6 {
                let est = (fu[row] - fd[row]) / (2.0 * h);
                assert!(
                    (est - j[row][col]).abs() <= 1e-6 * jmax.max(1.0),
                    "J[{row}][{col}] fd {est:.6e} vs analytic {:.6e}",
                    j[row][col]
                );
            }
        }
    }
}

#[test]
fn stable_roots_attract_and_middle_repels_on_sampled_instances() {
    let mut rng = rng(53);
    let opts = IntegratorOptions::default();
    let mut exercised = 0;
    while exercised < 5 {
        let r = random_bistable(&mut rng, 0.15);
        let p = inflate_damped(&r);
        let states = solve_intensity(&p).unwrap();
        // Settling within the period budget needs a linear rate well above
        // the sweep cutoff; marginal instances are covered by the
        // linearization test above instead.
        let slow = states.iter().enumerate().any(|(i, s)| {
            i != 1
                && linear_stability(&MeanFieldState::from_steady(s), &p)
                    .unwrap()
                    .leading_eigenvalue
                    .re
                    > -150.0
        });
        if slow {
            continue;
        }
        for (i, root) in states.iter().enumerate() {
            let mut y = MeanFieldState::from_steady(root);
            y.alpha1 *= 1.01;
            y.q *= 1.01;
            let settled = settle_with(&y, &p, &opts).unwrap();
            let beta = settled.state.beta();
            if i == 1 {
                let near = (beta - states[0].beta).abs() <= 1e-4 * states[0].beta
                    || (beta - states[2].beta).abs() <= 1e-4 * states[2].beta;
                assert!(
                    near,
                    "middle root did not repel to a stable branch: {beta:e}"
                );
            } else {
                // The settle certificate bounds the derivative norm, so the
                // state error is that bound over the slowest linear rate:
                // a few 1e-6 relative at the 150 rad/s floor above.
                assert!(
                    (beta - root.beta).abs() <= 1e-5 * root.beta,
                    "stable root {i} not recovered: {beta:e} vs {:e} at {r:?}",
                    root.beta
                );
            }
        }
        let vac = settle_with(&MeanFieldState::ZERO, &p, &opts).unwrap();
        assert!(
            (vac.state.beta() - states[0].beta).abs() <= 1e-5 * states[0].beta.max(1.0),
            "vacuum must reach the lower branch"
        );
        exercised += 1;
    }
}

#[test]
fn sensitivity_is_invariant_under_overall_rate_rescaling() {
    let mut rng = rng(67);
    for _ in 0..100 {
        let r = random_any(&mut rng);
        let p1 = inflate(&r, TEST_GAMMA, TEST_OMEGA_M, 1.55e-6).unwrap();
        let p2 = inflate(&r, 120.0 * TEST_GAMMA, 120.0 * TEST_OMEGA_M, 1.55e-6).unwrap();
        let (g1a, g2a) = (p1.g, 3.0 * p1.g);
        let (g1b, g2b) = (p2.g, 3.0 * p2.g);
        match (sensitivity(&p1, g1a, g2a), sensitivity(&p2, g1b, g2b)) {
            (Ok(a), Ok(b)) => {
                assert!(
                    (a.eta - b.eta).abs() <= 1e-9 * a.eta.abs().max(1e-30),
                    "eta changed under rescaling: {} vs {} at {r:?}",
                    a.eta,
                    b.eta
                );
                assert_eq!(a.region, b.region, "region flipped under rescaling");
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("rescaling changed solvability: {a:?} vs {b:?}"),
        }
    }
}
