use delayed_opinions::continuous::{integrate, state_at, ContinuousClassification, ContinuousSystem};
use delayed_opinions::delay::{rate_continuous, tau_star};
use delayed_opinions::fixtures::{example_x0, w_tm};
use delayed_opinions::netgen::{build_laplacian, generate_normalized, MixtureSpec};
use delayed_opinions::spectral::eigenvalues;
use delayed_opinions::SignedWeightMatrix;
use proptest::prelude::*;

fn mixture_laplacian(n: usize, seed: u64) -> SignedWeightMatrix {
    build_laplacian(&generate_normalized(&MixtureSpec::random(n, 0.5, 1.0, seed)).unwrap())
}

fn ramp(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 37 % 19) as f64 - 9.0) / 9.0).collect()
}

#[test]
fn undelayed_rate_matches_rightmost_eigenvalue() {
    let neg_l = mixture_laplacian(100, 31);
    let eigs = eigenvalues(&neg_l).unwrap();
    let expected = eigs.eigenvalues.iter().map(|a| -a.re).fold(f64::INFINITY, f64::min);
    let t = integrate(&ContinuousSystem::new(neg_l, 0.0, ramp(100)).unwrap()).unwrap();
    assert_eq!(t.classification, ContinuousClassification::ConvergedZero);
    let r = t.measured_rate.unwrap();
    assert!((r - expected).abs() / expected < 0.05, "{r} vs {expected}");
}

#[test]
fn delayed_rate_matches_prediction() {
    let neg_l = build_laplacian(&w_tm());
    let eigs = eigenvalues(&neg_l).unwrap();
    for tau in [0.1, 0.2, 0.5] {
        let predicted = rate_continuous(&eigs, tau).unwrap();
        let sys = ContinuousSystem::new(neg_l.clone(), tau, example_x0()).unwrap();
        let t = integrate(&sys).unwrap();
        assert_eq!(t.classification, ContinuousClassification::ConvergedZero);
        let r = t.measured_rate.unwrap();
        assert!((r - predicted).abs() / predicted < 0.05, "tau {tau}: {r} vs {predicted}");
    }
}

#[test]
fn margin_brackets_stability_on_two_by_two() {
    // Eigenvalues -1 ± i; the margin is π/(4√2).
    let neg_l = SignedWeightMatrix::from_rows(vec![vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
    let t_star = tau_star(&eigenvalues(&neg_l).unwrap()).unwrap().tau_star;
    let run = |tau: f64| {
        let sys = ContinuousSystem::new(neg_l.clone(), tau, vec![1.0, 0.5])
            .unwrap()
            .with_dt(tau / 64.0)
            .with_horizon(400.0);
        integrate(&sys).unwrap().classification
    };
    assert_eq!(run(0.9 * t_star), ContinuousClassification::ConvergedZero);
    assert_eq!(run(1.1 * t_star), ContinuousClassification::Diverged);
}

#[test]
fn margin_brackets_stability_on_mixture() {
    let neg_l = mixture_laplacian(40, 2);
    let eigs = eigenvalues(&neg_l).unwrap();
    let t_star = tau_star(&eigs).unwrap().tau_star;
    let below = 0.8 * t_star;
    let rate = rate_continuous(&eigs, below).unwrap();
    let sys = ContinuousSystem::new(neg_l.clone(), below, ramp(40))
        .unwrap()
        .with_horizon((40.0 / rate).max(10.0 * below));
    assert_eq!(integrate(&sys).unwrap().classification, ContinuousClassification::ConvergedZero);
    let above = 1.2 * t_star;
    let sys = ContinuousSystem::new(neg_l, above, ramp(40)).unwrap().with_horizon(600.0);
    assert_eq!(integrate(&sys).unwrap().classification, ContinuousClassification::Diverged);
}

fn small_system() -> impl Strategy<Value = (SignedWeightMatrix, Vec<f64>, Vec<f64>, f64, f64)> {
    (2usize..6, any::<u64>(), 0usize..3).prop_flat_map(|(n, seed, tau_idx)| {
        let tau = [0.0, 0.25, 0.5][tau_idx];
        (
            Just(MixtureSpec::random(n, 1.0, 1.0, seed)),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            Just(tau),
            -2.0f64..2.0,
        )
            .prop_map(|(spec, x, y, tau, c)| {
                (build_laplacian(&generate_normalized(&spec).unwrap()), x, y, tau, c)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solution_is_linear_in_initial_state((neg_l, x, y, tau, c) in small_system()) {
        let run = |x0: Vec<f64>| {
            let sys = ContinuousSystem::new(neg_l.clone(), tau, x0).unwrap().with_horizon(10.0);
            integrate(&sys).unwrap()
        };
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + c * b).collect();
        let (tx, ty, tc) = (run(x), run(y), run(combo));
        for t in [1.0, 3.0, 7.5] {
            let (sx, sy, sc) = (
                state_at(&tx, t).unwrap(),
                state_at(&ty, t).unwrap(),
                state_at(&tc, t).unwrap(),
            );
            for i in 0..sx.len() {
                prop_assert!((sx[i] + c * sy[i] - sc[i]).abs() < 1e-12);
            }
        }
    }
}
