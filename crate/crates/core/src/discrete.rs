//! Discrete-time opinion dynamics with a uniform communication delay.
//!
//! `X(k+1) = Ŵ X(k) + W̃ X(k - τ)`, where `Ŵ` holds the self-loops and `W̃`
//! the off-diagonal influences. Before `k = τ` the delayed term reads `X(0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::scc_decompose;
use crate::matrix::SignedWeightMatrix;
use crate::spectral;

const ROW_SUM_TOL: f64 = 1e-9;
const DIVERGENCE_BOUND: f64 = 1e6;
const CONSENSUS_TOL: f64 = 1e-4;
const CONSENSUS_FLOOR: f64 = 1e-3;
const MAX_DEFAULT_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    w_hat: Vec<f64>,
    w_tilde: SignedWeightMatrix,
    tau_d: usize,
    x0: Vec<f64>,
}

impl DiscreteSystem {
    /// `w_hat` is the diagonal of `Ŵ`. A diagonal entry of `w_tilde` is a
    /// delayed self-influence and is allowed.
    pub fn new(
        w_hat: Vec<f64>,
        w_tilde: SignedWeightMatrix,
        tau_d: usize,
        x0: Vec<f64>,
    ) -> Result<Self> {
        let n = w_tilde.n();
        if w_hat.len() != n || x0.len() != n {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: w_hat {}, w_tilde {n}, x0 {}",
                w_hat.len(),
                x0.len()
            )));
        }
        if let Some(i) = w_hat.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "self-loop weight w_{i}{i} = {} must be nonnegative",
                w_hat[i]
            )));
        }
        for (i, &loop_w) in w_hat.iter().enumerate() {
            let d = w_tilde.get(i, i);
            let s = w_tilde.abs_row_sum(i) - d.abs() + (loop_w + d).abs();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidInput(format!(
                    "row {i} has absolute sum {s}, expected 1"
                )));
            }
        }
        if let Some(i) = x0.iter().position(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidInput(format!(
                "initial opinion x_{i}(0) = {} is outside [-1, 1]",
                x0[i]
            )));
        }
        Ok(Self {
            w_hat,
            w_tilde,
            tau_d,
            x0,
        })
    }

    /// Splits a full weight matrix into self-loops and off-diagonal part.
    pub fn from_weights(w: &SignedWeightMatrix, tau_d: usize, x0: Vec<f64>) -> Result<Self> {
        let w_hat = w.diagonal();
        let mut w_tilde = w.clone();
        for i in 0..w.n() {
            w_tilde.set(i, i, 0.0);
        }
        Self::new(w_hat, w_tilde, tau_d, x0)
    }

    pub fn n(&self) -> usize {
        self.w_tilde.n()
    }

    pub fn tau_d(&self) -> usize {
        self.tau_d
    }

    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    pub fn w_tilde(&self) -> &SignedWeightMatrix {
        &self.w_tilde
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn with_tau_d(&self, tau_d: usize) -> Self {
        Self {
            tau_d,
            ..self.clone()
        }
    }

    /// `Ŵ + W̃`.
    pub fn weights(&self) -> SignedWeightMatrix {
        let mut w = self.w_tilde.clone();
        for (i, &v) in self.w_hat.iter().enumerate() {
            w.set(i, i, w.get(i, i) + v);
        }
        w
    }

    pub fn has_self_loops(&self) -> bool {
        self.w_hat.iter().any(|&v| v != 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    ConvergedZero,
    /// `|x_i| -> alpha` with a fixed sign split.
    BipartiteConsensus {
        alpha: f64,
        positive: Vec<usize>,
        negative: Vec<usize>,
    },
    ConvergedOther,
    NotConverged,
    Diverged,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ConvergedZero => "converged_zero",
            Self::BipartiteConsensus { .. } => "bipartite_consensus",
            Self::ConvergedOther => "converged_other",
            Self::NotConverged => "not_converged",
            Self::Diverged => "diverged",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(
            self,
            Self::ConvergedZero | Self::BipartiteConsensus { .. } | Self::ConvergedOther
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `states[k] = X(k)`, starting with `X(0)`.
    pub states: Vec<Vec<f64>>,
    pub classification: Classification,
    pub steps_run: usize,
}

/// Length of the tail window used for classification.
pub fn classification_window(tau_d: usize) -> usize {
    50.max(5 * (tau_d + 1))
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Classifies the tail of a sequence of states. The same rules serve the
/// continuous integrator on its sampled grid.
pub fn classify_tail(window: &[Vec<f64>], tol: f64) -> Classification {
    let Some(last) = window.last() else {
        return Classification::NotConverged;
    };
    if window.iter().any(|x| !(max_abs(x) <= DIVERGENCE_BOUND)) {
        return Classification::Diverged;
    }
    if window.iter().all(|x| max_abs(x) < tol) {
        return Classification::ConvergedZero;
    }
    let alpha = last.iter().map(|v| v.abs()).sum::<f64>() / last.len() as f64;
    if alpha > CONSENSUS_FLOOR {
        let signs: Vec<bool> = last.iter().map(|&v| v > 0.0).collect();
        let steady = window.iter().all(|x| {
            x.iter()
                .zip(&signs)
                .all(|(&v, &pos)| (v.abs() - alpha).abs() < CONSENSUS_TOL && (v > 0.0) == pos)
        });
        if steady {
            let (positive, negative): (Vec<usize>, Vec<usize>) =
                (0..last.len()).partition(|&i| signs[i]);
            return Classification::BipartiteConsensus {
                alpha,
                positive,
                negative,
            };
        }
    }
    let settled = window.windows(2).all(|pair| {
        pair[0]
            .iter()
            .zip(&pair[1])
            .all(|(a, b)| (a - b).abs() < tol)
    });
    if settled {
        Classification::ConvergedOther
    } else {
        Classification::NotConverged
    }
}

fn step_delta(window: &[Vec<f64>]) -> f64 {
    window
        .windows(2)
        .map(|p| {
            p[0].iter()
                .zip(&p[1])
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .fold(0.0, f64::max)
}

/// Iterates the delayed update for up to `max_steps` steps, stopping early
/// once the tail window has settled.
pub fn simulate(sys: &DiscreteSystem, max_steps: usize, tol: f64) -> Result<Trajectory> {
    if max_steps == 0 || !(tol > 0.0) {
        return Err(Error::InvalidInput(
            "max_steps must be >= 1 and tol > 0".into(),
        ));
    }
    let n = sys.n();
    let tau = sys.tau_d;
    let window = classification_window(tau);
    let mut states = vec![sys.x0.clone()];
    let mut delayed = vec![0.0; n];

    for k in 0..max_steps {
        let past = if k >= tau { &states[k - tau] } else { &states[0] };
        sys.w_tilde.mul_vec_into(past, &mut delayed);
        let current = &states[k];
        let next: Vec<f64> = (0..n)
            .map(|i| sys.w_hat[i] * current[i] + delayed[i])
            .collect();
        let blown = !(max_abs(&next) <= DIVERGENCE_BOUND);
        states.push(next);
        if blown {
            break;
        }
        let len = states.len();
        if len > window && (k + 1) % 10 == 0 {
            let tail = &states[len - window..];
            let c = classify_tail(tail, tol);
            // A slowly decaying state can look settled before it is small,
            // so nonzero limits must be frozen well below `tol`.
            let settled = match c {
                Classification::ConvergedZero => true,
                Classification::ConvergedOther | Classification::BipartiteConsensus { .. } => {
                    step_delta(tail) < 1e-3 * tol
                }
                _ => false,
            };
            if settled {
                break;
            }
        }
    }

    let steps_run = states.len() - 1;
    let tail_start = states.len().saturating_sub(window);
    let classification = classify_tail(&states[tail_start..], tol);
    Ok(Trajectory {
        states,
        classification,
        steps_run,
    })
}

/// A step budget large enough for the error to fall well below `tol` at the
/// spectral rate, or a fixed budget when no rate is available.
pub fn default_max_steps(sys: &DiscreteSystem, tol: f64) -> usize {
    let window = classification_window(sys.tau_d);
    match discrete_rate(sys) {
        Ok(r) if r.is_finite() && r > 0.0 => {
            let needed = 2.0 * ((1.0 / tol).ln() + 5.0) / r;
            (needed.ceil() as usize + window).min(MAX_DEFAULT_STEPS)
        }
        Ok(_) => window + 1,
        Err(_) => (1000 * (sys.tau_d + 1)).min(MAX_DEFAULT_STEPS),
    }
}

/// The block-companion matrix of the augmented state
/// `Y(k) = [X(k); X(k-1); …; X(k-τ)]`.
pub fn build_augmented(sys: &DiscreteSystem) -> SignedWeightMatrix {
    augmented(&sys.w_hat, &sys.w_tilde, sys.tau_d)
}

/// Augmented matrix for an arbitrary signed `w`: its diagonal acts without
/// delay, everything else with delay `tau_d`. No row-sum requirement.
pub fn augment_weights(w: &SignedWeightMatrix, tau_d: usize) -> SignedWeightMatrix {
    let mut w_tilde = w.clone();
    for i in 0..w.n() {
        w_tilde.set(i, i, 0.0);
    }
    augmented(&w.diagonal(), &w_tilde, tau_d)
}

fn augmented(w_hat: &[f64], w_tilde: &SignedWeightMatrix, tau: usize) -> SignedWeightMatrix {
    let n = w_tilde.n();
    let size = n * (tau + 1);
    let mut a = SignedWeightMatrix::zeros(size);
    for (i, &d) in w_hat.iter().enumerate() {
        a.set(i, i, d);
        for j in 0..n {
            let v = w_tilde.get(i, j);
            if v != 0.0 {
                let col = tau * n + j;
                a.set(i, col, a.get(i, col) + v);
            }
        }
    }
    for layer in 1..=tau {
        for i in 0..n {
            a.set(layer * n + i, (layer - 1) * n + i, 1.0);
        }
    }
    a
}

/// Every closed strongly connected component has a node with `w_ii > 0`.
pub fn check_cscc_selfloop_condition(w: &SignedWeightMatrix) -> bool {
    scc_decompose(w)
        .closed_components()
        .all(|c| c.iter().any(|&i| w.get(i, i) > 0.0))
}

fn rate_from_radius(rho: f64) -> Result<f64> {
    if rho >= 1.0 - 1e-10 {
        return Err(Error::NotConvergent(rho));
    }
    Ok(-rho.ln())
}

/// `-log |θ₁|` for the augmented matrix. Without self-loops the eigenvalues
/// of the augmented matrix are the `(τ+1)`-th roots of those of `W`, so only
/// `W` is decomposed.
pub fn discrete_rate(sys: &DiscreteSystem) -> Result<f64> {
    if sys.has_self_loops() {
        return discrete_rate_augmented(sys);
    }
    let rho = spectral::spectral_radius(&sys.w_tilde)?;
    Ok(rate_from_radius(rho)? / (sys.tau_d + 1) as f64)
}

/// `-log |θ₁|` from a full eigendecomposition of the augmented matrix.
pub fn discrete_rate_augmented(sys: &DiscreteSystem) -> Result<f64> {
    rate_from_radius(spectral::spectral_radius(&build_augmented(sys))?)
}

/// Hausdorff distance between the spectrum of the augmented matrix built with
/// `Ŵ = 0, W̃ = w` and the set of all `(τ+1)`-th roots of the spectrum of `w`.
pub fn root_identity_check(w: &SignedWeightMatrix, tau_d: usize) -> Result<f64> {
    let n = w.n();
    let a = augmented(&vec![0.0; n], w, tau_d);
    let theta = spectral::eigenvalues_raw(&a)?;
    let lambda = spectral::eigenvalues_raw(w)?;
    let m = (tau_d + 1) as f64;
    let roots: Vec<Complex64> = lambda
        .iter()
        .flat_map(|l| {
            let (r, phi) = l.to_polar();
            (0..=tau_d).map(move |k| {
                Complex64::from_polar(r.powf(1.0 / m), (phi + 2.0 * std::f64::consts::PI * k as f64) / m)
            })
        })
        .collect();
    Ok(hausdorff(&theta, &roots))
}

pub(crate) fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_x0, w_m, w_t, w_tm};

    fn m(rows: Vec<Vec<f64>>) -> SignedWeightMatrix {
        SignedWeightMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn scalar_companion() {
        let sys = DiscreteSystem::new(vec![0.0], m(vec![vec![1.0]]), 1, vec![0.5]).unwrap();
        assert_eq!(build_augmented(&sys), m(vec![vec![0.0, 1.0], vec![1.0, 0.0]]));
    }

    #[test]
    fn zero_delay_collapses_to_w() {
        let w = m(vec![vec![0.5, -0.5], vec![0.25, 0.75]]);
        let sys = DiscreteSystem::from_weights(&w, 0, vec![0.0, 0.0]).unwrap();
        assert_eq!(build_augmented(&sys), w);
    }

    #[test]
    fn augmented_rows_have_unit_absolute_sum() {
        let sys = DiscreteSystem::from_weights(&w_tm(), 3, example_x0()).unwrap();
        let a = build_augmented(&sys);
        assert_eq!(a.n(), 20);
        for i in 0..a.n() {
            assert!((a.abs_row_sum(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_systems() {
        let bad_sum = m(vec![vec![0.0, 0.5], vec![1.0, 0.0]]);
        assert!(DiscreteSystem::from_weights(&bad_sum, 0, vec![0.0; 2]).is_err());
        let neg_loop = m(vec![vec![-0.5, 0.5], vec![1.0, 0.0]]);
        assert!(DiscreteSystem::from_weights(&neg_loop, 0, vec![0.0; 2]).is_err());
        let ok = m(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(DiscreteSystem::from_weights(&ok, 0, vec![0.0, 1.5]).is_err());
    }

    #[test]
    fn identity_dynamics_stay_put() {
        let sys = DiscreteSystem::new(
            vec![1.0; 3],
            SignedWeightMatrix::zeros(3),
            2,
            vec![0.1, -0.7, 0.3],
        )
        .unwrap();
        let t = simulate(&sys, 200, 1e-6).unwrap();
        assert!(t.states.iter().all(|x| x == &sys.x0));
        assert_eq!(t.classification, Classification::ConvergedOther);
    }

    #[test]
    fn example_two_verdicts() {
        for tau in [0, 1, 4] {
            let sys = DiscreteSystem::from_weights(&w_tm(), tau, example_x0()).unwrap();
            let t = simulate(&sys, 500, 1e-6).unwrap();
            assert_eq!(t.classification, Classification::ConvergedZero, "tau {tau}");
        }
        for w in [w_t(), w_m()] {
            let sys = DiscreteSystem::from_weights(&w, 1, example_x0()).unwrap();
            let t = simulate(&sys, 5000, 1e-6).unwrap();
            assert_eq!(t.classification, Classification::NotConverged);
            assert_eq!(t.steps_run, 5000);
        }
    }

    #[test]
    fn trust_with_self_loops_reaches_consensus() {
        // Strongly connected pure trust with a self-loop: ordinary consensus.
        let w = m(vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        let sys = DiscreteSystem::from_weights(&w, 2, vec![0.8, -0.2]).unwrap();
        let t = simulate(&sys, 10_000, 1e-9).unwrap();
        match t.classification {
            Classification::BipartiteConsensus { negative, .. } => assert!(negative.is_empty()),
            c => panic!("unexpected {c:?}"),
        }
    }

    #[test]
    fn selfloop_predicate() {
        assert!(check_cscc_selfloop_condition(&SignedWeightMatrix::identity(4)));
        assert!(!check_cscc_selfloop_condition(&w_tm()));
        let one_loop = m(vec![
            vec![0.2, 0.8, 0.0],
            vec![0.0, 0.0, -1.0],
            vec![1.0, 0.0, 0.0],
        ]);
        assert!(check_cscc_selfloop_condition(&one_loop));
    }

    #[test]
    fn rate_examples() {
        // Every eigenvalue has modulus 1/sqrt(2).
        let w = m(vec![
            vec![0.0, 0.5, -0.5, 0.0],
            vec![0.5, 0.0, 0.0, -0.5],
            vec![0.5, 0.0, 0.0, 0.5],
            vec![0.0, 0.5, 0.5, 0.0],
        ]);
        let ln2 = 2f64.ln();
        let s0 = DiscreteSystem::from_weights(&w, 0, vec![0.0; 4]).unwrap();
        assert!((discrete_rate(&s0).unwrap() - 0.5 * ln2).abs() < 1e-14);
        let s1 = s0.with_tau_d(1);
        assert!((discrete_rate(&s1).unwrap() - 0.25 * ln2).abs() < 1e-14);
        assert!((discrete_rate_augmented(&s1).unwrap() - 0.25 * ln2).abs() < 1e-12);
    }

    #[test]
    fn rate_refuses_non_convergent() {
        let sys = DiscreteSystem::from_weights(&w_t(), 1, example_x0()).unwrap();
        assert!(matches!(discrete_rate(&sys), Err(Error::NotConvergent(_))));
    }

    #[test]
    fn root_identity_on_swap() {
        let w = m(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(root_identity_check(&w, 1).unwrap() < 1e-12);
        assert!(root_identity_check(&w_tm(), 0).unwrap() < 1e-10);
    }

    #[test]
    fn default_budget_covers_example_two() {
        let sys = DiscreteSystem::from_weights(&w_tm(), 4, example_x0()).unwrap();
        let steps = default_max_steps(&sys, 1e-6);
        let t = simulate(&sys, steps, 1e-6).unwrap();
        assert_eq!(t.classification, Classification::ConvergedZero);
    }
}
