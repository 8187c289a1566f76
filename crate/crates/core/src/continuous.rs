//! Continuous-time dynamics `Ẋ(t) = -L X(t - τ)` with constant history.
//!
//! Fixed-step RK4 by the method of steps. With `dt = τ/m` the delayed
//! argument at the stage points falls on stored nodes or interval midpoints;
//! midpoints come from cubic Hermite interpolation of the stored states and
//! derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SignedWeightMatrix;

const DELAY_SUBSTEPS: f64 = 64.0;
const UNDELAYED_DT: f64 = 1.0 / 128.0;
const DEFAULT_HORIZON: f64 = 100.0;
const ZERO_LEVEL: f64 = 1e-8;
const SMALL_FINAL_LEVEL: f64 = 1e-3;
const DIVERGENCE_FACTOR: f64 = 1e6;
/// Integration stops once the state has stayed below this fraction of
/// `‖X(0)‖∞` for a full delay interval.
const STOP_LEVEL: f64 = 1e-14;
/// Samples below this norm are ignored by the decay fit.
const FIT_FLOOR: f64 = 1e-13;
const MIN_R_SQUARED: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSystem {
    pub neg_l: SignedWeightMatrix,
    pub tau_c: f64,
    pub x0: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
}

impl ContinuousSystem {
    /// Uses `dt = τ/64` (or `1/128` without delay) and a horizon of
    /// `max(100, 10τ)`.
    pub fn new(neg_l: SignedWeightMatrix, tau_c: f64, x0: Vec<f64>) -> Result<Self> {
        if !(tau_c.is_finite() && tau_c >= 0.0) {
            return Err(Error::InvalidInput(format!("delay {tau_c} must be finite and >= 0")));
        }
        if x0.len() != neg_l.n() {
            return Err(Error::InvalidInput(format!(
                "x0 has {} entries for n = {}",
                x0.len(),
                neg_l.n()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("x0 must be finite".into()));
        }
        Ok(Self {
            neg_l,
            tau_c,
            x0,
            dt: default_dt(tau_c),
            horizon: DEFAULT_HORIZON.max(10.0 * tau_c),
        })
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn n(&self) -> usize {
        self.neg_l.n()
    }

    /// Checks step and horizon constraints and returns the number of steps
    /// per delay (0 when undelayed).
    pub fn validate(&self) -> Result<usize> {
        let dt = self.dt;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("step {dt} must be positive")));
        }
        let min_horizon = if self.tau_c > 0.0 { 10.0 * self.tau_c } else { 10.0 };
        if !(self.horizon >= min_horizon * (1.0 - 1e-12)) {
            return Err(Error::InvalidInput(format!(
                "horizon {} is shorter than {min_horizon}",
                self.horizon
            )));
        }
        if self.tau_c == 0.0 {
            let limit = 0.1 / self.neg_l.inf_norm().max(f64::MIN_POSITIVE);
            if dt > limit {
                return Err(Error::StepTooLarge { dt, limit });
            }
            return Ok(0);
        }
        if dt > self.tau_c {
            return Err(Error::StepTooLarge {
                dt,
                limit: self.tau_c,
            });
        }
        let ratio = self.tau_c / dt;
        let m = ratio.round();
        if (ratio - m).abs() * dt > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "step {dt} does not divide the delay {}",
                self.tau_c
            )));
        }
        Ok(m as usize)
    }
}

pub fn default_dt(tau_c: f64) -> f64 {
    if tau_c > 0.0 {
        tau_c / DELAY_SUBSTEPS
    } else {
        UNDELAYED_DT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousClassification {
    ConvergedZero,
    Diverged,
    /// Neither decay nor growth was established within the horizon.
    Undetermined,
}

impl ContinuousClassification {
    pub fn label(self) -> &'static str {
        match self {
            Self::ConvergedZero => "converged_zero",
            Self::Diverged => "diverged",
            Self::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub classification: ContinuousClassification,
    pub measured_rate: Option<f64>,
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Integrates up to the horizon, stopping early on divergence or once the
/// state has decayed to the fit floor.
pub fn integrate(sys: &ContinuousSystem) -> Result<ContinuousTrajectory> {
    let m = sys.validate()?;
    let n = sys.n();
    let dt = sys.dt;
    let steps = (sys.horizon / dt - 1e-9).ceil() as usize;
    let norm0 = max_abs(&sys.x0);

    let mut states = vec![sys.x0.clone()];
    if norm0 == 0.0 {
        return Ok(ContinuousTrajectory {
            times: vec![0.0],
            states,
            classification: ContinuousClassification::ConvergedZero,
            measured_rate: None,
        });
    }

    // derivs[k] = Ẋ(t_k) from the right.
    let mut derivs = vec![sys.neg_l.mul_vec(&sys.x0)];
    let mut mid = vec![0.0; n];
    let mut f_mid = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let (mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut diverged = false;
    // A single small sample can be a zero crossing; only a whole delay
    // interval of small states determines the future.
    let span = m + 1;
    let mut quiet = 0usize;

    for k in 0..steps {
        let x = &states[k];
        let mut next = vec![0.0; n];
        if m == 0 {
            let k1 = &derivs[k];
            axpy_into(&mut tmp, x, 0.5 * dt, k1);
            sys.neg_l.mul_vec_into(&tmp, &mut k2);
            axpy_into(&mut tmp, x, 0.5 * dt, &k2);
            sys.neg_l.mul_vec_into(&tmp, &mut k3);
            axpy_into(&mut tmp, x, dt, &k3);
            sys.neg_l.mul_vec_into(&tmp, &mut k4);
            for i in 0..n {
                next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            derivs.push(sys.neg_l.mul_vec(&next));
        } else {
            // Delayed stage arguments: node k-m, midpoint, node k-m+1.
            if k < m {
                mid.copy_from_slice(&sys.x0);
            } else {
                let a = k - m;
                let (xa, xb) = (&states[a], &states[a + 1]);
                let (da, db) = (&derivs[a], &derivs[a + 1]);
                for i in 0..n {
                    mid[i] = 0.5 * (xa[i] + xb[i]) + dt / 8.0 * (da[i] - db[i]);
                }
            }
            sys.neg_l.mul_vec_into(&mid, &mut f_mid);
            let delayed_end = if k + 1 >= m { &states[k + 1 - m] } else { &sys.x0 };
            let f_end = sys.neg_l.mul_vec(delayed_end);
            let f_start = &derivs[k];
            for i in 0..n {
                next[i] = x[i] + dt / 6.0 * (f_start[i] + 4.0 * f_mid[i] + f_end[i]);
            }
            derivs.push(f_end);
        }
        let norm = max_abs(&next);
        states.push(next);
        if !(norm <= DIVERGENCE_FACTOR * norm0) {
            diverged = true;
            break;
        }
        quiet = if norm < STOP_LEVEL * norm0 { quiet + 1 } else { 0 };
        if quiet >= span {
            break;
        }
    }

    let times: Vec<f64> = (0..states.len()).map(|k| k as f64 * dt).collect();
    let mut traj = ContinuousTrajectory {
        times,
        states,
        classification: ContinuousClassification::Undetermined,
        measured_rate: None,
    };
    traj.classification = if diverged {
        ContinuousClassification::Diverged
    } else if decayed(&traj, norm0, span) {
        ContinuousClassification::ConvergedZero
    } else {
        ContinuousClassification::Undetermined
    };
    if traj.classification == ContinuousClassification::ConvergedZero {
        traj.measured_rate = measure_rate(&traj).ok();
    }
    Ok(traj)
}

fn decayed(traj: &ContinuousTrajectory, norm0: f64, span: usize) -> bool {
    let small: Vec<bool> = traj
        .states
        .iter()
        .map(|x| max_abs(x) < ZERO_LEVEL * norm0)
        .collect();
    if small.windows(span).any(|w| w.iter().all(|&b| b)) {
        return true;
    }
    let last = max_abs(traj.states.last().expect("trajectory is nonempty"));
    last < SMALL_FINAL_LEVEL * norm0 && tail_fit(traj).is_some_and(|f| f.slope > 0.0)
}

struct Fit {
    /// Slope of `-log ‖X‖∞` against time.
    slope: f64,
    r_squared: f64,
}

fn tail_fit(traj: &ContinuousTrajectory) -> Option<Fit> {
    let t_end = *traj.times.last()?;
    let (ts, ys): (Vec<f64>, Vec<f64>) = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(&t, _)| t >= 0.5 * t_end)
        .map(|(&t, x)| (t, max_abs(x)))
        .filter(|&(_, v)| v >= FIT_FLOOR)
        .map(|(t, v)| (t, -v.ln()))
        .unzip();
    if ts.len() < 3 {
        return None;
    }
    let k = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        sxx += (t - mt) * (t - mt);
        sxy += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(Fit { slope, r_squared })
}

/// Least-squares decay exponent of `‖X(t)‖∞` over the second half of the
/// trajectory.
pub fn measure_rate(traj: &ContinuousTrajectory) -> Result<f64> {
    if traj.classification != ContinuousClassification::ConvergedZero {
        return Err(Error::InvalidInput(format!(
            "decay rate needs a converged trajectory, got {}",
            traj.classification.label()
        )));
    }
    let fit = tail_fit(traj).ok_or(Error::PoorFit(0.0))?;
    if fit.r_squared < MIN_R_SQUARED {
        return Err(Error::PoorFit(fit.r_squared));
    }
    Ok(fit.slope)
}

/// The state at time `t`, linearly interpolated between samples.
pub fn state_at(traj: &ContinuousTrajectory, t: f64) -> Option<Vec<f64>> {
    let last = *traj.times.last()?;
    if t < 0.0 || t > last {
        return None;
    }
    let dt = if traj.times.len() > 1 { traj.times[1] } else { return Some(traj.states[0].clone()) };
    let k = ((t / dt).floor() as usize).min(traj.times.len() - 2);
    let s = (t - traj.times[k]) / dt;
    Some(
        traj.states[k]
            .iter()
            .zip(&traj.states[k + 1])
            .map(|(a, b)| a + s * (b - a))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_x0, w_tm};
    use crate::netgen::build_laplacian;
    use std::f64::consts::{E, PI};

    fn scalar(tau: f64) -> ContinuousSystem {
        ContinuousSystem::new(SignedWeightMatrix::from_diagonal(&[-1.0]), tau, vec![1.0]).unwrap()
    }

    #[test]
    fn undelayed_scalar_is_exponential() {
        let sys = scalar(0.0).with_dt(1.0 / 128.0);
        let t = integrate(&sys).unwrap();
        assert!((t.states[128][0] - (-1.0f64).exp()).abs() < 1e-8);
        let r = t.measured_rate.unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
    }

    #[test]
    fn delayed_scalar_matches_first_step_polynomial() {
        // On [0, τ] the history is constant, so x(t) = 1 - t exactly.
        let sys = scalar(1.0);
        let t = integrate(&sys).unwrap();
        for k in 0..=64 {
            assert!((t.states[k][0] - (1.0 - t.times[k])).abs() < 1e-14);
        }
        // On [τ, 2τ]: x(t) = 1 - t + (t - 1)^2 / 2.
        for k in 64..=128 {
            let s = t.times[k];
            assert!((t.states[k][0] - (1.0 - s + 0.5 * (s - 1.0).powi(2))).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_delay_oscillates_without_decay() {
        let t = integrate(&scalar(PI / 2.0).with_horizon(60.0)).unwrap();
        assert_eq!(t.classification, ContinuousClassification::Undetermined);
        let late = t
            .times
            .iter()
            .zip(&t.states)
            .filter(|(&s, _)| s > 40.0)
            .map(|(_, x)| x[0].abs())
            .fold(0.0, f64::max);
        assert!(late > 0.1 && late < 10.0, "{late}");
    }

    #[test]
    fn branch_point_delay_decays_near_e() {
        let t = integrate(&scalar(1.0 / E).with_horizon(30.0)).unwrap();
        assert_eq!(t.classification, ContinuousClassification::ConvergedZero);
        // The double characteristic root adds a t·e^{-et} factor that biases
        // a log-linear fit low by a few percent.
        let r = t.measured_rate.unwrap();
        assert!((r - E).abs() / E < 0.05, "{r}");
    }

    #[test]
    fn example_four_verdicts() {
        let neg_l = build_laplacian(&w_tm());
        let c = integrate(&ContinuousSystem::new(neg_l.clone(), 0.2, example_x0()).unwrap()).unwrap();
        assert_eq!(c.classification, ContinuousClassification::ConvergedZero);
        // Growth at τ = 1 is slow (about 0.09 per unit time).
        let d = ContinuousSystem::new(neg_l, 1.0, example_x0()).unwrap().with_horizon(300.0);
        let d = integrate(&d).unwrap();
        assert_eq!(d.classification, ContinuousClassification::Diverged);
    }

    #[test]
    fn step_constraints() {
        assert!(matches!(
            scalar(0.5).with_dt(0.6).validate(),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(matches!(
            scalar(0.0).with_dt(0.2).validate(),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(matches!(
            scalar(0.5).with_dt(0.3).validate(),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(scalar(0.5).validate().unwrap(), 64);
    }

    #[test]
    fn fourth_order_convergence() {
        let neg_l = build_laplacian(&w_tm());
        // Early segments are integrated exactly (piecewise polynomials), so
        // compare well after the start.
        let at_four = |m: f64| {
            let sys = ContinuousSystem::new(neg_l.clone(), 0.5, example_x0())
                .unwrap()
                .with_dt(0.5 / m);
            let t = integrate(&sys).unwrap();
            t.states[(m * 8.0) as usize].clone()
        };
        let (a, b, c) = (at_four(2.0), at_four(4.0), at_four(8.0));
        let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
    }

    #[test]
    fn measure_rate_requires_convergence() {
        let t = integrate(&scalar(PI / 2.0).with_horizon(20.0)).unwrap();
        assert!(measure_rate(&t).is_err());
    }
}
