use std::path::{Path, PathBuf};

use delayed_opinions::continuous::{integrate, ContinuousSystem};
use delayed_opinions::delay::{
    self, boundary_curve as curve, rate_continuous, tau_star, tau_star_complex, tau_star_random,
    DEFAULT_BOUNDARY_RANGE, FULL_BOUNDARY_RANGE,
};
use delayed_opinions::discrete::{default_max_steps, discrete_rate, simulate, DiscreteSystem};
use delayed_opinions::lemmas;
use delayed_opinions::netgen::{
    build_laplacian, generate_normalized, mixture_stats, MixtureKind, MixtureSpec, Proportions,
};
use delayed_opinions::spectral::{
    containment_check, eigenvalues, predict_circular, predict_ellipse, SpectralSummary,
    DEFAULT_SLACK,
};
use delayed_opinions::{Error, SignedWeightMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{emit, read_matrix, read_spec, to_json, Table};
use crate::{CliError, Globals, Mode, Prediction};

pub fn uniform_x0(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// `a,b,c`, `uniform-seed:N`, or a draw from the global seed.
pub fn parse_x0(arg: Option<&str>, n: usize, seed: u64) -> Result<Vec<f64>, CliError> {
    let Some(arg) = arg else {
        return Ok(uniform_x0(n, seed));
    };
    if let Some(s) = arg.strip_prefix("uniform-seed:") {
        let seed = s
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad seed in --x0 {arg:?}")))?;
        return Ok(uniform_x0(n, seed));
    }
    arg.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad opinion {c:?} in --x0")))
        })
        .collect()
}

fn complex_list(s: &SpectralSummary) -> Vec<[f64; 2]> {
    s.eigenvalues.iter().map(|z| [z.re, z.im]).collect()
}

fn state_table(label: &str, n: usize) -> Table {
    let mut header = vec![label.to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    Table::new(header)
}

pub fn generate(
    g: &Globals,
    n: usize,
    p: f64,
    sigma: f64,
    mode: Mode,
    proportions: Option<Vec<f64>>,
    spec_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let spec = match (mode, proportions) {
        (Mode::Random, None) => MixtureSpec::random(n, p, sigma, g.seed),
        (Mode::Complex, Some(v)) => {
            let arr: [f64; 5] = v
                .try_into()
                .map_err(|_| CliError::Validation("--proportions needs 5 values".into()))?;
            MixtureSpec::complex(n, p, sigma, Proportions::from_array(arr), g.seed)
        }
        (Mode::Random, Some(_)) => {
            return Err(CliError::Validation("--proportions applies to --mode complex".into()))
        }
        (Mode::Complex, None) => {
            return Err(CliError::Validation("--mode complex needs --proportions".into()))
        }
    };
    let w = generate_normalized(&spec)?;
    emit(g.out.as_deref(), &(w.to_json() + "\n"))?;
    if let Some(path) = spec_out {
        emit(Some(&path), &to_json(&spec))?;
    }
    g.status(&format!("generated {n} x {n} normalized matrix, seed {}", g.seed));
    Ok(())
}

pub fn spectrum(
    g: &Globals,
    input: &Path,
    predict: Option<Prediction>,
    stats: Option<&Path>,
) -> Result<(), CliError> {
    let w = read_matrix(input)?;
    let s = eigenvalues(&w)?;
    let mut report = json!({
        "n": w.n(),
        "eigenvalues": complex_list(&s),
        "spectral_radius": s.spectral_radius,
        "rightmost_real": s.rightmost_real,
    });
    if let Some(path) = stats {
        let spec = read_spec(path)?;
        if spec.n != w.n() {
            return Err(CliError::Validation(format!(
                "stats describe n = {}, matrix has n = {}",
                spec.n,
                w.n()
            )));
        }
        let st = mixture_stats(&spec)?;
        let predict = predict.unwrap_or(match st.kind {
            MixtureKind::Random => Prediction::Circular,
            MixtureKind::Complex => Prediction::Ellipse,
        });
        report["prediction"] = match predict {
            Prediction::Circular => {
                let radius = predict_circular(&st, w.n());
                json!({
                    "kind": "circular",
                    "radius": radius,
                    "relative_error": (s.spectral_radius - radius).abs() / radius,
                })
            }
            Prediction::Ellipse => {
                let pred = predict_ellipse(&st, w.n())?;
                let containment = containment_check(&s, &pred, DEFAULT_SLACK);
                json!({ "kind": "ellipse", "ellipse": pred, "containment": containment })
            }
        };
    }
    emit(g.out.as_deref(), &to_json(&report))?;
    g.status(&format!("spectral radius {:.6}", s.spectral_radius));
    Ok(())
}

pub fn simulate_discrete(
    g: &Globals,
    input: &Path,
    tau_d: usize,
    x0: Option<&str>,
    steps: Option<usize>,
    tol: f64,
) -> Result<(), CliError> {
    let w = read_matrix(input)?;
    let sys = DiscreteSystem::from_weights(&w, tau_d, parse_x0(x0, w.n(), g.seed)?)?;
    let steps = steps.unwrap_or_else(|| default_max_steps(&sys, tol));
    let traj = simulate(&sys, steps, tol)?;
    if let Some(path) = g.out.as_deref() {
        let mut t = state_table("step", w.n());
        for (k, x) in traj.states.iter().enumerate() {
            let mut row = vec![k as f64];
            row.extend(x);
            t.rows.push(row);
        }
        emit(Some(path), &t.render(g.format))?;
    }
    let summary = json!({
        "classification": traj.classification,
        "steps_run": traj.steps_run,
        "predicted_rate": discrete_rate(&sys).ok(),
    });
    emit(None, &to_json(&summary))?;
    g.status(&format!("{} after {} steps", traj.classification.label(), traj.steps_run));
    Ok(())
}

pub fn simulate_continuous(
    g: &Globals,
    input: &Path,
    tau_c: f64,
    dt: Option<f64>,
    horizon: Option<f64>,
    x0: Option<&str>,
) -> Result<(), CliError> {
    let w = read_matrix(input)?;
    let neg_l = build_laplacian(&w);
    let mut sys = ContinuousSystem::new(neg_l.clone(), tau_c, parse_x0(x0, w.n(), g.seed)?)?;
    if let Some(dt) = dt {
        sys = sys.with_dt(dt);
    }
    if let Some(h) = horizon {
        sys = sys.with_horizon(h);
    }
    let traj = integrate(&sys)?;
    if let Some(path) = g.out.as_deref() {
        let mut t = state_table("t", w.n());
        for (time, x) in traj.times.iter().zip(&traj.states) {
            let mut row = vec![*time];
            row.extend(x);
            t.rows.push(row);
        }
        emit(Some(path), &t.render(g.format))?;
    }
    let predicted = eigenvalues(&neg_l)
        .ok()
        .and_then(|e| rate_continuous(&e, tau_c).ok());
    let summary = json!({
        "classification": traj.classification,
        "measured_rate": traj.measured_rate,
        "predicted_rate": predicted,
        "final_time": traj.times.last(),
    });
    emit(None, &to_json(&summary))?;
    g.status(&format!("{} at t = {}", traj.classification.label(), traj.times.last().unwrap_or(&0.0)));
    Ok(())
}

fn laplacian_spectrum(w: &SignedWeightMatrix) -> Result<SpectralSummary, CliError> {
    Ok(eigenvalues(&build_laplacian(w))?)
}

pub fn thresholds(g: &Globals, input: &Path, stats: Option<&Path>) -> Result<(), CliError> {
    let w = read_matrix(input)?;
    let eigs = laplacian_spectrum(&w)?;
    let mut report = tau_star(&eigs)?;
    report.tau_tilde = match delay::tau_tilde(&eigs) {
        Ok(t) => Some(t),
        Err(Error::NoCrossover | Error::PositiveRealPart { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut out: Value = serde_json::to_value(&report).expect("report serializes");
    if let Some(path) = stats {
        let spec = read_spec(path)?;
        let st = mixture_stats(&spec)?;
        out["tau_star_closed_form"] = json!(match st.kind {
            MixtureKind::Random => tau_star_random(&st, spec.n),
            MixtureKind::Complex => tau_star_complex(&predict_ellipse(&st, spec.n)?)?,
        });
    }
    emit(g.out.as_deref(), &to_json(&out))?;
    g.status(&format!("tau* = {:.6}", report.tau_star));
    Ok(())
}

pub fn rate_sweep(g: &Globals, input: &Path, samples: usize) -> Result<(), CliError> {
    let w = read_matrix(input)?;
    let report = delay::rate_sweep(&laplacian_spectrum(&w)?, samples)?;
    let mut t = Table::new(vec!["tau_c".into(), "rate_predicted".into()]);
    t.rows = report.rate_curve.iter().map(|&(a, b)| vec![a, b]).collect();
    emit(g.out.as_deref(), &t.render(g.format))?;
    g.status(&format!(
        "R0 = {:.6}, tau* = {:.6}, crossover = {}",
        report.r0,
        report.tau_star,
        report.tau_tilde.map_or("none".into(), |t| format!("{t:.6}"))
    ));
    Ok(())
}

pub fn boundary_curve(g: &Globals, tau: f64, points: usize, full_range: bool) -> Result<(), CliError> {
    let range = if full_range {
        FULL_BOUNDARY_RANGE
    } else {
        DEFAULT_BOUNDARY_RANGE
    };
    let pts = curve(tau, points, range)?;
    let mut t = Table::new(vec!["theta".into(), "r".into(), "x".into(), "y".into()]);
    t.rows = pts.iter().map(|p| vec![p.theta, p.r, p.x, p.y]).collect();
    emit(g.out.as_deref(), &t.render(g.format))?;
    Ok(())
}

pub fn verify_lemmas(g: &Globals, n: usize, tau_d: usize, trials: usize) -> Result<(), CliError> {
    if n == 0 || trials == 0 {
        return Err(CliError::Validation("--n and --trials must be positive".into()));
    }
    let checks = lemmas::verify_lemmas(n, tau_d, trials, g.seed)?;
    let passed = checks.iter().filter(|c| c.passed()).count();
    let failures: Vec<_> = checks
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.passed())
        .map(|(k, c)| json!({ "trial": k, "check": c }))
        .collect();
    let summary = json!({ "trials": trials, "passed": passed, "failures": failures });
    emit(g.out.as_deref(), &to_json(&summary))?;
    g.status(&format!("{passed}/{trials} passes"));
    if passed == trials {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{} of {trials} trials failed", trials - passed)))
    }
}
