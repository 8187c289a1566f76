//! Bundled experiments on the reference network and on random mixtures.

use delayed_opinions::continuous::{integrate, ContinuousClassification, ContinuousSystem};
use delayed_opinions::delay::{
    boundary_curve, rate_continuous, rate_sweep, tau_star, tau_star_complex, tau_star_random,
    DEFAULT_BOUNDARY_RANGE,
};
use delayed_opinions::discrete::{discrete_rate, simulate, Classification, DiscreteSystem};
use delayed_opinions::fixtures::{example_x0, w_m, w_t, w_tm};
use delayed_opinions::netgen::{
    build_laplacian, generate_normalized, mixture_stats, MixtureKind, MixtureSpec, Proportions,
};
use delayed_opinions::spectral::{
    containment_check, eigenvalues, predict_circular, predict_ellipse, SpectralSummary,
    DEFAULT_SLACK,
};
use delayed_opinions::SignedWeightMatrix;
use serde_json::{json, Value};

use crate::commands::uniform_x0;
use crate::output::{emit, ensure_dir, to_json, Table};
use crate::{CliError, Example, Globals};

const MIXTURE_N: usize = 100;
const MIXTURE_P: f64 = 0.5;

pub fn run(g: &Globals, example: Example) -> Result<(), CliError> {
    if let Some(dir) = g.out.as_deref() {
        ensure_dir(dir)?;
    }
    let summary = match example {
        Example::Example2 => example_2(g)?,
        Example::Example3 => example_3(g)?,
        Example::Example4 => example_4(g)?,
        Example::Example5 => example_5(g)?,
        Example::Example6 => example_6(g)?,
    };
    let ok = summary["matches_expected"].as_bool().unwrap_or(false);
    emit(None, &to_json(&summary))?;
    g.status(if ok {
        "all checks match the reported behaviour"
    } else {
        "some checks differ from the reported behaviour"
    });
    Ok(())
}

fn write_table(g: &Globals, name: &str, t: &Table) -> Result<(), CliError> {
    match g.out.as_deref() {
        Some(dir) => {
            let ext = match g.format {
                crate::Format::Csv => "csv",
                crate::Format::Json => "json",
            };
            emit(Some(&dir.join(format!("{name}.{ext}"))), &t.render(g.format))
        }
        None => Ok(()),
    }
}

fn reference_networks() -> [(&'static str, SignedWeightMatrix); 3] {
    [("w_t", w_t()), ("w_m", w_m()), ("w_tm", w_tm())]
}

fn states_table(label: &str, times: &[f64], states: &[Vec<f64>]) -> Table {
    let n = states.first().map_or(0, Vec::len);
    let mut header = vec![label.to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    let mut t = Table::new(header);
    for (time, x) in times.iter().zip(states) {
        let mut row = vec![*time];
        row.extend(x);
        t.rows.push(row);
    }
    t
}

/// Discrete dynamics on the trust, mistrust and mixed reference networks.
fn example_2(g: &Globals) -> Result<Value, CliError> {
    let mut runs = Vec::new();
    let mut all = true;
    for tau_d in [0usize, 1, 4] {
        for (name, w) in reference_networks() {
            let sys = DiscreteSystem::from_weights(&w, tau_d, example_x0())?;
            let traj = simulate(&sys, 5000, 1e-6)?;
            let converged = traj.classification == Classification::ConvergedZero;
            let expected = name == "w_tm";
            all &= converged == expected;
            if tau_d == 0 {
                let steps: Vec<f64> = (0..traj.states.len()).map(|k| k as f64).collect();
                write_table(g, &format!("example2_{name}"), &states_table("step", &steps, &traj.states))?;
            }
            runs.push(json!({
                "network": name,
                "tau_d": tau_d,
                "classification": traj.classification.label(),
                "steps_run": traj.steps_run,
                "converged": converged,
                "expected_converged": expected,
            }));
        }
    }
    Ok(json!({ "example": "example-2", "runs": runs, "matches_expected": all }))
}

/// Stability boundaries at several delays against the mixed network's
/// Laplacian spectrum.
fn example_3(g: &Globals) -> Result<Value, CliError> {
    for tau in [0.2, 0.5, 1.0] {
        let pts = boundary_curve(tau, 200, DEFAULT_BOUNDARY_RANGE)?;
        let mut t = Table::new(vec!["theta".into(), "r".into(), "x".into(), "y".into()]);
        t.rows = pts.iter().map(|p| vec![p.theta, p.r, p.x, p.y]).collect();
        write_table(g, &format!("example3_boundary_tau{tau}"), &t)?;
    }
    let eigs = eigenvalues(&build_laplacian(&w_tm()))?;
    let report = tau_star(&eigs)?;
    let mut t = Table::new(vec!["re".into(), "im".into(), "tau_boundary".into()]);
    t.rows = report
        .per_eig_boundary
        .iter()
        .map(|(z, b)| vec![z.re, z.im, *b])
        .collect();
    write_table(g, "example3_eigenvalues", &t)?;
    let inside_02 = 0.2 < report.tau_star;
    let outside_1 = 1.0 > report.tau_star;
    Ok(json!({
        "example": "example-3",
        "tau_star": report.tau_star,
        "stable_at_0.2": inside_02,
        "unstable_at_1": outside_1,
        "matches_expected": inside_02 && outside_1,
    }))
}

/// Continuous dynamics on the reference networks at delays 0, 0.2 and 1.
fn example_4(g: &Globals) -> Result<Value, CliError> {
    let mut runs = Vec::new();
    let mut all = true;
    for (name, w) in reference_networks() {
        for tau in [0.0, 0.2, 1.0] {
            let sys = ContinuousSystem::new(build_laplacian(&w), tau, example_x0())?.with_horizon(300.0);
            let traj = integrate(&sys)?;
            // Trust-only and mistrust-only networks settle at a nonzero
            // (bipartite) consensus, which the zero test reports as
            // undetermined; a settled tail counts as convergence here.
            let settled = settled_tail(&traj.states);
            let verdict = match traj.classification {
                ContinuousClassification::ConvergedZero => "converged",
                ContinuousClassification::Diverged => "diverged",
                ContinuousClassification::Undetermined if settled => "converged",
                ContinuousClassification::Undetermined => "undetermined",
            };
            let expected = if tau < 1.0 { "converged" } else { "diverged" };
            all &= verdict == expected;
            write_table(
                g,
                &format!("example4_{name}_tau{tau}"),
                &states_table("t", &traj.times, &traj.states),
            )?;
            runs.push(json!({
                "network": name,
                "tau_c": tau,
                "classification": traj.classification.label(),
                "verdict": verdict,
                "expected": expected,
                "final_state": traj.states.last(),
            }));
        }
    }
    Ok(json!({ "example": "example-4", "runs": runs, "matches_expected": all }))
}

fn settled_tail(states: &[Vec<f64>]) -> bool {
    let k = states.len();
    if k < 200 {
        return false;
    }
    states[k - 200..].windows(2).all(|p| {
        p[0].iter()
            .zip(&p[1])
            .all(|(a, b)| (a - b).abs() < 1e-10)
    })
}

fn scenarios(seed: u64) -> Vec<(&'static str, MixtureSpec)> {
    vec![
        ("random", MixtureSpec::random(MIXTURE_N, MIXTURE_P, 1.0, seed)),
        ("case_a", MixtureSpec::complex(MIXTURE_N, MIXTURE_P, 1.0, Proportions::CASE_A, seed)),
        ("case_b", MixtureSpec::complex(MIXTURE_N, MIXTURE_P, 1.0, Proportions::CASE_B, seed)),
        ("case_c", MixtureSpec::complex(MIXTURE_N, MIXTURE_P, 1.0, Proportions::CASE_C, seed)),
        ("case_d", MixtureSpec::complex(MIXTURE_N, MIXTURE_P, 1.0, Proportions::CASE_D, seed)),
    ]
}

fn eig_table(s: &SpectralSummary) -> Table {
    let mut t = Table::new(vec!["re".into(), "im".into()]);
    t.rows = s.eigenvalues.iter().map(|z| vec![z.re, z.im]).collect();
    t
}

/// Discrete convergence rates of random and complex mixtures.
fn example_5(g: &Globals) -> Result<Value, CliError> {
    let delays: Vec<usize> = (0..=8).collect();
    let mut header = vec!["tau_d".to_string()];
    let mut columns = Vec::new();
    let mut cases = Vec::new();
    let mut all_decreasing = true;
    for (name, spec) in scenarios(g.seed) {
        let w = generate_normalized(&spec)?;
        let s = eigenvalues(&w)?;
        write_table(g, &format!("example5_eigs_{name}"), &eig_table(&s))?;
        let st = mixture_stats(&spec)?;
        let prediction = match st.kind {
            MixtureKind::Random => json!({ "radius": predict_circular(&st, MIXTURE_N) }),
            MixtureKind::Complex => {
                let pred = predict_ellipse(&st, MIXTURE_N)?;
                let c = containment_check(&s, &pred, DEFAULT_SLACK);
                json!({ "ellipse": pred, "containment": c })
            }
        };
        let rates = delays
            .iter()
            .map(|&tau| discrete_rate(&DiscreteSystem::from_weights(&w, tau, vec![0.0; MIXTURE_N])?))
            .collect::<Result<Vec<f64>, _>>()?;
        all_decreasing &= rates.windows(2).all(|p| p[1] < p[0]);
        cases.push(json!({
            "scenario": name,
            "spectral_radius": s.spectral_radius,
            "prediction": prediction,
            "rates": rates,
        }));
        header.push(name.to_string());
        columns.push(rates);
    }
    let mut t = Table::new(header);
    for (i, &tau) in delays.iter().enumerate() {
        let mut row = vec![tau as f64];
        row.extend(columns.iter().map(|c| c[i]));
        t.rows.push(row);
    }
    write_table(g, "example5_rates", &t)?;
    let r0: Vec<f64> = columns.iter().map(|c| c[0]).collect();
    // Order in `scenarios`: random, a, b, c, d.
    let ordering = r0[0] > r0[4] && r0[4] > r0[1] && r0[1] > r0[2];
    let b_equals_c = (r0[2] - r0[3]).abs() / r0[2] < 0.1;
    Ok(json!({
        "example": "example-5",
        "n": MIXTURE_N,
        "p": MIXTURE_P,
        "seed": g.seed,
        "scenarios": cases,
        "rate_decreases_with_delay": all_decreasing,
        "ordering_random_d_a_b": ordering,
        "case_b_close_to_case_c": b_equals_c,
        "matches_expected": all_decreasing && ordering && b_equals_c,
    }))
}

/// Continuous convergence rates and delay margins of the five mixtures.
fn example_6(g: &Globals) -> Result<Value, CliError> {
    let mut cases = Vec::new();
    let mut all_rise_fall = true;
    let mut all_measured = true;
    let mut small_delay = Vec::new();
    for (name, spec) in scenarios(g.seed) {
        let neg_l = build_laplacian(&generate_normalized(&spec)?);
        let eigs = eigenvalues(&neg_l)?;
        write_table(g, &format!("example6_eigs_{name}"), &eig_table(&eigs))?;
        let st = mixture_stats(&spec)?;
        let closed = match st.kind {
            MixtureKind::Random => tau_star_random(&st, MIXTURE_N),
            MixtureKind::Complex => tau_star_complex(&predict_ellipse(&st, MIXTURE_N)?)?,
        };
        let report = rate_sweep(&eigs, 200)?;
        let mut t = Table::new(vec!["tau_c".into(), "rate_predicted".into()]);
        t.rows = report.rate_curve.iter().map(|&(a, b)| vec![a, b]).collect();
        write_table(g, &format!("example6_rate_{name}"), &t)?;
        let peak = report.rate_curve.iter().map(|p| p.1).fold(0.0, f64::max);
        let rise_fall = peak > report.r0 && report.tau_tilde.is_some();
        all_rise_fall &= rise_fall;

        let tau = 0.5 * report.tau_star;
        let predicted = rate_continuous(&eigs, tau)?;
        let sys = ContinuousSystem::new(neg_l, tau, uniform_x0(MIXTURE_N, g.seed))?
            .with_horizon((40.0 / predicted).max(10.0 * tau));
        let measured = integrate(&sys)?.measured_rate;
        let agrees = measured.is_some_and(|m| (m - predicted).abs() / predicted < 0.15);
        all_measured &= agrees;
        small_delay.push(rate_continuous(&eigs, 0.1 * report.tau_star)?);
        cases.push(json!({
            "scenario": name,
            "tau_star": report.tau_star,
            "tau_star_closed_form": closed,
            "tau_tilde": report.tau_tilde,
            "r0": report.r0,
            "peak_rate": peak,
            "rises_then_falls": rise_fall,
            "half_margin_rate_predicted": predicted,
            "half_margin_rate_measured": measured,
        }));
    }
    // Order in `scenarios`: random, a, b, c, d.
    let r = &small_delay;
    let ordering = r[1] > r[0] && r[0] > r[3] && r[3] > r[4] && r[4] > r[2];
    Ok(json!({
        "example": "example-6",
        "n": MIXTURE_N,
        "p": MIXTURE_P,
        "seed": g.seed,
        "scenarios": cases,
        "all_rise_then_fall": all_rise_fall,
        "measured_rates_agree": all_measured,
        "small_delay_ordering_a_random_c_d_b": ordering,
        "matches_expected": all_rise_fall && all_measured && ordering,
    }))
}

