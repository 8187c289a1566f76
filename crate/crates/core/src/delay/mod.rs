//! Delay margins and delay-dependent convergence rates for `Ẋ = -L X(t-τ)`.
//!
//! The characteristic roots for an eigenvalue `α` of `-L` are
//! `z = W_k(α τ)/τ`, and the rightmost of them comes from the principal
//! branch. Everything here is built on that fact.

mod lambert;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::netgen::MixtureStats;
use crate::spectral::{EllipsePrediction, SpectralSummary};

pub use lambert::{in_principal_range, lambert_w0, LambertValue};

/// Boundary delay reported for a zero eigenvalue, which never destabilizes.
pub const ZERO_EIGENVALUE_TAU: f64 = 1e18;
const ZERO_EIGENVALUE_TOL: f64 = 1e-12;
const DOMINANT_REL_TOL: f64 = 1e-9;
const SCAN_POINTS: usize = 64;
const SCAN_START: f64 = 1e-6;
const BISECTION_TOL: f64 = 1e-10;
const SWEEP_FRACTION: f64 = 0.999;

/// Largest delay for which the eigenvalue `x + iy` of `-L` stays stable.
pub fn teardrop_tau(x: f64, y: f64) -> Result<f64> {
    if x > 0.0 {
        return Err(Error::PositiveRealPart { re: x, im: y });
    }
    if x == 0.0 && y == 0.0 {
        return Ok(ZERO_EIGENVALUE_TAU);
    }
    if y == 0.0 {
        return Ok(PI / (2.0 * x.abs()));
    }
    Ok((-x / y).atan().abs() / x.hypot(y))
}

fn is_zero(a: Complex64) -> bool {
    a.norm() <= ZERO_EIGENVALUE_TOL
}

fn boundary(a: Complex64) -> Result<f64> {
    if is_zero(a) {
        Ok(ZERO_EIGENVALUE_TAU)
    } else {
        teardrop_tau(a.re, a.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub per_eig_boundary: Vec<(Complex64, f64)>,
    pub tau_star: f64,
    pub tau_tilde: Option<f64>,
    pub accel_possible: bool,
    /// `(τ, R_τ)` samples.
    pub rate_curve: Vec<(f64, f64)>,
    pub r0: f64,
}

fn r0_of(eigs: &SpectralSummary) -> f64 {
    eigs.eigenvalues
        .iter()
        .map(|a| a.re.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Per-eigenvalue boundaries and their minimum.
pub fn tau_star(eigs: &SpectralSummary) -> Result<DelayReport> {
    let per_eig_boundary = eigs
        .eigenvalues
        .iter()
        .map(|&a| boundary(a).map(|t| (a, t)))
        .collect::<Result<Vec<_>>>()?;
    let tau_star = per_eig_boundary
        .iter()
        .map(|&(_, t)| t)
        .fold(ZERO_EIGENVALUE_TAU, f64::min);
    Ok(DelayReport {
        per_eig_boundary,
        tau_star,
        tau_tilde: None,
        accel_possible: accel_condition(eigs),
        rate_curve: Vec::new(),
        r0: r0_of(eigs),
    })
}

fn tau_star_value(eigs: &SpectralSummary) -> Result<f64> {
    eigs.eigenvalues
        .iter()
        .try_fold(ZERO_EIGENVALUE_TAU, |m, &a| Ok(m.min(boundary(a)?)))
}

/// Closed-form delay margin for a normalized random mixture, from the
/// uppermost and leftmost points of the predicted disc around `-1`.
pub fn tau_star_random(stats: &MixtureStats, n: usize) -> f64 {
    let nf = n as f64;
    let alpha = (nf - 1.0) * stats.p_connect * stats.e_abs_z;
    let s = (nf * stats.p_connect * stats.sigma * stats.sigma).sqrt();
    let upper = alpha / alpha.hypot(s) * (alpha / s).atan();
    let left = alpha * PI / (2.0 * alpha + 2.0 * s);
    upper.min(left)
}

/// Closed-form delay margin for a normalized complex mixture: the extreme
/// points of the predicted ellipse (and the outlier, if any) shifted by `-1`.
pub fn tau_star_complex(pred: &EllipsePrediction) -> Result<f64> {
    let e = pred.center_shift;
    let mut t = teardrop_tau(pred.a - e - 1.0, 0.0)?
        .min(teardrop_tau(-pred.a - e - 1.0, 0.0)?)
        .min(teardrop_tau(-e - 1.0, pred.b)?);
    if let Some(out) = pred.outlier {
        t = t.min(teardrop_tau(out - 1.0, 0.0)?);
    }
    Ok(t)
}

/// `g(x) = Re W₀(x) / Re x` with `g(0) = 1`.
pub fn delay_gain(x: Complex64) -> Result<f64> {
    if x.re == 0.0 && x.im == 0.0 {
        return Ok(1.0);
    }
    if x.re >= 0.0 {
        return Err(Error::PositiveRealPart { re: x.re, im: x.im });
    }
    Ok(lambert_w0(x)?.w.re / x.re)
}

fn require_left_half_plane(eigs: &SpectralSummary) -> Result<()> {
    match eigs.eigenvalues.iter().find(|a| !(a.re < 0.0)) {
        Some(a) => Err(Error::PositiveRealPart { re: a.re, im: a.im }),
        None => Ok(()),
    }
}

/// Decay exponent `-Re W₀(α τ) / τ` of the rightmost root for one eigenvalue.
fn root_rate(a: Complex64, tau: f64) -> Result<f64> {
    if tau == 0.0 {
        return Ok(-a.re);
    }
    Ok(-lambert_w0(a * tau)?.w.re / tau)
}

/// Decay rate `R_τ = min_k g(α_k τ) |Re α_k|` for `0 <= τ < τ*`.
pub fn rate_continuous(eigs: &SpectralSummary, tau_c: f64) -> Result<f64> {
    require_left_half_plane(eigs)?;
    if !(tau_c >= 0.0) {
        return Err(Error::InvalidInput(format!("delay {tau_c} must be >= 0")));
    }
    let tau_star = tau_star_value(eigs)?;
    if tau_c >= tau_star {
        return Err(Error::DelayOutOfRange { tau: tau_c, tau_star });
    }
    rate_unchecked(eigs, tau_c)
}

fn rate_unchecked(eigs: &SpectralSummary, tau_c: f64) -> Result<f64> {
    // Conjugates share a rate, so only the upper half-plane is evaluated.
    eigs.eigenvalues
        .iter()
        .filter(|a| a.im >= 0.0)
        .try_fold(f64::INFINITY, |m, &a| Ok(m.min(root_rate(a, tau_c)?)))
}

/// Smallest positive delay at which the delayed rate falls back to `R₀`.
pub fn tau_tilde(eigs: &SpectralSummary) -> Result<f64> {
    require_left_half_plane(eigs)?;
    let r0 = r0_of(eigs);
    let mut best: Option<f64> = None;
    for &a in eigs.eigenvalues.iter().filter(|a| a.im >= 0.0) {
        let upper = boundary(a)?;
        let h = |tau: f64| root_rate(a, tau).map(|r| r - r0);
        let scan: Vec<f64> = (0..SCAN_POINTS)
            .map(|j| upper * SCAN_START.powf(1.0 - j as f64 / (SCAN_POINTS - 1) as f64))
            .collect();
        let mut prev = (scan[0], h(scan[0])?);
        for &tau in &scan[1..] {
            // The last scan point is the boundary itself, where the rate is 0.
            let cur = (tau, h(tau)?);
            if prev.1 > 0.0 && cur.1 <= 0.0 {
                let eta = bisect(&h, prev.0, cur.0)?;
                best = Some(best.map_or(eta, |b: f64| b.min(eta)));
                break;
            }
            prev = cur;
        }
    }
    best.ok_or(Error::NoCrossover)
}

fn bisect(h: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if h(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Whether every dominant eigenvalue (smallest `|Re|`) has argument strictly
/// inside `(3π/4, 5π/4)`, i.e. `|Im| < -Re`. False if any eigenvalue has
/// `Re >= 0`.
pub fn accel_condition(eigs: &SpectralSummary) -> bool {
    if require_left_half_plane(eigs).is_err() || eigs.is_empty() {
        return false;
    }
    let dominant_re = eigs
        .eigenvalues
        .iter()
        .map(|a| a.re)
        .fold(f64::NEG_INFINITY, f64::max);
    eigs.eigenvalues
        .iter()
        .filter(|a| (a.re - dominant_re).abs() <= DOMINANT_REL_TOL * dominant_re.abs())
        .all(|a| a.im.abs() < -a.re)
}

/// Predicted rate on `samples` evenly spaced delays in `[0, 0.999 τ*)`,
/// together with `τ*`, `τ̃` and the acceleration flag.
pub fn rate_sweep(eigs: &SpectralSummary, samples: usize) -> Result<DelayReport> {
    if samples < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 samples, got {samples}")));
    }
    require_left_half_plane(eigs)?;
    let mut report = tau_star(eigs)?;
    let end = SWEEP_FRACTION * report.tau_star;
    report.rate_curve = (0..samples)
        .map(|j| {
            let tau = end * j as f64 / samples as f64;
            rate_unchecked(eigs, tau).map(|r| (tau, r))
        })
        .collect::<Result<_>>()?;
    report.tau_tilde = match tau_tilde(eigs) {
        Ok(t) => Some(t),
        Err(Error::NoCrossover) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}

/// Polar sample `(θ, r)` of the stability boundary at delay `tau`, with
/// `r(θ) = |arctan(-cot θ)| / τ`.
pub fn boundary_radius(theta: f64, tau: f64) -> f64 {
    (-1.0 / theta.tan()).atan().abs() / tau
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
}

/// `points` interior samples of the boundary curve for `θ` in the open
/// interval `range`.
pub fn boundary_curve(tau: f64, points: usize, range: (f64, f64)) -> Result<Vec<BoundaryPoint>> {
    if !(tau > 0.0) || points == 0 {
        return Err(Error::InvalidInput("need tau > 0 and at least one point".into()));
    }
    let (lo, hi) = range;
    if !(PI / 2.0 <= lo && lo < hi && hi <= 1.5 * PI) {
        return Err(Error::InvalidInput(format!(
            "angle range ({lo}, {hi}) must lie within [π/2, 3π/2]"
        )));
    }
    Ok((0..points)
        .map(|j| {
            let theta = lo + (hi - lo) * (j + 1) as f64 / (points + 1) as f64;
            let r = boundary_radius(theta, tau);
            BoundaryPoint {
                theta,
                r,
                x: r * theta.cos(),
                y: r * theta.sin(),
            }
        })
        .collect())
}

/// Angle range plotted by default.
pub const DEFAULT_BOUNDARY_RANGE: (f64, f64) = (0.75 * PI, 1.25 * PI);
/// The whole left half-plane.
pub const FULL_BOUNDARY_RANGE: (f64, f64) = (0.5 * PI, 1.5 * PI);
