//! Circular and elliptic law predictions for normalized mixture matrices.
//!
//! Everything is computed from the moments of a single off-diagonal weight
//! `w_ij = s_ij / C`, where `C` is the expected absolute row sum of the
//! strength matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralSummary;
use crate::error::{Error, Result};
use crate::netgen::MixtureStats;

/// Axis inflation used by acceptance experiments.
pub const DEFAULT_SLACK: f64 = 1.15;

/// Predicted spectral radius of a normalized random mixture.
pub fn predict_circular(stats: &MixtureStats, n: usize) -> f64 {
    let nf = n as f64;
    let p = stats.p_connect;
    (nf * p * stats.sigma * stats.sigma).sqrt() / ((nf - 1.0) * p * stats.e_abs_z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsePrediction {
    /// Mean off-diagonal weight 𝔼. The bulk is centred at `-center_shift`.
    pub center_shift: f64,
    /// Variance 𝕍 of an off-diagonal weight.
    pub v: f64,
    /// Cross moment 𝕋 = E(w_ij w_ji).
    pub t: f64,
    pub zeta: f64,
    pub a: f64,
    pub b: f64,
    pub outlier: Option<f64>,
    /// Unshifted outlier eigenvalue of the rank-one perturbed bulk.
    pub lambda_hat: Option<f64>,
    pub q_rightmost: Complex64,
    pub q_leftmost: Complex64,
    pub q_uppermost: Complex64,
    pub q_outlier: Option<Complex64>,
}

impl EllipsePrediction {
    pub fn sqrt_nv(&self, n: usize) -> f64 {
        (n as f64 * self.v).sqrt()
    }

    /// Whether `z` lies in the ellipse with both axes scaled by `slack`.
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        fn term(d: f64, axis: f64) -> f64 {
            if axis > 0.0 {
                (d / axis).powi(2)
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        term(z.re + self.center_shift, self.a * slack) + term(z.im, self.b * slack) <= 1.0
    }
}

struct Moments {
    mean: f64,
    var: f64,
    cross: f64,
}

fn moments(stats: &MixtureStats, n: usize) -> Moments {
    let p = stats.p_connect;
    let ez = stats.e_abs_z;
    let c = (n as f64 - 1.0) * p * stats.p_hat * ez;
    let mean = p * stats.p_bar * ez / c;
    let second = p * stats.p_hat * stats.sigma * stats.sigma / (c * c);
    Moments {
        mean,
        var: second - mean * mean,
        cross: p * stats.p_star * ez * ez / (c * c),
    }
}

/// The outlier `λ̂ - 𝔼` regardless of whether it separates from the bulk.
pub fn outlier_eigenvalue(stats: &MixtureStats, n: usize) -> Result<f64> {
    let m = moments(stats, n);
    if m.mean == 0.0 {
        return Err(Error::DegenerateMean);
    }
    let lambda_hat = n as f64 * m.mean + (m.cross - m.mean * m.mean) / m.mean;
    Ok(lambda_hat - m.mean)
}

/// Elliptic-law geometry for a normalized complex mixture. Random-mixture
/// statistics give the circular law as the `ζ = 0` special case.
pub fn predict_ellipse(stats: &MixtureStats, n: usize) -> Result<EllipsePrediction> {
    let m = moments(stats, n);
    let nf = n as f64;
    let sqrt_nv = (nf * m.var).max(0.0).sqrt();
    let zeta = if m.var > 0.0 {
        (m.cross - m.mean * m.mean) / m.var
    } else {
        0.0
    };
    let a = sqrt_nv * (1.0 + zeta);
    let b = sqrt_nv * (1.0 - zeta);
    let e = m.mean;

    let (outlier, lambda_hat) = if (nf * e).abs() > sqrt_nv {
        let out = outlier_eigenvalue(stats, n)?;
        (Some(out), Some(out + e))
    } else {
        (None, None)
    };

    Ok(EllipsePrediction {
        center_shift: e,
        v: m.var,
        t: m.cross,
        zeta,
        a,
        b,
        outlier,
        lambda_hat,
        q_rightmost: Complex64::new(a - e, 0.0),
        q_leftmost: Complex64::new(-a - e, 0.0),
        q_uppermost: Complex64::new(-e, b),
        q_outlier: outlier.map(|x| Complex64::new(x, 0.0)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub slack: f64,
    /// Eigenvalues tested against the ellipse (the matched outlier excluded).
    pub counted: usize,
    pub inside: usize,
    pub fraction_inside: f64,
    pub outlier_observed: Option<Complex64>,
    /// `|observed - predicted| / |predicted|`.
    pub outlier_rel_error: Option<f64>,
}

pub fn containment_check(
    summary: &SpectralSummary,
    pred: &EllipsePrediction,
    slack: f64,
) -> ContainmentReport {
    let mut rest: Vec<Complex64> = summary.eigenvalues.clone();
    let mut outlier_observed = None;
    let mut outlier_rel_error = None;
    if let Some(q) = pred.q_outlier {
        if let Some((idx, _)) = rest
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| (*x - q).norm().total_cmp(&(*y - q).norm()))
        {
            let z = rest.remove(idx);
            outlier_observed = Some(z);
            outlier_rel_error = Some((z - q).norm() / q.norm());
        }
    }
    let inside = rest.iter().filter(|z| pred.contains(**z, slack)).count();
    let counted = rest.len();
    ContainmentReport {
        slack,
        counted,
        inside,
        fraction_inside: if counted == 0 {
            1.0
        } else {
            inside as f64 / counted as f64
        },
        outlier_observed,
        outlier_rel_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{mixture_stats, MixtureSpec, Proportions};
    use crate::spectral::Ordering;
    use std::f64::consts::PI;

    fn stats(props: Proportions, n: usize, p: f64) -> MixtureStats {
        mixture_stats(&MixtureSpec::complex(n, p, 1.0, props, 0)).unwrap()
    }

    #[test]
    fn circular_radius_at_reference_point() {
        let s = mixture_stats(&MixtureSpec::random(500, 0.5, 1.0, 0)).unwrap();
        let want = (250.0f64).sqrt() / (499.0 * 0.5 * (2.0 / PI).sqrt());
        assert!((predict_circular(&s, 500) - want).abs() < 1e-15);
        assert!((predict_circular(&s, 500) - 0.0794).abs() < 5e-4);
    }

    #[test]
    fn circular_radius_shrinks_with_n() {
        let s = mixture_stats(&MixtureSpec::random(10, 0.3, 2.0, 0)).unwrap();
        let mut last = f64::INFINITY;
        for n in [10, 50, 100, 1000, 10000] {
            let r = predict_circular(&s, n);
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn closed_forms_agree_with_moments() {
        let ez = (2.0 / PI).sqrt();
        for props in [Proportions::CASE_B, Proportions::CASE_C, Proportions::CASE_D] {
            for (n, p) in [(50usize, 0.3), (500, 0.5), (500, 1.0)] {
                let s = stats(props, n, p);
                let pred = predict_ellipse(&s, n).unwrap();
                let nf = n as f64;
                let (ph, pb, ps) = (props.p_hat(), props.p_bar(), props.p_star());
                assert!((pred.center_shift - pb / ((nf - 1.0) * ph)).abs() < 1e-15);
                let sqrt_nv = (nf * p * ph - nf * p * p * pb * pb * ez * ez).sqrt()
                    / ((nf - 1.0) * p * ph * ez);
                assert!((pred.sqrt_nv(n) - sqrt_nv).abs() < 1e-12 * sqrt_nv);
                let zeta = (ps * ez * ez - p * pb * pb * ez * ez) / (ph - p * pb * pb * ez * ez);
                assert!((pred.zeta - zeta).abs() < 1e-12);
                if pb != 0.0 {
                    let closed = (ps + (nf - 2.0) * p * pb * pb) / ((nf - 1.0) * p * ph * pb);
                    let route = outlier_eigenvalue(&s, n).unwrap();
                    assert!((route - closed).abs() < 1e-12 * closed.abs());
                }
            }
        }
    }

    #[test]
    fn large_n_outliers_approach_three_fifths() {
        let b = predict_ellipse(&stats(Proportions::CASE_B, 100_000, 0.5), 100_000).unwrap();
        assert!((b.outlier.unwrap() - 0.6).abs() < 1e-3);
        let c = predict_ellipse(&stats(Proportions::CASE_C, 100_000, 0.5), 100_000).unwrap();
        assert!((c.outlier.unwrap() + 0.6).abs() < 1e-3);
    }

    #[test]
    fn case_a_has_zero_mean_and_no_outlier() {
        let s = stats(Proportions::CASE_A, 500, 0.5);
        let pred = predict_ellipse(&s, 500).unwrap();
        assert_eq!(pred.center_shift, 0.0);
        assert!(pred.outlier.is_none());
        assert!(pred.zeta < 0.0);
        assert!(pred.b > pred.a);
        assert_eq!(outlier_eigenvalue(&s, 500), Err(Error::DegenerateMean));
    }

    #[test]
    fn random_stats_give_circle() {
        let s = mixture_stats(&MixtureSpec::random(500, 0.5, 1.0, 0)).unwrap();
        let pred = predict_ellipse(&s, 500).unwrap();
        assert_eq!(pred.zeta, 0.0);
        assert!((pred.a - predict_circular(&s, 500)).abs() < 1e-15);
        assert_eq!(pred.a, pred.b);
    }

    #[test]
    fn centre_is_contained() {
        let pred = predict_ellipse(&stats(Proportions::CASE_D, 500, 0.5), 500).unwrap();
        let centre = Complex64::new(-pred.center_shift, 0.0);
        let summary = SpectralSummary::from_values(vec![centre; 10], Ordering::DescendingModulus);
        let r = containment_check(&summary, &pred, 1.0);
        assert_eq!(r.fraction_inside, 1.0);
    }

    #[test]
    fn circle_reduces_to_modulus_test() {
        let s = mixture_stats(&MixtureSpec::random(200, 0.5, 1.0, 0)).unwrap();
        let pred = predict_ellipse(&s, 200).unwrap();
        let r = pred.a * 1.15;
        for k in 0..32 {
            let z = Complex64::from_polar(r * 0.999, k as f64 * PI / 16.0);
            assert!(pred.contains(z, 1.15));
            let z = Complex64::from_polar(r * 1.001, k as f64 * PI / 16.0);
            assert!(!pred.contains(z, 1.15));
        }
    }

    #[test]
    fn outlier_is_removed_before_counting() {
        let pred = predict_ellipse(&stats(Proportions::CASE_B, 500, 0.5), 500).unwrap();
        let q = pred.q_outlier.unwrap();
        let mut values = vec![Complex64::new(-pred.center_shift, 0.0); 9];
        values.push(q * 1.02);
        let summary = SpectralSummary::from_values(values, Ordering::DescendingModulus);
        let r = containment_check(&summary, &pred, 1.15);
        assert_eq!(r.counted, 9);
        assert_eq!(r.fraction_inside, 1.0);
        assert!((r.outlier_rel_error.unwrap() - 0.02).abs() < 1e-12);
    }
}
