//! Dense eigenvalues and the random-matrix predictions for mixture networks.

mod eig;
mod laws;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::SignedWeightMatrix;

pub use eig::{eigen_residual, eigenvalues_raw};
pub use laws::{
    containment_check, outlier_eigenvalue, predict_circular, predict_ellipse, ContainmentReport,
    EllipsePrediction, DEFAULT_SLACK,
};

/// How eigenvalues in a [`SpectralSummary`] are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `|θ₁| ≥ |θ₂| ≥ …`, used for discrete-time systems.
    DescendingModulus,
    /// `|Re α₁| ≤ |Re α₂| ≤ …`, used for `-L` in continuous time.
    AscendingAbsReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<Complex64>,
    pub spectral_radius: f64,
    pub rightmost_real: f64,
}

impl SpectralSummary {
    pub fn from_values(mut eigenvalues: Vec<Complex64>, ordering: Ordering) -> Self {
        sort_eigenvalues(&mut eigenvalues, ordering);
        let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let rightmost_real = eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            eigenvalues,
            spectral_radius,
            rightmost_real,
        }
    }

    pub fn reordered(mut self, ordering: Ordering) -> Self {
        sort_eigenvalues(&mut self.eigenvalues, ordering);
        self
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Sum of eigenvalues; equals the trace of the source matrix.
    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }
}

fn sort_eigenvalues(v: &mut [Complex64], ordering: Ordering) {
    // Ties are broken by real then imaginary part so output is deterministic.
    let tie = |a: &Complex64, b: &Complex64| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im));
    match ordering {
        Ordering::DescendingModulus => {
            v.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then_with(|| tie(a, b)))
        }
        Ordering::AscendingAbsReal => {
            v.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()).then_with(|| tie(a, b)))
        }
    }
}

/// All eigenvalues of `m`, ordered by descending modulus.
pub fn eigenvalues(m: &SignedWeightMatrix) -> Result<SpectralSummary> {
    Ok(SpectralSummary::from_values(
        eigenvalues_raw(m)?,
        Ordering::DescendingModulus,
    ))
}

/// Largest eigenvalue modulus of `m`.
pub fn spectral_radius(m: &SignedWeightMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.spectral_radius)
}
