//! Principal branch of the Lambert W function on the complex plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambertValue {
    pub w: Complex64,
    /// `|w e^w - z|`.
    pub residual: f64,
}

fn residual(w: Complex64, z: Complex64) -> f64 {
    (w * w.exp() - z).norm()
}

/// Series in `p = sqrt(2(ez + 1))` about the branch point `z = -1/e`.
fn branch_point_series(p: Complex64) -> Complex64 {
    const C: [f64; 7] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
    ];
    C.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * p + c)
}

fn initial_guess(z: Complex64) -> Complex64 {
    let p = (2.0 * (E * z + 1.0)).sqrt();
    if p.norm() < 0.6 {
        return branch_point_series(p);
    }
    if z.norm() < 0.25 {
        return z - z * z + 1.5 * z * z * z;
    }
    if z.re > -1.0 && z.re < 1.5 && z.im.abs() < 1.0 && z.re > -2.5 * z.im.abs() - 0.2 {
        // Rational fit valid around the origin away from the cut.
        return z * (3.0 + 6.0 * z + z * z) / (3.0 + 9.0 * z + 5.0 * z * z);
    }
    let l1 = z.ln();
    if z.norm() <= 3.0 {
        return l1;
    }
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

/// Whether `w` lies in the range of the principal branch.
pub fn in_principal_range(w: Complex64) -> bool {
    let (x, y) = (w.re, w.im);
    if y == 0.0 {
        return x >= -1.0;
    }
    y.abs() < PI && x > -y / y.tan()
}

/// `W₀(z)`. On the cut `z < -1/e` the value is the limit from the upper
/// half-plane.
pub fn lambert_w0(z: Complex64) -> Result<LambertValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("lambert_w0 argument {z} is not finite")));
    }
    // A negative zero imaginary part would select the lower side of the cut.
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });
    if z.norm() == 0.0 {
        return Ok(LambertValue {
            w: Complex64::new(0.0, 0.0),
            residual: 0.0,
        });
    }
    let shifted = E * z + 1.0;
    if shifted.norm() <= 8.0 * f64::EPSILON {
        // Within rounding of -1/e, where W has a square-root singularity.
        let w = Complex64::new(-1.0, 0.0);
        return Ok(LambertValue {
            w,
            residual: residual(w, z),
        });
    }
    let p = (2.0 * shifted).sqrt();
    if p.norm() < 1e-3 {
        // Halley's denominator vanishes at the branch point; the truncated
        // series is already exact to rounding here.
        let w = branch_point_series(p);
        return Ok(LambertValue {
            w,
            residual: residual(w, z),
        });
    }

    let tol = 1e-12 * z.norm().max(1.0);
    // The staged guess nearly always lands on branch 0; the others are a
    // defensive fallback.
    let guesses = [initial_guess(z), branch_point_series(p), z.ln(), z / (1.0 + z)];
    for guess in guesses {
        if let Some(w) = halley(z, guess, tol) {
            if near_principal_range(w) {
                return Ok(LambertValue {
                    w,
                    residual: residual(w, z),
                });
            }
        }
    }
    Err(Error::NoConvergence("Lambert W Halley iteration"))
}

fn halley(z: Complex64, mut w: Complex64, tol: f64) -> Option<Complex64> {
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        w -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + w.norm()) {
            break;
        }
    }
    (residual(w, z) <= tol).then_some(w)
}

/// Principal range with slack for values on the image of the branch cut.
fn near_principal_range(w: Complex64) -> bool {
    if in_principal_range(w) {
        return true;
    }
    let (x, y) = (w.re, w.im);
    y.abs() < PI && y != 0.0 && x >= -y / y.tan() - 1e-9 * (1.0 + w.norm())
}
