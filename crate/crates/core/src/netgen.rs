//! Random signed interaction networks, row normalization and the delayed
//! Laplacian.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the seed, the retry
//! attempt and the entry (or unordered pair) index, so the generated matrix
//! does not depend on iteration order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::SignedWeightMatrix;

/// Retries with derived sub-seeds when a draw leaves a node without
/// in-neighbours.
pub const MAX_ATTEMPTS: u64 = 100;

const PROPORTION_TOL: f64 = 1e-9;

/// Shares of the five pair interaction types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportions {
    /// `(+/+)`
    pub mutual_trust: f64,
    /// `(-/-)`
    pub mutual_mistrust: f64,
    /// `(+/-)`
    pub trust_mistrust: f64,
    /// `(+/0)`
    pub unilateral_trust: f64,
    /// `(-/0)`
    pub unilateral_mistrust: f64,
}

impl Proportions {
    /// Order: `(+/+), (-/-), (+/-), (+/0), (-/0)`.
    pub fn from_array(p: [f64; 5]) -> Self {
        Self {
            mutual_trust: p[0],
            mutual_mistrust: p[1],
            trust_mistrust: p[2],
            unilateral_trust: p[3],
            unilateral_mistrust: p[4],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [
            self.mutual_trust,
            self.mutual_mistrust,
            self.trust_mistrust,
            self.unilateral_trust,
            self.unilateral_mistrust,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.to_array();
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidProportions(format!(
                "entries must be finite and nonnegative: {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROPORTION_TOL {
            return Err(Error::InvalidProportions(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// Both trust and mistrust are present:
    /// `P(+/+) + P(+/0) < 1` and `P(-/-) + P(-/0) < 1`.
    pub fn is_general_case(&self) -> bool {
        self.mutual_trust + self.unilateral_trust < 1.0
            && self.mutual_mistrust + self.unilateral_mistrust < 1.0
    }

    /// Expected absolute-weight share, `P̂`.
    pub fn p_hat(&self) -> f64 {
        self.mutual_trust
            + self.trust_mistrust
            + self.mutual_mistrust
            + 0.5 * self.unilateral_trust
            + 0.5 * self.unilateral_mistrust
    }

    /// Expected signed-weight share, `P̄`.
    pub fn p_bar(&self) -> f64 {
        self.mutual_trust - self.mutual_mistrust + 0.5 * self.unilateral_trust
            - 0.5 * self.unilateral_mistrust
    }

    /// Reciprocal-sign correlation, `P*`.
    pub fn p_star(&self) -> f64 {
        self.mutual_trust + self.mutual_mistrust - self.trust_mistrust
    }

    pub const CASE_A: Self = Self {
        mutual_trust: 0.0,
        mutual_mistrust: 0.0,
        trust_mistrust: 1.0,
        unilateral_trust: 0.0,
        unilateral_mistrust: 0.0,
    };
    pub const CASE_B: Self = Self {
        mutual_trust: 1.0 / 3.0,
        mutual_mistrust: 0.0,
        trust_mistrust: 1.0 / 3.0,
        unilateral_trust: 1.0 / 3.0,
        unilateral_mistrust: 0.0,
    };
    pub const CASE_C: Self = Self {
        mutual_trust: 0.0,
        mutual_mistrust: 1.0 / 3.0,
        trust_mistrust: 1.0 / 3.0,
        unilateral_trust: 0.0,
        unilateral_mistrust: 1.0 / 3.0,
    };
    pub const CASE_D: Self = Self {
        mutual_trust: 0.2,
        mutual_mistrust: 0.2,
        trust_mistrust: 0.2,
        unilateral_trust: 0.2,
        unilateral_mistrust: 0.2,
    };
}

/// Parameters of a random construction. Without proportions this
/// describes the random mixture (i.i.d. normal strengths); with proportions,
/// the complex mixture of five pair types with half-normal strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub n: usize,
    pub p_connect: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub proportions: Option<Proportions>,
    #[serde(default)]
    pub seed: u64,
}

fn default_sigma() -> f64 {
    1.0
}

impl MixtureSpec {
    pub fn random(n: usize, p_connect: f64, sigma: f64, seed: u64) -> Self {
        Self {
            n,
            p_connect,
            sigma,
            proportions: None,
            seed,
        }
    }

    pub fn complex(n: usize, p_connect: f64, sigma: f64, proportions: Proportions, seed: u64) -> Self {
        Self {
            n,
            p_connect,
            sigma,
            proportions: Some(proportions),
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput("mixture needs n >= 2".into()));
        }
        if !(self.p_connect > 0.0 && self.p_connect <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "connection probability {} not in (0, 1]",
                self.p_connect
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma {} must be > 0", self.sigma)));
        }
        if let Some(p) = &self.proportions {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureKind {
    Random,
    Complex,
}

/// Moments of a mixture that the spectral predictions are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureStats {
    pub kind: MixtureKind,
    pub p_connect: f64,
    pub sigma: f64,
    pub p_hat: f64,
    pub p_bar: f64,
    pub p_star: f64,
    /// Asymptotic absolute row sum (`C_r` or `C_m`).
    pub expected_row_sum: f64,
    /// `E|Z|` for `Z ~ N(0, sigma^2)`.
    pub e_abs_z: f64,
}

pub fn mixture_stats(spec: &MixtureSpec) -> Result<MixtureStats> {
    spec.validate()?;
    let e_abs_z = spec.sigma * (2.0 / PI).sqrt();
    let scale = (spec.n - 1) as f64 * spec.p_connect * e_abs_z;
    // The random mixture draws every direction independently with mean-zero
    // strengths: all weight is absolute, none of it signed or reciprocal.
    let (kind, p_hat, p_bar, p_star) = match &spec.proportions {
        None => (MixtureKind::Random, 1.0, 0.0, 0.0),
        Some(p) => (MixtureKind::Complex, p.p_hat(), p.p_bar(), p.p_star()),
    };
    Ok(MixtureStats {
        kind,
        p_connect: spec.p_connect,
        sigma: spec.sigma,
        p_hat,
        p_bar,
        p_star,
        expected_row_sum: scale * p_hat,
        e_abs_z,
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Attempt 0 uses the seed as given; retries use decorrelated sub-seeds.
fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    if attempt == 0 {
        seed
    } else {
        splitmix64(seed ^ splitmix64(attempt))
    }
}

fn entry_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn retry_draws(spec: &MixtureSpec, draw: impl Fn(u64) -> SignedWeightMatrix) -> Result<SignedWeightMatrix> {
    let mut last_empty = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let s = draw(attempt_seed(spec.seed, attempt));
        match (0..s.n()).find(|&i| s.row(i).iter().all(|&v| v == 0.0)) {
            None => return Ok(s),
            Some(i) => last_empty = i,
        }
    }
    Err(Error::ZeroRow(last_empty))
}

/// Case 1: each ordered pair `j -> i` is present with probability `P` and
/// carries a `N(0, sigma^2)` strength.
pub fn generate_random_mixture(spec: &MixtureSpec) -> Result<SignedWeightMatrix> {
    spec.validate()?;
    if spec.proportions.is_some() {
        return Err(Error::InvalidInput(
            "random mixture takes no proportions".into(),
        ));
    }
    let n = spec.n;
    let normal = Normal::new(0.0, spec.sigma).expect("sigma validated");
    retry_draws(spec, |seed| {
        let mut s = SignedWeightMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut rng = entry_rng(seed, (i * n + j) as u64);
                if rng.random::<f64>() < spec.p_connect {
                    s.set(i, j, normal.sample(&mut rng));
                }
            }
        }
        s
    })
}

/// Case 2: each unordered pair interacts with probability `P`; its type is
/// drawn from the proportions and strengths are half-normal `|Z|`.
pub fn generate_complex_mixture(spec: &MixtureSpec) -> Result<SignedWeightMatrix> {
    spec.validate()?;
    let props = spec
        .proportions
        .ok_or_else(|| Error::InvalidProportions("complex mixture needs proportions".into()))?;
    let shares = props.to_array();
    let last_type = shares.iter().rposition(|&p| p > 0.0).expect("shares sum to 1");
    let cumulative: Vec<f64> = shares
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let n = spec.n;
    let normal = Normal::new(0.0, spec.sigma).expect("sigma validated");

    retry_draws(spec, |seed| {
        let mut s = SignedWeightMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut rng = entry_rng(seed, (i * n + j) as u64);
                if rng.random::<f64>() >= spec.p_connect {
                    continue;
                }
                let u: f64 = rng.random();
                // Fall back to the last nonzero type if rounding leaves u
                // above the final cumulative share.
                let kind = cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(last_type);
                let a = normal.sample(&mut rng).abs();
                let b = normal.sample(&mut rng).abs();
                let coin: bool = rng.random();
                let (sij, sji) = match kind {
                    0 => (a, b),
                    1 => (-a, -b),
                    2 if coin => (a, -b),
                    2 => (-a, b),
                    3 if coin => (a, 0.0),
                    3 => (0.0, b),
                    4 if coin => (-a, 0.0),
                    _ => (0.0, -b),
                };
                s.set(i, j, sij);
                s.set(j, i, sji);
            }
        }
        s
    })
}

/// Dispatches on the presence of proportions.
pub fn generate(spec: &MixtureSpec) -> Result<SignedWeightMatrix> {
    match spec.proportions {
        None => generate_random_mixture(spec),
        Some(_) => generate_complex_mixture(spec),
    }
}

/// `w_ij = s_ij / sum_{k != i} |s_ik|` off the diagonal, zero diagonal.
pub fn normalize_rows(s: &SignedWeightMatrix) -> Result<SignedWeightMatrix> {
    let n = s.n();
    let mut w = SignedWeightMatrix::zeros(n);
    for i in 0..n {
        let denom: f64 = (0..n).filter(|&k| k != i).map(|k| s.get(i, k).abs()).sum();
        if denom == 0.0 {
            return Err(Error::ZeroRow(i));
        }
        for j in (0..n).filter(|&j| j != i) {
            w.set(i, j, s.get(i, j) / denom);
        }
    }
    Ok(w)
}

/// Generate and row-normalize in one step.
pub fn generate_normalized(spec: &MixtureSpec) -> Result<SignedWeightMatrix> {
    normalize_rows(&generate(spec)?)
}

/// Returns `-L`: off-diagonal `w_ij`, diagonal `-sum_{k != i} |w_ik|`.
/// Self-loops of `w` do not enter the continuous dynamics and are ignored.
pub fn build_laplacian(w: &SignedWeightMatrix) -> SignedWeightMatrix {
    let n = w.n();
    let mut neg_l = SignedWeightMatrix::zeros(n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            let v = w.get(i, j);
            neg_l.set(i, j, v);
            diag -= v.abs();
        }
        neg_l.set(i, i, diag);
    }
    neg_l
}
