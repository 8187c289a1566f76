//! Randomized checks of the structural correspondence between a signed
//! network and its delay-augmented multilayer network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::augment_weights;
use crate::error::Result;
use crate::graph::{compressed_arcs, is_structurally_balanced, scc_decompose, Partition};
use crate::matrix::SignedWeightMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub n: usize,
    pub tau_d: usize,
    /// Off-diagonal arcs of the layer-compressed augmented graph equal the
    /// arcs of `w`.
    pub arc_correspondence: bool,
    pub closed_components_w: usize,
    pub closed_components_a: usize,
    pub balanced_w: bool,
    pub balanced_a: bool,
}

impl LemmaCheck {
    pub fn cscc_count_equal(&self) -> bool {
        self.closed_components_w == self.closed_components_a
    }

    pub fn balance_equivalent(&self) -> bool {
        self.balanced_w == self.balanced_a
    }

    pub fn passed(&self) -> bool {
        self.arc_correspondence && self.cscc_count_equal() && self.balance_equivalent()
    }
}

pub fn check_lemmas(w: &SignedWeightMatrix, tau_d: usize) -> Result<LemmaCheck> {
    let n = w.n();
    let a = augment_weights(w, tau_d);
    let compressed = compressed_arcs(&a, &Partition::layers(n, tau_d))?;
    let arc_correspondence = (0..n).all(|i| {
        (0..n)
            .filter(|&j| j != i)
            .all(|j| (compressed.get(i, j) != 0.0) == (w.get(i, j) != 0.0))
    });
    Ok(LemmaCheck {
        n,
        tau_d,
        arc_correspondence,
        closed_components_w: scc_decompose(w).closed_count(),
        closed_components_a: scc_decompose(&a).closed_count(),
        balanced_w: is_structurally_balanced(w).balanced,
        balanced_a: is_structurally_balanced(&a).balanced,
    })
}

/// A random signed digraph: each off-diagonal arc present with probability
/// `density`, self-loops with probability `density / 2`, random sign and
/// magnitude in `[0.1, 1)`.
pub fn random_signed_graph<R: Rng>(n: usize, density: f64, rng: &mut R) -> SignedWeightMatrix {
    let mut w = SignedWeightMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let p = if i == j { 0.5 * density } else { density };
            if rng.random_bool(p) {
                let v = rng.random_range(0.1..1.0);
                w.set(i, j, if rng.random_bool(0.5) { v } else { -v });
            }
        }
    }
    w
}

/// `trials` random graphs with `n` drawn from `1..=max_n`, `τ` from
/// `0..=max_tau_d` and arc density from `[0.1, 0.6)`; trial `k` uses a
/// generator seeded from `(seed, k)` so results do not depend on order.
pub fn verify_lemmas(
    max_n: usize,
    max_tau_d: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<LemmaCheck>> {
    (0..trials)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = rng.random_range(1..=max_n.max(1));
            let tau_d = rng.random_range(0..=max_tau_d);
            let density = rng.random_range(0.1..0.6);
            check_lemmas(&random_signed_graph(n, density, &mut rng), tau_d)
        })
        .collect()
}
