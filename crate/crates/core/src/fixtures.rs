//! Small reference networks used by examples, tests and the CLI.

use crate::matrix::SignedWeightMatrix;

/// Five agents without self-loops, mixing trust and mistrust.
pub fn w_tm() -> SignedWeightMatrix {
    SignedWeightMatrix::from_rows(vec![
        vec![0.0, 0.3, 0.0, 0.0, -0.7],
        vec![-0.5, 0.0, 0.0, 0.5, 0.0],
        vec![-0.5, -0.3, 0.0, 0.2, 0.0],
        vec![0.0, -0.5, 0.0, 0.0, -0.5],
        vec![-0.5, 0.0, 0.0, -0.5, 0.0],
    ])
    .expect("static matrix is valid")
}

/// Trust-only counterpart `|W_tm|`.
pub fn w_t() -> SignedWeightMatrix {
    w_tm().abs()
}

/// Mistrust-only counterpart `-|W_tm|`.
pub fn w_m() -> SignedWeightMatrix {
    w_tm().map(|v| -v.abs())
}

pub fn example_x0() -> Vec<f64> {
    vec![-0.5, -0.25, 0.0, 1.0 / 3.0, 0.5]
}

/// Four agents: a closed, structurally unbalanced pair {0, 1} (node 0 with
/// a self-loop) feeding an open pair {2, 3}.
pub fn layered_example() -> SignedWeightMatrix {
    SignedWeightMatrix::from_rows(vec![
        vec![0.2, -0.8, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.5, 0.0, -0.5],
        vec![-0.4, 0.0, 0.6, 0.0],
    ])
    .expect("static matrix is valid")
}
