//! Fixed benchmark instances, shared by the criterion benches.

use qdopt_core::problem::{maxcut_to_ising, random_graph, random_ising};
use qdopt_core::{synthetic_oracle, IsingProblem, OracleKind, PropertyDataset};

/// Complete graph on `n` vertices with `±1` weights, as an Ising problem.
pub fn signed_maxcut(n: usize, seed: u64) -> IsingProblem {
    maxcut_to_ising(&random_graph(n, 1.0, true, seed), n).expect("n > 0")
}

/// Dense `J_ij ~ Uniform(-1, 1)`.
pub fn dense_ising(n: usize, seed: u64) -> IsingProblem {
    random_ising(n, 1.0, seed).expect("n > 0")
}

/// Rows labelled by the rank-4 quadratic oracle.
pub fn quadratic_dataset(n: usize, rows: usize, seed: u64) -> PropertyDataset {
    synthetic_oracle(OracleKind::Quadratic, n, seed)
        .and_then(|o| o.dataset(rows, seed))
        .expect("valid oracle")
}
