//! Inputs shared by the criterion benches.

use tangle_core::states::{ghz_prime, random_pure};
use tangle_core::{DensityMatrix, PureState};

/// Random pure states with party-C dimension `n`.
pub fn random_states(n: usize, count: usize) -> Vec<PureState> {
    (0..count as u64).map(|seed| random_pure(n, seed)).collect()
}

/// `x|GHZ′⟩⟨GHZ′|` plus noise on `rank − 1` basis states outside its support.
pub fn noisy_ghz_prime(x: f64, rank: usize) -> DensityMatrix {
    let off_support = [(0, 0, 1), (0, 0, 2), (0, 1, 0), (0, 1, 2), (1, 0, 0)];
    assert!((1..=off_support.len() + 1).contains(&rank));
    let mut members = vec![(if rank == 1 { 1.0 } else { x }, ghz_prime())];
    for &(i, j, k) in &off_support[..rank - 1] {
        let state = PureState::basis(i, j, k, 3).expect("basis state");
        members.push(((1.0 - x) / (rank - 1) as f64, state));
    }
    DensityMatrix::mixture(&members).expect("valid mixture")
}
