//! Genuine tripartite entanglement of (2×2×n)-dimensional quantum states.
//!
//! The pure-state measure `tau` is built from the matrix of spin-flip
//! ("tilde") inner products between the two-qubit fibers of a state. Mixed
//! states are handled by a convex-roof upper bound ([`tau_mixed`]) and by the
//! quasi-pure analytic estimate ([`quasi_pure`]). [`monotone_lab`] checks the
//! structural properties of the measure by Monte-Carlo.

pub mod error;
pub mod monotone_lab;
pub mod numerics;
pub mod quasi_pure;
pub mod states;
pub mod tau_mixed;
pub mod tau_pure;

mod optim;

pub use error::{Error, Result};
pub use numerics::{c, CMatrix, CVector, SvdResult, C64};
pub use quasi_pure::{fig1_sweep, tau_a, KappaMatrix, SweepRecord, SweepState};
pub use states::{DensityMatrix, PureState, SpectralDecomposition};
pub use tau_mixed::{minimize_roof, ATensor, RoofOptions, RoofResult};
pub use tau_pure::{tau, tau_expanded, three_tangle, TildeGram};
