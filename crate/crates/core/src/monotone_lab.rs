//! Monte-Carlo checks of the semi-monotone properties of `tau`: two-outcome
//! POVMs on the qubit parties never increase its average, and local
//! unitaries on any party leave it unchanged. Batch versions of the zero-set,
//! three-qubit reduction and path-equivalence checks live here too.

use std::fmt;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{self, c, CMatrix, CVector};
use crate::states::{random_pure_from, random_vector, semiseparable_a_bc, semiseparable_ab_c, w_222, PureState};
use crate::tau_pure::{tau, tau_expanded, three_tangle};

/// Outcomes with smaller probability carry no post-measurement state.
pub const ZERO_PROBABILITY: f64 = 1e-14;
/// Slack on `⟨tau⟩ ≤ tau` before a trial counts as a violation.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    A,
    B,
    C,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        })
    }
}

/// Two-outcome POVM `A₁ = U₁ diag(a, b) V`, `A₂ = U₂ diag(√(1−a²), √(1−b²)) V`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmPair {
    pub a: f64,
    pub b: f64,
    pub u1: CMatrix,
    pub u2: CMatrix,
    pub v: CMatrix,
}

impl PovmPair {
    pub fn new(a: f64, b: f64, u1: CMatrix, u2: CMatrix, v: CMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!("POVM diagonal ({a}, {b}) outside [0, 1]")));
        }
        for m in [&u1, &u2, &v] {
            if m.shape() != (2, 2) || numerics::unitarity_residual(m) > numerics::tol::NUMERICAL {
                return Err(Error::InvalidArgument("POVM factors must be 2x2 unitaries".into()));
            }
        }
        Ok(Self { a, b, u1, u2, v })
    }

    /// The diagonal POVM `diag(a, b)`, `diag(√(1−a²), √(1−b²))`.
    pub fn diagonal(a: f64, b: f64) -> Result<Self> {
        let id = CMatrix::identity(2, 2);
        Self::new(a, b, id.clone(), id.clone(), id)
    }

    pub fn elements(&self) -> (CMatrix, CMatrix) {
        let d1 = diag(&[self.a, self.b]);
        let d2 = diag(&[(1.0 - self.a * self.a).sqrt(), (1.0 - self.b * self.b).sqrt()]);
        (&self.u1 * d1 * &self.v, &self.u2 * d2 * &self.v)
    }

    /// `‖A₁†A₁ + A₂†A₂ − I‖` entrywise maximum.
    pub fn completeness_residual(&self) -> f64 {
        let (a1, a2) = self.elements();
        let sum = a1.adjoint() * &a1 + a2.adjoint() * &a2;
        numerics::max_abs_diff(&sum, &CMatrix::identity(2, 2))
    }
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0))))
}

pub fn random_povm_from<R: Rng + ?Sized>(rng: &mut R) -> PovmPair {
    let a = rng.random::<f64>();
    let b = rng.random::<f64>();
    let u1 = numerics::haar_unitary_from(2, rng);
    let u2 = numerics::haar_unitary_from(2, rng);
    let v = numerics::haar_unitary_from(2, rng);
    PovmPair { a, b, u1, u2, v }
}

pub fn random_povm(seed: u64) -> PovmPair {
    random_povm_from(&mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone)]
pub struct PovmOutcome {
    pub probability: f64,
    /// `None` when the probability is below [`ZERO_PROBABILITY`].
    pub post_state: Option<PureState>,
}

/// Applies `op` to one party of `s` and renormalizes.
pub fn apply_local(s: &PureState, party: Party, op: &CMatrix) -> Result<PovmOutcome> {
    let n = s.n();
    let expected = match party {
        Party::A | Party::B => 2,
        Party::C => n,
    };
    if op.shape() != (expected, expected) {
        return Err(Error::Shape(format!(
            "party {party} operator must be {expected}x{expected}, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let v = s.vector();
    let mut out = CVector::zeros(v.len());
    // Flat index (2i + j)·n + k.
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..n {
                let dst = (2 * i + j) * n + k;
                out[dst] = match party {
                    Party::A => (0..2).map(|x| op[(i, x)] * v[(2 * x + j) * n + k]).sum(),
                    Party::B => (0..2).map(|x| op[(j, x)] * v[(2 * i + x) * n + k]).sum(),
                    Party::C => (0..n).map(|x| op[(k, x)] * v[(2 * i + j) * n + x]).sum(),
                };
            }
        }
    }
    let probability = out.norm_squared();
    let post_state = if probability < ZERO_PROBABILITY {
        None
    } else {
        Some(PureState::from_unnormalized(n, out)?)
    };
    Ok(PovmOutcome {
        probability,
        post_state,
    })
}

fn branch_tau(outcome: &PovmOutcome) -> Result<f64> {
    match &outcome.post_state {
        Some(s) => Ok(outcome.probability * tau(s)?),
        None => Ok(0.0),
    }
}

/// `(p₁ tau(ψ₁') + p₂ tau(ψ₂'), tau(ψ))` for a POVM on qubit party A or B.
pub fn average_tau(s: &PureState, povm: &PovmPair, party: Party) -> Result<(f64, f64)> {
    if party == Party::C {
        return Err(Error::InvalidArgument(
            "monotonicity is only guaranteed for POVMs on the qubit parties".into(),
        ));
    }
    let (a1, a2) = povm.elements();
    let avg = branch_tau(&apply_local(s, party, &a1)?)? + branch_tau(&apply_local(s, party, &a2)?)?;
    Ok((avg, tau(s)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub party: Party,
    pub tau_before: f64,
    pub tau_after_avg: f64,
    /// `tau_after_avg − tau_before`.
    pub excess: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MonotonicityReport {
    pub records: Vec<TrialRecord>,
    pub violations: usize,
    /// Largest `excess` over all trials (`−∞` when there are none).
    pub worst_excess: f64,
}

impl MonotonicityReport {
    fn from_records(records: Vec<TrialRecord>) -> Self {
        let violations = records.iter().filter(|r| r.excess > VIOLATION_TOLERANCE).count();
        let worst_excess = records.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max);
        Self {
            records,
            violations,
            worst_excess,
        }
    }

    /// `trial,party,tau_before,tau_after_avg,excess`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,party,tau_before,tau_after_avg,excess\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{},{:.10},{:.10},{:.3e}",
                r.trial, r.party, r.tau_before, r.tau_after_avg, r.excess
            )
            .expect("write to String");
        }
        out
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

/// Random state, random two-outcome POVM on a random qubit party, per trial.
pub fn check_monotonicity(n: usize, trials: usize, seed: u64) -> Result<MonotonicityReport> {
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let s = random_pure_from(n, &mut rng);
            let povm = random_povm_from(&mut rng);
            let party = if rng.random::<bool>() { Party::A } else { Party::B };
            let (avg, before) = average_tau(&s, &povm, party)?;
            Ok(TrialRecord {
                trial,
                party,
                tau_before: before,
                tau_after_avg: avg,
                excess: avg - before,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonotonicityReport::from_records(records))
}

/// Same as [`check_monotonicity`] but with an n-outcome-space POVM
/// `U_i diag(d_i) V` on party C. Increases are recorded, not asserted.
pub fn survey_party_c(n: usize, trials: usize, seed: u64) -> Result<MonotonicityReport> {
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let s = random_pure_from(n, &mut rng);
            let d: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let d2: Vec<f64> = d.iter().map(|x| (1.0 - x * x).sqrt()).collect();
            let v = numerics::haar_unitary_from(n, &mut rng);
            let a1 = numerics::haar_unitary_from(n, &mut rng) * diag(&d) * &v;
            let a2 = numerics::haar_unitary_from(n, &mut rng) * diag(&d2) * &v;
            let avg = branch_tau(&apply_local(&s, Party::C, &a1)?)?
                + branch_tau(&apply_local(&s, Party::C, &a2)?)?;
            let before = tau(&s)?;
            Ok(TrialRecord {
                trial,
                party: Party::C,
                tau_before: before,
                tau_after_avg: avg,
                excess: avg - before,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonotonicityReport::from_records(records))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuReport {
    pub trials: usize,
    pub max_deviation: f64,
}

fn apply_unitary(s: &PureState, party: Party, u: &CMatrix) -> Result<PureState> {
    apply_local(s, party, u)?
        .post_state
        .ok_or_else(|| Error::InvalidArgument("unitary annihilated the state".into()))
}

/// Independent Haar unitaries on A, B and C, per trial.
pub fn check_lu_invariance(n: usize, trials: usize, seed: u64) -> Result<LuReport> {
    let deviations = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let s = random_pure_from(n, &mut rng);
            let ua = numerics::haar_unitary_from(2, &mut rng);
            let ub = numerics::haar_unitary_from(2, &mut rng);
            let uc = numerics::haar_unitary_from(n, &mut rng);
            let after = apply_unitary(&s, Party::A, &ua)?;
            let after = apply_unitary(&after, Party::B, &ub)?;
            let after = apply_unitary(&after, Party::C, &uc)?;
            Ok((tau(&s)? - tau(&after)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LuReport {
        trials,
        max_deviation: deviations.into_iter().fold(0.0, f64::max),
    })
}

/// Largest `|tau² − three_tangle/2|` over Haar-random three-qubit states.
pub fn check_reduction(trials: usize, seed: u64) -> Result<f64> {
    let deviations = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = random_pure_from(2, &mut trial_rng(seed, trial));
            Ok((tau(&s)?.powi(2) - three_tangle(&s)? / 2.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviations.into_iter().fold(0.0, f64::max))
}

/// Largest `|tau − tau_expanded|` over random states with `n` cycling
/// through `n_range`.
pub fn check_path_equivalence(trials: usize, seed: u64, n_range: RangeInclusive<usize>) -> Result<f64> {
    let ns: Vec<usize> = n_range.collect();
    if ns.is_empty() {
        return Err(Error::InvalidArgument("empty range of party-C dimensions".into()));
    }
    let deviations = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = random_pure_from(ns[trial % ns.len()], &mut trial_rng(seed, trial));
            Ok((tau(&s)? - tau_expanded(&s)).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviations.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSetReport {
    /// `tau` of the low-local-rank W state.
    pub w_222: f64,
    /// Largest `tau` over `|φ_AB⟩|χ_C⟩` states.
    pub max_ab_c: f64,
    /// Largest `tau` over `|χ_A⟩|φ_BC⟩` states.
    pub max_a_bc: f64,
}

impl ZeroSetReport {
    pub fn max(&self) -> f64 {
        self.w_222.max(self.max_ab_c).max(self.max_a_bc)
    }
}

/// `trials` random semiseparable states of each form for every `n` in
/// `n_range`, plus the (2,2,2) W state.
pub fn check_zero_set(trials: usize, seed: u64, n_range: RangeInclusive<usize>) -> Result<ZeroSetReport> {
    let ns: Vec<usize> = n_range.collect();
    let pairs = (0..ns.len() * trials)
        .into_par_iter()
        .map(|idx| {
            let n = ns[idx / trials];
            let mut rng = trial_rng(seed, idx);
            let phi = random_vector(4, &mut rng);
            let chi = random_vector(n, &mut rng);
            let ab_c = semiseparable_ab_c(&[phi[0], phi[1], phi[2], phi[3]], chi.as_slice())?;
            let chi_a = random_vector(2, &mut rng);
            let phi_bc = random_vector(2 * n, &mut rng);
            let a_bc = semiseparable_a_bc(&[chi_a[0], chi_a[1]], phi_bc.as_slice())?;
            Ok((tau(&ab_c)?, tau(&a_bc)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    Ok(ZeroSetReport {
        w_222: tau(&w_222())?,
        max_ab_c: pairs.iter().map(|p| p.0).fold(0.0, f64::max),
        max_a_bc: pairs.iter().map(|p| p.1).fold(0.0, f64::max),
    })
}
