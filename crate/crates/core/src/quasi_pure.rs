//! Quasi-pure estimate `tau_a` for density matrices with one dominant
//! eigenvalue.
//!
//! Only the second-order elements `A^{pm,11}_{11,11}` of the roof tensor are
//! kept, which gives the r×r matrix
//! `κ_pm = A^{pm,11}_{11,11} / (A^{11,11}_{11,11})^{3/4}` (index 1 being the
//! dominant eigenvector) and `tau_a = max(λ₁ − Σ_{i>1} λ_i, 0)` over the
//! singular values of κ.

use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, C64};
use crate::states::{ghz_prime, w_prime, DensityMatrix, PureState, SpectralDecomposition, RANK_CUTOFF};
use crate::tau_mixed::{index_terms, BracketTable};

/// Below this, `A^{11,11}_{11,11}` is treated as zero and κ is undefined.
pub const KAPPA_DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct KappaMatrix {
    matrix: CMatrix,
    /// Gap between the two largest eigenvalues of ρ.
    pub dominant_gap: f64,
}

impl KappaMatrix {
    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn symmetry_residual(&self) -> f64 {
        numerics::max_abs_diff(&self.matrix, &self.matrix.transpose())
    }
}

pub fn build_kappa(sd: &SpectralDecomposition, n: usize) -> Result<KappaMatrix> {
    let r = sd.rank;
    if r == 0 {
        return Err(Error::InvalidArgument("density matrix has rank zero".into()));
    }
    let gap = sd.dominant_gap();
    if gap < 1e-8 {
        warn!("dominant eigenvalue is not separated (gap {gap:e}); quasi-pure premise violated");
    }
    let table = BracketTable::new(&sd.weighted_vectors(), n);
    let terms = index_terms(n);

    // A^{pm,11}_{11,11} = Σ_t F^t_{p1m1} · conj(F^t_{1111})
    let anchor: Vec<C64> = terms
        .iter()
        .map(|&t| table.generator(t, 0, 0, 0, 0).conj())
        .collect();
    let denominator: f64 = anchor.iter().map(|z| z.norm_sqr()).sum();
    if denominator <= KAPPA_DENOMINATOR_FLOOR {
        return Err(Error::DegenerateKappa(denominator));
    }
    let norm = denominator.powf(0.75);
    let matrix = CMatrix::from_fn(r, r, |p, m| {
        let numerator: C64 = terms
            .iter()
            .zip(&anchor)
            .map(|(&t, a)| table.generator(t, p, 0, m, 0) * a)
            .sum();
        numerator / norm
    });
    Ok(KappaMatrix {
        matrix,
        dominant_gap: gap,
    })
}

/// `max(λ₁ − Σ_{i>1} λ_i, 0)` over the singular values of κ.
pub fn tau_quasi(k: &KappaMatrix) -> Result<f64> {
    tau_from_singulars(&numerics::singular_values(k.matrix())?)
}

fn tau_from_singulars(lambda: &[f64]) -> Result<f64> {
    let Some((first, rest)) = lambda.split_first() else {
        return Ok(0.0);
    };
    Ok((first - rest.iter().sum::<f64>()).max(0.0))
}

pub fn tau_a(rho: &DensityMatrix) -> Result<f64> {
    let sd = rho.eigendecompose(RANK_CUTOFF)?;
    tau_quasi(&build_kappa(&sd, rho.n())?)
}

/// State family of an isotropic-noise sweep `x|ψ⟩⟨ψ| + (1−x)·I/(4n)`.
#[derive(Debug, Clone)]
pub enum SweepState {
    GhzPrime,
    WPrime,
    Custom(PureState),
}

impl SweepState {
    pub fn tag(&self) -> &'static str {
        match self {
            SweepState::GhzPrime => "ghz-prime",
            SweepState::WPrime => "w-prime",
            SweepState::Custom(_) => "custom",
        }
    }

    pub fn state(&self) -> PureState {
        match self {
            SweepState::GhzPrime => ghz_prime(),
            SweepState::WPrime => w_prime(),
            SweepState::Custom(s) => s.clone(),
        }
    }
}

impl std::str::FromStr for SweepState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz-prime" => Ok(SweepState::GhzPrime),
            "w-prime" => Ok(SweepState::WPrime),
            other => Err(Error::InvalidArgument(format!("unknown sweep state '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub x: f64,
    /// `Err` holds the failure message for points where `tau_a` is undefined.
    pub tau_a: std::result::Result<f64, String>,
    pub state_tag: &'static str,
}

/// `steps` uniformly spaced points on `[x_min, x_max]`, endpoints included.
pub fn sweep_grid(x_min: f64, x_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![x_min],
        _ => {
            let last = (steps - 1) as f64;
            (0..steps)
                .map(|k| (x_min * (last - k as f64) + x_max * k as f64) / last)
                .collect()
        }
    }
}

pub fn fig1_sweep(state: &SweepState, x_min: f64, x_max: f64, steps: usize) -> Result<Vec<SweepRecord>> {
    if !(0.0..=1.0).contains(&x_min) || !(0.0..=1.0).contains(&x_max) || x_min > x_max {
        return Err(Error::InvalidArgument(format!(
            "sweep range [{x_min}, {x_max}] must satisfy 0 <= x_min <= x_max <= 1"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one step".into()));
    }
    let psi = state.state();
    let tag = state.tag();
    Ok(sweep_grid(x_min, x_max, steps)
        .into_par_iter()
        .map(|x| {
            let value = DensityMatrix::isotropic_mix(&psi, x)
                .and_then(|rho| tau_a(&rho))
                .map_err(|e| e.to_string());
            SweepRecord {
                x,
                tau_a: value,
                state_tag: tag,
            }
        })
        .collect())
}

/// CSV with header `x,tau_a,state`; failed points are written as `nan`.
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("x,tau_a,state\n");
    for r in records {
        let value = match &r.tau_a {
            Ok(v) => format!("{v:.10}"),
            Err(_) => "nan".to_string(),
        };
        writeln!(out, "{:.10},{value},{}", r.x, r.state_tag).expect("write to String");
    }
    out
}
