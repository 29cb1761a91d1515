//! Convex-roof upper bound for mixed states.
//!
//! Every pure-state decomposition of `ρ = Σ_p u_p |γ_p⟩⟨γ_p|` has members
//! `|ψ_i⟩ = Σ_p U_pi √u_p |γ_p⟩` for a right-unitary `U ∈ C^{r×N}`, and
//! `p_i·tau(ψ_i/‖ψ_i‖)` is a degree-8 form in column `i` of `U`. Its
//! coefficients make up the tensor `A`, stored in the eigenbasis:
//!
//! ```text
//! A^{pm,nq}_{p'm',n'q'} = Σ_t F^t_{pp'mm'} · conj(F^t_{nn'qq'})
//! F^t_{pp'mm'}        = G_ij[p,p'] G_lk[m,m'] − G_ik[p,p'] G_lj[m,m']
//! G_ij[p,p']          = ⟨w_p*| σ_y⊗σ_y⊗e_ij |w_p'⟩,   w_p = √u_p |γ_p⟩
//! ```
//!
//! with `t = (i, j, l, k)` ranging over party-C indices with `i ≠ l`,
//! `j ≠ k`. Two Kronecker factorizations (`A = Σ_j B_j ⊗ B_j*`, then
//! `B_j = Σ_m L_jm ⊗ R_jm`) turn the objective into
//!
//! ```text
//! Σ_i ( Σ_j | Σ_m (uᵢᵀ L_jm uᵢ)(uᵢᵀ R_jm uᵢ) |² )^{1/4}
//! ```
//!
//! which is minimized over `U` by multi-start Nelder–Mead.

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{self, c, CMatrix, CVector, C64};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::states::{DensityMatrix, SpectralDecomposition, RANK_CUTOFF};
use crate::tau_pure::{fiber_of, i_concurrence_of_vector, tilde_inner};

/// Largest rank for which the full `r⁸` tensor is built.
pub const MAX_TENSOR_RANK: usize = 6;

/// Party-C index quadruples `(i, j, l, k)` with `i ≠ l` and `j ≠ k`.
pub(crate) fn index_terms(n: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::with_capacity(n * n * n.saturating_sub(1).pow(2));
    for i in 0..n {
        for l in (0..n).filter(|&l| l != i) {
            for j in 0..n {
                for k in (0..n).filter(|&k| k != j) {
                    out.push((i, j, l, k));
                }
            }
        }
    }
    out
}

/// `G_ij[p,p']` for all party-C pairs and eigenvector pairs.
pub(crate) struct BracketTable {
    n: usize,
    r: usize,
    data: Vec<C64>,
}

impl BracketTable {
    pub(crate) fn new(weighted: &[CVector], n: usize) -> Self {
        let r = weighted.len();
        let fibers: Vec<Vec<[C64; 4]>> = weighted
            .iter()
            .map(|w| (0..n).map(|k| fiber_of(w, n, k)).collect())
            .collect();
        let mut data = vec![c(0.0, 0.0); n * n * r * r];
        for i in 0..n {
            for j in 0..n {
                for p in 0..r {
                    for pp in 0..r {
                        data[((i * n + j) * r + p) * r + pp] =
                            tilde_inner(&fibers[p][i], &fibers[pp][j]);
                    }
                }
            }
        }
        Self { n, r, data }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize, p: usize, pp: usize) -> C64 {
        self.data[((i * self.n + j) * self.r + p) * self.r + pp]
    }

    /// `F^t_{pp'mm'}`.
    #[inline]
    pub(crate) fn generator(
        &self,
        (i, j, l, k): (usize, usize, usize, usize),
        p: usize,
        pp: usize,
        m: usize,
        mm: usize,
    ) -> C64 {
        self.get(i, j, p, pp) * self.get(l, k, m, mm) - self.get(i, k, p, pp) * self.get(l, j, m, mm)
    }
}

/// The degree-8 coefficient tensor in the eigenbasis of `ρ`.
///
/// `entries` is an `r⁴ × r⁴` matrix with row `((p·r+m)·r+p')·r+m'` and column
/// `((n·r+q)·r+n')·r+q'`; in that layout it is Hermitian positive
/// semidefinite and equals `generators · generators†`.
#[derive(Debug, Clone)]
pub struct ATensor {
    r: usize,
    entries: CMatrix,
    generators: CMatrix,
}

#[inline]
fn slot(r: usize, p: usize, m: usize, pp: usize, mm: usize) -> usize {
    ((p * r + m) * r + pp) * r + mm
}

impl ATensor {
    pub fn rank(&self) -> usize {
        self.r
    }

    /// `A^{pm,nq}_{p'm',n'q'}`.
    #[allow(clippy::too_many_arguments)]
    pub fn get(
        &self,
        p: usize,
        m: usize,
        n: usize,
        q: usize,
        pp: usize,
        mm: usize,
        nn: usize,
        qq: usize,
    ) -> C64 {
        let r = self.r;
        self.entries[(slot(r, p, m, pp, mm), slot(r, n, q, nn, qq))]
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Columns `F^t` (one per party-C index quadruple).
    pub fn generators(&self) -> &CMatrix {
        &self.generators
    }

    /// Residual of `A^{pm,nq}_{p'm',n'q'} = conj(A^{nq,pm}_{n'q',p'm'})`:
    /// exchanging the two doubled slots conjugates the tensor.
    pub fn exchange_residual(&self) -> f64 {
        numerics::hermiticity_residual(&self.entries)
    }

    /// Residual of `A^{pm,nq}_{p'm',n'q'} = A^{mp,qn}_{m'p',q'n'}`.
    pub fn pair_swap_residual(&self) -> f64 {
        let r = self.r;
        let mut worst: f64 = 0.0;
        for row in 0..self.entries.nrows() {
            let (p, m, pp, mm) = unslot(r, row);
            for col in 0..self.entries.ncols() {
                let (n, q, nn, qq) = unslot(r, col);
                let swapped = self.entries[(slot(r, m, p, mm, pp), slot(r, q, n, qq, nn))];
                worst = worst.max((self.entries[(row, col)] - swapped).norm());
            }
        }
        worst
    }
}

#[inline]
fn unslot(r: usize, idx: usize) -> (usize, usize, usize, usize) {
    (idx / (r * r * r), (idx / (r * r)) % r, (idx / r) % r, idx % r)
}

pub fn build_a_tensor(sd: &SpectralDecomposition, n: usize) -> Result<ATensor> {
    let r = sd.rank;
    if r > MAX_TENSOR_RANK {
        return Err(Error::RankTooLarge {
            rank: r,
            max: MAX_TENSOR_RANK,
        });
    }
    if r == 0 {
        return Err(Error::InvalidArgument("density matrix has rank zero".into()));
    }
    let weighted = sd.weighted_vectors();
    if weighted[0].len() != 4 * n {
        return Err(Error::Shape(format!(
            "eigenvectors have length {}, expected {}",
            weighted[0].len(),
            4 * n
        )));
    }
    let table = BracketTable::new(&weighted, n);
    let terms = index_terms(n);
    let r4 = r.pow(4);
    let mut generators = CMatrix::zeros(r4, terms.len());
    for (t, &term) in terms.iter().enumerate() {
        for p in 0..r {
            for m in 0..r {
                for pp in 0..r {
                    for mm in 0..r {
                        generators[(slot(r, p, m, pp, mm), t)] = table.generator(term, p, pp, m, mm);
                    }
                }
            }
        }
    }
    let entries = &generators * generators.adjoint();
    Ok(ATensor {
        r,
        entries,
        generators,
    })
}

/// One term `B_j = scale · Σ_m L_m ⊗ R_m` of `A = Σ_j B_j ⊗ B_j*`, where
/// `B_j` is indexed `[(p·r+m), (p'·r+m')]`.
#[derive(Debug, Clone)]
pub struct RoofTerm {
    pub scale: f64,
    pub pairs: Vec<(CMatrix, CMatrix)>,
}

impl RoofTerm {
    /// `(u⊗u)ᵀ B_j (u⊗u)`.
    fn contract(&self, u: &[C64]) -> C64 {
        let quad = |m: &CMatrix| -> C64 {
            let mut acc = c(0.0, 0.0);
            for (a, ua) in u.iter().enumerate() {
                let mut row = c(0.0, 0.0);
                for (b, ub) in u.iter().enumerate() {
                    row += m[(a, b)] * ub;
                }
                acc += ua * row;
            }
            acc
        };
        let sum: C64 = self.pairs.iter().map(|(l, r)| quad(l) * quad(r)).sum();
        sum * self.scale
    }

    fn flattened(&self, r: usize) -> CVector {
        let mut b = CVector::zeros(r.pow(4));
        for (l, rr) in &self.pairs {
            for p in 0..r {
                for m in 0..r {
                    for pp in 0..r {
                        for mm in 0..r {
                            b[slot(r, p, m, pp, mm)] += l[(p, pp)] * rr[(m, mm)];
                        }
                    }
                }
            }
        }
        b * c(self.scale, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct KroneckerFactors {
    r: usize,
    pub terms: Vec<RoofTerm>,
}

impl KroneckerFactors {
    pub fn rank(&self) -> usize {
        self.r
    }

    /// `Σ_j vec(B_j) vec(B_j)†` in the [`ATensor::entries`] layout.
    pub fn reassemble(&self) -> CMatrix {
        let dim = self.r.pow(4);
        let mut out = CMatrix::zeros(dim, dim);
        for term in &self.terms {
            let b = term.flattened(self.r);
            out += &b * b.adjoint();
        }
        out
    }

    /// `p·tau` of the (unnormalized) member selected by coefficient vector `u`.
    pub fn member_value(&self, u: &[C64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.contract(u).norm_sqr())
            .sum::<f64>()
            .powf(0.25)
    }
}

/// Splits `A` into `Σ_j B_j ⊗ B_j*` and each `B_j` into `Σ_m L ⊗ R`.
pub fn factor_a(a: &ATensor) -> Result<KroneckerFactors> {
    let r = a.rank();
    let scale = a.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = a.exchange_residual();
    if residual > 1e-6 * scale {
        return Err(Error::BrokenSymmetry(residual));
    }
    // The rearranged A is generators·generators†, so its leading singular
    // vectors come from the (much thinner) generator matrix.
    let decomposition = numerics::svd(&a.generators)?;
    let largest = decomposition.singulars.first().copied().unwrap_or(0.0);
    let cutoff = largest * 1e-14;
    let r2 = r * r;
    let mut terms = Vec::new();
    for (j, &s) in decomposition.singulars.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            break;
        }
        let b = CMatrix::from_fn(r2, r2, |row, col| {
            let (p, m) = (row / r, row % r);
            let (pp, mm) = (col / r, col % r);
            decomposition.left[(slot(r, p, m, pp, mm), j)]
        });
        let pairs = numerics::nearest_kronecker_sum(&b, (r, r), r2)?;
        terms.push(RoofTerm { scale: s, pairs });
    }
    Ok(KroneckerFactors { r, terms })
}

fn hermitian_from_params(dim: usize, params: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = c(params[i], 0.0);
    }
    let mut idx = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let z = c(params[idx], params[idx + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            idx += 2;
        }
    }
    h
}

/// First `r` rows of `base · exp(i·H(params))`, with `H` Hermitian and
/// parameterized by `N²` reals (diagonal, then real/imaginary parts of the
/// strict upper triangle).
fn right_unitary_with_base(r: usize, base: &CMatrix, params: &[f64]) -> Result<CMatrix> {
    let n_cols = base.nrows();
    let rotation = numerics::exp_i_hermitian(&hermitian_from_params(n_cols, params))?;
    Ok((base * rotation).rows(0, r).into_owned())
}

pub fn right_unitary_from_params(r: usize, n_cols: usize, params: &[f64]) -> Result<CMatrix> {
    if n_cols < r {
        return Err(Error::InvalidArgument(format!(
            "ensemble size {n_cols} is smaller than the rank {r}"
        )));
    }
    if params.len() != n_cols * n_cols {
        return Err(Error::Shape(format!(
            "expected {} chart parameters, got {}",
            n_cols * n_cols,
            params.len()
        )));
    }
    right_unitary_with_base(r, &CMatrix::identity(n_cols, n_cols), params)
}

/// `‖U U† − I_r‖` entrywise maximum.
pub fn right_unitarity_residual(u: &CMatrix) -> f64 {
    numerics::max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(u.nrows(), u.nrows()))
}

/// Roof objective over the columns of `u` (r × N).
pub fn roof_objective(factors: &KroneckerFactors, u: &CMatrix) -> f64 {
    (0..u.ncols())
        .map(|i| {
            let col: Vec<C64> = u.column(i).iter().copied().collect();
            factors.member_value(&col)
        })
        .sum()
}

/// `(p_i, tau_i)` of the decomposition `|ψ_i⟩ = Σ_p U_pi w_p`, evaluated
/// directly from each member's fibers.
pub fn ensemble_members(weighted: &[CVector], n: usize, u: &CMatrix) -> Result<Vec<(f64, f64)>> {
    let dim = weighted.first().map_or(0, |w| w.len());
    (0..u.ncols())
        .map(|i| {
            let mut psi = CVector::zeros(dim);
            for (p, w) in weighted.iter().enumerate() {
                psi.axpy(u[(p, i)], w, c(1.0, 0.0));
            }
            let prob = psi.norm_squared();
            // tau is homogeneous of degree 2, so the unnormalized member gives p·tau.
            let weighted_tau = i_concurrence_of_vector(&psi, n).sqrt();
            let tau = if prob > 1e-300 { weighted_tau / prob } else { 0.0 };
            Ok((prob, tau))
        })
        .collect()
}

fn ensemble_total(members: &[(f64, f64)]) -> f64 {
    members.iter().map(|(p, t)| p * t).sum()
}

/// `Σ_α u_α tau(γ_α)` over the retained eigenvectors.
pub fn eigen_ensemble_value(sd: &SpectralDecomposition, n: usize) -> Result<f64> {
    let weighted = sd.weighted_vectors();
    let identity = CMatrix::identity(weighted.len(), weighted.len());
    Ok(ensemble_total(&ensemble_members(&weighted, n, &identity)?))
}

#[derive(Debug, Clone)]
pub struct RoofOptions {
    /// Number of ensemble members `N`; defaults to `2r`.
    pub ensemble_size: Option<usize>,
    /// Random restarts on top of the run started at the eigen-ensemble.
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations per run.
    pub max_evaluations: usize,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 4,
            seed: 0,
            max_evaluations: 4_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    pub upper_bound: f64,
    pub ensemble_size: usize,
    pub rank: usize,
    /// Right-unitary `r × N` matrix of the best decomposition found.
    pub unitary: CMatrix,
    /// `(p_i, tau_i)` per member.
    pub per_member: Vec<(f64, f64)>,
    /// Value of the eigen-ensemble, i.e. `U = [I 0]`.
    pub eigen_ensemble: f64,
    pub evaluations: usize,
    /// False when any run stopped on the evaluation budget or hit a
    /// non-finite objective.
    pub converged: bool,
}

struct RunOutcome {
    value: f64,
    unitary: CMatrix,
    members: Vec<(f64, f64)>,
    evaluations: usize,
    converged: bool,
}

pub fn minimize_roof(
    rho: &DensityMatrix,
    ensemble_size: usize,
    restarts: usize,
    seed: u64,
) -> Result<RoofResult> {
    minimize_roof_with(
        rho,
        &RoofOptions {
            ensemble_size: Some(ensemble_size),
            restarts,
            seed,
            ..Default::default()
        },
    )
}

pub fn minimize_roof_with(rho: &DensityMatrix, opts: &RoofOptions) -> Result<RoofResult> {
    let n = rho.n();
    let sd = rho.eigendecompose(RANK_CUTOFF)?;
    let r = sd.rank;
    if r > MAX_TENSOR_RANK {
        return Err(Error::RankTooLarge {
            rank: r,
            max: MAX_TENSOR_RANK,
        });
    }
    let n_cols = opts.ensemble_size.unwrap_or(2 * r);
    let ceiling = (r * r).max(2 * r);
    if n_cols < r || n_cols > ceiling {
        return Err(Error::InvalidArgument(format!(
            "ensemble size {n_cols} outside [{r}, {ceiling}] for rank {r}"
        )));
    }

    let factors = factor_a(&build_a_tensor(&sd, n)?)?;
    let weighted = sd.weighted_vectors();
    let eigen_ensemble = eigen_ensemble_value(&sd, n)?;

    let nm = NelderMeadOptions {
        max_evaluations: opts.max_evaluations,
        ..Default::default()
    };
    let runs: Vec<Result<RunOutcome>> = (0..=opts.restarts)
        .into_par_iter()
        .map(|k| {
            let base = if k == 0 {
                CMatrix::identity(n_cols, n_cols)
            } else {
                numerics::haar_unitary(n_cols, opts.seed.wrapping_add(k as u64))
            };
            let start = vec![0.0; n_cols * n_cols];
            let outcome = nelder_mead(
                |params| match right_unitary_with_base(r, &base, params) {
                    Ok(u) => roof_objective(&factors, &u),
                    Err(_) => f64::NAN,
                },
                &start,
                &nm,
            );
            // Re-evaluate both endpoints on the direct path and keep the better one.
            let mut best: Option<RunOutcome> = None;
            for params in [&start, &outcome.x] {
                let unitary = right_unitary_with_base(r, &base, params)?;
                let members = ensemble_members(&weighted, n, &unitary)?;
                let value = ensemble_total(&members);
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(RunOutcome {
                        value,
                        unitary,
                        members,
                        evaluations: outcome.evaluations,
                        converged: outcome.converged && outcome.f.is_finite(),
                    });
                }
            }
            debug!("roof run {k}: {:.12} ({} evaluations)", outcome.f, outcome.evaluations);
            Ok(best.expect("two candidates"))
        })
        .collect();

    let mut evaluations = 0;
    let mut converged = true;
    let mut best: Option<RunOutcome> = None;
    for run in runs {
        let run = run?;
        evaluations += run.evaluations;
        converged &= run.converged;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one run");
    Ok(RoofResult {
        upper_bound: best.value,
        ensemble_size: n_cols,
        rank: r,
        unitary: best.unitary,
        per_member: best.members,
        eigen_ensemble,
        evaluations,
        converged,
    })
}
