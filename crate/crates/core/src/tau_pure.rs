//! The pure-state semi-monotone `tau`.
//!
//! For `|ψ⟩ = Σ_k |φ_k⟩|k⟩` the n×n matrix `M_kl = ⟨φ_k*|σ_y⊗σ_y|φ_l⟩` of
//! tilde inner products is read as an unnormalized bipartite state and its
//! I-concurrence `C_I(M)` gives `tau = C_I(M)^{1/2}`. `M` is never
//! normalized: its scale carries the fiber probabilities.

use crate::error::{Error, Result};
use crate::numerics::{self, c, CMatrix, CVector, C64};
use crate::states::{flat_index, PureState};

/// `σ_y ⊗ σ_y` applied to a two-qubit vector; the operator is real and
/// maps `|00⟩ → −|11⟩`, `|01⟩ → |10⟩`, `|10⟩ → |01⟩`, `|11⟩ → −|00⟩`.
#[inline]
pub fn spin_flip(v: &[C64; 4]) -> [C64; 4] {
    [-v[3], v[2], v[1], -v[0]]
}

/// `⟨x*|σ_y⊗σ_y|y⟩` (bilinear, no conjugation).
pub fn tilde_inner(x: &[C64; 4], y: &[C64; 4]) -> C64 {
    let fy = spin_flip(y);
    x.iter().zip(fy.iter()).map(|(a, b)| a * b).sum()
}

/// 4×n matrix whose columns are the fibers `|φ_k⟩`.
pub fn build_phi(s: &PureState) -> CMatrix {
    let n = s.n();
    CMatrix::from_fn(4, n, |ab, k| s.vector()[ab * n + k])
}

/// Complex-symmetric matrix of tilde inner products between fibers.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeGram {
    matrix: CMatrix,
}

impl TildeGram {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn symmetry_residual(&self) -> f64 {
        numerics::max_abs_diff(&self.matrix, &self.matrix.transpose())
    }
}

pub fn build_tilde_gram(s: &PureState) -> TildeGram {
    TildeGram {
        matrix: tilde_gram_of(s.vector(), s.n()),
    }
}

/// Fiber `k` of a flat (possibly unnormalized) 4n-vector.
#[inline]
pub(crate) fn fiber_of(v: &CVector, n: usize, k: usize) -> [C64; 4] {
    [v[k], v[n + k], v[2 * n + k], v[3 * n + k]]
}

/// Tilde-Gram matrix of an unnormalized flat 4n-vector.
pub fn tilde_gram_of(v: &CVector, n: usize) -> CMatrix {
    let fibers: Vec<[C64; 4]> = (0..n).map(|k| fiber_of(v, n, k)).collect();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let value = tilde_inner(&fibers[i], &fibers[j]);
            m[(i, j)] = value;
            m[(j, i)] = value;
        }
    }
    m
}

/// `C_I(M) = √(2{[tr(MM†)]² − tr[(MM†)²]})`.
///
/// The radicand equals `4·Σ_{i<j} σ_i²σ_j²` over the singular values of `M`
/// and is evaluated in that form; the trace difference cancels
/// catastrophically when `C_I` is small.
pub fn i_concurrence(m: &CMatrix) -> Result<f64> {
    if !numerics::is_finite(m) {
        return Err(Error::NonFinite("I-concurrence input"));
    }
    let sigma = numerics::singular_values(m)?;
    let mut e2 = 0.0;
    let mut prefix = 0.0;
    for s in &sigma {
        let s2 = s * s;
        e2 += prefix * s2;
        prefix += s2;
    }
    Ok(2.0 * e2.sqrt())
}

/// Literal trace form of the I-concurrence, kept as a cross-check.
///
/// Radicands in `[−1e-12, 0)` are clamped to zero; anything more negative is
/// an error.
pub fn i_concurrence_from_traces(m: &CMatrix) -> Result<f64> {
    let a = m * m.adjoint();
    let tr = a.trace().re;
    let tr_sq = (&a * &a).trace().re;
    let radicand = 2.0 * (tr * tr - tr_sq);
    clamp_radicand(radicand).map(f64::sqrt)
}

fn clamp_radicand(radicand: f64) -> Result<f64> {
    if radicand >= 0.0 {
        Ok(radicand)
    } else if radicand >= -1e-12 {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(radicand))
    }
}

/// Components `C_αβ = ⟨Ψ*|s_α⊗s_β|Ψ⟩` of the concurrence vector of `M`
/// viewed as a bipartite state, with the unnormalized SO(n) generators
/// `(s_ij)_kl = δ_ik δ_jl − δ_il δ_jk`, `i < j`. Ordered with α major.
pub fn concurrence_vector(m: &CMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "concurrence vector needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::with_capacity(pairs.len() * pairs.len());
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            out.push(c(2.0, 0.0) * (m[(i, k)] * m[(j, l)] - m[(i, l)] * m[(j, k)]));
        }
    }
    Ok(out)
}

pub fn tau_from_gram(m: &CMatrix) -> Result<f64> {
    Ok(i_concurrence(m)?.sqrt())
}

/// The six 2×2 minors of the 4×2 matrix `[x y]`, rows `01, 02, 03, 12, 13, 23`.
fn wedge(x: &[C64; 4], y: &[C64; 4]) -> [C64; 6] {
    let mut out = [c(0.0, 0.0); 6];
    for (slot, (a, b)) in WEDGE_ROWS.iter().enumerate() {
        out[slot] = x[*a] * y[*b] - x[*b] * y[*a];
    }
    out
}

const WEDGE_ROWS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Second compound of `σ_y⊗σ_y`: `[(ab),(cd)] = S_ac S_bd − S_ad S_bc`.
fn flip_compound() -> [[f64; 6]; 6] {
    let s = |row: usize, col: usize| -> f64 {
        match (row, col) {
            (0, 3) | (3, 0) => -1.0,
            (1, 2) | (2, 1) => 1.0,
            _ => 0.0,
        }
    };
    let mut out = [[0.0; 6]; 6];
    for (p, (a, b)) in WEDGE_ROWS.iter().enumerate() {
        for (q, (cc, d)) in WEDGE_ROWS.iter().enumerate() {
            out[p][q] = s(*a, *cc) * s(*b, *d) - s(*a, *d) * s(*b, *cc);
        }
    }
    out
}

/// `C_I(M)` of a flat (possibly unnormalized) 4n-vector, from the 2×2
/// minors of `M`.
///
/// By Cauchy–Binet each minor is also a bilinear form in the wedges
/// `φ_i∧φ_j` through the second compound of `σ_y⊗σ_y`. Rounding perturbs a
/// minor by roughly `ε·‖M‖` on the first route and `ε·‖φ∧φ‖` on the second.
/// On `AB|C` product states the wedges vanish, on `A|BC` (and `B|AC`) states
/// `M` does, so the minors are taken from whichever is smaller. Either choice
/// alone leaves a `√ε ≈ 1e-8` floor under `tau` on the other family.
pub fn i_concurrence_of_vector(v: &CVector, n: usize) -> f64 {
    let fibers: Vec<[C64; 4]> = (0..n).map(|k| fiber_of(v, n, k)).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let gram = CMatrix::from_fn(n, n, |i, j| tilde_inner(&fibers[i], &fibers[j]));
    let wedges: Vec<[C64; 6]> = pairs.iter().map(|&(i, j)| wedge(&fibers[i], &fibers[j])).collect();
    let wedge_norm = wedges.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut total = 0.0;
    if wedge_norm < gram.norm() {
        let compound = flip_compound();
        let flipped: Vec<[C64; 6]> = wedges
            .iter()
            .map(|w| {
                let mut out = [c(0.0, 0.0); 6];
                for (slot, row) in out.iter_mut().zip(&compound) {
                    *slot = row.iter().zip(w).map(|(s, z)| z * *s).sum();
                }
                out
            })
            .collect();
        for left in &wedges {
            for right in &flipped {
                let minor: C64 = left.iter().zip(right).map(|(a, b)| a * b).sum();
                total += minor.norm_sqr();
            }
        }
    } else {
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                total += (gram[(i, k)] * gram[(j, l)] - gram[(i, l)] * gram[(j, k)]).norm_sqr();
            }
        }
    }
    2.0 * total.sqrt()
}

/// `tau(|ψ⟩) = C_I(M)^{1/2}`.
pub fn tau(s: &PureState) -> Result<f64> {
    let value = i_concurrence_of_vector(s.vector(), s.n()).sqrt();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("tau"))
    }
}

/// `⟨ψ*|Σ_ij|ψ⟩` with `Σ_ij = σ_y⊗σ_y⊗e_ij`, evaluated on the flat
/// 4n-vector without going through the fiber matrix.
fn sigma_expectation(s: &PureState, i: usize, j: usize) -> C64 {
    let n = s.n();
    let v = s.vector();
    // Σ_ij|ψ⟩ has support on party-C index i, carrying (σ_y⊗σ_y) of the j-fiber.
    let mut acc = c(0.0, 0.0);
    for (ab, sign, flipped) in [(0, -1.0, 3), (1, 1.0, 2), (2, 1.0, 1), (3, -1.0, 0)] {
        let (a, b) = (flipped / 2, flipped % 2);
        let row = flat_index(ab / 2, ab % 2, i, n);
        acc += v[row] * v[flat_index(a, b, j, n)] * sign;
    }
    acc
}

/// `tau` by direct expansion over party-C index pairs:
/// `[Σ_{i≠l, j≠k} |⟨Σ_ij⟩⟨Σ_lk⟩ − ⟨Σ_ik⟩⟨Σ_lj⟩|²]^{1/4}`.
pub fn tau_expanded(s: &PureState) -> f64 {
    let n = s.n();
    let e: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| sigma_expectation(s, i, j)).collect())
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        for l in (0..n).filter(|&l| l != i) {
            for j in 0..n {
                for k in (0..n).filter(|&k| k != j) {
                    total += (e[i][j] * e[l][k] - e[i][k] * e[l][j]).norm_sqr();
                }
            }
        }
    }
    total.powf(0.25)
}

/// Residual entanglement (three-tangle) of a three-qubit state, via the
/// Cayley hyperdeterminant: `τ₃ = 4|d₁ − 2d₂ + 4d₃|`.
pub fn three_tangle(s: &PureState) -> Result<f64> {
    if s.n() != 2 {
        return Err(Error::InvalidArgument(format!(
            "three-tangle needs party C of dimension 2, got {}",
            s.n()
        )));
    }
    let a = |i, j, k| s.amplitude(i, j, k);
    let d1 = a(0, 0, 0).powi(2) * a(1, 1, 1).powi(2)
        + a(0, 0, 1).powi(2) * a(1, 1, 0).powi(2)
        + a(0, 1, 0).powi(2) * a(1, 0, 1).powi(2)
        + a(1, 0, 0).powi(2) * a(0, 1, 1).powi(2);
    let d2 = a(0, 0, 0) * a(1, 1, 1) * a(0, 1, 1) * a(1, 0, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 0) * a(0, 0, 1)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 0) * a(0, 0, 1)
        + a(1, 0, 1) * a(0, 1, 0) * a(1, 1, 0) * a(0, 0, 1);
    let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1)
        + a(1, 1, 1) * a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0);
    Ok(4.0 * (d1 - d2 * 2.0 + d3 * 4.0).norm())
}
