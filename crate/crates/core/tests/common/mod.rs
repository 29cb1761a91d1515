//! Independent reference implementations used by the integration tests.
//!
//! Everything here is written against dense matrices built by explicit
//! Kronecker products, not against the library's fiber/bracket tables.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use tangle_core::PureState;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma_y() -> M {
    M::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(0.0, -1.0), cx(0.0, 1.0), cx(0.0, 0.0)])
}

/// `σ_y ⊗ σ_y` as a dense 4×4 matrix.
pub fn sy_sy() -> M {
    sigma_y().kronecker(&sigma_y())
}

pub fn unit(n: usize, i: usize, j: usize) -> M {
    let mut e = M::zeros(n, n);
    e[(i, j)] = cx(1.0, 0.0);
    e
}

/// `Σ_ij = σ_y ⊗ σ_y ⊗ e_ij` on the flattened (2,2,n) space.
pub fn big_sigma(n: usize, i: usize, j: usize) -> M {
    sy_sy().kronecker(&unit(n, i, j))
}

/// `xᵀ Σ_ij y` (no conjugation).
pub fn bilinear(x: &V, s: &M, y: &V) -> Complex64 {
    (x.transpose() * s * y)[(0, 0)]
}

/// Tilde-Gram matrix from the dense `Σ_ij` forms.
pub fn gram(s: &PureState) -> M {
    let n = s.n();
    let v = s.vector();
    M::from_fn(n, n, |i, j| bilinear(v, &big_sigma(n, i, j), v))
}

/// `sqrt(Σ_{i≠l, j≠k} |M_ij M_lk − M_ik M_lj|²)`, evaluated term by term.
pub fn i_concurrence_by_terms(m: &M) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != l && j != k {
                        acc += (m[(i, j)] * m[(l, k)] - m[(i, k)] * m[(l, j)]).norm_sqr();
                    }
                }
            }
        }
    }
    acc.sqrt()
}

/// Hermitian eigenpairs with eigenvalues in descending order.
pub fn eig_desc(h: &M) -> (Vec<f64>, M) {
    let sym = (h + h.adjoint()) * cx(0.5, 0.0);
    let e = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = M::from_fn(h.nrows(), order.len(), |r, c| e.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Singular values as the nonnegative eigenvalues of the Hermitian dilation
/// `[[0, κ], [κ†, 0]]`, descending.
pub fn singular_values_via_dilation(k: &M) -> Vec<f64> {
    let (rows, cols) = k.shape();
    let mut h = M::zeros(rows + cols, rows + cols);
    h.view_mut((0, rows), (rows, cols)).copy_from(k);
    h.view_mut((rows, 0), (cols, rows)).copy_from(&k.adjoint());
    let (values, _) = eig_desc(&h);
    values.into_iter().take(rows.min(cols)).map(|v| v.max(0.0)).collect()
}

/// Reduced density matrix of qubits A and B for an n=2 state.
fn rho_ab(s: &PureState) -> M {
    let n = s.n();
    let v = s.vector();
    M::from_fn(4, 4, |x, y| (0..n).map(|k| v[x * n + k] * v[y * n + k].conj()).sum())
}

fn rho_ac(s: &PureState) -> M {
    let n = s.n();
    let v = s.vector();
    let idx = |i: usize, j: usize, k: usize| (2 * i + j) * n + k;
    M::from_fn(2 * n, 2 * n, |x, y| {
        let (i, k) = (x / n, x % n);
        let (ip, kp) = (y / n, y % n);
        (0..2).map(|j| v[idx(i, j, k)] * v[idx(ip, j, kp)].conj()).sum()
    })
}

fn rho_a(s: &PureState) -> M {
    let n = s.n();
    let v = s.vector();
    M::from_fn(2, 2, |i, ip| {
        (0..2 * n).map(|jk| v[i * 2 * n + jk] * v[ip * 2 * n + jk].conj()).sum()
    })
}

/// Wootters concurrence of a two-qubit density matrix, from the singular
/// values of `Wᵀ (σ_y⊗σ_y) W` over its nonzero eigen-decomposition.
pub fn wootters_concurrence(rho: &M) -> f64 {
    let (values, vectors) = eig_desc(rho);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 1e-13).collect();
    let w = M::from_fn(4, keep.len(), |r, c| vectors[(r, keep[c])] * values[keep[c]].sqrt());
    let t = w.transpose() * sy_sy() * &w;
    let sv = singular_values_via_dilation(&t);
    let rest: f64 = sv.iter().skip(1).sum();
    (sv.first().copied().unwrap_or(0.0) - rest).max(0.0)
}

/// Residual three-tangle by the monogamy route:
/// `C²_{A(BC)} − C²_{AB} − C²_{AC}` with `C²_{A(BC)} = 4 det ρ_A`.
pub fn three_tangle_ckw(s: &PureState) -> f64 {
    assert_eq!(s.n(), 2);
    let ra = rho_a(s);
    let det = (ra[(0, 0)] * ra[(1, 1)] - ra[(0, 1)] * ra[(1, 0)]).re;
    4.0 * det - wootters_concurrence(&rho_ab(s)).powi(2) - wootters_concurrence(&rho_ac(s)).powi(2)
}

/// Orthonormal basis whose first vector is `psi`, completed by Gram–Schmidt
/// over the computational basis.
pub fn basis_completing(psi: &V) -> Vec<V> {
    let d = psi.len();
    let mut out = vec![psi.normalize()];
    for e in 0..d {
        if out.len() == d {
            break;
        }
        let mut v = V::zeros(d);
        v[e] = cx(1.0, 0.0);
        for _ in 0..2 {
            for b in &out {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / cx(norm, 0.0));
        }
    }
    out
}

/// `G_ij[p,p'] = w_pᵀ Σ_ij w_p'` for all party-C pairs.
pub fn sandwiches(w: &M, n: usize) -> Vec<Vec<M>> {
    (0..n)
        .map(|i| (0..n).map(|j| w.transpose() * big_sigma(n, i, j) * w).collect())
        .collect()
}

/// κ of the quasi-pure estimate for `x|ψ⟩⟨ψ| + (1−x)·I/d`, using the known
/// spectrum of that family instead of a numerical eigensolver.
pub fn kappa_isotropic(psi: &PureState, x: f64) -> M {
    let n = psi.n();
    let d = 4 * n;
    let basis = basis_completing(psi.vector());
    let noise = (1.0 - x) / d as f64;
    let weights: Vec<f64> = (0..d).map(|p| if p == 0 { x + noise } else { noise }).collect();
    let w = M::from_fn(d, d, |row, col| basis[col][row] * weights[col].sqrt());
    kappa_from_weighted(&w, n)
}

/// κ_pm = A^{pm,11}_{11,11} / (A^{11,11}_{11,11})^{3/4}, column 0 of `w`
/// being the dominant weighted eigenvector.
pub fn kappa_from_weighted(w: &M, n: usize) -> M {
    let r = w.ncols();
    let g = sandwiches(w, n);
    // A^{pm,11}_{11,11} = Σ F_{p1m1} conj(F_{1111}) per term.
    let f = |i: usize, j: usize, l: usize, k: usize, p: usize, m: usize| {
        g[i][j][(p, 0)] * g[l][k][(m, 0)] - g[i][k][(p, 0)] * g[l][j][(m, 0)]
    };
    let mut numerator = M::zeros(r, r);
    let mut anchor = 0.0;
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == l || j == k {
                        continue;
                    }
                    let f0 = f(i, j, l, k, 0, 0);
                    anchor += f0.norm_sqr();
                    for p in 0..r {
                        for m in 0..r {
                            numerator[(p, m)] += f(i, j, l, k, p, m) * f0.conj();
                        }
                    }
                }
            }
        }
    }
    numerator / cx(anchor.powf(0.75), 0.0)
}

pub fn tau_quasi_oracle(k: &M) -> f64 {
    let sv = singular_values_via_dilation(k);
    (sv[0] - sv[1..].iter().sum::<f64>()).max(0.0)
}

/// The roof tensor from the four Kronecker-product terms per index
/// quadruple, every slot sandwiched between weighted eigenvectors.
/// Row `((p·r+m)·r+n)·r+q`, column `((p'·r+m')·r+n')·r+q'`.
pub fn a_tensor_by_kron(w: &M, n: usize) -> M {
    let r = w.ncols();
    let g = sandwiches(w, n);
    let gc: Vec<Vec<M>> = g.iter().map(|row| row.iter().map(|m| m.map(|z| z.conj())).collect()).collect();
    let k4 = |a: &M, b: &M, c: &M, d: &M| a.kronecker(b).kronecker(c).kronecker(d);
    let mut out = M::zeros(r.pow(4), r.pow(4));
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == l || j == k {
                        continue;
                    }
                    out += k4(&g[i][j], &g[l][k], &gc[i][j], &gc[l][k]);
                    out += k4(&g[i][k], &g[l][j], &gc[i][k], &gc[l][j]);
                    out -= k4(&g[i][j], &g[l][k], &gc[i][k], &gc[l][j]);
                    out -= k4(&g[i][k], &g[l][j], &gc[i][j], &gc[l][k]);
                }
            }
        }
    }
    out
}
