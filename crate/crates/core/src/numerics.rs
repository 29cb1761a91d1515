//! Dense complex linear algebra shared by every other module.
//!
//! Decompositions are delegated to `nalgebra`; this module fixes the
//! conventions the rest of the crate relies on: singular values and
//! eigenvalues always come back in descending order, and non-convergence is
//! an error rather than a panic.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Shared tolerances.
pub mod tol {
    /// Structural identities (symmetry, normalization, completeness).
    pub const STRUCTURAL: f64 = 1e-12;
    /// Numerical equalities between two computed quantities.
    pub const NUMERICAL: f64 = 1e-10;
}

const MAX_ITERATIONS: usize = 10_000;

pub const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖a − b‖_F / max(‖b‖_F, 1)`.
pub fn relative_frobenius_error(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Columns are orthonormal.
    pub left: CMatrix,
    /// Descending, nonnegative.
    pub singulars: Vec<f64>,
    /// Rows are orthonormal.
    pub right_adjoint: CMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.left.clone();
        for (j, s) in self.singulars.iter().enumerate() {
            let mut col = scaled.column_mut(j);
            col *= c(*s, 0.0);
        }
        scaled * &self.right_adjoint
    }
}

pub fn svd(m: &CMatrix) -> Result<SvdResult> {
    if !is_finite(m) {
        return Err(Error::NonFinite("svd input"));
    }
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(SvdResult {
            left: CMatrix::zeros(rows, 0),
            singulars: Vec::new(),
            right_adjoint: CMatrix::zeros(0, cols),
        });
    }
    let decomposition = m
        .clone()
        .try_svd(true, true, f64::EPSILON, MAX_ITERATIONS)
        .ok_or(Error::NonConvergence {
            routine: "svd",
            iterations: MAX_ITERATIONS,
        })?;
    let u = decomposition.u.expect("requested U");
    let v_t = decomposition.v_t.expect("requested V^dagger");
    let values = decomposition.singular_values;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut left = CMatrix::zeros(rows, k);
    let mut right_adjoint = CMatrix::zeros(k, cols);
    let mut singulars = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right_adjoint.set_row(dst, &v_t.row(src));
        singulars.push(values[src].max(0.0));
    }
    Ok(SvdResult {
        left,
        singulars,
        right_adjoint,
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.singulars)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors as columns.
pub fn hermitian_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !is_finite(m) {
        return Err(Error::NonFinite("hermitian_eig input"));
    }
    let residual = hermiticity_residual(m);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if residual > tol::STRUCTURAL * scale {
        return Err(Error::NotHermitian { residual });
    }
    let n = m.nrows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_ITERATIONS).ok_or(
        Error::NonConvergence {
            routine: "hermitian_eig",
            iterations: MAX_ITERATIONS,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `exp(i·h)` for Hermitian `h`.
pub fn exp_i_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eig(h)?;
    let mut scaled = vectors.clone();
    for (j, lambda) in values.iter().enumerate() {
        let mut col = scaled.column_mut(j);
        col *= C64::from_polar(1.0, *lambda);
    }
    Ok(scaled * vectors.adjoint())
}

/// Kronecker product with `(a⊗b)[i·rb+k, j·cb+l] = a[i,j]·b[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Rearrangement-plus-SVD nearest Kronecker sum.
///
/// Writes `a` (of shape `(ra·rb) × (ca·cb)` with `block_shape = (rb, cb)`) as
/// `Σ left_t ⊗ right_t`, keeping at most `terms` terms ordered by decreasing
/// singular value of the rearranged matrix. Numerically zero terms are
/// dropped, so a zero input yields an empty list.
pub fn nearest_kronecker_sum(
    a: &CMatrix,
    block_shape: (usize, usize),
    terms: usize,
) -> Result<Vec<(CMatrix, CMatrix)>> {
    let (rb, cb) = block_shape;
    let (rows, cols) = a.shape();
    if rb == 0 || cb == 0 || rows % rb != 0 || cols % cb != 0 {
        return Err(Error::Shape(format!(
            "{rows}x{cols} matrix is not divisible into {rb}x{cb} blocks"
        )));
    }
    let (ra, ca) = (rows / rb, cols / cb);
    let rearranged = rearrange(a, (ra, ca), (rb, cb));
    let decomposition = svd(&rearranged)?;
    let largest = decomposition.singulars.first().copied().unwrap_or(0.0);
    let cutoff = largest * 1e-15 * (rearranged.nrows().max(rearranged.ncols()) as f64);

    let mut out = Vec::new();
    for (t, &sigma) in decomposition.singulars.iter().enumerate().take(terms) {
        if sigma <= cutoff || sigma == 0.0 {
            break;
        }
        let root = sigma.sqrt();
        let left = CMatrix::from_fn(ra, ca, |i, j| decomposition.left[(i * ca + j, t)] * root);
        let right = CMatrix::from_fn(rb, cb, |k, l| {
            decomposition.right_adjoint[(t, k * cb + l)] * root
        });
        out.push((left, right));
    }
    Ok(out)
}

/// `R[(i·ca + j), (k·cb + l)] = a[i·rb + k, j·cb + l]`.
pub(crate) fn rearrange(a: &CMatrix, outer: (usize, usize), inner: (usize, usize)) -> CMatrix {
    let (ra, ca) = outer;
    let (rb, cb) = inner;
    CMatrix::from_fn(ra * ca, rb * cb, |row, col| {
        let (i, j) = (row / ca, row % ca);
        let (k, l) = (col / cb, col % cb);
        a[(i * rb + k, j * cb + l)]
    })
}

pub fn kronecker_sum(terms: &[(CMatrix, CMatrix)]) -> Option<CMatrix> {
    let mut iter = terms.iter();
    let (l, r) = iter.next()?;
    let mut acc = kron(l, r);
    for (l, r) in iter {
        acc += kron(l, r);
    }
    Some(acc)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / std::f64::consts::SQRT_2
}

/// Haar-random unitary drawn from `rng` (QR of a Ginibre matrix with the
/// phases of `R`'s diagonal folded back into `Q`).
pub fn haar_unitary_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let ginibre = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = ginibre.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_from(dim, &mut rng)
}

/// `‖U†U − I‖` entrywise maximum.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(u.ncols(), u.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng))
    }

    fn sigma_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    #[test]
    fn svd_identity_and_diagonal() {
        let s = svd(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(s.singulars, vec![1.0, 1.0]);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0, 0.0), c(4.0, 0.0)]));
        let s = svd(&d).unwrap();
        assert!((s.singulars[0] - 4.0).abs() < 1e-14);
        assert!((s.singulars[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let m = random_matrix(5, 3, 1);
        let s = svd(&m).unwrap();
        assert!(relative_frobenius_error(&s.reconstruct(), &m) < 1e-10);
        assert!(s.singulars.windows(2).all(|w| w[0] >= w[1]));
        let wide = random_matrix(3, 7, 2);
        let s = svd(&wide).unwrap();
        assert!(relative_frobenius_error(&s.reconstruct(), &wide) < 1e-10);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(svd(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.3, 0.0), c(0.7, 0.0)]));
        let (values, _) = hermitian_eig(&d).unwrap();
        assert!((values[0] - 0.7).abs() < 1e-14 && (values[1] - 0.3).abs() < 1e-14);

        let (values, vectors) = hermitian_eig(&sigma_y()).unwrap();
        assert!((values[0] - 1.0).abs() < 1e-14 && (values[1] + 1.0).abs() < 1e-14);
        let residual = &sigma_y() * vectors.column(0) - vectors.column(0) * c(1.0, 0.0);
        assert!(residual.norm() < 1e-12);
    }

    #[test]
    fn eig_residual_on_random_hermitian() {
        let g = random_matrix(12, 12, 3);
        let h = &g + g.adjoint();
        let (values, vectors) = hermitian_eig(&h).unwrap();
        for (k, lambda) in values.iter().enumerate() {
            let v = vectors.column(k);
            let r = &h * v - v * c(*lambda, 0.0);
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
        assert!(unitarity_residual(&vectors) < 1e-10);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = random_matrix(3, 3, 4);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn kron_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));

        let yy = kron(&sigma_y(), &sigma_y());
        let anti = [-1.0, 1.0, 1.0, -1.0];
        for r in 0..4 {
            for col in 0..4 {
                let expected = if r + col == 3 { anti[r] } else { 0.0 };
                assert_eq!(yy[(r, col)], c(expected, 0.0));
            }
        }

        let mut e01 = CMatrix::zeros(2, 2);
        e01[(0, 1)] = c(1.0, 0.0);
        let mut e10 = CMatrix::zeros(2, 2);
        e10[(1, 0)] = c(1.0, 0.0);
        let k = kron(&e01, &e10);
        for r in 0..4 {
            for col in 0..4 {
                let expected = if (r, col) == (1, 2) { 1.0 } else { 0.0 };
                assert_eq!(k[(r, col)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn nearest_kronecker_exact_single_term() {
        let b = random_matrix(3, 2, 5);
        let a = kron(&b, &b);
        let terms = nearest_kronecker_sum(&a, (3, 2), 1).unwrap();
        assert_eq!(terms.len(), 1);
        let back = kronecker_sum(&terms).unwrap();
        assert!(max_abs_diff(&back, &a) < 1e-12);
    }

    #[test]
    fn nearest_kronecker_two_terms() {
        let b = random_matrix(2, 2, 6);
        let cc = random_matrix(2, 2, 7);
        let a = kron(&b, &b) + kron(&cc, &cc);
        let terms = nearest_kronecker_sum(&a, (2, 2), 2).unwrap();
        assert_eq!(terms.len(), 2);
        assert!(relative_frobenius_error(&kronecker_sum(&terms).unwrap(), &a) < 1e-10);
    }

    #[test]
    fn nearest_kronecker_full_rank_random() {
        let a = random_matrix(16, 16, 8);
        let terms = nearest_kronecker_sum(&a, (4, 4), 16).unwrap();
        assert!(relative_frobenius_error(&kronecker_sum(&terms).unwrap(), &a) < 1e-10);
    }

    #[test]
    fn nearest_kronecker_truncation_error_matches_discarded_singulars() {
        let a = random_matrix(6, 6, 9);
        let full = svd(&rearrange(&a, (3, 3), (2, 2))).unwrap().singulars;
        let terms = nearest_kronecker_sum(&a, (2, 2), 2).unwrap();
        let err = (kronecker_sum(&terms).unwrap() - &a).norm();
        let discarded: f64 = full[2..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((err - discarded).abs() < 1e-10);
    }

    #[test]
    fn nearest_kronecker_rejects_bad_shape() {
        let a = CMatrix::zeros(5, 4);
        assert!(matches!(nearest_kronecker_sum(&a, (2, 2), 1), Err(Error::Shape(_))));
        assert!(nearest_kronecker_sum(&CMatrix::zeros(4, 4), (2, 2), 4).unwrap().is_empty());
    }

    #[test]
    fn haar_examples() {
        let u = haar_unitary(1, 11);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert_eq!(haar_unitary(4, 7), haar_unitary(4, 7));
        assert!(unitarity_residual(&haar_unitary(8, 3)) < 1e-10);
    }

    #[test]
    fn haar_first_moment() {
        let dim = 4;
        let trials = 1000;
        let mean: f64 = (0..trials)
            .map(|s| haar_unitary(dim, s).index((0, 0)).norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 1.0 / dim as f64).abs() < 5.0 / (trials as f64).sqrt());
    }

    #[test]
    fn exp_i_hermitian_is_unitary() {
        let g = random_matrix(5, 5, 12);
        let h = &g + g.adjoint();
        let u = exp_i_hermitian(&h).unwrap();
        assert!(unitarity_residual(&u) < 1e-10);
        assert_eq!(
            exp_i_hermitian(&CMatrix::zeros(3, 3)).unwrap(),
            CMatrix::identity(3, 3)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn svd_roundtrip(rows in 1usize..65, cols in 1usize..65, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, seed);
            let s = svd(&m).unwrap();
            prop_assert!(relative_frobenius_error(&s.reconstruct(), &m) < 1e-10);
            prop_assert!(s.singulars.iter().all(|&x| x >= 0.0));
            prop_assert!(s.singulars.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn kron_is_bilinear(seed in any::<u64>()) {
            let a = random_matrix(2, 3, seed);
            let b = random_matrix(2, 3, seed.wrapping_add(1));
            let m = random_matrix(3, 2, seed.wrapping_add(2));
            let lhs = kron(&(&a + &b), &m);
            let rhs = kron(&a, &m) + kron(&b, &m);
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }
}
