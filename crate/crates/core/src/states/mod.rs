//! (2×2×n) pure states, density matrices and the named state families.
//!
//! Amplitudes `a_ijk` (i, j ∈ {0,1} for the qubit parties A, B and
//! k ∈ 0..n for party C) are flattened with k fastest: index `(2i + j)·n + k`.

mod io;

pub use io::{parse_density, parse_state, read_density, read_state, write_density, write_state};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, c, tol, CMatrix, CVector, C64};

/// Normalized pure state of a (2×2×n) system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: CVector,
}

impl PureState {
    /// Accepts a flat amplitude vector of length `4n` with unit norm.
    pub fn new(n: usize, amplitudes: CVector) -> Result<Self> {
        Self::check_shape(n, &amplitudes)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { n, amplitudes })
    }

    /// Normalizes `amplitudes`; rejects the zero vector.
    pub fn from_unnormalized(n: usize, amplitudes: CVector) -> Result<Self> {
        Self::check_shape(n, &amplitudes)?;
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Ok(Self {
            n,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    fn check_shape(n: usize, amplitudes: &CVector) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("party C dimension must be at least 1".into()));
        }
        if amplitudes.len() != 4 * n {
            return Err(Error::Shape(format!(
                "expected {} amplitudes for n = {n}, got {}",
                4 * n,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        Ok(())
    }

    /// `|ijk⟩` in a (2×2×n) system.
    pub fn basis(i: usize, j: usize, k: usize, n: usize) -> Result<Self> {
        if i > 1 || j > 1 || k >= n {
            return Err(Error::InvalidArgument(format!("basis index ({i},{j},{k}) out of range")));
        }
        let mut v = CVector::zeros(4 * n);
        v[flat_index(i, j, k, n)] = c(1.0, 0.0);
        Self::new(n, v)
    }

    /// Builds a state from `(i, j, k, amplitude)` terms, then normalizes.
    pub fn from_terms(n: usize, terms: &[(usize, usize, usize, C64)]) -> Result<Self> {
        let mut v = CVector::zeros(4 * n);
        for &(i, j, k, a) in terms {
            if i > 1 || j > 1 || k >= n {
                return Err(Error::InvalidArgument(format!(
                    "basis index ({i},{j},{k}) out of range"
                )));
            }
            v[flat_index(i, j, k, n)] += a;
        }
        Self::from_unnormalized(n, v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn amplitude(&self, i: usize, j: usize, k: usize) -> C64 {
        self.amplitudes[flat_index(i, j, k, self.n)]
    }

    pub fn vector(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_vector(self) -> CVector {
        self.amplitudes
    }

    /// Unnormalized two-qubit vectors `|φ_k⟩ = Σ_ij a_ijk |ij⟩`.
    pub fn fibers(&self) -> Vec<[C64; 4]> {
        (0..self.n)
            .map(|k| {
                let mut phi = [c(0.0, 0.0); 4];
                for (ab, slot) in phi.iter_mut().enumerate() {
                    *slot = self.amplitudes[ab * self.n + k];
                }
                phi
            })
            .collect()
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

#[inline]
pub fn flat_index(i: usize, j: usize, k: usize, n: usize) -> usize {
    (2 * i + j) * n + k
}

/// 2^{-1/2}(|000⟩ + |111⟩) with n = 2.
pub fn ghz_222() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_terms(2, &[(0, 0, 0, c(h, 0.0)), (1, 1, 1, c(h, 0.0))]).expect("valid")
}

/// 3^{-1/2}(|001⟩ + |010⟩ + |100⟩) with n = 2.
pub fn w_222() -> PureState {
    let t = 1.0 / 3f64.sqrt();
    PureState::from_terms(
        2,
        &[(0, 0, 1, c(t, 0.0)), (0, 1, 0, c(t, 0.0)), (1, 0, 0, c(t, 0.0))],
    )
    .expect("valid")
}

/// ½(|000⟩ + |101⟩ + |011⟩ + |112⟩), a GHZ-class state of local rank (2,2,3).
pub fn ghz_prime() -> PureState {
    let h = c(0.5, 0.0);
    PureState::from_terms(3, &[(0, 0, 0, h), (1, 0, 1, h), (0, 1, 1, h), (1, 1, 2, h)])
        .expect("valid")
}

/// 3^{-1/2}(|000⟩ + |011⟩ + |112⟩), a W-class state of local rank (2,2,3).
pub fn w_prime() -> PureState {
    let t = c(1.0 / 3f64.sqrt(), 0.0);
    PureState::from_terms(3, &[(0, 0, 0, t), (0, 1, 1, t), (1, 1, 2, t)]).expect("valid")
}

fn normalized_factor(v: &[C64], what: &str) -> Result<CVector> {
    let v = CVector::from_column_slice(v);
    let norm = v.norm();
    if !norm.is_finite() || norm < 1e-300 {
        return Err(Error::InvalidArgument(format!("{what} factor is zero")));
    }
    Ok(v.unscale(norm))
}

/// `|φ_AB⟩ ⊗ |χ_C⟩`.
pub fn semiseparable_ab_c(phi_ab: &[C64; 4], chi_c: &[C64]) -> Result<PureState> {
    let phi = normalized_factor(phi_ab, "AB")?;
    let chi = normalized_factor(chi_c, "C")?;
    let n = chi.len();
    let v = CVector::from_fn(4 * n, |idx, _| phi[idx / n] * chi[idx % n]);
    PureState::from_unnormalized(n, v)
}

/// `|χ_A⟩ ⊗ |φ_BC⟩`, with `phi_bc` indexed `j·n + k`.
pub fn semiseparable_a_bc(chi_a: &[C64; 2], phi_bc: &[C64]) -> Result<PureState> {
    if !phi_bc.len().is_multiple_of(2) || phi_bc.is_empty() {
        return Err(Error::Shape(format!("BC factor has odd length {}", phi_bc.len())));
    }
    let chi = normalized_factor(chi_a, "A")?;
    let phi = normalized_factor(phi_bc, "BC")?;
    let n = phi.len() / 2;
    let v = CVector::from_fn(4 * n, |idx, _| chi[idx / (2 * n)] * phi[idx % (2 * n)]);
    PureState::from_unnormalized(n, v)
}

pub fn random_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| numerics::complex_gaussian(rng))
}

/// Haar-random pure state drawn from `rng`.
pub fn random_pure_from<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    PureState::from_unnormalized(n, random_vector(4 * n, rng)).expect("gaussian vector is nonzero")
}

pub fn random_pure(n: usize, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_from(n, &mut rng)
}

/// Density matrix on the 4n-dimensional composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

/// Most negative eigenvalue tolerated as round-off.
pub const NEGATIVE_EIGENVALUE_FLOOR: f64 = -1e-10;

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, tol::STRUCTURAL)
    }

    /// Validates with a caller-chosen tolerance for Hermiticity and trace.
    pub(crate) fn with_tolerance(matrix: CMatrix, tolerance: f64) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || dim == 0 || !dim.is_multiple_of(4) {
            return Err(Error::Shape(format!(
                "density matrix must be square with dimension 4n, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !numerics::is_finite(&matrix) {
            return Err(Error::NonFinite("density matrix"));
        }
        let residual = numerics::hermiticity_residual(&matrix);
        if residual > tolerance {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tolerance || trace.im.abs() > tolerance {
            return Err(Error::NonPhysical(format!("trace is {trace}")));
        }
        let (values, _) = numerics::hermitian_eig(&matrix)?;
        let smallest = values.last().copied().unwrap_or(0.0);
        if smallest < NEGATIVE_EIGENVALUE_FLOOR {
            return Err(Error::NonPhysical(format!("negative eigenvalue {smallest:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(s: &PureState) -> Self {
        Self {
            matrix: s.projector(),
        }
    }

    /// `Σ p_i |s_i⟩⟨s_i|`; weights must be nonnegative and sum to one.
    pub fn mixture(members: &[(f64, PureState)]) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (p, s) in members {
            if s.dim() != dim {
                return Err(Error::Shape("mixture members differ in dimension".into()));
            }
            if *p < 0.0 {
                return Err(Error::InvalidArgument(format!("negative weight {p}")));
            }
            m += s.projector() * c(*p, 0.0);
        }
        Self::new(m)
    }

    /// `x·|s⟩⟨s| + (1−x)·I/(4n)`.
    pub fn isotropic_mix(s: &PureState, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidArgument(format!("mixing parameter {x} outside [0, 1]")));
        }
        let dim = s.dim();
        let noise = CMatrix::identity(dim, dim) * c((1.0 - x) / dim as f64, 0.0);
        Ok(Self {
            matrix: s.projector() * c(x, 0.0) + noise,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Party-C dimension.
    pub fn n(&self) -> usize {
        self.dim() / 4
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigendecompose(&self, cutoff: f64) -> Result<SpectralDecomposition> {
        eigendecompose(self, cutoff)
    }
}

/// Default relative rank cutoff.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Spectrum of a density matrix, descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<CVector>,
    /// Number of eigenvalues above the cutoff (relative to the largest).
    pub rank: usize,
}

impl SpectralDecomposition {
    /// `√u_p · |γ_p⟩` for the `rank` retained eigenpairs.
    pub fn weighted_vectors(&self) -> Vec<CVector> {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .take(self.rank)
            .map(|(u, v)| v * c(u.sqrt(), 0.0))
            .collect()
    }

    /// Gap between the two largest weights (infinite for rank one).
    pub fn dominant_gap(&self) -> f64 {
        match self.eigenvalues.as_slice() {
            [first, second, ..] if self.rank > 1 => first - second,
            _ => f64::INFINITY,
        }
    }

    /// `Σ u_α |γ_α⟩⟨γ_α|` over all stored eigenpairs.
    pub fn reassemble(&self) -> CMatrix {
        let dim = self.eigenvectors.first().map_or(0, |v| v.len());
        let mut m = CMatrix::zeros(dim, dim);
        for (u, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m += v * v.adjoint() * c(*u, 0.0);
        }
        m
    }
}

pub fn eigendecompose(rho: &DensityMatrix, cutoff: f64) -> Result<SpectralDecomposition> {
    let (values, vectors) = numerics::hermitian_eig(rho.matrix())?;
    if let Some(&smallest) = values.last() {
        if smallest < NEGATIVE_EIGENVALUE_FLOOR {
            return Err(Error::NonPhysical(format!("negative eigenvalue {smallest:e}")));
        }
    }
    let largest = values.first().copied().unwrap_or(0.0);
    let threshold = cutoff * largest;
    let eigenvalues: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let rank = eigenvalues.iter().filter(|&&v| v > threshold).count();
    let eigenvectors = (0..vectors.ncols()).map(|k| vectors.column(k).into_owned()).collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: f64) -> bool {
        (a - c(b, 0.0)).norm() < 1e-14
    }

    #[test]
    fn fibers_of_basis_state() {
        let s = PureState::basis(0, 0, 0, 3).unwrap();
        let f = s.fibers();
        assert_eq!(f[0], [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(f[1..].iter().all(|phi| phi.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn fibers_of_named_states() {
        let f = ghz_prime().fibers();
        assert!(close(f[0][0], 0.5) && close(f[0][3], 0.0));
        assert!(close(f[1][1], 0.5) && close(f[1][2], 0.5));
        assert!(close(f[2][3], 0.5));

        let t = 1.0 / 3f64.sqrt();
        let f = w_prime().fibers();
        assert!(close(f[0][0], t) && close(f[1][1], t) && close(f[2][3], t));
        let total: f64 = f.iter().flatten().map(|z| z.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn named_amplitudes() {
        let g = ghz_prime();
        for (i, j, k) in [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 2)] {
            assert!(close(g.amplitude(i, j, k), 0.5));
        }
        let w = w_prime();
        let t = 1.0 / 3f64.sqrt();
        for (i, j, k) in [(0, 0, 0), (0, 1, 1), (1, 1, 2)] {
            assert!(close(w.amplitude(i, j, k), t));
        }
        assert!((ghz_222().vector().norm() - 1.0).abs() < 1e-15);
        assert_eq!(w_222().n(), 2);
    }

    #[test]
    fn semiseparable_outer_products() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let s = semiseparable_ab_c(&bell, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(close(s.amplitude(0, 0, 0), h) && close(s.amplitude(1, 1, 0), h));
        assert!((0..2).all(|i| (0..2).all(|j| (1..3).all(|k| s.amplitude(i, j, k).norm() == 0.0))));

        let s = semiseparable_a_bc(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let nonzero = s.vector().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 1);
        assert!(close(s.amplitude(1, 1, 0), 1.0));

        assert!(semiseparable_ab_c(&bell, &[c(0.0, 0.0)]).is_err());
        assert!(semiseparable_a_bc(&[c(0.0, 0.0); 2], &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn random_pure_is_deterministic_and_normalized() {
        assert_eq!(random_pure(3, 42), random_pure(3, 42));
        assert_ne!(random_pure(3, 42), random_pure(3, 43));
        for seed in 0..20 {
            assert!((random_pure(4, seed).vector().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_pure_first_moment() {
        // E|a_000|^2 = 1/12 for Haar states of dimension 12; Var = (1/12)(11/12)/13.
        let samples = 1000;
        let values: Vec<f64> = (0..samples)
            .map(|s| random_pure(3, s).amplitude(0, 0, 0).norm_sqr())
            .collect();
        let mean = values.iter().sum::<f64>() / samples as f64;
        let var = (1.0 / 12.0) * (11.0 / 12.0) / 13.0;
        let stderr = (var / samples as f64).sqrt();
        assert!((mean - 1.0 / 12.0).abs() < 3.0 * stderr, "mean {mean}");
    }

    #[test]
    fn isotropic_mix_endpoints_and_spectrum() {
        let g = ghz_prime();
        let pure = DensityMatrix::isotropic_mix(&g, 1.0).unwrap();
        assert!(numerics::max_abs_diff(pure.matrix(), &g.projector()) < 1e-15);

        let mixed = DensityMatrix::isotropic_mix(&g, 0.0).unwrap();
        let expected = CMatrix::identity(12, 12) * c(1.0 / 12.0, 0.0);
        assert!(numerics::max_abs_diff(mixed.matrix(), &expected) < 1e-15);

        let half = DensityMatrix::isotropic_mix(&g, 0.5).unwrap();
        let sd = half.eigendecompose(RANK_CUTOFF).unwrap();
        assert_eq!(sd.rank, 12);
        assert!((sd.eigenvalues[0] - (0.5 + 0.5 / 12.0)).abs() < 1e-12);
        assert!(sd.eigenvalues[1..].iter().all(|u| (u - 0.5 / 12.0).abs() < 1e-12));
        let overlap = (sd.eigenvectors[0].adjoint() * g.vector())[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-10);

        assert!(DensityMatrix::isotropic_mix(&g, 1.5).is_err());
        assert!(DensityMatrix::isotropic_mix(&g, -0.1).is_err());
    }

    #[test]
    fn eigendecompose_examples() {
        let sd = DensityMatrix::from_pure(&ghz_222()).eigendecompose(RANK_CUTOFF).unwrap();
        assert_eq!(sd.rank, 1);
        assert!((sd.eigenvalues[0] - 1.0).abs() < 1e-12);

        let mm = DensityMatrix::isotropic_mix(&ghz_222(), 0.0).unwrap();
        let sd = mm.eigendecompose(RANK_CUTOFF).unwrap();
        assert_eq!(sd.rank, 8);
        assert!(sd.eigenvalues.iter().all(|u| (u - 0.125).abs() < 1e-12));
    }

    #[test]
    fn eigendecompose_reassembles() {
        let members: Vec<(f64, PureState)> =
            (0..3).map(|s| (1.0 / 3.0, random_pure(2, 100 + s))).collect();
        let rho = DensityMatrix::mixture(&members).unwrap();
        let sd = rho.eigendecompose(RANK_CUTOFF).unwrap();
        assert_eq!(sd.rank, 3);
        assert!((sd.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((&sd.reassemble() - rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::identity(4, 4);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::NonPhysical(_))));

        let mut not_hermitian = CMatrix::identity(4, 4) * c(0.25, 0.0);
        not_hermitian[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(not_hermitian), Err(Error::NotHermitian { .. })));

        let negative = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(1.2, 0.0),
            c(-0.2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]));
        assert!(matches!(DensityMatrix::new(negative), Err(Error::NonPhysical(_))));
        assert!(matches!(DensityMatrix::new(CMatrix::identity(3, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn pure_state_validation() {
        assert!(matches!(
            PureState::new(1, CVector::from_element(4, c(1.0, 0.0))),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(PureState::new(2, CVector::zeros(4)), Err(Error::Shape(_))));
        assert!(PureState::new(0, CVector::zeros(0)).is_err());
        assert!(PureState::basis(2, 0, 0, 1).is_err());
    }
}
