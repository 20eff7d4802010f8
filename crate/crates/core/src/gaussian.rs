//! Covariance matrices of Gaussian states and the entropy functionals built on
//! their symplectic spectra.
//!
//! All quantities are in shot-noise units: the vacuum has covariance `I`.
//! Modes are laid out as `(Q1, P1, Q2, P2, ...)`, so mode `k` occupies rows
//! and columns `2k` and `2k + 1`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Allowed absolute asymmetry `|g_ij - g_ji|` of a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Floating-point noise below this (relative) level is clamped to zero in
/// radicands and squared eigenvalues.
pub const CLAMP_TOL: f64 = 1e-9;

/// A symplectic eigenvalue below `1 - PHYSICALITY_TOL` marks an unphysical state.
pub const PHYSICALITY_TOL: f64 = 1e-6;

/// Homodyne quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }
}

/// Real symmetric `2n x 2n` covariance matrix of `n` bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::Shape(format!(
                "expected a non-empty 2n x 2n matrix, got {rows} x {cols}"
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite entry".into()));
        }
        let asym = (&data - data.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { data })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries cannot fill a {dim} x {dim} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// `n` vacuum modes.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            data: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single-mode thermal state with quadrature variance `v`.
    pub fn thermal(v: f64) -> Self {
        Self {
            data: DMatrix::identity(2, 2) * v,
        }
    }

    /// Two-mode squeezed vacuum (EPR state) with local variance `v`.
    pub fn two_mode_squeezed(v: f64) -> Self {
        let c = (v * v - 1.0).max(0.0).sqrt();
        Self::two_mode_diagonal([v, v], [v, v], [c, -c])
    }

    /// Two-mode matrix whose 2x2 blocks are all diagonal:
    /// `[[diag(a), diag(c)], [diag(c), diag(b)]]`.
    pub fn two_mode_diagonal(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        let mut data = DMatrix::zeros(4, 4);
        for q in 0..2 {
            data[(q, q)] = a[q];
            data[(2 + q, 2 + q)] = b[q];
            data[(q, 2 + q)] = c[q];
            data[(2 + q, q)] = c[q];
        }
        Self { data }
    }

    pub fn n_modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[(row, col)]
    }

    pub fn determinant(&self) -> f64 {
        self.data.determinant()
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.data.nrows(), other.data.nrows());
        let mut data = DMatrix::zeros(n + m, n + m);
        data.view_mut((0, 0), (n, n)).copy_from(&self.data);
        data.view_mut((n, n), (m, m)).copy_from(&other.data);
        Self { data }
    }

    /// `S g S^T` for a (symplectic) transform `S` acting on all modes.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.shape() != self.data.shape() {
            return Err(Error::Shape(format!(
                "transform is {:?}, covariance is {:?}",
                s.shape(),
                self.data.shape()
            )));
        }
        let out = s * &self.data * s.transpose();
        Ok(Self {
            data: (&out + out.transpose()) * 0.5,
        })
    }

    /// Covariance of the listed modes, in the order given.
    pub fn select_modes(&self, modes: &[usize]) -> Result<Self> {
        let idx = self.quadrature_indices(modes)?;
        Ok(Self {
            data: self.data.select_rows(&idx).select_columns(&idx),
        })
    }

    fn quadrature_indices(&self, modes: &[usize]) -> Result<Vec<usize>> {
        let n_modes = self.n_modes();
        let mut idx = Vec::with_capacity(2 * modes.len());
        for &m in modes {
            if m >= n_modes {
                return Err(Error::ModeOutOfRange { index: m, n_modes });
            }
            idx.extend([2 * m, 2 * m + 1]);
        }
        Ok(idx)
    }
}

/// Symplectic eigenvalues, ascending, one per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum(Vec<f64>);

impl SymplecticSpectrum {
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self(eigenvalues)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.first().copied().unwrap_or(f64::NAN)
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.0.iter().all(|&l| l.is_finite() && l >= 1.0 - tol)
    }
}

/// `G(x) = (x + 1) log2(x + 1) - x log2 x`, with `G(0) = 0`.
///
/// Negative inputs down to `-1e-12` are rounding noise and are treated as 0.
pub fn g_entropy(x: f64) -> Result<f64> {
    if x.is_nan() || x < -1e-12 {
        return Err(Error::EntropyDomain(x));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Standard symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic spectrum of an arbitrary `n`-mode covariance matrix.
///
/// The moduli of the eigenvalues of `iΩg` are obtained from the real
/// antisymmetric matrix `M = g^{1/2} Ω g^{1/2}`: the symmetric matrix
/// `M^T M` has eigenvalues `ν_k^2`, each twice.
pub fn symplectic_eigenvalues(cov: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let n = cov.n_modes();
    let eig = SymmetricEigen::new(cov.data.clone());
    let min_eig = eig.eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite(min_eig));
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let m = &root * symplectic_form(n) * &root;
    let k = m.transpose() * &m;
    let k = (&k + k.transpose()) * 0.5;
    let mut sq: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    sq.sort_by(f64::total_cmp);
    let nu = sq
        .chunks_exact(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    Ok(SymplecticSpectrum::new(nu))
}

/// Closed-form spectrum of a two-mode covariance `[[A, C], [C^T, B]]`:
/// `ν² = (Δ ∓ sqrt(Δ² - 4 det g)) / 2` with `Δ = det A + det B + 2 det C`.
pub fn two_mode_symplectic_eigenvalues(cov: &CovarianceMatrix) -> Result<[f64; 2]> {
    if cov.n_modes() != 2 {
        return Err(Error::Shape(format!(
            "closed form needs 2 modes, got {}",
            cov.n_modes()
        )));
    }
    let g = &cov.data;
    let det2 = |r: usize, c: usize| g[(r, c)] * g[(r + 1, c + 1)] - g[(r, c + 1)] * g[(r + 1, c)];
    let delta = det2(0, 0) + det2(2, 2) + 2.0 * det2(0, 2);
    let (lo, hi) = two_mode_closed_form(delta, g.determinant())?;
    Ok([lo, hi])
}

/// Roots of `ν⁴ - Δ ν² + D = 0` as `(ν_small, ν_large)`.
///
/// The small root is taken from `ν_small² = D / ν_large²` to avoid
/// cancellation when `Δ` is large.
pub fn two_mode_closed_form(delta: f64, det: f64) -> Result<(f64, f64)> {
    let scale = delta * delta;
    let mut radicand = scale - 4.0 * det;
    if radicand < 0.0 {
        if radicand < -CLAMP_TOL * scale.max(1.0) {
            return Err(Error::Unphysical(f64::NAN));
        }
        radicand = 0.0;
    }
    let hi_sq = 0.5 * (delta + radicand.sqrt());
    if !(hi_sq > 0.0) {
        return Err(Error::Unphysical(hi_sq));
    }
    let lo_sq = det / hi_sq;
    if lo_sq < 0.0 {
        if lo_sq < -CLAMP_TOL {
            return Err(Error::Unphysical(lo_sq));
        }
        return Ok((0.0, hi_sq.sqrt()));
    }
    Ok((lo_sq.sqrt(), hi_sq.sqrt()))
}

/// `Σ G((ν - 1)/2)` over a list of symplectic eigenvalues, in bits.
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &nu in eigenvalues {
        if !nu.is_finite() || nu < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical(nu));
        }
        s += g_entropy((nu.max(1.0) - 1.0) / 2.0)?;
    }
    Ok(s)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(cov: &CovarianceMatrix) -> Result<f64> {
    entropy_from_spectrum(symplectic_eigenvalues(cov)?.eigenvalues())
}

/// Covariance of the remaining modes after homodyning one quadrature of
/// `measured_mode`: `g_kept - σ (X g_m X)^MP σ^T`.
pub fn conditional_covariance_homodyne(
    cov: &CovarianceMatrix,
    measured_mode: usize,
    quadrature: Quadrature,
) -> Result<CovarianceMatrix> {
    let n_modes = cov.n_modes();
    if measured_mode >= n_modes {
        return Err(Error::ModeOutOfRange {
            index: measured_mode,
            n_modes,
        });
    }
    if n_modes < 2 {
        return Err(Error::Shape("nothing left after measuring the only mode".into()));
    }
    let kept: Vec<usize> = (0..n_modes).filter(|&m| m != measured_mode).collect();
    let kept_idx = cov.quadrature_indices(&kept)?;
    let row = 2 * measured_mode + quadrature.offset();

    let v = cov.data[(row, row)];
    let mut out = cov.data.select_rows(&kept_idx).select_columns(&kept_idx);
    // Moore-Penrose inverse of diag(v, 0) is diag(1/v, 0), or 0 when v = 0.
    if v > 0.0 {
        let sigma: Vec<f64> = kept_idx.iter().map(|&i| cov.data[(i, row)]).collect();
        for (a, sa) in sigma.iter().enumerate() {
            for (b, sb) in sigma.iter().enumerate() {
                out[(a, b)] -= sa * sb / v;
            }
        }
    }
    CovarianceMatrix::new((&out + out.transpose()) * 0.5)
}

/// Beam splitter of transmissivity `tau` acting on modes `i` and `j`.
pub fn beam_splitter(n_modes: usize, i: usize, j: usize, tau: f64) -> Result<DMatrix<f64>> {
    for m in [i, j] {
        if m >= n_modes {
            return Err(Error::ModeOutOfRange { index: m, n_modes });
        }
    }
    if i == j || !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            expected: "distinct modes and 0 <= tau <= 1",
        });
    }
    let (t, r) = (tau.sqrt(), (1.0 - tau).sqrt());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = t;
        s[(a, b)] = r;
        s[(b, a)] = -r;
        s[(b, b)] = t;
    }
    Ok(s)
}

/// Single-mode squeezer `diag(e^{-r}, e^{r})` on `mode`.
pub fn squeezer(n_modes: usize, mode: usize, r: f64) -> Result<DMatrix<f64>> {
    if mode >= n_modes {
        return Err(Error::ModeOutOfRange {
            index: mode,
            n_modes,
        });
    }
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    s[(2 * mode, 2 * mode)] = (-r).exp();
    s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    Ok(s)
}

/// Phase-space rotation by `theta` on `mode`.
pub fn phase_rotation(n_modes: usize, mode: usize, theta: f64) -> Result<DMatrix<f64>> {
    if mode >= n_modes {
        return Err(Error::ModeOutOfRange {
            index: mode,
            n_modes,
        });
    }
    let (s_, c) = theta.sin_cos();
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let k = 2 * mode;
    s[(k, k)] = c;
    s[(k, k + 1)] = s_;
    s[(k + 1, k)] = -s_;
    s[(k + 1, k + 1)] = c;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn g_entropy_reference_values() {
        assert_eq!(g_entropy(0.0).unwrap(), 0.0);
        assert_eq!(g_entropy(-5e-13).unwrap(), 0.0);
        assert_abs_diff_eq!(g_entropy(1.0).unwrap(), 2.0, epsilon = 1e-15);
        // 1.5 log2 1.5 + 0.5, evaluated with 30-digit arithmetic
        assert_abs_diff_eq!(g_entropy(0.5).unwrap(), 1.377443751081734, epsilon = 1e-14);
        assert!(matches!(g_entropy(-1e-6), Err(Error::EntropyDomain(_))));
        assert!(g_entropy(f64::NAN).is_err());
    }

    #[test]
    fn g_entropy_monotone_on_grid() {
        let mut prev = 0.0;
        for i in 0..=10_000 {
            let g = g_entropy(100.0 * i as f64 / 10_000.0).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn rejects_asymmetric_and_odd() {
        let bad = CovarianceMatrix::from_row_slice(2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(bad, Err(Error::NotSymmetric(_))));
        let odd = CovarianceMatrix::new(DMatrix::identity(3, 3));
        assert!(matches!(odd, Err(Error::Shape(_))));
    }

    #[test]
    fn vacuum_and_epr_are_pure() {
        let spec = symplectic_eigenvalues(&CovarianceMatrix::vacuum(2)).unwrap();
        for &l in spec.eigenvalues() {
            assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
        }
        let epr = CovarianceMatrix::two_mode_squeezed(5.0);
        for &l in symplectic_eigenvalues(&epr).unwrap().eigenvalues() {
            assert_abs_diff_eq!(l, 1.0, epsilon = 1e-9);
        }
        let [lo, hi] = two_mode_symplectic_eigenvalues(&epr).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(von_neumann_entropy(&epr).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn thermal_entropy() {
        assert_abs_diff_eq!(
            von_neumann_entropy(&CovarianceMatrix::thermal(3.0)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(von_neumann_entropy(&CovarianceMatrix::vacuum(3)).unwrap(), 0.0);
    }

    #[test]
    fn unphysical_is_rejected() {
        let squeezed_below_vacuum = CovarianceMatrix::from_row_slice(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(
            von_neumann_entropy(&squeezed_below_vacuum),
            Err(Error::Unphysical(_))
        ));
        let indefinite = CovarianceMatrix::from_row_slice(2, &[-1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            symplectic_eigenvalues(&indefinite),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn homodyne_on_product_state_leaves_block() {
        let a = CovarianceMatrix::from_row_slice(2, &[3.0, 0.5, 0.5, 2.0]).unwrap();
        let joint = a.direct_sum(&CovarianceMatrix::thermal(4.0));
        let cond = conditional_covariance_homodyne(&joint, 1, Quadrature::Q).unwrap();
        assert_eq!(cond, a);
        let cond = conditional_covariance_homodyne(&joint, 0, Quadrature::P).unwrap();
        assert_eq!(cond, CovarianceMatrix::thermal(4.0));
    }

    #[test]
    fn homodyne_on_epr_gives_squeezed_pure_state() {
        let v = 7.0;
        let epr = CovarianceMatrix::two_mode_squeezed(v);
        for quad in [Quadrature::Q, Quadrature::P] {
            let cond = conditional_covariance_homodyne(&epr, 1, quad).unwrap();
            let det = cond.determinant();
            assert_abs_diff_eq!(det, 1.0, epsilon = 1e-12);
        }
        let cond = conditional_covariance_homodyne(&epr, 1, Quadrature::Q).unwrap();
        assert_abs_diff_eq!(cond.get(0, 0), 1.0 / v, epsilon = 1e-12);
        assert_abs_diff_eq!(cond.get(1, 1), v, epsilon = 1e-12);
    }

    #[test]
    fn homodyne_with_zero_variance_uses_zero_pseudo_inverse() {
        // Degenerate (classical) Q variance on mode 1: nothing to subtract.
        let m = CovarianceMatrix::from_row_slice(
            4,
            &[
                2.0, 0.0, 0.0, 0.0, //
                0.0, 2.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 5.0,
            ],
        )
        .unwrap();
        let cond = conditional_covariance_homodyne(&m, 1, Quadrature::Q).unwrap();
        assert_eq!(cond, CovarianceMatrix::thermal(2.0));
    }

    #[test]
    fn mode_index_checked() {
        let m = CovarianceMatrix::vacuum(2);
        assert!(matches!(
            conditional_covariance_homodyne(&m, 2, Quadrature::Q),
            Err(Error::ModeOutOfRange { .. })
        ));
        assert!(beam_splitter(2, 0, 2, 0.5).is_err());
        assert!(beam_splitter(2, 0, 1, 1.5).is_err());
    }

    #[test]
    fn symplectic_builders_preserve_form() {
        let omega = symplectic_form(3);
        let transforms = [
            beam_splitter(3, 0, 2, 0.3).unwrap(),
            squeezer(3, 1, 0.7).unwrap(),
            phase_rotation(3, 2, 1.1).unwrap(),
        ];
        for s in transforms {
            let back = &s * &omega * s.transpose();
            assert!((back - &omega).amax() < 1e-14);
        }
    }

    #[test]
    fn beam_splitter_mixes_thermal_with_vacuum() {
        let joint = CovarianceMatrix::thermal(5.0).direct_sum(&CovarianceMatrix::vacuum(1));
        let bs = beam_splitter(2, 0, 1, 0.25).unwrap();
        let out = joint.transformed(&bs).unwrap();
        assert_abs_diff_eq!(out.get(0, 0), 0.25 * 5.0 + 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(out.get(2, 2), 0.75 * 5.0 + 0.25, epsilon = 1e-14);
        // Passive transforms preserve the spectrum.
        let before = symplectic_eigenvalues(&joint).unwrap();
        let after = symplectic_eigenvalues(&out).unwrap();
        for (x, y) in before.eigenvalues().iter().zip(after.eigenvalues()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }
}
