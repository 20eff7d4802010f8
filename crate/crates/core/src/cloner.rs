//! Entangling-cloner model of Eve: the channel is a beam splitter of
//! transmission T whose second input is half of an EPR pair of variance N.
//! Eve keeps the reflected mode E1 and the other EPR half E2.
//!
//! This module derives both Holevo bounds from Eve's own covariance matrix and
//! serves as an independent check on [`crate::keyrate`]. It shares only the
//! generic primitives of [`crate::gaussian`] with that module.

use crate::error::{check_range, Error, Result};
use crate::gaussian::{entropy_from_spectrum, two_mode_closed_form, CovarianceMatrix};

/// Eve's two-mode state `(E1, E2)` and its correlations with Bob.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonerState {
    pub v: f64,
    pub t: f64,
    pub n: f64,
    /// `V_E1 = (1 - T)V + TN`
    pub v_e1: f64,
    /// `V_E1|A = (1 - T) + TN`
    pub v_e1_given_a: f64,
    /// `sqrt(T(N² - 1))`
    pub z_e1e2: f64,
    /// `sqrt(T(1 - T)) (N - V)`
    pub z_e1b: f64,
    /// `sqrt(1 - T) sqrt(N² - 1)`
    pub z_e2b: f64,
    /// Bob's variance `TV + (1 - T)N`.
    pub v_b: f64,
    pub gamma_e: CovarianceMatrix,
}

/// Builds Eve's state for a cloner of transmission `t` fed with an EPR pair
/// of variance `n`, while Alice sends variance `v`.
pub fn eve_covariance(v: f64, t: f64, n: f64) -> Result<ClonerState> {
    check_range("V", v, v >= 1.0, "V >= 1")?;
    check_range("N", n, n >= 1.0, "N >= 1")?;
    check_range("T", t, (0.0..=1.0).contains(&t), "0 <= T <= 1")?;
    if t == 0.0 || t == 1.0 {
        return Err(Error::DegenerateChannel(t));
    }
    let v_e1 = (1.0 - t) * v + t * n;
    let v_e1_given_a = (1.0 - t) + t * n;
    let epr = (n * n - 1.0).sqrt();
    let z_e1e2 = (t * (n * n - 1.0)).sqrt();
    let gamma_e = CovarianceMatrix::two_mode_diagonal([v_e1, v_e1], [n, n], [z_e1e2, -z_e1e2]);
    Ok(ClonerState {
        v,
        t,
        n,
        v_e1,
        v_e1_given_a,
        z_e1e2,
        z_e1b: (t * (1.0 - t)).sqrt() * (n - v),
        z_e2b: (1.0 - t).sqrt() * epr,
        v_b: t * v + (1.0 - t) * n,
        gamma_e,
    })
}

impl ClonerState {
    /// Spectrum of `γ_E` from `Δ = V_E1² + N² - 2Z²`, `D = (V_E1 N - Z²)²`.
    pub fn eve_eigenvalues(&self) -> Result<(f64, f64)> {
        let z2 = self.z_e1e2 * self.z_e1e2;
        let delta = self.v_e1 * self.v_e1 + self.n * self.n - 2.0 * z2;
        let det = (self.v_e1 * self.n - z2).powi(2);
        two_mode_closed_form(delta, det)
    }

    /// `S(E)` in bits.
    pub fn entropy(&self) -> Result<f64> {
        let (l1, l2) = self.eve_eigenvalues()?;
        entropy_from_spectrum(&[l1, l2])
    }

    /// Eve's state conditioned on Alice's Q encoding: the E1 Q variance
    /// drops to `V_E1|A`, everything else is unchanged.
    pub fn conditional_on_alice(&self) -> CovarianceMatrix {
        CovarianceMatrix::two_mode_diagonal(
            [self.v_e1_given_a, self.v_e1],
            [self.n, self.n],
            [self.z_e1e2, -self.z_e1e2],
        )
    }

    pub fn conditional_on_alice_eigenvalues(&self) -> Result<(f64, f64)> {
        let z2 = self.z_e1e2 * self.z_e1e2;
        let a = self.v_e1_given_a * self.v_e1 + self.n * self.n - 2.0 * z2;
        let b = (self.v_e1_given_a * self.n - z2) * (self.v_e1 * self.n - z2);
        two_mode_closed_form(a, b)
    }

    /// Diagonal blocks `(F, G, H)` of Eve's state conditioned on Bob's Q
    /// homodyne, each stored as its `(Q, P)` diagonal.
    pub fn conditional_on_bob_blocks(&self) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let vb = self.v_b;
        let f = [self.v_e1 - self.z_e1b * self.z_e1b / vb, self.v_e1];
        let g = [self.n - self.z_e2b * self.z_e2b / vb, self.n];
        let h = [self.z_e1e2 - self.z_e1b * self.z_e2b / vb, -self.z_e1e2];
        (f, g, h)
    }

    pub fn conditional_on_bob(&self) -> CovarianceMatrix {
        let (f, g, h) = self.conditional_on_bob_blocks();
        CovarianceMatrix::two_mode_diagonal(f, g, h)
    }

    /// `C = det F + det G + 2 det H`, `D' = det γ_E^{X_B}`.
    pub fn conditional_on_bob_eigenvalues(&self) -> Result<(f64, f64)> {
        let (f, g, h) = self.conditional_on_bob_blocks();
        let c = f[0] * f[1] + g[0] * g[1] + 2.0 * h[0] * h[1];
        // With all blocks diagonal the determinant factorises per quadrature.
        let d = (f[0] * g[0] - h[0] * h[0]) * (f[1] * g[1] - h[1] * h[1]);
        two_mode_closed_form(c, d)
    }
}

/// Direct reconciliation bound `S(E) - S(E|A)`.
pub fn holevo_ae_cloner(v: f64, t: f64, n: f64) -> Result<f64> {
    let state = eve_covariance(v, t, n)?;
    let (l3, l4) = state.conditional_on_alice_eigenvalues()?;
    Ok(state.entropy()? - entropy_from_spectrum(&[l3, l4])?)
}

/// Reverse reconciliation bound `S(E) - S(E|B)`.
pub fn holevo_be_cloner(v: f64, t: f64, n: f64) -> Result<f64> {
    let state = eve_covariance(v, t, n)?;
    let (l5, l6) = state.conditional_on_bob_eigenvalues()?;
    Ok(state.entropy()? - entropy_from_spectrum(&[l5, l6])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_eigenvalues, von_neumann_entropy};
    use approx::assert_abs_diff_eq;

    #[test]
    fn degenerate_transmission_rejected() {
        assert_eq!(eve_covariance(21.0, 1.0, 2.0), Err(Error::DegenerateChannel(1.0)));
        assert_eq!(eve_covariance(21.0, 0.0, 2.0), Err(Error::DegenerateChannel(0.0)));
        assert!(eve_covariance(0.5, 0.5, 2.0).is_err());
        assert!(holevo_be_cloner(21.0, 1.5, 2.0).is_err());
    }

    #[test]
    fn near_lossless_eve_learns_almost_nothing() {
        let t = 1.0 - 1e-6;
        let state = eve_covariance(21.0, t, 1.5).unwrap();
        assert!(state.entropy().unwrap() < 1e-3);
        assert!(holevo_ae_cloner(21.0, t, 1.5).unwrap().abs() < 1e-3);
        assert!(holevo_be_cloner(21.0, t, 1.5).unwrap().abs() < 1e-3);
    }

    #[test]
    fn vacuum_injection() {
        let (v, t) = (21.0, 0.3);
        let state = eve_covariance(v, t, 1.0).unwrap();
        assert_eq!(state.z_e1e2, 0.0);
        let expected = CovarianceMatrix::two_mode_diagonal(
            [(1.0 - t) * v + t, (1.0 - t) * v + t],
            [1.0, 1.0],
            [0.0, 0.0],
        );
        assert_eq!(state.gamma_e, expected);
    }

    #[test]
    fn closed_form_spectrum_matches_generic_route() {
        for (v, t, n) in [(21.0, 0.5, 2.0), (5.0, 0.1, 1.0), (41.0, 0.9, 4.5), (1.0, 0.4, 1.3)] {
            let state = eve_covariance(v, t, n).unwrap();
            let checks = [
                (state.eve_eigenvalues().unwrap(), state.gamma_e.clone()),
                (state.conditional_on_alice_eigenvalues().unwrap(), state.conditional_on_alice()),
                (state.conditional_on_bob_eigenvalues().unwrap(), state.conditional_on_bob()),
            ];
            for ((lo, hi), cov) in checks {
                let spec = symplectic_eigenvalues(&cov).unwrap();
                assert_abs_diff_eq!(lo, spec.eigenvalues()[0], epsilon = 1e-9);
                assert_abs_diff_eq!(hi, spec.eigenvalues()[1], epsilon = 1e-9);
            }
            let c = state.conditional_on_bob();
            let (_, g, h) = state.conditional_on_bob_blocks();
            assert_abs_diff_eq!(c.get(2, 2), g[0]);
            assert_abs_diff_eq!(c.get(1, 3), h[1]);
            assert_abs_diff_eq!(
                c.determinant(),
                {
                    let (f, g, h) = state.conditional_on_bob_blocks();
                    (f[0] * g[0] - h[0] * h[0]) * (f[1] * g[1] - h[1] * h[1])
                },
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn eve_uncorrelated_with_bob_when_noise_matches_signal() {
        let state = eve_covariance(3.0, 0.4, 3.0).unwrap();
        assert_eq!(state.z_e1b, 0.0);
        let (f, _, _) = state.conditional_on_bob_blocks();
        assert_eq!(f, [state.v_e1, state.v_e1]);
    }

    #[test]
    fn no_modulation_gives_no_direct_information() {
        for t in [0.2, 0.7] {
            assert_abs_diff_eq!(holevo_ae_cloner(1.0, t, 2.0).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eve_state_purifies_alice_and_bob() {
        for (v, t, n) in [(21.0, 0.5, 2.0), (6.0, 0.05, 1.0), (41.0, 0.95, 3.0)] {
            let s_e = eve_covariance(v, t, n).unwrap().entropy().unwrap();
            let s_ab = von_neumann_entropy(&crate::channel::gamma_ab(v, t, n)).unwrap();
            assert_abs_diff_eq!(s_e, s_ab, epsilon = 1e-9);
        }
    }

    #[test]
    fn conditional_states_are_physical() {
        for v in [1.0, 6.0, 21.0, 41.0] {
            for t in [0.05, 0.5, 0.95] {
                for n in [1.0, 1.2, 5.0] {
                    let s = eve_covariance(v, t, n).unwrap();
                    for cov in [s.gamma_e.clone(), s.conditional_on_alice(), s.conditional_on_bob()] {
                        assert!(symplectic_eigenvalues(&cov).unwrap().is_physical(1e-9));
                    }
                }
            }
        }
    }
}
