//! Asymptotic key rates from the Alice–Bob covariance matrix.
//!
//! Eve holds the purification of Alice and Bob, so `S(E) = S(AB)`; the
//! conditional entropies follow from the purity of the leftover systems after
//! the reference party's homodyne measurement. Reconciliation is assumed
//! perfect (no β factor).

use serde::Serialize;

use crate::channel::{bob_variances, gamma_ab, LoMonitoring, ProtocolParams, Reconciliation};
use crate::error::{check_range, Result};
use crate::gaussian::{
    beam_splitter, conditional_covariance_homodyne, entropy_from_spectrum, two_mode_closed_form,
    CovarianceMatrix, Quadrature,
};

/// Key rates for one protocol point, all in bits per pulse.
///
/// `k_pseudo` is what Bob computes from unmonitored data; `k_true` is what is
/// actually secure against the attack. Negative rates are kept as-is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateReport {
    pub i_ab: f64,
    pub holevo_true: f64,
    pub holevo_pseudo: f64,
    pub k_true: f64,
    pub k_pseudo: f64,
    /// Key bits Eve holds without being detected, `k_pseudo - k_true`.
    pub intercepted: f64,
    pub secure: bool,
}

impl KeyRateReport {
    pub fn from_parts(i_ab: f64, holevo_true: f64, holevo_pseudo: f64) -> Self {
        let k_true = i_ab - holevo_true;
        let k_pseudo = i_ab - holevo_pseudo;
        Self {
            i_ab,
            holevo_true,
            holevo_pseudo,
            k_true,
            k_pseudo,
            intercepted: k_pseudo - k_true,
            secure: k_true > 0.0,
        }
    }
}

/// Closed-form parameters `(a, b, c)` of `γ_AB(V, T, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AbCoefficients {
    pub fn new(v: f64, t: f64, n: f64) -> Result<Self> {
        check_inputs(v, t, n)?;
        Ok(Self {
            a: v,
            b: t * v + (1.0 - t) * n,
            c: (t * (v * v - 1.0)).sqrt(),
        })
    }

    /// `A = a² + b² - 2c²`.
    fn big_a(&self) -> f64 {
        self.a * self.a + self.b * self.b - 2.0 * self.c * self.c
    }

    /// `B = ab - c²`.
    fn big_b(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }
}

fn check_inputs(v: f64, t: f64, n: f64) -> Result<()> {
    check_range("V", v, v >= 1.0, "V >= 1")?;
    check_range("T", t, t > 0.0 && t <= 1.0, "0 < T <= 1")?;
    check_range("N", n, n >= 1.0, "N >= 1")?;
    Ok(())
}

/// `I_AB = ½ log2(V_B / V_B|A)`; the ratio does not depend on η.
pub fn mutual_info_ab(p: &ProtocolParams) -> f64 {
    mutual_info_ab_with(p, LoMonitoring::Monitored)
}

pub fn mutual_info_ab_with(p: &ProtocolParams, monitoring: LoMonitoring) -> f64 {
    let (v_b, v_b_given_a) = bob_variances(p, monitoring);
    0.5 * (v_b / v_b_given_a).log2()
}

/// Symplectic spectrum `(λ1, λ2)` of `γ_AB`.
pub fn ab_eigenvalues(v: f64, t: f64, n: f64) -> Result<(f64, f64)> {
    let k = AbCoefficients::new(v, t, n)?;
    let b = k.big_b();
    two_mode_closed_form(k.big_a(), b * b)
}

/// `λ3`, the spectrum of Alice's mode after Bob homodynes.
pub fn a_given_b_eigenvalue(v: f64, t: f64, n: f64) -> Result<f64> {
    check_inputs(v, t, n)?;
    let b = t * v + (1.0 - t) * n;
    Ok((((1.0 - t) * n * v * v + t * v) / b).sqrt())
}

/// `γ_A` conditioned on Bob's Q homodyne, via the generic Schur complement.
pub fn conditional_a_given_b(v: f64, t: f64, n: f64) -> Result<CovarianceMatrix> {
    check_inputs(v, t, n)?;
    conditional_covariance_homodyne(&gamma_ab(v, t, n), 1, Quadrature::Q)
}

/// Reverse reconciliation Holevo bound `χ_BE = S(AB) - S(A|X_B)`.
pub fn holevo_be(v: f64, t: f64, n: f64) -> Result<f64> {
    let (l1, l2) = ab_eigenvalues(v, t, n)?;
    let l3 = a_given_b_eigenvalue(v, t, n)?;
    Ok(entropy_from_spectrum(&[l1, l2])? - entropy_from_spectrum(&[l3])?)
}

/// `γ_BC` conditioned on Alice's homodyne after she splits her mode with
/// vacuum on a balanced beam splitter. Mode order `(B, C)`.
pub fn conditional_bc_given_a(v: f64, t: f64, n: f64) -> Result<CovarianceMatrix> {
    let AbCoefficients { a, b, c } = AbCoefficients::new(v, t, n)?;
    let s2 = std::f64::consts::SQRT_2;
    let q_bc = s2 * c / (a + 1.0);
    let p_bc = -c / s2;
    let entries = [
        b - c * c / (a + 1.0), 0.0, q_bc, 0.0, //
        0.0, b, 0.0, p_bc, //
        q_bc, 0.0, 2.0 * a / (a + 1.0), 0.0, //
        0.0, p_bc, 0.0, (a + 1.0) / 2.0,
    ];
    CovarianceMatrix::from_row_slice(4, &entries)
}

/// The same conditional state built by transforming `γ_{A0 B} ⊕ γ_{C0}`
/// with the balanced beam splitter on `(A0, C0)` and homodyning `A`.
pub fn conditional_bc_given_a_from_beam_splitter(
    v: f64,
    t: f64,
    n: f64,
) -> Result<CovarianceMatrix> {
    check_inputs(v, t, n)?;
    // modes: 0 = A0, 1 = B, 2 = C0
    let joint = gamma_ab(v, t, n).direct_sum(&CovarianceMatrix::vacuum(1));
    let mixed = joint.transformed(&beam_splitter(3, 0, 2, 0.5)?)?;
    conditional_covariance_homodyne(&mixed, 0, Quadrature::Q)
}

/// Closed-form `(λ4, λ5)` of [`conditional_bc_given_a`]:
/// `C = (a + bB + A)/(a + 1)`, `D = B(b + B)/(a + 1)`.
pub fn bc_given_a_eigenvalues(v: f64, t: f64, n: f64) -> Result<(f64, f64)> {
    let k = AbCoefficients::new(v, t, n)?;
    let (big_a, big_b) = (k.big_a(), k.big_b());
    let c = (k.a + k.b * big_b + big_a) / (k.a + 1.0);
    let d = big_b * (k.b + big_b) / (k.a + 1.0);
    two_mode_closed_form(c, d)
}

/// Direct reconciliation Holevo bound `χ_AE = S(AB) - S(BC|X_A)`.
pub fn holevo_ae(v: f64, t: f64, n: f64) -> Result<f64> {
    let (l1, l2) = ab_eigenvalues(v, t, n)?;
    let (l4, l5) = bc_given_a_eigenvalues(v, t, n)?;
    Ok(entropy_from_spectrum(&[l1, l2])? - entropy_from_spectrum(&[l4, l5])?)
}

pub fn holevo(direction: Reconciliation, v: f64, t: f64, n: f64) -> Result<f64> {
    match direction {
        Reconciliation::Direct => holevo_ae(v, t, n),
        Reconciliation::Reverse => holevo_be(v, t, n),
    }
}

/// True and pseudo key rates. The pseudo bound is what Bob computes from
/// his unmonitored estimate, i.e. a channel of transmission ηT with no
/// excess noise.
pub fn keyrates(p: &ProtocolParams) -> Result<KeyRateReport> {
    let v = p.total_variance();
    let (t, eta, n) = (p.transmission(), p.lo_transmission(), p.noise());
    let holevo_true = holevo(p.direction(), v, t, n)?;
    let holevo_pseudo = holevo(p.direction(), v, eta * t, 1.0)?;
    Ok(KeyRateReport::from_parts(mutual_info_ab(p), holevo_true, holevo_pseudo))
}
