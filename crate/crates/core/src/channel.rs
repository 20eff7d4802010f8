//! Entanglement-based description of the link: Alice's and Bob's joint
//! covariance, the variances Bob measures with and without tracking the LO
//! intensity, and the noise Eve must inject to zero the excess noise Bob sees.

use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Default fiber attenuation.
pub const DEFAULT_LOSS_DB_PER_KM: f64 = 0.2;

/// Which party's data is the reference for error correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reconciliation {
    #[serde(alias = "dr")]
    Direct,
    #[serde(alias = "rr")]
    Reverse,
}

impl Reconciliation {
    pub fn short_name(self) -> &'static str {
        match self {
            Reconciliation::Direct => "dr",
            Reconciliation::Reverse => "rr",
        }
    }
}

impl std::str::FromStr for Reconciliation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dr" | "direct" => Ok(Reconciliation::Direct),
            "rr" | "reverse" => Ok(Reconciliation::Reverse),
            other => Err(format!("unknown reconciliation direction '{other}' (use dr or rr)")),
        }
    }
}

impl std::fmt::Display for Reconciliation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Whether Bob rescales each pulse by the instantaneous LO intensity
/// (`Monitored`) or by the value calibrated before key distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoMonitoring {
    Monitored,
    Unmonitored,
}

/// One analysis point of the protocol under attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    modulation_variance: f64,
    transmission: f64,
    lo_transmission: f64,
    noise: f64,
    direction: Reconciliation,
}

impl ProtocolParams {
    /// `vs`: modulation variance V_S, `t`: channel transmission T,
    /// `eta`: LO transmission η, `noise`: Eve's injected variance N.
    pub fn new(vs: f64, t: f64, eta: f64, noise: f64, direction: Reconciliation) -> Result<Self> {
        check_range("V_S", vs, vs >= 0.0, "V_S >= 0")?;
        check_range("T", t, t > 0.0 && t <= 1.0, "0 < T <= 1")?;
        check_range("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
        check_range("N", noise, noise >= 1.0, "N >= 1")?;
        Ok(Self {
            modulation_variance: vs,
            transmission: t,
            lo_transmission: eta,
            noise,
            direction,
        })
    }

    /// Attack point where Eve picks N so that Bob, without LO monitoring,
    /// estimates zero excess noise.
    pub fn zero_excess(vs: f64, t: f64, eta: f64, direction: Reconciliation) -> Result<Self> {
        check_range("T", t, t > 0.0 && t <= 1.0, "0 < T <= 1")?;
        check_range("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
        Self::new(vs, t, eta, noise_for_zero_excess(eta, t)?, direction)
    }

    pub fn with_noise(self, noise: f64) -> Result<Self> {
        Self::new(
            self.modulation_variance,
            self.transmission,
            self.lo_transmission,
            noise,
            self.direction,
        )
    }

    pub fn with_direction(mut self, direction: Reconciliation) -> Self {
        self.direction = direction;
        self
    }

    pub fn modulation_variance(&self) -> f64 {
        self.modulation_variance
    }

    /// `V = V_S + 1`.
    pub fn total_variance(&self) -> f64 {
        self.modulation_variance + 1.0
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn lo_transmission(&self) -> f64 {
        self.lo_transmission
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn direction(&self) -> Reconciliation {
        self.direction
    }
}

/// Fiber link of a given length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub distance_km: f64,
    pub loss_db_per_km: f64,
}

impl LinkBudget {
    pub fn new(distance_km: f64, loss_db_per_km: f64) -> Result<Self> {
        check_range("distance_km", distance_km, distance_km >= 0.0, "distance >= 0")?;
        check_range("loss_db_per_km", loss_db_per_km, loss_db_per_km > 0.0, "loss > 0")?;
        Ok(Self {
            distance_km,
            loss_db_per_km,
        })
    }

    pub fn with_default_loss(distance_km: f64) -> Result<Self> {
        Self::new(distance_km, DEFAULT_LOSS_DB_PER_KM)
    }

    pub fn transmission(&self) -> f64 {
        transmission_from_distance(self)
    }
}

/// `T = 10^(-loss * distance / 10)`.
pub fn transmission_from_distance(link: &LinkBudget) -> f64 {
    10f64.powf(-link.loss_db_per_km * link.distance_km / 10.0)
}

/// Bob's measured variance and its conditional on Alice's encoding,
/// `(V_B, V_B|A)`. Without monitoring both pick up a factor η.
pub fn bob_variances(p: &ProtocolParams, monitoring: LoMonitoring) -> (f64, f64) {
    let (t, n, v) = (p.transmission, p.noise, p.total_variance());
    let v_b = t * v + (1.0 - t) * n;
    let v_b_given_a = t + (1.0 - t) * n;
    match monitoring {
        LoMonitoring::Monitored => (v_b, v_b_given_a),
        LoMonitoring::Unmonitored => (p.lo_transmission * v_b, p.lo_transmission * v_b_given_a),
    }
}

/// Joint covariance of Alice's EPR half and the mode reaching Bob, for a
/// lossy channel of transmission `t` with thermal noise `n`:
/// `[[V I, c σz], [c σz, (tV + (1-t)n) I]]`, `c = sqrt(t (V² - 1))`.
pub fn gamma_ab(v: f64, t: f64, n: f64) -> CovarianceMatrix {
    let b = t * v + (1.0 - t) * n;
    let c = (t * (v * v - 1.0)).max(0.0).sqrt();
    CovarianceMatrix::two_mode_diagonal([v, v], [b, b], [c, -c])
}

/// Covariance of Alice's and Bob's modes as Bob would reconstruct it.
pub fn covariance_ab(p: &ProtocolParams, monitoring: LoMonitoring) -> CovarianceMatrix {
    let v = p.total_variance();
    match monitoring {
        LoMonitoring::Monitored => gamma_ab(v, p.transmission, p.noise),
        LoMonitoring::Unmonitored => {
            let eta = p.lo_transmission;
            let (b, _) = bob_variances(p, LoMonitoring::Unmonitored);
            let c = (eta * p.transmission * (v * v - 1.0)).max(0.0).sqrt();
            CovarianceMatrix::two_mode_diagonal([v, v], [b, b], [c, -c])
        }
    }
}

/// Excess noise with LO monitoring, `ε = (1 - T)(N - 1)/T`.
pub fn excess_noise(t: f64, n: f64) -> Result<f64> {
    check_range("T", t, t > 0.0 && t <= 1.0, "0 < T <= 1")?;
    check_range("N", n, n >= 1.0, "N >= 1")?;
    Ok((1.0 - t) * (n - 1.0) / t)
}

/// Excess noise Bob infers without monitoring, `ε^w = ε - (1/η - 1)/T`.
pub fn excess_noise_unmonitored(eps: f64, t: f64, eta: f64) -> Result<f64> {
    check_range("T", t, t > 0.0 && t <= 1.0, "0 < T <= 1")?;
    check_range("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
    check_range("epsilon", eps, true, "finite")?;
    Ok(eps - (1.0 / eta - 1.0) / t)
}

/// Eve's noise variance for which `ε^w = 0`: `N = (1 - ηT)/(η(1 - T))`.
pub fn noise_for_zero_excess(eta: f64, t: f64) -> Result<f64> {
    check_range("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
    check_range("T", t, t > 0.0 && t <= 1.0, "0 < T <= 1")?;
    if t == 1.0 {
        return Err(Error::SingularTuning);
    }
    Ok((1.0 - eta * t) / (eta * (1.0 - t)))
}
