//! Monte Carlo model of the prepare-and-measure link under the LO intensity
//! attack, and Bob's covariance-based parameter estimation.
//!
//! Homodyne outputs are expressed directly in shot-noise units: the detector
//! gain and the LO amplitude cancel in the normalisation, so only the LO
//! transmission η survives, as a `sqrt(η)` factor on unmonitored outputs.
//!
//! Random draws are produced in fixed-size chunks, each from its own ChaCha
//! stream of the run seed. Chunks may be generated in any order or in
//! parallel and the merged batch is bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{LoMonitoring, ProtocolParams};
use crate::error::{Error, Result};
use crate::gaussian::Quadrature;
use crate::keyrate::{holevo, KeyRateReport};

/// Pulses drawn from one RNG stream.
pub const CHUNK_SIZE: usize = 1 << 16;

/// Smallest sample accepted by [`estimate_channel`].
pub const MIN_ESTIMATION_SAMPLES: usize = 10_000;

/// Alice's encodings and the quantum noise realisations for a run.
///
/// `vacuum` and `eve_unit` are unit-variance draws; the channel scales them
/// when the batch is measured, so one batch can be pushed through different
/// channels with common random numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseBatch {
    pub seed: u64,
    /// Encoded displacement `X_S` of the quadrature Bob measures.
    pub x_alice: Vec<f64>,
    pub quad_choice: Vec<Quadrature>,
    pub vacuum: Vec<f64>,
    pub eve_unit: Vec<f64>,
    pub eta_per_pulse: Vec<f64>,
}

impl PulseBatch {
    pub fn n_pulses(&self) -> usize {
        self.x_alice.len()
    }

    /// Replaces the constant LO transmission with a per-pulse profile.
    pub fn set_eta_per_pulse(&mut self, etas: Vec<f64>) -> Result<()> {
        if etas.len() != self.n_pulses() {
            return Err(Error::Estimation(format!(
                "{} eta values for {} pulses",
                etas.len(),
                self.n_pulses()
            )));
        }
        if let Some(&bad) = etas.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: bad,
                expected: "0 < eta <= 1",
            });
        }
        self.eta_per_pulse = etas;
        Ok(())
    }
}

/// Bob's homodyne record for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub monitoring: LoMonitoring,
    /// Output normalised with the instantaneous LO intensity.
    pub x_bob_raw: Vec<f64>,
    /// What Bob records: equal to `x_bob_raw` when monitored, otherwise
    /// scaled by `sqrt(η)` per pulse.
    pub x_bob: Vec<f64>,
}

/// Channel parameters Bob infers from a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorOutput {
    pub t_hat: f64,
    pub eps_hat: f64,
    pub v_b_hat: f64,
    /// Sample variance of Alice's encodings.
    pub v_s_hat: f64,
    pub n_used: usize,
}

impl EstimatorOutput {
    /// Conditional variance `V_B|A` implied by the estimate.
    pub fn v_b_given_a_hat(&self) -> f64 {
        self.v_b_hat - self.t_hat * self.v_s_hat
    }

    /// `(T, N)` implied by the estimate, clipped to the physical range
    /// `T <= 1`, `N >= 1` before it is used in an entropy bound.
    pub fn implied_channel(&self) -> (f64, f64) {
        let t = self.t_hat.min(1.0);
        let n = if t < 1.0 {
            (1.0 + self.eps_hat * t / (1.0 - t)).max(1.0)
        } else {
            1.0
        };
        (t, n)
    }
}

/// Draws `n` pulses: Gaussian encodings of variance V_S, a uniform quadrature
/// choice, and the vacuum and Eve noise realisations.
pub fn generate_batch(p: &ProtocolParams, n: usize, seed: u64) -> Result<PulseBatch> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_pulses",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    let chunks: Vec<_> = (0..n.div_ceil(CHUNK_SIZE))
        .into_par_iter()
        .map(|k| draw_chunk(p, n, seed, k))
        .collect();

    let mut batch = PulseBatch {
        seed,
        x_alice: Vec::with_capacity(n),
        quad_choice: Vec::with_capacity(n),
        vacuum: Vec::with_capacity(n),
        eve_unit: Vec::with_capacity(n),
        eta_per_pulse: vec![p.lo_transmission(); n],
    };
    for chunk in chunks {
        batch.x_alice.extend(chunk.x_alice);
        batch.quad_choice.extend(chunk.quad_choice);
        batch.vacuum.extend(chunk.vacuum);
        batch.eve_unit.extend(chunk.eve_unit);
    }
    Ok(batch)
}

struct Chunk {
    x_alice: Vec<f64>,
    quad_choice: Vec<Quadrature>,
    vacuum: Vec<f64>,
    eve_unit: Vec<f64>,
}

/// Pulses `[k * CHUNK_SIZE, min((k + 1) * CHUNK_SIZE, n))`, drawn from
/// stream `k` of the seed.
fn draw_chunk(p: &ProtocolParams, n: usize, seed: u64, k: usize) -> Chunk {
    let sigma_s = p.modulation_variance().sqrt();
    let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let mut chunk = Chunk {
        x_alice: Vec::with_capacity(len),
        quad_choice: Vec::with_capacity(len),
        vacuum: Vec::with_capacity(len),
        eve_unit: Vec::with_capacity(len),
    };
    for _ in 0..len {
        let quad = if rng.random::<bool>() { Quadrature::P } else { Quadrature::Q };
        let z: f64 = rng.sample(StandardNormal);
        chunk.x_alice.push(sigma_s * z);
        chunk.quad_choice.push(quad);
        chunk.vacuum.push(rng.sample(StandardNormal));
        chunk.eve_unit.push(rng.sample(StandardNormal));
    }
    chunk
}

struct ChannelMap {
    sqrt_t: f64,
    sqrt_loss: f64,
    sqrt_n: f64,
}

impl ChannelMap {
    fn new(p: &ProtocolParams) -> Self {
        Self {
            sqrt_t: p.transmission().sqrt(),
            sqrt_loss: (1.0 - p.transmission()).sqrt(),
            sqrt_n: p.noise().sqrt(),
        }
    }

    fn apply(&self, xs: f64, vac: f64, eve: f64) -> f64 {
        self.sqrt_t * (xs + vac) + self.sqrt_loss * (self.sqrt_n * eve)
    }
}

/// Sends the batch through a channel of transmission T with Eve's noise of
/// variance N: `x_B = sqrt(T)(X_S + x_vac) + sqrt(1 - T) E`.
pub fn channel_and_measure(
    batch: &PulseBatch,
    p: &ProtocolParams,
    monitoring: LoMonitoring,
) -> Measurements {
    let map = ChannelMap::new(p);
    let x_bob_raw: Vec<f64> = batch
        .x_alice
        .iter()
        .zip(&batch.vacuum)
        .zip(&batch.eve_unit)
        .map(|((&xs, &vac), &e)| map.apply(xs, vac, e))
        .collect();
    let x_bob = match monitoring {
        LoMonitoring::Monitored => x_bob_raw.clone(),
        LoMonitoring::Unmonitored => x_bob_raw
            .iter()
            .zip(&batch.eta_per_pulse)
            .map(|(x, eta)| eta.sqrt() * x)
            .collect(),
    };
    Measurements {
        monitoring,
        x_bob_raw,
        x_bob,
    }
}

/// Running first and second moments of `(X_S, X_B)` pairs.
///
/// Partial moments of disjoint chunks combine exactly with [`Moments::merge`],
/// so a sample can be reduced chunk by chunk in parallel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    mean_s: f64,
    mean_b: f64,
    m2_ss: f64,
    m2_sb: f64,
    m2_bb: f64,
}

impl Moments {
    pub fn from_slices(x_alice: &[f64], x_bob: &[f64]) -> Self {
        let mut m = Self::default();
        for (&s, &b) in x_alice.iter().zip(x_bob) {
            m.push(s, b);
        }
        m
    }

    pub fn push(&mut self, s: f64, b: f64) {
        self.count += 1;
        let n = self.count as f64;
        let ds = s - self.mean_s;
        let db = b - self.mean_b;
        self.mean_s += ds / n;
        self.mean_b += db / n;
        self.m2_ss += ds * (s - self.mean_s);
        self.m2_sb += ds * (b - self.mean_b);
        self.m2_bb += db * (b - self.mean_b);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let ds = other.mean_s - self.mean_s;
        let db = other.mean_b - self.mean_b;
        let w = na * nb / n;
        Self {
            count: self.count + other.count,
            mean_s: self.mean_s + ds * nb / n,
            mean_b: self.mean_b + db * nb / n,
            m2_ss: self.m2_ss + other.m2_ss + ds * ds * w,
            m2_sb: self.m2_sb + other.m2_sb + ds * db * w,
            m2_bb: self.m2_bb + other.m2_bb + db * db * w,
        }
    }

    /// Unbiased `(var S, cov(S, B), var B)`.
    pub fn covariances(&self) -> (f64, f64, f64) {
        let d = self.count as f64 - 1.0;
        (self.m2_ss / d, self.m2_sb / d, self.m2_bb / d)
    }
}

fn chunked_moments(x_alice: &[f64], x_bob: &[f64]) -> Moments {
    let parts: Vec<Moments> = x_alice
        .par_chunks(CHUNK_SIZE)
        .zip(x_bob.par_chunks(CHUNK_SIZE))
        .map(|(s, b)| Moments::from_slices(s, b))
        .collect();
    parts.iter().fold(Moments::default(), |acc, m| acc.merge(m))
}

/// Covariance-based estimate of the channel seen by Bob, assuming unit shot
/// noise: `t = (cov(X_S, X_B)/V_S)²`, `ε = (V_B - t V_S - 1)/t`, where V_S
/// is the sample variance of Alice's encodings.
pub fn estimate_channel(x_alice: &[f64], x_bob: &[f64]) -> Result<EstimatorOutput> {
    estimate_channel_with_shot_noise(x_alice, x_bob, 1.0)
}

pub fn estimate_channel_with_shot_noise(
    x_alice: &[f64],
    x_bob: &[f64],
    shot_noise: f64,
) -> Result<EstimatorOutput> {
    if x_alice.len() != x_bob.len() {
        return Err(Error::Estimation(format!(
            "{} encodings but {} measurements",
            x_alice.len(),
            x_bob.len()
        )));
    }
    estimate_from_moments(&chunked_moments(x_alice, x_bob), shot_noise)
}

pub fn estimate_from_moments(m: &Moments, shot_noise: f64) -> Result<EstimatorOutput> {
    let n = m.count;
    if n < MIN_ESTIMATION_SAMPLES {
        return Err(Error::Estimation(format!(
            "{n} samples, need at least {MIN_ESTIMATION_SAMPLES}"
        )));
    }
    let (v_s, cov, v_b) = m.covariances();
    if !(v_s > 1e-12) {
        return Err(Error::Estimation("Alice's encodings have no variance".into()));
    }
    let gain = cov / v_s;
    let t_hat = gain * gain;
    if !(t_hat > 0.0) {
        return Err(Error::Estimation("no correlation between Alice and Bob".into()));
    }
    Ok(EstimatorOutput {
        t_hat,
        eps_hat: (v_b - t_hat * v_s - shot_noise) / t_hat,
        v_b_hat: v_b,
        v_s_hat: v_s,
        n_used: n,
    })
}

/// Estimates on both the monitored and the unmonitored record of one batch,
/// and the key-rate report they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationOutcome {
    pub monitored: EstimatorOutput,
    pub unmonitored: EstimatorOutput,
    pub report: KeyRateReport,
}

/// Runs `n` pulses with constant η without storing them: each chunk is
/// drawn, measured and reduced to moments. Bit-identical to
/// `simulate_batch(&generate_batch(p, n, seed)?, p)`.
pub fn simulate(p: &ProtocolParams, n: usize, seed: u64) -> Result<SimulationOutcome> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_pulses",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    let map = ChannelMap::new(p);
    let sqrt_eta = p.lo_transmission().sqrt();
    let parts: Vec<(Moments, Moments)> = (0..n.div_ceil(CHUNK_SIZE))
        .into_par_iter()
        .map(|k| {
            let chunk = draw_chunk(p, n, seed, k);
            let mut mon = Moments::default();
            let mut unmon = Moments::default();
            for i in 0..chunk.x_alice.len() {
                let xs = chunk.x_alice[i];
                let raw = map.apply(xs, chunk.vacuum[i], chunk.eve_unit[i]);
                mon.push(xs, raw);
                unmon.push(xs, sqrt_eta * raw);
            }
            (mon, unmon)
        })
        .collect();
    let (mon, unmon) = parts.iter().fold(
        (Moments::default(), Moments::default()),
        |(a, b), (m, u)| (a.merge(m), b.merge(u)),
    );
    outcome_from_estimates(
        p,
        estimate_from_moments(&mon, 1.0)?,
        estimate_from_moments(&unmon, 1.0)?,
    )
}

pub fn simulate_batch(batch: &PulseBatch, p: &ProtocolParams) -> Result<SimulationOutcome> {
    let monitored = estimate_channel(
        &batch.x_alice,
        &channel_and_measure(batch, p, LoMonitoring::Monitored).x_bob,
    )?;
    let unmonitored = estimate_channel(
        &batch.x_alice,
        &channel_and_measure(batch, p, LoMonitoring::Unmonitored).x_bob,
    )?;
    outcome_from_estimates(p, monitored, unmonitored)
}

fn outcome_from_estimates(
    p: &ProtocolParams,
    monitored: EstimatorOutput,
    unmonitored: EstimatorOutput,
) -> Result<SimulationOutcome> {

    let v = monitored.v_s_hat + 1.0;
    let i_ab = 0.5 * (monitored.v_b_hat / monitored.v_b_given_a_hat()).log2();
    let (t_true, n_true) = monitored.implied_channel();
    let (t_pseudo, n_pseudo) = unmonitored.implied_channel();
    let holevo_true = holevo(p.direction(), v, t_true, n_true)?;
    let holevo_pseudo = holevo(p.direction(), v, t_pseudo, n_pseudo)?;
    Ok(SimulationOutcome {
        monitored,
        unmonitored,
        report: KeyRateReport::from_parts(i_ab, holevo_true, holevo_pseudo),
    })
}

/// Key rates computed from simulated data instead of the true parameters.
pub fn simulated_keyrates(p: &ProtocolParams, n: usize, seed: u64) -> Result<KeyRateReport> {
    Ok(simulate(p, n, seed)?.report)
}
