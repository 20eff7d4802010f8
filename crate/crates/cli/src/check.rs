//! Cross-checks the closed-form Holevo bounds against the entangling-cloner
//! derivation on a parameter grid, plus purification, physicality and the
//! η = 1 degeneracy.

use loattack_core::channel::{covariance_ab, gamma_ab};
use loattack_core::cloner::{eve_covariance, holevo_ae_cloner, holevo_be_cloner};
use loattack_core::gaussian::{symplectic_eigenvalues, von_neumann_entropy};
use loattack_core::keyrate::{conditional_a_given_b, conditional_bc_given_a, holevo_ae, holevo_be};
use loattack_core::{keyrates, CovarianceMatrix, LoMonitoring, ProtocolParams};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::grid::axis_values;
use crate::point::params;

pub const EQUIVALENCE_TOL: f64 = 1e-9;
pub const PURIFICATION_TOL: f64 = 1e-9;
pub const PHYSICALITY_TOL: f64 = 1e-9;
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckGrid {
    pub vs: Vec<f64>,
    pub eta: Vec<f64>,
    pub t: Vec<f64>,
}

impl CheckGrid {
    pub fn new(vs: Vec<f64>, eta: Vec<f64>, t_min: f64, t_max: f64, t_step: f64) -> CliResult<Self> {
        let t = axis_values(t_min, t_max, t_step)?;
        if vs.is_empty() || eta.is_empty() {
            return Err(CliError::Config("empty V_S or eta list".into()));
        }
        Ok(Self { vs, eta, t })
    }

    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.vs.len() * self.eta.len() * self.t.len());
        for &vs in &self.vs {
            for &t in &self.t {
                for &eta in &self.eta {
                    out.push((vs, t, eta));
                }
            }
        }
        out
    }
}

impl Default for CheckGrid {
    fn default() -> Self {
        Self::new(vec![1.0, 5.0, 20.0, 40.0], vec![0.85, 0.9, 0.95, 1.0], 0.05, 0.95, 0.05)
            .expect("default grid is valid")
    }
}

/// Every covariance matrix the analysis of channel `(v, t, n)` builds.
pub fn channel_matrices(v: f64, t: f64, n: f64) -> CliResult<Vec<CovarianceMatrix>> {
    let mut out = vec![
        gamma_ab(v, t, n),
        conditional_a_given_b(v, t, n)?,
        conditional_bc_given_a(v, t, n)?,
    ];
    if t < 1.0 {
        let eve = eve_covariance(v, t, n)?;
        out.push(eve.conditional_on_alice());
        out.push(eve.conditional_on_bob());
        out.push(eve.gamma_e);
    }
    Ok(out)
}

/// Matrices for both the true channel and the one Bob infers, plus Bob's
/// unmonitored view of the joint state. That view is a state only when Eve
/// keeps the excess noise Bob sees at or above zero.
pub fn protocol_matrices(p: &ProtocolParams) -> CliResult<Vec<CovarianceMatrix>> {
    let v = p.total_variance();
    let (t, eta) = (p.transmission(), p.lo_transmission());
    let mut out = channel_matrices(v, t, p.noise())?;
    out.extend(channel_matrices(v, eta * t, 1.0)?);
    out.push(covariance_ab(p, LoMonitoring::Unmonitored));
    Ok(out)
}

/// Smallest symplectic eigenvalue over `matrices`.
pub fn min_symplectic(matrices: &[CovarianceMatrix]) -> CliResult<f64> {
    let mut min = f64::INFINITY;
    for m in matrices {
        min = min.min(symplectic_eigenvalues(m)?.min());
    }
    Ok(min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCheck {
    pub vs: f64,
    pub t: f64,
    pub eta: f64,
    pub noise: f64,
    /// max over the true and pseudo channels
    pub dev_be: f64,
    pub dev_ae: f64,
    pub dev_purification: f64,
    pub min_eigenvalue: f64,
    /// `max(|k_pseudo - k_true|, |intercepted|)`, only at η = 1
    pub dev_degeneracy: Option<f64>,
}

impl PointCheck {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.dev_be < EQUIVALENCE_TOL) {
            out.push(format!("chi_BE deviation {:e}", self.dev_be));
        }
        if !(self.dev_ae < EQUIVALENCE_TOL) {
            out.push(format!("chi_AE deviation {:e}", self.dev_ae));
        }
        if !(self.dev_purification <= PURIFICATION_TOL) {
            out.push(format!("purification deviation {:e}", self.dev_purification));
        }
        if !(self.min_eigenvalue >= 1.0 - PHYSICALITY_TOL) {
            out.push(format!("symplectic eigenvalue {}", self.min_eigenvalue));
        }
        if let Some(d) = self.dev_degeneracy {
            if !(d <= DEGENERACY_TOL) {
                out.push(format!("eta = 1 interception {d:e}"));
            }
        }
        out
    }
}

/// `perturb` is added to the cloner-side values to exercise the harness.
pub fn check_point(vs: f64, t: f64, eta: f64, perturb: f64) -> CliResult<PointCheck> {
    let p = params(vs, t, eta, None, loattack_core::Reconciliation::Reverse)?;
    let v = p.total_variance();
    let n = p.noise();
    let mut dev_be = 0.0_f64;
    let mut dev_ae = 0.0_f64;
    let mut dev_purification = 0.0_f64;
    for (tc, nc) in [(t, n), (eta * t, 1.0)] {
        dev_be = dev_be.max((holevo_be(v, tc, nc)? - (holevo_be_cloner(v, tc, nc)? + perturb)).abs());
        dev_ae = dev_ae.max((holevo_ae(v, tc, nc)? - (holevo_ae_cloner(v, tc, nc)? + perturb)).abs());
        let s_e = eve_covariance(v, tc, nc)?.entropy()? + perturb;
        let s_ab = von_neumann_entropy(&gamma_ab(v, tc, nc))?;
        dev_purification = dev_purification.max((s_e - s_ab).abs());
    }
    let min_eigenvalue = min_symplectic(&protocol_matrices(&p)?)?;
    let dev_degeneracy = if eta == 1.0 {
        let mut d = 0.0_f64;
        for dir in [loattack_core::Reconciliation::Direct, loattack_core::Reconciliation::Reverse] {
            let r = keyrates(&p.with_direction(dir))?;
            d = d.max((r.k_pseudo - r.k_true).abs()).max(r.intercepted.abs());
        }
        Some(d)
    } else {
        None
    };
    Ok(PointCheck {
        vs,
        t,
        eta,
        noise: n,
        dev_be,
        dev_ae,
        dev_purification,
        min_eigenvalue,
        dev_degeneracy,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub points: Vec<PointCheck>,
}

impl CheckSummary {
    pub fn max_dev_be(&self) -> f64 {
        self.points.iter().map(|p| p.dev_be).fold(0.0, f64::max)
    }

    pub fn max_dev_ae(&self) -> f64 {
        self.points.iter().map(|p| p.dev_ae).fold(0.0, f64::max)
    }

    pub fn max_dev_purification(&self) -> f64 {
        self.points.iter().map(|p| p.dev_purification).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.points.iter().map(|p| p.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn max_dev_degeneracy(&self) -> f64 {
        self.points.iter().filter_map(|p| p.dev_degeneracy).fold(0.0, f64::max)
    }

    pub fn failing(&self) -> Vec<(&PointCheck, Vec<String>)> {
        self.points
            .iter()
            .map(|p| (p, p.failures()))
            .filter(|(_, f)| !f.is_empty())
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.failures().is_empty())
    }

    pub fn report(&self) -> String {
        let mut s = format!(
            "points checked: {}\n\
             max |chi_BE - chi_BE_cloner|: {:e}\n\
             max |chi_AE - chi_AE_cloner|: {:e}\n\
             max |S(E) - S(AB)|: {:e}\n\
             min symplectic eigenvalue: {}\n\
             max eta = 1 interception: {:e}\n",
            self.points.len(),
            self.max_dev_be(),
            self.max_dev_ae(),
            self.max_dev_purification(),
            self.min_eigenvalue(),
            self.max_dev_degeneracy(),
        );
        for (p, why) in self.failing() {
            s.push_str(&format!(
                "FAIL V_S={} T={} eta={} N={}: {}\n",
                p.vs,
                p.t,
                p.eta,
                p.noise,
                why.join("; ")
            ));
        }
        s
    }
}

pub fn run_check(grid: &CheckGrid, perturb: f64) -> CliResult<CheckSummary> {
    let points = grid
        .points()
        .into_par_iter()
        .map(|(vs, t, eta)| check_point(vs, t, eta, perturb))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(CheckSummary { points })
}
