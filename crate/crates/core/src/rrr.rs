//! Relaxed-reflect-reflect iteration in the lifted measurement space.
//!
//! The iterate `y` lives in `C^{N R}` (section-major). `P1` projects onto
//! the range of the STFT operator for a fixed window. `P2` imposes the
//! measured magnitudes on the masked entries. The update is
//! `y <- y + beta (P1(2 P2 y - y) - P2 y)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambiguity::phase_error;
use crate::error::{Error, Result};
use crate::problem::{cvec, Distribution, ProblemParams, Rng};
use crate::stft::{MeasurementSet, StftOperator};

/// Signal class the range projection assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Complex,
    Real,
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Self::Complex),
            "real" => Ok(Self::Real),
            other => Err(Error::InvalidParams(format!("unknown domain {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Init {
    RandomGaussian,
    Provided(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrrConfig {
    pub beta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub success_tol: f64,
    pub init: Init,
    pub domain: Domain,
}

impl Default for RrrConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            tol: 1e-8,
            max_iter: 10_000,
            success_tol: 1e-4,
            init: Init::RandomGaussian,
            domain: Domain::Real,
        }
    }
}

impl RrrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParams(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.tol > 0.0 && self.success_tol > 0.0) {
            return Err(Error::InvalidParams("tol and success_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrrOutcome {
    pub x_hat: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_step_ratio: f64,
    /// Relative error to the truth, when one was supplied.
    pub error: Option<f64>,
    pub success: Option<bool>,
}

fn least_squares(op: &StftOperator, z: &[Complex64], domain: Domain) -> Vec<Complex64> {
    match domain {
        Domain::Complex => op.pseudo_inverse(z),
        Domain::Real => op.pseudo_inverse_real(z),
    }
}

/// `A A^+ z`.
pub fn project_range(op: &StftOperator, z: &[Complex64], domain: Domain) -> Vec<Complex64> {
    op.apply(&least_squares(op, z, domain))
}

/// Replaces the magnitude of each masked entry, keeping its phase.
pub fn project_magnitudes(z: &[Complex64], params: &ProblemParams, measured: &MeasurementSet) -> Vec<Complex64> {
    let n = params.n();
    let mut out = z.to_vec();
    for ((m, r), mag) in measured.iter() {
        let i = r * n + m;
        let v = z[i];
        let norm = v.norm();
        out[i] = if norm > 0.0 { v * (mag / norm) } else { Complex64::new(mag, 0.0) };
    }
    out
}

/// `A^+ z`.
pub fn recover_signal(op: &StftOperator, z: &[Complex64], domain: Domain) -> Vec<Complex64> {
    least_squares(op, z, domain)
}

/// Runs the iteration for the window `w` and the masked magnitudes.
pub fn rrr_solve(
    params: &ProblemParams,
    w: &[Complex64],
    measured: &MeasurementSet,
    config: &RrrConfig,
    truth: Option<&[Complex64]>,
    rng: &mut Rng,
) -> Result<RrrOutcome> {
    config.validate()?;
    measured.check_grid(params)?;
    let op = StftOperator::new(params, w)?;
    let len = params.grid_size();
    let mut y = match &config.init {
        Init::RandomGaussian => Distribution::ComplexGaussian.vector(len, rng),
        Init::Provided(v) => {
            if v.len() != len {
                return Err(Error::InconsistentShape(format!("start has length {}, expected {len}", v.len())));
            }
            v.clone()
        }
    };

    let mut iterations = 0;
    let mut ratio = f64::INFINITY;
    let mut converged = false;
    while iterations < config.max_iter {
        let p2 = project_magnitudes(&y, params, measured);
        let reflected: Vec<Complex64> = p2.iter().zip(&y).map(|(a, b)| 2.0 * a - b).collect();
        let p1 = project_range(&op, &reflected, config.domain);
        let mut step_sq = 0.0;
        for ((yi, a), b) in y.iter_mut().zip(&p1).zip(&p2) {
            let d = config.beta * (a - b);
            step_sq += d.norm_sqr();
            *yi += d;
        }
        iterations += 1;
        let norm = cvec::norm(&y);
        ratio = step_sq.sqrt() / norm;
        if !ratio.is_finite() {
            break;
        }
        if ratio < config.tol {
            converged = true;
            break;
        }
    }

    let x_hat = recover_signal(&op, &project_magnitudes(&y, params, measured), config.domain);
    let error = truth.map(|t| phase_error(&x_hat, t));
    Ok(RrrOutcome {
        success: error.map(|e| e < config.success_tol),
        x_hat,
        iterations,
        converged,
        final_step_ratio: ratio,
        error,
    })
}
