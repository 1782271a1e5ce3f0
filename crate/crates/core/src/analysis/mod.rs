//! Error metrics, theoretical bounds, a brute-force oracle and parameter sweeps.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{max_abs, norm_sq};
use crate::quant::Alphabet;
use crate::shape::{filtered_error_norm, QuantRun, ShapeError};
use crate::spectral::{gft, FilterColumns, SpectralBasis, SpectralError};

mod sweep;

pub use sweep::{
    algorithm_seed, make_row, run_method, summarize, sweep_bandwidth, sweep_iterations, MPolicy, Method,
    ResultRow, RowContext, RunSettings, SummaryRow, SweepSpec, RESULTS_HEADER,
};

/// Largest number of candidates [`brute_force_optimum`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Failure probability used for bound columns when none is configured.
pub const DEFAULT_FAIL_PROB: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid bound parameters: {0}")]
    InvalidBound(String),
    #[error("brute force over {0} candidates exceeds the limit of 1e6")]
    SearchTooLarge(u128),
    #[error("brute force needs a finite alphabet")]
    InfiniteAlphabet,
    #[error("invalid M policy `{0}` (expected NlogN, <k>NlogN or an integer)")]
    BadPolicy(String),
    #[error("sweep needs at least one {0}")]
    EmptySweep(&'static str),
    #[error("bandwidth r = {r} exceeds N = {n}")]
    BandwidthTooLarge { r: usize, n: usize },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Error metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `||f_q - f||^2 / ||f||^2`.
    pub relative_l2_sq: f64,
    /// `||f_q - f||_inf`.
    pub linf: f64,
    /// `||L f_q - L f||^2 / ||L f||^2`.
    pub lowpass_relative_l2_sq: f64,
    /// `||L f_q - L f||_inf`.
    pub lowpass_linf: f64,
    /// `|GFT(f - s q)|` with `s` the run's reconstruction scale.
    pub error_spectrum: Vec<f64>,
    /// Share of the error spectrum's energy in the first `r` frequencies.
    pub inband_energy_fraction: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn error_report<F: FilterColumns + ?Sized>(
    basis: &SpectralBasis,
    filter: &F,
    f: &[f64],
    run: &QuantRun,
) -> Result<ErrorReport, AnalysisError> {
    let n = basis.n();
    for (what, got) in [
        ("filter", filter.n_vertices()),
        ("signal", f.len()),
        ("q", run.q.len()),
        ("f_q", run.f_q.len()),
    ] {
        if got != n {
            return Err(AnalysisError::DimensionMismatch { what, expected: n, got });
        }
    }
    let bandwidth = filter.bandwidth();
    let diff: Vec<f64> = run.f_q.iter().zip(f).map(|(a, b)| a - b).collect();
    let lf = filter.lowpass(f);
    let ldiff = filter.lowpass(&diff);
    let residual: Vec<f64> = f.iter().zip(&run.q).map(|(a, b)| a - run.scale * b).collect();
    let error_spectrum: Vec<f64> = gft(basis, &residual)?.into_iter().map(f64::abs).collect();
    let total: f64 = error_spectrum.iter().map(|x| x * x).sum();
    let inband: f64 = error_spectrum[..bandwidth].iter().map(|x| x * x).sum();
    Ok(ErrorReport {
        relative_l2_sq: ratio(norm_sq(&diff), norm_sq(f)),
        linf: max_abs(&diff),
        lowpass_relative_l2_sq: ratio(norm_sq(&ldiff), norm_sq(&lf)),
        lowpass_linf: max_abs(&ldiff),
        error_spectrum,
        inband_energy_fraction: if total > 0.0 { (inband / total).min(1.0) } else { 0.0 },
    })
}

/// Which closed form [`theorem1_bound_form`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundForm {
    /// `C mu^2 r^2 ln^2(r / p) / M`.
    #[default]
    Statement,
    /// `C mu^2 r^2 ln((r + 1) / p) / M`.
    ProofChain,
}

/// Inputs of the relative-error bound for sampling with replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub c: f64,
    pub mu: f64,
    pub r: usize,
    pub m: usize,
    pub fail_prob: f64,
}

impl BoundParams {
    /// `C = 1` and the default failure probability.
    pub fn new(mu: f64, r: usize, m: usize) -> Self {
        Self {
            c: 1.0,
            mu,
            r,
            m,
            fail_prob: DEFAULT_FAIL_PROB,
        }
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |msg: String| Err(AnalysisError::InvalidBound(msg));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("C must be positive, got {}", self.c));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if self.r == 0 || self.m == 0 {
            return bad("r and M must be positive".into());
        }
        if !(self.fail_prob > 0.0 && self.fail_prob < 1.0) {
            return bad(format!("fail_prob must lie in (0, 1), got {}", self.fail_prob));
        }
        if self.r as f64 / self.fail_prob <= 1.0 {
            return bad("r / fail_prob must exceed 1".into());
        }
        Ok(())
    }
}

pub fn theorem1_bound(p: &BoundParams) -> Result<f64, AnalysisError> {
    theorem1_bound_form(p, BoundForm::Statement)
}

pub fn theorem1_bound_form(p: &BoundParams, form: BoundForm) -> Result<f64, AnalysisError> {
    p.validate()?;
    let r = p.r as f64;
    let log = match form {
        BoundForm::Statement => (r / p.fail_prob).ln().powi(2),
        BoundForm::ProofChain => ((r + 1.0) / p.fail_prob).ln(),
    };
    Ok(p.c * p.mu * p.mu * r * r * log / p.m as f64)
}

/// `N / (r mu)`, the smallest `||f||^2` a bandlimited signal with `||f||_inf = 1` can have.
pub fn signal_norm_lower_bound(n: usize, r: usize, mu: f64) -> f64 {
    n as f64 / (r as f64 * mu)
}

/// Exhaustive minimizer of `||L(f - q)||` over `A^N`.
///
/// Candidates are enumerated in lexicographic order of `q` (levels ascending)
/// and only a strictly smaller objective replaces the incumbent, so ties go to
/// the lexicographically smallest vector.
pub fn brute_force_optimum<F: FilterColumns + ?Sized>(
    filter: &F,
    f: &[f64],
    alphabet: &Alphabet,
) -> Result<(Vec<f64>, f64), AnalysisError> {
    let n = filter.n_vertices();
    if f.len() != n {
        return Err(AnalysisError::DimensionMismatch {
            what: "signal",
            expected: n,
            got: f.len(),
        });
    }
    let levels = alphabet.levels().ok_or(AnalysisError::InfiniteAlphabet)?;
    let total = (levels.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > BRUTE_FORCE_LIMIT as u128 {
        return Err(AnalysisError::SearchTooLarge(total));
    }
    let mut idx = vec![0usize; n];
    let mut q: Vec<f64> = vec![levels[0]; n];
    let mut best = (q.clone(), filtered_error_norm(filter, f, &q));
    loop {
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < levels.len() {
                q[pos] = levels[idx[pos]];
                break;
            }
            idx[pos] = 0;
            q[pos] = levels[0];
        }
        let obj = filtered_error_norm(filter, f, &q);
        if obj < best.1 {
            best = (q.clone(), obj);
        }
    }
}
