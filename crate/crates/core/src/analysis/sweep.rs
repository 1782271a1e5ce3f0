use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{error_report, theorem1_bound, AnalysisError, BoundParams, ErrorReport, DEFAULT_FAIL_PROB};
use crate::graph::Graph;
use crate::quant::{bit_accounting, Alphabet};
use crate::rng::derive_seed;
use crate::shape::{
    quantize_msq, quantize_permutation, quantize_sssr, Algorithm, InitKind, QuantRun, RefineOptions,
    DEFAULT_EPOCHS,
};
use crate::spectral::{
    bandlimited_filter, incoherence, random_bandlimited, BandlimitedFilter, FilterColumns, SpectralBasis,
};

/// Column order of the long-format results table.
pub const RESULTS_HEADER: &str = "graph,algorithm,alphabet,r,M,T,seed,relative_l2_sq,linf,\
lowpass_relative_l2_sq,inband_energy_fraction,bound_c1,epochs_used,distinct_levels";

/// Number of sampling steps for SSSR as a function of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MPolicy {
    /// `round(N ln N)`.
    #[default]
    NLogN,
    /// `round(k N ln N)`.
    Scaled(f64),
    Fixed(usize),
}

impl MPolicy {
    pub fn resolve(&self, n: usize) -> usize {
        let nln = n as f64 * (n as f64).ln();
        match *self {
            Self::NLogN => nln.round().max(1.0) as usize,
            Self::Scaled(k) => (k * nln).round().max(1.0) as usize,
            Self::Fixed(m) => m,
        }
    }
}

impl FromStr for MPolicy {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || AnalysisError::BadPolicy(s.to_string());
        if let Ok(m) = t.parse::<usize>() {
            return if m == 0 { Err(bad()) } else { Ok(Self::Fixed(m)) };
        }
        let lower = t.to_ascii_lowercase();
        let prefix = lower.strip_suffix("nlogn").ok_or_else(bad)?;
        let prefix = prefix.trim_end_matches('*').trim();
        if prefix.is_empty() {
            return Ok(Self::NLogN);
        }
        match prefix.parse::<f64>() {
            Ok(k) if k > 0.0 && k.is_finite() => Ok(Self::Scaled(k)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NLogN => f.write_str("NlogN"),
            Self::Scaled(k) => write!(f, "{k}NlogN"),
            Self::Fixed(m) => write!(f, "{m}"),
        }
    }
}

/// An algorithm paired with the alphabet it quantizes to.
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub algorithm: Algorithm,
    pub alphabet: Alphabet,
}

/// Everything a sweep needs besides the graph and the swept axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub graph_name: String,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub m_policy: MPolicy,
    pub fail_prob: f64,
    pub check_monotone: bool,
}

impl SweepSpec {
    pub fn new(graph_name: impl Into<String>, methods: Vec<Method>, seeds: Vec<u64>) -> Self {
        Self {
            graph_name: graph_name.into(),
            methods,
            seeds,
            epochs: DEFAULT_EPOCHS,
            m_policy: MPolicy::NLogN,
            fail_prob: DEFAULT_FAIL_PROB,
            check_monotone: cfg!(debug_assertions),
        }
    }
}

/// One row of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub graph: String,
    pub algorithm: Algorithm,
    pub alphabet: String,
    pub r: usize,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub seed: u64,
    pub relative_l2_sq: f64,
    pub linf: f64,
    pub lowpass_relative_l2_sq: f64,
    pub inband_energy_fraction: f64,
    pub bound_c1: Option<f64>,
    pub epochs_used: usize,
    pub distinct_levels: usize,
}

/// Mean and spread across seeds of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub graph: String,
    pub algorithm: Algorithm,
    pub alphabet: String,
    pub r: usize,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub seeds: usize,
    pub mean_relative_l2_sq: f64,
    pub std_relative_l2_sq: f64,
    pub mean_lowpass_relative_l2_sq: f64,
    pub std_lowpass_relative_l2_sq: f64,
    pub mean_linf: f64,
    pub mean_inband_energy_fraction: f64,
    pub bound_c1: Option<f64>,
}

struct Band {
    r: usize,
    filter: BandlimitedFilter,
    mu: f64,
}

struct Cell<'a> {
    band: &'a Band,
    method: &'a Method,
    seed: u64,
    m: Option<usize>,
}

fn validate(spec: &SweepSpec, n: usize, bands: &[usize]) -> Result<(), AnalysisError> {
    if spec.methods.is_empty() {
        return Err(AnalysisError::EmptySweep("method"));
    }
    if spec.seeds.is_empty() {
        return Err(AnalysisError::EmptySweep("seed"));
    }
    if bands.is_empty() {
        return Err(AnalysisError::EmptySweep("bandwidth"));
    }
    if let Some(&r) = bands.iter().find(|&&r| r == 0 || r > n) {
        return Err(AnalysisError::BandwidthTooLarge { r, n });
    }
    Ok(())
}

fn prepare(basis: &SpectralBasis, r: usize) -> Result<Band, AnalysisError> {
    let filter = bandlimited_filter(basis, r)?;
    let mu = incoherence(&filter).mu;
    Ok(Band { r, filter, mu })
}

/// Knobs of a single quantization run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub epochs: usize,
    /// Sample count for SSSR.
    pub samples: usize,
    pub check_monotone: bool,
}

/// Seed of the algorithm's own randomness for a cell whose signal uses `seed`.
pub fn algorithm_seed(seed: u64) -> u64 {
    derive_seed(seed, 1)
}

/// Runs one method on `f`; `seed` drives the permutation or the sampling.
pub fn run_method<F: FilterColumns + ?Sized>(
    graph: &Graph,
    filter: &F,
    f: &[f64],
    method: &Method,
    settings: &RunSettings,
    seed: u64,
) -> Result<QuantRun, AnalysisError> {
    let alphabet = &method.alphabet;
    let opts = RefineOptions {
        max_epochs: settings.epochs,
        check_monotone: settings.check_monotone,
        record_trace: false,
    };
    let perm = |init| quantize_permutation(graph, filter, f, alphabet, init, seed, &opts);
    Ok(match method.algorithm {
        Algorithm::Msq => quantize_msq(filter, f, alphabet)?,
        Algorithm::Sss => perm(InitKind::Sss)?,
        Algorithm::Sdw => perm(InitKind::Sdw)?,
        Algorithm::Perm => perm(InitKind::Msq)?,
        Algorithm::Sssr => quantize_sssr(filter, f, alphabet, settings.samples, seed)?,
    })
}

/// Context shared by the rows of one `(graph, r)` cell.
#[derive(Debug, Clone, Copy)]
pub struct RowContext<'a> {
    pub graph: &'a str,
    pub r: usize,
    pub mu: f64,
    pub fail_prob: f64,
    pub epochs: usize,
}

/// Table row for a finished run. SSSR rows carry `M` and the bound with
/// `C = 1`; permutation rows carry `T`.
pub fn make_row(
    ctx: &RowContext,
    alphabet: &Alphabet,
    seed: u64,
    run: &QuantRun,
    report: &ErrorReport,
) -> Result<ResultRow, AnalysisError> {
    let m = (run.algorithm == Algorithm::Sssr).then(|| run.q_tilde.as_ref().map_or(0, Vec::len));
    let bound_c1 = match m {
        Some(m) => Some(theorem1_bound(&BoundParams {
            c: 1.0,
            mu: ctx.mu,
            r: ctx.r,
            m,
            fail_prob: ctx.fail_prob,
        })?),
        None => None,
    };
    let permutes = matches!(run.algorithm, Algorithm::Sss | Algorithm::Sdw | Algorithm::Perm);
    Ok(ResultRow {
        graph: ctx.graph.to_string(),
        algorithm: run.algorithm,
        alphabet: alphabet.to_string(),
        r: ctx.r,
        m,
        t: permutes.then_some(ctx.epochs),
        seed,
        relative_l2_sq: report.relative_l2_sq,
        linf: report.linf,
        lowpass_relative_l2_sq: report.lowpass_relative_l2_sq,
        inband_energy_fraction: report.inband_energy_fraction,
        bound_c1,
        epochs_used: run.epochs_used,
        distinct_levels: bit_accounting(&run.q).distinct_levels,
    })
}

fn run_cell(graph: &Graph, basis: &SpectralBasis, spec: &SweepSpec, cell: &Cell) -> Result<ResultRow, AnalysisError> {
    let Band { r, filter, mu } = cell.band;
    let f = random_bandlimited(filter, cell.seed)?;
    let settings = RunSettings {
        epochs: spec.epochs,
        samples: cell.m.unwrap_or_else(|| spec.m_policy.resolve(graph.n_vertices())),
        check_monotone: spec.check_monotone,
    };
    let run = run_method(graph, filter, &f, cell.method, &settings, algorithm_seed(cell.seed))?;
    let report = error_report(basis, filter, &f, &run)?;
    let ctx = RowContext {
        graph: &spec.graph_name,
        r: *r,
        mu: *mu,
        fail_prob: spec.fail_prob,
        epochs: spec.epochs,
    };
    make_row(&ctx, &cell.method.alphabet, cell.seed, &run, &report)
}

fn run_cells(graph: &Graph, basis: &SpectralBasis, spec: &SweepSpec, cells: &[Cell]) -> Result<Vec<ResultRow>, AnalysisError> {
    let mut rows = cells
        .par_iter()
        .map(|c| run_cell(graph, basis, spec, c))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| {
        (a.r, a.m, a.algorithm, &a.alphabet, a.seed)
            .cmp(&(b.r, b.m, b.algorithm, &b.alphabet, b.seed))
    });
    Ok(rows)
}

fn check_dims(graph: &Graph, basis: &SpectralBasis) -> Result<(), AnalysisError> {
    if graph.n_vertices() != basis.n() {
        return Err(AnalysisError::DimensionMismatch {
            what: "basis",
            expected: graph.n_vertices(),
            got: basis.n(),
        });
    }
    Ok(())
}

/// Runs every method on a fresh bandlimited signal for each `(r, seed)`.
///
/// The signal for seed `s` is drawn from `s` itself and the algorithm's
/// randomness from an independent stream derived from `s`, so all methods see
/// the same signal. Cells run in parallel; rows come back sorted by
/// `(r, M, algorithm, alphabet, seed)`.
pub fn sweep_bandwidth(
    graph: &Graph,
    basis: &SpectralBasis,
    spec: &SweepSpec,
    r_list: &[usize],
) -> Result<Vec<ResultRow>, AnalysisError> {
    check_dims(graph, basis)?;
    validate(spec, graph.n_vertices(), r_list)?;
    let bands = r_list.iter().map(|&r| prepare(basis, r)).collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<Cell> = bands
        .iter()
        .flat_map(|band| {
            spec.methods.iter().flat_map(move |method| {
                spec.seeds.iter().map(move |&seed| Cell { band, method, seed, m: None })
            })
        })
        .collect();
    run_cells(graph, basis, spec, &cells)
}

/// Runs the SSSR methods of `spec` at fixed bandwidth for every `M` in `m_list`.
/// Other methods are ignored.
pub fn sweep_iterations(
    graph: &Graph,
    basis: &SpectralBasis,
    spec: &SweepSpec,
    r: usize,
    m_list: &[usize],
) -> Result<Vec<ResultRow>, AnalysisError> {
    check_dims(graph, basis)?;
    validate(spec, graph.n_vertices(), &[r])?;
    if m_list.is_empty() || m_list.contains(&0) {
        return Err(AnalysisError::EmptySweep("positive M"));
    }
    let methods: Vec<&Method> = spec.methods.iter().filter(|m| m.algorithm == Algorithm::Sssr).collect();
    if methods.is_empty() {
        return Err(AnalysisError::EmptySweep("SSSR method"));
    }
    let band = prepare(basis, r)?;
    let mut cells = Vec::new();
    for &m in m_list {
        for method in &methods {
            for &seed in &spec.seeds {
                cells.push(Cell {
                    band: &band,
                    method,
                    seed,
                    m: Some(m),
                });
            }
        }
    }
    run_cells(graph, basis, spec, &cells)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups rows by everything except the seed; arithmetic mean and sample
/// standard deviation per group, in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let key = |r: &ResultRow| (r.graph.clone(), r.algorithm, r.alphabet.clone(), r.r, r.m, r.t);
    let mut groups: Vec<(_, Vec<&ResultRow>)> = Vec::new();
    for row in rows {
        let k = key(row);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(row),
            None => groups.push((k, vec![row])),
        }
    }
    groups
        .into_iter()
        .map(|((graph, algorithm, alphabet, r, m, t), members)| {
            let col = |f: fn(&ResultRow) -> f64| members.iter().map(|row| f(row)).collect::<Vec<_>>();
            let (mean_rel, std_rel) = mean_std(&col(|x| x.relative_l2_sq));
            let (mean_low, std_low) = mean_std(&col(|x| x.lowpass_relative_l2_sq));
            SummaryRow {
                graph,
                algorithm,
                alphabet,
                r,
                m,
                t,
                seeds: members.len(),
                mean_relative_l2_sq: mean_rel,
                std_relative_l2_sq: std_rel,
                mean_lowpass_relative_l2_sq: mean_low,
                std_lowpass_relative_l2_sq: std_low,
                mean_linf: mean_std(&col(|x| x.linf)).0,
                mean_inband_energy_fraction: mean_std(&col(|x| x.inband_energy_fraction)).0,
                bound_c1: members[0].bound_c1,
            }
        })
        .collect()
}
