//! Noise-shaping quantizers.
//!
//! Every routine works on a [`FilterColumns`] view of the low-pass filter and
//! keeps its state in the filter's column coordinates (`r`-dimensional for the
//! compact [`BandlimitedFilter`](crate::spectral::BandlimitedFilter)).
//!
//! * [`init_sss`]: one greedy pass along a vertex order.
//! * [`init_sdw`]: breadth-first pass from a maximum-degree vertex, feeding each
//!   vertex the weighted average of its quantized neighbours' states.
//! * [`refine_permutation`]: repeated coordinate-wise argmin sweeps along a fixed
//!   order until nothing changes.
//! * [`quantize_sssr`]: greedy quantization of uniformly sampled vertices (with
//!   replacement) followed by per-vertex aggregation.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{axpy, dot, max_abs, norm_sq};
use crate::quant::Alphabet;
use crate::rng::Rng;
use crate::spectral::FilterColumns;

/// Epoch budget used when none is given.
pub const DEFAULT_EPOCHS: usize = 10;

/// Columns with squared norm at or below this are treated as zero: the vertex
/// is rounded directly and the state is left untouched.
pub const ZERO_COLUMN_TOL: f64 = 1e-20;

/// Slack allowed when checking that a greedy update did not increase the objective.
pub const MONOTONICITY_TOL: f64 = 1e-9;

static MONOTONICITY_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Process-wide count of greedy updates that increased `||L(f - q)||` by more
/// than [`MONOTONICITY_TOL`], over all checked refinement runs.
pub fn monotonicity_violations() -> usize {
    MONOTONICITY_VIOLATIONS.load(Ordering::Relaxed)
}

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("vertex order is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("signal entry {0} is not finite")]
    NonFinite(usize),
    #[error("epoch budget must be at least 1")]
    NoEpochs,
    #[error("sample count M must be at least 1")]
    NoSamples,
    #[error("hop budget s_max must be at least 1")]
    NoHops,
    #[error("visit index {index} out of range for {n} vertices")]
    VisitOutOfRange { index: usize, n: usize },
}

/// Algorithm tag carried by a [`QuantRun`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Memoryless rounding.
    #[serde(rename = "MSQ")]
    Msq,
    /// Permutation refinement after a step-by-step-serving initialization.
    #[serde(rename = "SSS")]
    Sss,
    /// Permutation refinement after a sigma-delta-weights initialization.
    #[serde(rename = "SDW")]
    Sdw,
    /// Permutation refinement started from memoryless rounding.
    #[serde(rename = "PERM")]
    Perm,
    /// Step-by-step serving with replacement.
    #[serde(rename = "SSSR")]
    Sssr,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Msq => "MSQ",
            Self::Sss => "SSS",
            Self::Sdw => "SDW",
            Self::Perm => "PERM",
            Self::Sssr => "SSSR",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "MSQ" => Ok(Self::Msq),
            "SSS" => Ok(Self::Sss),
            "SDW" => Ok(Self::Sdw),
            "PERM" => Ok(Self::Perm),
            "SSSR" => Ok(Self::Sssr),
            _ => Err(format!("unknown algorithm `{s}` (MSQ, SSS, SDW, PERM, SSSR)")),
        }
    }
}

/// Initialization fed to [`refine_permutation`] by [`quantize_permutation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Msq,
    Sss,
    Sdw,
}

impl InitKind {
    fn tag(self) -> Algorithm {
        match self {
            Self::Msq => Algorithm::Perm,
            Self::Sss => Algorithm::Sss,
            Self::Sdw => Algorithm::Sdw,
        }
    }
}

/// Output of one quantization run.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantRun {
    pub algorithm: Algorithm,
    /// Quantized samples (aggregated per vertex for SSSR).
    pub q: Vec<f64>,
    /// Reconstruction `scale * L q`.
    pub f_q: Vec<f64>,
    /// `N / M` for SSSR, `1` otherwise.
    pub scale: f64,
    pub epochs_used: usize,
    pub changed_last_epoch: bool,
    /// Final state `sum_j l_j (f_j - q_j)` over the defining index set, in
    /// filter coordinates.
    pub state: Vec<f64>,
    pub state_norm_trace: Option<Vec<f64>>,
    pub rng_seed: Option<u64>,
    /// Per-step quantized values (SSSR).
    pub q_tilde: Option<Vec<f64>>,
    /// Sampled vertex per step (SSSR).
    pub visits: Option<Vec<usize>>,
    /// Number of single-coordinate updates that increased the objective
    /// (only counted when checks are enabled).
    pub monotonicity_violations: usize,
}

impl QuantRun {
    /// `scale * q`, the vertex-domain signal whose low-pass image is `f_q`.
    pub fn effective_q(&self) -> Vec<f64> {
        self.q.iter().map(|x| x * self.scale).collect()
    }
}

fn check_signal<F: FilterColumns + ?Sized>(filter: &F, f: &[f64]) -> Result<(), ShapeError> {
    let n = filter.n_vertices();
    if f.len() != n {
        return Err(ShapeError::LengthMismatch {
            what: "signal",
            expected: n,
            got: f.len(),
        });
    }
    if let Some(i) = f.iter().position(|x| !x.is_finite()) {
        return Err(ShapeError::NonFinite(i));
    }
    if max_abs(f) > 1.0 {
        log::warn!("signal has sup norm {} > 1", max_abs(f));
    }
    Ok(())
}

fn check_order(order: &[usize], n: usize) -> Result<(), ShapeError> {
    if order.len() != n {
        return Err(ShapeError::NotAPermutation(n));
    }
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n || seen[k] {
            return Err(ShapeError::NotAPermutation(n));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Greedy choice for vertex `k` given state `u` (which must exclude `k`'s own term).
#[inline]
fn greedy_level<F: FilterColumns + ?Sized>(filter: &F, alphabet: &Alphabet, f_k: f64, k: usize, u: &[f64]) -> f64 {
    let sq = filter.column_sq_norm(k);
    if sq <= ZERO_COLUMN_TOL {
        return alphabet.quantize_finite(f_k);
    }
    alphabet.quantize_finite(f_k + dot(filter.column(k), u) / sq)
}

/// `sum_j l_j (f_j - q_j)` in filter coordinates.
pub fn filtered_residual<F: FilterColumns + ?Sized>(filter: &F, f: &[f64], q: &[f64]) -> Vec<f64> {
    let diff: Vec<f64> = f.iter().zip(q).map(|(a, b)| a - b).collect();
    filter.coefficients(&diff)
}

/// `||L (f - q)||_2`.
pub fn filtered_error_norm<F: FilterColumns + ?Sized>(filter: &F, f: &[f64], q: &[f64]) -> f64 {
    norm_sq(&filtered_residual(filter, f, q)).sqrt()
}

/// Step-by-step serving: one greedy pass along `order`, starting from a zero
/// state. Returns `q` and the final state.
pub fn init_sss<F: FilterColumns + ?Sized>(
    filter: &F,
    f: &[f64],
    order: &[usize],
    alphabet: &Alphabet,
) -> Result<(Vec<f64>, Vec<f64>), ShapeError> {
    check_signal(filter, f)?;
    let n = filter.n_vertices();
    check_order(order, n)?;
    let mut q = vec![0.0; n];
    let mut u = vec![0.0; filter.dim()];
    for &k in order {
        q[k] = greedy_level(filter, alphabet, f[k], k, &u);
        if filter.column_sq_norm(k) > ZERO_COLUMN_TOL {
            axpy(f[k] - q[k], filter.column(k), &mut u);
        }
    }
    Ok((q, u))
}

/// Sigma-delta-weights initialization.
///
/// Starts at a maximum-degree vertex (smallest index on ties) and walks its
/// hop sets `T_1, ..., T_s` with `s = min(s_max, eccentricity)`; `s_max = None`
/// means the eccentricity. Inside each hop set, vertices with more quantized
/// neighbours go first (smaller index on ties). Vertex `j` is quantized as
/// `Q(f_j + a_j)` with `a_j` the `W`-weighted average of the scalar states of
/// its already quantized neighbours (0 if there are none), and its own state
/// becomes `a_j + f_j - q_j`. Vertices left over (disconnected graphs or a
/// small `s_max`) are handled by restarting from the maximum-degree
/// unquantized vertex. Every vertex is quantized exactly once.
///
/// Returns `q` and the per-vertex scalar states.
pub fn init_sdw(
    graph: &Graph,
    f: &[f64],
    alphabet: &Alphabet,
    s_max: Option<usize>,
) -> Result<(Vec<f64>, Vec<f64>), ShapeError> {
    let n = graph.n_vertices();
    if f.len() != n {
        return Err(ShapeError::LengthMismatch {
            what: "signal",
            expected: n,
            got: f.len(),
        });
    }
    if let Some(i) = f.iter().position(|x| !x.is_finite()) {
        return Err(ShapeError::NonFinite(i));
    }
    if s_max == Some(0) {
        return Err(ShapeError::NoHops);
    }
    let mut q = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut done = vec![false; n];
    let mut count = 0;

    let visit = |j: usize, done: &mut Vec<bool>, q: &mut Vec<f64>, u: &mut Vec<f64>| {
        let (mut wsum, mut acc) = (0.0, 0.0);
        for &k in graph.neighbors(j) {
            if done[k] {
                let w = graph.weight(j, k);
                wsum += w;
                acc += w * u[k];
            }
        }
        let avg = if wsum > 0.0 { acc / wsum } else { 0.0 };
        q[j] = alphabet.quantize_finite(f[j] + avg);
        u[j] = avg + f[j] - q[j];
        done[j] = true;
    };

    while count < n {
        let start = graph
            .max_degree_vertex((0..n).filter(|&v| !done[v]))
            .expect("unquantized vertex exists");
        visit(start, &mut done, &mut q, &mut u);
        count += 1;
        let dist = graph.bfs_distances(start);
        let ecc = dist.iter().flatten().copied().max().unwrap_or(0);
        let hops = s_max.map_or(ecc, |s| s.min(ecc));
        let mut layers = vec![Vec::new(); hops];
        for (v, d) in dist.iter().enumerate() {
            if let Some(d) = *d {
                if d >= 1 && d <= hops && !done[v] {
                    layers[d - 1].push(v);
                }
            }
        }
        for layer in layers {
            let mut keyed: Vec<(usize, usize)> = layer
                .into_iter()
                .map(|j| (graph.neighbors(j).iter().filter(|&&k| done[k]).count(), j))
                .collect();
            keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for (_, j) in keyed {
                visit(j, &mut done, &mut q, &mut u);
                count += 1;
            }
        }
    }
    Ok((q, u))
}

/// Options for [`refine_permutation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub max_epochs: usize,
    /// Check every single-coordinate update for monotonicity of the objective.
    pub check_monotone: bool,
    /// Record `||L(f - q)||` after every visit.
    pub record_trace: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_epochs: DEFAULT_EPOCHS,
            check_monotone: cfg!(debug_assertions),
            record_trace: false,
        }
    }
}

impl RefineOptions {
    pub fn with_epochs(max_epochs: usize) -> Self {
        Self {
            max_epochs,
            ..Self::default()
        }
    }
}

/// Greedy refinement along a fixed vertex order.
///
/// Each visit replaces `q_k` by the closed-form minimizer of
/// `||sum_{j != k} l_j (f_j - q_j) + l_k (f_k - x)||` over the alphabet.
/// Updates are visible to later visits of the same epoch. The residual is
/// recomputed from scratch at the start of each epoch and updated in `O(dim)`
/// per change inside it. Stops after an epoch without changes or after
/// `max_epochs` epochs.
pub fn refine_permutation<F: FilterColumns + ?Sized>(
    filter: &F,
    f: &[f64],
    order: &[usize],
    alphabet: &Alphabet,
    q_init: &[f64],
    opts: &RefineOptions,
) -> Result<QuantRun, ShapeError> {
    check_signal(filter, f)?;
    let n = filter.n_vertices();
    check_order(order, n)?;
    if q_init.len() != n {
        return Err(ShapeError::LengthMismatch {
            what: "initial q",
            expected: n,
            got: q_init.len(),
        });
    }
    if opts.max_epochs == 0 {
        return Err(ShapeError::NoEpochs);
    }
    let mut q = q_init.to_vec();
    let mut trace = opts.record_trace.then(Vec::new);
    let mut violations = 0;
    let mut epochs_used = 0;
    let mut changed = false;
    let mut residual = Vec::new();
    let mut state = vec![0.0; filter.dim()];

    for _ in 0..opts.max_epochs {
        epochs_used += 1;
        changed = false;
        residual = filtered_residual(filter, f, &q);
        for &k in order {
            let col = filter.column(k);
            let zero_col = filter.column_sq_norm(k) <= ZERO_COLUMN_TOL;
            // state without vertex k's own contribution
            state.copy_from_slice(&residual);
            if !zero_col {
                axpy(-(f[k] - q[k]), col, &mut state);
            }
            let new = greedy_level(filter, alphabet, f[k], k, &state);
            if new != q[k] {
                let before = opts.check_monotone.then(|| norm_sq(&residual).sqrt());
                if !zero_col {
                    axpy(q[k] - new, col, &mut residual);
                }
                q[k] = new;
                changed = true;
                if let Some(before) = before {
                    let after = norm_sq(&residual).sqrt();
                    if after > before + MONOTONICITY_TOL {
                        violations += 1;
                        MONOTONICITY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
            if let Some(t) = trace.as_mut() {
                t.push(norm_sq(&residual).sqrt());
            }
        }
        if !changed {
            break;
        }
    }
    let f_q = filter.lowpass(&q);
    Ok(QuantRun {
        algorithm: Algorithm::Perm,
        q,
        f_q,
        scale: 1.0,
        epochs_used,
        changed_last_epoch: changed,
        state: residual,
        state_norm_trace: trace,
        rng_seed: None,
        q_tilde: None,
        visits: None,
        monotonicity_violations: violations,
    })
}

/// Memoryless rounding packaged as a run, `f_q = L q`.
pub fn quantize_msq<F: FilterColumns + ?Sized>(filter: &F, f: &[f64], alphabet: &Alphabet) -> Result<QuantRun, ShapeError> {
    check_signal(filter, f)?;
    let q: Vec<f64> = f.iter().map(|&x| alphabet.quantize_finite(x)).collect();
    let state = filtered_residual(filter, f, &q);
    Ok(QuantRun {
        algorithm: Algorithm::Msq,
        f_q: filter.lowpass(&q),
        q,
        scale: 1.0,
        epochs_used: 0,
        changed_last_epoch: false,
        state,
        state_norm_trace: None,
        rng_seed: None,
        q_tilde: None,
        visits: None,
        monotonicity_violations: 0,
    })
}

/// Draws a uniform vertex order from `seed`, initializes, then refines.
pub fn quantize_permutation<F: FilterColumns + ?Sized>(
    graph: &Graph,
    filter: &F,
    f: &[f64],
    alphabet: &Alphabet,
    init: InitKind,
    seed: u64,
    opts: &RefineOptions,
) -> Result<QuantRun, ShapeError> {
    check_signal(filter, f)?;
    let n = filter.n_vertices();
    if graph.n_vertices() != n {
        return Err(ShapeError::LengthMismatch {
            what: "graph",
            expected: n,
            got: graph.n_vertices(),
        });
    }
    let order = Rng::new(seed).permutation(n);
    let q0 = match init {
        InitKind::Msq => f.iter().map(|&x| alphabet.quantize_finite(x)).collect(),
        InitKind::Sss => init_sss(filter, f, &order, alphabet)?.0,
        InitKind::Sdw => init_sdw(graph, f, alphabet, None)?.0,
    };
    let mut run = refine_permutation(filter, f, &order, alphabet, &q0, opts)?;
    run.algorithm = init.tag();
    run.rng_seed = Some(seed);
    Ok(run)
}

/// `round(N ln N)`, at least 1.
pub fn default_sample_count(n: usize) -> usize {
    ((n as f64) * (n as f64).ln()).round().max(1.0) as usize
}

/// Sums per-step values into their vertices: `q_i = sum_{j : v_j = i} q_tilde_j`.
pub fn aggregate(q_tilde: &[f64], visits: &[usize], n: usize) -> Result<Vec<f64>, ShapeError> {
    if q_tilde.len() != visits.len() {
        return Err(ShapeError::LengthMismatch {
            what: "visit trace",
            expected: q_tilde.len(),
            got: visits.len(),
        });
    }
    let mut q = vec![0.0; n];
    for (&v, &x) in visits.iter().zip(q_tilde) {
        if v >= n {
            return Err(ShapeError::VisitOutOfRange { index: v, n });
        }
        q[v] += x;
    }
    Ok(q)
}

/// Step-by-step serving with replacement.
///
/// For `i = 1..=M`: sample `k_i` uniformly from the vertices, quantize
/// `q~_i = Q(f_k + <l_k, u_{i-1}> / ||l_k||^2)` and update
/// `u_i = u_{i-1} + l_k (f_k - q~_i)`. The per-step values are aggregated per
/// vertex and `f_q = (N / M) L q`.
pub fn quantize_sssr<F: FilterColumns + ?Sized>(
    filter: &F,
    f: &[f64],
    alphabet: &Alphabet,
    m: usize,
    seed: u64,
) -> Result<QuantRun, ShapeError> {
    quantize_sssr_traced(filter, f, alphabet, m, seed, false)
}

/// [`quantize_sssr`] optionally recording `||u_i||` after every step.
pub fn quantize_sssr_traced<F: FilterColumns + ?Sized>(
    filter: &F,
    f: &[f64],
    alphabet: &Alphabet,
    m: usize,
    seed: u64,
    record_trace: bool,
) -> Result<QuantRun, ShapeError> {
    check_signal(filter, f)?;
    if m == 0 {
        return Err(ShapeError::NoSamples);
    }
    let n = filter.n_vertices();
    let mut rng = Rng::new(seed);
    let mut u = vec![0.0; filter.dim()];
    let mut q_tilde = Vec::with_capacity(m);
    let mut visits = Vec::with_capacity(m);
    let mut trace = record_trace.then(|| Vec::with_capacity(m));
    for _ in 0..m {
        let k = rng.below(n);
        let level = greedy_level(filter, alphabet, f[k], k, &u);
        if filter.column_sq_norm(k) > ZERO_COLUMN_TOL {
            axpy(f[k] - level, filter.column(k), &mut u);
        }
        q_tilde.push(level);
        visits.push(k);
        if let Some(t) = trace.as_mut() {
            t.push(norm_sq(&u).sqrt());
        }
    }
    let q = aggregate(&q_tilde, &visits, n)?;
    let scale = n as f64 / m as f64;
    let f_q = filter.lowpass(&q).into_iter().map(|x| x * scale).collect();
    Ok(QuantRun {
        algorithm: Algorithm::Sssr,
        q,
        f_q,
        scale,
        epochs_used: 0,
        changed_last_epoch: false,
        state: u,
        state_norm_trace: trace,
        rng_seed: Some(seed),
        q_tilde: Some(q_tilde),
        visits: Some(visits),
        monotonicity_violations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_grid, build_star};
    use crate::spectral::{bandlimited_filter, eigendecompose, random_bandlimited, BandlimitedFilter, SpectralBasis};

    fn setup(g: &Graph, r: usize) -> (SpectralBasis, BandlimitedFilter) {
        let b = eigendecompose(&g.normalized_laplacian().unwrap(), 1e-12).unwrap();
        let filt = bandlimited_filter(&b, r).unwrap();
        (b, filt)
    }

    fn mt(step: f64, k: u32) -> Alphabet {
        Alphabet::mid_tread(step, k).unwrap()
    }

    #[test]
    fn sss_first_step_is_plain_rounding() {
        let g = build_cycle(8).unwrap();
        let (_, filt) = setup(&g, 3);
        let f = random_bandlimited(&filt, 1).unwrap();
        let order: Vec<usize> = (0..8).rev().collect();
        let a = mt(0.5, 2);
        let (q, _) = init_sss(&filt, &f, &order, &a).unwrap();
        assert_eq!(q[7], a.quantize(f[7]).unwrap());
    }

    #[test]
    fn sss_reproduces_representable_signal() {
        let g = build_cycle(5).unwrap();
        let (_, filt) = setup(&g, 5);
        let f = vec![0.5, -1.0, 0.0, 1.0, -0.5];
        let (q, u) = init_sss(&filt, &f, &[2, 0, 4, 1, 3], &mt(0.5, 2)).unwrap();
        assert_eq!(q, f);
        assert!(norm_sq(&u).sqrt() < 1e-12);
    }

    /// Straight-line N-dimensional recursion with `P = X_r X_r^T` assembled
    /// directly from the eigenvectors.
    fn sss_oracle(b: &SpectralBasis, r: usize, f: &[f64], order: &[usize], a: &Alphabet) -> Vec<f64> {
        let n = f.len();
        let p = |i: usize, j: usize| (0..r).map(|c| b.entry(i, c) * b.entry(j, c)).sum::<f64>();
        let mut u = vec![0.0; n];
        let mut q = vec![0.0; n];
        for &k in order {
            let lk: Vec<f64> = (0..n).map(|i| p(i, k)).collect();
            let nk: f64 = lk.iter().map(|x| x * x).sum();
            let ip: f64 = lk.iter().zip(&u).map(|(x, y)| x * y).sum();
            q[k] = a.quantize(f[k] + ip / nk).unwrap();
            for i in 0..n {
                u[i] += lk[i] * (f[k] - q[k]);
            }
        }
        q
    }

    #[test]
    fn sss_matches_oracle_on_c6() {
        let g = build_cycle(6).unwrap();
        let (b, filt) = setup(&g, 2);
        let a = mt(0.5, 2);
        for seed in 0..10 {
            let f = random_bandlimited(&filt, seed).unwrap();
            let order = Rng::new(seed + 100).permutation(6);
            let (q, _) = init_sss(&filt, &f, &order, &a).unwrap();
            assert_eq!(q, sss_oracle(&b, 2, &f, &order, &a));
        }
    }

    #[test]
    fn sss_rejects_bad_order() {
        let g = build_cycle(4).unwrap();
        let (_, filt) = setup(&g, 2);
        let f = vec![0.1; 4];
        assert_eq!(
            init_sss(&filt, &f, &[0, 1, 1, 3], &mt(0.5, 2)),
            Err(ShapeError::NotAPermutation(4))
        );
        assert!(matches!(
            init_sss(&filt, &f[..3], &[0, 1, 2, 3], &mt(0.5, 2)),
            Err(ShapeError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn sdw_single_edge_by_hand() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let (q, u) = init_sdw(&g, &[0.3, 0.3], &mt(0.5, 2), None).unwrap();
        assert_eq!(q, vec![0.5, 0.0]);
        assert!((u[0] + 0.2).abs() < 1e-15);
        assert!((u[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sdw_representable_signal() {
        let g = build_grid(3, 3).unwrap();
        let f: Vec<f64> = (0..9).map(|i| ((i % 5) as f64 - 2.0) * 0.5).collect();
        let (q, u) = init_sdw(&g, &f, &mt(0.5, 2), None).unwrap();
        assert_eq!(q, f);
        assert!(u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sdw_star_processes_leaves_in_index_order() {
        let g = build_star(4).unwrap();
        // binary alphabet: each leaf's state feeds nothing back (only the hub
        // is a quantized neighbour), so q_leaf = Q(f_leaf + u_hub)
        let f = [0.2, 0.3, -0.1, 0.6, -0.7];
        let a = Alphabet::explicit(vec![-1.0, 1.0]).unwrap();
        let (q, u) = init_sdw(&g, &f, &a, None).unwrap();
        assert_eq!(q[0], 1.0);
        let u0 = 0.2 - 1.0;
        for leaf in 1..5 {
            let expected = a.quantize(f[leaf] + u0).unwrap();
            assert_eq!(q[leaf], expected);
            assert!((u[leaf] - (u0 + f[leaf] - expected)).abs() < 1e-15);
        }
    }

    #[test]
    fn sdw_handles_disconnected_graphs_and_hop_limits() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        let f = [0.3, -0.2, 0.7, 0.1, -0.9];
        let (q, _) = init_sdw(&g, &f, &mt(0.5, 2), None).unwrap();
        assert_eq!(q.len(), 5);
        let c = build_cycle(12).unwrap();
        let fc: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let (q1, _) = init_sdw(&c, &fc, &mt(0.5, 2), Some(1)).unwrap();
        assert!(q1.iter().all(|x| [-1.0, -0.5, 0.0, 0.5, 1.0].contains(x)));
        assert_eq!(init_sdw(&c, &fc, &mt(0.5, 2), Some(0)), Err(ShapeError::NoHops));
    }

    #[test]
    fn refine_fixed_point_converges_in_one_epoch() {
        let g = build_cycle(6).unwrap();
        let (_, filt) = setup(&g, 6);
        let f = vec![0.5, -0.5, 1.0, 0.0, -1.0, 0.5];
        let run = refine_permutation(&filt, &f, &[3, 1, 4, 0, 5, 2], &mt(0.5, 2), &f, &RefineOptions::with_epochs(5)).unwrap();
        assert_eq!(run.epochs_used, 1);
        assert!(!run.changed_last_epoch);
        assert_eq!(run.q, f);
    }

    #[test]
    fn refine_is_monotone_and_stationary() {
        let g = build_grid(5, 5).unwrap();
        let (_, filt) = setup(&g, 4);
        let a = mt(0.5, 2);
        for seed in 0..10 {
            let f = random_bandlimited(&filt, seed).unwrap();
            let order = Rng::new(seed).permutation(25);
            let q0: Vec<f64> = f.iter().map(|&x| a.quantize(x).unwrap()).collect();
            let opts = RefineOptions {
                max_epochs: 50,
                check_monotone: true,
                record_trace: true,
            };
            let run = refine_permutation(&filt, &f, &order, &a, &q0, &opts).unwrap();
            assert_eq!(run.monotonicity_violations, 0);
            let trace = run.state_norm_trace.as_ref().unwrap();
            let start = filtered_error_norm(&filt, &f, &q0);
            assert!(trace[0] <= start + MONOTONICITY_TOL);
            assert!(trace.windows(2).all(|w| w[1] <= w[0] + MONOTONICITY_TOL));
            assert!(!run.changed_last_epoch);
            // one more sweep from the stationary point changes nothing
            let again = refine_permutation(&filt, &f, &order, &a, &run.q, &opts).unwrap();
            assert_eq!(again.q, run.q);
            assert_eq!(again.epochs_used, 1);
            let recomputed = filtered_residual(&filt, &f, &run.q);
            for (x, y) in recomputed.iter().zip(&run.state) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn refine_rejects_zero_epochs() {
        let g = build_cycle(4).unwrap();
        let (_, filt) = setup(&g, 2);
        let f = vec![0.0; 4];
        assert_eq!(
            refine_permutation(&filt, &f, &[0, 1, 2, 3], &mt(1.0, 1), &f, &RefineOptions::with_epochs(0)),
            Err(ShapeError::NoEpochs)
        );
    }

    #[test]
    fn permutation_runs_are_deterministic() {
        let g = build_grid(4, 5).unwrap();
        let (_, filt) = setup(&g, 5);
        let f = random_bandlimited(&filt, 3).unwrap();
        let a = mt(0.5, 2);
        for init in [InitKind::Msq, InitKind::Sss, InitKind::Sdw] {
            let r1 = quantize_permutation(&g, &filt, &f, &a, init, 9, &RefineOptions::default()).unwrap();
            let r2 = quantize_permutation(&g, &filt, &f, &a, init, 9, &RefineOptions::default()).unwrap();
            assert_eq!(r1, r2);
            assert_eq!(r1.algorithm, init.tag());
        }
    }

    #[test]
    fn one_epoch_equals_init_plus_one_sweep() {
        let g = build_grid(4, 4).unwrap();
        let (_, filt) = setup(&g, 4);
        let f = random_bandlimited(&filt, 8).unwrap();
        let a = mt(0.5, 2);
        let run = quantize_permutation(&g, &filt, &f, &a, InitKind::Sss, 5, &RefineOptions::with_epochs(1)).unwrap();
        let order = Rng::new(5).permutation(16);
        let (q0, _) = init_sss(&filt, &f, &order, &a).unwrap();
        let manual = refine_permutation(&filt, &f, &order, &a, &q0, &RefineOptions::with_epochs(1)).unwrap();
        assert_eq!(run.q, manual.q);
        assert_eq!(run.epochs_used, 1);
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[1.0, -1.0, 1.0], &[0, 0, 1], 3).unwrap(), vec![0.0, 1.0, 0.0]);
        assert_eq!(aggregate(&[0.5, 2.0], &[2, 0], 3).unwrap(), vec![2.0, 0.0, 0.5]);
        assert_eq!(
            aggregate(&[1.0], &[3], 3),
            Err(ShapeError::VisitOutOfRange { index: 3, n: 3 })
        );
    }

    #[test]
    fn sssr_single_step() {
        let g = build_cycle(10).unwrap();
        let (_, filt) = setup(&g, 3);
        let f = random_bandlimited(&filt, 2).unwrap();
        let a = mt(0.5, 3);
        let run = quantize_sssr(&filt, &f, &a, 1, 4).unwrap();
        let k = run.visits.as_ref().unwrap()[0];
        let nonzero: Vec<usize> = (0..10).filter(|&i| run.q[i] != 0.0).collect();
        let expected = a.quantize(f[k]).unwrap();
        if expected != 0.0 {
            assert_eq!(nonzero, vec![k]);
        }
        assert_eq!(run.q[k], expected);
        let lq = filt.lowpass(&run.q);
        for (x, y) in run.f_q.iter().zip(&lq) {
            assert!((x - 10.0 * y).abs() < 1e-12);
        }
        assert_eq!(quantize_sssr(&filt, &f, &a, 0, 1), Err(ShapeError::NoSamples));
    }

    #[test]
    fn sssr_state_matches_trace() {
        let g = build_grid(6, 6).unwrap();
        let (_, filt) = setup(&g, 6);
        let f = random_bandlimited(&filt, 6).unwrap();
        let run = quantize_sssr(&filt, &f, &mt(0.5, 3), 200, 77).unwrap();
        let mut u = vec![0.0; 6];
        for (&k, &qt) in run.visits.as_ref().unwrap().iter().zip(run.q_tilde.as_ref().unwrap()) {
            axpy(f[k] - qt, filt.column(k), &mut u);
        }
        for (x, y) in u.iter().zip(&run.state) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn default_m() {
        assert_eq!(default_sample_count(1), 1);
        assert_eq!(default_sample_count(100), 461);
        assert_eq!(default_sample_count(256), 1420);
    }

    #[test]
    fn algorithm_tags_parse() {
        for a in [Algorithm::Msq, Algorithm::Sss, Algorithm::Sdw, Algorithm::Perm, Algorithm::Sssr] {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("sss-r".parse::<Algorithm>().unwrap(), Algorithm::Sssr);
        assert!("xyz".parse::<Algorithm>().is_err());
    }
}
