//! The `quantize`, `sweep`, `halftone` and `graph-info` commands.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Result};
use gnsq::analysis::{
    algorithm_seed, error_report, make_row, run_method, summarize, sweep_bandwidth, sweep_iterations, ErrorReport,
    Method, ResultRow, RowContext, RunSettings, SummaryRow, SweepSpec, RESULTS_HEADER,
};
use gnsq::graph::{build_cycle, build_grid, build_knn_points, build_star, generate_point_cloud, Graph};
use gnsq::io::{load_edge_list, EigenCache};
use gnsq::spectral::{bandlimited_filter, eigendecompose, incoherence, random_bandlimited, SpectralBasis};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{methods, validate_static, ConfigError, ExperimentConfig, GraphSource, DEFAULT_HALFTONE_R};
use crate::output::{ensure_dir, write_csv, write_json};
use crate::points::{coordinate_index, load_points, rescale_unit};

/// What a command produced.
#[derive(Debug, Clone)]
pub struct CommandReport {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
    /// Per-method means (halftone only).
    pub comparison: Vec<MethodComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodComparison {
    pub algorithm: String,
    pub alphabet: String,
    pub seeds: usize,
    pub mean_relative_l2_sq: f64,
    pub mean_linf: f64,
    pub mean_lowpass_relative_l2_sq: f64,
    pub mean_lowpass_linf: f64,
    pub mean_inband_energy_fraction: f64,
}

struct Prepared {
    graph: Graph,
    name: String,
    points: Option<Vec<Vec<f64>>>,
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let knn = |pts: &[Vec<f64>], k: usize, sigma: Option<f64>| -> Result<Graph> {
        if k >= pts.len() {
            return Err(ConfigError::new("graph.k", format!("k = {k} must be below the point count {}", pts.len())).into());
        }
        Ok(build_knn_points(pts, k, sigma)?)
    };
    let prepared = match cfg.graph.resolve()? {
        GraphSource::Grid { rows, cols } => Prepared {
            graph: build_grid(rows, cols)?,
            name: format!("grid{rows}x{cols}"),
            points: None,
        },
        GraphSource::Cycle { n } => Prepared {
            graph: build_cycle(n)?,
            name: format!("cycle{n}"),
            points: None,
        },
        GraphSource::Star { leaves } => Prepared {
            graph: build_star(leaves)?,
            name: format!("star{leaves}"),
            points: None,
        },
        GraphSource::EdgeList { path } => Prepared {
            graph: load_edge_list(&path)?,
            name: file_stem(&path),
            points: None,
        },
        GraphSource::PointCloud { path, k, sigma } => {
            let pts = load_points(&path)?;
            Prepared {
                graph: knn(&pts, k, sigma)?,
                name: format!("{}_k{k}", file_stem(&path)),
                points: Some(pts),
            }
        }
        GraphSource::Synthetic {
            cloud, n, k, sigma, seed,
        } => {
            let pts = generate_point_cloud(cloud, n, seed)?;
            Prepared {
                graph: knn(&pts, k, sigma)?,
                name: format!("{cloud}{n}_k{k}"),
                points: Some(pts),
            }
        }
    };
    Ok(prepared)
}

fn decompose(cfg: &ExperimentConfig, graph: &Graph) -> Result<(SpectralBasis, Option<bool>)> {
    let lap = graph.normalized_laplacian()?;
    match &cfg.cache_dir {
        Some(dir) => {
            let (basis, hit) = EigenCache::new(dir).get_or_compute(&lap, cfg.spectral.tol)?;
            Ok((basis, Some(hit)))
        }
        None => Ok((eigendecompose(&lap, cfg.spectral.tol)?, None)),
    }
}

fn bandwidth_field(cfg: &ExperimentConfig) -> &'static str {
    if cfg.bandwidth.r_list.is_some() {
        "bandwidth.r_list"
    } else if cfg.bandwidth.r_range.is_some() {
        "bandwidth.r_range"
    } else {
        "bandwidth.r"
    }
}

fn single_bandwidth(cfg: &ExperimentConfig, n: usize) -> Result<usize, ConfigError> {
    let field = bandwidth_field(cfg);
    let r = match cfg.bandwidths().as_deref() {
        Some([r]) => *r,
        Some(_) => return Err(ConfigError::new(field, "this command needs a single bandwidth")),
        None => return Err(ConfigError::new("bandwidth.r", "missing")),
    };
    if r > n {
        return Err(ConfigError::new(field, format!("r = {r} exceeds N = {n}")));
    }
    Ok(r)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    graph: &'a str,
    n_vertices: usize,
    eigen_cache_hit: Option<bool>,
    started_unix_seconds: u64,
    elapsed_seconds: f64,
    files: Vec<String>,
}

struct Clock {
    started: u64,
    t0: Instant,
}

impl Clock {
    fn start() -> Self {
        Self {
            started: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            t0: Instant::now(),
        }
    }
}

fn relative(files: &[PathBuf], root: &Path) -> Vec<String> {
    files
        .iter()
        .map(|p| p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/"))
        .collect()
}

#[derive(Serialize)]
struct SignalRow {
    vertex: usize,
    f: f64,
    q: f64,
    f_q: f64,
    error_spectrum: f64,
}

#[derive(Serialize)]
struct CloudRow {
    x: f64,
    y: f64,
    z: f64,
    value: f64,
}

fn signal_rows(f: &[f64], run: &gnsq::shape::QuantRun, report: &ErrorReport) -> Vec<SignalRow> {
    (0..f.len())
        .map(|i| SignalRow {
            vertex: i,
            f: f[i],
            q: run.q[i],
            f_q: run.f_q[i],
            error_spectrum: report.error_spectrum[i],
        })
        .collect()
}

struct Outcome {
    row: ResultRow,
    f: Vec<f64>,
    run: gnsq::shape::QuantRun,
    report: ErrorReport,
}

fn sort_outcomes(outcomes: &mut [Outcome]) {
    outcomes.sort_by(|a, b| (a.row.algorithm, a.row.seed).cmp(&(b.row.algorithm, b.row.seed)));
}

fn finish(
    command: &str,
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cache_hit: Option<bool>,
    clock: Clock,
    rows: Vec<ResultRow>,
    mut files: Vec<PathBuf>,
    comparison: Vec<MethodComparison>,
) -> Result<CommandReport> {
    let out = &cfg.output;
    let summary = summarize(&rows);
    files.push(write_csv(&out.join("results.csv"), &rows, Some(RESULTS_HEADER))?);
    files.push(write_csv(&out.join("summary.csv"), &summary, None)?);
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        graph: &prepared.name,
        n_vertices: prepared.graph.n_vertices(),
        eigen_cache_hit: cache_hit,
        started_unix_seconds: clock.started,
        elapsed_seconds: clock.t0.elapsed().as_secs_f64(),
        files: relative(&files, out),
    };
    files.push(write_json(&out.join("manifest.json"), &manifest)?);
    Ok(CommandReport {
        rows,
        summary,
        files,
        comparison,
    })
}

/// One run per (algorithm, seed) at a single bandwidth on a synthesized
/// bandlimited signal; writes every vector and the error report of each run.
pub fn cmd_quantize(cfg: &ExperimentConfig) -> Result<CommandReport> {
    let clock = Clock::start();
    validate_static(cfg)?;
    let methods = methods(cfg, &cfg.tags_list(), "algorithm.tags")?;
    let prepared = prepare(cfg)?;
    let n = prepared.graph.n_vertices();
    let r = single_bandwidth(cfg, n)?;
    let (basis, cache_hit) = decompose(cfg, &prepared.graph)?;
    let filter = bandlimited_filter(&basis, r)?;
    let mu = incoherence(&filter).mu;
    let settings = RunSettings {
        epochs: cfg.algorithm.epochs,
        samples: cfg.m_policy().resolve(n),
        check_monotone: cfg!(debug_assertions),
    };
    let ctx = RowContext {
        graph: &prepared.name,
        r,
        mu,
        fail_prob: cfg.algorithm.fail_prob,
        epochs: cfg.algorithm.epochs,
    };
    let cells: Vec<(&Method, u64)> = methods.iter().flat_map(|m| cfg.seeds.iter().map(move |&s| (m, s))).collect();
    let mut outcomes = cells
        .par_iter()
        .map(|&(method, seed)| -> Result<Outcome> {
            let f = random_bandlimited(&filter, seed)?;
            let run = run_method(&prepared.graph, &filter, &f, method, &settings, algorithm_seed(seed))?;
            let report = error_report(&basis, &filter, &f, &run)?;
            let row = make_row(&ctx, &method.alphabet, seed, &run, &report)?;
            Ok(Outcome { row, f, run, report })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_outcomes(&mut outcomes);

    let out = &cfg.output;
    ensure_dir(&out.join("signals"))?;
    ensure_dir(&out.join("reports"))?;
    let mut files = Vec::new();
    for o in &outcomes {
        let stem = format!("{}_seed{}", o.row.algorithm, o.row.seed);
        files.push(write_csv(&out.join("signals").join(format!("{stem}.csv")), &signal_rows(&o.f, &o.run, &o.report), None)?);
        files.push(write_json(&out.join("reports").join(format!("{stem}.json")), &o.report)?);
    }
    let rows = outcomes.into_iter().map(|o| o.row).collect();
    finish("quantize", cfg, &prepared, cache_hit, clock, rows, files, Vec::new())
}

/// Bandwidth sweep (`bandwidth.r_list` / `r_range`) or, when
/// `algorithm.M_list` is set, an iteration sweep at a single bandwidth.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<CommandReport> {
    let clock = Clock::start();
    validate_static(cfg)?;
    let methods = methods(cfg, &cfg.tags_list(), "algorithm.tags")?;
    let prepared = prepare(cfg)?;
    let n = prepared.graph.n_vertices();
    let mut spec = SweepSpec::new(prepared.name.clone(), methods, cfg.seeds.clone());
    spec.epochs = cfg.algorithm.epochs;
    spec.m_policy = cfg.m_policy();
    spec.fail_prob = cfg.algorithm.fail_prob;

    let rows = if let Some(m_list) = &cfg.algorithm.m_list {
        let r = single_bandwidth(cfg, n)?;
        if !spec.methods.iter().any(|m| m.algorithm == gnsq::shape::Algorithm::Sssr) {
            return Err(ConfigError::new("algorithm.tags", "an iteration sweep needs SSSR").into());
        }
        let (basis, hit) = decompose(cfg, &prepared.graph)?;
        (sweep_iterations(&prepared.graph, &basis, &spec, r, m_list)?, hit)
    } else {
        let requested = cfg
            .bandwidths()
            .ok_or_else(|| ConfigError::new("bandwidth.r_list", "a sweep needs r_list, r_range or M_list"))?;
        let kept: Vec<usize> = requested.iter().copied().filter(|&r| r <= n).collect();
        if kept.len() < requested.len() {
            log::warn!("dropping {} bandwidths above N = {n}", requested.len() - kept.len());
        }
        if kept.is_empty() {
            return Err(ConfigError::new(bandwidth_field(cfg), format!("no bandwidth is at most N = {n}")).into());
        }
        let (basis, hit) = decompose(cfg, &prepared.graph)?;
        (sweep_bandwidth(&prepared.graph, &basis, &spec, &kept)?, hit)
    };
    ensure_dir(&cfg.output)?;
    finish("sweep", cfg, &prepared, rows.1, clock, rows.0, Vec::new(), Vec::new())
}

/// Quantizes a rescaled point coordinate on the cloud's k-NN graph with each
/// configured method and compares the low-pass errors.
pub fn cmd_halftone(cfg: &ExperimentConfig) -> Result<CommandReport> {
    let clock = Clock::start();
    validate_static(cfg)?;
    if !cfg.graph.is_point_cloud() {
        return Err(ConfigError::new("graph.kind", "halftone needs a point_cloud or synthetic graph").into());
    }
    let methods = methods(cfg, &cfg.halftone.tags, "halftone.tags")?;
    let col = coordinate_index(&cfg.halftone.coordinate)
        .ok_or_else(|| ConfigError::new("halftone.coordinate", "expected x, y, z or a column index"))?;
    let prepared = prepare(cfg)?;
    let points = prepared.points.as_ref().expect("point-cloud graphs keep their points");
    if col >= points[0].len() {
        return Err(ConfigError::new("halftone.coordinate", format!("points have only {} columns", points[0].len())).into());
    }
    let n = prepared.graph.n_vertices();
    let r = match cfg.bandwidths() {
        None => DEFAULT_HALFTONE_R.min(n),
        Some(_) => single_bandwidth(cfg, n)?,
    };
    let raw: Vec<f64> = points.iter().map(|p| p[col]).collect();
    let f = rescale_unit(&raw).ok_or_else(|| ConfigError::new("halftone.coordinate", "coordinate is constant"))?;
    let (basis, cache_hit) = decompose(cfg, &prepared.graph)?;
    let filter = bandlimited_filter(&basis, r)?;
    let mu = incoherence(&filter).mu;
    let settings = RunSettings {
        epochs: cfg.algorithm.epochs,
        samples: cfg.m_policy().resolve(n),
        check_monotone: cfg!(debug_assertions),
    };
    let ctx = RowContext {
        graph: &prepared.name,
        r,
        mu,
        fail_prob: cfg.algorithm.fail_prob,
        epochs: cfg.algorithm.epochs,
    };
    let cells: Vec<(&Method, u64)> = methods.iter().flat_map(|m| cfg.seeds.iter().map(move |&s| (m, s))).collect();
    let mut outcomes = cells
        .par_iter()
        .map(|&(method, seed)| -> Result<Outcome> {
            let run = run_method(&prepared.graph, &filter, &f, method, &settings, algorithm_seed(seed))?;
            let report = error_report(&basis, &filter, &f, &run)?;
            let row = make_row(&ctx, &method.alphabet, seed, &run, &report)?;
            Ok(Outcome {
                row,
                f: f.clone(),
                run,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_outcomes(&mut outcomes);

    let out = &cfg.output;
    ensure_dir(&out.join("signals"))?;
    ensure_dir(&out.join("clouds"))?;
    let cloud = |values: &[f64]| -> Vec<CloudRow> {
        points
            .iter()
            .zip(values)
            .map(|(p, &value)| CloudRow {
                x: p.first().copied().unwrap_or(0.0),
                y: p.get(1).copied().unwrap_or(0.0),
                z: p.get(2).copied().unwrap_or(0.0),
                value,
            })
            .collect()
    };
    let mut files = vec![write_csv(&out.join("clouds").join("signal.csv"), &cloud(&f), None)?];
    for o in &outcomes {
        let stem = format!("{}_seed{}", o.row.algorithm, o.row.seed);
        files.push(write_csv(&out.join("signals").join(format!("{stem}.csv")), &signal_rows(&o.f, &o.run, &o.report), None)?);
        files.push(write_csv(&out.join("clouds").join(format!("{stem}.csv")), &cloud(&o.run.q), None)?);
    }
    let comparison: Vec<MethodComparison> = methods
        .iter()
        .map(|m| {
            let mine: Vec<&Outcome> = outcomes.iter().filter(|o| o.row.algorithm == m.algorithm).collect();
            let mean = |g: fn(&Outcome) -> f64| mine.iter().map(|o| g(o)).sum::<f64>() / mine.len() as f64;
            MethodComparison {
                algorithm: m.algorithm.to_string(),
                alphabet: m.alphabet.to_string(),
                seeds: mine.len(),
                mean_relative_l2_sq: mean(|o| o.report.relative_l2_sq),
                mean_linf: mean(|o| o.report.linf),
                mean_lowpass_relative_l2_sq: mean(|o| o.report.lowpass_relative_l2_sq),
                mean_lowpass_linf: mean(|o| o.report.lowpass_linf),
                mean_inband_energy_fraction: mean(|o| o.report.inband_energy_fraction),
            }
        })
        .collect();
    #[derive(Serialize)]
    struct Comparison<'a> {
        graph: &'a str,
        n_vertices: usize,
        r: usize,
        coordinate: &'a str,
        methods: &'a [MethodComparison],
    }
    files.push(write_json(
        &out.join("comparison.json"),
        &Comparison {
            graph: &prepared.name,
            n_vertices: n,
            r,
            coordinate: &cfg.halftone.coordinate,
            methods: &comparison,
        },
    )?);
    let rows = outcomes.into_iter().map(|o| o.row).collect();
    finish("halftone", cfg, &prepared, cache_hit, clock, rows, files, comparison)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandInfo {
    pub r: usize,
    pub mu: f64,
    pub nu: f64,
    pub ambiguous_cut: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphInfo {
    pub graph: String,
    pub n_vertices: usize,
    pub edges: usize,
    pub components: usize,
    pub degree_min: f64,
    pub degree_mean: f64,
    pub degree_max: f64,
    /// Second-smallest Laplacian eigenvalue.
    pub spectral_gap: f64,
    pub lambda_max: f64,
    pub bands: Vec<BandInfo>,
}

/// Size, degree statistics, spectral gap and incoherence for each `r` in
/// `rs` (or the configured bandwidths).
pub fn graph_info(cfg: &ExperimentConfig, rs: &[usize]) -> Result<GraphInfo> {
    let prepared = prepare(cfg)?;
    let g = &prepared.graph;
    let n = g.n_vertices();
    let rs: Vec<usize> = if rs.is_empty() { cfg.bandwidths().unwrap_or_default() } else { rs.to_vec() };
    if let Some(&bad) = rs.iter().find(|&&r| r == 0 || r > n) {
        return Err(anyhow!("r = {bad} out of range 1..={n}"));
    }
    let (basis, _) = decompose(cfg, g)?;
    let deg = g.degrees();
    let bands = rs
        .iter()
        .map(|&r| -> Result<BandInfo> {
            let filt = bandlimited_filter(&basis, r)?;
            let inc = incoherence(&filt);
            Ok(BandInfo {
                r,
                mu: inc.mu,
                nu: inc.nu,
                ambiguous_cut: filt.ambiguous_cut(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let comps = g.components();
    Ok(GraphInfo {
        graph: prepared.name.clone(),
        n_vertices: n,
        edges: g.edge_count(),
        components: comps.iter().max().map_or(0, |m| m + 1),
        degree_min: deg.iter().copied().fold(f64::INFINITY, f64::min),
        degree_mean: deg.iter().sum::<f64>() / n as f64,
        degree_max: deg.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        spectral_gap: basis.eigenvalues().get(1).copied().unwrap_or(0.0),
        lambda_max: basis.eigenvalues()[n - 1],
        bands,
    })
}
