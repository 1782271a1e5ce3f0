use gnsq::analysis::{brute_force_optimum, error_report};
use gnsq::graph::{build_cycle, build_grid, generate_point_cloud, build_knn_points, CloudKind, Graph};
use gnsq::quant::{bit_accounting, Alphabet};
use gnsq::rng::Rng;
use gnsq::shape::{
    filtered_error_norm, init_sss, quantize_msq, quantize_permutation, quantize_sssr, quantize_sssr_traced,
    refine_permutation, InitKind, RefineOptions,
};
use gnsq::spectral::{
    bandlimited_filter, eigendecompose, incoherence, random_bandlimited, BandlimitedFilter, DenseProjector,
    FilterColumns, SpectralBasis,
};
use proptest::prelude::*;

fn decompose(g: &Graph) -> SpectralBasis {
    eigendecompose(&g.normalized_laplacian().unwrap(), 1e-12).unwrap()
}

fn mt(step: f64, k: u32) -> Alphabet {
    Alphabet::mid_tread(step, k).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn negating_basis_columns_leaves_every_output_unchanged() {
    let g = build_grid(6, 7).unwrap();
    let b = decompose(&g);
    let filt = bandlimited_filter(&b, 9).unwrap();
    let flipped = filt.negated(&[0, 3, 4, 8]);
    let a = mt(0.5, 2);
    for seed in 0..5 {
        let f = random_bandlimited(&filt, seed).unwrap();
        let order = Rng::new(seed).permutation(42);
        assert_eq!(init_sss(&filt, &f, &order, &a).unwrap().0, init_sss(&flipped, &f, &order, &a).unwrap().0);
        for init in [InitKind::Msq, InitKind::Sss, InitKind::Sdw] {
            let x = quantize_permutation(&g, &filt, &f, &a, init, seed, &RefineOptions::default()).unwrap();
            let y = quantize_permutation(&g, &flipped, &f, &a, init, seed, &RefineOptions::default()).unwrap();
            assert_eq!(x.q, y.q);
            assert_eq!(x.f_q, y.f_q);
        }
        let x = quantize_sssr(&filt, &f, &a, 300, seed).unwrap();
        let y = quantize_sssr(&flipped, &f, &a, 300, seed).unwrap();
        assert_eq!(x.q, y.q);
        assert_eq!(x.f_q, y.f_q);
    }
}

#[test]
fn compact_and_full_projectors_agree() {
    for g in [build_grid(5, 8).unwrap(), build_cycle(31).unwrap()] {
        let n = g.n_vertices();
        let b = decompose(&g);
        for r in [3, 7] {
            let filt = bandlimited_filter(&b, r).unwrap();
            let dense = DenseProjector::from_filter(&filt);
            let a = mt(0.5, 2);
            for seed in 0..4 {
                let f = random_bandlimited(&filt, seed).unwrap();
                let order = Rng::new(seed ^ 0xff).permutation(n);
                let (qc, uc) = init_sss(&filt, &f, &order, &a).unwrap();
                let (qd, ud) = init_sss(&dense, &f, &order, &a).unwrap();
                assert_eq!(qc, qd);
                assert!((norm(&uc) - norm(&ud)).abs() < 1e-9);

                let opts = RefineOptions {
                    record_trace: true,
                    ..RefineOptions::default()
                };
                let rc = refine_permutation(&filt, &f, &order, &a, &qc, &opts).unwrap();
                let rd = refine_permutation(&dense, &f, &order, &a, &qd, &opts).unwrap();
                assert_eq!(rc.q, rd.q);
                for (x, y) in rc.state_norm_trace.unwrap().iter().zip(rd.state_norm_trace.unwrap()) {
                    assert!((x - y).abs() < 1e-9);
                }
                for (x, y) in rc.f_q.iter().zip(&rd.f_q) {
                    assert!((x - y).abs() < 1e-9);
                }

                let sc = quantize_sssr_traced(&filt, &f, &a, 200, seed, true).unwrap();
                let sd = quantize_sssr_traced(&dense, &f, &a, 200, seed, true).unwrap();
                assert_eq!(sc.q, sd.q);
                for (x, y) in sc.state_norm_trace.unwrap().iter().zip(sd.state_norm_trace.unwrap()) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn reconstructions_match_recomputation() {
    let g = build_grid(6, 6).unwrap();
    let b = decompose(&g);
    let filt = bandlimited_filter(&b, 6).unwrap();
    let f = random_bandlimited(&filt, 4).unwrap();
    let a = mt(0.5, 3);
    let runs = [
        quantize_msq(&filt, &f, &a).unwrap(),
        quantize_permutation(&g, &filt, &f, &a, InitKind::Sdw, 1, &RefineOptions::default()).unwrap(),
        quantize_sssr(&filt, &f, &a, 129, 1).unwrap(),
    ];
    for run in &runs {
        // direct N x N product with P = X_r X_r^T
        for i in 0..36 {
            let mut acc = 0.0;
            for j in 0..36 {
                let p: f64 = (0..6).map(|c| b.entry(i, c) * b.entry(j, c)).sum();
                acc += p * run.q[j];
            }
            assert!((run.scale * acc - run.f_q[i]).abs() < 1e-9);
        }
    }
    assert_eq!(runs[2].scale, 36.0 / 129.0);
}

#[test]
fn sampling_is_unbiased() {
    let g = build_cycle(12).unwrap();
    let b = decompose(&g);
    let filt = bandlimited_filter(&b, 3).unwrap();
    let f = random_bandlimited(&filt, 21).unwrap();
    let (n, m, runs) = (12usize, 20usize, 2000u64);
    let a = mt(0.5, 3);
    let mut samples = vec![Vec::with_capacity(runs as usize); 3];
    for seed in 0..runs {
        let run = quantize_sssr(&filt, &f, &a, m, seed).unwrap();
        let mut acc = [0.0; 3];
        for &k in run.visits.as_ref().unwrap() {
            for c in 0..3 {
                acc[c] += filt.column(k)[c] * f[k];
            }
        }
        for c in 0..3 {
            samples[c].push(acc[c]);
        }
    }
    let target = filt.coefficients(&f);
    for c in 0..3 {
        let xs = &samples[c];
        let mean = xs.iter().sum::<f64>() / runs as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs as f64 - 1.0);
        let se = (var / runs as f64).sqrt();
        let expected = m as f64 / n as f64 * target[c];
        assert!((mean - expected).abs() <= 3.0 * se, "component {c}: {mean} vs {expected} (se {se})");
    }
}

/// Replays the state recursion from the recorded trace and checks the
/// per-step growth rules for a saturating mid-tread alphabet with `K step > 1`.
fn check_state_growth(filt: &BandlimitedFilter, f: &[f64], a: &Alphabet, step: f64, m: usize, seed: u64) {
    let n = f.len();
    let r = filt.bandwidth();
    let mu = incoherence(filt).mu;
    let run = quantize_sssr(filt, f, a, m, seed).unwrap();
    let mut u = vec![0.0; r];
    let per_step = mu * step * step * r as f64 / (4.0 * n as f64);
    for (&k, &qt) in run.visits.as_ref().unwrap().iter().zip(run.q_tilde.as_ref().unwrap()) {
        let col = filt.column(k);
        let sq: f64 = col.iter().map(|x| x * x).sum();
        let w = f[k] + col.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>() / sq;
        let before: f64 = u.iter().map(|x| x * x).sum();
        for c in 0..r {
            u[c] += col[c] * (f[k] - qt);
        }
        let after: f64 = u.iter().map(|x| x * x).sum();
        if w.abs() <= a.q_max() {
            assert!(after <= before + per_step + 1e-12, "in-range step grew by {}", after - before);
        } else {
            assert!(after <= before + 1e-12, "saturated step grew by {}", after - before);
        }
    }
    let bound = mu * step * step * r as f64 * (1 + m) as f64 / n as f64;
    assert!(norm(&run.state).powi(2) <= bound);
}

#[test]
fn sssr_state_growth_rules() {
    let g = build_grid(8, 8).unwrap();
    let b = decompose(&g);
    for r in [4, 12] {
        let filt = bandlimited_filter(&b, r).unwrap();
        for seed in 0..10 {
            let f = random_bandlimited(&filt, seed).unwrap();
            check_state_growth(&filt, &f, &mt(0.4, 3), 0.4, 300, seed);
            check_state_growth(&filt, &f, &mt(1.5, 1), 1.5, 300, seed);
        }
    }
}

#[test]
fn perm_never_worse_than_msq_and_never_better_than_optimum() {
    for n in [6, 8] {
        let g = build_cycle(n).unwrap();
        let b = decompose(&g);
        for r in [1, 2, 3] {
            let filt = bandlimited_filter(&b, r).unwrap();
            for seed in 0..6 {
                let f = random_bandlimited(&filt, seed).unwrap();
                let a = Alphabet::explicit(vec![-1.0, 0.0, 1.0]).unwrap();
                let (_, opt) = brute_force_optimum(&filt, &f, &a).unwrap();
                let perm = quantize_permutation(&g, &filt, &f, &a, InitKind::Msq, seed, &RefineOptions::with_epochs(50)).unwrap();
                let msq = quantize_msq(&filt, &f, &a).unwrap();
                let p = filtered_error_norm(&filt, &f, &perm.q);
                let m = filtered_error_norm(&filt, &f, &msq.q);
                assert!(opt <= p + 1e-12 && p <= m + 1e-12, "opt {opt} perm {p} msq {m}");
            }
        }
    }
}

#[test]
fn sdw_beats_msq_on_grid() {
    let g = build_grid(16, 16).unwrap();
    let b = decompose(&g);
    let filt = bandlimited_filter(&b, 20).unwrap();
    let a = mt(1.0, 1);
    for seed in 0..3 {
        let f = random_bandlimited(&filt, seed).unwrap();
        let msq = quantize_msq(&filt, &f, &a).unwrap();
        let sdw = quantize_permutation(&g, &filt, &f, &a, InitKind::Sdw, seed, &RefineOptions::default()).unwrap();
        let em = error_report(&b, &filt, &f, &msq).unwrap();
        let es = error_report(&b, &filt, &f, &sdw).unwrap();
        assert!(es.relative_l2_sq < em.relative_l2_sq);
        assert!(es.lowpass_relative_l2_sq < em.lowpass_relative_l2_sq);
    }
}

#[test]
fn aggregated_alphabet_stays_small() {
    let g = build_cycle(100).unwrap();
    let b = decompose(&g);
    let filt = bandlimited_filter(&b, 10).unwrap();
    let a = mt(0.5, 3);
    let m = gnsq::shape::default_sample_count(100);
    for seed in 0..5 {
        let f = random_bandlimited(&filt, seed).unwrap();
        let run = quantize_sssr(&filt, &f, &a, m, seed).unwrap();
        let acct = bit_accounting(&run.q);
        let budget = a.len().unwrap() as f64 * (100f64).ln();
        assert!((acct.distinct_levels as f64) <= budget, "{} > {budget}", acct.distinct_levels);
    }
}

#[test]
fn sdw_on_point_cloud_graph_is_deterministic() {
    let pts = generate_point_cloud(CloudKind::Sphere, 120, 3).unwrap();
    let g = build_knn_points(&pts, 6, None).unwrap();
    let b = decompose(&g);
    let filt = bandlimited_filter(&b, 8).unwrap();
    let f = random_bandlimited(&filt, 1).unwrap();
    let a = mt(1.0, 1);
    let x = quantize_permutation(&g, &filt, &f, &a, InitKind::Sdw, 5, &RefineOptions::default()).unwrap();
    let y = quantize_permutation(&g, &filt, &f, &a, InitKind::Sdw, 5, &RefineOptions::default()).unwrap();
    assert_eq!(x, y);
}

fn grid_case() -> impl Strategy<Value = (usize, usize, usize, u64, u32)> {
    (2usize..6, 2usize..6, 1usize..8, any::<u64>(), 1u32..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_is_monotone_and_idempotent((rows, cols, r, seed, k) in grid_case()) {
        let g = build_grid(rows, cols).unwrap();
        let n = g.n_vertices();
        let r = r.min(n);
        let b = decompose(&g);
        let filt = bandlimited_filter(&b, r).unwrap();
        let f = random_bandlimited(&filt, seed).unwrap();
        let a = mt(1.0 / k as f64, k);
        let order = Rng::new(seed).permutation(n);
        let (q0, _) = init_sss(&filt, &f, &order, &a).unwrap();
        let opts = RefineOptions { max_epochs: 100, check_monotone: true, record_trace: true };
        let run = refine_permutation(&filt, &f, &order, &a, &q0, &opts).unwrap();
        prop_assert_eq!(run.monotonicity_violations, 0);
        let trace = run.state_norm_trace.clone().unwrap();
        prop_assert!(trace[0] <= filtered_error_norm(&filt, &f, &q0) + 1e-9);
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        prop_assert!(!run.changed_last_epoch);
        let again = refine_permutation(&filt, &f, &order, &a, &run.q, &opts).unwrap();
        prop_assert_eq!(&again.q, &run.q);
        prop_assert_eq!(again.epochs_used, 1);
        prop_assert!(run.q.iter().all(|x| a.levels().unwrap().contains(x)));
    }

    #[test]
    fn sssr_aggregate_counts_visits((rows, cols, r, seed, _k) in grid_case(), m in 1usize..200) {
        let g = build_grid(rows, cols).unwrap();
        let n = g.n_vertices();
        let b = decompose(&g);
        let filt = bandlimited_filter(&b, r.min(n)).unwrap();
        let f = random_bandlimited(&filt, seed).unwrap();
        let run = quantize_sssr(&filt, &f, &Alphabet::explicit(vec![-1.0, 1.0]).unwrap(), m, seed).unwrap();
        let visits = run.visits.as_ref().unwrap();
        prop_assert_eq!(visits.len(), m);
        for i in 0..n {
            let hits = visits.iter().filter(|&&v| v == i).count() as f64;
            // binary levels: |q_i| <= hits and q_i has the parity of hits
            prop_assert!(run.q[i].abs() <= hits);
            prop_assert_eq!((run.q[i] + hits).rem_euclid(2.0), 0.0);
        }
    }
}
