use gnsq::analysis::signal_norm_lower_bound;
use gnsq::graph::{build_cycle, build_grid, build_knn_points, build_star, generate_point_cloud, CloudKind, Graph};
use gnsq::spectral::{bandlimited_filter, eigendecompose, gft, igft, incoherence, random_bandlimited};
use proptest::prelude::*;

fn families() -> Vec<(&'static str, Graph)> {
    let cloud = generate_point_cloud(CloudKind::SwissRoll, 90, 4).unwrap();
    vec![
        ("grid", build_grid(7, 9).unwrap()),
        ("cycle", build_cycle(41).unwrap()),
        ("star", build_star(12).unwrap()),
        ("knn", build_knn_points(&cloud, 6, None).unwrap()),
    ]
}

#[test]
fn decompositions_are_accurate_on_every_family() {
    for (name, g) in families() {
        let lap = g.normalized_laplacian().unwrap();
        let b = eigendecompose(&lap, 1e-12).unwrap();
        assert!(b.orthogonality_residual() <= 1e-9, "{name}");
        assert!(b.reconstruction_residual(&lap) <= 1e-9, "{name}");
        let ev = b.eigenvalues();
        assert!(ev[0].abs() < 1e-9, "{name}");
        assert!(ev.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)), "{name}");
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn incoherence_bounds_hold_for_every_bandwidth() {
    for (name, g) in families() {
        let n = g.n_vertices();
        let b = eigendecompose(&g.normalized_laplacian().unwrap(), 1e-12).unwrap();
        for r in 1..=n {
            let inc = incoherence(&bandlimited_filter(&b, r).unwrap());
            assert!(inc.mu >= 1.0 - 1e-9, "{name} r={r}");
            assert!(inc.mu <= n as f64 / r as f64 + 1e-9, "{name} r={r}");
            assert!(inc.nu <= inc.mu + 1e-12, "{name} r={r}");
        }
    }
}

#[test]
fn synthesized_signals_respect_norm_lower_bound() {
    for (name, g) in families() {
        let n = g.n_vertices();
        let b = eigendecompose(&g.normalized_laplacian().unwrap(), 1e-12).unwrap();
        for r in [1, 5, 20].into_iter().filter(|&r| r <= n) {
            let filt = bandlimited_filter(&b, r).unwrap();
            let mu = incoherence(&filt).mu;
            for seed in 0..100 {
                let f = random_bandlimited(&filt, seed).unwrap();
                let energy: f64 = f.iter().map(|x| x * x).sum();
                assert!(energy >= signal_norm_lower_bound(n, r, mu) - 1e-9, "{name} r={r} seed={seed}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fourier_transform_is_an_isometry(n in 3usize..30, xs in prop::collection::vec(-5.0f64..5.0, 30)) {
        let g = build_cycle(n).unwrap();
        let b = eigendecompose(&g.normalized_laplacian().unwrap(), 1e-12).unwrap();
        let f = &xs[..n];
        let fhat = gft(&b, f).unwrap();
        let e1: f64 = f.iter().map(|x| x * x).sum();
        let e2: f64 = fhat.iter().map(|x| x * x).sum();
        prop_assert!((e1 - e2).abs() <= 1e-9 * (1.0 + e1));
        let back = igft(&b, &fhat).unwrap();
        for (x, y) in f.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}
