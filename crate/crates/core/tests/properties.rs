use citerank::dirichlet::{gradient, hessian, DirichletParams as Params};
use citerank::markov::{stationarity_residual, stationary_distribution_from};
use citerank::{
    fit_fixed_point, google_matrix, half_sample, kendall_tau, marginal_log_likelihood, posterior_smoothing_matrix,
    score, spearman, stationary_distribution, CitationMatrix, DanglingPolicy, FitOptions, HalfSampleConfig,
    MaskPolicy, Method, PowerOptions, SamplingMode, ScoringOptions, TeleportVector,
};
use proptest::prelude::*;

fn counts(n: usize, max: u64) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0..=max, n), n)
}

/// Every row and column has some off-diagonal mass.
fn connected(n: usize) -> impl Strategy<Value = CitationMatrix> {
    counts(n, 25).prop_map(move |mut rows| {
        for (i, row) in rows.iter_mut().enumerate() {
            row[(i + 1) % n] += 1;
        }
        CitationMatrix::from_counts(rows, MaskPolicy::Diagonal).unwrap()
    })
}

fn gamma(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..6.0, n)
}

fn sized() -> impl Strategy<Value = (CitationMatrix, Vec<f64>)> {
    prop_oneof![Just(4usize), Just(6usize)].prop_flat_map(|n| (connected(n), gamma(n)))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradient_and_hessian_match_finite_differences((m, g) in sized()) {
        let n = g.len();
        let grad = gradient(&m, &g).unwrap();
        let hess = hessian(&m, &g).unwrap();
        for j in 0..n {
            let h = 1e-6 * g[j].max(1.0);
            let mut up = g.clone();
            let mut dn = g.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (marginal_log_likelihood(&m, &up).unwrap() - marginal_log_likelihood(&m, &dn).unwrap()) / (2.0 * h);
            prop_assert!((fd - grad[j]).abs() <= 1e-6 * grad[j].abs().max(1.0), "∂{j}: {fd} vs {}", grad[j]);
            let gu = gradient(&m, &up).unwrap();
            let gd = gradient(&m, &dn).unwrap();
            for k in 0..n {
                let fd = (gu[k] - gd[k]) / (2.0 * h);
                prop_assert!((fd - hess[(k, j)]).abs() <= 1e-4 * hess[(k, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn fixed_point_never_descends(m in prop_oneof![Just(3usize), Just(5usize)].prop_flat_map(connected)) {
        let opts = FitOptions { max_iter: 150, allow_unconverged: true, ..FitOptions::default() };
        let n = m.n();
        let fit = fit_fixed_point(&m, &vec![1.0; n], &opts).unwrap();
        let mut prev = marginal_log_likelihood(&m, &vec![1.0; n]).unwrap();
        for e in &fit.report.trace {
            prop_assert!(e.loglik >= prev - 1e-10);
            prev = e.loglik;
        }
    }

    #[test]
    fn two_forms_of_the_posterior_mean_agree((m, g) in sized(), dangling in any::<prop::sample::Index>()) {
        let n = g.len();
        let mut raw = m.raw_counts().clone();
        let empty = dangling.index(n);
        raw.row_mut(empty).iter_mut().for_each(|c| *c = 0);
        let m = m.with_raw_counts(raw).unwrap();
        let params = Params::for_matrix(g.clone(), &m).unwrap();
        let smoothed = posterior_smoothing_matrix(&m, &params).unwrap();
        let p = m.transition_matrix::<f64>(&DanglingPolicy::Uniform).unwrap();
        for i in 0..n {
            let a = smoothed.per_row_alpha()[i];
            let k = params.leave_out[i];
            let row_sum: f64 = smoothed.rows().row(i).iter().sum();
            prop_assert!((row_sum - 1.0).abs() < 1e-12);
            for (j, &gj) in g.iter().enumerate() {
                let got = smoothed.rows()[(i, j)];
                if i == j {
                    prop_assert_eq!(got, 0.0);
                } else if i == empty {
                    prop_assert!((got - gj / k).abs() < 1e-12);
                } else {
                    let convex = a * p.get(i, j) + (1.0 - a) * gj / k;
                    prop_assert!((got - convex).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scores_follow_node_order(
        (m, perm) in (3usize..7).prop_flat_map(|n| (connected(n), permutation(n))),
        method in prop::sample::select(vec![Method::Pr, Method::Eifa, Method::Psjr, Method::Ebef]),
    ) {
        let opts = ScoringOptions::<f64>::default();
        let base = score(&m, method, &opts);
        let moved = score(&m.permuted(&perm).unwrap(), method, &opts);
        match (base, moved) {
            (Ok(base), Ok(moved)) => {
                for (k, &p) in perm.iter().enumerate() {
                    prop_assert!((moved.scores.values[k] - base.scores.values[p]).abs() < 1e-8);
                    prop_assert_eq!(&moved.scores.labels[k], &base.scores.labels[p]);
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "only one ordering failed: {:?} / {:?}", a.err(), b.err()),
        }
    }

    #[test]
    fn stationary_vector_does_not_depend_on_the_start(
        m in (3usize..7).prop_flat_map(connected),
        starts in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 6), 5),
        alpha in 0.1f64..0.95,
    ) {
        let n = m.n();
        let p = m.transition_matrix::<f64>(&DanglingPolicy::Uniform).unwrap();
        let g = google_matrix(&p, alpha, &TeleportVector::uniform(n)).unwrap();
        let opts = PowerOptions::default();
        let reference = stationary_distribution(&g, &opts).unwrap();
        prop_assert!(stationarity_residual(&g, &reference.values) < 1e-10);
        for s in starts {
            let r = stationary_distribution_from(&g, s[..n].to_vec(), &opts).unwrap();
            for (a, b) in r.values.iter().zip(&reference.values) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn google_matrix_is_affine_in_alpha(m in (2usize..7).prop_flat_map(connected), alpha in 0.0f64..=1.0) {
        let n = m.n();
        let p = m.transition_matrix::<f64>(&DanglingPolicy::Uniform).unwrap();
        let t = TeleportVector::uniform(n);
        let g = google_matrix(&p, alpha, &t).unwrap();
        let u = 1.0 / n as f64;
        for i in 0..n {
            for j in 0..n {
                prop_assert!(((g.get(i, j) - u) - alpha * (p.get(i, j) - u)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn halves_reconstruct_the_counts(
        rows in (2usize..6).prop_flat_map(|n| counts(n, 200)),
        seed in any::<u64>(),
        replicate in 0u64..1000,
        beta in any::<bool>(),
    ) {
        let m = CitationMatrix::from_counts(rows, MaskPolicy::Diagonal).unwrap();
        let mode = if beta { SamplingMode::BetaBernoulli } else { SamplingMode::Bernoulli };
        let cfg = HalfSampleConfig { seed, mode, ..HalfSampleConfig::default() };
        let (a, b) = half_sample(&m, &cfg, replicate).unwrap();
        for ((x, y), c) in a.raw_counts().as_slice().iter().zip(b.raw_counts().as_slice()).zip(m.raw_counts().as_slice()) {
            prop_assert_eq!(x + y, *c);
        }
    }

    #[test]
    fn rank_statistics_ignore_monotone_transforms(
        pairs in prop::collection::vec((-50i32..50, -50i32..50), 3..25),
        scale in 0.1f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        let fx: Vec<f64> = x.iter().map(|v| (v / 20.0).exp() * scale + shift).collect();
        let gy: Vec<f64> = y.iter().map(|v| v * v * v + shift).collect();
        match (kendall_tau(&x, &y), kendall_tau(&fx, &gy)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
        match (spearman(&x, &y), spearman(&fx, &gy)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn attenuated_ratio_never_crosses_one(c in 1u64..500, r in 0u64..500, m in 1u64..500) {
        use citerank::analysis::attenuated_ratio;
        let s0: f64 = attenuated_ratio(c, r, m, 0.0);
        let mut prev = s0;
        for step in 1..=10 {
            let s = attenuated_ratio(c, r, m, f64::from(step) / 10.0);
            if s0 < 1.0 {
                prop_assert!(s >= prev && s < 1.0);
            } else if s0 > 1.0 {
                prop_assert!(s <= prev && s > 1.0);
            } else {
                prop_assert_eq!(s, 1.0);
            }
            prev = s;
        }
    }
}
