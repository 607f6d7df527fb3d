//! Acceptance criteria 1 to 10, one PASS/FAIL/SKIP line each.
//!
//! Runs without the libtest harness so every line is printed whether or not
//! it passes. Criteria 3 and 4 name a 3×3 instance whose likelihood has no
//! finite maximizer; they are reported as FAIL and tolerated only when that is
//! the sole failing part and the grid oracle confirms the maximizer runs off to
//! infinity. Any other failure makes the process exit non-zero.
//! Criterion 9 needs `CITERANK_DATA_DIR` to hold `full47.csv` and `a47.csv`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use citerank::analysis::{attenuated_ratio, kappa};
use citerank::dirichlet::{gradient, hessian, DirichletParams as Params};
use citerank::markov::TransitionMatrix;
use citerank::{
    fit_fixed_point, fit_inversion, fit_levenberg_marquardt, half_sample, load_articles, load_matrix,
    marginal_log_likelihood, posterior_smoothing_matrix, score, scoring_matrix, self_citation_profile,
    starting_gamma, CitationMatrix, Comparison, DanglingPolicy, FitOptions, HalfSampleConfig, MaskPolicy, Method,
    SamplingMode, ScoringOptions, StartingValue,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, LogNormal};

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Verdict {
    status: Status,
    detail: String,
    /// Why a FAIL does not count against the run.
    known: Option<&'static str>,
}

impl Verdict {
    fn check(ok: bool, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self {
            status,
            detail,
            known: None,
        }
    }

    fn skip(detail: String) -> Self {
        Self {
            status: Status::Skip,
            detail,
            known: None,
        }
    }

    fn tolerate_if(mut self, cond: bool, reason: &'static str) -> Self {
        if cond && matches!(self.status, Status::Fail) {
            self.known = Some(reason);
        }
        self
    }
}

const UNBOUNDED: &str = "the 3x3 instance has no finite maximizer";

const TABLE1: [[u64; 5]; 5] = [
    [43, 0, 9, 0, 1],
    [1, 18, 24, 5, 7],
    [2, 3, 291, 2, 27],
    [0, 3, 4, 5, 0],
    [0, 5, 53, 0, 22],
];

fn matrix<const N: usize>(rows: [[u64; N]; N], policy: MaskPolicy) -> CitationMatrix {
    CitationMatrix::from_counts(rows.iter().map(|r| r.to_vec()).collect(), policy).unwrap()
}

fn table1(policy: MaskPolicy) -> CitationMatrix {
    matrix(TABLE1, policy)
}

fn tiny3() -> CitationMatrix {
    matrix([[0, 2, 1], [1, 0, 1], [4, 1, 0]], MaskPolicy::Diagonal)
}

fn well_posed3() -> CitationMatrix {
    matrix([[0, 9, 1], [1, 0, 8], [7, 2, 0]], MaskPolicy::Diagonal)
}

/// Counts in `0..=30` with one guaranteed off-diagonal citation per row.
fn random_counts(rng: &mut ChaCha8Rng, n: usize) -> CitationMatrix {
    let mut rows: Vec<Vec<u64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0..=30)).collect()).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        row[(i + 1) % n] += 1;
    }
    CitationMatrix::from_counts(rows, MaskPolicy::Diagonal).unwrap()
}

fn random_gamma(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.2..6.0)).collect()
}

fn random_corpus() -> Vec<CitationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..20).map(|k| random_counts(&mut rng, if k % 2 == 0 { 4 } else { 6 })).collect()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max)
}

fn tight(max_iter: usize) -> FitOptions<f64> {
    FitOptions {
        max_iter,
        ..FitOptions::default()
    }
    .with_eps2(1e-10)
}

/// Solves `rᵀG = rᵀ`, `Σr = 1` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn direct_stationary(g: &TransitionMatrix<f64>) -> Vec<f64> {
    let n = g.n();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| if i == n - 1 { 1.0 } else { g.get(j, i) - f64::from(u8::from(i == j)) })
                .collect();
            row.push(if i == n - 1 { 1.0 } else { 0.0 });
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

fn l1_residual(g: &TransitionMatrix<f64>, r: &[f64]) -> f64 {
    (0..g.n())
        .map(|j| ((0..g.n()).map(|i| r[i] * g.get(i, j)).sum::<f64>() - r[j]).abs())
        .sum()
}

/// The chain a method's score is the stationary vector of.
fn chain(m: &CitationMatrix, method: Method, params: Option<&Params<f64>>, opts: &ScoringOptions<f64>) -> TransitionMatrix<f64> {
    match params {
        Some(p) => posterior_smoothing_matrix(&m.with_mask_policy(method.mask_policy()), p)
            .unwrap()
            .into_transition(),
        None => scoring_matrix(m, method, opts).unwrap(),
    }
}

fn criterion_1() -> Verdict {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    for m in random_corpus() {
        let n = m.n();
        let g = random_gamma(&mut rng, n);
        let grad = gradient(&m, &g).unwrap();
        let hess = hessian(&m, &g).unwrap();
        for j in 0..n {
            let h = 1e-5 * g[j];
            let (mut up, mut dn) = (g.clone(), g.clone());
            up[j] += h;
            dn[j] -= h;
            let fd = (marginal_log_likelihood(&m, &up).unwrap() - marginal_log_likelihood(&m, &dn).unwrap()) / (2.0 * h);
            worst_g = worst_g.max((fd - grad[j]).abs() / grad[j].abs().max(1.0));
            let (gu, gd) = (gradient(&m, &up).unwrap(), gradient(&m, &dn).unwrap());
            for k in 0..n {
                let fd = (gu[k] - gd[k]) / (2.0 * h);
                worst_h = worst_h.max((fd - hess[(k, j)]).abs() / hess[(k, j)].abs().max(1.0));
            }
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    Verdict::check(
        worst_g < 1e-6 && worst_h < 1e-4 && secs < 5.0,
        format!("20 instances, gradient rel err {worst_g:.1e}, Hessian rel err {worst_h:.1e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Verdict {
    let mut corpus = vec![
        ("table1 diag", table1(MaskPolicy::Diagonal)),
        ("table1 none", table1(MaskPolicy::None)),
        ("tiny3", tiny3()),
        ("well-posed 3x3", well_posed3()),
        ("circulant", matrix([[0, 3, 9, 1], [1, 0, 3, 9], [9, 1, 0, 3], [3, 9, 1, 0]], MaskPolicy::Diagonal)),
        ("3x3 with diagonal", matrix([[5, 12, 1], [2, 7, 9], [8, 1, 20]], MaskPolicy::None)),
    ];
    corpus.extend(random_corpus().into_iter().map(|m| ("random", m)));
    let opts = FitOptions {
        allow_unconverged: true,
        ..tight(5000)
    };
    let mut worst = 0.0f64;
    let mut steps = 0;
    let mut bad = Vec::new();
    for (name, m) in &corpus {
        let g0 = starting_gamma(m, &StartingValue::Empirical, opts.floor).unwrap();
        let fit = fit_fixed_point(m, &g0, &opts).unwrap();
        let mut prev = marginal_log_likelihood(m, &g0).unwrap();
        for e in &fit.report.trace {
            worst = worst.max(prev - e.loglik);
            if e.loglik < prev - 1e-10 {
                bad.push(*name);
            }
            prev = e.loglik;
            steps += 1;
        }
    }
    Verdict::check(
        bad.is_empty(),
        format!("{} instances, {steps} steps, largest decrease {worst:.1e}, descending on {bad:?}", corpus.len()),
    )
}

struct Agreement {
    ok: bool,
    detail: String,
}

fn optimizers_agree(name: &str, m: &CitationMatrix) -> Agreement {
    let opts = tight(10_000);
    let g0 = starting_gamma(m, &StartingValue::Empirical, opts.floor).unwrap();
    let fits = [
        ("FP", fit_fixed_point(m, &g0, &opts)),
        ("INV", fit_inversion(m, &g0, &opts)),
        ("LM", fit_levenberg_marquardt(m, &g0, &opts)),
    ];
    let failed: Vec<String> = fits
        .iter()
        .filter_map(|(alg, f)| f.as_ref().err().map(|e| format!("{alg}: {e}")))
        .collect();
    if !failed.is_empty() {
        return Agreement {
            ok: false,
            detail: format!("{name}: {}", failed.join("; ")),
        };
    }
    let fits: Vec<_> = fits.into_iter().map(|(a, f)| (a, f.unwrap())).collect();
    let reference = &fits[2].1.params.gamma;
    let spread = fits.iter().map(|(_, f)| max_rel(&f.params.gamma, reference)).fold(0.0, f64::max);
    let (fp_iter, lm_iter) = (fits[0].1.report.iterations, fits[2].1.report.iterations);
    Agreement {
        ok: spread < 1e-4 && lm_iter < fp_iter,
        detail: format!(
            "{name}: spread {spread:.1e}, iterations FP {fp_iter} INV {} LM {lm_iter}",
            fits[1].1.report.iterations
        ),
    }
}

fn criterion_3() -> Verdict {
    let parts = [
        optimizers_agree("3x3", &tiny3()),
        optimizers_agree("table1", &table1(MaskPolicy::Diagonal)),
    ];
    Verdict::check(
        parts.iter().all(|p| p.ok),
        parts.iter().map(|p| p.detail.as_str()).collect::<Vec<_>>().join(" | "),
    )
    .tolerate_if(parts[1].ok && tiny3_oracle().on_boundary, UNBOUNDED)
}

/// Nelder-Mead on `−L` in log coordinates.
fn polish(m: &CitationMatrix, start: &[f64]) -> Vec<f64> {
    let f = |x: &[f64]| -> f64 {
        let g: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        -marginal_log_likelihood(m, &g).unwrap_or(f64::NEG_INFINITY)
    };
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..n {
        let mut v = start.to_vec();
        v[j] += 0.1;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..20_000 {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] < 1e-15 * values[0].abs().max(1.0) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = along(0.5);
            let fc = f(&contracted);
            if fc < values[n] {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for k in 1..=n {
                    simplex[k] = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[k][j] - simplex[0][j])).collect();
                    values[k] = f(&simplex[k]);
                }
            }
        }
    }
    simplex[0].iter().map(|v| v.exp()).collect()
}

struct Oracle {
    gamma: Vec<f64>,
    on_boundary: bool,
}

fn tiny3_oracle() -> &'static Oracle {
    static ORACLE: OnceLock<Oracle> = OnceLock::new();
    ORACLE.get_or_init(|| oracle3(&tiny3()))
}

/// Grid over `ln γ_j ∈ [−6, 8]` in steps of 1/4, then Nelder-Mead.
fn oracle3(m: &CitationMatrix) -> Oracle {
    let axis: Vec<f64> = (0..=56).map(|k| -6.0 + 0.25 * f64::from(k)).collect();
    let mut best = (f64::NEG_INFINITY, [0usize; 3]);
    for a in 0..axis.len() {
        for b in 0..axis.len() {
            for c in 0..axis.len() {
                let g = [axis[a].exp(), axis[b].exp(), axis[c].exp()];
                let l = marginal_log_likelihood(m, &g).unwrap();
                if l > best.0 {
                    best = (l, [a, b, c]);
                }
            }
        }
    }
    let last = axis.len() - 1;
    let on_boundary = best.1.iter().any(|&k| k == 0 || k == last);
    let start: Vec<f64> = best.1.iter().map(|&k| axis[k]).collect();
    Oracle {
        gamma: polish(m, &start),
        on_boundary,
    }
}

fn criterion_4() -> Verdict {
    let opts = tight(10_000);
    let mut details = Vec::new();
    let mut ok = true;

    let m = tiny3();
    let oracle = tiny3_oracle();
    let g0 = starting_gamma(&m, &StartingValue::Empirical, opts.floor).unwrap();
    ok &= !oracle.on_boundary;
    details.push(format!(
        "3x3 oracle {} at gamma ({:.4e}, {:.4e}, {:.4e})",
        if oracle.on_boundary { "hits the grid boundary" } else { "interior" },
        oracle.gamma[0],
        oracle.gamma[1],
        oracle.gamma[2]
    ));
    for (alg, fit) in [
        ("FP", fit_fixed_point(&m, &g0, &opts)),
        ("INV", fit_inversion(&m, &g0, &opts)),
        ("LM", fit_levenberg_marquardt(&m, &g0, &opts)),
    ] {
        match fit {
            Ok(f) => {
                let rel = max_rel(&f.params.gamma, &oracle.gamma);
                ok &= rel < 1e-4;
                details.push(format!("{alg} rel {rel:.1e}"));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{alg}: {e}"));
            }
        }
    }

    let companion = well_posed3();
    let reference = oracle3(&companion);
    let g0 = starting_gamma(&companion, &StartingValue::Empirical, opts.floor).unwrap();
    let lm = fit_levenberg_marquardt(&companion, &g0, &opts).unwrap();
    let companion_rel = max_rel(&lm.params.gamma, &reference.gamma);
    details.push(format!("well-posed 3x3 check: oracle vs LM rel {companion_rel:.1e}"));

    let scoring = ScoringOptions::<f64>::default();
    let mut worst = 0.0f64;
    let mut scored = Vec::new();
    for method in Method::ALL {
        let Ok(out) = score(&m, method, &scoring) else { continue };
        let g = chain(&m, method, out.params.as_ref(), &scoring);
        let direct = direct_stationary(&g);
        worst = worst.max(out.scores.values.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        scored.push(method.to_string());
    }
    ok &= worst < 1e-8;
    details.push(format!("stationary vs direct solve {worst:.1e} over {}", scored.join(",")));
    let rest_ok = !reference.on_boundary && companion_rel < 1e-4 && worst < 1e-8;
    Verdict::check(ok, details.join(", ")).tolerate_if(rest_ok && oracle.on_boundary, UNBOUNDED)
}

fn synthetic47(seed: u64) -> CitationMatrix {
    let n = 47;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size: Vec<f64> = (0..n).map(|_| LogNormal::new(0.0, 0.8).unwrap().sample(&mut rng)).collect();
    let total: f64 = size.iter().sum();
    let concentration = 50.0;
    let mut rows = vec![vec![0u64; n]; n];
    for i in 0..n {
        let cites = (200.0 * size[i]).round() as u64 + 20;
        let weights: Vec<f64> = (0..n)
            .map(|j| {
                if j == i {
                    0.0
                } else {
                    Gamma::new(concentration * size[j] / total, 1.0).unwrap().sample(&mut rng)
                }
            })
            .collect();
        let (mut left, mut mass): (u64, f64) = (cites, weights.iter().sum());
        for j in 0..n {
            if j == i || left == 0 {
                continue;
            }
            let c = if mass <= weights[j] {
                left
            } else {
                Binomial::new(left, (weights[j] / mass).min(1.0)).unwrap().sample(&mut rng)
            };
            rows[i][j] = c;
            left -= c;
            mass -= weights[j];
        }
        rows[i][i] = Binomial::new(cites, 0.2).unwrap().sample(&mut rng);
    }
    let labels: Vec<String> = (1..=n).map(|k| format!("J{k:02}")).collect();
    let articles: Vec<u64> = size.iter().map(|s| (100.0 * s).round() as u64 + 20).collect();
    CitationMatrix::new(labels, rows, MaskPolicy::None)
        .unwrap()
        .with_article_counts(articles)
        .unwrap()
}

fn criterion_5() -> Verdict {
    let opts = ScoringOptions::<f64>::default();
    let corpus = vec![
        table1(MaskPolicy::None),
        table1(MaskPolicy::None).with_article_counts(vec![30, 20, 60, 10, 40]).unwrap(),
        tiny3(),
        well_posed3(),
        matrix([[0, 3, 0], [2, 0, 0], [1, 1, 0]], MaskPolicy::None),
        synthetic47(5),
    ];
    let (mut residual, mut sum_err, mut count) = (0.0f64, 0.0f64, 0);
    for m in &corpus {
        for method in Method::ALL {
            let Ok(out) = score(m, method, &opts) else { continue };
            let g = chain(m, method, out.params.as_ref(), &opts);
            residual = residual.max(l1_residual(&g, &out.scores.values));
            sum_err = sum_err.max((out.scores.values.iter().sum::<f64>() - 1.0).abs());
            count += 1;
        }
    }
    Verdict::check(
        residual < 1e-9 && sum_err < 1e-12 && count >= 25,
        format!("{count} score vectors, max residual {residual:.1e}, max |sum - 1| {sum_err:.1e}"),
    )
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let trials = 200;
    for t in 0..trials {
        let n = rng.random_range(3..=8);
        let m = random_counts(&mut rng, n);
        let mut raw = m.raw_counts().clone();
        if t % 3 == 0 {
            raw.row_mut(rng.random_range(0..n)).iter_mut().for_each(|c| *c = 0);
        }
        let policy = if t % 2 == 0 { MaskPolicy::Diagonal } else { MaskPolicy::None };
        let m = m.with_raw_counts(raw).unwrap().with_mask_policy(policy);
        let g = random_gamma(&mut rng, n);
        let params = Params::for_matrix(g.clone(), &m).unwrap();
        let smoothed = posterior_smoothing_matrix(&m, &params).unwrap();
        let p = m.transition_matrix::<f64>(&DanglingPolicy::Uniform).unwrap();
        let counts = m.counts();
        for i in 0..n {
            let open: Vec<usize> = (0..n).filter(|&j| !m.is_masked(i, j)).collect();
            let k: f64 = open.iter().map(|&j| g[j]).sum();
            let row_n: f64 = open.iter().map(|&j| counts[(i, j)] as f64).sum();
            let alpha = row_n / (row_n + k);
            for &j in &open {
                let ratio = (counts[(i, j)] as f64 + g[j]) / (row_n + k);
                let observed = if row_n > 0.0 { p.get(i, j) } else { 0.0 };
                let convex = alpha * observed + (1.0 - alpha) * g[j] / k;
                let got = smoothed.rows()[(i, j)];
                worst = worst.max((ratio - convex).abs()).max((got - ratio).abs()).max((got - convex).abs());
            }
        }
    }
    Verdict::check(worst < 1e-12, format!("{trials} random instances, max discrepancy {worst:.1e}"))
}

fn criterion_7() -> Verdict {
    let (a, b, c) = (10.0, 10.0, 100u64);
    let m = CitationMatrix::from_counts(vec![vec![c, 0], vec![0, 0]], MaskPolicy::None).unwrap();
    let cfg = HalfSampleConfig {
        a,
        b,
        m: 1,
        seed: 7,
        mode: SamplingMode::BetaBernoulli,
    };
    let draws = 10_000u64;
    let mut values = Vec::with_capacity(draws as usize);
    let mut exact = true;
    for r in 0..draws {
        let (train, rest) = half_sample(&m, &cfg, r).unwrap();
        let t = train.raw_counts()[(0, 0)];
        exact &= t + rest.raw_counts()[(0, 0)] == c;
        values.push(t as f64);
    }
    let table = table1(MaskPolicy::Diagonal);
    for r in 0..50 {
        let (x, y) = half_sample(&table, &cfg, r).unwrap();
        for ((p, q), o) in x.raw_counts().as_slice().iter().zip(y.raw_counts().as_slice()).zip(table.raw_counts().as_slice()) {
            exact &= p + q == *o;
        }
    }
    let n = draws as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let cf = c as f64;
    let theory = cf * a * b * (a + b + cf) / ((a + b).powi(2) * (a + b + 1.0));
    let sigma = (theory / n).sqrt();
    Verdict::check(
        (mean - 50.0).abs() < 3.0 * sigma && (var - theory).abs() < 0.1 * theory && exact,
        format!(
            "mean {mean:.3} (3 sigma = {:.3}), variance {var:.2} vs {theory:.2}, reconstruction {}",
            3.0 * sigma,
            if exact { "exact" } else { "broken" }
        ),
    )
}

fn criterion_8() -> Verdict {
    let m = CitationMatrix::from_counts(vec![vec![10, 20], vec![3, 5]], MaskPolicy::None).unwrap();
    let e = &self_citation_profile::<f64>(&m).unwrap().entries[0];
    let node = (e.self_citations, e.received, e.made) == (10, 3, 20) && e.kappa == 0.3 && e.s_kappa == 6.0 / 23.0;
    let direct = attenuated_ratio(10, 3, 20, kappa::<f64>(10, 3, 20)) == 6.0 / 23.0;
    let mut rule = true;
    for c in 0..25u64 {
        for r in 0..25u64 {
            for mm in 0..25u64 {
                let k = kappa::<f64>(c, r, mm);
                if c == 0 || r.min(mm) >= c {
                    rule &= k == 1.0;
                } else {
                    rule &= k == r.min(mm) as f64 / c as f64 && k < 1.0;
                }
            }
        }
    }
    Verdict::check(
        node && direct && rule,
        format!(
            "kappa {}, S(kappa) {} (6/23 = {}), unit-kappa rule {}",
            e.kappa,
            e.s_kappa,
            6.0 / 23.0,
            if rule { "holds" } else { "violated" }
        ),
    )
}

fn normalized(label: &str) -> String {
    label.chars().filter(char::is_ascii_alphanumeric).collect::<String>().to_ascii_uppercase()
}

fn criterion_9() -> Verdict {
    let Some(dir) = std::env::var_os("CITERANK_DATA_DIR").map(PathBuf::from) else {
        return Verdict::skip("CITERANK_DATA_DIR not set, 47-journal dataset unavailable".into());
    };
    let (full, arts) = (dir.join("full47.csv"), dir.join("a47.csv"));
    if !full.is_file() || !arts.is_file() {
        return Verdict::skip(format!("full47.csv or a47.csv missing from {}", dir.display()));
    }
    match dataset_checks(&full, &arts) {
        Ok((ok, detail)) => Verdict::check(ok, detail),
        Err(e) => Verdict::check(false, e),
    }
}

fn dataset_checks(full: &std::path::Path, arts: &std::path::Path) -> Result<(bool, String), String> {
    let err = |e: citerank::Error| e.to_string();
    let file = |p: &std::path::Path| std::fs::File::open(p).map_err(|e| e.to_string());
    let m = load_matrix(file(full)?, MaskPolicy::None).map_err(err)?;
    let m = m.with_articles(load_articles(file(arts)?).map_err(err)?).map_err(err)?;
    let find = |name: &str| -> Result<usize, String> {
        m.labels()
            .iter()
            .position(|l| normalized(l) == normalized(name))
            .ok_or(format!("no journal labelled {name}"))
    };
    let (jasa, stataj, jss) = (find("JASA")?, find("STATAJ")?, find("JSS")?);
    let mut opts = ScoringOptions::<f64>::default();
    opts.eb.fit = opts.eb.fit.with_eps2(1e-10);
    let mut checks: Vec<(String, bool)> = Vec::new();
    let near = |what: &str, got: f64, want: f64, tol: f64| (format!("{what} {got:.3}"), (got - want).abs() <= tol);

    let ebef = score(&m, Method::Ebef, &opts).map_err(err)?;
    let p = ebef.params.as_ref().unwrap();
    checks.push(near("K", p.concentration, 58.10, 0.5));
    checks.push(near("gamma_JASA", p.gamma[jasa], 6.61, 0.1));
    checks.push(near("gamma_STATAJ", p.gamma[stataj], 0.06, 0.02));
    checks.push(near("mean alpha", p.damping.iter().sum::<f64>() / p.n() as f64, 0.77, 0.01));
    checks.push(near("alpha_STATAJ", p.damping[stataj], 0.39, 0.02));
    let ebpr = score(&m, Method::Ebpr, &opts).map_err(err)?;
    checks.push(near("unmasked K", ebpr.params.as_ref().unwrap().concentration, 49.00, 0.5));

    let top: Vec<String> = ebef.scores.order()[..5].iter().map(|&i| normalized(&m.labels()[i])).collect();
    let want: Vec<String> = ["JASA", "AOS", "JRSS-B", "BKA", "BCS"].iter().map(|s| normalized(s)).collect();
    checks.push((format!("EBEF top-5 {top:?}"), top == want));

    let eifa = score(&m, Method::Eifa, &opts).map_err(err)?;
    let cmp = Comparison::new(vec![
        ("EIFA".into(), eifa.article_influence.unwrap()),
        ("EBEF".into(), ebef.article_influence.unwrap()),
    ])
    .map_err(err)?;
    checks.push(near("Kendall(EIFA,EBEF)", cmp.kendall[(0, 1)], 0.965, 0.005));
    checks.push(near("Spearman(EIFA,EBEF)", cmp.spearman[(0, 1)], 0.996, 0.002));

    let profile = self_citation_profile::<f64>(&m).map_err(err)?;
    let below: Vec<usize> = (0..m.n()).filter(|&i| profile.entries[i].kappa < 1.0).collect();
    checks.push((format!("kappa < 1 for {below:?}"), below == {
        let mut v = vec![stataj, jss];
        v.sort_unstable();
        v
    }));
    checks.push(near("kappa_STATAJ", profile.entries[stataj].kappa, 0.442, 0.005));
    checks.push(near("kappa_JSS", profile.entries[jss].kappa, 0.887, 0.005));

    let ok = checks.iter().all(|c| c.1);
    let detail = checks
        .iter()
        .map(|(d, pass)| if *pass { d.clone() } else { format!("{d} (off)") })
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, detail))
}

fn criterion_10() -> Verdict {
    let m = synthetic47(10);
    let masked = m.with_mask_policy(MaskPolicy::Diagonal);
    let opts = FitOptions::<f64>::default();
    let clock = Instant::now();
    let g0 = starting_gamma(&masked, &StartingValue::Empirical, opts.floor).unwrap();
    let fit = fit_fixed_point(&masked, &g0, &opts);
    let fp_secs = clock.elapsed().as_secs_f64();
    let fp_iter = fit.as_ref().map_or(0, |f| f.report.iterations);

    let clock = Instant::now();
    let scoring = ScoringOptions::<f64>::default();
    let pipeline = Method::ALL
        .iter()
        .map(|&method| score(&m, method, &scoring).map(|s| (method.to_string(), s.article_influence.unwrap())))
        .collect::<Result<Vec<_>, _>>()
        .and_then(Comparison::new);
    let all_secs = clock.elapsed().as_secs_f64() + fp_secs;
    Verdict::check(
        fit.is_ok() && pipeline.is_ok() && fp_secs < 5.0 && all_secs < 30.0,
        format!(
            "synthetic 47 nodes: FP {fp_iter} iterations in {fp_secs:.2} s, fit + score 5 methods + compare in {all_secs:.2} s{}",
            pipeline.err().map_or(String::new(), |e| format!(", pipeline error: {e}"))
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "gradient and Hessian", criterion_1),
        (2, "fixed-point ascent", criterion_2),
        (3, "optimizer agreement", criterion_3),
        (4, "oracle equivalence", criterion_4),
        (5, "stationarity and normalization", criterion_5),
        (6, "shrinkage identity", criterion_6),
        (7, "half-sampling moments", criterion_7),
        (8, "kappa rule", criterion_8),
        (9, "47-journal dataset", criterion_9),
        (10, "desk-scale performance", criterion_10),
    ];
    let (mut failed, mut known) = (Vec::new(), Vec::new());
    for (n, name, run) in criteria {
        let v = run();
        let tag = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let note = match (&v.status, v.known) {
            (Status::Fail, Some(reason)) => {
                known.push(n);
                format!(" [unattainable: {reason}]")
            }
            (Status::Fail, None) => {
                failed.push(n);
                String::new()
            }
            _ => String::new(),
        };
        println!("criterion {n:>2} {tag} {name}: {}{note}", v.detail);
    }
    println!("unattainable criteria: {known:?}, unexpected failures: {failed:?}");
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
