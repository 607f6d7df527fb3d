use std::fs;
use std::path::Path;
use std::time::Instant;

use citerank::eb::fit_dirichlet;
use citerank::{
    apply_kappa, fit_fixed_point, fit_inversion, fit_levenberg_marquardt, half_sampling_study, load_articles,
    load_matrix, prior_preset, score as score_method, score_with_prior, self_citation_profile, starting_gamma, Algorithm,
    CitationMatrix, Comparison, EbOptions, FitOptions, FitReport, HalfSampleConfig, MaskPolicy, PowerOptions,
    ScoringOptions, SelfCitationCap, StartingValue,
};
use serde_json::{json, Value};

use crate::manifest::RunManifest;
use crate::output::{emit, fixed, render, resolve, Report};
use crate::{
    CapRule, CliError, CompareArgs, FitArgs, FitFlags, HalfsampleArgs, KappaArgs, Level, MaskArg, ScoreArgs,
    ScoringArgs,
};

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "citerank".into(), |s| s.to_string_lossy().into_owned())
}

fn in_file(path: &Path, e: citerank::Error) -> CliError {
    match CliError::from(e) {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn load(path: &Path, articles: Option<&Path>, manifest: &mut RunManifest) -> CliResult<CitationMatrix> {
    let bytes = read(path)?;
    manifest.input("matrix", path, &bytes);
    let mut m = load_matrix(bytes.as_slice(), MaskPolicy::None).map_err(|e| in_file(path, e))?;
    if let Some(a) = articles {
        let bytes = read(a)?;
        manifest.input("articles", a, &bytes);
        let pairs = load_articles(bytes.as_slice()).map_err(|e| in_file(a, e))?;
        m = m.with_articles(pairs).map_err(|e| in_file(a, e))?;
    }
    Ok(m)
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("--{name} must be positive, got {v}")))
    }
}

fn fit_options(flags: &FitFlags, manifest: &mut RunManifest) -> CliResult<FitOptions<f64>> {
    positive("eps1", flags.eps1)?;
    positive("eps2", flags.eps2)?;
    if flags.max_iter == 0 {
        return Err(CliError::Input("--max-iter must be at least 1".into()));
    }
    manifest.param("optimizer", flags.optimizer);
    manifest.param("start", flags.start.to_string());
    manifest.param("eps1", flags.eps1);
    manifest.param("eps2", flags.eps2);
    manifest.param("max_iter", flags.max_iter);
    Ok(FitOptions {
        eps1: flags.eps1,
        max_iter: flags.max_iter,
        ..FitOptions::default()
    }
    .with_eps2(flags.eps2))
}

fn eb_options(flags: &FitFlags, manifest: &mut RunManifest) -> CliResult<EbOptions<f64>> {
    Ok(EbOptions {
        optimizer: flags.optimizer,
        start: flags.start.clone(),
        fit: fit_options(flags, manifest)?,
        power: PowerOptions::default(),
    })
}

fn scoring_options(args: &ScoringArgs, manifest: &mut RunManifest) -> CliResult<ScoringOptions<f64>> {
    if !(args.cap_share > 0.0 && args.cap_share < 1.0) {
        return Err(CliError::Input(format!("--cap-share must lie in (0, 1), got {}", args.cap_share)));
    }
    let cap = match args.cap {
        CapRule::Iterative => SelfCitationCap::Iterative { share: args.cap_share },
        CapRule::Closed => SelfCitationCap::ClosedForm { share: args.cap_share },
        CapRule::None => SelfCitationCap::None,
    };
    manifest.param("alpha", args.alpha);
    manifest.param("alpha2", args.alpha2);
    manifest.param("beta", args.beta);
    manifest.param("cap", format!("{:?}", args.cap).to_ascii_lowercase());
    manifest.param("cap_share", args.cap_share);
    Ok(ScoringOptions {
        alpha: args.alpha,
        alpha2: args.alpha2,
        beta: args.beta,
        self_citation_cap: cap,
        eb: eb_options(&args.fit, manifest)?,
        power: PowerOptions::default(),
    })
}

/// The report without wall-clock time or trace, so reruns give equal bytes.
fn report_json(report: &FitReport) -> Value {
    json!({
        "algorithm": report.algorithm,
        "iterations": report.iterations,
        "final_loglik": report.final_loglik,
        "converged": report.converged,
    })
}

fn default_name(matrix: &Path, command: &str) -> String {
    format!("{}.{command}.txt", stem(matrix))
}

pub fn score(a: &ScoreArgs, argv: Vec<String>) -> CliResult<()> {
    let mut manifest = RunManifest::new(argv);
    let m = load(&a.matrix, a.scoring.articles.as_deref(), &mut manifest)?;
    let opts = scoring_options(&a.scoring, &mut manifest)?;
    manifest.param("method", a.method);
    manifest.param("prior", a.prior);
    manifest.param("per_thousand", a.per_thousand);

    let out = match a.prior {
        Some(p) => score_with_prior(&m, a.method, &prior_preset(p, m.n())?, &opts)?,
        None => score_method(&m, a.method, &opts)?,
    };
    let scores = if a.per_thousand {
        out.scores.per_thousand()?
    } else {
        out.scores.clone()
    };
    let digits = if a.per_thousand { 3 } else { 6 };
    let ranks = scores.ranks();
    let ai = out.article_influence.as_ref();

    let mut headers = vec!["label", "rank", "score"];
    if ai.is_some() {
        headers.push("article_influence");
    }
    let rows: Vec<Vec<String>> = scores
        .order()
        .into_iter()
        .map(|i| {
            let mut row = vec![scores.labels[i].clone(), ranks[i].to_string(), fixed(scores.values[i], digits)];
            if let Some(ai) = ai {
                row.push(fixed(ai.values[i], 4));
            }
            row
        })
        .collect();
    let mut table = format!("# {}\n", a.method);
    table.push_str(&render(&headers, &rows));
    if let Some(p) = &out.params {
        table.push_str(&format!("# K = {}\n", fixed(p.concentration, 4)));
    }
    if let Some(r) = &out.report {
        table.push_str(&format!(
            "# {} iterations, log-likelihood {}\n",
            r.iterations,
            fixed(r.final_loglik, 6)
        ));
    }

    let entries: Vec<Value> = (0..scores.len())
        .map(|i| {
            json!({
                "label": scores.labels[i],
                "score": scores.values[i],
                "rank": ranks[i],
                "article_influence": ai.map(|a| a.values[i]),
            })
        })
        .collect();
    let result = json!({
        "method": a.method,
        "normalization": scores.normalization,
        "power_iterations": scores.iterations,
        "scores": entries,
        "dirichlet": out.params.as_ref().map(|p| json!({ "labels": m.labels(), "params": p })),
        "fit": out.report.as_ref().map(report_json),
    });
    let report = Report { table, result };
    emit(&report, &manifest, a.output.out.as_deref(), a.output.json, &default_name(&a.matrix, "score"))
}

fn mask_policy(mask: MaskArg) -> MaskPolicy {
    match mask {
        MaskArg::Diag => MaskPolicy::Diagonal,
        MaskArg::None => MaskPolicy::None,
    }
}

pub fn fit(a: &FitArgs, argv: Vec<String>) -> CliResult<()> {
    let mut manifest = RunManifest::new(argv);
    let m = load(&a.matrix, None, &mut manifest)?.with_mask_policy(mask_policy(a.mask));
    manifest.param("mask", format!("{:?}", a.mask).to_ascii_lowercase());
    manifest.param("bench", a.bench);
    let report = if a.bench {
        bench(&m, &a.fit, &mut manifest)?
    } else {
        single_fit(&m, &a.fit, &mut manifest)?
    };
    emit(&report, &manifest, a.output.out.as_deref(), a.output.json, &default_name(&a.matrix, "fit"))
}

fn single_fit(m: &CitationMatrix, flags: &FitFlags, manifest: &mut RunManifest) -> CliResult<Report> {
    let opts = eb_options(flags, manifest)?;
    let fit = fit_dirichlet(m, &opts)?;
    let p = &fit.params;
    let se = p.std_errors.clone().unwrap_or_else(|| vec![f64::NAN; p.n()]);
    let rows: Vec<Vec<String>> = (0..p.n())
        .map(|j| {
            vec![
                m.labels()[j].clone(),
                fixed(p.gamma[j], 6),
                fixed(se[j], 6),
                fixed(p.damping[j], 6),
            ]
        })
        .collect();
    let mut table = render(&["label", "gamma", "std_error", "alpha"], &rows);
    table.push_str(&format!(
        "# K = {}, log-likelihood {}, {} {} iterations, converged: {}\n",
        fixed(p.concentration, 6),
        fixed(fit.report.final_loglik, 6),
        fit.report.iterations,
        flags.optimizer,
        fit.report.converged
    ));
    let mut result = report_json(&fit.report);
    result["labels"] = json!(m.labels());
    result["params"] = json!(p);
    Ok(Report { table, result })
}

fn bench(m: &CitationMatrix, flags: &FitFlags, manifest: &mut RunManifest) -> CliResult<Report> {
    let base = FitOptions {
        allow_unconverged: true,
        ..fit_options(flags, manifest)?
    };
    manifest.param("bench_eps2", [1e-5, 1e-6]);
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for algorithm in [Algorithm::FixedPoint, Algorithm::Inversion, Algorithm::LevenbergMarquardt] {
        for start in [StartingValue::Empirical, StartingValue::Ones, StartingValue::Perks] {
            for eps2 in [1e-5, 1e-6] {
                let opts = base.with_eps2(eps2);
                let g0 = starting_gamma(m, &start, opts.floor)?;
                let clock = Instant::now();
                let fit = match algorithm {
                    Algorithm::FixedPoint => fit_fixed_point(m, &g0, &opts),
                    Algorithm::Inversion => fit_inversion(m, &g0, &opts),
                    _ => fit_levenberg_marquardt(m, &g0, &opts),
                };
                let seconds = clock.elapsed().as_secs_f64();
                let mut row = vec![algorithm.to_string(), start.to_string(), format!("{eps2:e}")];
                match &fit {
                    Ok(f) => {
                        row.extend([
                            f.report.iterations.to_string(),
                            if f.report.converged { "yes" } else { "no" }.to_string(),
                            fixed(f.report.final_loglik, 6),
                            fixed(f.params.concentration, 4),
                        ]);
                        entries.push(json!({
                            "algorithm": algorithm, "start": start.to_string(), "eps2": eps2,
                            "iterations": f.report.iterations, "converged": f.report.converged,
                            "final_loglik": f.report.final_loglik, "K": f.params.concentration,
                            "seconds": seconds,
                        }));
                    }
                    Err(e) => {
                        row.extend(["-".into(), "failed".into(), "-".into(), "-".into()]);
                        entries.push(json!({
                            "algorithm": algorithm, "start": start.to_string(), "eps2": eps2,
                            "error": e.to_string(), "seconds": seconds,
                        }));
                    }
                }
                row.push(format!("{seconds:.4}"));
                rows.push(row);
            }
        }
    }
    let table = render(
        &["algorithm", "start", "eps2", "iterations", "converged", "loglik", "K", "seconds"],
        &rows,
    );
    Ok(Report {
        table,
        result: json!({ "runs": entries }),
    })
}

pub fn compare(a: &CompareArgs, argv: Vec<String>) -> CliResult<()> {
    let mut manifest = RunManifest::new(argv);
    let m = load(&a.matrix, a.scoring.articles.as_deref(), &mut manifest)?;
    let opts = scoring_options(&a.scoring, &mut manifest)?;
    let article = match a.level {
        Level::Auto => m.articles().is_some(),
        Level::Total => false,
        Level::Article => {
            m.require_articles()?;
            true
        }
    };
    manifest.param("methods", &a.methods);
    manifest.param("level", if article { "article" } else { "total" });

    let mut entries = Vec::with_capacity(a.methods.len());
    for &method in &a.methods {
        let out = score_method(&m, method, &opts)?;
        let values = match (article, out.article_influence) {
            (true, Some(ai)) => ai,
            _ => out.scores,
        };
        entries.push((method.to_string(), values));
    }
    let cmp = Comparison::new(entries)?;
    let combined = cmp.combined();
    let mut headers = vec![""];
    headers.extend(cmp.methods.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = cmp
        .methods
        .iter()
        .enumerate()
        .map(|(r, name)| {
            let mut row = vec![name.clone()];
            row.extend((0..cmp.methods.len()).map(|c| fixed(combined[(r, c)], 3)));
            row
        })
        .collect();
    let mut table = render(&headers, &rows);
    table.push_str("# Kendall tau-b below the diagonal, Spearman above\n");
    let result = json!({
        "methods": cmp.methods,
        "level": if article { "article" } else { "total" },
        "labels": cmp.labels,
        "kendall": cmp.kendall.to_rows(),
        "spearman": cmp.spearman.to_rows(),
        "scores": cmp.scores,
    });
    emit(
        &Report { table, result },
        &manifest,
        a.output.out.as_deref(),
        a.output.json,
        &default_name(&a.matrix, "compare"),
    )
}

pub fn halfsample(a: &HalfsampleArgs, argv: Vec<String>) -> CliResult<()> {
    let mut manifest = RunManifest::new(argv);
    let m = load(&a.matrix, a.scoring.articles.as_deref(), &mut manifest)?;
    let opts = scoring_options(&a.scoring, &mut manifest)?;
    let cfg = HalfSampleConfig {
        a: a.a,
        b: a.b,
        m: a.m,
        seed: a.seed,
        mode: a.mode,
    };
    manifest.param("methods", &a.methods);
    manifest.param("config", cfg);

    let study = half_sampling_study(&m, &a.methods, &cfg, &opts)?;
    let names: Vec<String> = study.methods.iter().map(|s| s.method.to_string()).collect();
    let mut headers = vec!["label"];
    headers.extend(names.iter().map(String::as_str));
    let block = |pick: &dyn Fn(usize, usize) -> f64, digits| -> String {
        let rows: Vec<Vec<String>> = (0..m.n())
            .map(|i| {
                let mut row = vec![m.labels()[i].clone()];
                row.extend((0..names.len()).map(|k| fixed(pick(k, i), digits)));
                row
            })
            .collect();
        render(&headers, &rows)
    };
    let mut table = String::from("# mean scores on the complement\n");
    table.push_str(&block(&|k, i| study.methods[k].mean.values[i], 6));
    if m.articles().is_some() {
        table.push_str("# mean article influence\n");
        table.push_str(&block(
            &|k, i| study.methods[k].article_mean.as_ref().map_or(f64::NAN, |s| s.values[i]),
            4,
        ));
    }
    for s in &study.methods {
        table.push_str(&format!("# {}: {} replicates used, {} failed\n", s.method, s.succeeded, s.failed));
    }
    let result = json!({
        "config": study.config,
        "intra_class_correlation": cfg.intra_class_correlation(),
        "labels": m.labels(),
        "methods": study.methods.iter().map(|s| json!({
            "method": s.method,
            "mean": s.mean.values,
            "article_mean": s.article_mean.as_ref().map(|v| &v.values),
            "succeeded": s.succeeded,
            "failed": s.failed,
        })).collect::<Vec<_>>(),
    });
    emit(
        &Report { table, result },
        &manifest,
        a.output.out.as_deref(),
        a.output.json,
        &default_name(&a.matrix, "halfsample"),
    )
}

pub fn kappa(a: &KappaArgs, argv: Vec<String>) -> CliResult<()> {
    let mut manifest = RunManifest::new(argv);
    let m = load(&a.matrix, None, &mut manifest)?;
    manifest.param("apply", a.apply.as_ref().map(|p| p.display().to_string()));
    let profile = self_citation_profile::<f64>(&m)?;
    let rows: Vec<Vec<String>> = profile
        .entries
        .iter()
        .map(|e| {
            vec![
                e.label.clone(),
                e.self_citations.to_string(),
                e.received.to_string(),
                e.made.to_string(),
                fixed(e.rate, 4),
                fixed(e.kappa, 3),
                fixed(e.s0, 4),
                fixed(e.s_kappa, 4),
            ]
        })
        .collect();
    let mut table = render(&["label", "self", "received", "made", "rate", "kappa", "S0", "S_kappa"], &rows);
    table.push_str(&format!("# mean self-citation rate {}\n", fixed(profile.mean_rate(), 4)));
    if let Some(path) = &a.apply {
        let adjusted = apply_kappa(&m, &profile.kappas())?;
        let path = resolve(path);
        fs::write(&path, adjusted.to_delimited(',')).map_err(|e| CliError::io(&path, e))?;
    }
    let result = json!({
        "entries": profile.entries,
        "mean_rate": profile.mean_rate(),
    });
    emit(
        &Report { table, result },
        &manifest,
        a.output.out.as_deref(),
        a.output.json,
        &default_name(&a.matrix, "kappa"),
    )
}
