use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fpld::dist::FpldParams;
use fpld::estimation::FitConfig;
use fpld::pipeline::{
    clean, emit, ingest, permutation_tests, run_marginal, run_regression, seasonal_datasets, synthetic_stations,
    write_inputs, CleanCounts, EvalReport, MarginalConfig, OutputFormat, RegressionConfig, SeasonalDataset,
    SyntheticConfig,
};
use fpld::scoring::{crps_fpld, pit_errors, pit_values};
use fpld::simstudy::{run_simulation, SimConfig, SimReport};
use fpld::FpldStar;
use log::info;
use serde_json::{json, Value};

use crate::args::{CheckArgs, CrpsArgs, FitArgs, RegressArgs, SimulateArgs, StationInput, SynthesizeArgs};
use crate::check::run_checks;
use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::runtime(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

/// Overlays inline JSON on `base`, so unspecified fields keep the base values.
pub fn fit_config(base: FitConfig, inline: Option<&str>) -> Result<FitConfig, CliError> {
    let Some(text) = inline else { return Ok(base) };
    let overlay: Value = serde_json::from_str(text).map_err(|e| CliError::validation(format!("--fit: {e}")))?;
    let Value::Object(overlay) = overlay else {
        return Err(CliError::validation("--fit must be a JSON object"));
    };
    let mut merged = serde_json::to_value(&base).expect("config serialises");
    for (k, v) in overlay {
        merged[k] = v;
    }
    let cfg: FitConfig = serde_json::from_value(merged).map_err(|e| CliError::validation(format!("--fit: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn station_fit_config(common: &StationInput) -> Result<FitConfig, CliError> {
    let base = FitConfig { enforce_positive_support: true, ..FitConfig::default() };
    let mut cfg = fit_config(base, common.fit.as_deref())?;
    if common.allow_negative_support {
        cfg.enforce_positive_support = false;
    }
    Ok(cfg)
}

fn load(common: &StationInput) -> Result<(Vec<SeasonalDataset>, CleanCounts), CliError> {
    let ing = ingest(&common.input, &common.stations)?;
    info!(
        "ingested {} stations; dropped {} non-finite rows, {} duplicate dates, {} rows of unknown stations",
        ing.series.len(),
        ing.dropped_non_finite,
        ing.dropped_duplicate_dates,
        ing.dropped_unknown_station
    );
    let cleaned = clean(&ing.series, common.min_per_season);
    if cleaned.stations.is_empty() {
        log::warn!("no station has at least {} observations in every season", common.min_per_season);
    }
    let datasets = seasonal_datasets(&cleaned.stations)
        .into_iter()
        .filter(|d| common.season.is_empty() || common.season.contains(&d.season))
        .collect();
    Ok((datasets, cleaned.counts))
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let c = &args.common;
    let cfg = MarginalConfig {
        estimators: args.estimator.clone(),
        distributions: args.distribution.clone(),
        fit: station_fit_config(c)?,
        ..MarginalConfig::default()
    };
    cfg.validate()?;
    let (datasets, counts) = load(c)?;
    let mut report = EvalReport { cleaning: Some(counts), ..EvalReport::default() };
    for ds in &datasets {
        report.merge(run_marginal(ds, &cfg)?);
    }
    if args.permutations > 0 {
        for &pairing in &args.pairing {
            report.permutation_tests.extend(permutation_tests(&report, pairing, args.permutations, c.seed)?);
        }
    }
    print_paths(&emit(&report, c.format, &c.out)?);
    Ok(())
}

pub fn regress(args: &RegressArgs) -> Result<(), CliError> {
    let c = &args.common;
    let cfg = RegressionConfig { mode: args.mode, fit: station_fit_config(c)?, ..RegressionConfig::default() };
    let (datasets, counts) = load(c)?;
    let mut report = EvalReport { cleaning: Some(counts), ..EvalReport::default() };
    for ds in &datasets {
        report.merge(run_regression(ds, &cfg)?);
    }
    print_paths(&emit(&report, c.format, &c.out)?);
    Ok(())
}

fn rows_csv(report: &SimReport, timings: bool) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["replicate", "n", "estimator", "skill", "mse", "converged", "error"];
    if timings {
        header.push("elapsed_ms");
    }
    let enc = |e: csv::Error| CliError::runtime(format!("csv encoding failed: {e}"));
    w.write_record(&header).map_err(enc)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.rows {
        let mut rec = vec![
            r.replicate.to_string(),
            r.n.to_string(),
            r.estimator.to_string(),
            opt(r.skill),
            opt(r.mse),
            r.converged.to_string(),
            r.error.clone().unwrap_or_default(),
        ];
        if timings {
            rec.push((r.elapsed.as_secs_f64() * 1e3).to_string());
        }
        w.write_record(&rec).map_err(enc)?;
    }
    w.into_inner().map_err(|e| CliError::runtime(e.to_string()))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.min_exponent > args.max_exponent {
        return Err(CliError::validation("--min-exponent must not exceed --max-exponent"));
    }
    let cfg = SimConfig {
        replicates: args.replicates,
        sample_size_exponents: (args.min_exponent..=args.max_exponent).collect(),
        estimators: args.estimator.clone(),
        seed: args.seed,
        skill_mode: args.skill_mode,
        mc_samples: args.mc_samples,
        strict_finite_support: args.strict_finite_support,
        fit: fit_config(FitConfig::default(), args.fit.as_deref())?,
    };
    cfg.validate()?;
    let report = run_simulation(&cfg)?;
    let summary = args.out.join("summary.csv");
    write_file(&summary, report.summary_csv(args.record_timings)?.as_bytes())?;
    let rows = match args.format {
        OutputFormat::Csv => {
            let path = args.out.join("rows.csv");
            write_file(&path, &rows_csv(&report, args.record_timings)?)?;
            path
        }
        OutputFormat::Json => {
            let path = args.out.join("rows.json");
            let mut text = serde_json::to_string_pretty(&report.rows_json(args.record_timings))
                .map_err(|e| CliError::runtime(e.to_string()))?;
            text.push('\n');
            write_file(&path, text.as_bytes())?;
            path
        }
    };
    print_paths(&[summary, rows]);
    Ok(())
}

fn read_observations(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| CliError::validation(format!("{}:{}: not a number: '{t}'", path.display(), i + 1)))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::validation(format!("{}: no observations", path.display())));
    }
    Ok(out)
}

pub fn crps(args: &CrpsArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.params).map_err(|e| io_err(&args.params, e))?;
    let params: FpldParams =
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", args.params.display())))?;
    let nat = params.to_natural();
    let y = read_observations(&args.input)?;
    let scores = y.iter().map(|&v| crps_fpld(&nat, v).map(|c| c.value())).collect::<fpld::Result<Vec<_>>>()?;
    let pit = pit_values(&nat, &y)?;
    let mean = fpld::scoring::pairwise_sum(&scores) / scores.len() as f64;
    let bytes = match args.format {
        OutputFormat::Csv => {
            let mut s = String::from("y,crps,pit\n");
            for ((v, c), u) in y.iter().zip(&scores).zip(&pit) {
                s.push_str(&format!("{v},{c},{u}\n"));
            }
            s.into_bytes()
        }
        OutputFormat::Json => {
            let e = pit_errors(&pit).ok();
            let v = json!({
                "n": y.len(),
                "mean_crps": mean,
                "e_mu": e.map(|e| e.e_mu),
                "e_sigma": e.map(|e| e.e_sigma),
                "crps": scores,
                "pit": pit,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("json encodes");
            s.push('\n');
            s.into_bytes()
        }
    };
    info!("mean CRPS {mean} over {} observations", y.len());
    match &args.out {
        Some(path) => write_file(path, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::runtime(e.to_string())),
    }
}

pub fn check(args: &CheckArgs) -> Result<(), CliError> {
    if args.cases == 0 {
        return Err(CliError::validation("--cases must be positive"));
    }
    let outcomes = run_checks(args.cases, args.seed);
    let mut text = String::new();
    for o in &outcomes {
        text.push_str(&o.line());
        text.push('\n');
    }
    print!("{text}");
    if let Some(path) = &args.out {
        write_file(path, text.as_bytes())?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    if failed > 0 {
        return Err(CliError::runtime(format!("{failed} check(s) failed")));
    }
    Ok(())
}

pub fn synthesize(args: &SynthesizeArgs) -> Result<(), CliError> {
    let mut cfg = SyntheticConfig {
        stations: args.count,
        start_year: args.start_year,
        years: args.years,
        altitude_effect: args.altitude_effect,
        seed: args.seed,
        ..SyntheticConfig::default()
    };
    if let Some(t) = &args.truth {
        let values: [f64; 5] =
            t.as_slice().try_into().map_err(|_| CliError::validation("--truth needs exactly 5 values"))?;
        cfg.truth = FpldStar::from_array(values)?;
    }
    let series = synthetic_stations(&cfg)?;
    let (obs, st) = (args.out.join("observations.csv"), args.out.join("stations.csv"));
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    write_inputs(&series, &obs, &st)?;
    print_paths(&[obs, st]);
    Ok(())
}
