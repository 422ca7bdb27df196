use std::fs;

use fpld::pipeline::{
    clean, emit, ingest, permutation_tests, read_report, run_marginal, run_regression, seasonal_datasets,
    synthetic_stations, write_inputs, Distribution, MarginalConfig, OutputFormat, Pairing, RegressionConfig,
    RegressionMode, Season, SeasonalDataset, SyntheticConfig, MIN_PER_SEASON,
};

fn stations() -> Vec<fpld::pipeline::StationSeries> {
    synthetic_stations(&SyntheticConfig { stations: 4, years: 3, ..SyntheticConfig::default() }).unwrap()
}

#[test]
fn csv_roundtrip_preserves_series() {
    let series = stations();
    let dir = tempfile::tempdir().unwrap();
    let (obs, meta) = (dir.path().join("obs.csv"), dir.path().join("stations.csv"));
    write_inputs(&series, &obs, &meta).unwrap();
    let back = ingest(&obs, &meta).unwrap();
    assert_eq!(back.dropped_non_finite + back.dropped_duplicate_dates + back.dropped_unknown_station, 0);
    assert_eq!(back.series.len(), series.len());
    for (a, b) in series.iter().zip(&back.series) {
        assert_eq!(a.meta, b.meta);
        assert_eq!(a.records.len(), b.records.len());
    }
}

#[test]
fn malformed_input_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (obs, meta) = (dir.path().join("obs.csv"), dir.path().join("stations.csv"));
    fs::write(&obs, "station_id,date,tmin,tmax,tmean\nA,2001-13-45,1,2,1.5\n").unwrap();
    fs::write(&meta, "station_id,easting,northing,altitude,distance_to_sea\nA,0,0,0,0\n").unwrap();
    let err = ingest(&obs, &meta).unwrap_err();
    assert!(err.is_validation(), "{err}");
    assert!(ingest(&dir.path().join("missing.csv"), &meta).is_err());
}

#[test]
fn cleaning_keeps_complete_stations() {
    let out = clean(&stations(), MIN_PER_SEASON);
    assert_eq!(out.counts.retained_stations, 4);
    let short = clean(&stations(), 10_000);
    assert_eq!(short.counts.retained_stations, 0);
    assert_eq!(short.counts.dropped_station_ids.len(), 4);
}

fn winter() -> SeasonalDataset {
    seasonal_datasets(&clean(&stations(), MIN_PER_SEASON).stations).remove(0)
}

#[test]
fn marginal_run_scores_every_model() {
    let data = winter();
    assert_eq!(data.season, Season::Winter);
    let report = run_marginal(&data, &MarginalConfig::default()).unwrap();
    assert_eq!(report.rows.len(), 4 * Distribution::ALL.len());
    assert!(report.rows.iter().all(|r| r.is_ok()));
    let summaries = report.season_summaries();
    let fpld = summaries.iter().find(|s| s.model == "fpld-mq").unwrap();
    let lognormal = summaries.iter().find(|s| s.model == "lognormal").unwrap();
    assert!(fpld.mean_crps <= lognormal.mean_crps);
    assert!(fpld.e_mu.abs() < 0.02);

    let perm = permutation_tests(&report, Pairing::Station, 199, 3).unwrap();
    assert_eq!(perm.len(), 6);
    assert!(perm.iter().all(|p| p.p_value > 0.0 && p.p_value <= 1.0));
}

#[test]
fn regression_and_emit_roundtrip() {
    let data = winter();
    let cfg = RegressionConfig { mode: RegressionMode::InSample, ..RegressionConfig::default() };
    let report = run_regression(&data, &cfg).unwrap();
    assert!(!report.coefficients.is_empty());
    assert_eq!(report.rows.len(), 4);

    let dir = tempfile::tempdir().unwrap();
    emit(&report, OutputFormat::Json, dir.path()).unwrap();
    let back = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(back.rows.len(), report.rows.len());
    let files = emit(&report, OutputFormat::Csv, dir.path()).unwrap();
    assert!(files.iter().any(|f| f.ends_with("table2.csv")));
}

#[test]
fn regression_needs_three_stations() {
    let mut data = winter();
    data.stations.truncate(2);
    assert!(run_regression(&data, &RegressionConfig::default()).is_err());
}
