use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::report::{EvalReport, ParameterSummary, SeasonSummary};
use super::Season;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::domain(format!("unknown output format '{s}' (expected csv or json)"))),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io { path: path.to_path_buf(), source: e.into() };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
    }
}

/// Mean CRPS with seasons as columns and one row per model.
fn table2(summaries: &[SeasonSummary]) -> Table {
    let mut header = vec!["model"];
    header.extend(Season::ALL.iter().map(|s| s.name()));
    let mut t = Table::new(&header);
    for model in models(summaries) {
        let mut row = vec![model.clone()];
        for season in Season::ALL {
            let v = summaries.iter().find(|s| s.season == season && s.model == model).map(|s| s.mean_crps);
            row.push(opt(v));
        }
        t.push(row);
    }
    t
}

/// Pooled CRPS and PIT errors, one row per season and model.
fn table3(summaries: &[SeasonSummary]) -> Table {
    let mut t = Table::new(&["season", "model", "stations", "n_obs", "mean_crps", "e_mu", "e_sigma"]);
    for s in summaries {
        t.push(vec![
            s.season.to_string(),
            s.model.clone(),
            s.stations.to_string(),
            s.n_obs.to_string(),
            num(s.mean_crps),
            num(s.e_mu),
            num(s.e_sigma),
        ]);
    }
    t
}

fn table4(params: &[ParameterSummary]) -> Table {
    let mut t = Table::new(&["season", "model", "parameter", "mean", "sd", "stations"]);
    for p in params {
        t.push(vec![
            p.season.to_string(),
            p.model.clone(),
            p.parameter.clone(),
            num(p.mean),
            num(p.sd),
            p.stations.to_string(),
        ]);
    }
    t
}

fn models(summaries: &[SeasonSummary]) -> Vec<String> {
    let mut m: Vec<String> = summaries.iter().map(|s| s.model.clone()).collect();
    m.sort();
    m.dedup();
    m
}

fn csv_tables(report: &EvalReport) -> Vec<(&'static str, Table)> {
    let mut eval = Table::new(&["station_id", "season", "model", "mean_crps", "e_mu", "e_sigma", "n_obs"]);
    let mut params = Table::new(&[
        "station_id", "season", "model", "median", "iqr", "lambda3", "lambda4", "lambda5", "converged", "error",
    ]);
    for r in &report.rows {
        eval.push(vec![
            r.station_id.clone(),
            r.season.to_string(),
            r.model.clone(),
            opt(r.mean_crps),
            opt(r.e_mu),
            opt(r.e_sigma),
            r.n_obs.to_string(),
        ]);
        let p = r.params.map(|p| p.to_array().map(num)).unwrap_or_default();
        let mut row = vec![r.station_id.clone(), r.season.to_string(), r.model.clone()];
        row.extend(p);
        row.push(r.converged.map(|c| c.to_string()).unwrap_or_default());
        row.push(r.error.clone().unwrap_or_default());
        params.push(row);
    }

    let mut qq = Table::new(&["station_id", "season", "model", "p", "sample_quantile", "model_quantile"]);
    for q in &report.qq {
        qq.push(vec![
            q.station_id.clone(),
            q.season.to_string(),
            q.model.clone(),
            num(q.p),
            num(q.sample_quantile),
            num(q.model_quantile),
        ]);
    }
    let mut hist = Table::new(&["station_id", "season", "model", "lower", "upper", "count"]);
    for h in &report.pit_histogram {
        hist.push(vec![
            h.station_id.clone(),
            h.season.to_string(),
            h.model.clone(),
            num(h.lower),
            num(h.upper),
            h.count.to_string(),
        ]);
    }
    let mut coef = Table::new(&["season", "fit", "term", "coefficient"]);
    for c in &report.coefficients {
        coef.push(vec![c.season.to_string(), c.fit.clone(), c.term.clone(), num(c.coefficient)]);
    }
    let mut perm = Table::new(&["season", "model_a", "model_b", "pairing", "mean_difference", "p_value"]);
    for p in &report.permutation_tests {
        let pairing = serde_json::to_value(p.pairing).ok().and_then(|v| v.as_str().map(str::to_string));
        perm.push(vec![
            p.season.to_string(),
            p.model_a.clone(),
            p.model_b.clone(),
            pairing.unwrap_or_default(),
            num(p.mean_difference),
            num(p.p_value),
        ]);
    }
    let mut cleaning = Table::new(&["quantity", "value"]);
    if let Some(c) = &report.cleaning {
        cleaning.push(vec!["input_stations".into(), c.input_stations.to_string()]);
        cleaning.push(vec!["retained_stations".into(), c.retained_stations.to_string()]);
        cleaning.push(vec!["dropped_stations".into(), c.dropped_stations.to_string()]);
        cleaning.push(vec!["removed_negative_range".into(), c.removed_negative_range.to_string()]);
        for id in &c.dropped_station_ids {
            cleaning.push(vec!["dropped_station".into(), id.clone()]);
        }
    }

    let summaries = report.season_summaries();
    vec![
        ("eval.csv", eval),
        ("params.csv", params),
        ("table2.csv", table2(&summaries)),
        ("table3.csv", table3(&summaries)),
        ("table4.csv", table4(&report.parameter_summaries())),
        ("permutation.csv", perm),
        ("qq.csv", qq),
        ("pit_histogram.csv", hist),
        ("coefficients.csv", coef),
        ("cleaning.csv", cleaning),
    ]
}

#[derive(Serialize)]
struct Summaries {
    seasons: Vec<SeasonSummary>,
    parameters: Vec<ParameterSummary>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

/// Writes the report to `out_dir` and returns the paths written, in a fixed order.
///
/// Rows are sorted first, so identical reports always produce identical bytes.
pub fn emit(report: &EvalReport, format: OutputFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::Io { path: out_dir.to_path_buf(), source: e })?;
    let mut report = report.clone();
    report.sort();
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            for (name, table) in csv_tables(&report) {
                let path = out_dir.join(name);
                table.write(&path)?;
                written.push(path);
            }
        }
        OutputFormat::Json => {
            let path = out_dir.join("report.json");
            write_json(&path, &report)?;
            written.push(path);
            let path = out_dir.join("summary.json");
            write_json(&path, &Summaries { seasons: report.season_summaries(), parameters: report.parameter_summaries() })?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Reads a report written in JSON format.
pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::report::EvalRow;

    #[test]
    fn empty_report_gives_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit(&EvalReport::default(), OutputFormat::Csv, dir.path()).unwrap();
        let eval = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(eval, "station_id,season,model,mean_crps,e_mu,e_sigma,n_obs\n");
        let t2 = fs::read_to_string(dir.path().join("table2.csv")).unwrap();
        assert_eq!(t2, "model,winter,spring,summer,autumn\n");
    }

    #[test]
    fn json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rep = EvalReport::default();
        let mut row = EvalRow::pending("A", Season::Spring, "gamma", 10);
        row.mean_crps = Some(0.1 + 0.2);
        row.e_mu = Some(-1e-5);
        row.e_sigma = Some(3e-3);
        rep.rows.push(row);
        rep.rows.push(EvalRow::failed("B", Season::Winter, "gamma", 4, "bad".into()));
        emit(&rep, OutputFormat::Json, dir.path()).unwrap();
        let back = read_report(&dir.path().join("report.json")).unwrap();
        rep.sort();
        assert_eq!(back, rep);
    }

    #[test]
    fn missing_directory_is_created_and_bad_path_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        fs::write(&file, "x").unwrap();
        let err = emit(&EvalReport::default(), OutputFormat::Csv, &file.join("sub")).unwrap_err();
        assert!(err.to_string().contains("occupied"), "{err}");
    }
}
