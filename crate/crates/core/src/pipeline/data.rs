use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub tmin: f64,
    pub tmax: f64,
    /// Missing values leave the record usable for the range but not the covariates.
    pub tmean: Option<f64>,
    /// `tmax − tmin`.
    pub dtr: f64,
}

impl DailyRecord {
    pub fn new(date: NaiveDate, tmin: f64, tmax: f64, tmean: Option<f64>) -> Self {
        Self { date, tmin, tmax, tmean, dtr: tmax - tmin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMeta {
    pub station_id: String,
    pub easting: f64,
    pub northing: f64,
    pub altitude: f64,
    pub distance_to_sea: f64,
}

/// Station metadata with its date-sorted daily records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSeries {
    pub meta: StationMeta,
    pub records: Vec<DailyRecord>,
}

impl StationSeries {
    pub fn id(&self) -> &str {
        &self.meta.station_id
    }
}

/// Parsed input with counts of the rows that were skipped.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub series: Vec<StationSeries>,
    pub dropped_non_finite: usize,
    pub dropped_duplicate_dates: usize,
    pub dropped_unknown_station: usize,
}

const OBS_COLUMNS: [&str; 5] = ["station_id", "date", "tmin", "tmax", "tmean"];
const STATION_COLUMNS: [&str; 5] = ["station_id", "easting", "northing", "altitude", "distance_to_sea"];

struct Table {
    path: String,
    header: Vec<String>,
    records: Vec<(u64, csv::StringRecord)>,
}

fn schema(path: &str, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), line, column: column.to_string(), message: message.into() }
}

fn read_table(path: &Path, required: &[&str]) -> Result<Option<Table>> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(file);
    let header: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(e) => return Err(schema(&display, 1, "", e.to_string())),
    };
    if header.is_empty() || header.iter().all(String::is_empty) {
        warn!("{display} is empty");
        return Ok(None);
    }
    for col in required {
        if !header.iter().any(|h| h == col) {
            return Err(schema(&display, 1, col, "required column missing from header"));
        }
    }
    let mut records = Vec::new();
    for rec in reader.records() {
        match rec {
            Ok(r) => {
                let line = r.position().map_or(0, |p| p.line());
                records.push((line, r));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(schema(&display, line, "", e.to_string()));
            }
        }
    }
    Ok(Some(Table { path: display, header, records }))
}

impl Table {
    fn index(&self, col: &str) -> usize {
        self.header.iter().position(|h| h == col).expect("column checked at read time")
    }

    fn text<'a>(&self, rec: &'a csv::StringRecord, col: usize) -> &'a str {
        rec.get(col).unwrap_or("")
    }

    /// `Ok(None)` for an empty cell; non-finite spellings parse to non-finite values.
    fn number(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<Option<f64>> {
        let s = self.text(rec, col);
        if s.is_empty() || s.eq_ignore_ascii_case("na") {
            return Ok(None);
        }
        s.parse::<f64>()
            .map(Some)
            .map_err(|_| schema(&self.path, line, &self.header[col], format!("'{s}' is not a number")))
    }
}

fn read_stations(path: &Path) -> Result<Vec<StationMeta>> {
    let Some(t) = read_table(path, &STATION_COLUMNS)? else { return Ok(Vec::new()) };
    let idx: Vec<usize> = STATION_COLUMNS.iter().map(|c| t.index(c)).collect();
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(t.records.len());
    for (line, rec) in &t.records {
        let id = t.text(rec, idx[0]);
        if id.is_empty() {
            return Err(schema(&t.path, *line, "station_id", "empty station identifier"));
        }
        if seen.insert(id.to_string(), *line).is_some() {
            return Err(schema(&t.path, *line, "station_id", format!("station '{id}' listed twice")));
        }
        let mut vals = [0.0; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            let col = idx[k + 1];
            *v = match t.number(*line, rec, col)? {
                Some(x) if x.is_finite() => x,
                _ => return Err(schema(&t.path, *line, &t.header[col], "value must be a finite number")),
            };
        }
        out.push(StationMeta {
            station_id: id.to_string(),
            easting: vals[0],
            northing: vals[1],
            altitude: vals[2],
            distance_to_sea: vals[3],
        });
    }
    Ok(out)
}

/// Reads the daily observations and the station metadata.
///
/// Rows with a missing or non-finite `tmin`/`tmax`, repeated dates and unknown
/// stations are dropped and counted; malformed values are schema errors.
pub fn ingest(observations: &Path, stations: &Path) -> Result<IngestReport> {
    let metas = read_stations(stations)?;
    let mut report = IngestReport::default();
    let mut by_id: BTreeMap<String, BTreeMap<NaiveDate, DailyRecord>> =
        metas.iter().map(|m| (m.station_id.clone(), BTreeMap::new())).collect();
    if let Some(t) = read_table(observations, &OBS_COLUMNS[..4])? {
        let (c_id, c_date, c_min, c_max) = (t.index("station_id"), t.index("date"), t.index("tmin"), t.index("tmax"));
        let c_mean = t.header.iter().position(|h| h == "tmean");
        for (line, rec) in &t.records {
            let id = t.text(rec, c_id);
            let date_text = t.text(rec, c_date);
            let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
                .map_err(|_| schema(&t.path, *line, "date", format!("'{date_text}' is not an ISO-8601 date")))?;
            let tmin = t.number(*line, rec, c_min)?;
            let tmax = t.number(*line, rec, c_max)?;
            let tmean = match c_mean {
                Some(c) => t.number(*line, rec, c)?.filter(|v| v.is_finite()),
                None => None,
            };
            let (Some(tmin), Some(tmax)) = (tmin, tmax) else {
                report.dropped_non_finite += 1;
                continue;
            };
            if !tmin.is_finite() || !tmax.is_finite() {
                report.dropped_non_finite += 1;
                continue;
            }
            let Some(series) = by_id.get_mut(id) else {
                report.dropped_unknown_station += 1;
                continue;
            };
            if series.contains_key(&date) {
                report.dropped_duplicate_dates += 1;
                continue;
            }
            series.insert(date, DailyRecord::new(date, tmin, tmax, tmean));
        }
    }
    for (what, count) in [
        ("non-finite rows", report.dropped_non_finite),
        ("repeated dates", report.dropped_duplicate_dates),
        ("rows for unknown stations", report.dropped_unknown_station),
    ] {
        if count > 0 {
            warn!("dropped {count} {what}");
        }
    }
    let mut metas = metas;
    metas.sort_by(|a, b| a.station_id.cmp(&b.station_id));
    report.series = metas
        .into_iter()
        .map(|meta| {
            let records = by_id.remove(&meta.station_id).unwrap_or_default().into_values().collect();
            StationSeries { meta, records }
        })
        .collect();
    Ok(report)
}

/// Writes series back out in the ingest format.
pub fn write_inputs(series: &[StationSeries], observations: &Path, stations: &Path) -> Result<()> {
    let io = |p: &Path| {
        let path = p.to_path_buf();
        move |e: csv::Error| Error::Io { path: path.clone(), source: std::io::Error::other(e) }
    };
    let mut w = csv::Writer::from_path(stations).map_err(io(stations))?;
    w.write_record(STATION_COLUMNS).map_err(io(stations))?;
    for s in series {
        let m = &s.meta;
        w.write_record([
            m.station_id.clone(),
            m.easting.to_string(),
            m.northing.to_string(),
            m.altitude.to_string(),
            m.distance_to_sea.to_string(),
        ])
        .map_err(io(stations))?;
    }
    w.flush().map_err(|source| Error::Io { path: stations.to_path_buf(), source })?;
    let mut w = csv::Writer::from_path(observations).map_err(io(observations))?;
    w.write_record(OBS_COLUMNS).map_err(io(observations))?;
    for s in series {
        for r in &s.records {
            w.write_record([
                s.meta.station_id.clone(),
                r.date.format("%Y-%m-%d").to_string(),
                r.tmin.to_string(),
                r.tmax.to_string(),
                r.tmean.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(io(observations))?;
        }
    }
    w.flush().map_err(|source| Error::Io { path: observations.to_path_buf(), source })
}
