use log::info;
use serde::{Deserialize, Serialize};

use super::{assign_season, Season, StationSeries};
use crate::error::{Error, Result};

pub const MIN_PER_SEASON: usize = 180;

pub const COVARIATE_NAMES: [&str; 6] = ["easting", "northing", "distance_to_sea", "altitude", "tmean_mean", "tmean_variance"];

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleanCounts {
    pub input_stations: usize,
    pub retained_stations: usize,
    pub dropped_stations: usize,
    pub removed_negative_range: usize,
    pub dropped_station_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanOutcome {
    pub stations: Vec<StationSeries>,
    pub counts: CleanCounts,
}

/// Removes records with negative diurnal range, then every station with fewer
/// than `min_per_season` records in any season.
pub fn clean(stations: &[StationSeries], min_per_season: usize) -> CleanOutcome {
    let mut counts = CleanCounts { input_stations: stations.len(), ..CleanCounts::default() };
    let mut kept = Vec::new();
    for s in stations {
        let records: Vec<_> = s.records.iter().filter(|r| r.dtr >= 0.0).cloned().collect();
        counts.removed_negative_range += s.records.len() - records.len();
        let mut per_season = [0usize; 4];
        for r in &records {
            per_season[assign_season(r.date).index()] += 1;
        }
        if per_season.iter().all(|&c| c >= min_per_season) {
            kept.push(StationSeries { meta: s.meta.clone(), records });
        } else {
            counts.dropped_station_ids.push(s.id().to_string());
        }
    }
    counts.retained_stations = kept.len();
    counts.dropped_stations = counts.dropped_station_ids.len();
    info!(
        "cleaning kept {} of {} stations, removed {} negative-range records",
        counts.retained_stations, counts.input_stations, counts.removed_negative_range
    );
    CleanOutcome { stations: kept, counts }
}

/// Station location covariates plus the seasonal mean and variance (divisor `n − 1`) of `tmean`.
pub fn seasonal_covariates(station: &StationSeries, season: Season) -> Result<[f64; 6]> {
    let t: Vec<f64> = station
        .records
        .iter()
        .filter(|r| assign_season(r.date) == season)
        .filter_map(|r| r.tmean)
        .collect();
    if t.len() < 2 {
        return Err(Error::domain(format!(
            "station '{}' has {} daily mean temperatures in {season}; need at least 2",
            station.id(),
            t.len()
        )));
    }
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m = &station.meta;
    Ok([m.easting, m.northing, m.distance_to_sea, m.altitude, mean, var])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalStation {
    pub station_id: String,
    pub dtr: Vec<f64>,
    /// `None` when the daily mean temperature coverage is insufficient.
    pub covariates: Option<[f64; 6]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalDataset {
    pub season: Season,
    pub stations: Vec<SeasonalStation>,
}

impl SeasonalDataset {
    pub fn build(stations: &[StationSeries], season: Season) -> Self {
        let mut out: Vec<SeasonalStation> = stations
            .iter()
            .map(|s| SeasonalStation {
                station_id: s.id().to_string(),
                dtr: s.records.iter().filter(|r| assign_season(r.date) == season).map(|r| r.dtr).collect(),
                covariates: seasonal_covariates(s, season).ok(),
            })
            .collect();
        out.sort_by(|a, b| a.station_id.cmp(&b.station_id));
        Self { season, stations: out }
    }
}

/// One dataset per season, in winter, spring, summer, autumn order.
pub fn seasonal_datasets(stations: &[StationSeries]) -> Vec<SeasonalDataset> {
    Season::ALL.iter().map(|&s| SeasonalDataset::build(stations, s)).collect()
}
