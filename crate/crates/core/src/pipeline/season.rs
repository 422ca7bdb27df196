use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Meteorological seasons by calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    /// December to February.
    Winter,
    /// March to May.
    Spring,
    /// June to August.
    Summer,
    /// September to November.
    Autumn,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Autumn];

    pub fn from_month(month: u32) -> Season {
        match month {
            12 | 1 | 2 => Season::Winter,
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            _ => Season::Autumn,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Season {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Season {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Season::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| crate::Error::Domain(format!("unknown season '{s}' (expected winter, spring, summer or autumn)")))
    }
}

pub fn assign_season(date: NaiveDate) -> Season {
    Season::from_month(date.month())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar_examples() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert_eq!(assign_season(d("1995-12-15")), Season::Winter);
        assert_eq!(assign_season(d("2000-03-01")), Season::Spring);
        assert_eq!(assign_season(d("1989-11-30")), Season::Autumn);
        assert_eq!(assign_season(d("2001-07-04")), Season::Summer);
    }
}
