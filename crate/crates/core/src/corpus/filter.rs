use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use thiserror::Error;

use super::{DocumentId, Month};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid filter {input:?}: {reason}")]
pub struct FilterParseError {
    pub input: String,
    pub reason: String,
}

/// Conjunction of metadata constraints over [`DocumentId`] fields.
///
/// Text form: `key=value[,key=value]` with keys `phase`, `week` (a number or
/// an inclusive range `a-b`) and `month`. The empty string matches every
/// document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubcorpusFilter {
    pub phase: Option<u8>,
    pub weeks: Option<RangeInclusive<u32>>,
    pub month: Option<Month>,
}

impl SubcorpusFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn phase(phase: u8) -> Self {
        Self { phase: Some(phase), ..Self::default() }
    }

    pub fn weeks(range: RangeInclusive<u32>) -> Self {
        Self { weeks: Some(range), ..Self::default() }
    }

    pub fn month(month: Month) -> Self {
        Self { month: Some(month), ..Self::default() }
    }

    pub fn matches(&self, id: &DocumentId) -> bool {
        self.phase.is_none_or(|p| id.phase() == p)
            && self.weeks.as_ref().is_none_or(|w| w.contains(&id.week()))
            && self.month.is_none_or(|m| id.month() == m)
    }

    pub fn is_all(&self) -> bool {
        self == &Self::default()
    }
}

impl FromStr for SubcorpusFilter {
    type Err = FilterParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: String| FilterParseError { input: s.to_string(), reason };
        let mut filter = SubcorpusFilter::default();
        for clause in s.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let (key, value) = clause
                .split_once('=')
                .ok_or_else(|| fail(format!("clause {clause:?} is not key=value")))?;
            let value = value.trim();
            match key.trim() {
                "phase" => {
                    let p: u8 = value.parse().map_err(|_| fail(format!("phase {value:?}")))?;
                    if p != 1 && p != 2 {
                        return Err(fail(format!("phase must be 1 or 2, got {p}")));
                    }
                    filter.phase = Some(p);
                }
                "week" => {
                    let range = match value.split_once('-') {
                        Some((a, b)) => {
                            let a: u32 = a.trim().parse().map_err(|_| fail(format!("week {value:?}")))?;
                            let b: u32 = b.trim().parse().map_err(|_| fail(format!("week {value:?}")))?;
                            a..=b
                        }
                        None => {
                            let w: u32 = value.parse().map_err(|_| fail(format!("week {value:?}")))?;
                            w..=w
                        }
                    };
                    filter.weeks = Some(range);
                }
                "month" => {
                    let m: Month = value.parse().map_err(|_| fail(format!("month {value:?}")))?;
                    filter.month = Some(m);
                }
                other => return Err(fail(format!("unknown key {other:?}"))),
            }
        }
        Ok(filter)
    }
}

impl fmt::Display for SubcorpusFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = self.phase {
            parts.push(format!("phase={p}"));
        }
        if let Some(w) = &self.weeks {
            if w.start() == w.end() {
                parts.push(format!("week={}", w.start()));
            } else {
                parts.push(format!("week={}-{}", w.start(), w.end()));
            }
        }
        if let Some(m) = self.month {
            parts.push(format!("month={m}"));
        }
        f.write_str(&parts.join(","))
    }
}
