use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CorpusError;

/// Calendar month of publication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Month {
    January,
    February,
    March,
    April,
    May,
    June,
    July,
    August,
    September,
    October,
    November,
    December,
}

impl Month {
    pub const ALL: [Month; 12] = [
        Month::January,
        Month::February,
        Month::March,
        Month::April,
        Month::May,
        Month::June,
        Month::July,
        Month::August,
        Month::September,
        Month::October,
        Month::November,
        Month::December,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Month::January => "january",
            Month::February => "february",
            Month::March => "march",
            Month::April => "april",
            Month::May => "may",
            Month::June => "june",
            Month::July => "july",
            Month::August => "august",
            Month::September => "september",
            Month::October => "october",
            Month::November => "november",
            Month::December => "december",
        }
    }

    /// 1-based month number.
    pub fn number(self) -> u32 {
        self as u32 + 1
    }

    pub fn from_number(n: u32) -> Option<Month> {
        Month::ALL.get(n.checked_sub(1)? as usize).copied()
    }
}

impl FromStr for Month {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Month::ALL
            .iter()
            .copied()
            .find(|m| m.name() == lower)
            .ok_or(())
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Document identifier carrying the covariates used downstream:
/// `phase{P}_week{W}_{month}_{DD}[seq]`, e.g. `phase1_week1_february_27b`.
///
/// The canonical string form zero-pads the day to two digits and lowercases
/// the month and sequence letter. Ordering is (phase, week, month, day, seq).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocumentId {
    phase: u8,
    week: u32,
    month: Month,
    day: u8,
    seq: Option<char>,
}

impl DocumentId {
    pub fn new(
        phase: u8,
        week: u32,
        month: Month,
        day: u8,
        seq: Option<char>,
    ) -> Result<Self, CorpusError> {
        if phase != 1 && phase != 2 {
            return Err(CorpusError::InvalidPhase(phase as u32));
        }
        if week == 0 {
            return Err(CorpusError::MalformedId(format!("week must be positive, got {week}")));
        }
        if !(1..=31).contains(&day) {
            return Err(CorpusError::MalformedId(format!("day out of range: {day}")));
        }
        let seq = match seq {
            Some(c) if c.is_ascii_alphabetic() => Some(c.to_ascii_lowercase()),
            Some(c) => {
                return Err(CorpusError::MalformedId(format!("sequence must be a letter, got {c:?}")))
            }
            None => None,
        };
        Ok(Self { phase, week, month, day, seq })
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn week(&self) -> u32 {
        self.week
    }

    pub fn month(&self) -> Month {
        self.month
    }

    pub fn day(&self) -> u8 {
        self.day
    }

    pub fn seq(&self) -> Option<char> {
        self.seq
    }
}

/// Parse an identifier of the shape `phase{P}_week{W}_{month}_{D}[letter]`.
pub fn parse_document_id(raw: &str) -> Result<DocumentId, CorpusError> {
    let malformed = || CorpusError::MalformedId(raw.to_string());
    let parts: Vec<&str> = raw.trim().split('_').collect();
    let [phase, week, month, day] = parts.as_slice() else {
        return Err(malformed());
    };

    let phase = strip_prefix_ci(phase, "phase")
        .and_then(parse_digits)
        .ok_or_else(malformed)?;
    let week = strip_prefix_ci(week, "week")
        .and_then(parse_digits)
        .ok_or_else(malformed)?;
    let month: Month = month.parse().map_err(|_| malformed())?;

    let (digits, seq) = match day.char_indices().last() {
        Some((i, c)) if c.is_ascii_alphabetic() => (&day[..i], Some(c)),
        _ => (&day[..], None),
    };
    if digits.is_empty() || digits.len() > 2 {
        return Err(malformed());
    }
    let day = parse_digits(digits).ok_or_else(malformed)?;

    if phase != 1 && phase != 2 {
        return Err(CorpusError::InvalidPhase(phase));
    }
    let day = u8::try_from(day).map_err(|_| malformed())?;
    DocumentId::new(phase as u8, week, month, day, seq).map_err(|e| match e {
        CorpusError::MalformedId(_) => malformed(),
        other => other,
    })
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    if s.len() >= prefix.len() && s[..prefix.len()].eq_ignore_ascii_case(prefix) {
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

fn parse_digits(s: &str) -> Option<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "phase{}_week{}_{}_{:02}",
            self.phase, self.week, self.month, self.day
        )?;
        if let Some(c) = self.seq {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for DocumentId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_document_id(s)
    }
}

impl Serialize for DocumentId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DocumentId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_document_id(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_sequenced_id() {
        let id = parse_document_id("phase1_week1_february_27b").unwrap();
        assert_eq!(id.phase(), 1);
        assert_eq!(id.week(), 1);
        assert_eq!(id.month(), Month::February);
        assert_eq!(id.day(), 27);
        assert_eq!(id.seq(), Some('b'));
        assert_eq!(id.to_string(), "phase1_week1_february_27b");
    }

    #[test]
    fn parses_unsequenced_id() {
        let id = parse_document_id("phase2_week10_may_04").unwrap();
        assert_eq!((id.phase(), id.week(), id.month(), id.day()), (2, 10, Month::May, 4));
        assert_eq!(id.seq(), None);
        assert_eq!(id.to_string(), "phase2_week10_may_04");
    }

    #[test]
    fn normalizes_day_and_case() {
        let id = parse_document_id("Phase1_Week3_March_9C").unwrap();
        assert_eq!(id.to_string(), "phase1_week3_march_09c");
    }

    #[test]
    fn rejects_bad_phase() {
        assert!(matches!(
            parse_document_id("phase3_week1_march_01"),
            Err(CorpusError::InvalidPhase(3))
        ));
    }

    #[test]
    fn rejects_malformed() {
        for raw in [
            "",
            "phase1_week1_february",
            "phase1_week1_febbraio_27",
            "phase1_week0_march_01",
            "phase1_week1_march_32",
            "phase1_week1_march_00",
            "phase1_week1_march_123",
            "phase1_week1_march_1bb",
            "phaseX_week1_march_01",
            "phase1_week1_march_01_extra",
        ] {
            assert!(
                matches!(parse_document_id(raw), Err(CorpusError::MalformedId(_))),
                "{raw:?} should be malformed"
            );
        }
    }

    #[test]
    fn ordering_follows_fields() {
        let a = parse_document_id("phase1_week1_february_27").unwrap();
        let b = parse_document_id("phase1_week1_february_27b").unwrap();
        let c = parse_document_id("phase1_week2_march_02").unwrap();
        assert!(a < b && b < c);
    }

    proptest! {
        #[test]
        fn canonical_round_trip(
            phase in 1u8..=2,
            week in 1u32..60,
            month in 0usize..12,
            day in 1u8..=31,
            seq in proptest::option::of(proptest::char::range('a', 'z')),
        ) {
            let id = DocumentId::new(phase, week, Month::ALL[month], day, seq).unwrap();
            let text = id.to_string();
            let back = parse_document_id(&text).unwrap();
            prop_assert_eq!(&back, &id);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
