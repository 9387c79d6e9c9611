use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::ConcordError;
use crate::corpus::{normalize_lemma, Token, Upos};

/// One token position in a pattern. Empty constraint lists mean "any".
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Slot {
    pub lemma: Vec<String>,
    pub pos: Vec<Upos>,
    /// Surface forms, compared case-insensitively.
    pub word: Vec<String>,
    pub optional: bool,
}

impl Slot {
    pub fn lemma(lemma: &str) -> Self {
        Slot { lemma: vec![normalize_lemma(lemma)], ..Slot::default() }
    }

    pub fn matches(&self, tok: &Token) -> bool {
        (self.lemma.is_empty() || self.lemma.contains(&tok.lemma))
            && (self.pos.is_empty() || self.pos.contains(&tok.pos))
            && (self.word.is_empty() || self.word.iter().any(|w| *w == normalize_lemma(&tok.surface)))
    }
}

/// Sequence of token constraints, written as `[lemma="x|y" pos="NOUN"]`
/// blocks. `[]` matches any token and a trailing `?` makes a slot optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPattern {
    slots: Vec<Slot>,
}

impl TokenPattern {
    pub fn new(slots: Vec<Slot>) -> Result<Self, ConcordError> {
        if slots.iter().all(|s| s.optional) {
            return Err(ConcordError::InvalidPattern(
                "pattern needs at least one non-optional slot".into(),
            ));
        }
        Ok(Self { slots })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// End (exclusive) of the longest match starting at `start`.
    pub fn longest_match(&self, sentence: &[Token], start: usize) -> Option<usize> {
        longest(&self.slots, sentence, start)
    }

    /// Leftmost-longest, non-overlapping matches within one sentence, as
    /// `(start, end)` index pairs.
    pub fn find_all(&self, sentence: &[Token]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < sentence.len() {
            match self.longest_match(sentence, i) {
                Some(end) if end > i => {
                    out.push((i, end));
                    i = end;
                }
                _ => i += 1,
            }
        }
        out
    }
}

fn longest(slots: &[Slot], toks: &[Token], at: usize) -> Option<usize> {
    let Some((slot, rest)) = slots.split_first() else {
        return Some(at);
    };
    let taken = toks
        .get(at)
        .filter(|t| slot.matches(t))
        .and_then(|_| longest(rest, toks, at + 1));
    let skipped = if slot.optional { longest(rest, toks, at) } else { None };
    taken.max(skipped)
}

impl FromStr for TokenPattern {
    type Err = ConcordError;

    fn from_str(s: &str) -> Result<Self, ConcordError> {
        let bad = |msg: String| ConcordError::InvalidPattern(format!("{msg} in {s:?}"));
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        let mut slots = Vec::new();
        let skip_ws = |i: &mut usize| {
            while *i < chars.len() && chars[*i].is_whitespace() {
                *i += 1;
            }
        };
        loop {
            skip_ws(&mut i);
            if i == chars.len() {
                break;
            }
            if chars[i] != '[' {
                return Err(bad(format!("expected '[' at offset {i}")));
            }
            i += 1;
            let mut slot = Slot::default();
            loop {
                skip_ws(&mut i);
                match chars.get(i) {
                    None => return Err(bad("unclosed '['".into())),
                    Some(']') => {
                        i += 1;
                        break;
                    }
                    Some('&') => {
                        i += 1;
                        continue;
                    }
                    _ => {}
                }
                let key_start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let key: String = chars[key_start..i].iter().collect();
                skip_ws(&mut i);
                if chars.get(i) != Some(&'=') {
                    return Err(bad(format!("expected '=' after {key:?}")));
                }
                i += 1;
                skip_ws(&mut i);
                if chars.get(i) != Some(&'"') {
                    return Err(bad(format!("expected quoted value for {key:?}")));
                }
                i += 1;
                let value_start = i;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(bad("unterminated string".into()));
                }
                let value: String = chars[value_start..i].iter().collect();
                i += 1;
                let alternatives: Vec<&str> = value.split('|').map(str::trim).collect();
                if alternatives.iter().any(|a| a.is_empty()) {
                    return Err(bad(format!("empty alternative for {key:?}")));
                }
                match key.as_str() {
                    "lemma" => slot.lemma.extend(alternatives.iter().map(|a| normalize_lemma(a))),
                    "word" => slot.word.extend(alternatives.iter().map(|a| normalize_lemma(a))),
                    "pos" => {
                        for a in alternatives {
                            let tag = Upos::from_str(&a.to_ascii_uppercase())
                                .map_err(|_| bad(format!("unknown POS tag {a:?}")))?;
                            slot.pos.push(tag);
                        }
                    }
                    other => return Err(bad(format!("unknown attribute {other:?}"))),
                }
            }
            if chars.get(i) == Some(&'?') {
                slot.optional = true;
                i += 1;
            }
            slots.push(slot);
        }
        if slots.is_empty() {
            return Err(ConcordError::InvalidPattern("empty pattern".into()));
        }
        TokenPattern::new(slots)
    }
}

impl fmt::Display for TokenPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, slot) in self.slots.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            f.write_str("[")?;
            let mut parts = Vec::new();
            if !slot.lemma.is_empty() {
                parts.push(format!("lemma=\"{}\"", slot.lemma.join("|")));
            }
            if !slot.pos.is_empty() {
                let tags: Vec<String> = slot.pos.iter().map(|p| p.to_string()).collect();
                parts.push(format!("pos=\"{}\"", tags.join("|")));
            }
            if !slot.word.is_empty() {
                parts.push(format!("word=\"{}\"", slot.word.join("|")));
            }
            f.write_str(&parts.join(" "))?;
            f.write_str("]")?;
            if slot.optional {
                f.write_str("?")?;
            }
        }
        Ok(())
    }
}

impl Serialize for TokenPattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(spec: &[(&str, Upos)]) -> Vec<Token> {
        spec.iter()
            .enumerate()
            .map(|(i, (l, p))| Token {
                surface: l.to_string(),
                lemma: l.to_lowercase(),
                pos: *p,
                index: i as u32 + 1,
                head: None,
                deprel: None,
                sent: 0,
                offset: i as u32,
            })
            .collect()
    }

    #[test]
    fn parses_and_displays() {
        let p: TokenPattern = r#"[lemma="crisi|Economia" pos="noun"] [pos="DET"]? [] [word="È"]"#.parse().unwrap();
        assert_eq!(p.slots().len(), 4);
        assert_eq!(p.slots()[0].lemma, vec!["crisi", "economia"]);
        assert_eq!(p.slots()[0].pos, vec![Upos::Noun]);
        assert!(p.slots()[1].optional);
        assert_eq!(p.slots()[2], Slot::default());
        assert_eq!(
            p.to_string(),
            r#"[lemma="crisi|economia" pos="NOUN"] [pos="DET"]? [] [word="è"]"#
        );
        assert_eq!(p.to_string().parse::<TokenPattern>().unwrap(), p);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "crisi",
            "[lemma=crisi]",
            "[lemma=\"crisi\"",
            "[colour=\"red\"]",
            "[pos=\"XYZ\"]",
            "[lemma=\"a||b\"]",
            "[]?",
            "[pos=\"DET\"]? []?",
        ] {
            assert!(
                matches!(bad.parse::<TokenPattern>(), Err(ConcordError::InvalidPattern(_))),
                "{bad:?} accepted"
            );
        }
    }

    #[test]
    fn optional_slot_prefers_longest() {
        let p: TokenPattern = r#"[lemma="essere"] [pos="DET"]? [lemma="tsunami"]"#.parse().unwrap();
        let with_det = toks(&[("essere", Upos::Aux), ("uno", Upos::Det), ("tsunami", Upos::Noun)]);
        assert_eq!(p.find_all(&with_det), vec![(0, 3)]);
        let bare = toks(&[("essere", Upos::Aux), ("tsunami", Upos::Noun)]);
        assert_eq!(p.find_all(&bare), vec![(0, 2)]);
        let greedy: TokenPattern = r#"[lemma="a"] [lemma="a"]?"#.parse().unwrap();
        let aaa = toks(&[("a", Upos::X), ("a", Upos::X), ("a", Upos::X)]);
        assert_eq!(greedy.find_all(&aaa), vec![(0, 2), (2, 3)]);
    }

    #[test]
    fn surface_match_ignores_case() {
        let p: TokenPattern = r#"[word="tsunami"]"#.parse().unwrap();
        let t = toks(&[("TSUNAMI", Upos::Noun)]);
        assert_eq!(p.find_all(&t), vec![(0, 1)]);
    }
}
