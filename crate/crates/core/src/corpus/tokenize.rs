use unicode_segmentation::UnicodeSegmentation;

/// A token produced by the raw-text tokenizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken<'a> {
    pub surface: &'a str,
    pub sent: u32,
}

/// Splits text into sentences and word-boundary tokens (UAX #29).
///
/// Whitespace is dropped. Punctuation marks and standalone numerals come out
/// as separate tokens. Elided articles and prepositions are split after the
/// apostrophe, so `l'economia` yields `l'` and `economia`.
pub fn tokenize(text: &str) -> Vec<RawToken<'_>> {
    let mut out = Vec::new();
    let mut sent = 0u32;
    for sentence in text.split_sentence_bounds() {
        let before = out.len();
        for word in sentence.split_word_bounds() {
            if word.chars().all(char::is_whitespace) {
                continue;
            }
            split_elisions(word, |surface| out.push(RawToken { surface, sent }));
        }
        if out.len() > before {
            sent += 1;
        }
    }
    out
}

fn split_elisions<'a>(word: &'a str, mut emit: impl FnMut(&'a str)) {
    let mut start = 0;
    let mut prev: Option<char> = None;
    let mut iter = word.char_indices().peekable();
    while let Some((_, c)) = iter.next() {
        let is_apostrophe = c == '\'' || c == '\u{2019}';
        if is_apostrophe && prev.is_some_and(char::is_alphabetic) {
            if let Some(&(j, next)) = iter.peek() {
                if next.is_alphabetic() {
                    emit(&word[start..j]);
                    start = j;
                }
            }
        }
        prev = Some(c);
    }
    emit(&word[start..]);
}
