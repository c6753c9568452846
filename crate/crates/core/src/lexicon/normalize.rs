/// Cleans a raw seed term into lexicon surface form.
///
/// Lowercases, turns hyphens and slashes into word breaks, drops digits and
/// every other punctuation or symbol character, then collapses whitespace.
/// The output may be empty.
pub fn normalize_seed_term(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        if is_word_break(ch) || ch.is_whitespace() {
            pending_space = true;
            continue;
        }
        for lower in ch.to_lowercase() {
            if lower.is_numeric() || !lower.is_alphanumeric() {
                continue;
            }
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(lower);
        }
    }
    out
}

/// Characters that separate words rather than vanish.
pub(crate) fn is_word_break(ch: char) -> bool {
    matches!(
        ch,
        '-' | '/' | '\\' | '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2212}'
    )
}
