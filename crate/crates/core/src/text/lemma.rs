use crate::lexicon::Lexicon;

/// Rule-based English lemma for a single token.
///
/// A form listed verbatim in the lexicon keeps the lemma the lexicon gives
/// it. Otherwise suffixes are stripped in order: `-ies` to `-y`, `-es` to
/// `-e` or nothing (whichever is a lexicon head, longer first), then `-s`.
pub fn lemmatize(token_text: &str, lexicon: Option<&Lexicon>) -> String {
    let lower = token_text.to_lowercase();
    if let Some(lex) = lexicon {
        if let Some(entry) = lex.lookup_surface(&lower).first() {
            return entry.lemma.clone();
        }
    }
    if !lower.chars().all(char::is_alphabetic) {
        return lower;
    }

    let len = lower.chars().count();
    if len > 4 && lower.ends_with("ies") {
        return format!("{}y", &lower[..lower.len() - 3]);
    }
    if len > 3 && lower.ends_with("es") {
        let drop_s = &lower[..lower.len() - 1];
        let drop_es = &lower[..lower.len() - 2];
        if let Some(lex) = lexicon {
            if !lex.lemma_ids(drop_s).is_empty() {
                return drop_s.to_string();
            }
            if !lex.lemma_ids(drop_es).is_empty() {
                return drop_es.to_string();
            }
        }
    }
    if len > 3 && lower.ends_with('s') && !lower.ends_with("ss") {
        return lower[..lower.len() - 1].to_string();
    }
    lower
}
