use super::{is_punctuation, Token};
use crate::annotate::PersonNounLexicon;
use crate::lexicon::Lexicon;

/// Fallback part-of-speech tagging for documents without parser output.
///
/// Lookup order: person-noun list, tag recorded in the lexicon, capitalized
/// word not at a sentence start, suffix rules, and finally NOUN. Missing
/// lemmas are filled in; dependency fields are left alone.
pub fn heuristic_tag(
    mut tokens: Vec<Token>,
    lexicon: &Lexicon,
    person_nouns: Option<&PersonNounLexicon>,
) -> Vec<Token> {
    let mut sentence_initial = true;
    for tok in tokens.iter_mut() {
        if tok.lemma.is_none() {
            tok.lemma = Some(super::lemmatize(&tok.text, Some(lexicon)));
        }
        if tok.pos.is_none() {
            tok.pos = Some(guess(tok, sentence_initial, lexicon, person_nouns).to_string());
        }
        sentence_initial = matches!(tok.text.as_str(), "." | "!" | "?");
    }
    tokens
}

fn guess(
    tok: &Token,
    sentence_initial: bool,
    lexicon: &Lexicon,
    person_nouns: Option<&PersonNounLexicon>,
) -> &'static str {
    if tok.text.chars().all(is_punctuation) {
        return "PUNCT";
    }
    let lower = tok.text.to_lowercase();
    let lemma = tok.lemma.as_deref().unwrap_or(&lower);
    if let Some(pn) = person_nouns {
        if pn.contains(&lower) || pn.contains(lemma) {
            return "NOUN";
        }
    }
    if let Some(tag) = lexicon
        .lookup_surface(&lower)
        .iter()
        .find_map(|e| e.pos.as_deref())
    {
        match tag {
            "ADJ" => return "ADJ",
            "NOUN" => return "NOUN",
            "PROPN" => return "PROPN",
            _ => {}
        }
    }
    let capitalized = tok.text.chars().next().is_some_and(char::is_uppercase);
    if capitalized && !sentence_initial {
        return "PROPN";
    }
    if lower.ends_with("ly") {
        "OTHER"
    } else if lower.ends_with("ed") || lower.ends_with("ing") {
        "VERB"
    } else {
        "NOUN"
    }
}
