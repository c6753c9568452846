use super::Token;

/// Splits on whitespace; each punctuation character becomes its own token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut word_start = 0;

    for (pos, ch) in text.chars().enumerate() {
        if ch.is_whitespace() || is_punctuation(ch) {
            if !word.is_empty() {
                tokens.push(Token::new(std::mem::take(&mut word), word_start, pos));
            }
            if !ch.is_whitespace() {
                tokens.push(Token::new(ch.to_string(), pos, pos + 1));
            }
        } else {
            if word.is_empty() {
                word_start = pos;
            }
            word.push(ch);
        }
    }
    if !word.is_empty() {
        let end = word_start + word.chars().count();
        tokens.push(Token::new(word, word_start, end));
    }
    tokens
}

pub fn is_punctuation(ch: char) -> bool {
    !ch.is_whitespace() && !ch.is_alphanumeric() && !is_combining_mark(ch)
}

fn is_combining_mark(ch: char) -> bool {
    matches!(ch as u32,
        0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

/// First-token indices of each sentence, splitting after `.`, `!` and `?`.
pub fn sentence_starts(tokens: &[Token]) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut at_start = true;
    for (i, tok) in tokens.iter().enumerate() {
        if at_start {
            starts.push(i);
            at_start = false;
        }
        if matches!(tok.text.as_str(), "." | "!" | "?") {
            at_start = true;
        }
    }
    starts
}
