//! Splitting cells that carry a club's name in two languages.

/// Separators tried in priority order.
const SEPARATORS: [&str; 3] = [" - ", " / ", " – "];

fn trim_punctuation(token: &str) -> &str {
    token.trim_matches(|c: char| matches!(c, ',' | ';' | ':' | '(' | ')' | '"'))
}

pub(crate) fn is_suffix_token(token: &str, suffixes: &[String]) -> bool {
    let token = trim_punctuation(token).to_lowercase();
    suffixes.iter().any(|s| *s == token)
}

pub(crate) fn has_suffix(text: &str, suffixes: &[String]) -> bool {
    text.split_whitespace().any(|t| is_suffix_token(t, suffixes))
}

/// Splits `cell` into a primary name and an optional alternate-language
/// name. `suffixes` must be lowercase.
///
/// A spaced separator splits when both sides carry a registered-association
/// suffix or both sides have at least two words. Without a separator, two
/// suffix tokens with a word between them split right after the first one.
pub fn split_double_name(cell: &str, suffixes: &[String]) -> (String, Option<String>) {
    let cell = cell.trim();
    for sep in SEPARATORS {
        let Some((left, right)) = cell.split_once(sep) else {
            continue;
        };
        let (left, right) = (left.trim(), right.trim());
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let both_suffixed = has_suffix(left, suffixes) && has_suffix(right, suffixes);
        let both_multiword =
            left.split_whitespace().count() >= 2 && right.split_whitespace().count() >= 2;
        if both_suffixed || both_multiword {
            return (left.to_owned(), Some(right.to_owned()));
        }
    }

    // Byte offsets of whitespace-separated tokens.
    let tokens: Vec<(usize, &str)> = cell
        .split_whitespace()
        .map(|t| (t.as_ptr() as usize - cell.as_ptr() as usize, t))
        .collect();
    let suffix_positions: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, (_, t))| is_suffix_token(t, suffixes))
        .map(|(i, _)| i)
        .collect();
    if let [first, second, ..] = suffix_positions[..] {
        if second > first + 1 {
            let (offset, token) = tokens[first];
            let cut = offset + token.len();
            return (
                cell[..cut].trim().to_owned(),
                Some(cell[cut..].trim().to_owned()),
            );
        }
    }
    (cell.to_owned(), None)
}
