/// Characters accepted as thousands separators inside a digit run.
fn is_group_separator(c: char) -> bool {
    matches!(c, ' ' | '.' | '\u{a0}' | '\u{2009}' | '\u{202f}')
}

/// Removes separators that sit between a digit and exactly three digits
/// closing the group, e.g. `1 234` or `12.345.678`.
fn strip_group_separators(cell: &str) -> String {
    let chars: Vec<char> = cell.chars().collect();
    let mut out = String::with_capacity(cell.len());
    for (i, &c) in chars.iter().enumerate() {
        if is_group_separator(c) && i > 0 && chars[i - 1].is_ascii_digit() {
            let group = &chars[i + 1..];
            let closes = group.len() >= 3
                && group[..3].iter().all(char::is_ascii_digit)
                && group.get(3).is_none_or(|n| !n.is_ascii_digit());
            if closes {
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Parses a member-count cell into `(count, ambiguous)`.
///
/// The first integer group is the count. More than one group (for example a
/// parenthetical breakdown of honorary members) marks the value ambiguous.
pub fn parse_member_count(cell: &str) -> (Option<u64>, bool) {
    let cleaned = strip_group_separators(cell);
    let groups: Vec<&str> = cleaned
        .split(|c: char| !c.is_ascii_digit())
        .filter(|g| !g.is_empty())
        .collect();
    match groups.as_slice() {
        [] => (None, false),
        [first, rest @ ..] => (first.parse().ok(), !rest.is_empty()),
    }
}
