//! Automated answer judging.
//!
//! The default judge is a normalized exact match. Anything smarter (an LLM
//! judge, numeric tolerance) plugs in through [`Judge`].

pub trait Judge: Send + Sync {
    fn is_correct(&self, prediction: &str, gold: &str) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatchJudge;

impl Judge for ExactMatchJudge {
    fn is_correct(&self, prediction: &str, gold: &str) -> bool {
        judge_correct(prediction, gold)
    }
}

/// Trim, casefold, collapse whitespace, drop a leading article and trailing
/// punctuation.
pub fn normalize_answer(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let mut s = collapsed.as_str();
    for article in ["a ", "an ", "the "] {
        if let Some(rest) = s.strip_prefix(article) {
            s = rest.trim_start();
            break;
        }
    }
    s.trim_end_matches(['.', ',', '!', '?', ';', ':']).trim_end().to_string()
}

/// Multiple-choice letter: `"c"` or a `"(c)..."` prefix.
fn option_letter(normalized: &str) -> Option<char> {
    let mut chars = normalized.chars();
    match (chars.next(), chars.next(), chars.next()) {
        (Some(c), None, _) if c.is_ascii_alphabetic() => Some(c),
        (Some('('), Some(c), Some(')')) if c.is_ascii_alphabetic() => Some(c),
        _ => None,
    }
}

fn is_bare_option(normalized: &str) -> bool {
    let n = normalized.chars().count();
    option_letter(normalized).is_some() && (n == 1 || n == 3)
}

pub fn judge_correct(prediction: &str, gold: &str) -> bool {
    let p = normalize_answer(prediction);
    let g = normalize_answer(gold);
    if p == g {
        return true;
    }
    // A bare option letter on either side matches the other side's letter.
    if is_bare_option(&p) || is_bare_option(&g) {
        if let (Some(a), Some(b)) = (option_letter(&p), option_letter(&g)) {
            return a == b;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_letters() {
        assert!(judge_correct("(C)", "C"));
        assert!(judge_correct("C", "(C) Mitochondria"));
        assert!(judge_correct("c", "(C)"));
        assert!(!judge_correct("(B)", "C"));
        assert!(!judge_correct("(C) Ribosome", "(C) Mitochondria"));
    }

    #[test]
    fn normalization_rules() {
        assert!(judge_correct("The Eiffel Tower.", "eiffel tower"));
        assert!(judge_correct("  an   apple ", "Apple"));
        assert!(judge_correct("Paris!", "paris"));
    }

    #[test]
    fn mismatches() {
        assert!(!judge_correct("Paris", "Lyon"));
        assert!(!judge_correct("", "Lyon"));
    }

    #[test]
    fn article_alone_is_kept() {
        assert_eq!(normalize_answer("A"), "a");
        assert!(judge_correct("A", "(A) first option"));
    }
}
