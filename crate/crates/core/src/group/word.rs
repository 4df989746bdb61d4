//! Words over a generating set: letters, free reduction and the textual word grammar.

use crate::error::{Error, Result};

/// A generator or its inverse. The derived order is the letter order used by
/// shortlex comparison: `x0 < x0^-1 < x1 < x1^-1 < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: u32, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    pub fn rank(self) -> u32 {
        2 * self.gen + self.inv as u32
    }
}

pub type Word = Vec<Letter>;

/// Appends `letters` to `out`, cancelling adjacent inverse pairs.
pub fn push_reduced(out: &mut Word, letters: impl IntoIterator<Item = Letter>) {
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
}

pub fn free_reduce(w: &[Letter]) -> Word {
    let mut out = Vec::with_capacity(w.len());
    push_reduced(&mut out, w.iter().copied());
    out
}

pub fn invert(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inverse()).collect()
}

pub fn concat_reduced(a: &[Letter], b: &[Letter]) -> Word {
    let mut out = a.to_vec();
    push_reduced(&mut out, b.iter().copied());
    out
}

/// Strips matching inverse letters from both ends of a freely reduced word.
pub fn cyclic_reduce(w: &[Letter]) -> Word {
    let w = free_reduce(w);
    let (mut lo, mut hi) = (0, w.len());
    while hi - lo >= 2 && w[lo] == w[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    w[lo..hi].to_vec()
}

/// Shortlex comparison under the letter order.
pub fn shortlex_cmp(a: &[Letter], b: &[Letter]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Parsed term of the word grammar, before identifiers are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub name: String,
    pub exponent: i64,
    pub pos: usize,
}

/// Tokenizes `word := "e" | term { WS term }`, `term := ident [ "^" signed-int ]`.
/// The literal `e` is the identity and contributes no terms; the empty string
/// is accepted as the identity too.
pub fn parse_terms(text: &str) -> Result<Vec<Term>> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut terms = Vec::new();
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_ascii_alphabetic() {
            return Err(Error::syntax(i, format!("unexpected character `{}` in word", c as char)));
        }
        let start = i;
        while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
            i += 1;
        }
        let name = &text[start..i];
        let mut exponent = 1i64;
        if i < bytes.len() && bytes[i] == b'^' {
            i += 1;
            let estart = i;
            if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                i += 1;
            }
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let etext = &text[estart..i];
            exponent = etext
                .parse::<i64>()
                .map_err(|_| Error::MalformedExponent(format!("{name}^{etext}")))?;
        }
        if i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            return Err(Error::syntax(i, format!("expected whitespace after `{}`", &text[start..i])));
        }
        if name != "e" {
            terms.push(Term { name: name.to_string(), exponent, pos: start });
        }
    }
    Ok(terms)
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Formats a word as runs of powers, `e` for the empty word.
pub fn format_word(w: &[Letter], names: &[String]) -> String {
    if w.is_empty() {
        return "e".to_string();
    }
    let mut parts = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let l = w[i];
        let mut j = i;
        while j < w.len() && w[j] == l {
            j += 1;
        }
        let run = (j - i) as i64;
        let exp = if l.inv { -run } else { run };
        parts.push(power(&names[l.gen as usize], exp));
        i = j;
    }
    parts.join(" ")
}

pub fn power(name: &str, exp: i64) -> String {
    if exp == 1 {
        name.to_string()
    } else {
        format!("{name}^{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(gen: u32, inv: bool) -> Letter {
        Letter::new(gen, inv)
    }

    #[test]
    fn reduction_cancels_pairs() {
        let w = vec![l(0, false), l(1, false), l(1, true), l(0, true), l(2, false)];
        assert_eq!(free_reduce(&w), vec![l(2, false)]);
        let c = vec![l(0, false), l(1, false), l(0, true)];
        assert_eq!(cyclic_reduce(&c), vec![l(1, false)]);
    }

    #[test]
    fn terms_and_errors() {
        let t = parse_terms("a b^2 c").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[1].exponent, 2);
        assert!(parse_terms("e").unwrap().is_empty());
        assert!(parse_terms("").unwrap().is_empty());
        assert_eq!(parse_terms("x^-3").unwrap()[0].exponent, -3);
        assert!(matches!(parse_terms("x^"), Err(Error::MalformedExponent(_))));
        assert!(matches!(parse_terms("x^-"), Err(Error::MalformedExponent(_))));
        assert!(matches!(parse_terms("3x"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_terms("a*b"), Err(Error::Syntax { pos: 1, .. })));
    }

    #[test]
    fn format_groups_runs() {
        let names = vec!["a".to_string(), "b".to_string()];
        let w = vec![l(0, false), l(1, false), l(1, false), l(0, true)];
        assert_eq!(format_word(&w, &names), "a b^2 a^-1");
        assert_eq!(format_word(&[], &names), "e");
    }
}
