//! CE symbols `R^{g1ε1,…}_d`, tuples of them, reversal, canonical forms and
//! equivalence.

mod canon;
mod equiv;

use std::fmt;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::group::{ContextId, GroupContext, GroupElement};
use crate::ring::GroupRingElement;

pub use canon::{canonicalize, encode_symbol, encode_tuple, CanonStatus, CanonicalForm};
pub use equiv::{equivalent, is_one_sided, EquivEvidence, Equivalence, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `|ε|`: one for `+`, zero for `-`.
    pub fn indicator(self) -> u8 {
        (self == Sign::Plus) as u8
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    E,
    H,
    T,
    Q,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::E, Kind::H, Kind::T, Kind::Q];

    pub fn arity(self) -> usize {
        match self {
            Kind::E | Kind::H => 2,
            Kind::T => 3,
            Kind::Q => 4,
        }
    }

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn as_char(self) -> char {
        ['E', 'H', 'T', 'Q'][self as usize]
    }

    pub fn from_char(c: char) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_char() == c)
    }

    /// Only H and Q strata have no preferred side.
    pub fn is_reversible(self) -> bool {
        matches!(self, Kind::H | Kind::Q)
    }

    /// Parses a kind filter such as `EHT`.
    pub fn parse_set(text: &str) -> Result<Vec<Kind>> {
        let mut kinds = Vec::new();
        for (i, c) in text.trim().chars().enumerate() {
            let k = Kind::from_char(c.to_ascii_uppercase()).ok_or_else(|| Error::syntax(i, format!("unknown kind `{c}`")))?;
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        kinds.sort();
        Ok(kinds)
    }

    /// The entry permutations allowed by the equivalence: all of them, except
    /// that Q only admits even ones. `perm[j]` is the source of entry `j`.
    pub fn entry_perms(self) -> &'static [Vec<usize>] {
        &PERMS[self as usize]
    }
}

static PERMS: LazyLock<[Vec<Vec<usize>>; 4]> = LazyLock::new(|| {
    let q = permutations(4).into_iter().filter(|p| is_even(p)).collect();
    [permutations(2), permutations(2), permutations(3), q]
});

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn is_even(p: &[usize]) -> bool {
    let inversions = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
    inversions % 2 == 0
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    ctx: ContextId,
    kind: Kind,
    entries: Vec<(GroupElement, Sign)>,
    degree: GroupRingElement,
}

impl Symbol {
    pub fn new(ctx: &GroupContext, kind: Kind, entries: Vec<(GroupElement, Sign)>, degree: GroupRingElement) -> Result<Self> {
        if entries.len() != kind.arity() {
            return Err(Error::Arity { expected: kind.arity(), found: entries.len() });
        }
        if entries.iter().any(|(g, _)| !ctx.contains(g)) || degree.context() != ctx.id() {
            return Err(Error::ContextMismatch);
        }
        Ok(Symbol { ctx: ctx.id(), kind, entries, degree })
    }

    /// Builds a symbol from parts already known to be valid.
    pub(crate) fn from_parts(ctx: ContextId, kind: Kind, entries: Vec<(GroupElement, Sign)>, degree: GroupRingElement) -> Self {
        debug_assert_eq!(entries.len(), kind.arity());
        Symbol { ctx, kind, entries, degree }
    }

    pub fn context(&self) -> ContextId {
        self.ctx
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn entries(&self) -> &[(GroupElement, Sign)] {
        &self.entries
    }

    pub fn degree(&self) -> &GroupRingElement {
        &self.degree
    }

    pub fn plus_count(&self) -> usize {
        self.entries.iter().filter(|(_, s)| *s == Sign::Plus).count()
    }

    /// `h · s · k`: every entry and the degree multiplied on both sides.
    pub fn translate(&self, ctx: &GroupContext, h: &GroupElement, k: &GroupElement) -> Result<Symbol> {
        let entries =
            self.entries.iter().map(|(g, s)| Ok((ctx.sandwich(h, g, k)?, *s))).collect::<Result<Vec<_>>>()?;
        let degree = self.degree.left_act(h, ctx)?.right_act(k, ctx)?;
        Ok(Symbol { entries, degree, ..self.clone() })
    }

    /// Entry `j` of the result is entry `perm[j]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Symbol {
        let entries = perm.iter().map(|&i| self.entries[i].clone()).collect();
        Symbol { entries, ..self.clone() }
    }

    /// `KIND{w1 s1,…}@degree`.
    pub fn parse(ctx: &GroupContext, text: &str) -> Result<Self> {
        let lead = text.len() - text.trim_start().len();
        let body = text.trim();
        let mut chars = body.chars();
        let kind = chars
            .next()
            .and_then(Kind::from_char)
            .ok_or_else(|| Error::syntax(lead, "expected a kind letter E, H, T or Q"))?;
        let rest = chars.as_str().trim_start();
        let open = lead + body.len() - rest.len();
        let rest = rest.strip_prefix('{').ok_or_else(|| Error::syntax(open, "expected `{`"))?;
        let close = rest.find('}').ok_or_else(|| Error::syntax(text.len(), "missing `}`"))?;
        let after = rest[close + 1..].trim_start();
        let at = text.len() - after.len();
        let degree_text = after.strip_prefix('@').ok_or_else(|| Error::syntax(at, "expected `@degree`"))?;
        let mut entries = Vec::new();
        let mut offset = open + 1;
        for part in rest[..close].split(',') {
            entries.push(parse_entry(ctx, part, offset)?);
            offset += part.len() + 1;
        }
        let degree = GroupRingElement::parse(ctx, degree_text).map_err(|e| shift(e, at + 1))?;
        Symbol::new(ctx, kind, entries, degree)
    }

    pub fn format(&self, ctx: &GroupContext) -> String {
        let entries: Vec<String> = self.entries.iter().map(|(g, s)| format!("{}{}", ctx.format(g), s.as_char())).collect();
        format!("{}{{{}}}@{}", self.kind, entries.join(","), self.degree.format(ctx))
    }
}

fn parse_entry(ctx: &GroupContext, part: &str, offset: usize) -> Result<(GroupElement, Sign)> {
    let t = part.trim_end();
    let sign = match t.chars().last() {
        Some('+') => Sign::Plus,
        Some('-') => Sign::Minus,
        _ => return Err(Error::syntax(offset + t.len(), "entry must end with a sign `+` or `-`")),
    };
    let word = t[..t.len() - 1].trim();
    if word.is_empty() {
        return Err(Error::syntax(offset, "missing group element"));
    }
    let g = ctx.parse_word(word).map_err(|e| shift(e, offset))?;
    Ok((g, sign))
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos: pos + by, msg },
        other => other,
    }
}

/// The symbol of the same stratum with the opposite co-orientation. H flips
/// both signs; Q flips all four signs and swaps the first two entries. The
/// degree is unchanged.
pub fn reverse(s: &Symbol) -> Result<Symbol> {
    let mut entries: Vec<(GroupElement, Sign)> = s.entries.iter().map(|(g, e)| (g.clone(), e.flip())).collect();
    match s.kind {
        Kind::H => {}
        Kind::Q => entries.swap(0, 1),
        k => return Err(Error::NotReversible(k.as_char())),
    }
    Ok(Symbol { entries, ..s.clone() })
}

/// A nonempty ordered tuple of symbols over one context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolTuple {
    symbols: Vec<Symbol>,
}

impl SymbolTuple {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        let first = symbols.first().ok_or_else(|| Error::syntax(0, "a tuple needs at least one symbol"))?;
        if symbols.iter().any(|s| s.ctx != first.ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(SymbolTuple { symbols })
    }

    pub fn single(s: Symbol) -> Self {
        SymbolTuple { symbols: vec![s] }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn context(&self) -> ContextId {
        self.symbols[0].ctx
    }

    /// Either a bare symbol or `[S1; S2; …]`.
    pub fn parse(ctx: &GroupContext, text: &str) -> Result<Self> {
        let t = text.trim();
        let Some(inner) = t.strip_prefix('[') else {
            return Ok(SymbolTuple::single(Symbol::parse(ctx, text)?));
        };
        let lead = text.len() - text.trim_start().len() + 1;
        let inner = inner.strip_suffix(']').ok_or_else(|| Error::syntax(text.trim_end().len(), "missing `]`"))?;
        let mut symbols = Vec::new();
        let mut offset = lead;
        for part in inner.split(';') {
            symbols.push(Symbol::parse(ctx, part).map_err(|e| shift(e, offset))?);
            offset += part.len() + 1;
        }
        SymbolTuple::new(symbols)
    }

    pub fn format(&self, ctx: &GroupContext) -> String {
        let parts: Vec<String> = self.symbols.iter().map(|s| s.format(ctx)).collect();
        format!("[{}]", parts.join("; "))
    }
}
