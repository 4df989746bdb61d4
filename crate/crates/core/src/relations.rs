//! The eight relation families between symbols, and their instances inside a
//! finite universe of symbol classes.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::abelian::IntMatrix;
use crate::error::{Error, Result};
use crate::group::{GroupContext, GroupElement, Radius};
use crate::ring::GroupRingElement;
use crate::symbols::{canonicalize, encode_tuple, CanonStatus, Kind, Sign, Symbol, SymbolTuple};

/// Above this many raw parameter choices generation refuses to start.
const MAX_RAW_INSTANCES: u64 = 200_000_000;

/// `|ε|`: one for `+`, zero for `-`.
pub fn indicator(e: Sign) -> i64 {
    e.indicator() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    HRev,
    QRev,
    EH,
    TT,
    ET,
    HT,
    TQ,
    QQ,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::HRev,
        RelationKind::QRev,
        RelationKind::EH,
        RelationKind::TT,
        RelationKind::ET,
        RelationKind::HT,
        RelationKind::TQ,
        RelationKind::QQ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::HRev => "HRev",
            RelationKind::QRev => "QRev",
            RelationKind::EH => "EH",
            RelationKind::TT => "TT",
            RelationKind::ET => "ET",
            RelationKind::HT => "HT",
            RelationKind::TQ => "TQ",
            RelationKind::QQ => "QQ",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationKind> {
        RelationKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn term_count(self) -> usize {
        match self {
            RelationKind::HRev | RelationKind::QRev | RelationKind::EH | RelationKind::TT => 2,
            RelationKind::ET | RelationKind::HT | RelationKind::TQ => 4,
            RelationKind::QQ => 10,
        }
    }

    /// Number of signed entries in the parameters.
    pub fn entry_count(self) -> usize {
        match self {
            RelationKind::HRev | RelationKind::EH | RelationKind::ET | RelationKind::HT => 2,
            RelationKind::TT | RelationKind::TQ => 3,
            RelationKind::QRev => 4,
            RelationKind::QQ => 5,
        }
    }

    /// Whether the parameters carry the extra element `g`.
    pub fn has_extra(self) -> bool {
        matches!(self, RelationKind::ET | RelationKind::HT | RelationKind::TQ)
    }

    /// Symbol kinds occurring in the terms.
    pub fn symbol_kinds(self) -> &'static [Kind] {
        match self {
            RelationKind::HRev => &[Kind::H],
            RelationKind::QRev | RelationKind::QQ => &[Kind::Q],
            RelationKind::EH => &[Kind::E, Kind::H],
            RelationKind::TT => &[Kind::T],
            RelationKind::ET => &[Kind::E, Kind::T],
            RelationKind::HT => &[Kind::H, Kind::T],
            RelationKind::TQ => &[Kind::T, Kind::Q],
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Instantiation parameters: the signed entries (the common string `s`, or
/// `g1ε1,…`), the extra element `g` of ET/HT/TQ, and the degree `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub entries: Vec<(GroupElement, Sign)>,
    pub extra: Option<GroupElement>,
    pub degree: GroupRingElement,
}

impl Params {
    pub fn format(&self, ctx: &GroupContext) -> String {
        let entries: Vec<String> = self.entries.iter().map(|(g, e)| format!("{}{}", ctx.format(g), e.as_char())).collect();
        let extra = self.extra.as_ref().map(|g| format!(" g={}", ctx.format(g))).unwrap_or_default();
        format!("s=({}){} d={}", entries.join(","), extra, self.degree.format(ctx))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTerm {
    pub coefficient: i64,
    pub symbol: Symbol,
}

/// A formal sum of symbols that every order-one invariant annihilates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub kind: RelationKind,
    pub terms: Vec<RelationTerm>,
    pub params: Params,
}

/// Plane indices (zero-based) of the ten QQ terms. Each entry is
/// `(plane, flipped)`; the subscript is `d − |ε|·g_plane` where `ε` is the
/// plane's sign, flipped when the second flag is set.
type PlaneRef = (usize, bool);

const QQ_TERMS: [([PlaneRef; 4], PlaneRef); 10] = [
    ([(0, false), (1, false), (2, false), (3, false)], (4, false)),
    ([(4, false), (1, false), (2, false), (3, false)], (0, true)),
    ([(4, false), (0, true), (2, false), (3, false)], (1, true)),
    ([(4, false), (0, true), (1, true), (3, false)], (2, true)),
    ([(4, false), (0, true), (1, true), (2, true)], (3, true)),
    ([(3, true), (0, true), (1, true), (2, true)], (4, true)),
    ([(3, true), (4, true), (1, true), (2, true)], (0, false)),
    ([(3, true), (4, true), (0, false), (2, true)], (1, false)),
    ([(3, true), (4, true), (0, false), (1, false)], (2, false)),
    ([(2, false), (4, true), (0, false), (1, false)], (3, false)),
];

/// Instantiates one relation family at the given parameters.
pub fn instantiate(ctx: &GroupContext, kind: RelationKind, p: &Params) -> Result<Relation> {
    if p.entries.len() != kind.entry_count() {
        return Err(Error::Arity { expected: kind.entry_count(), found: p.entries.len() });
    }
    if p.extra.is_some() != kind.has_extra() {
        return Err(Error::Arity { expected: kind.entry_count() + kind.has_extra() as usize, found: p.entries.len() + p.extra.is_some() as usize });
    }
    let s = &p.entries;
    let d = &p.degree;
    let flipped = |v: &[(GroupElement, Sign)]| -> Vec<(GroupElement, Sign)> { v.iter().map(|(g, e)| (g.clone(), e.flip())).collect() };
    let with = |v: &[(GroupElement, Sign)], e: Sign| -> Vec<(GroupElement, Sign)> {
        let mut v = v.to_vec();
        v.push((p.extra.clone().expect("checked above"), e));
        v
    };
    let sym = |k: Kind, entries: Vec<(GroupElement, Sign)>, degree: GroupRingElement| Symbol::new(ctx, k, entries, degree);
    let term = |c: i64, s: Symbol| RelationTerm { coefficient: c, symbol: s };
    let d_minus_g = || d.basis_sub(p.extra.as_ref().expect("checked above"), ctx);
    let terms = match kind {
        RelationKind::HRev => vec![term(1, sym(Kind::H, s.clone(), d.clone())?), term(1, sym(Kind::H, flipped(s), d.clone())?)],
        RelationKind::QRev => {
            let mut r = flipped(s);
            r.swap(0, 1);
            vec![term(1, sym(Kind::Q, s.clone(), d.clone())?), term(1, sym(Kind::Q, r, d.clone())?)]
        }
        RelationKind::EH => vec![term(1, sym(Kind::E, s.clone(), d.clone())?), term(-1, sym(Kind::H, s.clone(), d.clone())?)],
        RelationKind::TT => vec![term(1, sym(Kind::T, s.clone(), d.clone())?), term(-1, sym(Kind::T, flipped(s), d.clone())?)],
        RelationKind::ET | RelationKind::HT | RelationKind::TQ => {
            let (big, small) = match kind {
                RelationKind::ET => (Kind::T, Kind::E),
                RelationKind::HT => (Kind::T, Kind::H),
                _ => (Kind::Q, Kind::T),
            };
            let minus = term(1, sym(big, with(s, Sign::Minus), d.clone())?);
            let plus = term(-1, sym(big, with(s, Sign::Plus), d.clone())?);
            let (first, second) = if kind == RelationKind::HT { (plus, minus) } else { (minus, plus) };
            vec![
                first,
                second,
                term(-1, sym(small, s.clone(), d_minus_g()?)?),
                term(1, sym(small, s.clone(), d.clone())?),
            ]
        }
        RelationKind::QQ => QQ_TERMS
            .iter()
            .map(|(planes, (sub, sub_flip))| {
                let entries = planes
                    .iter()
                    .map(|&(i, f)| (s[i].0.clone(), if f { s[i].1.flip() } else { s[i].1 }))
                    .collect();
                let e = if *sub_flip { s[*sub].1.flip() } else { s[*sub].1 };
                let degree = if indicator(e) == 1 { d.basis_sub(&s[*sub].0, ctx)? } else { d.clone() };
                Ok(term(1, sym(Kind::Q, entries, degree)?))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Relation { kind, terms, params: p.clone() })
}

/// Window of a truncated universe: entries in the ball, degrees supported in
/// the ball with coefficients in `[-coeff_bound, coeff_bound]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseConfig {
    pub radius: Radius,
    pub coeff_bound: u32,
    pub kinds: Vec<Kind>,
    /// Left-multiplier radius for fp canonicalization.
    pub search_radius: usize,
    pub max_size: usize,
}

impl UniverseConfig {
    pub fn new(radius: Radius, coeff_bound: u32, kinds: &[Kind]) -> Self {
        let mut kinds = kinds.to_vec();
        kinds.sort();
        kinds.dedup();
        UniverseConfig { radius, coeff_bound, kinds, search_radius: 1, max_size: 1_000_000 }
    }
}

/// The canonical representatives of all symbol classes meeting the window,
/// sorted by encoding.
#[derive(Debug, Clone)]
pub struct SymbolUniverse {
    ctx: GroupContext,
    config: UniverseConfig,
    ball: Vec<GroupElement>,
    degrees: Vec<GroupRingElement>,
    symbols: Vec<Symbol>,
    index: HashMap<Vec<u8>, usize>,
    status: CanonStatus,
}

impl SymbolUniverse {
    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn config(&self) -> &UniverseConfig {
        &self.config
    }

    pub fn ball(&self) -> &[GroupElement] {
        &self.ball
    }

    /// Every degree in the window.
    pub fn degrees(&self) -> &[GroupRingElement] {
        &self.degrees
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

    pub fn status(&self) -> CanonStatus {
        self.status
    }

    /// Index of the class of `s`, if it lies in the universe.
    pub fn lookup(&self, s: &Symbol) -> Result<Option<usize>> {
        let c = canonicalize(&self.ctx, &SymbolTuple::single(s.clone()), self.config.search_radius)?;
        Ok(self.index.get(&c.encoding).copied())
    }

    pub fn index_of(&self, s: &Symbol) -> Result<usize> {
        self.lookup(s)?.ok_or_else(|| Error::OutsideUniverse(s.format(&self.ctx)))
    }

    /// Whether the ball is the whole (finite) group. Then every class has a
    /// member whose first entry is the identity, and enumeration may fix it.
    fn ball_is_group(&self) -> bool {
        self.ctx.is_exact() && self.ctx.order() == Some(self.ball.len() as u64)
    }
}

fn window_degrees(ctx: &GroupContext, ball: &[GroupElement], c: u32, limit: u64) -> Result<Vec<GroupRingElement>> {
    let width = 2 * c as u64 + 1;
    let count = checked_pow(width, ball.len()).filter(|&n| n <= limit).ok_or_else(|| {
        Error::ResourceLimit(format!("{width}^{} degrees in the coefficient window", ball.len()))
    })?;
    (0..count)
        .map(|mut code| {
            let mut terms = Vec::new();
            for g in ball {
                let coef = (code % width) as i64 - c as i64;
                code /= width;
                if coef != 0 {
                    terms.push((g.clone(), BigInt::from(coef)));
                }
            }
            GroupRingElement::from_terms(ctx, terms)
        })
        .collect()
}

fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    (0..exp).try_fold(1u64, |acc, _| acc.checked_mul(base))
}

/// Decodes `code` into `digits` mixed-radix digits of base `base`.
fn digits(mut code: u64, base: u64, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = code % base;
            code /= base;
            d as usize
        })
        .collect()
}

fn sign_of(bit: u64) -> Sign {
    if bit == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

pub fn build_universe(ctx: &GroupContext, config: &UniverseConfig) -> Result<SymbolUniverse> {
    let ball = ctx.enumerate_ball(config.radius)?.elements;
    let raw_limit = (config.max_size as u64).saturating_mul(64);
    let degrees = window_degrees(ctx, &ball, config.coeff_bound, raw_limit)?;
    let status = if ctx.is_exact() { CanonStatus::Exact } else { CanonStatus::Heuristic };
    let mut u = SymbolUniverse {
        ctx: ctx.clone(),
        config: config.clone(),
        ball,
        degrees,
        symbols: Vec::new(),
        index: HashMap::new(),
        status,
    };
    let fixed_first = u.ball_is_group();
    let b = u.ball.len() as u64;
    let mut found: Vec<(Vec<u8>, Symbol)> = Vec::new();
    for &kind in &config.kinds {
        let free = kind.arity() - fixed_first as usize;
        let tuples = checked_pow(b, free).unwrap_or(u64::MAX);
        let raw = tuples.saturating_mul(1 << kind.arity()).saturating_mul(u.degrees.len() as u64);
        if raw > raw_limit {
            return Err(Error::ResourceLimit(format!("{raw} raw {kind} symbols exceed the enumeration limit")));
        }
        let chunk: Vec<(Vec<u8>, Symbol)> = (0..tuples * (1 << kind.arity()))
            .into_par_iter()
            .map(|code| {
                let signs = code & ((1 << kind.arity()) - 1);
                let mut elems = digits(code >> kind.arity(), b, free);
                if fixed_first {
                    elems.insert(0, 0);
                }
                let entries: Vec<(GroupElement, Sign)> =
                    elems.iter().enumerate().map(|(i, &e)| (u.ball[e].clone(), sign_of((signs >> i) & 1))).collect();
                let mut local: HashMap<Vec<u8>, Symbol> = HashMap::new();
                for d in &u.degrees {
                    let s = Symbol::new(ctx, kind, entries.clone(), d.clone())?;
                    let c = canonicalize(ctx, &SymbolTuple::single(s), config.search_radius)?;
                    local.entry(c.encoding).or_insert_with(|| c.tuple.symbols()[0].clone());
                }
                Ok(local.into_iter().collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        found.extend(chunk);
        found.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        found.dedup_by(|a, b| a.0 == b.0);
        if found.len() > config.max_size {
            return Err(Error::ResourceLimit(format!("universe exceeds {} symbols", config.max_size)));
        }
    }
    for (i, (enc, s)) in found.into_iter().enumerate() {
        u.index.insert(enc, i);
        u.symbols.push(s);
    }
    Ok(u)
}

/// A relation instance over universe indices, with merged coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseRelation {
    pub kind: RelationKind,
    pub provenance: String,
    pub terms: Vec<(usize, i64)>,
}

impl UniverseRelation {
    pub fn format(&self) -> String {
        let terms: Vec<String> = self.terms.iter().map(|(i, c)| format!("{c}*{i}")).collect();
        format!("{} | {}", self.kind, terms.join(" "))
    }
}

/// Every instance of the requested families whose terms all lie in `u`,
/// ordered by family and then parameter enumeration order. Instances with
/// identical term vectors are kept once; vanishing ones are dropped.
pub fn generate_relations(u: &SymbolUniverse, kinds: &[RelationKind], max_relations: usize) -> Result<Vec<UniverseRelation>> {
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    let mut out: Vec<UniverseRelation> = Vec::new();
    let mut seen: HashMap<Vec<(usize, i64)>, ()> = HashMap::new();
    for kind in kinds {
        if !kind.symbol_kinds().iter().all(|k| u.config.kinds.contains(k)) {
            continue;
        }
        for rel in instances(u, kind)? {
            if seen.insert(rel.terms.clone(), ()).is_none() {
                out.push(rel);
                if out.len() > max_relations {
                    return Err(Error::ResourceLimit(format!("more than {max_relations} relations")));
                }
            }
        }
    }
    Ok(out)
}

fn instances(u: &SymbolUniverse, kind: RelationKind) -> Result<Vec<UniverseRelation>> {
    let ctx = &u.ctx;
    let b = u.ball.len() as u64;
    let m = kind.entry_count();
    // Right-translating all parameters by one element right-translates every
    // term, so with the whole group as ball the first entry may be fixed.
    let fixed_first = u.ball_is_group();
    let elem_slots = m + kind.has_extra() as usize - fixed_first as usize;
    let total = checked_pow(b, elem_slots)
        .and_then(|n| n.checked_mul(1 << m))
        .and_then(|n| n.checked_mul(u.degrees.len() as u64))
        .filter(|&n| n <= MAX_RAW_INSTANCES)
        .ok_or_else(|| Error::ResourceLimit(format!("too many {kind} parameter choices")))?;
    let per_degree = total / u.degrees.len().max(1) as u64;
    let rels: Vec<Option<UniverseRelation>> = (0..total)
        .into_par_iter()
        .map(|code| {
            let d = &u.degrees[(code / per_degree) as usize];
            let rest = code % per_degree;
            let signs = rest & ((1 << m) - 1);
            let mut elems = digits(rest >> m, b, elem_slots);
            if fixed_first {
                elems.insert(0, 0);
            }
            let entries: Vec<(GroupElement, Sign)> =
                (0..m).map(|i| (u.ball[elems[i]].clone(), sign_of((signs >> i) & 1))).collect();
            let extra = kind.has_extra().then(|| u.ball[elems[m]].clone());
            let params = Params { entries, extra, degree: d.clone() };
            let rel = instantiate(ctx, kind, &params)?;
            let mut merged: Vec<(usize, i64)> = Vec::with_capacity(rel.terms.len());
            for t in &rel.terms {
                match u.lookup(&t.symbol)? {
                    Some(i) => merged.push((i, t.coefficient)),
                    None => return Ok(None),
                }
            }
            merged.sort();
            let mut terms: Vec<(usize, i64)> = Vec::with_capacity(merged.len());
            for (i, c) in merged {
                match terms.last_mut() {
                    Some((j, acc)) if *j == i => *acc += c,
                    _ => terms.push((i, c)),
                }
            }
            terms.retain(|&(_, c)| c != 0);
            if terms.is_empty() {
                return Ok(None);
            }
            Ok(Some(UniverseRelation { kind, provenance: params.format(ctx), terms }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rels.into_iter().flatten().collect())
}

/// One `kind | c*idx …` line per relation.
pub fn format_relations(rels: &[UniverseRelation]) -> String {
    rels.iter().map(|r| r.format() + "\n").collect()
}

/// Parses the line format of [`format_relations`]. Provenance is not part of
/// the line format and comes back empty.
pub fn parse_relations(text: &str) -> Result<Vec<UniverseRelation>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kind, rest) = line.split_once('|').ok_or_else(|| Error::syntax(n + 1, "expected `kind | terms`"))?;
        let kind = RelationKind::from_name(kind.trim()).ok_or_else(|| Error::syntax(n + 1, format!("unknown relation kind `{}`", kind.trim())))?;
        let terms = rest
            .split_whitespace()
            .map(|t| {
                let (c, i) = t.split_once('*').ok_or_else(|| Error::syntax(n + 1, format!("bad term `{t}`")))?;
                let c = c.parse().map_err(|_| Error::syntax(n + 1, format!("bad coefficient in `{t}`")))?;
                let i = i.parse().map_err(|_| Error::syntax(n + 1, format!("bad index in `{t}`")))?;
                Ok((i, c))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(UniverseRelation { kind, provenance: String::new(), terms });
    }
    Ok(out)
}

/// `index symbol` lines for the universe.
pub fn format_sidecar(u: &SymbolUniverse) -> String {
    u.symbols.iter().enumerate().map(|(i, s)| format!("{i} {}\n", s.format(&u.ctx))).collect()
}

/// Rows are relations, columns are universe indices.
pub fn relation_matrix(u: &SymbolUniverse, rels: &[UniverseRelation]) -> Result<IntMatrix> {
    let triplets = rels.iter().enumerate().flat_map(|(r, rel)| rel.terms.iter().map(move |&(c, v)| (r, c, BigInt::from(v))));
    IntMatrix::from_triplets(rels.len(), u.len(), triplets)
}

/// The canonical encoding of a single symbol, as used for universe indexing.
pub fn symbol_key(ctx: &GroupContext, s: &Symbol, radius: usize) -> Result<Vec<u8>> {
    let c = canonicalize(ctx, &SymbolTuple::single(s.clone()), radius)?;
    debug_assert_eq!(c.encoding, encode_tuple(ctx, &c.tuple));
    Ok(c.encoding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn entries(ctx: &GroupContext, spec: &[(&str, char)]) -> Vec<(GroupElement, Sign)> {
        spec.iter()
            .map(|(w, s)| (ctx.parse_word(w).unwrap(), if *s == '+' { Sign::Plus } else { Sign::Minus }))
            .collect()
    }

    fn rendered(ctx: &GroupContext, r: &Relation) -> Vec<String> {
        r.terms.iter().map(|t| format!("{:+}{}", t.coefficient, t.symbol.format(ctx))).collect()
    }

    #[test]
    fn indicator_values() {
        assert_eq!(indicator(Sign::Plus), 1);
        assert_eq!(indicator(Sign::Minus), 0);
        for e in [Sign::Plus, Sign::Minus] {
            assert_eq!(indicator(e.flip()), 1 - indicator(e));
        }
    }

    #[test]
    fn small_families() {
        let z = GroupContext::free_abelian(1).unwrap();
        let d = GroupRingElement::parse(&z, "x").unwrap();
        let p = |s: &[(&str, char)], extra: Option<&str>| Params {
            entries: entries(&z, s),
            extra: extra.map(|w| z.parse_word(w).unwrap()),
            degree: d.clone(),
        };
        let eh = instantiate(&z, RelationKind::EH, &p(&[("e", '+'), ("x", '-')], None)).unwrap();
        assert_eq!(rendered(&z, &eh), ["+1E{e+,x-}@x", "-1H{e+,x-}@x"]);
        let tt = instantiate(&z, RelationKind::TT, &p(&[("e", '+'), ("x", '-'), ("x^2", '+')], None)).unwrap();
        assert_eq!(rendered(&z, &tt), ["+1T{e+,x-,x^2+}@x", "-1T{e-,x+,x^2-}@x"]);
        let hrev = instantiate(&z, RelationKind::HRev, &p(&[("e", '+'), ("x", '-')], None)).unwrap();
        assert_eq!(rendered(&z, &hrev), ["+1H{e+,x-}@x", "+1H{e-,x+}@x"]);
        let qrev = instantiate(&z, RelationKind::QRev, &p(&[("e", '+'), ("x", '-'), ("x^2", '+'), ("x^3", '+')], None)).unwrap();
        assert_eq!(rendered(&z, &qrev), ["+1Q{e+,x-,x^2+,x^3+}@x", "+1Q{x+,e-,x^2-,x^3-}@x"]);
        let et = instantiate(&z, RelationKind::ET, &p(&[("e", '+'), ("x", '-')], Some("x^2"))).unwrap();
        assert_eq!(rendered(&z, &et), ["+1T{e+,x-,x^2-}@x", "-1T{e+,x-,x^2+}@x", "-1E{e+,x-}@x - x^2", "+1E{e+,x-}@x"]);
        let ht = instantiate(&z, RelationKind::HT, &p(&[("e", '+'), ("x", '-')], Some("x"))).unwrap();
        assert_eq!(rendered(&z, &ht), ["-1T{e+,x-,x+}@x", "+1T{e+,x-,x-}@x", "-1H{e+,x-}@0", "+1H{e+,x-}@x"]);
        let tq = instantiate(&z, RelationKind::TQ, &p(&[("e", '+'), ("x", '-'), ("e", '-')], Some("x^-1"))).unwrap();
        assert_eq!(tq.terms.len(), 4);
        assert_eq!(tq.terms[2].symbol.format(&z), "T{e+,x-,e-}@x - x^-1");
        assert!(matches!(instantiate(&z, RelationKind::ET, &p(&[("e", '+'), ("x", '-')], None)), Err(Error::Arity { .. })));
        assert!(matches!(instantiate(&z, RelationKind::EH, &p(&[("e", '+')], None)), Err(Error::Arity { .. })));
    }

    /// Independent reading of the quintuple-point relation: walking around
    /// the point, the planes drop out in the order 5,1,2,3,4,5,1,2,3,4; the
    /// incoming plane takes the slot of the outgoing one with the sign
    /// opposite to its previous appearance, and the degree moves by
    /// `+|ε_in|g_in − |ε̂_out|g_out`.
    fn qq_oracle(ctx: &GroupContext, p: &Params) -> Vec<(Vec<(GroupElement, Sign)>, GroupRingElement)> {
        let s = &p.entries;
        let mut slots: Vec<(usize, Sign)> = (0..4).map(|i| (i, s[i].1)).collect();
        let mut last_sign: Vec<Sign> = s.iter().map(|x| x.1).collect();
        last_sign[4] = s[4].1.flip();
        let mut degree = if s[4].1 == Sign::Plus { p.degree.basis_sub(&s[4].0, ctx).unwrap() } else { p.degree.clone() };
        let mut out = vec![(slots.iter().map(|&(i, e)| (s[i].0.clone(), e)).collect::<Vec<_>>(), degree.clone())];
        let outgoing = [0, 1, 2, 3, 4, 0, 1, 2, 3];
        let mut incoming = 4;
        for &gone in &outgoing {
            let slot = slots.iter().position(|&(i, _)| i == gone).unwrap();
            let in_sign = last_sign[incoming].flip();
            let out_sign = slots[slot].1;
            last_sign[gone] = out_sign;
            last_sign[incoming] = in_sign;
            slots[slot] = (incoming, in_sign);
            if in_sign == Sign::Plus {
                degree = degree.add(&GroupRingElement::basis(ctx, &s[incoming].0).unwrap(), ctx).unwrap();
            }
            if out_sign.flip() == Sign::Plus {
                degree = degree.basis_sub(&s[gone].0, ctx).unwrap();
            }
            // The first plane of the next term is the one that re-enters.
            incoming = gone;
            out.push((slots.iter().map(|&(i, e)| (s[i].0.clone(), e)).collect(), degree.clone()));
        }
        out
    }

    #[test]
    fn quintuple_relation_matches_oracle() {
        let z = GroupContext::free_abelian(5).unwrap();
        let names = ["x1", "x2", "x3", "x4", "x5"];
        for signs in 0u32..32 {
            let spec: Vec<(&str, char)> = (0..5).map(|i| (names[i], if signs >> i & 1 == 0 { '+' } else { '-' })).collect();
            let p = Params { entries: entries(&z, &spec), extra: None, degree: GroupRingElement::parse(&z, "e").unwrap() };
            let rel = instantiate(&z, RelationKind::QQ, &p).unwrap();
            assert_eq!(rel.terms.len(), 10);
            let expected = qq_oracle(&z, &p);
            for (t, (ent, deg)) in rel.terms.iter().zip(&expected) {
                assert_eq!(t.coefficient, 1);
                assert_eq!(t.symbol.entries(), &ent[..], "signs {signs:05b}");
                assert_eq!(t.symbol.degree(), deg, "signs {signs:05b}");
            }
            let mut subsets: BTreeMap<Vec<String>, usize> = BTreeMap::new();
            for t in &rel.terms {
                let mut key: Vec<String> = t.symbol.entries().iter().map(|(g, _)| z.format(g)).collect();
                key.sort();
                *subsets.entry(key).or_default() += 1;
            }
            assert_eq!(subsets.len(), 5);
            assert!(subsets.values().all(|&n| n == 2));
        }
    }

    #[test]
    fn quintuple_trivial_subscripts() {
        let t = GroupContext::trivial();
        let e = t.identity();
        let p = Params {
            entries: vec![(e.clone(), Sign::Plus); 5],
            extra: None,
            degree: GroupRingElement::zero(&t),
        };
        let rel = instantiate(&t, RelationKind::QQ, &p).unwrap();
        let subs: Vec<String> = rel.terms.iter().map(|x| x.symbol.degree().format(&t)).collect();
        assert_eq!(subs, ["-e", "0", "0", "0", "0", "0", "-e", "-e", "-e", "-e"]);
    }

    #[test]
    fn trivial_universe() {
        let t = GroupContext::trivial();
        let u = build_universe(&t, &UniverseConfig::new(Radius::Infinite, 0, &[Kind::E, Kind::H])).unwrap();
        let names: Vec<String> = u.symbols().iter().map(|s| s.format(&t)).collect();
        assert_eq!(names, ["E{e+,e+}@0", "E{e+,e-}@0", "E{e-,e-}@0", "H{e+,e+}@0", "H{e+,e-}@0", "H{e-,e-}@0"]);
        let rels = generate_relations(&u, &RelationKind::ALL, 1000).unwrap();
        let lines = format_relations(&rels);
        assert_eq!(lines, "HRev | 1*3 1*5\nHRev | 2*4\nEH | 1*0 -1*3\nEH | 1*1 -1*4\nEH | 1*2 -1*5\n");
        assert_eq!(parse_relations(&lines).unwrap().iter().map(|r| (r.kind, r.terms.clone())).collect::<Vec<_>>(),
            rels.iter().map(|r| (r.kind, r.terms.clone())).collect::<Vec<_>>());
        let m = relation_matrix(&u, &rels).unwrap();
        assert_eq!((m.rows(), m.cols(), m.nnz()), (5, 6, 9));
        assert!(generate_relations(&u, &[], 10).unwrap().is_empty());
        assert!(generate_relations(&u, &[RelationKind::ET], 10).unwrap().is_empty());

        let q = build_universe(&t, &UniverseConfig::new(Radius::Infinite, 0, &[Kind::Q])).unwrap();
        assert_eq!(q.len(), 5);
    }

    #[test]
    fn resource_limits() {
        let c = GroupContext::cyclic(4).unwrap();
        let mut cfg = UniverseConfig::new(Radius::Infinite, 1, &[Kind::E, Kind::H, Kind::T]);
        cfg.max_size = 10;
        assert!(matches!(build_universe(&c, &cfg), Err(Error::ResourceLimit(_))));
        let t = GroupContext::trivial();
        let u = build_universe(&t, &UniverseConfig::new(Radius::Infinite, 0, &[Kind::E, Kind::H])).unwrap();
        assert!(matches!(generate_relations(&u, &RelationKind::ALL, 2), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn relations_are_translation_invariant() {
        let c = GroupContext::cyclic(3).unwrap();
        let u = build_universe(&c, &UniverseConfig::new(Radius::Infinite, 1, &[Kind::E, Kind::H, Kind::T])).unwrap();
        let g = c.parse_word("x").unwrap();
        let d = GroupRingElement::parse(&c, "x - e").unwrap();
        let base = Params { entries: entries(&c, &[("e", '+'), ("x^2", '-')]), extra: Some(g.clone()), degree: d.clone() };
        let k = c.parse_word("x^2").unwrap();
        let moved = Params {
            entries: base.entries.iter().map(|(a, e)| (c.multiply(a, &k).unwrap(), *e)).collect(),
            extra: Some(c.multiply(&g, &k).unwrap()),
            degree: d.right_act(&k, &c).unwrap(),
        };
        for kind in [RelationKind::EH, RelationKind::HRev, RelationKind::ET, RelationKind::HT] {
            let mut p1 = base.clone();
            let mut p2 = moved.clone();
            if !kind.has_extra() {
                p1.extra = None;
                p2.extra = None;
            }
            let idx = |p: &Params| -> Vec<(usize, i64)> {
                let r = instantiate(&c, kind, p).unwrap();
                let mut v: Vec<(usize, i64)> = r.terms.iter().map(|t| (u.index_of(&t.symbol).unwrap(), t.coefficient)).collect();
                v.sort();
                v
            };
            assert_eq!(idx(&p1), idx(&p2), "{kind}");
        }
    }
}
