//! The fundamental group as an abstract context with concrete backends.
//!
//! A [`GroupContext`] is immutable after construction and cheap to clone.
//! Elements carry the identifier of the context that produced them, and every
//! binary operation rejects elements from a different context.

mod fp;
pub mod spec;
pub mod word;

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use fp::{FpGroup, Quotient, DEFAULT_SEARCH_BUDGET};
pub use spec::{GroupSpec, QuotientSpec};
use word::{concat_reduced, format_word, invert, is_identifier, parse_terms, power, shortlex_cmp, Letter, Word};

static NEXT_CONTEXT: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextId(u64);

/// Tri-state truth value. `Unknown` is only produced by the fp backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eq3 {
    True,
    False,
    Unknown,
}

impl Eq3 {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Eq3::True
        } else {
            Eq3::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Eq3::True
    }

    /// Three-valued conjunction.
    pub fn and(self, other: Eq3) -> Eq3 {
        match (self, other) {
            (Eq3::False, _) | (_, Eq3::False) => Eq3::False,
            (Eq3::True, Eq3::True) => Eq3::True,
            _ => Eq3::Unknown,
        }
    }
}

impl fmt::Display for Eq3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eq3::True => "true",
            Eq3::False => "false",
            Eq3::Unknown => "unknown",
        })
    }
}

/// How an equality verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Normal forms compared in an exact backend.
    Exact,
    FreeReduction,
    /// The rewriting search reached the empty word.
    Rewriting { nodes: usize },
    /// The declared quotient with this index separates the elements.
    Quotient(usize),
    Abelianization,
    /// Neither side of the bounded search succeeded.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Equality {
    pub verdict: Eq3,
    pub evidence: Evidence,
}

/// Word-length radius for ball enumeration; `Infinite` is the whole group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Radius {
    Finite(usize),
    Infinite,
}

impl FromStr for Radius {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Radius::Infinite),
            t => t
                .parse()
                .map(Radius::Finite)
                .map_err(|_| Error::syntax(0, format!("invalid radius `{t}`"))),
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Infinite => f.write_str("inf"),
        }
    }
}

/// Result of [`GroupContext::enumerate_ball`]. `unresolved` lists index
/// pairs whose equality could not be decided (fp only); both are kept.
#[derive(Debug, Clone)]
pub struct Ball {
    pub elements: Vec<GroupElement>,
    pub unresolved: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    ctx: ContextId,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Residue in `[0, order)`; the trivial group is the cyclic group of order one.
    Mod(u64),
    /// Exponent vector of a free abelian group.
    Vector(Vec<i64>),
    /// Index into a multiplication table.
    Index(u32),
    /// Freely reduced word.
    Word(Word),
}

impl GroupElement {
    pub fn context(&self) -> ContextId {
        self.ctx
    }

    /// Residue for cyclic and trivial backends.
    pub fn as_residue(&self) -> Option<u64> {
        match self.repr {
            Repr::Mod(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[i64]> {
        match &self.repr {
            Repr::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self.repr {
            Repr::Index(i) => Some(i as usize),
            _ => None,
        }
    }

    pub fn as_word(&self) -> Option<&[Letter]> {
        match &self.repr {
            Repr::Word(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone)]
pub struct GroupContext {
    inner: Arc<Inner>,
}

impl fmt::Debug for GroupContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupContext").field("id", &self.inner.id).field("spec", &self.inner.spec).finish()
    }
}

#[derive(Debug)]
struct Inner {
    id: ContextId,
    spec: GroupSpec,
    backend: Backend,
}

#[derive(Debug)]
enum Backend {
    Cyclic { order: u64, name: String },
    FreeAbelian { names: Vec<String> },
    Table(TableGroup),
    Fp(FpGroup),
}

#[derive(Debug)]
struct TableGroup {
    names: Vec<String>,
    table: Vec<Vec<u32>>,
    inverse: Vec<u32>,
    gens: Vec<u32>,
    abelian: bool,
}

impl GroupContext {
    /// Parses and validates a JSON group-spec document.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_spec(GroupSpec::from_json(text)?)
    }

    pub fn trivial() -> Self {
        Self::from_spec(GroupSpec::Trivial).expect("trivial group is valid")
    }

    pub fn cyclic(order: u64) -> Result<Self> {
        Self::from_spec(GroupSpec::Cyclic { order, generator: None })
    }

    pub fn free_abelian(rank: usize) -> Result<Self> {
        Self::from_spec(GroupSpec::FreeAbelian { rank, generators: None })
    }

    pub fn from_spec(spec: GroupSpec) -> Result<Self> {
        let id = ContextId(NEXT_CONTEXT.fetch_add(1, AtomicOrdering::Relaxed));
        let backend = match &spec {
            GroupSpec::Trivial => Backend::Cyclic { order: 1, name: "x".into() },
            GroupSpec::Cyclic { order, generator } => {
                if *order == 0 {
                    return Err(Error::InvalidSpec("cyclic order must be positive".into()));
                }
                let name = generator.clone().unwrap_or_else(|| "x".into());
                check_names(std::slice::from_ref(&name))?;
                Backend::Cyclic { order: *order, name }
            }
            GroupSpec::FreeAbelian { rank, generators } => {
                if *rank == 0 {
                    return Err(Error::InvalidSpec("free abelian rank must be positive".into()));
                }
                let names = match generators {
                    Some(g) if g.len() != *rank => {
                        return Err(Error::InvalidSpec(format!("{} generator names for rank {rank}", g.len())))
                    }
                    Some(g) => g.clone(),
                    None if *rank == 1 => vec!["x".into()],
                    None => (1..=*rank).map(|i| format!("x{i}")).collect(),
                };
                check_names(&names)?;
                Backend::FreeAbelian { names }
            }
            GroupSpec::FiniteTable { elements, table, generators } => {
                Backend::Table(TableGroup::new(elements, table, generators.as_deref())?)
            }
            GroupSpec::Fp { generators, relators, quotients, max_word_length, search_budget } => {
                if *max_word_length == 0 {
                    return Err(Error::InvalidSpec("max_word_length must be positive".into()));
                }
                check_names(generators)?;
                let relators = relators
                    .iter()
                    .map(|r| parse_fp_word(generators, r))
                    .collect::<Result<Vec<_>>>()?;
                let quotients = quotients
                    .iter()
                    .enumerate()
                    .map(|(q, qs)| build_quotient(q, qs, generators, &relators))
                    .collect::<Result<Vec<_>>>()?;
                Backend::Fp(FpGroup::new(
                    generators.clone(),
                    relators,
                    quotients,
                    *max_word_length,
                    search_budget.unwrap_or(DEFAULT_SEARCH_BUDGET),
                ))
            }
        };
        Ok(GroupContext { inner: Arc::new(Inner { id, spec, backend }) })
    }

    pub fn id(&self) -> ContextId {
        self.inner.id
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.inner.spec
    }

    /// True for every backend except fp, whose equality is semi-decided.
    pub fn is_exact(&self) -> bool {
        !matches!(self.inner.backend, Backend::Fp(_))
    }

    pub fn is_fp(&self) -> bool {
        !self.is_exact()
    }

    /// Whether the group is known to be abelian.
    pub fn is_abelian(&self) -> bool {
        match &self.inner.backend {
            Backend::Cyclic { .. } | Backend::FreeAbelian { .. } => true,
            Backend::Table(t) => t.abelian,
            Backend::Fp(_) => false,
        }
    }

    /// Group order for finite backends.
    pub fn order(&self) -> Option<u64> {
        match &self.inner.backend {
            Backend::Cyclic { order, .. } => Some(*order),
            Backend::Table(t) => Some(t.names.len() as u64),
            _ => None,
        }
    }

    pub fn identity(&self) -> GroupElement {
        let repr = match &self.inner.backend {
            Backend::Cyclic { .. } => Repr::Mod(0),
            Backend::FreeAbelian { names } => Repr::Vector(vec![0; names.len()]),
            Backend::Table(_) => Repr::Index(0),
            Backend::Fp(_) => Repr::Word(Vec::new()),
        };
        self.element(repr)
    }

    fn element(&self, repr: Repr) -> GroupElement {
        GroupElement { ctx: self.inner.id, repr }
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.ctx == self.inner.id {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.ctx == self.inner.id
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        let repr = match (&self.inner.backend, &g.repr, &h.repr) {
            (Backend::Cyclic { order, .. }, Repr::Mod(a), Repr::Mod(b)) => {
                Repr::Mod(((*a as u128 + *b as u128) % *order as u128) as u64)
            }
            (Backend::FreeAbelian { .. }, Repr::Vector(a), Repr::Vector(b)) => {
                Repr::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Backend::Table(t), Repr::Index(a), Repr::Index(b)) => Repr::Index(t.table[*a as usize][*b as usize]),
            (Backend::Fp(_), Repr::Word(a), Repr::Word(b)) => Repr::Word(concat_reduced(a, b)),
            _ => unreachable!("element payload does not match its context"),
        };
        Ok(self.element(repr))
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        let repr = match (&self.inner.backend, &g.repr) {
            (Backend::Cyclic { order, .. }, Repr::Mod(a)) => Repr::Mod((order - a) % order),
            (Backend::FreeAbelian { .. }, Repr::Vector(a)) => Repr::Vector(a.iter().map(|x| -x).collect()),
            (Backend::Table(t), Repr::Index(a)) => Repr::Index(t.inverse[*a as usize]),
            (Backend::Fp(_), Repr::Word(a)) => Repr::Word(invert(a)),
            _ => unreachable!("element payload does not match its context"),
        };
        Ok(self.element(repr))
    }

    /// `left · g · right`.
    pub fn sandwich(&self, left: &GroupElement, g: &GroupElement, right: &GroupElement) -> Result<GroupElement> {
        let lg = self.multiply(left, g)?;
        self.multiply(&lg, right)
    }

    pub fn equals(&self, g: &GroupElement, h: &GroupElement) -> Result<Eq3> {
        Ok(self.equality(g, h)?.verdict)
    }

    /// Equality with the evidence that decided it.
    pub fn equality(&self, g: &GroupElement, h: &GroupElement) -> Result<Equality> {
        let budget = match &self.inner.backend {
            Backend::Fp(fp) => fp.budget,
            _ => 0,
        };
        self.equality_with_budget(g, h, budget)
    }

    pub(crate) fn equality_with_budget(&self, g: &GroupElement, h: &GroupElement, budget: usize) -> Result<Equality> {
        self.check(g)?;
        self.check(h)?;
        match (&self.inner.backend, &g.repr, &h.repr) {
            (Backend::Fp(fp), Repr::Word(a), Repr::Word(b)) => {
                if a == b {
                    return Ok(Equality { verdict: Eq3::True, evidence: Evidence::FreeReduction });
                }
                Ok(fp.equality(&concat_reduced(a, &invert(b)), budget))
            }
            _ => Ok(Equality { verdict: Eq3::from_bool(g.repr == h.repr), evidence: Evidence::Exact }),
        }
    }

    /// The fp search budget, or zero for exact backends.
    pub fn search_budget(&self) -> usize {
        match &self.inner.backend {
            Backend::Fp(fp) => fp.budget,
            _ => 0,
        }
    }

    /// Generator names in declared order.
    pub fn generator_names(&self) -> Vec<String> {
        match &self.inner.backend {
            Backend::Cyclic { order: 1, .. } => Vec::new(),
            Backend::Cyclic { name, .. } => vec![name.clone()],
            Backend::FreeAbelian { names } => names.clone(),
            Backend::Table(t) => t.gens.iter().map(|&i| t.names[i as usize].clone()).collect(),
            Backend::Fp(fp) => fp.names.clone(),
        }
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        match &self.inner.backend {
            Backend::Cyclic { order: 1, .. } => Vec::new(),
            Backend::Cyclic { .. } => vec![self.element(Repr::Mod(1))],
            Backend::FreeAbelian { names } => (0..names.len())
                .map(|i| {
                    let mut v = vec![0; names.len()];
                    v[i] = 1;
                    self.element(Repr::Vector(v))
                })
                .collect(),
            Backend::Table(t) => t.gens.iter().map(|&i| self.element(Repr::Index(i))).collect(),
            Backend::Fp(fp) => {
                (0..fp.names.len()).map(|i| self.element(Repr::Word(vec![Letter::new(i as u32, false)]))).collect()
            }
        }
    }

    /// Parses a word in this context's generators, normalizing the payload.
    pub fn parse_word(&self, text: &str) -> Result<GroupElement> {
        let terms = parse_terms(text)?;
        let mut acc = self.identity();
        for term in terms {
            let factor = self.power_of(&term.name, term.exponent)?;
            acc = self.multiply(&acc, &factor)?;
        }
        Ok(acc)
    }

    fn power_of(&self, name: &str, exp: i64) -> Result<GroupElement> {
        let unknown = || Error::UnknownGenerator(name.to_string());
        let repr = match &self.inner.backend {
            Backend::Cyclic { order, name: gen } => {
                if name != gen || *order == 1 {
                    return Err(unknown());
                }
                Repr::Mod(exp.rem_euclid(*order as i64) as u64)
            }
            Backend::FreeAbelian { names } => {
                let i = names.iter().position(|n| n == name).ok_or_else(unknown)?;
                let mut v = vec![0; names.len()];
                v[i] = exp;
                Repr::Vector(v)
            }
            Backend::Table(t) => {
                let i = t.names.iter().position(|n| n == name).ok_or_else(unknown)?;
                Repr::Index(t.power(i as u32, exp))
            }
            Backend::Fp(fp) => {
                let i = fp.names.iter().position(|n| n == name).ok_or_else(unknown)?;
                let l = Letter::new(i as u32, exp < 0);
                Repr::Word(vec![l; exp.unsigned_abs() as usize])
            }
        };
        Ok(self.element(repr))
    }

    /// Formats an element in the word grammar; `parse_word` inverts it.
    pub fn format(&self, g: &GroupElement) -> String {
        match (&self.inner.backend, &g.repr) {
            (Backend::Cyclic { order, name }, Repr::Mod(k)) => {
                let (len, negative) = cyclic_normal(*k, *order);
                match len {
                    0 => "e".into(),
                    _ => power(name, if negative { -(len as i64) } else { len as i64 }),
                }
            }
            (Backend::FreeAbelian { names }, Repr::Vector(v)) => {
                let parts: Vec<String> =
                    v.iter().zip(names).filter(|(x, _)| **x != 0).map(|(x, n)| power(n, *x)).collect();
                if parts.is_empty() {
                    "e".into()
                } else {
                    parts.join(" ")
                }
            }
            (Backend::Table(t), Repr::Index(i)) => {
                if *i == 0 {
                    "e".into()
                } else {
                    t.names[*i as usize].clone()
                }
            }
            (Backend::Fp(fp), Repr::Word(w)) => format_word(w, &fp.names),
            _ => unreachable!("element payload does not match its context"),
        }
    }

    /// The canonical total order: word length, then lexicographic with
    /// `x < x^-1` in declared generator order; declared order for tables.
    pub fn cmp_elements(&self, g: &GroupElement, h: &GroupElement) -> Ordering {
        match (&self.inner.backend, &g.repr, &h.repr) {
            (Backend::Cyclic { order, .. }, Repr::Mod(a), Repr::Mod(b)) => {
                cyclic_rank(*a, *order).cmp(&cyclic_rank(*b, *order))
            }
            (Backend::FreeAbelian { .. }, Repr::Vector(a), Repr::Vector(b)) => {
                shortlex_cmp(&vector_word(a), &vector_word(b))
            }
            (Backend::Table(_), Repr::Index(a), Repr::Index(b)) => a.cmp(b),
            (Backend::Fp(_), Repr::Word(a), Repr::Word(b)) => shortlex_cmp(a, b),
            _ => g.ctx.cmp(&h.ctx),
        }
    }

    /// Appends a prefix-free byte key whose lexicographic order agrees with
    /// [`cmp_elements`](Self::cmp_elements).
    pub fn write_key(&self, g: &GroupElement, out: &mut Vec<u8>) {
        match (&self.inner.backend, &g.repr) {
            (Backend::Cyclic { order, .. }, Repr::Mod(k)) => {
                out.extend_from_slice(&cyclic_rank(*k, *order).to_be_bytes())
            }
            (Backend::Table(_), Repr::Index(i)) => out.extend_from_slice(&(*i as u64).to_be_bytes()),
            (Backend::FreeAbelian { .. }, Repr::Vector(v)) => write_word_key(&vector_word(v), out),
            (Backend::Fp(_), Repr::Word(w)) => write_word_key(w, out),
            _ => unreachable!("element payload does not match its context"),
        }
    }

    pub fn key(&self, g: &GroupElement) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_key(g, &mut out);
        out
    }

    /// All elements of word length at most `radius` in the canonical order.
    /// fp balls are deduplicated by [`equals`](Self::equals); undecided pairs
    /// are kept and reported.
    pub fn enumerate_ball(&self, radius: Radius) -> Result<Ball> {
        let elements = match (&self.inner.backend, radius) {
            (Backend::Cyclic { order, .. }, r) => {
                let top = match r {
                    Radius::Infinite => order - 1,
                    Radius::Finite(r) => (2 * r as u64).min(order - 1),
                };
                (0..=top).map(|rank| self.element(Repr::Mod(cyclic_from_rank(rank, *order)))).collect()
            }
            (Backend::Table(t), r) => {
                let limit = match r {
                    Radius::Infinite => usize::MAX,
                    Radius::Finite(r) => r,
                };
                t.ball(limit).into_iter().map(|i| self.element(Repr::Index(i))).collect()
            }
            (_, Radius::Infinite) => return Err(Error::InfiniteBall),
            (Backend::FreeAbelian { names }, Radius::Finite(r)) => {
                let mut out = Vec::new();
                let mut cur = vec![0i64; names.len()];
                abelian_ball(&mut cur, 0, r as i64, &mut out);
                let mut els: Vec<GroupElement> = out.into_iter().map(|v| self.element(Repr::Vector(v))).collect();
                els.sort_by(|a, b| self.cmp_elements(a, b));
                els
            }
            (Backend::Fp(fp), Radius::Finite(r)) => {
                let words = free_ball(fp.names.len(), r);
                return self.dedup_fp(words);
            }
        };
        Ok(Ball { elements, unresolved: Vec::new() })
    }

    /// All reduced words of length at most `radius`, without identifying
    /// equal elements. For exact backends this is the same as the ball.
    pub fn raw_ball(&self, radius: usize) -> Vec<GroupElement> {
        match &self.inner.backend {
            Backend::Fp(fp) => free_ball(fp.names.len(), radius).into_iter().map(|w| self.element(Repr::Word(w))).collect(),
            _ => self.enumerate_ball(Radius::Finite(radius)).expect("finite radius").elements,
        }
    }

    fn dedup_fp(&self, words: Vec<Word>) -> Result<Ball> {
        let mut elements: Vec<GroupElement> = Vec::new();
        let mut unresolved = Vec::new();
        for w in words {
            let g = self.element(Repr::Word(w));
            let mut duplicate = false;
            let mut pending = Vec::new();
            for (i, kept) in elements.iter().enumerate() {
                match self.equals(kept, &g)? {
                    Eq3::True => {
                        duplicate = true;
                        break;
                    }
                    Eq3::Unknown => pending.push(i),
                    Eq3::False => {}
                }
            }
            if !duplicate {
                let j = elements.len();
                unresolved.extend(pending.into_iter().map(|i| (i, j)));
                elements.push(g);
            }
        }
        Ok(Ball { elements, unresolved })
    }

    /// Every element of a finite group in canonical order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        self.order()?;
        Some(self.enumerate_ball(Radius::Infinite).ok()?.elements)
    }

    pub fn num_quotients(&self) -> usize {
        match &self.inner.backend {
            Backend::Fp(fp) => fp.quotients.len(),
            _ => 0,
        }
    }

    pub fn quotient(&self, q: usize) -> Result<&GroupContext> {
        match &self.inner.backend {
            Backend::Fp(fp) => fp.quotients.get(q).map(|x| &x.target).ok_or(Error::NoSuchQuotient(q)),
            _ => Err(Error::NotFp),
        }
    }

    /// Image of `g` under the declared quotient homomorphism `q`.
    pub fn apply_quotient(&self, q: usize, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        match (&self.inner.backend, &g.repr) {
            (Backend::Fp(fp), Repr::Word(w)) => {
                let quotient = fp.quotients.get(q).ok_or(Error::NoSuchQuotient(q))?;
                Ok(quotient.map_word(w))
            }
            _ => Err(Error::NotFp),
        }
    }
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !is_identifier(n) {
            return Err(Error::InvalidSpec(format!("`{n}` is not an identifier")));
        }
        if n == "e" {
            return Err(Error::InvalidSpec("`e` is reserved for the identity".into()));
        }
        if !seen.insert(n) {
            return Err(Error::InvalidSpec(format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

fn parse_fp_word(names: &[String], text: &str) -> Result<Word> {
    let mut w = Vec::new();
    for term in parse_terms(text)? {
        let i = names.iter().position(|n| *n == term.name).ok_or_else(|| Error::UnknownGenerator(term.name.clone()))?;
        let l = Letter::new(i as u32, term.exponent < 0);
        word::push_reduced(&mut w, std::iter::repeat_n(l, term.exponent.unsigned_abs() as usize));
    }
    Ok(w)
}

fn build_quotient(q: usize, spec: &QuotientSpec, names: &[String], relators: &[Word]) -> Result<Quotient> {
    if matches!(spec.target, GroupSpec::Fp { .. }) {
        return Err(Error::InvalidSpec(format!("quotient {q}: target must have exact equality")));
    }
    let target = GroupContext::from_spec(spec.target.clone())?;
    if spec.images.len() != names.len() {
        return Err(Error::InvalidSpec(format!(
            "quotient {q}: {} images for {} generators",
            spec.images.len(),
            names.len()
        )));
    }
    let images = spec.images.iter().map(|w| target.parse_word(w)).collect::<Result<Vec<_>>>()?;
    let quotient = Quotient { target, images };
    for (r, rel) in relators.iter().enumerate() {
        if quotient.map_word(rel) != quotient.target.identity() {
            return Err(Error::InvalidSpec(format!("quotient {q}: relator {r} does not map to the identity")));
        }
    }
    Ok(quotient)
}

impl TableGroup {
    fn new(elements: &[String], table: &[Vec<usize>], generators: Option<&[String]>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidSpec("finite table needs at least one element".into()));
        }
        check_names(&elements[1..])?;
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpec(format!("table must be {n}x{n}")));
        }
        for (i, row) in table.iter().enumerate() {
            if row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidSpec(format!("row {i} has an out-of-range entry")));
            }
            let distinct: BTreeSet<_> = row.iter().collect();
            if distinct.len() != n {
                return Err(Error::InvalidSpec(format!("row {i} repeats an element: not a Latin square")));
            }
        }
        for j in 0..n {
            let distinct: BTreeSet<_> = table.iter().map(|row| row[j]).collect();
            if distinct.len() != n {
                return Err(Error::InvalidSpec(format!("column {j} repeats an element: not a Latin square")));
            }
        }
        if (0..n).any(|i| table[0][i] != i || table[i][0] != i) {
            return Err(Error::InvalidSpec("index 0 is not a two-sided identity".into()));
        }
        let mut inverse = vec![0u32; n];
        for i in 0..n {
            let j = (0..n).find(|&j| table[i][j] == 0).expect("latin row contains the identity");
            if table[j][i] != 0 {
                return Err(Error::InvalidSpec(format!("element {} has no two-sided inverse", elements[i])));
            }
            inverse[i] = j as u32;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidSpec("table is not associative".into()));
                    }
                }
            }
        }
        let gens = match generators {
            Some(gs) => gs
                .iter()
                .map(|g| {
                    elements.iter().position(|e| e == g).map(|i| i as u32).ok_or_else(|| Error::UnknownGenerator(g.clone()))
                })
                .collect::<Result<Vec<_>>>()?,
            None => (1..n as u32).collect(),
        };
        let table: Vec<Vec<u32>> = table.iter().map(|r| r.iter().map(|&x| x as u32).collect()).collect();
        let abelian = (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a]));
        let group = TableGroup { names: elements.to_vec(), table, inverse, gens, abelian };
        if group.ball(usize::MAX).len() != n {
            return Err(Error::InvalidSpec("generators do not generate the group".into()));
        }
        Ok(group)
    }

    fn power(&self, i: u32, exp: i64) -> u32 {
        let n = self.names.len() as i64;
        let (base, e) = if exp < 0 { (self.inverse[i as usize], (-exp) % n) } else { (i, exp % n) };
        let mut acc = 0u32;
        for _ in 0..e {
            acc = self.table[acc as usize][base as usize];
        }
        acc
    }

    /// Breadth-first ball over generators and their inverses, sorted by index.
    fn ball(&self, limit: usize) -> Vec<u32> {
        let n = self.names.len();
        let mut dist = vec![usize::MAX; n];
        dist[0] = 0;
        let mut queue = VecDeque::from([0u32]);
        let steps: Vec<u32> = self.gens.iter().flat_map(|&g| [g, self.inverse[g as usize]]).collect();
        while let Some(x) = queue.pop_front() {
            let d = dist[x as usize];
            if d >= limit {
                continue;
            }
            for &s in &steps {
                let y = self.table[x as usize][s as usize];
                if dist[y as usize] == usize::MAX {
                    dist[y as usize] = d + 1;
                    queue.push_back(y);
                }
            }
        }
        (0..n as u32).filter(|&i| dist[i as usize] <= limit).collect()
    }
}

/// Length and direction of the shortest word for residue `k`.
fn cyclic_normal(k: u64, order: u64) -> (u64, bool) {
    let back = order - k;
    if k == 0 {
        (0, false)
    } else if k <= back {
        (k, false)
    } else {
        (back, true)
    }
}

fn cyclic_rank(k: u64, order: u64) -> u64 {
    match cyclic_normal(k, order) {
        (0, _) => 0,
        (len, false) => 2 * len - 1,
        (len, true) => 2 * len,
    }
}

fn cyclic_from_rank(rank: u64, order: u64) -> u64 {
    if rank == 0 {
        0
    } else if rank % 2 == 1 {
        rank.div_ceil(2)
    } else {
        order - rank / 2
    }
}

fn vector_word(v: &[i64]) -> Word {
    let mut w = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let l = Letter::new(i as u32, x < 0);
        w.extend(std::iter::repeat_n(l, x.unsigned_abs() as usize));
    }
    w
}

fn write_word_key(w: &[Letter], out: &mut Vec<u8>) {
    out.extend_from_slice(&(w.len() as u32).to_be_bytes());
    for l in w {
        out.extend_from_slice(&l.rank().to_be_bytes());
    }
}

fn abelian_ball(cur: &mut Vec<i64>, i: usize, budget: i64, out: &mut Vec<Vec<i64>>) {
    if i == cur.len() {
        out.push(cur.clone());
        return;
    }
    for x in -budget..=budget {
        cur[i] = x;
        abelian_ball(cur, i + 1, budget - x.abs(), out);
    }
    cur[i] = 0;
}

/// Reduced words of length at most `radius` in shortlex order.
fn free_ball(gens: usize, radius: usize) -> Vec<Word> {
    let letters: Vec<Letter> = (0..gens as u32).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)]).collect();
    let mut out = vec![Vec::new()];
    let mut level: Vec<Word> = vec![Vec::new()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &level {
            for &l in &letters {
                if w.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut x = w.clone();
                x.push(l);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}
