//! Equivalence of symbol tuples with explicit witnesses, and one-sidedness.

use std::collections::BTreeMap;

use super::canon::{canonicalize, left_candidates};
use super::{reverse, Kind, Symbol, SymbolTuple};
use crate::error::{Error, Result};
use crate::group::{Eq3, GroupContext, GroupElement};
use crate::ring::GroupRingElement;

/// Budget of the first, cheap pass of the fp witness search.
const QUICK_BUDGET: usize = 64;

/// A transformation taking tuple `a` to tuple `b`: symbol `i` of `a` has its
/// entries permuted by `entry_perms[i]`, is multiplied by `left` and
/// `right[i]`, and lands at position `tuple_perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub left: GroupElement,
    pub right: Vec<GroupElement>,
    pub tuple_perm: Vec<usize>,
    pub entry_perms: Vec<Vec<usize>>,
}

impl Witness {
    pub fn apply(&self, ctx: &GroupContext, a: &SymbolTuple) -> Result<SymbolTuple> {
        let mut out: Vec<Option<Symbol>> = vec![None; a.len()];
        for (i, s) in a.symbols().iter().enumerate() {
            let moved = s.permute(&self.entry_perms[i]).translate(ctx, &self.left, &self.right[i])?;
            out[self.tuple_perm[i]] = Some(moved);
        }
        SymbolTuple::new(out.into_iter().map(|s| s.expect("tuple_perm is a permutation")).collect())
    }

    /// True when `apply(a)` provably equals `b` term by term.
    pub fn verify(&self, ctx: &GroupContext, a: &SymbolTuple, b: &SymbolTuple) -> Result<bool> {
        if a.len() != b.len() {
            return Ok(false);
        }
        let applied = self.apply(ctx, a)?;
        for (x, y) in applied.symbols().iter().zip(b.symbols()) {
            if !symbols_match(ctx, x, y, ctx.search_budget())? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn format(&self, ctx: &GroupContext) -> String {
        let right: Vec<String> = self.right.iter().map(|k| ctx.format(k)).collect();
        format!(
            "h={} k=[{}] tuple_perm={:?} entry_perms={:?}",
            ctx.format(&self.left),
            right.join(", "),
            self.tuple_perm,
            self.entry_perms
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivEvidence {
    /// An explicit transformation was found and checked.
    Witness,
    /// Exact canonical forms differ.
    CanonicalForms,
    /// The multisets of (kind, number of `+` signs) differ.
    SignPattern,
    /// The images in the given declared quotient are inequivalent.
    Quotient(usize),
    /// fp search exhausted without a decision.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub verdict: Eq3,
    pub witness: Option<Witness>,
    pub evidence: EquivEvidence,
}

impl Equivalence {
    fn no(evidence: EquivEvidence) -> Self {
        Equivalence { verdict: Eq3::False, witness: None, evidence }
    }
}

pub fn equivalent(ctx: &GroupContext, a: &SymbolTuple, b: &SymbolTuple, radius: usize) -> Result<Equivalence> {
    if a.context() != ctx.id() || b.context() != ctx.id() {
        return Err(Error::ContextMismatch);
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if sign_pattern(a) != sign_pattern(b) {
        return Ok(Equivalence::no(EquivEvidence::SignPattern));
    }
    if ctx.is_exact() {
        if canonicalize(ctx, a, radius)?.encoding != canonicalize(ctx, b, radius)?.encoding {
            return Ok(Equivalence::no(EquivEvidence::CanonicalForms));
        }
        let witness = search(ctx, a, b, &left_candidates(ctx, radius), &[], 0)?;
        let evidence = if witness.is_some() { EquivEvidence::Witness } else { EquivEvidence::CanonicalForms };
        return Ok(Equivalence { verdict: Eq3::True, witness, evidence });
    }
    let ball = ctx.raw_ball(radius);
    let full = ctx.search_budget();
    for budget in [QUICK_BUDGET.min(full), full] {
        if let Some(w) = search(ctx, a, b, &ball, &ball, budget)? {
            return Ok(Equivalence { verdict: Eq3::True, witness: Some(w), evidence: EquivEvidence::Witness });
        }
    }
    for q in 0..ctx.num_quotients() {
        let target = ctx.quotient(q)?;
        let (qa, qb) = (map_tuple(ctx, q, a)?, map_tuple(ctx, q, b)?);
        if canonicalize(target, &qa, 0)?.encoding != canonicalize(target, &qb, 0)?.encoding {
            return Ok(Equivalence::no(EquivEvidence::Quotient(q)));
        }
    }
    Ok(Equivalence { verdict: Eq3::Unknown, witness: None, evidence: EquivEvidence::Exhausted })
}

/// Whether the stratum of `s` is one-sided, i.e. `s` is equivalent to its
/// reversal. Unequal numbers of `+` and `-` signs rule this out at once.
pub fn is_one_sided(ctx: &GroupContext, s: &Symbol, radius: usize) -> Result<Equivalence> {
    let r = reverse(s)?;
    if 2 * s.plus_count() != s.kind().arity() {
        return Ok(Equivalence::no(EquivEvidence::SignPattern));
    }
    equivalent(ctx, &SymbolTuple::single(s.clone()), &SymbolTuple::single(r), radius)
}

fn sign_pattern(t: &SymbolTuple) -> BTreeMap<(Kind, usize), usize> {
    let mut m = BTreeMap::new();
    for s in t.symbols() {
        *m.entry((s.kind(), s.plus_count())).or_default() += 1;
    }
    m
}

fn map_tuple(ctx: &GroupContext, q: usize, t: &SymbolTuple) -> Result<SymbolTuple> {
    let target = ctx.quotient(q)?;
    let symbols = t
        .symbols()
        .iter()
        .map(|s| {
            let entries =
                s.entries().iter().map(|(g, e)| Ok((ctx.apply_quotient(q, g)?, *e))).collect::<Result<Vec<_>>>()?;
            let terms =
                s.degree().terms().iter().map(|(g, c)| Ok((ctx.apply_quotient(q, g)?, c.clone()))).collect::<Result<Vec<_>>>()?;
            Symbol::new(target, s.kind(), entries, GroupRingElement::from_terms(target, terms)?)
        })
        .collect::<Result<Vec<_>>>()?;
    SymbolTuple::new(symbols)
}

fn proven_equal(ctx: &GroupContext, g: &GroupElement, h: &GroupElement, budget: usize) -> Result<bool> {
    if g == h {
        return Ok(true);
    }
    if ctx.is_exact() {
        return Ok(false);
    }
    Ok(ctx.equality_with_budget(g, h, budget)?.verdict.is_true())
}

/// Entry-by-entry and term-by-term equality, each step proven.
fn symbols_match(ctx: &GroupContext, x: &Symbol, y: &Symbol, budget: usize) -> Result<bool> {
    if x.kind() != y.kind() {
        return Ok(false);
    }
    if ctx.is_exact() {
        return Ok(x == y);
    }
    for ((g, e), (h, f)) in x.entries().iter().zip(y.entries()) {
        if e != f || !proven_equal(ctx, g, h, budget)? {
            return Ok(false);
        }
    }
    degrees_match(ctx, x.degree(), y.degree(), budget)
}

fn degrees_match(ctx: &GroupContext, d: &GroupRingElement, e: &GroupRingElement, budget: usize) -> Result<bool> {
    if d.terms().len() != e.terms().len() {
        return Ok(false);
    }
    let mut used = vec![false; e.terms().len()];
    'terms: for (g, c) in d.terms() {
        for (j, (h, c2)) in e.terms().iter().enumerate() {
            if !used[j] && c == c2 && proven_equal(ctx, g, h, budget)? {
                used[j] = true;
                continue 'terms;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Backtracking search for a witness. For each left multiplier the right
/// multiplier of a matched pair is derived from the first entries; `extra`
/// lists further right multipliers to try (fp only).
fn search(
    ctx: &GroupContext,
    a: &SymbolTuple,
    b: &SymbolTuple,
    lefts: &[GroupElement],
    extra: &[GroupElement],
    budget: usize,
) -> Result<Option<Witness>> {
    for h in lefts {
        let mut state = Partial { right: Vec::new(), tuple_perm: Vec::new(), entry_perms: Vec::new(), used: vec![false; b.len()] };
        if assign(ctx, a, b, h, extra, budget, &mut state)? {
            return Ok(Some(Witness {
                left: h.clone(),
                right: state.right,
                tuple_perm: state.tuple_perm,
                entry_perms: state.entry_perms,
            }));
        }
    }
    Ok(None)
}

struct Partial {
    right: Vec<GroupElement>,
    tuple_perm: Vec<usize>,
    entry_perms: Vec<Vec<usize>>,
    used: Vec<bool>,
}

fn assign(
    ctx: &GroupContext,
    a: &SymbolTuple,
    b: &SymbolTuple,
    h: &GroupElement,
    extra: &[GroupElement],
    budget: usize,
    st: &mut Partial,
) -> Result<bool> {
    let i = st.tuple_perm.len();
    let Some(s) = a.symbols().get(i) else {
        return Ok(true);
    };
    for (j, t) in b.symbols().iter().enumerate() {
        if st.used[j] || s.kind() != t.kind() || s.plus_count() != t.plus_count() {
            continue;
        }
        for perm in s.kind().entry_perms() {
            if perm.iter().enumerate().any(|(p, &src)| s.entries()[src].1 != t.entries()[p].1) {
                continue;
            }
            let permuted = s.permute(perm);
            let head = ctx.multiply(h, &permuted.entries()[0].0)?;
            let derived = ctx.multiply(&ctx.inverse(&head)?, &t.entries()[0].0)?;
            for k in extra.iter().chain(std::iter::once(&derived)) {
                let moved = permuted.translate(ctx, h, k)?;
                if !symbols_match(ctx, &moved, t, budget)? {
                    continue;
                }
                st.used[j] = true;
                st.right.push(k.clone());
                st.tuple_perm.push(j);
                st.entry_perms.push(perm.clone());
                if assign(ctx, a, b, h, extra, budget, st)? {
                    return Ok(true);
                }
                st.used[j] = false;
                st.right.pop();
                st.tuple_perm.pop();
                st.entry_perms.pop();
            }
        }
    }
    Ok(false)
}
