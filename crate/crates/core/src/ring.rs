//! Elements of the integral group ring ℤ[π] with the left and right π-actions.
//!
//! Only the additive structure and the two actions are provided; ring
//! multiplication is never needed.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{ContextId, Eq3, GroupContext, GroupElement};

/// A finite formal sum `Σ c_g · g` with nonzero coefficients. Terms are kept
/// in the canonical element order. In exact backends keys are pairwise
/// distinct; in fp backends keys are pairwise not proven equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    ctx: ContextId,
    terms: Vec<(GroupElement, BigInt)>,
}

impl GroupRingElement {
    pub fn zero(ctx: &GroupContext) -> Self {
        GroupRingElement { ctx: ctx.id(), terms: Vec::new() }
    }

    pub fn basis(ctx: &GroupContext, g: &GroupElement) -> Result<Self> {
        Self::from_terms(ctx, [(g.clone(), BigInt::one())])
    }

    /// Sums the given terms, merging equal keys and dropping zeros.
    pub fn from_terms(ctx: &GroupContext, terms: impl IntoIterator<Item = (GroupElement, BigInt)>) -> Result<Self> {
        let terms = normalize(ctx, terms.into_iter().collect())?;
        Ok(GroupRingElement { ctx: ctx.id(), terms })
    }

    pub fn context(&self) -> ContextId {
        self.ctx
    }

    pub fn terms(&self) -> &[(GroupElement, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, ctx: &GroupContext) -> Result<()> {
        if self.ctx == ctx.id() {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Self, ctx: &GroupContext) -> Result<Self> {
        self.check(ctx)?;
        other.check(ctx)?;
        Self::from_terms(ctx, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn negate(&self) -> Self {
        GroupRingElement { ctx: self.ctx, terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Self, ctx: &GroupContext) -> Result<Self> {
        self.add(&other.negate(), ctx)
    }

    /// `self − 1·g`.
    pub fn basis_sub(&self, g: &GroupElement, ctx: &GroupContext) -> Result<Self> {
        self.check(ctx)?;
        Self::from_terms(ctx, self.terms.iter().cloned().chain([(g.clone(), -BigInt::one())]))
    }

    /// Replaces every key `g` by `h·g`.
    pub fn left_act(&self, h: &GroupElement, ctx: &GroupContext) -> Result<Self> {
        self.act(ctx, |g| ctx.multiply(h, g))
    }

    /// Replaces every key `g` by `g·k`.
    pub fn right_act(&self, k: &GroupElement, ctx: &GroupContext) -> Result<Self> {
        self.act(ctx, |g| ctx.multiply(g, k))
    }

    /// Applies a bijection of π to the keys. Distinct keys stay distinct, so
    /// only the order needs restoring.
    fn act(&self, ctx: &GroupContext, f: impl Fn(&GroupElement) -> Result<GroupElement>) -> Result<Self> {
        self.check(ctx)?;
        let mut terms =
            self.terms.iter().map(|(g, c)| Ok((f(g)?, c.clone()))).collect::<Result<Vec<_>>>()?;
        terms.sort_by(|a, b| ctx.cmp_elements(&a.0, &b.0));
        Ok(GroupRingElement { ctx: self.ctx, terms })
    }

    /// The nonzero coefficients, sorted.
    pub fn coefficient_multiset(&self) -> Vec<BigInt> {
        let mut c: Vec<BigInt> = self.terms.iter().map(|(_, c)| c.clone()).collect();
        c.sort();
        c
    }

    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.iter().map(|(_, c)| c.abs()).max().unwrap_or_default()
    }

    /// Equality in ℤ[π]. Exact backends compare normal forms; fp backends
    /// decide whether the difference vanishes, reporting `Unknown` when a
    /// needed key comparison is undecided.
    pub fn equals(&self, other: &Self, ctx: &GroupContext) -> Result<Eq3> {
        self.check(ctx)?;
        other.check(ctx)?;
        if self == other {
            return Ok(Eq3::True);
        }
        if ctx.is_exact() {
            return Ok(Eq3::False);
        }
        match self.sub(other, ctx) {
            Ok(d) => Ok(Eq3::from_bool(d.is_zero())),
            Err(Error::UnknownMerge(..)) => Ok(Eq3::Unknown),
            Err(e) => Err(e),
        }
    }

    /// Textual form `c1*w1 + c2*w2 + ...`, `0` for zero, coefficient 1 omitted.
    pub fn format(&self, ctx: &GroupContext) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (g, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = (c.is_negative(), c.abs());
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            if !mag.is_one() {
                out.push_str(&format!("{mag}*"));
            }
            out.push_str(&ctx.format(g));
        }
        out
    }

    pub fn parse(ctx: &GroupContext, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (pos, negative, chunk) in split_terms(text)? {
            let (coef, word) = match chunk.split_once('*') {
                Some((c, w)) => {
                    let c = c.trim().parse::<BigInt>().map_err(|_| Error::syntax(pos, format!("bad coefficient `{}`", c.trim())))?;
                    (c, w.trim())
                }
                None => match chunk.parse::<BigInt>() {
                    Ok(c) => (c, "e"),
                    Err(_) => (BigInt::one(), chunk),
                },
            };
            let g = ctx.parse_word(word).map_err(|e| shift(e, pos))?;
            terms.push((g, if negative { -coef } else { coef }));
        }
        Self::from_terms(ctx, terms)
    }
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos: pos + by, msg },
        other => other,
    }
}

/// Splits at top-level `+`/`-`; a `-` right after `^` belongs to an exponent.
fn split_terms(text: &str) -> Result<Vec<(usize, bool, &str)>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut negative = false;
    let mut prev = None;
    for (i, ch) in text.char_indices() {
        if (ch == '+' || ch == '-') && prev != Some('^') {
            let chunk = text[start..i].trim();
            if chunk.is_empty() {
                if !out.is_empty() || start != 0 || !text[..i].trim().is_empty() {
                    return Err(Error::syntax(i, "missing term"));
                }
            } else {
                out.push((start, negative, chunk));
            }
            negative = ch == '-';
            start = i + 1;
        }
        if !ch.is_whitespace() {
            prev = Some(ch);
        }
    }
    let chunk = text[start..].trim();
    if chunk.is_empty() {
        return Err(Error::syntax(text.len(), "missing term"));
    }
    out.push((start, negative, chunk));
    Ok(out)
}

fn normalize(ctx: &GroupContext, mut terms: Vec<(GroupElement, BigInt)>) -> Result<Vec<(GroupElement, BigInt)>> {
    if terms.iter().any(|(g, _)| !ctx.contains(g)) {
        return Err(Error::ContextMismatch);
    }
    terms.sort_by(|a, b| ctx.cmp_elements(&a.0, &b.0));
    let mut merged: Vec<(GroupElement, BigInt)> = Vec::with_capacity(terms.len());
    for (g, c) in terms {
        match merged.last_mut() {
            Some((h, d)) if ctx.cmp_elements(h, &g) == Ordering::Equal => *d += c,
            _ => merged.push((g, c)),
        }
    }
    if ctx.is_fp() {
        merged = merge_proven(ctx, merged)?;
    }
    merged.retain(|(_, c)| !c.is_zero());
    Ok(merged)
}

/// Merges fp keys proven equal; an undecided pair is an error.
fn merge_proven(ctx: &GroupContext, terms: Vec<(GroupElement, BigInt)>) -> Result<Vec<(GroupElement, BigInt)>> {
    let mut out: Vec<(GroupElement, BigInt)> = Vec::with_capacity(terms.len());
    'next: for (g, c) in terms {
        for (h, d) in out.iter_mut() {
            match ctx.equals(h, &g)? {
                Eq3::True => {
                    *d += &c;
                    continue 'next;
                }
                Eq3::Unknown => return Err(Error::UnknownMerge(ctx.format(h), ctx.format(&g))),
                Eq3::False => {}
            }
        }
        out.push((g, c));
    }
    Ok(out)
}
