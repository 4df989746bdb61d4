//! Canonical forms: the byte-wise minimal encoding over the whole
//! transformation group acting on a tuple.
//!
//! A candidate block must start with the identity as its first entry, since
//! the identity has the least key. So once `h` and the entry permutation are
//! fixed, the right multiplier `k = (h·a_{π(0)})⁻¹` is forced. Abelian groups
//! only need `h = e` because `h·g·k = g·(hk)`.

use num_bigint::{BigInt, Sign as BigSign};

use super::{Symbol, SymbolTuple};
use crate::error::Result;
use crate::group::{GroupContext, GroupElement};
use crate::ring::GroupRingElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CanonStatus {
    /// Minimal over the full transformation group.
    Exact,
    /// fp backends: minimal over left multipliers of bounded length only.
    Heuristic,
}

impl std::fmt::Display for CanonStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CanonStatus::Exact => "exact",
            CanonStatus::Heuristic => "heuristic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    pub tuple: SymbolTuple,
    pub encoding: Vec<u8>,
    pub status: CanonStatus,
}

/// Appends the block of one symbol: kind rank, then `(key, sign)` per entry,
/// then the degree as a term count followed by `(key, coefficient)` pairs.
pub fn encode_symbol(ctx: &GroupContext, s: &Symbol, out: &mut Vec<u8>) {
    out.push(s.kind().rank());
    for (g, e) in s.entries() {
        ctx.write_key(g, out);
        out.push(e.indicator() ^ 1);
    }
    encode_degree(s.degree().terms().iter().map(|(g, c)| (ctx.key(g), c)), out);
}

/// Tuple length, then the blocks in tuple order.
pub fn encode_tuple(ctx: &GroupContext, t: &SymbolTuple) -> Vec<u8> {
    let mut out = (t.len() as u32).to_be_bytes().to_vec();
    for s in t.symbols() {
        encode_symbol(ctx, s, &mut out);
    }
    out
}

fn encode_degree<'a>(terms: impl Iterator<Item = (Vec<u8>, &'a BigInt)>, out: &mut Vec<u8>) {
    let terms: Vec<(Vec<u8>, Vec<u8>)> = terms
        .map(|(key, c)| {
            let mut bytes = Vec::new();
            encode_coefficient(c, &mut bytes);
            (key, bytes)
        })
        .collect();
    encode_encoded_degree(terms, out);
}

/// Keys are distinct, so sorting the pairs sorts by key.
fn encode_encoded_degree(mut terms: Vec<(Vec<u8>, Vec<u8>)>, out: &mut Vec<u8>) {
    terms.sort_unstable();
    out.extend_from_slice(&(terms.len() as u32).to_be_bytes());
    for (key, c) in terms {
        out.extend_from_slice(&key);
        out.extend_from_slice(&c);
    }
}

/// Order-preserving: sign byte, then magnitude length and big-endian bytes,
/// both bit-inverted for negative values.
fn encode_coefficient(c: &BigInt, out: &mut Vec<u8>) {
    let (sign, mag) = c.to_bytes_be();
    let (tag, invert) = match sign {
        BigSign::Minus => (0u8, true),
        BigSign::NoSign => (1, false),
        BigSign::Plus => (2, false),
    };
    out.push(tag);
    if sign == BigSign::NoSign {
        return;
    }
    let flip = |b: u8| if invert { !b } else { b };
    out.extend((mag.len() as u32).to_be_bytes().map(flip));
    out.extend(mag.into_iter().map(flip));
}

/// The left multipliers that must be tried.
pub(super) fn left_candidates(ctx: &GroupContext, radius: usize) -> Vec<GroupElement> {
    if ctx.is_fp() {
        ctx.raw_ball(radius)
    } else if ctx.is_abelian() {
        vec![ctx.identity()]
    } else {
        ctx.elements().expect("non-abelian exact backends are finite")
    }
}

/// How one symbol reaches its least block for a fixed left multiplier.
struct BlockChoice {
    block: Vec<u8>,
    symbol: usize,
    perm: &'static [usize],
    k: GroupElement,
}

/// The least block of `s` over entry permutations and right multipliers,
/// for a fixed left multiplier `h`.
fn best_block(ctx: &GroupContext, s: &Symbol, index: usize, h: &GroupElement) -> Result<BlockChoice> {
    let ha: Vec<GroupElement> = s.entries().iter().map(|(g, _)| ctx.multiply(h, g)).collect::<Result<_>>()?;
    let hd: Vec<GroupElement> = s.degree().terms().iter().map(|(g, _)| ctx.multiply(h, g)).collect::<Result<_>>()?;
    let coefficients: Vec<Vec<u8>> = s
        .degree()
        .terms()
        .iter()
        .map(|(_, c)| {
            let mut bytes = Vec::new();
            encode_coefficient(c, &mut bytes);
            bytes
        })
        .collect();
    let mut best: Option<BlockChoice> = None;
    for first in 0..ha.len() {
        let k = ctx.inverse(&ha[first])?;
        let keys: Vec<Vec<u8>> = ha.iter().map(|x| Ok(ctx.key(&ctx.multiply(x, &k)?))).collect::<Result<_>>()?;
        let mut degree = Vec::new();
        let moved =
            hd.iter().zip(&coefficients).map(|(g, c)| Ok((ctx.key(&ctx.multiply(g, &k)?), c.clone()))).collect::<Result<Vec<_>>>()?;
        encode_encoded_degree(moved, &mut degree);
        for perm in s.kind().entry_perms().iter().filter(|p| p[0] == first) {
            let mut block = vec![s.kind().rank()];
            for &i in perm {
                block.extend_from_slice(&keys[i]);
                block.push(s.entries()[i].1.indicator() ^ 1);
            }
            block.extend_from_slice(&degree);
            if best.as_ref().is_none_or(|b| block < b.block) {
                best = Some(BlockChoice { block, symbol: index, perm, k: k.clone() });
            }
        }
    }
    Ok(best.expect("every kind has at least one entry permutation"))
}

fn best_for_left(ctx: &GroupContext, t: &SymbolTuple, h: &GroupElement) -> Result<(Vec<u8>, Vec<BlockChoice>)> {
    let mut blocks = t.symbols().iter().enumerate().map(|(i, s)| best_block(ctx, s, i, h)).collect::<Result<Vec<_>>>()?;
    // Blocks are self-delimiting, so sorting them minimizes the concatenation.
    blocks.sort_by(|a, b| a.block.cmp(&b.block));
    let mut encoding = (t.len() as u32).to_be_bytes().to_vec();
    for b in &blocks {
        encoding.extend_from_slice(&b.block);
    }
    Ok((encoding, blocks))
}

/// The canonical representative of the equivalence class of `t`. The radius
/// bounds the left multipliers tried by fp backends and is otherwise ignored.
pub fn canonicalize(ctx: &GroupContext, t: &SymbolTuple, radius: usize) -> Result<CanonicalForm> {
    if t.context() != ctx.id() {
        return Err(crate::Error::ContextMismatch);
    }
    let mut best: Option<(Vec<u8>, Vec<BlockChoice>, GroupElement)> = None;
    for h in left_candidates(ctx, radius) {
        let (encoding, choices) = best_for_left(ctx, t, &h)?;
        if best.as_ref().is_none_or(|b| encoding < b.0) {
            best = Some((encoding, choices, h));
        }
    }
    let (encoding, choices, h) = best.expect("the identity is always a candidate");
    let symbols = choices
        .iter()
        .map(|c| {
            let s = &t.symbols()[c.symbol];
            let entries =
                c.perm.iter().map(|&i| Ok((ctx.sandwich(&h, &s.entries()[i].0, &c.k)?, s.entries()[i].1))).collect::<Result<_>>()?;
            let degree: GroupRingElement = s.degree().left_act(&h, ctx)?.right_act(&c.k, ctx)?;
            Ok(Symbol::from_parts(s.context(), s.kind(), entries, degree))
        })
        .collect::<Result<Vec<_>>>()?;
    let status = if ctx.is_exact() { CanonStatus::Exact } else { CanonStatus::Heuristic };
    Ok(CanonicalForm { tuple: SymbolTuple::new(symbols)?, encoding, status })
}
