//! Truncated presentations of the universal group, membership in Δ₁, and
//! evaluation of order-one invariants along event traces.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::abelian::{present, AbelianElement, FgAbelianGroup};
use crate::error::{Error, Result};
use crate::relations::{generate_relations, relation_matrix, RelationKind, SymbolUniverse, UniverseRelation};
use crate::symbols::Symbol;

/// A value in `target` for every universe symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub target: FgAbelianGroup,
    pub values: Vec<AbelianElement>,
}

impl Assignment {
    pub fn zero(target: FgAbelianGroup, len: usize) -> Self {
        let values = vec![target.zero(); len];
        Assignment { target, values }
    }

    /// Builds an assignment from a partial map, failing on the first
    /// universe index without a value.
    pub fn from_map(target: FgAbelianGroup, mut map: BTreeMap<usize, AbelianElement>, len: usize) -> Result<Self> {
        let values = (0..len).map(|i| map.remove(&i).ok_or(Error::PartialAssignment(i))).collect::<Result<Vec<_>>>()?;
        if let Some((&i, _)) = map.iter().next() {
            return Err(Error::OutsideUniverse(format!("index {i}")));
        }
        Ok(Assignment { target, values })
    }

    /// `φ ∘ self` for the homomorphism `φ` sending basis coordinate `i` of
    /// `self.target` (torsion first) to `images[i]` in `target`.
    pub fn compose(&self, target: FgAbelianGroup, images: &[AbelianElement]) -> Result<Assignment> {
        if images.len() != self.target.rank() {
            return Err(Error::GroupMismatch(format!("{} images for a group of rank {}", images.len(), self.target.rank())));
        }
        for (i, t) in self.target.torsion.iter().enumerate() {
            if !target.is_zero(&target.scale(&images[i], t)?) {
                return Err(Error::GroupMismatch(format!("image of a generator of order {t} is not killed by {t}")));
            }
        }
        let values = self
            .values
            .iter()
            .map(|v| {
                v.coords().iter().zip(images).try_fold(target.zero(), |acc, (c, img)| target.add(&acc, &target.scale(img, c)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment { target, values })
    }

    /// Document form: the target and a value per symbol text.
    pub fn to_json(&self, u: &SymbolUniverse) -> Value {
        let values: serde_json::Map<String, Value> = u
            .symbols()
            .iter()
            .zip(&self.values)
            .map(|(s, v)| (s.format(u.context()), Value::Array(v.coords().iter().map(big_to_json).collect())))
            .collect();
        json!({ "target": group_to_json(&self.target), "values": values })
    }

    /// Parses the document form. Keys are symbol texts, canonicalized into
    /// the universe.
    pub fn from_json(u: &SymbolUniverse, text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::syntax(e.column(), e.to_string()))?;
        let target = group_from_json(doc.get("target").ok_or_else(|| Error::syntax(0, "missing `target`"))?)?;
        let values = doc.get("values").and_then(Value::as_object).ok_or_else(|| Error::syntax(0, "missing `values` object"))?;
        let mut map = BTreeMap::new();
        for (key, coords) in values {
            let s = Symbol::parse(u.context(), key)?;
            let i = u.index_of(&s)?;
            let coords = coords
                .as_array()
                .ok_or_else(|| Error::syntax(0, format!("value of `{key}` must be an array")))?
                .iter()
                .map(json_to_big)
                .collect::<Result<Vec<_>>>()?;
            let value = target.element(&coords)?;
            if map.insert(i, value.clone()).is_some_and(|old| old != value) {
                return Err(Error::GroupMismatch(format!("conflicting values for the class of `{key}`")));
            }
        }
        Assignment::from_map(target, map, u.len())
    }
}

pub fn big_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn json_to_big(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| Error::syntax(0, format!("`{n}` is not an integer"))),
        Value::String(s) => s.parse().map_err(|_| Error::syntax(0, format!("`{s}` is not an integer"))),
        other => Err(Error::syntax(0, format!("expected an integer, found `{other}`"))),
    }
}

pub fn group_to_json(g: &FgAbelianGroup) -> Value {
    json!({ "free_rank": g.free_rank, "torsion": g.torsion.iter().map(big_to_json).collect::<Vec<_>>() })
}

pub fn group_from_json(v: &Value) -> Result<FgAbelianGroup> {
    let free_rank = v.get("free_rank").and_then(Value::as_u64).ok_or_else(|| Error::syntax(0, "missing `free_rank`"))?;
    let torsion = match v.get("torsion") {
        None => Vec::new(),
        Some(Value::Array(t)) => t.iter().map(json_to_big).collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(Error::syntax(0, "`torsion` must be an array")),
    };
    FgAbelianGroup::new(free_rank as usize, torsion)
}

/// The abelian group presented by a finite universe and the relations inside
/// it, with the universal assignment `gU`. Relations leaving the window are
/// omitted, so the subgroup of the universal group generated by these classes
/// is a quotient of `group`.
#[derive(Debug, Clone)]
pub struct UniversalTruncation {
    pub universe: SymbolUniverse,
    pub relations: Vec<UniverseRelation>,
    pub group: FgAbelianGroup,
    pub g_u: Assignment,
}

pub fn compute_universal_truncation(u: SymbolUniverse, max_relations: usize) -> Result<UniversalTruncation> {
    let relations = generate_relations(&u, &RelationKind::ALL, max_relations)?;
    let matrix = relation_matrix(&u, &relations)?;
    let group = present(u.len(), &matrix)?;
    let target = FgAbelianGroup { projection: Vec::new(), ..group.clone() };
    let g_u = Assignment { target, values: group.projection.clone() };
    Ok(UniversalTruncation { universe: u, relations, group, g_u })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delta1Report {
    pub pass: bool,
    /// Violated relations with their nonzero residues, in relation order.
    pub violations: Vec<(UniverseRelation, AbelianElement)>,
}

/// `Σ c · a(symbol)` over the terms of a relation.
pub fn evaluate_relation(a: &Assignment, rel: &UniverseRelation) -> Result<AbelianElement> {
    rel.terms.iter().try_fold(a.target.zero(), |acc, &(i, c)| {
        let v = a.values.get(i).ok_or(Error::PartialAssignment(i))?;
        a.target.add(&acc, &a.target.scale(v, &BigInt::from(c))?)
    })
}

pub fn check_relations(a: &Assignment, rels: &[UniverseRelation]) -> Result<Delta1Report> {
    let residues = rels.par_iter().map(|r| evaluate_relation(a, r)).collect::<Result<Vec<_>>>()?;
    let violations: Vec<(UniverseRelation, AbelianElement)> =
        rels.iter().zip(residues).filter(|(_, v)| !a.target.is_zero(v)).map(|(r, v)| (r.clone(), v)).collect();
    Ok(Delta1Report { pass: violations.is_empty(), violations })
}

/// Evaluates every relation of the universe under `a`.
pub fn check_delta1(a: &Assignment, u: &SymbolUniverse, max_relations: usize) -> Result<Delta1Report> {
    if a.values.len() != u.len() {
        return Err(Error::PartialAssignment(a.values.len().min(u.len())));
    }
    check_relations(a, &generate_relations(u, &RelationKind::ALL, max_relations)?)
}

/// Crossings of co-oriented CE strata, each `+1` when passed along its
/// co-orientation and `-1` against it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTrace {
    pub events: Vec<(i8, Symbol)>,
}

impl EventTrace {
    /// One crossing per unit of coefficient.
    pub fn from_relation(u: &SymbolUniverse, rel: &UniverseRelation) -> Self {
        let mut events = Vec::new();
        for &(i, c) in &rel.terms {
            for _ in 0..c.unsigned_abs() {
                events.push((c.signum() as i8, u.symbols()[i].clone()));
            }
        }
        EventTrace { events }
    }

    /// Lines `+1 <symbol>` or `-1 <symbol>`; blank lines and `#` comments skipped.
    pub fn parse(ctx: &crate::group::GroupContext, text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (dir, sym) = line.split_once(char::is_whitespace).ok_or_else(|| Error::syntax(n + 1, "expected `+1 <symbol>`"))?;
            let dir = match dir {
                "+1" | "1" | "+" => 1,
                "-1" | "-" => -1,
                other => return Err(Error::syntax(n + 1, format!("direction must be +1 or -1, found `{other}`"))),
            };
            events.push((dir, Symbol::parse(ctx, sym)?));
        }
        Ok(EventTrace { events })
    }

    pub fn format(&self, ctx: &crate::group::GroupContext) -> String {
        self.events.iter().map(|(d, s)| format!("{:+} {}\n", d, s.format(ctx))).collect()
    }
}

/// `Σ direction · a(class of symbol)`.
pub fn evaluate_trace(t: &EventTrace, a: &Assignment, u: &SymbolUniverse) -> Result<AbelianElement> {
    let mut acc = a.target.zero();
    for (dir, s) in &t.events {
        let i = u.index_of(s)?;
        let v = a.values.get(i).ok_or(Error::PartialAssignment(i))?;
        acc = a.target.add(&acc, &a.target.scale(v, &BigInt::from(*dir))?)?;
    }
    Ok(acc)
}
