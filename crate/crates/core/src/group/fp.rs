//! Finitely presented backend: a bounded two-sided procedure for the word problem.
//!
//! Equalities are proved by a best-first rewriting search over cyclic words
//! (relator subwords replaced by the inverse of their complement), and refuted
//! by mapping through declared quotients or through the abelianization. Neither
//! side is complete; everything else is reported as unknown.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::word::{cyclic_reduce, free_reduce, invert, shortlex_cmp, Letter, Word};
use super::{Eq3, Equality, Evidence, GroupContext, GroupElement};
use crate::abelian::{smith_normal_form_right, IntMatrix};

pub const DEFAULT_SEARCH_BUDGET: usize = 4000;

#[derive(Debug)]
pub(crate) struct Quotient {
    pub target: GroupContext,
    pub images: Vec<GroupElement>,
}

#[derive(Debug)]
pub(crate) struct FpGroup {
    pub names: Vec<String>,
    pub quotients: Vec<Quotient>,
    pub max_len: usize,
    pub budget: usize,
    /// Cyclic conjugates of every relator and its inverse.
    rules: Vec<Word>,
    abel: Abelianization,
}

impl FpGroup {
    pub fn new(
        names: Vec<String>,
        relators: Vec<Word>,
        quotients: Vec<Quotient>,
        max_len: usize,
        budget: usize,
    ) -> Self {
        let mut seen = HashSet::new();
        let mut rules = Vec::new();
        for r in &relators {
            let r = cyclic_reduce(r);
            for base in [r.clone(), invert(&r)] {
                for s in 0..base.len() {
                    let mut rot = base[s..].to_vec();
                    rot.extend_from_slice(&base[..s]);
                    if seen.insert(rot.clone()) {
                        rules.push(rot);
                    }
                }
            }
        }
        rules.sort_by(|a, b| shortlex_cmp(a, b));
        let abel = Abelianization::new(names.len(), &relators);
        FpGroup { names, quotients, max_len, budget, rules, abel }
    }

    /// Decides whether the freely reduced word `w` is trivial.
    pub fn equality(&self, w: &[Letter], budget: usize) -> Equality {
        let w = free_reduce(w);
        if w.is_empty() {
            return Equality { verdict: Eq3::True, evidence: Evidence::FreeReduction };
        }
        if let Some(evidence) = self.separation(&w) {
            return Equality { verdict: Eq3::False, evidence };
        }
        match self.prove_trivial(&w, budget) {
            Some(nodes) => Equality { verdict: Eq3::True, evidence: Evidence::Rewriting { nodes } },
            None => Equality { verdict: Eq3::Unknown, evidence: Evidence::Exhausted },
        }
    }

    /// Evidence that `w` is nontrivial: a declared quotient first, then the abelianization.
    pub fn separation(&self, w: &[Letter]) -> Option<Evidence> {
        for (q, quotient) in self.quotients.iter().enumerate() {
            let image = quotient.map_word(w);
            if image != quotient.target.identity() {
                return Some(Evidence::Quotient(q));
            }
        }
        if !self.abel.contains(&exponent_sums(w, self.names.len())) {
            return Some(Evidence::Abelianization);
        }
        None
    }

    /// Best-first search from `w` towards the empty word. Returns the number
    /// of expanded states when the empty word is reached.
    pub fn prove_trivial(&self, w: &[Letter], budget: usize) -> Option<usize> {
        let start = normal_cyclic(w);
        if start.is_empty() {
            return Some(0);
        }
        let mut seen: HashSet<Word> = HashSet::new();
        let mut heap = BinaryHeap::new();
        seen.insert(start.clone());
        heap.push(Reverse(Node(start)));
        let mut expanded = 0;
        while let Some(Reverse(Node(cur))) = heap.pop() {
            expanded += 1;
            if expanded > budget {
                return None;
            }
            for next in self.moves(&cur) {
                if next.is_empty() {
                    return Some(expanded);
                }
                if next.len() <= self.max_len && seen.insert(next.clone()) {
                    heap.push(Reverse(Node(next)));
                }
            }
        }
        None
    }

    fn moves(&self, cur: &[Letter]) -> Vec<Word> {
        let n = cur.len();
        let mut out = Vec::new();
        for s in 0..n {
            let rot: Word = cur[s..].iter().chain(&cur[..s]).copied().collect();
            for rule in &self.rules {
                let common = rule.iter().zip(&rot).take_while(|(a, b)| a == b).count();
                // rule = u v with u a prefix of the rotation: u = v^-1 in the group.
                for split in 1..=common {
                    let mut next = invert(&rule[split..]);
                    next.extend_from_slice(&rot[split..]);
                    out.push(normal_cyclic(&next));
                }
                if n + rule.len() <= self.max_len {
                    let mut next = rule.clone();
                    next.extend_from_slice(&rot);
                    out.push(normal_cyclic(&next));
                }
            }
        }
        out
    }
}

impl Quotient {
    pub fn map_word(&self, w: &[Letter]) -> GroupElement {
        let t = &self.target;
        let mut acc = t.identity();
        for l in w {
            let img = &self.images[l.gen as usize];
            let img = if l.inv { t.inverse(img).expect("same context") } else { img.clone() };
            acc = t.multiply(&acc, &img).expect("same context");
        }
        acc
    }
}

#[derive(PartialEq, Eq)]
struct Node(Word);

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

/// Representative of the conjugacy-and-inversion class of a cyclic word:
/// the shortlex-least rotation of the word or of its inverse.
fn normal_cyclic(w: &[Letter]) -> Word {
    let w = cyclic_reduce(w);
    let n = w.len();
    if n == 0 {
        return w;
    }
    let inv = invert(&w);
    let mut best: Option<Word> = None;
    for base in [&w, &inv] {
        for s in 0..n {
            let rot: Word = base[s..].iter().chain(&base[..s]).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap()
}

fn exponent_sums(w: &[Letter], gens: usize) -> Vec<i64> {
    let mut v = vec![0i64; gens];
    for l in w {
        v[l.gen as usize] += if l.inv { -1 } else { 1 };
    }
    v
}

/// Membership test for the relator lattice in the free abelian group on the generators.
#[derive(Debug)]
struct Abelianization {
    v: Vec<Vec<BigInt>>,
    diagonal: Vec<BigInt>,
}

impl Abelianization {
    fn new(gens: usize, relators: &[Word]) -> Self {
        let rows: Vec<Vec<i64>> = relators.iter().map(|r| exponent_sums(r, gens)).collect();
        let m = IntMatrix::from_dense_i64(relators.len(), gens, &rows);
        let snf = smith_normal_form_right(&m);
        let diagonal = snf.diagonal.into_iter().take_while(|d| !d.is_zero()).collect();
        Abelianization { v: snf.v, diagonal }
    }

    /// Whether `x` lies in the row lattice: `x V` must be divisible by the
    /// invariant factors and vanish beyond the rank.
    fn contains(&self, x: &[i64]) -> bool {
        let n = x.len();
        (0..n).all(|j| {
            let y: BigInt = (0..n).map(|i| BigInt::from(x[i]) * &self.v[i][j]).sum();
            match self.diagonal.get(j) {
                Some(d) => y.is_multiple_of(d),
                None => y.is_zero(),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cyclic_is_rotation_and_inversion_invariant() {
        let a = Letter::new(0, false);
        let b = Letter::new(1, false);
        let w = vec![a, b, b];
        let rot = vec![b, a, b];
        assert_eq!(normal_cyclic(&w), normal_cyclic(&rot));
        assert_eq!(normal_cyclic(&w), normal_cyclic(&invert(&w)));
    }

    #[test]
    fn abelianization_membership() {
        let a = Letter::new(0, false);
        let c = Letter::new(2, false);
        // a^2 c^2 generates the lattice 2(a + c) in Z^3.
        let ab = Abelianization::new(3, &[vec![a, a, c, c]]);
        assert!(ab.contains(&[2, 0, 2]));
        assert!(ab.contains(&[-4, 0, -4]));
        assert!(!ab.contains(&[1, 0, 1]));
        assert!(!ab.contains(&[0, 1, 0]));
        let free = Abelianization::new(2, &[]);
        assert!(free.contains(&[0, 0]));
        assert!(!free.contains(&[1, 0]));
    }
}
