use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::snf::smith_normal_form_right;
use crate::error::{Error, Result};

/// `Z^free_rank ⊕ Z/t_1 ⊕ ... ⊕ Z/t_k` with `t_1 | t_2 | ... | t_k`, all `t_i > 1`.
/// Groups obtained from [`present`] also carry the image of each presentation
/// generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FgAbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub projection: Vec<AbelianElement>,
}

/// Torsion coordinates reduced into `[0, t_i)`, then free coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianElement {
    pub torsion: Vec<BigInt>,
    pub free: Vec<BigInt>,
}

impl AbelianElement {
    /// Flat coordinate list, torsion first.
    pub fn coords(&self) -> Vec<BigInt> {
        self.torsion.iter().chain(&self.free).cloned().collect()
    }
}

impl std::fmt::Display for AbelianElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl FgAbelianGroup {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>) -> Result<Self> {
        for (i, t) in torsion.iter().enumerate() {
            if t <= &BigInt::one() {
                return Err(Error::InvalidSpec(format!("invariant factor {t} must exceed 1")));
            }
            if let Some(next) = torsion.get(i + 1) {
                if !next.is_multiple_of(t) {
                    return Err(Error::InvalidSpec(format!("invariant factors {t} and {next} do not form a chain")));
                }
            }
        }
        Ok(FgAbelianGroup { free_rank, torsion, projection: Vec::new() })
    }

    pub fn trivial() -> Self {
        FgAbelianGroup { free_rank: 0, torsion: Vec::new(), projection: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn zero(&self) -> AbelianElement {
        AbelianElement { torsion: vec![BigInt::zero(); self.torsion.len()], free: vec![BigInt::zero(); self.free_rank] }
    }

    /// Builds an element from a flat coordinate list (torsion first), reducing
    /// torsion coordinates.
    pub fn element(&self, coords: &[BigInt]) -> Result<AbelianElement> {
        if coords.len() != self.torsion.len() + self.free_rank {
            return Err(Error::GroupMismatch(format!(
                "expected {} coordinates, found {}",
                self.torsion.len() + self.free_rank,
                coords.len()
            )));
        }
        let (t, f) = coords.split_at(self.torsion.len());
        Ok(AbelianElement {
            torsion: t.iter().zip(&self.torsion).map(|(x, m)| x.mod_floor(m)).collect(),
            free: f.to_vec(),
        })
    }

    /// The `i`-th basis element in flat coordinate order.
    pub fn basis(&self, i: usize) -> AbelianElement {
        let mut coords = vec![BigInt::zero(); self.torsion.len() + self.free_rank];
        coords[i] = BigInt::one();
        self.element(&coords).expect("coordinate count matches")
    }

    fn check(&self, a: &AbelianElement) -> Result<()> {
        let in_range = a.torsion.iter().zip(&self.torsion).all(|(x, m)| !x.is_negative() && x < m);
        if a.torsion.len() != self.torsion.len() || a.free.len() != self.free_rank || !in_range {
            return Err(Error::GroupMismatch(format!("{a} is not an element of {self}")));
        }
        Ok(())
    }

    pub fn add(&self, a: &AbelianElement, b: &AbelianElement) -> Result<AbelianElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(AbelianElement {
            torsion: a.torsion.iter().zip(&b.torsion).zip(&self.torsion).map(|((x, y), m)| (x + y).mod_floor(m)).collect(),
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn negate(&self, a: &AbelianElement) -> Result<AbelianElement> {
        self.scale(a, &BigInt::from(-1))
    }

    pub fn scale(&self, a: &AbelianElement, k: &BigInt) -> Result<AbelianElement> {
        self.check(a)?;
        Ok(AbelianElement {
            torsion: a.torsion.iter().zip(&self.torsion).map(|(x, m)| (x * k).mod_floor(m)).collect(),
            free: a.free.iter().map(|x| x * k).collect(),
        })
    }

    pub fn equal(&self, a: &AbelianElement, b: &AbelianElement) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(a == b)
    }

    pub fn is_zero(&self, a: &AbelianElement) -> bool {
        a.torsion.iter().chain(&a.free).all(Zero::is_zero)
    }

    /// Order of a torsion coordinate's generator, or `None` for free coordinates.
    pub fn coordinate_order(&self, i: usize) -> Option<&BigInt> {
        self.torsion.get(i)
    }

    pub fn rank(&self) -> usize {
        self.torsion.len() + self.free_rank
    }
}

impl std::fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Repeated factors collapse: `Z^3 + Z/2 + (Z/4)^2`.
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        for run in self.torsion.chunk_by(|a, b| a == b) {
            match run.len() {
                1 => parts.push(format!("Z/{}", run[0])),
                n => parts.push(format!("(Z/{})^{n}", run[0])),
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Cokernel of `relations`: generators are the columns, each row is a relation.
pub fn present(num_generators: usize, relations: &IntMatrix) -> Result<FgAbelianGroup> {
    if relations.cols() != num_generators {
        return Err(Error::DimensionMismatch(format!(
            "{} generators but relation matrix has {} columns",
            num_generators,
            relations.cols()
        )));
    }
    let reduced = eliminate_units(num_generators, relations);
    let kept = &reduced.kept;
    let position: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let triplets = reduced
        .rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, c, v)))
        .map(|(r, c, v)| (r, position[c], v.clone()));
    let rest = IntMatrix::from_triplets(reduced.rows.len(), kept.len(), triplets)?;
    let snf = smith_normal_form_right(&rest);
    // Coordinate i of the new basis has order diagonal[i]; zero or missing means free.
    let factor = |i: usize| snf.diagonal.get(i).cloned().unwrap_or_default();
    let torsion_idx: Vec<usize> = (0..kept.len()).filter(|&i| factor(i) > BigInt::one()).collect();
    let free_idx: Vec<usize> = (0..kept.len()).filter(|&i| factor(i).is_zero()).collect();
    let torsion: Vec<BigInt> = torsion_idx.iter().map(|&i| factor(i)).collect();
    let mut group = FgAbelianGroup { free_rank: free_idx.len(), torsion, projection: Vec::new() };
    let mut projection = vec![group.zero(); num_generators];
    for (g, &orig) in kept.iter().enumerate() {
        projection[orig] = AbelianElement {
            torsion: torsion_idx.iter().zip(&group.torsion).map(|(&i, m)| snf.v[g][i].mod_floor(m)).collect(),
            free: free_idx.iter().map(|&i| snf.v[g][i].clone()).collect(),
        };
    }
    // A solved generator only refers to generators solved after it or kept.
    for (j, expr) in reduced.solved.iter().rev() {
        let mut acc = group.zero();
        for (k, c) in expr {
            acc = group.add(&acc, &group.scale(&projection[*k], c)?)?;
        }
        projection[*j] = acc;
    }
    group.projection = projection;
    Ok(group)
}

/// Relations left after unit-pivot elimination, with the eliminated
/// generators written as `x_j = sum c_k x_k`.
struct Reduced {
    kept: Vec<usize>,
    rows: Vec<BTreeMap<usize, BigInt>>,
    solved: Vec<(usize, Vec<(usize, BigInt)>)>,
}

/// A relation with a unit coefficient on `x_j` solves for `x_j`; substituting
/// it into the other relations drops one row and one column without changing
/// the cokernel. Pivots favour short rows and rarely used columns.
fn eliminate_units(num_generators: usize, relations: &IntMatrix) -> Reduced {
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); relations.rows()];
    let mut uses: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); num_generators];
    for (r, c, v) in relations.entries() {
        rows[*r].insert(*c, v.clone());
        uses[*c].insert(*r);
    }
    let mut live: BTreeSet<usize> = (0..rows.len()).filter(|&r| !rows[r].is_empty()).collect();
    let mut solved = Vec::new();
    let mut eliminated = vec![false; num_generators];
    loop {
        let mut order: Vec<usize> = live.iter().copied().collect();
        order.sort_by_key(|&r| rows[r].len());
        let mut progress = false;
        for r in order {
            if !live.contains(&r) {
                continue;
            }
            let Some(j) = rows[r].iter().filter(|(_, v)| v.abs().is_one()).map(|(c, _)| *c).min_by_key(|&c| uses[c].len())
            else {
                continue;
            };
            let pivot = rows[r].remove(&j).expect("unit entry");
            live.remove(&r);
            for c in rows[r].keys() {
                uses[*c].remove(&r);
            }
            uses[j].remove(&r);
            let row = std::mem::take(&mut rows[r]);
            // pivot * x_j + sum a_k x_k = 0 and pivot = ±1, so x_j = -pivot * sum a_k x_k.
            let others: Vec<usize> = uses[j].iter().copied().collect();
            for o in others {
                let b = rows[o].remove(&j).expect("column index is current");
                let factor = &b * &pivot;
                for (c, a) in &row {
                    let entry = rows[o].entry(*c).or_insert_with(BigInt::zero);
                    *entry -= &factor * a;
                    if entry.is_zero() {
                        rows[o].remove(c);
                        uses[*c].remove(&o);
                    } else {
                        uses[*c].insert(o);
                    }
                }
                if rows[o].is_empty() {
                    live.remove(&o);
                }
            }
            uses[j].clear();
            solved.push((j, row.into_iter().map(|(c, a)| (c, -(&pivot * a))).collect()));
            eliminated[j] = true;
            progress = true;
        }
        if !progress {
            break;
        }
    }
    Reduced {
        kept: (0..num_generators).filter(|&g| !eliminated[g]).collect(),
        rows: live.into_iter().map(|r| std::mem::take(&mut rows[r])).collect(),
        solved,
    }
}
