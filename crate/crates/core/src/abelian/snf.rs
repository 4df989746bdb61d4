//! Smith normal form over the integers with unimodular transforms.
//!
//! Pivot rule: the nonzero entry of smallest absolute value in the remaining
//! submatrix, ties broken by `(row, col)`. Output is deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{identity, Dense, IntMatrix};

/// `u · m · v = diag(diagonal)` with `u`, `v` unimodular. `diagonal` has
/// `min(rows, cols)` nonnegative entries forming a divisibility chain, zeros last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub diagonal: Vec<BigInt>,
    pub u: Dense,
    pub v: Dense,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().take_while(|d| !d.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    Calc::new(m, true).run()
}

/// Same as [`smith_normal_form`] but skips the left transform, which the
/// cokernel computation does not need. `u` is left empty.
pub(crate) fn smith_normal_form_right(m: &IntMatrix) -> SnfResult {
    Calc::new(m, false).run()
}

struct Calc {
    a: Dense,
    rows: usize,
    cols: usize,
    u: Option<Dense>,
    v: Dense,
}

impl Calc {
    fn new(m: &IntMatrix, track_u: bool) -> Self {
        Calc {
            a: m.to_dense(),
            rows: m.rows(),
            cols: m.cols(),
            u: track_u.then(|| identity(m.rows())),
            v: identity(m.cols()),
        }
    }

    fn run(mut self) -> SnfResult {
        let steps = self.rows.min(self.cols);
        let mut diagonal = Vec::with_capacity(steps);
        for t in 0..steps {
            if !self.reduce_at(t) {
                break;
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
            diagonal.push(self.a[t][t].clone());
        }
        diagonal.resize(steps, BigInt::zero());
        SnfResult { diagonal, u: self.u.unwrap_or_default(), v: self.v }
    }

    /// Clears row and column `t` around a pivot that divides the rest of the
    /// submatrix. Returns false when the submatrix is zero.
    fn reduce_at(&mut self, t: usize) -> bool {
        loop {
            let Some((pi, pj)) = self.pivot(t) else {
                return false;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..self.rows {
                if !self.a[i][t].is_zero() {
                    let q = self.a[i][t].div_floor(&self.a[t][t]);
                    self.add_row_multiple(i, t, &-q);
                    clean &= self.a[i][t].is_zero();
                }
            }
            for j in t + 1..self.cols {
                if !self.a[t][j].is_zero() {
                    let q = self.a[t][j].div_floor(&self.a[t][t]);
                    self.add_col_multiple(j, t, &-q);
                    clean &= self.a[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            let p = self.a[t][t].clone();
            let bad_row = (t + 1..self.rows).find(|&i| (t + 1..self.cols).any(|j| !self.a[i][j].is_multiple_of(&p)));
            match bad_row {
                Some(i) => self.add_row_multiple(t, i, &BigInt::one()),
                None => return true,
            }
        }
    }

    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| x.magnitude() < self.a[bi][bj].magnitude()) {
                    best = Some((i, j));
                    if x.magnitude().is_one() {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            self.a.swap(a, b);
            if let Some(u) = &mut self.u {
                u.swap(a, b);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for row in self.a.iter_mut().chain(self.v.iter_mut()) {
                row.swap(a, b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        add_multiple(&mut self.a, dst, src, k);
        if let Some(u) = &mut self.u {
            add_multiple(u, dst, src, k);
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            if !row[src].is_zero() {
                let delta = &row[src] * k;
                row[dst] += delta;
            }
        }
    }

    fn negate_row(&mut self, t: usize) {
        for x in self.a[t].iter_mut() {
            *x = -std::mem::take(x);
        }
        if let Some(u) = &mut self.u {
            for x in u[t].iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }
}

fn add_multiple(m: &mut Dense, dst: usize, src: usize, k: &BigInt) {
    let (d, s) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in d.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x += y * k;
        }
    }
}
