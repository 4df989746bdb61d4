use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type Dense = Vec<Vec<BigInt>>;

/// Sparse integer matrix in coordinate form. Entries are kept sorted by
/// `(row, col)`, without duplicates or stored zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, BigInt)>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: Vec::new() }
    }

    /// Builds a matrix from triplets. Zero values are dropped; a repeated
    /// coordinate is an error.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, BigInt)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!("entry ({r}, {c}) outside {rows}x{cols}")));
            }
            if map.insert((r, c), v).is_some() {
                return Err(Error::DimensionMismatch(format!("duplicate entry ({r}, {c})")));
            }
        }
        let entries = map.into_iter().filter(|(_, v)| !v.is_zero()).map(|((r, c), v)| (r, c, v)).collect();
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn from_dense(rows: usize, cols: usize, dense: &[Vec<BigInt>]) -> Self {
        let mut entries = Vec::new();
        for (r, row) in dense.iter().enumerate().take(rows) {
            for (c, v) in row.iter().enumerate().take(cols) {
                if !v.is_zero() {
                    entries.push((r, c, v.clone()));
                }
            }
        }
        IntMatrix { rows, cols, entries }
    }

    pub fn from_dense_i64(rows: usize, cols: usize, dense: &[Vec<i64>]) -> Self {
        let big: Vec<Vec<BigInt>> = dense.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_dense(rows, cols, &big)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, BigInt)] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        self.entries
            .binary_search_by(|(er, ec, _)| (*er, *ec).cmp(&(r, c)))
            .map(|i| self.entries[i].2.clone())
            .unwrap_or_default()
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (r, c, v) in &self.entries {
            d[*r][*c] = v.clone();
        }
        d
    }

    /// Parses the coordinate-triplet text format: a `rows cols nnz` header
    /// followed by `row col value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| Error::syntax(0, "missing `rows cols nnz` header"))?;
        let h = parse_fields::<usize>(header, hline, 3)?;
        let mut triplets = Vec::with_capacity(h[2]);
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::syntax(line, "expected `row col value`"));
            }
            let r = f[0].parse().map_err(|_| Error::syntax(line, "bad row index"))?;
            let c = f[1].parse().map_err(|_| Error::syntax(line, "bad column index"))?;
            let v = f[2].parse::<BigInt>().map_err(|_| Error::syntax(line, "bad value"))?;
            triplets.push((r, c, v));
        }
        if triplets.len() != h[2] {
            return Err(Error::DimensionMismatch(format!("header declares {} entries, found {}", h[2], triplets.len())));
        }
        Self::from_triplets(h[0], h[1], triplets)
    }
}

fn parse_fields<T: std::str::FromStr>(l: &str, line: usize, n: usize) -> Result<Vec<T>> {
    let f: Vec<T> = l
        .split_whitespace()
        .map(|x| x.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::syntax(line, "expected integers"))?;
    if f.len() != n {
        return Err(Error::syntax(line, format!("expected {n} fields")));
    }
    Ok(f)
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.rows, self.cols, self.entries.len())?;
        for (r, c, v) in &self.entries {
            writeln!(f, "{r} {c} {v}")?;
        }
        Ok(())
    }
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect()).collect()
}

pub fn mul(a: &Dense, b: &Dense, inner: usize) -> Dense {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &row[k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}
