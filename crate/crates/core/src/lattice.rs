//! Gram-matrix lattice representation and exact Gram–Schmidt data.
//!
//! A lattice is held as the Gram matrix `G[i][j] = <b_i, b_j>` of one of its
//! bases. Everything is exact rational; the LDL factorization of `G` yields
//! the Gram–Schmidt coefficients `mu[i][j]` and squared projected norms
//! `bstar[i] = |b_i(i)|^2`.

use std::fmt;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, from_big, int, parse_rat, Rat};

/// Symmetric positive-definite rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GramMatrix {
    entries: Vec<Vec<Rat>>,
}

/// Rows of a basis in some ambient rational space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorBasis {
    rows: Vec<Vec<Rat>>,
}

/// Gram–Schmidt data from `G = L diag(bstar) L^T`.
///
/// `mu` is stored as a full square matrix with `mu[i][i] = 1` and zeros above
/// the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GsoData {
    pub mu: Vec<Vec<Rat>>,
    pub bstar: Vec<Rat>,
}

/// Integer matrix with determinant ±1. Row `i` holds the coefficients of the
/// new `i`-th basis vector in terms of the old basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Unimodular {
    entries: Vec<Vec<BigInt>>,
}

impl VectorBasis {
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty)?;
        let m = first.len();
        if m == 0 {
            return Err(Error::Empty);
        }
        for row in &rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact LDL factorization of a symmetric matrix. Fails on the first
/// nonpositive pivot (0-based index in the error).
fn ldl_raw(g: &[Vec<Rat>]) -> Result<GsoData> {
    let n = g.len();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut bstar: Vec<Rat> = Vec::with_capacity(n);
    // r[i][j] = <b_i, b_j(j)> = mu[i][j] * bstar[j]
    let mut r = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = g[i][j].clone();
            for k in 0..j {
                acc -= &mu[j][k] * &r[i][k];
            }
            r[i][j] = acc;
            if j < i {
                mu[i][j] = &r[i][j] / &bstar[j];
            }
        }
        let pivot = r[i][i].clone();
        if !pivot.is_positive() {
            return Err(Error::NotPositiveDefinite {
                pivot: i + 1,
                value: fmt_rat(&pivot),
            });
        }
        mu[i][i] = Rat::one();
        bstar.push(pivot);
    }
    Ok(GsoData { mu, bstar })
}

impl GramMatrix {
    /// Validates squareness, symmetry and positive definiteness.
    pub fn new(entries: Vec<Vec<Rat>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: i + 1,
                    len: row.len(),
                    expected: n,
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NotSymmetric {
                        row: i + 1,
                        col: j + 1,
                        upper: fmt_rat(&entries[i][j]),
                        lower: fmt_rat(&entries[j][i]),
                    });
                }
            }
        }
        ldl_raw(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    /// Parses a matrix given as `p/q` strings.
    pub fn from_strs(rows: &[&[&str]]) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut parsed = Vec::with_capacity(row.len());
            for (j, s) in row.iter().enumerate() {
                parsed.push(parse_rat(s).map_err(|message| Error::Parse {
                    line: i + 1,
                    column: j + 1,
                    message,
                })?);
            }
            entries.push(parsed);
        }
        Self::new(entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![vec![Rat::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Rat::one();
        }
        Self { entries }
    }

    /// `G[i][j] = <row_i, row_j>`.
    pub fn from_vectors(basis: &VectorBasis) -> Result<Self> {
        let rows = basis.rows();
        let n = rows.len();
        let mut entries = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&rows[i], &rows[j]);
                entries[j][i] = v.clone();
                entries[i][j] = v;
            }
        }
        match ldl_raw(&entries) {
            Ok(_) => Ok(Self { entries }),
            Err(_) => Err(Error::SingularBasis),
        }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i][j]
    }

    /// Squared lengths `|b_i|^2`.
    pub fn diagonal(&self) -> Vec<Rat> {
        (0..self.rank())
            .map(|i| self.entries[i][i].clone())
            .collect()
    }

    pub fn ldl(&self) -> GsoData {
        ldl_raw(&self.entries).expect("GramMatrix invariant: positive definite")
    }

    /// `x^T G x` for an integer coefficient vector.
    pub fn quadratic_form_value(&self, x: &[i64]) -> Result<Rat> {
        if x.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: x.len(),
            });
        }
        Ok(self.form_value(x))
    }

    pub(crate) fn form_value(&self, x: &[i64]) -> Rat {
        let n = self.rank();
        let mut acc = Rat::zero();
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            let mut row = Rat::zero();
            for j in 0..n {
                if x[j] != 0 {
                    row += &self.entries[i][j] * int(x[j]);
                }
            }
            acc += row * int(x[i]);
        }
        acc
    }

    /// `U G U^T`: the Gram matrix of the basis whose rows are `U`'s rows.
    pub fn apply_unimodular(&self, u: &Unimodular) -> Result<GramMatrix> {
        if u.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: u.rank(),
            });
        }
        Ok(self.transform(u))
    }

    pub(crate) fn transform(&self, u: &Unimodular) -> GramMatrix {
        let n = self.rank();
        let ur: Vec<Vec<Rat>> = u
            .entries
            .iter()
            .map(|r| r.iter().map(from_big).collect())
            .collect();
        // t = U G
        let mut t = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if ur[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    t[i][j] += &ur[i][k] * &self.entries[k][j];
                }
            }
        }
        let mut out = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v: Rat = (0..n)
                    .filter(|&k| !ur[j][k].is_zero())
                    .map(|k| &t[i][k] * &ur[j][k])
                    .sum();
                out[j][i] = v.clone();
                out[i][j] = v;
            }
        }
        GramMatrix { entries: out }
    }

    /// `det(G) = det(B)^2`.
    pub fn determinant(&self) -> Rat {
        self.ldl().bstar.iter().product()
    }

    /// Every entry multiplied by a positive rational.
    pub fn scaled(&self, factor: &Rat) -> Result<GramMatrix> {
        if !factor.is_positive() {
            return Err(Error::NotPositiveDefinite {
                pivot: 1,
                value: fmt_rat(factor),
            });
        }
        Ok(GramMatrix {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|x| x * factor).collect())
                .collect(),
        })
    }

    /// Leading `k x k` block: the Gram matrix of `b_1..b_k`.
    pub fn leading_block(&self, k: usize) -> Result<GramMatrix> {
        if k == 0 || k > self.rank() {
            return Err(Error::IndexOutOfRange {
                index: k,
                rank: self.rank(),
            });
        }
        Ok(GramMatrix {
            entries: self.entries[..k].iter().map(|r| r[..k].to_vec()).collect(),
        })
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[i][j].is_zero()))
    }

    /// Parses the text format: a first line holding `n`, then `n` lines of `n`
    /// whitespace-separated rationals. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<GramMatrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
            .filter(|(_, l)| !l.trim().is_empty());
        let (first_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "empty input: expected rank on the first line".into(),
        })?;
        let header = header.trim();
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line: first_line,
            column: 1,
            message: format!("expected a positive rank, found {header:?}"),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: first_line,
                column: 1,
                message: "rank must be positive".into(),
            });
        }
        let mut entries = Vec::with_capacity(n);
        let mut last_line = first_line;
        for (lineno, line) in lines.by_ref() {
            last_line = lineno;
            let mut row = Vec::with_capacity(n);
            let mut col = 0;
            for tok in tokens_with_columns(line) {
                col += 1;
                if col > n {
                    return Err(Error::Parse {
                        line: lineno,
                        column: tok.0,
                        message: format!("too many entries (expected {n})"),
                    });
                }
                row.push(parse_rat(tok.1).map_err(|message| Error::Parse {
                    line: lineno,
                    column: tok.0,
                    message,
                })?);
            }
            if row.len() != n {
                return Err(Error::Parse {
                    line: lineno,
                    column: line.len() + 1,
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
            entries.push(row);
            if entries.len() == n {
                break;
            }
        }
        if entries.len() != n {
            return Err(Error::Parse {
                line: last_line + 1,
                column: 1,
                message: format!("expected {n} rows, found {}", entries.len()),
            });
        }
        if let Some((lineno, _)) = lines.next() {
            return Err(Error::Parse {
                line: lineno,
                column: 1,
                message: "trailing content after matrix".into(),
            });
        }
        GramMatrix::new(entries)
    }

    /// Serializes to the text format accepted by [`GramMatrix::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.rank());
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(fmt_rat).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(fmt_rat).collect())
            .collect()
    }
}

fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out.into_iter()
}

impl fmt::Debug for GramMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_strings()).finish()
    }
}

impl fmt::Display for GramMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.to_strings();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}

impl Serialize for GramMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl GsoData {
    pub fn rank(&self) -> usize {
        self.bstar.len()
    }

    /// `L diag(bstar) L^T`.
    pub fn reconstruct(&self) -> Vec<Vec<Rat>> {
        let n = self.rank();
        let mut g = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v: Rat = (0..=j)
                    .map(|k| &self.mu[i][k] * &self.mu[j][k] * &self.bstar[k])
                    .sum();
                g[j][i] = v.clone();
                g[i][j] = v;
            }
        }
        g
    }

    pub fn determinant(&self) -> Rat {
        self.bstar.iter().product()
    }

    /// Gram matrix of `b_level(level), ..., b_n(level)` (0-based `level`).
    pub(crate) fn projected(&self, level: usize) -> GramMatrix {
        let n = self.rank();
        let m = n - level;
        let mut g = vec![vec![Rat::zero(); m]; m];
        for a in 0..m {
            for b in 0..=a {
                let (ia, ib) = (level + a, level + b);
                let v: Rat = (level..=ib)
                    .map(|k| &self.mu[ia][k] * &self.mu[ib][k] * &self.bstar[k])
                    .sum();
                g[b][a] = v.clone();
                g[a][b] = v;
            }
        }
        GramMatrix { entries: g }
    }
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn int_determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl Unimodular {
    pub fn new(entries: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: i + 1,
                    len: row.len(),
                    expected: n,
                });
            }
        }
        let det = int_determinant(&entries);
        if det.abs() != BigInt::one() {
            return Err(Error::NotUnimodular {
                det: det.to_string(),
            });
        }
        Ok(Self { entries })
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![vec![BigInt::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = BigInt::one();
        }
        Self { entries }
    }

    /// Permutation exchanging basis vectors `i` and `j` (0-based).
    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut u = Self::identity(n);
        u.entries.swap(i, j);
        u
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rank())
    }

    pub fn determinant(&self) -> BigInt {
        int_determinant(&self.entries)
    }

    /// `self * rhs`: apply `rhs` first, then `self`.
    pub fn compose(&self, rhs: &Unimodular) -> Unimodular {
        let n = self.rank();
        let mut out = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if self.entries[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += &self.entries[i][k] * &rhs.entries[k][j];
                }
            }
        }
        Unimodular { entries: out }
    }

    /// Embeds an `m x m` block acting on basis vectors `offset..offset+m`.
    pub(crate) fn embed(n: usize, offset: usize, block: &[Vec<BigInt>]) -> Unimodular {
        let mut u = Self::identity(n);
        for (a, row) in block.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                u.entries[offset + a][offset + b] = v.clone();
            }
        }
        u
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<Vec<BigInt>>) -> Self {
        Self { entries }
    }

    /// Row vector `x U` for integer `x`.
    pub fn row_combination(&self, x: &[i64]) -> Vec<BigInt> {
        let n = self.rank();
        (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| x[i] != 0)
                    .map(|i| BigInt::from(x[i]) * &self.entries[i][j])
                    .sum()
            })
            .collect()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect()
    }
}

impl fmt::Display for Unimodular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.to_strings();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}

impl Serialize for Unimodular {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

/// The A2 (hexagonal) lattice, `[[1, 1/2], [1/2, 1]]`.
pub fn a2_gram() -> GramMatrix {
    GramMatrix::from_strs(&[&["1", "1/2"], &["1/2", "1"]]).expect("A2 Gram")
}

/// The rank-3 form `(x + (y+z)/2)^2 + (y ± z/2)^2 + 3/4 z^2`.
///
/// `positive = true` gives `mu_32 = +1/2`, otherwise `mu_32 = -1/2`.
pub fn extremal_gram(positive: bool) -> GramMatrix {
    let off = if positive { "3/4" } else { "-1/4" };
    GramMatrix::from_strs(&[
        &["1", "1/2", "1/2"],
        &["1/2", "5/4", off],
        &["1/2", off, "5/4"],
    ])
    .expect("extremal Gram")
}
