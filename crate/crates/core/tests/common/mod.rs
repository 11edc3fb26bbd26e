#![allow(dead_code)]

use hkz_core::{GramMatrix, Rat};
use num::{One, Signed, Zero};

/// All nonzero integer vectors with `|x_i| <= bound`, one per `{x, -x}` pair.
pub fn box_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let side = (2 * bound + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::with_capacity(total / 2);
    for idx in 0..total {
        let mut r = idx;
        let x: Vec<i64> = (0..n)
            .map(|_| {
                let d = (r % side) as i64 - bound;
                r /= side;
                d
            })
            .collect();
        if x.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) {
            out.push(x);
        }
    }
    out
}

pub fn brute_min(g: &GramMatrix, bound: i64) -> Rat {
    box_vectors(g.rank(), bound)
        .iter()
        .map(|x| g.quadratic_form_value(x).unwrap())
        .min()
        .unwrap()
}

/// Smallest box bound that [`box_covers`] accepts.
pub fn covering_bound(g: &GramMatrix, radius: &Rat) -> i64 {
    (0..).find(|&b| box_covers(g, radius, b)).unwrap()
}

/// Every `x` with `x^T G x <= radius` satisfies `x_i^2 <= radius (G^-1)_ii`;
/// true when that bound forces `|x_i| <= bound`.
pub fn box_covers(g: &GramMatrix, radius: &Rat, bound: i64) -> bool {
    let n = g.rank();
    if n == 1 {
        return radius / g.get(0, 0) < Rat::from_integer(((bound + 1) * (bound + 1)).into());
    }
    let det = g.determinant();
    (0..n).all(|i| {
        let minor: Vec<Vec<Rat>> = (0..n)
            .filter(|&r| r != i)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != i)
                    .map(|c| g.get(r, c).clone())
                    .collect()
            })
            .collect();
        let inv_ii = GramMatrix::new(minor).unwrap().determinant() / &det;
        radius * inv_ii < Rat::from_integer(((bound + 1) * (bound + 1)).into())
    })
}

fn rank_of(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| Rat::from_integer(c.into())).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for k in 0..cols {
                    let d = &f * &m[rank][k];
                    m[r][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Successive minima of the vectors in the box: sort by norm, keep each one
/// that raises the rank.
pub fn brute_minima(g: &GramMatrix, bound: i64) -> Vec<Rat> {
    let mut v: Vec<(Rat, Vec<i64>)> = box_vectors(g.rank(), bound)
        .into_iter()
        .map(|x| (g.quadratic_form_value(&x).unwrap(), x))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut minima = Vec::new();
    for (norm, x) in v {
        chosen.push(x);
        if rank_of(&chosen) == chosen.len() {
            minima.push(norm);
            if minima.len() == g.rank() {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    minima
}

pub fn det_is_unit(d: &num::BigInt) -> bool {
    d.abs().is_one()
}
