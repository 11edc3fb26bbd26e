//! Exact Fincke–Pohst enumeration of lattice vectors inside a radius.
//!
//! Coordinates are fixed from the last basis vector down to the first. At
//! level `i` the admissible `x_i` satisfy `bstar[i] * (x_i - c_i)^2 <= R - rho`
//! with centre `c_i = -sum_{j>i} mu[j][i] x_j`; candidates are visited in
//! order of distance from the centre. Only one of each `±x` pair is visited:
//! the one whose last nonzero coordinate is positive.

use num::{ToPrimitive, Zero};

use crate::lattice::GsoData;
use crate::rational::{int, Rat};

/// Walks every nonzero `x` (up to sign) with `x^T G x <= radius`.
///
/// `visit` receives the coefficients and the exact form value; returning
/// `Some(r)` replaces the radius for the rest of the walk. Returns the number
/// of enumeration-tree nodes visited.
pub(crate) fn enumerate<F>(gso: &GsoData, radius: Rat, mut visit: F) -> u64
where
    F: FnMut(&[i64], &Rat) -> Option<Rat>,
{
    let n = gso.rank();
    let mut state = Walk {
        gso,
        radius,
        x: vec![0; n],
        nodes: 0,
    };
    state.level(n - 1, Rat::zero(), true, &mut visit);
    state.nodes
}

struct Walk<'a> {
    gso: &'a GsoData,
    radius: Rat,
    x: Vec<i64>,
    nodes: u64,
}

impl Walk<'_> {
    fn level<F>(&mut self, i: usize, rho: Rat, prefix_zero: bool, visit: &mut F)
    where
        F: FnMut(&[i64], &Rat) -> Option<Rat>,
    {
        let n = self.x.len();
        let mut centre = Rat::zero();
        for j in (i + 1)..n {
            if self.x[j] != 0 {
                centre -= &self.gso.mu[j][i] * int(self.x[j]);
            }
        }
        let bstar = &self.gso.bstar[i];

        let floor = centre
            .floor()
            .to_integer()
            .to_i64()
            .expect("coefficient fits i64");
        let mut lo = floor;
        let mut hi = floor + 1;
        let mut lo_open = true;
        // With a zero suffix the centre is 0 and only x_i >= 0 is taken.
        let mut hi_open = true;
        loop {
            let take_lo = match (lo_open, hi_open) {
                (false, false) => break,
                (true, false) => true,
                (false, true) => false,
                (true, true) => {
                    let dl = &centre - int(lo);
                    let dh = int(hi) - &centre;
                    dl <= dh
                }
            };
            let cand = if take_lo { lo } else { hi };
            let d = int(cand) - &centre;
            let partial = &rho + bstar * &d * &d;
            if partial > self.radius {
                if take_lo {
                    lo_open = false;
                } else {
                    hi_open = false;
                }
                continue;
            }
            if take_lo {
                lo -= 1;
                if prefix_zero && lo < 0 {
                    lo_open = false;
                }
            } else {
                hi += 1;
            }
            self.nodes += 1;
            self.x[i] = cand;
            let still_zero = prefix_zero && cand == 0;
            if i == 0 {
                if !still_zero {
                    if let Some(r) = visit(&self.x, &partial) {
                        self.radius = r;
                    }
                }
            } else {
                self.level(i - 1, partial, still_zero, visit);
            }
        }
        self.x[i] = 0;
    }
}

/// Ordering key used to break ties between vectors of equal norm.
///
/// The vector is first sign-normalized so its first nonzero coefficient is
/// positive. Vectors are then compared on `(|x_n|, ..., |x_1|)`
/// lexicographically, then on the signed coefficients. Under this order the
/// unit vector `e_1` precedes every other vector, so a basis whose first
/// vector is already shortest is left in place.
pub(crate) fn tie_break_key(x: &[i64]) -> (Vec<u64>, Vec<i64>) {
    let normalized = normalize_sign(x);
    let rev_abs = normalized.iter().rev().map(|v| v.unsigned_abs()).collect();
    (rev_abs, normalized)
}

/// Negates `x` if its first nonzero coordinate is negative.
pub(crate) fn normalize_sign(x: &[i64]) -> Vec<i64> {
    match x.iter().find(|v| **v != 0) {
        Some(v) if *v < 0 => x.iter().map(|v| -v).collect(),
        _ => x.to_vec(),
    }
}
