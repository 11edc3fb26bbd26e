use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GramMatrix, GsoData, Unimodular};
use crate::rational::{fmt_rat, rat, round_half_toward_zero, serde_rat, Rat};

use super::enumerate::{enumerate, tie_break_key};

/// A shortest nonzero vector of a lattice, with its coefficients in the
/// given basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShortestVectorResult {
    pub coeffs: Vec<i64>,
    #[serde(with = "serde_rat")]
    pub norm_sq: Rat,
    pub nodes_visited: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub reduced: GramMatrix,
    pub transform: Unimodular,
    pub svp_calls: u64,
    pub total_nodes: u64,
}

/// Outcome of an HKZ certification; `Reduced` or the first failing condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HkzCertificate {
    Reduced,
    /// `|mu[i][j]| > 1/2` (1-based indices).
    NotSizeReduced {
        i: usize,
        j: usize,
        mu: String,
    },
    /// `b_level(level)` is longer than the shortest vector of the projected
    /// lattice at that level.
    NotShortest {
        level: usize,
        bstar: String,
        shortest: String,
    },
}

impl HkzCertificate {
    pub fn is_reduced(&self) -> bool {
        matches!(self, HkzCertificate::Reduced)
    }

    pub fn describe(&self) -> String {
        match self {
            HkzCertificate::Reduced => "HKZ reduced".into(),
            HkzCertificate::NotSizeReduced { i, j, mu } => {
                format!("not size reduced: |mu[{i}][{j}]| = |{mu}| > 1/2")
            }
            HkzCertificate::NotShortest {
                level,
                bstar,
                shortest,
            } => {
                if *level == 1 {
                    format!("b1 not shortest: |b1|^2 = {bstar} > lambda1^2 = {shortest}")
                } else {
                    format!(
                        "b{level}({level}) not shortest in projected lattice: {bstar} > {shortest}"
                    )
                }
            }
        }
    }
}

/// Exact SVP by enumeration. The radius starts at `|b_1|^2` and shrinks on
/// each improvement; ties are resolved by [`tie_break_key`].
pub fn shortest_vector(g: &GramMatrix) -> ShortestVectorResult {
    shortest_vector_gso(&g.ldl(), g.get(0, 0).clone())
}

fn shortest_vector_gso(gso: &GsoData, radius: Rat) -> ShortestVectorResult {
    let mut best: Option<(Rat, (Vec<u64>, Vec<i64>))> = None;
    let nodes = enumerate(gso, radius, |x, v| {
        let key = tie_break_key(x);
        let better = match &best {
            None => true,
            Some((bv, bk)) => v < bv || (v == bv && key < *bk),
        };
        if better {
            best = Some((v.clone(), key));
            Some(v.clone())
        } else {
            None
        }
    });
    let (norm_sq, (_, coeffs)) = best.expect("first basis vector lies within the radius");
    ShortestVectorResult {
        coeffs,
        norm_sq,
        nodes_visited: nodes,
    }
}

/// Gram matrix of the projections of `b_i, ..., b_n` orthogonally to
/// `b_1, ..., b_{i-1}` (1-based `i`).
pub fn projected_gram(g: &GramMatrix, i: usize) -> Result<GramMatrix> {
    if i == 0 || i > g.rank() {
        return Err(Error::IndexOutOfRange {
            index: i,
            rank: g.rank(),
        });
    }
    Ok(g.ldl().projected(i - 1))
}

/// Integral row operations making `|mu[i][j]| <= 1/2`, as a transform.
fn size_reduction_transform(gso: &GsoData) -> Unimodular {
    let n = gso.rank();
    let mut mu = gso.mu.clone();
    let mut t: Vec<Vec<BigInt>> = Unimodular::identity(n).entries().to_vec();
    for i in 1..n {
        for j in (0..i).rev() {
            let r = round_half_toward_zero(&mu[i][j]);
            if r.is_zero() {
                continue;
            }
            let rr = Rat::from_integer(r.clone());
            for k in 0..=j {
                let delta = &rr * &mu[j][k];
                mu[i][k] -= delta;
            }
            let row_j = t[j].clone();
            for (dst, src) in t[i].iter_mut().zip(&row_j) {
                *dst -= &r * src;
            }
        }
    }
    Unimodular::from_entries_unchecked(t)
}

/// Size-reduces `g`. The returned transform maps the input basis to the
/// output basis; projected norms are unchanged.
pub fn size_reduce(g: &GramMatrix) -> (GramMatrix, Unimodular) {
    let t = size_reduction_transform(&g.ldl());
    if t.is_identity() {
        return (g.clone(), t);
    }
    (g.transform(&t), t)
}

/// Flips `b_i` whenever the first nonzero `mu[i][j]` of its row is negative.
fn sign_canonical_transform(gso: &GsoData) -> Unimodular {
    let n = gso.rank();
    let mut mu = gso.mu.clone();
    let mut t = Unimodular::identity(n).entries().to_vec();
    for i in 1..n {
        let first = (0..i).map(|j| &mu[i][j]).find(|v| !v.is_zero());
        if let Some(v) = first {
            if v.is_negative() {
                for j in 0..i {
                    mu[i][j] = -mu[i][j].clone();
                }
                for row in mu.iter_mut().skip(i + 1) {
                    row[i] = -row[i].clone();
                }
                t[i][i] = -BigInt::one();
            }
        }
    }
    Unimodular::from_entries_unchecked(t)
}

/// Unimodular `m x m` matrix whose first row is the primitive vector `x`.
///
/// Adjacent coefficients are merged pairwise by extended gcd from the last
/// position up; `x = e_1` yields the identity.
pub(crate) fn complete_to_basis(x: &[i64]) -> Vec<Vec<BigInt>> {
    let m = x.len();
    let mut coeffs: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
    let mut t: Vec<Vec<BigInt>> = Unimodular::identity(m).entries().to_vec();
    for j in (1..m).rev() {
        if coeffs[j].is_zero() {
            continue;
        }
        let (a, b) = (coeffs[j - 1].clone(), coeffs[j].clone());
        let eg = a.extended_gcd(&b);
        let (g, s, u) = if eg.gcd.is_negative() {
            (-eg.gcd, -eg.x, -eg.y)
        } else {
            (eg.gcd, eg.x, eg.y)
        };
        // [[a/g, b/g], [-u, s]] has determinant (s a + u b) / g = 1.
        let (p, q) = (&a / &g, &b / &g);
        let (rj1, rj) = (t[j - 1].clone(), t[j].clone());
        for k in 0..m {
            t[j - 1][k] = &p * &rj1[k] + &q * &rj[k];
            t[j][k] = -&u * &rj1[k] + &s * &rj[k];
        }
        coeffs[j - 1] = g;
        coeffs[j] = BigInt::zero();
    }
    if coeffs[0].is_negative() {
        for v in t[0].iter_mut() {
            *v = -v.clone();
        }
        coeffs[0] = -coeffs[0].clone();
    }
    debug_assert!(coeffs[0].is_one(), "shortest vectors are primitive");
    t
}

/// HKZ reduction by the level-by-level recursion: at level `i`, find a
/// shortest vector of the projected lattice, make it the `i`-th basis vector,
/// size-reduce, and move on. Finishes with the sign convention applied.
pub fn hkz_reduce(input: &GramMatrix) -> ReductionReport {
    let n = input.rank();
    let (mut g, mut u) = size_reduce(input);
    let mut svp_calls = 0;
    let mut total_nodes = 0;
    for level in 0..n.saturating_sub(1) {
        let gso = g.ldl();
        let projected = gso.projected(level);
        let sv = shortest_vector_gso(&projected.ldl(), projected.get(0, 0).clone());
        svp_calls += 1;
        total_nodes += sv.nodes_visited;
        let is_unit = sv.coeffs[0] == 1 && sv.coeffs[1..].iter().all(|c| *c == 0);
        if is_unit {
            continue;
        }
        let block = complete_to_basis(&sv.coeffs);
        let t = Unimodular::embed(n, level, &block);
        g = g.transform(&t);
        u = t.compose(&u);
        let (g2, s) = size_reduce(&g);
        g = g2;
        u = s.compose(&u);
    }
    let signs = sign_canonical_transform(&g.ldl());
    if !signs.is_identity() {
        g = g.transform(&signs);
        u = signs.compose(&u);
    }
    ReductionReport {
        reduced: g,
        transform: u,
        svp_calls,
        total_nodes,
    }
}

/// Checks size reduction, then that every `bstar[i]` equals the squared
/// minimum of the projected lattice at level `i`.
pub fn is_hkz_reduced(g: &GramMatrix) -> HkzCertificate {
    let gso = g.ldl();
    let n = g.rank();
    let half = rat(1, 2);
    for i in 1..n {
        for j in 0..i {
            if gso.mu[i][j].abs() > half {
                return HkzCertificate::NotSizeReduced {
                    i: i + 1,
                    j: j + 1,
                    mu: fmt_rat(&gso.mu[i][j]),
                };
            }
        }
    }
    for level in 0..n {
        let projected = gso.projected(level);
        let sv = shortest_vector_gso(&projected.ldl(), projected.get(0, 0).clone());
        if sv.norm_sq != gso.bstar[level] {
            return HkzCertificate::NotShortest {
                level: level + 1,
                bstar: fmt_rat(&gso.bstar[level]),
                shortest: fmt_rat(&sv.norm_sq),
            };
        }
    }
    HkzCertificate::Reduced
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{a2_gram, extremal_gram};
    use crate::rational::int;

    #[test]
    fn size_reduce_examples() {
        let (g, u) = size_reduce(&GramMatrix::identity(3));
        assert_eq!(g, GramMatrix::identity(3));
        assert!(u.is_identity());

        let g = GramMatrix::from_ints(&[vec![1, 3], vec![3, 10]]).unwrap();
        let (r, u) = size_reduce(&g);
        assert_eq!(r, GramMatrix::identity(2));
        assert_eq!(
            u,
            Unimodular::from_ints(&[vec![1, 0], vec![-3, 1]]).unwrap()
        );

        let e = extremal_gram(true);
        let (r, u) = size_reduce(&e);
        assert_eq!(r, e);
        assert!(u.is_identity());
    }

    #[test]
    fn shortest_vector_examples() {
        let sv = shortest_vector(&GramMatrix::identity(3));
        assert_eq!(sv.norm_sq, int(1));
        assert_eq!(sv.coeffs, vec![1, 0, 0]);

        assert_eq!(shortest_vector(&a2_gram()).norm_sq, int(1));
        assert_eq!(shortest_vector(&a2_gram()).coeffs, vec![1, 0]);

        let sv = shortest_vector(&extremal_gram(true));
        assert_eq!(sv.norm_sq, int(1));
        assert_eq!(sv.coeffs, vec![1, 0, 0]);

        let sv = shortest_vector(&GramMatrix::from_ints(&[vec![4, 0], vec![0, 1]]).unwrap());
        assert_eq!(sv.coeffs, vec![0, 1]);
        assert_eq!(sv.norm_sq, int(1));
    }

    #[test]
    fn projected_gram_examples() {
        let e = extremal_gram(true);
        assert_eq!(projected_gram(&e, 1).unwrap(), e);
        assert_eq!(projected_gram(&e, 2).unwrap(), a2_gram());
        assert_eq!(
            projected_gram(&e, 3).unwrap(),
            GramMatrix::from_strs(&[&["3/4"]]).unwrap()
        );
        assert!(projected_gram(&e, 0).is_err());
        assert!(projected_gram(&e, 4).is_err());
    }

    #[test]
    fn hkz_reduce_examples() {
        let r = hkz_reduce(&GramMatrix::identity(3));
        assert_eq!(r.reduced, GramMatrix::identity(3));
        assert!(r.transform.is_identity());

        let g = GramMatrix::from_ints(&[vec![4, 0], vec![0, 1]]).unwrap();
        let r = hkz_reduce(&g);
        assert_eq!(
            r.reduced,
            GramMatrix::from_ints(&[vec![1, 0], vec![0, 4]]).unwrap()
        );
        assert_eq!(g.transform(&r.transform), r.reduced);

        for positive in [true, false] {
            let e = extremal_gram(positive);
            let r = hkz_reduce(&e);
            assert_eq!(r.reduced, e);
            assert!(r.transform.is_identity());
        }
    }

    #[test]
    fn certificate_examples() {
        assert_eq!(
            is_hkz_reduced(&GramMatrix::identity(3)),
            HkzCertificate::Reduced
        );
        let c = is_hkz_reduced(&GramMatrix::from_ints(&[vec![4, 0], vec![0, 1]]).unwrap());
        assert_eq!(
            c,
            HkzCertificate::NotShortest {
                level: 1,
                bstar: "4".into(),
                shortest: "1".into()
            }
        );
        assert!(c.describe().contains("b1 not shortest"));
        assert!(is_hkz_reduced(&extremal_gram(true)).is_reduced());
        assert!(is_hkz_reduced(&extremal_gram(false)).is_reduced());
        let c = is_hkz_reduced(&GramMatrix::from_ints(&[vec![1, 3], vec![3, 10]]).unwrap());
        assert!(matches!(
            c,
            HkzCertificate::NotSizeReduced { i: 2, j: 1, .. }
        ));
    }

    #[test]
    fn completion_has_requested_first_row() {
        for x in [
            vec![0, 1],
            vec![2, 3, -5],
            vec![0, 0, -1],
            vec![-1, 0, 0],
            vec![4, 0, 7, 9],
        ] {
            let t = complete_to_basis(&x);
            let u = Unimodular::new(t.clone()).unwrap();
            assert_eq!(u.determinant().abs(), BigInt::one());
            let first: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
            assert_eq!(t[0], first);
        }
        assert!(Unimodular::new(complete_to_basis(&[1, 0, 0]))
            .unwrap()
            .is_identity());
    }

    #[test]
    fn sign_convention_flips_negative_rows() {
        let g = GramMatrix::from_strs(&[&["1", "-1/2"], &["-1/2", "1"]]).unwrap();
        let r = hkz_reduce(&g);
        assert_eq!(r.reduced, a2_gram());
        assert_eq!(r.transform.determinant().abs(), BigInt::one());
    }
}
