use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::GramMatrix;
use crate::rational::{int, rat, serde_rat, serde_rat_vec, Rat};

use super::enumerate::{enumerate, tie_break_key};
use super::hkz::{hkz_reduce, is_hkz_reduced};

/// Largest rank for which exhaustive minima enumeration is offered.
pub const MAX_MINIMA_RANK: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuccessiveMinima {
    /// `lambda_i^2`, nondecreasing.
    #[serde(with = "serde_rat_vec")]
    pub minima_sq: Vec<Rat>,
    /// Coefficients, in the input basis, of independent vectors realizing
    /// the minima.
    pub witnesses: Vec<Vec<i64>>,
    pub nodes_visited: u64,
}

/// Incremental rank test over the rationals.
struct Independence {
    rows: Vec<(usize, Vec<Rat>)>,
}

impl Independence {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    /// Adds `x` if it is independent of the rows so far.
    fn try_add(&mut self, x: &[i64]) -> bool {
        let mut v: Vec<Rat> = x.iter().map(|&c| int(c)).collect();
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let f = &v[*pivot] / &row[*pivot];
            for (a, b) in v.iter_mut().zip(row) {
                *a -= &f * b;
            }
        }
        match v.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Exact successive minima by enumeration.
///
/// The input is HKZ-reduced first; its basis vectors are `n` independent
/// vectors, so the radius `max_i |b_i|^2` of the reduced basis already
/// contains all `n` minima. Vectors inside it are sorted by norm and the
/// first independent ones are kept.
pub fn successive_minima(g: &GramMatrix) -> Result<SuccessiveMinima> {
    let n = g.rank();
    if n > MAX_MINIMA_RANK {
        return Err(Error::RankTooLarge {
            rank: n,
            max: MAX_MINIMA_RANK,
        });
    }
    let report = hkz_reduce(g);
    let reduced = &report.reduced;
    let radius = reduced.diagonal().into_iter().max().expect("rank >= 1");
    let mut found: Vec<(Rat, (Vec<u64>, Vec<i64>))> = Vec::new();
    let nodes = enumerate(&reduced.ldl(), radius, |x, v| {
        found.push((v.clone(), tie_break_key(x)));
        None
    });
    found.sort();

    let mut basis = Independence::new();
    let mut minima_sq = Vec::with_capacity(n);
    let mut witnesses = Vec::with_capacity(n);
    for (norm, (_, x)) in found {
        if basis.try_add(&x) {
            let w: Vec<i64> = report
                .transform
                .row_combination(&x)
                .iter()
                .map(|c| i64::try_from(c).expect("witness coefficient fits i64"))
                .collect();
            minima_sq.push(norm);
            witnesses.push(w);
            if minima_sq.len() == n {
                break;
            }
        }
    }
    debug_assert_eq!(minima_sq.len(), n);
    Ok(SuccessiveMinima {
        minima_sq,
        witnesses,
        nodes_visited: nodes,
    })
}

/// One exact inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    /// 1-based basis index the check is about.
    pub index: usize,
    #[serde(with = "serde_rat")]
    pub lhs: Rat,
    #[serde(with = "serde_rat")]
    pub rhs: Rat,
    pub holds: bool,
    pub tight: bool,
}

impl InequalityCheck {
    pub fn new(name: impl Into<String>, index: usize, lhs: Rat, rhs: Rat) -> Self {
        let holds = lhs <= rhs;
        let tight = lhs == rhs;
        Self {
            name: name.into(),
            index,
            lhs,
            rhs,
            holds,
            tight,
        }
    }

    /// `lhs / rhs`; how close the inequality is to equality.
    pub fn ratio(&self) -> Rat {
        if self.rhs.is_zero() {
            Rat::one()
        } else {
            &self.lhs / &self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropositionReport {
    pub minima: SuccessiveMinima,
    pub checks: Vec<InequalityCheck>,
}

impl PropositionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    pub fn max_ratio(&self, name: &str) -> Option<Rat> {
        self.checks
            .iter()
            .filter(|c| c.name == name)
            .map(InequalityCheck::ratio)
            .max()
    }
}

pub const PROJECTED_RATIO_ADJACENT: &str = "bstar[i] <= 4/3 bstar[i+1]";
pub const PROJECTED_RATIO_SKIP: &str = "bstar[i] <= 3/2 bstar[i+2]";
pub const MINIMUM_LOWER: &str = "4/(i+3) lambda_i^2 <= |b_i|^2";
pub const MINIMUM_UPPER: &str = "|b_i|^2 <= (i+3)/4 lambda_i^2";
pub const PROJECTED_BELOW_MINIMUM: &str = "bstar[i] <= lambda_i^2";

/// Verifies on an HKZ-reduced Gram matrix: the projected-norm ratios
/// `bstar[i] <= 4/3 bstar[i+1]` and `bstar[i] <= 3/2 bstar[i+2]`, the
/// bracketing `4/(i+3) lambda_i^2 <= |b_i|^2 <= (i+3)/4 lambda_i^2`, and
/// `bstar[i] <= lambda_i^2`.
pub fn check_propositions(g: &GramMatrix) -> Result<PropositionReport> {
    let n = g.rank();
    if n > MAX_MINIMA_RANK {
        return Err(Error::RankTooLarge {
            rank: n,
            max: MAX_MINIMA_RANK,
        });
    }
    let cert = is_hkz_reduced(g);
    if !cert.is_reduced() {
        return Err(Error::NotHkzReduced(cert.describe()));
    }
    let gso = g.ldl();
    let minima = successive_minima(g)?;
    let diag = g.diagonal();
    let mut checks = Vec::new();
    for i in 0..n {
        if i + 1 < n {
            checks.push(InequalityCheck::new(
                PROJECTED_RATIO_ADJACENT,
                i + 1,
                gso.bstar[i].clone(),
                rat(4, 3) * &gso.bstar[i + 1],
            ));
        }
        if i + 2 < n {
            checks.push(InequalityCheck::new(
                PROJECTED_RATIO_SKIP,
                i + 1,
                gso.bstar[i].clone(),
                rat(3, 2) * &gso.bstar[i + 2],
            ));
        }
    }
    for i in 0..n {
        let idx = i as i64 + 1;
        let lam = &minima.minima_sq[i];
        checks.push(InequalityCheck::new(
            MINIMUM_LOWER,
            i + 1,
            rat(4, idx + 3) * lam,
            diag[i].clone(),
        ));
        checks.push(InequalityCheck::new(
            MINIMUM_UPPER,
            i + 1,
            diag[i].clone(),
            rat(idx + 3, 4) * lam,
        ));
        checks.push(InequalityCheck::new(
            PROJECTED_BELOW_MINIMUM,
            i + 1,
            gso.bstar[i].clone(),
            lam.clone(),
        ));
    }
    Ok(PropositionReport { minima, checks })
}
