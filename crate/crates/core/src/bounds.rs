//! Orthogonality defect, Hermite invariants and defect bounds for HKZ bases.
//!
//! All values are exact. The Hermite invariant is exposed as its `n`-th
//! power, `(lambda_1^2)^n / det(G)`, so comparisons against `gamma_n^n` stay
//! rational.

use std::io::Write;

use num::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::GramMatrix;
use crate::rational::{fmt_decimal, fmt_rat, rat, Rat};
use crate::reduction::{shortest_vector, MAX_MINIMA_RANK};

/// Largest rank with a known exact Hermite constant.
pub const MAX_HERMITE_RANK: usize = 8;

/// `prod |b_i|^2 / det(G)`. At least 1, with equality iff `G` is diagonal.
pub fn orthogonality_defect(g: &GramMatrix) -> Rat {
    let num: Rat = g.diagonal().iter().product();
    num / g.determinant()
}

/// `(lambda_1^2)^n / det(G)`, i.e. the `n`-th power of the Hermite invariant.
pub fn hermite_invariant_power(g: &GramMatrix) -> Result<Rat> {
    let n = g.rank();
    if n > MAX_MINIMA_RANK {
        return Err(Error::RankTooLarge {
            rank: n,
            max: MAX_MINIMA_RANK,
        });
    }
    let l1 = shortest_vector(g).norm_sq;
    Ok(num::pow(l1, n) / g.determinant())
}

/// `gamma_n^n` for `1 <= n <= 8`.
///
/// Classical exact values (Lagrange, Gauss, Korkine–Zolotarev for n <= 5,
/// Blichfeldt for 6..=8), attained by Z, A2, A3, D4, D5, E6, E7 and E8.
pub fn hermite_constant_power(n: usize) -> Result<Rat> {
    let table = [
        rat(1, 1),
        rat(4, 3),
        rat(2, 1),
        rat(4, 1),
        rat(8, 1),
        rat(64, 3),
        rat(64, 1),
        rat(256, 1),
    ];
    if n == 0 || n > MAX_HERMITE_RANK {
        return Err(Error::HermiteConstantUnknown(n));
    }
    Ok(table[n - 1].clone())
}

/// Classical bound `gamma_n^n * prod_{i=1}^n (i+3)/4`.
pub fn lls_bound(n: usize) -> Result<Rat> {
    let gamma = hermite_constant_power(n)?;
    let prod: Rat = (1..=n as i64).map(|i| rat(i + 3, 4)).product();
    Ok(gamma * prod)
}

/// Sharpened bound `25/12 * gamma_{n-3}^{n-3} * prod_{i=4}^n (i/4 + 29/24)`
/// for `4 <= n <= 11`.
pub fn new_bound(n: usize) -> Result<Rat> {
    if n < 4 {
        return Err(Error::BoundNotApplicable {
            rank: n,
            reason: "sharpened bound needs rank >= 4",
        });
    }
    let gamma = hermite_constant_power(n - 3).map_err(|_| Error::HermiteConstantUnknown(n - 3))?;
    let prod: Rat = (4..=n as i64).map(|i| rat(i, 4) + rat(29, 24)).product();
    Ok(rat(25, 12) * gamma * prod)
}

/// Exact maximal defect of an HKZ basis of rank 1, 2 or 3.
pub fn delta_exact(n: usize) -> Result<Rat> {
    match n {
        1 => Ok(Rat::one()),
        2 => Ok(rat(4, 3)),
        3 => Ok(rat(25, 12)),
        0 => Err(Error::IndexOutOfRange { index: 0, rank: 3 }),
        _ => Err(Error::ExactValueConjectural(n)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRow {
    pub n: usize,
    pub gamma_pow: Rat,
    pub lls_bound: Rat,
    pub new_bound: Option<Rat>,
    pub delta_exact: Option<Rat>,
}

impl BoundRow {
    /// `Some(true)` when the sharpened bound beats the classical one.
    pub fn new_is_sharper(&self) -> Option<bool> {
        self.new_bound.as_ref().map(|b| *b < self.lls_bound)
    }
}

pub fn bound_table(n_max: usize) -> Result<Vec<BoundRow>> {
    if n_max > MAX_HERMITE_RANK {
        return Err(Error::HermiteConstantUnknown(n_max));
    }
    (1..=n_max)
        .map(|n| {
            Ok(BoundRow {
                n,
                gamma_pow: hermite_constant_power(n)?,
                lls_bound: lls_bound(n)?,
                new_bound: new_bound(n).ok(),
                delta_exact: delta_exact(n).ok(),
            })
        })
        .collect()
}

/// Exact value with its 12-significant-digit decimal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: f64,
}

impl ExactValue {
    pub fn new(r: &Rat) -> Self {
        Self {
            exact: fmt_rat(r),
            decimal: fmt_decimal(r).parse().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRowJson {
    pub n: usize,
    pub gamma_pow: ExactValue,
    pub lls_bound: ExactValue,
    pub new_bound: Option<ExactValue>,
    pub delta_exact: Option<ExactValue>,
    pub new_is_sharper: Option<bool>,
}

impl From<&BoundRow> for BoundRowJson {
    fn from(r: &BoundRow) -> Self {
        Self {
            n: r.n,
            gamma_pow: ExactValue::new(&r.gamma_pow),
            lls_bound: ExactValue::new(&r.lls_bound),
            new_bound: r.new_bound.as_ref().map(ExactValue::new),
            delta_exact: r.delta_exact.as_ref().map(ExactValue::new),
            new_is_sharper: r.new_is_sharper(),
        }
    }
}

pub fn bound_table_json(rows: &[BoundRow]) -> serde_json::Value {
    let rows: Vec<BoundRowJson> = rows.iter().map(BoundRowJson::from).collect();
    serde_json::to_value(rows).expect("bound rows serialize")
}

/// CSV with columns `n, gamma_pow, lls_bound, new_bound, delta_exact`; exact
/// `p/q` strings, empty cells where a value does not apply.
pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(["n", "gamma_pow", "lls_bound", "new_bound", "delta_exact"])
        .map_err(err)?;
    for r in rows {
        let opt = |v: &Option<Rat>| v.as_ref().map(fmt_rat).unwrap_or_default();
        w.write_record([
            r.n.to_string(),
            fmt_rat(&r.gamma_pow),
            fmt_rat(&r.lls_bound),
            opt(&r.new_bound),
            opt(&r.delta_exact),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

/// Largest defect an HKZ basis of rank `n` can have: the exact maximum when
/// known, otherwise the sharpened bound.
pub fn defect_envelope(n: usize) -> Result<Rat> {
    delta_exact(n).or_else(|_| new_bound(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{a2_gram, extremal_gram};
    use crate::rational::int;

    fn unit() -> Rat {
        Rat::one()
    }

    #[test]
    fn defect_examples() {
        assert_eq!(orthogonality_defect(&GramMatrix::identity(3)), unit());
        assert_eq!(orthogonality_defect(&a2_gram()), rat(4, 3));
        assert_eq!(orthogonality_defect(&extremal_gram(true)), rat(25, 12));
        assert_eq!(orthogonality_defect(&extremal_gram(false)), rat(25, 12));
    }

    #[test]
    fn hermite_invariant_examples() {
        assert_eq!(
            hermite_invariant_power(&GramMatrix::identity(2)).unwrap(),
            unit()
        );
        assert_eq!(hermite_invariant_power(&a2_gram()).unwrap(), rat(4, 3));
        assert_eq!(
            hermite_invariant_power(&a2_gram()).unwrap(),
            hermite_constant_power(2).unwrap()
        );
        let e = hermite_invariant_power(&extremal_gram(true)).unwrap();
        assert_eq!(e, rat(4, 3));
        assert!(e < hermite_constant_power(3).unwrap());
    }

    #[test]
    fn hermite_constant_table() {
        assert_eq!(hermite_constant_power(1).unwrap(), unit());
        assert_eq!(hermite_constant_power(2).unwrap(), rat(4, 3));
        assert_eq!(hermite_constant_power(3).unwrap(), int(2));
        assert_eq!(hermite_constant_power(8).unwrap(), int(256));
        assert_eq!(
            hermite_constant_power(9),
            Err(Error::HermiteConstantUnknown(9))
        );
        assert!(hermite_constant_power(0).is_err());
    }

    #[test]
    fn classical_bound_values() {
        assert_eq!(lls_bound(1).unwrap(), unit());
        assert_eq!(lls_bound(3).unwrap(), rat(15, 4));
        assert_eq!(lls_bound(4).unwrap(), rat(105, 8));
        assert!(lls_bound(9).is_err());
    }

    #[test]
    fn sharpened_bound_values() {
        assert_eq!(new_bound(4).unwrap(), rat(1325, 288));
        assert_eq!(new_bound(5).unwrap(), rat(78175, 5184));
        assert!(new_bound(4).unwrap() < lls_bound(4).unwrap());
        assert!(new_bound(11).is_ok());
        assert_eq!(new_bound(12), Err(Error::HermiteConstantUnknown(9)));
        assert!(matches!(
            new_bound(3),
            Err(Error::BoundNotApplicable { .. })
        ));
    }

    #[test]
    fn exact_maxima() {
        assert_eq!(delta_exact(1).unwrap(), unit());
        assert_eq!(delta_exact(2).unwrap(), rat(4, 3));
        assert_eq!(delta_exact(3).unwrap(), rat(25, 12));
        assert_eq!(delta_exact(4), Err(Error::ExactValueConjectural(4)));
    }

    #[test]
    fn table_rows() {
        let t = bound_table(3).unwrap();
        let d: Vec<Rat> = t.iter().map(|r| r.delta_exact.clone().unwrap()).collect();
        assert_eq!(d, vec![unit(), rat(4, 3), rat(25, 12)]);
        assert!(t.iter().all(|r| r.new_bound.is_none()));

        let t = bound_table(4).unwrap();
        assert_eq!(t[3].new_bound, Some(rat(1325, 288)));
        assert_eq!(t[3].new_is_sharper(), Some(true));
        assert!(t[3].delta_exact.is_none());

        assert_eq!(bound_table(1).unwrap().len(), 1);
        assert!(bound_table(9).is_err());
    }

    #[test]
    fn sharper_through_rank_eight() {
        for row in bound_table(8).unwrap().iter().filter(|r| r.n >= 4) {
            assert_eq!(row.new_is_sharper(), Some(true), "n = {}", row.n);
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_bound_csv(&bound_table(4).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,gamma_pow,lls_bound,new_bound,delta_exact");
        assert_eq!(lines[3], "3,2,15/4,,25/12");
        assert_eq!(lines[4], "4,4,105/8,1325/288,");
    }

    #[test]
    fn json_round_trips_exact_strings() {
        let v = bound_table_json(&bound_table(4).unwrap());
        let s = v[3]["new_bound"]["exact"].as_str().unwrap();
        assert_eq!(crate::rational::parse_rat(s).unwrap(), rat(1325, 288));
        assert_eq!(
            v[3]["new_bound"]["decimal"].as_f64().unwrap(),
            4.60069444444
        );
    }
}
