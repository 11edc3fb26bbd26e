//! The four quadratics in `sigma` and their grid scans.
//!
//! For fixed `(lambda, mu)` each case reduces "the defect bound reaches
//! 25/12" to `a sigma^2 + b sigma + c >= 0`. A scan evaluates the quadratic
//! exactly at every grid point of the case region and records strict
//! positives (violations) and exact zeros (equality points).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, rat, serde_rat, to_f64, Rat};

use super::{defect_from_parameters, CasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CaseId {
    /// `sigma <= -1/3`, `k` at its lower end `1 - lambda^2`.
    #[serde(rename = "NEG_KMIN")]
    NegKmin,
    /// `sigma <= -1/3`, `k` at its upper end `D / (2(1+sigma))`.
    #[serde(rename = "NEG_KMAX")]
    NegKmax,
    /// `sigma >= 1/3`, `k = 1 - lambda^2`.
    #[serde(rename = "POS_KMIN")]
    PosKmin,
    /// `sigma >= 1/3`, `k = E / (2(1-sigma))`.
    #[serde(rename = "POS_KMAX")]
    PosKmax,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [
        CaseId::NegKmin,
        CaseId::NegKmax,
        CaseId::PosKmin,
        CaseId::PosKmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::NegKmin => "NEG_KMIN",
            CaseId::NegKmax => "NEG_KMAX",
            CaseId::PosKmin => "POS_KMIN",
            CaseId::PosKmax => "POS_KMAX",
        }
    }

    pub fn negative_sigma(self) -> bool {
        matches!(self, CaseId::NegKmin | CaseId::NegKmax)
    }

    /// Closed `sigma` interval scanned for this case.
    pub fn sigma_range(self) -> (Rat, Rat) {
        if self.negative_sigma() {
            (rat(-1, 2), rat(-1, 3))
        } else {
            (rat(1, 3), rat(1, 2))
        }
    }

    /// Grid points where the quadratic is allowed to vanish: the extremal
    /// form, `lambda = mu = 1/2` with `sigma = ∓1/2`.
    pub fn documented_equality_points(self) -> Vec<(Rat, Rat, Rat)> {
        let h = rat(1, 2);
        match self {
            CaseId::NegKmax => vec![(h.clone(), h.clone(), -h)],
            CaseId::PosKmax => vec![(h.clone(), h.clone(), h)],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!(
                    "unknown case {s:?}; expected one of NEG_KMIN, NEG_KMAX, POS_KMIN, POS_KMAX"
                )
            })
    }
}

/// `a sigma^2 + b sigma + c` at a fixed `(lambda, mu)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadraticCase {
    pub case_id: CaseId,
    #[serde(with = "serde_rat")]
    pub a: Rat,
    #[serde(with = "serde_rat")]
    pub b: Rat,
    #[serde(with = "serde_rat")]
    pub c: Rat,
}

impl QuadraticCase {
    pub fn eval(&self, sigma: &Rat) -> Rat {
        (&self.a * sigma + &self.b) * sigma + &self.c
    }

    /// Real roots `(r-, r+)` in floating point, if any.
    pub fn roots(&self) -> Option<(f64, f64)> {
        let (a, b, c) = (to_f64(&self.a), to_f64(&self.b), to_f64(&self.c));
        if a == 0.0 {
            return (b != 0.0).then(|| (-c / b, -c / b));
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let (r1, r2) = ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a));
        Some((r1.min(r2), r1.max(r2)))
    }
}

/// Whether `(lambda, mu)` lies in the admissible region of `case`.
///
/// NEG_KMIN needs `mu >= 1 + lambda - sqrt(lambda^2 + 2 lambda)`, tested as
/// `(1 + lambda - mu)^2 <= lambda^2 + 2 lambda`; both sides are rational and
/// `1 + lambda - mu >= 0` on the box. POS_KMIN needs `mu <= 2 lambda`.
pub fn in_region(case: CaseId, lambda: &Rat, mu: &Rat) -> bool {
    let zero = Rat::zero();
    let half = rat(1, 2);
    let in_box = *lambda >= zero && *lambda <= half && *mu >= zero && *mu <= half;
    if !in_box {
        return false;
    }
    match case {
        CaseId::NegKmin => {
            let t = Rat::one() + lambda - mu;
            &t * &t <= lambda * lambda + lambda * rat(2, 1)
        }
        CaseId::PosKmin => *mu <= lambda * rat(2, 1),
        CaseId::NegKmax | CaseId::PosKmax => true,
    }
}

/// Coefficients `(a, b, c)` of the case quadratic at `(lambda, mu)`, with no
/// region check.
pub fn coefficients(case: CaseId, lambda: &Rat, mu: &Rat) -> (Rat, Rat, Rat) {
    let l = lambda;
    let m = mu;
    let r = |p: i64, q: i64| rat(p, q);
    match case {
        CaseId::NegKmin | CaseId::PosKmin => {
            let s = Rat::one() - l * l;
            let lin = if case == CaseId::NegKmin {
                Rat::one() - l - m
            } else {
                l - m
            };
            let lin2 = &lin * &lin;
            let a = r(25, 12) * &s * &s;
            let b_abs = r(25, 6) * &s * &s - r(2, 1) * &s;
            let b = if case == CaseId::NegKmin {
                b_abs
            } else {
                -b_abs
            };
            let c = Rat::one() - &lin2 - r(37, 12) * &s
                + m * m
                + r(25, 12) * &s * &lin2
                + r(25, 12) * &s * &s;
            (a, b, c)
        }
        CaseId::NegKmax => {
            let (l2, m2) = (l * l, m * m);
            let (l3, m3) = (&l2 * l, &m2 * m);
            let (l4, m4) = (&l2 * &l2, &m2 * &m2);
            let lm = l * m;
            let a = (r(25, 1) * &l4
                + r(100, 1) * &l3 * m
                + r(198, 1) * &l2 * &m2
                + r(100, 1) * l * &m3
                + r(25, 1) * &m4
                - r(100, 1) * &l3
                - r(300, 1) * &l2 * m
                - r(300, 1) * l * &m2
                - r(100, 1) * &m3
                + r(100, 1) * &l2
                + r(200, 1) * &lm
                + r(100, 1) * &m2)
                / r(12, 1);
            let b = r(-2, 1)
                * (&l4 + r(2, 1) * &l3 * m - r(2, 1) * &l2 * &m2 + r(2, 1) * l * &m3 + &m4
                    - r(2, 1) * &l3
                    - r(2, 1) * &l2 * m
                    - r(2, 1) * l * &m2
                    - r(2, 1) * &m3);
            let c = -r(37, 12) * &l4
                - r(25, 3) * &l3 * m
                - r(13, 2) * &l2 * &m2
                - r(25, 3) * l * &m3
                - r(37, 12) * &m4
                + r(25, 3) * &l3
                + r(17, 1) * &l2 * m
                + r(17, 1) * l * &m2
                + r(25, 3) * &m3
                - r(13, 3) * &l2
                - r(26, 3) * &lm
                - r(13, 3) * &m2;
            (a, b, c)
        }
        CaseId::PosKmax => {
            let (l2, m2) = (l * l, m * m);
            let (l3, m3) = (&l2 * l, &m2 * m);
            let (l4, m4) = (&l2 * &l2, &m2 * &m2);
            let lm = l * m;
            let a = (r(25, 1) * &l4 - r(100, 1) * &l3 * m + r(198, 1) * &l2 * &m2
                - r(100, 1) * l * &m3
                + r(25, 1) * &m4
                - r(50, 1) * &l2
                + r(100, 1) * &lm
                - r(50, 1) * &m2
                + r(25, 1))
                / r(12, 1);
            let b = r(2, 1)
                * (&l4 - r(2, 1) * &l3 * m - r(2, 1) * &l2 * &m2 - r(2, 1) * l * &m3 + &m4
                    - &l2
                    - &m2);
            let c = -r(37, 12) * &l4 + r(25, 3) * &l3 * m - r(13, 2) * &l2 * &m2
                + r(25, 3) * l * &m3
                - r(37, 12) * &m4
                + r(25, 6) * &l2
                - r(13, 3) * &lm
                + r(25, 6) * &m2
                - r(13, 12);
            (a, b, c)
        }
    }
}

pub fn case_quadratic(case: CaseId, lambda: &Rat, mu: &Rat) -> Result<QuadraticCase> {
    if !in_region(case, lambda, mu) {
        return Err(Error::OutsideRegion(format!(
            "{case}: (lambda, mu) = ({}, {})",
            fmt_rat(lambda),
            fmt_rat(mu)
        )));
    }
    let (a, b, c) = coefficients(case, lambda, mu);
    Ok(QuadraticCase {
        case_id: case,
        a,
        b,
        c,
    })
}

/// The `(k, l)` pair each case substitutes into the defect formula.
///
/// KMIN cases take `k = 1 - lambda^2` and `l` from the tight lattice
/// inequality; KMAX cases take `k` at the case boundary, where
/// `l = k (1 - sigma^2)`. Returns `None` when `k` or `l` is not positive,
/// i.e. the point is degenerate for the case.
pub fn case_parameters(case: CaseId, lambda: &Rat, mu: &Rat, sigma: &Rat) -> Option<CasePoint> {
    let one = Rat::one();
    let sq = |x: &Rat| x * x;
    let (k, l) = match case {
        CaseId::NegKmin => {
            let k = &one - sq(lambda);
            let l = &one - sq(&(&one - lambda - mu)) - &k * sq(&(&one + sigma));
            (k, l)
        }
        CaseId::PosKmin => {
            let k = &one - sq(lambda);
            let l = &one - sq(&(lambda - mu)) - &k * sq(&(&one - sigma));
            (k, l)
        }
        CaseId::NegKmax => {
            let d = &one - sq(&(&one - lambda - mu));
            let k = &d / (rat(2, 1) * (&one + sigma));
            let l = rat(1, 2) * (&one - sigma) * &d;
            (k, l)
        }
        CaseId::PosKmax => {
            let e = &one - sq(&(lambda - mu));
            let k = &e / (rat(2, 1) * (&one - sigma));
            let l = rat(1, 2) * (&one + sigma) * &e;
            (k, l)
        }
    };
    if !k.is_positive() || !l.is_positive() {
        return None;
    }
    Some(CasePoint::unchecked(
        lambda.clone(),
        mu.clone(),
        sigma.clone(),
        k,
        l,
    ))
}

/// The case's upper-bound expression for the defect, from the defect
/// formula at [`case_parameters`].
pub fn bound_expression(case: CaseId, lambda: &Rat, mu: &Rat, sigma: &Rat) -> Option<Rat> {
    case_parameters(case, lambda, mu, sigma).map(|p| defect_from_parameters(&p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseScanReport {
    pub case_id: CaseId,
    #[serde(with = "serde_rat")]
    pub grid_step: Rat,
    pub points_checked: u64,
    /// `(lambda, mu)` grid cells inside the case region.
    pub region_cells: u64,
    /// Points skipped because the case's `k` or `l` is not positive there.
    pub degenerate_points: u64,
    #[serde(with = "serde_rat")]
    pub max_value: Rat,
    pub argmax: CasePoint,
    pub equality_points: Vec<CasePoint>,
    pub violations: Vec<CasePoint>,
    /// Floating-point roots `(r-, r+)` of the quadratic at the argmax cell.
    pub roots_at_argmax: Option<(f64, f64)>,
    #[serde(with = "serde_rat")]
    pub min_lambda_visited: Rat,
    pub wall_time_ms: u128,
}

impl CaseScanReport {
    pub fn unexpected_equalities(&self) -> Vec<&CasePoint> {
        let documented = self.case_id.documented_equality_points();
        self.equality_points
            .iter()
            .filter(|p| {
                !documented
                    .iter()
                    .any(|(l, m, s)| *l == p.lambda && *m == p.mu && *s == p.sigma)
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.unexpected_equalities().is_empty()
    }
}

/// `(1/2) / step` when it is a positive integer.
pub fn grid_divisions(step: &Rat) -> Result<u64> {
    if !step.is_positive() {
        return Err(Error::InvalidStep(fmt_rat(step)));
    }
    let q = rat(1, 2) / step;
    if !q.is_integer() {
        return Err(Error::InvalidStep(fmt_rat(step)));
    }
    u64::try_from(q.to_integer()).map_err(|_| Error::InvalidStep(fmt_rat(step)))
}

/// Multiples of `step` inside `[lo, hi]`, plus both endpoints.
pub(crate) fn sigma_grid(lo: &Rat, hi: &Rat, step: &Rat) -> Vec<Rat> {
    let mut out = vec![lo.clone()];
    let first = (lo / step).ceil().to_integer();
    let mut i = first;
    loop {
        let s = Rat::from_integer(i.clone()) * step;
        if s > *hi {
            break;
        }
        if s != *lo && s != *hi {
            out.push(s);
        }
        i += 1;
    }
    out.push(hi.clone());
    out
}

#[derive(Default)]
struct Partial {
    points: u64,
    cells: u64,
    degenerate: u64,
    best: Option<(Rat, CasePoint)>,
    equalities: Vec<CasePoint>,
    violations: Vec<CasePoint>,
    min_lambda: Option<Rat>,
}

impl Partial {
    fn offer(&mut self, value: &Rat, point: &CasePoint) {
        let replace = match &self.best {
            None => true,
            Some((v, p)) => value > v || (value == v && point.key() < p.key()),
        };
        if replace {
            self.best = Some((value.clone(), point.clone()));
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.points += other.points;
        self.cells += other.cells;
        self.degenerate += other.degenerate;
        if let Some((v, p)) = other.best {
            self.offer(&v, &p);
        }
        self.equalities.extend(other.equalities);
        self.violations.extend(other.violations);
        self.min_lambda = match (self.min_lambda, other.min_lambda) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Scans `case` over its region with the displayed coefficients.
pub fn scan_case(case: CaseId, grid_step: &Rat) -> Result<CaseScanReport> {
    scan_case_with(case, grid_step, |l, m| coefficients(case, l, m))
}

/// Scans `case` with caller-supplied coefficients (used for negative
/// controls). The grid covers `lambda, mu` in multiples of `grid_step` on
/// `[0, 1/2]` and `sigma` over the case interval.
pub fn scan_case_with<F>(case: CaseId, grid_step: &Rat, coeffs: F) -> Result<CaseScanReport>
where
    F: Fn(&Rat, &Rat) -> (Rat, Rat, Rat) + Sync,
{
    let started = Instant::now();
    let n = grid_divisions(grid_step)?;
    let (lo, hi) = case.sigma_range();
    let sigmas = sigma_grid(&lo, &hi, grid_step);

    let total = (0..=n)
        .into_par_iter()
        .map(|i| {
            let lambda = Rat::from_integer(i.into()) * grid_step;
            let mut part = Partial::default();
            for j in 0..=n {
                let mu = Rat::from_integer(j.into()) * grid_step;
                if !in_region(case, &lambda, &mu) {
                    continue;
                }
                part.cells += 1;
                part.min_lambda = Some(match part.min_lambda.take() {
                    Some(m) => m.min(lambda.clone()),
                    None => lambda.clone(),
                });
                let (a, b, c) = coeffs(&lambda, &mu);
                let q = QuadraticCase {
                    case_id: case,
                    a,
                    b,
                    c,
                };
                for sigma in &sigmas {
                    let Some(point) = case_parameters(case, &lambda, &mu, sigma) else {
                        part.degenerate += 1;
                        continue;
                    };
                    part.points += 1;
                    let value = q.eval(sigma);
                    if value.is_positive() {
                        part.violations.push(point.clone());
                    } else if value.is_zero() {
                        part.equalities.push(point.clone());
                    }
                    part.offer(&value, &point);
                }
            }
            part
        })
        .reduce(Partial::default, Partial::merge);

    let (max_value, argmax) = total.best.ok_or_else(|| {
        Error::OutsideRegion(format!(
            "{case}: no admissible grid point at step {}",
            fmt_rat(grid_step)
        ))
    })?;
    let (a, b, c) = coeffs(&argmax.lambda, &argmax.mu);
    let roots = QuadraticCase {
        case_id: case,
        a,
        b,
        c,
    }
    .roots();

    let mut equality_points = total.equalities;
    equality_points.sort_by(|x, y| x.key().cmp(&y.key()));
    let mut violations = total.violations;
    violations.sort_by(|x, y| x.key().cmp(&y.key()));

    Ok(CaseScanReport {
        case_id: case,
        grid_step: grid_step.clone(),
        points_checked: total.points,
        region_cells: total.cells,
        degenerate_points: total.degenerate,
        max_value,
        argmax,
        equality_points,
        violations,
        roots_at_argmax: roots,
        min_lambda_visited: total.min_lambda.unwrap_or_default(),
        wall_time_ms: started.elapsed().as_millis(),
    })
}

/// Outcome of comparing `sign(Q)` with `sign(bound - 25/12)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub case_id: CaseId,
    pub samples: u64,
    pub mismatches: Vec<CasePoint>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.samples > 0 && self.mismatches.is_empty()
    }
}

/// Draws `samples` non-degenerate grid points of `case` at `grid_step` and
/// checks that the quadratic and the defect bound expression agree on which
/// side of 25/12 the point lies.
pub fn consistency_check(
    case: CaseId,
    grid_step: &Rat,
    samples: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    let n = grid_divisions(grid_step)?;
    let (lo, hi) = case.sigma_range();
    let sigmas = sigma_grid(&lo, &hi, grid_step);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rat(25, 12);
    let mut report = ConsistencyReport {
        case_id: case,
        samples: 0,
        mismatches: Vec::new(),
    };
    let mut attempts = 0usize;
    while (report.samples as usize) < samples {
        attempts += 1;
        if attempts > samples * 1000 {
            return Err(Error::InvalidConfig(format!(
                "{case}: too few admissible grid points at step {}",
                fmt_rat(grid_step)
            )));
        }
        let lambda = Rat::from_integer(rng.gen_range(0..=n).into()) * grid_step;
        let mu = Rat::from_integer(rng.gen_range(0..=n).into()) * grid_step;
        let sigma = &sigmas[rng.gen_range(0..sigmas.len())];
        if !in_region(case, &lambda, &mu) {
            continue;
        }
        let Some(point) = case_parameters(case, &lambda, &mu, sigma) else {
            continue;
        };
        report.samples += 1;
        let (a, b, c) = coefficients(case, &lambda, &mu);
        let q = QuadraticCase {
            case_id: case,
            a,
            b,
            c,
        }
        .eval(sigma);
        let bound = defect_from_parameters(&point);
        if q.signum() != (bound - &target).signum() {
            report.mismatches.push(point);
        }
    }
    Ok(report)
}
