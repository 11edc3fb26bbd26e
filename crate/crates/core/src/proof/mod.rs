//! Exact re-verification of the rank-3 defect analysis.
//!
//! A rank-3 basis with `|b_1|^2 = 1` is described by `lambda = mu_21`,
//! `mu = mu_31`, `sigma = mu_32`, `k = |b_2*|^2` and `l = |b_3*|^2`, with
//! defect `(1 + lambda^2/k)(1 + (mu^2 + k sigma^2)/l)`. The checks here cover
//! the HKZ inequality system, the small-`|sigma|` corner bound, the four
//! quadratic cases, convexity in `k` and the extremal form.
//!
//! Case scans evaluate exactly at grid points only. They are a grid check,
//! not an interval proof: nothing is claimed between grid points.

mod convexity;
mod quadratics;

use std::time::Instant;

use num::{One, Signed};
use serde::Serialize;

use crate::bounds::orthogonality_defect;
use crate::error::{Error, Result};
use crate::lattice::{extremal_gram, GramMatrix};
use crate::rational::{fmt_rat, int, rat, serde_rat, Rat};
use crate::reduction::{is_hkz_reduced, InequalityCheck};

pub use convexity::{
    convexity_certificate, convexity_numerator, convexity_sample, displayed_numerator,
    k_curve_second_derivative, k_curve_value, ConvexityCertificate, ConvexitySample,
    DisplayAgreement, DisplayForm, KCurve, DERIVATIVE_TOLERANCE, FLOAT_DIFFERENCE_FLOOR,
};
pub use quadratics::{
    bound_expression, case_parameters, case_quadratic, consistency_check, grid_divisions,
    in_region, scan_case, scan_case_with, CaseId, CaseScanReport, ConsistencyReport, QuadraticCase,
};

pub use quadratics::coefficients as quadratic_coefficients;

/// Normalized rank-3 parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CasePoint {
    #[serde(with = "serde_rat")]
    pub lambda: Rat,
    #[serde(with = "serde_rat")]
    pub mu: Rat,
    #[serde(with = "serde_rat")]
    pub sigma: Rat,
    #[serde(with = "serde_rat")]
    pub k: Rat,
    #[serde(with = "serde_rat")]
    pub l: Rat,
}

impl CasePoint {
    /// Checks `lambda, mu` in `[0, 1/2]`, `sigma` in `[-1/2, 1/2]` and
    /// `k, l > 0`.
    pub fn new(lambda: Rat, mu: Rat, sigma: Rat, k: Rat, l: Rat) -> Result<Self> {
        let half = rat(1, 2);
        let bad =
            |what: &str, v: &Rat| Err(Error::OutsideRegion(format!("{what} = {}", fmt_rat(v))));
        if lambda.is_negative() || lambda > half {
            return bad("lambda", &lambda);
        }
        if mu.is_negative() || mu > half {
            return bad("mu", &mu);
        }
        if sigma.abs() > half {
            return bad("sigma", &sigma);
        }
        if !k.is_positive() {
            return bad("k", &k);
        }
        if !l.is_positive() {
            return bad("l", &l);
        }
        Ok(Self::unchecked(lambda, mu, sigma, k, l))
    }

    pub(crate) fn unchecked(lambda: Rat, mu: Rat, sigma: Rat, k: Rat, l: Rat) -> Self {
        Self {
            lambda,
            mu,
            sigma,
            k,
            l,
        }
    }

    /// Reads the parameters off a rank-3 Gram matrix, scaling `|b_1|^2` to 1
    /// and flipping `b_2`, `b_3` so that `lambda, mu >= 0`.
    pub fn from_gram(g: &GramMatrix) -> Result<Self> {
        if g.rank() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: g.rank(),
            });
        }
        let gso = g.ldl();
        let b1 = &gso.bstar[0];
        let mut lambda = gso.mu[1][0].clone();
        let mut mu = gso.mu[2][0].clone();
        let mut sigma = gso.mu[2][1].clone();
        if lambda.is_negative() {
            lambda = -lambda;
            sigma = -sigma;
        }
        if mu.is_negative() {
            mu = -mu;
            sigma = -sigma;
        }
        Self::new(lambda, mu, sigma, &gso.bstar[1] / b1, &gso.bstar[2] / b1)
    }

    /// Gram matrix with `|b_1|^2 = 1` realizing these parameters.
    pub fn to_gram(&self) -> GramMatrix {
        let (l, m, s, k) = (&self.lambda, &self.mu, &self.sigma, &self.k);
        let one = Rat::one();
        let entries = vec![
            vec![one.clone(), l.clone(), m.clone()],
            vec![l.clone(), l * l + k, l * m + k * s],
            vec![m.clone(), l * m + k * s, m * m + k * s * s + &self.l],
        ];
        GramMatrix::new(entries).expect("k, l > 0 gives a positive definite form")
    }

    pub(crate) fn key(&self) -> (&Rat, &Rat, &Rat) {
        (&self.lambda, &self.mu, &self.sigma)
    }
}

/// `(1 + lambda^2/k)(1 + (mu^2 + k sigma^2)/l)`.
pub fn defect_from_parameters(p: &CasePoint) -> Rat {
    let first = Rat::one() + &p.lambda * &p.lambda / &p.k;
    let second = Rat::one() + (&p.mu * &p.mu + &p.k * &p.sigma * &p.sigma) / &p.l;
    first * second
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityReport {
    /// Inequalities 1 to 5, each as `lhs <= rhs`.
    pub primary: Vec<InequalityCheck>,
    /// Inequalities 6 to 8; filled only when 1 to 5 hold.
    pub derived: Vec<InequalityCheck>,
    /// 1-based index of the first failing inequality.
    pub first_violation: Option<usize>,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Evaluates the HKZ inequality system at `p`:
///
/// 1. `k + lambda^2 >= 1`
/// 2. `l + k sigma^2 + mu^2 >= 1`
/// 3. `l + k (1+sigma)^2 + (1-lambda-mu)^2 >= 1`
/// 4. `l + k (1-sigma)^2 + (lambda-mu)^2 >= 1`
/// 5. `l + k sigma^2 >= k`
///
/// and, when those hold, the consequences `k <= l/(1-sigma^2)`,
/// `lambda^2 >= 1 - l/(1-sigma^2)` and `mu^2 >= 1 - l/(1-sigma^2)`.
pub fn check_hkz_inequalities(p: &CasePoint) -> Result<InequalityReport> {
    let one = Rat::one();
    let s2 = &p.sigma * &p.sigma;
    if s2 == one {
        return Err(Error::OutsideRegion("sigma^2 = 1".into()));
    }
    let sq = |x: Rat| &x * &x;
    let ks2 = &p.k * &s2;
    let primary = vec![
        InequalityCheck::new(
            "k + lambda^2 >= 1",
            1,
            one.clone(),
            &p.k + sq(p.lambda.clone()),
        ),
        InequalityCheck::new(
            "l + k sigma^2 + mu^2 >= 1",
            2,
            one.clone(),
            &p.l + &ks2 + sq(p.mu.clone()),
        ),
        InequalityCheck::new(
            "l + k(1+sigma)^2 + (1-lambda-mu)^2 >= 1",
            3,
            one.clone(),
            &p.l + &p.k * sq(&one + &p.sigma) + sq(&one - &p.lambda - &p.mu),
        ),
        InequalityCheck::new(
            "l + k(1-sigma)^2 + (lambda-mu)^2 >= 1",
            4,
            one.clone(),
            &p.l + &p.k * sq(&one - &p.sigma) + sq(&p.lambda - &p.mu),
        ),
        InequalityCheck::new("l + k sigma^2 >= k", 5, p.k.clone(), &p.l + &ks2),
    ];
    let mut first_violation = primary.iter().find(|c| !c.holds).map(|c| c.index);
    let mut derived = Vec::new();
    if first_violation.is_none() {
        let cap = &p.l / (&one - &s2);
        derived = vec![
            InequalityCheck::new("k <= l/(1-sigma^2)", 6, p.k.clone(), cap.clone()),
            InequalityCheck::new(
                "lambda^2 >= 1 - l/(1-sigma^2)",
                7,
                &one - &cap,
                sq(p.lambda.clone()),
            ),
            InequalityCheck::new(
                "mu^2 >= 1 - l/(1-sigma^2)",
                8,
                &one - &cap,
                sq(p.mu.clone()),
            ),
        ];
        first_violation = derived.iter().find(|c| !c.holds).map(|c| c.index);
    }
    Ok(InequalityReport {
        primary,
        derived,
        first_violation,
    })
}

/// `(1 + 1/(4k))(9/8 + 1/(4l))`, the bound used when `|sigma| <= 1/3`.
pub fn small_sigma_value(k: &Rat, l: &Rat) -> Rat {
    (Rat::one() + Rat::one() / (int(4) * k)) * (rat(9, 8) + Rat::one() / (int(4) * l))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmallSigmaReport {
    #[serde(with = "serde_rat")]
    pub corner_value: Rat,
    /// Interior samples `k = 3/4 + i/8`, `l = 2/3 + j/8`, `(i, j) != (0, 0)`.
    pub interior_samples: u64,
    #[serde(with = "serde_rat")]
    pub interior_max: Rat,
    /// Each sample decreases when `k` or `l` grows by 1/8.
    pub monotone: bool,
    /// Parameter points with `|sigma| <= 1/3`, `k >= 3/4`, `l >= 2/3`
    /// satisfying inequalities 1 to 5.
    pub parameter_points: u64,
    /// Points whose defect exceeds the corner bound.
    pub parameter_failures: Vec<CasePoint>,
    pub passed: bool,
}

/// Confirms the corner value 2 at `k = 3/4, l = 2/3`, that sampled interior
/// points are strictly smaller, and that the defect stays below the bound on
/// a grid of admissible parameters.
pub fn verify_small_sigma_bound() -> SmallSigmaReport {
    let k0 = rat(3, 4);
    let l0 = rat(2, 3);
    let corner_value = small_sigma_value(&k0, &l0);
    let step = rat(1, 8);

    let mut interior_samples = 0;
    let mut interior_max: Option<Rat> = None;
    let mut monotone = true;
    for i in 0..=8 {
        for j in 0..=8 {
            let k = &k0 + rat(i, 8);
            let l = &l0 + rat(j, 8);
            let v = small_sigma_value(&k, &l);
            monotone &= small_sigma_value(&(&k + &step), &l) < v;
            monotone &= small_sigma_value(&k, &(&l + &step)) < v;
            if i == 0 && j == 0 {
                continue;
            }
            interior_samples += 1;
            if interior_max.as_ref().map_or(true, |m| v > *m) {
                interior_max = Some(v);
            }
        }
    }
    let interior_max = interior_max.expect("samples exist");

    let mut parameter_points = 0;
    let mut parameter_failures = Vec::new();
    let ks = [rat(3, 4), int(1), rat(5, 4), rat(3, 2)];
    let ls = [rat(2, 3), rat(3, 4), int(1), rat(5, 4), rat(3, 2)];
    for a in 0..=4 {
        for b in 0..=4 {
            for s in -4..=4 {
                for k in &ks {
                    for l in &ls {
                        let p = CasePoint::unchecked(
                            rat(a, 8),
                            rat(b, 8),
                            rat(s, 12),
                            k.clone(),
                            l.clone(),
                        );
                        let holds = check_hkz_inequalities(&p)
                            .map(|r| r.all_hold())
                            .unwrap_or(false);
                        if !holds {
                            continue;
                        }
                        parameter_points += 1;
                        let bound = small_sigma_value(k, l);
                        if defect_from_parameters(&p) > bound || bound > corner_value {
                            parameter_failures.push(p);
                        }
                    }
                }
            }
        }
    }

    let passed = corner_value == int(2)
        && interior_max < corner_value
        && monotone
        && parameter_points > 0
        && parameter_failures.is_empty();
    SmallSigmaReport {
        corner_value,
        interior_samples,
        interior_max,
        monotone,
        parameter_points,
        parameter_failures,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalVariant {
    pub label: String,
    pub gram: GramMatrix,
    pub hkz_reduced: bool,
    #[serde(with = "serde_rat")]
    pub defect: Rat,
    pub parameters: CasePoint,
    #[serde(with = "serde_rat")]
    pub defect_from_parameters: Rat,
    pub inequalities_hold: bool,
}

impl ExtremalVariant {
    pub fn passed(&self) -> bool {
        let target = rat(25, 12);
        self.hkz_reduced
            && self.defect == target
            && self.defect_from_parameters == target
            && self.inequalities_hold
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalReport {
    pub variants: Vec<ExtremalVariant>,
    pub passed: bool,
}

/// Checks both sign variants of the extremal form and a scaled copy: each
/// is HKZ-reduced with defect exactly 25/12.
pub fn verify_extremal_form() -> Result<ExtremalReport> {
    let grams = [
        ("+", extremal_gram(true)),
        ("-", extremal_gram(false)),
        ("+ scaled by 4", extremal_gram(true).scaled(&int(4))?),
    ];
    let mut variants = Vec::new();
    for (label, gram) in grams {
        let parameters = CasePoint::from_gram(&gram)?;
        let inequalities_hold = check_hkz_inequalities(&parameters)?.all_hold();
        variants.push(ExtremalVariant {
            label: label.to_string(),
            hkz_reduced: is_hkz_reduced(&gram).is_reduced(),
            defect: orthogonality_defect(&gram),
            defect_from_parameters: defect_from_parameters(&parameters),
            parameters,
            inequalities_hold,
            gram,
        });
    }
    let passed = variants.iter().all(ExtremalVariant::passed);
    Ok(ExtremalReport { variants, passed })
}

/// Everything checked by [`verify_all`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofCertificate {
    #[serde(with = "serde_rat")]
    pub grid_step: Rat,
    pub cases: Vec<CaseScanReport>,
    pub consistency: Vec<ConsistencyReport>,
    pub small_sigma: SmallSigmaReport,
    pub convexity: Vec<ConvexityCertificate>,
    pub extremal: ExtremalReport,
    pub passed: bool,
    pub wall_time_ms: u128,
    pub note: &'static str,
}

pub const GRID_NOTE: &str = "exact evaluation at grid points only; this is a grid check at the \
stated step, not an interval proof over the continuous region";

/// Samples per case in the quadratic/bound consistency check.
pub const CONSISTENCY_SAMPLES: usize = 100;
/// Points per axis in the convexity sample.
pub const CONVEXITY_GRID: usize = 10;

/// Runs the case scans for `cases` at `grid_step`, plus the consistency,
/// small-sigma, convexity and extremal-form checks.
pub fn verify_all(grid_step: &Rat, cases: &[CaseId]) -> Result<ProofCertificate> {
    verify_all_with(grid_step, cases, |case, l, m| {
        quadratic_coefficients(case, l, m)
    })
}

/// [`verify_all`] with caller-supplied quadratic coefficients.
pub fn verify_all_with<F>(grid_step: &Rat, cases: &[CaseId], coeffs: F) -> Result<ProofCertificate>
where
    F: Fn(CaseId, &Rat, &Rat) -> (Rat, Rat, Rat) + Sync,
{
    let started = Instant::now();
    let mut scans = Vec::new();
    let mut consistency = Vec::new();
    for (i, &case) in cases.iter().enumerate() {
        scans.push(scan_case_with(case, grid_step, |l, m| coeffs(case, l, m))?);
        consistency.push(consistency_check(
            case,
            grid_step,
            CONSISTENCY_SAMPLES,
            i as u64,
        )?);
    }
    let small_sigma = verify_small_sigma_bound();
    let convexity: Vec<_> = KCurve::ALL
        .into_iter()
        .map(|c| convexity_certificate(c, CONVEXITY_GRID))
        .collect();
    let extremal = verify_extremal_form()?;
    let passed = scans.iter().all(CaseScanReport::passed)
        && consistency.iter().all(ConsistencyReport::passed)
        && small_sigma.passed
        && convexity.iter().all(ConvexityCertificate::passed)
        && extremal.passed;
    Ok(ProofCertificate {
        grid_step: grid_step.clone(),
        cases: scans,
        consistency,
        small_sigma,
        convexity,
        extremal,
        passed,
        wall_time_ms: started.elapsed().as_millis(),
        note: GRID_NOTE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn point(l: Rat, m: Rat, s: Rat, k: Rat, ll: Rat) -> CasePoint {
        CasePoint::new(l, m, s, k, ll).unwrap()
    }

    fn extremal_point() -> CasePoint {
        let h = rat(1, 2);
        point(h.clone(), h.clone(), h, int(1), rat(3, 4))
    }

    #[test]
    fn inequality_examples() {
        let r = check_hkz_inequalities(&extremal_point()).unwrap();
        assert!(r.all_hold());
        assert!(r.primary[4].tight);
        assert_eq!(r.derived.len(), 3);

        let zero = Rat::zero();
        let p = point(zero.clone(), zero.clone(), zero.clone(), int(1), int(1));
        assert!(check_hkz_inequalities(&p).unwrap().all_hold());

        let p = point(zero.clone(), zero.clone(), zero, int(1), rat(1, 2));
        let r = check_hkz_inequalities(&p).unwrap();
        // l < k breaks 5; with mu = sigma = 0 it also breaks 2, which comes first.
        assert!(!r.primary[4].holds);
        assert_eq!(r.first_violation, Some(2));
        assert!(r.derived.is_empty());
    }

    #[test]
    fn unit_sigma_is_rejected() {
        let p = CasePoint::unchecked(Rat::zero(), Rat::zero(), int(1), int(1), int(1));
        assert!(check_hkz_inequalities(&p).is_err());
    }

    #[test]
    fn case_point_ranges() {
        assert!(CasePoint::new(rat(-1, 4), Rat::zero(), Rat::zero(), int(1), int(1)).is_err());
        assert!(CasePoint::new(Rat::zero(), rat(3, 5), Rat::zero(), int(1), int(1)).is_err());
        assert!(CasePoint::new(Rat::zero(), Rat::zero(), rat(-1, 2), Rat::zero(), int(1)).is_err());
        assert!(CasePoint::new(Rat::zero(), Rat::zero(), rat(-1, 2), int(1), int(1)).is_ok());
    }

    #[test]
    fn defect_examples() {
        assert_eq!(defect_from_parameters(&extremal_point()), rat(25, 12));
        let zero = Rat::zero();
        let p = point(zero.clone(), zero.clone(), zero.clone(), int(1), int(1));
        assert_eq!(defect_from_parameters(&p), int(1));
        let p = point(rat(1, 2), zero.clone(), zero, rat(3, 4), int(1));
        assert_eq!(defect_from_parameters(&p), rat(4, 3));
    }

    #[test]
    fn gram_round_trip() {
        let p = extremal_point();
        let g = p.to_gram();
        assert_eq!(g, extremal_gram(true));
        assert_eq!(CasePoint::from_gram(&g).unwrap(), p);
        assert_eq!(defect_from_parameters(&p), orthogonality_defect(&g));
        let q = CasePoint::from_gram(&extremal_gram(false)).unwrap();
        assert_eq!(q.sigma, rat(-1, 2));
    }

    #[test]
    fn small_sigma_values() {
        assert_eq!(small_sigma_value(&rat(3, 4), &rat(2, 3)), int(2));
        assert_eq!(small_sigma_value(&int(1), &int(1)), rat(55, 32));
        let big = int(1_000_000);
        assert!(small_sigma_value(&big, &big) > rat(9, 8));
        let r = verify_small_sigma_bound();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.corner_value, int(2));
        assert!(r.interior_max < int(2));
    }

    #[test]
    fn extremal_form() {
        let r = verify_extremal_form().unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.variants.len(), 3);
    }

    #[test]
    fn numerator_sign_at_the_corner() {
        let h = rat(1, 2);
        let p = CasePoint::unchecked(h.clone(), h.clone(), -h.clone(), rat(3, 4), int(1));
        // k = 3/4 is inside (0, k_max = 1] for the lower curve.
        assert!(!convexity_numerator(KCurve::Lower, &p)
            .unwrap()
            .is_negative());
        assert!(!k_curve_second_derivative(KCurve::Lower, &p)
            .unwrap()
            .is_negative());
        let p = CasePoint::unchecked(h.clone(), h.clone(), h, rat(3, 4), int(1));
        assert!(!convexity_numerator(KCurve::Upper, &p)
            .unwrap()
            .is_negative());
        let zero = Rat::zero();
        let p = CasePoint::unchecked(rat(1, 4), rat(1, 3), zero, rat(1, 10), int(1));
        assert!(!convexity_numerator(KCurve::Lower, &p)
            .unwrap()
            .is_negative());
    }

    #[test]
    fn coarse_certificate() {
        let c = verify_all(&rat(1, 10), &CaseId::ALL).unwrap();
        assert!(c.passed);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["cases"][1]["case_id"], "NEG_KMAX");
        assert_eq!(v["cases"][1]["max_value"], "0");
    }
}
