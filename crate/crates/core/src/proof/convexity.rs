//! Convexity in `k` of the two upper-bound curves.
//!
//! With `D = 1 - (1-lambda-mu)^2`, `c = (1+sigma)^2` (lower curve `f`) or
//! `D = 1 - (lambda-mu)^2`, `c = (1-sigma)^2` (upper curve `F`), both curves
//! are `(1 + lambda^2/k)(1 + (mu^2 + k sigma^2)/(D - k c))`. The second
//! derivative times `k^3 (D - k c)^3` is a polynomial; it is evaluated here
//! from the closed-form derivatives and cross-checked against exact and
//! floating-point second differences.

use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, int, rat, serde_rat, to_f64, Rat};

use super::CasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KCurve {
    /// `f`, used for `sigma <= -1/3`.
    #[serde(rename = "f")]
    Lower,
    /// `F`, used for `sigma >= 1/3`.
    #[serde(rename = "F")]
    Upper,
}

impl KCurve {
    pub const ALL: [KCurve; 2] = [KCurve::Lower, KCurve::Upper];

    pub fn name(self) -> &'static str {
        match self {
            KCurve::Lower => "f",
            KCurve::Upper => "F",
        }
    }

    /// `(D, c)` for this curve.
    fn constants(self, lambda: &Rat, mu: &Rat, sigma: &Rat) -> (Rat, Rat) {
        let one = int(1);
        match self {
            KCurve::Lower => {
                let t = &one - lambda - mu;
                let p = &one + sigma;
                (&one - &t * &t, &p * &p)
            }
            KCurve::Upper => {
                let t = lambda - mu;
                let p = &one - sigma;
                (&one - &t * &t, &p * &p)
            }
        }
    }

    /// Right end of the `k` range, `D / (2 (1 ± sigma))`.
    pub fn k_max(self, lambda: &Rat, mu: &Rat, sigma: &Rat) -> Rat {
        let (d, _) = self.constants(lambda, mu, sigma);
        let denom = match self {
            KCurve::Lower => int(2) * (int(1) + sigma),
            KCurve::Upper => int(2) * (int(1) - sigma),
        };
        d / denom
    }
}

fn check_domain(curve: KCurve, p: &CasePoint) -> Result<(Rat, Rat, Rat)> {
    let (d, c) = curve.constants(&p.lambda, &p.mu, &p.sigma);
    let dk = &d - &p.k * &c;
    if !p.k.is_positive() || !dk.is_positive() {
        return Err(Error::OutsideRegion(format!(
            "curve {} undefined at k = {} (D - k c = {})",
            curve.name(),
            fmt_rat(&p.k),
            fmt_rat(&dk)
        )));
    }
    Ok((d, c, dk))
}

/// Curve value at `p.k`; `p.l` is ignored.
pub fn k_curve_value(curve: KCurve, p: &CasePoint) -> Result<Rat> {
    let (_, _, dk) = check_domain(curve, p)?;
    let g = int(1) + &p.lambda * &p.lambda / &p.k;
    let h = int(1) + (&p.mu * &p.mu + &p.k * &p.sigma * &p.sigma) / dk;
    Ok(g * h)
}

/// Exact second derivative in `k` from the closed forms of the two factors.
pub fn k_curve_second_derivative(curve: KCurve, p: &CasePoint) -> Result<Rat> {
    let (d, c, dk) = check_domain(curve, p)?;
    let (l2, m2, s2) = (&p.lambda * &p.lambda, &p.mu * &p.mu, &p.sigma * &p.sigma);
    let k = &p.k;
    let g = int(1) + &l2 / k;
    let g1 = -&l2 / (k * k);
    let g2 = int(2) * &l2 / (k * k * k);
    // h = 1 + N / Dk, N = mu^2 + k sigma^2, Dk = D - k c.
    let m = &s2 * &d + &c * &m2;
    let h = int(1) + (&m2 + k * &s2) / &dk;
    let h1 = &m / (&dk * &dk);
    let h2 = int(2) * &c * &m / (&dk * &dk * &dk);
    Ok(g2 * h + int(2) * g1 * h1 + g * h2)
}

/// `f'' k^3 (D - k c)^3`, the quantity whose sign decides convexity.
pub fn convexity_numerator(curve: KCurve, p: &CasePoint) -> Result<Rat> {
    let (_, _, dk) = check_domain(curve, p)?;
    let second = k_curve_second_derivative(curve, p)?;
    Ok(second * &p.k * &p.k * &p.k * &dk * &dk * &dk)
}

/// The two written forms of the numerator, transcribed term by term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DisplayForm {
    Expanded,
    Regrouped,
}

/// Evaluates a written form of the numerator verbatim.
///
/// These transcriptions are kept for comparison only. The expanded lower
/// form drops a factor `(D - k c)` from its last term, and the regrouped
/// forms do not equal the numerator; see [`ConvexityCertificate`] for the
/// agreement counts.
pub fn displayed_numerator(curve: KCurve, form: DisplayForm, p: &CasePoint) -> Rat {
    let (a, c) = curve.constants(&p.lambda, &p.mu, &p.sigma);
    let (l, s, k) = (&p.lambda, &p.sigma, &p.k);
    let l2 = l * l;
    let s2 = s * s;
    let n = &p.mu * &p.mu + k * &s2;
    let dk = &a - k * &c;
    let c2 = &c * &c;
    let k2 = k * k;
    let k3 = &k2 * k;
    let two = int(2);
    let sq = |x: &Rat| x * x;
    let cube = |x: &Rat| x * x * x;
    match (curve, form) {
        (KCurve::Lower, DisplayForm::Expanded) => {
            &two * &l2 * &n * sq(&dk) + &two * &l2 * cube(&dk)
                - &two * &l2 * k * &c * &n * &dk
                - &two * k * &l2 * &s2 * sq(&dk)
                + &two * &l2 * &k2 * &c2 * &n
                + &two * &k3 * &c2 * &n
                + &two * &l2 * &k2 * &s2 * &c * &dk
                + &two * &k3 * &s2 * &c
        }
        (KCurve::Upper, DisplayForm::Expanded) => {
            &two * &l2 * &n * sq(&dk) + &two * &l2 * cube(&dk)
                - &two * &l2 * k * &c * &n * &dk
                - &two * &l2 * k * &s2 * sq(&dk)
                + &two * &l2 * &k2 * &c2 * &n
                + &two * &k3 * &c2 * &n
                + &two * &l2 * &k2 * &s2 * &c * &dk
                + &two * &k3 * &s2 * &c * &dk
        }
        (KCurve::Lower, DisplayForm::Regrouped) => {
            &l2 * &n * sq(&(&a - &two * k * &c))
                + &l2 * &dk * sq(&(&a - k * (&c + &s2)))
                + &l2 * &n * sq(&dk)
                + &l2 * cube(&dk)
                + &l2 * &k2 * &c2 * &n
                + &two * &k3 * &c2 * &n
                + &l2 * &k2 * (&two * &s2 * &c - &s2 * &s2) * &dk
                + &two * &k3 * &s2 * &c
        }
        (KCurve::Upper, DisplayForm::Regrouped) => {
            l * &n * sq(&(&a - &two * k * &c))
                + &l2 * &dk * sq(&(&a - k * (&c + &s2)))
                + &l2 * &n * sq(&dk)
                + &l2 * cube(&dk)
                + &l2 * &k2 * &c2 * &n
                + &two * &k3 * &c2 * &n
                + &l2 * &k2 * &s2 * &c * &dk
                + &k3 * (&two * &s2 * &c - &s2 * &s2) * &dk
                + &two * &k3 * &s2 * &c * &dk
        }
    }
}

/// Checks at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexitySample {
    pub point: CasePoint,
    #[serde(with = "serde_rat")]
    pub h: Rat,
    #[serde(with = "serde_rat")]
    pub numerator: Rat,
    /// `f(k+h) - 2 f(k) + f(k-h)`, exact.
    #[serde(with = "serde_rat")]
    pub exact_difference: Rat,
    /// Richardson-extrapolated second derivative from steps `h/8`, `h/16`.
    pub richardson: f64,
    pub second_derivative: f64,
    pub float_difference_h: f64,
    pub float_difference_half_h: f64,
}

/// Relative agreement required between the closed form and the
/// extrapolated difference quotient.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;
/// Floor below which a floating-point second difference counts as negative.
pub const FLOAT_DIFFERENCE_FLOOR: f64 = -1e-12;

impl ConvexitySample {
    pub fn derivative_agrees(&self) -> bool {
        let scale = self.second_derivative.abs().max(1.0);
        (self.richardson - self.second_derivative).abs() <= DERIVATIVE_TOLERANCE * scale
    }

    pub fn passed(&self) -> bool {
        !self.numerator.is_negative()
            && !self.exact_difference.is_negative()
            && self.float_difference_h >= FLOAT_DIFFERENCE_FLOOR
            && self.float_difference_half_h >= FLOAT_DIFFERENCE_FLOOR
            && self.derivative_agrees()
    }
}

fn shifted(p: &CasePoint, dk: &Rat) -> CasePoint {
    CasePoint::unchecked(
        p.lambda.clone(),
        p.mu.clone(),
        p.sigma.clone(),
        &p.k + dk,
        p.l.clone(),
    )
}

fn float_value(curve: KCurve, p: &CasePoint, k: f64) -> f64 {
    let (d, c) = curve.constants(&p.lambda, &p.mu, &p.sigma);
    let (l, m, s) = (to_f64(&p.lambda), to_f64(&p.mu), to_f64(&p.sigma));
    let (d, c) = (to_f64(&d), to_f64(&c));
    (1.0 + l * l / k) * (1.0 + (m * m + k * s * s) / (d - k * c))
}

/// Evaluates every check at `p` with difference step `h`; `k ± h` must stay
/// in the curve's domain.
pub fn convexity_sample(curve: KCurve, p: &CasePoint, h: &Rat) -> Result<ConvexitySample> {
    if !h.is_positive() {
        return Err(Error::InvalidStep(fmt_rat(h)));
    }
    let f0 = k_curve_value(curve, p)?;
    let diff = |step: &Rat| -> Result<Rat> {
        let up = k_curve_value(curve, &shifted(p, step))?;
        let down = k_curve_value(curve, &shifted(p, &-step))?;
        Ok(up - int(2) * &f0 + down)
    };
    let d_h = diff(h)?;
    // Extrapolate from h/8 and h/16, where the O(h^4) remainder is negligible.
    let r1 = h * rat(1, 8);
    let r2 = h * rat(1, 16);
    let q1 = diff(&r1)? / (&r1 * &r1);
    let q2 = diff(&r2)? / (&r2 * &r2);
    let richardson = (int(4) * q2 - q1) / int(3);

    let kf = to_f64(&p.k);
    let float_diff = |step: f64| {
        float_value(curve, p, kf + step) - 2.0 * float_value(curve, p, kf)
            + float_value(curve, p, kf - step)
    };
    let hf = to_f64(h);
    Ok(ConvexitySample {
        point: p.clone(),
        h: h.clone(),
        numerator: convexity_numerator(curve, p)?,
        exact_difference: d_h,
        richardson: to_f64(&richardson),
        second_derivative: to_f64(&k_curve_second_derivative(curve, p)?),
        float_difference_h: float_diff(hf),
        float_difference_half_h: float_diff(hf / 2.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplayAgreement {
    pub form: DisplayForm,
    /// Samples at which the written form equals the numerator exactly.
    pub agree: u64,
    pub disagree: u64,
    /// Samples at which the written form is negative.
    pub negative: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub which: KCurve,
    pub samples: u64,
    /// `(lambda, mu, sigma)` cells skipped because `k_max <= 0`.
    pub skipped_cells: u64,
    #[serde(with = "serde_rat")]
    pub min_numerator: Rat,
    pub min_float_difference: f64,
    pub max_derivative_error: f64,
    pub failures: Vec<CasePoint>,
    pub displays: Vec<DisplayAgreement>,
}

impl ConvexityCertificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.samples > 0
    }
}

/// Samples `lambda, mu = i/18`, `sigma` in steps of `1/54` from the case
/// edge (`-1/2` for `f`, `1/3` for `F`) and `k = k_max (j+1)/11`, each index
/// in `0..grid`, with `h = k_max / 110`.
pub fn convexity_certificate(curve: KCurve, grid: usize) -> ConvexityCertificate {
    let sigma0 = match curve {
        KCurve::Lower => rat(-1, 2),
        KCurve::Upper => rat(1, 3),
    };
    let mut cert = ConvexityCertificate {
        which: curve,
        samples: 0,
        skipped_cells: 0,
        min_numerator: Rat::zero(),
        min_float_difference: f64::INFINITY,
        max_derivative_error: 0.0,
        failures: Vec::new(),
        displays: vec![
            DisplayAgreement {
                form: DisplayForm::Expanded,
                agree: 0,
                disagree: 0,
                negative: 0,
            },
            DisplayAgreement {
                form: DisplayForm::Regrouped,
                agree: 0,
                disagree: 0,
                negative: 0,
            },
        ],
    };
    let mut min_num: Option<Rat> = None;
    let g = grid as i64;
    for i in 0..g {
        for j in 0..g {
            for t in 0..g {
                let lambda = rat(i, 18);
                let mu = rat(j, 18);
                let sigma = &sigma0 + rat(t, 54);
                let kmax = curve.k_max(&lambda, &mu, &sigma);
                if !kmax.is_positive() {
                    cert.skipped_cells += 1;
                    continue;
                }
                let h = &kmax / int(110);
                for s in 0..g {
                    let k = &kmax * rat(s + 1, 11);
                    let p = CasePoint::unchecked(
                        lambda.clone(),
                        mu.clone(),
                        sigma.clone(),
                        k,
                        Rat::zero(),
                    );
                    cert.samples += 1;
                    let sample = match convexity_sample(curve, &p, &h) {
                        Ok(s) => s,
                        Err(_) => {
                            cert.failures.push(p);
                            continue;
                        }
                    };
                    for d in &mut cert.displays {
                        let v = displayed_numerator(curve, d.form, &p);
                        if v == sample.numerator {
                            d.agree += 1;
                        } else {
                            d.disagree += 1;
                        }
                        if v.is_negative() {
                            d.negative += 1;
                        }
                    }
                    min_num = Some(match min_num {
                        Some(m) if m <= sample.numerator => m,
                        _ => sample.numerator.clone(),
                    });
                    cert.min_float_difference = cert
                        .min_float_difference
                        .min(sample.float_difference_h)
                        .min(sample.float_difference_half_h);
                    let scale = sample.second_derivative.abs().max(1.0);
                    cert.max_derivative_error = cert
                        .max_derivative_error
                        .max((sample.richardson - sample.second_derivative).abs() / scale);
                    if !sample.passed() {
                        cert.failures.push(p);
                    }
                }
            }
        }
    }
    cert.min_numerator = min_num.unwrap_or_default();
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(l: Rat, m: Rat, s: Rat, k: Rat) -> CasePoint {
        CasePoint::unchecked(l, m, s, k, Rat::zero())
    }

    #[test]
    fn second_derivative_matches_difference_quotients() {
        let p = point(rat(1, 3), rat(1, 4), rat(-2, 5), rat(1, 5));
        let s = convexity_sample(KCurve::Lower, &p, &rat(1, 1000)).unwrap();
        assert!(s.passed(), "{s:?}");
        assert!((s.richardson - s.second_derivative).abs() < 1e-8);
    }

    #[test]
    fn expanded_upper_form_is_exact() {
        let p = point(rat(1, 5), rat(2, 5), rat(2, 5), rat(1, 3));
        let n = convexity_numerator(KCurve::Upper, &p).unwrap();
        assert_eq!(
            displayed_numerator(KCurve::Upper, DisplayForm::Expanded, &p),
            n
        );
    }

    #[test]
    fn expanded_lower_form_misses_one_factor() {
        let p = point(rat(1, 5), rat(2, 5), rat(-2, 5), rat(1, 3));
        let n = convexity_numerator(KCurve::Lower, &p).unwrap();
        let shown = displayed_numerator(KCurve::Lower, DisplayForm::Expanded, &p);
        let (d, c) = KCurve::Lower.constants(&p.lambda, &p.mu, &p.sigma);
        let dk = &d - &p.k * &c;
        let last = int(2) * &p.k * &p.k * &p.k * &p.sigma * &p.sigma * &c;
        assert_eq!(shown - &last, n - last * dk);
    }

    #[test]
    fn degenerate_sigma_zero() {
        // With sigma = 0 and lambda = 0 the curve is 1 + mu^2/(D - k).
        let p = point(Rat::zero(), rat(1, 2), Rat::zero(), rat(1, 4));
        let v = k_curve_value(KCurve::Lower, &p).unwrap();
        assert_eq!(v, int(1) + rat(1, 4) / (rat(3, 4) - rat(1, 4)));
    }

    #[test]
    fn outside_domain_is_rejected() {
        let p = point(rat(1, 2), rat(1, 2), rat(-1, 2), int(5));
        assert!(k_curve_value(KCurve::Lower, &p).is_err());
        let p = point(rat(1, 2), rat(1, 2), rat(-1, 2), Rat::zero());
        assert!(convexity_numerator(KCurve::Lower, &p).is_err());
    }

    #[test]
    fn small_certificates_pass() {
        for curve in KCurve::ALL {
            let c = convexity_certificate(curve, 4);
            assert!(c.passed(), "{:?}", c.failures);
            assert!(!c.min_numerator.is_negative());
        }
    }
}
