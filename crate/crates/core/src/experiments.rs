//! Seeded random-lattice experiments.
//!
//! Each trial draws `G = A A^T` for an integer matrix `A`, HKZ-reduces it,
//! measures the defect and checks it against every applicable bound. The
//! largest observed defect is compared with `gamma_n^n`; that comparison is
//! reported only, since `Delta_n = gamma_n^n` is open for `n >= 4`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    delta_exact, hermite_constant_power, lls_bound, new_bound, orthogonality_defect, ExactValue,
};
use crate::error::{Error, Result};
use crate::lattice::{a2_gram, extremal_gram, int_determinant, GramMatrix};
use crate::rational::{fmt_decimal, fmt_rat, int, rat, serde_rat, serde_rat_opt, Rat};
use crate::reduction::{
    check_propositions, hkz_reduce, is_hkz_reduced, projected_gram, successive_minima,
    InequalityCheck, SuccessiveMinima, MAX_MINIMA_RANK,
};

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub rank: usize,
    pub trials: usize,
    pub seed: u64,
    pub entry_bound: i64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rank: 3,
            trials: 200,
            seed: 0,
            entry_bound: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_MINIMA_RANK).contains(&self.rank) {
            return Err(Error::InvalidConfig(format!(
                "rank must be in 2..={MAX_MINIMA_RANK}, got {}",
                self.rank
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.entry_bound < 1 {
            return Err(Error::InvalidConfig(format!(
                "entry bound must be positive, got {}",
                self.entry_bound
            )));
        }
        Ok(())
    }
}

/// `A A^T` for a seeded integer `A` with entries uniform in
/// `[-entry_bound, entry_bound]`, redrawn until nonsingular.
pub fn random_gram(rank: usize, seed: u64, entry_bound: i64) -> Result<GramMatrix> {
    if rank == 0 {
        return Err(Error::Empty);
    }
    if entry_bound < 1 {
        return Err(Error::InvalidConfig(format!(
            "entry bound must be positive, got {entry_bound}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let a: Vec<Vec<i64>> = (0..rank)
            .map(|_| {
                (0..rank)
                    .map(|_| rng.gen_range(-entry_bound..=entry_bound))
                    .collect()
            })
            .collect();
        let big: Vec<Vec<num::BigInt>> = a
            .iter()
            .map(|r| r.iter().map(|&v| v.into()).collect())
            .collect();
        if int_determinant(&big) == 0.into() {
            continue;
        }
        let g: Vec<Vec<i64>> = a
            .iter()
            .map(|ri| {
                a.iter()
                    .map(|rj| ri.iter().zip(rj).map(|(x, y)| x * y).sum())
                    .collect()
            })
            .collect();
        return GramMatrix::from_ints(&g);
    }
    Err(Error::GeneratorExhausted(MAX_ATTEMPTS))
}

/// Inequalities behind the sharpened bound for an HKZ basis of rank 4..=6.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub leading_block_hkz: bool,
    /// Successive minima of the lattice projected orthogonally to
    /// `b_1, b_2, b_3`.
    pub projected_minima: SuccessiveMinima,
    pub checks: Vec<InequalityCheck>,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.leading_block_hkz && self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }
}

pub const BSTAR1_VS_BSTAR4: &str = "bstar[1] <= 2 bstar[4]";
pub const BSTAR2_VS_BSTAR4: &str = "bstar[2] <= 3/2 bstar[4]";
pub const BSTAR3_VS_BSTAR4: &str = "bstar[3] <= 4/3 bstar[4]";
pub const NORM_VS_PROJECTION: &str = "|b_i|^2 <= |b_i(4)|^2 + 29/24 bstar[4]";
pub const NORM_VS_PROJECTED_MINIMUM: &str = "|b_i|^2 <= (i/4 + 29/24) lambda_(i-3)(proj)^2";
pub const PROJECTED_VS_MINIMUM: &str = "bstar[i] <= lambda_i^2";

/// Checks, exactly: the leading 3x3 block is HKZ; `bstar` of the first three
/// vectors against `bstar[4]`; for `i >= 4`, `|b_i|^2` against the projection
/// onto the complement of `b_1, b_2, b_3` and against the projected lattice's
/// `(i-3)`-th minimum; and `bstar[i] <= lambda_i^2` in the full lattice.
pub fn sharpened_chain_check(g: &GramMatrix) -> Result<ChainReport> {
    let n = g.rank();
    if !(4..=MAX_MINIMA_RANK).contains(&n) {
        return Err(Error::BoundNotApplicable {
            rank: n,
            reason: "chain check needs rank 4..=6",
        });
    }
    let cert = is_hkz_reduced(g);
    if !cert.is_reduced() {
        return Err(Error::NotHkzReduced(cert.describe()));
    }
    let gso = g.ldl();
    let diag = g.diagonal();
    let leading_block_hkz = is_hkz_reduced(&g.leading_block(3)?).is_reduced();
    let proj = projected_gram(g, 4)?;
    let proj_diag = proj.diagonal();
    let projected_minima = successive_minima(&proj)?;
    let full_minima = successive_minima(g)?;
    let b4 = &gso.bstar[3];

    let mut checks = vec![
        InequalityCheck::new(BSTAR1_VS_BSTAR4, 1, gso.bstar[0].clone(), int(2) * b4),
        InequalityCheck::new(BSTAR2_VS_BSTAR4, 2, gso.bstar[1].clone(), rat(3, 2) * b4),
        InequalityCheck::new(BSTAR3_VS_BSTAR4, 3, gso.bstar[2].clone(), rat(4, 3) * b4),
    ];
    for i in 4..=n {
        let norm = diag[i - 1].clone();
        checks.push(InequalityCheck::new(
            NORM_VS_PROJECTION,
            i,
            norm.clone(),
            &proj_diag[i - 4] + rat(29, 24) * b4,
        ));
        let factor = rat(i as i64, 4) + rat(29, 24);
        checks.push(InequalityCheck::new(
            NORM_VS_PROJECTED_MINIMUM,
            i,
            norm,
            factor * &projected_minima.minima_sq[i - 4],
        ));
    }
    for i in 0..n {
        checks.push(InequalityCheck::new(
            PROJECTED_VS_MINIMUM,
            i + 1,
            gso.bstar[i].clone(),
            full_minima.minima_sq[i].clone(),
        ));
    }
    Ok(ChainReport {
        leading_block_hkz,
        projected_minima,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub rank: usize,
    #[serde(with = "serde_rat")]
    pub defect: Rat,
    #[serde(with = "serde_rat")]
    pub gamma_pow: Rat,
    #[serde(with = "serde_rat")]
    pub lls_bound: Rat,
    #[serde(with = "serde_rat_opt")]
    pub new_bound: Option<Rat>,
    pub chain_checks_passed: bool,
    pub nodes: u64,
    #[serde(skip)]
    pub reduced: GramMatrix,
}

/// Gram matrix used for trial `index`: a fixed extremal lattice for trial 0
/// at ranks 2 and 3, otherwise a random one seeded by `seed + index`.
pub fn trial_gram(cfg: &ExperimentConfig, index: usize) -> Result<GramMatrix> {
    match (index, cfg.rank) {
        (0, 2) => Ok(a2_gram()),
        (0, 3) => Ok(extremal_gram(true)),
        _ => random_gram(
            cfg.rank,
            cfg.seed.wrapping_add(index as u64),
            cfg.entry_bound,
        ),
    }
}

fn run_trial(cfg: &ExperimentConfig, index: usize) -> Result<TrialRecord> {
    let n = cfg.rank;
    let report = hkz_reduce(&trial_gram(cfg, index)?);
    let reduced = report.reduced;
    let defect = orthogonality_defect(&reduced);
    let gamma_pow = hermite_constant_power(n)?;
    let lls = lls_bound(n)?;
    let sharp = new_bound(n).ok();

    let violation = |what: &str, bound: &Rat| Error::BoundViolation {
        trial: index,
        detail: format!("defect {} > {what} {}", fmt_rat(&defect), fmt_rat(bound)),
    };
    if defect > lls {
        return Err(violation("classical bound", &lls));
    }
    if let Some(b) = &sharp {
        if defect > *b {
            return Err(violation("sharpened bound", b));
        }
    }
    if let Ok(exact) = delta_exact(n) {
        if defect > exact {
            return Err(violation("exact maximum", &exact));
        }
    }

    let mut chain_ok = check_propositions(&reduced)?.all_hold();
    if n >= 4 {
        chain_ok &= sharpened_chain_check(&reduced)?.all_hold();
    }
    Ok(TrialRecord {
        trial_index: index,
        rank: n,
        defect,
        gamma_pow,
        lls_bound: lls,
        new_bound: sharp,
        chain_checks_passed: chain_ok,
        nodes: report.total_nodes,
        reduced,
    })
}

/// How the largest observed defect compares with `gamma_n^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureStatus {
    Below,
    Equal,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub max_defect: ExactValue,
    pub max_defect_trial: usize,
    /// Reduced Gram matrix of the trial attaining the maximum.
    pub witness: GramMatrix,
    pub gamma_pow: ExactValue,
    pub lls_bound: ExactValue,
    pub new_bound: Option<ExactValue>,
    pub delta_exact: Option<ExactValue>,
    /// Reported only; the equality `Delta_n = gamma_n^n` is open for n >= 4.
    pub conjecture_status: ConjectureStatus,
    pub chain_failures: usize,
    pub total_nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
}

impl ExperimentRun {
    pub fn all_chains_hold(&self) -> bool {
        self.summary.chain_failures == 0
    }
}

/// Runs the trials in parallel. Records come back in trial order and do not
/// depend on the thread count; any bound violation fails the whole run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let results: Vec<Result<TrialRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;

    let best = records.iter().fold(
        &records[0],
        |acc, r| if r.defect > acc.defect { r } else { acc },
    );
    let gamma_pow = hermite_constant_power(cfg.rank)?;
    let conjecture_status = match best.defect.cmp(&gamma_pow) {
        std::cmp::Ordering::Less => ConjectureStatus::Below,
        std::cmp::Ordering::Equal => ConjectureStatus::Equal,
        std::cmp::Ordering::Greater => ConjectureStatus::Above,
    };
    let summary = ExperimentSummary {
        config: cfg.clone(),
        max_defect: ExactValue::new(&best.defect),
        max_defect_trial: best.trial_index,
        witness: best.reduced.clone(),
        gamma_pow: ExactValue::new(&gamma_pow),
        lls_bound: ExactValue::new(&lls_bound(cfg.rank)?),
        new_bound: new_bound(cfg.rank).ok().as_ref().map(ExactValue::new),
        delta_exact: delta_exact(cfg.rank).ok().as_ref().map(ExactValue::new),
        conjecture_status,
        chain_failures: records.iter().filter(|r| !r.chain_checks_passed).count(),
        total_nodes: records.iter().map(|r| r.nodes).sum(),
    };
    Ok(ExperimentRun { records, summary })
}

pub const CSV_HEADER: [&str; 9] = [
    "trial",
    "rank",
    "defect_exact",
    "defect_float",
    "gamma_pow",
    "lls_bound",
    "new_bound",
    "chain_ok",
    "nodes",
];

/// One row per trial; exact values as `p/q`, the float column with 12
/// significant digits, `new_bound` empty below rank 4.
pub fn write_trial_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.trial_index.to_string(),
            r.rank.to_string(),
            fmt_rat(&r.defect),
            fmt_decimal(&r.defect),
            fmt_rat(&r.gamma_pow),
            fmt_rat(&r.lls_bound),
            r.new_bound.as_ref().map(fmt_rat).unwrap_or_default(),
            r.chain_checks_passed.to_string(),
            r.nodes.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{One, Signed};

    #[test]
    fn rank_one_is_a_square() {
        for seed in 0..20 {
            let g = random_gram(1, seed, 5).unwrap();
            let v = g.get(0, 0).clone();
            assert!(v.is_positive() && v <= int(25));
            let r = num::integer::Roots::sqrt(&v.to_integer());
            assert_eq!(Rat::from_integer(&r * &r), v);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = random_gram(3, 42, 10).unwrap();
        let b = random_gram(3, 42, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_gram(3, 43, 10).unwrap());
        assert!(random_gram(0, 1, 10).is_err());
        assert!(random_gram(2, 1, 0).is_err());
    }

    #[test]
    fn chain_on_identity() {
        let r = sharpened_chain_check(&GramMatrix::identity(4)).unwrap();
        assert!(r.all_hold());
        assert!(r
            .checks
            .iter()
            .all(|c| c.lhs <= Rat::one() || c.name == NORM_VS_PROJECTION));
    }

    #[test]
    fn chain_rejects_bad_input() {
        assert!(sharpened_chain_check(&GramMatrix::identity(3)).is_err());
        let g = GramMatrix::from_ints(&[
            vec![4, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ])
        .unwrap();
        assert!(matches!(
            sharpened_chain_check(&g),
            Err(Error::NotHkzReduced(_))
        ));
    }

    #[test]
    fn chain_on_random_rank_four() {
        for seed in 0..5 {
            let g = hkz_reduce(&random_gram(4, seed, 10).unwrap()).reduced;
            let r = sharpened_chain_check(&g).unwrap();
            assert!(r.all_hold(), "{:?}", r.failures());
            assert!(orthogonality_defect(&g) <= rat(1325, 288));
        }
    }

    #[test]
    fn small_runs() {
        let cfg = ExperimentConfig {
            rank: 3,
            trials: 20,
            seed: 5,
            entry_bound: 10,
        };
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.records.len(), 20);
        assert_eq!(run.summary.max_defect.exact, "25/12");
        assert_eq!(run.summary.max_defect_trial, 0);
        assert!(run.all_chains_hold());
        assert_eq!(run.summary.conjecture_status, ConjectureStatus::Above);

        let cfg = ExperimentConfig { rank: 2, ..cfg };
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.summary.max_defect.exact, "4/3");
        assert_eq!(run.summary.conjecture_status, ConjectureStatus::Equal);
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = ExperimentConfig {
            rank: 4,
            trials: 6,
            seed: 11,
            entry_bound: 6,
        };
        let write = || {
            let mut buf = Vec::new();
            write_trial_csv(&run_experiment(&cfg).unwrap().records, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = write();
        assert_eq!(a, write());
        let header = a.lines().next().unwrap();
        assert_eq!(header, CSV_HEADER.join(","));
        assert_eq!(a.lines().count(), 7);
    }

    #[test]
    fn config_validation() {
        let bad = |c: ExperimentConfig| run_experiment(&c).is_err();
        assert!(bad(ExperimentConfig {
            rank: 1,
            ..Default::default()
        }));
        assert!(bad(ExperimentConfig {
            rank: 7,
            ..Default::default()
        }));
        assert!(bad(ExperimentConfig {
            trials: 0,
            ..Default::default()
        }));
        assert!(bad(ExperimentConfig {
            entry_bound: 0,
            ..Default::default()
        }));
    }
}
