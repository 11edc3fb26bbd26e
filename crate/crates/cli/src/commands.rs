use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use hkz_core::bounds::{
    bound_table, bound_table_json, delta_exact, hermite_constant_power, hermite_invariant_power,
    lls_bound, new_bound, orthogonality_defect, write_bound_csv, ExactValue,
};
use hkz_core::experiments::{run_experiment, write_trial_csv, ExperimentConfig};
use hkz_core::proof::{
    grid_divisions, quadratic_coefficients, verify_all_with, CaseId, ProofCertificate,
};
use hkz_core::rational::{fmt_decimal, fmt_rat, parse_rat, rat, Rat};
use hkz_core::reduction::{
    check_propositions, hkz_reduce, is_hkz_reduced, successive_minima, MAX_MINIMA_RANK,
};
use hkz_core::GramMatrix;

use crate::exit::{Code, Failure};
use crate::Format;

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<GramMatrix, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    GramMatrix::parse(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn no_csv(command: &str) -> Failure {
    Failure::new(
        Code::Unsupported,
        format!("csv output is not available for {command}"),
    )
}

fn show(r: &Rat) -> String {
    let exact = fmt_rat(r);
    let dec = fmt_decimal(r);
    if exact == dec {
        exact
    } else {
        format!("{exact} ({dec})")
    }
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn matrix_lines(rows: &[Vec<String>]) -> String {
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    rows.iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
            format!("  {}\n", cells.join("  "))
        })
        .collect()
}

pub fn reduce(path: &Path, format: Format) -> Outcome {
    let g = load(path)?;
    let input_cert = is_hkz_reduced(&g);
    let report = hkz_reduce(&g);
    let cert = is_hkz_reduced(&report.reduced);
    let before = orthogonality_defect(&g);
    let after = orthogonality_defect(&report.reduced);
    match format {
        Format::Json => print_json(&json!({
            "input_certificate": input_cert,
            "reduced": report.reduced,
            "transform": report.transform,
            "certificate": cert,
            "defect_before": ExactValue::new(&before),
            "defect_after": ExactValue::new(&after),
            "svp_calls": report.svp_calls,
            "total_nodes": report.total_nodes,
        })),
        Format::Text => {
            let mut out = io::stdout().lock();
            if input_cert.is_reduced() {
                writeln!(out, "input: already HKZ reduced")?;
            } else {
                writeln!(out, "input: {}", input_cert.describe())?;
            }
            writeln!(out, "reduced Gram matrix:")?;
            write!(out, "{}", matrix_lines(&report.reduced.to_strings()))?;
            writeln!(
                out,
                "transform (rows are new basis vectors in the input basis):"
            )?;
            write!(out, "{}", matrix_lines(&report.transform.to_strings()))?;
            writeln!(out, "certificate: {}", cert.describe())?;
            writeln!(out, "defect: {} -> {}", show(&before), show(&after))?;
            writeln!(
                out,
                "svp calls: {}, nodes: {}",
                report.svp_calls, report.total_nodes
            )?;
            Ok(())
        }
        Format::Csv => Err(no_csv("reduce")),
    }
}

pub fn defect(path: &Path, format: Format) -> Outcome {
    let g = load(path)?;
    let n = g.rank();
    let d = orthogonality_defect(&g);
    let cert = is_hkz_reduced(&g);
    let lls = lls_bound(n).ok();
    let sharp = new_bound(n).ok();
    let exact = delta_exact(n).ok();
    // Bounds only constrain HKZ bases.
    let within = cert.is_reduced().then(|| {
        [&lls, &sharp, &exact]
            .into_iter()
            .flatten()
            .all(|b| d <= *b)
    });
    match format {
        Format::Json => print_json(&json!({
            "rank": n,
            "defect": ExactValue::new(&d),
            "certificate": cert,
            "lls_bound": lls.as_ref().map(ExactValue::new),
            "new_bound": sharp.as_ref().map(ExactValue::new),
            "delta_exact": exact.as_ref().map(ExactValue::new),
            "within_bounds": within,
        })),
        Format::Text => {
            let mut out = io::stdout().lock();
            writeln!(out, "rank: {n}")?;
            writeln!(out, "defect: {}", show(&d))?;
            writeln!(out, "certificate: {}", cert.describe())?;
            if let Some(b) = &lls {
                writeln!(out, "classical bound: {}", show(b))?;
            }
            if let Some(b) = &sharp {
                writeln!(out, "sharpened bound: {}", show(b))?;
            }
            if let Some(b) = &exact {
                writeln!(out, "exact maximum: {}", show(b))?;
            }
            match within {
                Some(true) => writeln!(out, "within bounds: yes")?,
                Some(false) => writeln!(out, "within bounds: NO")?,
                None => writeln!(out, "within bounds: n/a (basis is not HKZ reduced)")?,
            }
            Ok(())
        }
        Format::Csv => Err(no_csv("defect")),
    }
}

pub fn minima(path: &Path, format: Format) -> Outcome {
    let g = load(path)?;
    let n = g.rank();
    if n > MAX_MINIMA_RANK {
        return Err(Failure::new(
            Code::Unsupported,
            format!("successive minima are limited to rank {MAX_MINIMA_RANK}, got {n}"),
        ));
    }
    let m = successive_minima(&g)?;
    let invariant = hermite_invariant_power(&g)?;
    let gamma = hermite_constant_power(n)?;
    let props = if is_hkz_reduced(&g).is_reduced() {
        Some(check_propositions(&g)?)
    } else {
        None
    };
    match format {
        Format::Json => print_json(&json!({
            "minima": m,
            "hermite_invariant_power": ExactValue::new(&invariant),
            "gamma_pow": ExactValue::new(&gamma),
            "propositions": props,
        })),
        Format::Text => {
            let mut out = io::stdout().lock();
            for (i, (l, w)) in m.minima_sq.iter().zip(&m.witnesses).enumerate() {
                writeln!(out, "lambda_{}^2 = {}  witness {:?}", i + 1, show(l), w)?;
            }
            writeln!(
                out,
                "hermite invariant^n: {} (gamma_{n}^{n} = {})",
                show(&invariant),
                show(&gamma)
            )?;
            writeln!(out, "nodes: {}", m.nodes_visited)?;
            match &props {
                Some(p) => {
                    let failures = p.failures();
                    writeln!(
                        out,
                        "HKZ inequalities: {} checked, {} failed",
                        p.checks.len(),
                        failures.len()
                    )?;
                    for c in failures {
                        writeln!(
                            out,
                            "  {} at i={}: {} > {}",
                            c.name,
                            c.index,
                            fmt_rat(&c.lhs),
                            fmt_rat(&c.rhs)
                        )?;
                    }
                }
                None => writeln!(out, "HKZ inequalities: skipped (basis is not HKZ reduced)")?,
            }
            Ok(())
        }
        Format::Csv => Err(no_csv("minima")),
    }
}

pub fn bounds(max_rank: usize, format: Format) -> Outcome {
    if max_rank == 0 {
        return Err(Failure::invalid("max rank must be at least 1"));
    }
    let rows = bound_table(max_rank)?;
    match format {
        Format::Json => print_json(&bound_table_json(&rows)),
        Format::Csv => Ok(write_bound_csv(&rows, io::stdout().lock())?),
        Format::Text => {
            let mut out = io::stdout().lock();
            let cell = |v: &Option<Rat>| v.as_ref().map(show).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{:>2}  {:<20}  {:<28}  {:<28}  {}",
                "n", "gamma_n^n", "classical", "sharpened", "exact"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>2}  {:<20}  {:<28}  {:<28}  {}",
                    r.n,
                    show(&r.gamma_pow),
                    show(&r.lls_bound),
                    cell(&r.new_bound),
                    cell(&r.delta_exact)
                )?;
            }
            Ok(())
        }
    }
}

/// Positive, at most 1/50, and dividing 1/2.
fn parse_step(text: &str) -> Result<Rat, Failure> {
    let step = parse_rat(text).map_err(|e| Failure::invalid(format!("step {text:?}: {e}")))?;
    if step > rat(1, 50) {
        return Err(Failure::invalid(format!(
            "step {text} is coarser than 1/50"
        )));
    }
    grid_divisions(&step)
        .map_err(|_| Failure::invalid(format!("step {text} must be positive and divide 1/2")))?;
    Ok(step)
}

fn print_certificate_text(c: &ProofCertificate) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "grid step {}", fmt_rat(&c.grid_step))?;
    for s in &c.cases {
        let eq: Vec<String> = s
            .equality_points
            .iter()
            .map(|p| {
                format!(
                    "({}, {}, {})",
                    fmt_rat(&p.lambda),
                    fmt_rat(&p.mu),
                    fmt_rat(&p.sigma)
                )
            })
            .collect();
        writeln!(
            out,
            "{:<8}  points {:>8}  max Q {:<14}  equality {:<20}  violations {:<4}  {} ms  {}",
            s.case_id.name(),
            s.points_checked,
            fmt_rat(&s.max_value),
            if eq.is_empty() {
                "-".to_string()
            } else {
                eq.join(" ")
            },
            s.violations.len(),
            s.wall_time_ms,
            if s.passed() { "PASS" } else { "FAIL" }
        )?;
    }
    for k in &c.consistency {
        writeln!(
            out,
            "{:<8}  bound/quadratic sign agreement {}/{}",
            k.case_id.name(),
            k.samples as usize - k.mismatches.len(),
            k.samples
        )?;
    }
    writeln!(
        out,
        "small sigma: corner {}, interior max {}, {} parameter points  {}",
        fmt_rat(&c.small_sigma.corner_value),
        show(&c.small_sigma.interior_max),
        c.small_sigma.parameter_points,
        if c.small_sigma.passed { "PASS" } else { "FAIL" }
    )?;
    for k in &c.convexity {
        writeln!(
            out,
            "convexity {}: {} samples, min numerator {}, min float difference {:.3e}  {}",
            k.which.name(),
            k.samples,
            show(&k.min_numerator),
            k.min_float_difference,
            if k.passed() { "PASS" } else { "FAIL" }
        )?;
    }
    writeln!(
        out,
        "extremal form: {}",
        if c.extremal.passed { "PASS" } else { "FAIL" }
    )?;
    writeln!(out, "note: {}", c.note)?;
    writeln!(out, "{}", if c.passed { "PASSED" } else { "FAILED" })
}

pub fn verify_proof(
    step: &str,
    case_id: Option<&str>,
    format: Format,
    inject_fault: bool,
) -> Outcome {
    let step = parse_step(step)?;
    let cases: Vec<CaseId> = match case_id {
        Some(id) => vec![id.parse().map_err(Failure::invalid)?],
        None => CaseId::ALL.to_vec(),
    };
    let shift = if inject_fault {
        rat(1, 10)
    } else {
        Rat::default()
    };
    let cert = verify_all_with(&step, &cases, |case, l, m| {
        let (a, b, c) = quadratic_coefficients(case, l, m);
        (a, b, c + &shift)
    })?;
    match format {
        Format::Json => print_json(&cert)?,
        Format::Text => print_certificate_text(&cert)?,
        Format::Csv => return Err(no_csv("verify-proof")),
    }
    if cert.passed {
        Ok(())
    } else {
        Err(Failure::verification("verification failed"))
    }
}

pub fn experiment(cfg: ExperimentConfig, out: Option<&Path>, format: Format) -> Outcome {
    let run = run_experiment(&cfg)?;
    if let Some(path) = out {
        let file =
            File::create(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        write_trial_csv(&run.records, BufWriter::new(file))?;
    }
    let s = &run.summary;
    match format {
        Format::Csv => write_trial_csv(&run.records, io::stdout().lock())?,
        Format::Json => print_json(s)?,
        Format::Text => {
            let mut o = io::stdout().lock();
            writeln!(
                o,
                "rank {}, {} trials, seed {}, entry bound {}",
                cfg.rank, cfg.trials, cfg.seed, cfg.entry_bound
            )?;
            writeln!(
                o,
                "max defect: {} (trial {})",
                s.max_defect.exact, s.max_defect_trial
            )?;
            writeln!(o, "gamma_n^n: {}", s.gamma_pow.exact)?;
            if let Some(b) = &s.new_bound {
                writeln!(o, "sharpened bound: {}", b.exact)?;
            }
            if let Some(b) = &s.delta_exact {
                writeln!(o, "exact maximum: {}", b.exact)?;
            }
            writeln!(o, "classical bound: {}", s.lls_bound.exact)?;
            writeln!(
                o,
                "max defect vs gamma_n^n: {:?} (reported, not asserted)",
                s.conjecture_status
            )?;
            writeln!(o, "chain failures: {}", s.chain_failures)?;
            writeln!(o, "witness:")?;
            write!(o, "{}", matrix_lines(&s.witness.to_strings()))?;
        }
    }
    if run.all_chains_hold() {
        Ok(())
    } else {
        Err(Failure::verification(format!(
            "{} trial(s) failed the HKZ inequality checks",
            s.chain_failures
        )))
    }
}
