//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line; the process exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{dmatrix, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use structfdi::graph::{pattern_full_col_rank, pattern_full_row_rank};
use structfdi::linalg::{conditioned_invariant, image, numerical_rank};
use structfdi::numeric::{
    compute_friend, fault_index, fault_indices, fault_output_subspace, is_solvable,
    output_separability,
};
use structfdi::pattern::PatternMatrix;
use structfdi::sampling::{
    falsify_pattern_rank, member_rng, monte_carlo_solvability, sample_member_with,
    sample_triple_with,
};
use structfdi::sim::{decompose_residual, isolate_relative, simulate_error_system};
use structfdi::structured::{
    analyze_structured, build_pattern_r, star_column_check, structural_indices,
};
use structfdi::{
    pattern, FaultScenario, FaultSignal, PatternSymbol, SamplerConfig, StructuredVerdict,
    ToleranceConfig,
};

use common::*;

const CORPUS_SEED: u64 = 0xC0_4205;
const CORPUS_SIZE: usize = 240;
const SUBSPACE_ANGLE_TOL: f64 = 1e-6;
const FRIEND_RESIDUAL_TOL: f64 = 1e-8;
const ISOLATION_RELATIVE_TOL: f64 = 1e-6;
const COLORABLE_PATTERNS: usize = 50;
const MEMBERS_PER_PATTERN: usize = 500;
const CLASS_SAMPLES_PER_EXAMPLE: usize = 300;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn missing_index_structural() -> Outcome {
    let sys = missing_index_triple();
    let eta = structural_indices(&sys);
    ensure!(eta == vec![Some(1), Some(1), None], "eta = {eta:?}");
    let report = analyze_structured(&sys);
    ensure!(
        report.verdict == StructuredVerdict::NotSolvable,
        "verdict {:?}",
        report.verdict
    );
    Ok(format!("eta = {eta:?}, verdict NotSolvable"))
}

fn missing_index_numeric() -> Outcome {
    let hidden = fault_indices(&missing_index_member(0.0), tol()).map_err(|e| e.to_string())?;
    ensure!(
        hidden == vec![Some(2), Some(1), None],
        "lambda = 0: d = {hidden:?}"
    );
    let visible = fault_index(&missing_index_member(1.0), 0, tol()).map_err(|e| e.to_string())?;
    ensure!(visible == Some(1), "lambda = 1: d_1 = {visible:?}");
    Ok(format!(
        "lambda = 0: d = {hidden:?}; lambda = 1: d_1 = {visible:?}"
    ))
}

fn sufficiency_gap() -> Outcome {
    let sys = gap_triple();
    let r = build_pattern_r(&sys).map_err(|e| e.to_string())?;
    ensure!(r == pattern!["* ?", "* *"], "R = {:?}", r.row_strings());
    ensure!(!pattern_full_col_rank(&r), "R passes the column-rank test");
    let cfg = SamplerConfig::default();
    let witness =
        falsify_pattern_rank(&r, 1000, &cfg, tol()).ok_or("no rank-deficient member found")?;
    ensure!(witness == dmatrix![1.0, 1.0; 1.0, 1.0], "witness {witness}");
    let mc = monte_carlo_solvability(&sys, 1000, &cfg, tol()).map_err(|e| e.to_string())?;
    ensure!(
        mc.solvable == 1000 && mc.unsolvable == 0,
        "{} / 1000 solvable",
        mc.solvable
    );
    let verdict = analyze_structured(&sys).verdict;
    ensure!(
        verdict == StructuredVerdict::Inconclusive,
        "verdict {verdict:?}"
    );
    Ok("witness [[1,1],[1,1]], 1000/1000 members solvable, verdict Inconclusive".into())
}

fn colorable_end_to_end() -> Outcome {
    let report = analyze_structured(&colorable_triple());
    ensure!(
        report.eta == vec![Some(2), Some(3)],
        "eta = {:?}",
        report.eta
    );
    let r = report.r_pattern.clone().ok_or("R missing")?;
    ensure!(
        r == pattern!["* 0", "? ?", "* *"],
        "R = {:?}",
        r.row_strings()
    );
    let trace = report.coloring_trace.as_ref().ok_or("no coloring trace")?;
    let order: Vec<usize> = trace.derivation.iter().map(|s| s.forced_node + 1).collect();
    ensure!(order == vec![1, 2], "blackening order {order:?}");
    ensure!(
        report.verdict == StructuredVerdict::Solvable,
        "verdict {:?}",
        report.verdict
    );
    Ok("eta = (2, 3), nodes blackened 1 then 2, verdict Solvable".into())
}

fn conditioned_invariant_matches_closed_form() -> Outcome {
    let corpus = random_corpus(CORPUS_SEED, CORPUS_SIZE);
    let mut worst = 0.0_f64;
    let mut checks = 0;
    for (k, sys) in corpus.iter().enumerate() {
        for i in 0..sys.fault_count() {
            let d = image(&sys.fault_direction(i).unwrap(), tol());
            let s = conditioned_invariant(sys.a(), sys.c(), &d, tol())
                .map_err(|e| format!("system {k}: {e}"))?;
            let mapped = s.map(sys.c()).unwrap();
            let closed = fault_output_subspace(sys, i, tol()).unwrap();
            let angle = mapped.max_principal_angle(&closed).unwrap();
            ensure!(
                angle < SUBSPACE_ANGLE_TOL,
                "system {k} fault {i}: dims {} vs {}, angle {angle:e}",
                mapped.dim(),
                closed.dim()
            );
            worst = worst.max(angle);
            checks += 1;
        }
    }
    Ok(format!(
        "{} systems, {checks} faults, worst angle {worst:.1e}",
        corpus.len()
    ))
}

fn solvability_matches_separability() -> Outcome {
    let corpus = random_corpus(CORPUS_SEED, CORPUS_SIZE);
    let mut solvable = 0;
    for (k, sys) in corpus.iter().enumerate() {
        let report = is_solvable(sys, tol()).map_err(|e| format!("system {k}: {e}"))?;
        let separable = output_separability(&report.output_subspaces).unwrap();
        let nontrivial = report.output_subspaces.iter().all(|s| !s.is_trivial());
        ensure!(
            report.solvable == (separable && nontrivial),
            "system {k}: solvable {} but separable {separable}, nontrivial {nontrivial}",
            report.solvable
        );
        solvable += usize::from(report.solvable);
    }
    Ok(format!(
        "{} systems agree ({solvable} solvable)",
        corpus.len()
    ))
}

/// Rejection-samples a colorable pattern with the given number of rows.
fn random_colorable_pattern(rng: &mut ChaCha8Rng, rows: usize) -> PatternMatrix {
    loop {
        let cols = rng.random_range(rows..=8);
        let density = rng.random_range(0.2..0.7);
        let m = random_pattern(rng, rows, cols, density);
        if pattern_full_row_rank(&m) {
            return m;
        }
    }
}

fn colorability_soundness() -> Outcome {
    let cfg = SamplerConfig::with_seed(0xC010);
    let mut rng = member_rng(0xC010, u64::MAX);
    let mut questions = 0;
    for k in 0..COLORABLE_PATTERNS {
        let m = random_colorable_pattern(&mut rng, 1 + k % 6);
        questions += m
            .entries()
            .iter()
            .filter(|&&s| s == PatternSymbol::Question)
            .count();
        for j in 0..MEMBERS_PER_PATTERN {
            let mut member_stream = member_rng(cfg.seed, (k * MEMBERS_PER_PATTERN + j) as u64);
            let x = sample_member_with(&m, &cfg, &mut member_stream);
            let rank = numerical_rank(&x, tol());
            ensure!(
                rank == m.rows(),
                "pattern {k} member {j}: rank {rank} < {}\n{x}",
                m.rows()
            );
        }
    }
    Ok(format!(
        "{COLORABLE_PATTERNS} patterns x {MEMBERS_PER_PATTERN} members full row rank ({questions} ? entries)"
    ))
}

fn friend_validity() -> Outcome {
    let corpus = random_corpus(CORPUS_SEED, CORPUS_SIZE);
    let (mut solvable, mut worst) = (0, 0.0_f64);
    for (k, sys) in corpus.iter().enumerate() {
        let report = is_solvable(sys, tol()).unwrap();
        if !report.solvable {
            continue;
        }
        let friend = compute_friend(sys, &report.fault_subspaces, tol())
            .map_err(|e| format!("system {k}: {e}"))?;
        ensure!(
            friend.residual_norm <= FRIEND_RESIDUAL_TOL,
            "system {k}: residual {:e}",
            friend.residual_norm
        );
        worst = worst.max(friend.residual_norm);
        solvable += 1;
    }
    ensure!(solvable > 0, "corpus has no solvable system");
    Ok(format!(
        "{solvable} solvable systems, worst residual {worst:.1e}"
    ))
}

fn isolation_demo() -> Outcome {
    let sys = gap_member();
    let report = is_solvable(&sys, tol()).map_err(|e| e.to_string())?;
    let scenario = FaultScenario::new(
        1.0,
        1e-3,
        vec![
            FaultSignal::Zero,
            FaultSignal::Step {
                onset: 0.0,
                amplitude: 1.0,
            },
        ],
    )
    .unwrap();
    let sim =
        simulate_error_system(&sys, &DMatrix::zeros(2, 2), &scenario).map_err(|e| e.to_string())?;
    let trace =
        decompose_residual(&sim.trace, &report.output_subspaces).map_err(|e| e.to_string())?;
    let peak = trace.peak_residual_norm();
    let r1_peak = trace.components[0]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    ensure!(
        r1_peak <= ISOLATION_RELATIVE_TOL * peak,
        "max |r_1| = {r1_peak:e}, max |r| = {peak:e}"
    );
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for (t, r2) in trace.times.iter().zip(&trace.components[1]) {
        let expected = DVector::from_vec(vec![-2.0 * t, -t]);
        err = err.max((r2 - &expected).norm());
        scale = scale.max(expected.norm());
    }
    ensure!(
        err <= ISOLATION_RELATIVE_TOL * scale,
        "r_2 deviates by {err:e} (scale {scale:e})"
    );
    let iso = isolate_relative(&trace, ISOLATION_RELATIVE_TOL).unwrap();
    ensure!(
        iso.active == vec![false, true],
        "isolation verdict {:?}",
        iso.active
    );
    Ok(format!(
        "max |r_1| / max |r| = {:.1e}, r_2 error {err:.1e}",
        r1_peak / peak
    ))
}

fn class_index_properties() -> Outcome {
    let examples = [missing_index_triple(), gap_triple(), colorable_triple()];
    let mut samples = 0;
    for (e, sys) in examples.iter().enumerate() {
        let eta = structural_indices(sys);
        let stars: Vec<bool> = eta
            .iter()
            .enumerate()
            .map(|(i, h)| {
                h.is_some_and(|h| star_column_check(&sys.markov_pattern(i, h - 1).unwrap())[0])
            })
            .collect();
        let cfg = SamplerConfig::with_seed(0x1E44A + e as u64);
        for k in 0..CLASS_SAMPLES_PER_EXAMPLE {
            let member = sample_triple_with(sys, &cfg, &mut member_rng(cfg.seed, k as u64));
            let d = fault_indices(&member, tol()).unwrap();
            for i in 0..sys.fault_count() {
                match (d[i], eta[i]) {
                    (Some(di), Some(hi)) => {
                        ensure!(
                            di >= hi,
                            "example {e} sample {k} fault {i}: d = {di} < eta = {hi}"
                        );
                        ensure!(
                            !stars[i] || di == hi,
                            "example {e} sample {k} fault {i}: d = {di} != eta = {hi}"
                        );
                    }
                    (Some(di), None) => {
                        return Err(format!(
                            "example {e} sample {k} fault {i}: d = {di} without eta"
                        ))
                    }
                    (None, _) => {}
                }
            }
            samples += 1;
        }
    }
    Ok(format!("{samples} sampled members, no violations"))
}

struct Criterion {
    number: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            number: 1,
            name: "missing structural index",
            budget: secs(1),
            run: missing_index_structural,
        },
        Criterion {
            number: 2,
            name: "numeric index of members",
            budget: secs(1),
            run: missing_index_numeric,
        },
        Criterion {
            number: 3,
            name: "sufficiency gap",
            budget: secs(5),
            run: sufficiency_gap,
        },
        Criterion {
            number: 4,
            name: "colorable end to end",
            budget: secs(1),
            run: colorable_end_to_end,
        },
        Criterion {
            number: 5,
            name: "conditioned invariant closed form",
            budget: secs(30),
            run: conditioned_invariant_matches_closed_form,
        },
        Criterion {
            number: 6,
            name: "solvability vs separability",
            budget: None,
            run: solvability_matches_separability,
        },
        Criterion {
            number: 7,
            name: "colorability soundness",
            budget: secs(60),
            run: colorability_soundness,
        },
        Criterion {
            number: 8,
            name: "friend validity",
            budget: None,
            run: friend_validity,
        },
        Criterion {
            number: 9,
            name: "isolation demo",
            budget: secs(1),
            run: isolation_demo,
        },
        Criterion {
            number: 10,
            name: "class index properties",
            budget: None,
            run: class_index_properties,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:.0?}")),
            (o, _) => o,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {:02} {:<36} {status} [{elapsed:.2?}] {detail}",
            c.number, c.name
        );
        failures += usize::from(outcome.is_err());
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
