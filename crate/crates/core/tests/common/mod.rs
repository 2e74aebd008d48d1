#![allow(dead_code)]

use nalgebra::{dmatrix, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use structfdi::pattern::{PatternMatrix, PatternSymbol};
use structfdi::sampling::{member_rng, sample_triple_with};
use structfdi::{pattern, NumericTriple, SamplerConfig, StructuredTriple};

/// Three faults; the third never reaches the output.
pub fn missing_index_triple() -> StructuredTriple {
    StructuredTriple::new(
        pattern!["0 0 0", "* 0 0", "0 0 0"],
        pattern!["* 0 0", "0 * 0", "0 * *"],
        pattern!["? * 0", "0 * 0"],
    )
    .unwrap()
}

/// Member of `missing_index_triple` with every free parameter set to one
/// except the `?` entry of `C`, which is `lambda`.
pub fn missing_index_member(lambda: f64) -> NumericTriple {
    NumericTriple::new(
        dmatrix![0.0, 0.0, 0.0; 1.0, 0.0, 0.0; 0.0, 0.0, 0.0],
        dmatrix![1.0, 0.0, 0.0; 0.0, 1.0, 0.0; 0.0, 1.0, 1.0],
        dmatrix![lambda, 1.0, 0.0; 0.0, 1.0, 0.0],
    )
    .unwrap()
}

/// Two faults, no dynamics; the pattern of `R` is not certifiably full rank
/// yet every member is solvable.
pub fn gap_triple() -> StructuredTriple {
    StructuredTriple::new(
        pattern!["0 0", "0 0"],
        pattern!["* *", "0 *"],
        pattern!["* *", "* 0"],
    )
    .unwrap()
}

pub fn gap_member() -> NumericTriple {
    NumericTriple::new(
        DMatrix::zeros(2, 2),
        dmatrix![1.0, 1.0; 0.0, 1.0],
        dmatrix![1.0, 1.0; 1.0, 0.0],
    )
    .unwrap()
}

/// Five states, two faults, three outputs; `R^T` is colorable.
pub fn colorable_triple() -> StructuredTriple {
    StructuredTriple::new(
        pattern![
            "* 0 0 0 0",
            "* ? 0 ? 0",
            "0 * * ? 0",
            "* 0 0 ? *",
            "0 0 * 0 *"
        ],
        pattern!["* 0", "? *", "0 0", "0 0", "0 0"],
        pattern!["0 0 0 * 0", "0 0 0 ? ?", "0 0 0 * *"],
    )
    .unwrap()
}

/// Pattern with each entry `0` with probability `1 - density`, otherwise
/// `*` or `?` with equal odds.
pub fn random_pattern(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    density: f64,
) -> PatternMatrix {
    PatternMatrix::from_fn(rows, cols, |_, _| {
        if !rng.random_bool(density) {
            PatternSymbol::Zero
        } else if rng.random_bool(0.5) {
            PatternSymbol::Star
        } else {
            PatternSymbol::Question
        }
    })
}

pub fn random_structured(rng: &mut ChaCha8Rng) -> StructuredTriple {
    let n = rng.random_range(1..=8);
    let p = rng.random_range(1..=4);
    let q = rng.random_range(1..=4);
    let a = random_pattern(rng, n, n, 0.3);
    let l = random_pattern(rng, n, q, 0.35);
    let c = random_pattern(rng, p, n, 0.35);
    StructuredTriple::new(a, l, c).unwrap()
}

/// Seeded corpus of numeric systems (`n <= 8`, `p, q <= 4`): random sparse
/// patterns, then one sampled member of each.
pub fn random_corpus(seed: u64, count: usize) -> Vec<NumericTriple> {
    let cfg = SamplerConfig::with_seed(seed);
    (0..count as u64)
        .map(|k| {
            let mut rng = member_rng(seed, k);
            let sys = random_structured(&mut rng);
            sample_triple_with(&sys, &cfg, &mut rng)
        })
        .collect()
}
