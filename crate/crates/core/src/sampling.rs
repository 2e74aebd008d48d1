//! Seeded sampling from pattern classes, and Monte-Carlo cross-checks of
//! structural verdicts.
//!
//! Sample `k` of a run draws from its own ChaCha stream (`seed`, stream
//! `k`), so parallel and serial evaluation produce identical results.
//! Sampling can refute a universal claim about a class but never certify one.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{FdiError, Result};
use crate::linalg::{numerical_rank, ToleranceConfig};
use crate::numeric::{is_solvable, NumericTriple};
use crate::pattern::{PatternMatrix, PatternSymbol};
use crate::structured::StructuredTriple;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Interval for magnitudes of nonzero entries.
    pub magnitude_range: (f64, f64),
    /// Probability that a `?` entry is exactly zero.
    pub question_zero_prob: f64,
    /// Lower bound on nonzero magnitudes.
    pub min_magnitude: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0x5EED,
            magnitude_range: (0.5, 2.0),
            question_zero_prob: 0.5,
            min_magnitude: 0.5,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.magnitude_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(FdiError::InvalidInput(format!(
                "magnitude range [{lo}, {hi}] must be a positive interval"
            )));
        }
        if !(self.min_magnitude > 0.0 && self.min_magnitude <= hi) {
            return Err(FdiError::InvalidInput(format!(
                "min magnitude {} must lie in (0, {hi}]",
                self.min_magnitude
            )));
        }
        if !(0.0..=1.0).contains(&self.question_zero_prob) {
            return Err(FdiError::InvalidInput(format!(
                "question zero probability {} outside [0, 1]",
                self.question_zero_prob
            )));
        }
        Ok(())
    }

    fn draw_nonzero(&self, rng: &mut impl Rng) -> f64 {
        let lo = self.magnitude_range.0.max(self.min_magnitude);
        let hi = self.magnitude_range.1;
        let mag = if lo < hi {
            rng.random_range(lo..=hi)
        } else {
            hi
        };
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    }
}

/// Random stream for sample `index` of a run seeded with `seed`.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_member_with(
    m: &PatternMatrix,
    cfg: &SamplerConfig,
    rng: &mut impl Rng,
) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| match m.get(i, j) {
        PatternSymbol::Zero => 0.0,
        PatternSymbol::Star => cfg.draw_nonzero(rng),
        PatternSymbol::Question => {
            if rng.random_bool(cfg.question_zero_prob) {
                0.0
            } else {
                cfg.draw_nonzero(rng)
            }
        }
    })
}

/// One member drawn from stream 0 of `cfg.seed`.
pub fn sample_member(m: &PatternMatrix, cfg: &SamplerConfig) -> DMatrix<f64> {
    sample_member_with(m, cfg, &mut member_rng(cfg.seed, 0))
}

pub fn sample_triple_with(
    sys: &StructuredTriple,
    cfg: &SamplerConfig,
    rng: &mut impl Rng,
) -> NumericTriple {
    let a = sample_member_with(sys.a(), cfg, rng);
    let l = sample_member_with(sys.l(), cfg, rng);
    let c = sample_member_with(sys.c(), cfg, rng);
    NumericTriple::new(a, l, c).expect("structured triple has consistent dimensions")
}

#[derive(Clone, Debug)]
pub struct MonteCarloSummary {
    pub n_samples: usize,
    pub seed: u64,
    pub solvable: usize,
    pub unsolvable: usize,
    /// First unsolvable member in sample order.
    pub witness: Option<NumericTriple>,
}

/// Draws `n` members and runs the numeric solvability test on each.
pub fn monte_carlo_solvability(
    sys: &StructuredTriple,
    n: usize,
    cfg: &SamplerConfig,
    tol: ToleranceConfig,
) -> Result<MonteCarloSummary> {
    if n == 0 {
        return Err(FdiError::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    let outcomes = (0..n)
        .into_par_iter()
        .map(|k| {
            let member = sample_triple_with(sys, cfg, &mut member_rng(cfg.seed, k as u64));
            let solvable = is_solvable(&member, tol)?.solvable;
            Ok((solvable, (!solvable).then_some(member)))
        })
        .collect::<Result<Vec<_>>>()?;
    let solvable = outcomes.iter().filter(|(s, _)| *s).count();
    let witness = outcomes.into_iter().find_map(|(_, w)| w);
    Ok(MonteCarloSummary {
        n_samples: n,
        seed: cfg.seed,
        solvable,
        unsolvable: n - solvable,
        witness,
    })
}

/// Members tried before any random draw: every nonzero symbol set to one,
/// then `?` set to zero with `*` set to one.
pub fn heuristic_members(m: &PatternMatrix) -> [DMatrix<f64>; 2] {
    let equal = DMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        if m.get(i, j).is_zero() {
            0.0
        } else {
            1.0
        }
    });
    let stars_only = DMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        if m.get(i, j) == PatternSymbol::Star {
            1.0
        } else {
            0.0
        }
    });
    [equal, stars_only]
}

/// Searches for a member whose numerical rank falls below `min(rows, cols)`.
/// The heuristic members are tried first, then `n` random draws.
pub fn falsify_pattern_rank(
    m: &PatternMatrix,
    n: usize,
    cfg: &SamplerConfig,
    tol: ToleranceConfig,
) -> Option<DMatrix<f64>> {
    let target = m.rows().min(m.cols());
    if target == 0 {
        return None;
    }
    let deficient = |x: &DMatrix<f64>| numerical_rank(x, tol) < target;
    if let Some(w) = heuristic_members(m).into_iter().find(|x| deficient(x)) {
        return Some(w);
    }
    (0..n as u64)
        .into_par_iter()
        .map(|k| sample_member_with(m, cfg, &mut member_rng(cfg.seed, k)))
        .find_first(|x| deficient(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern;
    use nalgebra::dmatrix;

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = SamplerConfig {
            question_zero_prob: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig {
            min_magnitude: 3.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig {
            magnitude_range: (2.0, 1.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_pattern_samples_zero() {
        let z = PatternMatrix::zeros(3, 4);
        for seed in 0..20 {
            assert_eq!(
                sample_member(&z, &SamplerConfig::with_seed(seed)),
                DMatrix::zeros(3, 4)
            );
        }
    }

    #[test]
    fn stars_stay_away_from_zero() {
        let m = PatternMatrix::from_fn(4, 4, |_, _| PatternSymbol::Star);
        let cfg = SamplerConfig::default();
        let mut rng = member_rng(7, 0);
        for _ in 0..200 {
            let x = sample_member_with(&m, &cfg, &mut rng);
            assert!(x
                .iter()
                .all(|v| v.abs() >= cfg.min_magnitude && v.abs() <= 2.0));
        }
    }

    #[test]
    fn samples_are_members() {
        let r = pattern!["* ?", "* *"];
        let cfg = SamplerConfig::default();
        let mut rng = member_rng(cfg.seed, 0);
        for _ in 0..1000 {
            assert!(r
                .is_member(&sample_member_with(&r, &cfg, &mut rng), 0.0)
                .unwrap());
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let m = pattern!["* ? 0", "? * ?"];
        let cfg = SamplerConfig::with_seed(99);
        assert_eq!(sample_member(&m, &cfg), sample_member(&m, &cfg));
        let a: Vec<_> = (0..5)
            .map(|k| sample_member_with(&m, &cfg, &mut member_rng(99, k)))
            .collect();
        let b: Vec<_> = (0..5)
            .map(|k| sample_member_with(&m, &cfg, &mut member_rng(99, k)))
            .collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn falsification() {
        let cfg = SamplerConfig::default();
        let tol = ToleranceConfig::default();
        let w = falsify_pattern_rank(&pattern!["* ?", "* *"], 10, &cfg, tol).unwrap();
        assert_eq!(w, dmatrix![1.0, 1.0; 1.0, 1.0]);
        assert!(falsify_pattern_rank(&PatternMatrix::identity(4), 500, &cfg, tol).is_none());
        assert!(falsify_pattern_rank(&pattern!["* ? *", "0 ? *"], 500, &cfg, tol).is_none());
    }

    #[test]
    fn zero_samples_rejected() {
        let sys = StructuredTriple::new(pattern!["0"], pattern!["*"], pattern!["*"]).unwrap();
        assert!(monte_carlo_solvability(
            &sys,
            0,
            &SamplerConfig::default(),
            ToleranceConfig::default()
        )
        .is_err());
    }
}
