//! Fault isolation by simulation of the observer error system
//! `e' = (A + G C) e - L f`, `r = C e`, with `e(0) = 0`.
//!
//! When the output fault subspaces form a direct sum, every residual sample
//! splits uniquely into per-fault components; a component that stays zero
//! is evidence that its fault did not occur.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{FdiError, Result};
use crate::linalg::{numerical_rank, pseudo_solve, spectral_norm, Subspace};
use crate::numeric::{stacked_basis, NumericTriple};

/// Error-state norm beyond which a run is flagged as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Default integration step in seconds.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default isolation threshold, relative to the peak residual norm.
pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 1e-6;

// Real-axis extent of the classical RK4 stability region.
const RK4_STABILITY_LIMIT: f64 = 2.785;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaultSignal {
    Zero,
    Step {
        onset: f64,
        amplitude: f64,
    },
    /// `amplitude * sin(2 pi freq (t - onset))` from `onset` on.
    Sinusoid {
        freq: f64,
        amplitude: f64,
        onset: f64,
    },
}

impl FaultSignal {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            FaultSignal::Zero => 0.0,
            FaultSignal::Step { onset, amplitude } => {
                if t >= onset {
                    amplitude
                } else {
                    0.0
                }
            }
            FaultSignal::Sinusoid {
                freq,
                amplitude,
                onset,
            } => {
                if t >= onset {
                    amplitude * (TAU * freq * (t - onset)).sin()
                } else {
                    0.0
                }
            }
        }
    }

    fn onset(&self) -> Option<f64> {
        match *self {
            FaultSignal::Zero => None,
            FaultSignal::Step { onset, .. } | FaultSignal::Sinusoid { onset, .. } => Some(onset),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            FaultSignal::Zero => true,
            FaultSignal::Step { amplitude, .. } | FaultSignal::Sinusoid { amplitude, .. } => {
                amplitude == 0.0
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaultScenario {
    duration: f64,
    step: f64,
    faults: Vec<FaultSignal>,
}

impl FaultScenario {
    pub fn new(duration: f64, step: f64, faults: Vec<FaultSignal>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(FdiError::InvalidInput(format!(
                "step must be positive, got {step}"
            )));
        }
        if !(duration >= step && duration.is_finite()) {
            return Err(FdiError::InvalidInput(format!(
                "duration {duration} must be at least the step {step}"
            )));
        }
        for (i, f) in faults.iter().enumerate() {
            if let Some(onset) = f.onset() {
                if !(0.0..=duration).contains(&onset) {
                    return Err(FdiError::InvalidInput(format!(
                        "fault {} onset {onset} outside [0, {duration}]",
                        i + 1
                    )));
                }
            }
            if let FaultSignal::Sinusoid { freq, .. } = f {
                if !freq.is_finite() {
                    return Err(FdiError::InvalidInput(format!(
                        "fault {} frequency is not finite",
                        i + 1
                    )));
                }
            }
        }
        Ok(Self {
            duration,
            step,
            faults,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn faults(&self) -> &[FaultSignal] {
        &self.faults
    }

    fn sample_count(&self) -> usize {
        (self.duration / self.step + 1e-9).floor() as usize + 1
    }

    fn input(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(self.faults.len(), self.faults.iter().map(|f| f.value(t)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualTrace {
    pub times: Vec<f64>,
    /// `r(t_k)` for each sample.
    pub residual: Vec<DVector<f64>>,
    /// `components[i][k]` is fault `i`'s share of `r(t_k)`; empty until the
    /// trace is decomposed.
    pub components: Vec<Vec<DVector<f64>>>,
    /// Largest `|r(t) - sum_i r_i(t)|` over the samples.
    pub decomposition_defect: f64,
}

impl ResidualTrace {
    pub fn peak_residual_norm(&self) -> f64 {
        self.residual.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    /// CSV with header `t,r_1..r_p` followed by `r^(i)_1..r^(i)_p` per
    /// decomposed fault `i`.
    pub fn to_csv(&self) -> String {
        let p = self.residual.first().map_or(0, |r| r.len());
        let mut out = String::from("t");
        for k in 1..=p {
            let _ = write!(out, ",r_{k}");
        }
        for i in 1..=self.components.len() {
            for k in 1..=p {
                let _ = write!(out, ",r^({i})_{k}");
            }
        }
        out.push('\n');
        for (s, t) in self.times.iter().enumerate() {
            out.push_str(&crate::report::format_float(*t));
            let comps = self.components.iter().map(|c| &c[s]);
            for v in std::iter::once(&self.residual[s]).chain(comps) {
                for x in v.iter() {
                    out.push(',');
                    out.push_str(&crate::report::format_float(*x));
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimDiagnostics {
    pub warnings: Vec<String>,
    pub suggested_step: Option<f64>,
    pub diverged: bool,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub trace: ResidualTrace,
    pub diagnostics: SimDiagnostics,
}

/// Integrates the error system with fixed-step classical RK4.
pub fn simulate_error_system(
    sys: &NumericTriple,
    gain: &DMatrix<f64>,
    scenario: &FaultScenario,
) -> Result<Simulation> {
    let n = sys.state_dim();
    let p = sys.output_dim();
    if gain.nrows() != n || gain.ncols() != p {
        return Err(FdiError::dims(
            "observer gain",
            format!("G is {}x{}, expected {n}x{p}", gain.nrows(), gain.ncols()),
        ));
    }
    if scenario.faults.len() != sys.fault_count() {
        return Err(FdiError::dims(
            "fault scenario",
            format!(
                "{} fault signals for {} fault columns",
                scenario.faults.len(),
                sys.fault_count()
            ),
        ));
    }
    let closed = sys.a() + gain * sys.c();
    let h = scenario.step;
    let mut diagnostics = SimDiagnostics::default();
    if n > 0 {
        let radius = closed
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re.hypot(z.im))
            .fold(0.0, f64::max);
        if radius * h > RK4_STABILITY_LIMIT {
            let suggested = 0.9 * RK4_STABILITY_LIMIT / radius;
            diagnostics.warnings.push(format!(
                "step {h:e} exceeds the explicit RK4 stability limit for spectral radius {radius:e}; \
                 suggested step {suggested:e}"
            ));
            diagnostics.suggested_step = Some(suggested);
        }
    }

    let rhs =
        |t: f64, e: &DVector<f64>| -> DVector<f64> { &closed * e - sys.l() * scenario.input(t) };
    let samples = scenario.sample_count();
    let mut times = Vec::with_capacity(samples);
    let mut residual = Vec::with_capacity(samples);
    let mut e = DVector::zeros(n);
    for k in 0..samples {
        let t = k as f64 * h;
        times.push(t);
        residual.push(sys.c() * &e);
        if k + 1 == samples {
            break;
        }
        let k1 = rhs(t, &e);
        let k2 = rhs(t + h / 2.0, &(&e + &k1 * (h / 2.0)));
        let k3 = rhs(t + h / 2.0, &(&e + &k2 * (h / 2.0)));
        let k4 = rhs(t + h, &(&e + &k3 * h));
        e += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if e.norm().is_nan() || e.norm() > DIVERGENCE_LIMIT {
            diagnostics.diverged = true;
            diagnostics.warnings.push(format!(
                "error state norm exceeded {DIVERGENCE_LIMIT:e} at t = {:e}; trace truncated",
                t + h
            ));
            break;
        }
    }
    Ok(Simulation {
        trace: ResidualTrace {
            times,
            residual,
            components: Vec::new(),
            decomposition_defect: 0.0,
        },
        diagnostics,
    })
}

/// Splits every residual sample into its coordinates along the output
/// subspaces. Rejects families whose sum is not direct.
pub fn decompose_residual(
    trace: &ResidualTrace,
    output_subspaces: &[Subspace],
) -> Result<ResidualTrace> {
    let p = trace.residual.first().map_or_else(
        || output_subspaces.first().map_or(0, Subspace::ambient_dim),
        |r| r.len(),
    );
    if let Some(bad) = output_subspaces.iter().find(|s| s.ambient_dim() != p) {
        return Err(FdiError::dims(
            "residual decomposition",
            format!(
                "subspace lives in R^{}, residual in R^{p}",
                bad.ambient_dim()
            ),
        ));
    }
    let basis = stacked_basis(output_subspaces, p);
    let total: usize = output_subspaces.iter().map(Subspace::dim).sum();
    let tol = output_subspaces
        .first()
        .map(Subspace::tol)
        .unwrap_or_default();
    if total > 0 && numerical_rank(&basis, tol) < total {
        return Err(FdiError::InvalidInput(
            "output subspaces are not independent; decomposition is not unique".into(),
        ));
    }
    let pinv = if total > 0 {
        let eps = tol.rank_rel_tol * spectral_norm(&basis);
        pseudo_solve(&basis, &DMatrix::identity(p, p), eps)
    } else {
        DMatrix::zeros(0, p)
    };
    let mut components = vec![Vec::with_capacity(trace.residual.len()); output_subspaces.len()];
    let mut defect: f64 = 0.0;
    for r in &trace.residual {
        let coords = &pinv * r;
        let mut offset = 0;
        let mut sum = DVector::zeros(p);
        for (i, s) in output_subspaces.iter().enumerate() {
            let part = s.basis() * coords.rows(offset, s.dim());
            offset += s.dim();
            sum += &part;
            components[i].push(part);
        }
        defect = defect.max((r - sum).norm());
    }
    Ok(ResidualTrace {
        times: trace.times.clone(),
        residual: trace.residual.clone(),
        components,
        decomposition_defect: defect,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsolationReport {
    pub active: Vec<bool>,
    pub peak_norms: Vec<f64>,
    pub threshold: f64,
}

/// Flags fault `i` active when its component ever exceeds `threshold`.
pub fn isolate(trace: &ResidualTrace, threshold: f64) -> Result<IsolationReport> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(FdiError::InvalidInput(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    if trace.components.is_empty() && !trace.residual.is_empty() {
        return Err(FdiError::InvalidInput(
            "trace has not been decomposed".into(),
        ));
    }
    let peak_norms: Vec<f64> = trace
        .components
        .iter()
        .map(|c| c.iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect();
    Ok(IsolationReport {
        active: peak_norms.iter().map(|&m| m > threshold).collect(),
        peak_norms,
        threshold,
    })
}

/// [`isolate`] with the threshold taken relative to the peak residual norm.
pub fn isolate_relative(trace: &ResidualTrace, relative: f64) -> Result<IsolationReport> {
    isolate(trace, relative * trace.peak_residual_norm())
}
