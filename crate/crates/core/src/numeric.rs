//! FDI solvability for a concrete system `(A, L, C)`.
//!
//! The index `d_i` of fault column `i` is the smallest `d >= 1` with
//! `C A^(d-1) L_i != 0`; it is at most `n` when it exists. The problem is
//! solvable exactly when every index exists and the matrix
//! `R = [C A^(d_1-1) L_1 ... C A^(d_q-1) L_q]` has full column rank.

use nalgebra::{DMatrix, DVector};

use crate::error::{FdiError, Result};
use crate::linalg::{self, hcat, spectral_norm, Subspace, ToleranceConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct NumericTriple {
    a: DMatrix<f64>,
    l: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl NumericTriple {
    pub fn new(a: DMatrix<f64>, l: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(FdiError::dims(
                "block A",
                format!("A is {}x{}, expected square", n, a.ncols()),
            ));
        }
        if l.nrows() != n {
            return Err(FdiError::dims(
                "block L",
                format!("L has {} rows, A is {n}x{n}", l.nrows()),
            ));
        }
        if c.ncols() != n {
            return Err(FdiError::dims(
                "block C",
                format!("C has {} columns, A is {n}x{n}", c.ncols()),
            ));
        }
        if a.iter()
            .chain(l.iter())
            .chain(c.iter())
            .any(|x| !x.is_finite())
        {
            return Err(FdiError::InvalidInput(
                "system matrices contain non-finite entries".into(),
            ));
        }
        Ok(Self { a, l, c })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn fault_count(&self) -> usize {
        self.l.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub(crate) fn check_fault(&self, i: usize) -> Result<()> {
        if i >= self.fault_count() {
            return Err(FdiError::FaultOutOfRange {
                index: i,
                count: self.fault_count(),
            });
        }
        Ok(())
    }

    pub fn fault_direction(&self, i: usize) -> Result<DMatrix<f64>> {
        self.check_fault(i)?;
        Ok(self.l.columns(i, 1).into_owned())
    }

    /// `C A^j L_i`.
    pub fn markov_parameter(&self, i: usize, j: usize) -> Result<DVector<f64>> {
        self.check_fault(i)?;
        let mut v: DVector<f64> = self.l.column(i).into_owned();
        for _ in 0..j {
            v = &self.a * v;
        }
        Ok(&self.c * v)
    }
}

/// Scans `C A^j L_i` for `j < limit`. A vector counts as nonzero when its
/// largest entry exceeds `zero_abs_tol * |C| |A|^j |L_i|` (Frobenius norms).
pub fn fault_index_within(
    sys: &NumericTriple,
    i: usize,
    tol: ToleranceConfig,
    limit: usize,
) -> Result<Option<usize>> {
    sys.check_fault(i)?;
    let c_norm = sys.c.norm();
    let a_norm = sys.a.norm();
    let mut v: DVector<f64> = sys.l.column(i).into_owned();
    let mut scale = c_norm * v.norm();
    for j in 0..limit {
        if j > 0 {
            v = &sys.a * v;
            scale *= a_norm;
        }
        let w = &sys.c * &v;
        if w.amax() > tol.zero_abs_tol * scale {
            return Ok(Some(j + 1));
        }
    }
    Ok(None)
}

pub fn fault_index(sys: &NumericTriple, i: usize, tol: ToleranceConfig) -> Result<Option<usize>> {
    fault_index_within(sys, i, tol, sys.state_dim())
}

pub fn fault_indices(sys: &NumericTriple, tol: ToleranceConfig) -> Result<Vec<Option<usize>>> {
    (0..sys.fault_count())
        .map(|i| fault_index(sys, i, tol))
        .collect()
}

fn assemble_r(sys: &NumericTriple, d: &[Option<usize>]) -> Result<DMatrix<f64>> {
    let missing: Vec<usize> = d
        .iter()
        .enumerate()
        .filter_map(|(i, di)| di.is_none().then_some(i))
        .collect();
    if !missing.is_empty() {
        return Err(FdiError::MissingIndex(missing));
    }
    let mut r = DMatrix::zeros(sys.output_dim(), sys.fault_count());
    for (i, di) in d.iter().enumerate() {
        let di = di.expect("checked above");
        r.set_column(i, &sys.markov_parameter(i, di - 1)?);
    }
    Ok(r)
}

/// `R = [C A^(d_1-1) L_1 ... C A^(d_q-1) L_q]`.
pub fn build_r(sys: &NumericTriple, tol: ToleranceConfig) -> Result<DMatrix<f64>> {
    assemble_r(sys, &fault_indices(sys, tol)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumericReason {
    /// Zero-based fault column without an index.
    MissingIndex {
        fault: usize,
    },
    RankDeficient {
        rank: usize,
        required: usize,
    },
    FullColumnRank,
}

#[derive(Clone, Debug)]
pub struct NumericReport {
    pub d: Vec<Option<usize>>,
    pub r: Option<DMatrix<f64>>,
    pub rank_of_r: usize,
    pub solvable: bool,
    /// Smallest `(C, A)`-invariant subspace containing `im L_i`.
    pub fault_subspaces: Vec<Subspace>,
    /// `C` applied to the matching fault subspace.
    pub output_subspaces: Vec<Subspace>,
    pub reasons: Vec<NumericReason>,
}

/// Full solvability analysis. Missing indices make the system unsolvable;
/// they are reported, not raised.
pub fn is_solvable(sys: &NumericTriple, tol: ToleranceConfig) -> Result<NumericReport> {
    let d = fault_indices(sys, tol)?;
    let mut reasons: Vec<NumericReason> = d
        .iter()
        .enumerate()
        .filter_map(|(i, di)| {
            di.is_none()
                .then_some(NumericReason::MissingIndex { fault: i })
        })
        .collect();
    let r = if reasons.is_empty() {
        Some(assemble_r(sys, &d)?)
    } else {
        None
    };
    let rank_of_r = r.as_ref().map_or(0, |r| linalg::numerical_rank(r, tol));
    let q = sys.fault_count();
    let solvable = r.is_some() && rank_of_r == q;
    if r.is_some() {
        reasons.push(if solvable {
            NumericReason::FullColumnRank
        } else {
            NumericReason::RankDeficient {
                rank: rank_of_r,
                required: q,
            }
        });
    }
    let fault_subspaces = (0..q)
        .map(|i| fault_subspace(sys, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let output_subspaces = fault_subspaces
        .iter()
        .map(|s| s.map(&sys.c))
        .collect::<Result<Vec<_>>>()?;
    Ok(NumericReport {
        d,
        r,
        rank_of_r,
        solvable,
        fault_subspaces,
        output_subspaces,
        reasons,
    })
}

/// Smallest `(C, A)`-invariant subspace containing `im L_i`, from the
/// subspace iteration.
pub fn fault_subspace(sys: &NumericTriple, i: usize, tol: ToleranceConfig) -> Result<Subspace> {
    let d = linalg::image(&sys.fault_direction(i)?, tol);
    linalg::conditioned_invariant(&sys.a, &sys.c, &d, tol)
}

/// `C` applied to the fault subspace, from the closed form: the span of
/// `C A^(d_i-1) L_i` when the index exists, trivial otherwise.
pub fn fault_output_subspace(
    sys: &NumericTriple,
    i: usize,
    tol: ToleranceConfig,
) -> Result<Subspace> {
    match fault_index(sys, i, tol)? {
        Some(d) => {
            let v = sys.markov_parameter(i, d - 1)?;
            Ok(linalg::image(
                &DMatrix::from_column_slice(v.len(), 1, v.as_slice()),
                tol,
            ))
        }
        None => Ok(Subspace::trivial(sys.output_dim(), tol)),
    }
}

/// Whether the sum of the subspaces is direct.
pub fn output_separability(subspaces: &[Subspace]) -> Result<bool> {
    let Some(first) = subspaces.first() else {
        return Ok(true);
    };
    let mut total = Subspace::trivial(first.ambient_dim(), first.tol());
    let mut dims = 0;
    for s in subspaces {
        total = total.sum(s)?;
        dims += s.dim();
    }
    Ok(total.dim() == dims)
}

#[derive(Clone, Debug)]
pub struct FriendGain {
    pub gain: DMatrix<f64>,
    /// Largest invariance defect `|(I - P_i)(A + G C) V_i|` over the family.
    pub residual_norm: f64,
}

/// Largest distance from `s` of `m` applied to a unit vector of `s`.
pub fn invariance_defect(m: &DMatrix<f64>, s: &Subspace) -> f64 {
    if s.is_trivial() {
        return 0.0;
    }
    let image = m * s.basis();
    let inside = s.basis() * (s.basis().transpose() * &image);
    spectral_norm(&(image - inside))
}

/// Common friend `G` of a family of `(C, A)`-invariant subspaces: solves
/// `(A + G C) V_i = V_i X_i` for all `i` jointly in the least-squares sense,
/// with unknowns `G` and the `X_i`.
pub fn compute_friend(
    sys: &NumericTriple,
    subspaces: &[Subspace],
    tol: ToleranceConfig,
) -> Result<FriendGain> {
    let n = sys.state_dim();
    let p = sys.output_dim();
    if let Some(bad) = subspaces.iter().find(|s| s.ambient_dim() != n) {
        return Err(FdiError::dims(
            "friend synthesis",
            format!(
                "subspace lives in R^{}, state dimension is {n}",
                bad.ambient_dim()
            ),
        ));
    }
    let g_unknowns = n * p;
    let rows: usize = subspaces.iter().map(|s| n * s.dim()).sum();
    let cols = g_unknowns + subspaces.iter().map(|s| s.dim() * s.dim()).sum::<usize>();
    let mut gain = DMatrix::zeros(n, p);
    if rows > 0 && g_unknowns > 0 {
        let mut m = DMatrix::zeros(rows, cols);
        let mut rhs = DVector::zeros(rows);
        let (mut row_off, mut x_off) = (0, g_unknowns);
        for s in subspaces {
            let v = s.basis();
            let k = s.dim();
            let cv = &sys.c * v;
            let av = &sys.a * v;
            for col in 0..k {
                for r in 0..n {
                    let row = row_off + col * n + r;
                    // G C V_i: unknown G[(r, t)] sits at t * n + r.
                    for t in 0..p {
                        m[(row, t * n + r)] = cv[(t, col)];
                    }
                    // - V_i X_i: unknown X_i[(t, col)] sits at x_off + col * k + t.
                    for t in 0..k {
                        m[(row, x_off + col * k + t)] = -v[(r, t)];
                    }
                    rhs[row] = -av[(r, col)];
                }
            }
            row_off += n * k;
            x_off += k * k;
        }
        let sigma_max = linalg::spectral_norm(&m);
        let sol = linalg::pseudo_solve(
            &m,
            &DMatrix::from_column_slice(rows, 1, rhs.as_slice()),
            tol.rank_rel_tol * sigma_max,
        );
        for t in 0..p {
            for r in 0..n {
                gain[(r, t)] = sol[t * n + r];
            }
        }
    }
    let closed = &sys.a + &gain * &sys.c;
    let residual_norm = subspaces
        .iter()
        .map(|s| invariance_defect(&closed, s))
        .fold(0.0, f64::max);
    if residual_norm.is_nan() || residual_norm > tol.zero_abs_tol {
        return Err(FdiError::Numerical(format!(
            "no common friend at tolerance: invariance defect {residual_norm:e} exceeds {:e}",
            tol.zero_abs_tol
        )));
    }
    Ok(FriendGain {
        gain,
        residual_norm,
    })
}

/// Stacks the bases of a family into one matrix.
pub fn stacked_basis(subspaces: &[Subspace], ambient_dim: usize) -> DMatrix<f64> {
    subspaces
        .iter()
        .fold(DMatrix::zeros(ambient_dim, 0), |acc, s| {
            hcat(&acc, s.basis())
        })
}
