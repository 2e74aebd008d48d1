//! Subspace arithmetic on dense real matrices.
//!
//! Subspaces carry an orthonormal basis. The trivial subspace has a basis
//! with zero columns. Rank decisions come from the SVD: a singular value
//! counts as zero when it is at most
//! `max(rank_rel_tol * sigma_max, zero_abs_tol)`.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{FdiError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig {
    /// Singular values below this fraction of the largest are zero.
    pub rank_rel_tol: f64,
    /// Absolute floor below which vectors and singular values are zero.
    pub zero_abs_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-10,
            zero_abs_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rank_rel_tol: f64, zero_abs_tol: f64) -> Result<Self> {
        if !(rank_rel_tol > 0.0 && rank_rel_tol.is_finite()) {
            return Err(FdiError::InvalidInput(format!(
                "rank tolerance must be positive, got {rank_rel_tol}"
            )));
        }
        if !(zero_abs_tol > 0.0 && zero_abs_tol.is_finite()) {
            return Err(FdiError::InvalidInput(format!(
                "zero tolerance must be positive, got {zero_abs_tol}"
            )));
        }
        Ok(Self {
            rank_rel_tol,
            zero_abs_tol,
        })
    }

    fn cutoff(&self, sigma_max: f64) -> f64 {
        (self.rank_rel_tol * sigma_max).max(self.zero_abs_tol)
    }
}

/// Linear subspace of `R^n` with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: DMatrix<f64>,
    tol: ToleranceConfig,
}

impl Subspace {
    pub fn trivial(ambient_dim: usize, tol: ToleranceConfig) -> Self {
        Self {
            basis: DMatrix::zeros(ambient_dim, 0),
            tol,
        }
    }

    pub fn full(ambient_dim: usize, tol: ToleranceConfig) -> Self {
        Self {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
            tol,
        }
    }

    /// Span of the given column vectors.
    pub fn span(vectors: &DMatrix<f64>, tol: ToleranceConfig) -> Self {
        image(vectors, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn tol(&self) -> ToleranceConfig {
        self.tol
    }

    fn check_ambient(&self, other: &Subspace, context: &str) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(FdiError::dims(
                context,
                format!(
                    "ambient dimensions {} and {} differ",
                    self.ambient_dim(),
                    other.ambient_dim()
                ),
            ));
        }
        Ok(())
    }

    /// Component of each column of `m` orthogonal to this subspace.
    fn residual(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        if self.is_trivial() {
            return m.clone();
        }
        m - &self.basis * (self.basis.transpose() * m)
    }

    pub fn contains_vector(&self, v: &DVector<f64>) -> bool {
        let r = self.residual(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()));
        r.norm() <= self.tol.zero_abs_tol * v.norm().max(1.0)
    }

    /// Largest distance from `self` of a unit vector of `other`.
    pub fn containment_defect(&self, other: &Subspace) -> f64 {
        if other.is_trivial() {
            return 0.0;
        }
        spectral_norm(&self.residual(&other.basis))
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.containment_defect(other) <= self.tol.zero_abs_tol
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other, "subspace sum")?;
        let stacked = hcat(&self.basis, &other.basis);
        Ok(image(&stacked, self.tol))
    }

    /// Intersection from the null space of `[B_S | -B_T]`, mapped back
    /// through `B_S`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other, "subspace intersection")?;
        if self.is_trivial() || other.is_trivial() {
            return Ok(Subspace::trivial(self.ambient_dim(), self.tol));
        }
        let stacked = hcat(&self.basis, &(-&other.basis));
        let null = kernel(&stacked, self.tol);
        if null.is_trivial() {
            return Ok(Subspace::trivial(self.ambient_dim(), self.tol));
        }
        let coords = null.basis.rows(0, self.dim()).into_owned();
        Ok(image(&(&self.basis * coords), self.tol))
    }

    /// Image of the subspace under `m`.
    pub fn map(&self, m: &DMatrix<f64>) -> Result<Subspace> {
        if m.ncols() != self.ambient_dim() {
            return Err(FdiError::dims(
                "subspace map",
                format!(
                    "matrix has {} columns, subspace lives in R^{}",
                    m.ncols(),
                    self.ambient_dim()
                ),
            ));
        }
        Ok(image(&(m * &self.basis), self.tol))
    }

    /// Largest principal angle in radians; `pi/2` when dimensions differ.
    pub fn max_principal_angle(&self, other: &Subspace) -> Result<f64> {
        self.check_ambient(other, "principal angles")?;
        if self.dim() != other.dim() {
            return Ok(std::f64::consts::FRAC_PI_2);
        }
        let s = self.containment_defect(other).min(1.0);
        Ok(s.asin())
    }
}

pub(crate) fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `m = U diag(s) V^T` with singular values in nonincreasing order. Thin
/// unless `full_v`, in which case `V` is square.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>, full_v: bool) -> Svd {
    let (r, c) = m.shape();
    let f = Mat::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = if full_v { f.svd() } else { f.thin_svd() };
    match dec {
        Ok(d) => {
            let (u, s, v) = (d.U(), d.S().column_vector(), d.V());
            Svd {
                u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
                s: DVector::from_fn(s.nrows(), |i, _| s[i]),
                v: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
            }
        }
        // Only reachable for non-finite input.
        Err(_) => Svd {
            u: DMatrix::from_element(r, r.min(c), f64::NAN),
            s: DVector::from_element(r.min(c), f64::NAN),
            v: DMatrix::from_element(c, if full_v { c } else { r.min(c) }, f64::NAN),
        },
    }
}

/// Minimum-norm least-squares solution of `m x = rhs`, ignoring singular
/// values at or below `eps`.
pub(crate) fn pseudo_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let d = svd(m, false);
    let mut coords = d.u.transpose() * rhs;
    for (k, &sigma) in d.s.iter().enumerate() {
        let scale = if sigma > eps { 1.0 / sigma } else { 0.0 };
        coords.row_mut(k).scale_mut(scale);
    }
    d.v * coords
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    svd(m, false).s.max()
}

pub fn numerical_rank(m: &DMatrix<f64>, tol: ToleranceConfig) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = svd(m, false).s;
    let cut = tol.cutoff(sv.max());
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis of the column space.
pub fn image(m: &DMatrix<f64>, tol: ToleranceConfig) -> Subspace {
    if m.is_empty() {
        return Subspace::trivial(m.nrows(), tol);
    }
    let d = svd(m, false);
    let cut = tol.cutoff(d.s.max());
    let keep: Vec<usize> = (0..d.s.len()).filter(|&k| d.s[k] > cut).collect();
    Subspace {
        basis: d.u.select_columns(&keep),
        tol,
    }
}

/// Orthonormal basis of the null space.
pub fn kernel(m: &DMatrix<f64>, tol: ToleranceConfig) -> Subspace {
    let n = m.ncols();
    if n == 0 {
        return Subspace::trivial(0, tol);
    }
    if m.nrows() == 0 {
        return Subspace::full(n, tol);
    }
    let d = svd(m, true);
    let cut = tol.cutoff(d.s.max());
    // Right vectors past the last singular value span part of the kernel.
    let keep: Vec<usize> = (0..n)
        .filter(|&k| k >= d.s.len() || d.s[k] <= cut)
        .collect();
    Subspace {
        basis: d.v.select_columns(&keep),
        tol,
    }
}

/// Iterates `S^0 = D`, `S^k = D + A (S^(k-1) ∩ ker C)` and returns every
/// distinct iterate, the last being the smallest `(C, A)`-invariant
/// subspace containing `D`.
pub fn conditioned_invariant_sequence(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &Subspace,
    tol: ToleranceConfig,
) -> Result<Vec<Subspace>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(FdiError::dims(
            "conditioned invariant",
            format!("A is {}x{}", n, a.ncols()),
        ));
    }
    if c.ncols() != n {
        return Err(FdiError::dims(
            "conditioned invariant",
            format!("C has {} columns, A is {n}x{n}", c.ncols()),
        ));
    }
    if d.ambient_dim() != n {
        return Err(FdiError::dims(
            "conditioned invariant",
            format!("D lives in R^{}, A is {n}x{n}", d.ambient_dim()),
        ));
    }
    let ker_c = kernel(c, tol);
    let d = Subspace {
        basis: d.basis.clone(),
        tol,
    };
    let mut seq = vec![d.clone()];
    for _ in 0..=n {
        let current = seq.last().expect("sequence starts with D");
        let hidden = current.intersect(&ker_c)?;
        let next = d.sum(&hidden.map(a)?)?;
        if next.dim() == current.dim() && current.contains(&next) {
            return Ok(seq);
        }
        seq.push(next);
    }
    Err(FdiError::Numerical(format!(
        "conditioned invariant iteration did not settle within {} steps",
        n + 1
    )))
}

pub fn conditioned_invariant(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &Subspace,
    tol: ToleranceConfig,
) -> Result<Subspace> {
    Ok(conditioned_invariant_sequence(a, c, d, tol)?
        .pop()
        .expect("sequence is nonempty"))
}
