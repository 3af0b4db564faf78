//! Dense symmetric linear algebra shared by the solver and the recovery layers.
//!
//! Conventions used throughout the crate:
//! * eigenvalues are sorted in non-increasing order, so the "bottom d"
//!   eigenvectors are the last `d` columns of [`Spectrum::vectors`];
//! * operands of symmetric routines are symmetrized as `(A + Aᵀ)/2` first;
//! * SPD systems are solved through a Cholesky factorization, never through
//!   an explicit inverse.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{GmsError, Result};

/// Relative tolerance for "is this matrix symmetric".
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance for `BᵀB = I` when a basis claims to be orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// `solve_spd` refuses matrices with `λ_min <= SPD_RATIO * λ_max`.
pub const SPD_RATIO: f64 = 1e-14;

/// A finite sample of points in `ℝᴰ`, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: DMatrix<f64>,
}

impl PointSet {
    /// Wraps an `N×D` matrix. `N` may be zero (an empty sample), `D` may not.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(GmsError::Dimension(
                "point sets need at least one coordinate".into(),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GmsError::NonFinite("point set".into()));
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(GmsError::Dimension("rows have unequal lengths".into()));
        }
        let data = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        Self::new(data)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(0, dim))
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    /// Coordinates of every point in the columns of `basis` (`X·B`).
    pub fn coordinates_in(&self, basis: &DMatrix<f64>) -> Result<PointSet> {
        if basis.nrows() != self.dim() {
            return Err(GmsError::Dimension(format!(
                "basis has {} rows, points have {} coordinates",
                basis.nrows(),
                self.dim()
            )));
        }
        PointSet::new(&self.data * basis)
    }

    /// Stacks `self` on top of `other`.
    pub fn concat(&self, other: &PointSet) -> Result<PointSet> {
        if self.dim() != other.dim() {
            return Err(GmsError::Dimension(format!(
                "cannot stack {}-dimensional and {}-dimensional points",
                self.dim(),
                other.dim()
            )));
        }
        let mut m = DMatrix::zeros(self.len() + other.len(), self.dim());
        m.rows_mut(0, self.len()).copy_from(&self.data);
        m.rows_mut(self.len(), other.len()).copy_from(&other.data);
        PointSet::new(m)
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, rows: &[usize]) -> PointSet {
        let m = DMatrix::from_fn(rows.len(), self.dim(), |i, j| self.data[(rows[i], j)]);
        PointSet { data: m }
    }

    pub fn scaled(&self, c: f64) -> Result<PointSet> {
        PointSet::new(&self.data * c)
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: DVector<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `λᵢ − λᵢ₊₁` for consecutive eigenvalues.
    pub fn eigengaps(&self) -> Vec<f64> {
        self.values
            .as_slice()
            .windows(2)
            .map(|w| w[0] - w[1])
            .collect()
    }

    /// `ln λᵢ − ln λᵢ₊₁`; fails if any eigenvalue is not strictly positive.
    pub fn log_eigengaps(&self) -> Result<Vec<f64>> {
        if let Some((index, &value)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0))
        {
            return Err(GmsError::NonPositiveEigenvalue { index, value });
        }
        Ok(self
            .values
            .as_slice()
            .windows(2)
            .map(|w| w[0].ln() - w[1].ln())
            .collect())
    }

    /// Last `d` eigenvectors (the ones with the smallest eigenvalues).
    pub fn bottom(&self, d: usize) -> DMatrix<f64> {
        let n = self.vectors.ncols();
        self.vectors.columns(n - d, d).into_owned()
    }

    /// First `d` eigenvectors (the ones with the largest eigenvalues).
    pub fn top(&self, d: usize) -> DMatrix<f64> {
        self.vectors.columns(0, d).into_owned()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        scaled * self.vectors.transpose()
    }
}

fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(GmsError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(GmsError::NonFinite("symmetric operand".into()));
    }
    let asym = asymmetry(a);
    if asym > SYMMETRY_TOL * max_abs(a).max(1.0) {
        return Err(GmsError::NotSymmetric(asym));
    }
    Ok(())
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Eigenvectors are sign-normalized (largest-magnitude entry positive) so the
/// output is a deterministic function of the input.
pub fn sym_eig(a: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(a)?;
    let eig = SymmetricEigen::new(symmetrize(a));
    Ok(ordered_spectrum(
        eig.eigenvalues.as_slice(),
        &eig.eigenvectors,
    ))
}

/// Sorts eigenpairs by non-increasing eigenvalue (stable on ties) and flips
/// each eigenvector so its largest-magnitude entry is positive.
fn ordered_spectrum(values: &[f64], vectors: &DMatrix<f64>) -> Spectrum {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let sorted = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut out = DMatrix::zeros(vectors.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |(bi, bv), (i, v)| {
                if v.abs() > bv + 1e-12 {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        out.set_column(dst, &col);
    }
    Spectrum {
        values: sorted,
        vectors: out,
    }
}

/// Spectrum of the Gram matrix `RᵀR` computed from the singular values of
/// `R`, so eigenvalues come out non-negative and the small ones keep their
/// relative accuracy. Directions outside the row space of `R` get eigenvalue
/// zero.
pub fn gram_spectrum(root: &DMatrix<f64>) -> Result<Spectrum> {
    if root.iter().any(|v| !v.is_finite()) {
        return Err(GmsError::NonFinite("matrix square root".into()));
    }
    let dim = root.ncols();
    let svd = root.transpose().svd(true, false);
    let u = svd.u.expect("requested U");
    let k = u.ncols();
    let mut values: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    vectors.columns_mut(0, k).copy_from(&u);
    if k < dim {
        let mut basis = u.clone();
        reorthonormalize(&mut basis);
        let rest = Subspace { basis }.complement();
        vectors.columns_mut(k, dim - k).copy_from(rest.basis());
        values.extend(std::iter::repeat_n(0.0, dim - k));
    }
    Ok(ordered_spectrum(&values, &vectors))
}

/// Eigenvalues only, non-increasing.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_symmetric(a)?;
    let mut v: Vec<f64> = symmetrize(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(DVector::from_vec(v))
}

/// Solves `A X = B` for symmetric positive-definite `A`.
pub fn solve_spd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(a)?;
    if b.nrows() != a.nrows() {
        return Err(GmsError::Dimension(format!(
            "right-hand side has {} rows, matrix is {}x{}",
            b.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    let a = symmetrize(a);
    let ev = a.symmetric_eigenvalues();
    let hi = ev.max();
    let lo = ev.min();
    if !(hi > 0.0) || lo <= SPD_RATIO * hi {
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        return Err(GmsError::Singular { condition });
    }
    let chol = Cholesky::new(a).ok_or(GmsError::Singular {
        condition: hi / lo,
    })?;
    Ok(chol.solve(b))
}

/// Orthonormal basis of a `d`-dimensional linear subspace of `ℝᴰ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Accepts a `D×d` basis whose columns are orthonormal to [`ORTHONORMAL_TOL`].
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() == 0 {
            return Err(GmsError::Dimension("ambient dimension must be positive".into()));
        }
        if basis.ncols() > basis.nrows() {
            return Err(GmsError::Dimension(format!(
                "{} basis vectors in a {}-dimensional space",
                basis.ncols(),
                basis.nrows()
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(GmsError::NonFinite("subspace basis".into()));
        }
        let gram = basis.transpose() * &basis;
        let dev = (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax();
        if dev > ORTHONORMAL_TOL {
            return Err(GmsError::NotOrthonormal(dev));
        }
        Ok(Self { basis })
    }

    /// Orthonormalizes the column span of `vectors`; columns that add less than
    /// `rel_tol·σ_max` to the span are dropped.
    pub fn from_span(vectors: &DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        let dim = vectors.nrows();
        if vectors.ncols() == 0 {
            return Self::new(DMatrix::zeros(dim, 0));
        }
        let basis = column_span(vectors, rel_tol);
        Self::new(basis)
    }

    /// The zero subspace `{0}` of `ℝᴰ`.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let k = self.dim();
        if k == 0 {
            return Subspace::full(n);
        }
        if k == n {
            return Subspace::zero(n);
        }
        // Eigenvectors of I - P with eigenvalue 1 span the complement.
        let residual = DMatrix::identity(n, n) - self.projector();
        let spec = sym_eig(&residual).expect("I - P is symmetric");
        let mut basis = spec.top(n - k);
        reorthonormalize(&mut basis);
        Subspace { basis }
    }

    /// Maps a subspace given in coordinates of `frame` (a `D×r` orthonormal
    /// matrix) back into `ℝᴰ`.
    pub fn embed(&self, frame: &DMatrix<f64>) -> Result<Subspace> {
        if frame.ncols() != self.ambient_dim() {
            return Err(GmsError::Dimension(format!(
                "frame has {} columns, subspace lives in {} dimensions",
                frame.ncols(),
                self.ambient_dim()
            )));
        }
        let mut basis = frame * &self.basis;
        reorthonormalize(&mut basis);
        Subspace::new(basis)
    }

    /// Image under an orthogonal map `R` (`span(R·B)`).
    pub fn rotated(&self, r: &DMatrix<f64>) -> Result<Subspace> {
        let mut basis = r * &self.basis;
        reorthonormalize(&mut basis);
        Subspace::new(basis)
    }

    pub fn contains(&self, v: &DVector<f64>, rel_tol: f64) -> bool {
        let resid = v - &self.basis * (self.basis.transpose() * v);
        resid.norm() <= rel_tol * v.norm().max(f64::MIN_POSITIVE)
    }
}

/// One pass of modified Gram-Schmidt; used to remove rounding drift from
/// bases that are orthonormal in exact arithmetic.
pub(crate) fn reorthonormalize(basis: &mut DMatrix<f64>) {
    for j in 0..basis.ncols() {
        for i in 0..j {
            let dot = basis.column(i).dot(&basis.column(j));
            let ci = basis.column(i).into_owned();
            basis.column_mut(j).axpy(-dot, &ci, 1.0);
        }
        let n = basis.column(j).norm();
        if n > 0.0 {
            basis.column_mut(j).unscale_mut(n);
        }
    }
}

/// Orthonormal basis of the column span of `m` via its SVD.
fn column_span(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut basis = DMatrix::zeros(m.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    reorthonormalize(&mut basis);
    basis
}

/// Relative singular-value threshold used for numerical rank decisions:
/// `max(N, D)·ε`, as in the usual floating-point rank convention.
pub fn rank_tolerance(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Orthonormal basis (`D×r`) of the span of the points, ordered by
/// decreasing singular value; `r` is the numerical rank of `X`.
pub fn data_span(x: &PointSet) -> DMatrix<f64> {
    if x.is_empty() {
        return DMatrix::zeros(x.dim(), 0);
    }
    let tol = rank_tolerance(x.len(), x.dim());
    column_span(&x.matrix().transpose(), tol)
}

pub fn numerical_rank(x: &PointSet) -> usize {
    if x.is_empty() {
        return 0;
    }
    let tol = rank_tolerance(x.len(), x.dim());
    let sv = x.matrix().singular_values();
    let smax = sv.max();
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthogonal projector `BBᵀ`.
pub fn projector(s: &Subspace) -> DMatrix<f64> {
    s.projector()
}

/// Frobenius distance between the orthogonal projectors onto two subspaces.
pub fn recovery_error(a: &Subspace, b: &Subspace) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(GmsError::Dimension(format!(
            "subspaces live in {} and {} dimensions",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    // ‖P_a − P_b‖²_F = d_a + d_b − 2‖A_aᵀ B_b‖²_F, but rounding in that form
    // floors around 1e-8, so form the difference explicitly.
    Ok((a.projector() - b.projector()).norm())
}
