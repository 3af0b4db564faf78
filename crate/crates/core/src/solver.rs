//! The convex M-estimator `Q̂ = argmin_{Q ∈ ℍ} Σᵢ ‖Q xᵢ‖` over symmetric
//! trace-one matrices, computed by iteratively re-weighted least squares on
//! the Huber-smoothed objective `F_δ`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{GmsError, Result};
use crate::numerics::{self, PointSet, Spectrum, Subspace};

/// Step-norm threshold below which an iteration is treated as a fixed point.
pub const STEP_TOLERANCE: f64 = 1e-15;
/// Largest ambient dimension accepted by [`convergence_rate_bound`].
pub const RATE_BOUND_MAX_DIM: usize = 30;
/// A checkpoint that lowers the objective by at most this many ulps ends the
/// run as converged.
pub const STALL_ULPS: f64 = 4.0;
const TRACE_TOL: f64 = 1e-10;

/// A symmetric matrix with unit trace, an element of `ℍ`.
///
/// Iterates produced by the solver also carry a factor `R` with `Q = RᵀR`,
/// from which the spectrum is read with full relative accuracy in the small
/// eigenvalues.
#[derive(Debug, Clone)]
pub struct ScaledQ {
    q: DMatrix<f64>,
    root: Option<DMatrix<f64>>,
}

impl PartialEq for ScaledQ {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

impl ScaledQ {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(GmsError::Dimension(format!(
                "Q must be square and non-empty, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(GmsError::NonFinite("Q".into()));
        }
        let asym = numerics::asymmetry(&q);
        if asym > numerics::SYMMETRY_TOL * q.amax().max(1.0) {
            return Err(GmsError::NotSymmetric(asym));
        }
        let tr = q.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(GmsError::InvalidArgument(format!(
                "Q must have unit trace, got {tr}"
            )));
        }
        Ok(Self {
            q: numerics::symmetrize(&q),
            root: None,
        })
    }

    /// Symmetrizes `m` and rescales it to unit trace.
    pub fn normalized(m: &DMatrix<f64>) -> Result<Self> {
        let s = numerics::symmetrize(m);
        let tr = s.trace();
        if !(tr.is_finite() && tr.abs() > 0.0) {
            return Err(GmsError::NonFinite("trace normalization".into()));
        }
        let q = s / tr;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(GmsError::NonFinite("trace normalization".into()));
        }
        Ok(Self { q, root: None })
    }

    /// `RᵀR / ‖R‖²_F`.
    pub fn from_root(root: DMatrix<f64>) -> Result<Self> {
        let t = root.norm_squared();
        if !(t.is_finite() && t > 0.0) {
            return Err(GmsError::NonFinite("matrix square root".into()));
        }
        let root = root / t.sqrt();
        let q = numerics::symmetrize(&(root.transpose() * &root));
        Ok(Self {
            q,
            root: Some(root),
        })
    }

    /// `I/D`.
    pub fn scalar(dim: usize) -> Self {
        let root = DMatrix::identity(dim, dim) / (dim as f64).sqrt();
        Self {
            q: DMatrix::identity(dim, dim) / dim as f64,
            root: Some(root),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.q
    }

    pub fn spectrum(&self) -> Spectrum {
        match &self.root {
            Some(r) => numerics::gram_spectrum(r),
            None => numerics::sym_eig(&self.q),
        }
        .expect("ScaledQ is finite and symmetric by construction")
    }

    /// `F Q Fᵀ` for an orthonormal frame `F` (`D×m`, `Q` is `m×m`).
    pub fn embed(&self, frame: &DMatrix<f64>) -> Result<ScaledQ> {
        if frame.ncols() != self.dim() {
            return Err(GmsError::Dimension(format!(
                "frame has {} columns, Q is {}x{}",
                frame.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        match &self.root {
            Some(r) => ScaledQ::from_root(r * frame.transpose()),
            None => ScaledQ::normalized(&(frame * &self.q * frame.transpose())),
        }
    }

    /// `Fᵀ Q F`, renormalized; falls back to `I/m` when the compression has
    /// no trace left.
    pub fn compress(&self, frame: &DMatrix<f64>) -> ScaledQ {
        let m = frame.transpose() * &self.q * frame;
        ScaledQ::normalized(&m).unwrap_or_else(|_| ScaledQ::scalar(frame.ncols()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.root {
            Some(_) => self.spectrum().values.min(),
            None => self.q.symmetric_eigenvalues().min(),
        }
    }
}

/// Settings for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct IrlsConfig {
    /// Huber smoothing radius of `F_δ`.
    pub delta: f64,
    pub max_iter: usize,
    /// The smoothed objective is evaluated every `check_every` steps and the
    /// iteration stops the first time it increases.
    pub check_every: usize,
    /// Weight of the `λ‖Q‖²_F` penalty.
    pub ridge_lambda: Option<f64>,
    /// Starting point; `I/D` when absent.
    pub q0: Option<DMatrix<f64>>,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        Self {
            delta: 1e-20,
            max_iter: 100,
            check_every: 4,
            ridge_lambda: None,
            q0: None,
        }
    }
}

impl IrlsConfig {
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_ridge(mut self, lambda: f64) -> Self {
        self.ridge_lambda = Some(lambda);
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_q0(mut self, q0: DMatrix<f64>) -> Self {
        self.q0 = Some(q0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(GmsError::InvalidArgument(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.check_every == 0 {
            return Err(GmsError::InvalidArgument("check_every must be at least 1".into()));
        }
        if let Some(l) = self.ridge_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(GmsError::InvalidArgument(format!(
                    "ridge lambda must be non-negative, got {l}"
                )));
            }
        }
        Ok(())
    }

    fn ridge(&self) -> f64 {
        self.ridge_lambda.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ObjectiveIncrease,
    MaxIter,
    StepTolerance,
    /// The next iterate would exceed the allowed condition number.
    ConditionLimit,
}

/// Outcome of one IRLS run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub q_hat: ScaledQ,
    pub iterations: usize,
    /// Objective at `Q₀` followed by its value at every checkpoint.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub fixed_point_residual: f64,
    pub stop_reason: StopReason,
    /// Set when the objective vanishes identically and `q_hat` is just one of
    /// many minimizers.
    pub degenerate: bool,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_dims(q: &ScaledQ, x: &PointSet) -> Result<()> {
    if q.dim() != x.dim() {
        return Err(GmsError::Dimension(format!(
            "Q is {}x{} but points have {} coordinates",
            q.dim(),
            q.dim(),
            x.dim()
        )));
    }
    Ok(())
}

/// `‖Q xᵢ‖` for every point.
fn image_norms(q: &DMatrix<f64>, x: &DMatrix<f64>) -> DVector<f64> {
    // Rows of X·Q are (Q xᵢ)ᵀ since Q is symmetric.
    let xq = x * q;
    DVector::from_iterator(xq.nrows(), xq.row_iter().map(|r| r.norm()))
}

fn huber(n: f64, delta: f64) -> f64 {
    if n >= delta {
        n
    } else {
        n * n / (2.0 * delta) + delta / 2.0
    }
}

/// `F(Q) = Σᵢ ‖Q xᵢ‖`.
pub fn objective(q: &ScaledQ, x: &PointSet) -> Result<f64> {
    check_dims(q, x)?;
    Ok(image_norms(q.matrix(), x.matrix()).sum())
}

/// Smoothed objective `F_δ`: quadratic below `δ`, linear above.
pub fn objective_regularized(q: &ScaledQ, x: &PointSet, delta: f64) -> Result<f64> {
    check_dims(q, x)?;
    if !(delta > 0.0) {
        return Err(GmsError::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    Ok(smoothed(q.matrix(), x.matrix(), delta))
}

fn smoothed(q: &DMatrix<f64>, x: &DMatrix<f64>, delta: f64) -> f64 {
    image_norms(q, x).iter().map(|&n| huber(n, delta)).sum()
}

/// `F_δ(Q) + λ‖Q‖²_F`, the quantity the IRLS iteration decreases.
fn penalized(q: &DMatrix<f64>, x: &DMatrix<f64>, delta: f64, lambda: f64) -> f64 {
    let base = smoothed(q, x, delta);
    if lambda > 0.0 {
        base + lambda * q.norm_squared()
    } else {
        base
    }
}

/// `Σᵢ xᵢxᵢᵀ / max(‖Q xᵢ‖, δ)`.
fn weighted_covariance(q: &DMatrix<f64>, x: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    let norms = image_norms(q, x);
    let mut wx = x.clone();
    for (mut row, n) in wx.row_iter_mut().zip(norms.iter()) {
        row /= n.max(delta);
    }
    numerics::symmetrize(&(x.transpose() * wx))
}

/// Scaling `A = S H S` to unit diagonal.
fn unit_diagonal(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let s: Vec<f64> = (0..n).map(|i| a[(i, i)].sqrt()).collect();
    if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GmsError::Singular {
            condition: f64::INFINITY,
        });
    }
    let h = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (s[i] * s[j]));
    Ok((s, h))
}

fn step_unchecked(q: &ScaledQ, x: &DMatrix<f64>, delta: f64, lambda: f64) -> Result<ScaledQ> {
    // Late iterates weight the points near ker(Q) by up to 1/δ, so A is
    // conditioned far beyond what a direct factorization resolves. In the
    // eigenbasis of Q those heavy directions line up with coordinate axes;
    // after scaling A to unit diagonal the Cholesky factor is accurate and
    // A⁻¹ = GᵀG with G = L⁻¹S⁻¹ keeps the small block of A⁻¹ to full
    // relative precision.
    let spec = q.spectrum();
    let v = &spec.vectors;
    let y = x * v;
    let mut wy = y.clone();
    for (mut row, yr) in wy.row_iter_mut().zip(y.row_iter()) {
        let n = yr
            .iter()
            .zip(spec.values.iter())
            .map(|(c, l)| (c * l) * (c * l))
            .sum::<f64>()
            .sqrt();
        row /= n.max(delta);
    }
    let mut a = numerics::symmetrize(&(y.transpose() * wy));
    if lambda > 0.0 {
        for i in 0..a.nrows() {
            a[(i, i)] += 2.0 * lambda;
        }
    }
    let (s, h) = unit_diagonal(&a)?;
    let n = a.nrows();
    match Cholesky::new(h.clone()) {
        Some(ch) => {
            let sinv = DMatrix::from_diagonal(&DVector::from_iterator(n, s.iter().map(|v| 1.0 / v)));
            let g = ch
                .l()
                .solve_lower_triangular(&sinv)
                .ok_or(GmsError::Singular {
                    condition: f64::INFINITY,
                })?;
            ScaledQ::from_root(g * v.transpose())
        }
        None => {
            let hinv = h.try_inverse().ok_or(GmsError::Singular {
                condition: f64::INFINITY,
            })?;
            let inv = DMatrix::from_fn(n, n, |i, j| hinv[(i, j)] / (s[i] * s[j]));
            ScaledQ::normalized(&(v * inv * v.transpose()))
        }
    }
}

fn ensure_full_rank(x: &PointSet) -> Result<()> {
    let rank = numerics::numerical_rank(x);
    if rank < x.dim() {
        return Err(GmsError::RankDeficient {
            rank,
            dim: x.dim(),
        });
    }
    Ok(())
}

/// One IRLS update: the minimizer over `ℍ` of the weighted quadratic
/// `Σᵢ ‖Q xᵢ‖² / max(‖Qₖ xᵢ‖, δ)` (plus `λ‖Q‖²_F` when a ridge is given),
/// which is `A⁻¹ / tr(A⁻¹)` for the weighted covariance `A`.
pub fn irls_step(
    q: &ScaledQ,
    x: &PointSet,
    delta: f64,
    ridge_lambda: Option<f64>,
) -> Result<ScaledQ> {
    check_dims(q, x)?;
    if !(delta > 0.0) {
        return Err(GmsError::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let lambda = ridge_lambda.unwrap_or(0.0);
    if lambda <= 0.0 {
        ensure_full_rank(x)?;
    }
    step_unchecked(q, x.matrix(), delta, lambda)
}

fn initial_q(cfg: &IrlsConfig, dim: usize) -> Result<ScaledQ> {
    match &cfg.q0 {
        None => Ok(ScaledQ::scalar(dim)),
        Some(q0) => {
            let q = ScaledQ::new(q0.clone())?;
            if q.dim() != dim {
                return Err(GmsError::Dimension(format!(
                    "initial Q is {}x{}, data are {}-dimensional",
                    q.dim(),
                    q.dim(),
                    dim
                )));
            }
            Ok(q)
        }
    }
}

/// Minimizes `F_δ` (plus the optional ridge penalty) over `ℍ`.
///
/// Iterates [`irls_step`] from `cfg.q0`. The objective is evaluated every
/// `cfg.check_every` steps; the run stops at the first checkpoint whose value
/// exceeds the previous one, at a checkpoint that gains no more than
/// [`STALL_ULPS`] ulps, when a step moves `Q` by less than
/// [`STEP_TOLERANCE`], or after `cfg.max_iter` steps. The checkpoint with the
/// smallest objective is returned.
pub fn minimize(x: &PointSet, cfg: &IrlsConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(GmsError::InvalidArgument("cannot minimize over an empty sample".into()));
    }
    let lambda = cfg.ridge();
    if lambda <= 0.0 {
        ensure_full_rank(x)?;
    }
    let xm = x.matrix();
    let mut q = initial_q(cfg, x.dim())?;
    let f0 = penalized(q.matrix(), xm, cfg.delta, lambda);
    let mut trace = vec![f0];
    let mut best = (f0, q.clone());
    let mut last_check = f0;
    let mut stop = StopReason::MaxIter;
    let mut iterations = 0;

    for k in 0..cfg.max_iter {
        let next = match step_unchecked(&q, xm, cfg.delta, lambda) {
            Ok(next) => next,
            // A failed factorization means the weights have run past what
            // double precision resolves; treat it like an objective increase.
            Err(_) => {
                stop = StopReason::ObjectiveIncrease;
                break;
            }
        };
        iterations = k + 1;
        let moved = (next.matrix() - q.matrix()).norm();
        q = next;

        if moved < STEP_TOLERANCE {
            let f = penalized(q.matrix(), xm, cfg.delta, lambda);
            trace.push(f);
            if f <= best.0 {
                best = (f, q.clone());
            }
            stop = StopReason::StepTolerance;
            break;
        }
        if iterations % cfg.check_every == 0 {
            let f = penalized(q.matrix(), xm, cfg.delta, lambda);
            if !f.is_finite() {
                stop = StopReason::ObjectiveIncrease;
                break;
            }
            trace.push(f);
            if f < best.0 {
                best = (f, q.clone());
            }
            if f > last_check {
                stop = StopReason::ObjectiveIncrease;
                break;
            }
            // No decrease beyond rounding: further steps only feed rounding
            // noise through weights near 1/δ.
            if last_check - f <= STALL_ULPS * f64::EPSILON * last_check.abs() {
                stop = StopReason::StepTolerance;
                break;
            }
            last_check = f;
        }
    }

    let q_hat = best.1;
    let residual = residual_with_ridge(q_hat.matrix(), xm, cfg.delta, lambda);
    Ok(SolveReport {
        q_hat,
        iterations,
        objective_trace: trace,
        converged: stop != StopReason::MaxIter,
        fixed_point_residual: residual,
        stop_reason: stop,
        degenerate: false,
    })
}

/// Minimizes over `Q ∈ ℍ` with `Q·P = 0` for the projector `P` onto
/// `annihilate`, by solving in coordinates of the orthogonal complement and
/// embedding the result back into `ℝᴰ`.
pub fn minimize_restricted(
    x: &PointSet,
    annihilate: &Subspace,
    cfg: &IrlsConfig,
) -> Result<SolveReport> {
    if annihilate.ambient_dim() != x.dim() {
        return Err(GmsError::Dimension(format!(
            "constraint subspace lives in {} dimensions, data in {}",
            annihilate.ambient_dim(),
            x.dim()
        )));
    }
    if annihilate.dim() == 0 {
        return minimize(x, cfg);
    }
    if annihilate.dim() >= x.dim() {
        return Err(GmsError::InvalidArgument(
            "the annihilated subspace must be a proper subspace".into(),
        ));
    }
    cfg.validate()?;
    let frame = annihilate.complement();
    let frame = frame.basis();
    let y = x.coordinates_in(frame)?;

    let scale = x.matrix().amax();
    if y.is_empty() || y.matrix().amax() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        // Every point lies in the annihilated subspace, so F ≡ 0 on the
        // feasible set and every feasible Q is a minimizer.
        let q = ScaledQ::scalar(frame.ncols()).embed(frame)?;
        return Ok(SolveReport {
            q_hat: q,
            iterations: 0,
            objective_trace: vec![0.0],
            converged: true,
            fixed_point_residual: 0.0,
            stop_reason: StopReason::StepTolerance,
            degenerate: true,
        });
    }

    let mut inner = cfg.clone();
    if let Some(q0) = &cfg.q0 {
        let q0 = ScaledQ::normalized(q0)?;
        if q0.dim() != x.dim() {
            return Err(GmsError::Dimension("initial Q does not match the data".into()));
        }
        inner.q0 = Some(q0.compress(frame).into_matrix());
    }
    let report = minimize(&y, &inner)?;
    Ok(SolveReport {
        q_hat: report.q_hat.embed(frame)?,
        ..report
    })
}

/// Relative distance of the first-order map `G(Q)` from a scalar matrix,
/// `‖G − (tr G/D) I‖_F / ‖G‖_F` with
/// `G = Σᵢ (Q xᵢxᵢᵀ + xᵢxᵢᵀ Q) / (2 max(‖Q xᵢ‖, δ))`. Vanishes at the
/// minimizer of `F_δ`.
pub fn fixed_point_residual(q: &ScaledQ, x: &PointSet, delta: f64) -> Result<f64> {
    check_dims(q, x)?;
    if !(delta > 0.0) {
        return Err(GmsError::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    Ok(residual_with_ridge(q.matrix(), x.matrix(), delta, 0.0))
}

fn residual_with_ridge(q: &DMatrix<f64>, x: &DMatrix<f64>, delta: f64, lambda: f64) -> f64 {
    let a = weighted_covariance(q, x, delta);
    let qa = q * &a;
    let mut g = (&qa + qa.transpose()) * 0.5;
    if lambda > 0.0 {
        g += q * (2.0 * lambda);
    }
    let n = g.nrows();
    let c = g.trace() / n as f64;
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return 0.0;
    }
    (g - DMatrix::identity(n, n) * c).norm() / gnorm
}

/// Frobenius-orthonormal basis of the trace-zero symmetric `D×D` matrices,
/// as columns of vec-coordinates (`D²×p`, `p = D(D+1)/2 − 1`).
pub(crate) fn trace_zero_basis(dim: usize) -> DMatrix<f64> {
    let p = dim * (dim + 1) / 2 - 1;
    let mut t = DMatrix::zeros(dim * dim, p);
    let mut col = 0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            t[(i + j * dim, col)] = h;
            t[(j + i * dim, col)] = h;
            col += 1;
        }
    }
    // Helmert-style diagonal directions orthogonal to the all-ones vector.
    for k in 1..dim {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            t[(i + i * dim, col)] = 1.0 / norm;
        }
        t[(k + k * dim, col)] = -(k as f64) / norm;
        col += 1;
    }
    t
}

/// Upper bound `r(δ)` on the linear convergence rate of the smoothed IRLS
/// iteration around `q_star`: the square root of the largest generalized
/// Rayleigh quotient, over trace-zero symmetric `Δ`, of
/// `Σ_{‖Q*xᵢ‖>δ} (xᵢᵀΔQ*xᵢ)²/‖Q*xᵢ‖³` against `Σᵢ ‖Δxᵢ‖²/max(‖Q*xᵢ‖, δ)`.
pub fn convergence_rate_bound(q_star: &ScaledQ, x: &PointSet, delta: f64) -> Result<f64> {
    check_dims(q_star, x)?;
    let dim = x.dim();
    if dim > RATE_BOUND_MAX_DIM {
        return Err(GmsError::Capability(format!(
            "rate bound needs a dense eigenproblem of size D(D+1)/2-1; D={dim} exceeds {RATE_BOUND_MAX_DIM}"
        )));
    }
    if dim < 2 {
        return Ok(0.0);
    }
    if !(delta > 0.0) {
        return Err(GmsError::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    // The quotient is invariant under rotating Δ, so work in the eigenbasis
    // of Q*, where the heavily weighted directions are coordinate axes.
    let spec = q_star.spectrum();
    let q = &DMatrix::from_diagonal(&spec.values.map(|v| v.max(0.0)));
    let xm = &(x.matrix() * &spec.vectors);
    let t = trace_zero_basis(dim);
    let p = t.ncols();

    // Denominator: vec(Δ)ᵀ (S ⊗ I) vec(Δ) with S = Σ xxᵀ / max(n, δ).
    let s = weighted_covariance(q, xm, delta);
    let mut kron = DMatrix::zeros(dim * dim, dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let v = s[(a, b)];
            if v != 0.0 {
                for i in 0..dim {
                    kron[(i + a * dim, i + b * dim)] = v;
                }
            }
        }
    }
    let den = t.transpose() * kron * &t;

    // Numerator: Σ cᵢcᵢᵀ / nᵢ³ with cᵢ = Tᵀ vec(Q xᵢ xᵢᵀ) over points with nᵢ > δ.
    let norms = image_norms(q, xm);
    let mut num = DMatrix::zeros(p, p);
    for (i, &n) in norms.iter().enumerate() {
        if n <= delta {
            continue;
        }
        let xi = xm.row(i).transpose();
        let qi = q * &xi;
        let outer = &qi * xi.transpose();
        let vec = DVector::from_column_slice(outer.as_slice());
        let c = t.transpose() * vec;
        num.ger(1.0 / (n * n * n), &c, &c, 1.0);
    }
    if num.amax() == 0.0 {
        return Ok(0.0);
    }

    let (scale, den) = unit_diagonal(&numerics::symmetrize(&den))?;
    let num = DMatrix::from_fn(p, p, |i, j| num[(i, j)] / (scale[i] * scale[j]));
    let chol = Cholesky::new(den).ok_or(GmsError::RankDeficient {
        rank: numerics::numerical_rank(x),
        dim,
    })?;
    let l = chol.l();
    // L⁻¹ N L⁻ᵀ
    let linv_n = l
        .solve_lower_triangular(&num)
        .ok_or(GmsError::Singular { condition: f64::INFINITY })?;
    let m = l
        .solve_lower_triangular(&linv_n.transpose())
        .ok_or(GmsError::Singular { condition: f64::INFINITY })?;
    let top = numerics::symmetrize(&m).symmetric_eigenvalues().max();
    Ok(top.max(0.0).sqrt())
}
