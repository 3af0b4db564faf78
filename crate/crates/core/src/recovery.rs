//! Subspace estimates built on the solver: GMS, kernel extraction, dimension
//! estimation, EGMS deflation, the GMS2 pipeline, ridge bisection and robust
//! eigenvectors.

use nalgebra::{DMatrix, DVector};

use crate::baselines::spherize;
use crate::error::{GmsError, Result};
use crate::numerics::{self, PointSet, Spectrum, Subspace};
use crate::solver::{self, IrlsConfig, ScaledQ, SolveReport, StopReason};
use crate::synthdata;

/// Eigenvalues below `DEFAULT_KERNEL_TOL · λ_max` count as zero.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-6;
/// Bisection steps spent by [`gms_lambda_bisection`] before giving up.
pub const BISECTION_STEPS: usize = 30;

/// What to do with data that do not span the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Work in coordinates of the span of the data and map the result back.
    #[default]
    Lossless,
    /// Solve in the ambient space. On rank-deficient data the objective
    /// vanishes on every `Q` that annihilates the data, so the returned
    /// minimizer is the normalized projector onto the orthogonal complement
    /// of the data span and its kernel is the whole span.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Estimated subspace, in the ambient space of the input.
    pub subspace: Subspace,
    /// Minimizer in working coordinates (see `frame`).
    pub q_hat: ScaledQ,
    pub spectrum: Spectrum,
    pub estimated_dim: Option<usize>,
    pub solve: SolveReport,
    pub pipeline_notes: Vec<String>,
    /// Orthonormal basis (`D×r`) of the working coordinates when the data
    /// were reduced; `q_hat` and `spectrum` live in these coordinates.
    pub frame: Option<DMatrix<f64>>,
    /// Ridge parameter of the returned solve, if any.
    pub lambda: Option<f64>,
    /// Directions removed by EGMS, in removal order.
    pub deflation_vectors: Vec<DVector<f64>>,
    /// Number of minimizations performed.
    pub solves: usize,
}

impl RecoveryResult {
    /// `q_hat` embedded in the ambient space of the input.
    pub fn ambient_q(&self) -> ScaledQ {
        match &self.frame {
            Some(f) => self.q_hat.embed(f).expect("frame matches q_hat"),
            None => self.q_hat.clone(),
        }
    }
}

fn check_target(d: usize, dim: usize) -> Result<()> {
    if d == 0 || d >= dim {
        return Err(GmsError::InvalidArgument(format!(
            "subspace dimension must satisfy 1 <= d < D, got d={d} D={dim}"
        )));
    }
    Ok(())
}

fn check_nonempty(x: &PointSet) -> Result<()> {
    if x.is_empty() {
        return Err(GmsError::InvalidArgument("no data points".into()));
    }
    Ok(())
}

fn tie_note(spectrum: &Spectrum, d: usize, notes: &mut Vec<String>) {
    let n = spectrum.len();
    if d == 0 || d >= n {
        return;
    }
    let a = spectrum.values[n - d - 1];
    let b = spectrum.values[n - d];
    let scale = spectrum.values[0].abs().max(f64::MIN_POSITIVE);
    if (a - b).abs() <= 1e-12 * scale {
        notes.push(format!(
            "eigenvalues {} and {} tie at the cut; the returned subspace is not unique",
            n - d,
            n - d + 1
        ));
    }
}

/// Restricts a configuration to working coordinates `frame`.
fn compressed_config(cfg: &IrlsConfig, frame: &DMatrix<f64>) -> Result<IrlsConfig> {
    let mut inner = cfg.clone();
    if let Some(q0) = &cfg.q0 {
        if q0.nrows() != frame.nrows() {
            return Err(GmsError::Dimension(format!(
                "initial Q is {}x{}, data are {}-dimensional",
                q0.nrows(),
                q0.ncols(),
                frame.nrows()
            )));
        }
        inner.q0 = Some(ScaledQ::normalized(q0)?.compress(frame).into_matrix());
    }
    Ok(inner)
}

/// The normalized projector onto the orthogonal complement of `span` inside
/// `ℝᵐ`, which minimizes `F` whenever the data do not span `ℝᵐ`.
fn degenerate_minimizer(y: &PointSet, delta: f64) -> Result<SolveReport> {
    let span = Subspace::new(numerics::data_span(y))?;
    let comp = span.complement();
    let q = ScaledQ::from_root(comp.basis().transpose())?;
    let f = solver::objective_regularized(&q, y, delta)?;
    Ok(SolveReport {
        q_hat: q,
        iterations: 0,
        objective_trace: vec![f],
        converged: true,
        fixed_point_residual: 0.0,
        stop_reason: StopReason::StepTolerance,
        degenerate: true,
    })
}

/// Geometric Median Subspace: the span of the bottom `d` eigenvectors of
/// the minimizer `Q̂`, after a lossless reduction when the data do not span
/// the ambient space.
pub fn gms(x: &PointSet, d: usize, cfg: &IrlsConfig) -> Result<RecoveryResult> {
    gms_with(x, Some(d), cfg, Reduction::Lossless)
}

/// [`gms`] with an optional target dimension (estimated from the largest
/// log-eigengap when absent) and a choice of [`Reduction`].
pub fn gms_with(
    x: &PointSet,
    d: Option<usize>,
    cfg: &IrlsConfig,
    reduction: Reduction,
) -> Result<RecoveryResult> {
    check_nonempty(x)?;
    let dim = x.dim();
    if let Some(d) = d {
        check_target(d, dim)?;
    }
    cfg.validate()?;
    let mut notes = Vec::new();
    let rank = numerics::numerical_rank(x);
    if rank == 0 {
        return Err(GmsError::RankDeficient { rank, dim });
    }
    let ridge = cfg.ridge_lambda.is_some_and(|l| l > 0.0);

    if rank < dim && reduction == Reduction::None && !ridge {
        let solve = degenerate_minimizer(x, cfg.delta)?;
        notes.push(format!(
            "data span {rank} of {dim} dimensions; the objective vanishes on every Q \
             annihilating the span, returned the projector onto its complement"
        ));
        let spectrum = solve.q_hat.spectrum();
        let estimated = match d {
            Some(_) => None,
            None => {
                notes.push(format!(
                    "log-eigengap is infinite at index {}; estimated dimension {rank}",
                    dim - rank
                ));
                Some(rank)
            }
        };
        let target = d.unwrap_or(rank);
        check_target(target, dim)?;
        tie_note(&spectrum, target, &mut notes);
        let subspace = Subspace::new(spectrum.bottom(target))?;
        return Ok(RecoveryResult {
            subspace,
            q_hat: solve.q_hat.clone(),
            spectrum,
            estimated_dim: estimated,
            solve,
            pipeline_notes: notes,
            frame: None,
            lambda: cfg.ridge_lambda,
            deflation_vectors: Vec::new(),
            solves: 1,
        });
    }

    let (work, frame, inner) = if rank < dim && reduction == Reduction::Lossless {
        let frame = numerics::data_span(x);
        notes.push(format!("lossless reduction from {dim} to {rank} dimensions"));
        let inner = compressed_config(cfg, &frame)?;
        (x.coordinates_in(&frame)?, Some(frame), inner)
    } else {
        (x.clone(), None, cfg.clone())
    };
    let work_dim = work.dim();
    if let Some(d) = d {
        if d > work_dim {
            return Err(GmsError::InvalidArgument(format!(
                "requested dimension {d} exceeds the rank {work_dim} of the data"
            )));
        }
    }

    let solve = solver::minimize(&work, &inner)?;
    if !solve.converged {
        notes.push(format!("solver stopped at max_iter={}", inner.max_iter));
    }
    let spectrum = solve.q_hat.spectrum();
    let (target, estimated) = match d {
        Some(d) => (d, None),
        None => {
            let e = estimate_dimension(&spectrum)?;
            (e, Some(e))
        }
    };
    let local = if target == work_dim {
        notes.push("the data span has the requested dimension; returned the span".into());
        DMatrix::identity(work_dim, work_dim)
    } else {
        tie_note(&spectrum, target, &mut notes);
        spectrum.bottom(target)
    };
    let basis = match &frame {
        Some(f) => f * local,
        None => local,
    };
    let mut basis = basis;
    numerics::reorthonormalize(&mut basis);
    Ok(RecoveryResult {
        subspace: Subspace::new(basis)?,
        q_hat: solve.q_hat.clone(),
        spectrum,
        estimated_dim: estimated,
        solve,
        pipeline_notes: notes,
        frame,
        lambda: cfg.ridge_lambda,
        deflation_vectors: Vec::new(),
        solves: 1,
    })
}

/// Span of the eigenvectors of `q` whose eigenvalues fall below
/// `rel_tol · λ_max`.
pub fn kernel_subspace(q: &ScaledQ, rel_tol: f64) -> Result<Subspace> {
    let spectrum = q.spectrum();
    let k = kernel_dimension(&spectrum, rel_tol)?;
    if k == 0 {
        return Err(GmsError::EmptyKernel);
    }
    Subspace::new(spectrum.bottom(k))
}

/// Number of eigenvalues below `rel_tol · λ_max`.
pub fn kernel_dimension(spectrum: &Spectrum, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(GmsError::InvalidArgument(format!(
            "kernel tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    if spectrum.is_empty() {
        return Err(GmsError::InvalidArgument("empty spectrum".into()));
    }
    let top = spectrum.values[0];
    if !(top > 0.0) {
        return Err(GmsError::DegenerateKernel);
    }
    let threshold = rel_tol * top;
    Ok(spectrum.values.iter().filter(|&&v| v < threshold).count())
}

/// Dimension read off the largest gap between consecutive log-eigenvalues:
/// with eigenvalues `λ₁ ≥ … ≥ λ_D` and `i` maximizing `ln λᵢ − ln λᵢ₊₁`,
/// returns `D − i`. Ties go to the smaller dimension.
pub fn estimate_dimension(spectrum: &Spectrum) -> Result<usize> {
    let gaps = spectrum.log_eigengaps()?;
    if gaps.is_empty() {
        return Err(GmsError::InvalidArgument(
            "dimension estimation needs at least two eigenvalues".into(),
        ));
    }
    let mut best = 0;
    for (i, g) in gaps.iter().enumerate() {
        if *g >= gaps[best] {
            best = i;
        }
    }
    Ok(spectrum.len() - (best + 1))
}

/// How many directions EGMS removes per restricted solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Batch {
    /// The top `k` eigenvectors of each restricted minimizer.
    Fixed(usize),
    /// Every eigenvector whose eigenvalue is at least the given fraction of
    /// the largest one.
    Positive(f64),
}

impl Batch {
    pub fn positive() -> Self {
        Batch::Positive(DEFAULT_KERNEL_TOL)
    }
}

impl Default for Batch {
    fn default() -> Self {
        Batch::Fixed(1)
    }
}

/// Extended GMS: starting from `L̂ = ℝᴰ`, repeatedly minimizes over `Q`
/// supported on `L̂` and removes the top eigenvector(s) of the minimizer
/// from `L̂` until `dim L̂ = d`.
///
/// When the data restricted to `L̂` do not span it, the restricted problem is
/// solved by the normalized projector onto the part of `L̂` orthogonal to the
/// data, so the first deflations peel off directions the data never visit.
pub fn egms(x: &PointSet, d: usize, cfg: &IrlsConfig, batch: Batch) -> Result<RecoveryResult> {
    check_nonempty(x)?;
    let dim = x.dim();
    check_target(d, dim)?;
    cfg.validate()?;
    if let Batch::Fixed(0) = batch {
        return Err(GmsError::InvalidArgument("batch must be at least 1".into()));
    }
    let ridge = cfg.ridge_lambda.is_some_and(|l| l > 0.0);
    let mut inner = cfg.clone();
    inner.q0 = None;

    let mut basis = DMatrix::<f64>::identity(dim, dim);
    let mut removed = Vec::new();
    let mut notes = Vec::new();
    let mut degenerate_steps = 0;
    let mut step = 0;
    let mut last: Option<(SolveReport, DMatrix<f64>)> = None;

    while basis.ncols() > d {
        let m = basis.ncols();
        let wrap = |e: GmsError| GmsError::Deflation {
            step,
            source: Box::new(e),
        };
        let y = x.coordinates_in(&basis).map_err(wrap)?;
        let rank = numerics::numerical_rank(&y);
        let report = if rank < m && !ridge {
            degenerate_steps += 1;
            degenerate_minimizer(&y, cfg.delta).map_err(wrap)?
        } else {
            solver::minimize(&y, &inner).map_err(wrap)?
        };
        let spec = report.q_hat.spectrum();
        let k = match batch {
            Batch::Fixed(k) => k,
            Batch::Positive(tol) => m - kernel_dimension(&spec, tol).map_err(wrap)?,
        }
        .clamp(1, m - d);
        let top = spec.top(k);
        for c in top.column_iter() {
            removed.push(&basis * c);
        }
        let keep = Subspace::new(top).map_err(wrap)?.complement();
        let mut next = &basis * keep.basis();
        numerics::reorthonormalize(&mut next);
        last = Some((report, basis));
        basis = next;
        step += 1;
    }

    let (solve, frame) = last.expect("d < D guarantees at least one solve");
    if degenerate_steps > 0 {
        notes.push(format!(
            "{degenerate_steps} deflation steps removed directions orthogonal to the data"
        ));
    }
    let q_hat = solve.q_hat.embed(&frame)?;
    let spectrum = q_hat.spectrum();
    Ok(RecoveryResult {
        subspace: Subspace::new(basis)?,
        q_hat,
        spectrum,
        estimated_dim: None,
        solve,
        pipeline_notes: notes,
        frame: None,
        lambda: cfg.ridge_lambda,
        deflation_vectors: removed,
        solves: step,
    })
}

/// GMS2: lossless reduction, `n_artificial` extra points drawn from a
/// spherically symmetric Gaussian, projection of every point onto the unit
/// sphere, then [`gms_with`] (estimating `d` when absent).
///
/// `n_artificial` defaults to twice the dimension of the reduced space.
pub fn gms2(
    x: &PointSet,
    d: Option<usize>,
    n_artificial: Option<usize>,
    cfg: &IrlsConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    check_nonempty(x)?;
    let dim = x.dim();
    if let Some(d) = d {
        check_target(d, dim)?;
    }
    if n_artificial == Some(0) {
        return Err(GmsError::InvalidArgument(
            "GMS2 needs at least one artificial outlier".into(),
        ));
    }
    let mut notes = Vec::new();
    let rank = numerics::numerical_rank(x);
    if rank == 0 {
        return Err(GmsError::RankDeficient { rank, dim });
    }
    let (work, frame) = if rank < dim {
        notes.push(format!("lossless reduction from {dim} to {rank} dimensions"));
        let frame = numerics::data_span(x);
        (x.coordinates_in(&frame)?, Some(frame))
    } else {
        (x.clone(), None)
    };
    let r = work.dim();
    let n_artificial = n_artificial.unwrap_or(2 * r);
    let mut rng = synthdata::rng_from_seed(seed);
    let extra = synthdata::gaussian_matrix(&mut rng, n_artificial, r) / (r as f64).sqrt();
    notes.push(format!("appended {n_artificial} artificial Gaussian outliers"));
    let all = work.concat(&PointSet::new(extra)?)?;
    let (sphered, dropped) = spherize(&all);
    if dropped > 0 {
        notes.push(format!("dropped {dropped} zero-norm points before spherization"));
    }
    notes.push("projected all points onto the unit sphere".into());

    let inner = match &frame {
        Some(f) => compressed_config(cfg, f)?,
        None => cfg.clone(),
    };
    let d_inner = match d {
        Some(d) if d >= r => {
            return Err(GmsError::InvalidArgument(format!(
                "requested dimension {d} is not below the rank {r} of the data"
            )))
        }
        other => other,
    };
    let mut res = gms_with(&sphered, d_inner, &inner, Reduction::Lossless)?;
    if let Some(f) = &frame {
        let mut basis = f * res.subspace.basis();
        numerics::reorthonormalize(&mut basis);
        res.subspace = Subspace::new(basis)?;
        res.frame = Some(f.clone());
    }
    notes.append(&mut res.pipeline_notes);
    res.pipeline_notes = notes;
    Ok(res)
}

/// Ridge-regularized GMS with `λ` chosen by bisection so that `Q̂` has
/// exactly `d` eigenvalues below `kernel_tol · λ_max`. The kernel dimension
/// is assumed non-increasing in `λ`; midpoints are geometric when `lo > 0`.
pub fn gms_lambda_bisection(
    x: &PointSet,
    d: usize,
    cfg: &IrlsConfig,
    lambda_range: (f64, f64),
    kernel_tol: f64,
) -> Result<RecoveryResult> {
    check_nonempty(x)?;
    let dim = x.dim();
    check_target(d, dim)?;
    let (mut lo, mut hi) = lambda_range;
    if !(lo >= 0.0 && hi.is_finite() && lo <= hi) {
        return Err(GmsError::InvalidArgument(format!(
            "invalid lambda range [{lo}, {hi}]"
        )));
    }
    if !(kernel_tol > 0.0 && kernel_tol < 1.0) {
        return Err(GmsError::InvalidArgument(format!(
            "kernel tolerance must lie in (0, 1), got {kernel_tol}"
        )));
    }
    let mut solves = 0;
    let mut solve_at = |lambda: f64| -> Result<(SolveReport, Spectrum, usize)> {
        solves += 1;
        let rep = solver::minimize(x, &cfg.clone().with_ridge(lambda))?;
        let spec = rep.q_hat.spectrum();
        let k = kernel_dimension(&spec, kernel_tol)?;
        Ok((rep, spec, k))
    };
    let finish = |rep: SolveReport,
                  spec: Spectrum,
                  lambda: f64,
                  k: usize,
                  solves: usize,
                  mut notes: Vec<String>|
     -> Result<RecoveryResult> {
        notes.push(format!("lambda = {lambda:e}, kernel dimension {k}"));
        tie_note(&spec, d, &mut notes);
        Ok(RecoveryResult {
            subspace: Subspace::new(spec.bottom(d))?,
            q_hat: rep.q_hat.clone(),
            spectrum: spec,
            estimated_dim: None,
            solve: rep,
            pipeline_notes: notes,
            frame: None,
            lambda: Some(lambda),
            deflation_vectors: Vec::new(),
            solves,
        })
    };

    let (rep_lo, spec_lo, k_lo) = solve_at(lo)?;
    if k_lo == d {
        return finish(rep_lo, spec_lo, lo, k_lo, solves, Vec::new());
    }
    if lo == hi {
        return Err(GmsError::Bracket {
            target: d,
            lo_dim: k_lo,
            hi_dim: k_lo,
        });
    }
    let (rep_hi, spec_hi, k_hi) = solve_at(hi)?;
    if k_hi == d {
        return finish(rep_hi, spec_hi, hi, k_hi, solves, Vec::new());
    }
    if !(k_lo > d && d > k_hi) {
        return Err(GmsError::Bracket {
            target: d,
            lo_dim: k_lo,
            hi_dim: k_hi,
        });
    }
    let mut last = None;
    for _ in 0..BISECTION_STEPS {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let (rep, spec, k) = solve_at(mid)?;
        if k == d {
            return finish(rep, spec, mid, k, solves, Vec::new());
        }
        if k > d {
            lo = mid;
        } else {
            hi = mid;
        }
        last = Some((rep, spec, mid, k));
    }
    let (rep, spec, lambda, k) = last.expect("at least one bisection step");
    let notes = vec![format!(
        "bisection ended after {BISECTION_STEPS} steps without attaining kernel dimension {d}"
    )];
    finish(rep, spec, lambda, k, solves, notes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMode {
    /// Eigenvectors of `Q̂` by ascending eigenvalue.
    InverseOrder,
    /// The EGMS deflation directions, last removed first.
    EgmsSequence,
}

/// Robust analogues of principal directions, most significant first.
pub fn robust_eigenvectors(
    x: &PointSet,
    cfg: &IrlsConfig,
    mode: EigenMode,
) -> Result<Vec<DVector<f64>>> {
    check_nonempty(x)?;
    let dim = x.dim();
    match mode {
        EigenMode::InverseOrder => {
            let rank = numerics::numerical_rank(x);
            if rank < dim && cfg.ridge_lambda.is_none() {
                return Err(GmsError::Precondition(format!(
                    "data are rank deficient (rank {rank} < {dim}); \
                     use the egms_sequence mode instead"
                )));
            }
            let rep = solver::minimize(x, cfg)?;
            let spec = rep.q_hat.spectrum();
            Ok((0..dim)
                .rev()
                .map(|i| spec.vectors.column(i).into_owned())
                .collect())
        }
        EigenMode::EgmsSequence => {
            if dim == 1 {
                return Ok(vec![DVector::from_element(1, 1.0)]);
            }
            let res = egms(x, 1, cfg, Batch::Fixed(1))?;
            let mut out = vec![res.subspace.basis().column(0).into_owned()];
            out.extend(res.deflation_vectors.into_iter().rev());
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_q(v: &[f64]) -> ScaledQ {
        ScaledQ::new(DMatrix::from_diagonal(&DVector::from_column_slice(v))).unwrap()
    }

    fn spectrum_of(values: &[f64]) -> Spectrum {
        let n = values.len();
        Spectrum {
            values: DVector::from_column_slice(values),
            vectors: DMatrix::identity(n, n),
        }
    }

    #[test]
    fn kernel_of_diagonal() {
        let k = kernel_subspace(&diag_q(&[0.5, 0.5, 0.0, 0.0]), 1e-6).unwrap();
        let expected = Subspace::new(DMatrix::from_fn(4, 2, |i, j| (i == j + 2) as u8 as f64)).unwrap();
        assert!(numerics::recovery_error(&k, &expected).unwrap() < 1e-15);
    }

    #[test]
    fn scalar_q_has_empty_kernel() {
        assert!(matches!(
            kernel_subspace(&ScaledQ::scalar(4), 1e-6),
            Err(GmsError::EmptyKernel)
        ));
        assert!(kernel_subspace(&ScaledQ::scalar(4), 1.5).is_err());
    }

    #[test]
    fn dimension_from_log_gaps() {
        assert_eq!(estimate_dimension(&spectrum_of(&[0.5, 0.5, 1e-9, 1e-9])).unwrap(), 2);
        assert_eq!(estimate_dimension(&spectrum_of(&[0.9, 0.1 - 1e-12, 1e-12])).unwrap(), 1);
        // gaps ln 10 twice: tie goes to the smaller dimension
        assert_eq!(estimate_dimension(&spectrum_of(&[1.0, 0.1, 0.01])).unwrap(), 1);
        assert!(matches!(
            estimate_dimension(&spectrum_of(&[1.0, 0.0])),
            Err(GmsError::NonPositiveEigenvalue { index: 1, .. })
        ));
    }

    #[test]
    fn dimension_estimate_is_scale_invariant() {
        let a = spectrum_of(&[0.4, 0.3, 0.2, 1e-5, 1e-6]);
        let b = spectrum_of(&[4.0, 3.0, 2.0, 1e-4, 1e-5]);
        assert_eq!(estimate_dimension(&a).unwrap(), estimate_dimension(&b).unwrap());
    }

    #[test]
    fn data_in_a_subspace_return_the_span() {
        let basis = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.6, 0.8]);
        let coords = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, -1.0, 0.5, 3.0, -2.0, 0.2, 0.1]);
        let x = PointSet::new(coords * basis.transpose()).unwrap();
        let res = gms(&x, 2, &IrlsConfig::default()).unwrap();
        let l = Subspace::new(basis).unwrap();
        assert!(numerics::recovery_error(&res.subspace, &l).unwrap() < 1e-12);
        assert!(res.frame.is_some());
    }

    #[test]
    fn unreduced_rank_deficient_solve_annihilates_the_data() {
        let x = PointSet::new(DMatrix::from_row_slice(3, 3, &[
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            1.0, 1.0, 0.0,
        ]))
        .unwrap();
        let res = gms_with(&x, None, &IrlsConfig::default(), Reduction::None).unwrap();
        assert_eq!(res.estimated_dim, Some(2));
        assert!(res.solve.degenerate);
        assert!((res.q_hat.matrix()[(2, 2)] - 1.0).abs() < 1e-15);
        assert!(solver::objective(&res.q_hat, &x).unwrap() < 1e-15);
    }

    #[test]
    fn gms_rejects_bad_dimension() {
        let x = PointSet::new(DMatrix::identity(3, 3)).unwrap();
        assert!(gms(&x, 0, &IrlsConfig::default()).is_err());
        assert!(gms(&x, 3, &IrlsConfig::default()).is_err());
        assert!(gms(&PointSet::empty(3).unwrap(), 1, &IrlsConfig::default()).is_err());
    }

    #[test]
    fn egms_one_step_removes_top_eigenvector() {
        let x = PointSet::new(DMatrix::from_row_slice(4, 3, &[
            3.0, 0.0, 0.0, //
            0.0, 2.0, 0.0, //
            0.0, 0.0, 1.0, //
            -3.0, 0.1, 0.0,
        ]))
        .unwrap();
        let res = egms(&x, 2, &IrlsConfig::default(), Batch::Fixed(1)).unwrap();
        assert_eq!(res.solves, 1);
        let u = &res.deflation_vectors[0];
        let direct = solver::minimize(&x, &IrlsConfig::default()).unwrap();
        let top = direct.q_hat.spectrum().top(1);
        assert!((u.dot(&top.column(0)).abs() - 1.0).abs() < 1e-10);
        let p = res.subspace.projector();
        assert!((&p * u).norm() < 1e-10);
    }

    #[test]
    fn egms_counts_solves() {
        let mut rng = synthdata::rng_from_seed(5);
        let x = PointSet::new(synthdata::gaussian_matrix(&mut rng, 30, 6)).unwrap();
        let res = egms(&x, 2, &IrlsConfig::default(), Batch::Fixed(1)).unwrap();
        assert_eq!(res.solves, 4);
        assert_eq!(res.deflation_vectors.len(), 4);
        let res = egms(&x, 2, &IrlsConfig::default(), Batch::Fixed(3)).unwrap();
        assert_eq!(res.solves, 2);
        assert_eq!(res.subspace.dim(), 2);
    }

    #[test]
    fn identity_rows_give_axis_eigenvectors() {
        let x = PointSet::new(DMatrix::identity(3, 3)).unwrap();
        let vs = robust_eigenvectors(&x, &IrlsConfig::default(), EigenMode::InverseOrder).unwrap();
        assert_eq!(vs.len(), 3);
        for v in &vs {
            assert!((v.amax() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_order_needs_full_rank() {
        let x = PointSet::new(DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        let err = robust_eigenvectors(&x, &IrlsConfig::default(), EigenMode::InverseOrder).unwrap_err();
        assert!(err.to_string().contains("egms_sequence"));
        let vs = robust_eigenvectors(&x, &IrlsConfig::default(), EigenMode::EgmsSequence).unwrap();
        assert_eq!(vs.len(), 3);
        // The direction the data never visit is removed first, hence last.
        assert!((vs[2][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_lambda_has_no_kernel() {
        let mut rng = synthdata::rng_from_seed(2);
        let x = PointSet::new(synthdata::gaussian_matrix(&mut rng, 20, 4)).unwrap();
        let err = gms_lambda_bisection(&x, 2, &IrlsConfig::default(), (1e12, 1e12), 1e-6).unwrap_err();
        assert!(matches!(err, GmsError::Bracket { lo_dim: 0, hi_dim: 0, .. }));
    }
}
