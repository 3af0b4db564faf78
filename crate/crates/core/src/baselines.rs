//! Reference estimators: PCA, the closed-form minimizer of the squared
//! objective, the common M-estimator of scatter, and spherization.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GmsError, Result};
use crate::numerics::{self, PointSet, Subspace};
use crate::solver::{ScaledQ, SolveReport, StopReason};

/// Span of the top `d` right singular vectors of the (uncentered) data.
pub fn pca_subspace(x: &PointSet, d: usize) -> Result<Subspace> {
    if d == 0 || d > x.dim() {
        return Err(GmsError::InvalidArgument(format!(
            "need 1 <= d <= D, got d={d} D={}",
            x.dim()
        )));
    }
    let rank = numerics::numerical_rank(x);
    if d > rank {
        return Err(GmsError::InvalidArgument(format!(
            "d={d} exceeds the rank {rank} of the data"
        )));
    }
    let span = numerics::data_span(x);
    Ok(Subspace::new(span.columns(0, d).into_owned())?)
}

/// `(XᵀX)⁻¹ / tr((XᵀX)⁻¹)`, the minimizer of `Σᵢ ‖Q xᵢ‖²` over `ℍ`.
pub fn l2_minimizer(x: &PointSet) -> Result<ScaledQ> {
    let dim = x.dim();
    let rank = numerics::numerical_rank(x);
    if rank < dim {
        return Err(GmsError::RankDeficient { rank, dim });
    }
    let xm = x.matrix();
    let gram = numerics::symmetrize(&(xm.transpose() * xm));
    let inv = numerics::solve_spd(&gram, &DMatrix::identity(dim, dim))?;
    ScaledQ::normalized(&inv)
}

/// Points scaled to unit norm; zero rows are dropped and counted.
pub fn spherize(x: &PointSet) -> (PointSet, usize) {
    let keep: Vec<usize> = (0..x.len())
        .filter(|&i| x.matrix().row(i).norm() > 0.0)
        .collect();
    let dropped = x.len() - keep.len();
    let mut m = x.select(&keep).into_matrix();
    for mut row in m.row_iter_mut() {
        let n = row.norm();
        row /= n;
    }
    (PointSet::new(m).expect("finite rows"), dropped)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MEstimatorConfig {
    /// Upper bound on the weight `u(s)`.
    pub weight_cap: f64,
    pub max_iter: usize,
    /// Relative Frobenius change of `A` below which the iteration stops.
    pub step_tol: f64,
}

impl Default for MEstimatorConfig {
    fn default() -> Self {
        Self {
            weight_cap: 1e30,
            max_iter: 200,
            step_tol: 1e-10,
        }
    }
}

/// Condition number of the scatter estimate beyond which the iteration is
/// declared divergent.
pub const DIVERGENCE_CONDITION: f64 = 1e14;

/// Weight `u(s) = 2 ln(s)/s`, clamped to `[0, cap]`.
pub fn m_weight(s: f64, cap: f64) -> f64 {
    if s <= 1.0 {
        return 0.0;
    }
    (2.0 * s.ln() / s).min(cap)
}

/// `ρ(s) = (ln max(s, 1))² / 2`, whose derivative is `u/2`.
fn m_rho(s: f64) -> f64 {
    let l = s.max(1.0).ln();
    0.5 * l * l
}

/// Scatter estimate and the usual bookkeeping; `report.q_hat` is the
/// normalized inverse scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct MEstimate {
    pub scatter: DMatrix<f64>,
    pub report: SolveReport,
}

impl MEstimate {
    /// Span of the top `d` eigenvectors of the scatter estimate.
    pub fn subspace(&self, d: usize) -> Result<Subspace> {
        let spec = numerics::sym_eig(&self.scatter)?;
        if d == 0 || d > spec.len() {
            return Err(GmsError::InvalidArgument(format!("invalid dimension {d}")));
        }
        Subspace::new(spec.top(d))
    }
}

struct Scatter {
    inv: DMatrix<f64>,
    logdet: f64,
}

fn factor(a: &DMatrix<f64>) -> Result<Scatter> {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min > DIVERGENCE_CONDITION {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(GmsError::Divergence(condition));
    }
    let inv_vals = eig.eigenvalues.map(|v| 1.0 / v);
    let inv = &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
    Ok(Scatter {
        inv: numerics::symmetrize(&inv),
        logdet: eig.eigenvalues.iter().map(|v| v.ln()).sum(),
    })
}

fn mahalanobis(x: &DMatrix<f64>, inv: &DMatrix<f64>) -> Vec<f64> {
    let xa = x * inv;
    xa.row_iter()
        .zip(x.row_iter())
        .map(|(a, b)| a.dot(&b))
        .collect()
}

/// Fixed-point iteration `A ← (1/N) Σᵢ u(xᵢᵀA⁻¹xᵢ) xᵢxᵢᵀ` from `XᵀX/N`.
///
/// On exact-subspace data the iterates collapse onto the subspace. If the
/// next iterate would pass [`DIVERGENCE_CONDITION`] the last admissible one
/// is returned with `degenerate` set; only a first step that already fails
/// is reported as [`GmsError::Divergence`].
pub fn common_m_estimator(x: &PointSet, cfg: &MEstimatorConfig) -> Result<MEstimate> {
    if !(cfg.weight_cap > 0.0) {
        return Err(GmsError::InvalidArgument("weight_cap must be positive".into()));
    }
    if x.is_empty() {
        return Err(GmsError::InvalidArgument("no data points".into()));
    }
    if (0..x.len()).any(|i| x.matrix().row(i).norm() == 0.0) {
        return Err(GmsError::InvalidArgument(
            "zero rows are not allowed; drop them first".into(),
        ));
    }
    let dim = x.dim();
    let rank = numerics::numerical_rank(x);
    if rank < dim {
        return Err(GmsError::RankDeficient { rank, dim });
    }
    let xm = x.matrix();
    let n = x.len() as f64;
    let objective = |s: &[f64], logdet: f64| s.iter().map(|&v| m_rho(v)).sum::<f64>() + 0.5 * n * logdet;

    let mut a = numerics::symmetrize(&(xm.transpose() * xm)) / n;
    let mut fa = factor(&a)?;
    let mut s = mahalanobis(xm, &fa.inv);
    let mut trace = vec![objective(&s, fa.logdet)];
    let mut stop = StopReason::MaxIter;
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;

    for k in 0..cfg.max_iter {
        let mut wx = xm.clone();
        for (mut row, &si) in wx.row_iter_mut().zip(s.iter()) {
            row *= m_weight(si, cfg.weight_cap);
        }
        let next = numerics::symmetrize(&(xm.transpose() * wx)) / n;
        let fn_ = match factor(&next) {
            Ok(f) => f,
            Err(GmsError::Divergence(_)) if k > 0 => {
                stop = StopReason::ConditionLimit;
                break;
            }
            Err(e) => return Err(e),
        };
        last_step = (&next - &a).norm() / a.norm();
        a = next;
        fa = fn_;
        s = mahalanobis(xm, &fa.inv);
        trace.push(objective(&s, fa.logdet));
        iterations = k + 1;
        if last_step < cfg.step_tol {
            stop = StopReason::StepTolerance;
            break;
        }
    }
    let q_hat = ScaledQ::normalized(&fa.inv)?;
    Ok(MEstimate {
        scatter: a,
        report: SolveReport {
            q_hat,
            iterations,
            objective_trace: trace,
            converged: stop == StopReason::StepTolerance,
            fixed_point_residual: last_step,
            stop_reason: stop,
            degenerate: stop == StopReason::ConditionLimit,
        },
    })
}
