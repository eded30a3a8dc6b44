//! Matrix functionals and spectral primitives.
//!
//! A matrix functional mu is a map into the non-negative reals that is
//! positively homogeneous and subadditive. Four built-ins are provided:
//!
//! - spectral norm (largest singular value),
//! - Ky Fan singular sum: sum of the j largest singular values,
//! - absolute value of the sum of the j largest eigenvalues (Hermitian only),
//! - Frobenius norm.
//!
//! Callers with a bespoke functional can evaluate it themselves and feed the
//! resulting scalar envelopes straight into [`crate::bounds`] and
//! [`crate::tailbounds`]; nothing downstream of this module looks at matrix
//! entries, only at mu values.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;

/// Relative symmetry tolerance: inputs within it are symmetrized as
/// (A + A^T)/2 before eigendecomposition.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Which functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    /// Largest singular value.
    SpectralNorm,
    /// Sum of the `j` largest singular values.
    KyFanSingularSum(usize),
    /// Absolute value of the sum of the `j` largest eigenvalues.
    ///
    /// Subadditive on the positive-semidefinite cone (where the absolute
    /// value is vacuous and Fan's inequality applies) and more generally
    /// whenever the top-j sum of A + B is non-negative. On indefinite pairs
    /// it can fail: with A = diag(0, -1) and B = diag(-1, 0) the top
    /// eigenvalue of each summand is 0 while |lambda_1(A + B)| = 1.
    AbsTopEigSum(usize),
    /// Frobenius norm.
    FrobeniusNorm,
}

/// Admissible matrix domain of a functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixDomain {
    GeneralRectangular,
    Hermitian,
}

/// A matrix functional together with its admissible domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixFunctional {
    kind: FunctionalKind,
    domain: MatrixDomain,
}

impl MatrixFunctional {
    /// Build a functional, enforcing that eigenvalue sums live on the
    /// Hermitian domain.
    pub fn new(kind: FunctionalKind, domain: MatrixDomain) -> Result<Self> {
        if matches!(kind, FunctionalKind::AbsTopEigSum(_)) && domain != MatrixDomain::Hermitian {
            return Err(Error::ShapeMismatch(
                "AbsTopEigSum requires the Hermitian domain".into(),
            ));
        }
        if let FunctionalKind::KyFanSingularSum(j) | FunctionalKind::AbsTopEigSum(j) = kind {
            if j == 0 {
                return Err(Error::IndexOutOfRange("j must be at least 1".into()));
            }
        }
        Ok(Self { kind, domain })
    }

    pub fn spectral_norm() -> Self {
        Self {
            kind: FunctionalKind::SpectralNorm,
            domain: MatrixDomain::GeneralRectangular,
        }
    }

    pub fn ky_fan(j: usize) -> Result<Self> {
        Self::new(
            FunctionalKind::KyFanSingularSum(j),
            MatrixDomain::GeneralRectangular,
        )
    }

    pub fn abs_top_eig_sum(j: usize) -> Result<Self> {
        Self::new(FunctionalKind::AbsTopEigSum(j), MatrixDomain::Hermitian)
    }

    pub fn frobenius() -> Self {
        Self {
            kind: FunctionalKind::FrobeniusNorm,
            domain: MatrixDomain::GeneralRectangular,
        }
    }

    pub fn kind(&self) -> FunctionalKind {
        self.kind
    }

    pub fn domain(&self) -> MatrixDomain {
        self.domain
    }

    /// Order `j` of the functional (1 for the spectral norm, none for
    /// Frobenius).
    pub fn order(&self) -> Option<usize> {
        match self.kind {
            FunctionalKind::SpectralNorm => Some(1),
            FunctionalKind::KyFanSingularSum(j) | FunctionalKind::AbsTopEigSum(j) => Some(j),
            FunctionalKind::FrobeniusNorm => None,
        }
    }
}

/// Evaluate mu(A) for the selected functional.
///
/// Singular values and eigenvalues are taken in descending order. Hermitian
/// inputs are symmetrized as (A + A^T)/2 once they pass the symmetry
/// tolerance check.
pub fn eval_mu(f: &MatrixFunctional, a: &Matrix) -> Result<f64> {
    match f.kind() {
        FunctionalKind::SpectralNorm => {
            let sv = singular_values(a)?;
            Ok(sv.first().copied().unwrap_or(0.0))
        }
        FunctionalKind::KyFanSingularSum(j) => {
            let limit = a.nrows().min(a.ncols());
            if j > limit {
                return Err(Error::IndexOutOfRange(format!(
                    "Ky Fan order j = {j} exceeds min(m, n) = {limit}"
                )));
            }
            let sv = singular_values(a)?;
            Ok(sv[..j].iter().sum())
        }
        FunctionalKind::AbsTopEigSum(j) => {
            let sym = symmetrize_checked(a)?;
            let n = sym.nrows();
            if j > n {
                return Err(Error::IndexOutOfRange(format!(
                    "eigenvalue-sum order j = {j} exceeds n = {n}"
                )));
            }
            let eig = eigenvalues_desc(&sym)?;
            Ok(eig[..j].iter().sum::<f64>().abs())
        }
        FunctionalKind::FrobeniusNorm => Ok(a.iter().map(|x| x * x).sum::<f64>().sqrt()),
    }
}

/// Singular values of `a`, descending, length min(m, n).
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let svd = a
        .clone()
        .try_svd_unordered(false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::DecompositionFailure("SVD did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn eigenvalues_desc(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let eig = a.clone().symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues_desc(a)?[0])
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(a: &Matrix) -> Result<f64> {
    Ok(*eigenvalues_desc(a)?.last().expect("non-empty spectrum"))
}

/// Symmetry check against [`HERMITIAN_TOL`], returning (A + A^T)/2.
pub fn symmetrize_checked(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "Hermitian domain needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let deviation = (a - a.transpose())
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian {
            deviation,
            tol: HERMITIAN_TOL * scale,
        });
    }
    Ok((a + a.transpose()) * 0.5)
}

/// Extreme singular values of `a` and of its Moore-Penrose inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinvSpectrum {
    /// Smallest singular value of `a`.
    pub sigma_min: f64,
    /// Largest singular value of the pseudoinverse, `None` when `a` is
    /// rank-deficient (some singular value fell below the rank cutoff).
    pub sigma_max_pinv: Option<f64>,
}

/// Compute the smallest singular value and the largest singular value of the
/// Moore-Penrose inverse. For full-rank `a` the two are reciprocal.
///
/// The rank cutoff is the conventional max(m, n) * eps * sigma_max.
pub fn pinv_spectrum(a: &Matrix) -> Result<PinvSpectrum> {
    let sv = singular_values(a)?;
    let sigma_max = sv[0];
    let sigma_min = *sv.last().expect("non-empty singular spectrum");
    let rank_tol = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * sigma_max;
    let sigma_max_pinv = if sigma_min > rank_tol {
        Some(1.0 / sigma_min)
    } else {
        None
    };
    Ok(PinvSpectrum {
        sigma_min,
        sigma_max_pinv,
    })
}
