//! Random-matrix generators and Monte-Carlo estimators.
//!
//! Everything here is reproducible: a model draw is a pure function of
//! (model seed, draw index), so Monte-Carlo loops parallelize without
//! changing their output. The envelope construction turns N observations of
//! mu(X) into the smallest admissible envelope value
//!
//!   mu(B_gamma) = mean mu(X) + gamma * exp(mean log(mu(X) + 1)),
//!
//! whose failure probability decays exponentially in N.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{
    eval_mu, lambda_max, symmetrize_checked, FunctionalKind, Matrix, MatrixFunctional,
};
use crate::parallel::par_map_indexed;
use crate::rng::{derive_seed, rng_for};
use crate::tailbounds::TailCurve;

/// Entry distribution of a random matrix model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDistribution {
    /// i.i.d. standard Gaussian entries.
    StdGaussian,
    /// i.i.d. uniform entries on [-1, 1].
    Uniform,
    /// i.i.d. entries in {-1, +1} with probability 1/2 each.
    Rademacher,
}

/// A reproducible random-matrix generator.
///
/// `symmetrize = true` emits `scale * (S + S^T) / 2` (square shapes only);
/// otherwise `scale * S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomMatrixModel {
    pub distribution: EntryDistribution,
    pub rows: usize,
    pub cols: usize,
    pub scale: f64,
    pub symmetrize: bool,
    pub seed: u64,
}

impl RandomMatrixModel {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::ShapeMismatch(
                "matrix dimensions must be positive".into(),
            ));
        }
        if self.scale <= 0.0 || !self.scale.is_finite() {
            return Err(Error::NonPositiveArgument {
                name: "scale",
                value: self.scale,
            });
        }
        if self.symmetrize && self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "symmetrize requires a square shape, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Same model with a different seed; used to derive per-summand and
    /// per-repeat streams.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    /// Draw the `index`-th matrix of the stream. Bit-identical for identical
    /// (model, index) regardless of call order or thread.
    pub fn draw(&self, index: u64) -> Result<Matrix> {
        self.validate()?;
        let mut rng = rng_for(self.seed, 0, index);
        let mut entries = vec![0.0f64; self.rows * self.cols];
        match self.distribution {
            EntryDistribution::StdGaussian => {
                for e in &mut entries {
                    *e = rng.sample::<f64, _>(rand_distr::StandardNormal);
                }
            }
            EntryDistribution::Uniform => {
                for e in &mut entries {
                    *e = rng.random_range(-1.0..=1.0);
                }
            }
            EntryDistribution::Rademacher => {
                for e in &mut entries {
                    *e = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
            }
        }
        let s = DMatrix::from_row_slice(self.rows, self.cols, &entries);
        Ok(if self.symmetrize {
            (&s + s.transpose()) * (0.5 * self.scale)
        } else {
            s * self.scale
        })
    }
}

/// Empirical mean of log(mu(X) + 1) over `n` fresh draws.
pub fn estimate_log_mu_expectation(
    model: &RandomMatrixModel,
    f: &MatrixFunctional,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyObservations);
    }
    let values = par_map_indexed(n, |i| -> Result<f64> {
        let x = model.draw(i as u64)?;
        Ok((eval_mu(f, &x)? + 1.0).ln())
    });
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Ok(sum / n as f64)
}

/// Envelope estimate produced by the empirical construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeEstimate {
    /// The minimal admissible envelope value (right-hand side of the
    /// construction, taken with equality).
    pub mu_b_gamma: f64,
    pub sample_mean_mu: f64,
    /// Mean of log(mu(X) + 1) over the observations.
    pub sample_log_mean: f64,
    pub gamma: f64,
    pub n: usize,
}

/// Envelope construction from precomputed mu values.
pub fn construct_b_gamma_from_mu(mu_values: &[f64], gamma: f64) -> Result<EnvelopeEstimate> {
    if mu_values.is_empty() {
        return Err(Error::EmptyObservations);
    }
    if gamma < 0.0 {
        return Err(Error::NegativeArgument {
            name: "gamma",
            value: gamma,
        });
    }
    let n = mu_values.len();
    let sample_mean_mu = mu_values.iter().sum::<f64>() / n as f64;
    let sample_log_mean = mu_values.iter().map(|&m| (m + 1.0).ln()).sum::<f64>() / n as f64;
    Ok(EnvelopeEstimate {
        mu_b_gamma: sample_mean_mu + gamma * sample_log_mean.exp(),
        sample_mean_mu,
        sample_log_mean,
        gamma,
        n,
    })
}

/// Envelope construction from matrix observations.
pub fn construct_b_gamma(
    observations: &[Matrix],
    f: &MatrixFunctional,
    gamma: f64,
) -> Result<EnvelopeEstimate> {
    let mu_values = observations
        .iter()
        .map(|x| eval_mu(f, x))
        .collect::<Result<Vec<f64>>>()?;
    construct_b_gamma_from_mu(&mu_values, gamma)
}

fn validate_weights(weights: &[f64], expected_len: usize) -> Result<()> {
    if weights.len() != expected_len {
        return Err(Error::WeightError(format!(
            "expected {expected_len} weights for the functional order, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::WeightError("weights must be positive".into()));
    }
    if weights.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::WeightError("weights must be descending".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::WeightError(format!(
            "weights must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// Deterministic Householder reflector I - 2 u u^T with u built from the
/// index ramp (1, 2, .., n); orthogonal, symmetric and far from identity.
fn householder(n: usize) -> Matrix {
    let mut u = nalgebra::DVector::from_fn(n, |i, _| (i + 1) as f64);
    u /= u.norm();
    Matrix::identity(n, n) - 2.0 * &u * u.transpose()
}

/// Build a fixed matrix whose mu value equals `mu_target`, with the top-j
/// spectrum split as `weights[i] * mu_target` and the rest zero.
///
/// Supports the singular-sum functionals (spectral norm, Ky Fan) on any
/// shape and the eigenvalue-sum functional on square shapes. The orthogonal
/// factors are deterministic reflectors, so repeated calls agree bit for bit.
pub fn synthesize_from_mu(
    f: &MatrixFunctional,
    mu_target: f64,
    weights: &[f64],
    m: usize,
    n: usize,
) -> Result<Matrix> {
    if mu_target < 0.0 {
        return Err(Error::NegativeArgument {
            name: "mu_target",
            value: mu_target,
        });
    }
    let j = match f.kind() {
        FunctionalKind::SpectralNorm => 1,
        FunctionalKind::KyFanSingularSum(j) => {
            if j > m.min(n) {
                return Err(Error::IndexOutOfRange(format!(
                    "j = {j} exceeds min(m, n) = {}",
                    m.min(n)
                )));
            }
            j
        }
        FunctionalKind::AbsTopEigSum(j) => {
            if m != n {
                return Err(Error::ShapeMismatch(
                    "eigenvalue-sum synthesis needs a square shape".into(),
                ));
            }
            if j > n {
                return Err(Error::IndexOutOfRange(format!("j = {j} exceeds n = {n}")));
            }
            j
        }
        FunctionalKind::FrobeniusNorm => {
            return Err(Error::ShapeMismatch(
                "synthesis is defined for singular-sum and eigenvalue-sum functionals".into(),
            ))
        }
    };
    validate_weights(weights, j)?;
    if mu_target == 0.0 {
        return Ok(Matrix::zeros(m, n));
    }
    match f.kind() {
        FunctionalKind::AbsTopEigSum(_) => {
            let mut lambda = Matrix::zeros(n, n);
            for (i, &w) in weights.iter().enumerate() {
                lambda[(i, i)] = w * mu_target;
            }
            let v = householder(n);
            Ok(&v * lambda * &v)
        }
        _ => {
            let mut sigma = Matrix::zeros(m, n);
            for (i, &w) in weights.iter().enumerate() {
                sigma[(i, i)] = w * mu_target;
            }
            let u = householder(m);
            let v = householder(n);
            Ok(&u * sigma * &v)
        }
    }
}

/// Empirical tail curve: value at t is the fraction of samples with
/// |sample - center| >= t. The center comes from a held-out sample set
/// supplied by the caller.
pub fn empirical_tail(samples: &[f64], center: f64, t_grid: &[f64]) -> Result<TailCurve> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| samples.iter().filter(|&&s| (s - center).abs() >= t).count() as f64 / n)
        .collect();
    TailCurve::new(
        t_grid.to_vec(),
        values,
        "empirical",
        format!("center={center},samples={}", samples.len()),
        None,
    )
}

/// Empirical (v, L) for the ambient-dimension baseline:
/// v = lambda_max(sum_k mean_i X_{k,i}^2), L = max lambda_max(X_{k,i}).
///
/// One inner list of Hermitian draws per summand, all of the same dimension.
pub fn estimate_v_l(draws: &[Vec<Matrix>]) -> Result<(f64, f64)> {
    if draws.is_empty() || draws.iter().any(Vec::is_empty) {
        return Err(Error::EmptyObservations);
    }
    let dim = draws[0][0].nrows();
    let mut second_moment_sum = Matrix::zeros(dim, dim);
    let mut l_hat = f64::NEG_INFINITY;
    for per_summand in draws {
        let mut mean_sq = Matrix::zeros(dim, dim);
        for x in per_summand {
            if x.nrows() != dim || x.ncols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "expected {dim}x{dim}, got {}x{}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            let sym = symmetrize_checked(x)?;
            mean_sq += &sym * &sym;
            l_hat = l_hat.max(lambda_max(&sym)?);
        }
        second_moment_sum += mean_sq / per_summand.len() as f64;
    }
    Ok((lambda_max(&second_moment_sum)?, l_hat))
}

/// One point of the envelope-validation experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgammaPoint {
    pub gamma: f64,
    pub success_ratio: f64,
}

/// Success ratios of the envelope inequality over a gamma grid.
///
/// For each repeat: build the envelope from `n` fresh draws, estimate the
/// expectation side from `ref_n` further fresh draws (theta fixed at 1), and
/// count the repeat a success for gamma when
/// mean log(mu(X) + 1) <= log(mu(B_gamma) + 1). The reference protocol is
/// n = 100, repeats = 100, ref_n = 3000.
pub fn bgamma_success_experiment(
    model: &RandomMatrixModel,
    f: &MatrixFunctional,
    gamma_grid: &[f64],
    n: usize,
    repeats: usize,
    ref_n: usize,
) -> Result<Vec<BgammaPoint>> {
    if n == 0 || repeats == 0 || ref_n == 0 {
        return Err(Error::EmptyObservations);
    }
    if gamma_grid.is_empty() {
        return Err(Error::EmptyObservations);
    }
    model.validate()?;
    let per_repeat = par_map_indexed(repeats, |r| -> Result<Vec<bool>> {
        let repeat_model = model.with_seed(derive_seed(model.seed, r as u64));
        let mut mu_values = Vec::with_capacity(n);
        for i in 0..n {
            mu_values.push(eval_mu(f, &repeat_model.draw(i as u64)?)?);
        }
        let mut ref_sum = 0.0;
        for i in 0..ref_n {
            let x = repeat_model.draw((n + i) as u64)?;
            ref_sum += (eval_mu(f, &x)? + 1.0).ln();
        }
        let ref_mean = ref_sum / ref_n as f64;
        gamma_grid
            .iter()
            .map(|&gamma| {
                let est = construct_b_gamma_from_mu(&mu_values, gamma)?;
                Ok(ref_mean <= (est.mu_b_gamma + 1.0).ln())
            })
            .collect()
    });
    let mut successes = vec![0usize; gamma_grid.len()];
    for repeat in per_repeat {
        for (slot, ok) in successes.iter_mut().zip(repeat?) {
            if ok {
                *slot += 1;
            }
        }
    }
    Ok(gamma_grid
        .iter()
        .zip(successes)
        .map(|(&gamma, count)| BgammaPoint {
            gamma,
            success_ratio: count as f64 / repeats as f64,
        })
        .collect())
}

/// Convenience model for the singular-value experiments: general m x n,
/// scale 1, no symmetrization.
pub fn rectangular_model(
    distribution: EntryDistribution,
    rows: usize,
    cols: usize,
    seed: u64,
) -> RandomMatrixModel {
    RandomMatrixModel {
        distribution,
        rows,
        cols,
        scale: 1.0,
        symmetrize: false,
        seed,
    }
}

/// The symmetrized square model scale * (S + S^T)/2 used by the bound
/// comparison experiments.
pub fn symmetrized_gaussian_model(dim: usize, scale: f64, seed: u64) -> RandomMatrixModel {
    RandomMatrixModel {
        distribution: EntryDistribution::StdGaussian,
        rows: dim,
        cols: dim,
        scale,
        symmetrize: true,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::singular_values;
    use approx::assert_relative_eq;

    #[test]
    fn rademacher_support() {
        let model = rectangular_model(EntryDistribution::Rademacher, 2, 2, 9);
        let x = model.draw(0).unwrap();
        assert!(x.iter().all(|&e| e == 1.0 || e == -1.0));
    }

    #[test]
    fn draws_are_deterministic_and_indexed() {
        let model = rectangular_model(EntryDistribution::StdGaussian, 3, 4, 123);
        assert_eq!(model.draw(5).unwrap(), model.draw(5).unwrap());
        assert_ne!(model.draw(5).unwrap(), model.draw(6).unwrap());
    }

    #[test]
    fn symmetrize_is_exact() {
        let model = RandomMatrixModel {
            distribution: EntryDistribution::StdGaussian,
            rows: 4,
            cols: 4,
            scale: 0.5,
            symmetrize: true,
            seed: 11,
        };
        let x = model.draw(0).unwrap();
        assert_eq!(x, x.transpose());
        // matches 0.5 * (S + S^T)/2 for the raw draw with identical stream
        let raw = RandomMatrixModel {
            scale: 1.0,
            symmetrize: false,
            ..model
        }
        .draw(0)
        .unwrap();
        let expected = (&raw + raw.transpose()) * 0.25;
        assert_eq!(x, expected);
    }

    #[test]
    fn symmetrize_requires_square() {
        let model = RandomMatrixModel {
            distribution: EntryDistribution::Uniform,
            rows: 2,
            cols: 3,
            scale: 1.0,
            symmetrize: true,
            seed: 0,
        };
        assert!(model.draw(0).is_err());
    }

    #[test]
    fn gaussian_entry_mean_near_zero() {
        let model = rectangular_model(EntryDistribution::StdGaussian, 50, 10, 77);
        let mut sum = 0.0;
        let draws = 300usize;
        for i in 0..draws {
            sum += model.draw(i as u64).unwrap().sum();
        }
        let mean = sum / (draws * 500) as f64;
        // 3 sigma of the entry mean over 150k samples
        assert!(mean.abs() < 3.0 / (150_000f64).sqrt());
    }

    #[test]
    fn b_gamma_examples() {
        let est = construct_b_gamma_from_mu(&[1.0], 0.5).unwrap();
        assert_relative_eq!(est.mu_b_gamma, 2.0, max_relative = 1e-14);

        let est = construct_b_gamma_from_mu(&[1.0, 3.0], 0.0).unwrap();
        assert_relative_eq!(est.mu_b_gamma, 2.0, max_relative = 1e-14);

        let est = construct_b_gamma_from_mu(&[0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(est.mu_b_gamma, 1.0, max_relative = 1e-14);

        assert!(construct_b_gamma_from_mu(&[], 0.1).is_err());
    }

    #[test]
    fn b_gamma_from_matrices() {
        let f = MatrixFunctional::spectral_norm();
        let obs = vec![Matrix::identity(2, 2), Matrix::identity(2, 2) * 3.0];
        let est = construct_b_gamma(&obs, &f, 0.0).unwrap();
        assert_relative_eq!(est.mu_b_gamma, 2.0, max_relative = 1e-14);
        assert!(est.mu_b_gamma >= est.sample_mean_mu);
    }

    #[test]
    fn synthesize_eigen_split() {
        let f = MatrixFunctional::abs_top_eig_sum(2).unwrap();
        let b = synthesize_from_mu(&f, 4.0, &[0.5, 0.5], 3, 3).unwrap();
        let eig = crate::matfun::eigenvalues_desc(&b).unwrap();
        assert_relative_eq!(eig[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(eig[1], 2.0, epsilon = 1e-10);
        assert_relative_eq!(eig[2], 0.0, epsilon = 1e-10);
        assert_relative_eq!(eval_mu(&f, &b).unwrap(), 4.0, max_relative = 1e-8);
    }

    #[test]
    fn synthesize_rank_one_rectangular() {
        let f = MatrixFunctional::ky_fan(1).unwrap();
        let b = synthesize_from_mu(&f, 3.0, &[1.0], 2, 4).unwrap();
        let sv = singular_values(&b).unwrap();
        assert_relative_eq!(sv[0], 3.0, max_relative = 1e-10);
        assert!(sv[1].abs() < 1e-10);
        assert_relative_eq!(eval_mu(&f, &b).unwrap(), 3.0, max_relative = 1e-8);
    }

    #[test]
    fn synthesize_zero_target() {
        let f = MatrixFunctional::spectral_norm();
        let b = synthesize_from_mu(&f, 0.0, &[1.0], 2, 2).unwrap();
        assert_eq!(b, Matrix::zeros(2, 2));
    }

    #[test]
    fn synthesize_rejects_bad_weights() {
        let f = MatrixFunctional::ky_fan(2).unwrap();
        assert!(synthesize_from_mu(&f, 1.0, &[0.3, 0.7], 3, 3).is_err()); // ascending
        assert!(synthesize_from_mu(&f, 1.0, &[0.6, 0.3], 3, 3).is_err()); // sum != 1
        assert!(synthesize_from_mu(&f, 1.0, &[1.0], 3, 3).is_err()); // wrong length
    }

    #[test]
    fn empirical_tail_examples() {
        let grid = [0.5, 1.0, 2.0];
        let curve = empirical_tail(&[3.0, 3.0, 3.0], 3.0, &grid).unwrap();
        assert_eq!(curve.bound_values, vec![0.0, 0.0, 0.0]);

        let curve = empirical_tail(&[0.0, 2.0], 0.0, &[1.0]).unwrap();
        assert_eq!(curve.bound_values, vec![0.5]);

        // vanishing t counts every sample not exactly at the center
        let curve = empirical_tail(&[0.5, 2.0], 0.0, &[1e-12]).unwrap();
        assert_eq!(curve.bound_values, vec![1.0]);

        assert!(empirical_tail(&[], 0.0, &[1.0]).is_err());
    }

    #[test]
    fn v_l_examples() {
        let x = Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[2.0, -1.0]));
        let (v, l) = estimate_v_l(&[vec![x]]).unwrap();
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
        assert_relative_eq!(l, 2.0, max_relative = 1e-12);

        let zero = Matrix::zeros(2, 2);
        let (v, l) = estimate_v_l(&[vec![zero.clone()], vec![zero]]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(l, 0.0);

        let id = Matrix::identity(2, 2);
        let (v, l) = estimate_v_l(&[vec![id.clone()], vec![id]]).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
        assert_relative_eq!(l, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn bgamma_zero_margin_is_not_certain() {
        // without the gamma margin the envelope inequality keeps failing a
        // non-trivial fraction of the time
        let model = rectangular_model(EntryDistribution::StdGaussian, 20, 6, 17);
        let f = MatrixFunctional::spectral_norm();
        let points = bgamma_success_experiment(&model, &f, &[0.0], 40, 50, 200).unwrap();
        let ratio = points[0].success_ratio;
        assert!(
            ratio < 1.0,
            "gamma = 0 gave a certain success ratio {ratio}"
        );
        assert!(ratio > 0.0);
    }

    #[test]
    fn bgamma_failure_frequency_within_theory() {
        // empirical failure frequency of the envelope inequality stays below
        // exp(-N (log(1 + gamma))^2 / (2 M2)) plus statistical slack, where
        // M2 is the second moment of log(mu(X) + 1)
        let model = rectangular_model(EntryDistribution::StdGaussian, 20, 8, 31);
        let f = MatrixFunctional::spectral_norm();
        let (n, gamma) = (60usize, 0.05);
        let points = bgamma_success_experiment(&model, &f, &[gamma], n, 100, 300).unwrap();
        let failure = 1.0 - points[0].success_ratio;
        let m2_model = model.with_seed(derive_seed(model.seed, u64::MAX));
        let mut m2 = 0.0;
        let m2_draws = 1000;
        for i in 0..m2_draws {
            let v = (eval_mu(&f, &m2_model.draw(i).unwrap()).unwrap() + 1.0).ln();
            m2 += v * v;
        }
        m2 /= m2_draws as f64;
        let theory = (-(n as f64) * (1.0 + gamma).ln().powi(2) / (2.0 * m2)).exp();
        assert!(
            failure <= theory + 0.05,
            "failure {failure} exceeds theoretical {theory} + 0.05"
        );
    }

    #[test]
    fn bgamma_experiment_small_smoke() {
        let model = rectangular_model(EntryDistribution::StdGaussian, 8, 4, 5);
        let f = MatrixFunctional::spectral_norm();
        let points = bgamma_success_experiment(&model, &f, &[0.0, 0.5], 20, 10, 40).unwrap();
        assert_eq!(points.len(), 2);
        for p in &points {
            assert!((0.0..=1.0).contains(&p.success_ratio));
        }
        // a huge gamma margin should always succeed
        assert_eq!(points[1].success_ratio, 1.0);
    }
}
