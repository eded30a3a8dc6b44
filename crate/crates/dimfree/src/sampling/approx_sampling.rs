//! Matrix approximation via random sampling.
//!
//! The target B = sum_l B_l is estimated by R = p_l^{-1} B_l with
//! probability p_l (unbiased by construction) and averaged over K
//! independent copies. When every drawn copy keeps its individual error
//! below sqrt(1 + 2 eps mu(B)) - 1, the mean relative error is bounded by
//! eps times a multiplier that is identically one.

use rand::Rng;

use crate::bounds::expectation_multiplier;
use crate::error::{Error, Result};
use crate::matfun::{eval_mu, Matrix, MatrixFunctional};
use crate::parallel::par_map_indexed;
use crate::rng::rng_for;

/// A randomized approximation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxScenario {
    /// Summands of the target matrix.
    pub summands: Vec<Matrix>,
    /// Sampling probabilities, positive and summing to 1.
    pub probabilities: Vec<f64>,
    /// Number of averaged copies K.
    pub copies: usize,
    /// Error measure.
    pub functional: MatrixFunctional,
    /// Target relative accuracy.
    pub epsilon: f64,
}

impl ApproxScenario {
    pub fn validate(&self) -> Result<()> {
        if self.summands.is_empty() {
            return Err(Error::ShapeMismatch("no summands".into()));
        }
        if self.summands.len() != self.probabilities.len() {
            return Err(Error::ShapeMismatch(
                "one probability per summand required".into(),
            ));
        }
        let (m, n) = (self.summands[0].nrows(), self.summands[0].ncols());
        if self
            .summands
            .iter()
            .any(|b| b.nrows() != m || b.ncols() != n)
        {
            return Err(Error::ShapeMismatch(
                "summands must share a common shape".into(),
            ));
        }
        if self.probabilities.iter().any(|&p| p <= 0.0) {
            return Err(Error::NonPositiveArgument {
                name: "probability",
                value: *self
                    .probabilities
                    .iter()
                    .find(|&&p| p <= 0.0)
                    .expect("some probability is non-positive"),
            });
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "probabilities must sum to 1 within 1e-12, got {total}"
            )));
        }
        if self.copies == 0 {
            return Err(Error::Config("copies must be positive".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::NonPositiveArgument {
                name: "epsilon",
                value: self.epsilon,
            });
        }
        Ok(())
    }

    /// The target matrix B = sum_l B_l.
    pub fn target(&self) -> Matrix {
        let mut b = Matrix::zeros(self.summands[0].nrows(), self.summands[0].ncols());
        for s in &self.summands {
            b += s;
        }
        b
    }

    /// Largest entry deviation of sum_l p_l (p_l^{-1} B_l) from the target;
    /// zero up to floating error because the estimator is unbiased by
    /// construction.
    pub fn unbiasedness_residual(&self) -> f64 {
        let b = self.target();
        let mut recon = Matrix::zeros(b.nrows(), b.ncols());
        for (s, &p) in self.summands.iter().zip(&self.probabilities) {
            recon += (s / p) * p;
        }
        (recon - b).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }
}

/// Outcome of the Monte-Carlo approximation experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxOutcome {
    /// Monte-Carlo estimate of E mu(R_hat_K - B) / mu(B).
    pub mean_error_ratio: f64,
    /// eps (sqrt(2 alpha2(c)) + c alpha2(c)/3), i.e. exactly eps.
    pub bound_ratio: f64,
    /// Whether max_k mu(R_k - B) <= sqrt(1 + 2 eps mu(B)) - 1 held on every
    /// trial.
    pub condition_ok: bool,
    /// Standard error of the mean error ratio.
    pub std_error: f64,
}

/// Run the randomized approximation `trials` times and compare against the
/// expectation bound.
pub fn run_approximation(sc: &ApproxScenario, trials: usize, seed: u64) -> Result<ApproxOutcome> {
    sc.validate()?;
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let b = sc.target();
    let mu_b = eval_mu(&sc.functional, &b)?;
    if mu_b <= 0.0 {
        return Err(Error::ZeroMuB);
    }
    // per-outcome error mu(p_l^{-1} B_l - B), reused across draws
    let copy_errors = sc
        .summands
        .iter()
        .zip(&sc.probabilities)
        .map(|(bl, &p)| eval_mu(&sc.functional, &(bl / p - &b)))
        .collect::<Result<Vec<f64>>>()?;
    let u_cap = (1.0 + 2.0 * sc.epsilon * mu_b).sqrt() - 1.0;
    let mut cumulative = vec![0.0; sc.probabilities.len()];
    let mut acc = 0.0;
    for (slot, &p) in cumulative.iter_mut().zip(&sc.probabilities) {
        acc += p;
        *slot = acc;
    }

    let per_trial = par_map_indexed(trials, |trial| -> Result<(f64, bool)> {
        let mut rng = rng_for(seed, trial as u64, 0);
        let (m, n) = (b.nrows(), b.ncols());
        let mut avg = Matrix::zeros(m, n);
        let mut u_trial = 0.0f64;
        for _ in 0..sc.copies {
            let coin: f64 = rng.random();
            let l = cumulative
                .iter()
                .position(|&c| coin < c)
                .unwrap_or(cumulative.len() - 1);
            avg += &sc.summands[l] / sc.probabilities[l];
            u_trial = u_trial.max(copy_errors[l]);
        }
        avg /= sc.copies as f64;
        let err = eval_mu(&sc.functional, &(avg - &b))? / mu_b;
        Ok((err, u_trial <= u_cap + 1e-12))
    });

    let mut errors = Vec::with_capacity(trials);
    let mut condition_ok = true;
    for r in per_trial {
        let (err, ok) = r?;
        errors.push(err);
        condition_ok &= ok;
    }
    let mean = errors.iter().sum::<f64>() / trials as f64;
    let var =
        errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (trials.max(2) - 1) as f64;
    Ok(ApproxOutcome {
        mean_error_ratio: mean,
        bound_ratio: sc.epsilon * expectation_multiplier(1.0)?,
        condition_ok,
        std_error: (var / trials as f64).sqrt(),
    })
}

/// Sample count from the dimension-dependent baseline:
/// ceil(2 m2 log(m + n) / eps^2 + 2 L log(m + n) / (3 eps)), at least 1.
pub fn tropp_sample_count(m: usize, n: usize, m2: f64, l: f64, epsilon: f64) -> usize {
    if epsilon <= 0.0 || (m2 <= 0.0 && l <= 0.0) {
        return 1;
    }
    let log_dim = ((m + n) as f64).ln();
    let rhs = 2.0 * m2 * log_dim / (epsilon * epsilon) + 2.0 * l * log_dim / (3.0 * epsilon);
    (rhs.ceil() as usize).max(1)
}
