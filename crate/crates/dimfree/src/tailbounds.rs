//! Closed-form tail and expectation bounds.
//!
//! Dimension-free bounds for sums of independent random matrices (whole-set,
//! partitioned and Azuma-Hoeffding forms), matrix random series, matrix
//! martingale difference sequences, the stochastic-process supremum
//! thresholds, plus the dimension-dependent ambient/intrinsic baselines used
//! for comparison curves.
//!
//! Values above 1 are reported verbatim, never clipped: the comparison
//! experiments rely on seeing where a bound turns vacuous.

use std::io::Write;

use crate::bounds::{alpha1, expectation_multiplier, gamma, PhiSummary};
use crate::error::{Error, Result};
use crate::partitions::IndexPartition;

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value <= 0.0 || !value.is_finite() {
        return Err(Error::NonPositiveInput { name, value });
    }
    Ok(())
}

/// The three chained relaxations of a Bennett-type bound. Always ordered
/// `bennett <= bernstein <= subgauss_subexp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTriple {
    /// exp-prefactor times exp(-phi Gamma(t / (K phi))).
    pub bennett: f64,
    /// exp-prefactor times exp(-(t^2/2) / (K^2 phi + K t / 3)).
    pub bernstein: f64,
    /// Sub-Gaussian branch for t < 3 K phi, sub-exponential beyond.
    pub subgauss_subexp: f64,
}

fn tail_triple(t: f64, k: usize, phi: f64) -> Result<TailTriple> {
    let prefactor = (1.0 + alpha1(k)) * phi;
    let k = k as f64;
    let bennett = (prefactor - phi * gamma(t / (k * phi))?).exp();
    let bernstein = (prefactor - (t * t / 2.0) / (k * k * phi + k * t / 3.0)).exp();
    let subgauss_subexp = if t < 3.0 * k * phi {
        (prefactor - t * t / (4.0 * k * k * phi)).exp()
    } else {
        (prefactor - 3.0 * t / (4.0 * k)).exp()
    };
    Ok(TailTriple {
        bennett,
        bernstein,
        subgauss_subexp,
    })
}

/// Whole-set dimension-free tail bound with aggregate phi = (1 + mu(U))^K - 1.
pub fn df_tail_thm1(t: f64, k: usize, phi_full: f64) -> Result<TailTriple> {
    require_positive("t", t)?;
    require_positive("phi_full", phi_full)?;
    assert!(k >= 1, "summand count K must be at least 1");
    tail_triple(t, k, phi_full)
}

/// Partitioned dimension-free tail bound: same three forms with
/// (phi_Omega, tau) in place of (phi, K).
pub fn df_tail_thm2(t: f64, phi: &PhiSummary) -> Result<TailTriple> {
    require_positive("t", t)?;
    require_positive("phi_omega", phi.phi_omega)?;
    tail_triple(t, phi.tau, phi.phi_omega)
}

/// Azuma-Hoeffding form for the pairing partition:
/// exp(phi/4) exp(-t^2 / (4 phi)).
pub fn df_tail_azuma(t: f64, phi_pair: f64) -> Result<f64> {
    require_positive("t", t)?;
    if phi_pair < 0.0 {
        return Err(Error::NonPositiveInput {
            name: "phi_pair",
            value: phi_pair,
        });
    }
    Ok((phi_pair / 4.0 - t * t / (4.0 * phi_pair)).exp())
}

/// Bennett-form bounds for a matrix random series weighted by variables with
/// first absolute moments bounded by `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTail {
    /// Whole-set form with psi = (c mu(V) + 1)^K - 1.
    pub whole: f64,
    /// Partitioned form with psi_Omega summed per block.
    pub partitioned: f64,
}

/// Tail bounds for sum_k xi_k A_k given the coefficient envelopes mu(A_k).
pub fn series_tail(t: f64, c: f64, mu_a: &[f64], partition: &IndexPartition) -> Result<SeriesTail> {
    require_positive("t", t)?;
    require_positive("c", c)?;
    let k = mu_a.len();
    if partition.index_count() != k {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} indices but series has {k}",
            partition.index_count()
        )));
    }
    let max_all = mu_a.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let psi = (c * max_all + 1.0).powi(k as i32) - 1.0;
    let psi_omega: f64 = partition
        .blocks()
        .iter()
        .map(|block| {
            let m = block.iter().fold(0.0f64, |acc, &i| acc.max(mu_a[i]));
            (c * m + 1.0).powi(block.len() as i32) - 1.0
        })
        .sum();
    let whole = if psi > 0.0 {
        tail_triple(t, k, psi)?.bennett
    } else {
        0.0
    };
    let partitioned = if psi_omega > 0.0 {
        tail_triple(t, partition.tau(), psi_omega)?.bennett
    } else {
        0.0
    };
    Ok(SeriesTail { whole, partitioned })
}

/// Which martingale-difference bound form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdsVariant {
    Bennett,
    Azuma,
}

/// Tail bound for a matrix martingale difference sequence. The Bennett form
/// carries Gamma(t / (2 tau phi_Omega)): the martingale route pays a factor
/// two in t relative to the independent-sum bound.
pub fn mds_tail(t: f64, phi: &PhiSummary, variant: MdsVariant) -> Result<f64> {
    require_positive("t", t)?;
    require_positive("phi_omega", phi.phi_omega)?;
    let tau = phi.tau as f64;
    let phi_omega = phi.phi_omega;
    Ok(match variant {
        MdsVariant::Bennett => ((1.0 + alpha1(phi.tau)) * phi_omega
            - phi_omega * gamma(t / (2.0 * tau * phi_omega))?)
        .exp(),
        MdsVariant::Azuma => df_tail_azuma(t, phi_omega)?,
    })
}

/// Expectation bound E mu(sum X_k) <= phi_pair (sqrt(2 alpha2(c)) + c alpha2(c)/3).
///
/// The multiplier is identically 1 (see [`expectation_multiplier`]), so this
/// returns phi_pair for every c; the identity is asserted.
pub fn expectation_bound(phi_pair: f64, c: f64) -> Result<f64> {
    if phi_pair < 0.0 {
        return Err(Error::NegativeArgument {
            name: "phi_pair",
            value: phi_pair,
        });
    }
    let multiplier = expectation_multiplier(c)?;
    debug_assert!((multiplier - 1.0).abs() < 1e-9);
    Ok(phi_pair * multiplier)
}

/// Expectation bound from the polynomial dominating function:
/// E mu(sum X_k) <= phi_Omega.
pub fn expectation_bound_g3(phi_omega: f64) -> f64 {
    phi_omega
}

/// Supremum thresholds for a stochastic process with E|X_i| <= beta:
/// P{sup |X_i| >= threshold} <= exp(-epsilon) in the respective regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupremumThresholds {
    /// sqrt(4 beta (epsilon + (2 ln 2 - 1) beta)), for the small-t regime.
    pub small_t: f64,
    /// (4/3)(epsilon + (2 ln 2 - 1) beta), for the large-t regime.
    pub large_t: f64,
}

/// Both regime thresholds; the caller picks the smaller applicable one.
pub fn supremum_thresholds(beta: f64, epsilon: f64) -> Result<SupremumThresholds> {
    require_positive("beta", beta).map_err(|_| Error::NonPositiveArgument {
        name: "beta",
        value: beta,
    })?;
    if epsilon <= 0.0 {
        return Err(Error::NonPositiveArgument {
            name: "epsilon",
            value: epsilon,
        });
    }
    let shift = epsilon + (2.0 * 2.0f64.ln() - 1.0) * beta;
    Ok(SupremumThresholds {
        small_t: (4.0 * beta * shift).sqrt(),
        large_t: 4.0 / 3.0 * shift,
    })
}

/// Parameters of the dimension-dependent baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdIdParams {
    /// Ambient dimension of the sum.
    pub dim: usize,
    /// Largest eigenvalue of the summed second moments.
    pub v: f64,
    /// Uniform cap on the largest eigenvalue of each summand.
    pub l: f64,
    /// Intrinsic dimension tr(V) / lambda_1(V); only the intrinsic bound
    /// reads it.
    pub intdim: f64,
}

impl AdIdParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::NonPositiveInput {
                name: "dim",
                value: self.dim as f64,
            });
        }
        if self.v < 0.0 {
            return Err(Error::NegativeArgument {
                name: "v",
                value: self.v,
            });
        }
        require_positive("L", self.l)?;
        if self.intdim < 1.0 {
            return Err(Error::NonPositiveInput {
                name: "intdim",
                value: self.intdim,
            });
        }
        Ok(())
    }
}

/// Ambient-dimension Bernstein baseline: dim exp(-(t^2/2) / (v + L t / 3)).
pub fn ad_tail(t: f64, p: &AdIdParams) -> Result<f64> {
    require_positive("t", t)?;
    p.validate()?;
    Ok(p.dim as f64 * (-(t * t / 2.0) / (p.v + p.l * t / 3.0)).exp())
}

/// Intrinsic-dimension baseline: 4 intdim exp(-(t^2/2) / (v + L t / 3)),
/// defined only for t >= sqrt(v) + L/3 (boundary included). Returns `None`
/// below the threshold, where the bound cannot be used.
pub fn id_tail(t: f64, p: &AdIdParams) -> Result<Option<f64>> {
    p.validate()?;
    if t < p.v.sqrt() + p.l / 3.0 {
        return Ok(None);
    }
    Ok(Some(
        4.0 * p.intdim * (-(t * t / 2.0) / (p.v + p.l * t / 3.0)).exp(),
    ))
}

/// A bound (or empirical frequency) evaluated on a t grid, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub t_values: Vec<f64>,
    pub bound_values: Vec<f64>,
    /// Which bound produced the curve.
    pub label: String,
    /// Serialized parameter set for the CSV metadata.
    pub params: String,
    pub seed: Option<u64>,
}

impl TailCurve {
    /// Build a curve, checking that the grid is ascending and positive and
    /// that the two vectors match in length.
    pub fn new(
        t_values: Vec<f64>,
        bound_values: Vec<f64>,
        label: impl Into<String>,
        params: impl Into<String>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if t_values.len() != bound_values.len() {
            return Err(Error::ShapeMismatch(format!(
                "t grid has {} points but values have {}",
                t_values.len(),
                bound_values.len()
            )));
        }
        if t_values.windows(2).any(|w| w[1] <= w[0]) || t_values.first().is_some_and(|&t| t <= 0.0)
        {
            return Err(Error::NonPositiveInput {
                name: "t_values (must be ascending positive)",
                value: *t_values.first().unwrap_or(&f64::NAN),
            });
        }
        Ok(Self {
            t_values,
            bound_values,
            label: label.into(),
            params: params.into(),
            seed,
        })
    }

    /// Evaluate `f` over the grid.
    pub fn from_fn(
        t_grid: &[f64],
        label: impl Into<String>,
        params: impl Into<String>,
        seed: Option<u64>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = t_grid.iter().map(|&t| f(t)).collect();
        Self::new(t_grid.to_vec(), values, label, params, seed)
    }

    /// A value above 1 bounds nothing.
    pub fn is_vacuous_at(&self, i: usize) -> bool {
        self.bound_values[i] > 1.0
    }

    /// Serialize as `t,bound,label,vacuous` rows (no header; the runner
    /// prepends header and metadata).
    pub fn write_csv_rows<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (i, (&t, &b)) in self.t_values.iter().zip(&self.bound_values).enumerate() {
            writeln!(w, "{},{},{},{}", t, b, self.label, self.is_vacuous_at(i))?;
        }
        Ok(())
    }
}

/// Geometric grid of `points` values from `t_min` to `t_max` inclusive.
pub fn geometric_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    require_positive("t_min", t_min)?;
    if t_max <= t_min {
        return Err(Error::NonPositiveInput {
            name: "t_max - t_min",
            value: t_max - t_min,
        });
    }
    if points < 2 {
        return Err(Error::NonPositiveInput {
            name: "points",
            value: points as f64,
        });
    }
    let ratio = (t_max / t_min).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|i| t_min * (ratio * i as f64).exp())
        .collect())
}
