//! Monte Carlo error estimates from the steady-state Gaussian approximation.

use rand::Rng;

use super::gaussian::{steady_state_distribution, GaussianSampler, StatisticModel, SteadyStateKind};
use crate::error::{Error, Result};
use crate::simplex::{clip_to_simplex, kl_divergence, Pmf};

pub const MIN_MC_COUNT: usize = 100;

/// Relative gap below which two Gaussian branch outputs count as tied.
///
/// Identical hypotheses produce identical means and covariance rows, but the
/// eigendecomposition leaves last-digit differences between their samples.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Isolated-iterate approximation (variance factor 1/2).
    Upper,
    /// Combined-status approximation (variance factor beta).
    Lower,
}

impl BoundKind {
    /// Steady-state kind used by this bound, with an optional replacement factor.
    pub fn steady_state(self, beta: f64, beta_override: Option<f64>) -> SteadyStateKind {
        match (beta_override, self) {
            (Some(b), _) => SteadyStateKind::Combined { beta: b },
            (None, BoundKind::Upper) => SteadyStateKind::Isolated,
            (None, BoundKind::Lower) => SteadyStateKind::Combined { beta },
        }
    }
}

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_hits(hits: usize, count: usize) -> Self {
        let p = hits as f64 / count as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / count as f64).sqrt(),
            count,
        }
    }
}

fn check_count(mc_count: usize) -> Result<()> {
    if mc_count < MIN_MC_COUNT {
        return Err(Error::InvalidArgument(format!(
            "mc_count {mc_count} below the minimum of {MIN_MC_COUNT}"
        )));
    }
    Ok(())
}

fn argmax_within_tolerance<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * best.abs().max(1.0);
    let ties = values.iter().filter(|&&v| best - v <= tol).count();
    let pick = if ties > 1 { rng.random_range(0..ties) } else { 0 };
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| best - v <= tol)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("at least one maximum")
}

/// Probability that the argmax of a steady-state sample misses the true hypothesis.
///
/// `truth` indexes `hypotheses`; `beta` is the agent's variance-reduction factor.
#[allow(clippy::too_many_arguments)]
pub fn bound_error_ia<R: Rng + ?Sized>(
    hypotheses: &[Pmf],
    truth: usize,
    mu: f64,
    beta: f64,
    kind: BoundKind,
    beta_override: Option<f64>,
    mc_count: usize,
    rng: &mut R,
) -> Result<Estimate> {
    check_count(mc_count)?;
    let p_true = hypotheses.get(truth).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "true hypothesis {} of {}",
            truth + 1,
            hypotheses.len()
        ))
    })?;
    let summary = steady_state_distribution(
        p_true,
        StatisticModel::Ia(hypotheses),
        mu,
        kind.steady_state(beta, beta_override),
    )?;
    let mut sampler = GaussianSampler::new(&summary)?;
    let mut draw = vec![0.0; hypotheses.len()];
    let mut errors = 0;
    for _ in 0..mc_count {
        sampler.sample_into(rng, &mut draw);
        if argmax_within_tolerance(&draw, rng) != truth {
            errors += 1;
        }
    }
    Ok(Estimate::from_hits(errors, mc_count))
}

/// Type-7 quantile (linear interpolation between order statistics) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("quantile level {q} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Type-7 quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiaBound {
    pub gamma: f64,
    pub type2: Estimate,
}

/// `D(clip(sample) || p0)` for `count` steady-state samples under `p_true`.
fn divergence_samples<R: Rng + ?Sized>(
    p_true: &Pmf,
    null: &Pmf,
    mu: f64,
    kind: SteadyStateKind,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let m = null.len();
    let summary = steady_state_distribution(p_true, StatisticModel::Pia(m), mu, kind)?;
    let mut sampler = GaussianSampler::new(&summary)?;
    let mut draw = vec![0.0; m];
    (0..count)
        .map(|_| {
            sampler.sample_into(rng, &mut draw);
            kl_divergence(&clip_to_simplex(&draw), null)
        })
        .collect()
}

/// Calibrates the threshold on H0 samples, then estimates the miss probability under H1.
#[allow(clippy::too_many_arguments)]
pub fn bound_error_pia<R: Rng + ?Sized>(
    null: &Pmf,
    alternative: &Pmf,
    mu: f64,
    beta: f64,
    kind: BoundKind,
    beta_override: Option<f64>,
    type1_target: f64,
    mc_count: usize,
    rng: &mut R,
) -> Result<PiaBound> {
    check_count(mc_count)?;
    if !(type1_target > 0.0 && type1_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "type-I target {type1_target} outside (0, 1)"
        )));
    }
    if alternative.len() != null.len() {
        return Err(Error::AlphabetMismatch {
            expected: null.len(),
            found: alternative.len(),
        });
    }
    let ss = kind.steady_state(beta, beta_override);
    let h0 = divergence_samples(null, null, mu, ss, mc_count, rng)?;
    let gamma = quantile(&h0, 1.0 - type1_target)?;
    let h1 = divergence_samples(alternative, null, mu, ss, mc_count, rng)?;
    let misses = h1.iter().filter(|&&d| d < gamma).count();
    Ok(PiaBound {
        gamma,
        type2: Estimate::from_hits(misses, mc_count),
    })
}
