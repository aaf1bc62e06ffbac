use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::simplex::{Pmf, StatMode};

/// Eigenvalues below this are treated as exact zeros when sampling.
pub const EIGEN_CLAMP: f64 = 1e-12;
/// Eigenvalues more negative than this make a covariance invalid.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// What each agent computes per observation.
#[derive(Debug, Clone, Copy)]
pub enum StatisticModel<'a> {
    /// One log-likelihood per hypothesis.
    Ia(&'a [Pmf]),
    /// One indicator per symbol of an alphabet of this size.
    Pia(usize),
}

impl StatisticModel<'_> {
    pub fn mode(&self) -> StatMode {
        match self {
            StatisticModel::Ia(_) => StatMode::Ia,
            StatisticModel::Pia(_) => StatMode::Pia,
        }
    }

    fn check(&self, p_true: &Pmf) -> Result<()> {
        let expected = match self {
            StatisticModel::Ia(hyps) => {
                if hyps.is_empty() {
                    return Err(Error::InvalidArgument("no hypotheses given".into()));
                }
                hyps.iter()
                    .find(|h| h.len() != p_true.len())
                    .map_or(p_true.len(), Pmf::len)
            }
            StatisticModel::Pia(m) => *m,
        };
        if expected != p_true.len() {
            return Err(Error::AlphabetMismatch {
                expected,
                found: p_true.len(),
            });
        }
        Ok(())
    }

    /// Statistic vector produced by symbol `x`.
    fn statistic(&self, x: usize) -> Vec<f64> {
        match self {
            StatisticModel::Ia(hyps) => hyps.iter().map(|h| h.probs()[x].ln()).collect(),
            StatisticModel::Pia(m) => (0..*m).map(|y| if y == x { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Expected statistic vector under `p_true`.
pub fn mean_vector(p_true: &Pmf, model: StatisticModel) -> Result<DVector<f64>> {
    model.check(p_true)?;
    Ok(match model {
        StatisticModel::Pia(_) => DVector::from_column_slice(p_true.probs()),
        StatisticModel::Ia(hyps) => DVector::from_iterator(
            hyps.len(),
            hyps.iter().map(|h| {
                p_true
                    .probs()
                    .iter()
                    .zip(h.probs())
                    .map(|(p, q)| p * q.ln())
                    .sum::<f64>()
            }),
        ),
    })
}

/// Covariance of the per-observation statistic vector under `p_true`.
pub fn lambda_matrix(p_true: &Pmf, model: StatisticModel) -> Result<DMatrix<f64>> {
    model.check(p_true)?;
    let p = p_true.probs();
    if let StatisticModel::Pia(m) = model {
        return Ok(DMatrix::from_fn(m, m, |r, s| {
            if r == s {
                p[r] * (1.0 - p[r])
            } else {
                -p[r] * p[s]
            }
        }));
    }
    let mean = mean_vector(p_true, model)?;
    let dim = mean.len();
    let mut lambda = DMatrix::zeros(dim, dim);
    for (x, &px) in p.iter().enumerate() {
        let centered = DVector::from_vec(model.statistic(x)) - &mean;
        lambda += px * &centered * centered.transpose();
    }
    // Exact symmetry, independent of accumulation order.
    Ok((&lambda + lambda.transpose()) * 0.5)
}

/// Which steady-state iterate a summary describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyStateKind {
    /// Combined status `w`, covariance `mu * beta * Lambda`.
    Combined { beta: f64 },
    /// Isolated iterate `z`, covariance `mu * Lambda / 2`.
    Isolated,
}

impl SteadyStateKind {
    pub fn factor(self) -> f64 {
        match self {
            SteadyStateKind::Combined { beta } => beta,
            SteadyStateKind::Isolated => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub kind: SteadyStateKind,
}

impl GaussianSummary {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standard deviation of each component.
    pub fn std_devs(&self) -> Vec<f64> {
        self.covariance
            .diagonal()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }
}

pub fn steady_state_distribution(
    p_true: &Pmf,
    model: StatisticModel,
    mu: f64,
    kind: SteadyStateKind,
) -> Result<GaussianSummary> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!("step size {mu} outside (0, 1)")));
    }
    let factor = kind.factor();
    if !(factor >= 0.0 && factor.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "variance factor {factor} is not a finite nonnegative number"
        )));
    }
    Ok(GaussianSummary {
        mean: mean_vector(p_true, model)?,
        covariance: lambda_matrix(p_true, model)? * (mu * factor),
        kind,
    })
}

/// Draws from `N(mean, covariance)` through a clamped eigendecomposition.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    /// Columns are eigenvectors scaled by the square root of their eigenvalue.
    factor: DMatrix<f64>,
    noise: DVector<f64>,
}

impl GaussianSampler {
    pub fn new(summary: &GaussianSummary) -> Result<Self> {
        let dim = summary.dim();
        if summary.covariance.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "covariance of shape {:?} for mean of length {dim}",
                summary.covariance.shape()
            )));
        }
        let eigen = SymmetricEigen::new(summary.covariance.clone());
        if let Some(&min) = eigen
            .eigenvalues
            .iter()
            .min_by(|a, b| a.total_cmp(b))
            .filter(|&&v| v < -PSD_TOLERANCE)
        {
            return Err(Error::NotPositiveSemiDefinite(min));
        }
        let mut factor = eigen.eigenvectors;
        for (mut col, &lambda) in factor.column_iter_mut().zip(eigen.eigenvalues.iter()) {
            let scale = if lambda < EIGEN_CLAMP { 0.0 } else { lambda.sqrt() };
            col *= scale;
        }
        Ok(GaussianSampler {
            mean: summary.mean.clone(),
            factor,
            noise: DVector::zeros(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Writes one draw into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        for g in self.noise.iter_mut() {
            *g = rng.sample(StandardNormal);
        }
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.mean[r] + self.factor.row(r).dot(&self.noise.transpose());
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// `count` independent draws, one row per draw.
pub fn sample_steady_state<R: Rng + ?Sized>(
    summary: &GaussianSummary,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let mut sampler = GaussianSampler::new(summary)?;
    Ok((0..count).map(|_| sampler.sample(rng)).collect())
}
