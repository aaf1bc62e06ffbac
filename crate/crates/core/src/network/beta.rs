//! Variance-reduction factor of the steady-state status covariance.
//!
//! `beta_k(A) = lim_{mu -> 0} sum_{j >= 1} sum_l mu (1 - mu)^(2j - 2) b_kl(j)^2`
//! where `b_kl(j)` are the entries of `A^j`. The limit is taken numerically:
//! the series is evaluated at a short geometric sequence of step sizes and
//! extrapolated to zero.

use nalgebra::DMatrix;

use super::CombinationMatrix;
use crate::error::{Error, Result};

/// Step sizes at which the truncated series is evaluated (halving).
pub const BETA_STEP_SIZES: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// A series term is dropped once its geometric weight falls below this.
pub const SERIES_CUTOFF: f64 = 1e-14;
/// First-order extrapolations from consecutive pairs must agree this well.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct BetaFactors {
    pub beta: Vec<f64>,
    pub mu_used: Vec<f64>,
    /// Index of the last series term kept, per entry of `mu_used`.
    pub truncation_j: Vec<usize>,
}

/// Truncated series at each step size, one vector per `mus` entry.
fn series(a: &CombinationMatrix, mus: &[f64]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let size = a.size();
    let dense = a.to_dense();
    let ratios: Vec<f64> = mus.iter().map(|mu| (1.0 - mu) * (1.0 - mu)).collect();
    let mut weights: Vec<f64> = mus.to_vec();
    let mut sums = vec![vec![0.0; size]; mus.len()];
    let mut last_j = vec![0usize; mus.len()];

    let mut power = dense.clone();
    let mut row_sq = row_square_sums(&power);
    let mut settled = false;
    let mut j = 1usize;
    loop {
        let mut any_active = false;
        for (i, w) in weights.iter_mut().enumerate() {
            if *w < SERIES_CUTOFF {
                continue;
            }
            any_active = true;
            for (acc, s) in sums[i].iter_mut().zip(&row_sq) {
                *acc += *w * s;
            }
            last_j[i] = j;
            *w *= ratios[i];
        }
        if !any_active {
            break;
        }
        if !settled {
            let next = &power * &dense;
            let change = (&next - &power).amax();
            power = next;
            row_sq = row_square_sums(&power);
            // Past this point A^j is constant to machine precision.
            settled = change < 1e-15;
        }
        j += 1;
    }
    (sums, last_j)
}

fn row_square_sums(m: &DMatrix<f64>) -> Vec<f64> {
    m.row_iter().map(|r| r.norm_squared()).collect()
}

/// The truncated series at a single finite step size.
///
/// This is the exact steady-state variance factor of the diffusion recursion
/// with a static matrix `A` at step size `mu`; `beta_factor` is its `mu -> 0`
/// limit.
pub fn beta_at_step_size(a: &CombinationMatrix, mu: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "step size {mu} outside (0, 1)"
        )));
    }
    let (mut sums, _) = series(a, &[mu]);
    Ok(sums.pop().expect("one step size"))
}

pub fn beta_factor(a: &CombinationMatrix) -> Result<BetaFactors> {
    a.validate()?;
    let (sums, truncation_j) = series(a, &BETA_STEP_SIZES);
    let size = a.size();
    let mut beta = Vec::with_capacity(size);
    for ((&b1, &b2), &b3) in sums[0].iter().zip(&sums[1]).zip(&sums[2]) {
        // Richardson with halving: kill the O(mu) term twice, then O(mu^2).
        let r_coarse = 2.0 * b2 - b1;
        let r_fine = 2.0 * b3 - b2;
        if (r_fine - r_coarse).abs() > CONVERGENCE_TOLERANCE {
            return Err(Error::BetaNotConverged {
                first: r_coarse,
                second: r_fine,
                tolerance: CONVERGENCE_TOLERANCE,
            });
        }
        beta.push((4.0 * r_fine - r_coarse) / 3.0);
    }
    Ok(BetaFactors {
        beta,
        mu_used: BETA_STEP_SIZES.to_vec(),
        truncation_j,
    })
}
