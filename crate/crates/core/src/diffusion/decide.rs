use rand::Rng;

use crate::error::Result;
use crate::simplex::{kl_divergence, Pmf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PiaDecision {
    H0,
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// 0-based hypothesis index.
    Hypothesis(usize),
    Binary(PiaDecision),
}

/// Index of the largest entry; exact ties are broken uniformly with `rng`.
///
/// `rng` is only advanced when a tie occurs.
pub fn argmax_tie_break<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    assert!(!values.is_empty(), "argmax of an empty vector");
    let mut best = values[0];
    let mut ties = 1usize;
    for &v in &values[1..] {
        if v > best {
            best = v;
            ties = 1;
        } else if v == best {
            ties += 1;
        }
    }
    let pick = if ties > 1 { rng.random_range(0..ties) } else { 0 };
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("tie index in range")
}

/// Decision of an informed agent: the branch with the largest status.
pub fn ia_decide<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> usize {
    argmax_tie_break(w, rng)
}

/// Hoeffding-type decision: `H1` iff `D(w || p0) >= gamma`.
pub fn pia_decide(w: &[f64], p0: &Pmf, gamma: f64) -> Result<PiaDecision> {
    let d = kl_divergence(w, p0)?;
    Ok(if d >= gamma {
        PiaDecision::H1
    } else {
        PiaDecision::H0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ia_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ia_decide(&[-1.0, -0.5, -2.0, -0.9], &mut rng), 1);
        assert_eq!(ia_decide(&[-3.0], &mut rng), 0);
    }

    #[test]
    fn ties_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[ia_decide(&[0.0; 4], &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn no_tie_leaves_rng_untouched() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let b = a.clone();
        ia_decide(&[0.1, 0.2], &mut a);
        assert_eq!(a, b);
    }

    #[test]
    fn pia_examples() {
        let p0 = Pmf::uniform(3).unwrap();
        assert_eq!(pia_decide(p0.probs(), &p0, 0.01).unwrap(), PiaDecision::H0);
        assert_eq!(pia_decide(p0.probs(), &p0, 0.0).unwrap(), PiaDecision::H1);
        // D(uniform || [1/3+0.25, 1/3, 1/3-0.25]) = 0.27556 >= 0.1
        let third = 1.0 / 3.0;
        let shifted = Pmf::new(vec![third + 0.25, third, third - 0.25]).unwrap();
        assert_eq!(pia_decide(p0.probs(), &shifted, 0.1).unwrap(), PiaDecision::H1);
        assert_eq!(pia_decide(p0.probs(), &shifted, 0.3).unwrap(), PiaDecision::H0);
    }
}
