//! Finite-alphabet probability primitives.
//!
//! Symbols are 0-based indices `0..M`. Every [`Pmf`] is strictly positive and
//! sums to one; frequency vectors (empirical types, clipped Gaussian samples)
//! are plain slices and may contain zeros.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of a PMF sum from one without any correction.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Largest deviation that is silently absorbed by renormalization.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;
/// Lower clamp applied before evaluating the divergence of a Gaussian sample.
pub const CLIP_FLOOR: f64 = 1e-9;

/// Observation alphabet `{0, .., M-1}` with `M >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidPmf(format!(
                "alphabet must have at least 2 symbols, got {size}"
            )));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn check(self, symbol: usize) -> Result<()> {
        if symbol < self.0 {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                size: self.0,
            })
        }
    }
}

/// Strictly positive probability mass function with a precomputed CDF.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Alphabet::new(probs.len())?;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidPmf(format!(
                    "entry {} is {p}; entries must be strictly positive",
                    i + 1
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        let deviation = (sum - 1.0).abs();
        let probs = if deviation <= SUM_TOLERANCE {
            probs
        } else if deviation <= RENORMALIZE_TOLERANCE {
            probs.iter().map(|p| p / sum).collect()
        } else {
            return Err(Error::InvalidPmf(format!(
                "entries sum to {sum}, expected 1"
            )));
        };
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // The last bucket must catch every uniform draw in [0, 1).
        *cdf.last_mut().expect("nonempty") = 1.0;
        Ok(Pmf { probs, cdf })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Alphabet::new(size)?;
        Pmf::new(vec![1.0 / size as f64; size])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.probs.len())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.probs.len() - 1)
    }

    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|p| p * p.ln()).sum::<f64>()
    }
}

impl PartialEq for Pmf {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Pmf::new(value)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(value: Pmf) -> Self {
        value.probs
    }
}

/// Draws one symbol from `p`. Advances `rng`.
pub fn sample_symbol<R: Rng + ?Sized>(p: &Pmf, rng: &mut R) -> usize {
    p.sample(rng)
}

/// Kullback-Leibler divergence `D(p || q)` in nats.
///
/// `p` may be any frequency vector; zero entries contribute nothing.
pub fn kl_divergence(p: &[f64], q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch {
            expected: q.len(),
            found: p.len(),
        });
    }
    let mut d = 0.0;
    for (&pa, &qa) in p.iter().zip(q.probs()) {
        if pa < 0.0 || !pa.is_finite() {
            return Err(Error::InvalidPmf(format!(
                "frequency entry {pa} is not a nonnegative number"
            )));
        }
        if pa > 0.0 {
            d += pa * (pa / qa).ln();
        }
    }
    Ok(d.max(0.0))
}

/// Clamps every component to `[CLIP_FLOOR, 1]` and renormalizes.
pub fn clip_to_simplex(v: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.clamp(CLIP_FLOOR, 1.0)).collect();
    let sum: f64 = clipped.iter().sum();
    clipped.into_iter().map(|x| x / sum).collect()
}

/// Histogram of an observation sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n as f64)
            .collect()
    }
}

pub fn empirical_type(seq: &[usize], alphabet: Alphabet) -> Result<EmpiricalType> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0u64; alphabet.size()];
    for &x in seq {
        alphabet.check(x)?;
        counts[x] += 1;
    }
    Ok(EmpiricalType {
        counts,
        n: seq.len() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatMode {
    /// Informed agents: one log-likelihood per hypothesis.
    Ia,
    /// Partially informed agents: one indicator per symbol.
    Pia,
}

/// Per-observation statistic fed to the LMS branches.
#[derive(Debug, Clone, PartialEq)]
pub struct StatVector {
    pub values: Vec<f64>,
    pub mode: StatMode,
}

pub fn log_likelihoods(x: usize, hyps: &[Pmf]) -> Result<StatVector> {
    let first = hyps
        .first()
        .ok_or_else(|| Error::InvalidArgument("no hypotheses given".into()))?;
    let alphabet = first.alphabet();
    alphabet.check(x)?;
    let mut values = Vec::with_capacity(hyps.len());
    for h in hyps {
        if h.len() != alphabet.size() {
            return Err(Error::AlphabetMismatch {
                expected: alphabet.size(),
                found: h.len(),
            });
        }
        values.push(h.probs()[x].ln());
    }
    Ok(StatVector {
        values,
        mode: StatMode::Ia,
    })
}

pub fn indicator_vector(x: usize, alphabet: Alphabet) -> Result<StatVector> {
    alphabet.check(x)?;
    let mut values = vec![0.0; alphabet.size()];
    values[x] = 1.0;
    Ok(StatVector {
        values,
        mode: StatMode::Pia,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kl_examples() {
        let u = pmf(&[1.0 / 3.0; 3]);
        assert_eq!(kl_divergence(u.probs(), &u).unwrap(), 0.0);

        let third = 1.0 / 3.0;
        let q = pmf(&[third + 0.25, third, third - 0.25]);
        // 0.275559524394822644... from a 30-digit evaluation.
        let d = kl_divergence(u.probs(), &q).unwrap();
        assert!((d - 0.275_559_524_394_822_6).abs() < 1e-12, "{d}");

        let q = pmf(&[0.5, 0.25, 0.25]);
        let d = kl_divergence(&[1.0, 0.0, 0.0], &q).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn kl_rejects_size_mismatch() {
        let q = pmf(&[0.5, 0.5]);
        assert!(matches!(
            kl_divergence(&[1.0, 0.0, 0.0], &q),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.4]).is_err());
        assert!(Pmf::new(vec![1.0, 0.0]).is_err());
        assert!(Pmf::new(vec![1.0]).is_err());
        let p = Pmf::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        let s: f64 = p.probs().iter().sum();
        assert!((s - 1.0).abs() <= SUM_TOLERANCE);
    }

    #[test]
    fn empirical_type_examples() {
        let a = Alphabet::new(3).unwrap();
        let t = empirical_type(&[0, 0, 1, 2], a).unwrap();
        assert_eq!(t.frequencies(), vec![0.5, 0.25, 0.25]);
        let t = empirical_type(&[1, 1, 1, 1], a).unwrap();
        assert_eq!(t.frequencies(), vec![0.0, 1.0, 0.0]);
        let t = empirical_type(&[0, 1, 2], a).unwrap();
        assert_eq!(t.frequencies(), vec![1.0 / 3.0; 3]);
        assert!(matches!(empirical_type(&[], a), Err(Error::EmptySequence)));
        assert!(matches!(
            empirical_type(&[3], a),
            Err(Error::SymbolOutOfRange { .. })
        ));
    }

    #[test]
    fn log_likelihood_examples() {
        let p1 = pmf(&[0.6, 0.3, 0.1]);
        let v = log_likelihoods(1, std::slice::from_ref(&p1)).unwrap();
        assert!((v.values[0] - -1.203_972_804_325_936).abs() < 1e-12);

        let u = pmf(&[1.0 / 3.0; 3]);
        let v = log_likelihoods(0, &[u.clone(), u]).unwrap();
        assert_eq!(v.values[0], v.values[1]);
        assert!((v.values[0] - (1.0f64 / 3.0).ln()).abs() < 1e-15);

        let p2 = pmf(&[0.1, 0.1, 0.8]);
        let v = log_likelihoods(2, &[p2]).unwrap();
        assert!((v.values[0] - -0.223_143_551_314_209_76).abs() < 1e-12);
        assert!(log_likelihoods(3, &[p1]).is_err());
    }

    #[test]
    fn indicator_examples() {
        let v = indicator_vector(1, Alphabet::new(3).unwrap()).unwrap();
        assert_eq!(v.values, vec![0.0, 1.0, 0.0]);
        let v = indicator_vector(0, Alphabet::new(2).unwrap()).unwrap();
        assert_eq!(v.values, vec![1.0, 0.0]);
        let v = indicator_vector(3, Alphabet::new(4).unwrap()).unwrap();
        assert_eq!(v.values, vec![0.0, 0.0, 0.0, 1.0]);
        assert!(indicator_vector(4, Alphabet::new(4).unwrap()).is_err());
    }

    #[test]
    fn sampling() {
        let near = pmf(&[0.999998, 1e-6, 1e-6]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ones = (0..10_000).filter(|_| near.sample(&mut rng) == 0).count();
        assert!(ones >= 9_990);

        let u = pmf(&[1.0 / 3.0; 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[sample_symbol(&u, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.01, "{counts:?}");
        }

        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| u.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }

    fn simplex_point(m: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, m).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn kl_nonnegative(p in simplex_point(4), q in simplex_point(4)) {
            let q = Pmf::new(q).unwrap();
            let d = kl_divergence(&p, &q).unwrap();
            prop_assert!(d >= 0.0);
            let pp = Pmf::new(p.clone()).unwrap();
            prop_assert_eq!(kl_divergence(pp.probs(), &pp).unwrap(), 0.0);
            if p.iter().zip(q.probs()).any(|(a, b)| (a - b).abs() > 1e-3) {
                prop_assert!(d > 0.0);
            }
        }

        #[test]
        fn type_frequencies_on_simplex(seq in prop::collection::vec(0usize..5, 1..200)) {
            let t = empirical_type(&seq, Alphabet::new(5).unwrap()).unwrap();
            let f = t.frequencies();
            prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(f.iter().all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn indicator_one_hot(x in 0usize..6) {
            let v = indicator_vector(x, Alphabet::new(6).unwrap()).unwrap();
            prop_assert_eq!(v.values.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(v.values.iter().filter(|&&e| e != 0.0).count(), 1);
        }

        #[test]
        fn log_likelihoods_finite_nonpositive(
            x in 0usize..3,
            hyps in prop::collection::vec(simplex_point(3), 1..5),
        ) {
            let hyps: Vec<Pmf> = hyps.into_iter().map(|p| Pmf::new(p).unwrap()).collect();
            let v = log_likelihoods(x, &hyps).unwrap();
            prop_assert!(v.values.iter().all(|e| e.is_finite() && *e <= 0.0));
        }
    }
}
