use nalgebra::DMatrix;

use super::Graph;
use crate::error::{Error, Result};

/// Row-sum tolerance for a right-stochastic matrix.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// One set of agent indices per agent, stored contiguously.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborSets {
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl NeighborSets {
    pub fn new() -> Self {
        NeighborSets {
            offsets: vec![0],
            members: Vec::new(),
        }
    }

    pub fn from_sets<I, S>(sets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        let mut out = NeighborSets::new();
        for set in sets {
            out.push_set(set);
        }
        out
    }

    pub fn clear(&mut self) {
        self.offsets.truncate(1);
        self.members.clear();
    }

    pub fn push_set(&mut self, set: impl IntoIterator<Item = usize>) {
        self.members.extend(set);
        self.offsets.push(self.members.len());
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> &[usize] {
        &self.members[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        (0..self.len()).map(move |k| self.get(k))
    }
}

/// Sparse right-stochastic combination matrix `A = [a_kl]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationMatrix {
    size: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl CombinationMatrix {
    pub fn identity(size: usize) -> Self {
        CombinationMatrix {
            size,
            offsets: (0..=size).collect(),
            cols: (0..size).collect(),
            weights: vec![1.0; size],
        }
    }

    /// All entries equal to `1/size`.
    pub fn uniform(size: usize) -> Self {
        let w = 1.0 / size as f64;
        CombinationMatrix {
            size,
            offsets: (0..=size).map(|k| k * size).collect(),
            cols: (0..size).flat_map(|_| 0..size).collect(),
            weights: vec![w; size * size],
        }
    }

    /// Validates and sparsifies a dense matrix.
    pub fn from_dense(dense: &DMatrix<f64>) -> Result<Self> {
        if dense.nrows() != dense.ncols() || dense.nrows() == 0 {
            return Err(Error::InvalidCombination(format!(
                "matrix must be square and nonempty, got {}x{}",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let size = dense.nrows();
        let mut out = CombinationMatrix {
            size,
            offsets: vec![0],
            cols: Vec::new(),
            weights: Vec::new(),
        };
        for k in 0..size {
            for l in 0..size {
                let a = dense[(k, l)];
                if a != 0.0 {
                    out.cols.push(l);
                    out.weights.push(a);
                }
            }
            out.offsets.push(out.cols.len());
        }
        out.validate()?;
        Ok(out)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, k: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[k]..self.offsets[k + 1];
        (&self.cols[range.clone()], &self.weights[range])
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        let (cols, weights) = self.row(k);
        cols.iter()
            .position(|&c| c == l)
            .map_or(0.0, |i| weights[i])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for k in 0..self.size {
            let (cols, weights) = self.row(k);
            for (&l, &a) in cols.iter().zip(weights) {
                m[(k, l)] = a;
            }
        }
        m
    }

    /// Checks nonnegativity, unit row sums and a positive diagonal.
    pub fn validate(&self) -> Result<()> {
        for k in 0..self.size {
            let (cols, weights) = self.row(k);
            if let Some(a) = weights.iter().find(|a| !a.is_finite() || **a < 0.0) {
                return Err(Error::InvalidCombination(format!(
                    "row {} has invalid entry {a}",
                    k + 1
                )));
            }
            let sum: f64 = weights.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::InvalidCombination(format!(
                    "row {} sums to {sum}",
                    k + 1
                )));
            }
            let diag = cols
                .iter()
                .position(|&c| c == k)
                .map_or(0.0, |i| weights[i]);
            if diag <= 0.0 {
                return Err(Error::InvalidCombination(format!(
                    "diagonal entry of row {} is not positive",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// Checks that `a_kl = 0` whenever `l` is not a neighbor of `k`.
    pub fn check_support(&self, graph: &Graph) -> Result<()> {
        if graph.len() != self.size {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for a graph of {} agents",
                self.size,
                self.size,
                graph.len()
            )));
        }
        for k in 0..self.size {
            let (cols, weights) = self.row(k);
            for (&l, &a) in cols.iter().zip(weights) {
                if a != 0.0 && !graph.is_adjacent(k, l) {
                    return Err(Error::InvalidCombination(format!(
                        "a[{}][{}] = {a} but the agents are not neighbors",
                        k + 1,
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rebuilds this matrix in place from estimated effective-neighbor sets.
    ///
    /// Row `k` puts `a_k` on itself and splits `1 - a_k` evenly over the rest
    /// of `eff[k]`; a singleton set gives a unit self weight.
    pub fn rebuild_from_sets(
        &mut self,
        graph: &Graph,
        eff: &NeighborSets,
        self_weights: &[f64],
    ) -> Result<()> {
        let size = graph.len();
        if eff.len() != size || self_weights.len() != size {
            return Err(Error::Dimension(format!(
                "{} neighbor sets and {} self weights for {size} agents",
                eff.len(),
                self_weights.len()
            )));
        }
        self.size = size;
        self.offsets.clear();
        self.cols.clear();
        self.weights.clear();
        self.offsets.push(0);
        for (k, &a_k) in self_weights.iter().enumerate() {
            let set = eff.get(k);
            if !(a_k > 0.0 && a_k <= 1.0) {
                return Err(Error::InvalidCombination(format!(
                    "self weight of agent {} is {a_k}, must lie in (0, 1]",
                    k + 1
                )));
            }
            if !set.contains(&k) {
                return Err(Error::InvalidCombination(format!(
                    "estimated neighbor set of agent {} does not contain the agent",
                    k + 1
                )));
            }
            if set.len() == 1 {
                self.cols.push(k);
                self.weights.push(1.0);
            } else {
                let other = (1.0 - a_k) / (set.len() - 1) as f64;
                for &l in set {
                    if !graph.is_adjacent(k, l) {
                        return Err(Error::InvalidCombination(format!(
                            "agent {} is not a neighbor of agent {}",
                            l + 1,
                            k + 1
                        )));
                    }
                    self.cols.push(l);
                    self.weights.push(if l == k { a_k } else { other });
                }
            }
            self.offsets.push(self.cols.len());
        }
        Ok(())
    }
}

/// Combination matrix with uniform off-diagonal weights over each set.
pub fn combination_from_sets(
    graph: &Graph,
    eff: &NeighborSets,
    self_weights: &[f64],
) -> Result<CombinationMatrix> {
    let mut a = CombinationMatrix::identity(0);
    a.rebuild_from_sets(graph, eff, self_weights)?;
    Ok(a)
}

/// `B(j) = A^j` for `j = 1..=j_max`.
pub fn matrix_power_rows(a: &CombinationMatrix, j_max: usize) -> Vec<DMatrix<f64>> {
    let dense = a.to_dense();
    let mut out = Vec::with_capacity(j_max);
    let mut current = dense.clone();
    for j in 1..=j_max {
        debug_assert!(current
            .row_iter()
            .all(|r| (r.sum() - 1.0).abs() < 1e-9));
        if j < j_max {
            let next = &current * &dense;
            out.push(current);
            current = next;
        } else {
            out.push(current.clone());
        }
    }
    out
}
