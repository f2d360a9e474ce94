//! Finite sets of named stochastic matrices sharing one clustering, plus
//! the structural checks that license each direction of the decision
//! procedure.

use serde::Serialize;

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::matrix::{StochasticMatrix, Tolerances};

/// Which structural regime the set satisfies.  Either regime makes the
/// cycle search a complete characterization; without one, only the
/// necessary direction of the test is sound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Every matrix has a positive diagonal and a symmetric zero pattern;
    /// positive entries are bounded below by the reported floor.
    SymmetricFloor,
    /// Every matrix has a positive diagonal and is doubly stochastic.
    DoublyStochastic,
    /// Neither bundle holds.
    None,
}

/// Report of every structural property checked on a matrix set.  Purely
/// informational: building the report never fails.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    /// Every diagonal entry of every matrix is strictly positive.
    pub positive_diagonals: bool,
    /// Every matrix has a symmetric zero pattern.
    pub symmetric_patterns: bool,
    /// Smallest strictly positive entry across the set.
    pub min_positive_entry: f64,
    /// Every matrix is doubly stochastic.
    pub doubly_stochastic: bool,
    /// Largest cut-balance constant across the set; `None` when some
    /// matrix has an unbalanced cut or the dimension exceeds the
    /// enumeration cap.
    pub cut_balance_constant: Option<f64>,
    /// Every matrix has common influence w.r.t. the shared clustering.
    pub common_influence: bool,
    /// Per-matrix inter-cluster block sums, from the representative
    /// (smallest) vertex of each cluster.
    pub influence_blocks: Vec<NamedBlocks>,
    pub regime: Regime,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedBlocks {
    pub matrix: String,
    pub common_influence: bool,
    pub blocks: Vec<Vec<f64>>,
}

/// A nonempty set of equally-sized, uniquely named stochastic matrices
/// together with the clustering they act on.
#[derive(Clone, Debug)]
pub struct MatrixSet {
    matrices: Vec<StochasticMatrix>,
    clustering: Clustering,
    tol: Tolerances,
}

impl MatrixSet {
    pub fn new(matrices: Vec<StochasticMatrix>, clustering: Clustering) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::EmptySet);
        };
        let n = first.n();
        if n != clustering.n() {
            return Err(Error::DimensionMismatch {
                left: n,
                right: clustering.n(),
                context: "matrix size vs clustering",
            });
        }
        for m in &matrices {
            if m.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: m.n(),
                    context: "matrix sizes within set",
                });
            }
        }
        for (a, m) in matrices.iter().enumerate() {
            if matrices[..a].iter().any(|other| other.name() == m.name()) {
                return Err(Error::DuplicateMatrixName {
                    name: m.name().to_string(),
                });
            }
        }
        let tol = first.tol();
        Ok(MatrixSet {
            matrices,
            clustering,
            tol,
        })
    }

    pub fn n(&self) -> usize {
        self.clustering.n()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn tol(&self) -> Tolerances {
        self.tol
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn matrices(&self) -> &[StochasticMatrix] {
        &self.matrices
    }

    pub fn get(&self, idx: usize) -> &StochasticMatrix {
        &self.matrices[idx]
    }

    pub fn names(&self) -> Vec<String> {
        self.matrices.iter().map(|m| m.name().to_string()).collect()
    }

    pub fn by_name(&self, name: &str) -> Option<&StochasticMatrix> {
        self.matrices.iter().find(|m| m.name() == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.matrices.iter().position(|m| m.name() == name)
    }

    /// Runs every structural check and classifies the regime.
    /// `SymmetricFloor` takes precedence when both bundles hold.
    pub fn check_assumptions(&self) -> AssumptionReport {
        let positive_diagonals = self.matrices.iter().all(|m| m.has_positive_diagonal());
        let symmetric_patterns = self.matrices.iter().all(|m| m.has_symmetric_pattern());
        let doubly_stochastic = self.matrices.iter().all(|m| m.is_doubly_stochastic());
        let min_positive_entry = self
            .matrices
            .iter()
            .map(|m| m.min_positive_entry())
            .fold(f64::INFINITY, f64::min);
        let cut_balance_constant = self
            .matrices
            .iter()
            .map(|m| m.cut_balance().ok().flatten())
            .try_fold(1.0f64, |acc, c| c.map(|c| acc.max(c)));
        let influence_blocks: Vec<NamedBlocks> = self
            .matrices
            .iter()
            .map(|m| {
                let (common_influence, blocks) = common_influence(m, &self.clustering);
                NamedBlocks {
                    matrix: m.name().to_string(),
                    common_influence,
                    blocks,
                }
            })
            .collect();
        let common_influence = influence_blocks.iter().all(|b| b.common_influence);
        let regime = if positive_diagonals && symmetric_patterns {
            Regime::SymmetricFloor
        } else if positive_diagonals && doubly_stochastic {
            Regime::DoublyStochastic
        } else {
            Regime::None
        };
        AssumptionReport {
            positive_diagonals,
            symmetric_patterns,
            min_positive_entry,
            doubly_stochastic,
            cut_balance_constant,
            common_influence,
            influence_blocks,
            regime,
        }
    }

    /// Whether every matrix in the set has common influence.
    pub fn has_common_influence(&self) -> bool {
        self.matrices
            .iter()
            .all(|m| common_influence(m, &self.clustering).0)
    }
}

/// Checks common influence of one matrix w.r.t. a clustering: for every
/// ordered pair of distinct clusters `(k, k')`, the total mass a row sends
/// into `C_k'` must agree (within `equality_tol`) across all rows of
/// `C_k`.  Returns the flag and the `K x K` block-sum matrix sampled from
/// each cluster's smallest vertex; diagonal blocks agree automatically
/// whenever the off-diagonal ones do, but are reported as sampled.
pub fn common_influence(p: &StochasticMatrix, c: &Clustering) -> (bool, Vec<Vec<f64>>) {
    let k = c.k();
    let eq_tol = p.tol().equality_tol;
    let block_sum = |row: usize, target: usize| -> f64 {
        c.members(target).iter().map(|&j| p.get(row, j)).sum()
    };
    let mut blocks = vec![vec![0.0; k]; k];
    let mut ok = true;
    for from in 0..k {
        let rep = c.members(from)[0];
        for target in 0..k {
            blocks[from][target] = block_sum(rep, target);
            if target == from {
                continue;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in c.members(from) {
                let s = block_sum(i, target);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            if hi - lo > eq_tol {
                ok = false;
            }
        }
    }
    (ok, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(name: &str, rows: Vec<Vec<f64>>) -> StochasticMatrix {
        StochasticMatrix::from_rows(name, rows, Tolerances::default()).unwrap()
    }

    fn two_cluster() -> Clustering {
        Clustering::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    #[test]
    fn set_rejects_duplicates_and_mismatches() {
        let c = Clustering::single(2);
        let a = matrix("a", vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let a2 = matrix("a", vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(
            MatrixSet::new(vec![a.clone(), a2], c.clone()),
            Err(Error::DuplicateMatrixName { .. })
        ));
        assert!(matches!(MatrixSet::new(vec![], c.clone()), Err(Error::EmptySet)));
        let b3 = matrix(
            "b",
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        );
        assert!(matches!(
            MatrixSet::new(vec![a, b3], c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn common_influence_block_diagonal() {
        // Zero off-diagonal blocks: inter-cluster mass is constantly zero.
        let p = matrix(
            "p",
            vec![
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 0.75, 0.25],
                vec![0.0, 0.0, 0.25, 0.75],
            ],
        );
        let (ok, blocks) = common_influence(&p, &two_cluster());
        assert!(ok);
        assert_eq!(blocks[0][1], 0.0);
        assert_eq!(blocks[1][0], 0.0);
        assert!((blocks[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn common_influence_detects_unequal_block_mass() {
        let p = matrix(
            "p",
            vec![
                vec![0.5, 0.0, 0.5, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
        );
        // Row 0 sends 0.5 into cluster {2,3}; row 1 sends 0.
        let (ok, blocks) = common_influence(&p, &two_cluster());
        assert!(!ok);
        assert_eq!(blocks[0][1], 0.5);
    }

    #[test]
    fn common_influence_holds_with_nonzero_cross_mass() {
        let p = matrix(
            "p",
            vec![
                vec![0.5, 0.25, 0.25, 0.0],
                vec![0.25, 0.5, 0.0, 0.25],
                vec![0.25, 0.0, 0.5, 0.25],
                vec![0.0, 0.25, 0.25, 0.5],
            ],
        );
        let (ok, blocks) = common_influence(&p, &two_cluster());
        assert!(ok);
        assert!((blocks[0][1] - 0.25).abs() < 1e-12);
        assert!((blocks[1][0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_always_has_common_influence() {
        let p = matrix("p", vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        let (ok, blocks) = common_influence(&p, &Clustering::single(2));
        assert!(ok);
        assert!((blocks[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_classification() {
        let sym = matrix(
            "sym",
            vec![
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 0.75, 0.25],
                vec![0.0, 0.0, 0.25, 0.75],
            ],
        );
        let set = MatrixSet::new(vec![sym], two_cluster()).unwrap();
        let report = set.check_assumptions();
        assert_eq!(report.regime, Regime::SymmetricFloor);
        assert!(report.common_influence);
        assert_eq!(report.min_positive_entry, 0.25);

        // Positive diagonal + doubly stochastic, asymmetric pattern.
        let rot = matrix(
            "rot",
            vec![
                vec![0.75, 0.25, 0.0],
                vec![0.0, 0.75, 0.25],
                vec![0.25, 0.0, 0.75],
            ],
        );
        let set = MatrixSet::new(vec![rot], Clustering::single(3)).unwrap();
        let report = set.check_assumptions();
        assert_eq!(report.regime, Regime::DoublyStochastic);

        // No self-loops anywhere: neither bundle.
        let swap = matrix("swap", vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let set = MatrixSet::new(vec![swap], Clustering::single(2)).unwrap();
        let report = set.check_assumptions();
        assert_eq!(report.regime, Regime::None);
    }

    #[test]
    fn report_cut_balance_takes_worst_case() {
        let id = matrix("id", vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let skew = matrix("skew", vec![vec![0.5, 0.5], vec![0.25, 0.75]]);
        let set = MatrixSet::new(vec![id, skew], Clustering::single(2)).unwrap();
        let report = set.check_assumptions();
        assert!((report.cut_balance_constant.unwrap() - 2.0).abs() < 1e-12);

        let one_way = matrix("ow", vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        let set = MatrixSet::new(vec![one_way], Clustering::single(2)).unwrap();
        assert_eq!(set.check_assumptions().cut_balance_constant, None);
    }
}
