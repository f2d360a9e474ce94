//! Cluster ergodicity coefficients.
//!
//! For a clustering `C` the coefficient is
//! `tau_C(P) = 1/2 * max_k max_{i,j in C_k} ||p_i - p_j||_1`,
//! the worst half-L1 row distance within any cluster.  It is 0 exactly
//! when rows agree within every cluster, 1 at the opposite extreme, and
//! with a single cluster it reduces to the classical coefficient of
//! ergodicity.  The half-L1 distance equals the best subset of the
//! variational form `max_{A} sum_{s in A} (p_is - p_js)`; the exhaustive
//! subset scan is kept as an independent oracle for the closed form.

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;
use crate::matrix_set::MatrixSet;

/// A coefficient value together with the cluster and row pair attaining
/// it.  Ties break to the lexicographically smallest `(cluster, i, j)`;
/// when no within-cluster pair exists (all clusters singletons) the value
/// is 0 and the argument degenerates to the first vertex paired with
/// itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientValue {
    pub value: f64,
    pub arg_cluster: usize,
    pub arg_pair: (usize, usize),
}

/// How to evaluate the half-L1 row distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationalMode {
    /// Sum of positive parts of the row difference.
    ClosedForm,
    /// Maximum of `sum_{s in A} (p_is - p_js)` over all `2^n` subsets `A`.
    Exhaustive,
}

/// Order in which a sequence of matrices is multiplied up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOrder {
    /// `P(t) * ... * P(1)`: each new matrix multiplies on the left, the
    /// order in which state trajectories accumulate.
    Forward,
    /// `P(1) * ... * P(t)`: each new matrix multiplies on the right, the
    /// order in which row supports accumulate.
    Backward,
}

/// Half the L1 distance between rows `i` and `j`.
pub fn half_l1_variational(
    p: &StochasticMatrix,
    i: usize,
    j: usize,
    mode: VariationalMode,
) -> Result<f64> {
    let n = p.n();
    if i >= n || j >= n {
        return Err(Error::SequenceIndexOutOfRange {
            index: i.max(j),
            len: n,
            context: "row index",
        });
    }
    let value = match mode {
        VariationalMode::ClosedForm => closed_form(p, i, j),
        VariationalMode::Exhaustive => {
            if n > 20 {
                return Err(Error::DimensionTooLarge {
                    n,
                    cap: 20,
                    context: "exhaustive subset scan",
                });
            }
            let diff: Vec<f64> = (0..n).map(|s| p.get(i, s) - p.get(j, s)).collect();
            let mut best = 0.0f64;
            for mask in 0u32..(1u32 << n) {
                let mut sum = 0.0;
                let mut bits = mask;
                while bits != 0 {
                    let s = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    sum += diff[s];
                }
                best = best.max(sum);
            }
            best
        }
    };
    Ok(value)
}

fn closed_form(p: &StochasticMatrix, i: usize, j: usize) -> f64 {
    let (ri, rj) = (p.row(i), p.row(j));
    ri.iter()
        .zip(rj)
        .map(|(&a, &b)| (a - b).max(0.0))
        .sum()
}

/// Cluster ergodicity coefficient of `p` w.r.t. `c`.
pub fn tau_c(p: &StochasticMatrix, c: &Clustering) -> CoefficientValue {
    debug_assert_eq!(p.n(), c.n());
    let mut best = CoefficientValue {
        value: 0.0,
        arg_cluster: 0,
        arg_pair: (c.members(0)[0], c.members(0)[0]),
    };
    let mut found_pair = false;
    for (k, i, j) in c.same_cluster_pairs() {
        let d = closed_form(p, i, j);
        if !found_pair || d > best.value {
            best = CoefficientValue {
                value: d,
                arg_cluster: k,
                arg_pair: (i, j),
            };
            found_pair = true;
        }
    }
    best.value = best.value.clamp(0.0, 1.0);
    best
}

/// Classical coefficient of ergodicity: `tau_c` under a single cluster.
pub fn dobrushin(p: &StochasticMatrix) -> CoefficientValue {
    tau_c(p, &Clustering::single(p.n()))
}

/// Coefficients of the running products of `set[indices]`, one value per
/// prefix.  `Forward` builds `P(t)***P(1)`, the product a trajectory
/// experiences; `Backward` builds `P(1)***P(t)`.
pub fn product_tau_decay(
    set: &MatrixSet,
    indices: &[usize],
    order: ProductOrder,
) -> Result<Vec<CoefficientValue>> {
    if indices.is_empty() {
        return Err(Error::EmptySequence {
            context: "product coefficient decay",
        });
    }
    for &idx in indices {
        if idx >= set.len() {
            return Err(Error::SequenceIndexOutOfRange {
                index: idx,
                len: set.len(),
                context: "matrix index",
            });
        }
    }
    let mut acc = set.get(indices[0]).clone();
    let mut out = vec![tau_c(&acc, set.clustering())];
    for &idx in &indices[1..] {
        let next = set.get(idx);
        acc = match order {
            ProductOrder::Forward => next.product(&acc)?,
            ProductOrder::Backward => acc.product(next)?,
        };
        out.push(tau_c(&acc, set.clustering()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Tolerances;

    fn matrix(rows: Vec<Vec<f64>>) -> StochasticMatrix {
        StochasticMatrix::from_rows("p", rows, Tolerances::default()).unwrap()
    }

    #[test]
    fn dobrushin_known_values() {
        // Rows (0.5, 0.5) and (0.25, 0.75): half-L1 distance 0.25.
        let p = matrix(vec![vec![0.5, 0.5], vec![0.25, 0.75]]);
        let v = dobrushin(&p);
        assert!((v.value - 0.25).abs() < 1e-15);
        assert_eq!(v.arg_pair, (0, 1));

        let q = matrix(vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert!((dobrushin(&q).value - 0.8).abs() < 1e-15);

        let id = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(dobrushin(&id).value, 1.0);
    }

    #[test]
    fn zero_exactly_when_rows_agree_within_clusters() {
        let c = Clustering::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let p = matrix(vec![
            vec![0.25, 0.25, 0.5, 0.0],
            vec![0.25, 0.25, 0.5, 0.0],
            vec![0.0, 0.5, 0.25, 0.25],
            vec![0.0, 0.5, 0.25, 0.25],
        ]);
        assert_eq!(tau_c(&p, &c).value, 0.0);

        // Perturb one within-cluster row: coefficient becomes positive.
        let q = matrix(vec![
            vec![0.25, 0.25, 0.5, 0.0],
            vec![0.25, 0.25, 0.0, 0.5],
            vec![0.0, 0.5, 0.25, 0.25],
            vec![0.0, 0.5, 0.25, 0.25],
        ]);
        let v = tau_c(&q, &c);
        assert!((v.value - 0.5).abs() < 1e-15);
        assert_eq!((v.arg_cluster, v.arg_pair), (0, (0, 1)));
    }

    #[test]
    fn cluster_restriction_ignores_cross_cluster_rows() {
        // Rows 0 and 1 differ wildly but sit in different clusters.
        let c = Clustering::new(2, vec![vec![0], vec![1]]).unwrap();
        let p = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let v = tau_c(&p, &c);
        assert_eq!(v.value, 0.0);
        assert_eq!(v.arg_pair, (0, 0));
        assert_eq!(dobrushin(&p).value, 1.0);
    }

    #[test]
    fn closed_form_matches_exhaustive_on_a_known_matrix() {
        let p = matrix(vec![
            vec![0.2, 0.3, 0.5],
            vec![0.6, 0.1, 0.3],
            vec![0.0, 0.5, 0.5],
        ]);
        for i in 0..3 {
            for j in 0..3 {
                let cf = half_l1_variational(&p, i, j, VariationalMode::ClosedForm).unwrap();
                let ex = half_l1_variational(&p, i, j, VariationalMode::Exhaustive).unwrap();
                assert!((cf - ex).abs() < 1e-15, "rows {i},{j}: {cf} vs {ex}");
            }
        }
        // Hand check rows 0,1: positive parts are at s=1 (0.2) and s=2 (0.2).
        let d = half_l1_variational(&p, 0, 1, VariationalMode::ClosedForm).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
    }

    #[test]
    fn product_decay_orders_and_errors() {
        let a = matrix(vec![vec![0.5, 0.5], vec![0.25, 0.75]]);
        let b = matrix(vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        let mut b = b;
        b.set_name("b");
        let set = MatrixSet::new(vec![a, b], Clustering::single(2)).unwrap();

        let fwd = product_tau_decay(&set, &[0, 1], ProductOrder::Forward).unwrap();
        let bwd = product_tau_decay(&set, &[0, 1], ProductOrder::Backward).unwrap();
        assert_eq!(fwd.len(), 2);
        // Forward: B*A; backward: A*B. Dobrushin values differ.
        // B*A rows: (0.5,0.5), (0.375,0.625) -> tau 0.125.
        // A*B rows: (0.75,0.25), (0.625,0.375) -> tau 0.125.
        assert!((fwd[1].value - 0.125).abs() < 1e-12);
        assert!((bwd[1].value - 0.125).abs() < 1e-12);
        // Singleton prefix equals the matrix's own coefficient either way.
        assert_eq!(fwd[0].value, bwd[0].value);

        assert!(matches!(
            product_tau_decay(&set, &[], ProductOrder::Forward),
            Err(Error::EmptySequence { .. })
        ));
        assert!(matches!(
            product_tau_decay(&set, &[2], ProductOrder::Forward),
            Err(Error::SequenceIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn coefficient_submultiplicative_under_common_influence() {
        // Block-diagonal matrices have common influence; products contract.
        let c = Clustering::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let p1 = matrix(vec![
            vec![0.75, 0.25, 0.0, 0.0],
            vec![0.25, 0.75, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ]);
        let p2 = matrix(vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.25, 0.75, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.25, 0.75],
        ]);
        let prod = p1.product(&p2).unwrap();
        let lhs = tau_c(&prod, &c).value;
        let rhs = tau_c(&p1, &c).value * tau_c(&p2, &c).value;
        assert!(lhs <= rhs + 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn submultiplicativity_can_fail_without_common_influence() {
        // Frozen counterexample.  Cluster {0,1} with p1 sending unequal
        // mass into {2}: tau(p1) = 0.5, tau(p2) = 0, yet tau(p1*p2) = 0.5.
        let c = Clustering::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let p1 = matrix(vec![
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.0, 1.0],
        ]);
        let p2 = matrix(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let (ci, _) = crate::matrix_set::common_influence(&p1, &c);
        assert!(!ci);
        let t1 = tau_c(&p1, &c).value;
        let t2 = tau_c(&p2, &c).value;
        let tp = tau_c(&p1.product(&p2).unwrap(), &c).value;
        assert!((t1 - 0.5).abs() < 1e-15);
        assert_eq!(t2, 0.0);
        assert!((tp - 0.5).abs() < 1e-15);
        assert!(tp > t1 * t2 + 1e-12);
    }
}
