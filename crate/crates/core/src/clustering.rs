//! Partitions of the vertex set into clusters.

use crate::error::{Error, Result};
use crate::vertex_set::VertexSet;

/// A partition of `{0, .., n-1}` into disjoint nonempty clusters.
/// Cluster order is preserved from input; members are stored sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    n: usize,
    clusters: Vec<Vec<usize>>,
    masks: Vec<VertexSet>,
    cluster_of: Vec<usize>,
}

impl Clustering {
    /// Validates that `clusters` partitions `{0, .., n-1}`: every cluster
    /// nonempty, indices in range, no vertex in two clusters, every vertex
    /// covered.
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || n > VertexSet::MAX {
            return Err(Error::DimensionTooLarge {
                n,
                cap: VertexSet::MAX,
                context: "clustering",
            });
        }
        let mut cluster_of = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(clusters.len());
        let mut masks = Vec::with_capacity(clusters.len());
        for (k, members) in clusters.into_iter().enumerate() {
            if members.is_empty() {
                return Err(Error::EmptyCluster { cluster: k });
            }
            let mut mask = VertexSet::empty();
            for &v in &members {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        cluster: k,
                        vertex: v,
                        n,
                    });
                }
                if cluster_of[v] != usize::MAX {
                    return Err(Error::Overlap {
                        vertex: v,
                        first: cluster_of[v],
                        second: k,
                    });
                }
                cluster_of[v] = k;
                mask.insert(v);
            }
            let mut members = members;
            members.sort_unstable();
            sorted.push(members);
            masks.push(mask);
        }
        if let Some(v) = cluster_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::NotCovering { vertex: v });
        }
        Ok(Clustering {
            n,
            clusters: sorted,
            masks,
            cluster_of,
        })
    }

    /// Single cluster holding every vertex; turns cluster-level quantities
    /// into their classical global versions.
    pub fn single(n: usize) -> Self {
        Clustering::new(n, vec![(0..n).collect()]).expect("single cluster is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of clusters.
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn members(&self, k: usize) -> &[usize] {
        &self.clusters[k]
    }

    pub fn mask(&self, k: usize) -> VertexSet {
        self.masks[k]
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.cluster_of[v]
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.cluster_of[i] == self.cluster_of[j]
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Unordered same-cluster pairs `(i, j)` with `i < j`, in cluster order
    /// then lexicographic order.  These are the seeds of the decision
    /// search and the arguments ranged over by ergodicity coefficients.
    pub fn same_cluster_pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.clusters.iter().enumerate().flat_map(|(k, members)| {
            members.iter().enumerate().flat_map(move |(a, &i)| {
                members[a + 1..].iter().map(move |&j| (k, i, j))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_partition_and_sorts_members() {
        let c = Clustering::new(4, vec![vec![2, 0], vec![1, 3]]).unwrap();
        assert_eq!(c.k(), 2);
        assert_eq!(c.members(0), &[0, 2]);
        assert_eq!(c.cluster_of(3), 1);
        assert!(c.same_cluster(0, 2));
        assert!(!c.same_cluster(0, 1));
        assert_eq!(c.mask(1).to_vec(), vec![1, 3]);
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(matches!(
            Clustering::new(3, vec![vec![0, 1, 2], vec![]]),
            Err(Error::EmptyCluster { cluster: 1 })
        ));
        assert!(matches!(
            Clustering::new(3, vec![vec![0, 3], vec![1, 2]]),
            Err(Error::IndexOutOfRange { vertex: 3, .. })
        ));
        assert!(matches!(
            Clustering::new(3, vec![vec![0, 1], vec![1, 2]]),
            Err(Error::Overlap { vertex: 1, .. })
        ));
        assert!(matches!(
            Clustering::new(3, vec![vec![0], vec![2]]),
            Err(Error::NotCovering { vertex: 1 })
        ));
    }

    #[test]
    fn seed_pair_order_is_deterministic() {
        let c = Clustering::new(5, vec![vec![0, 1, 2], vec![3], vec![4]]).unwrap();
        let pairs: Vec<_> = c.same_cluster_pairs().collect();
        assert_eq!(pairs, vec![(0, 0, 1), (0, 0, 2), (0, 1, 2)]);
    }

    #[test]
    fn single_cluster_covers_everything() {
        let c = Clustering::single(3);
        assert_eq!(c.k(), 1);
        assert_eq!(c.members(0), &[0, 1, 2]);
    }
}
