//! Seeded random instances for cross-validation and property tests.
//!
//! Both regime generators produce exact common influence by
//! construction: symmetric-floor matrices scale integer weights inside
//! each cluster block to a shared block-level stochastic matrix, and
//! doubly stochastic matrices mix the identity with cluster-preserving
//! permutations, which keeps all mass inside clusters.  The `split`
//! variants freeze a partition of the first cluster across every matrix
//! of the set, which guarantees a separated same-cluster pair.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::Clustering;
use crate::error::Result;
use crate::matrix::{StochasticMatrix, Tolerances};
use crate::matrix_set::MatrixSet;
use crate::vertex_set::VertexSet;

/// Random partition of `0..n` into at most three clusters.
pub fn random_clustering(rng: &mut ChaCha8Rng, n: usize) -> Clustering {
    let k = rng.random_range(1..=n.min(3));
    let mut vertices: Vec<usize> = (0..n).collect();
    vertices.shuffle(rng);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    cuts.truncate(k - 1);
    cuts.sort_unstable();
    cuts.push(n);
    let mut clusters = Vec::with_capacity(k);
    let mut start = 0;
    for cut in cuts {
        clusters.push(vertices[start..cut].to_vec());
        start = cut;
    }
    Clustering::new(n, clusters).expect("cuts produce a valid partition")
}

/// Fixed split of a cluster's sorted members into two nonempty halves.
fn halves(members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mid = members.len().div_ceil(2);
    (members[..mid].to_vec(), members[mid..].to_vec())
}

fn path_edges(adj: &mut [VertexSet], members: &[usize]) {
    for w in members.windows(2) {
        adj[w[0]].insert(w[1]);
        adj[w[1]].insert(w[0]);
    }
}

fn random_extra_edges(
    rng: &mut ChaCha8Rng,
    adj: &mut [VertexSet],
    left: &[usize],
    right: &[usize],
    prob: f64,
) {
    for &i in left {
        for &j in right {
            if i != j && rng.random_bool(prob) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
}

/// Ensures every vertex of each side sees the other side.
fn bipartite_cover(adj: &mut [VertexSet], left: &[usize], right: &[usize]) {
    for (a, &i) in left.iter().enumerate() {
        let j = right[a % right.len()];
        adj[i].insert(j);
        adj[j].insert(i);
    }
    for (b, &j) in right.iter().enumerate() {
        let i = left[b % left.len()];
        adj[i].insert(j);
        adj[j].insert(i);
    }
}

/// Generates `count` matrices with positive diagonals, symmetric zero
/// patterns, and exact common influence.  With `split` the first cluster
/// is severed from the rest and internally broken into two frozen halves,
/// in every matrix.
pub fn symmetric_floor_set(
    rng: &mut ChaCha8Rng,
    clustering: &Clustering,
    count: usize,
    split: bool,
) -> Result<MatrixSet> {
    let n = clustering.n();
    let k = clustering.k();
    let split = split && clustering.members(0).len() >= 2;
    let diag_choices = [0.5, 0.6, 0.7, 0.8];
    let mut matrices = Vec::with_capacity(count);
    for m in 0..count {
        // Block-level coupling pattern, symmetric by construction.
        let mut coupled = vec![vec![false; k]; k];
        for a in 0..k {
            for b in a + 1..k {
                if split && a == 0 {
                    continue;
                }
                if rng.random_bool(0.5) {
                    coupled[a][b] = true;
                    coupled[b][a] = true;
                }
            }
        }
        let mut block = vec![vec![0.0f64; k]; k];
        for a in 0..k {
            let deg = (0..k).filter(|&b| coupled[a][b]).count();
            if deg == 0 {
                block[a][a] = 1.0;
            } else {
                let diag = diag_choices[rng.random_range(0..diag_choices.len())];
                block[a][a] = diag;
                for b in 0..k {
                    if coupled[a][b] {
                        block[a][b] = (1.0 - diag) / deg as f64;
                    }
                }
            }
        }

        let mut adj = vec![VertexSet::empty(); n];
        for v in 0..n {
            adj[v].insert(v);
        }
        for a in 0..k {
            let members = clustering.members(a);
            if split && a == 0 {
                let (lo, hi) = halves(members);
                path_edges(&mut adj, &lo);
                path_edges(&mut adj, &hi);
                random_extra_edges(rng, &mut adj, &lo, &lo, 0.3);
                random_extra_edges(rng, &mut adj, &hi, &hi, 0.3);
            } else {
                path_edges(&mut adj, members);
                random_extra_edges(rng, &mut adj, members, members, 0.3);
            }
            for b in a + 1..k {
                if coupled[a][b] {
                    let others = clustering.members(b);
                    bipartite_cover(&mut adj, members, others);
                    random_extra_edges(rng, &mut adj, members, others, 0.2);
                }
            }
        }

        let mut weights = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in adj[i].iter() {
                weights[i][j] = rng.random_range(1..=3);
            }
        }

        let mut rows = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            let a = clustering.cluster_of(i);
            for b in 0..k {
                let share = block[a][b];
                if share == 0.0 {
                    continue;
                }
                let total: u32 = clustering.members(b).iter().map(|&j| weights[i][j]).sum();
                assert!(total > 0, "coupled block must be covered");
                for &j in clustering.members(b) {
                    if weights[i][j] > 0 {
                        rows[i][j] = share * weights[i][j] as f64 / total as f64;
                    }
                }
            }
        }
        matrices.push(StochasticMatrix::from_rows(
            format!("p{m}"),
            rows,
            Tolerances::default(),
        )?);
    }
    MatrixSet::new(matrices, clustering.clone())
}

/// Random permutation of `members`, biased toward single full cycles;
/// `pin_last` keeps the final member fixed and permutes only the rest.
fn cluster_permutation(
    rng: &mut ChaCha8Rng,
    members: &[usize],
    pin_last: bool,
) -> Vec<(usize, usize)> {
    let active: Vec<usize> = if pin_last {
        members[..members.len() - 1].to_vec()
    } else {
        members.to_vec()
    };
    let mut images = active.clone();
    if active.len() >= 2 && rng.random_bool(0.5) {
        // Full cycle over a shuffled order.
        let mut order = active.clone();
        order.shuffle(rng);
        let mut map: Vec<(usize, usize)> = order
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect();
        map.push((*order.last().expect("nonempty"), order[0]));
        if pin_last {
            map.push((*members.last().expect("nonempty"), *members.last().expect("nonempty")));
        }
        return map;
    }
    images.shuffle(rng);
    let mut map: Vec<(usize, usize)> = active.iter().copied().zip(images).collect();
    if pin_last {
        let last = *members.last().expect("nonempty");
        map.push((last, last));
    }
    map
}

/// Generates `count` doubly stochastic matrices with positive diagonals
/// and exact common influence: convex mixtures of the identity and
/// cluster-preserving permutations, identity weight at least one quarter.
/// With `split` every permutation pins the first cluster's last member.
pub fn doubly_stochastic_set(
    rng: &mut ChaCha8Rng,
    clustering: &Clustering,
    count: usize,
    split: bool,
) -> Result<MatrixSet> {
    let n = clustering.n();
    let split = split && clustering.members(0).len() >= 2;
    let mut matrices = Vec::with_capacity(count);
    for m in 0..count {
        let perms = rng.random_range(1..=3);
        let a0 = (4 + rng.random_range(0..=4)) as f64 / 16.0;
        let share = (1.0 - a0) / perms as f64;
        let mut rows = vec![vec![0.0f64; n]; n];
        for v in 0..n {
            rows[v][v] = a0;
        }
        for _ in 0..perms {
            for k in 0..clustering.k() {
                let pin = split && k == 0;
                for (i, j) in cluster_permutation(rng, clustering.members(k), pin) {
                    rows[i][j] += share;
                }
            }
        }
        matrices.push(StochasticMatrix::from_rows(
            format!("p{m}"),
            rows,
            Tolerances::default(),
        )?);
    }
    MatrixSet::new(matrices, clustering.clone())
}

/// Random stochastic matrix with exact common influence and no other
/// structure: per cluster a random stochastic block-mass row is drawn,
/// then every row distributes each block's mass over a random nonempty
/// support inside that block.  No self-loops or pattern symmetry are
/// guaranteed.
pub fn common_influence_matrix(
    rng: &mut ChaCha8Rng,
    clustering: &Clustering,
    name: impl Into<String>,
) -> StochasticMatrix {
    let k = clustering.k();
    let n = clustering.n();
    let mut mass = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        let mut weights: Vec<f64> = (0..k)
            .map(|b| {
                if a == b {
                    0.5 + rng.random::<f64>()
                } else if rng.random_bool(0.5) {
                    rng.random::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        mass[a] = weights;
    }
    let mut rows = vec![vec![0.0f64; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        let a = clustering.cluster_of(i);
        for b in 0..k {
            let share = mass[a][b];
            if share == 0.0 {
                continue;
            }
            let members = clustering.members(b);
            let mut support: Vec<usize> = members
                .iter()
                .copied()
                .filter(|_| rng.random_bool(0.6))
                .collect();
            if support.is_empty() {
                support.push(members[rng.random_range(0..members.len())]);
            }
            let weights: Vec<f64> = support.iter().map(|_| 0.1 + rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            for (&j, w) in support.iter().zip(&weights) {
                row[j] = share * w / total;
            }
        }
    }
    StochasticMatrix::from_rows(name, rows, Tolerances::default())
        .expect("block-normalized rows are stochastic")
}

/// Arbitrary row-stochastic matrix with a random zero pattern; no
/// structural guarantees.
pub fn plain_stochastic_matrix(
    rng: &mut ChaCha8Rng,
    n: usize,
    name: impl Into<String>,
) -> StochasticMatrix {
    let mut rows = vec![vec![0.0f64; n]; n];
    for row in rows.iter_mut() {
        loop {
            let mut sum = 0.0;
            for slot in row.iter_mut() {
                *slot = if rng.random_bool(0.7) {
                    rng.random::<f64>()
                } else {
                    0.0
                };
                sum += *slot;
            }
            if sum > 1e-6 {
                for slot in row.iter_mut() {
                    *slot /= sum;
                }
                break;
            }
        }
    }
    StochasticMatrix::from_rows(name, rows, Tolerances::default())
        .expect("normalized rows are stochastic")
}
