//! Trajectory simulation under switching policies.
//!
//! The state evolves as `x(t+1) = P(t+1) x(t)`, so a product applied to
//! the initial state reads right to left.  A witness records its cycle in
//! support-accumulation order, which is the mirror image: to keep the
//! seed rows' supports trapped in the cycle sets, the replay policy plays
//! the cycle reversed.  With the seed vertices pinned at 0 and 1 the
//! trapped supports force their cluster spread to stay at 1.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::Clustering;
use crate::decision::Witness;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::StochasticMatrix;
use crate::matrix_set::MatrixSet;
use crate::vertex_set::VertexSet;

#[derive(Clone, Debug)]
pub enum SwitchingPolicy {
    /// Apply exactly these matrices in order; the run ends early if the
    /// horizon exceeds the sequence.
    FixedSequence(Vec<String>),
    /// Cycle through these matrices forever.
    Periodic(Vec<String>),
    /// Independent uniform draws from the set, seeded for reproducibility.
    UniformRandom { seed: u64 },
    /// Play the witness cycle reversed, forever.
    WitnessReplay(Witness),
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// States `x(0) .. x(T)`.
    pub states: Vec<Vec<f64>>,
    /// Name of the matrix applied at each step; length `T`.
    pub applied: Vec<String>,
    /// Largest within-cluster spread at each time; length `T + 1`.
    pub spreads: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.applied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.applied.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds x(0)")
    }

    pub fn final_spread(&self) -> f64 {
        *self.spreads.last().expect("trajectory holds x(0)")
    }

    pub fn min_spread(&self) -> f64 {
        self.spreads.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsensusProfile {
    pub converged: bool,
    /// Earliest time from which the spread stays within tolerance.
    pub convergence_time: Option<usize>,
    /// Per-cluster limit values, in cluster order, when converged.
    pub cluster_values: Option<Vec<f64>>,
    pub final_spread: f64,
}

/// Largest within-cluster value spread of a state vector.
pub fn cluster_spread(x: &[f64], clustering: &Clustering) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..clustering.k() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in clustering.members(k) {
            lo = lo.min(x[v]);
            hi = hi.max(x[v]);
        }
        worst = worst.max(hi - lo);
    }
    worst
}

fn apply(p: &StochasticMatrix, x: &[f64]) -> Vec<f64> {
    let n = p.n();
    (0..n)
        .map(|i| p.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn resolve(set: &MatrixSet, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|name| {
            set.index_of(name).ok_or_else(|| Error::UnknownMatrixName {
                name: name.clone(),
            })
        })
        .collect()
}

/// Runs the system for up to `horizon` steps under `policy`.
pub fn run(
    set: &MatrixSet,
    policy: &SwitchingPolicy,
    x0: &[f64],
    horizon: usize,
) -> Result<Trajectory> {
    let n = set.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            left: x0.len(),
            right: n,
            context: "initial state",
        });
    }
    for (i, &v) in x0.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Policy {
                detail: format!("initial state entry {v} at index {i} is not finite"),
            });
        }
    }

    enum Schedule {
        Finite(Vec<usize>),
        Cyclic(Vec<usize>),
        Random(ChaCha8Rng),
    }
    let mut schedule = match policy {
        SwitchingPolicy::FixedSequence(names) => {
            if names.is_empty() {
                return Err(Error::EmptySequence {
                    context: "fixed switching sequence",
                });
            }
            Schedule::Finite(resolve(set, names)?)
        }
        SwitchingPolicy::Periodic(names) => {
            if names.is_empty() {
                return Err(Error::EmptySequence {
                    context: "periodic switching sequence",
                });
            }
            Schedule::Cyclic(resolve(set, names)?)
        }
        SwitchingPolicy::UniformRandom { seed } => {
            Schedule::Random(ChaCha8Rng::seed_from_u64(*seed))
        }
        SwitchingPolicy::WitnessReplay(witness) => {
            if witness.cycle.is_empty() {
                return Err(Error::EmptySequence {
                    context: "witness cycle",
                });
            }
            Schedule::Cyclic(resolve(set, &witness.replay_names())?)
        }
    };

    let steps = match &schedule {
        Schedule::Finite(seq) => horizon.min(seq.len()),
        _ => horizon,
    };

    let clustering = set.clustering();
    let mut states = Vec::with_capacity(steps + 1);
    let mut spreads = Vec::with_capacity(steps + 1);
    let mut applied = Vec::with_capacity(steps);
    states.push(x0.to_vec());
    spreads.push(cluster_spread(x0, clustering));
    for t in 0..steps {
        let idx = match &mut schedule {
            Schedule::Finite(seq) => seq[t],
            Schedule::Cyclic(seq) => seq[t % seq.len()],
            Schedule::Random(rng) => rng.random_range(0..set.len()),
        };
        let p = set.get(idx);
        let next = apply(p, states.last().expect("nonempty"));
        spreads.push(cluster_spread(&next, clustering));
        states.push(next);
        applied.push(p.name().to_string());
    }
    Ok(Trajectory {
        states,
        applied,
        spreads,
    })
}

/// Decides from the spread log whether the run settled into per-cluster
/// agreement: the spread must stay within `eps` over the whole trailing
/// window, `max(10, T/10)` samples wide.
pub fn detect_cluster_consensus(
    trajectory: &Trajectory,
    clustering: &Clustering,
    eps: f64,
) -> ConsensusProfile {
    let spreads = &trajectory.spreads;
    let total = trajectory.len();
    let window = (total / 10).max(10).min(spreads.len());
    let converged = spreads[spreads.len() - window..]
        .iter()
        .all(|&s| s <= eps);
    let final_spread = trajectory.final_spread();
    if !converged {
        return ConsensusProfile {
            converged: false,
            convergence_time: None,
            cluster_values: None,
            final_spread,
        };
    }
    let mut from = spreads.len();
    while from > 0 && spreads[from - 1] <= eps {
        from -= 1;
    }
    let last = trajectory.final_state();
    let values = (0..clustering.k())
        .map(|k| {
            let members = clustering.members(k);
            members.iter().map(|&v| last[v]).sum::<f64>() / members.len() as f64
        })
        .collect();
    ConsensusProfile {
        converged: true,
        convergence_time: Some(from),
        cluster_values: Some(values),
        final_spread,
    }
}

/// The initial state a witness prescribes: 0 on the entry `s` set, 1 on
/// the entry `s_prime` set, one half elsewhere.
pub fn witness_initial_state(witness: &Witness, n: usize) -> Vec<f64> {
    let (s, sp) = witness.entry_sets();
    (0..n)
        .map(|v| {
            if s.contains(v) {
                0.0
            } else if sp.contains(v) {
                1.0
            } else {
                0.5
            }
        })
        .collect()
}

/// Support evolution of the seed pair's accumulated product rows along
/// the repeated witness cycle.
#[derive(Clone, Debug)]
pub struct SupportRun {
    /// Supports of row `seed.i`, one per time `0..=steps`.
    pub s: Vec<VertexSet>,
    /// Supports of row `seed.j`.
    pub s_prime: Vec<VertexSet>,
    pub first_overlap: Option<usize>,
    /// How many leading steps the numeric route cross-checked.
    pub numeric_steps: usize,
}

impl SupportRun {
    pub fn all_disjoint(&self) -> bool {
        self.first_overlap.is_none()
    }
}

// Numeric row products shrink geometrically even after rescaling by the
// maximum, so the strict positivity test is only trusted over a window
// where the smallest representable contribution cannot underflow.
const NUMERIC_SUPPORT_WINDOW: usize = 100;

fn numeric_support(v: &[f64]) -> VertexSet {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn rescale(v: &mut [f64]) {
    let max = v.iter().copied().fold(0.0f64, f64::max);
    if max > 0.0 {
        for x in v.iter_mut() {
            *x /= max;
        }
    }
}

/// Tracks the supports of `e_i^T P(1) .. P(t)` and `e_j^T P(1) .. P(t)`
/// where the sequence repeats the witness cycle in cycle order.  The
/// supports are computed combinatorially through the support graphs and
/// cross-checked against direct row-vector products for the leading
/// window; any disagreement is an internal error, not a verdict.
pub fn support_trajectories(
    set: &MatrixSet,
    witness: &Witness,
    steps: usize,
) -> Result<SupportRun> {
    if witness.cycle.is_empty() {
        return Err(Error::EmptySequence {
            context: "witness cycle",
        });
    }
    let n = set.n();
    let indices = resolve(set, &witness.cycle_names())?;
    let graphs: Vec<DirectedGraph> = indices
        .iter()
        .map(|&m| DirectedGraph::from_matrix(set.get(m)))
        .collect();
    let (i, j) = (witness.seed.i, witness.seed.j);
    if i >= n || j >= n {
        return Err(Error::SequenceIndexOutOfRange {
            index: i.max(j),
            len: n,
            context: "witness seed vertex",
        });
    }

    let mut s = Vec::with_capacity(steps + 1);
    let mut s_prime = Vec::with_capacity(steps + 1);
    s.push(VertexSet::singleton(i));
    s_prime.push(VertexSet::singleton(j));

    let numeric_steps = steps.min(NUMERIC_SUPPORT_WINDOW);
    let mut vi = vec![0.0f64; n];
    let mut vj = vec![0.0f64; n];
    vi[i] = 1.0;
    vj[j] = 1.0;

    let mut first_overlap = (!s[0].is_disjoint(s_prime[0])).then_some(0);
    for t in 0..steps {
        let phase = t % indices.len();
        let g = &graphs[phase];
        let next_s = g.image(*s.last().expect("nonempty"));
        let next_sp = g.image(*s_prime.last().expect("nonempty"));
        if t < numeric_steps {
            let p = set.get(indices[phase]);
            vi = row_apply(&vi, p);
            vj = row_apply(&vj, p);
            rescale(&mut vi);
            rescale(&mut vj);
            let num_s = numeric_support(&vi);
            let num_sp = numeric_support(&vj);
            if num_s != next_s || num_sp != next_sp {
                return Err(Error::SupportMismatch {
                    step: t + 1,
                    numeric: format!("{num_s} / {num_sp}"),
                    combinatorial: format!("{next_s} / {next_sp}"),
                });
            }
        }
        if first_overlap.is_none() && !next_s.is_disjoint(next_sp) {
            first_overlap = Some(t + 1);
        }
        s.push(next_s);
        s_prime.push(next_sp);
    }

    Ok(SupportRun {
        s,
        s_prime,
        first_overlap,
        numeric_steps,
    })
}

fn row_apply(v: &[f64], p: &StochasticMatrix) -> Vec<f64> {
    let n = p.n();
    (0..n)
        .map(|col| (0..n).map(|row| v[row] * p.get(row, col)).sum())
        .collect()
}

#[derive(Clone, Debug)]
pub struct ForwardProductCheck {
    pub product: StochasticMatrix,
    pub tau: f64,
    /// Per-cluster mean rows of the product when it has essentially
    /// collapsed, in cluster order.
    pub limit_rows: Option<Vec<Vec<f64>>>,
}

/// Accumulates `P(t) .. P(1)` for the given matrix indices (applied in
/// slice order) and reports how far the product is from per-cluster rank
/// one.  `limit_rows` is populated when the cluster coefficient falls to
/// `collapse_tol` or below.
pub fn forward_product_check(
    set: &MatrixSet,
    indices: &[usize],
    collapse_tol: f64,
) -> Result<ForwardProductCheck> {
    if indices.is_empty() {
        return Err(Error::EmptySequence {
            context: "forward product",
        });
    }
    for &m in indices {
        if m >= set.len() {
            return Err(Error::SequenceIndexOutOfRange {
                index: m,
                len: set.len(),
                context: "forward product",
            });
        }
    }
    let mut acc = set.get(indices[0]).clone();
    for &m in &indices[1..] {
        acc = set.get(m).product(&acc)?;
        acc.set_name("forward_product");
    }
    acc.set_name("forward_product");
    let clustering = set.clustering();
    let tau = crate::ergodicity::tau_c(&acc, clustering).value;
    let limit_rows = (tau <= collapse_tol).then(|| {
        (0..clustering.k())
            .map(|k| {
                let members = clustering.members(k);
                let mut mean = vec![0.0f64; acc.n()];
                for &v in members {
                    for (slot, x) in mean.iter_mut().zip(acc.row(v)) {
                        *slot += x;
                    }
                }
                for x in mean.iter_mut() {
                    *x /= members.len() as f64;
                }
                mean
            })
            .collect()
    });
    Ok(ForwardProductCheck {
        product: acc,
        tau,
        limit_rows,
    })
}

/// CSV dump: header `t,matrix,spread,x_0,..`, one row per time, matrix
/// blank at `t = 0`.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let n = trajectory.states.first().map_or(0, Vec::len);
    let mut out = String::from("t,matrix,spread");
    for i in 0..n {
        out.push_str(&format!(",x_{i}"));
    }
    out.push('\n');
    for (t, state) in trajectory.states.iter().enumerate() {
        let matrix = if t == 0 {
            ""
        } else {
            trajectory.applied[t - 1].as_str()
        };
        out.push_str(&format!("{t},{matrix},{:.16e}", trajectory.spreads[t]));
        for x in state {
            out.push_str(&format!(",{x:.16e}"));
        }
        out.push('\n');
    }
    out
}
