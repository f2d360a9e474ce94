//! Exact decision procedure for cluster consensus.
//!
//! The set fails to be a cluster consensus set exactly when two families
//! of vertex sets can cycle under the support graphs while staying
//! disjoint, seeded by a same-cluster pair.  The search runs over
//! `PairState`s `(S, S')`: each matrix induces the tight transition
//! `(S, S') -> (N(S), N(S'))`, with an edge only when the images stay
//! disjoint.  Taking exact images loses nothing: images are monotone, so
//! any run that survives with larger sets also survives with the tight
//! ones.  A seed pair `({i}, {j})` admits an infinite disjoint run iff it
//! lies in the live region, the greatest set of states that all keep a
//! successor inside the region.  Any live run must repeat a state, which
//! is where the finite witness cycle comes from, and the number of
//! disjoint nonempty pairs bounds its length.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix_set::{MatrixSet, Regime};
use crate::vertex_set::VertexSet;

/// A pair of nonempty disjoint vertex sets tracked by the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairState {
    pub s: VertexSet,
    pub s_prime: VertexSet,
}

impl PairState {
    fn key(self) -> u128 {
        ((self.s.bits() as u128) << 64) | self.s_prime.bits() as u128
    }
}

/// Upper bound on the number of pair states, and therefore on any witness
/// cycle length: ordered pairs of disjoint nonempty subsets of an
/// `n`-element universe, `3^n - 2^(n+1) + 1`.
pub fn pair_state_bound(n: usize) -> u128 {
    assert!(n <= VertexSet::MAX);
    let three = 3u128.pow(n as u32);
    let two = 1u128 << (n + 1);
    three - two + 1
}

/// The same-cluster pair a witness is anchored at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub i: usize,
    pub j: usize,
    pub cluster: usize,
}

/// One step of a witness: the matrix applied at this position and the two
/// sets the run holds when it is applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub matrix: String,
    pub s: Vec<usize>,
    pub s_prime: Vec<usize>,
}

impl WitnessStep {
    pub fn s_set(&self) -> VertexSet {
        self.s.iter().copied().collect()
    }

    pub fn s_prime_set(&self) -> VertexSet {
        self.s_prime.iter().copied().collect()
    }
}

/// Certificate that a set is not a cluster consensus set.
///
/// The cycle lists `l` steps; applying step `l`'s matrix to its sets must
/// land inside step `l+1`'s sets (cyclically), the two families must stay
/// disjoint at every position, and the seed pair must lie in the first
/// cycle sets while sharing a cluster.  The prefix documents the walk
/// from the singleton seed pair to the cycle entry and is not part of the
/// checked certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: Seed,
    #[serde(default)]
    pub prefix: Vec<WitnessStep>,
    pub cycle: Vec<WitnessStep>,
}

impl Witness {
    /// Cycle length.
    pub fn cycle_len(&self) -> usize {
        self.cycle.len()
    }

    /// Cycle matrix names in cycle order: the order in which row supports
    /// accumulate, used for support replay.
    pub fn cycle_names(&self) -> Vec<String> {
        self.cycle.iter().map(|s| s.matrix.clone()).collect()
    }

    /// Cycle matrix names reversed: the order a state trajectory must
    /// apply them so that, with positive diagonals, the accumulated row
    /// supports of the seed pair stay trapped in the entry sets.  This is
    /// the schedule the witness-replay switching policy plays.
    pub fn replay_names(&self) -> Vec<String> {
        let mut names = self.cycle_names();
        names.reverse();
        names
    }

    pub fn entry_sets(&self) -> (VertexSet, VertexSet) {
        (self.cycle[0].s_set(), self.cycle[0].s_prime_set())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Witness> {
        serde_json::from_str(json).map_err(|e| Error::Parse {
            context: "witness document".to_string(),
            detail: e.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Every infinite sequence drives every initial state to per-cluster
    /// agreement.  Only issued when the structural regime licenses the
    /// search as a complete characterization.
    ConsensusSet,
    /// A verified witness shows some sequence keeps a same-cluster pair
    /// separated forever.
    NotConsensusSet,
    /// The search found no witness but the structural assumptions do not
    /// license the positive conclusion.
    NecessaryOnlyPassed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub states_explored: usize,
    pub transitions: usize,
    pub seeds_examined: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecisionResult {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: SearchStats,
}

#[derive(Clone, Copy, Debug)]
pub struct DecideOptions {
    /// Abort with an error beyond this many explored pair states.
    pub state_budget: usize,
    /// Largest dimension the search will accept.
    pub dimension_cap: usize,
    /// Test instrumentation: skip the liveness fixpoint and treat every
    /// reachable state as live.  Produces unsound verdicts by design;
    /// exists so the cross-validation harness can prove it would notice.
    pub skip_liveness_fixpoint: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            state_budget: 5_000_000,
            dimension_cap: 20,
            skip_liveness_fixpoint: false,
        }
    }
}

/// Decides whether `set` is a cluster consensus set.
///
/// Returns `ConsensusSet` only when no seed is live and the assumption
/// regime plus common influence make the search complete; a live seed
/// always yields `NotConsensusSet` with an extracted witness; otherwise
/// the result is `NecessaryOnlyPassed`.
pub fn decide(set: &MatrixSet, opts: &DecideOptions) -> Result<DecisionResult> {
    let report = set.check_assumptions();
    let licensed = report.regime != Regime::None && report.common_influence;
    run_search(set, opts, licensed)
}

/// Same search without any structural preconditions beyond common
/// influence, which the necessity direction still needs.  Never returns
/// `ConsensusSet`.
pub fn decide_necessary_only(set: &MatrixSet, opts: &DecideOptions) -> Result<DecisionResult> {
    for m in set.matrices() {
        let (ok, _) = crate::matrix_set::common_influence(m, set.clustering());
        if !ok {
            return Err(Error::CommonInfluenceViolated {
                detail: format!(
                    "matrix {:?} sends unequal inter-cluster mass across rows of one cluster",
                    m.name()
                ),
            });
        }
    }
    run_search(set, opts, false)
}

const NO_SUCC: u32 = u32::MAX;

struct SearchSpace {
    states: Vec<PairState>,
    /// Flattened successor table, stride = number of matrices.
    succ: Vec<u32>,
    matrices: usize,
    transitions: usize,
}

impl SearchSpace {
    fn successor(&self, state: u32, matrix: usize) -> Option<u32> {
        let v = self.succ[state as usize * self.matrices + matrix];
        (v != NO_SUCC).then_some(v)
    }
}

fn run_search(set: &MatrixSet, opts: &DecideOptions, licensed: bool) -> Result<DecisionResult> {
    let n = set.n();
    let cap = opts.dimension_cap.min(VertexSet::MAX);
    if n > cap {
        return Err(Error::DimensionTooLarge {
            n,
            cap,
            context: "decision search",
        });
    }
    let graphs: Vec<DirectedGraph> = set.matrices().iter().map(DirectedGraph::from_matrix).collect();
    let seeds: Vec<(usize, usize, usize)> = set.clustering().same_cluster_pairs().collect();

    let passed_verdict = if licensed {
        Verdict::ConsensusSet
    } else {
        Verdict::NecessaryOnlyPassed
    };

    if seeds.is_empty() {
        return Ok(DecisionResult {
            verdict: passed_verdict,
            witness: None,
            stats: SearchStats::default(),
        });
    }

    let space = explore(&graphs, &seeds, opts)?;
    let alive = if opts.skip_liveness_fixpoint {
        vec![true; space.states.len()]
    } else {
        live_region(&space)
    };

    let stats = SearchStats {
        states_explored: space.states.len(),
        transitions: space.transitions,
        seeds_examined: seeds.len(),
    };

    // Seeds were interned first, in deterministic order; the first live
    // one anchors the reported witness.
    for (idx, &(k, i, j)) in seeds.iter().enumerate() {
        if alive[idx] {
            let witness =
                extract_witness(set, &space, &alive, idx as u32, (k, i, j))?;
            return Ok(DecisionResult {
                verdict: Verdict::NotConsensusSet,
                witness: Some(witness),
                stats,
            });
        }
    }

    Ok(DecisionResult {
        verdict: passed_verdict,
        witness: None,
        stats,
    })
}

/// Breadth-first closure of the seed states under tight transitions.
fn explore(
    graphs: &[DirectedGraph],
    seeds: &[(usize, usize, usize)],
    opts: &DecideOptions,
) -> Result<SearchSpace> {
    let m = graphs.len();
    let mut index: HashMap<u128, u32> = HashMap::new();
    let mut states: Vec<PairState> = Vec::new();
    let mut succ: Vec<u32> = Vec::new();
    let mut transitions = 0usize;

    let mut intern = |state: PairState, states: &mut Vec<PairState>| -> u32 {
        *index.entry(state.key()).or_insert_with(|| {
            states.push(state);
            (states.len() - 1) as u32
        })
    };

    for &(_, i, j) in seeds {
        let state = PairState {
            s: VertexSet::singleton(i),
            s_prime: VertexSet::singleton(j),
        };
        intern(state, &mut states);
    }

    let mut cursor = 0usize;
    while cursor < states.len() {
        let state = states[cursor];
        succ.resize(succ.len() + m, NO_SUCC);
        for (mi, g) in graphs.iter().enumerate() {
            let img_s = g.image(state.s);
            let img_sp = g.image(state.s_prime);
            // Rows of a stochastic matrix are never all-zero, so images of
            // nonempty sets stay nonempty; the guard is belt and braces.
            if img_s.is_empty() || img_sp.is_empty() || !img_s.is_disjoint(img_sp) {
                continue;
            }
            let next = PairState {
                s: img_s,
                s_prime: img_sp,
            };
            let id = intern(next, &mut states);
            if states.len() > opts.state_budget {
                return Err(Error::StateBudgetExceeded {
                    budget: opts.state_budget,
                    explored: states.len(),
                });
            }
            succ[cursor * m + mi] = id;
            transitions += 1;
        }
        cursor += 1;
    }

    Ok(SearchSpace {
        states,
        succ,
        matrices: m,
        transitions,
    })
}

/// Greatest fixpoint of "has a successor in the region", computed by
/// peeling dead states off a worklist.  The explored universe is closed
/// under successors, so restricting to it is sound.
fn live_region(space: &SearchSpace) -> Vec<bool> {
    let count = space.states.len();
    let mut out_count = vec![0u32; count];
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); count];
    for s in 0..count {
        for m in 0..space.matrices {
            if let Some(t) = space.successor(s as u32, m) {
                out_count[s] += 1;
                rev[t as usize].push(s as u32);
            }
        }
    }
    let mut alive = vec![true; count];
    let mut dead: Vec<u32> = (0..count as u32)
        .filter(|&s| out_count[s as usize] == 0)
        .collect();
    for &s in &dead {
        alive[s as usize] = false;
    }
    while let Some(d) = dead.pop() {
        for &p in &rev[d as usize] {
            if alive[p as usize] {
                out_count[p as usize] -= 1;
                if out_count[p as usize] == 0 {
                    alive[p as usize] = false;
                    dead.push(p);
                }
            }
        }
    }
    alive
}

/// Deterministic walk from a live seed: at every state take the first
/// matrix whose image pair stays live.  The walk must revisit a state;
/// the revisited segment becomes the cycle, the approach the prefix.
fn extract_witness(
    set: &MatrixSet,
    space: &SearchSpace,
    alive: &[bool],
    seed_state: u32,
    seed: (usize, usize, usize),
) -> Result<Witness> {
    let (k, i, j) = seed;
    let mut pos: HashMap<u32, usize> = HashMap::new();
    let mut path: Vec<(u32, usize)> = Vec::new();
    let mut cur = seed_state;
    let cycle_start = loop {
        if let Some(&p) = pos.get(&cur) {
            break p;
        }
        pos.insert(cur, path.len());
        let chosen = (0..space.matrices).find(|&m| {
            space
                .successor(cur, m)
                .is_some_and(|t| alive[t as usize])
        });
        let Some(m) = chosen else {
            return Err(Error::InternalInconsistency {
                detail: format!(
                    "state {} marked live but has no live successor",
                    path.len()
                ),
            });
        };
        path.push((cur, m));
        cur = space.successor(cur, m).expect("checked above");
    };

    let step = |&(state, m): &(u32, usize)| -> WitnessStep {
        let ps = space.states[state as usize];
        WitnessStep {
            matrix: set.get(m).name().to_string(),
            s: ps.s.to_vec(),
            s_prime: ps.s_prime.to_vec(),
        }
    };
    let prefix: Vec<WitnessStep> = path[..cycle_start].iter().map(step).collect();
    let mut cycle: Vec<WitnessStep> = path[cycle_start..].iter().map(step).collect();

    // Anchor the seed pair in the first cycle sets.  With positive
    // diagonals the walk never drops a vertex, so the original seed is
    // already there; otherwise look for a same-cluster pair at some
    // rotation (common influence forces the two families to touch the
    // same clusters at every step, so one exists).
    let entry = (cycle[0].s_set(), cycle[0].s_prime_set());
    if entry.0.contains(i) && entry.1.contains(j) {
        return Ok(Witness {
            seed: Seed { i, j, cluster: k },
            prefix,
            cycle,
        });
    }
    let clustering = set.clustering();
    for r in 0..cycle.len() {
        let s = cycle[r].s_set();
        let sp = cycle[r].s_prime_set();
        let pair = (0..clustering.k()).find_map(|kk| {
            let mask = clustering.mask(kk);
            match (s.intersection(mask).min(), sp.intersection(mask).min()) {
                (Some(a), Some(b)) => Some((kk, a, b)),
                _ => None,
            }
        });
        if let Some((kk, a, b)) = pair {
            cycle.rotate_left(r);
            return Ok(Witness {
                seed: Seed {
                    i: a,
                    j: b,
                    cluster: kk,
                },
                prefix: Vec::new(),
                cycle,
            });
        }
    }
    Err(Error::InternalInconsistency {
        detail: "live cycle carries no same-cluster pair at any rotation; \
                 reachable only for inputs without common influence"
            .to_string(),
    })
}

/// Which certificate condition a tampered witness violates first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessViolation {
    /// A cycle position holds an empty set.
    EmptySet { position: usize },
    /// The two families intersect at a cycle position.
    Disjointness { position: usize },
    /// An image escapes the next cycle set.
    Containment {
        position: usize,
        prime_family: bool,
    },
    /// The seed pair is missing from the first cycle sets.
    SeedMembership,
    /// The seed vertices do not share the declared cluster.
    SeedCluster,
    /// Cycle length outside `[1, 3^n - 2^(n+1) + 1]`.
    LengthBound { len: usize, bound: u128 },
}

impl fmt::Display for WitnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessViolation::EmptySet { position } => {
                write!(f, "(i) cycle position {position} holds an empty set")
            }
            WitnessViolation::Disjointness { position } => {
                write!(f, "(i) cycle sets at position {position} intersect")
            }
            WitnessViolation::Containment {
                position,
                prime_family,
            } => {
                let family = if *prime_family { "s_prime" } else { "s" };
                write!(
                    f,
                    "(ii) image of the {family} set at cycle position {position} escapes the next set"
                )
            }
            WitnessViolation::SeedMembership => {
                write!(f, "(iii) seed pair is not contained in the first cycle sets")
            }
            WitnessViolation::SeedCluster => {
                write!(f, "(iii) seed vertices do not share the declared cluster")
            }
            WitnessViolation::LengthBound { len, bound } => {
                write!(f, "(length) cycle length {len} outside [1, {bound}]")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub valid: bool,
    pub violation: Option<WitnessViolation>,
}

/// Checks a witness literally against its defining conditions, in a fixed
/// order: length bound, then set nonemptiness and disjointness position
/// by position, then image containment, then the seed conditions.  The
/// first failure is reported.  Unknown matrix names and out-of-range
/// vertices are operational errors, not violations.
pub fn verify_witness(witness: &Witness, set: &MatrixSet) -> Result<VerifyReport> {
    let n = set.n();
    let len = witness.cycle.len();
    let bound = pair_state_bound(n);
    let fail = |v: WitnessViolation| {
        Ok(VerifyReport {
            valid: false,
            violation: Some(v),
        })
    };
    if len == 0 || len as u128 > bound {
        return fail(WitnessViolation::LengthBound { len, bound });
    }
    let mut graphs = Vec::with_capacity(len);
    for step in &witness.cycle {
        let Some(p) = set.by_name(&step.matrix) else {
            return Err(Error::UnknownMatrixName {
                name: step.matrix.clone(),
            });
        };
        for &v in step.s.iter().chain(step.s_prime.iter()) {
            if v >= n {
                return Err(Error::SequenceIndexOutOfRange {
                    index: v,
                    len: n,
                    context: "witness vertex",
                });
            }
        }
        graphs.push(DirectedGraph::from_matrix(p));
    }
    for (l, step) in witness.cycle.iter().enumerate() {
        let s = step.s_set();
        let sp = step.s_prime_set();
        if s.is_empty() || sp.is_empty() {
            return fail(WitnessViolation::EmptySet { position: l });
        }
        if !s.is_disjoint(sp) {
            return fail(WitnessViolation::Disjointness { position: l });
        }
    }
    for l in 0..len {
        let next = &witness.cycle[(l + 1) % len];
        let step = &witness.cycle[l];
        if !graphs[l].image(step.s_set()).is_subset(next.s_set()) {
            return fail(WitnessViolation::Containment {
                position: l,
                prime_family: false,
            });
        }
        if !graphs[l]
            .image(step.s_prime_set())
            .is_subset(next.s_prime_set())
        {
            return fail(WitnessViolation::Containment {
                position: l,
                prime_family: true,
            });
        }
    }
    let Seed { i, j, cluster } = witness.seed;
    if i >= n || j >= n {
        return Err(Error::SequenceIndexOutOfRange {
            index: i.max(j),
            len: n,
            context: "witness seed vertex",
        });
    }
    let (s0, sp0) = witness.entry_sets();
    if !s0.contains(i) || !sp0.contains(j) {
        return fail(WitnessViolation::SeedMembership);
    }
    let clustering = set.clustering();
    if cluster >= clustering.k()
        || clustering.cluster_of(i) != cluster
        || clustering.cluster_of(j) != cluster
    {
        return fail(WitnessViolation::SeedCluster);
    }
    Ok(VerifyReport {
        valid: true,
        violation: None,
    })
}
