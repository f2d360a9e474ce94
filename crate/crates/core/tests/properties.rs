//! Randomized invariants.  Instances are built from seeds so failures
//! shrink to a reproducible seed instead of a raw matrix dump.

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cluster_consensus::decision::{decide_necessary_only, pair_state_bound};
use cluster_consensus::ergodicity::{dobrushin, tau_c};
use cluster_consensus::generate::{
    common_influence_matrix, doubly_stochastic_set, plain_stochastic_matrix, random_clustering,
    symmetric_floor_set,
};
use cluster_consensus::graph::DirectedGraph;
use cluster_consensus::matrix_set::common_influence;
use cluster_consensus::{
    decide, verify_witness, Clustering, DecideOptions, MatrixSet, StochasticMatrix, Tolerances,
    Verdict, VertexSet, Witness,
};

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Validated output re-validates to the bitwise identical matrix,
    /// including inputs that need clamping or renormalization.
    #[test]
    fn validation_is_idempotent(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng_for(seed);
        let p = plain_stochastic_matrix(&mut rng, n, "p");
        let mut rows = p.rows();
        for row in rows.iter_mut() {
            for v in row.iter_mut() {
                if *v > 0.5 {
                    *v += 1e-10;
                } else if *v > 0.0 && *v < 1e-13 {
                    // Already clamped by construction; leave it.
                } else if *v == 0.0 && rng.random_bool(0.2) {
                    *v = 1e-13;
                }
            }
        }
        let once = StochasticMatrix::from_rows("once", rows, Tolerances::default()).unwrap();
        let twice = StochasticMatrix::from_rows("twice", once.rows(), Tolerances::default()).unwrap();
        prop_assert_eq!(once.rows(), twice.rows());
    }

    /// The product of two common-influence matrices keeps common
    /// influence.
    #[test]
    fn common_influence_is_closed_under_products(seed in any::<u64>(), n in 2usize..=7) {
        let mut rng = rng_for(seed);
        let c = random_clustering(&mut rng, n);
        let p1 = common_influence_matrix(&mut rng, &c, "p1");
        let p2 = common_influence_matrix(&mut rng, &c, "p2");
        let product = p1.product(&p2).unwrap();
        prop_assert!(common_influence(&product, &c).0);
    }

    /// The cluster coefficient lies in `[0, 1]`; it vanishes exactly on
    /// clusterwise identical rows.
    #[test]
    fn coefficient_range_and_zero(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng_for(seed);
        let c = random_clustering(&mut rng, n);
        let p = plain_stochastic_matrix(&mut rng, n, "p");
        let value = tau_c(&p, &c).value;
        prop_assert!((0.0..=1.0).contains(&value));

        // Force clusterwise identical rows, then perturb one pair.
        let template = plain_stochastic_matrix(&mut rng, n, "t");
        let mut rows = vec![vec![0.0; n]; n];
        for k in 0..c.k() {
            let leader = c.members(k)[0];
            for &v in c.members(k) {
                rows[v] = template.row(leader).to_vec();
            }
        }
        let flat = StochasticMatrix::from_rows("flat", rows.clone(), Tolerances::default()).unwrap();
        prop_assert_eq!(tau_c(&flat, &c).value, 0.0);

        if let Some(k) = (0..c.k()).find(|&k| c.members(k).len() >= 2) {
            let v = c.members(k)[1];
            rows[v] = vec![0.0; n];
            rows[v][v] = 1.0;
            let bent = StochasticMatrix::from_rows("bent", rows, Tolerances::default()).unwrap();
            if bent.row(v) != flat.row(v) {
                prop_assert!(tau_c(&bent, &c).value > 0.0);
            }
        }
    }

    /// Refining the clustering never increases the coefficient: fewer
    /// same-cluster pairs compete for the maximum.
    #[test]
    fn coefficient_is_monotone_under_refinement(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng_for(seed);
        let p = plain_stochastic_matrix(&mut rng, n, "p");
        let coarse = Clustering::single(n);
        let fine = random_clustering(&mut rng, n);
        prop_assert!(tau_c(&p, &fine).value <= tau_c(&p, &coarse).value + 1e-15);
    }

    /// `K = 1` reduces the cluster coefficient to the classical one.
    #[test]
    fn single_cluster_reduces_to_dobrushin(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = rng_for(seed);
        let p = plain_stochastic_matrix(&mut rng, n, "p");
        let single = tau_c(&p, &Clustering::single(n));
        let classic = dobrushin(&p);
        prop_assert_eq!(single.value, classic.value);
        prop_assert_eq!(single.arg_pair, classic.arg_pair);
    }

    /// Neighbor images are monotone in the argument set.
    #[test]
    fn images_are_monotone(seed in any::<u64>(), n in 1usize..=8, small in any::<u64>(), extra in any::<u64>()) {
        let mut rng = rng_for(seed);
        let p = plain_stochastic_matrix(&mut rng, n, "p");
        let g = DirectedGraph::from_matrix(&p);
        let mask = (1u64 << n) - 1;
        let s = VertexSet::from_bits(small & mask);
        let t = VertexSet::from_bits((small | extra) & mask);
        prop_assert!(g.image(s).is_subset(g.image(t)));
    }

    /// Doubly stochastic matrices are exactly cut balanced.
    #[test]
    fn doubly_stochastic_matrices_are_cut_balanced(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng_for(seed);
        let c = random_clustering(&mut rng, n);
        let set = doubly_stochastic_set(&mut rng, &c, 1, false).unwrap();
        let balance = set.get(0).cut_balance().unwrap();
        prop_assert!(balance.is_some());
        prop_assert!(balance.unwrap() <= 1.0 + 1e-9);
    }

    /// Witnesses survive a JSON round-trip and re-verify against their
    /// set; cycle lengths respect the universal bound.
    #[test]
    fn witnesses_round_trip(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = rng_for(seed);
        let c = random_clustering(&mut rng, n);
        let set = symmetric_floor_set(&mut rng, &c, 2, true).unwrap();
        let result = decide(&set, &DecideOptions::default()).unwrap();
        if let Some(w) = result.witness {
            prop_assert_eq!(result.verdict, Verdict::NotConsensusSet);
            let back = Witness::from_json(&w.to_json()).unwrap();
            prop_assert_eq!(&back, &w);
            prop_assert!(verify_witness(&back, &set).unwrap().valid);
            prop_assert!(back.cycle_len() as u128 <= pair_state_bound(n));
        }
    }

    /// Deciding twice gives identical verdicts, witnesses and stats.
    #[test]
    fn decide_is_deterministic(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = rng_for(seed);
        let c = random_clustering(&mut rng, n);
        let split = rng.random_bool(0.5);
        let set = doubly_stochastic_set(&mut rng, &c, 2, split).unwrap();
        let r1 = decide(&set, &DecideOptions::default()).unwrap();
        let r2 = decide(&set, &DecideOptions::default()).unwrap();
        prop_assert_eq!(r1.verdict, r2.verdict);
        prop_assert_eq!(r1.witness, r2.witness);
        prop_assert_eq!(r1.stats, r2.stats);
    }

    /// The unconditional search path agrees with the full decision on
    /// rejections and never upgrades to acceptance.
    #[test]
    fn necessary_only_agrees_on_rejections(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = rng_for(seed);
        let c = random_clustering(&mut rng, n);
        let split = rng.random_bool(0.5);
        let set = symmetric_floor_set(&mut rng, &c, 2, split).unwrap();
        let full = decide(&set, &DecideOptions::default()).unwrap();
        let necessary = decide_necessary_only(&set, &DecideOptions::default()).unwrap();
        prop_assert_ne!(necessary.verdict, Verdict::ConsensusSet);
        match full.verdict {
            Verdict::NotConsensusSet => {
                prop_assert_eq!(necessary.verdict, Verdict::NotConsensusSet);
                prop_assert_eq!(necessary.witness, full.witness);
            }
            _ => prop_assert_eq!(necessary.verdict, Verdict::NecessaryOnlyPassed),
        }
    }
}

/// Probe, not a property: common influence is closed under products of
/// two conforming matrices, but what about one-sided products?  This
/// records how often each order survives; it asserts nothing.
#[test]
fn probe_one_sided_common_influence_products() {
    let mut rng = rng_for(0xBEEF);
    let mut ci_times_plain = 0usize;
    let mut plain_times_ci = 0usize;
    let mut plain_not_ci = 0usize;
    let trials = 200;
    for _ in 0..trials {
        let n = 3 + rng.random_range(0..4);
        let c = random_clustering(&mut rng, n);
        let ci = common_influence_matrix(&mut rng, &c, "ci");
        let plain = plain_stochastic_matrix(&mut rng, n, "plain");
        if common_influence(&plain, &c).0 {
            // One-sidedness needs a genuinely nonconforming factor.
            continue;
        }
        plain_not_ci += 1;
        if common_influence(&ci.product(&plain).unwrap(), &c).0 {
            ci_times_plain += 1;
        }
        if common_influence(&plain.product(&ci).unwrap(), &c).0 {
            plain_times_ci += 1;
        }
    }
    println!(
        "one-sided products over {plain_not_ci} nonconforming factors: \
         ci*plain kept common influence {ci_times_plain} times, \
         plain*ci kept it {plain_times_ci} times"
    );
}

/// The necessary-only entry point refuses sets without common influence.
#[test]
fn necessary_only_requires_common_influence() {
    let p = StochasticMatrix::from_rows(
        "skewed",
        vec![
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
        Tolerances::default(),
    )
    .unwrap();
    let c = Clustering::new(3, vec![vec![0, 1], vec![2]]).unwrap();
    let set = MatrixSet::new(vec![p], c).unwrap();
    assert!(decide_necessary_only(&set, &DecideOptions::default()).is_err());
}
