//! Cross-validation harness: generated instances are decided exactly and
//! the verdict is then confronted with independent numerical evidence.
//!
//! Accepted sets must collapse under long random switching, both in
//! state space and in the forward matrix product.  Rejected sets must
//! come with a witness that verifies, whose support run stays disjoint,
//! and whose replay keeps the seed cluster visibly split.  Any mismatch
//! or per-case failure counts as a disagreement; the harness never
//! weakens a check to make a case pass.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decision::{decide, pair_state_bound, DecideOptions, Verdict};
use crate::error::{Error, Result};
use crate::generate::{doubly_stochastic_set, random_clustering, symmetric_floor_set};
use crate::matrix_set::MatrixSet;
use crate::simulator::{
    forward_product_check, run, support_trajectories, witness_initial_state, SwitchingPolicy,
};

/// Largest dimension the harness accepts; support runs scale with
/// `3^n` and stay trivially cheap up to here.
pub const ORACLE_DIMENSION_CAP: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleRegime {
    SymmetricFloor,
    DoublyStochastic,
    /// Alternate between the two regimes case by case.
    Mixed,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub cases: usize,
    pub n: usize,
    /// Matrices per generated set.
    pub set_size: usize,
    pub regime: OracleRegime,
    pub seed: u64,
    pub horizon: usize,
    pub eps: f64,
    /// Deliberately breaks the decision procedure to prove the harness
    /// notices; must never agree on a healthy corpus.
    pub inject_skip_liveness: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cases: 20,
            n: 4,
            set_size: 2,
            regime: OracleRegime::Mixed,
            seed: 0,
            horizon: 200,
            eps: 1e-6,
            inject_skip_liveness: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseRecord {
    pub index: usize,
    pub regime: &'static str,
    pub n: usize,
    pub clusters: Vec<Vec<usize>>,
    pub verdict: Option<Verdict>,
    pub agree: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub cases: usize,
    pub disagreements: usize,
    pub records: Vec<CaseRecord>,
}

impl OracleSummary {
    pub fn all_agree(&self) -> bool {
        self.disagreements == 0
    }
}

fn ramp_state(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Examines one decided set; `Ok` detail text describes what was checked,
/// `Err` text names the first mismatch.
fn check_case(
    set: &MatrixSet,
    opts: &DecideOptions,
    sim_seed: u64,
    config: &OracleConfig,
) -> (Option<Verdict>, std::result::Result<String, String>) {
    let result = match decide(set, opts) {
        Ok(r) => r,
        Err(e) => return (None, Err(format!("decision failed: {e}"))),
    };
    let verdict = result.verdict;
    match verdict {
        Verdict::ConsensusSet => {
            let x0 = ramp_state(set.n());
            let policy = SwitchingPolicy::UniformRandom { seed: sim_seed };
            let traj = match run(set, &policy, &x0, config.horizon) {
                Ok(t) => t,
                Err(e) => return (Some(verdict), Err(format!("simulation failed: {e}"))),
            };
            if traj.final_spread() >= config.eps {
                return (
                    Some(verdict),
                    Err(format!(
                        "accepted set kept spread {:.3e} after {} random steps",
                        traj.final_spread(),
                        config.horizon
                    )),
                );
            }
            let mut seq_rng = ChaCha8Rng::seed_from_u64(sim_seed ^ 0x5eed);
            let indices: Vec<usize> = (0..config.horizon)
                .map(|_| seq_rng.random_range(0..set.len()))
                .collect();
            let check = match forward_product_check(set, &indices, 1e-10) {
                Ok(c) => c,
                Err(e) => return (Some(verdict), Err(format!("product check failed: {e}"))),
            };
            if check.tau >= config.eps {
                return (
                    Some(verdict),
                    Err(format!(
                        "accepted set left forward product coefficient at {:.3e}",
                        check.tau
                    )),
                );
            }
            (
                Some(verdict),
                Ok("random run and forward product both collapsed".to_string()),
            )
        }
        Verdict::NotConsensusSet => {
            let Some(witness) = result.witness else {
                return (
                    Some(verdict),
                    Err("rejected without a witness".to_string()),
                );
            };
            match crate::decision::verify_witness(&witness, set) {
                Ok(report) if report.valid => {}
                Ok(report) => {
                    return (
                        Some(verdict),
                        Err(format!(
                            "witness failed verification: {}",
                            report.violation.expect("invalid report names a violation")
                        )),
                    )
                }
                Err(e) => {
                    return (
                        Some(verdict),
                        Err(format!("witness verification errored: {e}")),
                    )
                }
            }
            let steps = (2 * pair_state_bound(set.n())) as usize;
            match support_trajectories(set, &witness, steps) {
                Ok(run) if run.all_disjoint() => {}
                Ok(run) => {
                    return (
                        Some(verdict),
                        Err(format!(
                            "support run overlapped at step {}",
                            run.first_overlap.expect("overlap reported")
                        )),
                    )
                }
                Err(e) => return (Some(verdict), Err(format!("support run failed: {e}"))),
            }
            let x0 = witness_initial_state(&witness, set.n());
            let policy = SwitchingPolicy::WitnessReplay(witness);
            let traj = match run(set, &policy, &x0, config.horizon) {
                Ok(t) => t,
                Err(e) => return (Some(verdict), Err(format!("replay failed: {e}"))),
            };
            if traj.min_spread() < 0.5 {
                return (
                    Some(verdict),
                    Err(format!(
                        "replay let the seed cluster spread fall to {:.3e}",
                        traj.min_spread()
                    )),
                );
            }
            (
                Some(verdict),
                Ok("witness verified, supports disjoint, replay stayed split".to_string()),
            )
        }
        Verdict::NecessaryOnlyPassed => (
            Some(verdict),
            Err("generated sets satisfy the structural regime; a necessary-only verdict is a bug"
                .to_string()),
        ),
    }
}

pub fn run_oracle(config: &OracleConfig) -> Result<OracleSummary> {
    run_oracle_with_sets(config).map(|(summary, _)| summary)
}

/// Same harness, also returning each generated set in record order so
/// callers can run further structural checks over the exact corpus.
pub fn run_oracle_with_sets(config: &OracleConfig) -> Result<(OracleSummary, Vec<MatrixSet>)> {
    if config.n == 0 || config.n > ORACLE_DIMENSION_CAP {
        return Err(Error::DimensionTooLarge {
            n: config.n,
            cap: ORACLE_DIMENSION_CAP,
            context: "cross-validation harness",
        });
    }
    if config.set_size == 0 {
        return Err(Error::EmptySet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let opts = DecideOptions {
        skip_liveness_fixpoint: config.inject_skip_liveness,
        ..DecideOptions::default()
    };
    let mut records = Vec::with_capacity(config.cases);
    let mut sets = Vec::with_capacity(config.cases);
    let mut disagreements = 0usize;
    for index in 0..config.cases {
        let regime = match config.regime {
            OracleRegime::Mixed => {
                if index % 2 == 0 {
                    OracleRegime::SymmetricFloor
                } else {
                    OracleRegime::DoublyStochastic
                }
            }
            fixed => fixed,
        };
        let clustering = random_clustering(&mut rng, config.n);
        let split = rng.random_bool(0.5);
        let set = match regime {
            OracleRegime::SymmetricFloor => {
                symmetric_floor_set(&mut rng, &clustering, config.set_size, split)?
            }
            OracleRegime::DoublyStochastic => {
                doubly_stochastic_set(&mut rng, &clustering, config.set_size, split)?
            }
            OracleRegime::Mixed => unreachable!("resolved above"),
        };
        let sim_seed = rng.random::<u64>();
        let (verdict, outcome) = check_case(&set, &opts, sim_seed, config);
        let (agree, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if !agree {
            disagreements += 1;
        }
        records.push(CaseRecord {
            index,
            regime: match regime {
                OracleRegime::SymmetricFloor => "symmetric_floor",
                OracleRegime::DoublyStochastic => "doubly_stochastic",
                OracleRegime::Mixed => unreachable!("resolved above"),
            },
            n: config.n,
            clusters: (0..clustering.k())
                .map(|k| clustering.members(k).to_vec())
                .collect(),
            verdict,
            agree,
            detail,
        });
        sets.push(set);
    }
    Ok((
        OracleSummary {
            cases: config.cases,
            disagreements,
            records,
        },
        sets,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn healthy_corpus_has_no_disagreements() {
        let config = OracleConfig {
            cases: 12,
            n: 4,
            seed: 5,
            ..OracleConfig::default()
        };
        let summary = run_oracle(&config).unwrap();
        assert_eq!(summary.cases, 12);
        assert_eq!(summary.records.len(), 12);
        assert!(
            summary.all_agree(),
            "unexpected disagreements: {:#?}",
            summary
                .records
                .iter()
                .filter(|r| !r.agree)
                .collect::<Vec<_>>()
        );
        let accepted = summary
            .records
            .iter()
            .filter(|r| r.verdict == Some(Verdict::ConsensusSet))
            .count();
        let rejected = summary
            .records
            .iter()
            .filter(|r| r.verdict == Some(Verdict::NotConsensusSet))
            .count();
        assert!(accepted > 0, "corpus produced no accepted sets");
        assert!(rejected > 0, "corpus produced no rejected sets");
    }

    #[test]
    fn injected_defect_is_caught() {
        let config = OracleConfig {
            cases: 12,
            n: 4,
            seed: 5,
            inject_skip_liveness: true,
            ..OracleConfig::default()
        };
        let summary = run_oracle(&config).unwrap();
        assert!(summary.disagreements > 0);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let config = OracleConfig {
            n: 6,
            ..OracleConfig::default()
        };
        assert!(matches!(
            run_oracle(&config),
            Err(Error::DimensionTooLarge { n: 6, cap: 5, .. })
        ));
    }

    #[test]
    fn five_vertex_cases_stay_within_budget() {
        let config = OracleConfig {
            cases: 6,
            n: 5,
            seed: 17,
            ..OracleConfig::default()
        };
        let summary = run_oracle(&config).unwrap();
        assert!(summary.all_agree());
    }
}
