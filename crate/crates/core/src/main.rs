//! Command line front end.
//!
//! Exit codes: 0 for a positive or valid outcome, 2 when only the
//! necessary conditions passed, 3 for a rejection or an invalid witness,
//! 4 when cross-validation disagrees, 1 for operational errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cluster_consensus::document::{load_set, load_witness, save_witness, write_text};
use cluster_consensus::oracle::{run_oracle, OracleConfig, OracleRegime};
use cluster_consensus::simulator::{
    detect_cluster_consensus, run, trajectory_csv, witness_initial_state, SwitchingPolicy,
};
use cluster_consensus::{
    decide, decide_necessary_only, verify_witness, DecideOptions, Error, Verdict,
};

#[derive(Parser)]
#[command(
    name = "cluster-consensus",
    version,
    about = "Exact decision toolkit for cluster consensus of switched linear agreement systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance document and report its structural assumptions.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide whether the instance is a cluster consensus set.
    Decide {
        #[arg(long)]
        input: PathBuf,
        /// Write the witness here when the set is rejected.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Run the search without requiring the structural regime; the
        /// positive verdict is then unavailable.
        #[arg(long)]
        necessary_only: bool,
        #[arg(long, default_value_t = 5_000_000)]
        state_budget: usize,
        #[arg(long, hide = true)]
        inject_skip_liveness: bool,
    },
    /// Check a witness document against an instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Run the system under a switching policy and report convergence.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        /// One of: random, sequence:n1,n2,.., periodic:n1,n2,.., witness.
        #[arg(long, default_value = "random")]
        policy: String,
        /// Witness document for the witness policy.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated initial state; defaults to an evenly spaced
        /// ramp, or to the witness-prescribed state under the witness
        /// policy.
        #[arg(long)]
        x0: Option<String>,
        /// Write the trajectory as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate the decision procedure on generated instances.
    Oracle {
        #[arg(long, default_value_t = 20)]
        cases: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        set_size: usize,
        #[arg(long, value_enum, default_value_t = RegimeArg::Mixed)]
        regime: RegimeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, hide = true)]
        inject_skip_liveness: bool,
        /// Write the full per-case records here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    SymmetricFloor,
    DoublyStochastic,
    Mixed,
}

impl From<RegimeArg> for OracleRegime {
    fn from(value: RegimeArg) -> Self {
        match value {
            RegimeArg::SymmetricFloor => OracleRegime::SymmetricFloor,
            RegimeArg::DoublyStochastic => OracleRegime::DoublyStochastic,
            RegimeArg::Mixed => OracleRegime::Mixed,
        }
    }
}

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_NECESSARY_ONLY: u8 = 2;
const EXIT_REJECTED: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn ramp_state(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Errors that describe a broken instance rather than a broken run.
fn is_validation_error(e: &Error) -> bool {
    !matches!(e, Error::Io { .. } | Error::Parse { .. })
}

fn dispatch(command: Command) -> Result<u8, Error> {
    match command {
        Command::Validate { input } => validate(&input),
        Command::Decide {
            input,
            witness,
            necessary_only,
            state_budget,
            inject_skip_liveness,
        } => decide_cmd(
            &input,
            witness.as_deref(),
            necessary_only,
            state_budget,
            inject_skip_liveness,
        ),
        Command::Verify { input, witness } => verify_cmd(&input, &witness),
        Command::Simulate {
            input,
            policy,
            witness,
            horizon,
            eps,
            seed,
            x0,
            out,
        } => simulate_cmd(
            &input,
            &policy,
            witness.as_deref(),
            horizon,
            eps,
            seed,
            x0.as_deref(),
            out.as_deref(),
        ),
        Command::Oracle {
            cases,
            n,
            set_size,
            regime,
            seed,
            horizon,
            eps,
            inject_skip_liveness,
            out,
        } => oracle_cmd(OracleConfig {
            cases,
            n,
            set_size,
            regime: regime.into(),
            seed,
            horizon,
            eps,
            inject_skip_liveness,
        }, out.as_deref()),
    }
}

fn validate(input: &Path) -> Result<u8, Error> {
    let set = match load_set(input) {
        Ok(set) => set,
        Err(e) if is_validation_error(&e) => {
            emit(&json!({ "valid": false, "error": e.to_string() }));
            return Ok(EXIT_REJECTED);
        }
        Err(e) => return Err(e),
    };
    let report = set.check_assumptions();
    emit(&json!({
        "valid": true,
        "n": set.n(),
        "matrices": set.names(),
        "clusters": (0..set.clustering().k())
            .map(|k| set.clustering().members(k).to_vec())
            .collect::<Vec<_>>(),
        "assumptions": report,
    }));
    Ok(EXIT_OK)
}

fn decide_cmd(
    input: &Path,
    witness_path: Option<&Path>,
    necessary_only: bool,
    state_budget: usize,
    inject_skip_liveness: bool,
) -> Result<u8, Error> {
    let set = load_set(input)?;
    let opts = DecideOptions {
        state_budget,
        skip_liveness_fixpoint: inject_skip_liveness,
        ..DecideOptions::default()
    };
    let result = if necessary_only {
        decide_necessary_only(&set, &opts)?
    } else {
        decide(&set, &opts)?
    };
    if let (Some(path), Some(w)) = (witness_path, result.witness.as_ref()) {
        save_witness(path, w)?;
    }
    emit(&json!({
        "verdict": result.verdict,
        "stats": result.stats,
        "witness": result.witness,
    }));
    Ok(match result.verdict {
        Verdict::ConsensusSet => EXIT_OK,
        Verdict::NecessaryOnlyPassed => EXIT_NECESSARY_ONLY,
        Verdict::NotConsensusSet => EXIT_REJECTED,
    })
}

fn verify_cmd(input: &Path, witness: &Path) -> Result<u8, Error> {
    let set = load_set(input)?;
    let w = load_witness(witness)?;
    let report = verify_witness(&w, &set)?;
    if report.valid {
        emit(&json!({ "valid": true }));
        Ok(EXIT_OK)
    } else {
        let violation = report.violation.expect("invalid report names a violation");
        emit(&json!({ "valid": false, "violation": violation.to_string() }));
        Ok(EXIT_REJECTED)
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    input: &Path,
    policy: &str,
    witness_path: Option<&Path>,
    horizon: usize,
    eps: f64,
    seed: u64,
    x0: Option<&str>,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let set = load_set(input)?;
    let names = |csv: &str| -> Vec<String> {
        csv.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    };
    let (policy, default_x0) = if policy == "random" {
        (SwitchingPolicy::UniformRandom { seed }, ramp_state(set.n()))
    } else if let Some(rest) = policy.strip_prefix("sequence:") {
        (SwitchingPolicy::FixedSequence(names(rest)), ramp_state(set.n()))
    } else if let Some(rest) = policy.strip_prefix("periodic:") {
        (SwitchingPolicy::Periodic(names(rest)), ramp_state(set.n()))
    } else if policy == "witness" {
        let Some(path) = witness_path else {
            return Err(Error::Policy {
                detail: "the witness policy needs --witness".to_string(),
            });
        };
        let w = load_witness(path)?;
        let x0 = witness_initial_state(&w, set.n());
        (SwitchingPolicy::WitnessReplay(w), x0)
    } else {
        return Err(Error::Policy {
            detail: format!(
                "unknown policy {policy:?}; use random, sequence:.., periodic:.. or witness"
            ),
        });
    };
    let x0 = match x0 {
        Some(text) => text
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|e| Error::Parse {
                    context: "initial state".to_string(),
                    detail: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => default_x0,
    };
    let trajectory = run(&set, &policy, &x0, horizon)?;
    let profile = detect_cluster_consensus(&trajectory, set.clustering(), eps);
    if let Some(path) = out {
        write_text(path, &trajectory_csv(&trajectory))?;
    }
    emit(&json!({
        "steps": trajectory.len(),
        "applied": trajectory.applied,
        "profile": profile,
        "final_state": trajectory.final_state(),
        "final_spread": trajectory.final_spread(),
        "min_spread": trajectory.min_spread(),
    }));
    Ok(EXIT_OK)
}

fn oracle_cmd(config: OracleConfig, out: Option<&Path>) -> Result<u8, Error> {
    let summary = run_oracle(&config)?;
    if let Some(path) = out {
        write_text(
            path,
            &serde_json::to_string_pretty(&summary).expect("serializable"),
        )?;
    }
    emit(&json!({
        "cases": summary.cases,
        "disagreements": summary.disagreements,
        "verdicts": summary
            .records
            .iter()
            .map(|r| json!({
                "index": r.index,
                "regime": r.regime,
                "verdict": r.verdict,
                "agree": r.agree,
                "detail": r.detail,
            }))
            .collect::<Vec<_>>(),
    }));
    Ok(if summary.all_agree() {
        EXIT_OK
    } else {
        EXIT_DISAGREEMENT
    })
}
