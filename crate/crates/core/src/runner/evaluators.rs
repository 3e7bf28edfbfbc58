use std::path::Path;

use super::config::{EvaluatorRule, ExperimentConfig};
use super::log::RunLog;
use super::train::solve_or_best;
use crate::error::{Error, Result};
use crate::game::{GameSpec, PolicyParams};
use crate::metagame::{build_payoff_matrix, Sampling};
use crate::par::Execution;

pub fn run_log_path(log_dir: &Path, run_id: &str) -> std::path::PathBuf {
    log_dir.join(format!("{run_id}.jsonl"))
}

/// Builds an evaluator population. `from_run` rules are resolved against
/// `log_dir`.
pub fn make_evaluators(rule: &EvaluatorRule, game: &GameSpec, log_dir: &Path) -> Result<Vec<PolicyParams>> {
    let evaluators = match rule {
        EvaluatorRule::GroundTruthModes => match game {
            GameSpec::GmmRps(spec) => {
                spec.mode_centers().iter().map(|c| PolicyParams::new(c.to_vec())).collect::<Result<Vec<_>>>()?
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "ground_truth_modes needs enumerable modes; {} has none",
                    other.name()
                )))
            }
        },
        EvaluatorRule::FromRun { run_id } => {
            let log = RunLog::read_jsonl(&run_log_path(log_dir, run_id))?;
            log.final_params().ok_or_else(|| Error::input(format!("run {run_id} has no final parameters")))?
        }
        EvaluatorRule::Frozen { params } => params.clone(),
    };
    if evaluators.is_empty() {
        return Err(Error::input("evaluator set is empty"));
    }
    if let Some(p) = evaluators.iter().find(|p| p.dim() != crate::game::TwoPlayerGame::dimension(game)) {
        return Err(Error::input(format!("evaluator has dimension {}, game expects another", p.dim())));
    }
    Ok(evaluators)
}

/// Resolves every evaluator set named in `config`.
pub fn resolve_evaluator_sets(config: &ExperimentConfig, log_dir: &Path) -> Result<Vec<(String, Vec<PolicyParams>)>> {
    config
        .evaluators
        .iter()
        .map(|set| Ok((set.name.clone(), make_evaluators(&set.rule, &config.game, log_dir)?)))
        .collect()
}

/// RPP of `population` against `evaluators` from deterministic payoffs.
pub fn evaluate_population(
    population: &[PolicyParams],
    evaluators: &[PolicyParams],
    game: &GameSpec,
    tol: f64,
    exec: Execution,
) -> Result<f64> {
    let a = build_payoff_matrix(population, evaluators, game, Sampling::Deterministic, exec)?;
    let (sol, _) = solve_or_best(&a.entries, tol)?;
    Ok(sol.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{BlottoSpec, GmmRpsSpec};

    #[test]
    fn ground_truth_modes() {
        let spec = GmmRpsSpec::new(3).unwrap();
        let ev =
            make_evaluators(&EvaluatorRule::GroundTruthModes, &GameSpec::GmmRps(spec.clone()), Path::new(".")).unwrap();
        assert_eq!(ev.len(), 3);
        for (e, c) in ev.iter().zip(spec.mode_centers()) {
            assert_eq!(e.as_slice(), &c[..]);
        }
        let blotto = GameSpec::Blotto(BlottoSpec::default());
        assert!(matches!(
            make_evaluators(&EvaluatorRule::GroundTruthModes, &blotto, Path::new(".")),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn frozen_dimension_checked() {
        let game = GameSpec::GmmRps(GmmRpsSpec::new(3).unwrap());
        let rule = EvaluatorRule::Frozen { params: vec![PolicyParams::new(vec![1.0]).unwrap()] };
        assert!(make_evaluators(&rule, &game, Path::new(".")).is_err());
    }

    #[test]
    fn missing_run_is_io_error() {
        let game = GameSpec::GmmRps(GmmRpsSpec::new(3).unwrap());
        let rule = EvaluatorRule::FromRun { run_id: "does-not-exist".into() };
        assert!(matches!(make_evaluators(&rule, &game, Path::new("/nonexistent")), Err(Error::Io(_))));
    }
}
