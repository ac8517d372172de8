"""
Experiment Runner Module
Builds the configured learner, plays it over the scenario, audits the
trace and persists trace + summary. Seed batches fan out on a thread pool.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from src.analysis.regret_audit import AuditResult, audit_run, bound_slack_summary
from src.experiments.trace_log import (
    SUMMARY_FILE, TRACE_FILE, RunTrace, read_summary, read_trace, scenario_hash, trace_aggregates,
    write_summary, write_trace,
)
from src.geometry.losses import LossFunction
from src.geometry.scenario import Scenario, generate_scenario
from src.learners.base import OnlineLearner
from src.learners.sacs import SacsLearner
from src.learners.sacs_cpgc import SacsCpgcLearner
from src.learners.sogd import OgdConstantLearner, SogdLearner, ogd_bound, ogd_step_size
from src.utils.config import RunConfig, worker_threads
from src.utils.errors import ConfigError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2

AUDIT_SUMMARY_FILE = 'audit_summary.json'


@dataclass
class RunOutcome:
    seed: int
    directory: Optional[Path]
    trace: RunTrace
    audit: AuditResult
    summary: Dict[str, object]

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.audit.passed else EXIT_VIOLATION


def build_learner(config: RunConfig, scenario: Scenario) -> OnlineLearner:
    domain = scenario.domain
    if config.learner == 'sogd':
        return SogdLearner(domain, config.delta)
    if config.learner == 'ogd-constant':
        ogd = config.resolved_ogd()
        return OgdConstantLearner(domain, config.smoothness, ogd['B'], ogd['L'])
    if config.learner == 'sacs':
        return SacsLearner(domain, config.delta)
    return SacsCpgcLearner(domain, config.smoothness, config.delta, config.resolved_threshold())


def prepare(config: RunConfig) -> Tuple[Scenario, List[LossFunction]]:
    scenario = config.scenario.build(config.seed)
    return scenario, generate_scenario(scenario)


def execute(config: RunConfig) -> Tuple[RunTrace, Scenario, List[LossFunction]]:
    """Play the learner over the scenario and collect its trace"""
    scenario, losses = prepare(config)
    learner = build_learner(config, scenario)
    records = learner.run(losses)
    trace = RunTrace.from_records(config.learner, records, scenario.to_dict(), config.seed)
    logger.info(f"Ran {config.learner} for T={scenario.horizon} (seed {config.seed}), "
                f"total loss {float(trace.learner_losses.sum()):.6g}")
    return trace, scenario, losses


def audit_trace(config: RunConfig, trace: RunTrace, scenario: Scenario,
                losses: Sequence[LossFunction]) -> AuditResult:
    return audit_run(trace, losses, scenario.domain, config.bound_context(),
                     config.audit.to_plan(config.seed), scenario.stages())


def build_summary(config: RunConfig, trace: RunTrace, audit: AuditResult) -> Dict[str, object]:
    """Summary document; a pure function of the config and the trace"""
    fingerprint = config.fingerprint()
    aggregates = trace_aggregates(trace)
    if config.learner == 'ogd-constant':
        ogd = config.resolved_ogd()
        aggregates['step_size'] = ogd_step_size(config.smoothness, ogd['B'], ogd['L'])
        aggregates['regret_bound'] = ogd_bound(config.smoothness, ogd['B'], ogd['L'])
    return {
        'config': fingerprint,
        'audit_settings': config.audit.model_dump(),
        'scenario_hash': scenario_hash(fingerprint),
        'aggregates': aggregates,
        'tightest_margins': bound_slack_summary(audit),
        'audit': audit.to_dict(),
    }


def run_experiment(config: RunConfig, output_dir: Optional[Path] = None) -> RunOutcome:
    """Run, audit and (when a directory is given) write trace.csv, experts.csv and summary.json"""
    trace, scenario, losses = execute(config)
    audit = audit_trace(config, trace, scenario, losses)
    summary = build_summary(config, trace, audit)
    directory = Path(output_dir) if output_dir is not None else None
    if directory is not None:
        write_trace(trace, directory)
        write_summary(summary, directory)
        logger.info(f"Results written to {directory}")
    return RunOutcome(config.seed, directory, trace, audit, summary)


def run_batch(config: RunConfig, output_dir: Optional[Path] = None,
              threads: Optional[int] = None) -> List[RunOutcome]:
    """One run per seed in `config.seeds`, each in its own seed_<n> sub-directory"""
    seeds = config.seeds or [config.seed]
    threads = threads or worker_threads()
    base = Path(output_dir) if output_dir is not None else None

    def one(seed: int) -> RunOutcome:
        target = base / f"seed_{seed}" if base is not None and config.seeds else base
        return run_experiment(config.with_seed(seed), target)

    with ThreadPoolExecutor(max_workers=min(threads, len(seeds))) as pool:
        outcomes = list(pool.map(one, seeds))

    failed = [outcome.seed for outcome in outcomes if not outcome.audit.passed]
    if failed:
        logger.warning(f"Bound violations for seeds {failed}")
    return outcomes


def batch_exit_code(outcomes: Sequence[RunOutcome]) -> int:
    return max((outcome.exit_code for outcome in outcomes), default=EXIT_PASS)


def audit_from_files(trace_path: Path, config: RunConfig, output: Optional[Path] = None) -> RunOutcome:
    """Re-audit a stored trace; a sibling summary.json must carry the same scenario hash"""
    trace_path = Path(trace_path)
    if trace_path.is_dir():
        trace_path = trace_path / TRACE_FILE
    summary_path = trace_path.with_name(SUMMARY_FILE)
    if summary_path.exists():
        document = read_summary(summary_path)
        stored_seed = (document.get('config') or {}).get('seed')
        if config.seeds and stored_seed in config.seeds:
            # one member of a seed batch
            config = config.with_seed(stored_seed)
        stored = document.get('scenario_hash')
        expected = scenario_hash(config.fingerprint())
        if stored != expected:
            raise ConfigError('trace was produced under a different configuration', field='scenario_hash')

    scenario, losses = prepare(config)
    trace = read_trace(trace_path, config.learner, expected_horizon=scenario.horizon)
    trace.scenario, trace.seed = scenario.to_dict(), config.seed
    audit = audit_trace(config, trace, scenario, losses)
    summary = build_summary(config, trace, audit)

    output = Path(output) if output is not None else trace_path.with_name(AUDIT_SUMMARY_FILE)
    write_summary(summary, output.parent, output.name)
    return RunOutcome(config.seed, output.parent, trace, audit, summary)
