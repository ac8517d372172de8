"""
Configuration Management Module
Run configuration documents (JSON, or YAML by extension), environment
settings and validation against the learners' preconditions
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.analysis.regret_audit import EXHAUSTIVE_LIMIT, AuditPlan, BoundContext
from src.geometry.domain import DomainSpec
from src.geometry.scenario import Scenario, piecewise_scenario
from src.learners.sacs_cpgc import threshold_floor
from src.learners.sogd import DEFAULT_DELTA, default_ogd_radius
from src.utils.errors import ConfigError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

LearnerKind = Literal['sogd', 'ogd-constant', 'sacs', 'sacs-cpgc']
MAX_DIAGRAM_HORIZON = 2 ** 16


class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid')


class DomainConfig(_Strict):
    """Euclidean ball (radius) or axis box (halfwidths) around `center`"""
    kind: Literal['ball', 'box'] = 'ball'
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    radius: float = Field(default=1.0, gt=0)
    halfwidths: Optional[List[float]] = None

    @model_validator(mode='after')
    def _box_needs_halfwidths(self):
        if self.kind == 'box':
            if self.halfwidths is None or len(self.halfwidths) != len(self.center):
                raise ValueError('a box needs one positive halfwidth per coordinate')
            if any(h <= 0 for h in self.halfwidths):
                raise ValueError('halfwidths must be positive')
        return self

    def build(self) -> DomainSpec:
        if self.kind == 'box':
            return DomainSpec.box(self.center, self.halfwidths)
        return DomainSpec.ball(self.center, self.radius)


class ScenarioConfig(_Strict):
    """Piecewise-stationary shifted quadratics; equal stages unless starts are given"""
    horizon: int = Field(default=2048, ge=1)
    domain: DomainConfig = Field(default_factory=DomainConfig)
    stage_targets: List[List[float]] = Field(
        default_factory=lambda: [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]])
    stage_starts: Optional[List[int]] = None
    jitter: float = Field(default=0.0, ge=0)

    @field_validator('stage_targets')
    @classmethod
    def _non_empty(cls, value):
        if not value:
            raise ValueError('at least one stage target is required')
        return value

    def build(self, seed: int = 0) -> Scenario:
        domain = self.domain.build()
        if self.stage_starts is None:
            return piecewise_scenario(self.horizon, domain, self.stage_targets, self.jitter, seed)
        return Scenario(self.horizon, domain, tuple(self.stage_starts),
                        tuple(tuple(t) for t in self.stage_targets), self.jitter, seed)


class AuditConfig(_Strict):
    """Interval family and extra checks of the audit"""
    dyadic: bool = True
    sampled: int = Field(default=1000, ge=0)
    exhaustive: bool = False
    stages: bool = True
    extra_comparators: int = Field(default=3, ge=0)
    a_scale: float = Field(default=1.0, ge=0)
    stage_regret_ratio: Optional[float] = Field(default=None, gt=0)
    min_stage_length: int = Field(default=512, ge=1)

    def to_plan(self, seed: int) -> AuditPlan:
        return AuditPlan(
            dyadic=self.dyadic, sampled=self.sampled, exhaustive=self.exhaustive, stages=self.stages,
            extra_comparators=self.extra_comparators, seed=seed, a_scale=self.a_scale,
            stage_regret_ratio=self.stage_regret_ratio, min_stage_length=self.min_stage_length,
        )


class RunConfig(_Strict):
    learner: LearnerKind = 'sacs'
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    delta: float = Field(default=DEFAULT_DELTA, gt=0)
    threshold: Optional[float] = Field(default=None, gt=0)
    ogd_radius: Optional[float] = Field(default=None, gt=0)
    ogd_loss_level: Optional[float] = Field(default=None, ge=0)
    audit: AuditConfig = Field(default_factory=AuditConfig)
    output_dir: Optional[str] = None
    seed: int = 0
    seeds: Optional[List[int]] = None

    @property
    def diameter(self) -> float:
        return self.scenario.domain.build().diameter

    @property
    def smoothness(self) -> float:
        """H of the shifted quadratics, 1/D²"""
        return 1.0 / self.diameter ** 2

    def resolved_threshold(self) -> Optional[float]:
        if self.learner != 'sacs-cpgc':
            return None
        if self.threshold is not None:
            return self.threshold
        return max(threshold_floor(self.smoothness, self.diameter, self.delta), 1.0)

    def resolved_ogd(self) -> Dict[str, float]:
        """B defaults to D/√2; L defaults to T/2, an upper bound on any comparator's loss"""
        domain = self.scenario.domain.build()
        return {
            'B': self.ogd_radius if self.ogd_radius is not None else default_ogd_radius(domain),
            'L': self.ogd_loss_level if self.ogd_loss_level is not None else self.scenario.horizon / 2.0,
        }

    def bound_context(self) -> BoundContext:
        ogd = self.resolved_ogd() if self.learner == 'ogd-constant' else {'B': None, 'L': None}
        return BoundContext(self.learner, self.smoothness, self.diameter, self.delta,
                            self.resolved_threshold(), ogd['B'], ogd['L'])

    def with_seed(self, seed: int) -> 'RunConfig':
        return self.model_copy(update={'seed': seed, 'seeds': None})

    def fingerprint(self) -> Dict[str, Any]:
        """Settings that determine the trace, echoed into summaries and hashed"""
        return {
            'learner': self.learner,
            'scenario': self.scenario.model_dump(),
            'delta': self.delta,
            'threshold': self.resolved_threshold(),
            'ogd': self.resolved_ogd() if self.learner == 'ogd-constant' else None,
            'seed': self.seed,
        }


def _field_path(error: Dict[str, Any]) -> str:
    return '.'.join(str(part) for part in error.get('loc', ())) or 'config'


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a decoded document; the first error names its dotted field"""
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first.get('msg', 'invalid value'), field=_field_path(first)) from e
    status = validate_config(config)
    for warning in status['warnings']:
        logger.warning(warning)
    if status['errors']:
        field, message = status['errors'][0]
        raise ConfigError(message, field=field)
    return config


def validate_config(config: RunConfig) -> Dict[str, Any]:
    """Cross-field checks; returns {'valid', 'warnings', 'errors'} with errors as (field, message)"""
    status: Dict[str, Any] = {'valid': True, 'warnings': [], 'errors': []}

    try:
        config.scenario.build(config.seed).validate()
    except ValueError as e:
        status['errors'].append(('scenario', str(e)))

    if config.learner == 'sacs-cpgc' and config.threshold is not None:
        floor = threshold_floor(config.smoothness, config.diameter, config.delta)
        if config.threshold < floor:
            status['errors'].append(
                ('threshold', f"C={config.threshold} is below the floor 20HD² + 2D√(2δ) = {floor:.6g}"))

    if config.threshold is not None and config.learner != 'sacs-cpgc':
        status['warnings'].append(f"threshold is ignored by learner {config.learner}")

    if config.learner == 'ogd-constant':
        domain = config.scenario.domain.build()
        if not domain.contains([0.0] * domain.dimension):
            status['errors'].append(('scenario.domain', 'constant-step OGD needs the origin inside the domain'))

    if config.audit.exhaustive and config.scenario.horizon > EXHAUSTIVE_LIMIT:
        status['errors'].append(('audit.exhaustive', f"exhaustive audits need horizon ≤ {EXHAUSTIVE_LIMIT}"))

    if not (config.audit.dyadic or config.audit.sampled or config.audit.stages or config.audit.exhaustive):
        status['warnings'].append('the audit interval family is empty')

    if config.audit.a_scale != 1.0:
        status['warnings'].append(f"audit bounds are scaled by a_scale={config.audit.a_scale}")

    status['valid'] = not status['errors']
    return status


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read a JSON document, or YAML when the file ends in .yaml / .yml"""
    path = Path(path)
    try:
        with open(path, 'r') as f:
            if path.suffix.lower() in ('.yaml', '.yml'):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", field=str(path)) from e
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse config: {e}", field=str(path)) from e

    if not isinstance(data, dict):
        raise ConfigError('the config document must be a mapping', field=str(path))

    config = parse_run_config(data)
    logger.info(f"Loaded {config.learner} configuration from {path}")
    return config


def default_run_config(learner: LearnerKind = 'sacs') -> RunConfig:
    return RunConfig(learner=learner)


def render_template(learner: LearnerKind = 'sacs', fmt: str = 'json') -> str:
    document = default_run_config(learner).model_dump(exclude_none=True)
    if fmt == 'yaml':
        return yaml.safe_dump(document, default_flow_style=False, sort_keys=False)
    return json.dumps(document, indent=2)


def load_environment(config_dir: Union[str, Path] = 'config') -> bool:
    """Load config/adaregret.env if present; variables already set win"""
    env_file = Path(config_dir) / 'adaregret.env'
    if env_file.exists():
        load_dotenv(env_file, override=False)
        logger.debug(f"Loaded environment from {env_file}")
        return True
    return False


def worker_threads() -> int:
    """ADAREGRET_THREADS, at least 1"""
    raw = os.getenv('ADAREGRET_THREADS', '1')
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", field='ADAREGRET_THREADS')


def horizon_for_diagram(horizon: int) -> int:
    if not 1 <= horizon <= MAX_DIAGRAM_HORIZON:
        raise ConfigError(f"horizon must lie in [1, {MAX_DIAGRAM_HORIZON}]", field='horizon')
    return horizon


__all__ = [
    'DomainConfig', 'ScenarioConfig', 'AuditConfig', 'RunConfig', 'parse_run_config', 'validate_config',
    'load_run_config', 'default_run_config', 'render_template', 'load_environment', 'worker_threads',
    'horizon_for_diagram',
]
