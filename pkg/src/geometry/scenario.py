"""
Synthetic Scenario Module
Piecewise-stationary loss sequences with changing optimal decisions
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.geometry.domain import DomainSpec, project
from src.geometry.losses import LossFunction
from src.utils.errors import ContractViolation


@dataclass(frozen=True)
class Scenario:
    """Stage s covers rounds [stage_starts[s], stage_starts[s+1] − 1]; the last stage ends at T"""
    horizon: int
    domain: DomainSpec
    stage_starts: Tuple[int, ...]
    stage_targets: Tuple[Tuple[float, ...], ...]
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'stage_starts', tuple(int(s) for s in self.stage_starts))
        object.__setattr__(self, 'stage_targets', tuple(tuple(float(x) for x in v) for v in self.stage_targets))

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def validate(self) -> None:
        if self.horizon < 1:
            raise ContractViolation(f"horizon must be positive, got {self.horizon}")
        if not self.stage_starts:
            raise ContractViolation("scenario needs at least one stage")
        if len(self.stage_starts) != len(self.stage_targets):
            raise ContractViolation("one target is required per stage")
        if self.stage_starts[0] != 1:
            raise ContractViolation("the first stage must start at round 1")
        if any(b <= a for a, b in zip(self.stage_starts, self.stage_starts[1:])):
            raise ContractViolation("stage starts must be strictly increasing")
        if self.stage_starts[-1] > self.horizon:
            raise ContractViolation("every stage must start within the horizon")
        if self.jitter < 0:
            raise ContractViolation("jitter must be nonnegative")
        for target in self.stage_targets:
            if len(target) != self.dimension:
                raise ContractViolation(f"stage target {target} has the wrong dimension")
            if not self.domain.contains(np.asarray(target)):
                raise ContractViolation(f"stage target {target} lies outside the domain")

    def stages(self) -> List[Tuple[int, int]]:
        ends = [s - 1 for s in self.stage_starts[1:]] + [self.horizon]
        return list(zip(self.stage_starts, ends))

    def to_dict(self) -> dict:
        return {
            'horizon': self.horizon,
            'domain': self.domain.to_dict(),
            'stage_starts': list(self.stage_starts),
            'stage_targets': [list(t) for t in self.stage_targets],
            'jitter': self.jitter,
            'seed': self.seed,
        }


def round_targets(scenario: Scenario) -> np.ndarray:
    """Per-round targets θ_t, shape (T, d)"""
    scenario.validate()
    rng = np.random.default_rng(scenario.seed)
    targets = np.empty((scenario.horizon, scenario.dimension))
    for (start, end), stage_target in zip(scenario.stages(), scenario.stage_targets):
        base = np.asarray(stage_target)
        for t in range(start, end + 1):
            point = base
            if scenario.jitter > 0:
                point = project(base + scenario.jitter * rng.standard_normal(scenario.dimension), scenario.domain)
            targets[t - 1] = point
    return targets


def generate_scenario(scenario: Scenario) -> List[LossFunction]:
    """Deterministic loss sequence f_1..f_T for the scenario"""
    diameter = scenario.domain.diameter
    return [LossFunction.shifted_quadratic(theta, diameter) for theta in round_targets(scenario)]


def piecewise_scenario(horizon: int, domain: DomainSpec, targets: Sequence[Sequence[float]],
                       jitter: float = 0.0, seed: int = 0) -> Scenario:
    """Equal-length stages, one per target"""
    count = len(targets)
    if count == 0:
        raise ContractViolation("scenario needs at least one stage")
    starts = [1 + (k * horizon) // count for k in range(count)]
    return Scenario(horizon, domain, tuple(starts), tuple(tuple(t) for t in targets), jitter, seed)
