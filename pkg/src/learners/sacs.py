"""
Strongly Adaptive algorithm for Convex and Smooth functions (SACS)
One SOGD expert is started every round and lives for its CGC interval;
AdaNormalHedge combines the active experts' predictions
"""

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from src.geometry.domain import DomainSpec
from src.geometry.losses import LossFunction
from src.intervals.covering import cgc_cover, cgc_interval_at
from src.learners.base import OnlineLearner, RoundRecord
from src.learners.meta import ActiveSet, ExpertRecord, c_of_t, normalized_weights, update_records
from src.learners.sogd import DEFAULT_DELTA, sogd_init
from src.utils.errors import ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def combine_predictions(active: ActiveSet) -> Tuple[np.ndarray, np.ndarray]:
    """Weights p over S_t and the convex combination w_t = Σ p_i·w_{t,i}"""
    probabilities = normalized_weights(active)
    points = np.stack([record.expert.w for record in active])
    return probabilities, probabilities @ points


class SacsLearner(OnlineLearner):
    """Each round starts E_t for its CGC interval, predicts the weighted average of
    the active experts, retires experts whose interval ends at t and forwards f_t"""

    name = 'sacs'

    def __init__(self, domain: DomainSpec, delta: float = DEFAULT_DELTA):
        if not delta > 0:
            raise ContractViolation(f"delta must be positive, got {delta}")
        self.domain = domain
        self.delta = delta
        self.t = 0
        self.active = ActiveSet()
        # start round -> last round the expert predicted
        self.lifetimes: Dict[int, int] = {}
        self.max_active = 0

    def play(self, f: LossFunction) -> RoundRecord:
        self.t += 1
        t = self.t

        end = cgc_interval_at(t).end
        self.active.add(ExpertRecord(start=t, expert=sogd_init(self.domain, self.delta), end_round=end))
        logger.debug(f"Round {t}: started expert E_{t} for [{t}, {end}]")

        _, w_t = combine_predictions(self.active)
        learner_loss = f.value(w_t)
        expert_losses = {record.start: f.value(record.expert.w) for record in self.active}
        active_count = len(self.active)
        self.max_active = max(self.max_active, active_count)

        expired = [record.start for record in self.active if record.end_round == t]
        for record in self.active.remove(expired):
            self.lifetimes[record.start] = t
        for record in self.active:
            self.lifetimes[record.start] = t

        update_records(self.active, learner_loss, expert_losses)
        for record in self.active:
            record.expert.step(f)

        return RoundRecord(t, w_t, learner_loss, active_count, expert_losses=expert_losses)

    def summary(self) -> Dict[str, object]:
        return {'experts_created': self.t, 'max_active_experts': self.max_active}


@dataclass
class BoundParams:
    a: float
    b: float
    v: int


def a_of_t(t: int, H: float, D: float, delta: float) -> float:
    """a(t) = 9/2·ln(4t²) + 18HD² + 2D√(2δ)"""
    return 1.5 * c_of_t(t) + 18.0 * H * D ** 2 + 2.0 * D * math.sqrt(2.0 * delta)


def b_of_t(t: int, H: float, D: float) -> float:
    """b(t) = 24·ln(4t²) + 16HD²"""
    return 8.0 * c_of_t(t) + 16.0 * H * D ** 2


def cgc_interval_bound(t: int, comparator_loss: float, H: float, D: float, delta: float,
                       a_scale: float = 1.0) -> float:
    """Regret bound over [i, t] for t inside a CGC interval starting at i: a(t) + √(b(t)·L)"""
    return a_scale * a_of_t(t, H, D, delta) + math.sqrt(b_of_t(t, H, D) * comparator_loss)


def sacs_interval_params(r: int, s: int, H: float, D: float, delta: float) -> BoundParams:
    return BoundParams(a_of_t(s, H, D, delta), b_of_t(s, H, D), cgc_cover(r, s).v)


def sacs_interval_bound(r: int, s: int, comparator_loss: float, H: float, D: float, delta: float,
                        a_scale: float = 1.0) -> float:
    """v·a(s) + √(v·b(s)·L) with v the length of the greedy CGC cover of [r, s]

    `a_scale` exists only to weaken the bound deliberately when testing that the
    auditor can fail.
    """
    if comparator_loss < 0:
        raise ContractViolation("comparator loss must be nonnegative")
    params = sacs_interval_params(r, s, H, D, delta)
    return params.v * a_scale * params.a + math.sqrt(params.v * params.b * comparator_loss)
