"""
SACS with problem-dependent (CPGC) intervals
Markers are created online whenever the newest expert's cumulative loss
exceeds a threshold C; experts live for CGC intervals over marker indices.
Also holds the problem-dependent bound formulas.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from src.geometry.domain import DomainSpec
from src.geometry.losses import LossFunction
from src.intervals.covering import cgc_end_index, marker_cover
from src.learners.base import OnlineLearner, RoundRecord
from src.learners.meta import ActiveSet, ExpertRecord, update_records
from src.learners.sacs import combine_predictions
from src.learners.sogd import DEFAULT_DELTA, sogd_init
from src.utils.errors import ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def threshold_floor(H: float, D: float, delta: float) -> float:
    """Smallest admissible threshold: 20HD² + 2D√(2δ)"""
    return 20.0 * H * D ** 2 + 2.0 * D * math.sqrt(2.0 * delta)


def default_threshold(H: float, D: float, delta: float) -> float:
    return max(threshold_floor(H, D, delta), 1.0)


def validate_threshold(C: float, H: float, D: float, delta: float) -> float:
    floor = threshold_floor(H, D, delta)
    if C < floor:
        raise ContractViolation(f"threshold C={C} is below the admissible floor 20HD² + 2D√(2δ) = {floor:.6g}")
    return C


@dataclass
class MarkerState:
    """Bookkeeping for online marker generation"""
    threshold: float
    new_interval: bool = True
    m: int = 0
    n: int = 0
    latest_loss: float = 0.0
    markers: List[int] = field(default_factory=list)
    end_index: Dict[int, int] = field(default_factory=dict)


class SacsCpgcLearner(OnlineLearner):
    """SACS variant whose experts start only at markers and retire by marker end index g"""

    name = 'sacs-cpgc'

    def __init__(self, domain: DomainSpec, H: float, delta: float = DEFAULT_DELTA,
                 threshold: Optional[float] = None):
        if not delta > 0:
            raise ContractViolation(f"delta must be positive, got {delta}")
        D = domain.diameter
        C = default_threshold(H, D, delta) if threshold is None else validate_threshold(threshold, H, D, delta)
        self.domain = domain
        self.delta = delta
        self.H = H
        self.state = MarkerState(threshold=C)
        self.active = ActiveSet()
        self.t = 0
        self.lifetimes: Dict[int, int] = {}
        self.max_active = 0

    @property
    def threshold(self) -> float:
        return self.state.threshold

    @property
    def markers(self) -> List[int]:
        return self.state.markers

    def _open_interval(self, t: int) -> None:
        state = self.state
        state.m += 1
        g = cgc_end_index(state.m)
        self.active.add(ExpertRecord(start=t, expert=sogd_init(self.domain, self.delta), end_index=g))
        state.end_index[t] = g
        state.n = t
        state.latest_loss = 0.0
        state.markers.append(t)
        state.new_interval = False
        logger.debug(f"Round {t}: marker s_{state.m} opened, expert E_{t} removed at index {g}")

    def play(self, f: LossFunction) -> RoundRecord:
        self.t += 1
        t = self.t
        state = self.state

        marker_flag = state.new_interval
        if marker_flag:
            self._open_interval(t)

        _, w_t = combine_predictions(self.active)
        learner_loss = f.value(w_t)
        expert_losses = {record.start: f.value(record.expert.w) for record in self.active}
        active_count = len(self.active)
        self.max_active = max(self.max_active, active_count)
        for start in expert_losses:
            self.lifetimes[start] = t

        state.latest_loss += expert_losses[state.n]
        if state.latest_loss > state.threshold:
            state.new_interval = True
            closing = [record.start for record in self.active if record.end_index == state.m + 1]
            self.active.remove(closing)
            # every surviving expert must end at a later marker index
            stale = [record.start for record in self.active if record.end_index <= state.m + 1]
            if stale:
                raise RuntimeError(f"experts {stale} outlived their end index at marker {state.m}")

        update_records(self.active, learner_loss, expert_losses)
        for record in self.active:
            record.expert.step(f)

        return RoundRecord(t, w_t, learner_loss, active_count, marker_flag=marker_flag,
                           marker_count=state.m, expert_losses=expert_losses)

    def summary(self) -> Dict[str, object]:
        return {
            'experts_created': len(self.state.markers),
            'max_active_experts': self.max_active,
            'threshold': self.state.threshold,
            'markers': list(self.state.markers),
        }


def c_tilde(t: int, cumulative_comparator_loss: float, C: float) -> float:
    """3·ln(1 + 4L/C) + 3·ln((5 + 3·ln(1+t)) / 2)"""
    if t < 1 or C <= 0 or cumulative_comparator_loss < 0:
        raise ContractViolation("c_tilde needs t ≥ 1, C > 0 and a nonnegative loss")
    return (3.0 * math.log1p(4.0 * cumulative_comparator_loss / C)
            + 3.0 * math.log((5.0 + 3.0 * math.log1p(t)) / 2.0))


def a_tilde(c: float, H: float, D: float, delta: float) -> float:
    """ã = 3/2·c̃ + 18HD² + 2D√(2δ)"""
    return 1.5 * c + 18.0 * H * D ** 2 + 2.0 * D * math.sqrt(2.0 * delta)


def b_tilde(c: float, H: float, D: float) -> float:
    """b̃ = 8c̃ + 16HD²"""
    return 8.0 * c + 16.0 * H * D ** 2


def marker_count_bound(C: float, prefix_comparator_loss: float) -> int:
    """⌊1 + 4L/C⌋ markers at most by the time the comparator has accumulated loss L"""
    if C <= 0:
        raise ContractViolation("threshold must be positive")
    return math.floor(1.0 + 4.0 * prefix_comparator_loss / C)


def meta_regret_bound_cpgc(t: int, expert_loss: float, prefix_comparator_loss: float, C: float) -> float:
    """c̃(t) + √(2·c̃(t)·L_expert)"""
    c = c_tilde(t, prefix_comparator_loss, C)
    return c + math.sqrt(2.0 * c * expert_loss)


def cpgc_interval_bound(t: int, interval_loss: float, prefix_loss: float, H: float, D: float,
                        delta: float, C: float, a_scale: float = 1.0) -> float:
    """Regret over [i, t] inside a CPGC interval: ã(t) + √(b̃(t)·L)"""
    c = c_tilde(t, prefix_loss, C)
    return a_scale * a_tilde(c, H, D, delta) + math.sqrt(b_tilde(c, H, D) * interval_loss)


def constructive_marker_v(r: int, s: int, markers: Sequence[int]) -> int:
    """Length of the greedy index cover of [s_p, s_q], where s_p is the first marker after r
    and s_q the last marker ≤ s; 0 when no marker falls in (r, s]"""
    after_r = [i for i, s_i in enumerate(markers, start=1) if s_i > r]
    upto_s = [i for i, s_i in enumerate(markers, start=1) if s_i <= s]
    if not after_r or not upto_s or after_r[0] > upto_s[-1]:
        return 0
    return marker_cover(after_r[0], upto_s[-1]).v


def cpgc_cover_length(r: int, s: int, interval_loss: float, C: float,
                      markers: Optional[Sequence[int]] = None) -> int:
    ceiling = math.ceil(math.log2(2.0 + 4.0 * interval_loss / C))
    if markers is None:
        return ceiling
    return min(ceiling, constructive_marker_v(r, s, markers))


def sacs_cpgc_interval_bound(r: int, s: int, interval_loss: float, prefix_loss: float, H: float,
                             D: float, delta: float, C: float, markers: Optional[Sequence[int]] = None,
                             a_scale: float = 1.0) -> float:
    """2(C+1) + 3/2·c̃(s) + v·ã(s) + √(v·b̃(s)·L_r^s)"""
    if r > s:
        raise ContractViolation(f"empty interval [{r}, {s}]")
    c = c_tilde(s, prefix_loss, C)
    v = cpgc_cover_length(r, s, interval_loss, C, markers)
    return (2.0 * (C + 1.0) + 1.5 * c + v * a_scale * a_tilde(c, H, D, delta)
            + math.sqrt(v * b_tilde(c, H, D) * interval_loss))


__all__ = [
    'MarkerState', 'SacsCpgcLearner', 'threshold_floor', 'default_threshold', 'validate_threshold',
    'c_tilde', 'a_tilde', 'b_tilde', 'marker_count_bound', 'meta_regret_bound_cpgc',
    'cpgc_interval_bound', 'sacs_cpgc_interval_bound', 'cpgc_cover_length', 'constructive_marker_v',
]
