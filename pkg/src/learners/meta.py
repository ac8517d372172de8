"""
AdaNormalHedge over sleeping experts
Potential and weight functions, log-domain normalisation of expert weights,
and the per-expert regret statistics R (signed) and C (absolute)
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from src.learners.sogd import SogdState
from src.utils.errors import ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

LOG_HALF = math.log(0.5)


@dataclass
class ExpertRecord:
    """One sleeping expert E_i and its statistics relative to the learner

    The removal key is `end_round` under CGC scheduling and `end_index` (g_i)
    under marker-based scheduling.
    """
    start: int
    expert: SogdState
    end_round: Optional[int] = None
    end_index: Optional[int] = None
    R: float = 0.0
    C: float = 0.0

    def record(self, r: float) -> None:
        self.R += r
        self.C += abs(r)


@dataclass
class ActiveSet:
    """Active experts S_t keyed by start round, in creation order"""
    records: Dict[int, ExpertRecord] = field(default_factory=dict)
    range_warnings: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ExpertRecord]:
        return iter(self.records.values())

    def __contains__(self, start: int) -> bool:
        return start in self.records

    def add(self, record: ExpertRecord) -> None:
        if record.start in self.records:
            raise ContractViolation(f"an expert starting at round {record.start} is already active")
        self.records[record.start] = record

    def remove(self, starts: Sequence[int]) -> List[ExpertRecord]:
        return [self.records.pop(start) for start in starts]

    def starts(self) -> List[int]:
        return list(self.records.keys())


def potential(R: float, C: float) -> float:
    """Φ(R, C) = exp([R]₊² / (3C)), with Φ(0, 0) = 1"""
    if C < 0:
        raise ContractViolation(f"C must be nonnegative, got {C}")
    if R <= 0:
        return 1.0
    if C == 0:
        raise ContractViolation("potential undefined for R > 0 with C = 0")
    return math.exp(R * R / (3.0 * C))


def log_weight(R: float, C: float) -> float:
    """log w(R, C), −inf when the weight is zero (R ≤ −1)

    With x = [R+1]₊²/(3(C+1)) ≥ y = [R−1]₊²/(3(C+1)) the weight is
    ½·eˣ·(1 − e^{y−x}).
    """
    if C < 0:
        raise ContractViolation(f"C must be nonnegative, got {C}")
    denominator = 3.0 * (C + 1.0)
    x = max(R + 1.0, 0.0) ** 2 / denominator
    y = max(R - 1.0, 0.0) ** 2 / denominator
    if x <= y:
        return -math.inf
    return LOG_HALF + x + math.log(-math.expm1(y - x))


def weight(R: float, C: float) -> float:
    """w(R, C) = ½(Φ(R+1, C+1) − Φ(R−1, C+1)); may overflow to inf for very large exponents"""
    lw = log_weight(R, C)
    if lw == -math.inf:
        return 0.0
    try:
        return math.exp(lw)
    except OverflowError:
        return math.inf


def weight_direct(R: float, C: float) -> float:
    """Naive evaluation of the weight, used to cross-check the log-domain form"""
    return 0.5 * (potential(R + 1.0, C + 1.0) - potential(R - 1.0, C + 1.0))


def probabilities_from_stats(stats: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Normalised weights p_i ∝ w(R_i, C_i); uniform when every weight is zero"""
    if len(stats) == 0:
        raise ContractViolation("cannot normalise weights of an empty expert set")
    logs = np.array([log_weight(R, C) for R, C in stats])
    if np.all(np.isneginf(logs)):
        return np.full(len(stats), 1.0 / len(stats))
    probabilities = np.exp(logs - logsumexp(logs))
    return probabilities / probabilities.sum()


def normalized_weights(active: ActiveSet) -> np.ndarray:
    """p_{t,i} over the active set, in the set's iteration order"""
    return probabilities_from_stats([(record.R, record.C) for record in active])


def update_records(active: ActiveSet, learner_loss: float,
                   expert_losses: Mapping[int, float]) -> ActiveSet:
    """R_i += r, C_i += |r| with r = f_t(w_t) − f_t(w_{t,i}) for every active expert"""
    out_of_range = [loss for loss in [learner_loss, *expert_losses.values()] if not 0.0 <= loss <= 1.0]
    if out_of_range:
        active.range_warnings += 1
        logger.warning(f"Losses outside [0, 1] void the meta-regret guarantee: {out_of_range[:3]}")
    for record in active:
        record.record(learner_loss - expert_losses[record.start])
    return active


def c_of_t(t: int) -> float:
    """c(t) = 3·ln(4t²)"""
    if t < 1:
        raise ContractViolation(f"rounds start at 1, got {t}")
    return 3.0 * math.log(4.0 * t * t)


def meta_regret_bound(t: int, expert_cumulative_loss: float) -> float:
    """c(t) + √(2·c(t)·L_expert)"""
    if expert_cumulative_loss < 0:
        raise ContractViolation("expert loss must be nonnegative")
    c = c_of_t(t)
    return c + math.sqrt(2.0 * c * expert_cumulative_loss)
