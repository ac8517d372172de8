"""
Scale-Free Online Gradient Descent
The expert algorithm: projected gradient steps with a step size driven by the
accumulated squared gradient norms, plus the constant-step OGD baseline and
the regret bound formulas for both
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from src.geometry.domain import DomainSpec, project
from src.geometry.losses import LossFunction
from src.learners.base import OnlineLearner, RoundRecord
from src.utils.errors import ContractViolation

DEFAULT_DELTA = 1.0


@dataclass
class SogdState:
    """Mutable state of one SOGD instance; owned by a single learner"""
    domain: DomainSpec
    w: np.ndarray
    delta: float
    alpha: float
    grad_norm_sq_sum: float = 0.0
    rounds_seen: int = 0
    cumulative_own_loss: float = 0.0
    last_step_size: Optional[float] = None

    @property
    def step_size(self) -> float:
        """η = α / √(δ + Σ‖∇f_i(w_i)‖²) for the gradients seen so far"""
        return self.alpha / math.sqrt(self.delta + self.grad_norm_sq_sum)

    def predict(self) -> np.ndarray:
        return self.w

    def apply_gradient(self, grad: np.ndarray) -> None:
        """Accumulate ‖grad‖² first (the sum in η_t runs through t), then take the projected step"""
        self.grad_norm_sq_sum += float(grad @ grad)
        eta = self.step_size
        self.last_step_size = eta
        self.w = project(self.w - eta * grad, self.domain)
        self.rounds_seen += 1

    def step(self, f: LossFunction) -> float:
        """Suffer f at the current point, update, and return the suffered loss"""
        value = f.value(self.w)
        self.cumulative_own_loss += value
        self.apply_gradient(f.gradient(self.w))
        return value


def sogd_init(domain: DomainSpec, delta: float = DEFAULT_DELTA,
              w1: Optional[np.ndarray] = None) -> SogdState:
    """Fresh SOGD with α = D/√2, starting from Π_W[w1] or the domain center"""
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    start = domain.center.copy() if w1 is None else project(np.asarray(w1, dtype=np.float64), domain)
    return SogdState(domain=domain, w=start, delta=float(delta), alpha=domain.diameter / math.sqrt(2.0))


def sogd_step(state: SogdState, f: LossFunction):
    """One round: returns the prediction w_t and the (updated in place) state"""
    prediction = state.w.copy()
    state.step(f)
    return prediction, state


def sogd_bound(H: float, D: float, delta: float, comparator_loss: float) -> float:
    """8HD² + D·√(2δ + 8H·L)"""
    if not delta > 0:
        raise ContractViolation(f"delta must be positive, got {delta}")
    if min(H, D, comparator_loss) < 0:
        raise ContractViolation("bound arguments must be nonnegative")
    return 8.0 * H * D ** 2 + D * math.sqrt(2.0 * delta + 8.0 * H * comparator_loss)


def ogd_step_size(H: float, B: float, L: float) -> float:
    """η = 1 / (HB² + √(H²B⁴ + HB²L))"""
    if B < 0 or L < 0:
        raise ContractViolation("B and L must be nonnegative")
    hb2 = H * B ** 2
    denominator = hb2 + math.sqrt(hb2 ** 2 + hb2 * L)
    if denominator == 0:
        raise ContractViolation("step size undefined when H·B² = 0")
    return 1.0 / denominator


def ogd_bound(H: float, B: float, L: float) -> float:
    """4HB² + 2√(HB²L)"""
    return 4.0 * H * B ** 2 + 2.0 * math.sqrt(H * B ** 2 * L)


def default_ogd_radius(domain: DomainSpec) -> float:
    """B = D/√2, so every comparator of a domain centred at the origin has ‖w‖²/2 ≤ B²"""
    return domain.diameter / math.sqrt(2.0)


@dataclass
class OgdTrace:
    step_size: float
    bound: float
    predictions: List[np.ndarray] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)


class ConstantStepOgd:
    """OGD from w_1 = 0 with the fixed step size tuned on a known loss level L"""

    def __init__(self, domain: DomainSpec, H: float, B: float, L: float):
        if not domain.contains(np.zeros(domain.dimension)):
            raise ContractViolation("constant-step OGD starts at the origin, which must lie in the domain")
        self.domain = domain
        self.eta = ogd_step_size(H, B, L)
        self.bound = ogd_bound(H, B, L)
        self.w = np.zeros(domain.dimension)

    def step(self, f: LossFunction) -> float:
        value = f.value(self.w)
        self.w = project(self.w - self.eta * f.gradient(self.w), self.domain)
        return value


def ogd_constant_step(domain: DomainSpec, H: float, B: float, L: float,
                      losses: Sequence[LossFunction]) -> OgdTrace:
    """Run the baseline over a loss sequence and record its constant-step regret bound"""
    learner = ConstantStepOgd(domain, H, B, L)
    trace = OgdTrace(step_size=learner.eta, bound=learner.bound)
    for f in losses:
        trace.predictions.append(learner.w.copy())
        trace.losses.append(learner.step(f))
    return trace


class SogdLearner(OnlineLearner):
    """A single SOGD instance played over the whole horizon"""

    name = 'sogd'

    def __init__(self, domain: DomainSpec, delta: float = DEFAULT_DELTA, w1: Optional[np.ndarray] = None):
        self.state = sogd_init(domain, delta, w1)
        self.t = 0

    def play(self, f: LossFunction) -> RoundRecord:
        self.t += 1
        prediction = self.state.w.copy()
        loss = self.state.step(f)
        return RoundRecord(self.t, prediction, loss, active_experts=1, expert_losses={1: loss})


class OgdConstantLearner(OnlineLearner):
    """Round-by-round wrapper of ConstantStepOgd for the harness"""

    name = 'ogd-constant'

    def __init__(self, domain: DomainSpec, H: float, B: float, L: float):
        self.ogd = ConstantStepOgd(domain, H, B, L)
        self.B = B
        self.L = L
        self.t = 0

    def play(self, f: LossFunction) -> RoundRecord:
        self.t += 1
        prediction = self.ogd.w.copy()
        loss = self.ogd.step(f)
        return RoundRecord(self.t, prediction, loss, active_experts=1, expert_losses={1: loss})

    def summary(self):
        return {'step_size': self.ogd.eta, 'B': self.B, 'L': self.L, 'regret_bound': self.ogd.bound}
