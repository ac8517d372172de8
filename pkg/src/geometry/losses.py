"""
Loss Function Module
Smooth nonnegative losses with values in [0,1] and sampling-based verification
of the analytic properties the regret bounds rely on
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.geometry.domain import DomainSpec
from src.utils.errors import ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# relative tolerance used when a check is satisfied with equality (e.g. exact curvature)
CHECK_SLACK = 1e-9
FD_TOLERANCE = 1e-6


class LossKind(str, Enum):
    SHIFTED_QUADRATIC = 'shifted-quadratic'
    USER_SUPPLIED = 'user-supplied'


@dataclass(frozen=True)
class LossFunction:
    """One round's loss f_t

    Shifted quadratic: f(w) = ‖w − θ‖² / (2·scale) with H = 1/scale. The default
    scale is D², which keeps f in [0, 1/2] on a domain of diameter D.
    User-supplied: value_fn / grad_fn callables with a declared smoothness H.
    """
    kind: LossKind
    dimension: int
    smoothness: float
    target: Optional[np.ndarray] = None
    scale: float = 1.0
    value_fn: Optional[Callable[[np.ndarray], float]] = field(default=None, compare=False, repr=False)
    grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == LossKind.SHIFTED_QUADRATIC:
            target = np.array(self.target, dtype=np.float64).reshape(-1)
            if target.shape[0] != self.dimension:
                raise ContractViolation("target dimension does not match loss dimension")
            if self.scale <= 0:
                raise ContractViolation(f"scale must be positive, got {self.scale}")
            target.setflags(write=False)
            object.__setattr__(self, 'target', target)
        elif self.value_fn is None or self.grad_fn is None:
            raise ContractViolation("user-supplied losses need both value_fn and grad_fn")

    @classmethod
    def shifted_quadratic(cls, target: np.ndarray, diameter: float) -> 'LossFunction':
        target = np.asarray(target, dtype=np.float64)
        scale = diameter ** 2
        return cls(LossKind.SHIFTED_QUADRATIC, int(target.shape[0]), 1.0 / scale, target, scale)

    @classmethod
    def user_supplied(cls, value_fn: Callable, grad_fn: Callable,
                      dimension: int, smoothness: float) -> 'LossFunction':
        return cls(LossKind.USER_SUPPLIED, dimension, smoothness,
                   value_fn=value_fn, grad_fn=grad_fn)

    def value(self, w: np.ndarray) -> float:
        if self.kind == LossKind.SHIFTED_QUADRATIC:
            diff = w - self.target
            return float(diff @ diff) / (2.0 * self.scale)
        return float(self.value_fn(w))

    def gradient(self, w: np.ndarray) -> np.ndarray:
        if self.kind == LossKind.SHIFTED_QUADRATIC:
            return (w - self.target) / self.scale
        return np.asarray(self.grad_fn(w), dtype=np.float64)


def loss_eval(f: LossFunction, w: np.ndarray) -> Tuple[float, np.ndarray]:
    """Value and gradient of f at w"""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != f.dimension:
        raise ContractViolation(f"point of shape {w.shape} does not match loss dimension {f.dimension}")
    return f.value(w), f.gradient(w)


@dataclass
class CheckResult:
    """Outcome of one assumption check; margin < 0 means violated"""
    name: str
    passed: bool
    worst_margin: float
    worst_point: Optional[List[float]] = None


@dataclass
class LossAssumptionReport:
    checks: Dict[str, CheckResult]
    samples: int
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def failed_checks(self) -> List[str]:
        return [name for name, check in self.checks.items() if not check.passed]


def _worst(name: str, margins: np.ndarray, points: np.ndarray, slack: float = 0.0) -> CheckResult:
    idx = int(np.argmin(margins))
    worst = float(margins[idx])
    return CheckResult(name, worst >= -slack, worst, points[idx].tolist())


def check_bounded(f: LossFunction, points: np.ndarray) -> CheckResult:
    """0 ≤ f(w) ≤ 1 on in-domain points"""
    values = np.array([f.value(p) for p in points])
    margins = np.minimum(values, 1.0 - values)
    return _worst('bounded_unit_interval', margins, points)


def check_nonnegative(f: LossFunction, points: np.ndarray) -> CheckResult:
    """f(w) ≥ 0, evaluated on points around (and outside) the domain"""
    values = np.array([f.value(p) for p in points])
    return _worst('nonnegative', values, points)


def check_smoothness(f: LossFunction, points: np.ndarray, partners: np.ndarray) -> CheckResult:
    """‖∇f(w) − ∇f(w′)‖ ≤ H‖w − w′‖ on sampled pairs"""
    margins = np.empty(len(points))
    for k, (w, w_other) in enumerate(zip(points, partners)):
        gap = np.linalg.norm(f.gradient(w) - f.gradient(w_other))
        allowed = f.smoothness * np.linalg.norm(w - w_other)
        margins[k] = allowed - gap
    scale = max(1.0, f.smoothness * float(np.max(np.linalg.norm(points - partners, axis=1))))
    return _worst('smoothness', margins, points, slack=CHECK_SLACK * scale)


def self_bounding_margin(f: LossFunction, w: np.ndarray) -> float:
    """4·H·f(w) − ‖∇f(w)‖², nonnegative for nonnegative H-smooth functions"""
    value, grad = loss_eval(f, w)
    return 4.0 * f.smoothness * value - float(grad @ grad)


def check_self_bounding(f: LossFunction, points: np.ndarray) -> CheckResult:
    margins = np.array([self_bounding_margin(f, p) for p in points])
    scale = max(1.0, float(np.max(np.abs(margins))))
    return _worst('self_bounding', margins, points, slack=CHECK_SLACK * scale)


def finite_difference_gradient(f: LossFunction, w: np.ndarray) -> np.ndarray:
    """Central differences with step 1e-5·(1 + ‖w‖)"""
    step = 1e-5 * (1.0 + np.linalg.norm(w))
    grad = np.empty_like(w)
    for i in range(w.shape[0]):
        offset = np.zeros_like(w)
        offset[i] = step
        grad[i] = (f.value(w + offset) - f.value(w - offset)) / (2.0 * step)
    return grad


def gradient_relative_error(f: LossFunction, w: np.ndarray) -> float:
    analytic = f.gradient(w)
    numeric = finite_difference_gradient(f, w)
    return float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-4))


def check_gradient(f: LossFunction, points: np.ndarray) -> CheckResult:
    errors = np.array([gradient_relative_error(f, p) for p in points])
    return _worst('finite_difference_gradient', FD_TOLERANCE - errors, points)


def verify_loss_assumptions(f: LossFunction, domain: DomainSpec,
                            samples: int = 10_000, seed: int = 0) -> LossAssumptionReport:
    """Sampling-based check of nonnegativity, [0,1] boundedness, H-smoothness,
    self-bounding and gradient correctness. Violations mark the report failed."""
    if samples < 1:
        raise ContractViolation(f"samples must be at least 1, got {samples}")
    if f.dimension != domain.dimension:
        raise ContractViolation("loss and domain dimensions differ")

    rng = np.random.default_rng(seed)
    inside = domain.sample(samples, rng)
    partners = domain.sample(samples, rng)
    around = domain.sample_neighborhood(samples, rng)

    checks = [
        check_nonnegative(f, np.vstack([inside, around])),
        check_bounded(f, inside),
        check_smoothness(f, np.vstack([inside, around]), np.vstack([partners, around[rng.permutation(samples)]])),
        check_self_bounding(f, np.vstack([inside, around])),
        check_gradient(f, inside),
    ]
    report = LossAssumptionReport({check.name: check for check in checks}, samples)
    if f.kind == LossKind.USER_SUPPLIED:
        report.notes.append(
            "nonnegativity outside the domain is only checked on a sampled neighborhood"
        )
    if not report.passed:
        logger.warning(f"Loss assumptions violated: {', '.join(report.failed_checks())}")
    return report
