"""
Hindsight Comparator Module
Best fixed decision over an interval of rounds, L_r^s = min_w Σ_{t=r}^s f_t(w).
Shifted quadratics are solved in closed form from prefix sums; other losses
fall back to projected gradient descent, cross-checked by grid refinement in
dimension ≤ 2.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.geometry.domain import DomainSpec, project
from src.geometry.losses import LossFunction, LossKind
from src.utils.errors import ContractViolation
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

GRADIENT_MAPPING_TOLERANCE = 1e-8
PGD_MAX_ITERATIONS = 20_000


@dataclass
class ComparatorResult:
    """Minimiser w* of the interval loss and its value; `converged` is False
    when the iterative solver hit its cap, which excludes the interval from audits"""
    point: np.ndarray
    loss: float
    converged: bool = True
    iterations: int = 0
    method: str = 'closed-form'


def _interval_sum(losses: Sequence[LossFunction], w: np.ndarray) -> float:
    return float(sum(f.value(w) for f in losses))


def _interval_gradient(losses: Sequence[LossFunction], w: np.ndarray) -> np.ndarray:
    return np.sum([f.gradient(w) for f in losses], axis=0)


def projected_gradient_descent(losses: Sequence[LossFunction], domain: DomainSpec,
                               start: Optional[np.ndarray] = None,
                               tolerance: float = GRADIENT_MAPPING_TOLERANCE,
                               max_iterations: int = PGD_MAX_ITERATIONS) -> ComparatorResult:
    """Minimise Σ f_t over W with step 1/ΣH_t until the gradient mapping norm is ≤ tolerance"""
    smoothness = sum(f.smoothness for f in losses)
    if smoothness <= 0:
        raise ContractViolation("projected gradient descent needs a positive total smoothness")
    step = 1.0 / smoothness
    w = domain.center.copy() if start is None else project(start, domain)

    for iteration in range(1, max_iterations + 1):
        candidate = project(w - step * _interval_gradient(losses, w), domain)
        mapping_norm = float(np.linalg.norm(w - candidate)) / step
        w = candidate
        if mapping_norm <= tolerance:
            return ComparatorResult(w, _interval_sum(losses, w), True, iteration, 'pgd')

    logger.warning(f"Comparator did not converge within {max_iterations} iterations")
    return ComparatorResult(w, _interval_sum(losses, w), False, max_iterations, 'pgd')


def grid_refinement(losses: Sequence[LossFunction], domain: DomainSpec,
                    points_per_axis: int = 41, levels: int = 12) -> ComparatorResult:
    """Independent oracle for d ≤ 2: evaluate a grid over the bounding box, keep the
    feasible minimiser, shrink the grid around it and repeat"""
    d = domain.dimension
    if d > 2:
        raise ContractViolation("grid refinement is only available in one or two dimensions")
    half = np.full(d, domain.diameter / 2.0)
    centre = domain.center.copy()
    best_point, best_loss = domain.center.copy(), _interval_sum(losses, domain.center)

    for _ in range(levels):
        axes = [np.linspace(centre[k] - half[k], centre[k] + half[k], points_per_axis) for k in range(d)]
        grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, d)
        # infeasible grid points are replaced by their projections
        for point in grid:
            candidate = project(point, domain)
            value = _interval_sum(losses, candidate)
            if value < best_loss:
                best_point, best_loss = candidate, value
        centre = best_point
        half = half * 4.0 / (points_per_axis - 1)

    return ComparatorResult(best_point, best_loss, True, levels, 'grid')


class ComparatorOracle:
    """Interval comparator queries over one fixed loss sequence f_1..f_T"""

    def __init__(self, losses: Sequence[LossFunction], domain: DomainSpec):
        if not losses:
            raise ContractViolation("comparator oracle needs at least one loss")
        self.losses = list(losses)
        self.domain = domain
        scales = {f.scale for f in self.losses if f.kind == LossKind.SHIFTED_QUADRATIC}
        self.closed_form = (
            all(f.kind == LossKind.SHIFTED_QUADRATIC for f in self.losses) and len(scales) == 1
        )
        if self.closed_form:
            targets = np.stack([f.target for f in self.losses])
            zero = np.zeros((1, domain.dimension))
            self.scale = scales.pop()
            self.target_prefix = np.vstack([zero, np.cumsum(targets, axis=0)])
            self.norm_prefix = np.concatenate([[0.0], np.cumsum(np.einsum('ij,ij->i', targets, targets))])

    @property
    def horizon(self) -> int:
        return len(self.losses)

    def _check_interval(self, r: int, s: int) -> None:
        if r > s:
            raise ContractViolation(f"empty interval [{r}, {s}]")
        if r < 1 or s > self.horizon:
            raise ContractViolation(f"interval [{r}, {s}] outside rounds 1..{self.horizon}")

    def interval_loss(self, r: int, s: int, w: np.ndarray) -> float:
        """Σ_{t=r}^s f_t(w)"""
        self._check_interval(r, s)
        w = np.asarray(w, dtype=np.float64)
        if not self.closed_form:
            return _interval_sum(self.losses[r - 1:s], w)
        count = s - r + 1
        target_sum = self.target_prefix[s] - self.target_prefix[r - 1]
        norm_sum = self.norm_prefix[s] - self.norm_prefix[r - 1]
        total = count * float(w @ w) - 2.0 * float(w @ target_sum) + float(norm_sum)
        return float(max(total, 0.0) / (2.0 * self.scale))

    def solve(self, r: int, s: int) -> ComparatorResult:
        self._check_interval(r, s)
        if self.closed_form:
            mean = (self.target_prefix[s] - self.target_prefix[r - 1]) / (s - r + 1)
            point = project(mean, self.domain)
            return ComparatorResult(point, self.interval_loss(r, s, point))
        return projected_gradient_descent(self.losses[r - 1:s], self.domain)


def best_comparator(losses: Sequence[LossFunction], domain: DomainSpec) -> ComparatorResult:
    """(w*, L) for the whole given sequence"""
    return ComparatorOracle(losses, domain).solve(1, len(losses))
