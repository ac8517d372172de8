"""
Feasible Set Module
Euclidean balls and axis-aligned boxes with nearest-point projection
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from src.utils.errors import ContractViolation


class DomainKind(str, Enum):
    BALL = 'euclidean-ball'
    BOX = 'axis-box'


@dataclass(frozen=True)
class DomainSpec:
    """Convex feasible set W with diameter D

    For a ball, `extent` holds the radius (shape ()). For a box it holds the
    per-coordinate half-widths (shape (d,)).
    """
    kind: DomainKind
    center: np.ndarray
    extent: np.ndarray

    def __post_init__(self):
        center = np.array(self.center, dtype=np.float64).reshape(-1)
        extent = np.array(self.extent, dtype=np.float64)
        if self.kind == DomainKind.BALL:
            extent = extent.reshape(())
        else:
            extent = np.broadcast_to(extent, center.shape).copy()
        if np.any(extent <= 0):
            raise ContractViolation(f"domain extent must be positive, got {extent}")
        center.setflags(write=False)
        extent.setflags(write=False)
        object.__setattr__(self, 'kind', DomainKind(self.kind))
        object.__setattr__(self, 'center', center)
        object.__setattr__(self, 'extent', extent)

    @classmethod
    def ball(cls, center: Sequence[float], radius: float) -> 'DomainSpec':
        return cls(DomainKind.BALL, np.asarray(center, dtype=np.float64), np.float64(radius))

    @classmethod
    def box(cls, center: Sequence[float], halfwidths: Union[float, Sequence[float]]) -> 'DomainSpec':
        return cls(DomainKind.BOX, np.asarray(center, dtype=np.float64), np.asarray(halfwidths, dtype=np.float64))

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    @property
    def diameter(self) -> float:
        if self.kind == DomainKind.BALL:
            return float(2.0 * self.extent)
        return float(2.0 * np.linalg.norm(self.extent))

    def contains(self, point: np.ndarray, tol: float = 1e-12) -> bool:
        point = np.asarray(point, dtype=np.float64)
        offset = point - self.center
        if self.kind == DomainKind.BALL:
            return bool(np.linalg.norm(offset) <= self.extent + tol)
        return bool(np.all(np.abs(offset) <= self.extent + tol))

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples from the set, shape (count, d)"""
        d = self.dimension
        if self.kind == DomainKind.BOX:
            return self.center + rng.uniform(-1.0, 1.0, size=(count, d)) * self.extent
        directions = rng.standard_normal(size=(count, d))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = self.extent * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / d)
        return self.center + directions * radii

    def sample_neighborhood(self, count: int, rng: np.random.Generator, scale: float = 2.0) -> np.ndarray:
        """Samples from a box around the set `scale` times its size, covering points outside W"""
        reach = scale * (self.diameter / 2.0)
        return self.center + rng.uniform(-reach, reach, size=(count, self.dimension))

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'center': self.center.tolist(),
            'extent': self.extent.tolist(),
        }


def _check_dimension(point: np.ndarray, domain: DomainSpec) -> np.ndarray:
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1 or point.shape[0] != domain.dimension:
        raise ContractViolation(
            f"point of shape {point.shape} does not match domain dimension {domain.dimension}"
        )
    return point


def project(point: np.ndarray, domain: DomainSpec) -> np.ndarray:
    """Euclidean projection onto the domain, Π_W[point]"""
    point = _check_dimension(point, domain)
    offset = point - domain.center

    if domain.kind == DomainKind.BALL:
        norm = np.linalg.norm(offset)
        if norm <= domain.extent:
            return point.copy()
        return domain.center + offset * (domain.extent / norm)

    return domain.center + np.clip(offset, -domain.extent, domain.extent)


def max_sampled_distance(domain: DomainSpec, samples: int, seed: int = 0) -> float:
    """Largest pairwise distance among sampled points, a lower estimate of the true diameter"""
    rng = np.random.default_rng(seed)
    points = domain.sample(samples, rng)
    # pair each sample with a shuffled partner instead of forming all O(n²) pairs
    partners = points[rng.permutation(samples)]
    return float(np.max(np.linalg.norm(points - partners, axis=1)))
