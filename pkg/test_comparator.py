#!/usr/bin/env python3
"""
Tests for the hindsight comparator oracle
"""

import math

import numpy as np
import pytest

from src.analysis.comparator import (
    ComparatorOracle, best_comparator, grid_refinement, projected_gradient_descent,
)
from src.geometry.domain import project
from src.geometry.losses import LossFunction
from src.utils.errors import ContractViolation


def _quadratic(target, diameter=2.0):
    return LossFunction.shifted_quadratic(np.asarray(target, dtype=float), diameter)


def _user_quadratic(target, diameter=2.0):
    theta = np.asarray(target, dtype=float)
    scale = diameter ** 2
    return LossFunction.user_supplied(lambda w: float((w - theta) @ (w - theta)) / (2.0 * scale),
                                      lambda w: (w - theta) / scale, dimension=theta.shape[0],
                                      smoothness=1.0 / scale)


def test_single_round_comparator_is_the_target(unit_ball):
    result = best_comparator([_quadratic([0.3, -0.2])], unit_ball)
    assert np.allclose(result.point, [0.3, -0.2])
    assert result.loss == pytest.approx(0.0, abs=1e-15)


def test_two_round_mean(unit_ball):
    result = best_comparator([_quadratic([0.0, 0.0]), _quadratic([1.0, 0.0])], unit_ball)
    assert np.allclose(result.point, [0.5, 0.0])
    assert math.isclose(result.loss, 0.0625)


def test_mean_outside_domain_is_projected_and_matches_grid(unit_ball):
    losses = [_quadratic([2.0, 0.0]), _quadratic([2.0, 1.0])]
    closed = best_comparator(losses, unit_ball)
    assert np.allclose(closed.point, project(np.array([2.0, 0.5]), unit_ball))
    grid = grid_refinement(losses, unit_ball)
    assert abs(grid.loss - closed.loss) <= 1e-6


def test_grid_refinement_agrees_on_random_instances(unit_box):
    rng = np.random.default_rng(5)
    for _ in range(5):
        targets = rng.uniform(-0.9, 0.9, size=(6, 2))
        losses = [_quadratic(theta, unit_box.diameter) for theta in targets]
        closed = best_comparator(losses, unit_box)
        grid = grid_refinement(losses, unit_box)
        assert abs(grid.loss - closed.loss) <= 1e-6


def test_projected_gradient_descent_matches_closed_form(unit_ball):
    targets = [[2.0, 0.0], [2.0, 1.0], [0.4, -0.3]]
    closed = best_comparator([_quadratic(t) for t in targets], unit_ball)
    iterative = best_comparator([_user_quadratic(t) for t in targets], unit_ball)
    assert iterative.method == 'pgd' and iterative.converged
    assert abs(iterative.loss - closed.loss) <= 1e-6
    assert np.allclose(iterative.point, closed.point, atol=1e-6)


def test_iteration_cap_flags_non_convergence(unit_ball):
    losses = [_user_quadratic([0.9, 0.0])]
    result = projected_gradient_descent(losses, unit_ball, tolerance=-1.0, max_iterations=3)
    assert not result.converged
    assert result.iterations == 3


def test_prefix_sum_interval_loss_matches_direct_sum(unit_ball, four_stage_losses, rng):
    oracle = ComparatorOracle(four_stage_losses, unit_ball)
    assert oracle.closed_form
    for _ in range(20):
        r, s = sorted(int(x) for x in rng.integers(1, len(four_stage_losses) + 1, size=2))
        w = unit_ball.sample(1, rng)[0]
        direct = sum(f.value(w) for f in four_stage_losses[r - 1:s])
        assert math.isclose(oracle.interval_loss(r, s, w), direct, rel_tol=1e-9, abs_tol=1e-12)


def test_stage_comparators_have_zero_loss(unit_ball, four_stage_scenario, four_stage_losses):
    oracle = ComparatorOracle(four_stage_losses, unit_ball)
    for (a, b), target in zip(four_stage_scenario.stages(), four_stage_scenario.stage_targets):
        result = oracle.solve(a, b)
        assert np.allclose(result.point, target)
        assert result.loss == pytest.approx(0.0, abs=1e-12)


def test_invalid_intervals_are_rejected(unit_ball, four_stage_losses):
    oracle = ComparatorOracle(four_stage_losses, unit_ball)
    with pytest.raises(ContractViolation):
        oracle.solve(5, 4)
    with pytest.raises(ContractViolation):
        oracle.solve(1, len(four_stage_losses) + 1)


def test_interval_loss_is_a_plain_float(unit_ball, four_stage_losses):
    oracle = ComparatorOracle(four_stage_losses, unit_ball)
    assert type(oracle.interval_loss(1, 10, np.zeros(2))) is float
    assert type(oracle.solve(1, 10).loss) is float
