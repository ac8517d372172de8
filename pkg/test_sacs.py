#!/usr/bin/env python3
"""
Tests for SACS (CGC scheduling) and SACS-CPGC (marker scheduling)
"""

import math

import numpy as np
import pytest

from src.geometry.losses import LossFunction
from src.geometry.scenario import generate_scenario
from src.intervals.covering import cgc_active_count, cgc_interval_at
from src.learners.sacs import (
    SacsLearner, a_of_t, b_of_t, cgc_interval_bound, sacs_interval_bound, sacs_interval_params,
)
from src.learners.sacs_cpgc import (
    SacsCpgcLearner, a_tilde, b_tilde, c_tilde, constructive_marker_v, default_threshold,
    cpgc_interval_bound, marker_count_bound, sacs_cpgc_interval_bound, cpgc_cover_length, threshold_floor,
)
from src.utils.errors import ContractViolation

H, D, DELTA = 0.25, 2.0, 1.0


def _constant_loss(value=0.5):
    return LossFunction.user_supplied(lambda w: value, lambda w: np.zeros(2), dimension=2, smoothness=H)


def test_active_set_size_is_popcount(unit_ball, four_stage_losses):
    records = SacsLearner(unit_ball).run(four_stage_losses)
    for record in records:
        assert record.active_experts == cgc_active_count(record.round)
        assert set(record.expert_losses) == {
            u for u in range(1, record.round + 1) if cgc_interval_at(u).end >= record.round
        }


def test_experts_retire_at_their_interval_end(unit_ball, four_stage_losses):
    learner = SacsLearner(unit_ball)
    learner.run(four_stage_losses)
    T = len(four_stage_losses)
    for start, last in learner.lifetimes.items():
        assert last == min(cgc_interval_at(start).end, T)
    assert learner.summary()['experts_created'] == T
    assert learner.summary()['max_active_experts'] == max(cgc_active_count(t) for t in range(1, T + 1))


def test_predictions_are_convex_combinations(unit_ball, jittered_scenario):
    for record in SacsLearner(unit_ball).run(generate_scenario(jittered_scenario)):
        assert unit_ball.contains(record.prediction, tol=1e-9)


def test_sacs_bound_constants():
    log_term = math.log(4.0 * 23 ** 2)
    assert math.isclose(a_of_t(23, H, D, DELTA), 4.5 * log_term + 18.0 + 4.0 * math.sqrt(2.0))
    assert math.isclose(b_of_t(23, H, D), 24.0 * log_term + 16.0)
    assert a_of_t(23, H, D, DELTA) == pytest.approx(58.1147, abs=1e-3)
    assert b_of_t(23, H, D) == pytest.approx(199.775, abs=1e-3)


def test_sacs_interval_bound_example():
    params = sacs_interval_params(5, 23, H, D, DELTA)
    assert params.v == 4
    expected = 4 * params.a + math.sqrt(4 * params.b * 10.0)
    assert math.isclose(sacs_interval_bound(5, 23, 10.0, H, D, DELTA), expected)
    assert sacs_interval_bound(5, 23, 10.0, H, D, DELTA) == pytest.approx(321.85, abs=0.01)
    assert math.isclose(cgc_interval_bound(23, 0.0, H, D, DELTA), a_of_t(23, H, D, DELTA))


def test_threshold_floor():
    floor = threshold_floor(H, D, DELTA)
    assert math.isclose(floor, 20.0 + 4.0 * math.sqrt(2.0))
    assert default_threshold(H, D, DELTA) == floor
    assert default_threshold(0.0, 0.1, 0.01) == 1.0


def test_threshold_below_floor_is_rejected(unit_ball):
    with pytest.raises(ContractViolation, match='25.6569'):
        SacsCpgcLearner(unit_ball, H, DELTA, threshold=5.0)


def test_problem_dependent_constants():
    assert math.isclose(c_tilde(1, 0.0, 30.0), 3.0 * math.log((5.0 + 3.0 * math.log(2.0)) / 2.0))
    assert c_tilde(1, 0.0, 30.0) == pytest.approx(3.7922, abs=1e-3)
    c = c_tilde(100, 12.0, 30.0)
    assert math.isclose(a_tilde(c, H, D, DELTA), 1.5 * c + 18.0 + 4.0 * math.sqrt(2.0))
    assert math.isclose(b_tilde(c, H, D), 8.0 * c + 16.0)
    assert marker_count_bound(10.0, 25.0) == 11
    with pytest.raises(ContractViolation):
        c_tilde(0, 0.0, 30.0)


def test_marker_interval_bound_uses_the_smaller_cover_length():
    markers = [1, 53, 105, 157]
    assert constructive_marker_v(60, 100, markers) == 0
    assert constructive_marker_v(1, 200, markers) == 2
    assert cpgc_cover_length(1, 200, 1000.0, 30.0) == math.ceil(math.log2(2.0 + 4000.0 / 30.0))
    assert cpgc_cover_length(1, 200, 1000.0, 30.0, markers) == 2

    C = 30.0
    c = c_tilde(200, 40.0, C)
    expected = 2.0 * (C + 1.0) + 1.5 * c + 2 * a_tilde(c, H, D, DELTA) + math.sqrt(2 * b_tilde(c, H, D) * 25.0)
    assert math.isclose(sacs_cpgc_interval_bound(1, 200, 25.0, 40.0, H, D, DELTA, C, markers), expected)
    assert math.isclose(cpgc_interval_bound(200, 0.0, 40.0, H, D, DELTA, C), a_tilde(c, H, D, DELTA))


def test_markers_follow_the_threshold(unit_ball):
    learner = SacsCpgcLearner(unit_ball, H, DELTA)
    records = learner.run([_constant_loss()] * 300)

    # 0.5 per round crosses C ≈ 25.66 after 52 rounds of a segment
    assert learner.markers == [1, 53, 105, 157, 209, 261]
    assert [r.round for r in records if r.marker_flag] == learner.markers
    assert records[51].marker_count == 1 and records[52].marker_count == 2
    assert records[104].active_experts == 2
    assert learner.summary()['experts_created'] == 6


def test_latest_expert_is_removed_when_its_end_index_is_next(unit_ball):
    learner = SacsCpgcLearner(unit_ball, H, DELTA)
    learner.run([_constant_loss()] * 52)
    # m = 1 ends at index 2, so crossing the first threshold retires E_1 itself
    assert len(learner.active) == 0
    learner.run([_constant_loss()] * 104)
    # m = 3 ends index 4 for both E_53 and E_105
    assert len(learner.active) == 0
    assert learner.lifetimes == {1: 52, 53: 156, 105: 156}


def test_active_experts_outlive_the_current_marker_index(unit_ball, jittered_scenario):
    learner = SacsCpgcLearner(unit_ball, H, DELTA)
    for f in generate_scenario(jittered_scenario):
        learner.play(f)
        assert all(record.end_index > learner.state.m for record in learner.active)


def test_marker_count_stays_below_ceiling(unit_ball):
    learner = SacsCpgcLearner(unit_ball, H, DELTA)
    records = learner.run([_constant_loss()] * 400)
    for record in records:
        comparator_loss = 0.5 * record.round
        assert record.marker_count <= marker_count_bound(learner.threshold, comparator_loss)
