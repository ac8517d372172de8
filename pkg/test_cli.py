#!/usr/bin/env python3
"""
End-to-end tests for the command-line interface
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.cli import main
from src.experiments.runner import AUDIT_SUMMARY_FILE, EXIT_ERROR, EXIT_PASS, EXIT_VIOLATION
from src.experiments.trace_log import read_trace, write_trace


def _config(learner='sacs', horizon=64, **overrides):
    document = {
        'learner': learner,
        'scenario': {
            'horizon': horizon,
            'domain': {'kind': 'ball', 'center': [0.0, 0.0], 'radius': 1.0},
            'stage_targets': [[0.5, 0.0], [-0.5, 0.0]],
        },
        'delta': 1.0,
        'audit': {'sampled': 50, 'extra_comparators': 1},
        'seed': 0,
    }
    document.update(overrides)
    return document


def _write_config(path, document):
    path.write_text(json.dumps(document))
    return str(path)


@pytest.fixture
def completed_run(tmp_path):
    config_path = _write_config(tmp_path / 'run.json', _config())
    out = tmp_path / 'out'
    assert main(['run', '--config', config_path, '--out', str(out)]) == EXIT_PASS
    return config_path, out


def test_template_is_valid_json(capsys):
    assert main(['template', '--learner', 'sacs-cpgc']) == EXIT_PASS
    document = json.loads(capsys.readouterr().out)
    assert document['learner'] == 'sacs-cpgc'
    assert document['scenario']['horizon'] == 2048


def test_cover_prints_the_greedy_chain(capsys):
    assert main(['cover', '--kind', 'cgc', '--from', '5', '--to', '23']) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.startswith('5..5, 6..7, 8..15, 16..31')
    assert 'v=4' in out


def test_intervals_diagram(capsys):
    assert main(['intervals', '--kind', 'cgc', '--horizon', '8']) == EXIT_PASS
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('t')
    assert [line[:2] for line in lines[1:]] == ['C0', 'C1', 'C2', 'C3']


def test_run_writes_trace_and_summary(completed_run):
    _, out = completed_run
    trace = pd.read_csv(out / 'trace.csv')
    assert list(trace.columns[:5]) == ['round', 'learner_loss', 'cumulative_loss', 'active_experts',
                                       'marker_flag']
    assert len(trace) == 64
    summary = json.loads((out / 'summary.json').read_text())
    assert summary['audit']['status'] == 'PASSED'
    assert summary['aggregates']['rounds'] == 64
    assert (out / 'experts.csv').exists()


def test_audit_reproduces_the_run_summary(completed_run):
    config_path, out = completed_run
    assert main(['audit', '--trace', str(out / 'trace.csv'), '--config', config_path]) == EXIT_PASS
    assert (out / AUDIT_SUMMARY_FILE).read_bytes() == (out / 'summary.json').read_bytes()


def test_invalid_delta_is_a_config_error(tmp_path, capsys):
    config_path = _write_config(tmp_path / 'bad.json', _config(delta=0.0))
    assert main(['run', '--config', config_path, '--out', str(tmp_path / 'out')]) == EXIT_ERROR
    assert 'delta' in capsys.readouterr().err


def test_threshold_below_floor_names_the_floor(tmp_path, capsys):
    config_path = _write_config(tmp_path / 'cpgc.json', _config('sacs-cpgc', threshold=5.0))
    assert main(['run', '--config', config_path]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert 'threshold' in err and '25.6569' in err


def test_missing_config_file(tmp_path):
    assert main(['run', '--config', str(tmp_path / 'absent.json')]) == EXIT_ERROR


def test_truncated_trace_is_rejected(completed_run):
    config_path, out = completed_run
    trace_path = out / 'trace.csv'
    lines = trace_path.read_text().splitlines(keepends=True)
    trace_path.write_text(''.join(lines[:-1]))
    assert main(['audit', '--trace', str(trace_path), '--config', config_path]) == EXIT_ERROR


def test_corrupted_loss_fails_the_audit(completed_run, capsys):
    config_path, out = completed_run
    trace_path = out / 'trace.csv'
    frame = pd.read_csv(trace_path, float_precision='round_trip')
    frame.loc[4, 'learner_loss'] = 1.5
    frame.to_csv(trace_path, index=False)
    assert main(['audit', '--trace', str(trace_path), '--config', config_path]) == EXIT_VIOLATION
    summary = json.loads((out / AUDIT_SUMMARY_FILE).read_text())
    assert summary['audit']['status'] == 'FAILED'
    assert any(report['check'] == 'loss-range' and report['r'] == 5 for report in summary['audit']['reports'])


def test_audit_with_a_different_config_is_rejected(completed_run, tmp_path):
    _, out = completed_run
    other = _write_config(tmp_path / 'other.json', _config(delta=2.0))
    assert main(['audit', '--trace', str(out / 'trace.csv'), '--config', other]) == EXIT_ERROR


def test_seed_batch_writes_one_directory_per_seed(tmp_path):
    config_path = _write_config(tmp_path / 'batch.json', _config(horizon=32, seeds=[0, 1]))
    out = tmp_path / 'batch'
    assert main(['run', '--config', config_path, '--out', str(out)]) == EXIT_PASS
    for seed in (0, 1):
        summary = json.loads((out / f"seed_{seed}" / 'summary.json').read_text())
        assert summary['config']['seed'] == seed


def test_batch_member_can_be_reaudited(tmp_path):
    config_path = _write_config(tmp_path / 'batch.json', _config(horizon=32, seeds=[0, 1]))
    out = tmp_path / 'batch'
    assert main(['run', '--config', config_path, '--out', str(out)]) == EXIT_PASS
    member = out / 'seed_1'
    assert main(['audit', '--trace', str(member / 'trace.csv'), '--config', config_path]) == EXIT_PASS
    assert (member / AUDIT_SUMMARY_FILE).read_bytes() == (member / 'summary.json').read_bytes()
    explicit = tmp_path / 'explicit.json'
    assert main(['audit', '--trace', str(member / 'trace.csv'), '--config', config_path, '--seed', '1',
                 '--out', str(explicit)]) == EXIT_PASS
    assert explicit.read_bytes() == (member / 'summary.json').read_bytes()


def test_trace_files_reproduce_every_float(completed_run, tmp_path):
    _, out = completed_run
    trace = read_trace(out / 'trace.csv', 'sacs')
    write_trace(trace, tmp_path / 'copy')
    again = read_trace(tmp_path / 'copy' / 'trace.csv', 'sacs')
    assert np.array_equal(again.learner_losses, trace.learner_losses)
    assert np.array_equal(again.predictions, trace.predictions)
    assert again.expert_losses.keys() == trace.expert_losses.keys()
    assert all(np.array_equal(again.expert_losses[k], v) for k, v in trace.expert_losses.items())
    assert (tmp_path / 'copy' / 'trace.csv').read_bytes() == (out / 'trace.csv').read_bytes()
