"""
Run Trace Module
In-memory trace of one run plus the CSV / JSON files it is persisted as.
Frames are written with pandas and read back with round-trip float parsing, so every real survives exactly.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.learners.base import RoundRecord
from src.utils.errors import ConfigError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

TRACE_FILE = 'trace.csv'
EXPERTS_FILE = 'experts.csv'
SUMMARY_FILE = 'summary.json'

TRACE_COLUMNS = ['round', 'learner_loss', 'cumulative_loss', 'active_experts', 'marker_flag']
EXPERT_COLUMNS = ['round', 'expert_start', 'expert_loss']


@dataclass
class RunTrace:
    """Everything a run produced that the auditor needs"""
    learner: str
    predictions: np.ndarray
    learner_losses: np.ndarray
    active_experts: np.ndarray
    marker_flags: np.ndarray
    # expert start round -> its losses over consecutive rounds from the start
    expert_losses: Dict[int, np.ndarray] = field(default_factory=dict)
    scenario: Dict[str, object] = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_records(cls, learner: str, records: Sequence[RoundRecord],
                     scenario: Optional[Mapping] = None, seed: int = 0) -> 'RunTrace':
        streams: Dict[int, List[float]] = {}
        for record in records:
            for start, loss in record.expert_losses.items():
                streams.setdefault(start, []).append(loss)
        return cls(
            learner=learner,
            predictions=np.stack([record.prediction for record in records]),
            learner_losses=np.array([record.learner_loss for record in records], dtype=np.float64),
            active_experts=np.array([record.active_experts for record in records], dtype=np.int64),
            marker_flags=np.array([record.marker_flag for record in records], dtype=bool),
            expert_losses={start: np.array(values, dtype=np.float64) for start, values in streams.items()},
            scenario=dict(scenario or {}),
            seed=seed,
        )

    @property
    def horizon(self) -> int:
        return int(self.learner_losses.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.predictions.shape[1])

    @property
    def cumulative_loss(self) -> np.ndarray:
        return np.cumsum(self.learner_losses)

    @property
    def markers(self) -> List[int]:
        """Rounds at which a marker was created"""
        return [int(t) for t in np.flatnonzero(self.marker_flags) + 1]

    @property
    def marker_counts(self) -> np.ndarray:
        """m after each round"""
        return np.cumsum(self.marker_flags.astype(np.int64))

    def learner_interval_loss(self, r: int, s: int) -> float:
        return float(np.sum(self.learner_losses[r - 1:s]))

    def validate(self) -> None:
        """Shape consistency; out-of-range losses are audit findings, not errors"""
        T = self.horizon
        for name in ('predictions', 'active_experts', 'marker_flags'):
            if getattr(self, name).shape[0] != T:
                raise ConfigError(f"expected {T} rows, found {getattr(self, name).shape[0]}", field=name)
        for start, losses in self.expert_losses.items():
            if start < 1 or start + losses.shape[0] - 1 > T:
                raise ConfigError(f"expert {start} has losses beyond round {T}", field='experts')

    def loss_range_violations(self) -> List[Tuple[int, Optional[int], float]]:
        """(round, expert start or None for the learner, value) for every loss outside [0, 1]"""
        found = [(int(t) + 1, None, float(self.learner_losses[t]))
                 for t in np.flatnonzero((self.learner_losses < 0) | (self.learner_losses > 1))]
        for start, losses in sorted(self.expert_losses.items()):
            for offset in np.flatnonzero((losses < 0) | (losses > 1)):
                found.append((start + int(offset), start, float(losses[offset])))
        return found


def scenario_hash(document: Mapping) -> str:
    """Stable fingerprint of the settings that determine a trace"""
    encoded = json.dumps(document, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(encoded.encode('utf-8')).hexdigest()


def write_trace(trace: RunTrace, directory: Path) -> Tuple[Path, Path]:
    """trace.csv (one row per round) and experts.csv (one row per expert per round)"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    trace_path = directory / TRACE_FILE
    experts_path = directory / EXPERTS_FILE

    df = pd.DataFrame({
        'round': np.arange(1, trace.horizon + 1),
        'learner_loss': trace.learner_losses,
        'cumulative_loss': trace.cumulative_loss,
        'active_experts': trace.active_experts,
        'marker_flag': trace.marker_flags.astype(np.int64),
    })
    for k in range(trace.dimension):
        df[f"w_{k + 1}"] = trace.predictions[:, k]
    df.to_csv(trace_path, index=False)

    experts = pd.DataFrame(
        [(start + offset, start, float(loss))
         for start, losses in trace.expert_losses.items() for offset, loss in enumerate(losses)],
        columns=EXPERT_COLUMNS,
    )
    experts.sort_values(['round', 'expert_start']).to_csv(experts_path, index=False)

    logger.debug(f"Wrote {trace.horizon} rounds to {trace_path}")
    return trace_path, experts_path


def _read_csv(path: Path, columns: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"cannot read {path}: {e}", field=str(path)) from e
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ConfigError(f"missing columns {missing}", field=str(path))
    return frame


def read_trace(trace_path: Path, learner: str, experts_path: Optional[Path] = None,
               expected_horizon: Optional[int] = None) -> RunTrace:
    """Load a trace written by write_trace; experts.csv defaults to the sibling file"""
    trace_path = Path(trace_path)
    experts_path = Path(experts_path) if experts_path else trace_path.with_name(EXPERTS_FILE)
    frame = _read_csv(trace_path, TRACE_COLUMNS)

    if expected_horizon is not None and len(frame) != expected_horizon:
        raise ConfigError(f"trace has {len(frame)} rounds but the configuration expects {expected_horizon}",
                          field='trace')
    if not np.array_equal(frame['round'].to_numpy(), np.arange(1, len(frame) + 1)):
        raise ConfigError("rounds must run 1..T without gaps", field='trace.round')

    prediction_columns = [c for c in frame.columns if c.startswith('w_')]
    expert_losses: Dict[int, np.ndarray] = {}
    if experts_path.exists():
        experts = _read_csv(experts_path, EXPERT_COLUMNS).sort_values(['expert_start', 'round'])
        for start, group in experts.groupby('expert_start', sort=True):
            expert_losses[int(start)] = group['expert_loss'].to_numpy(dtype=np.float64)

    trace = RunTrace(
        learner=learner,
        predictions=frame[prediction_columns].to_numpy(dtype=np.float64),
        learner_losses=frame['learner_loss'].to_numpy(dtype=np.float64),
        active_experts=frame['active_experts'].to_numpy(dtype=np.int64),
        marker_flags=frame['marker_flag'].to_numpy().astype(bool),
        expert_losses=expert_losses,
    )
    trace.validate()
    return trace


def write_summary(document: Mapping, directory: Path, filename: str = SUMMARY_FILE) -> Path:
    """Deterministic JSON (sorted keys, no timestamps) so reruns compare byte for byte"""
    path = Path(directory) / filename
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_summary(path: Path) -> Dict[str, object]:
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read summary: {e}", field=str(path)) from e


def trace_aggregates(trace: RunTrace) -> Dict[str, object]:
    """Per-run aggregates derivable from the trace alone"""
    aggregates: Dict[str, object] = {
        'rounds': trace.horizon,
        'total_loss': float(np.sum(trace.learner_losses)),
        'max_active_experts': int(trace.active_experts.max()) if trace.horizon else 0,
        'experts_created': len(trace.expert_losses),
    }
    if trace.learner == 'sacs-cpgc':
        aggregates['marker_rounds'] = trace.markers
    return aggregates
