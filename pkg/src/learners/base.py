"""
Common interface of the online learners driven by the experiment harness
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from src.geometry.losses import LossFunction


@dataclass
class RoundRecord:
    """What one round of play produced"""
    round: int
    prediction: np.ndarray
    learner_loss: float
    active_experts: int
    marker_flag: bool = False
    marker_count: int = 0
    # loss f_t(w_{t,i}) of every expert that predicted this round, keyed by start round
    expert_losses: Dict[int, float] = field(default_factory=dict)


class OnlineLearner(ABC):
    """Plays one decision per round and then observes that round's loss"""

    name: str = 'learner'

    @abstractmethod
    def play(self, f: LossFunction) -> RoundRecord:
        """Submit w_t, receive f_t, update internal state"""

    def run(self, losses: Sequence[LossFunction]) -> List[RoundRecord]:
        return [self.play(f) for f in losses]

    def summary(self) -> Dict[str, object]:
        return {}
