"""The three reward signals and the evaluation metric.

Mid-dialogue, the tracking agents receive turn penalty plus basic score
(the distance penalty toward the teacher belief); the last turn pays the
success reward.  The policy agent sees turn penalty and success reward
only.  Evaluation uses success minus 0.05 per turn.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RewardConfig:
    turn_penalty: float = -0.05
    success_reward: float = 1.0
    trust: dict = field(default_factory=lambda: {"goal": 0.2, "request": 0.2, "method": 4.0})

    def __post_init__(self):
        if self.turn_penalty > 0:
            raise ValueError("turn penalty must be <= 0")
        if self.success_reward < 0:
            raise ValueError("success reward must be >= 0")
        if any(a < 0 for a in self.trust.values()):
            raise ValueError("trust factors must be >= 0")


def basic_score(b_e, b_a, alpha):
    """Distance penalty -alpha * ||b_e - b_a||_2 toward the teacher."""
    b_e = np.asarray(b_e, dtype=float)
    b_a = np.asarray(b_a, dtype=float)
    if b_e.shape != b_a.shape:
        raise ValueError(f"shape mismatch {b_e.shape} vs {b_a.shape}")
    if alpha < 0:
        raise ValueError("trust factor must be >= 0")
    return -alpha * float(np.linalg.norm(b_e - b_a))


def tracking_turn_reward(cfg, b_e, b_a, alpha, terminal, success):
    """Mid-dialogue: turn penalty + basic score; last turn: success reward."""
    if terminal:
        return cfg.success_reward if success else 0.0
    return cfg.turn_penalty + basic_score(b_e, b_a, alpha)


def policy_turn_reward(cfg, terminal, success):
    if terminal:
        return cfg.success_reward if success else 0.0
    return cfg.turn_penalty


def evaluation_reward(success, turns):
    """Per-episode evaluation metric: success minus 0.05 per turn.

    Accepts a success rate and mean turn count as well, for aggregate use.
    """
    if turns < 1:
        raise ValueError("turn count must be >= 1")
    return float(success) - 0.05 * turns
