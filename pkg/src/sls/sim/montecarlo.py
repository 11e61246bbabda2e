"""Monte-Carlo study of the all-frames-missed probability.

With per-frame detection probability p and n frames per trigger, the chance
that every frame misses is (1-p)^n. The estimator draws each frame through
the same Bernoulli path the simulator's dropout detector uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["sample_frame_detected", "all_miss_probability",
           "MissProbabilityResult", "miss_probability_mc"]


def sample_frame_detected(rng: np.random.Generator, p: float) -> bool:
    """Single Bernoulli draw: is the marker detected in this frame?

    Shared by DropoutDetector and the Monte-Carlo estimator so both walk
    the identical sampling path.
    """
    return rng.random() < p


def all_miss_probability(p: float, frames: int) -> float:
    """Closed form (1-p)^frames; the oracle the estimator is checked against."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    return (1.0 - p) ** frames


@dataclass(frozen=True)
class MissProbabilityResult:
    estimate: float
    standard_error: float
    trials: int
    all_miss_count: int
    closed_form: float

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "standard_error": self.standard_error,
            "trials": self.trials,
            "all_miss_count": self.all_miss_count,
            "closed_form": self.closed_form,
        }


def miss_probability_mc(per_frame_p: float, frames: int = 3,
                        trials: int = 1_000_000, seed: int = 0) -> MissProbabilityResult:
    """Estimate the all-miss rate over `trials` simulated triggers."""
    if not 0.0 <= per_frame_p <= 1.0:
        raise ValueError("per_frame_p must be in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    misses = 0
    for _ in range(trials):
        # One draw per frame, as the dropout detector does (no short-circuit).
        detected = [sample_frame_detected(rng, per_frame_p) for _ in range(frames)]
        if not any(detected):
            misses += 1
    estimate = misses / trials
    stderr = math.sqrt(max(estimate * (1.0 - estimate), 0.0) / trials)
    return MissProbabilityResult(estimate, stderr, trials, misses,
                                 all_miss_probability(per_frame_p, frames))
