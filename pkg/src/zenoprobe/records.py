"""Measurement records and the per-round random streams that produce them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

PLUS = "plus"
MINUS = "minus"


def round_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for round ``index`` of a campaign seeded with ``seed``.

    Streams depend only on ``(seed, index)``, so rounds can be generated in any
    order or in parallel and still give the same record.
    """
    return np.random.default_rng([int(seed), int(index)])


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a sub-campaign, e.g. one stage of an adaptive schedule."""
    ss = np.random.SeedSequence([int(seed), *map(int, path)])
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0])


@dataclass(frozen=True)
class RoundResult:
    survived: bool
    outcome: Optional[str]

    def __post_init__(self):
        if self.survived != (self.outcome is not None):
            raise ValueError("outcome must be None exactly when the round did not survive")
        if self.outcome not in (None, PLUS, MINUS):
            raise ValueError(f"unknown outcome {self.outcome!r}")


@dataclass(frozen=True)
class MeasurementRecord:
    rounds: tuple
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return len(self.rounds)

    @property
    def survived(self) -> int:
        return sum(r.survived for r in self.rounds)

    @property
    def minus_count(self) -> int:
        return sum(r.outcome == MINUS for r in self.rounds)

    @property
    def plus_count(self) -> int:
        return sum(r.outcome == PLUS for r in self.rounds)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "params": dict(self.params),
            "rounds": [{"survived": r.survived, "outcome": r.outcome} for r in self.rounds],
        }
