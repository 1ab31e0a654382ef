from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable


@dataclass
class FrequencyStats:
    hits: int
    trials: int

    @property
    def misses(self) -> int:
        return self.trials - self.hits

    @property
    def rate(self) -> float:
        return self.hits / self.trials if self.trials else 0.0


def mean_of(values: Iterable[float]) -> float:
    vals = list(values)
    if not vals:
        return 0.0
    return sum(vals) / len(vals)
