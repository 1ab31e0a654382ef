"""Low-complexity structure selection over a fixed list of beamformer pairs plus TDMA."""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .channel import Channel
from .errors import DegenerateDirection
from .linalg import proj_orth, unit
from .rates import DecodingStructure, TxStrategy, rate_pair, tdma_sum_rate

logger = logging.getLogger(__name__)

NN, ND, DN, DD = DecodingStructure.NN, DecodingStructure.ND, DecodingStructure.DN, DecodingStructure.DD

_Pair = Callable[[Channel], Tuple[np.ndarray, np.ndarray]]

# listing order is the tie-break order
PAIRS: Tuple[Tuple[str, DecodingStructure, _Pair], ...] = (
    ("nn_zf", NN, lambda ch: (unit(proj_orth(ch.h11, ch.h21)), unit(proj_orth(ch.h22, ch.h12)))),
    ("nn_mrt", NN, lambda ch: (unit(ch.h11), unit(ch.h22))),
    ("nd_interference", ND, lambda ch: (unit(ch.h21), unit(ch.h22))),
    ("nd_selfish", ND, lambda ch: (unit(ch.h11), unit(ch.h22))),
    ("dn_interference", DN, lambda ch: (unit(ch.h11), unit(ch.h12))),
    ("dn_selfish", DN, lambda ch: (unit(ch.h11), unit(ch.h22))),
    ("dd_interference", DD, lambda ch: (unit(ch.h21), unit(ch.h12))),
    ("dd_selfish", DD, lambda ch: (unit(ch.h11), unit(ch.h22))),
    ("dd_mixed_21_22", DD, lambda ch: (unit(ch.h21), unit(ch.h22))),
    ("dd_mixed_11_12", DD, lambda ch: (unit(ch.h11), unit(ch.h12))),
)

TDMA_LABEL = "tdma"


@dataclass(frozen=True, eq=False)
class HeuristicEntry:
    label: str
    structure: Optional[DecodingStructure]      # None for TDMA
    pair: Optional[Tuple[np.ndarray, np.ndarray]]
    rate: float

    @property
    def is_tdma(self) -> bool:
        return self.structure is None


@dataclass(frozen=True, eq=False)
class HeuristicResult:
    choice: HeuristicEntry
    table: Tuple[HeuristicEntry, ...]

    @property
    def rate(self) -> float:
        return self.choice.rate

    @property
    def pair(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        return self.choice.pair


def simple_select(ch: Channel, p_max: float, share: float = 0.5) -> HeuristicResult:
    entries: List[HeuristicEntry] = []
    for label, structure, make in PAIRS:
        try:
            w1, w2 = make(ch)
        except DegenerateDirection as e:
            logger.warning("heuristic pair %s skipped: %s", label, e)
            continue
        r = rate_pair(structure, ch, TxStrategy(w1, w2, p_max, p_max)).total
        entries.append(HeuristicEntry(label, structure, (w1, w2), r))
    entries.append(HeuristicEntry(TDMA_LABEL, None, None, tdma_sum_rate(ch, p_max, share)))

    choice = entries[0]
    for e in entries[1:]:
        if e.rate > choice.rate:
            choice = e
    return HeuristicResult(choice, tuple(entries))
