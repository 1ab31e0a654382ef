"""
Achievable rates of the four decoding structures.

A receiver either treats interference as noise (N) or decodes it first (D).
All quantities are in bits per channel use with unit noise power. Gains follow
g_jk = |h_jk^H w_k|^2 P_k; in vectorised helpers the four gains are passed in
the fixed order (g11, g21, g22, g12), i.e. user 1's (desired, leaked) powers
followed by user 2's.
"""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from .channel import Channel

_LN2 = np.log(2.0)
_NORM_TOL = 1e-10


class DecodingStructure(Enum):
    NN = "nn"
    ND = "nd"
    DN = "dn"
    DD = "dd"

    @property
    def label(self) -> str:
        return self.value.upper()

    def swapped(self) -> "DecodingStructure":
        return {DecodingStructure.ND: DecodingStructure.DN,
                DecodingStructure.DN: DecodingStructure.ND}.get(self, self)


# tie-break order
STRUCTURES: Tuple[DecodingStructure, ...] = (
    DecodingStructure.NN, DecodingStructure.ND, DecodingStructure.DN, DecodingStructure.DD)


@dataclass(frozen=True, eq=False)
class TxStrategy:
    w1: np.ndarray
    w2: np.ndarray
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("w1", "w2"):
            w = np.asarray(getattr(self, name), dtype=np.complex128)
            if abs(np.linalg.norm(w) - 1.0) > _NORM_TOL:
                raise ValueError(f"{name} must be unit-norm, got norm {np.linalg.norm(w)}")
            object.__setattr__(self, name, w)
        if self.p1 < 0.0 or self.p2 < 0.0:
            raise ValueError(f"powers must be non-negative, got ({self.p1}, {self.p2})")


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float
    structure: DecodingStructure

    @property
    def total(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class Gains:
    g11: float
    g21: float
    g22: float
    g12: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.g11, self.g21, self.g22, self.g12)


def beam_gains(h: np.ndarray, beams: np.ndarray, p=1.0) -> np.ndarray:
    """|h^H w|^2 p for every row w of `beams` (or a single beamformer)."""
    return np.abs(np.asarray(beams) @ np.conj(h)) ** 2 * p


def gains(ch: Channel, s: TxStrategy) -> Gains:
    return Gains(
        g11=float(beam_gains(ch.h11, s.w1, s.p1)),
        g21=float(beam_gains(ch.h21, s.w1, s.p1)),
        g22=float(beam_gains(ch.h22, s.w2, s.p2)),
        g12=float(beam_gains(ch.h12, s.w2, s.p2)),
    )


def _log2_1p(x):
    return np.log1p(x) / _LN2


def rate_pair_from_gains(structure: DecodingStructure, g11, g21, g22, g12):
    """(r1, r2), broadcasting over array inputs."""
    if structure == DecodingStructure.NN:
        return _log2_1p(g11 / (1.0 + g12)), _log2_1p(g22 / (1.0 + g21))
    if structure == DecodingStructure.ND:
        r1 = np.minimum(_log2_1p(g11 / (1.0 + g12)), _log2_1p(g21 / (1.0 + g22)))
        return r1, _log2_1p(g22) + 0.0 * r1
    if structure == DecodingStructure.DN:
        r2 = np.minimum(_log2_1p(g22 / (1.0 + g21)), _log2_1p(g12 / (1.0 + g11)))
        return _log2_1p(g11) + 0.0 * r2, r2
    r1 = np.minimum(_log2_1p(g11), _log2_1p(g21 / (1.0 + g22)))
    r2 = np.minimum(_log2_1p(g22), _log2_1p(g12 / (1.0 + g11)))
    return r1, r2


def sum_rate_terms(structure: DecodingStructure, g11, g21, g22, g12) -> tuple:
    """
    Linear-domain terms whose minimum equals 2**(sum rate).

    Every term is monotone in each gain; TERM_SIGNS records the directions.
    """
    if structure == DecodingStructure.NN:
        return ((1.0 + g11 / (1.0 + g12)) * (1.0 + g22 / (1.0 + g21)),)
    if structure == DecodingStructure.ND:
        return ((1.0 + g11 / (1.0 + g12)) * (1.0 + g22), 1.0 + g21 + g22)
    if structure == DecodingStructure.DN:
        return ((1.0 + g11) * (1.0 + g22 / (1.0 + g21)), 1.0 + g11 + g12)
    return zdd_from_gains(g11, g21, g22, g12)


# +1 increasing, -1 decreasing, 0 independent; gain order (g11, g21, g22, g12)
TERM_SIGNS: Dict[DecodingStructure, Tuple[Tuple[int, int, int, int], ...]] = {
    DecodingStructure.NN: ((+1, -1, +1, -1),),
    DecodingStructure.ND: ((+1, 0, +1, -1), (0, +1, +1, 0)),
    DecodingStructure.DN: ((+1, -1, +1, 0), (+1, 0, 0, +1)),
    DecodingStructure.DD: ((+1, 0, +1, 0), (+1, 0, 0, +1), (0, +1, +1, 0), (-1, +1, -1, +1)),
}


def zdd_from_gains(g11, g21, g22, g12) -> tuple:
    z1 = (1.0 + g11) * (1.0 + g22)
    z2 = 1.0 + g11 + g12
    z3 = 1.0 + g21 + g22
    z4 = (1.0 + g12 / (1.0 + g11)) * (1.0 + g21 / (1.0 + g22))
    return z1, z2, z3, z4


def sum_rate_from_gains(structure: DecodingStructure, g11, g21, g22, g12):
    terms = sum_rate_terms(structure, g11, g21, g22, g12)
    m = terms[0]
    for t in terms[1:]:
        m = np.minimum(m, t)
    return np.log2(m)


def _user_gains(g: Gains, user: int) -> Tuple[float, float, float, float]:
    # (own desired, interference received, own leakage, partner desired)
    if user == 1:
        return g.g11, g.g12, g.g21, g.g22
    if user == 2:
        return g.g22, g.g21, g.g12, g.g11
    raise ValueError(f"user must be 1 or 2, got {user}")


def rate_C(ch: Channel, s: TxStrategy, user: int) -> float:
    g_ii, _, _, _ = _user_gains(gains(ch, s), user)
    return float(_log2_1p(g_ii))


def rate_D(ch: Channel, s: TxStrategy, user: int) -> float:
    g_ii, g_ij, _, _ = _user_gains(gains(ch, s), user)
    return float(_log2_1p(g_ii / (1.0 + g_ij)))


def rate_T(ch: Channel, s: TxStrategy, user: int) -> float:
    """Rate at which the other receiver can decode user `user`'s message."""
    _, _, g_ji, g_jj = _user_gains(gains(ch, s), user)
    return float(_log2_1p(g_ji / (1.0 + g_jj)))


def rate_pair(structure: DecodingStructure, ch: Channel, s: TxStrategy) -> RatePoint:
    r1, r2 = rate_pair_from_gains(structure, *gains(ch, s).as_tuple())
    return RatePoint(float(r1), float(r2), structure)


def sum_rate(structure: DecodingStructure, ch: Channel, s: TxStrategy) -> float:
    return rate_pair(structure, ch, s).total


def zdd_terms(ch: Channel, s: TxStrategy) -> Tuple[float, float, float, float]:
    z = zdd_from_gains(*gains(ch, s).as_tuple())
    return tuple(float(t) for t in z)


def single_user_rate(ch: Channel, user: int, p_max: float) -> float:
    h = ch.desired(user)
    return float(_log2_1p(np.vdot(h, h).real * p_max))


def tdma_sum_rate(ch: Channel, p_max: float, share: float = 0.5) -> float:
    """Time sharing between the two matched-filter single-user points; `share` is user 1's slot."""
    if p_max < 0.0:
        raise ValueError(f"p_max must be non-negative, got {p_max}")
    if not 0.0 <= share <= 1.0:
        raise ValueError(f"share must lie in [0, 1], got {share}")
    return share * single_user_rate(ch, 1, p_max) + (1.0 - share) * single_user_rate(ch, 2, p_max)
