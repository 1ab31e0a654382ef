"""
Closed-form tests for when matched-filter (MRT) beamforming is sum-rate optimal.

Every verdict keeps the evaluated inequality chain so a caller can see how far
a channel is from the boundary. ND conditions use the channel and P_max as is;
DD conditions are evaluated on the effective channels sqrt(P_max)*h, so every
squared norm below is a received power.
"""
from __future__ import annotations
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from .channel import Channel
from .config import TOL_BALANCE, TOL_BOUNDARY
from .linalg import cos2, norm, proj_orth, unit
from .rates import DecodingStructure


class MrtStrategy(Enum):
    SELFISH_PAIR = "selfish_pair"
    INTERFERENCE_PAIR = "interference_pair"
    USER_SELFISH = "user_selfish"
    USER_INTERFERENCE = "user_interference"


@dataclass(frozen=True)
class InequalityChain:
    """values[0] op values[1] op ...; op is '<' where strict[k] else '<='."""
    values: Tuple[float, ...]
    strict: Tuple[bool, ...]

    @property
    def holds(self) -> bool:
        for k, s in enumerate(self.strict):
            a, b = self.values[k], self.values[k + 1]
            if math.isnan(a) or math.isnan(b):
                return False
            if (a >= b) if s else (a > b):
                return False
        return True

    @property
    def boundary(self) -> bool:
        for k in range(len(self.strict)):
            a, b = self.values[k], self.values[k + 1]
            if math.isfinite(a) and math.isfinite(b) and abs(a - b) <= TOL_BOUNDARY * max(1.0, abs(a), abs(b)):
                return True
        return False

    @property
    def lhs(self) -> float:
        return self.values[0]

    @property
    def mid(self) -> float:
        return self.values[1] if len(self.values) > 2 else math.nan

    @property
    def rhs(self) -> float:
        return self.values[-1]


def _chain(*values: float, strict: Tuple[bool, ...]) -> InequalityChain:
    return InequalityChain(tuple(float(v) for v in values), strict)


@dataclass(frozen=True)
class MrtVerdict:
    structure: DecodingStructure
    strategy: MrtStrategy
    chains: Tuple[InequalityChain, ...]
    user: Optional[int] = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return bool(self.chains) and all(c.holds for c in self.chains)

    @property
    def boundary(self) -> bool:
        return any(c.boundary for c in self.chains)

    def _shown(self) -> Optional[InequalityChain]:
        if not self.chains:
            return None
        for c in self.chains:
            if not c.holds:
                return c
        return self.chains[0]

    @property
    def lhs(self) -> float:
        c = self._shown()
        return c.lhs if c else math.nan

    @property
    def mid(self) -> float:
        c = self._shown()
        return c.mid if c else math.nan

    @property
    def rhs(self) -> float:
        c = self._shown()
        return c.rhs if c else math.nan


def _sq(x) -> float:
    return norm(x) ** 2


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.inf if num > 0.0 else math.nan
    return num / den


def nd_mrt_check(ch: Channel, p_max: float,
                 structure: DecodingStructure = DecodingStructure.ND) -> Tuple[MrtVerdict, MrtVerdict]:
    """
    (selfish, interference) verdicts for the pairs (unit(h11), unit(h22)) and
    (unit(h21), unit(h22)). The weights c1, c2 are taken at w2 = unit(h22).

    With T = 1 + g21 + g22 and D = (1 + g22)(1 + g11/(1 + g12)), w1 = unit(h11)
    is the best w1 only if the user-1 balance point lambda1_b exists and lies at
    or below lambda1_mrt, i.e. T >= D at the pair, while w2 = unit(h22) is the best
    w2 only if T <= D. The selfish pair therefore holds on the boundary T == D
    alone; off it, moving w2 towards zero forcing raises D at first order.
    """
    p = p_max
    n11, n21, n12, n22 = _sq(ch.h11), _sq(ch.h21), _sq(ch.h12), _sq(ch.h22)
    cos1 = cos2(ch.h11, ch.h21)
    cos2_ = cos2(ch.h22, ch.h12)
    leak2 = n12 * cos2_ * p

    c1 = p / (leak2 + 1.0)
    c2 = p / (n22 * p + 1.0)
    x = math.sqrt(n11 * n21 * cos1)
    perp = _sq(proj_orth(ch.h11, ch.h21))
    den = c2 * n21 - 2.0 * math.sqrt(c1 * c2) * x + c1 * n11
    k = (1.0 + n22 * p) / (1.0 + leak2)

    # no crossing along W_1 means D > T everywhere and interference MRT wins for user 1
    crossing = math.sqrt(c2) * n21 >= math.sqrt(c1) * x and perp > 0.0
    if den > TOL_BALANCE:
        lam_b = c1 * perp / den if crossing else math.nan
        selfish = MrtVerdict(structure, MrtStrategy.SELFISH_PAIR, (
            _chain(lam_b, cos1, strict=(False,)),
            _chain(cos1 * n21, k * n11, strict=(False,)),
        ))
    else:
        selfish = MrtVerdict(structure, MrtStrategy.SELFISH_PAIR, (), note="balancing denominator vanishes")
    interference = MrtVerdict(structure, MrtStrategy.INTERFERENCE_PAIR,
                              (_chain(n21, k * n11 * cos1, strict=(False,)),))
    return selfish, interference


def dn_mrt_check(ch: Channel, p_max: float) -> Tuple[MrtVerdict, MrtVerdict]:
    """ND verdicts with the users swapped: pairs (unit(h11), unit(h22)) and (unit(h11), unit(h12))."""
    return nd_mrt_check(ch.swap_users(), p_max, DecodingStructure.DN)


def dd_mrt_check(ch: Channel, p_max: float) -> Tuple[MrtVerdict, MrtVerdict, Tuple[MrtVerdict, ...]]:
    """
    (selfish_pair, interference_pair, per_user) for DD.

    per_user holds, for users 1 and 2, the interference-MRT verdict
    (w_i = unit(h_ji) against a partner on its own interference MRT) followed
    by the selfish-MRT verdict (w_i = unit(h_ii) against a selfish partner).
    """
    e = ch.effective(p_max)
    dd = DecodingStructure.DD
    n = {1: _sq(e.h11), 2: _sq(e.h22)}        # ||h_ii||^2
    leak = {1: _sq(e.h21), 2: _sq(e.h12)}     # ||h_ji||^2
    cs = {1: cos2(ch.h11, ch.h21), 2: cos2(ch.h22, ch.h12)}

    per_user = []
    for i in (1, 2):
        j = 3 - i
        # partner on interference MRT unit(h_ij): g_jj = ||h_jj||^2 cos^2(theta_j), g_ij = ||h_ij||^2
        g_jj = n[j] * cs[j]
        g_ij = leak[j]
        mid = n[i] * cs[i]
        per_user.append(MrtVerdict(dd, MrtStrategy.USER_INTERFERENCE, (
            _chain(leak[i] / (1.0 + g_jj), mid, _ratio(g_ij, g_jj) - 1.0, strict=(False, False)),), user=i))
        # partner on selfish MRT unit(h_jj): g_jj = ||h_jj||^2
        per_user.append(MrtVerdict(dd, MrtStrategy.USER_SELFISH, (
            _chain((1.0 + n[j]) * n[i], leak[i] * cs[i], strict=(False,)),), user=i))

    selfish_pair = MrtVerdict(dd, MrtStrategy.SELFISH_PAIR, (
        _chain(_ratio((1.0 + n[2]) * n[1], leak[1]), cs[1], strict=(False,)),
        _chain(_ratio((1.0 + n[1]) * n[2], leak[2]), cs[2], strict=(False,)),
    ))
    both = n[1] * n[2] * cs[1] * cs[2]
    interference_pair = MrtVerdict(dd, MrtStrategy.INTERFERENCE_PAIR, (
        _chain(leak[2] - n[2] * cs[2], both, leak[1] * n[2] * cs[2] / (1.0 + n[2] * cs[2]), strict=(False, False)),
        _chain(leak[1] - n[1] * cs[1], both, leak[2] * n[1] * cs[1] / (1.0 + n[1] * cs[1]), strict=(False, False)),
    ))
    return selfish_pair, interference_pair, tuple(per_user)


def mrt_pairs(structure: DecodingStructure, ch: Channel) -> Dict[MrtStrategy, Tuple[np.ndarray, np.ndarray]]:
    """Matched-filter beamformer pairs checked for a structure."""
    u11, u21, u12, u22 = unit(ch.h11), unit(ch.h21), unit(ch.h12), unit(ch.h22)
    selfish = (u11, u22)
    if structure == DecodingStructure.ND:
        return {MrtStrategy.SELFISH_PAIR: selfish, MrtStrategy.INTERFERENCE_PAIR: (u21, u22)}
    if structure == DecodingStructure.DN:
        return {MrtStrategy.SELFISH_PAIR: selfish, MrtStrategy.INTERFERENCE_PAIR: (u11, u12)}
    if structure == DecodingStructure.DD:
        return {MrtStrategy.SELFISH_PAIR: selfish, MrtStrategy.INTERFERENCE_PAIR: (u21, u12)}
    return {MrtStrategy.SELFISH_PAIR: selfish}
