"""
Pareto-boundary beamformer families and rate-region sweeps.

Every family is the set of unit vectors sqrt(lam)*a + sqrt(1-lam)*b over an
orthonormal pair (a, b) spanning {h_ii, h_ji}:

- W_i: a along h_ji (phase-aligned to h_ii), b the zero-forcing direction.
  Leakage |h_ji^H w|^2 = lam*||h_ji||^2 is linear in lam, desired power concave.
- V_i: a along h_ii (phase-aligned to h_ji), b orthogonal to h_ii.
  Desired power |h_ii^H w|^2 = lam*||h_ii||^2 is linear in lam.

NN and ND/DN boundaries are swept over W_1 x W_2, DD over V_1 x V_2.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .channel import Channel
from .config import Grids
from .errors import RangeError
from .linalg import cos2, is_parallel, phase_aligned_unit, proj_orth, unit
from .rates import (DecodingStructure, RatePoint, TxStrategy, beam_gains,
                    rate_pair_from_gains)

logger = logging.getLogger(__name__)

SISO_WARNING = ("channels h_%d%d and h_%d%d are parallel; the %s-family of user %d collapses to a "
                "single direction (the problem reduces to a SISO interference channel)")


class FamilyKind(Enum):
    W = "w"
    V = "v"


@dataclass(frozen=True, eq=False)
class LambdaFamily:
    kind: FamilyKind
    user: int
    basis_a: np.ndarray
    basis_b: np.ndarray
    lambda_mrt: float
    collapsed: bool = False

    def beam(self, lam: float) -> np.ndarray:
        return w_from_lambda(self, lam)

    def beams(self, lams) -> np.ndarray:
        return family_beams(self, lams)


def _family(ch: Channel, user: int, kind: FamilyKind) -> LambdaFamily:
    h_ii = ch.desired(user)
    h_ji = ch.leakage(user)
    j = 3 - user
    if kind == FamilyKind.W:
        linear, other_vec = h_ji, h_ii
    else:
        linear, other_vec = h_ii, h_ji

    a = phase_aligned_unit(linear, other_vec)
    if is_parallel(linear, other_vec):
        logger.warning(SISO_WARNING, user, user, j, user, kind.value.upper(), user)
        return LambdaFamily(kind, user, a, a, 1.0, collapsed=True)
    b = unit(proj_orth(other_vec, linear))
    return LambdaFamily(kind, user, a, b, cos2(h_ii, h_ji))


def w_family(ch: Channel, user: int) -> LambdaFamily:
    return _family(ch, user, FamilyKind.W)


def v_family(ch: Channel, user: int) -> LambdaFamily:
    return _family(ch, user, FamilyKind.V)


def family(ch: Channel, user: int, kind: FamilyKind) -> LambdaFamily:
    return _family(ch, user, kind)


def _check_lambdas(lams: np.ndarray) -> None:
    if lams.size and (np.any(~np.isfinite(lams)) or lams.min() < 0.0 or lams.max() > 1.0):
        raise RangeError(f"lambda must lie in [0, 1], got range [{lams.min()}, {lams.max()}]")


def w_from_lambda(fam: LambdaFamily, lam: float) -> np.ndarray:
    lam = float(lam)
    _check_lambdas(np.array([lam]))
    if fam.collapsed:
        return fam.basis_a.copy()
    return np.sqrt(lam) * fam.basis_a + np.sqrt(1.0 - lam) * fam.basis_b


def family_beams(fam: LambdaFamily, lams) -> np.ndarray:
    """Rows w(lam) for every lam."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    _check_lambdas(lams)
    if fam.collapsed:
        return np.tile(fam.basis_a, (lams.size, 1))
    return np.sqrt(lams)[:, None] * fam.basis_a[None, :] + np.sqrt(1.0 - lams)[:, None] * fam.basis_b[None, :]


def lambda_grid(n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    if n < 2:
        raise ValueError(f"grid size must be >= 2, got {n}")
    return np.linspace(lo, hi, n)


def power_grid(p_max: float, n: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"grid size must be >= 2, got {n}")
    return np.linspace(0.0, p_max, n)


@dataclass(frozen=True, eq=False)
class CandidateTuple:
    w1: np.ndarray
    w2: np.ndarray
    p1: float
    p2: float
    structure: DecodingStructure
    lambda1: float = float("nan")
    lambda2: float = float("nan")

    def strategy(self) -> TxStrategy:
        return TxStrategy(self.w1, self.w2, self.p1, self.p2)


def region_families(region: DecodingStructure, ch: Channel) -> Tuple[LambdaFamily, LambdaFamily]:
    kind = FamilyKind.V if region == DecodingStructure.DD else FamilyKind.W
    return family(ch, 1, kind), family(ch, 2, kind)


def region_powers(region: DecodingStructure, p_max: float, n_power: int) -> Tuple[np.ndarray, np.ndarray]:
    """Power grids of (user 1, user 2): the full-power user is pinned at p_max."""
    full = np.array([float(p_max)])
    grid = power_grid(p_max, n_power)
    if region == DecodingStructure.NN:
        return full, full
    if region == DecodingStructure.ND:
        return full, grid
    if region == DecodingStructure.DN:
        return grid, full
    return grid, grid


@dataclass(frozen=True, eq=False)
class RegionTable:
    """Flat sweep output in lambda1-major, lambda2, p1, p2 order."""
    structure: DecodingStructure
    lambda1: np.ndarray
    lambda2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    def __len__(self) -> int:
        return int(self.r1.size)

    def points(self) -> List[RatePoint]:
        return [RatePoint(float(a), float(b), self.structure) for a, b in zip(self.r1, self.r2)]


def iter_region_blocks(region: DecodingStructure, ch: Channel, p_max: float,
                       grids: Grids) -> Iterator[RegionTable]:
    """One RegionTable per lambda1 value, so large DD sweeps stay in memory."""
    if p_max < 0.0:
        raise ValueError(f"p_max must be non-negative, got {p_max}")
    f1, f2 = region_families(region, ch)
    lams = lambda_grid(grids.n_lambda)
    pw1, pw2 = region_powers(region, p_max, grids.n_power)

    b1 = family_beams(f1, lams)
    b2 = family_beams(f2, lams)
    a1, l1 = beam_gains(ch.h11, b1), beam_gains(ch.h21, b1)
    c2, l2 = beam_gains(ch.h22, b2), beam_gains(ch.h12, b2)

    # block axes: (lambda2, p1, p2)
    shape = (lams.size, pw1.size, pw2.size)
    lam2 = np.broadcast_to(lams[:, None, None], shape).ravel()
    q1 = np.broadcast_to(pw1[None, :, None], shape).ravel()
    q2 = np.broadcast_to(pw2[None, None, :], shape).ravel()
    g22 = np.broadcast_to(c2[:, None, None], shape).ravel() * q2
    g12 = np.broadcast_to(l2[:, None, None], shape).ravel() * q2
    for k, lam1 in enumerate(lams):
        g11 = a1[k] * q1
        g21 = l1[k] * q1
        r1, r2 = rate_pair_from_gains(region, g11, g21, g22, g12)
        yield RegionTable(region, np.full(lam2.size, lam1), lam2, q1, q2,
                          np.asarray(r1, dtype=float), np.asarray(r2, dtype=float))


def region_table(region: DecodingStructure, ch: Channel, p_max: float, grids: Grids) -> RegionTable:
    blocks = list(iter_region_blocks(region, ch, p_max, grids))
    return _concat(blocks)


def region_sweep(region: DecodingStructure, ch: Channel, p_max: float, grids: Grids) -> List[RatePoint]:
    return region_table(region, ch, p_max, grids).points()


def candidate_grid(region: DecodingStructure, ch: Channel, p_max: float,
                   n_lambda: int, n_power: int) -> List[CandidateTuple]:
    f1, f2 = region_families(region, ch)
    lams = lambda_grid(n_lambda)
    pw1, pw2 = region_powers(region, p_max, n_power)
    b1 = family_beams(f1, lams)
    b2 = family_beams(f2, lams)
    out = []
    for i, lam1 in enumerate(lams):
        for j, lam2 in enumerate(lams):
            for q1 in pw1:
                for q2 in pw2:
                    out.append(CandidateTuple(b1[i], b2[j], float(q1), float(q2), region,
                                              float(lam1), float(lam2)))
    return out


def pareto_front_indices(r1, r2) -> np.ndarray:
    """Indices of the non-dominated points, ordered by r1 ascending; exact duplicates kept once."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if r1.size == 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort((-r2, -r1))
    s2 = r2[order]
    prev = np.empty_like(s2)
    prev[0] = -np.inf
    np.maximum.accumulate(s2[:-1], out=prev[1:])
    keep = order[s2 > prev]
    return keep[::-1]


def pareto_filter(points: List[RatePoint]) -> List[RatePoint]:
    if not points:
        return []
    r1 = np.array([p.r1 for p in points])
    r2 = np.array([p.r2 for p in points])
    return [points[k] for k in pareto_front_indices(r1, r2)]


def region_frontier(region: DecodingStructure, ch: Channel, p_max: float, grids: Grids) -> RegionTable:
    """Pareto frontier of a sweep, filtered block by block."""
    parts: List[RegionTable] = []
    for block in iter_region_blocks(region, ch, p_max, grids):
        keep = pareto_front_indices(block.r1, block.r2)
        parts.append(_take(block, keep))
        if len(parts) > 8:
            parts = [_merge_front(parts)]
    return _merge_front(parts)


def _concat(parts: List[RegionTable]) -> RegionTable:
    cols = [np.concatenate([getattr(p, name) for p in parts])
            for name in ("lambda1", "lambda2", "p1", "p2", "r1", "r2")]
    return RegionTable(parts[0].structure, *cols)


def _take(t: RegionTable, idx: np.ndarray) -> RegionTable:
    return RegionTable(t.structure, t.lambda1[idx], t.lambda2[idx], t.p1[idx], t.p2[idx], t.r1[idx], t.r2[idx])


def _merge_front(parts: List[RegionTable]) -> RegionTable:
    merged = _concat(parts)
    return _take(merged, pareto_front_indices(merged.r1, merged.r2))


@dataclass(frozen=True, eq=False)
class PowerRegionTable:
    user: int
    lam: np.ndarray
    power: np.ndarray
    desired: np.ndarray
    interference: np.ndarray


def power_region_table(ch: Channel, user: int, p_max: float, n_lambda: int, n_power: int) -> PowerRegionTable:
    fam = w_family(ch, user)
    lams = lambda_grid(n_lambda)
    pw = power_grid(p_max, n_power)
    beams = family_beams(fam, lams)
    d = beam_gains(ch.desired(user), beams)
    x = beam_gains(ch.leakage(user), beams)
    return PowerRegionTable(
        user=user,
        lam=np.repeat(lams, pw.size),
        power=np.tile(pw, lams.size),
        desired=np.outer(d, pw).ravel(),
        interference=np.outer(x, pw).ravel(),
    )


def power_region_boundary(ch: Channel, user: int, p_max: float, n_lambda: int,
                          n_power: int) -> List[Tuple[float, float]]:
    """(desired, interference) received powers of user `user` over W_i x [0, p_max]."""
    t = power_region_table(ch, user, p_max, n_lambda, n_power)
    return list(zip(t.desired.tolist(), t.interference.tolist()))


def power_region_anchors(ch: Channel, user: int, p_max: float) -> Dict[str, Tuple[float, float]]:
    """Corner points at full power: A zero forcing, B selfish MRT, C interference MRT."""
    fam = w_family(ch, user)
    h_ii, h_ji = ch.desired(user), ch.leakage(user)
    out = {}
    for name, lam in (("A", 0.0), ("B", fam.lambda_mrt), ("C", 1.0)):
        w = w_from_lambda(fam, lam)
        out[name] = (float(beam_gains(h_ii, w, p_max)), float(beam_gains(h_ji, w, p_max)))
    return out

