"""
Brute-force grid search over beamformers and powers.

The oracle makes no use of the full-power or candidate-set results, so it can
check them. Each user contributes a cloud of (desired, leaked) received powers
over beam grid x power grid. The exact maximum over the product of the two
clouds is found with a bounded search: clouds are binned into boxes, every box
pair gets an upper bound from the monotonicity of the sum-rate terms, and
box pairs are evaluated exhaustively in decreasing bound order until the bound
drops below the incumbent.
"""
from __future__ import annotations
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import config
from .channel import Channel
from .errors import ParallelChannels, UnsupportedDimension
from .linalg import inner
from .pareto import (CandidateTuple, LambdaFamily, pareto_front_indices, power_grid, region_families,
                     w_family)
from .rates import (TERM_SIGNS, DecodingStructure, RatePoint, beam_gains,
                    rate_pair_from_gains, sum_rate_terms)

logger = logging.getLogger(__name__)

_BOX_TARGET = 1024       # points per box
_PAIRS_PER_TASK = 16
_CHUNK_ELEMENTS = 1 << 22


class GridScope(Enum):
    SUBSPACE = "subspace"
    FULL_SPHERE = "full_sphere"


@dataclass(frozen=True)
class GridSpec:
    n_lambda: int = config.ORACLE_N_LAMBDA
    n_phase: int = config.ORACLE_N_PHASE
    n_power: int = config.ORACLE_N_POWER
    scope: GridScope = GridScope.SUBSPACE

    def __post_init__(self):
        if self.n_lambda < 2 or self.n_phase < 2:
            raise ValueError(f"oracle grids need n_lambda, n_phase >= 2, got {self.n_lambda}, {self.n_phase}")
        if self.n_power < 2:
            raise ValueError(f"oracle power grid needs >= 2 points, got {self.n_power}")


def sphere_spec(n_power: int = config.ORACLE_N_POWER) -> GridSpec:
    a, b = config.SPHERE_RESOLUTION
    return GridSpec(a, b, n_power, GridScope.FULL_SPHERE)


@dataclass(frozen=True, eq=False)
class BeamGrid:
    """Beamformers as rows, with their grid coordinates (lambda, phase) or (polar, azimuth)."""
    beams: np.ndarray
    coords: np.ndarray

    def __len__(self) -> int:
        return int(self.beams.shape[0])


def _phases(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def subspace_grid(ch: Channel, user: int, spec: GridSpec) -> BeamGrid:
    """w = sqrt(lam) a + e^{i phi} sqrt(1 - lam) b on the W_i basis; phi = 0 gives the real family."""
    fam = w_family(ch, user)
    if fam.collapsed:
        raise ParallelChannels(f"h_{user}{user} and its cross link are parallel")
    lams = np.linspace(0.0, 1.0, spec.n_lambda)
    phis = _phases(spec.n_phase)
    rot = np.exp(1j * phis)
    rot[0] = 1.0
    ca = np.repeat(np.sqrt(lams), phis.size)
    cb = (np.sqrt(1.0 - lams)[:, None] * rot[None, :]).ravel()
    beams = ca[:, None] * fam.basis_a[None, :] + cb[:, None] * fam.basis_b[None, :]
    coords = np.column_stack([np.repeat(lams, phis.size), np.tile(phis, lams.size)])
    return BeamGrid(beams, coords)


def full_sphere_grid(n: int = 2, resolution: Tuple[int, int] = config.SPHERE_RESOLUTION) -> BeamGrid:
    """All unit vectors of C^2 up to a global phase: (cos a, e^{ib} sin a)."""
    if n != 2:
        raise UnsupportedDimension(f"full-sphere grid is only available for n=2, got {n}")
    na, nb = resolution
    if na < 2 or nb < 2:
        raise ValueError(f"resolution must be >= (2, 2), got {resolution}")
    a = np.linspace(0.0, np.pi / 2, na)
    b = _phases(nb)
    aa = np.repeat(a, nb)
    bb = np.tile(b, na)
    beams = np.column_stack([np.cos(aa) + 0j, np.exp(1j * bb) * np.sin(aa)])
    return BeamGrid(beams, np.column_stack([aa, bb]))


def user_grid(ch: Channel, user: int, spec: GridSpec) -> BeamGrid:
    if spec.scope == GridScope.FULL_SPHERE:
        return full_sphere_grid(ch.n, (spec.n_lambda, spec.n_phase))
    return subspace_grid(ch, user, spec)


@dataclass(frozen=True, eq=False)
class _Cloud:
    grid: BeamGrid
    powers: np.ndarray
    desired: np.ndarray   # flat index = beam * n_power + power
    leaked: np.ndarray

    def decode(self, k: int) -> Tuple[int, int]:
        return divmod(int(k), self.powers.size)


def _cloud(ch: Channel, user: int, spec: GridSpec, p_max: float) -> _Cloud:
    grid = user_grid(ch, user, spec)
    pw = power_grid(p_max, spec.n_power)
    d = np.outer(beam_gains(ch.desired(user), grid.beams), pw).ravel()
    x = np.outer(beam_gains(ch.leakage(user), grid.beams), pw).ravel()
    return _Cloud(grid, pw, d, x)


def _orientation(signs: Sequence[Sequence[int]], cols: Tuple[int, int]) -> Optional[Tuple[int, int]]:
    """Per-coordinate direction shared by every function, or None when some coordinate is mixed."""
    out = []
    for c in cols:
        seen = {s[c] for s in signs if s[c] != 0}
        if len(seen) > 1:
            return None
        out.append(seen.pop() if seen else 0)
    return out[0], out[1]


def _prune(desired: np.ndarray, leaked: np.ndarray, orient: Optional[Tuple[int, int]]) -> np.ndarray:
    """Indices of the cloud points not dominated in the oriented coordinates, ascending."""
    if orient is None:
        return np.arange(desired.size)
    keep = pareto_front_indices(orient[0] * desired, orient[1] * leaked)
    return np.sort(keep)


@dataclass(frozen=True, eq=False)
class _Boxes:
    members: List[np.ndarray]   # indices into the pruned point list, ascending
    lo: np.ndarray              # (n_boxes, 2)
    hi: np.ndarray


def _boxes(x: np.ndarray, y: np.ndarray) -> _Boxes:
    n = x.size
    k = max(1, int(math.ceil(math.sqrt(n / _BOX_TARGET))))
    rx = np.empty(n, dtype=np.int64)
    ry = np.empty(n, dtype=np.int64)
    rx[np.argsort(x, kind="stable")] = np.arange(n)
    ry[np.argsort(y, kind="stable")] = np.arange(n)
    box = (rx * k // n) * k + (ry * k // n)
    order = np.argsort(box, kind="stable")
    ids, starts = np.unique(box[order], return_index=True)
    members = np.split(order, starts[1:])
    xs, ys = x[order], y[order]
    lo = np.column_stack([np.minimum.reduceat(xs, starts), np.minimum.reduceat(ys, starts)])
    hi = np.column_stack([np.maximum.reduceat(xs, starts), np.maximum.reduceat(ys, starts)])
    return _Boxes(members, lo, hi)


def _box_bounds(structure: DecodingStructure, b1: _Boxes, b2: _Boxes) -> np.ndarray:
    """Upper bound of the linear-domain sum-rate objective on every box pair, shape (n1, n2)."""
    ub = None
    for t, signs in enumerate(TERM_SIGNS[structure]):
        def corner(boxes: _Boxes, col: int, s: int, axis: int):
            v = boxes.hi[:, col] if s > 0 else boxes.lo[:, col]
            return v[:, None] if axis == 0 else v[None, :]
        g11 = corner(b1, 0, signs[0], 0)
        g21 = corner(b1, 1, signs[1], 0)
        g22 = corner(b2, 0, signs[2], 1)
        g12 = corner(b2, 1, signs[3], 1)
        term = np.broadcast_to(sum_rate_terms(structure, g11, g21, g22, g12)[t], (len(b1.members), len(b2.members)))
        ub = term if ub is None else np.minimum(ub, term)
    return ub


def _objective(structure: DecodingStructure, g11, g21, g22, g12) -> np.ndarray:
    terms = sum_rate_terms(structure, g11, g21, g22, g12)
    m = terms[0]
    for t in terms[1:]:
        m = np.minimum(m, t)
    return m


@dataclass(frozen=True)
class _Best:
    value: float
    i1: int
    i2: int

    def better_than(self, other: "_Best") -> bool:
        if self.value != other.value:
            return self.value > other.value
        return (self.i1, self.i2) < (other.i1, other.i2)


_NONE = _Best(-math.inf, 1 << 62, 1 << 62)


def _eval_pair(structure, u_idx, v_idx, c1: _Cloud, c2: _Cloud) -> _Best:
    vals = _objective(structure, c1.desired[u_idx][:, None], c1.leaked[u_idx][:, None],
                      c2.desired[v_idx][None, :], c2.leaked[v_idx][None, :])
    top = vals.max()
    rows, cols = np.nonzero(vals == top)
    # u_idx and v_idx are ascending, so the first hit in row-major order is the lowest index pair
    return _Best(float(top), int(u_idx[rows[0]]), int(v_idx[cols[0]]))


def _family_lambda(fam: LambdaFamily, w: np.ndarray) -> float:
    return float(min(1.0, abs(inner(fam.basis_a, w)) ** 2))


@dataclass(frozen=True, eq=False)
class OracleResult:
    rate: float
    best: CandidateTuple
    coords1: Tuple[float, float]
    coords2: Tuple[float, float]
    index1: Tuple[int, int]   # (beam, power)
    index2: Tuple[int, int]


def oracle_max(ch: Channel, structure: DecodingStructure, spec: GridSpec, p_max: float,
               threads: int = 1) -> OracleResult:
    if p_max < 0.0:
        raise ValueError(f"p_max must be non-negative, got {p_max}")
    c1 = _cloud(ch, 1, spec, p_max)
    c2 = _cloud(ch, 2, spec, p_max)
    signs = TERM_SIGNS[structure]
    keep1 = _prune(c1.desired, c1.leaked, _orientation(signs, (0, 1)))
    keep2 = _prune(c2.desired, c2.leaked, _orientation(signs, (2, 3)))
    logger.debug("oracle %s: clouds %d x %d, after pruning %d x %d",
                 structure.label, c1.desired.size, c2.desired.size, keep1.size, keep2.size)

    b1 = _boxes(c1.desired[keep1], c1.leaked[keep1])
    b2 = _boxes(c2.desired[keep2], c2.leaked[keep2])
    ub = _box_bounds(structure, b1, b2)
    flat = ub.ravel()
    order = np.argsort(-flat, kind="stable")
    n2 = ub.shape[1]

    def run(pairs: np.ndarray, floor: float) -> _Best:
        best = _NONE
        for k in pairs:
            if flat[k] < floor or flat[k] < best.value:
                continue
            i, j = divmod(int(k), n2)
            cand = _eval_pair(structure, keep1[b1.members[i]], keep2[b2.members[j]], c1, c2)
            if cand.better_than(best):
                best = cand
        return best

    best = _NONE
    batch = _PAIRS_PER_TASK * max(1, threads)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for start in range(0, order.size, batch):
            chunk = order[start:start + batch]
            if flat[chunk[0]] < best.value:
                break
            parts = [chunk[k:k + _PAIRS_PER_TASK] for k in range(0, chunk.size, _PAIRS_PER_TASK)]
            floor = best.value
            for cand in pool.map(lambda p: run(p, floor), parts):
                if cand.better_than(best):
                    best = cand

    bi1, pi1 = c1.decode(best.i1)
    bi2, pi2 = c2.decode(best.i2)
    # lambdas in the coordinates of the structure's own family (V for DD, W otherwise)
    lam1 = lam2 = float("nan")
    if spec.scope == GridScope.SUBSPACE:
        fam1, fam2 = region_families(structure, ch)
        lam1 = _family_lambda(fam1, c1.grid.beams[bi1])
        lam2 = _family_lambda(fam2, c2.grid.beams[bi2])
    tup = CandidateTuple(c1.grid.beams[bi1], c2.grid.beams[bi2], float(c1.powers[pi1]), float(c2.powers[pi2]),
                         structure, lam1, lam2)
    return OracleResult(
        rate=float(np.log2(best.value)),
        best=tup,
        coords1=tuple(float(v) for v in c1.grid.coords[bi1]),
        coords2=tuple(float(v) for v in c2.grid.coords[bi2]),
        index1=(bi1, pi1),
        index2=(bi2, pi2),
    )


# per-rate monotonicity in (g11, g21, g22, g12), used to prune the Pareto search
RATE_SIGNS = {
    DecodingStructure.NN: ((+1, 0, 0, -1), (0, -1, +1, 0)),
    DecodingStructure.ND: ((+1, +1, -1, -1), (0, 0, +1, 0)),
    DecodingStructure.DN: ((+1, 0, 0, 0), (-1, -1, +1, +1)),
    DecodingStructure.DD: ((+1, +1, -1, 0), (-1, 0, +1, +1)),
}


def oracle_pareto(ch: Channel, structure: DecodingStructure, spec: GridSpec, p_max: float,
                  threads: int = 1) -> List[RatePoint]:
    c1 = _cloud(ch, 1, spec, p_max)
    c2 = _cloud(ch, 2, spec, p_max)
    signs = RATE_SIGNS[structure]
    keep1 = _prune(c1.desired, c1.leaked, _orientation(signs, (0, 1)))
    keep2 = _prune(c2.desired, c2.leaked, _orientation(signs, (2, 3)))
    d2, x2 = c2.desired[keep2][None, :], c2.leaked[keep2][None, :]

    rows = max(1, _CHUNK_ELEMENTS // max(1, keep2.size))
    chunks = [keep1[k:k + rows] for k in range(0, keep1.size, rows)]

    def front(idx: np.ndarray):
        r1, r2 = rate_pair_from_gains(structure, c1.desired[idx][:, None], c1.leaked[idx][:, None], d2, x2)
        r1 = np.broadcast_to(r1, (idx.size, keep2.size)).ravel()
        r2 = np.broadcast_to(r2, (idx.size, keep2.size)).ravel()
        keep = pareto_front_indices(r1, r2)
        return r1[keep], r2[keep]

    f1 = np.zeros(0)
    f2 = np.zeros(0)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for r1, r2 in pool.map(front, chunks):
            a = np.concatenate([f1, r1])
            b = np.concatenate([f2, r2])
            keep = pareto_front_indices(a, b)
            f1, f2 = a[keep], b[keep]
    return [RatePoint(float(a), float(b), structure) for a, b in zip(f1, f2)]
