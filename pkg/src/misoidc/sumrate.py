"""
Maximum sum-rate search over the reduced candidate sets.

At the sum-rate optimum both transmitters use full power, so every set below is
evaluated at (P_max, P_max):

- NN: the full W_1 x W_2 lambda grid.
- ND: w1 in {unit(h11), unit(h21), balancing w1(lambda1_b)} against the W_2
  family on [lambda2_b, lambda2_mrt] plus unit(h22). lambda1_b equalises the
  two user-1 rate terms for the paired w2; lambda2_b is read off the
  eigen-constructed beamformer that balances the two sum-rate terms.
- DN: ND with the users swapped.
- DD: V_i families on [lambda_i^A, lambda_i^mrt] plus unit(h_ii), together
  with the partner-dependent balancing members w_i(lambda_i^A) and the pairs
  on which both users are balanced against each other.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import Channel
from .config import DEFAULT_GRIDS, TOL_BALANCE, Grids
from .errors import DegenerateBalance, ParallelChannels
from .linalg import inner, norm, proj_orth, rank2_herm_eig, unit
from .pareto import (CandidateTuple, FamilyKind, LambdaFamily, family, family_beams,
                     lambda_grid, v_family, w_family)
from .rates import STRUCTURES, DecodingStructure, beam_gains, sum_rate_from_gains

logger = logging.getLogger(__name__)

NN, ND, DN, DD = DecodingStructure.NN, DecodingStructure.ND, DecodingStructure.DN, DecodingStructure.DD


def lambda_mrt(ch: Channel, user: int, kind: FamilyKind = FamilyKind.W) -> float:
    """cos^2 of the angle between h_ii and h_ji; the family member at this lambda is the matched filter."""
    fam = family(ch, user, kind)
    if fam.collapsed:
        return 1.0
    return fam.lambda_mrt


def lambda_in_family(fam: LambdaFamily, w: np.ndarray) -> float:
    return float(min(1.0, abs(inner(fam.basis_a, w)) ** 2))


# ---- ND: balancing w1 ----

def _nd_weights(g22: np.ndarray, g12: np.ndarray, p_max: float):
    """c1, c2 of the user-1 balance c1|h11^H w1|^2 = c2|h21^H w1|^2 for given user-2 gains."""
    return p_max / (g12 + 1.0), p_max / (g22 + 1.0)


def _lambda_b_nd(ch: Channel, c1, c2):
    n11 = norm(ch.h11) ** 2
    n21 = norm(ch.h21) ** 2
    x = abs(inner(ch.h21, ch.h11))
    perp = norm(proj_orth(ch.h11, ch.h21)) ** 2
    s1 = np.sqrt(c1)
    s2 = np.sqrt(c2)
    den = c2 * n21 - 2.0 * s1 * s2 * x + c1 * n11
    # the balance point lies on the family only if the tangent is non-negative
    crossing = s2 * math.sqrt(n21) - s1 * x / math.sqrt(n21) >= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(den > TOL_BALANCE, c1 * perp / np.where(den > TOL_BALANCE, den, 1.0), np.nan)
    ok = (den > TOL_BALANCE) & crossing & (perp > 0.0)
    return np.clip(lam, 0.0, 1.0), ok, den


def lambda_b_nd(ch: Channel, w2: np.ndarray, p_max: float) -> float:
    """
    lambda_1 at which user 1's treat-as-noise rate equals its decodability rate at
    receiver 2, for a fixed w2 at full power.
    """
    g22 = beam_gains(ch.h22, w2, p_max)
    g12 = beam_gains(ch.h12, w2, p_max)
    c1, c2 = _nd_weights(g22, g12, p_max)
    lam, ok, den = _lambda_b_nd(ch, np.float64(c1), np.float64(c2))
    if not den > TOL_BALANCE:
        raise DegenerateBalance(f"balancing denominator vanishes ({float(den):.3e})")
    if not bool(ok):
        raise DegenerateBalance("the two user-1 rate terms do not cross along W_1")
    return float(lam)


# ---- ND: balancing w2 ----

class BalanceRegime(Enum):
    TREAT_AS_NOISE_LIMITED = "treat_as_noise_limited"   # D_1 < T_1 for every w2
    DECODABILITY_LIMITED = "decodability_limited"       # T_1 <= D_1 for every w2


@dataclass(frozen=True)
class Infeasible:
    regime: BalanceRegime


def w2_balance_nd(ch: Channel, w1: np.ndarray, p_max: float) -> Union[np.ndarray, Infeasible]:
    """
    w2 maximising |h22^H w2| subject to |h22^H w2|^2 P = (g - 1) + g |h12^H w2|^2 P,
    g = g21/g11, i.e. the beamformer on which the two ND sum-rate terms meet.
    """
    g11 = float(beam_gains(ch.h11, w1, p_max))
    g21 = float(beam_gains(ch.h21, w1, p_max))
    if g11 <= TOL_BALANCE:
        raise DegenerateBalance("w1 carries no power to receiver 1")
    g = g21 / g11
    if g <= 0.0:
        return Infeasible(BalanceRegime.DECODABILITY_LIMITED)

    eig = rank2_herm_eig(ch.h22, ch.h12, p_max, -g * p_max)
    a_t = eig.pos_val - (g - 1.0)
    b_t = -eig.neg_val + (g - 1.0)
    if a_t <= 0.0:
        return Infeasible(BalanceRegime.TREAT_AS_NOISE_LIMITED)
    if b_t <= 0.0:
        return Infeasible(BalanceRegime.DECODABILITY_LIMITED)

    za = inner(ch.h22, eig.pos_vec)
    zb = inner(ch.h22, eig.neg_vec)
    phi = np.angle(za) - np.angle(zb)
    w = eig.pos_vec / math.sqrt(a_t) + np.exp(1j * phi) * eig.neg_vec / math.sqrt(b_t)
    return unit(w)


@dataclass(frozen=True, eq=False)
class NdCandidates:
    w1_set: Tuple[np.ndarray, ...]
    w1_lambdas: Tuple[float, ...]
    w2_family: LambdaFamily
    lambda2_range: Optional[Tuple[float, float]]
    w2_lambdas: np.ndarray
    w2_beams: np.ndarray
    p_max: float

    @property
    def powers(self) -> Tuple[float, float]:
        return (self.p_max, self.p_max)

    def __len__(self) -> int:
        return 3 * int(self.w2_lambdas.size)


def _lambda2_lower(ch: Channel, anchors: Sequence[np.ndarray], fam2: LambdaFamily,
                   p_max: float) -> Optional[float]:
    lows: List[float] = []
    for w1 in anchors:
        try:
            res = w2_balance_nd(ch, w1, p_max)
        except (DegenerateBalance, ParallelChannels) as e:
            logger.debug("w2 balance skipped for one anchor: %s", e)
            continue
        if isinstance(res, Infeasible):
            if res.regime == BalanceRegime.TREAT_AS_NOISE_LIMITED:
                lows.append(0.0)
            continue
        lam = lambda_in_family(fam2, res)
        if lam <= fam2.lambda_mrt:
            lows.append(lam)
    return min(lows) if lows else None


def nd_candidates(ch: Channel, p_max: float, n_lambda: int = DEFAULT_GRIDS.n_lambda) -> NdCandidates:
    fam1 = w_family(ch, 1)
    fam2 = w_family(ch, 2)
    lam1 = [fam1.lambda_mrt, 1.0]
    try:
        lam1.append(lambda_b_nd(ch, unit(ch.h22), p_max))
    except DegenerateBalance as e:
        logger.warning("balancing w1 omitted from the ND set: %s", e)
    w1_set = tuple(family_beams(fam1, lam1))

    lo = None if fam2.collapsed else _lambda2_lower(ch, w1_set, fam2, p_max)
    if lo is None:
        lams2 = np.array([fam2.lambda_mrt])
        rng = None
    else:
        lams2 = np.append(lambda_grid(n_lambda, lo, fam2.lambda_mrt), fam2.lambda_mrt)
        rng = (lo, fam2.lambda_mrt)
    beams2 = family_beams(fam2, lams2)
    # the matched filter itself, exactly
    beams2[-1] = unit(ch.h22)
    return NdCandidates(w1_set, tuple(lam1), fam2, rng, lams2, beams2, p_max)


def _search_nd(ch: Channel, cands: NdCandidates) -> Tuple[float, CandidateTuple]:
    p = cands.p_max
    fam1 = w_family(ch, 1)
    w2 = cands.w2_beams
    g22 = beam_gains(ch.h22, w2, p)
    g12 = beam_gains(ch.h12, w2, p)

    k2 = w2.shape[0]
    rates = np.full((k2, 3), -np.inf)
    lam1 = np.full((k2, 3), np.nan)
    beams1 = np.zeros((k2, 3, ch.n), dtype=np.complex128)
    for slot, lam in enumerate(cands.w1_lambdas[:2]):
        w1 = family_beams(fam1, [lam])[0]
        g11 = beam_gains(ch.h11, w1, p)
        g21 = beam_gains(ch.h21, w1, p)
        rates[:, slot] = sum_rate_from_gains(ND, g11, g21, g22, g12)
        lam1[:, slot] = lam
        beams1[:, slot] = w1

    c1, c2 = _nd_weights(g22, g12, p)
    lam_b, ok, _ = _lambda_b_nd(ch, c1, c2)
    if not fam1.collapsed and np.any(ok):
        wb = family_beams(fam1, lam_b[ok])
        g11 = beam_gains(ch.h11, wb, p)
        g21 = beam_gains(ch.h21, wb, p)
        rates[ok, 2] = sum_rate_from_gains(ND, g11, g21, g22[ok], g12[ok])
        lam1[ok, 2] = lam_b[ok]
        beams1[ok, 2] = wb

    k = int(np.argmax(rates))
    i, slot = divmod(k, 3)
    best = CandidateTuple(beams1[i, slot], w2[i], p, p, ND, float(lam1[i, slot]),
                          float(cands.w2_lambdas[i]))
    return float(rates[i, slot]), best


def _swap_tuple(t: CandidateTuple, structure: DecodingStructure) -> CandidateTuple:
    return CandidateTuple(t.w2, t.w1, t.p2, t.p1, structure, t.lambda2, t.lambda1)


# ---- DD ----

def _lambda_a(ch: Channel, user: int, g_partner):
    h_ii, h_ji = ch.desired(user), ch.leakage(user)
    n_ii = norm(h_ii)
    n_ji2 = norm(h_ji) ** 2
    x = abs(inner(h_ii, h_ji))
    perp = norm(proj_orth(h_ji, h_ii)) ** 2
    s = np.sqrt(1.0 + np.asarray(g_partner, dtype=float))
    den = n_ji2 + (s * n_ii) ** 2 - 2.0 * x * s
    crossing = s * n_ii >= x / n_ii
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(den > TOL_BALANCE, perp / np.where(den > TOL_BALANCE, den, 1.0), np.nan)
    ok = (den > TOL_BALANCE) & crossing & (perp > 0.0)
    return np.clip(lam, 0.0, 1.0), ok, den


def lambda_a_dd(ch: Channel, user: int, g_partner: float) -> float:
    """
    lambda_i on V_i where (1 + g_jj)|h_ii^H w_i|^2 = |h_ji^H w_i|^2, g_jj being the
    partner's received desired power.
    """
    lam, ok, den = _lambda_a(ch, user, np.float64(g_partner))
    if not den > TOL_BALANCE:
        raise DegenerateBalance(f"balancing denominator vanishes ({float(den):.3e})")
    if not bool(ok):
        raise DegenerateBalance(f"no balancing point on V_{user}")
    return float(lam)


@dataclass(frozen=True, eq=False)
class DdUser:
    fam: LambdaFamily
    lambda_mrt: float
    lambda_lo: Optional[float]
    lambdas: np.ndarray
    beams: np.ndarray


@dataclass(frozen=True, eq=False)
class DdCandidates:
    users: Tuple[DdUser, DdUser]
    p_max: float
    # (lambda1, lambda2) rows where each user sits on its balancing member against the other
    coupled: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    @property
    def powers(self) -> Tuple[float, float]:
        return (self.p_max, self.p_max)

    def user(self, i: int) -> DdUser:
        return self.users[i - 1]


def _dd_user(ch: Channel, user: int, p_max: float, n_lambda: int) -> DdUser:
    fam = v_family(ch, user)
    lam_mrt = fam.lambda_mrt
    h_jj = ch.desired(3 - user)
    lo: Optional[float] = 0.0
    if fam.collapsed:
        lo = None
    else:
        try:
            # lambda^A decreases with g_jj, so the partner's matched filter gives the lower end
            lo = lambda_a_dd(ch, user, norm(h_jj) ** 2 * p_max)
        except DegenerateBalance as e:
            logger.debug("DD user %d: %s; family kept from 0", user, e)
            lo = 0.0
    lams = np.array([1.0])
    if lo is not None and lo <= lam_mrt:
        lams = np.append(lambda_grid(n_lambda, lo, lam_mrt), 1.0)
    beams = family_beams(fam, lams)
    beams[-1] = unit(ch.desired(user))
    return DdUser(fam, lam_mrt, lo, lams, beams)


_BISECT_STEPS = 60


def coupled_balance_dd(ch: Channel, p_max: float, n_lambda: int = DEFAULT_GRIDS.n_lambda) -> np.ndarray:
    """
    Every (lambda1, lambda2) on V_1 x V_2 with lambda1 = lambda1^A(g22(lambda2)) and
    lambda2 = lambda2^A(g11(lambda1)), i.e. Z1 = Z2 = Z3.

    On V_i the desired gain is lambda_i ||h_ii||^2 P and lambda^A decreases with the
    partner's gain, so lambda1 -> lambda1^A(g22(lambda2^A(g11(lambda1)))) is
    non-decreasing. Its fixed points are bracketed on an n_lambda grid and refined
    by bisection.
    """
    if v_family(ch, 1).collapsed or v_family(ch, 2).collapsed:
        return np.empty((0, 2))
    n11 = norm(ch.h11) ** 2 * p_max
    n22 = norm(ch.h22) ** 2 * p_max

    def residual(lam1: np.ndarray):
        lam2, ok2, _ = _lambda_a(ch, 2, lam1 * n11)
        lam2 = np.where(ok2, lam2, 0.0)
        back, ok1, _ = _lambda_a(ch, 1, lam2 * n22)
        return np.where(ok1 & ok2, back - lam1, np.nan), lam2

    grid = lambda_grid(n_lambda)
    f, _ = residual(grid)
    left, right = f[:-1], f[1:]
    hit = np.isfinite(left) & np.isfinite(right) & (left * right <= 0.0)
    lo, hi, f_lo = grid[:-1][hit], grid[1:][hit], left[hit]
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        f_mid, _ = residual(mid)
        upper = np.isfinite(f_mid) & (np.sign(f_mid) == np.sign(f_lo))
        lo = np.where(upper, mid, lo)
        f_lo = np.where(upper, f_mid, f_lo)
        hi = np.where(upper, hi, mid)
    lam1 = 0.5 * (lo + hi)
    f, lam2 = residual(lam1)
    ok = np.isfinite(f)
    return np.column_stack((lam1[ok], lam2[ok]))


def dd_candidates(ch: Channel, p_max: float, n_lambda: int = DEFAULT_GRIDS.n_lambda) -> DdCandidates:
    users = (_dd_user(ch, 1, p_max, n_lambda), _dd_user(ch, 2, p_max, n_lambda))
    return DdCandidates(users, p_max, coupled_balance_dd(ch, p_max, n_lambda))


def _balanced_members(ch: Channel, user: int, fam: LambdaFamily, g_partner: np.ndarray):
    lam, ok, _ = _lambda_a(ch, user, g_partner)
    if fam.collapsed:
        ok = np.zeros_like(ok)
    beams = np.zeros((lam.size, ch.n), dtype=np.complex128)
    if np.any(ok):
        beams[ok] = family_beams(fam, lam[ok])
    return lam, ok, beams


def _search_dd(ch: Channel, cands: DdCandidates) -> Tuple[float, CandidateTuple]:
    p = cands.p_max
    u1, u2 = cands.users
    w1, w2 = u1.beams, u2.beams
    a1, l1 = beam_gains(ch.h11, w1, p), beam_gains(ch.h21, w1, p)
    c2, l2 = beam_gains(ch.h22, w2, p), beam_gains(ch.h12, w2, p)

    # (rates, beams1, beams2, lambdas1, lambdas2) blocks in tie-break order
    blocks = []
    prod = sum_rate_from_gains(DD, a1[:, None], l1[:, None], c2[None, :], l2[None, :])
    i1, i2 = np.meshgrid(np.arange(w1.shape[0]), np.arange(w2.shape[0]), indexing="ij")
    i1, i2 = i1.ravel(), i2.ravel()
    blocks.append((prod.ravel(), w1[i1], w2[i2], u1.lambdas[i1], u2.lambdas[i2]))

    # user 1 balanced against each base w2, and the reverse
    lam1, ok1, b1 = _balanced_members(ch, 1, u1.fam, c2)
    r = np.full(c2.size, -np.inf)
    if np.any(ok1):
        r[ok1] = sum_rate_from_gains(DD, beam_gains(ch.h11, b1[ok1], p), beam_gains(ch.h21, b1[ok1], p),
                                     c2[ok1], l2[ok1])
    blocks.append((r, b1, w2, lam1, u2.lambdas))

    lam2, ok2, b2 = _balanced_members(ch, 2, u2.fam, a1)
    r = np.full(a1.size, -np.inf)
    if np.any(ok2):
        r[ok2] = sum_rate_from_gains(DD, a1[ok2], l1[ok2], beam_gains(ch.h22, b2[ok2], p),
                                     beam_gains(ch.h12, b2[ok2], p))
    blocks.append((r, w1, b2, u1.lambdas, lam2))

    # one more balancing step on each side
    for first, (lam_f, ok_f, b_f) in ((1, (lam1, ok1, b1)), (2, (lam2, ok2, b2))):
        second = 3 - first
        fam_s = (u1, u2)[second - 1].fam
        g_f = beam_gains(ch.desired(first), b_f, p)
        lam_s, ok_s, b_s = _balanced_members(ch, second, fam_s, g_f)
        ok = ok_f & ok_s
        r = np.full(ok.size, -np.inf)
        if np.any(ok):
            pair = (b_f[ok], b_s[ok]) if first == 1 else (b_s[ok], b_f[ok])
            r[ok] = sum_rate_from_gains(DD, beam_gains(ch.h11, pair[0], p), beam_gains(ch.h21, pair[0], p),
                                        beam_gains(ch.h22, pair[1], p), beam_gains(ch.h12, pair[1], p))
        if first == 1:
            blocks.append((r, b_f, b_s, lam_f, lam_s))
        else:
            blocks.append((r, b_s, b_f, lam_s, lam_f))

    if cands.coupled.size:
        k1, k2 = cands.coupled[:, 0], cands.coupled[:, 1]
        b1, b2 = family_beams(u1.fam, k1), family_beams(u2.fam, k2)
        r = sum_rate_from_gains(DD, beam_gains(ch.h11, b1, p), beam_gains(ch.h21, b1, p),
                                beam_gains(ch.h22, b2, p), beam_gains(ch.h12, b2, p))
        blocks.append((r, b1, b2, k1, k2))

    best_rate, best = -np.inf, None
    for rates, bw1, bw2, bl1, bl2 in blocks:
        if rates.size == 0:
            continue
        k = int(np.argmax(rates))
        if rates[k] > best_rate:
            best_rate = float(rates[k])
            best = CandidateTuple(bw1[k], bw2[k], p, p, DD, float(bl1[k]), float(bl2[k]))
    return best_rate, best


# ---- NN ----

def _search_nn(ch: Channel, p_max: float, n_lambda: int) -> Tuple[float, CandidateTuple]:
    lams = lambda_grid(n_lambda)
    w1 = family_beams(w_family(ch, 1), lams)
    w2 = family_beams(w_family(ch, 2), lams)
    a1, l1 = beam_gains(ch.h11, w1, p_max), beam_gains(ch.h21, w1, p_max)
    c2, l2 = beam_gains(ch.h22, w2, p_max), beam_gains(ch.h12, w2, p_max)
    rates = sum_rate_from_gains(NN, a1[:, None], l1[:, None], c2[None, :], l2[None, :])
    i, j = np.unravel_index(int(np.argmax(rates)), rates.shape)
    best = CandidateTuple(w1[i], w2[j], p_max, p_max, NN, float(lams[i]), float(lams[j]))
    return float(rates[i, j]), best


@dataclass(frozen=True, eq=False)
class SumRateResult:
    best: CandidateTuple
    rate: float
    per_structure: Dict[DecodingStructure, float] = field(default_factory=dict)
    per_structure_best: Dict[DecodingStructure, CandidateTuple] = field(default_factory=dict)

    @property
    def structure(self) -> DecodingStructure:
        return self.best.structure


def structure_max(ch: Channel, structure: DecodingStructure, p_max: float,
                  grids: Grids = DEFAULT_GRIDS) -> Tuple[float, CandidateTuple]:
    if p_max < 0.0:
        raise ValueError(f"p_max must be non-negative, got {p_max}")
    if structure == NN:
        return _search_nn(ch, p_max, grids.n_lambda)
    if structure == ND:
        return _search_nd(ch, nd_candidates(ch, p_max, grids.n_lambda))
    if structure == DN:
        sw = ch.swap_users()
        rate, t = _search_nd(sw, nd_candidates(sw, p_max, grids.n_lambda))
        return rate, _swap_tuple(t, DN)
    return _search_dd(ch, dd_candidates(ch, p_max, grids.n_lambda))


def max_sum_rate(ch: Channel, p_max: float, grids: Grids = DEFAULT_GRIDS,
                 structures: Sequence[DecodingStructure] = STRUCTURES) -> SumRateResult:
    per: Dict[DecodingStructure, float] = {}
    per_best: Dict[DecodingStructure, CandidateTuple] = {}
    best_rate, best = -np.inf, None
    for s in STRUCTURES:
        if s not in structures:
            continue
        rate, t = structure_max(ch, s, p_max, grids)
        per[s] = rate
        per_best[s] = t
        if rate > best_rate:
            best_rate, best = rate, t
    if best is None:
        raise ValueError("no decoding structure selected")
    return SumRateResult(best, float(best_rate), per, per_best)
