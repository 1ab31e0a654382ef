"""
Complex vector helpers and the closed-form rank-two Hermitian eigensolver.

Vectors are 1-D complex128 numpy arrays. Where a function accepts a stack of
vectors it is a 2-D array with one vector per row.
"""
from __future__ import annotations
from dataclasses import dataclass
import numpy as np

from .config import TOL_DEG, TOL_PAR
from .errors import DegenerateDirection, ParallelChannels


def as_cvec(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.shape[0] < 2:
        raise ValueError(f"vector dimension must be >= 2, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def _check_dims(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


def inner(x, y) -> complex:
    """x^H y."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    _check_dims(x, y)
    return complex(np.vdot(x, y))


def norm(x) -> float:
    return float(np.linalg.norm(x))


def proj(x, onto) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    onto = np.asarray(onto, dtype=np.complex128)
    _check_dims(x, onto)
    nn = float(np.vdot(onto, onto).real)
    if np.sqrt(nn) <= TOL_DEG:
        raise DegenerateDirection("cannot project onto a zero vector")
    return onto * (np.vdot(onto, x) / nn)


def proj_orth(x, onto) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    return x - proj(x, onto)


def unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    n = np.linalg.norm(x)
    if n <= TOL_DEG:
        raise DegenerateDirection("cannot normalise a zero vector")
    return x / n


def cos2(a, b) -> float:
    """|a^H b|^2 / (||a||^2 ||b||^2), clipped to [0, 1]."""
    na = norm(a)
    nb = norm(b)
    if na <= TOL_DEG or nb <= TOL_DEG:
        raise DegenerateDirection("angle undefined for a zero vector")
    c = abs(inner(a, b)) / (na * nb)
    return float(min(1.0, c * c))


def is_parallel(u, v) -> bool:
    nv = norm(v)
    if nv <= TOL_DEG:
        raise DegenerateDirection("zero vector")
    return norm(proj_orth(v, u)) / nv <= TOL_PAR


def phase_aligned_unit(x, ref) -> np.ndarray:
    """unit(x) rotated so that x^H ref is real and non-negative, i.e. unit(proj(ref, x))."""
    e = unit(x)
    z = inner(e, ref)
    if abs(z) == 0.0:
        return e
    return e * (z / abs(z))


@dataclass(frozen=True)
class Rank2Eig:
    pos_val: float
    pos_vec: np.ndarray
    neg_val: float
    neg_vec: np.ndarray


def _eigvec_2x2(p: float, q: complex, r: float, lam: float) -> np.ndarray:
    # rows of (A - lam I) are [p - lam, q] and [conj(q), r - lam]; take the
    # null vector from whichever row is better conditioned
    c1 = np.array([q, lam - p], dtype=np.complex128)
    c2 = np.array([lam - r, np.conj(q)], dtype=np.complex128)
    c = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    n = np.linalg.norm(c)
    if n == 0.0:
        # A is already diagonal with a double eigenvalue
        return np.array([1.0, 0.0], dtype=np.complex128)
    return c / n


def _fix_phase(c: np.ndarray) -> np.ndarray:
    # largest component real and positive
    k = int(np.argmax(np.abs(c)))
    return c * (np.conj(c[k]) / abs(c[k]))


def rank2_herm_eig(u, v, alpha: float, beta: float) -> Rank2Eig:
    """
    Eigenpairs of M = alpha*u*u^H + beta*v*v^H on span{u, v}, for alpha > 0 > beta.

    M has exactly one positive and one negative eigenvalue there. The problem is
    reduced to a 2x2 Hermitian matrix in the orthonormal basis
    (unit(u), unit(proj_orth(v, u))) and solved with the quadratic formula.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not beta < 0.0:
        raise ValueError(f"beta must be negative, got {beta}")
    u = as_cvec(u)
    v = as_cvec(v)
    _check_dims(u, v)

    nu = norm(u)
    if nu <= TOL_DEG or norm(v) <= TOL_DEG:
        raise DegenerateDirection("rank-two eigenproblem with a zero vector")
    if is_parallel(u, v):
        raise ParallelChannels("u and v are parallel; the matrix has rank one")

    e1 = u / nu
    r_orth = proj_orth(v, e1)
    e2 = unit(r_orth)
    v1 = inner(e1, v)
    v2 = inner(e2, v)

    p = alpha * nu * nu + beta * abs(v1) ** 2
    r = beta * abs(v2) ** 2
    q = beta * v1 * np.conj(v2)

    mid = 0.5 * (p + r)
    rad = float(np.hypot(0.5 * (p - r), abs(q)))
    lam_pos = mid + rad
    lam_neg = mid - rad

    c_pos = _eigvec_2x2(p, q, r, lam_pos)
    c_neg = _eigvec_2x2(p, q, r, lam_neg)
    # re-orthogonalise against the dominant vector
    c_neg = c_neg - np.vdot(c_pos, c_neg) * c_pos
    c_neg = c_neg / np.linalg.norm(c_neg)
    c_pos = _fix_phase(c_pos)
    c_neg = _fix_phase(c_neg)

    pos_vec = c_pos[0] * e1 + c_pos[1] * e2
    neg_vec = c_neg[0] * e1 + c_neg[1] * e2
    return Rank2Eig(
        pos_val=float(lam_pos),
        pos_vec=pos_vec / np.linalg.norm(pos_vec),
        neg_val=float(lam_neg),
        neg_vec=neg_vec / np.linalg.norm(neg_vec),
    )
