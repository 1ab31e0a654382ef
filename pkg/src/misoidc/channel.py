from __future__ import annotations
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .config import TOL_DEG
from .errors import DegenerateDirection, ParseError
from .linalg import as_cvec, inner, norm, proj_orth, unit

MASK64 = (1 << 64) - 1
LINKS = ("h11", "h12", "h21", "h22")


@dataclass(frozen=True, eq=False)
class Channel:
    """
    The four channel vectors of the two-user MISO interference channel.

    h_ji is the channel from transmitter i to receiver j, so h11 and h22 are the
    desired links and h21, h12 the cross links.
    """
    h11: np.ndarray
    h12: np.ndarray
    h21: np.ndarray
    h22: np.ndarray

    def __post_init__(self):
        dims = set()
        for name in LINKS:
            v = as_cvec(getattr(self, name)).copy()
            if norm(v) <= TOL_DEG:
                raise DegenerateDirection(f"channel vector {name} is zero")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
            dims.add(v.shape[0])
        if len(dims) != 1:
            raise ValueError(f"channel vectors must share one dimension, got {sorted(dims)}")

    @property
    def n(self) -> int:
        return int(self.h11.shape[0])

    def desired(self, user: int) -> np.ndarray:
        """h_ii."""
        _check_user(user)
        return self.h11 if user == 1 else self.h22

    def leakage(self, user: int) -> np.ndarray:
        """h_ji: what transmitter i leaks into the other receiver."""
        _check_user(user)
        return self.h21 if user == 1 else self.h12

    def incoming(self, user: int) -> np.ndarray:
        """h_ij: interference received at receiver i."""
        _check_user(user)
        return self.h12 if user == 1 else self.h21

    def swap_users(self) -> "Channel":
        return Channel(h11=self.h22, h12=self.h21, h21=self.h12, h22=self.h11)

    def effective(self, p: float) -> "Channel":
        s = math.sqrt(p)
        return Channel(h11=s * self.h11, h12=s * self.h12, h21=s * self.h21, h22=s * self.h22)

    def same_as(self, other: "Channel") -> bool:
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in LINKS)


def _check_user(user: int) -> None:
    if user not in (1, 2):
        raise ValueError(f"user must be 1 or 2, got {user}")


def other(user: int) -> int:
    _check_user(user)
    return 3 - user


class BoxMullerSource:
    """
    Seeded Gaussian source.

    Uniform variates come from numpy's Philox counter-based generator keyed by
    the 64-bit seed. A complex entry (x + iy)/sqrt(2) uses one uniform pair
    (u1, u2): x = r cos(2 pi u2), y = r sin(2 pi u2) with r = sqrt(-2 ln u1).
    For an array draw all u1 are taken first, then all u2.
    """

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.Philox(int(seed) & MASK64))

    def uniform(self, size=None):
        return self._gen.random(size)

    def complex_normal(self, size) -> np.ndarray:
        u1 = 1.0 - self._gen.random(size)  # (0, 1]
        u2 = self._gen.random(size)
        r = np.sqrt(-2.0 * np.log(u1))
        t = 2.0 * np.pi * u2
        return (r * np.cos(t) + 1j * r * np.sin(t)) / np.sqrt(2.0)


def trial_seed(seed: int, trial: int) -> int:
    return (int(seed) ^ int(trial)) & MASK64


def gen_iid(n: int, seed: int) -> Channel:
    if n < 2:
        raise ValueError(f"need at least 2 transmit antennas, got {n}")
    draws = BoxMullerSource(seed).complex_normal((4, n))
    return Channel(h11=draws[0], h12=draws[1], h21=draws[2], h22=draws[3])


def _cross_link(src: BoxMullerSource, h_ii: np.ndarray, theta: float, sir: float) -> np.ndarray:
    n = h_ii.shape[0]
    u = unit(proj_orth(src.complex_normal(n), h_ii))
    psi = 2.0 * np.pi * float(src.uniform())
    scale = norm(h_ii) / math.sqrt(sir)
    return scale * (math.cos(theta) * unit(h_ii) + math.sin(theta) * np.exp(1j * psi) * u)


def gen_symmetric(n: int, theta: float, sir: float, seed: int) -> Channel:
    """Desired links i.i.d.; both cross links at angle theta with ||h_ii||^2/||h_ji||^2 = sir."""
    if n < 2:
        raise ValueError(f"need at least 2 transmit antennas, got {n}")
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    if not sir > 0.0:
        raise ValueError(f"sir must be positive, got {sir}")
    src = BoxMullerSource(seed)
    direct = src.complex_normal((2, n))
    h11, h22 = direct[0], direct[1]
    h21 = _cross_link(src, h11, theta, sir)
    h12 = _cross_link(src, h22, theta, sir)
    return Channel(h11=h11, h12=h12, h21=h21, h22=h22)


def angle(a, b) -> float:
    """Angle in [0, pi/2] between the complex lines spanned by a and b."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if norm(a) <= TOL_DEG or norm(b) <= TOL_DEG:
        raise DegenerateDirection("angle undefined for a zero vector")
    along = abs(inner(b, a)) / norm(b)
    across = norm(proj_orth(a, b))
    return float(math.atan2(across, along))


class ChannelKind(Enum):
    IID = "iid"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class ChannelEnsembleSpec:
    n: int
    kind: ChannelKind = ChannelKind.IID
    seed: int = 0
    trials: int = 1
    theta: float = 0.0
    sir: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 transmit antennas, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.kind == ChannelKind.SYMMETRIC:
            if not 0.0 <= self.theta <= math.pi / 2:
                raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
            if not self.sir > 0.0:
                raise ValueError(f"sir must be positive, got {self.sir}")

    def draw(self, trial: int) -> Channel:
        s = trial_seed(self.seed, trial)
        if self.kind == ChannelKind.IID:
            return gen_iid(self.n, s)
        return gen_symmetric(self.n, self.theta, self.sir, s)


# ---- file format ----

def _fmt(x: float) -> str:
    return f"{x:.16e}"


def channel_to_json(ch: Channel, source: Optional[Dict[str, object]] = None) -> str:
    """`source`, when given, records how the channel was produced; readers ignore it."""
    lines = ["{"]
    if source is not None:
        lines.append(f'  "source": {json.dumps(source, sort_keys=True)},')
    lines.append(f'  "n": {ch.n},')
    for k, name in enumerate(LINKS):
        v = getattr(ch, name)
        pairs = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in v)
        sep = "," if k < len(LINKS) - 1 else ""
        lines.append(f'  "{name}": [{pairs}]{sep}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _parse_number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {x!r}", field=where)
    x = float(x)
    if not math.isfinite(x):
        raise ParseError("non-finite number", field=where)
    return x


def channel_from_json(text: str) -> Channel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from e
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if "n" not in doc:
        raise ParseError("missing field", field="n")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ParseError(f"n must be an integer >= 2, got {n!r}", field="n")

    vecs = {}
    for name in LINKS:
        if name not in doc:
            raise ParseError("missing field", field=name)
        raw = doc[name]
        if not isinstance(raw, list):
            raise ParseError("expected a list of [re, im] pairs", field=name)
        if len(raw) != n:
            raise ParseError(f"expected {n} entries, got {len(raw)}", field=name)
        out = np.empty(n, dtype=np.complex128)
        for k, pair in enumerate(raw):
            where = f"{name}[{k}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError("expected a [re, im] pair", field=where)
            out[k] = complex(_parse_number(pair[0], where), _parse_number(pair[1], where))
        vecs[name] = out
    try:
        return Channel(**vecs)
    except DegenerateDirection as e:
        raise ParseError(str(e)) from e


def save_channel(ch: Channel, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(channel_to_json(ch))


def load_channel(path: Union[str, Path]) -> Channel:
    with open(path, "r", encoding="utf-8") as f:
        return channel_from_json(f.read())
