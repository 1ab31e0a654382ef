import numpy as np
import pytest
from hypothesis import strategies as st

from src.misoidc.channel import BoxMullerSource, Channel, gen_iid
from src.misoidc.config import Grids

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def cvec(seed: int, n: int = 3) -> np.ndarray:
    return BoxMullerSource(seed).complex_normal(n)


@pytest.fixture
def ch3() -> Channel:
    return gen_iid(3, 7)


@pytest.fixture
def ch2() -> Channel:
    return gen_iid(2, 11)


@pytest.fixture
def small_grids() -> Grids:
    return Grids(n_lambda=41, n_power=5)


@pytest.fixture
def diag_channel() -> Channel:
    # w1 = e1, w2 = e2 at unit power give g11=4, g21=1, g22=9, g12=1
    return Channel(h11=[2, 0], h12=[0, 1], h21=[1, 0], h22=[0, 3])
