import logging

import numpy as np
import pytest

from src.misoidc.channel import Channel, gen_iid, gen_symmetric
from src.misoidc.config import Grids
from src.misoidc.heuristic import PAIRS, TDMA_LABEL, simple_select
from src.misoidc.linalg import unit
from src.misoidc.rates import DecodingStructure, TxStrategy, rate_C, rate_D, tdma_sum_rate
from src.misoidc.sumrate import max_sum_rate


def test_table_lists_every_pair_then_tdma(ch3):
    res = simple_select(ch3, 10.0)
    assert len(res.table) == len(PAIRS) + 1 == 11
    assert [e.label for e in res.table[:-1]] == [p[0] for p in PAIRS]
    assert res.table[-1].label == TDMA_LABEL and res.table[-1].is_tdma
    assert res.table[-1].rate == pytest.approx(tdma_sum_rate(ch3, 10.0))
    assert res.rate == max(e.rate for e in res.table)


def test_first_maximum_wins(ch3):
    res = simple_select(ch3, 10.0)
    first = next(e for e in res.table if e.rate == res.rate)
    assert res.choice is first


def test_vanishing_interference_picks_nn_mrt():
    ch = gen_symmetric(3, 0.25 * np.pi, 1e9, 4)
    res = simple_select(ch, 10.0)
    assert res.choice.label == "nn_mrt"
    assert res.choice.structure == DecodingStructure.NN


def test_overwhelming_aligned_interference_picks_dd():
    ch = gen_symmetric(3, 0.05 * np.pi, 0.01, 4)
    res = simple_select(ch, 1.0)
    assert res.choice.structure == DecodingStructure.DD


def test_zero_forcing_pair_sees_no_interference(ch3):
    w1, w2 = dict((label, make) for label, _, make in PAIRS)["nn_zf"](ch3)
    s = TxStrategy(w1, w2, 5.0, 5.0)
    for user in (1, 2):
        assert rate_D(ch3, s, user) == pytest.approx(rate_C(ch3, s, user), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_never_beats_the_candidate_search(seed):
    ch = gen_iid(3, seed)
    best = max_sum_rate(ch, 10.0, Grids(201, 3)).rate
    for e in simple_select(ch, 10.0).table:
        if not e.is_tdma:
            assert e.rate <= best + 1e-3


def test_degenerate_zero_forcing_is_skipped(caplog):
    h = np.array([1.0, 0.5j, 0.0])
    ch = Channel(h11=h, h12=[0, 1, 1], h21=3j * h, h22=[1, 1, 0])
    with caplog.at_level(logging.WARNING):
        res = simple_select(ch, 1.0)
    assert "nn_zf" in caplog.text
    assert len(res.table) == 10
    assert res.table[0].label == "nn_mrt"
    assert np.allclose(res.table[0].pair[0], unit(h))
