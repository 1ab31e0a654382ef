import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import seeds
from src.misoidc.channel import Channel, gen_iid
from src.misoidc.config import Grids
from src.misoidc.errors import DegenerateBalance
from src.misoidc.linalg import cos2, norm, rank2_herm_eig, unit
from src.misoidc.oracle import GridSpec, oracle_max
from src.misoidc.pareto import family_beams, lambda_grid, region_families, v_family, w_family
from src.misoidc.rates import (STRUCTURES, DecodingStructure, TxStrategy, beam_gains, sum_rate, sum_rate_from_gains,
                               sum_rate_terms)
from src.misoidc.sumrate import (BalanceRegime, Infeasible, coupled_balance_dd, dd_candidates, lambda_a_dd,
                                 lambda_b_nd, lambda_mrt, max_sum_rate, nd_candidates, structure_max,
                                 w2_balance_nd)

ND, DN, DD, NN = DecodingStructure.ND, DecodingStructure.DN, DecodingStructure.DD, DecodingStructure.NN


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def test_lambda_mrt(ch3):
    assert lambda_mrt(ch3, 2) == pytest.approx(cos2(ch3.h22, ch3.h12))


def test_lambda_b_balances_user1_rate_terms():
    checked = 0
    for seed in range(200):
        ch = gen_iid(3, seed)
        p = 10.0 ** ((seed % 5) - 1)
        w2 = unit(ch.h22)
        try:
            lam = lambda_b_nd(ch, w2, p)
        except DegenerateBalance:
            continue
        w1 = family_beams(w_family(ch, 1), [lam])[0]
        g11, g21 = beam_gains(ch.h11, w1, p), beam_gains(ch.h21, w1, p)
        g22, g12 = beam_gains(ch.h22, w2, p), beam_gains(ch.h12, w2, p)
        assert _rel(g11 / (1 + g12), g21 / (1 + g22)) <= 1e-8
        checked += 1
    assert checked >= 20


def test_w2_balance_meets_constraint():
    checked = 0
    for seed in range(200):
        ch = gen_iid(3, seed)
        p = 10.0 ** ((seed % 5) - 1)
        w1 = family_beams(w_family(ch, 1), [0.5 * (1.0 + lambda_mrt(ch, 1))])[0]
        res = w2_balance_nd(ch, w1, p)
        if isinstance(res, Infeasible):
            assert res.regime in (BalanceRegime.TREAT_AS_NOISE_LIMITED, BalanceRegime.DECODABILITY_LIMITED)
            continue
        assert norm(res) == pytest.approx(1.0, abs=1e-12)
        g = beam_gains(ch.h21, w1, p) / beam_gains(ch.h11, w1, p)
        lhs = beam_gains(ch.h22, res, p)
        rhs = (g - 1.0) + g * beam_gains(ch.h12, res, p)
        assert _rel(lhs, rhs) <= 1e-8
        checked += 1
    assert checked >= 20


def _coupled_gains(ch, lam1, lam2, p):
    w1 = family_beams(v_family(ch, 1), [lam1])[0]
    w2 = family_beams(v_family(ch, 2), [lam2])[0]
    return (beam_gains(ch.h11, w1, p), beam_gains(ch.h21, w1, p),
            beam_gains(ch.h22, w2, p), beam_gains(ch.h12, w2, p)), (w1, w2)


def test_coupled_balance_equalises_both_users():
    checked = 0
    for seed in range(60):
        ch = gen_iid(3, seed)
        p = 10.0 ** ((seed % 4) - 1)
        for lam1, lam2 in coupled_balance_dd(ch, p, n_lambda=201):
            (g11, g21, g22, g12), _ = _coupled_gains(ch, lam1, lam2, p)
            assert _rel((1 + g22) * g11, g21) <= 1e-8
            assert _rel((1 + g11) * g22, g12) <= 1e-8
            checked += 1
    assert checked >= 5


def test_dd_search_covers_the_coupled_pairs():
    for seed in range(30):
        ch = gen_iid(3, seed)
        p = 100.0
        best, _ = structure_max(ch, DD, p, Grids(201, 5))
        for lam1, lam2 in coupled_balance_dd(ch, p, n_lambda=201):
            _, (w1, w2) = _coupled_gains(ch, lam1, lam2, p)
            assert best >= sum_rate(DD, ch, TxStrategy(w1, w2, p, p)) - 1e-9


@pytest.mark.parametrize("seed", [4, 12, 37])
def test_dd_matches_a_coarse_oracle_at_high_snr(seed):
    ch = gen_iid(3, seed)
    p = 100.0
    cand, _ = structure_max(ch, DD, p)
    assert cand >= oracle_max(ch, DD, GridSpec(41, 8, 6), p).rate - 0.02


def test_coupled_balance_is_empty_on_parallel_channels():
    h = np.array([1.0, 1j, 0.0])
    ch = Channel(h11=h, h12=[0, 1, 0], h21=2 * h, h22=[0, 0, 1])
    assert coupled_balance_dd(ch, 1.0).shape == (0, 2)


def test_w2_balance_beats_phase_grid():
    # the phase rule maximises |h22^H w2| among beamformers meeting the constraint
    for seed in range(30):
        ch = gen_iid(3, seed)
        p = 3.0
        w1 = unit(ch.h21)
        res = w2_balance_nd(ch, w1, p)
        if isinstance(res, Infeasible):
            continue
        g = beam_gains(ch.h21, w1, p) / beam_gains(ch.h11, w1, p)
        eig = rank2_herm_eig(ch.h22, ch.h12, p, -g * p)
        a_t, b_t = eig.pos_val - (g - 1.0), -eig.neg_val + (g - 1.0)
        phis = 2 * np.pi * np.arange(256) / 256
        cands = (eig.pos_vec[None, :] / np.sqrt(a_t)
                 + np.exp(1j * phis)[:, None] * eig.neg_vec[None, :] / np.sqrt(b_t))
        cands /= np.linalg.norm(cands, axis=1, keepdims=True)
        best_grid = beam_gains(ch.h22, cands, p).max()
        assert beam_gains(ch.h22, res, p) >= best_grid * (1 - 1e-9)


def test_lambda_a_balances_dd_terms():
    checked = 0
    for seed in range(200):
        ch = gen_iid(3, seed)
        g_partner = norm(ch.h22) ** 2 * 0.1 * (seed % 7)
        try:
            lam = lambda_a_dd(ch, 1, g_partner)
        except DegenerateBalance:
            continue
        w = family_beams(v_family(ch, 1), [lam])[0]
        assert _rel((1 + g_partner) * beam_gains(ch.h11, w), beam_gains(ch.h21, w)) <= 1e-8
        checked += 1
    assert checked >= 20


def test_nd_candidates_shape(ch3):
    c = nd_candidates(ch3, 2.0, n_lambda=21)
    assert len(c) == 3 * c.w2_lambdas.size
    assert np.array_equal(c.w2_beams[-1], unit(ch3.h22))
    assert c.powers == (2.0, 2.0)
    assert len(c.w1_set) in (2, 3)


def test_dd_candidates_end_in_matched_filter(ch3):
    c = dd_candidates(ch3, 2.0, n_lambda=21)
    for i in (1, 2):
        u = c.user(i)
        assert np.array_equal(u.beams[-1], unit(ch3.desired(i)))
        assert u.lambdas[-1] == 1.0


def test_dn_is_nd_on_swapped_channel(ch3):
    g = Grids(51, 5)
    r_dn, t_dn = structure_max(ch3, DN, 5.0, g)
    r_nd, t_nd = structure_max(ch3.swap_users(), ND, 5.0, g)
    assert r_dn == r_nd
    assert np.array_equal(t_dn.w1, t_nd.w2)
    assert t_dn.structure == DN


@pytest.mark.parametrize("seed", range(5))
def test_structure_max_beats_mrt_pairs(seed):
    ch = gen_iid(3, seed)
    p = 10.0
    g = Grids(101, 5)
    nd, _ = structure_max(ch, ND, p, g)
    dd, _ = structure_max(ch, DD, p, g)
    u11, u21, u12, u22 = unit(ch.h11), unit(ch.h21), unit(ch.h12), unit(ch.h22)
    assert nd >= sum_rate(ND, ch, TxStrategy(u21, u22, p, p)) - 1e-9
    assert nd >= sum_rate(ND, ch, TxStrategy(u11, u22, p, p)) - 1e-9
    assert dd >= sum_rate(DD, ch, TxStrategy(u11, u22, p, p)) - 1e-9


def test_max_sum_rate_picks_the_best_structure(ch3):
    res = max_sum_rate(ch3, 10.0, Grids(51, 5))
    assert set(res.per_structure) == set(STRUCTURES)
    assert res.rate == max(res.per_structure.values())
    assert res.per_structure[res.structure] == res.rate
    rp = sum_rate(res.structure, ch3, res.best.strategy())
    assert rp == pytest.approx(res.rate, abs=1e-12)


def test_max_sum_rate_restricted(ch3):
    res = max_sum_rate(ch3, 1.0, Grids(21, 3), structures=(DD,))
    assert res.structure == DD
    assert list(res.per_structure) == [DD]
    with pytest.raises(ValueError):
        max_sum_rate(ch3, 1.0, Grids(21, 3), structures=())


def test_zero_and_negative_power(ch3):
    for s in STRUCTURES:
        assert structure_max(ch3, s, 0.0, Grids(11, 3))[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        structure_max(ch3, NN, -1.0)


def _family_gains(ch, structure, user, lams, p):
    beams = family_beams(region_families(structure, ch)[user - 1], lams)
    return beam_gains(ch.desired(user), beams, p), beam_gains(ch.leakage(user), beams, p)


@pytest.mark.parametrize("structure", STRUCTURES)
@pytest.mark.parametrize("seed", range(4))
def test_cutting_either_power_by_a_tenth_never_helps(structure, seed):
    ch = gen_iid(3, seed)
    p = 10.0
    fine, coarse = lambda_grid(1001), lambda_grid(101)
    d1, x1 = _family_gains(ch, structure, 1, fine, p)
    d2, x2 = _family_gains(ch, structure, 2, fine, p)
    full = sum_rate_from_gains(structure, d1[:, None], x1[:, None], d2[None, :], x2[None, :]).max()
    r1, y1 = _family_gains(ch, structure, 1, coarse, 0.9 * p)
    r2, y2 = _family_gains(ch, structure, 2, coarse, 0.9 * p)
    cut1 = sum_rate_from_gains(structure, r1[:, None], y1[:, None], d2[None, :], x2[None, :]).max()
    cut2 = sum_rate_from_gains(structure, d1[:, None], x1[:, None], r2[None, :], y2[None, :]).max()
    assert full >= max(cut1, cut2) - 1e-9


@given(seed=seeds, p=st.sampled_from([0.1, 1.0, 10.0, 100.0]))
@settings(max_examples=100, deadline=None)
def test_min_of_concave_and_linear_peaks_at_an_end_or_the_crossing(seed, p):
    ch = gen_iid(3, seed)
    lams = lambda_grid(201)
    b = family_beams(w_family(ch, 1), lams)
    w2 = unit(ch.h22)[None, :]
    f1, f2 = sum_rate_terms(ND, beam_gains(ch.h11, b, p), beam_gains(ch.h21, b, p),
                            beam_gains(ch.h22, w2, p), beam_gains(ch.h12, w2, p))
    f1, f2 = np.broadcast_to(f1, lams.shape), np.broadcast_to(f2, lams.shape)
    k = int(np.argmax(np.minimum(f1, f2)))
    marks = {int(np.argmax(f1)), int(np.argmax(f2))}
    cross = np.flatnonzero(np.diff(np.sign(f1 - f2)) != 0)
    marks.update(int(i) for i in cross)
    marks.update(int(i) + 1 for i in cross)
    assert min(abs(k - m) for m in marks) <= 1


@pytest.mark.parametrize("seed", range(3))
def test_candidate_sets_match_a_coarse_oracle(seed):
    ch = gen_iid(3, 100 + seed)
    spec = GridSpec(21, 8, 6)
    for s in STRUCTURES:
        cand, _ = structure_max(ch, s, 1.0)
        assert cand >= oracle_max(ch, s, spec, 1.0).rate - 0.02


@pytest.mark.slow
def test_candidate_sets_match_the_oracle():
    spec = GridSpec()
    for seed in range(50):
        ch = gen_iid(3, seed)
        for s in (ND, DN, DD):
            cand, _ = structure_max(ch, s, 1.0)
            orc = oracle_max(ch, s, spec, 1.0).rate
            assert abs(cand - orc) <= 0.02
