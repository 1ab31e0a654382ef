import numpy as np
import pytest

from src.misoidc.channel import Channel, gen_iid
from src.misoidc.config import Grids
from src.misoidc.errors import ParallelChannels, UnsupportedDimension
from src.misoidc.oracle import (GridScope, GridSpec, full_sphere_grid, oracle_max, oracle_pareto,
                                sphere_spec, subspace_grid, user_grid)
from src.misoidc.pareto import family_beams, lambda_grid, power_grid, region_frontier, region_sweep, w_family
from src.misoidc.rates import STRUCTURES, DecodingStructure, beam_gains, sum_rate, sum_rate_from_gains

ND, DD = DecodingStructure.ND, DecodingStructure.DD


def _naive_max(ch, structure, spec, p):
    g1, g2 = user_grid(ch, 1, spec), user_grid(ch, 2, spec)
    pw = power_grid(p, spec.n_power)
    d1 = np.outer(beam_gains(ch.h11, g1.beams), pw).ravel()
    x1 = np.outer(beam_gains(ch.h21, g1.beams), pw).ravel()
    d2 = np.outer(beam_gains(ch.h22, g2.beams), pw).ravel()
    x2 = np.outer(beam_gains(ch.h12, g2.beams), pw).ravel()
    return float(sum_rate_from_gains(structure, d1[:, None], x1[:, None], d2[None, :], x2[None, :]).max())


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 4, 3)
    with pytest.raises(ValueError):
        GridSpec(3, 4, 1)
    assert sphere_spec().scope == GridScope.FULL_SPHERE


def test_subspace_grid_basics(ch3):
    g = subspace_grid(ch3, 1, GridSpec(2, 2, 2))
    assert len(g) == 4
    assert np.allclose(np.linalg.norm(g.beams, axis=1), 1.0, atol=1e-12)


def test_subspace_grid_contains_the_real_family(ch3):
    spec = GridSpec(11, 6, 2)
    g = subspace_grid(ch3, 2, spec)
    real = family_beams(w_family(ch3, 2), lambda_grid(11))
    assert np.array_equal(g.beams[::6], real)
    assert np.all(g.coords[::6, 1] == 0.0)


def test_subspace_grid_needs_two_directions():
    h = np.array([1.0, 1j])
    ch = Channel(h11=h, h12=[1, 0], h21=2 * h, h22=[0, 1])
    with pytest.raises(ParallelChannels):
        subspace_grid(ch, 1, GridSpec(3, 3, 2))


def test_full_sphere_grid():
    g = full_sphere_grid(2, (2, 2))
    assert len(g) == 4
    assert np.allclose(np.linalg.norm(full_sphere_grid(2, (9, 7)).beams, axis=1), 1.0, atol=1e-12)
    with pytest.raises(UnsupportedDimension):
        full_sphere_grid(3, (4, 4))


def test_zero_power(ch3):
    for s in STRUCTURES:
        assert oracle_max(ch3, s, GridSpec(3, 2, 2), 0.0).rate == 0.0


@pytest.mark.parametrize("structure", STRUCTURES)
def test_matches_exhaustive_search_on_small_grid(ch3, structure):
    spec = GridSpec(3, 4, 3)
    res = oracle_max(ch3, structure, spec, 4.0)
    assert res.rate == pytest.approx(_naive_max(ch3, structure, spec, 4.0), abs=1e-12)
    assert sum_rate(structure, ch3, res.best.strategy()) == pytest.approx(res.rate, abs=1e-12)


@pytest.mark.parametrize("structure", STRUCTURES)
def test_matches_exhaustive_search_across_many_boxes(structure):
    ch = gen_iid(3, 2024)
    spec = GridSpec(21, 16, 4)
    res = oracle_max(ch, structure, spec, 10.0)
    assert res.rate == pytest.approx(_naive_max(ch, structure, spec, 10.0), abs=1e-12)


def test_result_is_independent_of_thread_count():
    ch = gen_iid(3, 5)
    spec = GridSpec(21, 16, 4)
    a = oracle_max(ch, DD, spec, 3.0, threads=1)
    b = oracle_max(ch, DD, spec, 3.0, threads=4)
    assert a.rate == b.rate
    assert (a.index1, a.index2) == (b.index1, b.index2)


def test_refining_the_grid_never_hurts(ch3):
    coarse = oracle_max(ch3, ND, GridSpec(5, 4, 3), 2.0).rate
    fine = oracle_max(ch3, ND, GridSpec(9, 4, 3), 2.0).rate
    assert fine >= coarse


def test_full_sphere_oracle_runs(ch2):
    res = oracle_max(ch2, DD, GridSpec(9, 8, 3, GridScope.FULL_SPHERE), 1.0)
    assert np.isnan(res.best.lambda1)
    assert res.rate > 0.0


def _own_lambda(h_ii, w):
    return abs(np.vdot(h_ii, w)) ** 2 / np.vdot(h_ii, h_ii).real


def test_dd_lambdas_are_reported_on_the_v_family(ch3):
    res = oracle_max(ch3, DD, GridSpec(11, 4, 3), 4.0)
    assert res.best.lambda1 == pytest.approx(_own_lambda(ch3.h11, res.best.w1), abs=1e-9)
    assert res.best.lambda2 == pytest.approx(_own_lambda(ch3.h22, res.best.w2), abs=1e-9)


def test_nd_lambdas_are_reported_on_the_w_family(ch3):
    res = oracle_max(ch3, ND, GridSpec(11, 4, 3), 4.0)
    assert res.best.lambda1 == pytest.approx(_own_lambda(ch3.h21, res.best.w1), abs=1e-9)
    assert res.best.lambda2 == pytest.approx(_own_lambda(ch3.h12, res.best.w2), abs=1e-9)


def test_pareto_zero_power(ch3):
    front = oracle_pareto(ch3, ND, GridSpec(3, 2, 2), 0.0)
    assert [(p.r1, p.r2) for p in front] == [(0.0, 0.0)]


@pytest.mark.parametrize("structure", [DecodingStructure.NN, ND, DecodingStructure.DN])
def test_pareto_covers_the_region_sweep(ch3, structure):
    spec = GridSpec(9, 4, 3)
    front = oracle_pareto(ch3, structure, spec, 2.0)
    assert len(front) <= (9 * 4 * 3) ** 2
    r1 = np.array([p.r1 for p in front])
    r2 = np.array([p.r2 for p in front])
    for p in region_sweep(structure, ch3, 2.0, Grids(9, 3)):
        assert np.any((r1 >= p.r1 - 1e-12) & (r2 >= p.r2 - 1e-12))


@pytest.mark.parametrize("structure", STRUCTURES)
def test_oracle_does_not_beat_the_region_sweep(ch3, structure):
    front = region_frontier(structure, ch3, 1.0, Grids(101, 11))
    for p in oracle_pareto(ch3, structure, GridSpec(9, 4, 3), 1.0):
        near = (front.r1 >= p.r1 - 0.02) & (front.r2 >= p.r2 - 0.02)
        assert np.any(near), (p.r1, p.r2)


def test_pareto_is_non_dominated(ch3):
    front = oracle_pareto(ch3, DD, GridSpec(5, 4, 3), 2.0, threads=2)
    pts = sorted((p.r1, p.r2) for p in front)
    for (a1, a2), (b1, b2) in zip(pts, pts[1:]):
        assert b1 > a1 and b2 < a2


@pytest.mark.slow
def test_full_power_attains_the_oracle_maximum():
    spec = GridSpec()
    for structure in (ND, DD):
        hits = 0
        for seed in range(100):
            res = oracle_max(gen_iid(3, seed), structure, spec, 1.0)
            step = 1.0 / (spec.n_power - 1)
            hits += res.best.p1 >= 1.0 - step - 1e-12 and res.best.p2 >= 1.0 - step - 1e-12
        assert hits >= 95


@pytest.mark.slow
def test_two_dimensional_subspace_suffices_at_n2():
    for seed in range(20):
        ch = gen_iid(2, seed)
        for s in STRUCTURES:
            sub = oracle_max(ch, s, GridSpec(), 1.0).rate
            sph = oracle_max(ch, s, sphere_spec(), 1.0).rate
            assert abs(sub - sph) <= 0.02


@pytest.mark.slow
def test_real_combinations_suffice_at_n3():
    spec = GridSpec(201, 64, 21)
    for seed in range(50):
        ch = gen_iid(3, seed)
        res = oracle_max(ch, ND, spec, 1.0)
        real = oracle_max(ch, ND, GridSpec(201, 2, 21), 1.0)
        assert real.rate >= res.rate - 0.02
