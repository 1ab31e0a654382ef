import logging
import math

import pytest

from src.misoidc.channel import ChannelEnsembleSpec, ChannelKind
from src.misoidc.config import Grids
from src.misoidc.experiments import montecarlo
from src.misoidc.experiments.montecarlo import (SWEEP_COLUMNS, mrt_frequency_vs_snr, mrt_loss_cdf,
                                                rate_loss_vs_snr, sweep_sir, sweep_snr)
from src.misoidc.rates import DecodingStructure, single_user_rate

SMALL = Grids(21, 3)


def test_frequency_single_trial_is_reproducible():
    a = mrt_frequency_vs_snr(3, [0.0, 20.0], 1, seed=9, grids=SMALL)
    b = mrt_frequency_vs_snr(3, [0.0, 20.0], 1, seed=9, grids=SMALL)
    assert a.rows == b.rows
    for freq in a.column("interference_freq") + a.column("selfish_freq"):
        assert freq in (0.0, 1.0)
    for inter, selfish in zip(a.column("interference_hits"), a.column("selfish_hits")):
        assert inter + selfish <= 1


def test_frequency_does_not_depend_on_worker_count():
    a = mrt_frequency_vs_snr(3, [10.0], 4, seed=1, grids=SMALL, threads=1)
    b = mrt_frequency_vs_snr(3, [10.0], 4, seed=1, grids=SMALL, threads=2)
    assert a.rows == b.rows


def test_progress_is_logged(caplog):
    with caplog.at_level(logging.INFO, logger="src.misoidc"):
        mrt_frequency_vs_snr(3, [0.0], 3, seed=0, grids=SMALL)
    assert "3/3 trials (100%)" in caplog.text


def test_rate_loss_table():
    t = rate_loss_vs_snr(DecodingStructure.ND, 3, [0.0, 10.0], 3, seed=2, grids=SMALL)
    assert t.columns == ("structure", "snr_db", "trials", "mean_loss", "mean_max_rate", "mean_mrt_rate")
    for row in t.rows:
        assert row[0] == "nd"
        assert 0.0 <= row[3] <= 1.0
        assert row[4] >= row[5]


def test_rate_loss_flags_a_missed_candidate_maximum(caplog, monkeypatch):
    monkeypatch.setattr(montecarlo, "structure_max", lambda *a, **k: (0.0, None))
    with caplog.at_level(logging.WARNING, logger="src.misoidc"):
        t = rate_loss_vs_snr(DecodingStructure.ND, 3, [10.0], 2, seed=1, grids=SMALL)
    assert "exceeds the candidate-set maximum" in caplog.text
    row = dict(zip(t.columns, t.rows[0]))
    assert row["mean_loss"] == 0.0
    assert row["mean_max_rate"] == row["mean_mrt_rate"] > 0.0


def test_loss_cdf_is_monotone():
    t = mrt_loss_cdf(DecodingStructure.DD, 3, 10.0, [0.5, 0.8, 0.9, 1.0 + 1e-9], 5, seed=3, grids=SMALL)
    fractions = t.column("fraction")
    assert fractions == sorted(fractions)
    assert all(0.0 <= f <= 1.0 for f in fractions)
    assert fractions[-1] == 1.0


def test_sweep_sir_vanishing_interference():
    t = sweep_sir(3, 0.3, [1e9], 10.0, 2, seed=5, grids=Grids(201, 3))
    assert t.columns == ("sir",) + SWEEP_COLUMNS
    row = dict(zip(t.columns, t.rows[0]))
    ens = ChannelEnsembleSpec(3, ChannelKind.SYMMETRIC, 5, 2, 0.3, 1e9)
    ideal = sum(single_user_rate(ens.draw(k), i, 10.0) for k in range(2) for i in (1, 2)) / 2
    assert row["nn"] == pytest.approx(ideal, abs=1e-2)
    assert row["max"] >= max(row["nn"], row["nd"], row["dn"], row["dd"]) - 1e-12
    assert row["best"] == "nn"


def test_sweep_snr_rows():
    t = sweep_snr(2, 0.2, 1.0, [0.0, 10.0], 2, seed=0, grids=SMALL)
    assert [r[0] for r in t.rows] == [0.0, 10.0]
    for r in t.rows:
        row = dict(zip(t.columns, r))
        assert row["best"] in ("nn", "nd", "dn", "dd", "tdma")
        assert all(math.isfinite(row[c]) for c in ("nn", "nd", "dn", "dd", "tdma", "max", "heuristic"))


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        mrt_frequency_vs_snr(3, [0.0], 0, seed=0)


@pytest.mark.slow
def test_mrt_frequency_at_high_snr():
    t = mrt_frequency_vs_snr(3, [40.0], 500, seed=0)
    row = dict(zip(t.columns, t.rows[0]))
    assert 0.35 <= row["interference_freq"] <= 0.65
    assert row["selfish_freq"] <= 0.02


@pytest.mark.slow
def test_mrt_rate_loss():
    nd = rate_loss_vs_snr(DecodingStructure.ND, 3, [40.0], 500, seed=0)
    assert nd.column("mean_loss")[0] <= 0.08
    dd = rate_loss_vs_snr(DecodingStructure.DD, 3, [0.0, 10.0, 30.0], 500, seed=0).column("mean_loss")
    assert dd[0] < dd[1] < dd[2]


@pytest.mark.slow
def test_sir_transition():
    sirs = [10.0, 3.0, 1.0, 0.3, 0.1, 0.03, 0.01]
    narrow = sweep_sir(3, 0.05 * math.pi, sirs, 10.0, 100, seed=0)
    best = narrow.column("best")
    assert "nn" in best and "dd" in best
    assert best.index("nn") < len(best) - 1 - best[::-1].index("dd")
    wide = sweep_sir(3, 0.15 * math.pi, sirs, 10.0, 100, seed=0)
    for r in wide.rows:
        row = dict(zip(wide.columns, r))
        assert row["tdma"] <= row["max"] + 0.01
