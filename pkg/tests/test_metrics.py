import pytest

from src.misoidc.experiments.metrics import FrequencyStats, mean_of


def test_frequency_stats():
    s = FrequencyStats(hits=3, trials=12)
    assert s.rate == 0.25
    assert s.misses == 9
    assert FrequencyStats(0, 0).rate == 0.0


def test_mean_of():
    assert mean_of([1.0, 2.0, 6.0]) == pytest.approx(3.0)
    assert mean_of(x for x in [4.0]) == 4.0
    assert mean_of([]) == 0.0
