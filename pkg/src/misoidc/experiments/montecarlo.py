"""
Monte Carlo runners over seeded channel ensembles.

Every runner returns a Table; trial t of an ensemble always draws the channel
with seed ^ t, so results do not depend on the worker count.
"""
from __future__ import annotations
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from ..channel import ChannelEnsembleSpec, ChannelKind
from ..config import DEFAULT_GRIDS, Grids, snr_db_to_pmax
from ..heuristic import simple_select
from ..mrt import mrt_pairs
from ..rates import STRUCTURES, DecodingStructure, TxStrategy, sum_rate, tdma_sum_rate
from ..sumrate import lambda_mrt, max_sum_rate, structure_max
from .metrics import FrequencyStats, mean_of

logger = logging.getLogger(__name__)

_MISS_TOL = 1e-9


@dataclass
class Table:
    columns: Tuple[str, ...]
    rows: List[tuple] = field(default_factory=list)

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _collect(results: Iterable, trials: int, label: str) -> list:
    out = []
    start = time.time()
    log_every = max(1, trials // 20)
    for t, r in enumerate(results):
        out.append(r)
        if (t + 1) % log_every == 0 or t == trials - 1:
            elapsed = time.time() - start
            pct = (t + 1) / trials * 100
            eta = elapsed / (t + 1) * (trials - t - 1)
            logger.info("  [%s] %d/%d trials (%.0f%%)  elapsed: %.0fs  ETA: %.0fs",
                        label, t + 1, trials, pct, elapsed, eta)
    return out


def _run_trials(job: Callable[[int], object], trials: int, threads: int = 1, label: str = "") -> list:
    """job(trial) for every trial index, results in trial order."""
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, trials // (4 * threads))
            return _collect(pool.map(job, range(trials), chunksize=chunk), trials, label)
    return _collect(map(job, range(trials)), trials, label)


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")


# ---- MRT frequency ----

def _freq_trial(ens: ChannelEnsembleSpec, p_max: float, grids: Grids, trial: int) -> Tuple[bool, bool]:
    ch = ens.draw(trial)
    _, best = structure_max(ch, DecodingStructure.ND, p_max, grids)
    step = 1.0 / (grids.n_lambda - 1)
    lam1_mrt = lambda_mrt(ch, 1)
    lam2_mrt = lambda_mrt(ch, 2)
    near2 = abs(best.lambda2 - lam2_mrt) <= step
    if near2 and abs(best.lambda1 - 1.0) <= step:
        return True, False
    if near2 and abs(best.lambda1 - lam1_mrt) <= step:
        return False, True
    return False, False


def mrt_frequency_vs_snr(n: int, snr_list_db: Sequence[float], trials: int, seed: int,
                         grids: Grids = DEFAULT_GRIDS, threads: int = 1) -> Table:
    """How often the ND optimum sits on the interference pair (h21, h22) or the selfish pair (h11, h22)."""
    _check_trials(trials)
    ens = ChannelEnsembleSpec(n, ChannelKind.IID, seed, trials)
    table = Table(("snr_db", "trials", "interference_hits", "interference_freq", "selfish_hits", "selfish_freq"))
    for snr in snr_list_db:
        job = partial(_freq_trial, ens, snr_db_to_pmax(snr), grids)
        res = _run_trials(job, trials, threads, label=f"mrt freq {snr:g} dB")
        inter = FrequencyStats(sum(1 for a, _ in res if a), trials)
        selfish = FrequencyStats(sum(1 for _, b in res if b), trials)
        table.rows.append((snr, trials, inter.hits, inter.rate, selfish.hits, selfish.rate))
    return table


# ---- MRT rate loss ----

def _mrt_rate(ch, structure: DecodingStructure, p_max: float) -> float:
    return max(sum_rate(structure, ch, TxStrategy(w1, w2, p_max, p_max))
               for w1, w2 in mrt_pairs(structure, ch).values())


def _loss_trial(ens: ChannelEnsembleSpec, structure: DecodingStructure, p_max: float, grids: Grids,
                trial: int) -> Tuple[float, float]:
    """(optimum, best MRT-pair rate) for one channel."""
    ch = ens.draw(trial)
    opt, _ = structure_max(ch, structure, p_max, grids)
    mrt = _mrt_rate(ch, structure, p_max)
    if mrt > opt + _MISS_TOL * max(1.0, opt):
        logger.warning("%s trial %d: MRT rate %.6f exceeds the candidate-set maximum %.6f; using the MRT rate",
                       structure.label, trial, mrt, opt)
        opt = mrt
    return opt, mrt


def _relative_loss(opt: float, mrt: float) -> float:
    return (opt - mrt) / opt if opt > 0.0 else 0.0


def rate_loss_vs_snr(structure: DecodingStructure, n: int, snr_list_db: Sequence[float], trials: int,
                     seed: int, grids: Grids = DEFAULT_GRIDS, threads: int = 1) -> Table:
    _check_trials(trials)
    ens = ChannelEnsembleSpec(n, ChannelKind.IID, seed, trials)
    table = Table(("structure", "snr_db", "trials", "mean_loss", "mean_max_rate", "mean_mrt_rate"))
    for snr in snr_list_db:
        job = partial(_loss_trial, ens, structure, snr_db_to_pmax(snr), grids)
        res = _run_trials(job, trials, threads, label=f"{structure.label} loss {snr:g} dB")
        table.rows.append((
            structure.value, snr, trials,
            mean_of(_relative_loss(o, m) for o, m in res),
            mean_of(o for o, _ in res),
            mean_of(m for _, m in res),
        ))
    return table


def mrt_loss_cdf(structure: DecodingStructure, n: int, snr_db: float, thresholds: Sequence[float],
                 trials: int, seed: int, grids: Grids = DEFAULT_GRIDS, threads: int = 1) -> Table:
    """Fraction of channels whose best MRT-pair rate is below `threshold` times the optimum."""
    _check_trials(trials)
    ens = ChannelEnsembleSpec(n, ChannelKind.IID, seed, trials)
    job = partial(_loss_trial, ens, structure, snr_db_to_pmax(snr_db), grids)
    res = _run_trials(job, trials, threads, label=f"{structure.label} cdf {snr_db:g} dB")
    ratios = np.array([m / o if o > 0.0 else 1.0 for o, m in res])
    table = Table(("structure", "snr_db", "threshold", "fraction"))
    for x in thresholds:
        hits = FrequencyStats(int(np.count_nonzero(ratios < x)), trials)
        table.rows.append((structure.value, snr_db, x, hits.rate))
    return table


# ---- per-structure sweeps ----

SWEEP_COLUMNS = tuple(s.value for s in STRUCTURES) + ("tdma", "max", "heuristic", "best")


def _sweep_trial(ens: ChannelEnsembleSpec, p_max: float, grids: Grids, share: float, trial: int) -> tuple:
    ch = ens.draw(trial)
    res = max_sum_rate(ch, p_max, grids)
    per = tuple(res.per_structure[s] for s in STRUCTURES)
    return per + (tdma_sum_rate(ch, p_max, share), res.rate, simple_select(ch, p_max, share).rate)


def _sweep_point(ens: ChannelEnsembleSpec, p_max: float, grids: Grids, share: float, threads: int,
                 label: str) -> tuple:
    job = partial(_sweep_trial, ens, p_max, grids, share)
    res = np.array(_run_trials(job, ens.trials, threads, label=label))
    means = tuple(float(v) for v in res.mean(axis=0))
    # best among the four structures and TDMA, first wins on ties
    labels = [s.value for s in STRUCTURES] + ["tdma"]
    k = int(np.argmax(means[:len(labels)]))
    return means + (labels[k],)


def sweep_sir(n: int, theta: float, sir_list: Sequence[float], snr_db: float, trials: int, seed: int,
              grids: Grids = DEFAULT_GRIDS, share: float = 0.5, threads: int = 1) -> Table:
    _check_trials(trials)
    p_max = snr_db_to_pmax(snr_db)
    table = Table(("sir",) + SWEEP_COLUMNS)
    for sir in sir_list:
        ens = ChannelEnsembleSpec(n, ChannelKind.SYMMETRIC, seed, trials, theta, sir)
        table.rows.append((sir,) + _sweep_point(ens, p_max, grids, share, threads, f"sir {sir:g}"))
    return table


def sweep_snr(n: int, theta: float, sir: float, snr_list_db: Sequence[float], trials: int, seed: int,
              grids: Grids = DEFAULT_GRIDS, share: float = 0.5, threads: int = 1) -> Table:
    _check_trials(trials)
    ens = ChannelEnsembleSpec(n, ChannelKind.SYMMETRIC, seed, trials, theta, sir)
    table = Table(("snr_db",) + SWEEP_COLUMNS)
    for snr in snr_list_db:
        table.rows.append((snr,) + _sweep_point(ens, snr_db_to_pmax(snr), grids, share, threads, f"snr {snr:g} dB"))
    return table
