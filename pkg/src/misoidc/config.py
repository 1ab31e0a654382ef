from __future__ import annotations
import logging
import sys
from dataclasses import dataclass

# numerical tolerances
TOL_DEG = 1e-9        # zero vector / zero projection
TOL_PAR = 1e-9        # ||proj_orth(v, u)|| / ||v|| below this means parallel
TOL_BALANCE = 1e-12   # denominators of the balancing formulas
TOL_BOUNDARY = 1e-12  # inequality treated as an equality

DEFAULT_N = 3
DEFAULT_TRIALS = 500
DEFAULT_SEED = 0


@dataclass(frozen=True)
class Grids:
    n_lambda: int = 201
    n_power: int = 21

    def __post_init__(self):
        if self.n_lambda < 2 or self.n_power < 2:
            raise ValueError(f"grid sizes must be >= 2, got {self.n_lambda}x{self.n_power}")


DEFAULT_GRIDS = Grids()

# oracle defaults, per user: lambda x phase x power
ORACLE_N_LAMBDA = 201
ORACLE_N_PHASE = 64
ORACLE_N_POWER = 21
# full sphere (N=2): polar x azimuth
SPHERE_RESOLUTION = (181, 128)


def snr_db_to_pmax(snr_db: float) -> float:
    """Unit noise variance, so the SNR is the transmit power budget."""
    return float(10.0 ** (snr_db / 10.0))


def configure_logging(verbosity: int = 0) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    root = logging.getLogger(__package__)
    root.setLevel(level)
    if not any(getattr(h, "_misoidc", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s - %(name)s - %(message)s"))
        handler._misoidc = True
        root.addHandler(handler)
