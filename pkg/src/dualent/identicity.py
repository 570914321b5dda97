"""Loss of identicity: partial distinguishability and environment dephasing.

A particle pair that is only partly identical is modeled with an internal tag
per particle whose states overlap with modulus ``v``. Tracing the tag out
leaves the populations of the routed dual state alone and multiplies its
coherence between |-k, k> and |k, -k> by ``v``. At v = 1 the pure dual state
comes back; at v = 0 only the classical mixture remains.

The two channels of the macro-molecule scheme act the same way:

* identicity loss while the molecules sit in separate traps,
  ``exp(-gamma_id * d1 / speed)``, which depends on d1 alone;
* decoherence of the path superposition,
  ``exp(-gamma_path * (d1 + d2) / speed)``, symmetric in d1 and d2.

Physical constants (CODATA 2018, exact where SI fixes them):

    hbar = 1.054571817e-34 J s
    k_B  = 1.380649e-23 J / K
    u    = 1.66053906660e-27 kg
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bell import DensityOperator4, optimize_chsh
from .fock import DualPairState, photon_state
from .parallel import parallel_map
from .routing import route_pbs

HBAR = 1.054571817e-34
K_B = 1.380649e-23
ATOMIC_MASS_UNIT = 1.66053906660e-27

# |-k>_D |k>_C and |k>_D |-k>_C in the Diana x Charlie basis
_COHERENCE = (1, 2)


def check_overlap(v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"overlap must lie in [0, 1], got {v}")
    return v


@dataclass(frozen=True)
class Dephasing:
    """Multiplies the dual coherence by ``factor``."""

    factor: float

    def __call__(self, rho) -> DensityOperator4:
        m = np.array(rho.matrix if isinstance(rho, DensityOperator4) else rho, dtype=complex)
        i, j = _COHERENCE
        m[i, j] *= self.factor
        m[j, i] *= self.factor
        return DensityOperator4(m)

    def then(self, other: Dephasing) -> Dephasing:
        return Dephasing(self.factor * other.factor)


def degraded_dual_state(state: DualPairState, v: float) -> DensityOperator4:
    """Routed dual state of a pair whose internal tags overlap with modulus ``v``."""
    return Dephasing(check_overlap(v))(route_pbs(state))


def smax_vs_overlap(
    v_grid: Iterable[float], state: DualPairState | None = None, workers: int | None = None
) -> list[tuple[float, float]]:
    state = photon_state() if state is None else state
    grid = [check_overlap(v) for v in v_grid]
    smax = parallel_map(lambda v: optimize_chsh(degraded_dual_state(state, v)).s_max, grid, workers)
    return list(zip(grid, smax))


@dataclass(frozen=True)
class TransitionParams:
    gamma_id: float
    gamma_path: float
    d1: float
    d2: float
    speed: float

    def __post_init__(self):
        for name in ("gamma_id", "gamma_path", "d1", "d2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.speed <= 0:
            raise ValueError("speed must be positive")


def identicity_loss(params: TransitionParams) -> Dephasing:
    return Dephasing(math.exp(-params.gamma_id * params.d1 / params.speed))


def path_decoherence(params: TransitionParams) -> Dephasing:
    return Dephasing(math.exp(-params.gamma_path * (params.d1 + params.d2) / params.speed))


def transition_channel(params: TransitionParams, state: DualPairState | None = None) -> DensityOperator4:
    state = photon_state() if state is None else state
    channel = identicity_loss(params).then(path_decoherence(params))
    return channel(route_pbs(state))


def smax_vs_distances(
    gamma_id: float,
    gamma_path: float,
    speed: float,
    d1_grid: Sequence[float],
    d2_grid: Sequence[float],
    state: DualPairState | None = None,
    workers: int | None = None,
) -> list[tuple[float, float, float]]:
    """Rows (d1, d2, sMax) with d1 as the outer loop."""
    points = [(d1, d2) for d1 in d1_grid for d2 in d2_grid]

    def smax(point):
        params = TransitionParams(gamma_id, gamma_path, point[0], point[1], speed)
        return optimize_chsh(transition_channel(params, state)).s_max

    return [(d1, d2, s) for (d1, d2), s in zip(points, parallel_map(smax, points, workers))]


@dataclass(frozen=True)
class TemperatureQuery:
    mass_number: float
    delta_x: float

    def __post_init__(self):
        if self.mass_number <= 0:
            raise ValueError("mass number must be positive")
        if self.delta_x <= 0:
            raise ValueError("delta_x must be positive")


def temperature_threshold(q: TemperatureQuery) -> float:
    """Temperature (K) below which arrival times do not reveal which particle is which."""
    mass = q.mass_number * ATOMIC_MASS_UNIT
    return HBAR**2 / (2.0 * mass * K_B * q.delta_x**2)
