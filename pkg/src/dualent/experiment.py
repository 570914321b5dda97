"""Monte Carlo run of the Charlie/Diana momentum Bell test.

Each emitted pair is routed by the polarizing beam splitters, measured by both
pseudo-spin analyzers and, when both detectors click, recorded as a
coincidence. Pair ``k`` at setting pair ``s`` draws its randomness from Philox
block ``k`` under key ``(seed, s)``, so sharding pairs across workers cannot
change any count.

Pairs lost to detector inefficiency are dropped before estimation (fair
sampling is assumed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bell import ChshSettings, DensityOperator4, MeasurementSetting, as_density
from .errors import ConfigError, EmptyCounts
from .fock import DualPairState, photon_state
from .identicity import degraded_dual_state
from .parallel import parallel_map
from .rng import UINT64_MAX, PairStream, threshold
from .routing import route_pbs

BLOCK_PAIRS = 1 << 18

__all__ = [
    "CoincidenceCounts",
    "ExperimentConfig",
    "ExperimentResult",
    "estimate_correlation",
    "maximal_settings",
    "route_pbs",
    "run_experiment",
    "sample_outcomes",
]


def maximal_settings() -> ChshSettings:
    """Settings reaching 2 sqrt(2) on the routed photon state.

    Charlie uses z and x; Diana uses (x - z)/sqrt(2) and -(x + z)/sqrt(2).
    """
    return ChshSettings(
        a=MeasurementSetting(0.0, 0.0),
        a_prime=MeasurementSetting(math.pi / 2, 0.0),
        b=MeasurementSetting(3 * math.pi / 4, 0.0),
        b_prime=MeasurementSetting(3 * math.pi / 4, math.pi),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    state: DualPairState = field(default_factory=photon_state)
    settings: ChshSettings = field(default_factory=maximal_settings)
    n_pairs_per_setting_pair: int = 1_000_000
    seed: int = 42
    overlap_v: float = 1.0
    detector_efficiency: float = 1.0

    def __post_init__(self):
        n = self.n_pairs_per_setting_pair
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ConfigError(f"n_pairs_per_setting_pair must be a positive integer, got {n!r}")
        if not 0 <= int(self.seed) <= UINT64_MAX:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not 0.0 <= self.overlap_v <= 1.0:
            raise ConfigError(f"overlap_v must lie in [0, 1], got {self.overlap_v!r}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ConfigError(f"detector_efficiency must lie in (0, 1], got {self.detector_efficiency!r}")


@dataclass(frozen=True)
class CoincidenceCounts:
    """Outcome pairs (first party, second party): ++, +-, -+, --."""

    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0

    @property
    def total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    def __add__(self, other: CoincidenceCounts) -> CoincidenceCounts:
        return CoincidenceCounts(
            self.n_pp + other.n_pp, self.n_pm + other.n_pm, self.n_mp + other.n_mp, self.n_mm + other.n_mm
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.n_pp, self.n_pm, self.n_mp, self.n_mm


def _count_block(stream: PairStream, start: int, count: int, cuts, efficiency_cut) -> CoincidenceCounts:
    words = stream.words(start, count)
    outcome = words[:, 0]
    if efficiency_cut is not None:
        cut = np.uint64(efficiency_cut)
        clicked = (words[:, 1] < cut) & (words[:, 2] < cut)
        outcome = outcome[clicked]
    m = outcome.shape[0]
    below = [m if cut is None else int(np.count_nonzero(outcome < np.uint64(cut))) for cut in cuts]
    below = [min(b, m) for b in below]
    return CoincidenceCounts(below[0], below[1] - below[0], below[2] - below[1], m - below[2])


def sample_outcomes(
    rho,
    a: MeasurementSetting,
    b: MeasurementSetting,
    n: int,
    stream: PairStream,
    detector_efficiency: float = 1.0,
    workers: int | None = None,
) -> CoincidenceCounts:
    """Coincidence counts of ``n`` pairs measured with ``a`` (first factor) and ``b``."""
    rho = as_density(rho)
    if n < 1:
        raise ConfigError("n must be at least 1")
    probs = rho.probabilities(a, b)
    cumulative = np.cumsum(probs)[:3]
    cuts = [threshold(float(c)) for c in cumulative]
    efficiency_cut = threshold(detector_efficiency)
    blocks = [(start, min(BLOCK_PAIRS, n - start)) for start in range(0, n, BLOCK_PAIRS)]
    parts = parallel_map(lambda blk: _count_block(stream, blk[0], blk[1], cuts, efficiency_cut), blocks, workers)
    total = CoincidenceCounts()
    for part in parts:
        total = total + part
    return total


def estimate_correlation(counts: CoincidenceCounts) -> tuple[float, float]:
    n = counts.total
    if n == 0:
        raise EmptyCounts("no coincidences recorded")
    e = (counts.n_pp + counts.n_mm - counts.n_pm - counts.n_mp) / n
    return e, math.sqrt(max(0.0, 1.0 - e * e) / n)


@dataclass(frozen=True)
class ExperimentResult:
    counts: dict[str, CoincidenceCounts]
    e_hat: tuple[float, float, float, float]
    e_std_err: tuple[float, float, float, float]
    s_hat: float
    s_std_err: float

    def to_json(self) -> dict:
        return {
            "countsPerSettingPair": {
                label: dict(zip(("nPP", "nPM", "nMP", "nMM"), c.as_tuple())) for label, c in self.counts.items()
            },
            "eHat": list(self.e_hat),
            "eStdErr": list(self.e_std_err),
            "sHat": self.s_hat,
            "sStdErr": self.s_std_err,
        }

    def csv_rows(self) -> list[list]:
        return [
            [label, *c.as_tuple(), e, se]
            for (label, c), e, se in zip(self.counts.items(), self.e_hat, self.e_std_err)
        ]


CSV_HEADER = ["settingPair", "nPP", "nPM", "nMP", "nMM", "eHat", "stdErr"]


def prepared_state(config: ExperimentConfig) -> DensityOperator4:
    return degraded_dual_state(config.state, config.overlap_v)


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Sample all four CHSH setting pairs and estimate S.

    Counts are stored with Diana's outcome first; the product of outcomes, and
    hence every estimate, does not depend on that order.
    """
    rho = prepared_state(config)
    counts, e_hat, e_err = {}, [], []
    for index, (label, charlie, diana) in enumerate(config.settings.pairs()):
        c = sample_outcomes(
            rho,
            diana,
            charlie,
            config.n_pairs_per_setting_pair,
            PairStream(int(config.seed), index),
            config.detector_efficiency,
            workers,
        )
        e, se = estimate_correlation(c)
        counts[label] = c
        e_hat.append(e)
        e_err.append(se)
    s_hat = e_hat[0] + e_hat[1] + e_hat[2] - e_hat[3]
    s_err = math.sqrt(sum(se * se for se in e_err))
    return ExperimentResult(counts, tuple(e_hat), tuple(e_err), s_hat, s_err)
