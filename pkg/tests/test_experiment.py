import math

import numpy as np
import pytest

from dualent.bell import TSIRELSON, X, Z, DensityOperator4, MeasurementSetting, chsh, correlation
from dualent.dualism import concurrence, dual_representation, smax_pure
from dualent.bell import optimize_chsh
from dualent.errors import ConfigError, EmptyCounts, WrongStateShape
from dualent.experiment import (
    CoincidenceCounts,
    ExperimentConfig,
    estimate_correlation,
    maximal_settings,
    route_pbs,
    run_experiment,
    sample_outcomes,
)
from dualent.fock import MOMENTUM, POLARIZATION, Statistics, make_state, photon_state
from dualent.rng import PairStream


def dual_ket(state):
    """Diana (first eigenlabel of the routed variable) x Charlie ket of the dual state."""
    d = dual_representation(state)
    ket = np.zeros(4, dtype=complex)
    ket[0 * 2 + 1] += d.alpha  # |A1>_Diana |A2>_Charlie
    ket[1 * 2 + 0] += d.beta  # |A2>_Diana |A1>_Charlie
    return ket


# ---- routing ---------------------------------------------------------------------------


def test_route_photon_state():
    rho = route_pbs(photon_state())
    ket = np.array([0, 1, 1, 0]) / math.sqrt(2)
    np.testing.assert_allclose(rho.matrix, np.outer(ket, ket), atol=1e-15)


def test_route_product_state():
    rho = route_pbs(make_state(1, 0, MOMENTUM, POLARIZATION))
    # |H>_{-k} |V>_k: Diana gets -k, Charlie gets k
    expected = np.kron(np.diag([1, 0]), np.diag([0, 1]))
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-15)


def test_route_partial_entanglement():
    s = make_state(math.sqrt(0.8), math.sqrt(0.2), MOMENTUM, POLARIZATION)
    rho = route_pbs(s)
    assert optimize_chsh(rho).s_max == pytest.approx(smax_pure(0.8), abs=1e-6)
    assert concurrence(s) == pytest.approx(0.8)


@pytest.mark.parametrize("stat", [Statistics.BOSON, Statistics.FERMION])
@pytest.mark.parametrize("alpha,beta", [(0.6, 0.8j), (1, -1), (0.3 - 0.2j, 0.9)])
def test_route_equals_dual_projector(stat, alpha, beta):
    s = make_state(alpha, beta, MOMENTUM, POLARIZATION, stat)
    ket = dual_ket(s)
    np.testing.assert_allclose(route_pbs(s).matrix, np.outer(ket, ket.conj()), atol=1e-15)


def test_route_wrong_shape():
    with pytest.raises(WrongStateShape):
        route_pbs(dual_representation(photon_state()))


# ---- estimation --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "counts,e,se",
    [
        ((0, 500, 500, 0), -1.0, 0.0),
        ((250, 250, 250, 250), 0.0, math.sqrt(1 / 1000)),
        ((400, 100, 100, 400), 0.6, math.sqrt(0.64 / 1000)),
    ],
)
def test_estimate_correlation(counts, e, se):
    got_e, got_se = estimate_correlation(CoincidenceCounts(*counts))
    assert got_e == pytest.approx(e, abs=1e-15)
    assert got_se == pytest.approx(se, abs=1e-15)


def test_estimate_empty():
    with pytest.raises(EmptyCounts):
        estimate_correlation(CoincidenceCounts())


# ---- sampling ---------------------------------------------------------------------------


PSI_PLUS = DensityOperator4.from_ket([0, 1, 1, 0])


def test_sampling_perfect_anticorrelation():
    c = sample_outcomes(PSI_PLUS, Z, Z, 100_000, PairStream(1, 0))
    assert c.n_pp == 0 and c.n_mm == 0
    assert c.n_pm + c.n_mp == 100_000


def test_sampling_mixed_state_binomial():
    n = 1_000_000
    c = sample_outcomes(DensityOperator4.maximally_mixed(), X, Z, n, PairStream(3, 0))
    sigma = math.sqrt(n * 3 / 16)
    for k in c.as_tuple():
        assert abs(k - n / 4) < 5 * sigma


def test_sampling_deterministic_across_workers():
    a, b = MeasurementSetting(0.3, 1.0), MeasurementSetting(2.0, 4.0)
    runs = [sample_outcomes(PSI_PLUS, a, b, 1000, PairStream(99, 2), workers=w) for w in (1, 1, 4, 16)]
    assert all(r == runs[0] for r in runs)


def test_sampling_sharding_invariance(monkeypatch):
    import dualent.experiment as ex

    a, b = MeasurementSetting(0.7, 0.1), MeasurementSetting(1.9, 3.0)
    ref = sample_outcomes(PSI_PLUS, a, b, 10_000, PairStream(5, 1), detector_efficiency=0.7)
    for block in (1, 7, 1000, 4096):
        monkeypatch.setattr(ex, "BLOCK_PAIRS", block)
        assert sample_outcomes(PSI_PLUS, a, b, 10_000, PairStream(5, 1), detector_efficiency=0.7, workers=3) == ref


def test_efficiency_thinning():
    n = 200_000
    eta = 0.8
    c = sample_outcomes(PSI_PLUS, Z, X, n, PairStream(8, 0), detector_efficiency=eta)
    p = eta**2
    assert abs(c.total - n * p) < 5 * math.sqrt(n * p * (1 - p))


def test_born_consistency():
    # |eHat - E| < 4 stdErr in at least 99 of 100 seeded repetitions
    a, b = MeasurementSetting(0.4, 0.2), MeasurementSetting(1.2, 5.0)
    rho = DensityOperator4(np.diag([0.1, 0.4, 0.3, 0.2]) + 0.05 * (np.eye(4, k=1) + np.eye(4, k=-1)))
    target = correlation(rho, a, b)
    hits = 0
    for seed in range(100):
        e, se = estimate_correlation(sample_outcomes(rho, a, b, 1_000_000, PairStream(seed, 0)))
        hits += abs(e - target) < 4 * se
    assert hits >= 99


# ---- full runs ----------------------------------------------------------------------------


def test_maximal_settings_reach_tsirelson():
    assert chsh(route_pbs(photon_state()), maximal_settings()) == pytest.approx(TSIRELSON, abs=1e-12)


def test_run_experiment_violation():
    r = run_experiment(ExperimentConfig(n_pairs_per_setting_pair=1_000_000, seed=42))
    assert abs(r.s_hat - TSIRELSON) < 4 * r.s_std_err
    assert r.s_std_err == pytest.approx(math.sqrt(sum(se**2 for se in r.e_std_err)))
    for (label, counts), e, se in zip(r.counts.items(), r.e_hat, r.e_std_err):
        assert counts.total == 1_000_000
        assert se == pytest.approx(math.sqrt((1 - e * e) / counts.total))


def test_run_experiment_no_overlap_is_classical():
    r = run_experiment(ExperimentConfig(n_pairs_per_setting_pair=200_000, overlap_v=0.0))
    assert r.s_hat <= 2 + 4 * r.s_std_err


def test_run_experiment_bounds_and_counts():
    r = run_experiment(ExperimentConfig(n_pairs_per_setting_pair=500, detector_efficiency=0.5, seed=1))
    assert all(-1 <= e <= 1 for e in r.e_hat)
    assert -4 <= r.s_hat <= 4
    assert all(c.total <= 500 for c in r.counts.values())


def test_run_experiment_deterministic():
    cfg = ExperimentConfig(n_pairs_per_setting_pair=3000, seed=7, overlap_v=0.4, detector_efficiency=0.9)
    assert run_experiment(cfg, workers=1) == run_experiment(cfg, workers=16)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_pairs_per_setting_pair": 0},
        {"n_pairs_per_setting_pair": 2.5},
        {"seed": -1},
        {"overlap_v": 1.5},
        {"detector_efficiency": 0.0},
    ],
)
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_pair_stream_shards_agree():
    s = PairStream(123, 3)
    np.testing.assert_array_equal(s.words(0, 100), np.vstack([s.words(0, 37), s.words(37, 63)]))
