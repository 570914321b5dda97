import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualent.errors import InvalidPositions, ModeMismatch, VariableClash, ZeroState
from dualent.fock import (
    MOMENTUM,
    POLARIZATION,
    POSITION,
    SPIN,
    DualPairState,
    FockConfiguration,
    Statistics,
    VariablePair,
    epr_bohm_state,
    exchange_reorder,
    from_words,
    inner_product,
    make_state,
    normal_order,
    pseudo_label_by_entangled,
    pseudo_label_by_label,
    swap_operators,
    to_fock,
    to_pseudo_label,
)

S2 = 1 / math.sqrt(2)
BOTH = [Statistics.BOSON, Statistics.FERMION]


def state(alpha, beta, stat=Statistics.BOSON):
    return make_state(alpha, beta, MOMENTUM, POLARIZATION, stat)


amplitude = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
nonzero_pair = st.tuples(amplitude, amplitude).filter(lambda p: abs(p[0]) + abs(p[1]) > 1e-3)


# ---- independent oracle: creation operators as explicit matrices ----------


def fermion_creators(n_modes=4):
    """Jordan-Wigner creation matrices on the 2^n occupation space."""
    a = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    z = np.diag([1.0, -1.0])
    ops = []
    for k in range(n_modes):
        mats = [z] * k + [a] + [np.eye(2)] * (n_modes - k - 1)
        op = mats[0]
        for m in mats[1:]:
            op = np.kron(op, m)
        ops.append(op)
    return ops


def boson_creators(n_modes=4, cutoff=3):
    a = np.diag(np.sqrt(np.arange(1, cutoff)), -1).astype(complex)
    ops = []
    for k in range(n_modes):
        mats = [np.eye(cutoff)] * k + [a] + [np.eye(cutoff)] * (n_modes - k - 1)
        op = mats[0]
        for m in mats[1:]:
            op = np.kron(op, m)
        ops.append(op)
    return ops


def oracle_vector(words, statistics):
    ops = fermion_creators() if statistics is Statistics.FERMION else boson_creators()
    dim = ops[0].shape[0]
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1
    out = np.zeros(dim, dtype=complex)
    for word, amp in words:
        v = vac
        for m in reversed(word):
            v = ops[m] @ v
        out += amp * v
    return out


def expansion_vector(expansion):
    return oracle_vector([(cfg.word(), amp / _norm_factor(cfg)) for cfg, amp in expansion.terms], expansion.statistics)


def _norm_factor(cfg):
    return math.prod(math.sqrt(math.factorial(n)) for n in cfg.occupations)


# ---- construction ------------------------------------------------------------


def test_epr_bohm_state():
    s = epr_bohm_state()
    assert s.alpha == pytest.approx(S2) and s.beta == pytest.approx(S2)
    assert s.label_var == POSITION and s.entangled_var == SPIN


def test_product_state_allowed():
    s = state(1, 0)
    assert (s.alpha, s.beta) == (1, 0)


def test_normalization_forced():
    s = state(3, 4j)
    assert s.alpha == pytest.approx(0.6, abs=1e-15)
    assert s.beta == pytest.approx(0.8j, abs=1e-15)


def test_zero_state_rejected():
    with pytest.raises(ZeroState):
        state(0, 0)


def test_variable_clash():
    with pytest.raises(VariableClash):
        make_state(1, 1, MOMENTUM, VariablePair("momentum", ("a", "b")))


def test_variable_pair_labels_distinct():
    with pytest.raises(ValueError):
        VariablePair("spin", ("up", "up"))


def test_direct_construction_requires_normalization():
    with pytest.raises(ValueError):
        DualPairState(1, 1, MOMENTUM, POLARIZATION)


@given(nonzero_pair, st.sampled_from(BOTH))
def test_make_state_normalized(pair, stat):
    s = state(*pair, stat)
    assert abs(abs(s.alpha) ** 2 + abs(s.beta) ** 2 - 1) < 1e-12


# ---- Fock form -----------------------------------------------------------------


def test_to_fock_epr():
    exp = to_fock(epr_bohm_state())
    assert len(exp.terms) == 2
    assert exp.amplitude(FockConfiguration((1, 0, 0, 1))) == pytest.approx(S2)
    assert exp.amplitude(FockConfiguration((0, 1, 1, 0))) == pytest.approx(S2)
    assert exp.terms[0][0].as_dict(POSITION, SPIN) == {("1", "up"): 1, ("2", "down"): 1}


def test_to_fock_product():
    exp = to_fock(state(1, 0))
    assert len(exp.terms) == 1
    assert exp.terms[0][1] == 1


@pytest.mark.parametrize("stat", BOTH)
def test_to_fock_matches_operator_oracle_all_orderings(stat):
    s = state(0.3 + 0.4j, -0.5 + 0.1j, stat)
    exp = to_fock(s)
    target = expansion_vector(exp)
    # the state as written: alpha c+_{A1B1} c+_{A2B2} + beta c+_{A1B2} c+_{A2B1}
    as_written = oracle_vector([((0, 3), s.alpha), ((1, 2), s.beta)], stat)
    np.testing.assert_allclose(target, as_written, atol=1e-14)
    # every ordering of each term, carrying the sign of its permutation
    for p_alpha in itertools.permutations((0, 3)):
        for p_beta in itertools.permutations((1, 2)):
            sa = 1 if p_alpha == (0, 3) else stat.sign
            sb = 1 if p_beta == (1, 2) else stat.sign
            v = oracle_vector([(p_alpha, sa * s.alpha), (p_beta, sb * s.beta)], stat)
            np.testing.assert_allclose(v, target, atol=1e-14)


@pytest.mark.parametrize("stat", BOTH)
@pytest.mark.parametrize("word", list(itertools.product(range(4), repeat=2)))
def test_normal_order_matches_oracle(stat, word):
    cfg, factor = normal_order(word, stat)
    direct = oracle_vector([(word, 1.0)], stat)
    canonical = oracle_vector([(cfg.word(), 1.0 / _norm_factor(cfg))], stat)
    np.testing.assert_allclose(direct, factor * canonical, atol=1e-14)


# ---- exchange ------------------------------------------------------------------


@pytest.mark.parametrize("stat", BOTH)
def test_exchange_involution(stat):
    exp = to_fock(state(0.6, 0.8j, stat))
    twice = exchange_reorder(exchange_reorder(exp, (0, 1)), (0, 1))
    assert twice == exp


def test_fermion_swap_sign():
    # c+_{A2,B1} c+_{A1,B2} |0>  ->  - c+_{A1,B2} c+_{A2,B1} |0>
    word, amp = swap_operators((2, 1), 1.0, (0, 1), Statistics.FERMION)
    assert word == (1, 2)
    assert amp == -1


def test_fermion_double_occupancy_vanishes():
    cfg, factor = normal_order((1, 1), Statistics.FERMION)
    assert factor == 0
    with pytest.raises(ZeroState):
        from_words([((1, 1), 1.0)], MOMENTUM, POLARIZATION, Statistics.FERMION)


@pytest.mark.parametrize("positions", [(0, 0), (0, 2), (-1, 1), (1,), "ab"])
def test_invalid_positions(positions):
    with pytest.raises(InvalidPositions):
        exchange_reorder(to_fock(state(1, 1)), positions)


@settings(max_examples=200)
@given(nonzero_pair, st.sampled_from(BOTH))
def test_exchange_preserves_physical_state(pair, stat):
    exp = to_fock(state(*pair, stat))
    swapped = exchange_reorder(exp, (1, 0))
    assert abs(abs(inner_product(exp, swapped)) - 1) < 1e-12
    assert abs(sum(abs(a) ** 2 for _, a in swapped.terms) - 1) < 1e-12


# ---- inner product ---------------------------------------------------------------


def test_inner_product_self():
    exp = to_fock(state(0.2, 0.7 - 0.1j))
    assert inner_product(exp, exp) == pytest.approx(1)


def test_inner_product_orthogonal():
    assert inner_product(to_fock(state(1, 0)), to_fock(state(0, 1))) == 0


def test_inner_product_value():
    v = inner_product(to_fock(state(1, 1)), to_fock(state(0.6, 0.8)))
    assert v == pytest.approx((0.6 + 0.8) / math.sqrt(2), abs=1e-14)
    assert abs(v) == pytest.approx(0.98995, abs=1e-5)


def test_inner_product_mode_mismatch():
    with pytest.raises(ModeMismatch):
        inner_product(to_fock(state(1, 1)), to_fock(epr_bohm_state()))
    with pytest.raises(ModeMismatch):
        inner_product(to_fock(state(1, 1)), to_fock(state(1, 1, Statistics.FERMION)))


# ---- pseudo labels -----------------------------------------------------------------


def test_pseudo_label_epr_hand_expansion():
    vec = to_pseudo_label(epr_bohm_state())
    flat = vec.flat()
    # single particle index = 2*label + entangled; (1,up)=0 (1,down)=1 (2,up)=2 (2,down)=3
    expected = np.zeros(16)
    for i, j in [(0, 3), (3, 0), (1, 2), (2, 1)]:
        expected[4 * i + j] = 0.5
    np.testing.assert_allclose(flat, expected, atol=1e-15)
    assert np.count_nonzero(np.abs(flat) > 1e-15) == 4


@given(nonzero_pair, st.sampled_from(BOTH))
def test_pseudo_label_exchange_symmetry(pair, stat):
    vec = to_pseudo_label(state(*pair, stat))
    assert vec.norm() == pytest.approx(1, abs=1e-12)
    np.testing.assert_array_equal(vec.swap_particles(), stat.sign * vec.amplitudes)


@given(nonzero_pair, st.sampled_from(BOTH))
def test_pseudo_label_regroupings_agree(pair, stat):
    s = state(*pair, stat)
    direct = to_pseudo_label(s).amplitudes
    np.testing.assert_allclose(pseudo_label_by_label(s).amplitudes, direct, rtol=0, atol=1e-14)
    np.testing.assert_allclose(pseudo_label_by_entangled(s).amplitudes, direct, rtol=0, atol=1e-14)
    np.testing.assert_allclose(pseudo_label_by_label(s).amplitudes, pseudo_label_by_entangled(s).amplitudes, atol=1e-14)


def test_pseudo_label_agrees_with_fock():
    # amplitude of |x>_i|y>_j is the Fock amplitude / sqrt(2) for x != y
    s = state(0.6, -0.8j, Statistics.FERMION)
    vec = to_pseudo_label(s).amplitudes
    for cfg, amp in to_fock(s).terms:
        x, y = cfg.word()
        assert vec[x, y] == pytest.approx(amp / math.sqrt(2), abs=1e-15)
