"""Dual representation of two-identical-particle entangled states.

Rewriting a state with the entangled variable as the identity label turns

    alpha |B1>_{A1} |B2>_{A2} + beta |B2>_{A1} |B1>_{A2}

into ``alpha |A1>_{B1} |A2>_{B2} +/- beta |A2>_{B1} |A1>_{B2}`` (+ for bosons,
- for fermions). Only one of the two variables can serve as the label at a
time, so a :class:`~dualent.fock.DualPairState` always names exactly one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroState
from .fock import (
    DualPairState,
    FockExpansion,
    Statistics,
    VariablePair,
    from_words,
    make_state,
    mode_index,
    mode_pair,
    pseudo_label_by_label,
)

FACTORIZABLE_TOL = 1e-9


@dataclass(frozen=True)
class DualityReport:
    original: DualPairState
    dual: DualPairState
    concurrence_original: float
    concurrence_dual: float
    factorizable: bool


def dual_representation(state: DualPairState) -> DualPairState:
    """Swap the roles of label and entangled variable."""
    return DualPairState(
        state.alpha,
        state.statistics.sign * state.beta,
        state.entangled_var,
        state.label_var,
        state.statistics,
    )


def fock_in_dual_modes(expansion: FockExpansion) -> FockExpansion:
    """Re-express an expansion with the variables' roles exchanged.

    Mode (A_a, B_b) becomes mode (B_b, A_a). Because the canonical order is
    label-major, renaming the modes can permute the operators of a term, which
    costs the exchange sign. This is an independent route to the dual state.
    """
    words = []
    for word, amp in expansion.words():
        renamed = []
        for m in word:
            a, b = mode_pair(m)
            renamed.append(mode_index(b, a))
        words.append((renamed, amp))
    return from_words(words, expansion.entangled_var, expansion.label_var, expansion.statistics)


def concurrence(state: DualPairState) -> float:
    """Concurrence 2|alpha||beta| of the labeled two-party state."""
    return 2.0 * abs(state.alpha) * abs(state.beta)


def dualism_magnitude_check(state: DualPairState, tol: float = FACTORIZABLE_TOL) -> DualityReport:
    dual = dual_representation(state)
    return DualityReport(
        original=state,
        dual=dual,
        concurrence_original=concurrence(state),
        concurrence_dual=concurrence(dual),
        factorizable=is_factorizable(state, tol),
    )


def is_factorizable(state: DualPairState, tol: float = FACTORIZABLE_TOL) -> bool:
    """True when alpha = +/- beta, i.e. the state splits into label and entangled parts.

    Amplitudes are first rotated so that alpha is real and non-negative; a
    global phase therefore never changes the answer.
    """
    alpha, beta = state.alpha, state.beta
    if alpha != 0:
        phase = cmath.exp(-1j * cmath.phase(alpha))
        alpha, beta = alpha * phase, beta * phase
    return abs(alpha - beta) < tol or abs(alpha + beta) < tol


def pseudo_label_rank_one(state: DualPairState, tol: float = 1e-10) -> bool:
    """Rank-1 test of the pseudo-label vector across the label/entangled split."""
    return pseudo_label_by_label(state).is_product(tol)


def manifest_repair(
    alpha_same: complex,
    beta_same: complex,
    label_var: VariablePair,
    entangled_var: VariablePair,
    statistics: Statistics | str = Statistics.BOSON,
) -> DualPairState:
    """Turn alpha |B1>_{A1}|B1>_{A2} + beta |B2>_{A1}|B2>_{A2} into a manifest state.

    Applies the local flip B1 <-> B2 to the particle labeled A2 and returns the
    result in the standard (alpha, beta) form.
    """
    if alpha_same == 0 and beta_same == 0:
        raise ZeroState("alpha and beta are both zero")
    # rows: B value at A1, columns: B value at A2
    amps = np.diag([complex(alpha_same), complex(beta_same)])
    flip = np.array([[0, 1], [1, 0]])
    repaired = amps @ flip
    assert repaired[0, 0] == 0 and repaired[1, 1] == 0
    return make_state(repaired[0, 1], repaired[1, 0], label_var, entangled_var, statistics)


def same_ray(a: DualPairState, b: DualPairState, atol: float = 1e-12) -> bool:
    """Equality up to a global phase, with matching variables and statistics."""
    if (a.label_var, a.entangled_var, a.statistics) != (b.label_var, b.entangled_var, b.statistics):
        return False
    overlap = a.alpha.conjugate() * b.alpha + a.beta.conjugate() * b.beta
    return abs(abs(overlap) - 1.0) < atol


def smax_pure(concurrence_value: float) -> float:
    """Largest CHSH value of a pure two-qubit state with the given concurrence."""
    return 2.0 * math.sqrt(1.0 + concurrence_value**2)
