"""Polarizing-beam-splitter routing of a photon pair to Diana and Charlie."""

from __future__ import annotations

import numpy as np

from .bell import DensityOperator4
from .errors import WrongStateShape
from .fock import DualPairState, mode_pair, normal_order, to_fock

# the routed variable's first eigenvalue (H) goes to Diana, the second (V) to Charlie
DIANA, CHARLIE = 0, 1


def routed_ket(state: DualPairState, routed: str = "polarization") -> np.ndarray:
    """Two-party ket over the label variable's values, Diana first.

    Built from the Fock expansion: each term puts one particle in a mode with
    the routed value sent to Diana and one in a mode sent to Charlie. The term
    is reordered so Diana's creation operator comes first, which costs the
    exchange sign for fermions.
    """
    if state.entangled_var.name != routed:
        raise WrongStateShape(
            f"beam splitter routes on {routed!r} but the state's entangled variable is {state.entangled_var.name!r}"
        )
    ket = np.zeros(4, dtype=complex)
    for word, amp in to_fock(state).words():
        sides = [mode_pair(m)[1] for m in word]
        if sorted(sides) != [DIANA, CHARLIE]:
            raise WrongStateShape("a pair term does not send one particle to each party")
        ordered = list(word) if sides[0] == DIANA else list(reversed(word))
        # distinct modes: factor is the exchange sign of the reordering (its own inverse)
        _, factor = normal_order(ordered, state.statistics)
        diana_label, _ = mode_pair(ordered[0])
        charlie_label, _ = mode_pair(ordered[1])
        ket[2 * diana_label + charlie_label] += amp * factor
    return ket


def route_pbs(state: DualPairState, routed: str = "polarization") -> DensityOperator4:
    """Pure joint state of the label variable held by Diana and Charlie."""
    return DensityOperator4.from_ket(routed_ket(state, routed))
