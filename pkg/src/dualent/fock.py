"""Two identical particles over four modes (A_i, B_j).

A mode is a pair ``(label index, entangled index)``. The canonical mode order
is label index major, entangled index minor, so the four modes are numbered

    0: (A1, B1)   1: (A1, B2)   2: (A2, B1)   3: (A2, B2)

Every amplitude in a :class:`FockExpansion` multiplies the normalized Fock
state built by applying creation operators in ascending canonical order to the
vacuum. Fermionic signs are always quoted relative to that order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidPositions, ModeMismatch, VariableClash, ZeroState

ATOL = 1e-12
N_MODES = 4
N_PARTICLES = 2


class Statistics(enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"

    @property
    def sign(self) -> int:
        """Factor picked up when two creation operators trade places."""
        return 1 if self is Statistics.BOSON else -1

    @classmethod
    def parse(cls, text: str | Statistics) -> Statistics:
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown statistics {text!r}; expected 'boson' or 'fermion'") from None


@dataclass(frozen=True)
class VariablePair:
    """A two-valued dynamical variable, e.g. momentum with labels ("-k", "k")."""

    name: str
    eigenlabels: tuple[str, str]

    def __post_init__(self):
        labels = tuple(self.eigenlabels)
        if len(labels) != 2:
            raise ValueError(f"{self.name}: exactly two eigenlabels required, got {labels!r}")
        if labels[0] == labels[1]:
            raise ValueError(f"{self.name}: eigenlabels must be distinct, got {labels!r}")
        object.__setattr__(self, "eigenlabels", labels)

    def index(self, label: str) -> int:
        return self.eigenlabels.index(label)


MOMENTUM = VariablePair("momentum", ("-k", "k"))
POLARIZATION = VariablePair("polarization", ("H", "V"))
SPIN = VariablePair("spin", ("up", "down"))
POSITION = VariablePair("position", ("1", "2"))


def mode_index(label_index: int, entangled_index: int) -> int:
    return 2 * label_index + entangled_index


def mode_pair(index: int) -> tuple[int, int]:
    return divmod(index, 2)


@dataclass(frozen=True)
class DualPairState:
    """alpha |B1>_{A1} |B2>_{A2} + beta |B2>_{A1} |B1>_{A2}.

    ``label_var`` plays the role of A (the which-particle label) and
    ``entangled_var`` the role of B. A state carries exactly one label
    variable; its dual (see :mod:`dualent.dualism`) carries the other.
    Use :func:`make_state` to build one from unnormalized amplitudes.
    """

    alpha: complex
    beta: complex
    label_var: VariablePair
    entangled_var: VariablePair
    statistics: Statistics = Statistics.BOSON

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.label_var.name == self.entangled_var.name:
            raise VariableClash(f"label and entangled variable are both {self.label_var.name!r}")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (|alpha|^2 + |beta|^2 = {norm!r}); use make_state")

    @property
    def amplitudes(self) -> tuple[complex, complex]:
        return self.alpha, self.beta


def make_state(
    alpha: complex,
    beta: complex,
    label_var: VariablePair,
    entangled_var: VariablePair,
    statistics: Statistics | str = Statistics.BOSON,
) -> DualPairState:
    """Build a normalized :class:`DualPairState`.

    Zero amplitudes are accepted individually (the result is then a product
    state); both zero raises :class:`ZeroState`.
    """
    statistics = Statistics.parse(statistics)
    if label_var.name == entangled_var.name:
        raise VariableClash(f"label and entangled variable are both {label_var.name!r}")
    alpha, beta = complex(alpha), complex(beta)
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm == 0.0:
        raise ZeroState("alpha and beta are both zero")
    return DualPairState(alpha / norm, beta / norm, label_var, entangled_var, statistics)


def epr_bohm_state(statistics: Statistics = Statistics.BOSON) -> DualPairState:
    """(|up>_1 |down>_2 + |down>_1 |up>_2) / sqrt(2), positions as labels."""
    s = 1 / math.sqrt(2)
    return make_state(s, s, POSITION, SPIN, statistics)


def photon_state() -> DualPairState:
    """(|H>_{-k} |V>_k + |V>_{-k} |H>_k) / sqrt(2), the photon pair of the Bell test."""
    s = 1 / math.sqrt(2)
    return make_state(s, s, MOMENTUM, POLARIZATION, Statistics.BOSON)


@dataclass(frozen=True)
class FockConfiguration:
    """Occupation numbers of the four modes in canonical order."""

    occupations: tuple[int, int, int, int]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if len(occ) != N_MODES or any(n < 0 for n in occ):
            raise ValueError(f"need four non-negative occupations, got {occ!r}")
        if sum(occ) != N_PARTICLES:
            raise ValueError(f"total particle number must be {N_PARTICLES}, got {sum(occ)}")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def from_modes(cls, modes: Iterable[int]) -> FockConfiguration:
        occ = [0] * N_MODES
        for m in modes:
            occ[m] += 1
        return cls(tuple(occ))

    def word(self) -> tuple[int, ...]:
        """Mode indices of the creation operators, in canonical order."""
        return tuple(m for m, n in enumerate(self.occupations) for _ in range(n))

    def as_dict(self, label_var: VariablePair, entangled_var: VariablePair) -> dict[tuple[str, str], int]:
        out = {}
        for m, n in enumerate(self.occupations):
            if n:
                a, b = mode_pair(m)
                out[(label_var.eigenlabels[a], entangled_var.eigenlabels[b])] = n
        return out


def normal_order(word: Sequence[int], statistics: Statistics) -> tuple[FockConfiguration, float]:
    """Rewrite ``c+_{w0} c+_{w1} ... |0>`` as ``factor * |config>``.

    The factor collects one exchange sign per transposition needed to sort the
    word, and sqrt(n!) per bosonic mode occupied n times. A fermionic word
    that repeats a mode gives factor 0.
    """
    word = list(word)
    for m in word:
        if not 0 <= m < N_MODES:
            raise ValueError(f"mode index {m} out of range")
    config = FockConfiguration.from_modes(word)
    if statistics is Statistics.FERMION and max(config.occupations) > 1:
        return config, 0.0
    swaps = 0
    # insertion sort; equal modes are never swapped
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1] > word[j]:
            word[j - 1], word[j] = word[j], word[j - 1]
            swaps += 1
            j -= 1
    factor = float(statistics.sign**swaps)
    for n in config.occupations:
        factor *= math.sqrt(math.factorial(n))
    return config, factor


def swap_operators(
    word: Sequence[int], amplitude: complex, positions: tuple[int, int], statistics: Statistics
) -> tuple[tuple[int, ...], complex]:
    """Exchange two creation operators in a product, keeping the state fixed.

    ``amplitude * c+_x c+_y |0>`` becomes ``(sign * amplitude) * c+_y c+_x |0>``.
    """
    i, j = _check_positions(positions, len(word))
    swapped = list(word)
    swapped[i], swapped[j] = swapped[j], swapped[i]
    return tuple(swapped), statistics.sign * complex(amplitude)


def _check_positions(positions, length: int) -> tuple[int, int]:
    try:
        i, j = positions
        i, j = int(i), int(j)
    except (TypeError, ValueError):
        raise InvalidPositions(f"expected a pair of operator positions, got {positions!r}") from None
    if i == j or not (0 <= i < length and 0 <= j < length):
        raise InvalidPositions(f"positions {positions!r} do not address two of {length} operators")
    return i, j


@dataclass(frozen=True)
class FockExpansion:
    """Normalized superposition of two-particle Fock configurations."""

    terms: tuple[tuple[FockConfiguration, complex], ...]
    label_var: VariablePair
    entangled_var: VariablePair
    statistics: Statistics

    def __post_init__(self):
        terms = tuple((cfg, complex(amp)) for cfg, amp in self.terms)
        configs = [cfg for cfg, _ in terms]
        if len(set(configs)) != len(configs):
            raise ValueError("duplicate configurations in expansion")
        if self.statistics is Statistics.FERMION and any(max(c.occupations) > 1 for c in configs):
            raise ValueError("fermionic configuration with a doubly occupied mode")
        norm = sum(abs(a) ** 2 for _, a in terms)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"expansion is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "terms", terms)

    def amplitude(self, config: FockConfiguration) -> complex:
        for cfg, amp in self.terms:
            if cfg == config:
                return amp
        return 0j

    def words(self) -> list[tuple[tuple[int, ...], complex]]:
        return [(cfg.word(), amp) for cfg, amp in self.terms]

    def same_modes(self, other: FockExpansion) -> bool:
        return (
            self.label_var == other.label_var
            and self.entangled_var == other.entangled_var
            and self.statistics is other.statistics
        )


def from_words(
    words: Iterable[tuple[Sequence[int], complex]],
    label_var: VariablePair,
    entangled_var: VariablePair,
    statistics: Statistics,
) -> FockExpansion:
    """Sum operator words into a canonical :class:`FockExpansion`.

    Words are normal ordered and merged; vanishing terms are dropped. Raises
    :class:`ZeroState` if nothing survives.
    """
    acc: dict[FockConfiguration, complex] = {}
    for word, amp in words:
        cfg, factor = normal_order(word, statistics)
        acc[cfg] = acc.get(cfg, 0j) + factor * complex(amp)
    terms = tuple(sorted(((c, a) for c, a in acc.items() if a != 0), key=lambda t: t[0].word()))
    if not terms:
        raise ZeroState("all terms vanish")
    return FockExpansion(terms, label_var, entangled_var, statistics)


def to_fock(state: DualPairState) -> FockExpansion:
    """(alpha c+_{A1,B1} c+_{A2,B2} + beta c+_{A1,B2} c+_{A2,B1}) |0>."""
    words = []
    if state.alpha != 0:
        words.append(((mode_index(0, 0), mode_index(1, 1)), state.alpha))
    if state.beta != 0:
        words.append(((mode_index(0, 1), mode_index(1, 0)), state.beta))
    return from_words(words, state.label_var, state.entangled_var, state.statistics)


def exchange_reorder(expansion: FockExpansion, positions: tuple[int, int] = (0, 1)) -> FockExpansion:
    """Swap two creation operators in every term and re-express canonically.

    The physical state is unchanged: the swap contributes the exchange sign
    and restoring canonical order contributes it again.
    """
    _check_positions(positions, N_PARTICLES)
    swapped = [swap_operators(w, a, positions, expansion.statistics) for w, a in expansion.words()]
    return from_words(swapped, expansion.label_var, expansion.entangled_var, expansion.statistics)


def inner_product(a: FockExpansion, b: FockExpansion) -> complex:
    """<a|b> over a common mode set."""
    if not a.same_modes(b):
        raise ModeMismatch("expansions are defined over different modes or statistics")
    return sum((amp.conjugate() * b.amplitude(cfg) for cfg, amp in a.terms), 0j)


@dataclass(frozen=True, eq=False)
class PseudoLabelVector:
    """First-quantized two-particle vector with pseudo labels i, j.

    ``amplitudes`` has shape (4, 4): the first axis is particle i's single
    particle state and the second is particle j's. Each single particle index
    is ``2 * label index + entangled index``.
    """

    amplitudes: np.ndarray
    statistics: Statistics = field(default=Statistics.BOSON)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(4, 4)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(16)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def swap_particles(self) -> np.ndarray:
        return self.amplitudes.T

    def label_entangled_matrix(self) -> np.ndarray:
        """Reshape to rows (a_i, a_j) and columns (b_i, b_j)."""
        t = self.amplitudes.reshape(2, 2, 2, 2)  # a_i, b_i, a_j, b_j
        return t.transpose(0, 2, 1, 3).reshape(4, 4)

    def is_product(self, tol: float = 1e-10) -> bool:
        """True if the vector factorizes into a label part times an entangled part."""
        sv = np.linalg.svd(self.label_entangled_matrix(), compute_uv=False)
        return bool(sv[1] < tol)


_E2 = np.eye(2)


def _grouped_to_pseudo(t: np.ndarray, statistics: Statistics) -> PseudoLabelVector:
    # t axes: a_i, a_j, b_i, b_j
    return PseudoLabelVector(t.transpose(0, 2, 1, 3).reshape(4, 4), statistics)


def to_pseudo_label(state: DualPairState) -> PseudoLabelVector:
    """(Anti)symmetrized first-quantized form, built term by term."""
    s = state.statistics.sign
    e4 = np.eye(4)
    a1b1, a1b2, a2b1, a2b2 = (e4[mode_index(*m)] for m in ((0, 0), (0, 1), (1, 0), (1, 1)))
    vec = state.alpha * (np.kron(a1b1, a2b2) + s * np.kron(a2b2, a1b1)) + state.beta * (
        np.kron(a1b2, a2b1) + s * np.kron(a2b1, a1b2)
    )
    return PseudoLabelVector(vec / math.sqrt(2), state.statistics)


def pseudo_label_by_label(state: DualPairState) -> PseudoLabelVector:
    """Same vector, grouped by the label variable's values of particles i, j."""
    s = state.statistics.sign
    A1, A2 = _E2
    B1, B2 = _E2
    al, be = state.alpha, state.beta
    t = np.einsum("a,b,cd->abcd", A1, A2, al * np.outer(B1, B2) + be * np.outer(B2, B1)) + s * np.einsum(
        "a,b,cd->abcd", A2, A1, al * np.outer(B2, B1) + be * np.outer(B1, B2)
    )
    return _grouped_to_pseudo(t / math.sqrt(2), state.statistics)


def pseudo_label_by_entangled(state: DualPairState) -> PseudoLabelVector:
    """Same vector, grouped by the entangled variable's values of particles i, j."""
    s = state.statistics.sign
    A1, A2 = _E2
    B1, B2 = _E2
    al, be = state.alpha, state.beta
    # the second group carries the exchange sign as a whole
    t = np.einsum("ab,c,d->abcd", al * np.outer(A1, A2) + s * be * np.outer(A2, A1), B1, B2) + s * np.einsum(
        "ab,c,d->abcd", al * np.outer(A2, A1) + s * be * np.outer(A1, A2), B2, B1
    )
    return _grouped_to_pseudo(t / math.sqrt(2), state.statistics)
