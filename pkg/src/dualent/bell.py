"""Pseudo-spin observables and CHSH tests on two dual subsystems.

The two-party basis is (|-k>, |k>) x (|-k>, |k>) with Diana as the first
tensor factor and Charlie as the second. |-k> is pseudo-spin up, |k> is
pseudo-spin down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidDensity

TSIRELSON = 2.0 * math.sqrt(2.0)
DENSITY_ATOL = 1e-12
PSD_ATOL = 1e-10

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class MeasurementSetting:
    """Direction (theta, phi) of a +/-1 pseudo-spin observable."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {theta}")
        if not 0.0 <= phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {phi}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vector(cls, n) -> MeasurementSetting:
        x, y, z = np.asarray(n, dtype=float) / np.linalg.norm(n)
        theta = math.acos(min(1.0, max(-1.0, z)))
        phi = math.atan2(y, x) % (2 * math.pi)
        if phi >= 2 * math.pi:  # -0.0 % 2pi style rounding
            phi = 0.0
        return cls(theta, phi)

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def negated(self) -> MeasurementSetting:
        """The setting whose observable is minus this one."""
        return MeasurementSetting(math.pi - self.theta, (self.phi + math.pi) % (2 * math.pi))


Z = MeasurementSetting(0.0, 0.0)
X = MeasurementSetting(math.pi / 2, 0.0)


def observable(setting: MeasurementSetting) -> np.ndarray:
    return np.einsum("i,ijk->jk", setting.vector, PAULI)


@dataclass(frozen=True, eq=False)
class DensityOperator4:
    """Validated 4x4 density matrix, Diana (first factor) x Charlie."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidDensity(f"expected a 4x4 matrix, got shape {m.shape}")
        if np.abs(m - m.conj().T).max() > DENSITY_ATOL:
            raise InvalidDensity("matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > DENSITY_ATOL:
            raise InvalidDensity(f"trace is {np.trace(m).real!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -PSD_ATOL:
            raise InvalidDensity("matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, ket) -> DensityOperator4:
        ket = np.asarray(ket, dtype=complex).reshape(4)
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def maximally_mixed(cls) -> DensityOperator4:
        return cls(np.eye(4) / 4)

    def probabilities(self, first: MeasurementSetting, second: MeasurementSetting) -> np.ndarray:
        """Joint outcome probabilities ordered (+,+), (+,-), (-,+), (-,-)."""
        pa = _projectors(first)
        pb = _projectors(second)
        p = np.array([np.trace(self.matrix @ np.kron(pa[i], pb[j])).real for i in (0, 1) for j in (0, 1)])
        p = np.clip(p, 0.0, None)
        return p / p.sum()


def _projectors(setting: MeasurementSetting) -> tuple[np.ndarray, np.ndarray]:
    obs = observable(setting)
    eye = np.eye(2)
    return (eye + obs) / 2, (eye - obs) / 2


def as_density(rho) -> DensityOperator4:
    return rho if isinstance(rho, DensityOperator4) else DensityOperator4(rho)


def correlation(rho, a: MeasurementSetting, b: MeasurementSetting) -> float:
    """E = tr(rho A x B), with ``a`` on the first factor and ``b`` on the second."""
    rho = as_density(rho)
    return float(np.trace(rho.matrix @ np.kron(observable(a), observable(b))).real)


@dataclass(frozen=True)
class ChshSettings:
    """Charlie measures ``a`` or ``a_prime``; Diana measures ``b`` or ``b_prime``."""

    a: MeasurementSetting
    a_prime: MeasurementSetting
    b: MeasurementSetting
    b_prime: MeasurementSetting

    def pairs(self) -> list[tuple[str, MeasurementSetting, MeasurementSetting]]:
        """The four (Charlie, Diana) setting pairs, in CHSH order."""
        return [
            ("ab", self.a, self.b),
            ("ab'", self.a, self.b_prime),
            ("a'b", self.a_prime, self.b),
            ("a'b'", self.a_prime, self.b_prime),
        ]


CHSH_SIGNS = (1, 1, 1, -1)


def party_correlation(rho, charlie: MeasurementSetting, diana: MeasurementSetting) -> float:
    # Diana is the first tensor factor
    return correlation(rho, diana, charlie)


def chsh(rho, s: ChshSettings) -> float:
    rho = as_density(rho)
    return sum(sign * party_correlation(rho, c, d) for sign, (_, c, d) in zip(CHSH_SIGNS, s.pairs()))


def correlation_matrix(rho) -> np.ndarray:
    """T[i, j] = tr(rho sigma_i x sigma_j); rows index Diana, columns Charlie."""
    rho = as_density(rho)
    return np.array([[np.trace(rho.matrix @ np.kron(si, sj)).real for sj in PAULI] for si in PAULI])


def smax_closed_form(rho) -> float:
    """2 sqrt(t1^2 + t2^2) from the two largest singular values of T."""
    sv = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    return 2.0 * math.sqrt(sv[0] ** 2 + sv[1] ** 2)


@dataclass(frozen=True)
class ChshOptimum:
    s_max: float
    settings: ChshSettings


GRID_STEPS = 24
REFINE_XTOL = 1e-8
N_STARTS = 3


def _unit(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _best_diana(t: np.ndarray, c: np.ndarray, c_prime: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    out = []
    for v in (t @ (c + c_prime), t @ (c - c_prime)):
        norm = np.linalg.norm(v)
        out.append(v / norm if norm > 1e-15 else np.array([0.0, 0.0, 1.0]))
    return out[0], out[1]


_THETA, _PHI = np.meshgrid(
    np.linspace(0.0, np.pi, GRID_STEPS), np.linspace(0.0, 2 * np.pi, GRID_STEPS, endpoint=False), indexing="ij"
)
GRID_ANGLES = np.stack([_THETA.ravel(), _PHI.ravel()], axis=-1)
GRID_VECTORS = _unit(GRID_ANGLES[:, 0], GRID_ANGLES[:, 1])


def _charlie_objective(t: np.ndarray):
    def negative_s(x):
        st0, st1 = math.sin(x[0]), math.sin(x[2])
        c = np.array([st0 * math.cos(x[1]), st0 * math.sin(x[1]), math.cos(x[0])])
        cp = np.array([st1 * math.cos(x[3]), st1 * math.sin(x[3]), math.cos(x[2])])
        u, w = t @ (c + cp), t @ (c - cp)
        return -(math.sqrt(u @ u) + math.sqrt(w @ w))

    return negative_s


def optimize_chsh(rho) -> ChshOptimum:
    """Largest CHSH value over all pseudo-spin settings.

    For fixed Charlie directions c, c' the best Diana directions are
    T(c + c') and T(c - c') normalized, giving S = |T(c + c')| + |T(c - c')|.
    That leaves Charlie's four angles, searched on a coarse grid and then
    refined with Nelder-Mead from the best few grid points. The returned
    value is recomputed with :func:`chsh` at the final settings.
    """
    rho = as_density(rho)
    t = correlation_matrix(rho)

    tv = GRID_VECTORS @ t.T
    plus = tv[:, None, :] + tv[None, :, :]
    minus = tv[:, None, :] - tv[None, :, :]
    score = np.sqrt(np.einsum("ijk,ijk->ij", plus, plus)) + np.sqrt(np.einsum("ijk,ijk->ij", minus, minus))
    flat_score = score.ravel()
    top = np.argpartition(flat_score, -N_STARTS)[-N_STARTS:]
    top = top[np.lexsort((top, -flat_score[top]))]

    negative_s = _charlie_objective(t)
    best = None
    for idx in top:
        i, j = np.unravel_index(idx, score.shape)
        x0 = np.concatenate([GRID_ANGLES[i], GRID_ANGLES[j]])
        res = minimize(
            negative_s,
            x0,
            method="Nelder-Mead",
            options={"xatol": REFINE_XTOL, "fatol": 1e-15, "maxiter": 20000, "initial_simplex": _simplex(x0)},
        )
        if best is None or res.fun < best.fun:
            best = res

    c, cp = _unit(best.x[0], best.x[1]), _unit(best.x[2], best.x[3])
    d, dp = _best_diana(t, c, cp)
    settings = ChshSettings(
        MeasurementSetting.from_vector(c),
        MeasurementSetting.from_vector(cp),
        MeasurementSetting.from_vector(d),
        MeasurementSetting.from_vector(dp),
    )
    return ChshOptimum(chsh(rho, settings), settings)


def _simplex(x0: np.ndarray, step: float = np.pi / GRID_STEPS) -> np.ndarray:
    return np.vstack([x0] + [x0 + step * e for e in np.eye(len(x0))])
