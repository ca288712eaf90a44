"""Oscillations between a positive- and a negative-norm state.

Two-state system: energy eigenstates ``|E+>`` (norm +1) and ``|E->`` (norm
-1), flavour states ``|A+> = cosh(theta)|E+> + sinh(theta)|E->`` and
``|A-> = sinh(theta)|E+> + cosh(theta)|E->``. Starting from ``|A->``,
``P+(t)`` is the rate of finding ``|A+>``.

The neutrino part covers three active flavours plus one negative-norm
sterile state ("3-1"), compared with the ordinary "3+1" scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_NULL_TOL, IndefiniteMetric, KreinOperator, evolve, observable_probabilities

__all__ = [
    "OSCILLATION_PHASE_CONSTANT",
    "FLAVOURS",
    "TwoStateParams",
    "SterileParams",
    "TimeAverage",
    "Contour",
    "p_plus",
    "p_minus",
    "p_plus_max",
    "time_average_p_plus",
    "s_factor",
    "prob_3m1",
    "prob_3p1",
    "two_state_system",
    "evolve_oracle",
    "active_sterile_probability",
    "contour_scan",
]

# sin^2(dm2 L / 4E) = sin^2(1.267 * dm2[eV^2] * L[km] / E[GeV])
OSCILLATION_PHASE_CONSTANT = 1.267

FLAVOURS = ("e", "mu", "tau")


@dataclass(frozen=True)
class TwoStateParams:
    theta: float
    e_plus: float = 1.0
    e_minus: float = 0.0

    @property
    def delta_e(self) -> float:
        return self.e_plus - self.e_minus


@dataclass(frozen=True)
class SterileParams:
    """Boost angles of the three active flavours towards the sterile state."""

    theta_es: float = 0.0
    theta_mus: float = 0.0
    theta_taus: float = 0.0
    dm2: float = 1.0
    L_over_E: float = 1.0

    def angle(self, flavour: str) -> float:
        try:
            return {"e": self.theta_es, "mu": self.theta_mus, "tau": self.theta_taus}[flavour]
        except KeyError:
            raise ValueError(f"unknown flavour {flavour!r}; expected one of {FLAVOURS}") from None

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.theta_es, self.theta_mus, self.theta_taus], dtype=float)

    @property
    def S(self) -> float:
        return s_factor(self.dm2, self.L_over_E)


def p_plus(params: TwoStateParams, t):
    """``sin^2(dE t/2) / (coth^2(2 theta) - cos(dE t))``.

    Evaluated as ``tanh^2 sin^2 / (1 - tanh^2 cos)``, which is finite at
    ``theta = 0`` (no mixing, ``P+ = 0``).
    """
    x = params.delta_e * np.asarray(t, dtype=float)
    th2 = np.tanh(2.0 * params.theta) ** 2
    out = th2 * np.sin(0.5 * x) ** 2 / (1.0 - th2 * np.cos(x))
    return float(out) if np.ndim(out) == 0 else out


def p_minus(params: TwoStateParams, t):
    """``1 - P+``; never below one half."""
    out = 1.0 - np.asarray(p_plus(params, t))
    return float(out) if np.ndim(out) == 0 else out


def p_plus_max(theta: float) -> float:
    """Maximum over time, reached at ``dE t = pi``: ``1 / (coth^2(2 theta) + 1)``."""
    th2 = np.tanh(2.0 * theta) ** 2
    return float(th2 / (1.0 + th2))


@dataclass(frozen=True)
class TimeAverage:
    """Period average of ``P+`` and the two candidate closed forms.

    ``closed_form`` is ``(1 - cosh(4 theta)^-1/2) / 2``; ``literal`` is
    ``1 / [2 (1 - cosh(4 theta)^-1/2)]``. ``numerical`` is the ground truth.
    """

    theta: float
    closed_form: float
    numerical: float
    literal: float

    def matches(self, tol: float = 1e-6) -> dict[str, bool]:
        return {
            "closed_form": abs(self.numerical - self.closed_form) <= tol,
            "literal": bool(np.isfinite(self.literal)) and abs(self.numerical - self.literal) <= tol,
        }


def time_average_p_plus(theta: float, n_points: int = 10_000) -> TimeAverage:
    params = TwoStateParams(theta, 1.0, 0.0)
    x = 2.0 * np.pi * np.arange(n_points) / n_points
    numerical = float(np.mean(p_plus(params, x)))
    r = np.cosh(4.0 * theta) ** -0.5
    closed = 0.5 * (1.0 - r)
    literal = np.inf if r == 1.0 else 1.0 / (2.0 * (1.0 - r))
    return TimeAverage(theta, float(closed), numerical, float(literal))


def s_factor(dm2, L_over_E):
    """Oscillation factor ``sin^2(1.267 dm2 L/E)``; dm2 in eV^2, L/E in km/GeV."""
    dm2 = np.asarray(dm2, dtype=float)
    loe = np.asarray(L_over_E, dtype=float)
    if np.any(dm2 < 0) or np.any(loe < 0):
        raise ValueError("dm2 and L/E must be non-negative")
    out = np.sin(OSCILLATION_PHASE_CONSTANT * dm2 * loe) ** 2
    return float(out) if np.ndim(out) == 0 else out


def _channel(channel) -> tuple[str, str]:
    src, dst = channel
    for f in (src, dst):
        if f not in FLAVOURS:
            raise ValueError(f"unknown flavour {f!r}; expected one of {FLAVOURS}")
    return src, dst


def prob_3m1(channel, S, params: SterileParams):
    """Active-flavour probability with one negative-norm sterile neutrino.

    ``channel = (source, detected)``. The denominator carries the source
    flavour's angle, so ``P(mu -> e) != P(e -> mu)`` in general.
    """
    src, dst = _channel(channel)
    S = np.asarray(S, dtype=float)
    if np.any(S < 0) or np.any(S > 1):
        raise ValueError("S must lie in [0, 1]")
    sa = np.sinh(params.angle(src))
    cosh_sum = np.sum(np.cosh(2.0 * params.angles))
    denom = 1.0 - 4.0 * S * sa**2 * (1.0 - cosh_sum)
    if src == dst:
        out = (1.0 + S * np.sinh(2.0 * params.angle(src)) ** 2) / denom
    else:
        sb = np.sinh(params.angle(dst))
        out = 4.0 * S * sa**2 * sb**2 / denom
    return float(out) if np.ndim(out) == 0 else out


def prob_3p1(channel, S, params: SterileParams):
    """Ordinary 3+1 probability with ``|U_l4| = sin(theta_ls)``."""
    src, dst = _channel(channel)
    S = np.asarray(S, dtype=float)
    ua = np.sin(params.angle(src)) ** 2
    if src == dst:
        out = 1.0 - 4.0 * ua * (1.0 - ua) * S
    else:
        out = 4.0 * ua * np.sin(params.angle(dst)) ** 2 * S
    return float(out) if np.ndim(out) == 0 else out


def two_state_system(params: TwoStateParams):
    """Hamiltonian, flavour observable and initial state ``|A->``.

    Components are along ``|E+>, |E->`` with metric diag(1, -1). The flavour
    observable has eigenvalue +1 on ``|A+>`` and -1 on ``|A->``.
    """
    metric = IndefiniteMetric.from_signs([1, -1])
    H = KreinOperator(np.diag([params.e_plus, params.e_minus]), metric)
    ch, sh = np.cosh(params.theta), np.sinh(params.theta)
    vecs = np.array([[ch, sh], [sh, ch]])  # columns |A+>, |A->
    A = KreinOperator(vecs @ np.diag([1.0, -1.0]) @ np.linalg.inv(vecs), metric)
    return H, A, vecs[:, 1].astype(complex)


def evolve_oracle(params: TwoStateParams, t: float, null_tol: float = DEFAULT_NULL_TOL) -> tuple[float, float]:
    """``(P+, P-)`` by explicit evolution and ghost-norm probabilities."""
    H, A, psi0 = two_state_system(params)
    psi = evolve(H, t, psi0)
    probs = observable_probabilities(A, psi, null_tol)
    plus = sum(p for val, p in probs if val > 0)
    return plus, sum(p for val, p in probs if val < 0)


def active_sterile_probability(model: str, dm2, theta, L_over_E: float):
    """Two-state active-to-sterile probability on a (dm2, theta) mesh.

    ``3m1`` uses the negative-norm formula with phase ``dE t = dm2 L / 2E``;
    ``3p1`` is the ordinary ``sin^2(2 theta) S``.
    """
    dm2 = np.asarray(dm2, dtype=float)
    theta = np.asarray(theta, dtype=float)
    S = s_factor(dm2, L_over_E)
    if model == "3p1":
        return np.sin(2.0 * theta) ** 2 * S
    if model == "3m1":
        th2 = np.tanh(2.0 * theta) ** 2
        return th2 * S / (1.0 - th2 * (1.0 - 2.0 * S))
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True, eq=False)
class Contour:
    """Grid cells where a probability crosses ``level``.

    ``cells`` holds cell-centre ``(dm2, theta)`` pairs; ``indices`` the lower
    corner indices into the two grids.
    """

    level: float
    model: str
    cells: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return len(self.cells)


def _check_grid(name, grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError(f"{name} grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    return grid


def _channel_probability(channel, model, D, T, L_over_E):
    if channel == "as":
        return active_sterile_probability(model, D, T, L_over_E)
    src, dst = _channel(channel)
    out = np.empty_like(D)
    S = s_factor(D, L_over_E)
    fn = prob_3m1 if model == "3m1" else prob_3p1
    for idx in np.ndindex(D.shape):
        angles = {f: (T[idx] if f in (src, dst) else 0.0) for f in FLAVOURS}
        params = SterileParams(angles["e"], angles["mu"], angles["tau"], D[idx], L_over_E)
        p = fn((src, dst), S[idx], params)
        out[idx] = 1.0 - p if src == dst else p
    return out


def contour_scan(
    channel,
    probability_levels,
    dm2_grid,
    theta_grid,
    L_over_E: float = 1.0,
    models=("3m1", "3p1"),
) -> list[Contour]:
    """Level crossings of a probability over a ``(dm2, theta)`` grid.

    ``channel`` is ``"as"`` (two-state active to sterile) or a flavour pair;
    for disappearance channels the contoured quantity is ``1 - P``. Flavour
    pairs put the scanned angle on both flavours and zero elsewhere.
    """
    dm2 = _check_grid("dm2", dm2_grid)
    theta = _check_grid("theta", theta_grid)
    D, T = np.meshgrid(dm2, theta, indexing="ij")
    out = []
    for model in models:
        P = _channel_probability(channel, model, D, T, L_over_E)
        for level in probability_levels:
            above = P >= level
            if above.shape[0] < 2 or above.shape[1] < 2:
                hit = np.zeros((0, 0), dtype=bool)
            else:
                corners = np.stack([above[:-1, :-1], above[1:, :-1], above[:-1, 1:], above[1:, 1:]])
                hit = corners.any(axis=0) & ~corners.all(axis=0)
            idx = np.argwhere(hit)
            cells = np.column_stack(
                [0.5 * (dm2[idx[:, 0]] + dm2[idx[:, 0] + 1]), 0.5 * (theta[idx[:, 1]] + theta[idx[:, 1] + 1])]
            ) if len(idx) else np.zeros((0, 2))
            out.append(Contour(float(level), model, cells, idx))
    return out
