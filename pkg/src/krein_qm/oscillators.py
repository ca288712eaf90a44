"""Ghost oscillators: ladder algebra, lattice spectra, Pais-Uhlenbeck.

The 2-derivative ghost oscillator ``H = -(q^2 + p^2)/2 + V(q)`` lives on a
1-D grid in the Dirac-Pauli representation (``q = -ix``, ``p = d/dx``,
metric = reflection). The 4-derivative Pais-Uhlenbeck oscillator lives on a
2-D tensor grid with Ostrogradski coordinates ``(q1, q2) = (q, dq/dt)``.

Notes
-----
Sector 1 of the Pais-Uhlenbeck lattice is discretised in its momentum
``p1``: with ``H`` linear in ``p1`` a position lattice for ``q1`` produces
fermion-doubler copies of every level, while ``p1 = diag(k)`` does not.
That is still a Schroedinger (positive-metric) representation.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import factorial

import numpy as np
import scipy.linalg as sl
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .core import (
    DEFAULT_NULL_TOL,
    DEFAULT_SELF_ADJOINT_TOL,
    ClassificationError,
    ConvergenceError,
    IndefiniteMetric,
    KreinOperator,
    NullNormError,
    NotSelfAdjointError,
    SpectralClassification,
    classify_eigenpairs,
    is_self_adjoint,
)

__all__ = [
    "LadderTruncation",
    "ladder_truncation",
    "ghost_from_evolution",
    "parity_anticommutator",
    "Grid1D",
    "Representation",
    "central_stencil",
    "fd_matrix",
    "build_operators",
    "PotentialSpec",
    "ghost_oscillator_hamiltonian",
    "ghost_oscillator_spectrum",
    "PaisUhlenbeckSpec",
    "pu_hamiltonian",
    "pu_spectrum",
    "ScanPoint",
    "pu_spectrum_scan",
    "pu_free_levels",
    "boundary_mass",
    "ModeDecomposition",
    "mode_decomposition",
    "propagator_identity",
    "ToyShift",
    "toy_second_order",
    "q_squared_expectation",
]


# ---------------------------------------------------------------------------
# ladder algebra


@dataclass(frozen=True, eq=False)
class LadderTruncation:
    """First ``K`` levels of the ghost oscillator, ``[a, a^dagger] = -1``.

    ``a`` and ``a_dagger`` are adjoint under ``metric = diag((-1)^k)``. ``H``
    is built from ``K + 1`` levels and then truncated so the top level is exact.
    """

    K: int
    a: np.ndarray
    a_dagger: np.ndarray
    H: np.ndarray
    metric: IndefiniteMetric

    @property
    def q(self) -> np.ndarray:
        return (self.a + self.a_dagger) / np.sqrt(2.0)

    @property
    def p(self) -> np.ndarray:
        return -1j * (self.a - self.a_dagger) / np.sqrt(2.0)

    def commutator_residual(self) -> float:
        """``max |[a, a^dagger] + 1|`` on the block that excludes the top row."""
        c = self.a @ self.a_dagger - self.a_dagger @ self.a
        block = c[: self.K - 1, : self.K - 1] + np.eye(self.K - 1)
        return float(np.max(np.abs(block)))


def _ladder(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, n)
    a = np.diag(-np.sqrt(k), 1).astype(complex)  # a|k> = -sqrt(k)|k-1>
    adag = np.diag(np.sqrt(k), -1).astype(complex)  # a^dag|k> = sqrt(k+1)|k+1>
    return a, adag


def ladder_truncation(K: int) -> LadderTruncation:
    if K < 2:
        raise ValueError("K must be at least 2")
    a_full, adag_full = _ladder(K + 1)
    H = (-0.5 * (a_full @ adag_full + adag_full @ a_full))[:K, :K]
    a, adag = a_full[:K, :K], adag_full[:K, :K]
    metric = IndefiniteMetric.from_signs((-1) ** np.arange(K))
    return LadderTruncation(K, a, adag, H, metric)


def ghost_from_evolution(trunc: LadderTruncation) -> float:
    """Max-entry distance between ``diag((-1)^k)`` and ``i exp(-i pi H)``."""
    G = 1j * sl.expm(-1j * np.pi * trunc.H)
    return float(np.max(np.abs(G - trunc.metric.dense())))


def parity_anticommutator(trunc: LadderTruncation) -> float:
    """``max |{G_H, q}|`` with ``G_H = i exp(-i pi H)``."""
    G = 1j * sl.expm(-1j * np.pi * trunc.H)
    q = trunc.q
    return float(np.max(np.abs(G @ q + q @ G)))


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError("a grid needs at least 3 points")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @classmethod
    def symmetric(cls, x_max: float, n_points: int) -> "Grid1D":
        return cls(-float(x_max), float(x_max), int(n_points))

    @property
    def x(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n_points)
        if self.is_symmetric:
            # exact mirror symmetry, exact zero in the middle
            half = x[self.n_points // 2 + 1:]
            x = np.concatenate([-half[::-1], [0.0], half])
        return x

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def is_symmetric(self) -> bool:
        return self.x_min == -self.x_max and self.n_points % 2 == 1

    def refined(self) -> "Grid1D":
        """Convergence-check grid: twice the points, 1.5 times the box."""
        return Grid1D(1.5 * self.x_min, 1.5 * self.x_max, 2 * self.n_points - 1)


class Representation(enum.Enum):
    SCHROEDINGER = "schroedinger"
    DIRAC_PAULI = "dirac-pauli"


@lru_cache(maxsize=None)
def _stencil(deriv: int, order: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    half = (deriv + 1) // 2 + order // 2 - 1 if deriv > 0 else 0
    offsets = np.arange(-half, half + 1)
    V = np.vander(offsets, increasing=True).T.astype(float)
    rhs = np.zeros(len(offsets))
    rhs[deriv] = factorial(deriv)
    coef = np.linalg.solve(V, rhs)
    coef[np.abs(coef) < 1e-13] = 0.0
    return tuple(int(o) for o in offsets), tuple(float(c) for c in coef)


def central_stencil(deriv: int, order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the central difference for ``d^deriv/dx^deriv``.

    ``order`` is the (even) accuracy order.
    """
    if deriv < 1 or order < 2 or order % 2:
        raise ValueError("need deriv >= 1 and an even order >= 2")
    o, c = _stencil(deriv, order)
    return np.array(o), np.array(c)


def fd_matrix(n: int, h: float, deriv: int, order: int = 4) -> sp.csr_matrix:
    """Central-difference matrix with Dirichlet boundaries (zero outside)."""
    offsets, coef = central_stencil(deriv, order)
    diags = [np.full(n - abs(o), c) for o, c in zip(offsets, coef) if c != 0.0 and abs(o) < n]
    offs = [o for o, c in zip(offsets, coef) if c != 0.0 and abs(o) < n]
    return sp.diags(diags, offs, shape=(n, n), format="csr", dtype=complex) / h**deriv


def _require_symmetric(grid: Grid1D):
    if not grid.is_symmetric:
        raise ValueError("grid must be symmetric about 0 with an odd number of points")


def _metric_for(grid: Grid1D, rep: Representation, sparse: bool = True) -> IndefiniteMetric:
    if rep is Representation.SCHROEDINGER:
        if sparse:
            return IndefiniteMetric(sp.identity(grid.n_points, dtype=complex, format="csr"))
        return IndefiniteMetric.identity(grid.n_points)
    return IndefiniteMetric.reflection(grid.n_points, sparse=sparse)


def build_operators(grid: Grid1D, rep: Representation, order: int = 4):
    """``(q, p, metric)`` on ``grid``; ``q`` and ``p`` are sparse KreinOperators."""
    _require_symmetric(grid)
    rep = Representation(rep)
    metric = _metric_for(grid, rep)
    D = fd_matrix(grid.n_points, grid.spacing, 1, order)
    if rep is Representation.SCHROEDINGER:
        q = sp.diags(grid.x.astype(complex), format="csr")
        p = -1j * D
    else:
        q = sp.diags(-1j * grid.x, format="csr")
        p = D
    return KreinOperator(q, metric), KreinOperator(p, metric), metric


# ---------------------------------------------------------------------------
# 2-derivative ghost oscillator


@dataclass(frozen=True)
class PotentialSpec:
    """``V(q) = k_lin q + quad_coeff q^2 + g q^3 + lam q^4``.

    The default adds only the interaction on top of the free ghost
    Hamiltonian; ``as_written`` gives the form with a ``-q^2/2`` term.
    """

    k_lin: float = 0.0
    quad_coeff: float = 0.0
    g: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.k_lin, self.quad_coeff, self.g, self.lam])):
            raise ValueError("potential coefficients must be finite")

    @classmethod
    def as_written(cls, k_lin: float = 0.0, g: float = 0.0, lam: float = 0.0) -> "PotentialSpec":
        return cls(k_lin, -0.5, g, lam)

    def __call__(self, q):
        q = np.asarray(q)
        return self.k_lin * q + self.quad_coeff * q**2 + self.g * q**3 + self.lam * q**4


def ghost_oscillator_hamiltonian(grid: Grid1D, potential: PotentialSpec, order: int = 4) -> KreinOperator:
    """``H = -(q^2 + p^2)/2 + V(q)`` in the Dirac-Pauli representation."""
    _require_symmetric(grid)
    qx = -1j * grid.x
    p2 = fd_matrix(grid.n_points, grid.spacing, 2, order)
    H = sp.diags(-0.5 * qx**2 + potential(qx), format="csr") - 0.5 * p2
    return KreinOperator(H, _metric_for(grid, Representation.DIRAC_PAULI))


def _lowest(values: np.ndarray, n_levels: int, tol: float) -> np.ndarray:
    """Indices of the ``n_levels`` smallest real parts, keeping conjugate partners."""
    order = np.argsort(values.real, kind="stable")
    keep = list(order[:n_levels])
    for i in list(keep):
        if abs(values[i].imag) > tol * max(abs(values[i]), 1.0):
            j = int(np.argmin(np.abs(values - np.conj(values[i]))))
            if j not in keep:
                keep.append(j)
    return np.array(sorted(keep, key=lambda k: (values[k].real, values[k].imag)))


def _dense_lowest(H: KreinOperator, n_levels: int, null_tol: float) -> SpectralClassification:
    if not is_self_adjoint(H, DEFAULT_SELF_ADJOINT_TOL):
        raise NotSelfAdjointError("lattice Hamiltonian is not self-adjoint under its metric")
    values, vectors = sl.eig(H.dense())
    sel = _lowest(values, n_levels, np.sqrt(null_tol))
    return classify_eigenpairs(values[sel], vectors[:, sel], H.metric, null_tol)


def ghost_oscillator_spectrum(
    grid: Grid1D,
    potential: PotentialSpec | None = None,
    n_levels: int = 6,
    null_tol: float = DEFAULT_NULL_TOL,
    order: int = 4,
    convergence_tol: float | None = None,
) -> SpectralClassification:
    """Lowest ``n_levels`` (by real part) of the lattice ghost oscillator.

    With ``convergence_tol`` the spectrum is recomputed on ``grid.refined()``
    and :class:`ConvergenceError` is raised if any level moves by more.
    """
    potential = potential or PotentialSpec()
    if n_levels < 1 or n_levels > grid.n_points:
        raise ValueError("n_levels must lie between 1 and the number of grid points")
    cl = _dense_lowest(ghost_oscillator_hamiltonian(grid, potential, order), n_levels, null_tol)
    if convergence_tol is not None:
        fine = _dense_lowest(ghost_oscillator_hamiltonian(grid.refined(), potential, order), n_levels, null_tol)
        shift = _max_shift(cl.eigenvalues, fine.eigenvalues, n_levels)
        if shift > convergence_tol:
            raise ConvergenceError(f"eigenvalues moved by {shift:.3g} under grid refinement")
    return cl


def _max_shift(coarse: np.ndarray, fine: np.ndarray, n: int) -> float:
    m = min(n, len(coarse), len(fine))
    return float(np.max(np.abs(np.sort_complex(coarse)[:m] - np.sort_complex(fine)[:m])))


# ---------------------------------------------------------------------------
# Pais-Uhlenbeck oscillator


@dataclass(frozen=True)
class PaisUhlenbeckSpec:
    """Free frequencies, couplings and the two lattices.

    ``grid1`` discretises the momentum ``p1`` conjugate to ``q1``;
    ``grid2`` discretises ``q2`` in the Dirac-Pauli representation.
    """

    omega_plus: float = 1.0
    omega_minus: float = 1.5
    g: float = 0.0
    lam: float = 0.0
    grid1: Grid1D = field(default_factory=lambda: Grid1D.symmetric(10.0, 101))
    grid2: Grid1D = field(default_factory=lambda: Grid1D.symmetric(7.0, 101))
    order: int = 4

    def __post_init__(self):
        if not (0 < self.omega_plus and self.omega_plus != self.omega_minus):
            raise ValueError("need 0 < omega_plus and omega_plus != omega_minus")
        if not self.omega_minus > self.omega_plus:
            raise ValueError("need omega_minus > omega_plus")

    @property
    def dimension(self) -> int:
        return self.grid1.n_points * self.grid2.n_points


def pu_hamiltonian(spec: PaisUhlenbeckSpec) -> tuple[KreinOperator, IndefiniteMetric]:
    """Ostrogradski Hamiltonian on the tensor lattice, metric ``I (x) R``.

    ``H = p1 q2 - p2^2/2 - (w+^2 + w-^2) q2^2/2 + w+^2 w-^2 q1^2/2 + g q1^3 + lam q1^4``
    with ``q1 = i d/dp1``. The free spectrum is ``w+(n+ + 1/2) + w-(n- + 1/2)``.
    """
    g1, g2 = spec.grid1, spec.grid2
    _require_symmetric(g1)
    _require_symmetric(g2)
    wp2, wm2 = spec.omega_plus**2, spec.omega_minus**2
    n1, h1 = g1.n_points, g1.spacing
    I1 = sp.identity(n1, dtype=complex, format="csr")
    I2 = sp.identity(g2.n_points, dtype=complex, format="csr")

    p1 = sp.diags(g1.x.astype(complex), format="csr")
    q1_sq = -fd_matrix(n1, h1, 2, spec.order)
    sector1 = 0.5 * wp2 * wm2 * q1_sq
    if spec.g:
        sector1 = sector1 - 1j * spec.g * fd_matrix(n1, h1, 3, spec.order)
    if spec.lam:
        sector1 = sector1 + spec.lam * fd_matrix(n1, h1, 4, spec.order)

    q2 = -1j * g2.x
    p2_sq = fd_matrix(g2.n_points, g2.spacing, 2, spec.order)
    sector2 = -0.5 * p2_sq + sp.diags(-0.5 * (wp2 + wm2) * q2**2, format="csr")

    H = sp.kron(p1, sp.diags(q2, format="csr")) + sp.kron(I1, sector2) + sp.kron(sector1, I2)
    metric = IndefiniteMetric(sp.identity(n1, dtype=complex, format="csr")).kron(
        IndefiniteMetric.reflection(g2.n_points, sparse=True)
    )
    op = KreinOperator(sp.csr_matrix(H), metric)
    if not is_self_adjoint(op, DEFAULT_SELF_ADJOINT_TOL):
        raise NotSelfAdjointError("Pais-Uhlenbeck Hamiltonian is not self-adjoint under I (x) R")
    return op, metric


def pu_free_levels(omega_plus: float, omega_minus: float, n_levels: int) -> list[tuple[float, int, int]]:
    """Lowest analytic levels ``(E, n+, n-)`` of the free oscillator."""
    top = n_levels + 1
    levels = [
        (omega_plus * (a + 0.5) + omega_minus * (b + 0.5), a, b) for a in range(top) for b in range(top)
    ]
    return sorted(levels)[:n_levels]


def pu_spectrum(
    spec: PaisUhlenbeckSpec,
    n_levels: int = 6,
    null_tol: float = DEFAULT_NULL_TOL,
    sigma: float = 0.0,
    extra: int = 6,
) -> SpectralClassification:
    """Lowest levels by sparse shift-invert around ``sigma``.

    Asks for ``n_levels + extra`` eigenpairs nearest ``sigma`` and keeps the
    ``n_levels`` with smallest real part, plus conjugate partners.
    """
    H, metric = pu_hamiltonian(spec)
    k = min(n_levels + extra, H.dimension - 2)
    try:
        # fixed start vector: ARPACK's default is random, which breaks byte-identical output
        v0 = np.random.default_rng(0).standard_normal(H.dimension).astype(complex)
        values, vectors = sla.eigs(H.matrix.tocsc(), k=k, sigma=sigma, which="LM", v0=v0)
    except (sla.ArpackNoConvergence, sla.ArpackError) as exc:
        raise ConvergenceError(f"shift-invert eigensolve failed: {exc}") from exc
    sel = _lowest(values, n_levels, np.sqrt(null_tol))
    return classify_eigenpairs(values[sel], vectors[:, sel], metric, null_tol)


@dataclass(frozen=True)
class ScanPoint:
    """One g-point of a scan; ``classification`` is None when it failed."""

    g: float
    lam: float
    classification: SpectralClassification | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.classification is not None


def _scan_one(args) -> ScanPoint:
    spec, n_levels, null_tol, sigma = args
    try:
        cl = pu_spectrum(spec, n_levels, null_tol, sigma)
    except (ConvergenceError, ClassificationError, NotSelfAdjointError) as exc:
        return ScanPoint(spec.g, spec.lam, None, f"{type(exc).__name__}: {exc}")
    return ScanPoint(spec.g, spec.lam, cl)


def pu_spectrum_scan(
    spec: PaisUhlenbeckSpec,
    g_values,
    n_levels: int = 10,
    lam_ratio: float = 0.5,
    null_tol: float = DEFAULT_NULL_TOL,
    sigma: float = 0.0,
    jobs: int = 1,
) -> list[ScanPoint]:
    """Spectrum for each ``g`` with ``lam = lam_ratio * g``, in ``g_values`` order.

    Failures are recorded per point; the scan never aborts.
    """
    tasks = [(replace(spec, g=float(g), lam=lam_ratio * float(g)), n_levels, null_tol, sigma) for g in g_values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_scan_one, tasks))
    return [_scan_one(t) for t in tasks]


def boundary_mass(vector, shape: tuple[int, ...], width: int) -> float:
    """Fraction of ``|psi|^2`` within ``width`` points of any grid edge."""
    if width < 1:
        raise ValueError("width must be positive")
    w = np.abs(np.asarray(vector).reshape(shape)) ** 2
    total = w.sum()
    if total == 0:
        raise NullNormError("zero wave-function")
    inner = w[tuple(slice(width, n - width) for n in shape)].sum()
    return float((total - inner) / total)


# ---------------------------------------------------------------------------
# mode decomposition and propagator


@dataclass(frozen=True, eq=False)
class ModeDecomposition:
    """``q = (q+ + q-)/s``, ``q'' = -(w+^2 q+ + w-^2 q-)/s``, ``s = sqrt(w-^2 - w+^2)``.

    ``from_modes`` maps ``(q+, q-)`` to ``(q, q'')``; ``to_modes`` inverts it.
    ``phase_space`` maps ``(q+, q+', q-, q-')`` to ``(q, q', q'', q''')``.
    """

    omega_plus: float
    omega_minus: float
    from_modes: np.ndarray
    to_modes: np.ndarray
    phase_space: np.ndarray

    def energy_form(self) -> np.ndarray:
        """Free Ostrogradski energy as a symmetric form in ``(q, q', q'', q''')``.

        ``E = (w+^2 + w-^2) q'^2/2 + q''' q' - q''^2/2 + w+^2 w-^2 q^2/2``.
        """
        wp2, wm2 = self.omega_plus**2, self.omega_minus**2
        E = np.diag([0.5 * wp2 * wm2, 0.5 * (wp2 + wm2), -0.5, 0.0])
        E[1, 3] = E[3, 1] = 0.5
        return E

    def mode_energy_form(self) -> np.ndarray:
        T = self.phase_space
        return T.T @ self.energy_form() @ T

    def block_residual(self) -> float:
        """Largest entry coupling the two modes or position to velocity."""
        M = self.mode_energy_form()
        expected = np.diag(np.diag(M))
        return float(np.max(np.abs(M - expected)))

    def mode_energies(self) -> np.ndarray:
        """Diagonal of the mode form: ``(w+^2/2, 1/2, -w-^2/2, -1/2)``."""
        return np.diag(self.mode_energy_form()).copy()


def mode_decomposition(omega_plus: float, omega_minus: float) -> ModeDecomposition:
    if not omega_minus > omega_plus > 0:
        raise ValueError("need omega_minus > omega_plus > 0 (degenerate frequencies are singular)")
    wp2, wm2 = omega_plus**2, omega_minus**2
    s = np.sqrt(wm2 - wp2)
    M = np.array([[1.0, 1.0], [-wp2, -wm2]]) / s
    Minv = np.linalg.inv(M)
    # (q+, q+', q-, q-') -> (q, q', q'', q''')
    T = np.zeros((4, 4))
    T[0, 0] = T[0, 2] = 1.0
    T[1, 1] = T[1, 3] = 1.0
    T[2, 0], T[2, 2] = -wp2, -wm2
    T[3, 1], T[3, 3] = -wp2, -wm2
    return ModeDecomposition(omega_plus, omega_minus, M, Minv, T / s)


def propagator_identity(omega, omega_plus: float, omega_minus: float):
    """Both sides of the propagator split and their absolute difference.

    ``lhs = [1/(w^2 - w+^2) - 1/(w^2 - w-^2)] / (w-^2 - w+^2)``,
    ``rhs = -1 / [(w^2 - w-^2)(w^2 - w+^2)]``.
    """
    w2 = np.asarray(omega, dtype=float) ** 2
    wp2, wm2 = float(omega_plus) ** 2, float(omega_minus) ** 2
    if wp2 == wm2:
        raise ValueError("omega_plus and omega_minus must differ")
    if np.any(w2 == wp2) or np.any(w2 == wm2):
        raise ValueError("omega sits on a pole")
    lhs = (1.0 / (w2 - wp2) - 1.0 / (w2 - wm2)) / (wm2 - wp2)
    rhs = -1.0 / ((w2 - wm2) * (w2 - wp2))
    res = np.abs(lhs - rhs)
    if np.ndim(lhs) == 0:
        return float(lhs), float(rhs), float(res)
    return lhs, rhs, res


@dataclass(frozen=True)
class ToyShift:
    perturbative: float
    exact: float
    propagator: float

    @property
    def residual(self) -> float:
        return abs(self.exact - self.perturbative)


def toy_second_order(
    omega: float, omega_plus: float, omega_minus: float, coupling: float, kinematic: str = "squared"
) -> ToyShift:
    """Second-order shift of ``|j>`` coupled to ``|+> + |->`` in a 3-state model.

    Free energies are ``(w^2, w+^2, w-^2)`` for ``kinematic="squared"`` or
    ``(w, w+, w-)`` for ``"linear"``. Metric ``diag(1, 1, -1)``: the
    ``|->`` intermediate state enters with the opposite sign.
    """
    p = {"squared": 2, "linear": 1}.get(kinematic)
    if p is None:
        raise ValueError("kinematic must be 'squared' or 'linear'")
    e = np.array([omega, omega_plus, omega_minus], dtype=float) ** p
    gaps = [abs(e[0] - e[1]), abs(e[0] - e[2]), abs(e[1] - e[2])]
    if min(gaps) == 0:
        raise ValueError("free energies must be distinct")
    if abs(coupling) > 0.1 * min(gaps):
        raise ValueError("coupling must not exceed 0.1 times the smallest gap")
    c = float(coupling)
    H = np.array([[e[0], c, -c], [c, e[1], 0.0], [c, 0.0, e[2]]])
    perturbative = sum(H[0, n] * H[n, 0] / (e[0] - e[n]) for n in (1, 2))
    vals = sl.eigvals(H)
    exact = vals[np.argmin(np.abs(vals - e[0]))].real - e[0]
    lhs = (1.0 / (e[0] - e[1]) - 1.0 / (e[0] - e[2])) / (e[2] - e[1])
    return ToyShift(float(perturbative), float(exact), float(c**2 * (e[2] - e[1]) * lhs))


def q_squared_expectation(psi, grid: Grid1D) -> float:
    """``-sum x^2 |psi|^2 / sum |psi|^2``: the repeated-measurement value of ``q^2``."""
    w = np.abs(np.asarray(psi)) ** 2
    if w.shape != (grid.n_points,):
        raise ValueError("wave-function length does not match the grid")
    total = w.sum()
    if total == 0:
        raise NullNormError("zero wave-function")
    return float(-np.sum(grid.x**2 * w) / total)
