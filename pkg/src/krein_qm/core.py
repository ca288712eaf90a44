"""Finite-dimensional linear algebra with an indefinite inner product.

States are plain complex numpy vectors. The inner product is
``<u|v> = u^H eta v`` for a Hermitian involution ``eta`` (the metric), and an
operator ``A`` is self-adjoint when ``eta A^H eta == A``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

__all__ = [
    "KreinError",
    "NotSelfAdjointError",
    "ClassificationError",
    "NullNormError",
    "GhostError",
    "ConvergenceError",
    "IndefiniteMetric",
    "KreinOperator",
    "NormClass",
    "SpectralEntry",
    "SpectralClassification",
    "GhostKind",
    "GhostResolution",
    "inner_product",
    "krein_adjoint",
    "is_self_adjoint",
    "commutator",
    "classify_eigenpairs",
    "classify_spectrum",
    "ghost_resolution",
    "observable_probabilities",
    "indefinite_weights",
    "u11_boost",
    "evolution_operator",
    "evolve",
    "ghost_compatibility",
    "random_self_adjoint",
]

DEFAULT_NULL_TOL = 1e-8
DEFAULT_DEGENERACY_TOL = 1e-9
DEFAULT_SELF_ADJOINT_TOL = 1e-10


class KreinError(Exception):
    """Base class for errors raised by this package."""


class NotSelfAdjointError(KreinError):
    """Raised when an operator is not self-adjoint under its metric."""


class ClassificationError(KreinError):
    """Raised when eigenvectors cannot be classified consistently.

    Typical causes are an unpaired null vector (tolerance too loose or too
    tight) or a defective matrix.
    """


class NullNormError(KreinError):
    """Raised when a quantity needs a state with non-vanishing norm."""


class GhostError(KreinError):
    """Raised when an observable has no unique ghost operator."""


class ConvergenceError(KreinError):
    """Raised when an eigensolver or a discretisation does not converge."""


def _is_sparse(m) -> bool:
    return sp.issparse(m)


def _max_abs(m) -> float:
    if _is_sparse(m):
        m = sp.csr_matrix(m)
        return float(abs(m).max()) if m.nnz else 0.0
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def _hconj(m):
    return m.conj().T


@dataclass(frozen=True, eq=False)
class IndefiniteMetric:
    """Metric ``eta`` of an indefinite inner product.

    ``eta`` may be a dense array or a scipy sparse matrix (large lattices).
    It must be Hermitian and involutive.
    """

    eta: object

    def __post_init__(self):
        eta = self.eta
        if not _is_sparse(eta):
            eta = np.asarray(eta, dtype=complex)
            object.__setattr__(self, "eta", eta)
        else:
            eta = sp.csr_matrix(eta, dtype=complex)
            object.__setattr__(self, "eta", eta)
        if eta.ndim != 2 or eta.shape[0] != eta.shape[1] or eta.shape[0] < 1:
            raise ValueError(f"metric must be a non-empty square matrix, got shape {eta.shape}")
        if _max_abs(eta - _hconj(eta)) > 1e-12:
            raise ValueError("metric is not Hermitian")
        ident = sp.identity(eta.shape[0], format="csr") if _is_sparse(eta) else np.eye(eta.shape[0])
        if _max_abs(eta @ eta - ident) > 1e-12:
            raise ValueError("metric is not involutive (eta @ eta != 1)")

    @classmethod
    def diagonal(cls, n_plus: int, n_minus: int) -> "IndefiniteMetric":
        """diag(+1 ... +1, -1 ... -1) with the given counts."""
        if n_plus < 0 or n_minus < 0 or n_plus + n_minus < 1:
            raise ValueError("need non-negative counts with a positive total")
        return cls.from_signs([1] * n_plus + [-1] * n_minus)

    @classmethod
    def from_signs(cls, signs) -> "IndefiniteMetric":
        signs = np.asarray(signs, dtype=float)
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +1 or -1")
        return cls(np.diag(signs).astype(complex))

    @classmethod
    def identity(cls, dim: int) -> "IndefiniteMetric":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def reflection(cls, dim: int, sparse: bool = False) -> "IndefiniteMetric":
        """Anti-diagonal metric, ``(R psi)(x) = psi(-x)`` on a symmetric grid."""
        if sparse:
            rows = np.arange(dim)
            eta = sp.csr_matrix((np.ones(dim, dtype=complex), (rows, rows[::-1])), shape=(dim, dim))
            return cls(eta)
        return cls(np.fliplr(np.eye(dim)).astype(complex))

    @property
    def dimension(self) -> int:
        return self.eta.shape[0]

    @property
    def is_sparse(self) -> bool:
        return _is_sparse(self.eta)

    @property
    def signature(self) -> tuple[int, int]:
        """(N+, N-): numbers of positive and negative eigenvalues of eta."""
        if self.is_sparse:
            # eta is a signed permutation-like involution; trace gives N+ - N-
            trace = float(self.eta.diagonal().real.sum())
        else:
            trace = float(np.trace(self.eta).real)
        n = self.dimension
        n_plus = int(round((n + trace) / 2))
        return n_plus, n - n_plus

    def dense(self) -> np.ndarray:
        return self.eta.toarray() if self.is_sparse else self.eta

    def kron(self, other: "IndefiniteMetric") -> "IndefiniteMetric":
        if self.is_sparse or other.is_sparse:
            return IndefiniteMetric(sp.kron(self.eta, other.eta, format="csr"))
        return IndefiniteMetric(np.kron(self.eta, other.eta))


@dataclass(frozen=True, eq=False)
class KreinOperator:
    """A square matrix together with the metric it acts under."""

    matrix: object
    metric: IndefiniteMetric

    def __post_init__(self):
        m = self.matrix
        if _is_sparse(m):
            object.__setattr__(self, "matrix", sp.csr_matrix(m, dtype=complex))
        else:
            m = np.asarray(m, dtype=complex)
            object.__setattr__(self, "matrix", m)
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] != self.metric.dimension:
            raise ValueError(
                f"operator dimension {m.shape[0]} does not match metric dimension {self.metric.dimension}"
            )

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return _is_sparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else self.matrix

    def adjoint(self) -> "KreinOperator":
        return krein_adjoint(self)

    def __matmul__(self, other):
        if isinstance(other, KreinOperator):
            _check_same_metric(self, other)
            return KreinOperator(self.matrix @ other.matrix, self.metric)
        return self.matrix @ np.asarray(other)


def _check_same_metric(a: KreinOperator, b: KreinOperator):
    if a.metric is not b.metric and _max_abs(a.metric.eta - b.metric.eta) > 0:
        raise ValueError("operators act under different metrics")


def inner_product(metric: IndefiniteMetric, bra, ket) -> complex:
    """``<bra|ket> = bra^H eta ket``."""
    bra = np.asarray(bra, dtype=complex)
    ket = np.asarray(ket, dtype=complex)
    if bra.shape != (metric.dimension,) or ket.shape != (metric.dimension,):
        raise ValueError(
            f"vectors of shape {bra.shape} and {ket.shape} do not match metric dimension {metric.dimension}"
        )
    return complex(np.vdot(bra, metric.eta @ ket))


def krein_adjoint(A: KreinOperator) -> KreinOperator:
    """Adjoint under the indefinite product, ``eta A^H eta``."""
    eta = A.metric.eta
    return KreinOperator(eta @ _hconj(A.matrix) @ eta, A.metric)


def is_self_adjoint(A: KreinOperator, tol: float = DEFAULT_SELF_ADJOINT_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = _max_abs(A.matrix)
    return _max_abs(A.matrix - krein_adjoint(A).matrix) <= tol * scale


def commutator(A: KreinOperator, B: KreinOperator) -> KreinOperator:
    _check_same_metric(A, B)
    return KreinOperator(A.matrix @ B.matrix - B.matrix @ A.matrix, A.metric)


def _require_self_adjoint(A: KreinOperator, tol: float = DEFAULT_SELF_ADJOINT_TOL):
    if not is_self_adjoint(A, tol):
        raise NotSelfAdjointError(
            f"operator is not self-adjoint under its metric (tolerance {tol:g})"
        )


class NormClass(enum.Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    NULL = "0"

    @property
    def sign(self) -> int:
        return {"+": 1, "-": -1, "0": 0}[self.value]


@dataclass(frozen=True, eq=False)
class SpectralEntry:
    eigenvalue: complex
    vector: np.ndarray
    norm_class: NormClass
    pair_id: int | None = None

    @property
    def sign(self) -> int:
        return self.norm_class.sign


@dataclass(frozen=True, eq=False)
class SpectralClassification:
    """Eigenpairs tagged by the sign of their norm.

    Entries are sorted by real part, then imaginary part. Definite-norm
    vectors are scaled to norm +-1; null vectors to unit Euclidean length.
    """

    entries: tuple[SpectralEntry, ...]
    metric: IndefiniteMetric = field(repr=False)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e.eigenvalue for e in self.entries], dtype=complex)

    @property
    def vectors(self) -> np.ndarray:
        """Eigenvectors as the columns of a matrix."""
        return np.column_stack([e.vector for e in self.entries])

    @property
    def signs(self) -> np.ndarray:
        return np.array([e.sign for e in self.entries], dtype=int)

    @property
    def norm_classes(self) -> list[NormClass]:
        return [e.norm_class for e in self.entries]

    @property
    def null_pairs(self) -> list[tuple[int, int]]:
        by_pair: dict[int, list[int]] = {}
        for i, e in enumerate(self.entries):
            if e.pair_id is not None:
                by_pair.setdefault(e.pair_id, []).append(i)
        return [tuple(v) for _, v in sorted(by_pair.items())]

    @property
    def n_null_pairs(self) -> int:
        return len(self.null_pairs)

    @property
    def has_null(self) -> bool:
        return any(e.norm_class is NormClass.NULL for e in self.entries)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v
    return v * (abs(v[k]) / v[k])


def _degenerate_blocks(values: np.ndarray, rel_tol: float) -> list[list[int]]:
    """Group indices whose eigenvalues lie within ``rel_tol`` (relative) of each other."""
    order = sorted(range(len(values)), key=lambda i: (values[i].real, values[i].imag))
    blocks: list[list[int]] = []
    for i in order:
        placed = False
        for block in blocks:
            j = block[-1]
            scale = max(abs(values[i]), abs(values[j]), 1.0)
            if abs(values[i] - values[j]) <= rel_tol * scale:
                block.append(i)
                placed = True
                break
        if not placed:
            blocks.append([i])
    return blocks


def classify_eigenpairs(
    values,
    vectors,
    metric: IndefiniteMetric,
    null_tol: float = DEFAULT_NULL_TOL,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> SpectralClassification:
    """Tag precomputed eigenpairs by norm sign and pair up the null vectors.

    ``vectors`` holds the eigenvectors as columns. Degenerate eigenvalue
    blocks are re-orthonormalised under the metric before tagging.
    """
    values = np.asarray(values, dtype=complex).copy()
    vectors = np.array(vectors, dtype=complex, copy=True)
    if vectors.ndim != 2 or vectors.shape[1] != values.shape[0]:
        raise ValueError("vectors must have one column per eigenvalue")
    if vectors.shape[0] != metric.dimension:
        raise ValueError("eigenvector length does not match metric dimension")
    if null_tol <= 0:
        raise ValueError("null_tol must be positive")
    eta = metric.eta

    for block in _degenerate_blocks(values, degeneracy_tol):
        if len(block) < 2:
            continue
        q, _ = np.linalg.qr(vectors[:, block])
        gram = _hconj(q) @ (eta @ q)
        gram = 0.5 * (gram + _hconj(gram))
        _, u = np.linalg.eigh(gram)
        vectors[:, block] = q @ u
        values[block] = np.mean(values[block])

    norms = np.einsum("ij,ij->j", vectors.conj(), eta @ vectors).real
    euclid = np.einsum("ij,ij->j", vectors.conj(), vectors).real
    if np.any(euclid == 0):
        raise ClassificationError("zero eigenvector")
    imag_tol = np.sqrt(null_tol)

    classes = []
    for k in range(len(values)):
        scale = max(abs(values[k]), 1.0)
        is_null = abs(norms[k]) < null_tol * euclid[k]
        if not is_null and abs(values[k].imag) > imag_tol * scale:
            # a definite-norm eigenvector cannot carry a complex eigenvalue
            is_null = True
        if is_null:
            classes.append(NormClass.NULL)
            vectors[:, k] /= np.sqrt(euclid[k])
        else:
            values[k] = complex(values[k].real, 0.0)
            classes.append(NormClass.POSITIVE if norms[k] > 0 else NormClass.NEGATIVE)
            vectors[:, k] /= np.sqrt(abs(norms[k]))
        vectors[:, k] = _fix_phase(vectors[:, k])

    nulls = [k for k, c in enumerate(classes) if c is NormClass.NULL]
    candidates = []
    for a_pos, i in enumerate(nulls):
        for j in nulls[a_pos + 1:]:
            candidates.append((abs(values[j] - np.conj(values[i])), i, j))
    candidates.sort()
    partner: dict[int, int] = {}
    for dist, i, j in candidates:
        if i in partner or j in partner:
            continue
        scale = max(abs(values[i]), abs(values[j]), 1.0)
        if dist > imag_tol * scale:
            continue
        partner[i] = j
        partner[j] = i
    unpaired = [k for k in nulls if k not in partner]
    if unpaired:
        raise ClassificationError(
            "unpaired null eigenvector(s) with eigenvalue(s) "
            + ", ".join(f"{values[k]:.6g}" for k in unpaired)
        )

    order = sorted(range(len(values)), key=lambda k: (round(values[k].real, 12), values[k].imag, k))
    pair_ids: dict[int, int] = {}
    next_id = 0
    for k in order:
        if k in partner and k not in pair_ids:
            pair_ids[k] = pair_ids[partner[k]] = next_id
            next_id += 1
    entries = tuple(
        SpectralEntry(complex(values[k]), vectors[:, k].copy(), classes[k], pair_ids.get(k))
        for k in order
    )
    return SpectralClassification(entries, metric)


def classify_spectrum(
    A: KreinOperator,
    null_tol: float = DEFAULT_NULL_TOL,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> SpectralClassification:
    """Eigen-decompose a self-adjoint operator and tag every eigenvector.

    Uses a general (non-Hermitian) dense eigensolver: ``eta A`` is Hermitian
    but ``A`` itself need not be normal.
    """
    _require_self_adjoint(A)
    values, vectors = scipy.linalg.eig(A.dense())
    return classify_eigenpairs(values, vectors, A.metric, null_tol, degeneracy_tol)


class GhostKind(enum.Enum):
    UNIQUE = "unique"
    NONE = "none"
    FAMILY = "family"


@dataclass(frozen=True, eq=False)
class GhostResolution:
    """Solution set of ``[A, G] = 0`` for ghost operators ``G``.

    ``ghost`` is the unique solution, a representative of the family, or
    ``None``. ``free_parameter_count`` counts complex boost parameters
    (one real rapidity plus one phase each) left free inside degenerate
    blocks mixing positive and negative norms.
    """

    kind: GhostKind
    ghost: KreinOperator | None
    classification: SpectralClassification
    free_parameter_count: int = 0

    @property
    def is_unique(self) -> bool:
        return self.kind is GhostKind.UNIQUE


def _ghost_from_classification(cl: SpectralClassification) -> np.ndarray:
    v = cl.vectors
    return v @ _hconj(v) @ cl.metric.dense()


def ghost_resolution(
    A: KreinOperator,
    null_tol: float = DEFAULT_NULL_TOL,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> GhostResolution:
    cl = classify_spectrum(A, null_tol, degeneracy_tol)
    if cl.has_null:
        return GhostResolution(GhostKind.NONE, None, cl)
    free = 0
    for block in _degenerate_blocks(cl.eigenvalues, degeneracy_tol):
        signs = cl.signs[block]
        free += int(np.sum(signs > 0)) * int(np.sum(signs < 0))
    G = KreinOperator(_ghost_from_classification(cl), A.metric)
    kind = GhostKind.FAMILY if free else GhostKind.UNIQUE
    return GhostResolution(kind, G, cl, free)


def _unique_ghost(A: KreinOperator, null_tol: float) -> GhostResolution:
    res = ghost_resolution(A, null_tol)
    if res.kind is GhostKind.NONE:
        raise GhostError("observable has eigenvectors on the null cone: no ghost operator")
    if res.kind is GhostKind.FAMILY:
        raise GhostError(
            f"observable is degenerate across norm signs: {res.free_parameter_count} free boost parameter(s)"
        )
    return res


def observable_probabilities(
    A: KreinOperator, psi, null_tol: float = DEFAULT_NULL_TOL
) -> list[tuple[float, float]]:
    """Outcome probabilities of measuring ``A`` on ``psi``.

    Uses the positive A-norm ``<u|v>_A = u^H eta G_A v`` built from the
    unique ghost of ``A``. Returns ``(eigenvalue, p)`` pairs sorted by
    eigenvalue.
    """
    res = _unique_ghost(A, null_tol)
    psi = np.asarray(psi, dtype=complex)
    eta = A.metric.dense()
    weight = eta @ res.ghost.matrix
    total = np.vdot(psi, weight @ psi).real
    if total <= null_tol * np.vdot(psi, psi).real:
        raise NullNormError("state has zero A-norm")
    amps2 = np.array([abs(np.vdot(e.vector, weight @ psi)) ** 2 for e in res.classification])
    # the eigenbasis is A-orthonormal, so sum |amp|^2 equals the A-norm; it is
    # the better-conditioned denominator under large boosts
    amps2 /= amps2.sum()
    return [(e.eigenvalue.real, float(p)) for e, p in zip(res.classification, amps2)]


def indefinite_weights(A: KreinOperator, psi, null_tol: float = DEFAULT_NULL_TOL) -> np.ndarray:
    """Signed weights ``w_i = N_i |c_i|^2 / sum_j N_j |c_j|^2``.

    They sum to one but may be negative or exceed one.
    """
    cl = classify_spectrum(A, null_tol)
    if cl.has_null:
        raise GhostError("eigenbasis touches the null cone: weights undefined")
    psi = np.asarray(psi, dtype=complex)
    eta = A.metric.dense()
    signs = cl.signs
    c = signs * (_hconj(cl.vectors) @ (eta @ psi))
    weighted = signs * np.abs(c) ** 2
    total = weighted.sum()
    if abs(total) < null_tol * np.sum(np.abs(c) ** 2):
        raise NullNormError("state has zero indefinite norm: norm-convergence weights undefined")
    return weighted / total


_NULL_TO_PM = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def u11_boost(theta: complex, basis: str = "null") -> KreinOperator:
    """U(1,1) boost ``|0+> -> e^theta |0+>``, ``|0-> -> e^(-theta*) |0->``.

    ``basis="null"`` acts on null-cone components with the reflection
    metric; ``basis="pm"`` acts on components along ``|+>, |->`` with
    metric diag(1, -1), where ``|0+-> = (|+> +- |->)/sqrt 2``.
    """
    theta = complex(theta)
    B = np.diag([np.exp(theta), np.exp(-np.conj(theta))])
    if basis == "null":
        return KreinOperator(B, IndefiniteMetric.reflection(2))
    if basis == "pm":
        # columns of _NULL_TO_PM are |0+>, |0-> in the +- basis
        T = _NULL_TO_PM
        return KreinOperator(T @ B @ np.linalg.inv(T), IndefiniteMetric.from_signs([1, -1]))
    raise ValueError(f"unknown basis {basis!r}")


def evolution_operator(H: KreinOperator, t: float) -> np.ndarray:
    """``exp(-i H t)``; diagonalisation when well conditioned, else scaled expm."""
    _require_self_adjoint(H)
    h = H.dense()
    values, vectors = scipy.linalg.eig(h)
    if np.linalg.cond(vectors) < 1e6:
        phases = np.exp(-1j * values * t)
        return vectors @ np.diag(phases) @ np.linalg.inv(vectors)
    return scipy.linalg.expm(-1j * t * h)


def evolve(H: KreinOperator, t: float, psi) -> np.ndarray:
    """Return ``exp(-i H t) psi``; conserves the indefinite norm."""
    psi = np.asarray(psi, dtype=complex)
    if t == 0:
        _require_self_adjoint(H)
        return psi.copy()
    return evolution_operator(H, t) @ psi


def ghost_compatibility(
    A: KreinOperator, H: KreinOperator, tol: float = 1e-8, null_tol: float = DEFAULT_NULL_TOL
) -> bool:
    """True unless ``A`` and ``H`` commute while their ghosts differ."""
    ga = _unique_ghost(A, null_tol).ghost.matrix
    gh = _unique_ghost(H, null_tol).ghost.matrix
    scale = max(_max_abs(A.matrix) * _max_abs(H.matrix), 1e-300)
    commute = _max_abs(commutator(A, H).matrix) <= tol * scale
    same = _max_abs(ga - gh) <= tol
    return (not commute) or same


def random_self_adjoint(
    metric: IndefiniteMetric,
    rng: np.random.Generator,
    real_spectrum: bool = True,
    boost_scale: float = 0.3,
) -> KreinOperator:
    """Random operator that is self-adjoint under ``metric``.

    With ``real_spectrum`` the operator is ``L diag(E) L^-1`` for a random
    pseudo-unitary ``L = exp(i eta K)`` (``K`` Hermitian of size
    ``boost_scale``) and signs of ``E``'s eigenvectors inherited from eta's
    eigenbasis. Otherwise it is ``eta K`` for Hermitian ``K``, which generally
    has conjugate null pairs.
    """
    n = metric.dimension
    eta = metric.dense()
    k = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    k = 0.5 * (k + _hconj(k))
    if not real_spectrum:
        return KreinOperator(eta @ k, metric)
    _, w = np.linalg.eigh(eta)
    energies = np.sort(rng.normal(size=n))
    diag = w @ np.diag(energies) @ _hconj(w)
    L = scipy.linalg.expm(1j * boost_scale * eta @ k / max(np.linalg.norm(k, 2), 1e-300) * np.sqrt(n))
    Linv = eta @ _hconj(L) @ eta
    return KreinOperator(L @ diag @ Linv, metric)
