"""Tensor powers of a state and the averaged observables acting on them.

A state ``psi = sum_j c_j |A_j>`` repeated ``n`` times expands over the
symmetrised basis ``|A_1^k1 ... A_N^kN>`` (one vector per composition
``k1 + ... + kN = n``) with coefficients
``c_1^k1 ... c_N^kN sqrt(n! / (k1! ... kN!))``.

Coefficients are stored as log-magnitude plus phase: multinomials overflow
float64 well before ``n = 2000``. Sums that cancel between positive- and
negative-norm terms are evaluated with multiple precision (gmpy2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import gmpy2
import numpy as np
from scipy.special import gammaln

from .core import KreinOperator, NullNormError

__all__ = [
    "DEFAULT_MAX_TERMS",
    "compositions",
    "n_compositions",
    "RepeatedStateExpansion",
    "ConvergenceReport",
    "GaussianSummary",
    "expand",
    "rate_apply",
    "repeated_operator",
    "average_check",
    "probability_coefficients",
    "coefficient_convergence",
    "bell_curves",
    "norm_moment",
    "gaussian_summary",
    "product_operator_moment",
    "commutator_scaling_check",
]

DEFAULT_MAX_TERMS = 5_000_000
MAX_EXPLICIT_DIM = 4096


def n_compositions(n: int, N: int) -> int:
    return math.comb(n + N - 1, N - 1)


def compositions(n: int, N: int) -> np.ndarray:
    """All ``(k_1, ..., k_N)`` with non-negative entries summing to ``n``.

    Rows are in colexicographic order: the last entry varies slowest. For
    ``N = 2`` that is ``(n, 0), (n-1, 1), ..., (0, n)``.
    """
    if N < 1 or n < 0:
        raise ValueError("need N >= 1 and n >= 0")
    if N == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for last in range(n + 1):
        head = compositions(n - last, N - 1)
        blocks.append(np.column_stack([head, np.full(len(head), last, dtype=np.int64)]))
    return np.concatenate(blocks)


def _log_multinomial(comps: np.ndarray) -> np.ndarray:
    n = comps.sum(axis=1)
    return gammaln(n + 1) - gammaln(comps + 1).sum(axis=1)


@dataclass(frozen=True, eq=False)
class RepeatedStateExpansion:
    """Coefficients of ``psi^(n)`` along the symmetrised basis.

    ``log_magnitude`` is ``-inf`` for vanishing coefficients; ``phase`` is in
    radians, wrapped to ``(-pi, pi]``.
    """

    n: int
    compositions: np.ndarray
    log_magnitude: np.ndarray
    phase: np.ndarray

    @property
    def base_dim(self) -> int:
        return self.compositions.shape[1]

    def __len__(self) -> int:
        return len(self.compositions)

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(x) for x in row): i for i, row in enumerate(self.compositions)}

    def index_of(self, composition) -> int:
        return self._index[tuple(int(x) for x in composition)]

    def coefficients(self) -> np.ndarray:
        """Plain complex coefficients; overflows to inf for large ``n``."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_magnitude) * np.exp(1j * self.phase)

    def coefficient(self, composition) -> complex:
        i = self.index_of(composition)
        return complex(np.exp(self.log_magnitude[i]) * np.exp(1j * self.phase[i]))

    def scaled_coefficients(self) -> np.ndarray:
        """Coefficients divided by the largest magnitude (projective form)."""
        top = np.max(self.log_magnitude)
        if not np.isfinite(top):
            return np.zeros(len(self), dtype=complex)
        return np.exp(self.log_magnitude - top) * np.exp(1j * self.phase)

    def peak(self) -> tuple[int, ...]:
        """Composition with the largest magnitude; ties go to the lexicographically smaller."""
        top = np.max(self.log_magnitude)
        cands = np.flatnonzero(self.log_magnitude >= top - 1e-12 * max(1.0, abs(top)))
        best = min(tuple(int(x) for x in self.compositions[i]) for i in cands)
        return best


def _wrap(phase: np.ndarray) -> np.ndarray:
    wrapped = np.angle(np.exp(1j * phase))
    wrapped[wrapped == -np.pi] = np.pi
    return wrapped


def expand(c, n: int, max_terms: int = DEFAULT_MAX_TERMS) -> RepeatedStateExpansion:
    """Expand ``psi^(n)`` for ``psi = sum_j c_j |A_j>``."""
    c = np.asarray(c, dtype=complex)
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("need at least two basis coefficients")
    if n < 1:
        raise ValueError("n must be >= 1")
    count = n_compositions(n, len(c))
    if count > max_terms:
        raise ValueError(f"{count} terms exceed the cap of {max_terms}")
    comps = compositions(n, len(c))
    absc = np.abs(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(absc)
        # 0^0 = 1: zero coefficients only contribute where they are used
        contrib = np.where(comps > 0, comps * logc, 0.0)
    log_mag = contrib.sum(axis=1) + 0.5 * _log_multinomial(comps)
    phase = _wrap(comps @ np.angle(c))
    return RepeatedStateExpansion(n, comps, log_mag, phase)


def rate_apply(exp: RepeatedStateExpansion, i: int) -> RepeatedStateExpansion:
    """Apply the rate operator of basis state ``i`` (eigenvalue ``k_i / n``)."""
    if not 0 <= i < exp.base_dim:
        raise IndexError(f"basis index {i} out of range")
    k = exp.compositions[:, i]
    with np.errstate(divide="ignore"):
        shift = np.log(k / exp.n)
    return RepeatedStateExpansion(exp.n, exp.compositions, exp.log_magnitude + shift, exp.phase)


def repeated_operator(A, n: int) -> np.ndarray:
    """Explicit ``(A x 1 x ... + ... + 1 x ... x A) / n`` on the full tensor space."""
    A = A.dense() if isinstance(A, KreinOperator) else np.asarray(A, dtype=complex)
    d = A.shape[0]
    if d ** n > MAX_EXPLICIT_DIM:
        raise ValueError(f"tensor dimension {d}**{n} exceeds {MAX_EXPLICIT_DIM}")
    total = np.zeros((d ** n, d ** n), dtype=complex)
    for slot in range(n):
        term = np.ones((1, 1), dtype=complex)
        for j in range(n):
            term = np.kron(term, A if j == slot else np.eye(d))
        total += term
    return total / n


def _precision_bits(abs2: np.ndarray, signs: np.ndarray, n: int) -> int:
    positive = float(np.sum(abs2))
    signed = abs(float(np.sum(signs * abs2)))
    if signed == 0.0:
        raise NullNormError("state has zero norm")
    ratio = max(positive / signed, 1.0)
    return 128 + int(math.ceil(n * math.log2(ratio)))


def _diagonal_metric_frame(A: KreinOperator):
    """Unitary ``W`` and signs with ``eta = W diag(signs) W^H``."""
    eta = A.metric.dense()
    if np.count_nonzero(eta - np.diag(np.diag(eta))) == 0:
        return None, np.real(np.diag(eta)).round().astype(int)
    s, w = np.linalg.eigh(eta)
    return w, np.sign(s).astype(int)


def average_check(A: KreinOperator, psi, n: int) -> tuple[complex, complex]:
    """Normalised expectation of the averaged observable on ``psi^(n)`` vs. on ``psi``.

    The left value is summed over compositions; the right one is
    ``<psi|A|psi> / <psi|psi>``. They agree for every ``n``.
    """
    psi = np.asarray(psi, dtype=complex)
    eta = A.metric.dense()
    a = A.dense()
    norm1 = np.vdot(psi, eta @ psi)
    if norm1 == 0:
        raise NullNormError("state has zero norm")
    rhs = complex(np.vdot(psi, eta @ (a @ psi)) / norm1)

    w, signs = _diagonal_metric_frame(A)
    if w is not None:
        psi = w.conj().T @ psi
        a = w.conj().T @ a @ w
    N = len(psi)
    comps = compositions(n, N)
    index = {tuple(int(x) for x in row): i for i, row in enumerate(comps)}
    bits = _precision_bits(np.abs(psi) ** 2, signs, n) + 64
    fact = [math.factorial(k) for k in range(n + 1)]

    with gmpy2.context(precision=bits):
        cs = [gmpy2.mpc(complex(x)) for x in psi]
        amps = []
        ksign = []
        for row in comps:
            mult = fact[n]
            amp = gmpy2.mpc(1)
            sgn = 1
            for j, k in enumerate(row):
                k = int(k)
                mult //= fact[k]
                if k:
                    amp *= cs[j] ** k
                    if signs[j] < 0 and k % 2:
                        sgn = -sgn
            amps.append(amp * gmpy2.sqrt(gmpy2.mpfr(mult)))
            ksign.append(sgn)
        norm = gmpy2.mpfr(0)
        for amp, sgn in zip(amps, ksign):
            norm += sgn * gmpy2.norm(amp)
        expect = gmpy2.mpc(0)
        entries = [(i, j, gmpy2.mpc(complex(a[i, j]))) for i in range(N) for j in range(N) if a[i, j] != 0]
        for t, row in enumerate(comps):
            amp = amps[t]
            for i, j, aij in entries:
                kj = int(row[j])
                if kj == 0:
                    continue
                if i == j:
                    expect += aij * kj * ksign[t] * gmpy2.norm(amp)
                    continue
                target = list(int(x) for x in row)
                target[j] -= 1
                target[i] += 1
                u = index[tuple(target)]
                factor = gmpy2.sqrt(gmpy2.mpfr(kj * target[i]))
                expect += aij * factor * ksign[u] * amps[u].conjugate() * amp
        lhs = complex(expect / (n * norm))
    return lhs, rhs


def probability_coefficients(c) -> np.ndarray:
    """``p_i = |c_i|^2 / sum_j |c_j|^2`` (independent of the norm signs)."""
    abs2 = np.abs(np.asarray(c, dtype=complex)) ** 2
    total = abs2.sum()
    if total == 0:
        raise NullNormError("zero state")
    return abs2 / total


@dataclass(frozen=True)
class ConvergenceReport:
    """Projective distance between ``p_i psi^(n)`` and ``P_i psi^(n)``.

    ``projective_residual`` is ``max_k |c_k - C_k| / max_k |C_k|``;
    ``peak_location`` is the composition carrying the largest coefficient of
    ``psi^(n)``; ``peak_value_ratio`` is ``max |C_k| / max |c_k|``.
    """

    n: int
    target_index: int
    probability: float
    projective_residual: float
    peak_location: tuple[int, ...]
    peak_value_ratio: float


def coefficient_convergence(c, i: int, n: int, max_terms: int = DEFAULT_MAX_TERMS) -> ConvergenceReport:
    exp = expand(c, n, max_terms)
    if not 0 <= i < exp.base_dim:
        raise IndexError(f"basis index {i} out of range")
    p = float(probability_coefficients(c)[i])
    mag = np.exp(exp.log_magnitude - np.max(exp.log_magnitude))
    rate = exp.compositions[:, i] / n
    scaled_state = p * mag
    projected = rate * mag
    top = projected.max()
    diff = np.abs(scaled_state - projected).max()
    if top == 0:
        residual = 0.0 if diff == 0 else math.inf
        ratio = 0.0 if p == 0 else math.inf
    else:
        residual = float(diff / top)
        ratio = float(top / scaled_state.max()) if p > 0 else math.inf
    return ConvergenceReport(n, i, p, residual, exp.peak(), ratio)


def bell_curves(c, i: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficient magnitudes of ``p_i psi^(n)`` and ``P_i psi^(n)``.

    Both are divided by ``max_k |(P_i psi^(n))_k|``. Returns the compositions
    and the two magnitude arrays.
    """
    exp = expand(c, n)
    p = float(probability_coefficients(c)[i])
    mag = np.exp(exp.log_magnitude - np.max(exp.log_magnitude))
    projected = exp.compositions[:, i] / n * mag
    top = projected.max()
    if top == 0:
        raise NullNormError("projected state vanishes")
    return exp.compositions, p * mag / top, projected / top


def norm_moment(signs, c, i: int, m: int, n: int) -> float:
    """``<psi^(n)| P_i^m |psi^(n)> / <psi^(n)|psi^(n)>`` under a diagonal metric.

    ``signs`` are the norms ``N_j = +-1`` of the basis states. For ``m = 1``
    this equals ``w_i`` (or ``p_i`` when all signs are positive) at every
    ``n``; for larger ``m`` it tends to ``w_i^m``.
    """
    signs = np.asarray(signs, dtype=int)
    abs2 = np.abs(np.asarray(c, dtype=complex)) ** 2
    if signs.shape != abs2.shape:
        raise ValueError("signs and coefficients differ in length")
    if abs(float(np.sum(signs * abs2))) < 1e-14 * float(np.sum(abs2)):
        raise NullNormError("state has zero indefinite norm")
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    N = len(abs2)
    comps = compositions(n, N)
    bits = _precision_bits(abs2, signs, n)
    fact = [math.factorial(k) for k in range(n + 1)]
    with gmpy2.context(precision=bits):
        a = [gmpy2.mpfr(float(x)) for x in abs2]
        num = gmpy2.mpfr(0)
        den = gmpy2.mpfr(0)
        for row in comps:
            mult = fact[n]
            term = gmpy2.mpfr(1)
            sgn = 1
            for j, k in enumerate(row):
                k = int(k)
                mult //= fact[k]
                if k:
                    term *= a[j] ** k
                    if signs[j] < 0 and k % 2:
                        sgn = -sgn
            term *= mult
            den += sgn * term
            ki = int(row[i])
            if ki:
                num += sgn * term * (gmpy2.mpfr(ki) / n) ** m
            elif m == 0:
                num += sgn * term
        return float(num / den)


@dataclass(frozen=True)
class GaussianSummary:
    """Large-``n`` Gaussian parameters of the squared-coefficient distribution."""

    mu: np.ndarray
    sigma2: np.ndarray
    empirical_mu: np.ndarray
    empirical_sigma2: np.ndarray


def _squared_weights(c, n: int, max_terms: int = DEFAULT_MAX_TERMS):
    exp = expand(c, n, max_terms)
    logw = 2 * exp.log_magnitude
    w = np.exp(logw - np.max(logw))
    return exp.compositions, w / w.sum()


def gaussian_summary(c, n: int) -> GaussianSummary:
    p = probability_coefficients(c)
    mu = n * p
    sigma2 = n * (np.diag(p) - np.outer(p, p))
    comps, w = _squared_weights(c, n)
    emp_mu = w @ comps
    centred = comps - emp_mu
    emp_sigma2 = (centred * w[:, None]).T @ centred
    return GaussianSummary(mu, sigma2, emp_mu, emp_sigma2)


def product_operator_moment(A_eigs, c, n: int) -> tuple[float, float]:
    """Mean and variance of ``A x A x ... x A`` over the squared coefficients.

    ``A`` is diagonal in the basis of ``c`` with real eigenvalues ``A_eigs``.
    For a parity (eigenvalues +-1) the variance does not shrink with ``n``.
    """
    a = np.asarray(A_eigs, dtype=float)
    comps, w = _squared_weights(c, n)
    with np.errstate(divide="ignore"):
        log_abs = np.where(comps > 0, comps * np.log(np.abs(a)), 0.0).sum(axis=1)
    negative = (comps[:, a < 0].sum(axis=1) % 2) == 1
    values = np.where(negative, -1.0, 1.0) * np.exp(log_abs)
    mean = float(w @ values)
    var = float(w @ values**2 - mean**2)
    return mean, max(var, 0.0)


def commutator_scaling_check(A, B, n: int) -> float:
    """Largest entry of ``[A^(n), B^(n)] - [A, B]^(n) / n`` (explicit tensors)."""
    a = A.dense() if isinstance(A, KreinOperator) else np.asarray(A, dtype=complex)
    b = B.dense() if isinstance(B, KreinOperator) else np.asarray(B, dtype=complex)
    an = repeated_operator(a, n)
    bn = repeated_operator(b, n)
    cn = repeated_operator(a @ b - b @ a, n)
    return float(np.max(np.abs(an @ bn - bn @ an - cn / n)))
