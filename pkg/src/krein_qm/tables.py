"""Row generators behind the CLI subcommands.

Each function returns ``(header, rows)`` with rows in a fixed order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import oscillation as osc
from . import oscillators as lat
from .repeated import bell_curves

__all__ = [
    "BELLS_HEADER",
    "OSC_HEADER",
    "CONTOUR_HEADER",
    "SPECTRUM2D_HEADER",
    "SPECTRUM4D_HEADER",
    "PROPCHECK_HEADER",
    "bells_rows",
    "osc_rows",
    "contour_rows",
    "spectrum2d_rows",
    "spectrum4d_rows",
    "propcheck_rows",
]

BELLS_HEADER = ("n", "k", "coeff_state", "coeff_projected")
OSC_HEADER = ("theta", "phase", "p_plus", "p_minus")
CONTOUR_HEADER = ("level", "dm2", "theta", "model", "channel")
SPECTRUM2D_HEADER = ("g", "level_index", "re_E", "im_E", "norm_class")
SPECTRUM4D_HEADER = ("omega_plus", "omega_minus") + SPECTRUM2D_HEADER
PROPCHECK_HEADER = ("omega", "lhs", "rhs", "residual")


def bells_rows(p: float, ns, index: int = 0):
    """Bell curves of ``p_i psi^(n)`` and ``P_i psi^(n)`` for a two-state ``psi``.

    ``psi = sqrt(p)|A_1> + sqrt(1-p)|A_2>``; ``k`` counts ``|A_1>``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    c = np.array([np.sqrt(p), np.sqrt(1.0 - p)])
    rows = []
    for n in ns:
        comps, state, projected = bell_curves(c, index, int(n))
        for row, a, b in zip(comps, state, projected):
            rows.append((int(n), int(row[index]), float(a), float(b)))
    return BELLS_HEADER, rows


def osc_rows(thetas, phases):
    """``P+`` and ``P-`` against the phase ``dE t``."""
    phases = np.asarray(phases, dtype=float)
    rows = []
    for th in thetas:
        pp = np.atleast_1d(osc.p_plus(osc.TwoStateParams(float(th), 1.0, 0.0), phases))
        for x, a in zip(phases, pp):
            rows.append((float(th), float(x), float(a), float(1.0 - a)))
    return OSC_HEADER, rows


def contour_rows(channel, levels, dm2_grid, theta_grid, L_over_E: float, models=("3m1", "3p1")):
    label = channel if isinstance(channel, str) else f"{channel[0]}->{channel[1]}"
    rows = []
    for contour in osc.contour_scan(channel, levels, dm2_grid, theta_grid, L_over_E, models):
        for d, th in contour.cells:
            rows.append((contour.level, float(d), float(th), contour.model, label))
    return CONTOUR_HEADER, rows


def _classification_rows(g, cl):
    return [
        (float(g), i, float(e.eigenvalue.real), float(e.eigenvalue.imag), e.norm_class.value)
        for i, e in enumerate(cl)
    ]


def _ghost_point(args):
    grid, potential, n_levels, null_tol = args
    return lat.ghost_oscillator_spectrum(grid, potential, n_levels, null_tol)


def spectrum2d_rows(g_values, grid, n_levels: int, base: "lat.PotentialSpec | None" = None, null_tol=1e-8, jobs=1):
    """Ghost-oscillator spectra over ``g``; errors propagate to the caller."""
    base = base or lat.PotentialSpec()
    tasks = [
        (grid, lat.PotentialSpec(base.k_lin, base.quad_coeff, float(g), base.lam), n_levels, null_tol)
        for g in g_values
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_ghost_point, tasks))
    else:
        results = [_ghost_point(t) for t in tasks]
    rows = []
    for g, cl in zip(g_values, results):
        rows.extend(_classification_rows(g, cl))
    return SPECTRUM2D_HEADER, rows


def spectrum4d_rows(spec: "lat.PaisUhlenbeckSpec", g_values, n_levels: int, lam_ratio=0.5, null_tol=1e-8, jobs=1):
    """Pais-Uhlenbeck scan rows and the list of failed scan points."""
    points = lat.pu_spectrum_scan(spec, g_values, n_levels, lam_ratio, null_tol, jobs=jobs)
    rows, failed = [], []
    for pt in points:
        if not pt.ok:
            failed.append(pt)
            continue
        rows.extend((spec.omega_plus, spec.omega_minus) + r for r in _classification_rows(pt.g, pt.classification))
    return SPECTRUM4D_HEADER, rows, failed


def propcheck_rows(omegas, omega_plus: float, omega_minus: float):
    rows = []
    for w in omegas:
        lhs, rhs, res = lat.propagator_identity(float(w), omega_plus, omega_minus)
        rows.append((float(w), lhs, rhs, res))
    return PROPCHECK_HEADER, rows
