"""Active-to-sterile probability: negative-norm (3-1) vs ordinary (3+1) sterile state.

At the same mixing parameter the 3-1 probability saturates below one half,
so its contours bend differently in the (dm2, theta) plane.
"""

import numpy as np

from krein_qm import oscillation as osc

dm2 = np.geomspace(0.01, 100, 200)
theta = np.geomspace(0.001, 1.0, 200)
for contour in osc.contour_scan("as", [0.01, 0.1], dm2, theta):
    if len(contour) == 0:
        print(f"{contour.model} level {contour.level}: no crossing")
        continue
    lo = contour.cells[:, 0].min()
    th_lo = contour.cells[:, 1].min()
    print(f"{contour.model} level {contour.level}: {len(contour)} cells, reaches dm2 = {lo:.3g} eV^2, theta = {th_lo:.3g}")

params = osc.SterileParams(theta_es=0.3, theta_mus=0.2, dm2=1.0, L_over_E=1.0)
S = params.S
print(f"\nS(1 eV^2, 1 km/GeV) = {S:.6f}")
print(f"P(mu->e) = {osc.prob_3m1(('mu', 'e'), S, params):.5f}, P(e->mu) = {osc.prob_3m1(('e', 'mu'), S, params):.5f}")
