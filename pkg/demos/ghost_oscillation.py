"""Oscillation between a positive- and a negative-norm flavour.

Starting in |A->, the probability of finding |A+> never exceeds one half,
and its period average is (1 - cosh(4 theta)^-1/2) / 2.
"""

import numpy as np

from krein_qm import oscillation as osc

for theta in (0.25, 0.5, 1.0, 2.0):
    params = osc.TwoStateParams(theta)
    t = np.linspace(0.0, 2 * np.pi, 9)
    curve = " ".join(f"{p:.3f}" for p in osc.p_plus(params, t))
    avg = osc.time_average_p_plus(theta)
    oracle = max(abs(osc.evolve_oracle(params, x)[0] - osc.p_plus(params, x)) for x in t)
    print(f"theta = {theta:<4}: P+ over one period  {curve}")
    print(f"             max {osc.p_plus_max(theta):.4f}, average {avg.numerical:.6f}"
          f" (closed form {avg.closed_form:.6f}), |closed - evolved| = {oracle:.1e}")
