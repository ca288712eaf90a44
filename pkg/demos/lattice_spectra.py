"""Lattice spectra of the ghost oscillator and the Pais-Uhlenbeck oscillator.

In the Dirac-Pauli representation both Hamiltonians are self-adjoint under an
indefinite metric. The free spectra are real and bounded below with
alternating norm signs; a cubic-plus-quartic coupling in the 4-derivative
theory turns some levels into conjugate null pairs.
"""

from krein_qm import oscillators as lat

grid = lat.Grid1D.symmetric(10.0, 201)
for g in (0.0, 0.2, 0.4):
    cl = lat.ghost_oscillator_spectrum(grid, lat.PotentialSpec(g=g), n_levels=6)
    levels = " ".join(f"{e.eigenvalue.real:.4f}{e.norm_class.value}" for e in cl)
    print(f"ghost oscillator g = {g}: {levels}")

spec = lat.PaisUhlenbeckSpec()
print("\nPais-Uhlenbeck, w+ = 1, w- = 1.5 (analytic free levels:",
      ", ".join(f"{e:g}" for e, _, _ in lat.pu_free_levels(1.0, 1.5, 6)) + ")")
for pt in lat.pu_spectrum_scan(spec, [0.0, 0.25, 0.5], n_levels=8):
    if not pt.ok:
        print(f"g = {pt.g}: failed ({pt.error})")
        continue
    levels = " ".join(f"{e.eigenvalue:.3f}{e.norm_class.value}" for e in pt.classification)
    print(f"g = {pt.g:.2f}: {pt.classification.n_null_pairs} null pairs | {levels}")

md = lat.mode_decomposition(1.0, 1.5)
print("\nclassical mode energies (q+, q+', q-, q-') coefficients:", md.mode_energies().round(4))
