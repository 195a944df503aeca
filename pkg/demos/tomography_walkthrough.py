# Nine-basis tomography
#
# Each photon is measured along x, y or z, giving nine coincidence tables.
# Linear inversion recovers the density matrix; negative eigenvalues from
# shot noise are clipped.

import numpy as np

from bellsim import qcore, tomography

np.set_printoptions(precision=3, suppress=True)

for p in (1.0, 0.6, 0.0):
    res = tomography.reconstruct(qcore.colored_state(p), shots_per_basis=10_000, seed=7)
    print(f"p = {p}")
    print(res.rho_hat.matrix.real)
    print(f"fidelity {res.fidelity_to_reference:.4f}  purity {res.purity:.4f}  "
          f"fitted p {res.fitted_p:.3f}  min raw eigenvalue {res.min_eig_raw:+.4f}")
    print()

# The largest Pauli coefficients show the structure directly: XX = p, YY = -p, ZZ = 1.

coeffs = tomography.pauli_coefficients(tomography.reconstruct(qcore.colored_state(0.6)).rho_hat)
for key in ("XX", "YY", "ZZ", "XZ"):
    print(key, round(coeffs[key], 6))
