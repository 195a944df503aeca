# The Bell value over the (theta, phi) plane
#
# For the restricted analyzer family the CHSH value has a closed form.
# We tabulate it coarsely and locate the peak for a few p.

import math

import numpy as np

from bellsim import bellopt

grid = np.radians(np.arange(-90, 90, 0.5))
for p in (1.0, 0.6, 0.0):
    surf = bellopt.beta_surface(p, grid, grid)
    i, j = np.unravel_index(np.argmax(surf), surf.shape)
    res = bellopt.maximize_restricted(p)
    print(f"p = {p}: grid peak {surf[i, j]:.5f} at ({math.degrees(grid[i]):.1f}, {math.degrees(grid[j]):.1f}) deg; "
          f"refined {res.value:.7f} at ({math.degrees(res.settings.theta):.3f}, {math.degrees(res.settings.phi):.3f}) deg")

# A coarse text rendering of p = 0.6, rows = theta, columns = phi.

coarse = np.radians(np.arange(-90, 90, 15))
surf = bellopt.beta_surface(0.6, coarse, coarse)
print("      " + "".join(f"{d:6.0f}" for d in np.degrees(coarse)))
for th, row in zip(np.degrees(coarse), surf):
    print(f"{th:6.0f}" + "".join(f"{v:6.2f}" for v in row))
