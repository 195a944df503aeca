# Colored versus white noise
#
# Two noisy versions of the maximally entangled pair: one loses only its
# o/e coherence (colored), the other is mixed with the identity (Werner).
# We compare the best CHSH value each one reaches.

import math

import numpy as np

from bellsim import bellopt, qcore

# The restricted optimizer works on the closed form, so a full p grid is cheap.

ps = np.linspace(0.0, 1.0, 11)
print(" p     colored   werner    2sqrt(1+p^2)")
for p in ps:
    colored = bellopt.maximize_restricted(p).value
    white = bellopt.maximize_state_restricted(qcore.werner_state(p)).value
    print(f"{p:4.1f}  {colored:8.5f}  {white:8.5f}  {2 * math.sqrt(1 + p * p):8.5f}")

# The colored family violates for every p > 0, the Werner family only above
# 1/sqrt(2).  Bisection on the correlation-matrix margin finds both thresholds.

print("colored threshold:", bellopt.violation_threshold("colored"))
print("white threshold:  ", bellopt.violation_threshold("white"), "vs", 1 / math.sqrt(2))

# With all four analyzer angles free, the optimum matches the correlation
# matrix bound.  The restricted family sits just below it for 0 < p < 1.

rho = qcore.colored_state(0.5)
print("restricted:", bellopt.maximize_restricted(0.5).value)
print("general:   ", bellopt.maximize_general(rho).value)
print("bound:     ", bellopt.horodecki_bound(rho))
