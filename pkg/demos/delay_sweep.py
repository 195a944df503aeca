# Sweeping the trombone delay
#
# The delay between the o and e photons sets the coherence weight p(tau).
# Here we simulate finite-count CHSH runs across the window.

import numpy as np

from bellsim import countsim, sourcemodel

params = sourcemodel.SourceParams(crystal_length_mm=3.0, d_g_fs_per_mm=200.0, kappa_value=1.0)
print("kappa =", params.kappa, " half window (fs) =", params.half_window)

# p(tau) is a triangle damped by a Gaussian; it vanishes at the window edge.

taus = np.linspace(-350, 350, 15)
for pt in sourcemodel.delay_sweep(taus, params):
    print(f"tau = {pt.tau:7.1f} fs   p = {pt.p:.4f}")

# Each delay gets its own child seed, so rows are reproducible on their own.

rows = countsim.experiment_sweep(params, taus, shots=100_000, seed=1, workers=4)
print()
print(",".join(countsim.SweepRecord.FIELDS))
for r in rows:
    print(f"{r.tau_fs:.1f},{r.p_model:.4f},{r.beta_measured:.4f},{r.beta_stderr:.4f},"
          f"{r.beta_model:.4f},{r.theta_deg:.2f},{r.phi_deg:.2f}")
