"""Moments of the accumulated phase difference.

For a fixed level pair the random phase X(t) = chi_theta - chi_theta'
is gaussian with variance lambda(t), so its even moments follow the
double-factorial ladder and the odd ones vanish.  The sampler is checked
against that here, together with the characteristic function
E[exp(-iX)] = exp(-lambda/2) that drives every off-diagonal element.

Same table via the CLI:

    noisytime moments --config src/noisytime/scenarios/correlated_tau.yaml \
        --theta 0.37 --theta-prime 2.03 --out out/demo5
"""

import numpy as np

from noisytime import (
    correlated_model,
    lambda_pair,
    moment_report,
    sample_phase_differences,
)

MODEL = correlated_model(0.8, 1.0)
T = 1.0
THETA, THETA_PRIME = 0.37, 2.03
N_TRAJ = 50000

lam = lambda_pair(MODEL, T, THETA, THETA_PRIME)
print(f"level pair ({THETA}, {THETA_PRIME}) at t = {T}: lambda = {lam:.6f}")
print()

rows = moment_report(MODEL, t=T, theta=THETA, theta_prime=THETA_PRIME,
                     n_traj=N_TRAJ, seed=505, max_order=6)
print(f"{'order':>5} {'empirical':>12} {'predicted':>12} {'stderr':>10} {'z':>7}")
for row in rows:
    z = (row.empirical - row.predicted) / row.stderr if row.stderr > 0 else 0.0
    print(f"{row.order:5d} {row.empirical:12.6f} {row.predicted:12.6f}"
          f" {row.stderr:10.6f} {z:7.2f}")

# the same samples resum to the coherence damping factor
samples = sample_phase_differences(MODEL, T, THETA, THETA_PRIME,
                                   n_traj=N_TRAJ, seed=505)
empirical_cf = np.mean(np.exp(-1j * samples))
print()
print(f"E[exp(-iX)] sampled:   {empirical_cf.real:.6f} {empirical_cf.imag:+.6f}i")
print(f"exp(-lambda/2) exact:  {np.exp(-lam / 2):.6f}")
