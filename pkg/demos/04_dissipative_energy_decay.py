"""Energy under randomized timing: conserved or not.

Noise that only randomizes the evolution time commutes with the
Hamiltonian, so Tr(rho H) stays put forever.  Feeding the propagator a
direct damping table with nonzero diagonal breaks that: populations
decay at their own rates, energy leaks, and the trace itself drifts
below one.  The machinery keeps working but flags the trace loss with a
warning, since no timing distribution reproduces such a table.
"""

import math
import warnings

import numpy as np

from noisytime import (
    DensityMatrix,
    HermitianOperator,
    averaged_state,
    correlated_model,
    direct_damping_model,
    eigendecompose,
    energy_expectation,
    lambda_pair,
)

# conserving case: Brownian timing noise on the same two levels
decomposition = eigendecompose(HermitianOperator(np.diag([1.0, 2.0])))
rho0 = DensityMatrix.pure([1.0, 1.0])
hamiltonian = decomposition.reconstruct()
brownian = correlated_model(0.8, 1.0)

e0 = energy_expectation(rho0, hamiltonian)
worst = max(
    abs(energy_expectation(averaged_state(decomposition, brownian, rho0, t), hamiltonian) - e0)
    for t in (0.5, 1.0, 2.0, 4.0)
)
print(f"Brownian timing noise: |Tr(rho H) - {e0:.1f}| stays below {worst:.1e}")
print()

# dissipative case: damping table with nonzero diagonal entries
table = [[0.6, 0.7], [0.7, 0.8]]
damped = direct_damping_model([1.0, 2.0], table)

print("direct damping table [[0.6, 0.7], [0.7, 0.8]]:")
print(f"{'t':>5} {'energy':>10} {'closed form':>12} {'trace':>8}")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # trace loss is the point here
    for t in (0.0, 1.0, 2.0, 4.0):
        state = averaged_state(decomposition, damped, rho0, t)
        energy = energy_expectation(state, hamiltonian)
        closed = sum(
            level * math.exp(-0.5 * lambda_pair(damped, t, level, level)) * 0.5
            for level in (1.0, 2.0)
        )
        trace = float(np.trace(state.matrix).real)
        print(f"{t:5.1f} {energy:10.6f} {closed:12.6f} {trace:8.4f}")

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    averaged_state(decomposition, damped, rho0, 1.0)
print()
print(f"warning raised for the dissipative table: {caught[0].category.__name__}")
