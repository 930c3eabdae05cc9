"""Where the semigroup law breaks.

Propagating for t+s must equal propagating for s and then t whenever
the noise statistics are time independent.  A step in the amplitude
profile sigma(t) breaks that composition for windows straddling the
step, which is the operational signature of non-Markovian evolution.
"""

import numpy as np

from noisytime import (
    DensityMatrix,
    HermitianOperator,
    NoiseModel,
    SigmaThetaPreset,
    SigmaTimePreset,
    dephasing_model,
    eigendecompose,
    semigroup_defect,
)

decomposition = eigendecompose(HermitianOperator(np.diag([0.0, 1.0])))
rho0 = DensityMatrix.pure([1.0, 1.0])

# sigma jumps from 0.4 to 1.6 at t = 1
stepped = NoiseModel(
    sigma_theta=SigmaThetaPreset.linear(1.0),
    sigma_time=SigmaTimePreset.piecewise_constant([1.0], [0.4, 1.6]),
)
flat = dephasing_model(0.5)

print("max entrywise defect |evolve(t+s) - compose(t after s)|")
print(f"{'t':>5} {'s':>5} {'stepped sigma':>14} {'constant sigma':>15}")
for t, s in ((0.3, 0.3), (0.8, 0.8), (0.5, 1.5), (1.2, 1.2)):
    d_step = semigroup_defect(decomposition, stepped, rho0, t, s)
    d_flat = semigroup_defect(decomposition, flat, rho0, t, s)
    note = "  <- straddles the step" if s < 1.0 < t + s else ""
    print(f"{t:5.1f} {s:5.1f} {d_step:14.3e} {d_flat:15.3e}{note}")

print()
print("windows entirely inside one sigma region compose exactly;")
print("any window crossing t = 1 picks up a finite defect.")
