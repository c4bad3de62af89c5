"""Unconditionally stable gradient flow.

The auxiliary-variable scheme keeps its modified energy non-increasing
at any step size.  This demo runs the same relaxation with step sizes
spanning four orders of magnitude, counts violations (none), and shows
the flow landing on the same state as direct minimization.
"""

import numpy as np

from nematicq import (
    BulkParams,
    Domain,
    LdGSystem,
    MinimizeOptions,
    flow_to_equilibrium,
    minimize,
    sav_init,
    sav_split,
    sav_step,
    seed_field,
)

domain = Domain(nx=16, ny=16, lambda2=5.0, bulk=BulkParams(-2.0 / 3.0, 2.0, 2.0), boundary="planar")
split = sav_split(domain)
start = seed_field(domain, "random(0.3)", seed=4)

m0 = split.modified_energy(start.flat, sav_init(start, split).r)
print(f"modified energy at the start: {m0:.4f}")
print("step size | modified energy after 200 steps | violations")
for dt in (1e-3, 1e-1, 1.0, 10.0):
    state = sav_init(start, split)
    m_prev = m0
    violations = 0
    for _ in range(200):
        state = sav_step(state, dt, split)
        m = split.modified_energy(state.field.flat, state.r)
        if m > m_prev + 1e-9:
            violations += 1
        m_prev = m
    print(f"{dt:9.0e} | {m_prev:31.10f} | {violations}")
print("descent never fails at any step size; very large steps still make")
print("slow real-time progress because the auxiliary scalar drifts, which")
print("is why the driver below re-anchors it periodically")

print("\nflow vs direct minimization from the same start:")
flowed, steps = flow_to_equilibrium(start, dt=0.5, tol_grad=1e-8)
system = LdGSystem(domain)
direct = minimize(system, start.flat, MinimizeOptions(tol_grad=1e-10, max_iters=50000))
rel = np.linalg.norm(flowed.flat - direct.x) / np.linalg.norm(direct.x)
print(f"  flow converged in {steps} steps to E = {flowed.energy():.10f}")
print(f"  minimizer E = {direct.energy:.10f}; relative field distance = {rel:.2e}")
