# coding: utf-8

# # Recovering both reactions
#
# The true reactions are f1(u) = 2u(1-u)(u-0.9) and a bump in v.  Starting
# from zero functions, each sweep solves the PDEs with the current guesses
# and reads off improved ones from the data.

# In[1]:

import numpy as np

from rdident import Grid, InverseProblem, presets, run, solve_forward
from rdident.data import FINAL_TIME, TIME_TRACE, sample_measurement, smooth_spatial, smooth_temporal


def experiment(beta, mode, T=1.0, iters=8):
    spec = presets.competing_species(beta)
    grid = Grid(200, 300, T=T)
    traj = solve_forward(spec, grid)
    m = sample_measurement(traj, mode)
    if mode == FINAL_TIME:
        d = smooth_spatial(m, spec.bc, grid.x)
    else:
        d = smooth_temporal(m, grid.t, traj.values[:, 0, -1])
    return run(InverseProblem(spec, grid, d, m, max_iters=iters, truth=spec.unknowns()))

# Final-time data with a weak interaction converge steadily.

# In[2]:

res = experiment(0.3, FINAL_TIME)
print(res.verdict.value, "q =", round(res.contraction_q, 3))
print(np.round(res.error_history, 4))

# A stronger interaction breaks the scheme.  The run stops and reports it.

# In[3]:

res = experiment(1.0, FINAL_TIME, iters=4)
print(res.verdict.value, res.message)

# A shorter horizon brings beta=0.5 back into the converging regime.

# In[4]:

res = experiment(0.5, FINAL_TIME, T=0.75)
print(res.verdict.value, np.round(res.error_history[-1], 4))

# Trace data at x=1 tolerate larger interactions, up to somewhere between 1
# and 1.5.

# In[5]:

for beta in (1.0, 1.5):
    res = experiment(beta, TIME_TRACE, iters=10)
    print(beta, res.verdict.value, np.round(res.error_history[-1], 4))
