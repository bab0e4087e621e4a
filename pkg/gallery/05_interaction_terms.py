# coding: utf-8

# # Recovering the interaction terms
#
# Now the reactions are known and the interaction functions phi1, phi2 of
# the coupling w = u*v are unknown.  Both are fitted on the range of w
# along the data.

# In[1]:

import numpy as np

from rdident import Grid, InverseProblem, presets, run, solve_forward
from rdident.data import TIME_TRACE, invertibility_margin, sample_measurement, smooth_temporal

grid = Grid(200, 300)


def trace_problem(spec, iters=5):
    traj = solve_forward(spec, grid)
    m = sample_measurement(traj, TIME_TRACE)
    d = smooth_temporal(m, grid.t, traj.values[:, 0, -1])
    print("invertibility margin:", invertibility_margin(d, spec.w))
    return InverseProblem(spec, grid, d, m, max_iters=iters, truth=spec.unknowns())

# The rate depends on the size of the multiplier.

# In[2]:

for beta in (-1.0, 0.1, 1.0):
    res = run(trace_problem(presets.interaction(beta)))
    print(f"beta={beta:g}: {res.verdict.value}, q={res.contraction_q:.2f},",
          "errors", np.round(res.error_history[-1], 4))

# A Brusselator-type coupling w = u^2 v with opposite multipliers.

# In[3]:

prob = trace_problem(presets.brusselator())
res = run(prob)
print(res.verdict.value, np.round(res.error_history, 4))
print("range of w:", prob.intervals[0])

# Zero multipliers make the interaction invisible, and the problem refuses
# to start.

# In[4]:

from rdident.errors import ZeroMultiplier

try:
    trace_problem(presets.interaction(0.0))
except ZeroMultiplier as exc:
    print("refused:", exc)
