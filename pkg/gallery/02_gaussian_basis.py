# coding: utf-8

# # Functions of one variable on a data range
#
# Unknown reactions are stored as sums of Gaussians centered on an interval
# J.  Outside J the function is frozen at its end values, so it can be
# evaluated anywhere but only J carries information.

# In[1]:

import numpy as np

from rdident import RangeInterval, fit_from_pairs
from rdident.basis import clamp

J = RangeInterval(0.0, 1.2)
s = np.linspace(0, 1.2, 300)
target = 2 * s * (1 - s) * (s - 0.9)
f = fit_from_pairs(s, target, J)        # 40 centers, tiny ridge by default
probe = np.linspace(0, 1.2, 200)
print("max fit error:", np.max(np.abs(f(probe) - 2 * probe * (1 - probe) * (probe - 0.9))))

# Arguments are clamped before evaluation.  The derivative is zero off J.

# In[2]:

outside = np.array([-3.0, -0.1, 1.5, 10.0])
print(clamp(outside, J))
print(f(outside), f(np.array([0.0, 1.2])))
print(f.derivative(outside))

# The abscissae can come in any order and may repeat: a non-monotone profile
# g(x) visits the same value several times.  Least squares just averages
# what it sees at each point.

# In[3]:

x = np.linspace(0, 1, 400)
g = 0.6 + 0.5 * np.sin(3 * np.pi * x)          # goes up and down three times
noisy = np.cos(2 * g) + 0.01 * np.random.default_rng(0).standard_normal(x.size)
h = fit_from_pairs(g, noisy, RangeInterval(g.min(), g.max()))
grid = np.linspace(g.min(), g.max(), 7)
print(np.c_[grid, h(grid), np.cos(2 * grid)])

# Each function can be written out as 100 stored values on J, the form used
# for iterate histories.

# In[4]:

prof = f.profile()
print(prof.abscissae[:3], prof.values[:3])
