"""Reconstruction of unknown reaction terms in two-species reaction-diffusion systems.

The forward solver, data smoothing, the fixed-point reconstruction and the
hypothesis checks are importable from here; the ``rdident`` command wraps
them for YAML-described experiments.
"""

from .basis import RangedFn, RangeInterval, StoredProfile, clamp, fit_from_pairs
from .data import (FINAL_TIME, TIME_TRACE, Measurement, SmoothedData, sample_measurement,
                   smooth_spatial, smooth_temporal)
from .diagnostics import (competing_beta_bound, data_intervals_from, decay_fit,
                          dissipativity_check, range_condition_check)
from .errors import (BlowUp, ConfigError, DegenerateRange, ForwardFailure, GridTooCoarse,
                     IllConditioned, NewtonDivergence, NotDissipative, RankDeficient,
                     RDIdentError, UnsupportedBC, ZeroMultiplier)
from .forward import solve_forward
from .inversion import InverseProblem, ReconstructionResult, Verdict, run
from .model import (BC, Coupling, Dirichlet, Grid, Neumann, Robin, Source, SystemSpec,
                    Trajectory, Univariate)

__version__ = "0.1.0"
