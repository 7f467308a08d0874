"""Numerical experiments with locally constrained curvature flows in hyperbolic space."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .hypgeom import BallTables, Profile, invert_monotone, profile, sphere_area  # noqa: F401
from .surface import RadialGraph, geometry, make_graph, make_perturbed_sphere, make_sphere  # noqa: F401
from .functionals import FunctionalReport, functional_report, minkowski_residuals, quermassintegrals  # noqa: F401
from .flow import FlowSpec, TimeSeries, run, speed, stable_dt, step  # noqa: F401
from .verify import decay_fit, identity_battery, inequality_suite, monotonicity_verdict  # noqa: F401
from .config import RunConfig, load_config  # noqa: F401
