"""Locally constrained curvature flows of radial graphs.

Two families of normal speed are supported:

* ``classical``: ``eta = lambda' E_{m-1}(kappa) / E_m(kappa) - u``
* ``shifted``:   ``eta = (lambda' - u) E_{m-1}(kt) / E_m(kt) - u``

with ``kt = kappa - 1``.  The radial function evolves by
``dr/dt = eta v`` and is advanced with explicit Runge-Kutta schemes under
a parabolic time-step bound, halving the step whenever a stage leaves the
admissible set.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConeViolationError, ConfigError, DomainError, GeometryError, HypflowError
from .functionals import FunctionalReport, functional_report
from .surface import geometry
from .symfun import check_cone, elementary_all, newton_tensor_diag

__all__ = [
    "FAMILIES",
    "INTEGRATORS",
    "STATUSES",
    "FlowSpec",
    "FlowFailure",
    "Record",
    "TimeSeries",
    "speed",
    "stable_dt",
    "step",
    "run",
]

FAMILIES = ("classical", "shifted")
INTEGRATORS = ("euler", "rk2", "rk4")
STATUSES = ("converged", "horizon", "blowup", "convexity_lost")

DT_FLOOR = 1e-12
CONVEXITY_SLACK = -1e-6
C0_TOL = 1e-6
MAX_HALVINGS = 20


@dataclass(frozen=True)
class FlowSpec:
    family: str = "classical"
    m: int = 1
    integrator: str = "rk4"
    cfl_safety: float = 0.5
    t_max: float = 10.0
    stop_grad_sq: float = 1e-10
    record_every: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ConfigError(f"quotient index m must be a positive integer, got {self.m!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigError(f"t_max must be positive and finite, got {self.t_max}")
        if not self.stop_grad_sq > 0:
            raise ConfigError("stop_grad_sq must be positive")
        if self.record_every is None:
            object.__setattr__(self, "record_every", self.t_max / 200.0)
        elif not self.record_every > 0:
            raise ConfigError("record_every must be positive")

    def check_dimension(self, n):
        if self.m > n:
            raise ConfigError(f"quotient index m={self.m} exceeds n={n}")


class FlowFailure(HypflowError):
    """A step could not be completed even after repeated halving.

    ``status`` is ``blowup`` or ``convexity_lost``.
    """

    def __init__(self, message, status):
        super().__init__(message)
        self.status = status


def _curvatures(fields, spec):
    return fields.kappa if spec.family == "classical" else fields.kappa_shift


def _numerator(fields, spec):
    return fields.dlam if spec.family == "classical" else fields.dlam - fields.u


def speed(fields, spec):
    """Normal speed on the grid.

    Raises :class:`ConeViolationError` if the relevant curvature tuple leaves
    ``Gamma_m^+`` anywhere; the error carries the flat grid location.
    """
    kap = _curvatures(fields, spec)
    m = spec.m
    e = elementary_all(kap)
    check_cone(kap, m, e=e)
    return _numerator(fields, spec) * e[..., m - 1] / e[..., m] - fields.u


def quotient_values(fields, spec):
    """``F = E_m / E_{m-1}`` of the family's curvature tuple."""
    e = elementary_all(_curvatures(fields, spec))
    with np.errstate(divide="ignore", invalid="ignore"):
        return e[..., spec.m] / e[..., spec.m - 1]


def _grid_spacing(fields, dtheta):
    if fields.mode == "full2d":
        npsi = fields.r.shape[1]
        theta0 = 0.5 * dtheta
        return min(dtheta, math.sin(theta0) * 2.0 * math.pi / npsi)
    return dtheta


def stable_dt(fields, spec, dtheta):
    """Explicit time step from a parabolic stability estimate.

    The diffusion coefficient of the linearized speed is bounded by
    ``D = max (A / F^2) max_i dF/dkappa_i / lambda^2`` with ``A`` the
    speed numerator, and ``dt = cfl_safety h^2 / (2 n D)``.  The result is
    floored at ``DT_FLOOR`` rather than allowed to reach zero.
    """
    kap = _curvatures(fields, spec)
    m = spec.m
    e = elementary_all(kap)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        em, em1 = e[..., m, None], e[..., m - 1, None]
        dF = (newton_tensor_diag(kap, m) * em1 - em * newton_tensor_diag(kap, m - 1)) / em1**2
        F = e[..., m] / e[..., m - 1]
        coef = _numerator(fields, spec) / F**2 * np.max(np.abs(dF), axis=-1) / fields.lam**2
        coef = coef * fields.v
    D = float(np.max(coef)) if np.all(np.isfinite(coef)) else math.inf
    h = _grid_spacing(fields, dtheta)
    if not D > 0:
        return DT_FLOOR if D != 0 else math.inf
    return max(spec.cfl_safety * h * h / (2.0 * fields.n * D), DT_FLOOR)


_TABLEAUX = {
    "euler": ([], [1.0]),
    "rk2": ([[1.0]], [0.5, 0.5]),
    "rk4": ([[0.5], [0.0, 0.5], [0.0, 0.0, 1.0]], [1 / 6, 1 / 3, 1 / 3, 1 / 6]),
}


def _rate(g, spec):
    fields = geometry(g)
    return speed(fields, spec) * fields.v


def _attempt(g, spec, dt, convexity_floor):
    """One explicit step; returns the new graph or raises with a reason."""
    a, b = _TABLEAUX[spec.integrator]
    stages = [_rate(g, spec)]
    for row in a:
        r = g.r + dt * sum(c * k for c, k in zip(row, stages))
        stages.append(_rate(g.with_r(r), spec))
    r_new = g.r + dt * sum(c * k for c, k in zip(b, stages))
    g_new = g.with_r(r_new)
    fields = geometry(g_new)
    check_cone(_curvatures(fields, spec), spec.m)
    mk = float(np.min(fields.kappa_shift))
    if mk < convexity_floor:
        raise _ConvexityDrop(mk)
    return g_new, fields


class _ConvexityDrop(Exception):
    def __init__(self, value):
        super().__init__(f"min shifted curvature {value:.3e} below floor")
        self.value = value


def step(g, spec, dt, *, convexity_floor=CONVEXITY_SLACK, return_fields=False):
    """Advance ``g`` by one explicit step of size at most ``dt``.

    A step whose stages leave the cone, produce non-finite values or whose
    result has ``min kt`` below ``convexity_floor`` is retried with half the
    step, up to ``MAX_HALVINGS`` times.

    Returns
    -------
    (RadialGraph, float)
        The new graph and the step size actually used.  With
        ``return_fields`` the geometry of the new graph is appended.

    Raises
    ------
    FlowFailure
        When every retry failed.
    """
    reason, status = "", "blowup"
    for _ in range(MAX_HALVINGS + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                g_new, fields = _attempt(g, spec, dt, convexity_floor)
        except _ConvexityDrop as exc:
            reason, status = str(exc), "convexity_lost"
        except (ConeViolationError, GeometryError, DomainError) as exc:
            reason, status = str(exc), "blowup"
        else:
            return (g_new, dt, fields) if return_fields else (g_new, dt)
        dt = 0.5 * dt
    raise FlowFailure(f"step rejected after {MAX_HALVINGS} halvings: {reason}", status)


@dataclass
class Record:
    t: float
    report: FunctionalReport
    min_shift_curv: float
    max_grad_sq: float
    r_min: float
    r_max: float
    dt: float
    F_min: float
    F_max: float


@dataclass
class TimeSeries:
    """Recorded history of a flow run."""

    spec: FlowSpec
    records: list = field(default_factory=list)
    status: str = "horizon"
    message: str = ""
    steps: int = 0
    rejected_dt: int = 0
    dt_floor_hit: bool = False
    c0_ok: bool = True
    c0_violation: float = 0.0

    def __len__(self):
        return len(self.records)

    @property
    def t(self):
        return np.array([rec.t for rec in self.records])

    def values(self, key):
        """Time series of a scalar by name.

        Accepts record attributes (``max_grad_sq``, ``r_min``, ...) and any
        flat key of :meth:`FunctionalReport.to_dict` (``W2``, ``Wt1``,
        ``int_dlam_E_3``, ...).
        """
        if key in Record.__dataclass_fields__ and key != "report":
            return np.array([getattr(rec, key) for rec in self.records])
        return np.array([rec.report.get(key) for rec in self.records])

    @property
    def final(self):
        return self.records[-1]


def _make_record(t, g, fields, spec, dt):
    F = quotient_values(fields, spec)
    return Record(
        t=float(t),
        report=functional_report(g, fields),
        min_shift_curv=float(np.min(fields.kappa_shift)),
        max_grad_sq=float(np.max(fields.grad_sq)),
        r_min=float(np.min(g.r)),
        r_max=float(np.max(g.r)),
        dt=float(dt),
        F_min=float(np.min(F)),
        F_max=float(np.max(F)),
    )


def run(g0, spec, *, progress=None):
    """Integrate the flow from ``g0``.

    Stops when ``max |D phi|^2 < stop_grad_sq`` (``converged``), when
    ``t_max`` is reached (``horizon``), or when a step fails (``blowup`` /
    ``convexity_lost``; the last record then holds the last good state).
    Also tracks whether the radial function stays within its initial
    range, up to ``C0_TOL``.

    Returns ``(TimeSeries, RadialGraph)``.
    """
    spec.check_dimension(g0.n)
    fields = geometry(g0)
    check_cone(_curvatures(fields, spec), spec.m)
    series = TimeSeries(spec=spec)
    floor = min(CONVEXITY_SLACK, float(np.min(fields.kappa_shift)))
    r_lo, r_hi = float(np.min(g0.r)), float(np.max(g0.r))

    g, t, dt_used = g0, 0.0, 0.0
    series.records.append(_make_record(t, g, fields, spec, dt_used))
    if series.final.max_grad_sq < spec.stop_grad_sq:
        series.status = "converged"
        return series, g

    n_rec = 1
    next_record = spec.record_every
    while True:
        dt = stable_dt(fields, spec, g.dtheta)
        if dt <= DT_FLOOR:
            series.dt_floor_hit = True
        target = min(next_record, spec.t_max)
        landing = t + dt >= target - 1e-12 * max(1.0, target)
        if landing:
            dt = target - t
        try:
            g_new, used, fields_new = step(g, spec, dt, convexity_floor=floor, return_fields=True)
        except FlowFailure as exc:
            series.status = exc.status
            series.message = str(exc)
            if t > series.final.t:
                series.records.append(_make_record(t, g, fields, spec, dt_used))
            break
        if used < dt:
            series.rejected_dt += 1
            landing = False
        g, fields = g_new, fields_new
        t = target if landing else t + used
        dt_used = used
        series.steps += 1

        over = max(r_lo - float(np.min(g.r)), float(np.max(g.r)) - r_hi)
        if over > C0_TOL:
            series.c0_ok = False
        series.c0_violation = max(series.c0_violation, over)

        done = float(np.max(fields.grad_sq)) < spec.stop_grad_sq
        if landing or done:
            series.records.append(_make_record(t, g, fields, spec, dt_used))
            if progress is not None:
                progress(series.final)
            if landing:
                n_rec += 1
                next_record = n_rec * spec.record_every
        if done:
            series.status = "converged"
            break
        if t >= spec.t_max * (1 - 1e-12):
            series.status = "horizon"
            break
    return series, g
