"""Run configuration: a JSON document describing one reproducible run."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, HypflowError
from .flow import FlowSpec
from .surface import HCONVEX_TOL, MIN_RESOLUTION, MODES, geometry, make_graph, make_perturbed_sphere, make_sphere, polar_grid
from .verify import EQ_TOL, VIOL_TOL

__all__ = ["InitialData", "Tolerances", "RunConfig", "load_config", "INITIAL_KINDS"]

INITIAL_KINDS = ("sphere", "perturbed", "random")

_TOP_KEYS = {"n", "mode", "grid_N", "initial", "flow", "tolerances", "seed", "out_dir"}
_REQUIRED = {"n", "mode", "grid_N", "initial"}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _number(x, name):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{name} must be a finite number, got {x!r}")
    return float(x)


def _integer(x, name):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{name} must be an integer, got {x!r}")
    return x


@dataclass(frozen=True)
class InitialData:
    """Initial surface.

    ``sphere``: radius ``r0``.  ``perturbed``: ``r0 + eps cos(freq theta)``
    (sectoral in ``full2d``).  ``random``: ``r0`` plus a sum of zonal modes
    ``1..freq`` with seeded random coefficients, scaled so the largest
    deviation is ``eps``.
    """

    kind: str = "perturbed"
    r0: float = 1.0
    eps: float = 0.05
    freq: int = 2

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if not _number(self.r0, "initial.r0") > 0:
            raise ConfigError("initial.r0 must be positive")
        if not 0 <= _number(self.eps, "initial.eps") < self.r0:
            raise ConfigError("initial.eps must lie in [0, r0)")
        if _integer(self.freq, "initial.freq") < 0:
            raise ConfigError("initial.freq must be >= 0")


@dataclass(frozen=True)
class Tolerances:
    eq_tol: float = EQ_TOL
    viol_tol: float = VIOL_TOL

    def __post_init__(self):
        for name in ("eq_tol", "viol_tol"):
            if not _number(getattr(self, name), f"tolerances.{name}") >= 0:
                raise ConfigError(f"tolerances.{name} must be nonnegative")


@dataclass(frozen=True)
class RunConfig:
    n: int
    mode: str
    grid_N: int
    initial: InitialData
    flow: FlowSpec = field(default_factory=FlowSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    out_dir: str = "."

    def __post_init__(self):
        if _integer(self.n, "n") < 2:
            raise ConfigError("n must be >= 2")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "full2d" and self.n != 2:
            raise ConfigError("full2d mode requires n = 2")
        if _integer(self.grid_N, "grid_N") < MIN_RESOLUTION:
            raise ConfigError(f"grid_N must be >= {MIN_RESOLUTION}")
        _integer(self.seed, "seed")
        if not isinstance(self.out_dir, str):
            raise ConfigError("out_dir must be a string")
        self.flow.check_dimension(self.n)

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, _TOP_KEYS, "config")
        missing = _REQUIRED - set(d)
        if missing:
            raise ConfigError(f"missing key(s) in config: {', '.join(sorted(missing))}")
        ini = d["initial"]
        _check_keys(ini, InitialData.__dataclass_fields__, "initial")
        flow = d.get("flow", {})
        _check_keys(flow, FlowSpec.__dataclass_fields__, "flow")
        tol = d.get("tolerances", {})
        _check_keys(tol, Tolerances.__dataclass_fields__, "tolerances")
        try:
            return cls(
                n=d["n"],
                mode=d["mode"],
                grid_N=d["grid_N"],
                initial=InitialData(**ini),
                flow=FlowSpec(**flow),
                tolerances=Tolerances(**tol),
                seed=d.get("seed", 0),
                out_dir=d.get("out_dir", "."),
            )
        except TypeError as exc:  # wrong value types reaching comparisons
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def initial_surface(self):
        """Build the initial radial graph; errors are reported as ConfigError."""
        ini = self.initial
        try:
            if ini.kind == "sphere":
                return make_sphere(self.n, self.mode, self.grid_N, ini.r0)
            if ini.kind == "perturbed":
                return make_perturbed_sphere(self.n, self.mode, self.grid_N, ini.r0, ini.eps, ini.freq)
            return self._random_surface()
        except HypflowError as exc:
            raise ConfigError(f"initial surface rejected: {exc}") from exc

    def _random_surface(self):
        ini = self.initial
        rng = np.random.default_rng(self.seed)
        coef = rng.normal(size=max(ini.freq, 1))
        phase = rng.uniform(0, 2 * math.pi, size=coef.size)

        def shape(theta, psi=None):
            out = np.zeros_like(theta)
            for j, (c, p) in enumerate(zip(coef, phase), start=1):
                if psi is None:
                    out = out + c * np.cos(j * theta)
                else:
                    out = out + c * np.sin(theta) ** j * np.cos(j * psi + p)
            return out

        theta = polar_grid(self.grid_N)
        if self.mode == "full2d":
            psi = np.arange(2 * self.grid_N) * math.pi / self.grid_N
            amp = float(np.max(np.abs(shape(*np.meshgrid(theta, psi, indexing="ij")))))
        else:
            amp = float(np.max(np.abs(shape(theta))))
        scale = ini.eps / amp if amp > 0 else 0.0
        g = make_graph(self.n, self.mode, self.grid_N, lambda *a: ini.r0 + scale * shape(*a))
        mk = float(np.min(geometry(g).kappa_shift))
        if mk < -HCONVEX_TOL:
            raise ConfigError(f"random initial surface is not h-convex (min shifted curvature {mk:.3e})")
        return g


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return RunConfig.from_dict(data)
