"""Warped-product primitives of hyperbolic space and geodesic-ball profiles.

Hyperbolic space is written as ``dr^2 + sinh(r)^2 g_{S^n}``.  The functions
here give the warping function and its relatives, the quermassintegrals of
geodesic balls as functions of the radius, and the comparison profiles used
on the right-hand side of the Alexandrov-Fenchel type inequalities, together
with a safeguarded inversion of those profiles.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, MonotonicityError, RangeError

__all__ = [
    "lam",
    "dlam",
    "Phi",
    "sphere_area",
    "sinh_power_integral",
    "ball_quermass",
    "ball_quermass_all",
    "ball_quermass_shifted",
    "Profile",
    "profile",
    "invert_monotone",
    "BallTables",
    "PROFILE_KINDS",
]

PROFILE_KINDS = ("f", "ft", "g", "h", "ht", "gt")

_GL_ORDER = 16


def lam(r):
    """Warping function ``sinh r``."""
    return np.sinh(r)


def dlam(r):
    """Derivative of the warping function, ``cosh r``."""
    return np.cosh(r)


def Phi(r):
    """Potential of the conformal field, ``cosh r - 1`` (so ``Phi' = sinh``)."""
    # half-angle form keeps relative accuracy near r = 0
    return 2.0 * np.sinh(np.asarray(r, dtype=float) / 2.0) ** 2


@lru_cache(maxsize=None)
def sphere_area(n):
    """Area of the unit ``n``-sphere in ``R^{n+1}``, via log-Gamma."""
    if n < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {n}")
    return math.exp(math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi) - math.lgamma(0.5 * (n + 1)))


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    # map to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def sinh_power_integral(n, r, decay=0):
    """Return ``int_0^r exp(-decay s) sinh(s)^n ds`` for scalar or array ``r >= 0``.

    Composite Gauss-Legendre on equal panels; the panel count grows with
    ``max(n, decay) * max(r)`` so that the integrand never varies by more
    than a factor of about ``e^2`` across a panel.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    rmax = float(np.max(r)) if r.size else 0.0
    panels = max(1, int(math.ceil(rmax * max(n, decay, 1) / 2.0)))
    x, w = _gauss_legendre(_GL_ORDER)
    # nodes in [0, 1] for all panels
    edges = np.arange(panels)[:, None]
    nodes = ((edges + x[None, :]) / panels).ravel()
    weights = np.tile(w, panels) / panels
    s = r[..., None] * nodes
    vals = _decayed_sinh_power(n, decay, s) if decay else np.sinh(s) ** n
    return r * np.sum(vals * weights, axis=-1)


def _decayed_sinh_power(p, decay, s):
    """``exp(-decay s) sinh(s)^p`` without forming ``0 * inf`` at large ``s``."""
    s = np.asarray(s, dtype=float)
    return 0.5**p * (-np.expm1(-2.0 * s)) ** p * np.exp((p - decay) * s)


def _check_index(n, k, lo=0, hi=None):
    if n < 2:
        raise DomainError(f"dimension n must be >= 2, got {n}")
    hi = n if hi is None else hi
    if not (lo <= k <= hi):
        raise DomainError(f"index k={k} outside [{lo}, {hi}] for n={n}")


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("radius must be > 0")
    return r


def ball_quermass_all(n, r):
    """Quermassintegrals ``f_0(r), ..., f_n(r)`` of the geodesic ball.

    Returns an array with a trailing axis of length ``n + 1``.  Only ``f_0``
    needs quadrature; the rest follow from ``f_1 = |S_r| / n`` and the
    recursion ``f_{k+1} = (int E_k - k f_{k-1}) / (n - k)`` where, on the
    sphere, ``int E_k dmu = omega_n cosh^k sinh^{n-k}``.
    """
    _check_index(n, 0)
    r = _check_radius(r)
    wn = sphere_area(n)
    s, c = np.sinh(r), np.cosh(r)
    out = np.empty(r.shape + (n + 1,))
    out[..., 0] = wn * sinh_power_integral(n, r)
    out[..., 1] = wn * s**n / n
    for k in range(1, n):
        total_ek = wn * c**k * s ** (n - k)
        out[..., k + 1] = (total_ek - k * out[..., k - 1]) / (n - k)
    return out


def ball_quermass(n, k, r):
    """``f_k(r) = W_k(B_r)`` for ``0 <= k <= n``."""
    _check_index(n, k)
    out = ball_quermass_all(n, r)[..., k]
    return float(out) if out.ndim == 0 else out


def ball_quermass_shifted(n, k, r):
    """Shifted profile ``f~_k = sum_i (-1)^{k-i} C(k, i) f_i``.

    The alternating sum cancels badly once ``n r`` is large, so it is
    evaluated instead as ``omega_n int_0^r exp(-k s) sinh^{n-k} s ds``
    (both vanish at 0 and share the derivative).
    """
    _check_index(n, k)
    r = _check_radius(r)
    out = sphere_area(n) * sinh_power_integral(n - k, r, decay=k)
    return float(out) if np.ndim(out) == 0 else out


def _gb_const(n, k):
    return math.comb(n, 2 * k) * math.factorial(2 * k)


@dataclass(frozen=True)
class Profile:
    """One of the radius -> functional maps of a geodesic ball.

    ``kind`` is one of ``f`` (quermassintegral), ``ft`` (shifted
    quermassintegral), ``g`` (Gauss-Bonnet), ``h`` (weighted mean
    curvature), ``ht`` (shifted weighted), ``gt`` (support-weighted
    Gauss-Bonnet).
    """

    kind: str
    n: int
    k: int

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.kind in ("g", "gt"):
            _check_index(self.n, 2 * self.k)
        else:
            _check_index(self.n, self.k)

    def __call__(self, r):
        n, k = self.n, self.k
        r = np.asarray(r, dtype=float)
        wn = sphere_area(n)
        s, c = np.sinh(r), np.cosh(r)
        if self.kind == "f":
            out = ball_quermass_all(n, r)[..., k]
        elif self.kind == "ft":
            out = ball_quermass_shifted(n, k, r)
        elif self.kind == "g":
            out = _gb_const(n, k) * wn * s ** (n - 2 * k)
        elif self.kind == "h":
            out = wn * c ** (k + 1) * s ** (n - k)
        elif self.kind == "ht":
            out = wn * _decayed_sinh_power(n - k, k + 1, r)
        else:
            out = _gb_const(n, k) * wn * s ** (n + 1 - 2 * k)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, r):
        """Analytic derivative in ``r``."""
        n, k = self.n, self.k
        r = np.asarray(r, dtype=float)
        wn = sphere_area(n)
        s, c = np.sinh(r), np.cosh(r)
        if self.kind == "f":
            out = wn * c**k * s ** (n - k)
        elif self.kind == "ft":
            out = wn * _decayed_sinh_power(n - k, k, r)
        elif self.kind == "g":
            p = n - 2 * k
            out = _gb_const(n, k) * wn * p * s ** (p - 1) * c if p > 0 else np.zeros_like(r)
        elif self.kind == "h":
            out = wn * c**k * s ** (n - k - 1) * ((k + 1) * s**2 + (n - k) * c**2) if k < n else (
                wn * (n + 1) * c**n * s
            )
        elif self.kind == "ht":
            out = -wn * _decayed_sinh_power(n - k - 1, k + 1, r) * ((k + 1) * s - (n - k) * c)
        else:
            p = n + 1 - 2 * k
            out = _gb_const(n, k) * wn * p * s ** (p - 1) * c
        return float(out) if np.ndim(out) == 0 else out

    @property
    def strictly_increasing(self):
        if self.kind == "g":
            return self.n > 2 * self.k
        if self.kind == "ht":
            return 2 * self.k <= self.n - 1
        return True

    @property
    def infimum(self):
        """Limit of the profile as ``r -> 0+``."""
        if self.kind == "h" and self.k == self.n:
            return sphere_area(self.n)
        if self.kind == "g" and self.n == 2 * self.k:
            return _gb_const(self.n, self.k) * sphere_area(self.n)
        return 0.0

    @property
    def supremum(self):
        """Limit as ``r -> inf``; finite only for the decaying shifted profiles."""
        n, k = self.n, self.k
        if self.kind == "ft" and 2 * k > n:
            # omega_n int_0^inf e^{-ks} sinh^{n-k} s ds, a Beta integral after x = e^{-2s}
            a, b = 0.5 * (2 * k - n), n - k + 1
            beta = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
            return sphere_area(n) * 0.5 ** (n - k + 1) * beta
        if self.kind == "ht" and n == 2 * k + 1:
            return sphere_area(n) * 0.5 ** (n - k)
        return math.inf


def profile(kind, n, k):
    return Profile(kind, n, k)


_R_MAX = 700.0 / 2.0


def invert_monotone(prof, y, *, tol=1e-10):
    """Solve ``prof(r) = y`` for ``r > 0``.

    Bisection on an expanding bracket seeds a safeguarded Newton iteration
    using the profile's analytic derivative.  The result satisfies
    ``|prof(r) - y| <= tol * max(1, |y|)``.

    Raises
    ------
    MonotonicityError
        If the profile is not strictly increasing for its ``(n, k)``.
    RangeError
        If ``y`` is not above the profile's infimum.
    """
    if not prof.strictly_increasing:
        raise MonotonicityError(
            f"profile {prof.kind}_{prof.k} is not strictly increasing for n={prof.n}"
        )
    y = float(y)
    if not np.isfinite(y) or y <= prof.infimum:
        raise RangeError(f"value {y!r} is not above the infimum {prof.infimum!r} of {prof.kind}_{prof.k}")
    if y >= prof.supremum:
        raise RangeError(f"value {y!r} is not below the supremum {prof.supremum!r} of {prof.kind}_{prof.k}")
    target = tol * max(1.0, abs(y))

    lo, hi = 0.0, 1.0
    while not prof(hi) >= y:
        lo, hi = hi, 2.0 * hi
        if hi > _R_MAX:
            raise RangeError(f"value {y!r} exceeds the representable range of {prof.kind}_{prof.k}")

    # coarse bisection to enter the Newton basin
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if prof(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-3 * hi:
            break

    r = 0.5 * (lo + hi)
    for _ in range(100):
        res = prof(r) - y
        if res < 0:
            lo = r
        else:
            hi = r
        d = prof.derivative(r)
        step = res / d if d > 0 else np.inf
        r_new = r - step
        if not (lo < r_new < hi):
            r_new = 0.5 * (lo + hi)
        if abs(r_new - r) <= 4 * np.finfo(float).eps * r:
            r = r_new
            break
        r = r_new

    if abs(prof(r) - y) > target:
        # Newton stalled on a flat stretch; finish by bisection
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if prof(mid) < y:
                lo = mid
            else:
                hi = mid
            r = 0.5 * (lo + hi)
            if abs(prof(r) - y) <= target or hi - lo <= 2 * np.finfo(float).eps * hi:
                break
    return r


@dataclass(frozen=True)
class BallTables:
    """Geodesic-ball profiles for a fixed dimension ``n``.

    Immutable; all methods are pure so one table may be shared freely.
    """

    n: int

    def __post_init__(self):
        _check_index(self.n, 0)

    def f(self, k, r):
        return ball_quermass(self.n, k, r)

    def ft(self, k, r):
        return ball_quermass_shifted(self.n, k, r)

    def g(self, k, r):
        return Profile("g", self.n, k)(r)

    def h(self, k, r):
        return Profile("h", self.n, k)(r)

    def ht(self, k, r):
        return Profile("ht", self.n, k)(r)

    def gt(self, k, r):
        return Profile("gt", self.n, k)(r)

    def invert(self, kind, k, y):
        return invert_monotone(Profile(kind, self.n, k), y)

    def compose(self, outer, k, inner, l, y):
        """``outer_k(inner_l^{-1}(y))``, the right-hand side of a comparison."""
        return Profile(outer, self.n, k)(self.invert(inner, l, y))
