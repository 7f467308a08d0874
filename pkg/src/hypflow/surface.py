"""Star-shaped hypersurfaces as radial graphs over the unit sphere.

A surface is stored as its radial function ``r`` on a cell-centred grid of
polar angles ``theta_j = (j + 1/2) pi / N`` (axisymmetric mode, any ``n``),
or on a latitude-longitude grid for ``n = 2`` (``full2d`` mode).  Poles are
never grid points; smoothness across them is imposed by reflected ghost
cells, which keeps the fourth-order stencils intact.

Geometry follows the radial-graph formulas with ``phi_i = r_i / lambda``:
``v = sqrt(1 + |D phi|^2)``, support function ``u = lambda / v`` and
Weingarten map

    h_i^j = -(e^{jk} - phi^j phi^k / v^2) phi_{ik} / (lambda v)
            + lambda' / (lambda v) delta_i^j.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvexityError, DomainError, GeometryError, ResolutionError
from .hypgeom import sphere_area

__all__ = [
    "RadialGraph",
    "GeometryFields",
    "MIN_RESOLUTION",
    "HCONVEX_TOL",
    "polar_grid",
    "polar_weights",
    "sphere_weights",
    "make_sphere",
    "make_perturbed_sphere",
    "make_graph",
    "derivatives",
    "geometry",
    "min_shifted_curvature",
    "max_gradient_sq",
    "write_snapshot",
]

MODES = ("axisymmetric", "full2d")
MIN_RESOLUTION = 16
# discrete h-convexity threshold for validating initial data
HCONVEX_TOL = 1e-8
_DISC_CLAMP = 1e-13


def polar_grid(N):
    return (np.arange(N) + 0.5) * math.pi / N


def _sin_power_cos_moments(q, M):
    """``int_0^pi cos(m t) sin(t)^q dt`` for ``m = 0..M-1``, in closed form."""
    mu = np.zeros(M)
    if q % 2 == 0:
        p = q // 2
        scale = 2.0 ** (-2 * p)
        mu[0] = math.pi * scale * math.comb(2 * p, p)
        for k in range(1, p + 1):
            if 2 * k < M:
                mu[2 * k] = scale * (-1) ** k * math.comb(2 * p, p - k) * math.pi
        return mu
    p = (q - 1) // 2
    scale = 2.0 ** (-2 * p)
    m = np.arange(M)
    for k in range(p + 1):
        ell = 2 * k + 1
        coef = scale * (-1) ** k * math.comb(2 * p + 1, p - k)
        odd = (ell + m) % 2 == 1
        mu[odd] += coef * 2.0 * ell / (ell**2 - m[odd] ** 2)
    return mu


@lru_cache(maxsize=None)
def polar_weights(q, N):
    """Weights for ``int_0^pi f(theta) sin(theta)^q dtheta`` on the cell-centred nodes.

    Fejer-type rule: exact for every ``f`` in ``span{cos(m theta), m < N}``,
    hence spectrally accurate for smooth functions on the sphere (which are
    smooth functions of ``cos theta``).  Plain midpoint weights would only be
    second order when ``q`` is odd.
    """
    theta = polar_grid(N)
    mu = _sin_power_cos_moments(q, N)
    m = np.arange(1, N)
    w = mu[0] / N + (2.0 / N) * (np.cos(np.outer(theta, m)) @ mu[1:])
    w.setflags(write=False)
    return w


def sphere_weights(n, shape):
    """Quadrature weights for ``d sigma`` on the unit ``n``-sphere grid."""
    if len(shape) == 1:
        return sphere_area(n - 1) * polar_weights(n - 1, shape[0])
    nt, npsi = shape
    return np.outer(polar_weights(1, nt), np.full(npsi, 2.0 * math.pi / npsi))


@dataclass(frozen=True, eq=False)
class RadialGraph:
    """Radial function of a star-shaped hypersurface in ``H^{n+1}``.

    ``r`` has shape ``(N,)`` in axisymmetric mode and ``(N_theta, N_psi)``
    in ``full2d`` mode.  The array is made read-only on construction.
    """

    n: int
    mode: str
    r: np.ndarray

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        r = np.array(self.r, dtype=float)
        if self.mode == "axisymmetric" and r.ndim != 1:
            raise DomainError("axisymmetric radial function must be one-dimensional")
        if self.mode == "full2d":
            if self.n != 2:
                raise DomainError("full2d mode is only available for n = 2")
            if r.ndim != 2 or r.shape[1] % 2:
                raise DomainError("full2d radial function needs shape (N_theta, even N_psi)")
        if r.shape[0] < MIN_RESOLUTION:
            raise ResolutionError(f"need at least {MIN_RESOLUTION} polar cells, got {r.shape[0]}")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise DomainError("radial function must be finite and positive")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def N(self):
        return self.r.shape[0]

    @property
    def theta(self):
        return polar_grid(self.N)

    @property
    def psi(self):
        if self.mode != "full2d":
            return None
        npsi = self.r.shape[1]
        return np.arange(npsi) * 2.0 * math.pi / npsi

    @property
    def dtheta(self):
        return math.pi / self.N

    def with_r(self, r):
        return RadialGraph(self.n, self.mode, r)


@dataclass(frozen=True, eq=False)
class GeometryFields:
    """Pointwise geometry of a radial graph.

    ``kappa`` has a trailing axis of length ``n`` sorted ascending.
    ``weight`` already includes the area element ``lambda^n v`` and the
    quadrature weight, so ``sum(weight * f)`` integrates ``f dmu``.
    """

    n: int
    mode: str
    r: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    grad_sq: np.ndarray
    v: np.ndarray
    u: np.ndarray
    kappa: np.ndarray
    kappa_shift: np.ndarray
    sigma_weight: np.ndarray
    weight: np.ndarray

    @property
    def area(self):
        return float(np.sum(self.weight))


def make_graph(n, mode, N, func, N_psi=None):
    """Build a graph from ``func(theta)`` (axisymmetric) or ``func(theta, psi)``."""
    if N < MIN_RESOLUTION:
        raise ResolutionError(f"need at least {MIN_RESOLUTION} polar cells, got {N}")
    theta = polar_grid(N)
    if mode == "full2d":
        npsi = 2 * N if N_psi is None else N_psi
        psi = np.arange(npsi) * 2.0 * math.pi / npsi
        T, P = np.meshgrid(theta, psi, indexing="ij")
        r = np.broadcast_to(np.asarray(func(T, P), dtype=float), T.shape)
    else:
        r = np.broadcast_to(np.asarray(func(theta), dtype=float), theta.shape)
    return RadialGraph(n, mode, r)


def make_sphere(n, mode, N, r0, N_psi=None):
    """Geodesic sphere of radius ``r0`` centred at the origin."""
    if not r0 > 0:
        raise DomainError(f"radius must be > 0, got {r0}")
    if mode == "full2d":
        return make_graph(n, mode, N, lambda t, p: np.full(t.shape, float(r0)), N_psi)
    return make_graph(n, mode, N, lambda t: np.full(t.shape, float(r0)))


def make_perturbed_sphere(n, mode, N, r0, eps, freq, N_psi=None):
    """Sphere plus a smooth zonal (or sectoral, in ``full2d``) perturbation.

    Axisymmetric: ``r = r0 + eps cos(freq theta)``, which equals
    ``r0 + eps T_freq(cos theta)`` and is smooth on the sphere.
    ``full2d``: ``r = r0 + eps sin(theta)^freq cos(freq psi)``, a real
    spherical harmonic of degree ``freq``.

    Raises
    ------
    ConvexityError
        If the result is not h-convex (minimum shifted curvature below
        ``-HCONVEX_TOL``).
    """
    freq = int(freq)
    if freq < 0:
        raise DomainError("angular frequency must be >= 0")
    if mode == "full2d":
        g = make_graph(n, mode, N, lambda t, p: r0 + eps * np.sin(t) ** freq * np.cos(freq * p), N_psi)
    else:
        g = make_graph(n, mode, N, lambda t: r0 + eps * np.cos(freq * t))
    fields = geometry(g)
    kmin = min_shifted_curvature(fields)
    if kmin < -HCONVEX_TOL:
        raise ConvexityError(
            f"perturbed sphere is not h-convex: min shifted curvature {kmin:.6g}", kmin
        )
    return g


def _d1(f, h, axis):
    """Fourth-order first derivative of a ghost-padded array (2 ghosts per side)."""
    sl = lambda a, b: _slice(f, axis, a, b)  # noqa: E731
    # differences first: exact zero on constants, less round-off generally
    return (8.0 * (sl(3, -1) - sl(1, -3)) - (sl(4, None) - sl(0, -4))) / (12.0 * h)


def _d2(f, h, axis):
    sl = lambda a, b: _slice(f, axis, a, b)  # noqa: E731
    c = sl(2, -2)
    near = (sl(3, -1) - c) + (sl(1, -3) - c)
    far = (sl(4, None) - c) + (sl(0, -4) - c)
    return (16.0 * near - far) / (12.0 * h * h)


def _slice(f, axis, a, b):
    idx = [slice(None)] * f.ndim
    idx[axis] = slice(a, b)
    return f[tuple(idx)]


def _pad_polar(r):
    """Ghost cells across both poles along axis 0."""
    if r.ndim == 1:
        return np.concatenate([r[1::-1], r, r[:-3:-1]])
    half = r.shape[1] // 2
    across = np.roll(r, half, axis=1)
    return np.concatenate([across[1::-1], r, across[:-3:-1]], axis=0)


def derivatives(g):
    """Angular derivatives of ``r`` on the grid.

    Returns ``(r_t, r_tt)`` in axisymmetric mode and
    ``(r_t, r_tt, r_p, r_pp, r_tp)`` in ``full2d`` mode (partial
    derivatives in ``theta`` and ``psi``).
    """
    r = g.r
    ht = g.dtheta
    rp = _pad_polar(r)
    r_t = _d1(rp, ht, 0)
    r_tt = _d2(rp, ht, 0)
    if g.mode != "full2d":
        return r_t, r_tt
    hp = 2.0 * math.pi / r.shape[1]
    wrap = lambda a: np.concatenate([a[:, -2:], a, a[:, :2]], axis=1)  # noqa: E731
    r_p = _d1(wrap(r), hp, 1)
    r_pp = _d2(wrap(r), hp, 1)
    r_tp = _d1(_pad_polar(r_p), ht, 0)
    return r_t, r_tt, r_p, r_pp, r_tp


def geometry(g, derivs=None):
    """Compute :class:`GeometryFields` for a radial graph.

    ``derivs`` may supply exact angular derivatives (same layout as
    :func:`derivatives`) in place of the finite-difference ones.

    Raises
    ------
    GeometryError
        If any derived quantity is not finite.
    """
    n = g.n
    r = g.r
    if derivs is None:
        derivs = derivatives(g)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lam = np.sinh(r)
        dlam = np.cosh(r)
        theta = g.theta
        if g.mode == "full2d":
            kappa, grad_sq = _weingarten_full2d(g, lam, dlam, derivs)
        else:
            r_t, r_tt = derivs
            dphi = r_t / lam
            ddphi = r_tt / lam - dlam * r_t**2 / lam**2
            grad_sq = dphi**2
            v = np.sqrt(1.0 + grad_sq)
            k_mer = (dlam * v**2 - ddphi) / (lam * v**3)
            # theta never hits a pole on the cell-centred grid, so cot is finite
            k_rot = (dlam - dphi / np.tan(theta)) / (lam * v)
            kappa = np.empty(r.shape + (n,))
            kappa[:, : n - 1] = k_rot[:, None]
            kappa[:, n - 1] = k_mer
            kappa.sort(axis=-1)
        v = np.sqrt(1.0 + grad_sq)
        u = lam / v
        sw = sphere_weights(n, r.shape)
        weight = lam**n * v * sw
    if not (np.all(np.isfinite(kappa)) and np.all(np.isfinite(weight))):
        raise GeometryError("non-finite geometry: the surface has degenerated")
    return GeometryFields(
        n=n,
        mode=g.mode,
        r=r,
        lam=lam,
        dlam=dlam,
        grad_sq=grad_sq,
        v=v,
        u=u,
        kappa=kappa,
        kappa_shift=kappa - 1.0,
        sigma_weight=sw,
        weight=weight,
    )


def _weingarten_full2d(g, lam, dlam, derivs):
    r_t, r_tt, r_p, r_pp, r_tp = derivs
    theta = g.theta[:, None]
    s, c = np.sin(theta), np.cos(theta)
    p_t, p_p = r_t / lam, r_p / lam
    p_tt = r_tt / lam - dlam * r_t * r_t / lam**2
    p_pp = r_pp / lam - dlam * r_p * r_p / lam**2
    p_tp = r_tp / lam - dlam * r_t * r_p / lam**2
    # covariant Hessian on the round sphere
    H_tt = p_tt
    H_tp = p_tp - (c / s) * p_p
    H_pp = p_pp + s * c * p_t
    up_t, up_p = p_t, p_p / s**2
    grad_sq = p_t * up_t + p_p * up_p
    v2 = 1.0 + grad_sq
    v = np.sqrt(v2)
    A_tt = 1.0 - up_t * up_t / v2
    A_tp = -up_t * up_p / v2
    A_pp = 1.0 / s**2 - up_p * up_p / v2
    scale = -1.0 / (lam * v)
    diag = dlam / (lam * v)
    # h_i^j = scale * sum_k H_ik A^kj + diag delta_i^j
    m11 = scale * (H_tt * A_tt + H_tp * A_tp) + diag
    m12 = scale * (H_tt * A_tp + H_tp * A_pp)
    m21 = scale * (H_tp * A_tt + H_pp * A_tp)
    m22 = scale * (H_tp * A_tp + H_pp * A_pp) + diag
    half_tr = 0.5 * (m11 + m22)
    # equals half_tr^2 - det, but without cancellation at umbilic points
    disc = (0.5 * (m11 - m22)) ** 2 + m12 * m21
    floor = -_DISC_CLAMP * np.maximum(1.0, half_tr**2)
    if np.any(disc < floor):
        raise GeometryError("Weingarten map with complex spectrum")
    root = np.sqrt(np.maximum(disc, 0.0))
    kappa = np.stack([half_tr - root, half_tr + root], axis=-1)
    return kappa, grad_sq


def min_shifted_curvature(fields):
    return float(np.min(fields.kappa_shift))


def max_gradient_sq(fields):
    return float(np.max(fields.grad_sq))


def write_snapshot(g, path, fields=None):
    """Write a tab-separated snapshot: one row per grid point.

    Columns: ``theta`` (and ``psi`` in ``full2d``), ``r``, ``kappa_1..kappa_n``,
    ``u``, ``v``; 17 significant digits, LF line endings.
    """
    if fields is None:
        fields = geometry(g)
    n = g.n
    cols = ["theta"] + (["psi"] if g.mode == "full2d" else []) + ["r"]
    cols += [f"kappa_{i + 1}" for i in range(n)] + ["u", "v"]
    if g.mode == "full2d":
        T, P = np.meshgrid(g.theta, g.psi, indexing="ij")
        coords = [T.ravel(), P.ravel()]
    else:
        coords = [g.theta]
    data = np.column_stack(
        coords
        + [g.r.ravel()]
        + [fields.kappa[..., i].ravel() for i in range(n)]
        + [fields.u.ravel(), fields.v.ravel()]
    )
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# radial graph snapshot n={n} mode={g.mode}\n")
        fh.write("\t".join(cols) + "\n")
        for row in data:
            fh.write("\t".join(f"{x:.17g}" for x in row) + "\n")
