"""Integral functionals of radial graphs.

Integrals are quadratures over the sphere grid with the area element
``dmu = lambda^n v dsigma``.  Quermassintegrals follow the curvature-integral
recursion ``W_0 = Vol``, ``W_1 = |M| / n`` and
``W_{k+1} = (int E_k dmu - k W_{k-1}) / (n - k)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GeometryError
from .hypgeom import sinh_power_integral
from .serialize import dumps
from .surface import geometry, sphere_weights
from .symfun import elementary_all

__all__ = [
    "FunctionalReport",
    "integrate",
    "volume",
    "quermassintegrals",
    "minkowski_residuals",
    "curvature_integrals",
    "functional_report",
    "shifted_combination",
]


def integrate(fields, integrand):
    """Integrate a pointwise quantity over the surface.

    ``integrand`` is an array on the grid or a callable taking the fields.
    """
    values = integrand(fields) if callable(integrand) else integrand
    values = np.broadcast_to(np.asarray(values, dtype=float), fields.weight.shape)
    total = float(np.sum(fields.weight * values))
    if not math.isfinite(total):
        raise GeometryError("non-finite integral")
    return total


def volume(g):
    """Enclosed volume ``int_{S^n} int_0^{r(theta)} sinh^n s ds dsigma``."""
    sw = sphere_weights(g.n, g.r.shape)
    return float(np.sum(sw * sinh_power_integral(g.n, g.r)))


def shifted_combination(values, k):
    """``sum_i (-1)^{k-i} C(k, i) values[i]``."""
    return sum((-1) ** (k - i) * math.comb(k, i) * values[i] for i in range(k + 1))


def _fields(g, fields):
    return geometry(g) if fields is None else fields


def _integrals_of_E(fields, e):
    return np.sum(fields.weight[..., None] * e, axis=tuple(range(e.ndim - 1)))


def quermassintegrals(g, fields=None):
    """Return ``(W, Wt)``: arrays ``W_0..W_n`` and shifted ``W~_0..W~_n``.

    ``W~_k`` equals the binomial combination of the ``W_i`` but is
    evaluated with the equivalent recursion
    ``(n-k) W~_{k+1} = int E_k(kt) dmu - (n-2k) W~_k``, which avoids the
    cancellation of the alternating sum on large surfaces.
    """
    fields = _fields(g, fields)
    n = g.n
    int_e = _integrals_of_E(fields, elementary_all(fields.kappa))
    int_et = _integrals_of_E(fields, elementary_all(fields.kappa_shift))
    W = np.empty(n + 1)
    Wt = np.empty(n + 1)
    W[0] = Wt[0] = volume(g)
    W[1] = fields.area / n
    for k in range(1, n):
        W[k + 1] = (int_e[k] - k * W[k - 1]) / (n - k)
    Wt[1] = W[1] - W[0]
    for k in range(1, n):
        Wt[k + 1] = (int_et[k] - (n - 2 * k) * Wt[k]) / (n - k)
    return W, Wt


def minkowski_residuals(g, fields=None):
    """Residuals of the Minkowski formulas, ``(rho, rho_t)``.

    ``rho_m = int (lambda' E_m - u E_{m+1}) dmu`` and
    ``rho_t_m = int ((lambda' - u) E_m(kt) - u E_{m+1}(kt)) dmu``
    for ``m = 0..n-1``.  Both vanish for exact closed surfaces.
    """
    fields = _fields(g, fields)
    n = g.n
    e = elementary_all(fields.kappa)
    et = elementary_all(fields.kappa_shift)
    dl, u = fields.dlam[..., None], fields.u[..., None]
    rho = _integrals_of_E(fields, dl * e[..., :n] - u * e[..., 1:])
    rho_t = _integrals_of_E(fields, (dl - u) * et[..., :n] - u * et[..., 1:])
    return rho, rho_t


def _gb_coeffs(n, k):
    const = math.comb(n, 2 * k) * math.factorial(2 * k)
    unshifted = np.zeros(n + 1)
    shifted = np.zeros(n + 1)
    for j in range(k + 1):
        unshifted[2 * k - 2 * j] += const * (-1) ** j * math.comb(k, j)
        shifted[2 * k - j] += const * 2**j * math.comb(k, j)
    return unshifted, shifted


def curvature_integrals(g, k=None, fields=None):
    """Weighted curvature integrals, keyed by name.

    Without ``k`` every array is returned in full: index ``0..n`` for the
    mean-curvature integrals and ``0..n//2`` for the Gauss-Bonnet ones.
    With ``k`` only the scalars for that index are returned; the
    Gauss-Bonnet entries are included when ``2k <= n``.
    """
    n = g.n
    if k is not None and not 0 <= k <= n:
        raise DomainError(f"index k={k} outside [0, {n}]")
    fields = _fields(g, fields)
    e = elementary_all(fields.kappa)
    et = elementary_all(fields.kappa_shift)
    dl, u = fields.dlam[..., None], fields.u[..., None]
    out = {
        "int_E": _integrals_of_E(fields, e),
        "int_dlam_E": _integrals_of_E(fields, dl * e),
        "int_u_E": _integrals_of_E(fields, u * e),
        "int_shift_E": _integrals_of_E(fields, (dl - u) * et),
        "int_u_Et": _integrals_of_E(fields, u * et),
    }
    kmax = n // 2
    L = np.empty(kmax + 1)
    Ls = np.empty(kmax + 1)
    uL = np.empty(kmax + 1)
    Lt = np.empty(kmax + 1)
    int_et = _integrals_of_E(fields, et)
    for j in range(kmax + 1):
        cu, cs = _gb_coeffs(n, j)
        L[j] = out["int_E"] @ cu
        Ls[j] = int_et @ cs
        uL[j] = out["int_u_E"] @ cu
        Lt[j] = L[j] / (math.comb(n, 2 * j) * math.factorial(2 * j))
    out["int_L"] = L
    out["int_L_shifted"] = Ls
    out["int_uL"] = uL
    out["int_Ltilde"] = Lt
    if k is None:
        return out
    return {name: float(v[k]) for name, v in out.items() if k < len(v)}


@dataclass
class FunctionalReport:
    """Integral functionals of one surface."""

    n: int
    area: float
    W: np.ndarray
    Wt: np.ndarray
    int_E: np.ndarray
    int_dlam_E: np.ndarray
    int_u_E: np.ndarray
    int_shift_E: np.ndarray
    int_u_Et: np.ndarray
    int_L: np.ndarray
    int_L_shifted: np.ndarray
    int_uL: np.ndarray
    int_Ltilde: np.ndarray
    rho: np.ndarray
    rho_t: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def volume(self):
        return float(self.W[0])

    def get(self, key):
        """Look up a scalar by flat key, e.g. ``W2``, ``Wt1``, ``int_dlam_E_3``."""
        return self.to_dict()[key]

    def to_dict(self):
        d = {"n": self.n, "area": float(self.area), "volume": self.volume}
        for k, x in enumerate(self.W):
            d[f"W{k}"] = float(x)
        for k, x in enumerate(self.Wt):
            d[f"Wt{k}"] = float(x)
        for name in (
            "int_E",
            "int_dlam_E",
            "int_u_E",
            "int_shift_E",
            "int_u_Et",
            "int_L",
            "int_L_shifted",
            "int_uL",
            "int_Ltilde",
        ):
            for k, x in enumerate(getattr(self, name)):
                d[f"{name}_{k}"] = float(x)
        for k, x in enumerate(self.rho):
            d[f"rho_{k}"] = float(x)
        for k, x in enumerate(self.rho_t):
            d[f"rho_t_{k}"] = float(x)
        d.update({k: float(v) for k, v in self.extras.items()})
        return d

    def to_json(self):
        return dumps(self.to_dict())


def functional_report(g, fields=None):
    fields = _fields(g, fields)
    W, Wt = quermassintegrals(g, fields)
    ci = curvature_integrals(g, fields=fields)
    rho, rho_t = minkowski_residuals(g, fields)
    return FunctionalReport(n=g.n, area=fields.area, W=W, Wt=Wt, rho=rho, rho_t=rho_t, **ci)

