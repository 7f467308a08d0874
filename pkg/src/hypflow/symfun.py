"""Normalized elementary symmetric functions and the expansions built on them.

Every function accepts a single curvature tuple or a stack of tuples; the
last axis always indexes the ``n`` principal curvatures.
"""

import itertools
import math

import numpy as np

from .errors import ConeViolationError, DomainError

__all__ = [
    "elementary_all",
    "elementary",
    "newton_tensor_diag",
    "in_cone",
    "check_cone",
    "quotient",
    "quotient_derivative",
    "maclaurin_gap",
    "gauss_bonnet_unshifted",
    "gauss_bonnet_shifted",
    "gauss_bonnet_kronecker",
    "gbw_pair",
    "sample_cone",
]


def _as_tuple_array(kappa):
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim == 0 or kappa.shape[-1] < 1:
        raise DomainError("curvature tuple must have at least one entry")
    return kappa


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def elementary_all(kappa):
    """Return ``E_0, ..., E_n`` along a new trailing axis.

    The coefficients of ``prod_i (1 + kappa_i t)`` are accumulated one
    factor at a time and then divided by ``C(n, m)``.  Unlike Newton's
    power-sum recurrence this never subtracts large power sums, so it stays
    accurate for mixed-sign tuples.
    """
    kappa = _as_tuple_array(kappa)
    n = kappa.shape[-1]
    sigma = np.zeros(kappa.shape[:-1] + (n + 1,))
    sigma[..., 0] = 1.0
    for i in range(n):
        ki = kappa[..., i : i + 1]
        # right-hand side is built from the previous coefficients
        sigma[..., 1 : i + 2] = sigma[..., 1 : i + 2] + ki * sigma[..., 0 : i + 1]
    binom = np.array([math.comb(n, m) for m in range(n + 1)], dtype=float)
    return sigma / binom


def elementary(kappa, m):
    """Normalized ``E_m``; ``E_0 = 1`` and ``E_m = 0`` for ``m > n``."""
    if m < 0:
        raise DomainError(f"index m must be >= 0, got {m}")
    kappa = _as_tuple_array(kappa)
    n = kappa.shape[-1]
    if m > n:
        return _unwrap(np.zeros(kappa.shape[:-1]))
    return _unwrap(elementary_all(kappa)[..., m])


def newton_tensor_diag(kappa, m):
    """Diagonal of ``dE_m / dA`` at ``A = diag(kappa)``, i.e. ``dE_m/dkappa_i``.

    ``dE_m/dkappa_i = sigma_{m-1}(kappa | i) / C(n, m)`` where ``kappa | i``
    drops entry ``i``.
    """
    kappa = _as_tuple_array(kappa)
    n = kappa.shape[-1]
    if not 0 <= m <= n:
        raise DomainError(f"index m={m} outside [0, {n}]")
    out = np.zeros(kappa.shape)
    if m == 0:
        return out
    for i in range(n):
        rest = np.delete(kappa, i, axis=-1)
        if n == 1:
            sig = np.ones(kappa.shape[:-1])
        else:
            sig = elementary_all(rest)[..., m - 1] * math.comb(n - 1, m - 1)
        out[..., i] = sig / math.comb(n, m)
    return out


def in_cone(kappa, m):
    """Boolean mask of membership in the Garding cone ``Gamma_m^+``."""
    e = elementary_all(kappa)
    return np.all(e[..., 1 : m + 1] > 0, axis=-1)


def check_cone(kappa, m, *, e=None):
    """Raise :class:`ConeViolationError` unless every tuple lies in ``Gamma_m^+``.

    The error names the first failing ``E_i`` and the flat index of the
    first offending tuple.
    """
    if e is None:
        e = elementary_all(kappa)
    if m == 0:
        return
    bad = e[..., 1 : m + 1] <= 0
    bad = bad | ~np.isfinite(e[..., 1 : m + 1])
    if not np.any(bad):
        return
    flat = bad.reshape(-1, m)
    loc = int(np.argmax(flat.any(axis=1)))
    idx = int(np.argmax(flat[loc])) + 1
    value = e.reshape(-1, e.shape[-1])[loc, idx]
    location = loc if e.ndim > 1 else None
    raise ConeViolationError(
        f"E_{idx} = {value:.6g} <= 0: tuple outside Gamma_{m}^+"
        + ("" if location is None else f" at point {location}"),
        index=idx,
        location=location,
    )


def quotient(kappa, p, q):
    """``E_p / E_q`` with a cone check on ``Gamma_q^+``."""
    kappa = _as_tuple_array(kappa)
    e = elementary_all(kappa)
    check_cone(kappa, q, e=e)
    n = kappa.shape[-1]
    ep = e[..., p] if p <= n else np.zeros(e.shape[:-1])
    return _unwrap(ep / e[..., q])


def quotient_derivative(kappa, m):
    """Gradient in ``kappa`` of ``F = E_m / E_{m-1}``."""
    kappa = _as_tuple_array(kappa)
    e = elementary_all(kappa)
    check_cone(kappa, m, e=e)
    em, em1 = e[..., m, None], e[..., m - 1, None]
    return (newton_tensor_diag(kappa, m) * em1 - em * newton_tensor_diag(kappa, m - 1)) / em1**2


def maclaurin_gap(kappa, k, m):
    """``E_k E_m - E_{m+1} E_{k-1}``, nonnegative on ``Gamma_m^+`` for ``1 <= k <= m``."""
    kappa = _as_tuple_array(kappa)
    n = kappa.shape[-1]
    if not 1 <= k <= m:
        raise DomainError(f"need 1 <= k <= m, got k={k}, m={m}")
    e = elementary_all(kappa)
    check_cone(kappa, m, e=e)

    def E(i):
        return e[..., i] if i <= n else np.zeros(e.shape[:-1])

    return _unwrap(E(k) * E(m) - E(m + 1) * E(k - 1))


def _gb_check(n, k):
    if k < 0 or 2 * k > n:
        raise DomainError(f"Gauss-Bonnet index needs 0 <= 2k <= n, got k={k}, n={n}")
    return math.comb(n, 2 * k) * math.factorial(2 * k)


def gauss_bonnet_unshifted(kappa, k):
    """``L_k`` from the principal curvatures: ``C sum_j (-1)^j C(k,j) E_{2k-2j}(kappa)``."""
    kappa = _as_tuple_array(kappa)
    const = _gb_check(kappa.shape[-1], k)
    e = elementary_all(kappa)
    total = sum((-1) ** j * math.comb(k, j) * e[..., 2 * k - 2 * j] for j in range(k + 1))
    return _unwrap(const * total)


def gauss_bonnet_shifted(kappa_shift, k):
    """``L_k`` from shifted curvatures: ``C sum_j 2^j C(k,j) E_{2k-j}(kappa - 1)``."""
    kappa_shift = _as_tuple_array(kappa_shift)
    const = _gb_check(kappa_shift.shape[-1], k)
    e = elementary_all(kappa_shift)
    total = sum(2**j * math.comb(k, j) * e[..., 2 * k - j] for j in range(k + 1))
    return _unwrap(const * total)


def gauss_bonnet_kronecker(kappa, k):
    """Brute-force ``L_k`` from the generalized Kronecker delta definition.

    Uses the Gauss equation ``R_{ij}^{sl} = h_i^s h_j^l - h_i^l h_j^s -
    (delta_i^s delta_j^l - delta_i^l delta_j^s)`` for ``h = diag(kappa)``.
    Factorial cost; meant as an independent check for ``n <= 6``.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[0]
    _gb_check(n, k)
    if n > 6:
        raise DomainError("brute-force Gauss-Bonnet evaluation limited to n <= 6")
    if k == 0:
        return 1.0
    h = np.diag(kappa)
    eye = np.eye(n)
    riem = (
        np.einsum("is,jl->ijsl", h, h)
        - np.einsum("il,js->ijsl", h, h)
        - (np.einsum("is,jl->ijsl", eye, eye) - np.einsum("il,js->ijsl", eye, eye))
    )
    p = 2 * k
    total = 0.0
    for upper in itertools.permutations(range(n), p):
        # delta^{I}_{J} vanishes unless J is a rearrangement of I
        for lower in itertools.permutations(upper):
            delta = np.linalg.det(eye[np.ix_(upper, lower)])
            if delta == 0.0:
                continue
            prod = delta
            for t in range(k):
                i1, i2 = upper[2 * t], upper[2 * t + 1]
                j1, j2 = lower[2 * t], lower[2 * t + 1]
                prod *= riem[i1, i2, j1, j2]
            total += prod
    return total / 2**k


def gbw_pair(kappa, k):
    """``(L~_k, N~_k)`` with ``L~_k = sum_i C(k,i)(-1)^i E_{2k-2i}`` and
    ``N~_k = sum_i C(k,i)(-1)^i E_{2k-2i+1}``."""
    kappa = _as_tuple_array(kappa)
    n = kappa.shape[-1]
    e = elementary_all(kappa)

    def E(i):
        return e[..., i] if i <= n else np.zeros(e.shape[:-1])

    lt = sum(math.comb(k, i) * (-1) ** i * E(2 * k - 2 * i) for i in range(k + 1))
    nt = sum(math.comb(k, i) * (-1) ** i * E(2 * k - 2 * i + 1) for i in range(k + 1))
    return _unwrap(lt), _unwrap(nt)


def sample_cone(rng, n, m, size, low=0.05, high=5.0):
    """Rejection-sample ``size`` tuples uniform in ``(low, high)^n`` within ``Gamma_m^+``."""
    out = np.empty((0, n))
    while out.shape[0] < size:
        cand = rng.uniform(low, high, size=(2 * size, n))
        out = np.concatenate([out, cand[in_cone(cand, m)]])
    return out[:size]
