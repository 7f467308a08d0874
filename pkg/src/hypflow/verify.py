"""Inequality suite, flow verdicts and the symmetric-function identity battery."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import HypflowError, InsufficientDataError
from .functionals import functional_report
from .hypgeom import Profile, invert_monotone
from .surface import HCONVEX_TOL, geometry
from .symfun import (
    elementary_all,
    gauss_bonnet_shifted,
    gauss_bonnet_unshifted,
    gbw_pair,
    newton_tensor_diag,
    quotient_derivative,
    sample_cone,
)

__all__ = [
    "REGISTRY",
    "EQ_TOL",
    "VIOL_TOL",
    "InequalityRecord",
    "classify",
    "inequality_suite",
    "suite_failed",
    "monotonicity_verdict",
    "decay_fit",
    "identity_battery",
    "IDENTITY_TOL",
]

REGISTRY = ("AF", "GWW", "WAF", "GWW-CONJ", "BHW", "SAF", "SWAF-k", "SWAF-k1", "SWAF-COR", "ULK")
EQ_TOL = 1e-6
VIOL_TOL = 1e-8
IDENTITY_TOL = 1e-11
LOG_FLOOR = 1e-24


@dataclass
class InequalityRecord:
    id: str
    indices: dict
    hypotheses_ok: bool
    reasons: list
    lhs: float
    rhs: float
    relative_gap: float
    verdict: str

    def to_dict(self):
        return asdict(self)


def classify(lhs, rhs, hypotheses_ok, eq_tol=EQ_TOL, viol_tol=VIOL_TOL):
    """Return ``(relative_gap, verdict)`` for ``lhs >= rhs``.

    ``equality`` takes precedence over ``violated`` when the two tolerance
    bands overlap.
    """
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return math.nan, "hypotheses_unmet" if not hypotheses_ok else "violated"
    gap = (lhs - rhs) / max(1.0, abs(rhs))
    if not hypotheses_ok:
        return gap, "hypotheses_unmet"
    if abs(gap) <= eq_tol:
        return gap, "equality"
    if gap < -viol_tol:
        return gap, "violated"
    return gap, "holds"


class _Suite:
    def __init__(self, g, fields, report, eq_tol, viol_tol, hconvex_tol):
        self.n = g.n
        self.rep = report
        self.eq_tol, self.viol_tol = eq_tol, viol_tol
        self.min_kt = float(np.min(fields.kappa_shift))
        self.hconvex = self.min_kt >= -hconvex_tol
        e = elementary_all(fields.kappa_shift)
        # shifted cone membership for each order, computed once
        self.shift_cone = [True] + [bool(np.all(np.all(e[..., 1 : q + 1] > 0, axis=-1))) for q in range(1, self.n + 1)]
        e1 = elementary_all(fields.kappa)[..., 1]
        self.mean_convex = bool(np.all(e1 > 0))
        self.star_shaped = bool(np.all(fields.u > 0))
        self.records = []

    def hyps(self, hconvex=True, shift_cone=0, extra=()):
        reasons = []
        if hconvex and not self.hconvex:
            reasons.append(f"not h-convex: min shifted curvature {self.min_kt:.3e}")
        if shift_cone and not self.shift_cone[shift_cone]:
            reasons.append(f"shifted curvatures not in Gamma_{shift_cone}^+")
        reasons.extend(extra)
        return reasons

    def compose(self, outer, k, inner, l, y):
        try:
            r = invert_monotone(Profile(inner, self.n, l), y)
        except HypflowError:
            return math.nan
        return Profile(outer, self.n, k)(r)

    def add(self, id_, indices, lhs, rhs, reasons):
        ok = not reasons
        gap, verdict = classify(float(lhs), float(rhs), ok, self.eq_tol, self.viol_tol)
        if ok and not math.isfinite(gap):
            reasons = ["right-hand side could not be evaluated"]
            verdict = "hypotheses_unmet"
            ok = False
        self.records.append(InequalityRecord(id_, dict(indices), ok, list(reasons), float(lhs), float(rhs), gap, verdict))

    def empty(self, id_, why):
        self.records.append(
            InequalityRecord(id_, {}, False, [why], math.nan, math.nan, math.nan, "hypotheses_unmet")
        )


def inequality_suite(g, *, fields=None, report=None, eq_tol=EQ_TOL, viol_tol=VIOL_TOL, hconvex_tol=HCONVEX_TOL):
    """Evaluate every registered inequality on the surface ``g``.

    One :class:`InequalityRecord` is produced per admissible index tuple;
    a registry entry whose index range is empty for this ``n`` produces a
    single ``hypotheses_unmet`` record.  ``report`` may be supplied to
    evaluate the suite on modified functionals.
    """
    if fields is None:
        fields = geometry(g)
    if report is None:
        report = functional_report(g, fields)
    s = _Suite(g, fields, report, eq_tol, viol_tol, hconvex_tol)
    n, rep = s.n, report
    W, Wt = rep.W, rep.Wt
    area = rep.area

    for k in range(1, n + 1):
        for l in range(k):
            s.add("AF", {"k": k, "l": l}, W[k], s.compose("f", k, "f", l, W[l]), s.hyps())

    gww = [(k, m) for k in range(1, n // 2 + 1) if 2 * k + 1 <= n for m in range(2 * k + 2)]
    for k, m in gww:
        s.add("GWW", {"k": k, "m": m}, rep.int_L[k], s.compose("g", k, "f", m, W[m]), s.hyps())
    if not gww:
        s.empty("GWW", f"no 1 <= k with 2k+1 <= n for n={n}")

    for k in range(1, n + 1):
        for m in range(k + 1):
            s.add("WAF", {"k": k, "m": m}, rep.int_dlam_E[k], s.compose("h", k, "f", m, W[m]), s.hyps())

    for k in range(1, n + 1):
        s.add("GWW-CONJ", {"k": k}, rep.int_dlam_E[k], s.compose("h", k, "f", 1, area / n), s.hyps())

    bhw_reasons = []
    if not s.mean_convex:
        bhw_reasons.append("not strictly mean convex")
    if not s.star_shaped:
        bhw_reasons.append("not star-shaped")
    bhw_rhs = s.compose("gt", 1, "f", 1, area / n) / (n * (n - 1))
    s.add("BHW", {}, rep.int_dlam_E[1] - rep.int_u_E[0], bhw_rhs, bhw_reasons)

    for k in range(1, n + 1):
        for l in range(k):
            s.add("SAF", {"k": k, "l": l}, Wt[k], s.compose("ft", k, "ft", l, Wt[l]), s.hyps(shift_cone=k))

    for k in range(1, n + 1):
        s.add("SWAF-k", {"k": k}, rep.int_shift_E[k], s.compose("ht", k, "ft", k, Wt[k]), s.hyps(shift_cone=k))
    for k in range(1, n):
        s.add(
            "SWAF-k1", {"k": k}, rep.int_shift_E[k], s.compose("ht", k, "ft", k + 1, Wt[k + 1]), s.hyps(shift_cone=k + 1)
        )

    cor_k = [k for k in range(1, n + 1) if 2 * k <= n - 1]
    for k in cor_k:
        for variant, top, q in (("a", k, k), ("b", k + 1, k + 1)):
            for l in range(top + 1):
                s.add(
                    "SWAF-COR",
                    {"variant": variant, "k": k, "l": l},
                    rep.int_shift_E[k],
                    s.compose("ht", k, "ft", l, Wt[l]),
                    s.hyps(shift_cone=q),
                )
    if not cor_k:
        s.empty("SWAF-COR", f"no 1 <= k <= (n-1)/2 for n={n}")

    ulk_stated = [k for k in range(2, n + 1) if 4 * k <= n - 1]
    ulk_proof_only = [k for k in range(2, n + 1) if n - 1 < 4 * k <= n + 1]
    for k in ulk_stated + ulk_proof_only:
        extra = []
        if k in ulk_proof_only:
            extra.append(f"k={k} exceeds the stated bound (n-1)/4 but not (n+1)/4")
        reasons = s.hyps(shift_cone=2 * k - 1, extra=extra)
        for l in range(k):
            s.add("ULK", {"k": k, "l": l}, rep.int_uL[k], s.compose("gt", k, "ft", l, Wt[l]), reasons)
        s.add("ULK", {"k": k, "form": "area"}, rep.int_uL[k], s.compose("gt", k, "f", 1, area / n), reasons)
    if not ulk_stated and not ulk_proof_only:
        s.empty("ULK", f"no 2 <= k <= (n-1)/4 for n={n}")
    return s.records


def suite_failed(records):
    return any(rec.verdict == "violated" for rec in records)


def monotonicity_verdict(series, key, direction="nonincreasing"):
    """Largest move against ``direction`` between consecutive records.

    Each move is normalized by the magnitude of the earlier value, so the
    result is directly comparable with a relative slack.  ``series`` may
    be a :class:`~hypflow.flow.TimeSeries` or a plain sequence of values.
    """
    values = series.values(key) if hasattr(series, "values") and key is not None else np.asarray(series, float)
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    diff = np.diff(values)
    if direction == "nondecreasing":
        diff = -diff
    elif direction != "nonincreasing":
        raise ValueError(f"unknown direction {direction!r}")
    scale = np.maximum(np.abs(values[:-1]), np.finfo(float).tiny)
    return float(max(0.0, np.max(diff / scale)))


def decay_fit(series, values=None):
    """Fit ``max |D phi|^2 ~ C exp(-alpha t)`` over the final half of the records.

    ``series`` is a TimeSeries, or an array of times with ``values`` given.
    Points at or below ``LOG_FLOOR`` are discarded.

    Returns
    -------
    (alpha, r_squared)

    Raises
    ------
    InsufficientDataError
        With fewer than 10 usable points.
    """
    if values is None:
        t, y = series.t, series.values("max_grad_sq")
    else:
        t, y = np.asarray(series, float), np.asarray(values, float)
    half = len(t) // 2
    t, y = t[half:], y[half:]
    keep = np.isfinite(y) & (y > LOG_FLOOR)
    t, y = t[keep], np.log(y[keep])
    if t.size < 10:
        raise InsufficientDataError(f"decay fit needs at least 10 usable records, got {t.size}")
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), r2


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def _below(a, b):
    """Scaled amount by which ``a <= b`` fails (0 if it holds)."""
    return np.maximum(0.0, (a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b))))


def identity_battery(n, samples=1000, seed=0):
    """Check symmetric-function identities and inequalities on random tuples.

    Differences are scaled by ``max(1, |lhs|, |rhs|)``.  Returns a dict
    mapping check name to the largest scaled violation.
    """
    rng = np.random.default_rng(seed)
    pos = sample_cone(rng, n, n, samples)
    mixed = rng.uniform(-5.0, 5.0, size=(samples, n))
    out = {}

    def record(name, value):
        out[name] = max(out.get(name, 0.0), float(np.max(value)) if np.size(value) else 0.0)

    for kap in (pos, mixed):
        e = elementary_all(kap)
        for m in range(1, n + 1):
            dE = newton_tensor_diag(kap, m)
            e_next = e[:, m + 1] if m < n else 0.0
            record("newton_trace_A", _rel(np.sum(dE * kap, -1), m * e[:, m]))
            record("newton_trace_I", _rel(np.sum(dE, -1), m * e[:, m - 1]))
            record("newton_trace_A2", _rel(np.sum(dE * kap**2, -1), n * e[:, 1] * e[:, m] - (n - m) * e_next))

    for m in range(1, n + 1):
        kap = sample_cone(rng, n, m, samples, low=-2.0, high=5.0)
        e = elementary_all(kap)
        for k in range(1, m + 1):
            e_next = e[:, m + 1] if m < n else 0.0
            record("newton_maclaurin", _below(e_next * e[:, k - 1], e[:, k] * e[:, m]))

    for k in range(n // 2 + 1):
        record("gauss_bonnet_expansions", _rel(gauss_bonnet_unshifted(pos, k), gauss_bonnet_shifted(pos - 1.0, k)))

    e = elementary_all(pos)
    for m in range(1, n + 1):
        F = e[:, m] / e[:, m - 1]
        dF = quotient_derivative(pos, m)
        tr = np.sum(dF, -1)
        sq = np.sum(dF * pos**2, -1)
        record("quotient_trace", np.maximum(_below(1.0, tr), _below(tr, m)))
        record("quotient_square", np.maximum(_below(F**2, sq), _below(sq, (n - m + 1) * F**2)))

    big = rng.uniform(1.0, 5.0, size=(samples, n))
    big = big[np.all(big > 1.0, axis=-1)]
    e = elementary_all(big)
    for k in range(n + 1):
        if 2 * k + 1 > n:
            break
        lt, nt = gbw_pair(big, k)
        record("gbw_positive", np.maximum(_below(0.0, lt), _below(0.0, nt)))
        record("gbw_inequality", _below(e[:, 2 * k] * nt, e[:, 2 * k + 1] * lt))
    return out

