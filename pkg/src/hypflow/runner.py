"""Run a configuration end to end and serialize the results."""

import os

import numpy as np

from .errors import HypflowError, InsufficientDataError
from .flow import run
from .hypgeom import Profile, invert_monotone
from .serialize import dumps, write_csv
from .verify import decay_fit, inequality_suite, monotonicity_verdict, suite_failed

__all__ = ["series_header", "series_rows", "simulate", "summarize", "MONOTONE_SLACK"]

MONOTONE_SLACK = 1e-9
SERIES_FILE = "series.csv"
SUMMARY_FILE = "summary.json"


def series_header(n):
    cols = ["t", "area"]
    cols += [f"W{k}" for k in range(n + 1)]
    cols += [f"Wt{k}" for k in range(n + 1)]
    cols += [f"intLk_{k}" for k in range(n // 2 + 1)]
    return cols + ["min_shift_curv", "max_grad_sq", "r_min", "r_max", "dt"]


def series_rows(series):
    for rec in series.records:
        rep = rec.report
        yield (
            [rec.t, rep.area]
            + list(rep.W)
            + list(rep.Wt)
            + list(rep.int_L)
            + [rec.min_shift_curv, rec.max_grad_sq, rec.r_min, rec.r_max, rec.dt]
        )


def _conserved_keys(spec):
    prefix = "W" if spec.family == "classical" else "Wt"
    return f"{prefix}{spec.m}", f"{prefix}{spec.m + 1}"


def summarize(cfg, series, g_final):
    """Summary dictionary for a finished run."""
    spec = series.spec
    n = cfg.n
    kept, next_key = _conserved_keys(spec)
    kept_vals = series.values(kept)
    summary = {
        "status": series.status,
        "message": series.message,
        "t_final": series.final.t,
        "steps": series.steps,
        "records": len(series),
        "final_radius": float(np.mean(g_final.r)),
        "final_r_min": float(np.min(g_final.r)),
        "final_r_max": float(np.max(g_final.r)),
    }
    kind = "f" if spec.family == "classical" else "ft"
    try:
        summary["predicted_radius"] = invert_monotone(Profile(kind, n, spec.m), kept_vals[0])
    except HypflowError:
        summary["predicted_radius"] = None
    summary["conserved"] = kept
    summary["conservation_drift"] = float(np.max(np.abs(kept_vals - kept_vals[0])) / abs(kept_vals[0]))
    if spec.m < n:
        summary["monotone"] = next_key
        summary["monotonicity_violation"] = monotonicity_verdict(series, next_key)
    else:
        summary["monotone"] = None
        summary["monotonicity_violation"] = 0.0
    summary["c0_ok"] = series.c0_ok
    summary["dt_floor_hit"] = series.dt_floor_hit
    try:
        summary["alpha_fit"], summary["r_squared"] = decay_fit(series)
    except InsufficientDataError:
        summary["alpha_fit"] = summary["r_squared"] = None
    tol = cfg.tolerances
    records = inequality_suite(g_final, eq_tol=tol.eq_tol, viol_tol=tol.viol_tol)
    summary["inequalities"] = [rec.to_dict() for rec in records]
    summary["failed"] = bool(
        series.status in ("blowup", "convexity_lost")
        or summary["monotonicity_violation"] > MONOTONE_SLACK
        or suite_failed(records)
    )
    return summary


def simulate(cfg, *, write=True, out_dir=None):
    """Run ``cfg``; write ``series.csv`` and ``summary.json`` into its output directory.

    Returns ``(summary, series, final_graph)``.
    """
    g0 = cfg.initial_surface()
    series, g = run(g0, cfg.flow)
    summary = summarize(cfg, series, g)
    if write:
        out = cfg.out_dir if out_dir is None else out_dir
        os.makedirs(out, exist_ok=True)
        write_csv(os.path.join(out, SERIES_FILE), series_header(cfg.n), series_rows(series))
        with open(os.path.join(out, SUMMARY_FILE), "w", newline="\n") as fh:
            fh.write(dumps(summary))
    return summary, series, g
