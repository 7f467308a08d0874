"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line straight to
the terminal (capture is bypassed) before asserting.  Run with

    pytest tests/test_acceptance.py -v
"""

import json
import math
import time

import numpy as np
import pytest

from hypflow.cli import main
from hypflow.config import RunConfig
from hypflow.errors import ConfigError
from hypflow.flow import FlowSpec, quotient_values, run
from hypflow.functionals import curvature_integrals, functional_report, minkowski_residuals, quermassintegrals
from hypflow.hypgeom import Profile, ball_quermass_all, ball_quermass_shifted, invert_monotone
from hypflow.surface import geometry, make_perturbed_sphere, make_sphere
from hypflow.symfun import elementary_all
from hypflow.verify import IDENTITY_TOL, decay_fit, identity_battery, inequality_suite, monotonicity_verdict

MONO_SLACK = 1e-9


def report(capsys, number, checks, elapsed, budget):
    """Print one line for the criterion, then fail if anything did not hold."""
    failed = [name for name, ok in checks if not ok]
    if elapsed > budget:
        failed.append(f"runtime {elapsed:.1f}s > {budget:.0f}s")
    status = "PASS" if not failed else "FAIL"
    detail = f"{len(checks)} checks, {elapsed:.1f}s" + ("" if not failed else " | failed: " + "; ".join(failed[:5]))
    with capsys.disabled():
        print(f"\n[criterion {number}] {status} {detail}")
    assert not failed, failed


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_identity_battery(capsys):
    t0 = time.perf_counter()
    checks = []
    for n in range(3, 10):
        res = identity_battery(n, 1000, seed=n)
        worst = max(res.values())
        checks.append((f"n={n} max violation {worst:.2e}", worst <= IDENTITY_TOL))
    report(capsys, 1, checks, time.perf_counter() - t0, 10)


def test_criterion_2_sphere_exactness(capsys):
    t0 = time.perf_counter()
    checks = []
    for n in (2, 5, 9):
        for r0 in (0.5, 1.0, 2.0):
            g = make_sphere(n, "axisymmetric", 128, r0)
            F = geometry(g)
            tag = f"n={n} r0={r0}"
            checks.append((f"{tag} kappa", np.max(np.abs(F.kappa - 1 / math.tanh(r0))) <= 1e-10))
            W, _ = quermassintegrals(g, F)
            fk = ball_quermass_all(n, r0)
            checks.append((f"{tag} W_k", max(rel(W[k], fk[k]) for k in range(n + 1)) <= 1e-9))
            ci = curvature_integrals(g, fields=F)
            h = [Profile("h", n, k)(r0) for k in range(n + 1)]
            ht = [Profile("ht", n, k)(r0) for k in range(n + 1)]
            gk = [Profile("g", n, k)(r0) for k in range(n // 2 + 1)]
            gt = [Profile("gt", n, k)(r0) for k in range(n // 2 + 1)]
            checks.append((f"{tag} int dlam E_k", max(rel(a, b) for a, b in zip(ci["int_dlam_E"], h)) <= 1e-9))
            checks.append((f"{tag} int shifted E_k", max(rel(a, b) for a, b in zip(ci["int_shift_E"], ht)) <= 1e-9))
            checks.append((f"{tag} int L_k", max(rel(a, b) for a, b in zip(ci["int_L"], gk)) <= 1e-9))
            checks.append((f"{tag} int uL_k", max(rel(a, b) for a, b in zip(ci["int_uL"], gt)) <= 1e-9))
            rho, rho_t = minkowski_residuals(g, F)
            # residuals are measured on the scale of their own terms
            scale = np.maximum(1.0, np.abs(ci["int_dlam_E"][:n]))
            scale_t = np.maximum(1.0, np.abs(ci["int_shift_E"][:n]))
            worst = max(np.max(np.abs(rho) / scale), np.max(np.abs(rho_t) / scale_t))
            checks.append((f"{tag} Minkowski {worst:.1e}", worst <= 1e-11))
    report(capsys, 2, checks, time.perf_counter() - t0, 5)


def test_criterion_3_grid_convergence(capsys):
    t0 = time.perf_counter()
    checks = []
    r0, eps, j = 1.0, 0.05, 2
    for n in (2, 5, 9):
        res, err = [], []
        for N in (128, 256):
            g = make_perturbed_sphere(n, "axisymmetric", N, r0, eps, j)
            fd = geometry(g)
            exact = geometry(g, derivs=(-eps * j * np.sin(j * g.theta), -eps * j * j * np.cos(j * g.theta)))
            err.append(np.max(np.abs(fd.kappa - exact.kappa)))
            rho, rho_t = minkowski_residuals(g, fd)
            res.append(np.concatenate([rho, rho_t]))
        checks.append((f"n={n} curvature ratio {err[0] / err[1]:.1f}", err[0] / err[1] >= 8))
        big = np.abs(res[0]) > 1e-12
        ratio = np.min(np.abs(res[0][big]) / np.abs(res[1][big]))
        checks.append((f"n={n} Minkowski ratio {ratio:.1f}", bool(big.any()) and ratio >= 8))
    report(capsys, 3, checks, time.perf_counter() - t0, 10)


def _flow_run(family, m):
    g0 = make_perturbed_sphere(2, "axisymmetric", 128, 1.0, 0.05, 2)
    spec = FlowSpec(family, m, "rk4", 0.5, t_max=8.0, stop_grad_sq=1e-12, record_every=0.01)
    series, g = run(g0, spec)
    return g0, spec, series, g


def _nonincreasing(series, key):
    return monotonicity_verdict(series, key) <= MONO_SLACK


@pytest.mark.slow
def test_criterion_4_classical_flow(capsys):
    t0 = time.perf_counter()
    checks = []
    n = 2
    for m in (1, 2):
        g0, spec, s, g = _flow_run("classical", m)
        tag = f"m={m}"
        w = s.values(f"W{m}")
        checks.append((f"{tag} converged ({s.status})", s.status == "converged"))
        checks.append((f"{tag} W_m drift", np.max(np.abs(w - w[0])) / w[0] <= 1e-6))
        if m < n:
            checks.append((f"{tag} W_(m+1) nonincreasing", _nonincreasing(s, f"W{m + 1}")))
        checks.append((f"{tag} min shifted curvature", s.values("min_shift_curv").min() >= -1e-6))
        r_inf = invert_monotone(Profile("f", n, m), w[0])
        checks.append((f"{tag} final radius", rel(np.mean(g.r), r_inf) <= 1e-4 and np.ptp(g.r) <= 1e-5))
        for k in range(n // 2 + 1):
            if 1 <= m <= 2 * k + 1:
                checks.append((f"{tag} int Ltilde_{k} nonincreasing", _nonincreasing(s, f"int_Ltilde_{k}")))
        for k in range(m, n + 1):
            checks.append((f"{tag} int dlam E_{k} nonincreasing", _nonincreasing(s, f"int_dlam_E_{k}")))
    report(capsys, 4, checks, time.perf_counter() - t0, 120)


@pytest.mark.slow
def test_criterion_5_shifted_flow(capsys):
    t0 = time.perf_counter()
    checks = []
    n = 2
    for m in (1, 2):
        g0, spec, s, g = _flow_run("shifted", m)
        tag = f"m={m}"
        w = s.values(f"Wt{m}")
        checks.append((f"{tag} converged ({s.status})", s.status == "converged"))
        checks.append((f"{tag} Wt_m drift", np.max(np.abs(w - w[0])) / w[0] <= 1e-6))
        if m < n:
            checks.append((f"{tag} Wt_(m+1) nonincreasing", _nonincreasing(s, f"Wt{m + 1}")))
        # flows of index k or k + 1 make int (lambda' - u) E_k(kt) monotone
        for k in (m - 1, m):
            checks.append((f"{tag} int shifted E_{k} nonincreasing", _nonincreasing(s, f"int_shift_E_{k}")))
        r_inf = invert_monotone(Profile("ft", n, m), w[0])
        checks.append((f"{tag} final radius", rel(np.mean(g.r), r_inf) <= 1e-4))
        alpha0 = 2 * (n - 1) / (n * (math.cosh(r_inf) - math.sinh(r_inf)))
        alpha, r2 = decay_fit(s)
        checks.append((f"{tag} decay alpha={alpha:.3g} alpha0={alpha0:.3g} R2={r2:.4f}", alpha >= 0.5 * alpha0 and r2 >= 0.98))
        F0 = quotient_values(geometry(g0), spec)
        checks.append(
            (f"{tag} F range", s.values("F_min").min() >= 0.25 * F0.min() and s.values("F_max").max() <= 4 * F0.max())
        )
    report(capsys, 5, checks, time.perf_counter() - t0, 120)


def _random_hconvex(n, seed):
    """Seeded random h-convex surface; redraws until the configuration is accepted."""
    rng = np.random.default_rng(1000 * n + seed)
    while True:
        ini = {"kind": "random", "r0": float(rng.uniform(0.6, 1.4)), "eps": float(rng.uniform(0.01, 0.05)), "freq": int(rng.integers(2, 5))}
        cfg = RunConfig.from_dict({"n": n, "mode": "axisymmetric", "grid_N": 128, "initial": ini, "seed": int(rng.integers(1 << 30))})
        try:
            return cfg.initial_surface()
        except ConfigError:
            continue


@pytest.mark.slow
def test_criterion_6_inequality_suite(capsys):
    t0 = time.perf_counter()
    checks = []
    for n in (2, 5, 9):
        counts = {"holds": 0, "equality": 0, "violated": 0}
        ulk2 = 0
        for seed in range(10):
            recs = inequality_suite(_random_hconvex(n, seed))
            for r in recs:
                if r.hypotheses_ok:
                    counts[r.verdict] += 1
                if r.id == "ULK" and r.indices.get("k") == 2 and r.hypotheses_ok:
                    ulk2 += 1
        checks.append((f"n={n} random surfaces {counts}", counts["violated"] == 0 and counts["holds"] > 0))
        if n == 9:
            checks.append((f"n=9 ULK k=2 admissible records {ulk2}", ulk2 > 0))
        recs = inequality_suite(make_sphere(n, "axisymmetric", 128, 1.0))
        adm = [r for r in recs if r.hypotheses_ok]
        worst = max(abs(r.relative_gap) for r in adm)
        checks.append((f"n={n} sphere all equality (max gap {worst:.1e})", all(r.verdict == "equality" for r in adm) and worst <= 1e-6))
    report(capsys, 6, checks, time.perf_counter() - t0, 180)


def test_criterion_7_variational_formulas(capsys):
    t0 = time.perf_counter()
    checks = []
    h = 1e-4
    for n in (2, 5, 9):
        for base in ("sphere", "perturbed"):
            if base == "sphere":
                g = make_sphere(n, "axisymmetric", 128, 1.0)
            else:
                g = make_perturbed_sphere(n, "axisymmetric", 128, 1.0, 0.05, 2)
            f = 1.0 + 0.3 * np.cos(g.theta) ** 2 + 0.1 * np.cos(g.theta)
            Wp, Wtp = quermassintegrals(g.with_r(g.r + h * f))
            Wm, Wtm = quermassintegrals(g.with_r(g.r - h * f))
            F = geometry(g)
            eta_w = F.weight * f / F.v
            pred = np.sum(eta_w[:, None] * elementary_all(F.kappa), axis=0)
            pred_t = np.sum(eta_w[:, None] * elementary_all(F.kappa_shift), axis=0)
            dW, dWt = (Wp - Wm) / (2 * h), (Wtp - Wtm) / (2 * h)
            # three significant digits
            e = np.max(np.abs(dW - pred) / np.abs(pred))
            et = np.max(np.abs(dWt - pred_t) / np.maximum(np.abs(pred_t), 1e-300))
            checks.append((f"n={n} {base} W_k rel {e:.1e}", e <= 5e-4))
            checks.append((f"n={n} {base} Wt_k rel {et:.1e}", et <= 5e-4))
    report(capsys, 7, checks, time.perf_counter() - t0, 10)


def test_criterion_8_determinism_and_exit_codes(capsys, tmp_path):
    t0 = time.perf_counter()
    cfg = {
        "n": 2,
        "mode": "axisymmetric",
        "grid_N": 32,
        "initial": {"kind": "perturbed", "r0": 1.0, "eps": 0.05, "freq": 2},
        "flow": {"family": "classical", "m": 1, "t_max": 0.3, "record_every": 0.01},
    }
    paths = []
    for name in ("a", "b"):
        cfg["out_dir"] = str(tmp_path / name)
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(cfg))
        paths.append(str(p))
    codes = {}
    codes["simulate"] = main(["simulate", "--quiet", "--config", paths[0], "--config", paths[1]])
    first = (tmp_path / "a" / "series.csv").read_bytes()
    codes["simulate again"] = main(["simulate", "--quiet", "--config", paths[0]])
    same = first == (tmp_path / "b" / "series.csv").read_bytes() == (tmp_path / "a" / "series.csv").read_bytes()
    codes["violated"] = main(["inequalities", "--config", paths[0], "--flip-sign", "W1"])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(cfg, unknown_key=1)))
    codes["bad config"] = main(["simulate", "--config", str(bad)])
    codes["bad usage"] = main(["no-such-command"])
    capsys.readouterr()
    checks = [
        ("byte-identical series.csv", same),
        ("exit 0", codes["simulate"] == 0 and codes["simulate again"] == 0),
        ("exit 1", codes["violated"] == 1),
        ("exit 2", codes["bad config"] == 2 and codes["bad usage"] == 2),
    ]
    report(capsys, 8, checks, time.perf_counter() - t0, 60)
