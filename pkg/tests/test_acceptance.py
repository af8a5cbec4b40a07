"""Acceptance criteria, each checked at its stated tolerance.

Every test records one ``criterion N: PASS|FAIL ...`` line; the lines are
printed together at the end of the pytest run.
"""
import dataclasses
import itertools
import time

import numpy as np
import pytest

from chaindiff.cli import bundled_scenarios, main
from chaindiff.config import load_scenario
from chaindiff.control import (ClosedLoopConfig, ControllerSpec, PlantSpec, closed_loop_simulate,
                               compare_estimators, loop_metrics)
from chaindiff.diffcore import DifferentiatorSpec, alpha_schedule, differentiator_rhs, geometric_gains
from chaindiff.equivalence import verify_equivalence
from chaindiff.errors import IntegrationError
from chaindiff.homogeneity import DilationWeights, convergence_race, dilation_weights, homogeneity_residual
from chaindiff.metrics import epsilon_sweep
from chaindiff.odesim import SimConfig
from chaindiff.signals import NoiseSpec, Sinusoid

from conftest import ACCEPTANCE

GRID_N = (2, 3, 4)
GRID_ALPHA1 = (0.3, 0.5, 0.7)


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def _discrepancy(gains, eps, h):
    try:
        rep = verify_equivalence(gains, eps, Sinusoid(), SimConfig(5.0, h, record_stride=10))
        return rep.max_discrepancy
    except IntegrationError:
        return np.inf


def test_criterion_1_equivalence():
    failures, worst, min_ratio, slowest = [], 0.0, np.inf, 0.0
    over_tol = no_shrink = 0
    for n, ratio, eps in itertools.product(GRID_N, (1, 2, 5), (0.1, 0.05, 0.01)):
        gains = geometric_gains(1.0, ratio, n)
        start = time.perf_counter()
        d_h = _discrepancy(gains, eps, 1e-4)
        d_h2 = _discrepancy(gains, eps, 5e-5)
        slowest = max(slowest, time.perf_counter() - start)
        shrink = d_h / d_h2 if d_h2 > 0 else np.inf
        worst = max(worst, d_h)
        min_ratio = min(min_ratio, shrink)
        over_tol += not d_h < 1e-7
        no_shrink += not shrink >= 8
        if not (d_h < 1e-7 and shrink >= 8):
            failures.append(f"n={n} r={ratio} eps={eps}: d={d_h:.1e} shrink={shrink:.2f}")
        print(f"  n={n} ratio={ratio} eps={eps}: discrepancy={d_h:.3e} at h, "
              f"{d_h2:.3e} at h/2, shrink={shrink:.2f}")
    record(1, not failures and slowest < 10,
           f"27 cases, {len(failures)} failing ({over_tol} above 1e-7, {no_shrink} shrink < 8x); "
           f"worst discrepancy={worst:.2e}, "
           f"min shrink={min_ratio:.2f}, slowest case {slowest:.2f}s"
           + (f"; first failures: {'; '.join(failures[:3])}" if failures else ""))


def test_criterion_2_constraint_necessity():
    lowest, cases = np.inf, 0
    for ratio, eps in itertools.product((2, 5), (0.1, 0.05, 0.01)):
        base = geometric_gains(1.0, ratio, 3)
        for i in range(3):
            gains = base.copy()
            gains[i] *= 1.01
            rep = verify_equivalence(gains, eps, Sinusoid(), SimConfig(5.0, 1e-4, record_stride=10))
            cases += 1
            lowest = min(lowest, rep.max_discrepancy if not rep.passed else 0.0)
    record(2, lowest > 1e-3, f"{cases} single-gain 1% perturbations, smallest discrepancy={lowest:.2e} (> 1e-3 needed)")


def test_criterion_3_homogeneity():
    worst_good, weakest_bad = 0.0, np.inf
    for n, a1 in itertools.product(GRID_N, GRID_ALPHA1):
        gains = np.arange(1.0, n + 1)
        worst_good = max(worst_good, homogeneity_residual(n, gains, a1, sample_count=10_000))
        w = dilation_weights(n, a1)
        bad = DilationWeights(w.r + np.eye(n)[0] * 0.1, w.k)
        weakest_bad = min(weakest_bad, homogeneity_residual(n, gains, a1, 10_000, weights=bad))
    record(3, worst_good < 1e-10 and weakest_bad > 1e-2,
           f"max residual with correct weights={worst_good:.2e} (< 1e-10), "
           f"min residual with perturbed weights={weakest_bad:.2e} (> 1e-2)")


def test_criterion_4_exponent_schedule():
    monotone, worst = True, 0.0
    for n, a1 in itertools.product(GRID_N, GRID_ALPHA1):
        al = alpha_schedule(a1, n)
        monotone &= bool(np.all(np.diff(al) > 0) and al[-1] < 1 and al[0] > 0)
        worst = max(worst, dilation_weights(n, a1).exponent_residual(al))
    record(4, monotone and worst < 1e-12,
           f"strictly increasing in (0,1): {monotone}; max |r_i alpha_i - (k + r_n)|={worst:.1e}")


def test_criterion_5_epsilon_order():
    start = time.perf_counter()
    spec = DifferentiatorSpec(2, (1, 2), 0.04, "integral-chain-linear")
    sweep = epsilon_sweep(spec, [0.04, 0.02, 0.01, 0.005], Sinusoid(),
                          SimConfig(10.0, 1e-4, record_stride=10))
    elapsed = time.perf_counter() - start
    f1, f2 = sweep.fit(1), sweep.fit(2)
    decreasing = bool(np.all(np.diff(sweep.errors, axis=0) < 0))
    gap = f1.slope - f2.slope
    record(5, decreasing and gap >= 0.5 and elapsed < 60,
           f"errors decreasing: {decreasing}; slope x1={f1.slope:.4f}, x2={f2.slope:.4f}, "
           f"difference={gap:.4f} (>= 0.5 needed); {elapsed:.2f}s")


def test_criterion_6_unit_exponent_reduction():
    rng = np.random.default_rng(6)
    worst, count = 0.0, 0
    specs = [DifferentiatorSpec(n, tuple(geometric_gains(1.0, 2.0, n)) if n < 4 else (1, 4, 6, 4),
                                eps, "integral-chain-nonlinear", alpha1=0.5)
             for n, eps in ((2, 0.1), (3, 0.05), (4, 0.2))]
    for k in range(100_000):
        spec = specs[k % 3]
        x = rng.uniform(-10, 10, spec.n)
        v = rng.uniform(-10, 10)
        nl = differentiator_rhs(spec, x, v, exponents=np.ones(spec.n))
        lin = differentiator_rhs(spec.replace(variant="integral-chain-linear", alpha1=None), x, v)
        scale = np.max(np.abs(lin)) + 1.0
        worst = max(worst, float(np.max(np.abs(nl - lin)) / scale))
        count += 1
    record(6, worst <= 4 * np.finfo(float).eps,
           f"{count} random (state, input) pairs, max relative difference={worst:.1e}")


def test_criterion_7_convergence_race():
    sc = load_scenario(bundled_scenarios()["convergence-race"])
    r = sc.race
    res = convergence_race(r["gains"], r["alpha1"], r["hybrid_gains"], r["offsets"],
                           r["threshold"], sc.sim)
    frac = res.hybrid_win_fraction()
    i1 = int(np.argmin(np.abs(res.offsets - 1.0)))
    record(7, frac >= 0.9 and len(res.offsets) == 50,
           f"hybrid settles first for {frac:.0%} of {len(res.offsets)} offsets; near offset 1: "
           f"linear={res.linear[i1]:.3f}s nonlinear={res.nonlinear[i1]:.3f}s hybrid={res.hybrid[i1]:.3f}s")


def test_criterion_8_closed_loop():
    cfg = load_scenario(bundled_scenarios()["noisy-tracking"]).closed_loop
    start = time.perf_counter()
    runs = compare_estimators(cfg)
    elapsed = time.perf_counter() - start
    ic = runs["integral-chain-linear"]
    m_ic, m_hg = loop_metrics(ic), loop_metrics(runs["high-gain-linear"])
    bounded = bool(np.all(np.isfinite(ic.data))) and m_ic["max_abs_u"] < 10.0
    tracking = m_ic["max_abs_e1_final_half"] < 0.05
    omega = m_ic["rms_omega_err"] < m_hg["rms_omega_err"]
    f = m_ic["rms_f_err"] < m_hg["rms_f_err"]
    record(8, bounded and tracking and omega and f and elapsed < 120,
           f"(a) max|u|={m_ic['max_abs_u']:.3f} {'ok' if bounded else 'FAIL'}; "
           f"(b) max|e1| final half={m_ic['max_abs_e1_final_half']:.4f} {'ok' if tracking else 'FAIL'}; "
           f"(c) RMS(omega err) IC={m_ic['rms_omega_err']:.4f} HG={m_hg['rms_omega_err']:.4f} "
           f"{'ok' if omega else 'FAIL'}, RMS(f err) IC={m_ic['rms_f_err']:.4f} "
           f"HG={m_hg['rms_f_err']:.4f} {'ok' if f else 'FAIL'}; {elapsed:.2f}s")


def test_criterion_9_known_bound():
    h, l, b = 1e-4, 0.15, 133.0
    est = DifferentiatorSpec(3, (10, 10, 10), 0.01)
    ctrl = ControllerSpec(10.0, l, Sinusoid(), est, mode="known-bound")
    cfg = ClosedLoopConfig(PlantSpec(b), ctrl, NoiseSpec(), SimConfig(10.0, h))
    ts = closed_loop_simulate(cfg)
    s = ts["s"]
    band = 5 * h * l * abs(b)
    outside = np.abs(s[:-1]) > band
    rises = np.flatnonzero(outside & (s[1:] ** 2 > s[:-1] ** 2))
    e1_end = abs(ts["e1"][-1])
    record(9, rises.size == 0 and e1_end < 1e-3,
           f"s^2/2 increases at {rises.size} steps outside band {band:.2e}; |e1(10)|={e1_end:.2e}")


def test_criterion_10_determinism(tmp_path):
    mismatched = []
    names = sorted(bundled_scenarios())
    for name in names:
        a, b = tmp_path / name / "a", tmp_path / name / "b"
        assert main(["run", name, "--out", str(a), "--seed", "7", "-q"]) == 0
        assert main(["run", name, "--out", str(b), "--seed", "7", "-q"]) == 0
        for f in sorted(p.name for p in a.iterdir()):
            if (a / f).read_bytes() != (b / f).read_bytes():
                mismatched.append(f"{name}/{f}")
    record(10, not mismatched, f"{len(names)} bundled scenarios rerun with seed 7; "
           f"{len(mismatched)} differing files")
