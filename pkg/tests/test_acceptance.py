"""Acceptance suite: one PASS/FAIL line per criterion.

Lines are printed as each test runs (visible with ``-s``) and repeated in the
terminal summary. ``python3 tests/test_acceptance.py`` runs the suite directly.
"""
import math
import time

import numpy as np
import pytest

from nbodybounds import doubling, graph, models, theta
from nbodybounds.sigma import build_sigma, random_distribution, s_value, sigma_value

RESULTS = []


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def sigma_graph(n):
    return graph.build_graph(build_sigma(n).support)


def test_criterion_1_family_verification():
    parts, ok = [], True
    for n in (2, 3, 4, 5):
        t0 = time.perf_counter()
        v = doubling.verify_family(doubling.build_family(n), build_sigma(n))
        dt = time.perf_counter() - t0
        target = (2 + math.sqrt(2)) * 2 ** (n - 2)
        good = v.ok and abs(v.derived_bound - target) <= 1e-9 and (n < 5 or dt <= 60)
        ok &= good
        parts.append(f"n={n} {'ok' if good else 'bad ' + ','.join(v.failures)} {dt:.1f}s")
    report(1, ok, "; ".join(parts))


def test_criterion_2_theta_quantum_bound():
    q = 2 + math.sqrt(2)
    t2 = theta.lovasz_theta(sigma_graph(2)).value
    t0 = time.perf_counter()
    t3 = theta.lovasz_theta(sigma_graph(3)).value
    dt = time.perf_counter() - t0
    ok = abs(t2 - q) <= 1e-5 and abs(t3 - 2 * q) <= 1e-3 and dt <= 300
    report(2, ok, f"theta2={t2:.9f} theta3={t3:.9f} ({dt:.1f}s)")


def test_criterion_3_vertex_transitivity_identity():
    parts, ok = [], True
    for n in (2, 3):
        g = sigma_graph(n)
        vt = graph.is_vertex_transitive(g)
        rep = theta.product_identity_check(g, tol=1e-3)
        ok &= vt and rep.ok
        parts.append(f"n={n} transitive={vt} ratio={rep.ratio:.9f}")
    report(3, ok, "; ".join(parts))


def test_criterion_4_hybrid_bound():
    values = {n: models.hybrid_bound(n).value for n in (2, 3, 4)}
    brute = models.hybrid_bound_enumerate(3)
    ok = all(v == 3 * 2 ** (n - 2) for n, v in values.items()) and brute == values[3]
    detail = " ".join(f"n={n}:{v} (want {3 * 2 ** (n - 2)})" for n, v in values.items())
    report(4, ok, f"{detail}; double enumeration n=3: {brute}")


def test_criterion_5_alpha_equals_local():
    parts, ok = [], True
    for n, want in ((2, 3), (3, 6)):
        a = graph.independence_number(sigma_graph(n)).value
        loc = models.local_bound(n).sigma
        ok &= a == want == loc
        parts.append(f"alpha{n}={a} local{n}={loc}")
    report(5, ok, " ".join(parts))


def test_criterion_6_quantum_achievability():
    _, s2 = models.optimize_sn_angles(2)
    _, s3 = models.optimize_sn_angles(3)
    ok = s2 >= 2.828426 and s3 >= 5.656853
    for n, s in ((2, s2), (3, s3)):
        ok &= abs(models.sigma_from_s(s, n) - doubling.derive_bound(n)) <= 1e-4
    rng = np.random.default_rng(7)
    err = 0.0
    for n in range(2, 7):
        a = rng.uniform(-2 * math.pi, 2 * math.pi, size=(1000, n))
        err = max(err, float(np.max(np.abs(models.ghz_correlators(a) - np.cos(a.sum(1))))))
    ok &= err <= 1e-10
    report(6, ok, f"S2={s2:.9f} S3={s3:.9f} ghz max err={err:.2e}")


def test_criterion_7_nonsignaling_maximum():
    parts, ok = [], True
    for n in (2, 3, 4):
        box = models.ns_box(n)
        val = sigma_value(build_sigma(n), box.p)
        ns = models.check_nonsignaling(box.p)
        ok &= val == 2 ** n and ns
        parts.append(f"n={n} sigma={val:g} nonsignaling={ns}")
    report(7, ok, "; ".join(parts))


def test_criterion_8_solver_self_tests():
    c5 = theta.lovasz_theta(graph.cycle_graph(5)).value
    errs = {m: abs(theta.lovasz_theta(graph.cycle_graph(m)).value - theta.odd_cycle_theta(m))
            for m in (7, 9)}
    a5 = graph.independence_number(graph.cycle_graph(5)).value
    ok = abs(c5 - 2.2360680) <= 1e-6 and all(e <= 1e-6 for e in errs.values()) and a5 == 2
    report(8, ok, f"theta(C5)={c5:.9f} errC7={errs[7]:.1e} errC9={errs[9]:.1e} alpha(C5)={a5}")


def test_criterion_9_identities():
    rng = np.random.default_rng(9)
    worst_sigma, worst_mass = 0.0, 0.0
    for n in (2, 3, 4, 5):
        expr = build_sigma(n)
        for _ in range(1000):
            p = random_distribution(n, rng)
            err = abs(sigma_value(expr, p) - (s_value(expr.terms, p) / 2 + 2 ** (n - 1)))
            worst_sigma = max(worst_sigma, err)
        for _ in range(20):
            _, c = doubling.product_distribution(random_distribution(n, rng),
                                                 random_distribution(n, rng), expr)
            worst_mass = max(worst_mass, abs(c.in_in - c.in_in_expected),
                             abs(c.out_out - c.out_out_expected))
    ok = worst_sigma <= 1e-10 and worst_mass <= 1e-10
    report(9, ok, f"sigma/S max err={worst_sigma:.1e} product mass max err={worst_mass:.1e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
