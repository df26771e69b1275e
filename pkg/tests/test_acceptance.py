"""The ten acceptance criteria, each at its stated tolerance and runtime bound.

Every criterion records one PASS/FAIL line that is printed in the terminal
summary.  Stochastic checks go through ``verify.run_suite`` so they use the
preregistered single retry and fixed seeds.
"""
import math
import time

import numpy as np
import pytest

from matricvariate import special, verify

pytestmark = pytest.mark.acceptance


def _suite(tests, seed):
    return verify.run_suite({"suite": "acceptance", "seed": seed, "tests": tests})


def _check_from_report(r):
    params = ",".join(f"{k}={v}" for k, v in r["parameters"].items() if k != "n_samples")
    if r["kind"] == "p_value":
        detail = f"p={float(r['p_value']):.3g} > {r['threshold']}"
    else:
        detail = f"err={float(r['abs_error']):.3g} < {float(r['threshold']):.3g}"
    if r["extra"].get("error"):
        detail += f" ({r['extra']['error']})"
    if r["retried"]:
        detail += " (retried)"
    return f"{r['name']}({params})", r["passed"], detail


def _finish(log, k, title, checks, runtime, limit):
    ok = all(c[1] for c in checks) and runtime < limit
    line = (f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}  "
            f"[{len(checks)} checks, {runtime:.2f} s < {limit} s]")
    log[k] = line
    print(line)
    for label, passed, detail in checks:
        print(f"    {'ok ' if passed else 'BAD'} {label}: {detail}")
    assert ok, line + "\n" + "\n".join(f"{c[0]}: {c[2]}" for c in checks if not c[1])


def test_criterion_01_special_functions(acceptance_log):
    t0 = time.perf_counter()
    reports = _suite([{"name": "special_gamma_quadrature", "params": {"beta": b, "a": a}}
                      for b in (1, 2) for a in (0.7, 1.0, 2.3)], seed=101)
    checks = [_check_from_report(r) for r in reports]
    for beta, m, a, expected in ((1, 2, 1.5, math.pi / 2), (2, 2, 2.0, math.pi)):
        val = math.exp(special.log_mgamma(beta, m, a))
        err = abs(val / expected - 1)
        checks.append((f"Gamma_{m}^{beta}({a})", err < 1e-12, f"rel err={err:.2g} < 1e-12"))
    _finish(acceptance_log, 1, "multivariate gamma vs quadrature and product formula",
            checks, time.perf_counter() - t0, 1.0)


def test_criterion_02_pearson2_normalization(acceptance_log):
    t0 = time.perf_counter()
    tests = [{"name": "normalize_pearson2", "params": {"beta": 1, "nu": nu}} for nu in (2, 3, 5)]
    tests += [{"name": "normalize_pearson2", "params": {"beta": 2, "nu": nu}} for nu in (2, 4)]
    checks = [_check_from_report(r) for r in _suite(tests, seed=102)]
    _finish(acceptance_log, 2, "Pearson II (m=n=1) integrates to 1 by quadrature",
            checks, time.perf_counter() - t0, 5.0)


def test_criterion_03_beta_and_mm_normalization(acceptance_log):
    t0 = time.perf_counter()
    tests = []
    for beta, n, nu in ((1, 3.0, 2.5), (2, 1.5, 4.0), (4, 2.0, 0.7)):
        tests.append({"name": "normalize_beta1", "params": {"beta": beta, "n": n, "nu": nu}})
    for beta, n, nu in ((1, 0.6, 1.5), (2, 2.0, 3.0), (4, 1.0, 2.0)):
        tests.append({"name": "normalize_beta1",
                      "params": {"beta": beta, "n": n, "nu": nu, "flavor": "matrix_multivariate"}})
    for beta, n, nu in ((1, 1, 3.0), (1, 2, 1.5), (2, 1, 4.0)):
        tests.append({"name": "normalize_mmpearson2",
                      "params": {"beta": beta, "m": 1, "n": n, "nu": nu}})
    checks = [_check_from_report(r) for r in _suite(tests, seed=103)]
    _finish(acceptance_log, 3, "beta type I, matrix multivariate beta and Pearson II at m=1",
            checks, time.perf_counter() - t0, 5.0)


def test_criterion_04_corrected_spectral_constant(acceptance_log):
    t0 = time.perf_counter()
    checks = []
    for i, (beta, n, nu) in enumerate(((1, 3.0, 4.0), (2, 4.0, 6.0))):
        m = 2
        base = {"flavor": "singular_pearson", "beta": beta, "m": m, "n": n, "nu": nu,
                "n_points": 1_000_000}
        good, bad = _suite([
            {"name": "mc_normalize_spectral", "params": base},
            {"name": "mc_normalize_spectral", "params": {**base, "printed": True}},
        ], seed=104 + i)
        se = good["extra"]["std_error"]
        checks.append(_check_from_report(good))
        checks.append((f"se(beta={beta})", se < 0.01, f"se={se:.3g} < 0.01"))
        # negative control: the printed exponent inflates the mass by pi^(beta m^2 / 2)
        factor = math.pi ** (beta * m * m / 2)
        est, se_bad = bad["extra"]["estimate"], bad["extra"]["std_error"]
        dev = abs(est / factor - 1)
        checks.append((f"printed exponent, beta={beta}",
                       bad["passed"] is False and dev < 3 * se_bad / factor,
                       f"estimate={est:.4g}, predicted pi^{beta * m * m / 2:g}={factor:.4g}, "
                       f"rel dev={dev:.2g} (rejected as expected)"))
    _finish(acceptance_log, 4, "corrected spectral constant by uniform Monte Carlo",
            checks, time.perf_counter() - t0, 30.0)


def test_criterion_05_sampler_density_agreement(acceptance_log):
    t0 = time.perf_counter()
    N = 100_000
    tests = [{"name": "ks_pearson2_scalar", "params": {"beta": 1, "nu": 2.0, "n_samples": N}}]
    tests += [{"name": "ks_beta1", "params": {"beta": b, "n": n, "nu": nu, "n_samples": N}}
              for b, n, nu in ((1, 3.0, 2.0), (2, 1.5, 3.0), (4, 2.0, 1.5))]
    tests.append({"name": "ks_mmpearson2_trace",
                  "params": {"beta": 2, "m": 1, "n": 1, "nu": 2.5, "n_samples": N}})
    tests += [{"name": "ks_spectral_mcmc_direct",
               "params": {"beta": 1, "m": 2, "n": 3, "nu": 5.0, "index": i, "n_samples": N}}
              for i in (0, 1)]
    checks = [_check_from_report(r) for r in _suite(tests, seed=105)]
    _finish(acceptance_log, 5, "sampler vs density KS agreement",
            checks, time.perf_counter() - t0, 60.0)


def test_criterion_06_theorem1_side_contracts(acceptance_log):
    t0 = time.perf_counter()
    params = {"beta": 1, "m": 2, "n": 3, "nu": 4.0, "n_samples": 100_000}
    reports = _suite([{"name": "independence_theorem1", "params": params},
                      {"name": "ks_u_marginal", "params": params}], seed=106)
    checks = [_check_from_report(r) for r in reports]
    _finish(acceptance_log, 6, "independence of U and R, U ~ Wishart(nu+n)",
            checks, time.perf_counter() - t0, 20.0)


def test_criterion_07_duality_and_affine(acceptance_log):
    t0 = time.perf_counter()
    tests = []
    for beta in (1, 2, 4):
        tests.append({"name": "identity_duality",
                      "params": {"beta": beta, "m": 2, "n": 3, "instances": 100}})
        tests.append({"name": "identity_affine",
                      "params": {"beta": beta, "m": 2, "n": 3, "instances": 100}})
    checks = [_check_from_report(r) for r in _suite(tests, seed=107)]
    _finish(acceptance_log, 7, "transpose duality and affine consistency",
            checks, time.perf_counter() - t0, 5.0)


def test_criterion_08_change_of_variables(acceptance_log):
    t0 = time.perf_counter()
    tests = [{"name": "identity_change_of_variables",
              "params": {"beta": beta, "m": m, "instances": 100}}
             for beta in (1, 2, 4, 8) for m in (2,)]
    checks = [_check_from_report(r) for r in _suite(tests, seed=108)]
    _finish(acceptance_log, 8, "singular-value vs eigenvalue densities",
            checks, time.perf_counter() - t0, 2.0)


def test_criterion_09_elliptical_invariance(acceptance_log):
    t0 = time.perf_counter()
    base = {"beta": 1, "m": 2, "n": 3, "nu": 4, "df": 5.0, "n_samples": 100_000}
    tests = [{"name": "ks_elliptical", "params": {**base, "statistic": s}}
             for s in ("trace", "lambda_max")]
    checks = [_check_from_report(r) for r in _suite(tests, seed=109)]
    _finish(acceptance_log, 9, "matrix-t vs normal generator give the same R",
            checks, time.perf_counter() - t0, 30.0)


def test_criterion_10_bartlett_vs_gram(acceptance_log):
    t0 = time.perf_counter()
    tests = [{"name": "ks_wishart_bartlett_gram",
              "params": {"beta": b, "m": 2, "nu": 7, "n_samples": 100_000}} for b in (1, 2, 4)]
    checks = [_check_from_report(r) for r in _suite(tests, seed=110)]
    _finish(acceptance_log, 10, "Bartlett and Gram Wishart agree at integer nu",
            checks, time.perf_counter() - t0, 10.0)
