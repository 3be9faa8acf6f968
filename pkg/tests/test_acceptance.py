"""Acceptance criteria, each at its stated tolerance.

Every test logs exactly one ``PASS``/``FAIL`` line (collected again in the
terminal summary) before asserting.
"""

import itertools
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from resolvent_thresholds import lattice as lt
from resolvent_thresholds import verify as vf
from resolvent_thresholds.quadrature import TorusGrid, gauss_segment
from resolvent_thresholds.specfun import dilog


@pytest.fixture(scope="module")
def full_run():
    """One in-process ``all`` run with timings, indexed by check id."""
    start = time.perf_counter()
    reports = vf.run_identity_suite("all", record_timings=True)
    elapsed = time.perf_counter() - start
    return {r.check_id: r for r in reports}, elapsed


def _suite_summary(reports):
    worst = max(reports, key=lambda r: r.max_residual / r.tolerance)
    return f"{len(reports)} checks, worst {worst.check_id} residual {worst.max_residual:.2e} <= tol {worst.tolerance:.0e}"


def _require(by_id, prefix_or_ids):
    if isinstance(prefix_or_ids, str):
        out = [r for cid, r in by_id.items() if cid.startswith(prefix_or_ids)]
    else:
        out = [by_id[cid] for cid in prefix_or_ids]
    assert out, f"no checks for {prefix_or_ids!r}"
    return out


def test_quadrature_exact_eigenequation(acceptance_log):
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for d, N in ((1, 64), (2, 64), (3, 48)):
        grid = TorusGrid(d, N)
        for z in [2 + 1j, 3 + 0.5j] + [4 * q + 0.3 + 0.2j for q in range(d + 1)]:
            table = lt.lattice_kernel_table(d, z, grid)
            idx = np.arange(-4, 5) % N
            box = table[np.ix_(*([idx] * d))]
            for n in itertools.product(range(-3, 4), repeat=d):
                k = box[tuple(v + 4 for v in n)]
                lhs = -lt.apply_discrete_laplacian(box, n, (-4,) * d) - z * k
                worst = max(worst, abs(lhs - (0.0 if any(n) else 1.0)) / (1 + abs(k)))
                count += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-11 and elapsed <= 30
    acceptance_log(1, "quadrature-exact eigenequation", ok,
                   f"{count} points, max scaled residual {worst:.2e} <= 1e-11, {elapsed:.1f} s <= 30 s")
    assert ok


def test_closed_form_1d_oracle(acceptance_log):
    # the residue formula is validated against Gauss quadrature first
    gauss_worst = 0.0
    for z in (2 + 1j, 0.3 + 0.2j, -1 + 0.5j, 3.9 + 0.3j, 5 + 1.5j):
        for n in (0, 1, -4, 5):
            f = lambda t: np.exp(1j * n * t) / (4 * np.sin(t / 2) ** 2 - z)
            quad = gauss_segment(f, 0.0, 2 * math.pi, panels=64, order=24) / (2 * math.pi)
            closed = lt.lattice_kernel(1, z, [n], method="closed").value
            gauss_worst = max(gauss_worst, abs(quad - closed))
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        z = complex(rng.uniform(-2, 6), rng.uniform(0.05, 2.0))
        n = int(rng.integers(-5, 6))
        trap = lt.lattice_kernel(1, z, [n]).value
        worst = max(worst, abs(trap - lt.lattice_kernel(1, z, [n], method="closed").value))
    ok = gauss_worst <= 1e-12 and worst <= 1e-12
    acceptance_log(2, "1-D closed-form oracle", ok,
                   f"closed vs Gauss {gauss_worst:.2e}; lattice_kernel vs closed, 50 z: {worst:.2e} <= 1e-12")
    assert ok


def test_special_function_identities(full_run, acceptance_log):
    by_id, _ = full_run
    wanted = {
        "specfun.gamma.recurrence": 1e-12,
        "specfun.hyp2f1.chebyshev": 1e-12,
        "specfun.hyp2f1.euler": 1e-12,
        "specfun.dilog.inversion": 1e-12,
        "specfun.entire.bessel": 1e-12,
        "specfun.sphere-average.entire": 1e-11,
        "specfun.sphere-moment.quadrature": 1e-9,
    }
    reports = _require(by_id, list(wanted))
    ok = all(r.passed and r.max_residual <= wanted[r.check_id] for r in reports)
    acceptance_log(3, "special-function identities", ok, _suite_summary(reports))
    assert ok


def test_dilog_integral_identity(full_run, acceptance_log):
    by_id, _ = full_run
    (rep,) = _require(by_id, ["continuum.dilog-integral"])
    # independent spot check at w = 2 + 2i with lambda = e^{-s}
    w = 2 + 2j
    f = lambda s: -s * np.exp(-s) * (1 / (np.exp(-s) - w) - 1 / (np.exp(-s) + w))
    lhs = gauss_segment(f, 0.0, 60.0, panels=60, order=24)
    spot = abs(lhs - (dilog(1 / w) - dilog(-1 / w)))
    ok = rep.passed and rep.samples == 20 and rep.max_residual <= 1e-10 and spot <= 1e-10
    acceptance_log(4, "dilogarithm integral identity", ok,
                   f"20 points residual {rep.max_residual:.2e}, w=2+2i residual {spot:.2e} <= 1e-10")
    assert ok


def test_phi_psi_closed_forms(full_run, acceptance_log):
    by_id, _ = full_run
    ids = [f"continuum.phi-psi.p{p}q{q}" for p, q in ((1, 1), (2, 1), (1, 2), (2, 2), (3, 1))]
    ids += [f"lattice.phi-psi.d{d}q{q}" for d, q in ((2, 1), (3, 1), (3, 2), (4, 2))]
    reports = _require(by_id, ids)
    ok = all(r.passed and r.max_residual <= 1e-9 and r.samples >= 10 for r in reports)
    acceptance_log(5, "phi/psi closed forms vs contour integrals", ok, _suite_summary(reports))
    assert ok


def test_E_eigenequation(full_run, acceptance_log):
    by_id, _ = full_run
    reports = _require(by_id, ["eigen.E.d1q0", "eigen.E.d2q1", "eigen.E.d3q1"])
    ok = all(r.passed and r.max_residual <= 1e-8 for r in reports)
    acceptance_log(6, "E^(l) eigenequation at degree 24", ok, _suite_summary(reports))
    assert ok


def test_branching_ray_limits(full_run, acceptance_log):
    by_id, _ = full_run
    spreads = _require(by_id, "branching.")
    rates = [r for r in spreads if r.check_id.endswith(".rate")]
    spreads = [r for r in spreads if r.check_id.endswith(".spread")]
    controls = _require(by_id, "negative-control.")
    lattice_cases = {f"d{d}q{q}" for d, q in ((1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1))}
    continuum_cases = {f"p{p}q{q}" for p, q in ((1, 0), (2, 0), (1, 1), (2, 1))}
    covered = {r.check_id.split(".")[2] for r in spreads}
    runtime = sum(r.runtime_ms for r in spreads + rates + controls) / 1000
    ok = (
        covered == lattice_cases | continuum_cases
        and all(r.passed and r.max_residual <= 1e-5 for r in spreads)
        and all(r.passed and r.max_residual <= math.log(2) for r in rates)
        and all(r.passed for r in controls)
        and runtime <= 120
    )
    worst_spread = max(r.max_residual for r in spreads)
    worst_rate = math.exp(max(r.max_residual for r in rates))
    worst_ctrl = max(r.max_residual / r.tolerance for r in controls)
    acceptance_log(
        7, "branching via ray limits", ok,
        f"spread {worst_spread:.2e} <= 1e-5, rate factor {worst_rate:.4f} <= 2, "
        f"controls at {worst_ctrl:.1e} of budget, {runtime:.1f} s <= 120 s",
    )
    assert ok


def test_odd_boundary_jump(full_run, acceptance_log):
    by_id, _ = full_run
    reports = _require(by_id, "boundary.lattice.")
    d1 = [r for r in reports if ".d1" in r.check_id]
    d3 = [r for r in reports if ".d3" in r.check_id]
    ok = bool(d1 and d3) and all(r.passed and r.max_residual <= 1e-6 for r in d1) and all(
        r.passed and r.max_residual <= 1e-4 for r in d3
    )
    acceptance_log(
        8, "odd-d boundary jump", ok,
        f"d=1 max {max(r.max_residual for r in d1):.2e} <= 1e-6, d=3 max {max(r.max_residual for r in d3):.2e} <= 1e-4",
    )
    assert ok


def test_verify_all_deterministic(tmp_path, acceptance_log):
    paths = [tmp_path / "run1.json", tmp_path / "run2.json"]
    codes = []
    for i, path in enumerate(paths):
        env = dict(os.environ, RESOLVENT_THREADS=str(i + 1))
        proc = subprocess.run(
            [sys.executable, "-m", "resolvent_thresholds", "verify", "--suite", "all", "--output", str(path)],
            capture_output=True, text=True, env=env, check=False,
        )
        codes.append(proc.returncode)
    same = paths[0].read_bytes() == paths[1].read_bytes()
    ok = same and codes == [0, 0]
    acceptance_log(9, "determinism", ok,
                   f"two `verify --suite all` runs (1 and 2 threads) byte-identical: {same}, exit codes {codes}")
    assert ok
