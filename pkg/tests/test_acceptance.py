"""Acceptance suite: one test per release criterion.

Each test prints a PASS/FAIL line with the measured residuals (run with
-s to watch); tolerances are pinned here and in torusflow.verify. The
checks are property-based: exact identities, analytic oracles, and
fixture round-trips; no claim about actual blow-up is made anywhere.
"""

import json
import time

from torusflow import cli, verify


def _report(label, results, elapsed=None, limit=None):
    ok = all(r.passed for r in results)
    worst = max(results, key=lambda r: (not r.passed, r.measured))
    timing = f" [{elapsed:.1f}s < {limit:.0f}s]" if limit else ""
    print(f"{'PASS' if ok else 'FAIL'} {label}{timing}")
    for r in results:
        status = "ok " if r.passed else "BAD"
        print(f"    {status} {r.name}: {r.measured:.3e} (tol {r.tolerance:g})")
    assert ok, f"{label}: worst check {worst.name} = {worst.measured}"
    if limit is not None:
        assert elapsed < limit, f"{label} exceeded runtime limit"


def test_criterion_1_steady_state_diagnostics():
    t0 = time.perf_counter()
    results = verify.check_steady_diagnostics(n=64, k=3)
    elapsed = time.perf_counter() - t0
    _report("criterion 1: steady-state diagnostics", results, elapsed, 5.0)


def test_criterion_2_derivative_norm_growth_identity():
    t0 = time.perf_counter()
    results = verify.check_growth_identity(n=128, k=3, dt=1e-4)
    elapsed = time.perf_counter() - t0
    _report("criterion 2: derivative-norm growth identity", results, elapsed, 30.0)


def test_criterion_3_lp_growth_identity_and_bounds():
    t0 = time.perf_counter()
    results = verify.check_lp_identity(t_end=1.0)
    elapsed = time.perf_counter() - t0
    _report("criterion 3: Lp growth identity + envelope", results, elapsed, 60.0)


def test_criterion_4_exponential_representations():
    _report("criterion 4: exponential representations", verify.check_representations())


def test_criterion_5_trichotomy_classifier():
    _report("criterion 5: trichotomy classifier", verify.check_classifier(draws=50))


def test_criterion_6_osgood_machinery():
    _report("criterion 6: Osgood machinery", verify.check_osgood())


def test_criterion_7_inequality_studies():
    _report("criterion 7: inequality studies", verify.check_inequalities())


def test_criterion_8_conservation():
    _report("criterion 8: conservation", verify.check_conservation(n=128, t_end=1.0))


def test_criterion_9_pointwise_bounds():
    _report("criterion 9: pointwise stretching bounds", verify.check_pointwise_bounds(count=20))


def test_criterion_10_determinism(tmp_path):
    cfg = {
        "model": "euler2d",
        "grid_n": 64,
        "initial": {"preset": "random_smooth", "seed": 12, "slope": 3.0, "amplitude": 1.0},
        "k": 3,
        "p": 2.0,
        "t_end": 0.1,
        "record_every": 2,
        "out_stem": "run",
    }
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(cfg))
    for sub in ("a", "b"):
        rc = cli.main(
            ["simulate", "--config", str(cfg_path), "--out", str(tmp_path / sub), "--threads", "1"]
        )
        assert rc == 0
    identical_csv = (tmp_path / "a" / "run.csv").read_bytes() == (
        tmp_path / "b" / "run.csv"
    ).read_bytes()
    identical_json = (tmp_path / "a" / "run.json").read_bytes() == (
        tmp_path / "b" / "run.json"
    ).read_bytes()
    print(f"{'PASS' if identical_csv and identical_json else 'FAIL'} criterion 10: determinism")
    assert identical_csv and identical_json
