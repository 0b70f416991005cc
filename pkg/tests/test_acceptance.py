"""Acceptance criteria, each checked at its stated tolerance.

One end-to-end ``verify --suite all`` run feeds every criterion; a second
independent run checks byte determinism.  Each test prints a single
``criterion <k>: PASS|FAIL`` line to the terminal.
"""

import json
import subprocess
import sys
import time

import pytest

ALL_SUITE_BUDGET = 15 * 60


def _verify(out, *extra):
    cmd = [sys.executable, "-m", "conormal_verify.cli", "--suite", "all", "--seed", "0", "--out", str(out), *extra]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True)
    return proc, time.perf_counter() - t0


@pytest.fixture(scope="session")
def all_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("accept") / "run-a"
    proc, wall = _verify(out)
    assert proc.returncode in (0, 1), proc.stderr
    report = json.loads((out / "report.json").read_text())
    timings = json.loads((out / "timings.json").read_text())
    return {"dir": out, "code": proc.returncode, "wall": wall, "checks": {c["check_id"]: c for c in report["checks"]}, "timings": timings}


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {label}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def _status(run, *ids):
    return {cid: run["checks"][cid]["status"] for cid in ids}


def _summary(run, *ids):
    return "; ".join(f"{cid}={run['checks'][cid]['status']} {json.dumps(run['checks'][cid]['measured'])[:300]}" for cid in ids)


def _all_pass(run, *ids):
    return all(s == "PASS" for s in _status(run, *ids).values())


def test_criterion_1_sharp_identities(all_run, verdict):
    cid = "sharp-transform-identities"
    verdict("1", _all_pass(all_run, cid), _summary(all_run, cid))


def test_criterion_1_runtime(all_run, verdict):
    t = all_run["timings"]["sharp-transform-identities"]
    verdict("1 (runtime < 10 s)", t < 10.0, f"{t:.1f} s for 100 fields")


def test_criterion_2_two_sided_inverse(all_run, verdict):
    cid = "weight-two-sided-inverse"
    verdict("2", _all_pass(all_run, cid), _summary(all_run, cid))


def test_criterion_3_norm_band(all_run, verdict):
    cid = "norm-equivalence-band"
    m = all_run["checks"][cid]["measured"]
    ok = _all_pass(all_run, cid) and max(m["drift"].values()) <= 0.10 and m["imbedding_max_excess"] <= 1e-13
    verdict("3", ok, f"drift {m['drift']}, imbedding excess {m['imbedding_max_excess']:.2e}")


def test_criterion_4_zero_order(all_run, verdict):
    cid = "zero-order-degeneracies"
    m = all_run["checks"][cid]["measured"]
    ok = _all_pass(all_run, cid) and max(m.values()) <= 1e-10
    verdict("4", ok, json.dumps(m))


def test_criterion_5_smoothing_decay(all_run, verdict):
    cid = "smoothing-remainder-decay"
    verdict("5", _all_pass(all_run, cid), _summary(all_run, cid))


def test_criterion_5_runtime(all_run, verdict):
    t = all_run["timings"]["smoothing-remainder-decay"]
    verdict("5 (runtime < 60 s)", t < 60.0, f"{t:.1f} s")


def test_criterion_6_support(all_run, verdict):
    cid = "cutoff-support-preservation"
    verdict("6", _all_pass(all_run, cid), _summary(all_run, cid))


def test_criterion_7_trace_identity(all_run, verdict):
    cid = "boundary-trace-identity"
    verdict("7", _all_pass(all_run, cid), _summary(all_run, cid))


def test_criterion_8_boundary_splitting(all_run, verdict):
    cid = "boundary-symbol-splitting"
    verdict("8", _all_pass(all_run, cid), _summary(all_run, cid))


def test_criterion_9_normal_commutator(all_run, verdict):
    ids = ("normal-commutator-identity", "normal-commutator-order")
    verdict("9", _all_pass(all_run, *ids), _summary(all_run, *ids))


def test_criterion_10_chain_bounds(all_run, verdict):
    ids = ("chain-bounds-statement-1", "chain-bounds-statement-2")
    verdict("10", _all_pass(all_run, *ids), _summary(all_run, *ids))


def test_criterion_11_energy_estimates(all_run, verdict):
    ids = ("energy-estimate-statement-1", "energy-estimate-statement-2")
    verdict("11", _all_pass(all_run, *ids), _summary(all_run, *ids))


def test_criterion_11_runtime(all_run, verdict):
    wall = all_run["wall"]
    verdict("11 (all suite < 15 min)", wall < ALL_SUITE_BUDGET, f"{wall / 60:.1f} min wall clock")


def test_criterion_11_determinism(all_run, verdict, tmp_path):
    proc, _ = _verify(tmp_path / "run-b")
    same = (tmp_path / "run-b" / "report.json").read_bytes() == (all_run["dir"] / "report.json").read_bytes()
    verdict("11 (byte-deterministic)", same and proc.returncode == all_run["code"], f"report.json identical: {same}")
