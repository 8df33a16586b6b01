"""The nine acceptance criteria, each with its runtime limit.

Every criterion prints one PASS/FAIL line.  Reports from the single-worker
runs are kept and compared byte for byte with an eight-worker rerun.
"""

import time

import pytest

from horofront.cookbook import RUNNERS, dumps, envelope, run_criteria, write_atomic

LIMITS = {1: 60, 2: 60, 3: 300, 4: 120, 5: 60, 6: 120, 7: 60, 8: 600}


@pytest.fixture(scope="module")
def report_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _say(capsys, line):
    with capsys.disabled():
        print(f"\n{line}")


def _run(n, out_dir, workers=1):
    t0 = time.perf_counter()
    res = RUNNERS[n](workers=workers)
    elapsed = time.perf_counter() - t0
    write_atomic(out_dir / "workers_1" / f"criterion_{n}.json", dumps(envelope("cookbook", {"criterion": n}, res)))
    return res, elapsed


@pytest.mark.parametrize("n", sorted(RUNNERS))
def test_criterion(n, report_dir, capsys):
    res, elapsed = _run(n, report_dir)
    ok = res["passed"] and elapsed < LIMITS[n]
    _say(capsys, f"criterion {n} ({res['name']}): {'PASS' if ok else 'FAIL'} in {elapsed:.1f}s (limit {LIMITS[n]}s)")
    assert res["passed"]
    assert elapsed < LIMITS[n]


def test_criterion_9_determinism(report_dir, capsys):
    a = report_dir / "workers_1"
    for n in RUNNERS:
        if not (a / f"criterion_{n}.json").exists():
            _run(n, report_dir)
    b = report_dir / "workers_8"
    run_criteria(b, workers=8)
    same = {n: (a / f"criterion_{n}.json").read_bytes() == (b / f"criterion_{n}.json").read_bytes()
            for n in RUNNERS}
    ok = all(same.values())
    _say(capsys, f"criterion 9 (determinism, workers 1 vs 8): {'PASS' if ok else 'FAIL'}")
    assert ok, same
