"""The acceptance runs, one function per criterion.

Each runner returns a JSON-ready dict with a ``passed`` flag; nothing
time-dependent goes into it, so reports are byte-stable across runs and
worker counts.
"""

from __future__ import annotations

import filecmp
import json
import random
import tempfile
import time
from pathlib import Path

from . import __version__
from .exactzd import POS, NEG, realized_patterns, restrict, standard_metric
from .freegrp import exhaustive_inequality_sweep, stabilizer_probe
from .functionals import act, busemann, orbit, scan_boundary
from .groups import (
    FiniteIndexSubgroup,
    LatticeMembership,
    abelianization,
    canonical_json,
    free_abelian,
    free_group,
    infinite_dihedral,
    rotation_semidirect,
)
from .metrics import ScaledMetric, WordMetric, banach_combine, induced, validate_banach_axioms
from .vabelian import VAStructure, build_UT, detection_pipeline, finite_orbit_pipeline, step_bounds, verify_isometric_embedding


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def envelope(command: str, config: dict, result: dict, specs: dict | None = None) -> dict:
    """Wrap a result with its config, spec hashes and the tool version."""
    return {"tool": "horofront", "version": __version__, "command": command,
            "config": config, "specs": specs or {}, "result": result}


# ---------------------------------------------------------------------------


def criterion_1(workers: int = 1) -> dict:
    rows = []
    for d, R, R_scan in ((1, 2, 10), (2, 3, 12)):
        m = standard_metric(d)
        scan = scan_boundary(m, R, R_scan, 2, workers=workers)
        oracle = realized_patterns(d, R, R_scan, 2)
        rows.append({
            "d": d, "R": R, "R_scan": R_scan, "candidates": len(scan.candidates),
            "oracle": len(oracle), "match": scan.values_set() == oracle,
            "scan": scan.to_json(),
        })
    ok = all(r["match"] for r in rows) and [r["candidates"] for r in rows] == [2, 24]
    return {"criterion": 1, "name": "Z^d oracle equivalence", "passed": ok, "runs": rows}


def criterion_2(workers: int = 1) -> dict:
    import itertools

    rows = []
    for d, R, R_scan in ((1, 2, 10), (2, 3, 12)):
        m = standard_metric(d)
        scan = scan_boundary(m, R, R_scan, 2, workers=workers)
        fixed = set()
        for c in scan.candidates:
            rep = orbit(m, scan.functional(c), budget=50)
            if rep.verdict == "fixed_point":
                fixed.add(c.values)
        expected = {restrict(a, R).values for a in itertools.product((NEG, POS), repeat=d)}
        rows.append({"d": d, "fixed": sorted(map(list, fixed)), "expected": len(expected),
                     "match": fixed == expected})
    return {"criterion": 2, "name": "fixed-point classification",
            "passed": all(r["match"] for r in rows), "runs": rows}


def criterion_3(workers: int = 1) -> dict:
    ex = exhaustive_inequality_sweep(["a", "b"], 5, 5)
    sm = exhaustive_inequality_sweep(["a", "b", "ab"], 5, 14, mode="sampled", samples=10_000, seed=0)
    ok = ex.cases > 0 and not ex.violations and sm.cases == 10_000 and not sm.violations
    return {"criterion": 3, "name": "free-group inequality sweep", "passed": ok,
            "exhaustive": ex.to_json(), "sampled": sm.to_json()}


def criterion_4(workers: int = 1) -> dict:
    rep = stabilizer_probe(["a", "b"], 2, 10, 30, workers=workers)
    ok = bool(rep.candidates) and all(c["images"] > 30 for c in rep.candidates) and rep.replay_ok
    return {"criterion": 4, "name": "free-group no-detection evidence", "passed": ok,
            "probe": rep.to_json()}


def criterion_5(workers: int = 1) -> dict:
    D = infinite_dihedral()
    va = VAStructure(D)
    c = build_UT(va)
    emb = verify_isometric_embedding(c, 15)
    pipe = finite_orbit_pipeline(va, R=6, R_scan=30)
    U = sorted(D.format(u) for u in c.U)
    ok = (c.K == 3 and U == ["(-3|0)", "(3|0)"] and len(c.T.generators) == 5 and emb.ok
          and pipe.orbit.finite and pipe.orbit.size <= 6)
    return {"criterion": 5, "name": "virtually abelian pipeline", "passed": ok,
            "construction": c.to_json(), "embedding": emb.to_json(), "pipeline": pipe.to_json()}


def criterion_6(workers: int = 1) -> dict:
    F = free_group(2)
    pi = abelianization(F)
    rep = detection_pipeline(F, pi, R=4, R_scan=12, scan_radius=3, full_scan=True, workers=workers)
    ab = rep.hom.value(F.parse("ab"))
    ok = (rep.C == 1 and rep.M == 2 and rep.f_orbit_size == 1 and rep.fixed_radii == list(range(5))
          and rep.scan["found"] and rep.scan["shell_witnesses"] > 0 and ab == -4
          and rep.hom.failures == 0 and rep.hom.pairs_checked > 0)
    return {"criterion": 6, "name": "detection pipeline", "passed": ok, "value_at_ab": ab,
            "report": rep.to_json()}


def induced_examples():
    D = infinite_dihedral()
    N = FiniteIndexSubgroup(D, LatticeMembership(3, "trivial"), [((3,), 0)])
    Z = free_abelian(1)
    E = FiniteIndexSubgroup(Z, LatticeMembership(2), [(2,)])
    return {"<r^3> in D_inf": induced(N), "2Z in Z": induced(E)}


def criterion_7(workers: int = 1) -> dict:
    rows = {}
    ok = True
    for name, m in induced_examples().items():
        rep = validate_banach_axioms(m, 10, workers=workers)
        probe = rep.verdict("unbounded_functionals")
        depths_ok = all(v <= -3 for v in probe.details["min_values"]) if "min_values" in probe.details else False
        this = all(v.status == "pass" for v in rep.verdicts[:4]) and probe.ok and depths_ok
        ok &= this
        rows[name] = {"passed": this, "validation": rep.to_json()}
    return {"criterion": 7, "name": "induced-metric theorem check", "passed": ok, "runs": rows}


# ---------------------------------------------------------------------------
# seeded property suite


def property_metrics():
    F = free_group(2)
    wF = WordMetric(F)
    pi = abelianization(F)
    return {
        "word F2": wF,
        "word F2 {a,b,ab}": WordMetric(free_group(2, ["a", "b", "ab"])),
        "scaled 3 F2": ScaledMetric(WordMetric(F), 3),
        "induced <r^3>": induced_examples()["<r^3> in D_inf"],
        "max-combo F2->Z2": banach_combine(WordMetric(F), pi, WordMetric(free_abelian(2)), 2),
        "word D_inf": WordMetric(infinite_dihedral()),
    }


def property_suite(seed: int = 0, cases: int = 1000) -> dict:
    rng = random.Random(seed)
    metrics = property_metrics()
    out = {}

    def pick(m, r):
        return rng.choice(m.ball(r).elements)

    # Busemann invariants
    fails = 0
    names = sorted(metrics)
    for _ in range(cases):
        m = metrics[rng.choice(names)]
        R = 2 * m.max_generator_length()
        x = pick(m, 3 * R)
        h = busemann(m, x, R)
        nx = m.norm(x)
        vals = h.values
        bad = h.value(m.group.identity) != 0 or min(vals) < -nx
        els = h.ball.elements
        for _ in range(20):
            i, j = rng.randrange(len(els)), rng.randrange(len(els))
            bad |= abs(vals[i] - vals[j]) > m._d(els[i], els[j])
        fails += bad
    out["busemann_invariants"] = {"cases": cases, "failures": fails}

    # g.b_x = b_{gx}
    fails = 0
    for _ in range(cases):
        m = metrics[rng.choice(names)]
        L = m.max_generator_length()
        R = 2 * L
        g, x = pick(m, L), pick(m, 3 * R)
        lhs = act(m, g, busemann(m, x, R))
        rhs = busemann(m, m.group.mul(g, x), lhs.radius)
        fails += lhs.values != rhs.values
    out["action_on_busemann"] = {"cases": cases, "failures": fails}

    # (gh).f = g.(h.f)
    fails = 0
    for _ in range(cases):
        m = metrics[rng.choice(names)]
        L = m.max_generator_length()
        g, h = pick(m, L), pick(m, L)
        f = busemann(m, pick(m, 4 * L), 4 * L)
        grp = m.group
        lhs = act(m, grp.mul(g, h), f)
        rhs = act(m, g, act(m, h, f))
        r = min(lhs.radius, rhs.radius)
        fails += lhs.key(r) != rhs.key(r)
    out["action_composition"] = {"cases": cases, "failures": fails}

    # triangle inequality and left invariance, per metric variant
    for name in names:
        m = metrics[name]
        R = 3 * m.max_generator_length()
        tri = inv = 0
        for _ in range(cases):
            x, y, z = pick(m, R), pick(m, R), pick(m, R)
            tri += m._d(x, z) > m._d(x, y) + m._d(y, z)
            g = m.group
            inv += m._d(g.mul(z, x), g.mul(z, y)) != m._d(x, y)
        out[f"metric_axioms[{name}]"] = {"cases": cases, "failures": tri + inv}

    # lattice bounds on H within B_S(6), exhaustive
    for name, G in (("D_inf", infinite_dihedral()), ("Z2", free_abelian(2)), ("Z2 x| Z/4", rotation_semidirect(4))):
        sb = step_bounds(VAStructure(G), R=6)
        out[f"lattice_bounds[{name}]"] = {"cases": sb.checked, "failures": sb.sup_violations + sb.l1_violations}
    return out


def criterion_8(workers: int = 1, seed: int = 0) -> dict:
    res = property_suite(seed)
    ok = all(v["failures"] == 0 for v in res.values())
    return {"criterion": 8, "name": "property suites", "passed": ok, "seed": seed, "suites": res}


RUNNERS = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
           5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def run_criteria(out_dir, workers: int = 1, which=range(1, 9), log=None) -> dict:
    out_dir = Path(out_dir)
    results = {}
    for n in which:
        t0 = time.perf_counter()
        res = RUNNERS[n](workers=workers)
        rep = envelope("cookbook", {"criterion": n}, res)
        write_atomic(out_dir / f"criterion_{n}.json", dumps(rep))
        results[n] = res["passed"]
        if log:
            log(f"criterion {n}: {'PASS' if res['passed'] else 'FAIL'} ({time.perf_counter() - t0:.1f}s)")
    return results


def criterion_9(workers_a: int = 1, workers_b: int = 8, base=None) -> dict:
    base = Path(base or tempfile.mkdtemp(prefix="horofront-det-"))
    a, b = base / f"workers_{workers_a}", base / f"workers_{workers_b}"
    run_criteria(a, workers_a)
    run_criteria(b, workers_b)
    files = sorted(p.name for p in a.iterdir())
    same = {f: filecmp.cmp(a / f, b / f, shallow=False) for f in files}
    return {"criterion": 9, "name": "determinism", "passed": len(files) == 8 and all(same.values()),
            "files": same}


def cookbook(out_dir, workers: int = 1, log=print) -> dict:
    out_dir = Path(out_dir)
    status = run_criteria(out_dir, workers, log=log)
    det = criterion_9(base=out_dir / "determinism")
    if log:
        log(f"criterion 9: {'PASS' if det['passed'] else 'FAIL'}")
    status[9] = det["passed"]
    summary = {"criteria": {str(k): v for k, v in status.items()}, "passed": all(status.values())}
    write_atomic(out_dir / "summary.json", dumps(envelope("cookbook", {}, summary)))
    return summary


__all__ = ["RUNNERS", "canonical_json", "cookbook", "criterion_9", "dumps", "envelope",
           "property_suite", "run_criteria", "write_atomic"]
