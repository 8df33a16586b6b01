"""``horofront`` command line.

Exit codes: 0 success, 1 unexpected error, 2 malformed input or violated
hypothesis, 3 resource cap, 4 a claim numerically violated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .cookbook import dumps, envelope, write_atomic
from .errors import HorofrontError, SpecError
from .groups import group_from_spec, quotient_from_spec


def _load(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None


def _group(args):
    return group_from_spec(_load(args.group))


def _metric(args, group):
    from .metrics import metric_from_spec

    return metric_from_spec(_load(args.metric) if args.metric else None, group)


def _emit(args, command, config, result, specs=None):
    text = dumps(envelope(command, config, result, specs))
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)


def cmd_growth(args):
    from .metrics import growth

    g = _group(args)
    m = _metric(args, g)
    table = growth(m, args.rmax)
    csv = table.to_csv()
    if args.out:
        write_atomic(Path(args.out), csv)
    else:
        sys.stdout.write(csv)
    if table.truncated:
        print(f"truncated at radius {table.radius_reached}", file=sys.stderr)
        return 3
    return 0


def cmd_scan(args):
    from .functionals import scan_boundary

    g = _group(args)
    m = _metric(args, g)
    rep = scan_boundary(m, args.R, args.scan, args.margin, workers=args.workers)
    cfg = {"R": args.R, "R_scan": args.scan, "margin": rep.margin}
    _emit(args, "scan", cfg, rep.to_json(), {"group": g.spec_hash(), "metric": m.metric_id()})
    return 0


def _seed_functional(args, m):
    from .exactzd import ZdClosedForm, lift_functional
    from .functionals import busemann, from_closed_form, scan_boundary

    seed = args.seed_functional
    if seed.isdigit():
        rep = scan_boundary(m, args.R, args.scan, args.margin, workers=args.workers)
        idx = int(seed)
        if idx >= len(rep.candidates):
            raise SpecError(f"scan has only {len(rep.candidates)} candidates")
        return rep.functional(rep.candidates[idx], args.R)
    raw = _load(seed)
    if "witness" in raw:
        return busemann(m, m.group.parse(raw["witness"]), args.R)
    if "quotient" in raw:
        pi = quotient_from_spec(raw["quotient"], source=m.group)
        return lift_functional(pi, raw["alpha"], int(raw["M"]), args.R, getattr(m, "pi", None) and m)
    return from_closed_form(m, ZdClosedForm(raw["alpha"]), args.R)


def cmd_orbit(args):
    from .functionals import orbit

    g = _group(args)
    m = _metric(args, g)
    h = _seed_functional(args, m)
    rep = orbit(m, h, args.budget, args.compare)
    cfg = {"R": args.R, "budget": args.budget, "compare_radius": rep.compare_radius, "seed": args.seed_functional}
    _emit(args, "orbit", cfg, rep.to_json(), {"group": g.spec_hash(), "metric": m.metric_id()})
    return 0


def cmd_verify_free(args):
    from .freegrp import exhaustive_inequality_sweep

    gens = _load(args.gens) if args.gens else ["a", "b"][: args.rank] + [chr(ord("a") + i) for i in range(2, args.rank)]
    from .groups import FreeGroup, parse_word

    S = FreeGroup(args.rank, [parse_word(w, args.rank) for w in gens])
    rep = exhaustive_inequality_sweep(S, args.gmax, args.ymax, mode=args.mode, samples=args.samples, seed=args.seed)
    cfg = {"rank": args.rank, "generators": gens, "g_max": args.gmax, "y_max": args.ymax,
           "mode": args.mode, "samples": args.samples if args.mode == "sampled" else None, "seed": args.seed}
    _emit(args, "verify-free", cfg, rep.to_json(), {"group": S.spec_hash()})
    return 4 if rep.violations else 0


def cmd_validate(args):
    from .metrics import validate_banach_axioms

    g = _group(args)
    m = _metric(args, g)
    rep = validate_banach_axioms(m, args.R, args.samples, args.seed, workers=args.workers)
    cfg = {"R": args.R, "samples": args.samples, "seed": args.seed}
    _emit(args, "validate-metric", cfg, rep.to_json(), {"group": g.spec_hash(), "metric": m.metric_id()})
    return 0 if all(v.status == "pass" for v in rep.verdicts[:4]) else 4


def cmd_pipeline_va(args):
    from .vabelian import VAStructure, finite_orbit_pipeline

    g = _group(args)
    rep = finite_orbit_pipeline(VAStructure(g), R=args.R, R_scan=args.scan)
    _emit(args, "pipeline-va", {"R": args.R, "R_scan": args.scan}, rep.to_json(), {"group": g.spec_hash()})
    return 0


def cmd_pipeline_detect(args):
    from .vabelian import detection_pipeline

    g = _group(args)
    pi = quotient_from_spec(_load(args.quotient), source=g)
    rep = detection_pipeline(g, pi, R=args.R, R_scan=args.scan, scan_radius=args.scan_radius,
                             margin=args.margin, full_scan=not args.no_full_scan, workers=args.workers)
    cfg = {"R": args.R, "R_scan": args.scan, "scan_radius": args.scan_radius, "margin": args.margin,
           "full_scan": not args.no_full_scan}
    _emit(args, "pipeline-detect", cfg, rep.to_json(), {"group": g.spec_hash(), "quotient": pi.spec_hash()})
    return 0


def cmd_cookbook(args):
    from .cookbook import cookbook

    summary = cookbook(args.out or "cookbook-out", workers=args.workers)
    return 0 if summary["passed"] else 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="horofront", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"horofront {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=fn)
        return sp

    sp = add("growth", cmd_growth, help="ball sizes as CSV")
    sp.add_argument("--group", required=True)
    sp.add_argument("--metric")
    sp.add_argument("--rmax", type=int, required=True)

    sp = add("scan", cmd_scan, help="boundary candidates by shell witnesses")
    sp.add_argument("--group", required=True)
    sp.add_argument("--metric")
    sp.add_argument("-R", type=int, required=True)
    sp.add_argument("--scan", type=int, required=True)
    sp.add_argument("--margin", type=int)

    sp = add("orbit", cmd_orbit, help="orbit of a functional under generator actions")
    sp.add_argument("--group", required=True)
    sp.add_argument("--metric")
    sp.add_argument("--seed-functional", "--from", dest="seed_functional", required=True,
                    help="candidate index of a scan, or a JSON file with alpha/witness")
    sp.add_argument("-R", type=int, default=3)
    sp.add_argument("--scan", type=int, default=12)
    sp.add_argument("--margin", type=int)
    sp.add_argument("--budget", type=int, default=50)
    sp.add_argument("--compare", type=int)

    sp = add("verify-free", cmd_verify_free, help="length-inequality sweep on a free group")
    sp.add_argument("--rank", type=int, default=2)
    sp.add_argument("--gens", help="JSON list of words")
    sp.add_argument("--gmax", type=int, default=5)
    sp.add_argument("--ymax", type=int, default=5)
    sp.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    sp.add_argument("--samples", type=int, default=10_000)

    sp = add("validate-metric", cmd_validate, help="Banach-metric axiom checks")
    sp.add_argument("--group", required=True)
    sp.add_argument("--metric")
    sp.add_argument("-R", type=int, default=5)
    sp.add_argument("--samples", type=int, default=1000)

    sp = add("pipeline-va", cmd_pipeline_va, help="finite orbit for a virtually abelian group")
    sp.add_argument("--group", required=True)
    sp.add_argument("-R", type=int, default=6)
    sp.add_argument("--scan", type=int, default=30)

    sp = add("pipeline-detect", cmd_pipeline_detect, help="detection through a quotient map")
    sp.add_argument("--group", required=True)
    sp.add_argument("--quotient", required=True)
    sp.add_argument("-R", type=int, default=4)
    sp.add_argument("--scan", type=int, default=12)
    sp.add_argument("--scan-radius", type=int)
    sp.add_argument("--margin", type=int)
    sp.add_argument("--no-full-scan", action="store_true")

    add("cookbook", cmd_cookbook, help="run every acceptance criterion")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HorofrontError as exc:
        print(f"horofront: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print("horofront: out of memory", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
