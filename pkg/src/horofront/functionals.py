"""Busemann restrictions, boundary scans, the boundary action and orbits.

A :class:`RestrictedFunctional` is a horofunction truncated to a ball ``B(R)``.
Its provenance says how far it can be trusted and extended:

* :class:`Witness` - the restriction of ``b_x`` for an explicit ``x``; acting on
  it is exact (``g.b_x = b_{gx}``) so it can be re-expanded to any radius.
* a closed form (see :mod:`horofront.exactzd`) - exact at every radius.
* :class:`Stabilized` or ``None`` - only the finite table is known; acting
  shrinks the radius by ``|g|``.
"""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import (
    ClaimViolation,
    HypothesisViolation,
    InsufficientScanRadius,
    NotFiniteOrbit,
    RadiusExhausted,
    TrivialRestriction,
)
from .metrics import Ball, Metric


@dataclass(frozen=True)
class Witness:
    x: object

    def to_json(self, group):
        return {"kind": "witness", "x": group.format(self.x)}


@dataclass(frozen=True)
class Stabilized:
    first: int
    last: int

    def to_json(self, group):
        return {"kind": "stabilized", "first": self.first, "last": self.last}


class ClosedForm:
    """Interface for exact functionals: ``evaluate``, ``act`` and a hashable ``key``."""

    key: tuple = ()

    def evaluate(self, x) -> int:
        raise NotImplementedError

    def act(self, g) -> "ClosedForm":
        raise NotImplementedError

    def to_json(self, group) -> dict:
        raise NotImplementedError


class RestrictedFunctional:
    def __init__(self, metric: Metric, radius: int, values, provenance=None):
        self.metric = metric
        self.radius = radius
        self.ball = metric.ball(radius)
        self.values = tuple(values)
        if len(self.values) != len(self.ball):
            raise ValueError("one value per ball element is required")
        self.provenance = provenance

    def value(self, x) -> int:
        return self.values[self.ball.index[x]]

    __call__ = value

    def key(self, r: int | None = None) -> tuple:
        """Value vector on ``B(r)`` (a prefix, since balls are ordered by distance)."""
        if r is None:
            return self.values
        if r > self.radius:
            raise RadiusExhausted(f"functional known to radius {self.radius}, asked for {r}")
        return self.values[: self.ball.count_within(r)]

    def restrict(self, r: int) -> "RestrictedFunctional":
        return RestrictedFunctional(self.metric, r, self.key(r), self.provenance)

    def as_dict(self):
        return dict(zip(self.ball.elements, self.values))

    @property
    def exact(self):
        return isinstance(self.provenance, (Witness, ClosedForm))

    def check_invariants(self, pairs: int | None = None) -> list[str]:
        """Structural checks; returns a list of problems (empty when sound)."""
        problems = []
        g = self.metric.group
        if self.value(g.identity) != 0:
            problems.append("value at identity is not 0")
        for x, d, v in zip(self.ball.elements, self.ball.distances, self.values):
            if abs(v) > d:
                problems.append(f"|h({g.format(x)})| > d(x,1)")
        items = list(zip(self.ball.elements, self.values))
        if pairs is not None:
            items = items[:pairs]
        for i, (x, hx) in enumerate(items):
            for y, hy in items[i + 1:]:
                if abs(hx - hy) > self.metric._d(x, y):
                    problems.append(f"not 1-Lipschitz at {g.format(x)}, {g.format(y)}")
        return problems

    def __eq__(self, other):
        return (
            isinstance(other, RestrictedFunctional)
            and self.metric.metric_id() == other.metric.metric_id()
            and self.radius == other.radius
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.radius, self.values))

    def to_json(self):
        g = self.metric.group
        prov = self.provenance.to_json(g) if self.provenance is not None else None
        return {"radius": self.radius, "values": list(self.values), "provenance": prov}


# ---------------------------------------------------------------------------


def busemann(m: Metric, x, R: int) -> RestrictedFunctional:
    if R < 0:
        raise ValueError("radius must be >= 0")
    m.group.check(x)
    b = m.ball(R)
    return RestrictedFunctional(m, R, m.restriction(x, b), Witness(x))


def from_closed_form(m: Metric, form: ClosedForm, R: int) -> RestrictedFunctional:
    b = m.ball(R)
    return RestrictedFunctional(m, R, [form.evaluate(x) for x in b.elements], form)


def expand(m: Metric, h: RestrictedFunctional, R: int) -> RestrictedFunctional:
    """Recompute ``h`` at radius ``R`` from its exact provenance."""
    if isinstance(h.provenance, Witness):
        return busemann(m, h.provenance.x, R)
    if isinstance(h.provenance, ClosedForm):
        return from_closed_form(m, h.provenance, R)
    if R <= h.radius:
        return h.restrict(R)
    raise RadiusExhausted("functional has no exact provenance to extend from")


def act(m: Metric, g, h: RestrictedFunctional) -> RestrictedFunctional:
    """``(g.h)(y) = h(g^-1 y) - h(g^-1)`` on ``B(R' - |g|)``."""
    grp = m.group
    grp.check(g)
    n = m.norm(g)
    out_r = h.radius - n
    if out_r < 0:
        raise RadiusExhausted(f"|g| = {n} exceeds the functional radius {h.radius}")
    gi = grp.inv(g)
    idx, vals = h.ball.index, h.values
    base = vals[idx[gi]]
    out_ball = m.ball(out_r)
    values = [vals[idx[grp.mul(gi, y)]] - base for y in out_ball.elements]
    prov = h.provenance
    if isinstance(prov, Witness):
        prov = Witness(grp.mul(g, prov.x))
    elif isinstance(prov, ClosedForm):
        prov = prov.act(g)
    else:
        prov = None
    return RestrictedFunctional(m, out_r, values, prov)


def _act_exact(m: Metric, g, h: RestrictedFunctional) -> RestrictedFunctional:
    prov = h.provenance
    if isinstance(prov, Witness):
        return busemann(m, m.group.mul(g, prov.x), h.radius)
    return from_closed_form(m, prov.act(g), h.radius)


# ---------------------------------------------------------------------------
# scanning


@dataclass
class ScanCandidate:
    values: tuple
    witnesses: int
    shell_witnesses: int
    max_witness_distance: int
    sample: list  # a few shell witnesses, in ball order
    first_witness: object = None

    def to_json(self, group):
        return {
            "values": list(self.values),
            "witnesses": self.witnesses,
            "shell_witnesses": self.shell_witnesses,
            "max_witness_distance": self.max_witness_distance,
            "sample_witnesses": [group.format(x) for x in self.sample],
        }


@dataclass
class ScanReport:
    metric: Metric
    R: int
    R_scan: int
    margin: int
    candidates: list
    interior: list

    def values_set(self):
        return {c.values for c in self.candidates}

    def find(self, values) -> ScanCandidate | None:
        values = tuple(values)
        return next((c for c in self.candidates if c.values == values), None)

    def canonical_witness(self, cand: ScanCandidate):
        """Sample witness whose pattern is reproduced by the most generator moves."""
        m = self.metric
        g = m.group
        ball = m.ball(self.R)
        best, best_score = None, None
        for x in cand.sample:
            stable = sum(m.restriction(g.mul(s, x), ball) == cand.values for s in g.generators)
            score = (stable, m.norm(x))
            if best_score is None or score > best_score:
                best, best_score = x, score
        return best

    def functional(self, cand: ScanCandidate, R: int | None = None) -> RestrictedFunctional:
        return busemann(self.metric, self.canonical_witness(cand), R if R is not None else self.R)

    def to_json(self):
        g = self.metric.group
        b = self.metric.ball(self.R)
        return {
            "metric": self.metric.metric_id(),
            "R": self.R,
            "R_scan": self.R_scan,
            "margin": self.margin,
            "ball": [g.format(x) for x in b.elements],
            "candidates": [c.to_json(g) for c in self.candidates],
            "interior": [c.to_json(g) for c in self.interior],
        }


_SCAN_STATE = {}


def _scan_chunk(bounds):
    lo, hi = bounds
    m, R, R_scan, shell, keep = (_SCAN_STATE[k] for k in ("m", "R", "R_scan", "shell", "keep"))
    big = m.ball(R_scan)
    small = m.ball(R)
    stats = {}
    restriction = m.restriction
    for i in range(lo, hi):
        x, d = big.elements[i], big.distances[i]
        pat = restriction(x, small)
        st = stats.get(pat)
        if st is None:
            st = stats[pat] = [0, 0, d, i, []]
        st[0] += 1
        if d > st[2]:
            st[2] = d
        if d >= shell:
            st[1] += 1
            if len(st[4]) < keep:
                st[4].append(i)
    return stats


def _merge(into, part):
    for pat, (n, ns, dmax, first, kept) in part.items():
        st = into.get(pat)
        if st is None:
            into[pat] = [n, ns, dmax, first, list(kept)]
        else:
            st[0] += n
            st[1] += ns
            st[2] = max(st[2], dmax)
            st[3] = min(st[3], first)
            st[4] = sorted(st[4] + kept)


def scan_boundary(m: Metric, R: int, R_scan: int, margin: int | None = None, workers: int = 1,
                  keep: int = 32) -> ScanReport:
    """Group the restrictions of ``b_x`` to ``B(R)`` over ``x in B(R_scan)``.

    A restriction is a candidate when some witness lies in the shell
    ``d(x, 1) >= R_scan - margin``.
    """
    if margin is None:
        margin = m.default_margin()
    if margin < 1:
        raise HypothesisViolation("margin must be >= 1", "margin")
    if R_scan < R + margin:
        raise InsufficientScanRadius(f"need R_scan >= R + margin = {R + margin}, got {R_scan}", "R_scan >= R + margin")
    big = m.ball(R_scan)
    m.ball(R).inverses
    shell = R_scan - margin
    _SCAN_STATE.update(m=m, R=R, R_scan=R_scan, shell=shell, keep=keep)
    n = len(big)
    workers = max(1, int(workers))
    if workers == 1 or n < 2000:
        stats = _scan_chunk((0, n))
    else:
        step = -(-n // workers)
        chunks = [(lo, min(n, lo + step)) for lo in range(0, n, step)]
        stats = {}
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            for part in pool.map(_scan_chunk, chunks):
                _merge(stats, part)
    _SCAN_STATE.clear()
    cands, interior = [], []
    for pat in sorted(stats):
        cnt, ns, dmax, first, kept = stats[pat]
        kept = sorted(kept)[:keep]
        c = ScanCandidate(pat, cnt, ns, dmax, [big.elements[i] for i in kept], big.elements[first])
        (cands if ns else interior).append(c)
    return ScanReport(m, R, R_scan, margin, cands, interior)


# ---------------------------------------------------------------------------
# orbits


@dataclass
class OrbitReport:
    seed: RestrictedFunctional
    verdict: str  # fixed_point | finite_orbit | exceeded_budget | radius_exhausted
    size: int
    compare_radius: int
    mode: str
    elements: list = field(default_factory=list)
    stabilizer_generators: list = field(default_factory=list)
    budget: int = 0

    @property
    def finite(self):
        return self.verdict in ("fixed_point", "finite_orbit")

    def to_json(self):
        g = self.seed.metric.group
        return {
            "verdict": self.verdict,
            "size": self.size,
            "budget": self.budget,
            "mode": self.mode,
            "compare_radius": self.compare_radius,
            "seed": self.seed.to_json(),
            "elements": [list(e.key(self.compare_radius)) for e in self.elements],
            "stabilizer_generators": [g.format(s) for s in self.stabilizer_generators],
        }


def ordered_generators(m: Metric):
    g = m.group
    return sorted(g.generators, key=lambda s: (m.norm(s), g.sort_key(s)))


def orbit(m: Metric, h: RestrictedFunctional, budget: int, compare_radius: int | None = None,
          mode: str = "auto") -> OrbitReport:
    """Breadth-first search over generator actions.

    ``mode`` is ``exact`` (closed form, keyed by parameters), ``witness``
    (re-expanded Busemann restrictions) or ``restriction`` (finite tables,
    the radius shrinks with every step); ``auto`` picks from the provenance.
    """
    if mode == "auto":
        if isinstance(h.provenance, ClosedForm):
            mode = "exact"
        elif isinstance(h.provenance, Witness):
            mode = "witness"
        else:
            mode = "restriction"
    if compare_radius is None:
        compare_radius = h.radius // 2 if mode == "restriction" else h.radius
    if compare_radius > h.radius:
        raise RadiusExhausted("comparison radius exceeds the functional radius")

    def key(f):
        if mode == "exact":
            return f.provenance.key
        return f.key(compare_radius)

    gens = ordered_generators(m)
    seen = {key(h): 0}
    elements = [h]
    stab = []
    exhausted = False
    head = 0
    while head < len(elements):
        f = elements[head]
        for s in gens:
            if mode == "restriction":
                if f.radius - m.norm(s) < compare_radius:
                    exhausted = True
                    continue
                img = act(m, s, f)
            else:
                img = _act_exact(m, s, f)
            k = key(img)
            if head == 0 and k == key(h):
                stab.append(s)
            if k not in seen:
                seen[k] = len(elements)
                elements.append(img)
                if len(elements) > budget:
                    return OrbitReport(h, "exceeded_budget", len(elements), compare_radius, mode,
                                       elements, stab, budget)
        head += 1
    if exhausted:
        return OrbitReport(h, "radius_exhausted", len(elements), compare_radius, mode, elements, stab, budget)
    verdict = "fixed_point" if len(elements) == 1 else "finite_orbit"
    return OrbitReport(h, verdict, len(elements), compare_radius, mode, elements, stab, budget)


# ---------------------------------------------------------------------------


@dataclass
class HomCandidate:
    stabilizer: list
    generator_values: list
    values: dict
    pairs_checked: int
    failures: int
    nontrivial: bool
    radius: int

    def value(self, x) -> int:
        return self.values[x]

    def to_json(self, group):
        return {
            "stabilizer_generators": [group.format(s) for s in self.stabilizer],
            "generator_values": [[group.format(s), v] for s, v in self.generator_values],
            "subgroup_elements_checked": len(self.values),
            "pairs_checked": self.pairs_checked,
            "failures": self.failures,
            "nontrivial": self.nontrivial,
            "radius": self.radius,
        }


def _fixes(m, g, h, r, exact):
    if exact:
        return _act_exact(m, g, h).key(r) == h.key(r)
    if h.radius - m.norm(g) < r:
        raise RadiusExhausted(f"cannot test {m.group.format(g)} against radius {r}")
    return act(m, g, h).key(r) == h.key(r)


def extract_virtual_hom(m: Metric, report: OrbitReport, R: int, stabilizer_radius: int = 2) -> HomCandidate:
    """Check that the seed restricts to a homomorphism on its stabilizer near 1."""
    if not report.finite:
        raise NotFiniteOrbit(f"orbit verdict is {report.verdict}", "finite orbit")
    g = m.group
    h = report.seed
    exact = h.exact
    if exact and h.radius < R:
        h = expand(m, h, R)
    if h.radius < R:
        raise RadiusExhausted(f"functional radius {h.radius} < {R}")
    r = report.compare_radius
    stab = [x for x in m.ball(stabilizer_radius).elements
            if x != g.identity and _fixes(m, x, h, r, exact)]
    ball = m.ball(R)
    # elements of the stabilizer subgroup reachable inside B(R)
    members = [g.identity]
    seen = {g.identity}
    head = 0
    while head < len(members):
        x = members[head]
        head += 1
        for t in stab:
            y = g.mul(x, t)
            if y not in seen and y in ball:
                seen.add(y)
                members.append(y)
    members.sort(key=lambda x: ball.index[x])
    values = {x: h.value(x) for x in members}
    checked = failures = 0
    for x in members:
        for y in members:
            xy = g.mul(x, y)
            if xy in ball:
                checked += 1
                if h.value(xy) != values[x] + values[y]:
                    failures += 1
    nontrivial = any(values.values())
    if not nontrivial:
        raise TrivialRestriction("the functional vanishes on every checked stabilizer element")
    return HomCandidate(stab, [(s, values[s]) for s in stab if s in values], values, checked,
                        failures, nontrivial, R)


@dataclass
class DepthResult:
    values: tuple
    depth: int
    failing: list

    @property
    def ok(self):
        return not self.failing


def geodesic_depth_check(m: Metric, scan: ScanReport, R: int | None = None) -> list[DepthResult]:
    """For each candidate, the deepest ``r`` with ``h(x) = -r`` at some ``|x| = r``."""
    R = scan.R if R is None else R
    ball = m.ball(scan.R)
    out = []
    for c in scan.candidates:
        reached = set()
        for d, v in zip(ball.distances, c.values):
            if d <= R and v == -d:
                reached.add(d)
        failing = [r for r in range(R + 1) if r not in reached]
        depth = (failing[0] - 1) if failing else R
        out.append(DepthResult(c.values, depth, failing))
    return out


def check_claim(ok: bool, message: str):
    if not ok:
        raise ClaimViolation(message)


__all__ = [
    "Ball", "ClosedForm", "DepthResult", "HomCandidate", "OrbitReport", "RestrictedFunctional",
    "ScanCandidate", "ScanReport", "Stabilized", "Witness", "act", "busemann", "check_claim",
    "expand", "extract_virtual_hom", "from_closed_form", "geodesic_depth_check", "orbit",
    "scan_boundary",
]
