"""Left-invariant integer metrics on marked groups.

Four variants share one interface (:class:`Metric`): the word metric of the
marking, an integer multiple of another metric, the metric induced on a
finite-index subgroup, and the max-combination ``D = max(d_G, M d_H o pi)``.
"""

from __future__ import annotations

import bisect
import math
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import FamilyMismatch, HypothesisViolation, MemoryCapExceeded, SpecError
from .groups import (
    FiniteIndexSubgroup,
    FreeAbelianGroup,
    FreeGroup,
    MarkedGroup,
    QuotientMap,
    group_from_spec,
    quotient_from_spec,
    spec_hash,
)

DEFAULT_CAP = 10**7
# above this many cached elements a far point query switches to a meet-in-the-middle search;
# slowly growing balls (polynomial growth) are allowed to get much larger first
_GROW_LIMIT = 200_000
_GROW_LIMIT_SLOW = 3_000_000


def _cache_dir(explicit):
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get("HOROFRONT_CACHE")
    return Path(env) if env else None


class Ball:
    """``{x : d(x, 1) <= r}`` ordered by distance, then by normal form."""

    def __init__(self, metric: "Metric", radius: int, items):
        key = metric.group.sort_key
        items = sorted(items, key=lambda it: (it[1], key(it[0])))
        self.metric = metric
        self.radius = radius
        self.elements = tuple(x for x, _ in items)
        self.distances = tuple(d for _, d in items)
        self.index = {x: i for i, x in enumerate(self.elements)}
        self._inverses = None

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.index

    def __iter__(self):
        return iter(zip(self.elements, self.distances))

    def distance_of(self, x) -> int:
        return self.distances[self.index[x]]

    def count_within(self, r: int) -> int:
        """Length of the prefix of this ball that forms ``B(r)``."""
        return bisect.bisect_right(self.distances, r)

    def sub(self, r: int) -> "Ball":
        n = self.count_within(r)
        out = Ball.__new__(Ball)
        out.metric, out.radius = self.metric, r
        out.elements, out.distances = self.elements[:n], self.distances[:n]
        out.index = {x: i for i, x in enumerate(out.elements)}
        out._inverses = None
        return out

    @property
    def inverses(self):
        if self._inverses is None:
            inv = self.metric.group.inv
            self._inverses = tuple(inv(x) for x in self.elements)
        return self._inverses

    def sizes(self) -> list[tuple[int, int]]:
        return [(r, self.count_within(r)) for r in range(self.radius + 1)]

    def to_text(self, header: str) -> str:
        fmt = self.metric.group.format
        lines = [header] + [f"{fmt(x)} {d}" for x, d in self]
        return "\n".join(lines) + "\n"


@dataclass
class GrowthTable:
    metric_id: str
    rows: list = field(default_factory=list)
    truncated: bool = False
    radius_reached: int | None = None

    def to_csv(self) -> str:
        return "r,size\n" + "".join(f"{r},{n}\n" for r, n in self.rows)


class Metric:
    """Base class; subclasses provide :meth:`norm` and :meth:`_ball_items`."""

    kind = ""

    def __init__(self, group: MarkedGroup, cap: int = DEFAULT_CAP, cache_dir=None):
        self.group = group
        self.cap = cap
        self.cache_dir = cache_dir
        self._balls: dict[int, Ball] = {}

    # interface ---------------------------------------------------------------
    def norm(self, x) -> int:
        raise NotImplementedError

    def _ball_items(self, r: int):
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError

    # derived -----------------------------------------------------------------
    def metric_id(self) -> str:
        return spec_hash(self.spec())

    def distance(self, x, y) -> int:
        """``d(x, y) = |x^-1 y|`` with membership checks."""
        self.group.check(x, y)
        g = self.group
        return self.norm(g.mul(g.inv(x), y))

    def _d(self, x, y) -> int:
        g = self.group
        return self.norm(g.mul(g.inv(x), y))

    def within(self, x, r: int) -> bool:
        return self.norm(x) <= r

    def max_generator_length(self) -> int:
        return max(self.norm(s) for s in self.group.generators)

    def default_margin(self) -> int:
        return 2 * self.max_generator_length()

    def ball(self, r: int) -> Ball:
        if r < 0:
            raise ValueError("radius must be >= 0")
        if r in self._balls:
            return self._balls[r]
        bigger = [k for k in self._balls if k > r]
        if bigger:
            b = self._balls[min(bigger)].sub(r)
        else:
            b = self._load_cached(r)
            if b is None:
                b = Ball(self, r, self._ball_items(r))
                if len(b) > self.cap:
                    raise MemoryCapExceeded(f"ball of radius {r} exceeds cap {self.cap}", r - 1, len(b))
                self._store_cached(b)
        self._balls[r] = b
        return b

    def restriction(self, x, ball: Ball) -> tuple:
        """Values of ``b_x(y) = d(x, y) - d(x, 1)`` on ``ball``, in ball order."""
        g = self.group
        nx = self.norm(x)
        norm, mul = self.norm, g.mul
        return tuple(norm(mul(yi, x)) - nx for yi in ball.inverses)

    # disk cache -------------------------------------------------------------
    def _cache_path(self, r):
        d = _cache_dir(self.cache_dir)
        if d is None:
            return None
        return d / f"{self.group.spec_hash()}-{self.metric_id()}-r{r}.ball"

    def _header(self, r, n):
        return f"# horofront-ball group={self.group.spec_hash()} metric={self.metric_id()} radius={r} count={n}"

    def _load_cached(self, r):
        path = self._cache_path(r)
        if path is None or not path.exists():
            return None
        try:
            lines = path.read_text().splitlines()
            head = dict(kv.split("=") for kv in lines[0].split()[2:])
            if head["group"] != self.group.spec_hash() or head["metric"] != self.metric_id():
                return None
            if int(head["radius"]) != r or int(head["count"]) != len(lines) - 1:
                return None
            items = []
            for line in lines[1:]:
                nf, d = line.rsplit(" ", 1)
                x = self.group.parse(nf)
                if not self.group.contains(x):
                    return None
                items.append((x, int(d)))
            b = Ball(self, r, items)
            if list(b.elements) != [x for x, _ in items]:
                return None
            return b
        except (ValueError, KeyError, IndexError, SpecError):
            return None

    def _store_cached(self, b: Ball):
        path = self._cache_path(b.radius)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(b.to_text(self._header(b.radius, len(b))))
        os.replace(tmp, path)


class WordMetric(Metric):
    """Graph distance in the Cayley graph of the group's marking.

    Standard markings of free and free abelian groups use the closed forms
    (reduced length, l1 norm); everything else is answered from a layered BFS
    cache, falling back to a meet-in-the-middle search for far points.
    """

    kind = "word"

    def __init__(self, group: MarkedGroup, cap: int = DEFAULT_CAP, cache_dir=None, closed_form: bool = True):
        super().__init__(group, cap, cache_dir)
        self._dist = {group.identity: 0}
        self._frontier = [group.identity]
        self._explored = 0
        self._closed = None
        if closed_form and getattr(group, "is_standard", False):
            if isinstance(group, FreeGroup):
                self._closed = len
            elif isinstance(group, FreeAbelianGroup):
                self._closed = lambda x: sum(map(abs, x))

    def spec(self):
        return {"type": "word", "group": self.group.spec_hash()}

    def _grow(self):
        g = self.group
        mul, gens, dist = g.mul, g.generators, self._dist
        r = self._explored + 1
        nxt = []
        for x in self._frontier:
            for s in gens:
                y = mul(x, s)
                if y not in dist:
                    dist[y] = r
                    nxt.append(y)
        if len(dist) > self.cap:
            raise MemoryCapExceeded(f"BFS exceeded cap {self.cap}", self._explored, len(dist))
        self._growth = len(nxt) / max(1, len(self._frontier))
        self._frontier = nxt
        self._explored = r
        return bool(nxt)

    def _grow_limit(self):
        return _GROW_LIMIT_SLOW if getattr(self, "_growth", 2.0) < 1.5 else _GROW_LIMIT

    def explore(self, r: int):
        while self._explored < r:
            if not self._grow():
                self._explored = r
                break

    def norm(self, x) -> int:
        if self._closed is not None:
            return self._closed(x)
        d = self._dist.get(x)
        if d is not None:
            return d
        while len(self._dist) < self._grow_limit():
            if not self._grow():
                raise FamilyMismatch(f"{x!r} is not reachable from the identity")
            d = self._dist.get(x)
            if d is not None:
                return d
        return self._meet(x)

    def _meet(self, x) -> int:
        """Search outward from ``x`` until it meets the cached inner ball."""
        g, dist, k = self.group, self._dist, self._explored
        seen = {x}
        layer = [x]
        best = None
        j = 0
        while True:
            for z in layer:
                dz = dist.get(z)
                if dz is not None and (best is None or j + dz < best):
                    best = j + dz
            if best is not None and best <= j + k:
                return best
            nxt = []
            for z in layer:
                for s in g.generators:
                    y = g.mul(z, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if len(seen) > self.cap:
                raise MemoryCapExceeded("meet-in-the-middle search exceeded cap", k, len(seen))
            layer = nxt
            j += 1

    def within(self, x, r: int) -> bool:
        if self._closed is not None:
            return self._closed(x) <= r
        self.explore(r)
        d = self._dist.get(x)
        return d is not None and d <= r

    def _ball_items(self, r):
        self.explore(r)
        return [(x, d) for x, d in self._dist.items() if d <= r]

    def _load_cached(self, r):
        b = super()._load_cached(r)
        if b is not None and self._explored < r:
            self._dist = dict(zip(b.elements, b.distances))
            self._frontier = list(b.elements[b.count_within(r - 1):]) if r else [self.group.identity]
            self._explored = r
        return b


class ScaledMetric(Metric):
    """``factor * base``."""

    kind = "scaled"

    def __init__(self, base: Metric, factor: int, cap: int = DEFAULT_CAP, cache_dir=None):
        if factor < 1:
            raise HypothesisViolation("scale factor must be a positive integer", "positive_factor")
        super().__init__(base.group, cap, cache_dir)
        self.base = base
        self.factor = factor

    def spec(self):
        return {"type": "scaled", "factor": self.factor, "base": self.base.spec()}

    def norm(self, x):
        return self.factor * self.base.norm(x)

    def _ball_items(self, r):
        return [(x, self.factor * d) for x, d in self.base.ball(r // self.factor)]


class InducedMetric(Metric):
    """Restriction of an ambient metric to a finite-index subgroup (need not be geodesic)."""

    kind = "induced"

    def __init__(self, subgroup: FiniteIndexSubgroup, ambient: Metric, cap: int = DEFAULT_CAP, cache_dir=None):
        if ambient.group != subgroup.ambient:
            raise FamilyMismatch("ambient metric lives on a different group")
        super().__init__(subgroup, cap, cache_dir)
        self.ambient = ambient

    def spec(self):
        return {"type": "induced", "group": self.group.spec_hash(), "ambient": self.ambient.spec()}

    def norm(self, x):
        return self.ambient.norm(x)

    def _ball_items(self, r):
        member = self.group.contains
        return [(x, d) for x, d in self.ambient.ball(r) if member(x)]


class MaxComboMetric(Metric):
    """``D(x, y) = max(d_G(x, y), M * d_H(pi x, pi y))``."""

    kind = "max_combo"

    def __init__(self, d_G: Metric, pi: QuotientMap, d_H: Metric, M: int, C: int,
                 cap: int = DEFAULT_CAP, cache_dir=None):
        super().__init__(d_G.group, cap, cache_dir)
        self.d_G, self.pi, self.d_H = d_G, pi, d_H
        self.M, self.C = M, C
        self._images = {}

    def spec(self):
        return {
            "type": "max_combo",
            "M": self.M,
            "C": self.C,
            "quotient": self.pi.spec_hash(),
            "source_metric": self.d_G.spec(),
            "target_metric": self.d_H.spec(),
        }

    def image(self, x):
        p = self._images.get(x)
        if p is None:
            p = self.pi._apply_unchecked(x)
            if len(self._images) < 2_000_000:
                self._images[x] = p
        return p

    def norm(self, x):
        return max(self.d_G.norm(x), self.M * self.d_H.norm(self.image(x)))

    def _ball_items(self, r):
        # BFS over the source marking, carrying images so pi is never re-evaluated
        G, H = self.group, self.pi.target
        M, nH, hmul, gmul = self.M, self.d_H.norm, H.mul, G.mul
        steps = list(zip(G.generators, self.pi.generator_images))
        seen = {G.identity: H.identity}
        frontier = [G.identity]
        out = [(G.identity, 0)]
        for layer in range(1, r + 1):
            nxt = []
            for x in frontier:
                px = seen[x]
                for s, ps in steps:
                    y = gmul(x, s)
                    if y not in seen:
                        seen[y] = hmul(px, ps)
                        nxt.append(y)
            if len(seen) > self.cap:
                raise MemoryCapExceeded(f"BFS exceeded cap {self.cap}", layer - 1, len(seen))
            for y in nxt:
                h = M * nH(seen[y])
                if h <= r:
                    out.append((y, max(layer, h)))
            frontier = nxt
        if len(self._images) < 2_000_000:
            for x, _ in out:
                self._images[x] = seen[x]
        return out

    def restriction(self, x, ball):
        G, H = self.group, self.pi.target
        nG, nH, M = self.d_G.norm, self.d_H.norm, self.M
        px = self.image(x)
        nx = max(nG(x), M * nH(px))
        hm, gm, hinv = H.mul, G.mul, H.inv
        pinv = getattr(ball, "_pi_inverses", None)
        if pinv is None:
            pinv = ball._pi_inverses = tuple(hinv(self.image(y)) for y in ball.elements)
        return tuple(
            max(nG(gm(yi, x)), M * nH(hm(pyi, px))) - nx for yi, pyi in zip(ball.inverses, pinv)
        )


# ---------------------------------------------------------------------------
# operations


def distance(m: Metric, x, y) -> int:
    return m.distance(x, y)


def ball(m: Metric, r: int) -> Ball:
    return m.ball(r)


def growth(m: Metric, r_max: int) -> GrowthTable:
    table = GrowthTable(m.metric_id())
    try:
        b = m.ball(r_max)
    except MemoryCapExceeded as exc:
        reached = exc.radius_reached if exc.radius_reached is not None else -1
        table.truncated = True
        table.radius_reached = reached
        if reached >= 0:
            try:
                table.rows = m.ball(reached).sizes()
            except MemoryCapExceeded:
                table.rows = []
        return table
    table.rows = b.sizes()
    table.radius_reached = r_max
    return table


def scaled(base: Metric, factor: int) -> ScaledMetric:
    return ScaledMetric(base, factor)


def induced(subgroup: FiniteIndexSubgroup, ambient: Metric | None = None) -> InducedMetric:
    return InducedMetric(subgroup, ambient or WordMetric(subgroup.ambient))


def compatibility_constant(d_G: Metric, pi: QuotientMap, d_H: Metric, R: int = 6) -> int:
    """Smallest integer ``C`` with ``|pi x|_H <= C |x|_G`` on ``B_G(R)`` and
    ``|section q|_G <= C |q|_H`` on ``B_H(R)``."""
    if R < 1:
        raise ValueError("verification radius must be >= 1")
    C = 1
    for x, d in d_G.ball(R):
        if d:
            C = max(C, -(-d_H.norm(pi._apply_unchecked(x)) // d))
    for q, d in d_H.ball(R):
        if d:
            C = max(C, -(-d_G.norm(pi.section(q)) // d))
    return C


def banach_combine(d_G: Metric, pi: QuotientMap, d_H: Metric, M: int, C: int | None = None,
                   R: int = 6) -> MaxComboMetric:
    if not isinstance(d_G, WordMetric) or not isinstance(d_H, WordMetric):
        raise HypothesisViolation("both component metrics must be word metrics", "cayley_components")
    if d_G.group != pi.source:
        raise FamilyMismatch("d_G must live on the source of the quotient map")
    if d_H.group.family != pi.target.family:
        raise FamilyMismatch("d_H must live on the target of the quotient map")
    if C is None:
        if d_H.group == pi.target:
            C = pi.constant
        else:
            C = compatibility_constant(d_G, pi, d_H, R)
    if M <= C:
        raise HypothesisViolation(f"need an integer M > C = {C}, got M = {M}", "M > C")
    return MaxComboMetric(d_G, pi, d_H, M, C)


# ---------------------------------------------------------------------------
# validation


@dataclass
class Verdict:
    name: str
    status: str  # pass | fail | probe_pass | probe_fail
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status in ("pass", "probe_pass")


@dataclass
class ValidationReport:
    metric_id: str
    radius: int
    verdicts: list

    @property
    def ok(self):
        return all(v.ok for v in self.verdicts)

    def verdict(self, name):
        return next(v for v in self.verdicts if v.name == name)

    def to_json(self):
        return {
            "metric": self.metric_id,
            "radius": self.radius,
            "verdicts": [{"name": v.name, "status": v.status, "details": v.details} for v in self.verdicts],
        }


def _qi_constant(pairs) -> int:
    """Least integer ``c >= 1`` with ``d/c - c <= m <= c d + c`` on all ``(d, m)``."""
    c = 1
    for d, m in pairs:
        while m > c * d + c or d > c * (m + c):
            c += 1
    return c


def validate_banach_axioms(m: Metric, R: int, samples: int = 1000, seed: int = 0,
                           probe_radius: int | None = None, probe_scan: int | None = None,
                           workers: int = 1) -> ValidationReport:
    from .functionals import scan_boundary

    if R < 2:
        raise ValueError("validation radius must be >= 2")
    rng = random.Random(seed)
    g = m.group
    b = m.ball(R)
    elems = b.elements
    verdicts = []

    bad = [g.format(x) for x, d in b if not isinstance(d, int) or (d == 0) != (x == g.identity)]
    verdicts.append(Verdict("integer_valued", "fail" if bad else "pass", {"offenders": bad[:5]}))

    failures = 0
    for _ in range(samples):
        x, y, z = (rng.choice(elems) for _ in range(3))
        if m._d(g.mul(z, x), g.mul(z, y)) != m._d(x, y):
            failures += 1
    verdicts.append(Verdict("left_invariant", "fail" if failures else "pass",
                            {"samples": samples, "failures": failures}))

    sizes = b.sizes()
    verdicts.append(Verdict("proper", "pass", {"ball_sizes": sizes}))

    word = WordMetric(g)
    if len(elems) ** 2 <= 400_000:
        pairs_xy = [(x, y) for x in elems for y in elems if x != y]
    else:
        pairs_xy = [(rng.choice(elems), rng.choice(elems)) for _ in range(max(samples, 20_000))]
        pairs_xy = [(x, y) for x, y in pairs_xy if x != y]
    pairs = [(word._d(x, y), m._d(x, y)) for x, y in pairs_xy]
    c = _qi_constant(pairs)
    lo = min(Fraction(mm, d) for d, mm in pairs)
    hi = max(Fraction(mm, d) for d, mm in pairs)
    min_nonzero = min(d for _, d in b if d)
    verdicts.append(Verdict("quasi_isometric", "pass", {
        "constant": c, "pairs": len(pairs), "ratio_min": str(lo), "ratio_max": str(hi),
        "min_nonzero_distance": min_nonzero,
    }))

    margin = m.default_margin()
    pr = R if probe_radius is None else probe_radius
    scan = scan_boundary(m, pr, probe_scan or pr + margin, margin, workers=workers)
    need = -(pr // c)
    depths = [min(cand.values) for cand in scan.candidates]
    ok = bool(depths) and all(v <= need for v in depths)
    verdicts.append(Verdict("unbounded_functionals", "probe_pass" if ok else "probe_fail", {
        "radius": pr, "R_scan": scan.R_scan, "candidates": len(depths), "threshold": need,
        "shallow": sum(v > need for v in depths), "min_values": depths,
        "note": "finite-radius probe, not a proof",
    }))
    return ValidationReport(m.metric_id(), R, verdicts)


# ---------------------------------------------------------------------------
# specs


def metric_from_spec(raw: dict | None, group: MarkedGroup) -> Metric:
    raw = raw or {"type": "word"}
    kind = raw.get("type", "word")
    if kind == "word":
        return WordMetric(group)
    if kind == "scaled":
        return ScaledMetric(metric_from_spec(raw.get("base"), group), int(raw["factor"]))
    if kind == "induced":
        if not isinstance(group, FiniteIndexSubgroup):
            raise SpecError("induced metric needs a subgroup-family group")
        return InducedMetric(group, metric_from_spec(raw.get("ambient"), group.ambient))
    if kind == "max_combo":
        pi = quotient_from_spec(raw["quotient"], source=group)
        d_G = metric_from_spec(raw.get("source_metric"), group)
        tm = raw.get("target_metric")
        d_H = metric_from_spec(tm, group_from_spec(tm["group"]) if tm and "group" in tm else pi.target)
        return banach_combine(d_G, pi, d_H, int(raw["M"]), raw.get("C"))
    raise SpecError(f"unknown metric type {kind!r}")


def geodesic_lengths(m: Metric, xs) -> list[int]:
    return [m.norm(x) for x in xs]


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def log_growth_rate(table: GrowthTable) -> float:
    """``log(|B(r)|) / r`` at the largest radius (a crude exponential-growth indicator)."""
    r, n = table.rows[-1]
    return math.log(n) / r if r else 0.0
