"""Free-group combinatorics: letter classes, the length inequality
``|gy|_S >= |g|_S + 1``, long conjugates and the no-finite-orbit probe."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import HypothesisViolation, SpecError
from .functionals import busemann, orbit, scan_boundary
from .groups import FreeGroup, format_word, free_inv, free_mul, free_reduce, letter_name, parse_word
from .metrics import WordMetric


def classify(x: tuple) -> tuple[int, int]:
    """``(first letter, last letter)`` of a reduced word."""
    if not x:
        raise SpecError("the identity has no letter class")
    return x[0], x[-1]


def in_B(x: tuple, a: int) -> bool:
    return bool(x) and x[0] == a


def in_E(x: tuple, a: int) -> bool:
    return bool(x) and x[-1] == a


def letters(rank: int) -> list[int]:
    """Basis letters and inverses in the order a, A, b, B, ..."""
    return [s for i in range(1, rank + 1) for s in (i, -i)]


def _as_group(S, rank: int | None = None) -> FreeGroup:
    if isinstance(S, FreeGroup):
        return S
    words = [parse_word(w, rank) if isinstance(w, str) else free_reduce(w) for w in S]
    if rank is None:
        rank = max((abs(c) for w in words for c in w), default=1)
    return FreeGroup(rank, words)


def generator_bound(S: FreeGroup) -> int:
    """``M = max |s|_A`` over the marking."""
    return max(len(s) for s in S.generators)


def threshold(S: FreeGroup) -> int:
    M = generator_bound(S)
    return (2 * M + 1) * M


def contains_basis(S: FreeGroup) -> bool:
    gens = set(S.generators)
    return all((c,) in gens for c in letters(S.rank))


@dataclass
class CheckResult:
    holds: bool
    g_length: int
    gy_length: int
    M: int
    threshold: int

    def to_json(self):
        return dict(self.__dict__)


def _metric_for(S: FreeGroup, metric: WordMetric | None):
    return metric if metric is not None and metric.group == S else WordMetric(S)


def check_length_inequality(S, g, y, a: int, metric: WordMetric | None = None) -> CheckResult:
    S = _as_group(S)
    g = parse_word(g, S.rank) if isinstance(g, str) else free_reduce(g)
    y = parse_word(y, S.rank) if isinstance(y, str) else free_reduce(y)
    if isinstance(a, str):
        (a,) = parse_word(a, S.rank)
    if not contains_basis(S):
        raise HypothesisViolation("the marking must contain the free basis", "A in S")
    if not in_E(g, -a):
        raise HypothesisViolation(f"g must end with {letter_name(-a)}", "g in E_{a^-1}")
    if in_B(y, a):
        raise HypothesisViolation(f"y must not begin with {letter_name(a)}", "y not in B_a")
    t = threshold(S)
    if len(y) < t:
        raise HypothesisViolation(f"need |y|_A >= {t}", "|y|_A >= (2M+1)M")
    m = _metric_for(S, metric)
    ng = m.norm(g)
    ngy = m.norm(free_mul(g, y))
    return CheckResult(ngy >= ng + 1, ng, ngy, generator_bound(S), t)


def long_conjugate(a: int, x: tuple, ell: int, rank: int = 2) -> tuple:
    """``t = b^ell`` for the first letter ``b`` outside ``{a^-1, first(x), last(x)^-1}``."""
    if isinstance(x, str):
        x = parse_word(x, rank)
    if isinstance(a, str):
        (a,) = parse_word(a, rank)
    x = free_reduce(x)
    if not x:
        raise SpecError("x must be non-trivial")
    if rank < 2:
        raise HypothesisViolation("long conjugates need rank >= 2", "d >= 2")
    if ell < 1:
        raise SpecError("ell must be >= 1")
    banned = {-a, x[0], -x[-1]}
    b = next(c for c in letters(rank) if c not in banned)
    return (b,) * ell


def conjugate(x: tuple, t: tuple) -> tuple:
    return free_mul(free_mul(free_inv(t), x), t)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepReport:
    mode: str
    M: int
    threshold: int
    g_max: int
    y_max: int
    cases: int = 0
    holds: int = 0
    violations: list = field(default_factory=list)
    per_letter: dict = field(default_factory=dict)
    vacuous: bool = False
    seed: int | None = None

    def to_json(self):
        return {
            "mode": self.mode,
            "M": self.M,
            "threshold": self.threshold,
            "g_max": self.g_max,
            "y_max": self.y_max,
            "cases": self.cases,
            "holds": self.holds,
            "violations": [[format_word(g), format_word(y), letter_name(a)] for g, y, a in self.violations],
            "per_letter": self.per_letter,
            "vacuous": self.vacuous,
            "seed": self.seed,
        }


def _words(rank, length, first=None, last=None):
    """Reduced words of exactly ``length`` letters, in lexicographic letter order."""
    alphabet = letters(rank)
    out = [()]
    for i in range(length):
        nxt = []
        for w in out:
            for c in alphabet:
                if w and c == -w[-1]:
                    continue
                if i == 0 and first is not None and c != first:
                    continue
                nxt.append(w + (c,))
        out = nxt
    if last is not None:
        out = [w for w in out if w and w[-1] == last]
    return out


EXHAUSTIVE_CAP = 50_000_000


def exhaustive_inequality_sweep(S, g_max: int, y_max: int, mode: str = "exhaustive",
                                samples: int = 10_000, seed: int = 0) -> SweepReport:
    S = _as_group(S)
    if not contains_basis(S):
        raise HypothesisViolation("the marking must contain the free basis", "A in S")
    M, t = generator_bound(S), threshold(S)
    rep = SweepReport(mode, M, t, g_max, y_max, seed=seed if mode == "sampled" else None)
    m = WordMetric(S)
    rank = S.rank
    if mode == "exhaustive":
        if y_max < t:
            rep.vacuous = True
            return rep
        n_g = sum(2 * rank * (2 * rank - 1) ** (k - 1) for k in range(1, g_max + 1))
        n_y = sum(2 * rank * (2 * rank - 1) ** (k - 1) for k in range(t, y_max + 1))
        if n_g * n_y > EXHAUSTIVE_CAP:
            raise HypothesisViolation(
                f"about {n_g * n_y} cases; use sampled mode with a seed", "feasible thresholds")
        ys = [y for k in range(t, y_max + 1) for y in _words(rank, k)]
        for a in letters(rank):
            cnt = 0
            for k in range(1, g_max + 1):
                for g in _words(rank, k, last=-a):
                    ng = m.norm(g)
                    for y in ys:
                        if y[0] == a:
                            continue
                        cnt += 1
                        if m.within(free_mul(g, y), ng):
                            rep.violations.append((g, y, a))
            rep.per_letter[letter_name(a)] = cnt
            rep.cases += cnt
    elif mode == "sampled":
        if y_max < t:
            raise HypothesisViolation(f"y_max must be >= {t}", "feasible thresholds")
        rng = random.Random(seed)
        alphabet = letters(rank)
        for _ in range(samples):
            a = rng.choice(alphabet)
            g = _random_word(rng, alphabet, rng.randint(1, g_max), last=-a)
            y = _random_word(rng, alphabet, rng.randint(t, y_max), not_first=a)
            ng = m.norm(g)
            rep.cases += 1
            rep.per_letter[letter_name(a)] = rep.per_letter.get(letter_name(a), 0) + 1
            if m.within(free_mul(g, y), ng):
                rep.violations.append((g, y, a))
    else:
        raise SpecError(f"unknown sweep mode {mode!r}")
    rep.holds = rep.cases - len(rep.violations)
    return rep


def _random_word(rng, alphabet, length, last=None, not_first=None):
    # built right to left when the last letter is pinned
    if last is not None:
        w = [last]
        while len(w) < length:
            w.append(rng.choice([c for c in alphabet if c != -w[-1]]))
        return tuple(reversed(w))
    w = [rng.choice([c for c in alphabet if c != not_first])]
    while len(w) < length:
        w.append(rng.choice([c for c in alphabet if c != -w[-1]]))
    return tuple(w)


# ---------------------------------------------------------------------------
# stabilizer probe


@dataclass
class ProbeReport:
    R: int
    R_scan: int
    budget: int
    candidates: list
    replay: list

    @property
    def all_exceed(self):
        return all(c["verdict"] == "exceeded_budget" for c in self.candidates)

    @property
    def replay_ok(self):
        return all(r["holds"] for r in self.replay)

    def to_json(self):
        return {
            "R": self.R,
            "R_scan": self.R_scan,
            "budget": self.budget,
            "candidates": self.candidates,
            "replay": self.replay,
            "all_exceed_budget": self.all_exceed,
            "replay_ok": self.replay_ok,
            "note": "bounded-radius evidence; not a proof",
        }


def stabilizer_probe(S, R: int, R_scan: int, budget: int, margin: int | None = None,
                     orbit_radius: int | None = None, workers: int = 1) -> ProbeReport:
    S = _as_group(S)
    if S.rank < 2:
        raise HypothesisViolation("free groups of rank 1 have fixed points; rank >= 2 required", "d >= 2")
    if not contains_basis(S):
        raise HypothesisViolation("the marking must contain the free basis", "A in S")
    m = WordMetric(S)
    scan = scan_boundary(m, R, R_scan, margin, workers=workers)
    # a restriction to B(R) sees only the first R letters of a witness, which caps the
    # number of distinguishable images; the orbit is compared two steps further out
    orbit_radius = orbit_radius if orbit_radius is not None else R + 2
    t = threshold(S)
    cands, replay = [], []
    for c in scan.candidates:
        w = scan.canonical_witness(c)
        rep = orbit(m, busemann(m, w, orbit_radius), budget, compare_radius=orbit_radius)
        cands.append({
            "values": list(c.values),
            "witness": format_word(w),
            "shell_witnesses": c.shell_witnesses,
            "verdict": rep.verdict,
            "images": rep.size,
        })
        a = w[0]
        x = next((c2,) for c2 in letters(S.rank) if abs(c2) != abs(a))
        tt = long_conjugate(a, x, t, S.rank)
        y = conjugate(x, tt)
        yi = free_inv(y)
        # b_g(y) = |y^-1 g| - |g|
        ws = [g for g in c.sample if g[0] == a]
        by = min(m.norm(free_mul(yi, g)) - m.norm(g) for g in ws)
        byi = min(m.norm(free_mul(y, g)) - m.norm(g) for g in ws)
        replay.append({
            "a": letter_name(a),
            "x": format_word(x),
            "t": format_word(tt),
            "y": format_word(y),
            "y_length": len(y),
            "y_outside_B_a": not in_B(y, a) and not in_B(yi, a),
            "witnesses": len(ws),
            "min_b_y": by,
            "min_b_y_inverse": byi,
            "holds": by >= 1 and byi >= 1 and len(y) >= t,
        })
    return ProbeReport(R, R_scan, budget, cands, replay)


def power_witness_replay(S, a: int, x: tuple, n_range) -> dict:
    """Replay with the explicit witnesses ``g_n = a^n``."""
    S = _as_group(S)
    m = WordMetric(S)
    t = threshold(S)
    y = conjugate(x, long_conjugate(a, x, t, S.rank))
    yi = free_inv(y)
    rows = []
    for n in n_range:
        g = (a,) * n
        rows.append((n, m.norm(free_mul(yi, g)) - m.norm(g), m.norm(free_mul(y, g)) - m.norm(g)))
    return {"y": format_word(y), "rows": rows, "holds": all(u >= 1 and v >= 1 for _, u, v in rows)}
