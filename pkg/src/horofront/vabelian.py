"""Virtually abelian groups ``Z^d x| F``: the ``U``/``T`` generating sets whose
Cayley graph contains a scaled lattice isometrically, the resulting finite
orbit in the boundary, and the detection pipeline through a quotient map."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ClaimViolation, FamilyMismatch, HypothesisViolation, InsufficientScanRadius
from .exactzd import POS, eval_functional, lift_functional
from .functionals import (
    RestrictedFunctional,
    Stabilized,
    act,
    busemann,
    extract_virtual_hom,
    orbit,
    scan_boundary,
)
from .groups import (
    FiniteGroup,
    FiniteIndexSubgroup,
    FreeAbelianGroup,
    LatticeMembership,
    MarkedGroup,
    QuotientMap,
    SemidirectGroup,
)
from .metrics import WordMetric, banach_combine, compatibility_constant


def as_semidirect(G: MarkedGroup) -> SemidirectGroup:
    """View ``Z^d`` as ``Z^d x| 1``; semidirect groups pass through."""
    if isinstance(G, SemidirectGroup):
        return G
    if isinstance(G, FreeAbelianGroup):
        fin = FiniteGroup.cyclic(1, dim=G.dim)
        return SemidirectGroup(G.dim, fin, [(v, 0) for v in G.generators])
    raise FamilyMismatch(f"{G.family} groups are not handled as virtually abelian")


class VAStructure:
    """Lattice ``H = Z^d x {1}``, representatives ``R = {(0, f)}`` and ``g = x_g r_g``."""

    def __init__(self, G: MarkedGroup):
        self.G = as_semidirect(G)
        self.dim = self.G.dim
        zero = (0,) * self.dim
        self.representatives = [(zero, f) for f in range(self.G.finite.order)]

    def decompose(self, g):
        v, f = g
        return (v, 0), ((0,) * self.dim, f)

    def in_lattice(self, g) -> bool:
        return g[1] == 0


def conjugate_closure_set(va: VAStructure, S=None) -> tuple[set, int]:
    """Conjugates of the ``x_s`` together with the ``x_{rr'}``, and their max sup-norm."""
    G = va.G
    S = list(S) if S is not None else list(G.generators)
    fin = G.finite
    out = set()
    for s in S + va.representatives:
        x, _ = va.decompose(s)
        # conjugating a lattice vector by (v, f) applies the matrix of f
        for A in fin.matrices:
            out.add(tuple(sum(a * c for a, c in zip(row, x[0])) for row in A) if va.dim else ())
    for r in va.representatives:
        for r2 in va.representatives:
            out.add(va.decompose(G.mul(r, r2))[0][0])
    M = max((max(map(abs, v), default=0) for v in out), default=0)
    return out, M


@dataclass
class UTConstruction:
    va: VAStructure
    S: list
    M: int
    K: int
    U: list
    T: SemidirectGroup
    N: FiniteIndexSubgroup
    index: int
    checked_lower_bound: int = 0

    def u_length(self, x) -> int:
        return sum(map(abs, x[0])) // self.K

    def to_json(self):
        g = self.T
        return {
            "M": self.M,
            "K": self.K,
            "d": self.va.dim,
            "U": [g.format(u) for u in self.U],
            "T": [g.format(t) for t in self.T.generators],
            "index": self.index,
        }


def build_UT(va: VAStructure, S=None, K: int | None = None) -> UTConstruction:
    G, d = va.G, va.dim
    if d < 1:
        raise HypothesisViolation("the lattice must have positive rank", "d >= 1")
    S = list(S) if S is not None else list(G.generators)
    _, M = conjugate_closure_set(va, S)
    if K is None:
        K = 2 * M * d + 1
    if K <= 2 * M * d:
        raise HypothesisViolation(f"K must exceed 2Md = {2 * M * d}", "K > 2Md")
    zero = [0] * d
    U = []
    for j in range(d):
        for sign in (1, -1):
            v = list(zero)
            v[j] = sign * K
            U.append((tuple(v), 0))
    if set(U) & set(G.with_generators(S).generators):
        raise HypothesisViolation("S meets U", "S and U disjoint")
    T = G.with_generators(list(S) + U)
    member = LatticeMembership(K, "trivial")
    N = FiniteIndexSubgroup(G.with_generators(S), member, U)
    index = G.finite.order * K ** d
    # the proof's bound |x|_S > |x|_U on N near the identity
    dS = WordMetric(G.with_generators(S))
    checked = 0
    for x, n in dS.ball(4):
        if n and member(G, x):
            checked += 1
            if not n > sum(map(abs, x[0])) // K:
                raise ClaimViolation(f"|x|_S <= |x|_U at {G.format(x)}")
    return UTConstruction(va, S, M, K, U, T, N, index, checked)


@dataclass
class EmbeddingReport:
    radius: int
    checked: int
    violations: list
    examples: list

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return dict(self.__dict__)


def verify_isometric_embedding(c: UTConstruction, R: int, metric: WordMetric | None = None) -> EmbeddingReport:
    if R < c.K:
        raise HypothesisViolation(f"radius must be at least K = {c.K}", "R >= K")
    m = metric or WordMetric(c.T)
    G = c.T
    checked, bad, examples = 0, [], []
    for x, n in m.ball(R):
        if x[1] or any(v % c.K for v in x[0]):
            continue
        checked += 1
        u = c.u_length(x)
        if u != n:
            bad.append([G.format(x), u, n])
        elif len(examples) < 5 and n:
            examples.append([G.format(x), n])
    return EmbeddingReport(R, checked, bad, examples)


@dataclass
class StepBounds:
    checked: int
    sup_violations: int
    l1_violations: int

    @property
    def ok(self):
        return not (self.sup_violations or self.l1_violations)


def step_bounds(va: VAStructure, S=None, R: int = 6) -> StepBounds:
    """``||x||_inf <= 2M|x|_S`` and ``||x||_1 <= 2dM|x|_S`` on ``H`` within ``B_S(R)``."""
    G = va.G.with_generators(S) if S is not None else va.G
    _, M = conjugate_closure_set(va, G.generators)
    d = va.dim
    checked = sup_bad = l1_bad = 0
    for x, n in WordMetric(G).ball(R):
        if x[1]:
            continue
        checked += 1
        sup_bad += max(map(abs, x[0]), default=0) > 2 * M * n
        l1_bad += sum(map(abs, x[0])) > 2 * d * M * n
    return StepBounds(checked, sup_bad, l1_bad)


def geodesic_ray(c: UTConstruction, n: int):
    """``gamma_n``: the ``n``-th vertex of the diagonal U-geodesic."""
    d = c.va.dim
    k, j = divmod(n, d)
    return (tuple(c.K * (k + (1 if i < j else 0)) for i in range(d)), 0)


@dataclass
class PipelineReport:
    construction: UTConstruction
    R: int
    R_scan: int
    stabilized_from: int
    functional: RestrictedFunctional
    orbit: object
    note: str = ("orbit certified at finite radius by restriction-level comparison; "
                 "promotion to genuine boundary membership is not proved")

    @property
    def orbit_size(self):
        return self.orbit.size

    def to_json(self):
        return {
            "construction": self.construction.to_json(),
            "R": self.R,
            "R_scan": self.R_scan,
            "stabilized_from": self.stabilized_from,
            "functional": self.functional.to_json(),
            "orbit": self.orbit.to_json(),
            "note": self.note,
        }


def stabilized_functional(c: UTConstruction, m: WordMetric, R: int, R_scan: int) -> tuple[RestrictedFunctional, int]:
    ball = m.ball(R)
    rows = [m.restriction(geodesic_ray(c, n), ball) for n in range(R_scan + 1)]
    if len(rows) < 3 or not rows[-1] == rows[-2] == rows[-3]:
        last = next((n for n in range(R_scan, 0, -1) if rows[n] != rows[n - 1]), 0)
        raise HypothesisViolation(
            f"restrictions do not stabilize: n={last - 1} and n={last} disagree", "stabilization")
    first = R_scan
    while first > 0 and rows[first - 1] == rows[-1]:
        first -= 1
    return RestrictedFunctional(m, R, rows[-1], Stabilized(first, R_scan)), first


def finite_orbit_pipeline(va: VAStructure, S=None, R: int = 6, R_scan: int = 30,
                          budget: int | None = None, compare_radius: int | None = None) -> PipelineReport:
    c = build_UT(va, S)
    m = WordMetric(c.T)
    h, first = stabilized_functional(c, m, R, R_scan)
    budget = c.index if budget is None else budget
    rep = orbit(m, h, budget, compare_radius if compare_radius is not None else R // 2, mode="restriction")
    if rep.verdict == "exceeded_budget":
        raise ClaimViolation(f"orbit exceeds the index bound {c.index}")
    if rep.verdict == "radius_exhausted":
        raise HypothesisViolation("orbit search ran out of radius; increase R", "R large enough")
    return PipelineReport(c, R, R_scan, first, h, rep)


# ---------------------------------------------------------------------------
# detection


@dataclass
class DetectionReport:
    C: int
    M: int
    K: int | None
    h_orbit_size: int
    f_orbit_size: int
    fixed_radii: list
    scan: dict
    hom: object
    metric: object
    f: RestrictedFunctional
    extra: dict = field(default_factory=dict)

    def to_json(self):
        g = self.metric.group
        return {
            "C": self.C,
            "M": self.M,
            "K": self.K,
            "h_orbit_size": self.h_orbit_size,
            "f_orbit_size": self.f_orbit_size,
            "fixed_point_radii": self.fixed_radii,
            "scan": self.scan,
            "homomorphism": self.hom.to_json(g) if self.hom is not None else None,
            "metric": self.metric.metric_id(),
            **self.extra,
        }


def _diagonal(d, n):
    return tuple([n] * d)


def detection_pipeline(G: MarkedGroup, pi: QuotientMap, R: int = 4, R_scan: int = 12,
                       scan_radius: int | None = None, margin: int | None = None,
                       full_scan: bool = True, workers: int = 1, va_radius: int = 6,
                       va_scan: int = 30) -> DetectionReport:
    """Banach metric ``D``, a lifted finite-orbit functional ``f`` and its virtual homomorphism.

    ``scan_radius`` (default ``R``) is the restriction radius for the scan
    cross-check; ``full_scan=False`` replaces the ball scan by the shell
    witnesses alone, which is what makes a restriction a candidate.
    """
    if pi.source != G:
        raise FamilyMismatch("the quotient map must start at G")
    tgt = pi.target
    if tgt.dim == 0:
        raise HypothesisViolation("a finite target has an empty boundary", "infinite target")
    scan_radius = R if scan_radius is None else scan_radius
    d_G = WordMetric(G)
    if isinstance(tgt, FreeAbelianGroup):
        return _detect_zd(G, pi, d_G, R, R_scan, scan_radius, margin, full_scan, workers)
    if isinstance(tgt, SemidirectGroup):
        return _detect_va(G, pi, d_G, R, R_scan, scan_radius, margin, workers, va_radius, va_scan)
    raise FamilyMismatch("the target must be Z^d or a semidirect Z^d x| F")


def _shell_witnesses(D, pi, f, scan_radius, R_scan, margin, lifts):
    ball = D.ball(scan_radius)
    shell = R_scan - margin
    hits = []
    for x in lifts:
        n = D.norm(x)
        if shell <= n <= R_scan and D.restriction(x, ball) == f.key(scan_radius):
            hits.append((D.group.format(x), n))
    return hits


def _detect_zd(G, pi, d_G, R, R_scan, scan_radius, margin, full_scan, workers):
    d = pi.target.dim
    std = FreeAbelianGroup(d)
    d_H = WordMetric(std)
    C = pi.constant if pi.target.is_standard else compatibility_constant(d_G, pi, d_H)
    M = C + 1
    D = banach_combine(d_G, pi, d_H, M, C)
    alpha = (POS,) * d
    f = lift_functional(pi, alpha, M, R, D)
    # |orbit h| = 1 for the all-infinite point; the lift is checked against it
    f_orbit = orbit(D, f, budget=1)
    if not f_orbit.finite or f_orbit.size > 1:
        raise ClaimViolation(f"lifted orbit size {f_orbit.size} exceeds the target orbit size 1")
    radii = []
    for r in range(R + 1):
        fr = lift_functional(pi, alpha, M, r + D.max_generator_length(), D)
        if any(act(D, s, fr).key(r) != fr.key(r) for s in G.generators):
            raise ClaimViolation(f"lifted functional is not fixed at radius {r}")
        radii.append(r)
    margin = D.default_margin() if margin is None else margin
    lifts = []
    for n in range(1, R_scan + 1):
        try:
            lifts.append(pi.section(_diagonal(d, n)))
        except HypothesisViolation:
            break
    hits = _shell_witnesses(D, pi, f, scan_radius, R_scan, margin, lifts)
    scan = {"R": scan_radius, "R_scan": R_scan, "margin": margin, "section_witnesses": hits}
    # without a shell witness the scan cannot contain f; that is a radius problem, not a failed claim
    if not hits:
        raise InsufficientScanRadius("no section lift reproduces the lift at the shell; increase R_scan",
                                     "R_scan large enough")
    if full_scan:
        rep = scan_boundary(D, scan_radius, R_scan, margin, workers=workers)
        cand = rep.find(f.key(scan_radius))
        scan.update({
            "candidates": len(rep.candidates),
            "found": cand is not None,
            "witnesses": cand.witnesses if cand else 0,
            "shell_witnesses": cand.shell_witnesses if cand else 0,
            "max_witness_distance": cand.max_witness_distance if cand else None,
        })
        if cand is None:
            raise ClaimViolation("lifted functional is missing from the scan candidates")
    hom = extract_virtual_hom(D, f_orbit, R)
    if hom.failures:
        raise ClaimViolation(f"{hom.failures} additivity failures on the stabilizer")
    extra = {"alpha": ["+inf"] * d}
    return DetectionReport(C, M, None, 1, f_orbit.size, radii, scan, hom, D, f, extra)


def _detect_va(G, pi, d_G, R, R_scan, scan_radius, margin, workers, va_radius, va_scan):
    va = VAStructure(pi.target)
    pipe = finite_orbit_pipeline(va, R=va_radius, R_scan=va_scan)
    c = pipe.construction
    m_T = WordMetric(c.T)
    d_H = m_T
    C = compatibility_constant(d_G, pi, d_H)
    M = C + 1
    D = banach_combine(d_G, pi, d_H, M, C)
    # B_D(R) maps into B_T(R // M), so h is only needed out to that radius
    h, _ = stabilized_functional(c, m_T, max(R // M, 1), va_scan)
    img = pi._apply_unchecked
    ball = D.ball(R)
    f = RestrictedFunctional(D, R, [M * h.value(img(x)) for x in ball.elements])
    f_orbit = orbit(D, f, budget=pipe.orbit.size, compare_radius=R // 2, mode="restriction")
    if f_orbit.verdict == "exceeded_budget":
        raise ClaimViolation(f"lifted orbit exceeds the target orbit size {pipe.orbit.size}")
    if f_orbit.verdict == "radius_exhausted":
        raise HypothesisViolation("orbit search on the lift ran out of radius; increase R", "R large enough")
    margin = D.default_margin() if margin is None else margin
    lifts = [pi.section(geodesic_ray(c, n)) for n in range(1, va_scan + 1)]
    hits = _shell_witnesses(D, pi, f, scan_radius, R_scan, margin, lifts)
    if not hits:
        raise InsufficientScanRadius("no section lift reproduces the lift at the shell; increase R_scan",
                                     "R_scan large enough")
    scan = {"R": scan_radius, "R_scan": R_scan, "margin": margin, "section_witnesses": hits}
    # lifts of a single T-step have D-length M, so the stabilizer search must reach M
    hom = extract_virtual_hom(D, f_orbit, R, stabilizer_radius=max(2, M))
    if hom.failures:
        raise ClaimViolation(f"{hom.failures} additivity failures on the stabilizer")
    extra = {"K": c.K, "va_orbit": pipe.orbit.verdict, "f_orbit": f_orbit.verdict}
    return DetectionReport(C, M, c.K, pipe.orbit.size, f_orbit.size, [], scan, hom, D, f, extra)


def zd_fixed_point_check(c: UTConstruction, h: RestrictedFunctional) -> bool:
    """Compare the pipeline functional on ``N`` with ``h_{+inf,...}`` in U-coordinates."""
    d = c.va.dim
    for x, v in zip(h.ball.elements, h.values):
        if x[1] == 0 and all(t % c.K == 0 for t in x[0]):
            z = tuple(t // c.K for t in x[0])
            if v != eval_functional((POS,) * d, z):
                return False
    return True


__all__ = [
    "DetectionReport", "EmbeddingReport", "PipelineReport", "StepBounds", "UTConstruction",
    "VAStructure", "as_semidirect", "build_UT", "busemann", "conjugate_closure_set",
    "detection_pipeline", "finite_orbit_pipeline", "geodesic_ray", "stabilized_functional",
    "step_bounds", "verify_isometric_embedding", "zd_fixed_point_check",
]
