"""Closed-form horofunctions of ``Z^d`` with the standard generators.

``h_alpha(z) = sum_j h_{alpha_j}(z_j)`` where ``h_a(t) = |a - t| - |a|`` for an
integer ``a``, ``-t`` for ``+inf`` and ``t`` for ``-inf``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import FamilyMismatch, HypothesisViolation, SpecError
from .functionals import ClosedForm, RestrictedFunctional, from_closed_form
from .groups import FreeAbelianGroup, QuotientMap
from .metrics import Metric, WordMetric, banach_combine


class Inf(enum.Enum):
    POS = "+inf"
    NEG = "-inf"

    def __str__(self):
        return self.value


POS, NEG = Inf.POS, Inf.NEG


def _coord(a):
    if isinstance(a, Inf):
        return a
    if isinstance(a, str):
        try:
            return Inf(a.strip().replace("∞", "inf") if a.strip()[0] in "+-" else "+" + a.strip())
        except (ValueError, IndexError):
            raise SpecError(f"bad coordinate {a!r}") from None
    if isinstance(a, bool) or not isinstance(a, int):
        raise SpecError(f"coordinates are integers or +-inf, got {a!r}")
    return a


@dataclass(frozen=True)
class ZdFunctional:
    alpha: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(_coord(a) for a in self.alpha))

    @property
    def dim(self):
        return len(self.alpha)

    def to_json(self):
        return [a.value if isinstance(a, Inf) else a for a in self.alpha]

    def __str__(self):
        return "(" + ",".join(str(a) for a in self.alpha) + ")"


def zd(*alpha) -> ZdFunctional:
    return ZdFunctional(alpha)


def _as_alpha(alpha) -> ZdFunctional:
    return alpha if isinstance(alpha, ZdFunctional) else ZdFunctional(tuple(alpha))


def _h1(a, t: int) -> int:
    if a is POS:
        return -t
    if a is NEG:
        return t
    return abs(a - t) - abs(a)


def eval_functional(alpha, z) -> int:
    alpha = _as_alpha(alpha)
    if len(z) != alpha.dim:
        raise FamilyMismatch(f"dimension mismatch: {alpha.dim} vs {len(z)}")
    return sum(_h1(a, t) for a, t in zip(alpha.alpha, z))


def zd_act(z, alpha) -> ZdFunctional:
    alpha = _as_alpha(alpha)
    if len(z) != alpha.dim:
        raise FamilyMismatch(f"dimension mismatch: {alpha.dim} vs {len(z)}")
    return ZdFunctional(tuple(a if isinstance(a, Inf) else a + t for a, t in zip(alpha.alpha, z)))


def classify(alpha) -> str:
    alpha = _as_alpha(alpha)
    n_inf = sum(isinstance(a, Inf) for a in alpha.alpha)
    if n_inf == 0:
        return "interior"
    return "boundary_fixed" if n_inf == alpha.dim else "boundary"


class ZdClosedForm(ClosedForm):
    def __init__(self, alpha):
        self.alpha = _as_alpha(alpha)
        self.key = ("zd",) + self.alpha.alpha

    def evaluate(self, z):
        return eval_functional(self.alpha, z)

    def act(self, g):
        return ZdClosedForm(zd_act(g, self.alpha))

    def to_json(self, group):
        return {"kind": "closed_form", "alpha": self.alpha.to_json()}


class LiftedClosedForm(ClosedForm):
    """``f = M * h_alpha o pi``."""

    def __init__(self, pi: QuotientMap, alpha, M: int):
        self.pi = pi
        self.alpha = _as_alpha(alpha)
        self.M = M
        self.key = ("lift", M) + self.alpha.alpha

    def evaluate(self, x):
        return self.M * eval_functional(self.alpha, self.pi._apply_unchecked(x))

    def act(self, g):
        return LiftedClosedForm(self.pi, zd_act(self.pi._apply_unchecked(g), self.alpha), self.M)

    def to_json(self, group):
        return {"kind": "closed_form", "alpha": self.alpha.to_json(), "M": self.M,
                "quotient": self.pi.spec_hash()}


def standard_metric(d: int) -> WordMetric:
    return WordMetric(FreeAbelianGroup(d))


def restrict(alpha, R: int, metric: Metric | None = None) -> RestrictedFunctional:
    alpha = _as_alpha(alpha)
    if R < 0:
        raise ValueError("radius must be >= 0")
    m = metric or standard_metric(alpha.dim)
    if not (isinstance(m.group, FreeAbelianGroup) and m.group.is_standard and m.group.dim == alpha.dim):
        raise FamilyMismatch("closed forms need the standard marking of Z^d")
    return from_closed_form(m, ZdClosedForm(alpha), R)


def lift_functional(pi: QuotientMap, alpha, M: int, R: int, D: Metric | None = None) -> RestrictedFunctional:
    alpha = _as_alpha(alpha)
    tgt = pi.target
    if not isinstance(tgt, FreeAbelianGroup) or tgt.dim != alpha.dim:
        raise FamilyMismatch("the quotient must land in Z^d of matching dimension")
    if classify(alpha) == "interior":
        raise HypothesisViolation("only boundary functionals are lifted", "alpha in boundary")
    if D is None:
        d_H = tgt if tgt.is_standard else FreeAbelianGroup(tgt.dim)
        D = banach_combine(WordMetric(pi.source), pi, WordMetric(d_H), M)
    elif getattr(D, "M", None) != M:
        raise HypothesisViolation("D was built with a different M", "M")
    return from_closed_form(D, LiftedClosedForm(pi, alpha, M), R)


def realized_patterns(d: int, R: int, R_scan: int, margin: int) -> set:
    """Restrictions to ``B(R)`` of every ``h_alpha`` witnessed beyond the shell.

    ``alpha`` ranges over ``{-inf, -R_scan..R_scan, +inf}^d``.  A lattice point
    ``z`` with ``R_scan - margin <= |z| <= R_scan`` witnesses ``h_alpha`` on ``B(R)``
    when ``z_j = alpha_j`` at finite coordinates and ``z_j`` has the sign of
    ``alpha_j`` with ``|z_j| >= R`` at infinite ones.
    """
    import itertools

    ball = standard_metric(d).ball(R).elements
    shell = R_scan - margin
    coords = [NEG, *range(-R_scan, R_scan + 1), POS]

    def choices(a):
        if a is POS:
            return range(R, R_scan + 1)
        if a is NEG:
            return range(-R_scan, -R + 1)
        return (a,)

    out = set()
    for alpha in itertools.product(coords, repeat=d):
        lo = sum(min(abs(t) for t in choices(a)) for a in alpha)
        hi = sum(max(abs(t) for t in choices(a)) for a in alpha)
        # |z| takes every value between lo and hi as the infinite coordinates slide
        if hi >= shell and lo <= R_scan:
            out.add(tuple(eval_functional(alpha, y) for y in ball))
    return out
