import functools

import pytest

from horofront.groups import (
    FiniteIndexSubgroup,
    LatticeMembership,
    abelianization,
    free_abelian,
    free_group,
    infinite_dihedral,
)
from horofront.metrics import ScaledMetric, WordMetric, banach_combine, induced


@pytest.fixture(autouse=True)
def _no_disk_cache(monkeypatch):
    monkeypatch.delenv("HOROFRONT_CACHE", raising=False)


# module-level caches so hypothesis tests can share expensive balls


@functools.cache
def word_f2():
    return WordMetric(free_group(2))


@functools.cache
def combo_f2():
    F = free_group(2)
    return banach_combine(WordMetric(F), abelianization(F), WordMetric(free_abelian(2)), 2)


@functools.cache
def induced_r3():
    D = infinite_dihedral()
    N = FiniteIndexSubgroup(D, LatticeMembership(3, "trivial"), [((3,), 0)])
    return induced(N)


@functools.cache
def scaled_f2():
    return ScaledMetric(WordMetric(free_group(2)), 3)


VARIANTS = {"word": word_f2, "scaled": scaled_f2, "induced": induced_r3, "max_combo": combo_f2}
