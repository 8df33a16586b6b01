import pytest
from hypothesis import given, settings, strategies as st

from horofront.errors import HypothesisViolation, SpecError
from horofront.freegrp import (
    check_length_inequality,
    classify,
    conjugate,
    contains_basis,
    exhaustive_inequality_sweep,
    in_B,
    in_E,
    long_conjugate,
    power_witness_replay,
    stabilizer_probe,
    threshold,
)
from horofront.groups import format_word, free_group, free_reduce, parse_word


def test_letter_classes():
    w = parse_word("abA")
    assert classify(w) == (1, -1)
    assert in_B(w, 1) and in_E(w, -1)
    with pytest.raises(SpecError):
        classify(())


def test_thresholds():
    assert threshold(free_group(2)) == 3
    assert threshold(free_group(2, ["a", "b", "ab"])) == 10
    assert not contains_basis(free_group(2, ["a", "ab"]))


def test_inequality_examples():
    r = check_length_inequality(["a", "b"], "A", "bbb", "a")
    assert r.holds and r.gy_length == 4 and r.g_length == 1
    r = check_length_inequality(["a", "b"], "bA", "BBB", "a")
    assert r.holds and r.gy_length == 5
    with pytest.raises(HypothesisViolation):
        check_length_inequality(["a", "b"], "A", "abb", "a")
    with pytest.raises(HypothesisViolation):
        check_length_inequality(["a", "b"], "a", "bbb", "a")
    with pytest.raises(HypothesisViolation):
        check_length_inequality(["a", "b"], "A", "bb", "a")


def test_long_conjugate_examples():
    t = long_conjugate("a", "b", 2)
    assert format_word(t) == "aa"
    y = conjugate(parse_word("b"), t)
    assert format_word(y) == "AAbaa"
    t = long_conjugate("a", "a", 1)
    assert format_word(t) == "b"
    assert format_word(conjugate(parse_word("a"), t)) == "Bab"
    with pytest.raises(HypothesisViolation):
        long_conjugate("a", "a", 1, rank=1)


@given(st.sampled_from([1, -1, 2, -2]),
       st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=8).map(free_reduce).filter(bool),
       st.integers(1, 6))
@settings(max_examples=500, derandomize=True)
def test_long_conjugate_postconditions(a, x, ell):
    y = conjugate(x, long_conjugate(a, x, ell))
    assert len(y) == len(x) + 2 * ell
    assert not in_B(y, a)
    assert not in_B(free_reduce(tuple(-c for c in reversed(y))), a)


def test_exhaustive_sweep():
    rep = exhaustive_inequality_sweep(["a", "b"], 5, 5)
    assert rep.cases > 0 and rep.violations == []
    assert sum(rep.per_letter.values()) == rep.cases
    assert exhaustive_inequality_sweep(["a", "b"], 3, 2).vacuous


def test_sampled_sweep_is_seeded():
    a = exhaustive_inequality_sweep(["a", "b", "ab"], 5, 14, mode="sampled", samples=2000, seed=3)
    b = exhaustive_inequality_sweep(["a", "b", "ab"], 5, 14, mode="sampled", samples=2000, seed=3)
    assert a.to_json() == b.to_json()
    assert a.cases == 2000 and not a.violations
    with pytest.raises(HypothesisViolation):
        exhaustive_inequality_sweep(["a", "b", "ab"], 5, 9, mode="sampled")


def test_sweep_refuses_huge_enumeration():
    with pytest.raises(HypothesisViolation):
        exhaustive_inequality_sweep(["a", "b"], 12, 14)


def test_stabilizer_probe():
    rep = stabilizer_probe(["a", "b"], 2, 10, 30)
    assert rep.candidates and rep.all_exceed
    assert all(c["images"] > 30 for c in rep.candidates)
    assert rep.replay_ok
    with pytest.raises(HypothesisViolation):
        stabilizer_probe(free_group(1), 2, 6, 10)


def test_power_witness_replay():
    out = power_witness_replay(["a", "b"], 1, parse_word("b"), range(1, 13))
    assert out["holds"]
    assert out["y"] == "AAAbaaa"
