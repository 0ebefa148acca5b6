import random

import pytest
from hypothesis import given, settings, strategies as st

from dispnet.formula import (
    Atom,
    Down,
    FormulaError,
    Over,
    Prod,
    Signature,
    Under,
    Up,
    Wrap,
    format_formula,
    parse_formula,
    random_formula,
    sort_of_formula,
    well_sorted,
)
from dispnet.terms import FIRST, at

SIG = Signature({"np": 0, "n": 0, "s": 0, "pp": 0, "inf": 1, "big2": 2})


def brute_sort(f, sig):
    # Independent evaluator: the raw recurrences, no caching, no checks.
    if isinstance(f, Atom):
        return sig.sorts[f.name]
    if isinstance(f, Prod):
        return brute_sort(f.left, sig) + brute_sort(f.right, sig)
    if isinstance(f, Under):
        return brute_sort(f.result, sig) - brute_sort(f.arg, sig)
    if isinstance(f, Over):
        return brute_sort(f.result, sig) - brute_sort(f.arg, sig)
    if isinstance(f, Wrap):
        return brute_sort(f.left, sig) + brute_sort(f.right, sig) - 1
    if isinstance(f, Down):
        return brute_sort(f.result, sig) + 1 - brute_sort(f.arg, sig)
    if isinstance(f, Up):
        return brute_sort(f.result, sig) + 1 - brute_sort(f.arg, sig)
    raise AssertionError(f)


def test_sort_examples():
    f = parse_formula("(np\\s)^>np")
    assert sort_of_formula(f, SIG) == 1
    assert sort_of_formula(Atom("np"), SIG) == 0
    g = parse_formula("(s^>np)!>s")
    assert sort_of_formula(g, SIG) == 0
    assert brute_sort(g, SIG) == 0


def test_well_sorted_ok():
    assert well_sorted(parse_formula("(np\\s)^>np"), SIG) == []


def test_well_sorted_circumfix_violation():
    # the left argument of a wrap connective needs a separator
    f = parse_formula("np\\(s o> s)")
    violations = well_sorted(f, SIG)
    assert violations
    assert any("sort 0" in v for v in violations)


def test_well_sorted_mode_index_violation():
    f = Up(Atom("s"), Atom("np"), at(2))  # s^2np has sort 1, mode 2 too big
    violations = well_sorted(f, SIG)
    assert violations
    assert any("mode 2" in v for v in violations)


def test_well_sorted_unknown_atom():
    assert well_sorted(Atom("zz"), SIG) == ["unknown atom zz"]


def test_well_sorted_negative_division():
    f = parse_formula("inf\\np")  # 0 - 1 < 0
    assert well_sorted(f, SIG)


def test_parse_associativity():
    assert parse_formula("a\\b\\c") == Under(Atom("a"), Under(Atom("b"), Atom("c")))
    assert parse_formula("a/b/c") == Over(Over(Atom("a"), Atom("b")), Atom("c"))
    with pytest.raises(FormulaError):
        parse_formula("a\\b/c")
    with pytest.raises(FormulaError):
        parse_formula("a*b*c")


def test_parse_modes():
    f = parse_formula("s^12np")
    assert f == Up(Atom("s"), Atom("np"), at(12))
    g = parse_formula("inf o> np")
    assert g == Wrap(Atom("inf"), Atom("np"), FIRST)
    with pytest.raises(FormulaError):
        parse_formula("s^np")


def test_print_examples():
    assert format_formula(parse_formula("(np\\s)^>np")) == "(np\\s)^>np"
    assert format_formula(parse_formula("a\\b\\c")) == "a\\b\\c"
    assert format_formula(parse_formula("a/(b/c)")) == "a/(b/c)"
    assert format_formula(parse_formula("inf o< np")) == "inf o< np"


def test_signature_parse_format():
    text = "np 0\ns 0\ninf 1\n"
    sig = Signature.parse(text)
    assert sig.sorts == {"np": 0, "s": 0, "inf": 1}
    assert Signature.parse(sig.format()) == sig
    with pytest.raises(FormulaError):
        Signature.parse("np zero")
    with pytest.raises(FormulaError):
        Signature.parse("np 0\nnp 1")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5))
def test_random_formula_sort_identities(seed, budget):
    rng = random.Random(seed)
    f = random_formula(rng, SIG, budget)
    assert well_sorted(f, SIG) == []
    s = sort_of_formula(f, SIG)
    assert s >= 0
    assert s == brute_sort(f, SIG)
    # Table-style rearrangements on compound formulas
    if isinstance(f, Under):
        assert sort_of_formula(f, SIG) + sort_of_formula(f.arg, SIG) == sort_of_formula(f.result, SIG)
    if isinstance(f, Over):
        assert sort_of_formula(f, SIG) + sort_of_formula(f.arg, SIG) == sort_of_formula(f.result, SIG)
    if isinstance(f, Up):
        assert sort_of_formula(f, SIG) + sort_of_formula(f.arg, SIG) == sort_of_formula(f.result, SIG) + 1
    if isinstance(f, Down):
        assert sort_of_formula(f, SIG) + sort_of_formula(f.arg, SIG) == sort_of_formula(f.result, SIG) + 1


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_formula_round_trip(seed):
    rng = random.Random(seed)
    f = random_formula(rng, SIG, 4)
    assert parse_formula(format_formula(f)) == f


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_well_sorted_monotone(seed):
    # a compound formula is ok iff its parts are ok and its own top
    # condition holds
    from dispnet.formula import _children, top_level_ok

    rng = random.Random(seed)
    f = random_formula(rng, SIG, 4)
    ok = well_sorted(f, SIG) == []
    parts_ok = all(well_sorted(c, SIG) == [] for c in _children(f))
    assert ok == (parts_ok and top_level_ok(f, SIG))
