import math
import random

import pytest

from dispnet.formula import Atom, Signature, parse_formula, random_formula
from dispnet.proofstructure import (
    CountMismatch,
    check_structure,
    count_mismatches,
    enumerate_linkings,
    linking_count,
    unfold,
)

SIG = Signature({"np": 0, "n": 0, "s": 0, "inf": 1})

RING_UP_HYPS = [
    parse_formula("np"),
    parse_formula("(np\\s)^>np"),
    parse_formula("(s^>np)!>s"),
]
GOAL_S = Atom("s")


def ring_up_frame():
    return unfold(RING_UP_HYPS, GOAL_S, SIG)


def test_ring_up_frame_shape():
    frame = ring_up_frame()
    tensor = [l for l in frame.links if l.kind == "tensor"]
    par = [l for l in frame.links if l.kind == "par"]
    assert sorted(l.tag for l in tensor) == ["L!", "L\\", "L^"]
    assert [l.tag for l in par] == ["R^"]
    assert str(par[0].mode) == ">"
    # atoms: four np occurrences and four s occurrences (goal included)
    assert len(frame.producers["np"]) == 2
    assert len(frame.consumers["np"]) == 2
    assert len(frame.producers["s"]) == 2
    assert len(frame.consumers["s"]) == 2


def test_ring_up_linking_count():
    frame = ring_up_frame()
    structures = list(enumerate_linkings(frame))
    # independent count: product of factorials of per-atom multiplicities
    expected = math.prod(
        math.factorial(len(v)) for v in frame.producers.values()
    )
    assert expected == 4
    assert len(structures) == 4
    assert linking_count(frame) == 4
    for ps in structures:
        assert check_structure(ps) == []
        assert len(ps.hypotheses) == 3


def test_axiom_frame():
    frame = unfold([Atom("np")], Atom("np"), SIG)
    assert frame.links == []
    structures = list(enumerate_linkings(frame))
    assert len(structures) == 1
    ps = structures[0]
    assert ps.goal == ps.hypotheses[0]


def test_simple_over_frame():
    frame = unfold([parse_formula("a/b"), Atom("b")], Atom("a"), Signature({"a": 0, "b": 0}))
    # one tensor link, leaves b, b, a, a
    assert len(frame.links) == 1
    link = frame.links[0]
    assert link.kind == "tensor" and link.tag == "L/"
    assert len(frame.producers["b"]) == 1 and len(frame.consumers["b"]) == 1
    assert len(frame.producers["a"]) == 1 and len(frame.consumers["a"]) == 1
    assert linking_count(frame) == 1


def test_count_mismatch():
    frame = unfold([Atom("np")], Atom("s"), SIG)
    mism = count_mismatches(frame)
    assert set(mism) == {"np", "s"}
    with pytest.raises(CountMismatch) as exc:
        list(enumerate_linkings(frame))
    assert set(exc.value.mismatches) == {"np", "s"}
    assert linking_count(frame) == 0


def test_enumeration_deterministic():
    frame = ring_up_frame()
    first = [ps.linking for ps in enumerate_linkings(frame)]
    second = [ps.linking for ps in enumerate_linkings(ring_up_frame())]
    assert first == second
    assert len(set(first)) == 4


def test_dump_stable():
    frame = ring_up_frame()
    assert frame.dump() == unfold(RING_UP_HYPS, GOAL_S, SIG).dump()
    assert "par R^> " in frame.dump()


def local_sort_ok(link, vertices, sig):
    def s(vid):
        return sig.sort_of(vertices[vid].formula)

    if link.tag in ("L/", "R/"):
        c_over_b, b = (link.premisses[0], link.premisses[1]) if link.tag == "L/" else (
            link.conclusions[0], link.conclusions[1])
        c = link.conclusions[0] if link.tag == "L/" else link.premisses[0]
        return s(c_over_b) == s(c) - s(b)
    if link.tag in ("L\\", "R\\"):
        a, under = (link.premisses[0], link.premisses[1]) if link.tag == "L\\" else (
            link.conclusions[0], link.conclusions[1])
        c = link.conclusions[0] if link.tag == "L\\" else link.premisses[0]
        return s(under) == s(c) - s(a)
    if link.tag in ("L*", "R*"):
        a, b = link.conclusions if link.tag == "L*" else link.premisses
        prod = link.premisses[0] if link.tag == "L*" else link.conclusions[0]
        return s(prod) == s(a) + s(b)
    if link.tag in ("L^", "R^"):
        up, b = (link.premisses[0], link.premisses[1]) if link.tag == "L^" else (
            link.conclusions[0], link.conclusions[1])
        c = link.conclusions[0] if link.tag == "L^" else link.premisses[0]
        return s(up) == s(c) + 1 - s(b)
    if link.tag in ("L!", "R!"):
        a, down = (link.premisses[0], link.premisses[1]) if link.tag == "L!" else (
            link.conclusions[0], link.conclusions[1])
        c = link.conclusions[0] if link.tag == "L!" else link.premisses[0]
        return s(down) == s(c) + 1 - s(a)
    if link.tag in ("Lo", "Ro"):
        a, b = link.conclusions if link.tag == "Lo" else link.premisses
        wrap = link.premisses[0] if link.tag == "Lo" else link.conclusions[0]
        return s(wrap) == s(a) + s(b) - 1
    raise AssertionError(link.tag)


def test_unfold_preserves_sorts_randomly():
    rng = random.Random(7)
    for _ in range(100):
        hyps = [random_formula(rng, SIG, 3) for _ in range(rng.randint(1, 3))]
        goal = random_formula(rng, SIG, 2)
        frame = unfold(hyps, goal, SIG)
        for link in frame.links:
            assert local_sort_ok(link, frame.vertices, SIG)


def test_linkings_match_factorial_product_randomly():
    rng = random.Random(11)
    checked = 0
    for _ in range(60):
        hyps = [random_formula(rng, SIG, 2) for _ in range(rng.randint(1, 2))]
        goal = random_formula(rng, SIG, 2)
        frame = unfold(hyps, goal, SIG)
        if count_mismatches(frame):
            continue
        expected = math.prod(
            math.factorial(len(v)) for v in frame.producers.values()
        )
        if expected > 200:
            continue
        got = sum(1 for _ in enumerate_linkings(frame))
        assert got == expected
        checked += 1
    assert checked > 5
