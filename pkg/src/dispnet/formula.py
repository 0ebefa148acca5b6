"""Formulas of the Displacement calculus and their sort arithmetic.

Six binary connectives over sorted atoms. The concatenation family is
the familiar one: ``A\\C`` (left division), ``C/B`` (right division)
and ``A*B`` (product). The wrap family is mode-indexed: ``C^kB``
(extraction: C missing an infix B at the separator picked by k),
``A!kC`` (infixation: the thing that wraps inside a circumfix A to give
C) and ``AokB`` (A wrapped around B).

Sorts propagate through connectives by simple arithmetic: products add,
divisions subtract, and each wrap connective additionally accounts for
the one separator it consumes or introduces. Side conditions (the
circumfix argument of ``!``/``o`` must have a separator; numeric modes
must address an existing separator) are what ``well_sorted`` checks.

A Signature fixes the sorts of atoms and memoizes formula sorts, so the
rest of the system can read sorts as if they were stored on each node.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .terms import FIRST, LAST, Mode, at, parse_mode


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Over:
    """C/B: wants a B to its right to form a C."""

    result: "Formula"
    arg: "Formula"


@dataclass(frozen=True)
class Under:
    """A\\C: wants an A to its left to form a C."""

    arg: "Formula"
    result: "Formula"


@dataclass(frozen=True)
class Prod:
    """A*B: concatenation of an A and a B."""

    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Up:
    """C^kB: a C with a B extracted at the k-designated separator."""

    result: "Formula"
    arg: "Formula"
    mode: Mode


@dataclass(frozen=True)
class Down:
    """A!kC: infix that a circumfix A wraps around to form a C."""

    arg: "Formula"
    result: "Formula"
    mode: Mode


@dataclass(frozen=True)
class Wrap:
    """AokB: an A wrapped around a B at the k-designated separator."""

    left: "Formula"
    right: "Formula"
    mode: Mode


Formula = "Atom | Over | Under | Prod | Up | Down | Wrap"


class FormulaError(ValueError):
    pass


class IllSorted(FormulaError):
    """Raised when sort arithmetic is read off an ill-sorted formula."""


class Signature:
    """Sorts of the atomic formulas of a grammar."""

    def __init__(self, sorts: dict):
        for name, s in sorts.items():
            if s < 0:
                raise FormulaError(f"atom {name}: negative sort {s}")
        self.sorts = dict(sorts)
        self._memo = {}

    def __contains__(self, name):
        return name in self.sorts

    def __eq__(self, other):
        return isinstance(other, Signature) and self.sorts == other.sorts

    def sort_of(self, f) -> int:
        """Sort of a formula, assuming it is well-sorted."""
        try:
            return self._memo[f]
        except KeyError:
            pass
        s = self._raw_sort(f)
        if s < 0:
            raise IllSorted(f"{format_formula(f)} has negative sort {s}")
        self._memo[f] = s
        return s

    def _raw_sort(self, f) -> int:
        if isinstance(f, Atom):
            if f.name not in self.sorts:
                raise IllSorted(f"atom {f.name} not in signature")
            return self.sorts[f.name]
        if isinstance(f, Prod):
            return self.sort_of(f.left) + self.sort_of(f.right)
        if isinstance(f, Under):
            return self.sort_of(f.result) - self.sort_of(f.arg)
        if isinstance(f, Over):
            return self.sort_of(f.result) - self.sort_of(f.arg)
        if isinstance(f, Wrap):
            return self.sort_of(f.left) + self.sort_of(f.right) - 1
        if isinstance(f, Down):
            return self.sort_of(f.result) + 1 - self.sort_of(f.arg)
        if isinstance(f, Up):
            return self.sort_of(f.result) + 1 - self.sort_of(f.arg)
        raise FormulaError(f"not a formula: {f!r}")

    @classmethod
    def parse(cls, text: str) -> "Signature":
        sorts = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise FormulaError(f"line {lineno}: bad signature entry {line!r}")
            name = parts[0]
            if name in sorts:
                raise FormulaError(f"line {lineno}: atom {name} declared twice")
            sorts[name] = int(parts[1])
        return cls(sorts)

    def format(self) -> str:
        return "".join(f"{n} {s}\n" for n, s in self.sorts.items())


def sort_of_formula(f, sig: Signature) -> int:
    return sig.sort_of(f)


def well_sorted(f, sig: Signature) -> list:
    """Check a formula recursively; returns a list of violations
    (empty when the formula is well-sorted). Never raises: violations
    are accumulated so grammar validation can report everything at
    once."""
    violations = []

    def srt(g):
        try:
            return sig.sort_of(g)
        except IllSorted:
            return None

    def visit(g):
        if isinstance(g, Atom):
            if g.name not in sig:
                violations.append(f"unknown atom {g.name}")
            return
        for child in _children(g):
            visit(child)
        if isinstance(g, (Under, Over)):
            if srt(g) is None:
                violations.append(
                    f"{format_formula(g)}: result sort smaller than argument sort"
                )
        elif isinstance(g, (Down, Wrap)):
            a = g.arg if isinstance(g, Down) else g.left
            sa = srt(a)
            if sa is not None and sa < 1:
                violations.append(f"{format_formula(g)}: circumfix argument has sort 0")
            elif sa is not None and g.mode.kind == "@" and g.mode.index > sa:
                violations.append(
                    f"{format_formula(g)}: mode {g.mode} exceeds circumfix sort {sa}"
                )
            if srt(g) is None:
                violations.append(f"{format_formula(g)}: negative sort")
        elif isinstance(g, Up):
            sc, sb = srt(g.result), srt(g.arg)
            if sc is not None and sb is not None and sc < sb:
                violations.append(
                    f"{format_formula(g)}: result sort {sc} below argument sort {sb}"
                )
            elif g.mode.kind == "@":
                s = srt(g)
                if s is not None and g.mode.index > s:
                    violations.append(
                        f"{format_formula(g)}: mode {g.mode} exceeds sort {s}"
                    )

    visit(f)
    return violations


def _children(f):
    if isinstance(f, Atom):
        return ()
    if isinstance(f, (Under, Over, Up, Down)):
        return (f.arg, f.result)
    return (f.left, f.right)


def top_level_ok(f, sig: Signature) -> bool:
    """Side conditions of the outermost connective only; assumes the
    immediate subformulas are already well-sorted. Cheap enough for the
    inner loops of the random generators."""
    try:
        s = sig.sort_of(f)
    except IllSorted:
        return False
    if isinstance(f, (Down, Wrap)):
        a = f.arg if isinstance(f, Down) else f.left
        sa = sig.sort_of(a)
        if sa < 1:
            return False
        if f.mode.kind == "@" and f.mode.index > sa:
            return False
    elif isinstance(f, Up):
        if sig.sort_of(f.result) < sig.sort_of(f.arg):
            return False
        if f.mode.kind == "@" and f.mode.index > s:
            return False
    return True


def atoms_of(f) -> set:
    if isinstance(f, Atom):
        return {f.name}
    out = set()
    for c in _children(f):
        out |= atoms_of(c)
    return out


# --- concrete syntax ---------------------------------------------------
#
# /  \  *        concatenation family
# ^> ^< ^n       extraction, by mode
# !> !< !n       infixation
# o> o< on       wrap (needs a token boundary before the o)
#
# Mixed connectives must be parenthesized; only chains of a single /
# (left-associative) or a single \ (right-associative) may omit parens.

_IDENT = r"[A-Za-z_'][A-Za-z0-9_']*"


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()":
            tokens.append((c, c))
            i += 1
            continue
        if c in "/\\*":
            tokens.append(("op", c, None))
            i += 1
            continue
        if c in "^!" or (c == "o" and i + 1 < n and text[i + 1] in "><0123456789"):
            j = i + 1
            if j < n and text[j] in "><":
                mode = parse_mode(text[j])
                j += 1
            else:
                k = j
                while k < n and text[k].isdigit():
                    k += 1
                if k == j:
                    raise FormulaError(f"connective {c!r} needs a mode in {text!r}")
                mode = parse_mode(text[j:k])
                j = k
            tokens.append(("op", c, mode))
            i = j
            continue
        import re as _re

        m = _re.match(_IDENT, text[i:])
        if not m:
            raise FormulaError(f"bad character {c!r} in formula {text!r}")
        tokens.append(("atom", m.group(0)))
        i += len(m.group(0))
    return tokens


def parse_formula(text: str):
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def parse_primary():
        nonlocal pos
        tok = peek()
        if tok is None:
            raise FormulaError(f"unexpected end of formula in {text!r}")
        if tok[0] == "atom":
            pos += 1
            return Atom(tok[1])
        if tok[0] == "(":
            pos += 1
            f = parse_expr()
            if peek() is None or peek()[0] != ")":
                raise FormulaError(f"missing ) in {text!r}")
            pos += 1
            return f
        raise FormulaError(f"unexpected {tok!r} in {text!r}")

    def parse_expr():
        nonlocal pos
        operands = [parse_primary()]
        ops = []
        while peek() is not None and peek()[0] == "op":
            ops.append(peek()[1:])
            pos += 1
            operands.append(parse_primary())
        if not ops:
            return operands[0]
        if len(ops) > 1:
            kinds = {op for op, _ in ops}
            if kinds == {"/"}:
                f = operands[0]
                for right in operands[1:]:
                    f = Over(f, right)
                return f
            if kinds == {"\\"}:
                f = operands[-1]
                for left in reversed(operands[:-1]):
                    f = Under(left, f)
                return f
            raise FormulaError(
                f"mixed connectives need parentheses in {text!r}"
            )
        (op, mode), (a, b) = ops[0], operands
        if op == "/":
            return Over(a, b)
        if op == "\\":
            return Under(a, b)
        if op == "*":
            return Prod(a, b)
        if op == "^":
            return Up(a, b, mode)
        if op == "!":
            return Down(a, b, mode)
        return Wrap(a, b, mode)

    f = parse_expr()
    if pos != len(tokens):
        raise FormulaError(f"trailing tokens in {text!r}")
    return f


def format_formula(f) -> str:
    def group(g, bare_ok):
        s = fmt(g)
        if isinstance(g, Atom) or bare_ok:
            return s
        return f"({s})"

    def fmt(g):
        if isinstance(g, Atom):
            return g.name
        if isinstance(g, Over):
            return f"{group(g.result, isinstance(g.result, Over))}/{group(g.arg, False)}"
        if isinstance(g, Under):
            return f"{group(g.arg, False)}\\{group(g.result, isinstance(g.result, Under))}"
        if isinstance(g, Prod):
            return f"{group(g.left, False)}*{group(g.right, False)}"
        if isinstance(g, Up):
            return f"{group(g.result, False)}^{g.mode}{group(g.arg, False)}"
        if isinstance(g, Down):
            return f"{group(g.arg, False)}!{g.mode}{group(g.result, False)}"
        return f"{group(g.left, False)} o{g.mode} {group(g.right, False)}"

    return fmt(f)


def random_formula(rng: random.Random, sig: Signature, max_connectives: int):
    """A random well-sorted formula over the signature's atoms.

    Used by the fuzz drivers; retries locally until the sort side
    conditions hold, so the result is always well-sorted.
    """
    atom_names = sorted(sig.sorts)

    def gen(budget):
        for _ in range(24):
            if budget == 0 or rng.random() < 0.3:
                return Atom(rng.choice(atom_names))
            kind = rng.choice("/\\*^!o")
            lb = rng.randint(0, budget - 1)
            a = gen(lb)
            b = gen(budget - 1 - lb)
            if a is None or b is None:
                continue
            mode = rng.choice((FIRST, LAST, at(1), at(2)))
            f = {
                "/": lambda: Over(a, b),
                "\\": lambda: Under(a, b),
                "*": lambda: Prod(a, b),
                "^": lambda: Up(a, b, mode),
                "!": lambda: Down(a, b, mode),
                "o": lambda: Wrap(a, b, mode),
            }[kind]()
            if top_level_ok(f, sig):
                return f
        return None

    while True:
        f = gen(rng.randint(0, max_connectives))
        if f is not None:
            return f
