"""Lexical entries, grammar files, and surface matching.

A grammar file is a signature block (``atom sort`` lines) followed by
entries of the form ``head := stringterm : formula``. Every entry must
satisfy sort_of_string(string) == sort_of_formula(formula), and its
string term must contain at least one word. Discontinuous idioms live
under a single headword whose string term lists the surface pieces with
separators, e.g. ``rang_up := rang+1+up : (np\\s)^>np``.

For parsing, entries are matched against the token sequence piecewise:
each maximal word run of an entry must occupy consecutive tokens, the
runs must appear in order, and foreign material is only allowed in the
gaps where the entry has separators. ``lexical_covers`` enumerates all
ways to account for every token this way.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as fm
from . import terms as tm


class GrammarError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class LexEntry:
    headword: str
    string: tm.StringTerm
    formula: "fm.Formula"

    def pieces(self):
        """Maximal word runs of the string term, split at separators."""
        runs, run = [], []
        for it in self.string.items:
            if isinstance(it, tm.Separator):
                runs.append(tuple(run))
                run = []
            else:
                run.append(it)
        runs.append(tuple(run))
        return runs

    def __str__(self):
        return f"{self.headword} := {self.string} : {fm.format_formula(self.formula)}"


class Grammar:
    def __init__(self, signature, entries, goal_default=fm.Atom("s")):
        self.signature = signature
        self.entries = {}  # headword -> [LexEntry]
        for e in entries:
            self.entries.setdefault(e.headword, []).append(e)
        self.goal_default = goal_default

    def all_entries(self):
        return [e for group in self.entries.values() for e in group]

    def __eq__(self, other):
        return (
            isinstance(other, Grammar)
            and self.signature == other.signature
            and self.entries == other.entries
        )


def lookup(grammar: Grammar, word: str) -> list:
    return list(grammar.entries.get(word, ()))


def load_grammar(text: str) -> Grammar:
    """Parse and validate a grammar; raises GrammarError carrying every
    violation found, each prefixed with its line number."""
    sig_lines = []
    entry_lines = []
    violations = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" in line:
            entry_lines.append((lineno, line))
        else:
            if entry_lines:
                violations.append(
                    f"line {lineno}: signature entry {line!r} after first lexical entry"
                )
            else:
                sig_lines.append((lineno, line))

    sorts = {}
    for lineno, line in sig_lines:
        parts = line.split()
        if len(parts) != 2 or not parts[1].isdigit():
            violations.append(f"line {lineno}: bad signature entry {line!r}")
        elif parts[0] in sorts:
            violations.append(f"line {lineno}: atom {parts[0]} declared twice")
        else:
            sorts[parts[0]] = int(parts[1])
    sig = fm.Signature(sorts)

    entries = []
    for lineno, line in entry_lines:
        head, _, rest = line.partition(":=")
        head = head.strip()
        term_text, colon, formula_text = rest.partition(":")
        if not head or not colon:
            violations.append(f"line {lineno}: bad entry {line!r}")
            continue
        try:
            string = tm.parse_term(term_text.strip())
            f = fm.parse_formula(formula_text.strip())
        except ValueError as exc:
            violations.append(f"line {lineno}: {exc}")
            continue
        bad = fm.well_sorted(f, sig)
        if bad:
            violations.extend(f"line {lineno}: {v}" for v in bad)
            continue
        if not string.words():
            violations.append(f"line {lineno}: entry {head} has no words")
        ssort, fsort = string.sort, sig.sort_of(f)
        if ssort != fsort:
            violations.append(
                f"line {lineno}: entry {head}: string sort {ssort} != formula sort {fsort}"
            )
        entries.append(LexEntry(head, string, f))

    if violations:
        raise GrammarError(violations)
    goal = fm.Atom("s") if "s" in sig else fm.Atom(next(iter(sorts), "s"))
    return Grammar(sig, entries, goal_default=goal)


def print_grammar(grammar: Grammar) -> str:
    lines = [grammar.signature.format()]
    for e in grammar.all_entries():
        lines.append(f"{e}\n")
    return "".join(lines)


@dataclass(frozen=True)
class EntryMatch:
    """One entry instance in a cover, with the token span of each piece."""

    entry: LexEntry
    spans: tuple  # one (start, end) per piece, in order

    @property
    def start(self):
        return self.spans[0][0]


def lexical_covers(grammar: Grammar, tokens) -> list:
    """All ways to cover the token sequence with entry instances.

    A cover is a tuple of EntryMatch, sorted by first-piece position;
    every token belongs to exactly one piece of one instance. Covers are
    enumerated depth-first in grammar order, so the result is
    deterministic.
    """
    tokens = list(tokens)
    by_first = {}
    for e in grammar.all_entries():
        pieces = e.pieces()
        if any(not p for p in pieces):
            continue  # entries with empty pieces have no surface anchor
        by_first.setdefault(pieces[0][0], []).append(e)

    out = []

    def piece_at(piece, i):
        return list(tokens[i:i + len(piece)]) == list(piece)

    def search(i, open_matches, done):
        # open_matches: list of (entry, spans_so_far, next_piece_index)
        if i == len(tokens):
            if not open_matches:
                out.append(tuple(sorted(done, key=lambda m: m.start)))
            return
        # continue an open discontinuous entry at token i
        for idx, (entry, spans, k) in enumerate(open_matches):
            piece = entry.pieces()[k]
            if piece and piece_at(piece, i):
                new = (entry, spans + ((i, i + len(piece)),), k + 1)
                rest = open_matches[:idx] + open_matches[idx + 1:]
                advance(i + len(piece), rest, new, done)
        # start a new entry at token i
        for entry in by_first.get(tokens[i], ()):
            piece = entry.pieces()[0]
            if piece_at(piece, i):
                new = (entry, ((i, i + len(piece)),), 1)
                advance(i + len(piece), list(open_matches), new, done)

    def advance(i, open_matches, new, done):
        entry, spans, k = new
        if k == len(entry.pieces()):
            search(i, open_matches, done + [EntryMatch(entry, spans)])
        else:
            search(i, open_matches + [new], done)

    search(0, [], [])
    return out
