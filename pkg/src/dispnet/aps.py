"""Abstract proof structures: combs, cross links, par links.

Converting a proof structure to an abstract proof structure erases the
formula labels and keeps only what the correctness check needs:

* every ``+``-style tensor link (L\\, L/, R*) becomes a two-premiss
  comb;
* ^k/!k-elimination and ok-introduction tensor links stay as
  mode-tagged cross links;
* hypotheses become combs listing their string-term material (words and
  separators) above an unlabeled point;
* each auxiliary input of a par link (an active conclusion standing for
  a hypothesis that will be withdrawn) of sort n is split into n+1
  fresh sort-0 points interleaved with n separators: a comb whose
  points are all tethered to the par link. This is what lets the
  logical contractions check infix/circumfix geometry literally on comb
  rows;
* everything else becomes a plain point.

Tether separators are marked with their origin (par link, group, slot).
While the par link is alive its hypothesis must stay generic, so no
cross link may insert material at a marked separator, with one
exception: the designated slot of the circumfix group of a ! or o par
is exactly where wrapped material belongs. Without the marking, an
eager cross link could consume a block separator that a pending par
link still needs bare, wrecking confluence. A marked separator whose
par link has fired is ordinary string material.

A comb has any number of premisses and one conclusion; no premiss
equals the conclusion and no item occurs twice as a premiss. The sort
of a comb row is the sum of its item sorts (words 0, separators 1,
points the sort of the formula they came from, fresh tether points 0).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as fm
from . import proofstructure as pstruct
from .terms import SEP, Mode, Separator, StringTerm


class SortMismatch(ValueError):
    """A hypothesis string term whose sort differs from its formula."""


class IllFormedComb(ValueError):
    """A comb whose conclusion appears among its own premisses. Axiom
    linkings that close a formula onto its own link produce these; such
    a structure can never contract to a comb."""


@dataclass(frozen=True)
class Pt:
    """Reference to a point, usable as a comb row item."""

    pid: int

    def __repr__(self):
        return f"v{self.pid}"


@dataclass(frozen=True)
class GroupSep:
    """A separator belonging to a tether group: the ``index``-th
    separator (1-based) of group ``group`` of par link ``par``."""

    par: int
    group: int
    index: int

    def __repr__(self):
        return f"1[{self.par}.{self.group}.{self.index}]"


def is_separator(item) -> bool:
    return isinstance(item, (Separator, GroupSep))


@dataclass
class Comb:
    cid: int
    row: list  # items: Pt | word str | SEP
    concl: int


@dataclass
class CrossLink:
    tid: int
    mode: Mode
    left: int
    right: int
    concl: int
    source: int  # index of the originating proof-structure link


@dataclass
class ParNode:
    pid: int
    tag: str  # "\\" "/" "^" "!" "*" "o"
    mode: Mode | None
    premiss: int
    main: int  # equals premiss for "*" and "o"
    groups: list  # one ordered tether-point list per auxiliary input
    source: int


PAR_TAG = {"R\\": "\\", "R/": "/", "R^": "^", "R!": "!", "L*": "*", "Lo": "o"}


class APS:
    def __init__(self):
        self.points = {}  # pid -> sort
        self.combs = {}
        self.crosses = {}
        self.pars = {}
        self.concl_of = {}   # pid -> ("comb", cid) | ("cross", tid) | ("par", pid)
        self.premiss_at = {}  # pid -> ("comb", cid) | ("cross", tid, side) | ("par", pid)
        self.conclusion = None
        self._next = 0

    # -- construction helpers -------------------------------------------

    def fresh_id(self):
        i = self._next
        self._next += 1
        return i

    def add_point(self, pid, sort):
        assert pid not in self.points
        self.points[pid] = sort

    def add_comb(self, row, concl):
        if Pt(concl) in row:
            raise IllFormedComb(
                f"comb conclusion v{concl} is one of its own premisses"
            )
        cid = self.fresh_id()
        comb = Comb(cid, list(row), concl)
        self.combs[cid] = comb
        assert concl not in self.concl_of, f"point {concl} already produced"
        self.concl_of[concl] = ("comb", cid)
        for it in row:
            if isinstance(it, Pt):
                assert it.pid not in self.premiss_at
                self.premiss_at[it.pid] = ("comb", cid)
        return comb

    def add_cross(self, mode, left, right, concl, source):
        tid = self.fresh_id()
        self.crosses[tid] = CrossLink(tid, mode, left, right, concl, source)
        self.concl_of[concl] = ("cross", tid)
        self.premiss_at[left] = ("cross", tid, 0)
        self.premiss_at[right] = ("cross", tid, 1)
        return self.crosses[tid]

    def add_par(self, tag, mode, premiss, main, source):
        pid = self.fresh_id()
        par = ParNode(pid, tag, mode, premiss, main, [], source)
        self.pars[pid] = par
        self.premiss_at[premiss] = ("par", pid)
        if main != premiss:
            self.concl_of[main] = ("par", pid)
        return par

    def tether(self, par, aux_vertex, sort):
        """Split an auxiliary input into sort+1 tethered points."""
        points = []
        for _ in range(sort + 1):
            q = self.fresh_id()
            self.add_point(q, 0)
            self.concl_of[q] = ("par", par.pid)
            points.append(q)
        group_idx = len(par.groups)
        row = []
        for i, q in enumerate(points):
            if i:
                row.append(GroupSep(par.pid, group_idx, i))
            row.append(Pt(q))
        comb = Comb(self.fresh_id(), row, aux_vertex)
        self.combs[comb.cid] = comb
        self.concl_of[aux_vertex] = ("comb", comb.cid)
        for q in points:
            self.premiss_at[q] = ("comb", comb.cid)
        par.groups.append(points)

    # -- queries ---------------------------------------------------------

    def item_sort(self, item) -> int:
        if isinstance(item, Pt):
            return self.points[item.pid]
        if is_separator(item):
            return 1
        return 0

    def row_sort(self, row) -> int:
        return sum(self.item_sort(it) for it in row)

    def element_count(self) -> int:
        return len(self.combs) + len(self.crosses) + len(self.pars)

    def is_single_comb(self) -> bool:
        return (
            not self.crosses
            and not self.pars
            and len(self.combs) == 1
        )

    def final_comb(self) -> Comb:
        assert self.is_single_comb()
        return next(iter(self.combs.values()))

    def final_term(self) -> StringTerm:
        comb = self.final_comb()
        items = []
        for it in comb.row:
            if isinstance(it, Pt):
                raise ValueError(f"final comb still references point {it.pid}")
            # a surviving tether separator (its par link long gone) is
            # ordinary string material
            items.append(SEP if isinstance(it, GroupSep) else it)
        return StringTerm(tuple(items))

    def clone(self) -> "APS":
        other = APS()
        other.points = dict(self.points)
        other.combs = {c.cid: Comb(c.cid, list(c.row), c.concl) for c in self.combs.values()}
        other.crosses = {
            t.tid: CrossLink(t.tid, t.mode, t.left, t.right, t.concl, t.source)
            for t in self.crosses.values()
        }
        other.pars = {
            p.pid: ParNode(p.pid, p.tag, p.mode, p.premiss, p.main,
                           [list(g) for g in p.groups], p.source)
            for p in self.pars.values()
        }
        other.concl_of = dict(self.concl_of)
        other.premiss_at = dict(self.premiss_at)
        other.conclusion = self.conclusion
        other._next = self._next
        return other

    # -- removal helpers for the contraction engine ----------------------

    def drop_point(self, pid):
        self.points.pop(pid)
        self.concl_of.pop(pid, None)
        self.premiss_at.pop(pid, None)

    def validate(self):
        """Internal consistency of the role maps; used by tests."""
        problems = []
        for c in self.combs.values():
            if self.concl_of.get(c.concl) != ("comb", c.cid):
                problems.append(f"comb {c.cid}: conclusion map broken")
            seen = set()
            for it in c.row:
                if isinstance(it, Pt):
                    if it.pid in seen:
                        problems.append(f"comb {c.cid}: duplicate premiss {it}")
                    seen.add(it.pid)
                    if self.premiss_at.get(it.pid) != ("comb", c.cid):
                        problems.append(f"comb {c.cid}: premiss map broken for {it}")
            if c.concl in seen:
                problems.append(f"comb {c.cid}: conclusion among premisses")
            if self.row_sort(c.row) != self.points[c.concl]:
                problems.append(f"comb {c.cid}: row sort != conclusion sort")
        return problems

    def to_text(self) -> str:
        """Deterministic dump for golden tests and trace logs."""

        def item(it):
            return it if isinstance(it, str) else repr(it)

        lines = []
        for cid in sorted(self.combs):
            c = self.combs[cid]
            lines.append(f"comb {cid}: [{' '.join(item(i) for i in c.row)}] -> v{c.concl}")
        for tid in sorted(self.crosses):
            t = self.crosses[tid]
            lines.append(f"cross {tid} x{t.mode}: (v{t.left}, v{t.right}) -> v{t.concl}")
        for pid in sorted(self.pars):
            p = self.pars[pid]
            mode = str(p.mode) if p.mode is not None else ""
            groups = " ".join("[" + " ".join(f"v{q}" for q in g) + "]" for g in p.groups)
            lines.append(
                f"par {pid} {p.tag}{mode}: premiss v{p.premiss} main v{p.main} tether {groups}"
            )
        lines.append(f"conclusion v{self.conclusion}")
        return "\n".join(lines)


def to_aps(ps: "pstruct.ProofStructure", hyp_terms: dict, sig) -> APS:
    """Convert a proof structure (plus hypothesis string terms, keyed by
    hypothesis vertex id) to its abstract proof structure."""
    aps = APS()
    for vid in sorted(ps.vertices):
        aps.add_point(vid, sig.sort_of(ps.vertices[vid].formula))
    aps._next = max(ps.vertices, default=-1) + 1
    aps.conclusion = ps.goal

    for h in ps.hypotheses:
        term = hyp_terms[h]
        fsort = sig.sort_of(ps.vertices[h].formula)
        if term.sort != fsort:
            raise SortMismatch(
                f"hypothesis v{h}: term {term} has sort {term.sort}, formula "
                f"{fm.format_formula(ps.vertices[h].formula)} has sort {fsort}"
            )
        aps.add_comb(list(term.items), h)

    pending_aux = []
    for idx, link in enumerate(ps.links):
        if link.kind == "tensor":
            if link.tag in pstruct.TENSOR_PLUS_TAGS:
                aps.add_comb([Pt(link.premisses[0]), Pt(link.premisses[1])],
                             link.conclusions[0])
            else:
                aps.add_cross(link.mode, link.premisses[0], link.premisses[1],
                              link.conclusions[0], idx)
        else:
            tag = PAR_TAG[link.tag]
            if tag in ("*", "o"):
                premiss = link.premisses[0]
                par = aps.add_par(tag, link.mode, premiss, premiss, idx)
                aux = list(link.conclusions)
            else:
                premiss = link.premisses[0]
                par = aps.add_par(tag, link.mode, premiss, link.main, idx)
                aux = [v for v in link.conclusions if v != link.main]
            pending_aux.append((par, aux))

    for par, aux in pending_aux:
        for a in aux:
            aps.tether(par, a, aps.points[a])
    return aps
