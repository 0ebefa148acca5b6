"""Command-line front end: parse sentences, prove sequents, check proofs.

    dispnet parse GRAMMAR "mary rang everyone up" [--goal s] [--all]
    dispnet prove GRAMMAR_OR_SIG "x:np, y:np\\s |- x+y:s"
    dispnet check PROOF_FILE

Exit codes: 0 when at least one reading/derivation is found (or the
proof checks), 1 when none is, 2 on input errors. Output is
deterministic for fixed inputs and flags; ``--json`` emits the same
reading set as the human-readable report.

``--mode net`` accepts any linking whose abstract proof structure
contracts to a comb; the default ``parse`` mode additionally requires
the comb to spell the expected string (the sentence for ``parse``, the
stated goal term for ``prove``). With ``--jobs N``, candidate linkings
are checked by a process pool; results are re-ordered to enumeration
order, so the output does not depend on scheduling.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice

from . import formula as fm
from . import lexicon as lx
from . import nd
from . import terms as tm
from .contraction import is_proof_net
from .proofstructure import CountMismatch, enumerate_linkings, unfold


@dataclass
class Reading:
    cover: tuple          # EntryMatch tuple for parse, () for prove
    linking_index: int
    verdict: object       # NetVerdict
    proof: object         # NDProof


@dataclass
class ParseResult:
    tokens: list
    goal: object
    readings: list = field(default_factory=list)
    linkings_tried: int = 0
    nets_found: int = 0
    step_counts: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def mismatches(self):
        return [e for e in self.errors if isinstance(e, CountMismatch)]


def _check_candidate(args):
    ps, terms, sig, expected = args
    return is_proof_net(ps, terms, sig, expected)


def _verdicts(stream, terms, sig, expected, jobs):
    """NetVerdicts for a stream of candidate structures, in order."""
    if jobs <= 1:
        for ps in stream:
            yield is_proof_net(ps, terms, sig, expected)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = list(islice(stream, jobs * 4))
            if not batch:
                return
            work = [(ps, terms, sig, expected) for ps in batch]
            yield from pool.map(_check_candidate, work)


def run_sequent(hyp_pairs, goal_formula, sig, expected=None, mode="parse",
                all_readings=False, jobs=1, cover=()):
    """Decide one sequent; hyp_pairs are (StringTerm, Formula)."""
    result = ParseResult(tokens=[], goal=goal_formula)
    frame = unfold([f for _, f in hyp_pairs], goal_formula, sig)
    terms = {h: t for h, (t, _) in zip(frame.hypotheses, hyp_pairs)}
    want = expected if mode == "parse" else None
    try:
        stream = enumerate_linkings(frame)
    except CountMismatch as exc:
        result.errors.append(exc)
        return result
    verdict_stream = _verdicts(stream, terms, sig, want, jobs)
    seen = []
    for i, verdict in enumerate(verdict_stream):
        result.linkings_tried = i + 1
        if verdict.kind != "stuck":
            result.nets_found += 1
        if not verdict.is_net:
            continue
        result.step_counts.append(len(verdict.trace.steps))
        proof = nd.extract_nd(verdict, sig)
        canon = nd.canonical_proof(proof)
        if any(canon == c for c in seen):
            continue
        seen.append(canon)
        result.readings.append(Reading(cover, i, verdict, proof))
        if not all_readings:
            break
    return result


def run_parse(grammar, tokens, goal=None, mode="parse", all_readings=False,
              jobs=1):
    goal = goal if goal is not None else grammar.goal_default
    combined = ParseResult(tokens=list(tokens), goal=goal)
    expected = tm.StringTerm(tuple(tokens))
    for cover in lx.lexical_covers(grammar, tokens):
        hyp_pairs = [(m.entry.string, m.entry.formula) for m in cover]
        sub = run_sequent(hyp_pairs, goal, grammar.signature, expected,
                          mode, all_readings, jobs, cover)
        combined.linkings_tried += sub.linkings_tried
        combined.nets_found += sub.nets_found
        combined.step_counts.extend(sub.step_counts)
        combined.errors.extend(sub.errors)
        combined.readings.extend(sub.readings)
        if combined.readings and not all_readings:
            break
    return combined


# -- sequent text parsing -------------------------------------------------


def parse_sequent(text):
    """``x:np, y:np\\s |- x+y:s``; terms may be omitted (``np, np\\s |- s``),
    in which case hypotheses get fresh variables and the expected goal
    term is their concatenation."""
    if "|-" not in text:
        raise ValueError("sequent needs |- between hypotheses and goal")
    left, _, right = text.partition("|-")
    hyp_pairs = []
    explicit = []
    for part in left.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            t, _, f = part.partition(":")
            term = tm.parse_term(t.strip())
            explicit.append(True)
        else:
            term, f = None, part
            explicit.append(False)
        hyp_pairs.append((term, fm.parse_formula(f.strip())))
    right = right.strip()
    if ":" in right:
        t, _, f = right.partition(":")
        goal_term = tm.parse_term(t.strip())
        goal = fm.parse_formula(f.strip())
    else:
        goal_term = None
        goal = fm.parse_formula(right)
    return hyp_pairs, goal, goal_term, all(explicit) if hyp_pairs else True


def _fill_terms(hyp_pairs, sig):
    fresh = tm.FreshVars("x")
    out = []
    for term, f in hyp_pairs:
        if term is None:
            term = fresh.term(sig.sort_of(f))
        elif term.sort != sig.sort_of(f):
            raise ValueError(
                f"hypothesis {term} has sort {term.sort}, formula "
                f"{fm.format_formula(f)} needs {sig.sort_of(f)}"
            )
        out.append((term, f))
    return out


# -- reporting -------------------------------------------------------------


def _reading_record(r, latex=False, trace=False):
    rec = {
        "linking": r.linking_index,
        "final": str(r.verdict.comb_term),
        "proof": nd.nd_to_sexpr(r.proof),
    }
    if r.cover:
        rec["cover"] = [
            {"headword": m.entry.headword,
             "term": str(m.entry.string),
             "formula": fm.format_formula(m.entry.formula),
             "spans": [list(s) for s in m.spans]}
            for m in r.cover
        ]
    if trace:
        rec["trace"] = [
            {"rule": s.rule, "consumed": list(s.consumed),
             "result": s.result, "row": s.row}
            for s in r.verdict.trace.steps
        ]
    if latex:
        rec["latex"] = nd.latex_nd(r.proof)
        rec["latex_trace"] = nd.latex_trace(r.verdict.trace)
    return rec


def _result_json(result, mode, latex, trace):
    return {
        "tokens": result.tokens,
        "goal": fm.format_formula(result.goal),
        "mode": mode,
        "readings": [_reading_record(r, latex, trace) for r in result.readings],
        "stats": {
            "linkings": result.linkings_tried,
            "nets": result.nets_found,
            "readings": len(result.readings),
            "steps": result.step_counts,
        },
        "errors": [str(e) for e in result.errors],
    }


def _print_result(result, mode, latex, trace, out=None):
    w = (out or sys.stdout).write
    if result.tokens:
        w(f"sentence: {' '.join(result.tokens)}\n")
    w(f"goal: {fm.format_formula(result.goal)}\n")
    for e in result.errors:
        w(f"error: atom count mismatch: {e}\n")
    for n, r in enumerate(result.readings, 1):
        w(f"reading {n} (linking {r.linking_index}):\n")
        if r.cover:
            w("  cover: " + "  ".join(str(m.entry) for m in r.cover) + "\n")
        w(f"  comb: {r.verdict.comb_term} : {fm.format_formula(result.goal)}\n")
        w(f"  proof: {nd.nd_to_sexpr(r.proof)}\n")
        if trace:
            for line in r.verdict.trace.fmt().splitlines():
                w(f"  {line}\n")
        if latex:
            w(f"  latex: {nd.latex_nd(r.proof)}\n")
            for line in nd.latex_trace(r.verdict.trace).splitlines():
                w(f"  latex-trace: {line}\n")
    w(
        f"stats: linkings={result.linkings_tried} nets={result.nets_found} "
        f"readings={len(result.readings)}\n"
    )


# -- subcommands -----------------------------------------------------------


def cmd_parse(args) -> int:
    try:
        grammar = lx.load_grammar(open(args.grammar).read())
        goal = fm.parse_formula(args.goal) if args.goal else None
        if goal is not None:
            bad = fm.well_sorted(goal, grammar.signature)
            if bad:
                raise ValueError("; ".join(bad))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    tokens = args.sentence.split()
    vocabulary = {
        w for e in grammar.all_entries() for w in e.string.words()
    }
    unknown = [t for t in tokens if t not in vocabulary]
    if unknown:
        print(f"error: unknown words: {' '.join(unknown)}", file=sys.stderr)
        return 2
    result = run_parse(grammar, tokens, goal, args.mode, args.all, args.jobs)
    emit(result, args)
    return 0 if result.readings else 1


def cmd_prove(args) -> int:
    try:
        sig = load_signature(args.signature)
        hyp_pairs, goal, goal_term, explicit = parse_sequent(args.sequent)
        for _, f in hyp_pairs:
            bad = fm.well_sorted(f, sig)
            if bad:
                raise ValueError("; ".join(bad))
        bad = fm.well_sorted(goal, sig)
        if bad:
            raise ValueError("; ".join(bad))
        hyp_pairs = _fill_terms(hyp_pairs, sig)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if goal_term is None and not explicit:
        # bare sequent: derivability means the comb spells the
        # hypotheses concatenated in order
        goal_term = tm.EMPTY
        for t, _ in hyp_pairs:
            goal_term = tm.concat(goal_term, t)
    result = run_sequent(hyp_pairs, goal, sig, goal_term, args.mode,
                         args.all, args.jobs)
    emit(result, args)
    return 0 if result.readings else 1


def cmd_check(args) -> int:
    try:
        text = open(args.proof).read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sig_lines = []
    proof_lines = []
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if not proof_lines and stripped and not stripped.startswith("("):
            sig_lines.append(stripped)
        elif stripped:
            proof_lines.append(line)
    try:
        sig = fm.Signature.parse("\n".join(sig_lines))
        proof = nd.nd_from_sexpr("\n".join(proof_lines))
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    violations = nd.check_nd(proof, sig)
    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 1
    print(
        f"ok: {proof.term} : {fm.format_formula(proof.formula)} "
        f"from {len(nd.open_leaves_in_order(proof))} hypothesis(es)"
    )
    return 0


def load_signature(path):
    """Accept either a bare signature file or a grammar file."""
    text = open(path).read()
    if ":=" in text:
        return lx.load_grammar(text).signature
    return fm.Signature.parse(text)


def emit(result, args):
    if args.json:
        print(json.dumps(_result_json(result, args.mode, args.latex,
                                      args.trace), sort_keys=True, indent=2))
    else:
        _print_result(result, args.mode, args.latex, args.trace)


def main(argv=None) -> int:
    top = argparse.ArgumentParser(prog="dispnet", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--goal", help="goal formula (default: grammar default)")
        p.add_argument("--all", action="store_true",
                       help="exhaust all linkings instead of stopping at the first reading")
        p.add_argument("--trace", action="store_true", help="print contraction traces")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--latex", action="store_true", help="include LaTeX proof trees")
        p.add_argument("--mode", choices=("parse", "net"), default="parse",
                       help="parse: comb must spell the expected string; net: contraction suffices")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for candidate checking")

    p_parse = sub.add_parser("parse", help="parse a sentence with a grammar")
    p_parse.add_argument("grammar")
    p_parse.add_argument("sentence")
    common(p_parse)
    p_parse.set_defaults(func=cmd_parse)

    p_prove = sub.add_parser("prove", help="prove a sequent with explicit string terms")
    p_prove.add_argument("signature", help="signature or grammar file")
    p_prove.add_argument("sequent")
    common(p_prove)
    p_prove.set_defaults(func=cmd_prove)

    p_check = sub.add_parser("check", help="check a serialized proof file")
    p_check.add_argument("proof")
    p_check.set_defaults(func=cmd_check)

    args = top.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
