"""Command-line front end.

Exit codes: 0 when a verdict was reached, 2 when the answer is inconclusive
or a resource cap was hit, 1 on usage, parse or verification errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import algorithms, factor_complex, oracle
from .graphs import SubgroupPresentation, fold, graph_from_words, pointed_core
from .whitehead import (
    find_cut_vertex,
    subdivide,
    trichotomy,
    whitehead_graph_of_graph,
    whitehead_graph_of_word,
)
from .words import (
    CyclicWord,
    ParseError,
    WhiteheadAutomorphism,
    Word,
    apply_whitehead_to_word,
    cyclic_reduce,
    free_reduce,
    marked_cyclic_reduce,
    marked_free_reduce,
    parse_letters,
)

EXIT_DECIDED = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _emit(args, text: str, payload: dict) -> None:
    out = json.dumps(payload, indent=2, sort_keys=True) + "\n" if args.format == "json" else text
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _subgroup(texts: Sequence[str], rank: int) -> SubgroupPresentation:
    gens = []
    for t in texts:
        gens.extend(p for p in t.split(",") if p.strip())
    if not gens:
        raise UsageError("at least one generator is required")
    return SubgroupPresentation.parse(gens, rank)


def _word(text: str, rank: int) -> Word:
    return free_reduce(parse_letters(text, rank), rank)


# ---------------------------------------------------------------------------
# commands

def cmd_reduce(args) -> int:
    w = _word(args.word, args.rank)
    cyc, conj = cyclic_reduce(w)
    text = f"reduced: {w}\ncyclic: {cyc}\nconjugator: {conj}\n"
    _emit(args, text, {"reduced": str(w), "cyclic": str(cyc), "conjugator": str(conj)})
    return EXIT_DECIDED


def cmd_apply(args) -> int:
    phi = WhiteheadAutomorphism.parse(args.aut, args.rank)
    w = _word(args.word, args.rank)
    marked = apply_whitehead_to_word(phi, w)
    if args.linear:
        image, survivors = marked_free_reduce(marked)
    else:
        image, survivors = marked_cyclic_reduce(marked)
    fine = survivors == 0
    text = f"{image}\nmarked: {marked}\nsurviving inserted letters: {survivors}\nfine: {str(fine).lower()}\n"
    _emit(args, text, {"image": str(image), "marked": str(marked),
                       "survivors": survivors, "fine": fine})
    return EXIT_DECIDED


def cmd_wgraph(args) -> int:
    if args.subgroup:
        g = pointed_core(fold(graph_from_words(_subgroup(args.subgroup, args.rank)))[0])
        wg = whitehead_graph_of_graph(g.with_basepoint(None))
    else:
        if args.word is None:
            raise UsageError("give a word or --subgroup")
        cyc = cyclic_reduce(_word(args.word, args.rank))[0]
        if len(cyc) == 0:
            raise UsageError("the trivial word has no Whitehead graph")
        wg = whitehead_graph_of_word(cyc)
    wit = find_cut_vertex(wg)
    if args.format == "dot":
        _emit(args, wg.to_dot(), {})
        return EXIT_DECIDED
    rank = args.rank
    arcs = [f"{CyclicWord(rank, (p,))}-{CyclicWord(rank, (q,))}" for p, q in wg.arcs]
    cut = None
    if wit is not None:
        cut = {"vertex": str(CyclicWord(rank, (wit.vertex,))), "kind": wit.kind,
               "automorphism": str(WhiteheadAutomorphism(rank, wit.vertex, wit.component))}
    text = "arcs: " + " ".join(arcs) + "\n"
    text += "cut vertex: none\n" if cut is None else f"cut vertex: {cut['vertex']} ({cut['kind']}) -> {cut['automorphism']}\n"
    _emit(args, text, {"arcs": arcs, "cutVertex": cut})
    return EXIT_DECIDED


def cmd_graph(args) -> int:
    gens = _subgroup(args.subgroup, args.rank)
    g = graph_from_words(gens)
    if args.stage in ("folded", "core", "subdivided", "image"):
        g = fold(g)[0]
    if args.stage in ("core", "subdivided", "image"):
        g = pointed_core(g)
    if args.stage in ("subdivided", "image"):
        if not args.aut:
            raise UsageError("--aut is required for this stage")
        phi = WhiteheadAutomorphism.parse(args.aut, args.rank)
        g = subdivide(phi, g)
        if args.stage == "image":
            g = pointed_core(fold(g)[0])
    if args.format == "json":
        _emit(args, "", {"vertices": g.num_vertices, "basepoint": g.basepoint,
                         "edges": [list(e) for e in g.edges]})
    else:
        _emit(args, g.to_dot(), {})
    return EXIT_DECIDED


def _read_certificate(path: str, rank: int) -> algorithms.Certificate:
    with open(path) as fh:
        return algorithms.Certificate.from_text(fh.read(), rank)


def cmd_primitive(args) -> int:
    w = _word(args.word, args.rank)
    if w.is_trivial():
        raise UsageError("the trivial word is not primitive")
    if args.verify:
        ok = _read_certificate(args.verify, args.rank).verify(w)
        _emit(args, f"certificate {'valid' if ok else 'invalid'}\n", {"valid": ok})
        return EXIT_DECIDED if ok else EXIT_ERROR
    verdict, cert = algorithms.is_primitive(w)
    payload = {"primitive": verdict}
    text = f"{'yes' if verdict else 'no'}\n"
    if args.certificate:
        # the verdict becomes a comment so the text output is a certificate file
        text = "# " + text
        if cert is not None:
            payload["certificate"] = cert.to_text().splitlines()
            text += cert.to_text()
    if args.cross_check:
        o = oracle.oracle_is_primitive(w) if w.rank <= oracle.MAX_ORACLE_RANK else None
        ab = oracle.abelianization_allows_primitive(w)
        payload["oracle"] = {"orbit": o, "abelianization": ab}
        text += f"oracle orbit: {'true' if o else 'unknown'}; abelianization gcd 1: {str(ab).lower()}\n"
    _emit(args, text, payload)
    return EXIT_DECIDED


def cmd_freefactor(args) -> int:
    gens = _subgroup(args.generators, args.rank)
    if args.verify:
        ok = _read_certificate(args.verify, args.rank).verify(gens)
        _emit(args, f"certificate {'valid' if ok else 'invalid'}\n", {"valid": ok})
        return EXIT_DECIDED if ok else EXIT_ERROR
    run = algorithms.free_factor_run(gens)
    payload = {"freeFactor": run.is_free_factor, "reason": run.reason,
               "steps": [{"automorphism": str(s.automorphism), "caseIII": s.case_iii_count,
                          "size": [s.after.num_vertices, s.after.num_edges]} for s in run.steps]}
    text = f"{'yes' if run.is_free_factor else 'no'} ({run.reason})\n"
    if args.certificate:
        text = "# " + text
        if run.certificate is not None:
            payload["certificate"] = run.certificate.to_text().splitlines()
            text += run.certificate.to_text()
    _emit(args, text, payload)
    return EXIT_DECIDED


def cmd_witness(args) -> int:
    gens = _subgroup(args.generators, args.rank)
    res = algorithms.find_nonprimitive_witness(gens, args.max_witness_length)
    payload = {"outcome": res.outcome, "searchBound": res.search_bound,
               "candidatesChecked": res.candidates_checked,
               "witness": None if res.witness is None else str(res.witness),
               "basis": [str(b) for b in res.basis]}
    if res.outcome == "witness":
        text = f"witness: {res.witness}\n"
    elif res.outcome == "free-factor":
        text = "free factor: every element primitive in H is primitive\n"
    else:
        text = f"inconclusive: no witness up to H-length {res.search_bound}\n"
    _emit(args, text, payload)
    return EXIT_INCONCLUSIVE if res.outcome == "inconclusive" else EXIT_DECIDED


def cmd_distance(args) -> int:
    if len(args.subgroup) != 2:
        raise UsageError("distance needs exactly two --subgroup options")
    c1, c2 = (factor_complex.class_of(_subgroup([s], args.rank)) for s in args.subgroup)
    res = factor_complex.distance(c1, c2, state_cap=args.state_cap, max_level=args.max_level)
    payload = res.to_json()
    d = payload["distance"]
    text = f"distance: {d if not isinstance(d, dict) else '> ' + str(d['greaterThan'])}"
    if res.resource_limited:
        text += " (state cap reached)"
    text += "\n"
    if res.witnesses:
        text += "witnesses: " + " -- ".join(str(c) for c in res.witnesses) + "\n"
    if args.cross_check:
        bound = min(max(c1.core.num_edges, c2.core.num_edges) + 2, oracle.MAX_ORACLE_EDGES)
        od = oracle.oracle_distance(c1.core, c2.core, bound)
        payload["oracle"] = od
        text += f"oracle (classes up to {bound} edges): {od}\n"
    _emit(args, text, payload)
    if res.resource_limited or res.inapplicable:
        return EXIT_INCONCLUSIVE
    return EXIT_DECIDED


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="freefactor", description="Whitehead algorithms for free groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("text", "json")):
        sp.add_argument("--rank", type=int, required=True, help="rank of the free group (1-26)")
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("-o", "--output", help="write output to a file")

    sp = sub.add_parser("reduce", help="free and cyclic reduction")
    common(sp)
    sp.add_argument("word")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("apply", help="apply a Whitehead automorphism to a word")
    common(sp)
    sp.add_argument("--aut", required=True, help='automorphism, e.g. "({X},y)"')
    sp.add_argument("--linear", action="store_true", help="free instead of cyclic reduction")
    sp.add_argument("word")
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("wgraph", help="Whitehead graph of a word or subgroup")
    common(sp, ("text", "json", "dot"))
    sp.add_argument("word", nargs="?")
    sp.add_argument("--subgroup", action="append", help="comma-separated generators")
    sp.set_defaults(func=cmd_wgraph)

    sp = sub.add_parser("graph", help="DOT export of subgroup graphs")
    common(sp, ("dot", "json"))
    sp.add_argument("--subgroup", action="append", required=True)
    sp.add_argument("--stage", choices=["raw", "folded", "core", "subdivided", "image"], default="core")
    sp.add_argument("--aut", help="automorphism for the subdivided and image stages")
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("primitive", help="decide primitivity of a word")
    common(sp)
    sp.add_argument("word")
    sp.add_argument("--certificate", action="store_true")
    sp.add_argument("--verify", metavar="FILE", help="replay a certificate instead of deciding")
    sp.add_argument("--cross-check", action="store_true")
    sp.set_defaults(func=cmd_primitive)

    sp = sub.add_parser("freefactor", help="decide whether a subgroup is a free factor")
    common(sp)
    sp.add_argument("generators", nargs="+")
    sp.add_argument("--certificate", action="store_true")
    sp.add_argument("--verify", metavar="FILE")
    sp.set_defaults(func=cmd_freefactor)

    sp = sub.add_parser("witness", help="search for an element primitive in H but not in F")
    common(sp)
    sp.add_argument("generators", nargs="+")
    sp.add_argument("--max-witness-length", type=int, default=12)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("distance", help="distance between free factor classes")
    common(sp)
    sp.add_argument("--subgroup", action="append", default=[], help="comma-separated generators")
    sp.add_argument("--state-cap", type=int, default=None,
                    help="pair states before giving up (default: $FREEFACTOR_STATE_CAP or 1000000)")
    sp.add_argument("--max-level", type=int, default=4, choices=[2, 3, 4])
    sp.add_argument("--cross-check", action="store_true")
    sp.set_defaults(func=cmd_distance)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 1 <= args.rank <= 26:
        parser.error("--rank must be between 1 and 26")
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
