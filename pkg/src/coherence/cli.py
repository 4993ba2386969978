"""Command-line front end: ``coherence <command> [options]``.

Results go to stdout (JSON-compatible text or CSV), diagnostics to stderr.
Exit status is 0 on success, 2 for invalid input and 3 when a solver did not
converge.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import problemfile as pf
from .aggregation import AggregationMethod, ExpertReport, aggregate
from .credence import coherence_check, reduce_full_rank
from .dissimilarity import BRIER, FO, HALF_F, HALF_FO, LOG, SQUARED, DissimilaritySpec, F
from .elicitation import DecisivenessKind, ProbeCredences, decisiveness_term, probe_loss
from .errors import ConvergenceError, ValidationError
from .ngram import build_heuristics, evaluate_accuracy, load_corpus, predict_masked
from .polytope import dutch_book, enumerate_facets
from .projection import closed_form_complement_pair, project
from .solver import SolverConfig

EXIT_OK, EXIT_INVALID, EXIT_NO_CONVERGENCE = 0, 2, 3

_RULES = {"log": LOG, "brier": BRIER}
_LOSSES = {"f": F, "fo": FO, "sq": SQUARED, "squared": SQUARED, "half-f": HALF_F, "half-fo": HALF_FO}


def parse_loss(text):
    """``f``, ``fo``, ``sq``, ``half-f``, ``half-fo`` or ``score:<log|brier>``."""
    if text.startswith("score:"):
        rule = _RULES.get(text[6:])
        if rule is None:
            raise ValidationError(f"unknown scoring rule {text[6:]!r}; expected one of {sorted(_RULES)}")
        return DissimilaritySpec("scoring", rule)
    if text not in _LOSSES:
        raise ValidationError(f"unknown loss {text!r}")
    return _LOSSES[text]


def parse_decisiveness(text):
    """``maxent``, ``rule:<log|brier>``, ``dist:<pu|up>``, ``legacy`` or ``none``."""
    if text == "maxent":
        return DecisivenessKind("max-entropy")
    if text in ("legacy", "none"):
        return DecisivenessKind(text)
    head, _, arg = text.partition(":")
    if head == "rule" and arg in _RULES:
        return DecisivenessKind("scoring-rule-entropy", rule=_RULES[arg])
    if head == "dist" and arg in ("pu", "up"):
        return DecisivenessKind("distance", direction=arg)
    raise ValidationError(f"unknown decisiveness {text!r}")


def _config(args):
    kw = {"seed": args.seed, "restarts": args.restarts}
    if getattr(args, "tol", None) is not None:
        kw["tolerance"] = args.tol
    if getattr(args, "max_iter", None) is not None:
        kw["max_iterations"] = args.max_iter
    return SolverConfig(**kw)


def _emit(obj):
    sys.stdout.write(pf.dumps(obj))


def _need_base(data):
    if "credences" not in data:
        raise pf.ProblemError("this command needs top-level events (or V) with credences")
    return data


def cmd_check(args):
    base = pf.to_base(_need_base(pf.load(args.path)), clamp=args.clamp)
    v = coherence_check(base)
    _emit({"verdict": "coherent" if v.coherent else "incoherent", "coherent": v.coherent,
           "atoms": list(base.atoms.labels),
           "witness": None if v.witness is None else list(v.witness), "residual": v.residual})
    return EXIT_OK


def cmd_project(args):
    base = pf.to_base(_need_base(pf.load(args.path)), clamp=args.clamp)
    spec = parse_loss(args.loss)
    res = project(base, spec, _config(args))
    _emit({"events": list(base.names), "atoms": list(base.atoms.labels), "loss": spec.label,
           "p_star": list(res.p_star), "pi_star": list(res.pi_star), "incoherence": res.incoherence,
           "converged": res.converged, "iterations": res.iterations, "gap_estimate": res.gap_estimate})
    if not res.converged:
        print("error: projection did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_facets(args):
    base = pf.to_base(_need_base(pf.load(args.path)))
    reduced, status = reduce_full_rank(base)
    if status == "inconsistent":
        print("note: credences contradict a linear dependency; facets of the reduced events", file=sys.stderr)
    facets = enumerate_facets(reduced)
    _emit({"events": list(reduced.names), "atoms": list(reduced.atoms.labels),
           "facets": [{"a": list(f.a), "c": f.c, "payout": list(f.payout.b)} for f in facets]})
    return EXIT_OK


def cmd_dutchbook(args):
    base = pf.to_base(_need_base(pf.load(args.path)))
    cert = dutch_book(base)
    if cert is None:
        _emit({"verdict": "coherent"})
    else:
        _emit({"verdict": "incoherent", "events": list(base.names) + ["constant"],
               "stakes": list(cert.a), "payouts": list(cert.payouts), "cost": cert.cost})
    return EXIT_OK


def cmd_aggregate(args):
    data = pf.load(args.path)
    if "experts" not in data:
        raise pf.ProblemError("this command needs an experts list")
    loss = args.loss or ("half-f" if args.method == "asym" else "f")
    method = AggregationMethod(args.method, parse_loss(loss))
    experts = [ExpertReport(pf.to_base(e), e.get("name", f"expert{i + 1}")) for i, e in enumerate(data["experts"])]
    res = aggregate(experts, method, _config(args))
    if "queries" in data:
        queries = [(qd["name"], set(qd["atoms"])) for qd in data["queries"]]
    else:
        queries = {}
        for ex in experts:
            for i, name in enumerate(ex.base.names):
                queries.setdefault(name, ex.base.event_outcomes(i))
        queries = list(queries.items())
    beliefs = []
    for name, members in queries:
        unknown = members - set(res.outcomes)
        if unknown:
            raise pf.ProblemError(f"query {name!r}: unknown outcome label(s) {sorted(unknown)}")
        beliefs.append({"name": name, "value": res.belief(members)})
    _emit({"method": method.summation, "loss": method.spec.label, "atoms": list(res.atoms.labels),
           "pi_star": list(res.pi_star), "beliefs": beliefs,
           "disagreements": [{"name": e.name, "value": d} for e, d in zip(experts, res.disagreements)],
           "total": res.total, "converged": res.converged, "iterations": res.iterations})
    if not res.converged:
        print("error: aggregation did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_probe_loss(args):
    data = pf.load(args.path)
    if "probe" not in data:
        raise pf.ProblemError("this command needs a probe section")
    V, _ = pf.event_matrix(data)
    pc = ProbeCredences(np.asarray(data["probe"]["values"], dtype=float), V)
    spec = parse_loss(args.loss)
    kind = parse_decisiveness(args.decisiveness)
    config = _config(args)
    res = project(pc.flattened(), spec, config)
    total = probe_loss(pc, spec, kind, args.mix_weight, config)
    term = 0.0
    if kind.kind != "none":
        term = decisiveness_term(pc.V @ res.pi_star, pc.V, kind, config, credences=pc.values)
    _emit({"loss": spec.label, "decisiveness": kind.kind, "mix_weight": args.mix_weight,
           "incoherence": res.incoherence, "decisiveness_value": term, "total": total,
           "converged": res.converged})
    if not res.converged:
        print("error: projection did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def grid_points(step):
    """Interior grid ``step, 2 step, ...`` strictly inside (0, 1)."""
    if not 0 < step < 0.5:
        raise ValidationError("step must lie in (0, 0.5)")
    k = int(round(1.0 / step))
    pts = [round(i * step, 12) for i in range(1, k + 1)]
    return [x for x in pts if 0 < x < 1]


def cmd_grid(args):
    spec = {"pair-f": F, "pair-fo": FO}[args.scenario]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["q1", "q2", "value"])
    for q1 in grid_points(args.step):
        for q2 in grid_points(args.step):
            pE, L = closed_form_complement_pair(q1, q2, spec)
            value = L if args.quantity == "incoherence" else pE
            out.writerow([pf.format_number(q1), pf.format_number(q2), pf.format_number(value)])
    return EXIT_OK


def cmd_masked(args):
    corpus = load_corpus(args.corpus)
    loss = args.loss or ("half-f" if args.method == "asym" else "f")
    method = AggregationMethod(args.method, parse_loss(loss))
    config = _config(args)
    if args.evaluate:
        rep = evaluate_accuracy(corpus, method, config, mask_position=args.mask_position, holdout=args.holdout)
        _emit({"method": method.summation, "loss": method.spec.label, "mask_position": args.mask_position,
               "holdout": args.holdout, "accuracy": rep.accuracy, "evaluated": rep.evaluated,
               "skipped": rep.skipped})
        return EXIT_OK
    if args.word is None or args.mask is None:
        raise ValidationError("give --word and --mask, or --evaluate")
    w, i = args.word.lower(), args.mask
    if not (2 <= i <= len(w) - 3):
        raise ValidationError("the masked letter needs two letters of context on each side")
    h1, h2, support = build_heuristics(corpus, w[i - 2:i], w[i + 1:i + 3])
    p = predict_masked(h1, h2, method, config)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["letter", "q1", "q2", "p_star"])
    for c in support:
        out.writerow([c, pf.format_number(h1.distribution[c]), pf.format_number(h2.distribution[c]),
                      pf.format_number(p[c])])
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="coherence", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized solver restarts")
    parser.add_argument("--restarts", type=int, default=0, help="extra random solver starts; the best wins")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_path(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("path", help="problem file")
        p.set_defaults(func=func)
        return p

    def solver_opts(p):
        p.add_argument("--tol", type=float, help="solver tolerance")
        p.add_argument("--max-iter", type=int, help="solver iteration limit")

    p = with_path("check", cmd_check, "coherence verdict and witness")
    p.add_argument("--clamp", type=float, help="clamp credences into [eps, 1-eps] first")
    p = with_path("project", cmd_project, "closest coherent credences")
    p.add_argument("--loss", default="f", help="f, fo, sq or score:<log|brier>")
    p.add_argument("--clamp", type=float, help="clamp credences into [eps, 1-eps] first")
    solver_opts(p)
    with_path("facets", cmd_facets, "facet inequalities of the coherent polytope")
    with_path("dutchbook", cmd_dutchbook, "sure-loss bet against incoherent credences")
    p = with_path("aggregate", cmd_aggregate, "merge coherent experts")
    p.add_argument("--method", default="basis", choices=["stated", "full-i", "basis", "asym"])
    p.add_argument("--loss", help="f, fo, half-f or half-fo (default f, or half-f for asym)")
    solver_opts(p)
    p = with_path("probe-loss", cmd_probe_loss, "incoherence plus indecisiveness of probe outputs")
    p.add_argument("--loss", default="f")
    p.add_argument("--decisiveness", default="none", help="maxent, rule:<log|brier>, dist:<pu|up>, legacy, none")
    p.add_argument("--mix-weight", type=float, default=1.0)
    solver_opts(p)

    p = sub.add_parser("grid", help="CSV grid for an event/complement pair")
    p.add_argument("--scenario", default="pair-f", choices=["pair-f", "pair-fo"])
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--quantity", default="incoherence", choices=["incoherence", "p_star"])
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("masked", help="masked-letter prediction from trigram heuristics")
    p.add_argument("--corpus", help="word list, one per line (default: bundled English list)")
    p.add_argument("--word")
    p.add_argument("--mask", type=int, help="0-based index of the hidden letter")
    p.add_argument("--evaluate", action="store_true", help="accuracy over all five-letter words")
    p.add_argument("--method", default="basis", choices=["stated", "full-i", "basis", "asym"])
    p.add_argument("--loss")
    p.add_argument("--mask-position", type=int, default=2)
    p.add_argument("--holdout", action="store_true", help="remove each word's own trigrams first")
    solver_opts(p)
    p.set_defaults(func=cmd_masked)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except pf.ProblemError as exc:
        where = getattr(args, "path", "<input>")
        line = exc.line if exc.line is not None else 1
        print(f"{where}:{line}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
