"""Command line front end: ``pctlfrag classify|sat|check|rewrite|transform``.

Exit codes: 0 SAT/true, 1 UNSAT/false, 2 UNKNOWN, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import checker, markov, rewrite, synth, transform
from .formula import F, FormulaError, G, classify, iter_nodes, normalize, parse, to_text

EXIT = {synth.Status.SAT: 0, synth.Status.UNSAT: 1, synth.Status.UNKNOWN: 2}
INPUT_ERROR = 3


class InputError(Exception):
    pass


def _formula(text: str):
    try:
        return normalize(parse(text))
    except FormulaError as exc:
        raise InputError(f"bad formula: {exc}") from exc


def _model(path: str) -> markov.MarkovChain:
    try:
        return markov.load(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except markov.ChainError as exc:
        raise InputError(f"bad model {path}: {exc}") from exc


def _num(p: Fraction, as_float: bool) -> str:
    return f"{p} ({float(p):.6g})" if as_float else str(p)


def _write_chain(mc: markov.MarkovChain, path: str):
    target = Path(path)
    target.write_text(markov.save(mc))
    target.with_suffix(".dot").write_text(markov.to_dot(mc))


def cmd_classify(args) -> int:
    print(classify(_formula(args.formula)).value)
    return 0


def _answer_line(name: str, ans: synth.Answer) -> str:
    line = f"{name}: {ans.status.value}"
    return f"{line} ({ans.reason})" if ans.reason else line


def cmd_sat(args) -> int:
    f = _formula(args.formula)
    if args.oracle:
        try:
            res = synth.bounded_sat(f, args.max_states, args.denom)
        except synth.BudgetExceeded as exc:
            print(f"oracle: budget exhausted ({exc})")
            return 2
        print(f"oracle: grid of {args.max_states} states, denominator {args.denom}, "
              f"{res.candidates} candidates checked")
        if not res.sat:
            print("result: NO_WITNESS_FOUND")
            return 2
        print("result: SAT")
        if args.witness:
            _write_chain(res.witness, args.witness)
        return 0
    verdict = synth.decide(f)
    ans = verdict.general if args.general else verdict.finite
    print(f"fragment: {verdict.fragment.value}")
    print(f"bound: {verdict.bound}")
    print(_answer_line("finite", verdict.finite))
    print(_answer_line("general", verdict.general))
    if ans.sat:
        print(f"witness: {ans.witness.n} states, height {markov.height(ans.witness)}")
        if args.witness:
            _write_chain(ans.witness, args.witness)
    return EXIT[ans.status]


def cmd_check(args) -> int:
    mc = _model(args.model)
    f = _formula(args.formula)
    state = mc.initial if args.state is None else args.state
    if not 0 <= state < mc.n:
        raise InputError(f"state {state} out of range")
    table = checker.check(mc, f)
    ok = table.holds(f, state)
    print("true" if ok else "false")
    if args.probs:
        for node in dict.fromkeys(iter_nodes(f)):
            if isinstance(node, (F, G)):
                print(f"  P[{to_text(node)}] = {_num(table.probability(node, state), args.float)}")
    return 0 if ok else 1


def cmd_rewrite(args) -> int:
    f = _formula(args.formula)
    if args.mode == "hat":
        out = rewrite.hat(f)
    elif args.mode == "normal-form":
        try:
            out = rewrite.rebuild(rewrite.normal_form(f))
        except FormulaError as exc:
            raise InputError(str(exc)) from exc
    else:
        out = f
    print(to_text(out))
    return 0


def cmd_transform(args) -> int:
    mc = _model(args.model)
    f = _formula(args.formula)
    try:
        if args.mode == "collapse":
            out = transform.bscc_collapse(mc, f)
        elif args.mode == "reduce":
            out = transform.reduce(mc, f).chain
        else:
            original = _model(args.original) if args.original else mc
            red = transform.reduce(original, f)
            if args.original and markov.save(red.chain) != markov.save(mc):
                raise InputError("model is not the reduction of --original")
            out = transform.chain_insert(red, original, f).chain
    except transform.TransformError as exc:
        raise InputError(str(exc)) from exc
    text = markov.save(out)
    if args.output:
        _write_chain(out, args.output)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pctlfrag", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="print the fragment of a formula")
    c.add_argument("formula")
    c.set_defaults(run=cmd_classify)

    s = sub.add_parser("sat", help="decide satisfiability")
    s.add_argument("formula")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--finite", action="store_true", help="report finite satisfiability (default)")
    mode.add_argument("--general", action="store_true", help="report general satisfiability")
    s.add_argument("--witness", metavar="PATH", help="write the witness chain and a .dot file")
    s.add_argument("--max-states", type=int, default=6)
    s.add_argument("--denom", type=int, default=4)
    s.add_argument("--oracle", action="store_true", help="use the grid search instead")
    s.set_defaults(run=cmd_sat)

    k = sub.add_parser("check", help="model check a chain file")
    k.add_argument("model")
    k.add_argument("formula")
    k.add_argument("--state", type=int)
    k.add_argument("--probs", action="store_true", help="print path probabilities")
    k.add_argument("--float", action="store_true", help="add decimal approximations")
    k.set_defaults(run=cmd_check)

    r = sub.add_parser("rewrite", help="rewrite a formula")
    r.add_argument("formula")
    r.add_argument("--mode", choices=["nnf", "hat", "normal-form"], default="nnf")
    r.set_defaults(run=cmd_rewrite)

    t = sub.add_parser("transform", help="transform a model")
    t.add_argument("model")
    t.add_argument("formula")
    t.add_argument("--mode", choices=["collapse", "reduce", "chain-insert"], required=True)
    t.add_argument("--original", metavar="PATH", help="pre-reduction model for chain-insert")
    t.add_argument("--output", metavar="PATH")
    t.set_defaults(run=cmd_transform)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else 0
    try:
        return args.run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
