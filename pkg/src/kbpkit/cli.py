"""Command-line surface.

Exit codes: check 0/2; verify 0 valid, 1 invalid or nonterminating,
2 error; compile 0, 1 nonterminating, 2 error; solve 0 exists, 1 none,
3 unknown, 2 error; reduce/gen 0 ok, 2 error.  The first stdout line of a
verdict-producing command is always machine parsable: `verdict: <word>`.
Statistics lines are prefixed `stat:`.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import programs as P
from . import solvers as S
from .compiler import compile_policy, measure_succinctness, succinctness_csv
from .errors import KbpkitError
from .gadgets import problem_from_kbp, three_sat_family
from .qbf import Qbf
from .reductions import (
    reduce_qbf2_bounded_pos,
    reduce_qbf2_epistemic,
    reduce_qbf3_bounded,
    reduce_qbf_wfoe,
    reduce_wfoe_wfe,
    reduce_unsat_positive,
)
from .syntax import (
    format_kbp,
    format_problem,
    parse_epistemic,
    parse_kbp,
    parse_objective,
    parse_problem,
    parse_qbf,
)


def entry():  # console-script hook
    sys.exit(main(sys.argv[1:]))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except KbpkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kbpkit",
        description="knowledge-based programs as plans: check, verify, compile, solve",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a problem file")
    p.add_argument("problem")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("verify", help="verify a plan against a problem")
    p.add_argument("problem")
    p.add_argument("plan")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("compile", help="compile a plan into a standard policy")
    p.add_argument("problem")
    p.add_argument("plan")
    p.add_argument("--stats", action="store_true", help="append a size table row")
    p.set_defaults(handler=cmd_compile)

    p = sub.add_parser("solve", help="decide plan existence")
    p.add_argument("problem")
    p.add_argument(
        "--mode",
        choices=["auto", "fixpoint", "epistemic", "positive", "sequence", "bounded", "wfoe"],
        default="auto",
    )
    p.add_argument("--bound", type=int, default=None, help="size bound (bounded/sequence)")
    p.add_argument("--vocab", default=None, help="file with one condition per line")
    p.add_argument(
        "--vocab-complete",
        action="store_true",
        help="treat the vocabulary as sufficient: report none instead of unknown",
    )
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("reduce", help="turn a QBF (or formula) into a problem file")
    p.add_argument(
        "kind", choices=["qbf2e", "unsat", "wfoe", "wfoe2wfe", "qbf3b", "qbf2bpos"]
    )
    p.add_argument("input", help="QBF file (unsat: file with one objective formula)")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("gen", help="generate gadget problem families")
    p.add_argument("kind", choices=["satfamily", "fromkbp"])
    p.add_argument("--vars", type=int, default=1, help="satfamily: assignment bits")
    p.add_argument("--clauses", type=int, default=1, help="satfamily: clause count")
    p.add_argument("--problem", default=None, help="fromkbp: base problem file")
    p.add_argument("--plan", default=None, help="fromkbp: source plan file")
    p.add_argument("--init", default=None, help="fromkbp: override init formula")
    p.add_argument("--goal", default=None, help="fromkbp: base goal formula")
    p.add_argument("--out-prefix", required=True, help="write PREFIX.problem/.plan")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("bench", help="measurement harnesses")
    bench_sub = p.add_subparsers(dest="bench_command", required=True)
    b = bench_sub.add_parser("succinctness", help="program size vs compiled policy size")
    b.add_argument("--family", default="test-chain")
    b.add_argument("--max-n", type=int, default=6)
    b.set_defaults(handler=cmd_bench_succinctness)

    return parser


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_problem(path: str):
    problem = parse_problem(_read(path), name=path)
    problem.validate()
    return problem


def cmd_check(args) -> int:
    _load_problem(args.problem)
    print("verdict: ok")
    return 0


def cmd_verify(args) -> int:
    problem = _load_problem(args.problem)
    plan = parse_kbp(_read(args.plan))
    t0 = time.perf_counter()
    result = P.verify_plan(problem, plan)
    elapsed = time.perf_counter() - t0
    if isinstance(result, P.Valid):
        print("verdict: valid")
        print(f"stat: traces={result.trace_count} time={elapsed:.3f}s")
        return 0
    if isinstance(result, P.Invalid):
        print("verdict: invalid")
        _print_trace(problem, result.counterexample)
        print(f"stat: time={elapsed:.3f}s")
        return 1
    print("verdict: nonterminating")
    _print_trace(problem, result.prefix)
    print(f"stat: time={elapsed:.3f}s")
    return 1


def _print_trace(problem, trace):
    for i, ks in enumerate(trace.states):
        label = "" if i == 0 else f" after {_choice_text(trace.choices, i)}"
        print(f"M{i} = {problem.render_state(ks)}{label}")


def _choice_text(choices, i):
    acted = [c for c in choices if c[0] in ("ontic", "feedback")]
    c = acted[i - 1]
    if c[0] == "ontic":
        return c[1]
    return f"{c[1]} (feedback {c[2]})"


def cmd_compile(args) -> int:
    problem = _load_problem(args.problem)
    plan = parse_kbp(_read(args.plan))
    result = compile_policy(problem, plan)
    if isinstance(result, P.NonTerminating):
        print("verdict: nonterminating")
        return 1
    print("verdict: compiled")
    print(format_kbp(result.policy))
    if args.stats:
        print(
            f"stat: kbp_size={P.kbp_size(plan)} policy_size={P.kbp_size(result.policy)}"
        )
    return 0


_SOLVE_MODES = {
    "fixpoint": lambda prob, args: S.solve_existence(prob),
    "epistemic": lambda prob, args: S.solve_existence_epistemic(prob),
    "positive": lambda prob, args: S.solve_epistemic_positive(prob),
    "wfoe": lambda prob, args: S.solve_wfoe(prob),
}


def cmd_solve(args) -> int:
    problem = _load_problem(args.problem)
    vocabulary = None
    if args.vocab:
        vocabulary = tuple(
            parse_epistemic(line)
            for line in _read(args.vocab).splitlines()
            if line.split("#", 1)[0].strip()
        )
    if args.vocab_complete:
        problem.vocab_complete = True
    t0 = time.perf_counter()
    if args.mode == "auto":
        answer = S.auto_solve(problem, k=args.bound, vocabulary=vocabulary)
    elif args.mode == "bounded":
        if args.bound is None and problem.bound is None:
            print("error: bounded mode needs --bound (or a bound: line)", file=sys.stderr)
            return 2
        answer = S.solve_bounded(problem, args.bound, vocabulary=vocabulary)
    elif args.mode == "sequence":
        if args.bound is None and problem.bound is None:
            print("error: sequence mode needs --bound (or a bound: line)", file=sys.stderr)
            return 2
        bound = args.bound if args.bound is not None else problem.bound
        answer = S.solve_bounded_sequence(problem, bound)
    else:
        answer = _SOLVE_MODES[args.mode](problem, args)
    elapsed = time.perf_counter() - t0

    if isinstance(answer, S.Exists):
        check = P.verify_plan(problem, answer.witness)
        if not isinstance(check, P.Valid):
            print("error: witness failed re-verification", file=sys.stderr)
            return 2
        print("verdict: exists")
        print(format_kbp(answer.witness))
        print(f"stat: witness_size={P.kbp_size(answer.witness)} time={elapsed:.3f}s")
        return 0
    if isinstance(answer, S.NoPlan):
        print("verdict: none")
        print(f"stat: time={elapsed:.3f}s")
        return 1
    print("verdict: unknown")
    print(f"stat: reason={answer.reason!r} time={elapsed:.3f}s")
    return 3


def cmd_reduce(args) -> int:
    text = _read(args.input)
    if args.kind == "unsat":
        body = " ".join(
            line.split("#", 1)[0] for line in text.splitlines()
        ).strip()
        out = reduce_unsat_positive(parse_objective(body))
    else:
        psi = parse_qbf(text)
        if args.kind == "qbf2e":
            out = reduce_qbf2_epistemic(psi)
        elif args.kind == "wfoe":
            out = reduce_qbf_wfoe(psi)
        elif args.kind == "wfoe2wfe":
            out = reduce_wfoe_wfe(reduce_qbf_wfoe(psi))
        elif args.kind == "qbf3b":
            out = reduce_qbf3_bounded(psi)
        else:
            out = reduce_qbf2_bounded_pos(psi)
    out.problem.validate()
    note = out.note + f"\nsolve mode: {out.solver}"
    if out.problem.vocab_complete:
        note += "\nvocab-complete: yes"
    rendered = format_problem(out.problem, certificate=note)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
        print(f"stat: wrote {args.out}")
    else:
        sys.stdout.write(rendered)
    return 0


def cmd_gen(args) -> int:
    if args.kind == "satfamily":
        problem, plan = three_sat_family(args.vars, args.clauses)
        note = (
            f"clause-reading family: {args.vars} assignment bits, "
            f"{args.clauses} clauses\nthe companion plan file is valid for it"
        )
    else:
        if not args.problem or not args.plan:
            print("error: fromkbp needs --problem and --plan", file=sys.stderr)
            return 2
        base = _load_problem(args.problem)
        pi = parse_kbp(_read(args.plan))
        init = parse_objective(args.init) if args.init else None
        goal = parse_epistemic(args.goal) if args.goal else None
        out = problem_from_kbp(base, pi, init=init, base_goal=goal)
        problem, plan = out.problem, out.plan
        note = out.note
    problem.validate()
    ppath = f"{args.out_prefix}.problem"
    kpath = f"{args.out_prefix}.plan"
    with open(ppath, "w", encoding="utf-8") as fh:
        fh.write(format_problem(problem, certificate=note))
    with open(kpath, "w", encoding="utf-8") as fh:
        fh.write(format_kbp(plan) + "\n")
    print(f"stat: wrote {ppath}")
    print(f"stat: wrote {kpath}")
    return 0


def cmd_bench_succinctness(args) -> int:
    rows = measure_succinctness(args.family, args.max_n)
    sys.stdout.write(succinctness_csv(rows))
    return 0


if __name__ == "__main__":
    entry()
