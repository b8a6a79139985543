"""Compile a knowledge-based program into an equivalent standard policy.

The compilation simulates every execution from the start state: resolved
branch conditions are inlined, sensing actions expand into a cascade of
tests on their own feedback atoms, and loops unroll.  The result branches
only on the feedback just obtained, so it can run with constant-delay
condition evaluation, at the price of a possibly exponential size.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from . import programs as P
from .errors import BudgetError
from .formulas import KAtom
from .programs import EMPTY, Act, Empty, If, NonTerminating, Seq, Trace, While, seq2

DEFAULT_NODE_BUDGET = 500_000


@dataclass(frozen=True)
class CompiledPolicy:
    policy: object
    source: object
    init: object  # formula; compilation started from its models


class _Loop(Exception):
    def __init__(self, states):
        self.states = states


def compile_policy(problem, pi, start=None, max_nodes=DEFAULT_NODE_BUDGET):
    """CompiledPolicy, or NonTerminating when the unrolling provably loops
    (a control/knowledge-state configuration repeats).  Raises BudgetError
    when more than max_nodes output nodes would be emitted, which is mere
    resource exhaustion, not a nontermination proof.
    """
    P.link_check(problem, pi)
    start_ks = problem.initial_state if start is None else start
    space = problem.space
    budget = [max_nodes]

    def spend(n=1):
        budget[0] -= n
        if budget[0] < 0:
            raise BudgetError(f"policy exceeds the {max_nodes}-node budget")

    def go(cont, ks, path, states):
        if not cont:
            spend()
            return EMPTY
        config = (cont, ks)
        if config in path:
            raise _Loop(states)
        path = path | {config}
        head, rest = cont[0], cont[1:]
        if isinstance(head, Empty):
            return go(rest, ks, path, states)
        if isinstance(head, Seq):
            return go((head.first, head.rest) + rest, ks, path, states)
        if isinstance(head, If):
            arm = head.then_branch if space.holds(ks, head.cond) else head.else_branch
            return go((arm,) + rest, ks, path, states)
        if isinstance(head, While):
            if space.holds(ks, head.cond):
                return go((head.body, head) + rest, ks, path, states)
            return go(rest, ks, path, states)
        # an action
        kind, action = problem.find_action(head.name)
        spend()
        if kind == "ontic":
            nxt = problem.progress_ontic(ks, action)
            return seq2(Act(head.name), go(rest, nxt, path, states + (nxt,)))
        branches = []
        for i in problem.applicable_feedbacks(ks, action):
            nxt = ks & space.models(action.feedbacks[i])
            branches.append((action.feedbacks[i], nxt))
        compiled = [
            (phi, go(rest, nxt, path, states + (nxt,)))
            for phi, nxt in _else_first(branches)
        ]
        return seq2(Act(head.name), feedback_cascade(compiled, spend))

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 50_000))
    try:
        policy = go((pi,), start_ks, frozenset(), (start_ks,))
    except _Loop as loop:
        return NonTerminating(Trace(loop.states, ()))
    finally:
        sys.setrecursionlimit(old_limit)
    return CompiledPolicy(policy=policy, source=pi, init=problem.init)


def _else_first(branches):
    """Order feedback branches so that every branch precedes its strict
    subsets, ties broken by declaration order.  The cascade built by
    feedback_cascade tests conditions in reverse of this list, i.e. most
    specific first, which routes correctly even when feedbacks overlap:
    a strictly larger branch is never tested before a smaller one it
    covers.  For mutually exclusive feedbacks this reduces to declaration
    order, with the first-declared feedback as the final else.
    """
    remaining = list(branches)
    out = []
    while remaining:
        for idx, (phi, ks) in enumerate(remaining):
            if not any(
                ks != ks2 and ks | ks2 == ks2 for _, ks2 in remaining
            ):  # no strict superset left
                out.append(remaining.pop(idx))
                break
        else:  # pragma: no cover - subset relation is a partial order
            out.append(remaining.pop(0))
    return out


def feedback_cascade(compiled, spend=lambda n=1: None):
    """Fold (feedback, subpolicy) pairs, ordered else-first, into nested
    if tests on the feedback atoms.  A single applicable feedback needs no
    test at all."""
    acc = compiled[0][1]
    for phi, sub in compiled[1:]:
        spend()
        acc = If(KAtom(phi), sub, acc)
    return acc


# -- succinctness measurement -------------------------------------------------


def test_chain(n: int):
    """Problem and program for the n-step sensing chain: read every hidden
    bit; the goal is to know each one.  The program has size n while any
    standard policy for it duplicates the suffix under both feedbacks of
    every test, giving at least 2^n - 1 action occurrences."""
    from . import formulas as F
    from .actions import make_test_action
    from .problems import PlanningProblem

    names = tuple(f"x{i}" for i in range(1, n + 1))
    problem = PlanningProblem(
        variables=names,
        init=F.TRUE,
        ontic=(),
        epistemic=tuple(make_test_action(F.Var(v)) for v in names),
        goal=F.conj([F.Or(KAtom(F.Var(v)), KAtom(F.Not(F.Var(v)))) for v in names]),
        name=f"test-chain-{n}",
    )
    pi = P.seq(*[Act(f"test_{v}") for v in names])
    return problem, pi


def sat_chain(n: int):
    from .gadgets import three_sat_family

    return three_sat_family(n, 1)


FAMILIES = {
    "test-chain": test_chain,
    "3sat-family": sat_chain,
    "empty": None,
}


def measure_succinctness(family: str, max_n: int, max_nodes=DEFAULT_NODE_BUDGET):
    """Rows (n, program size, compiled policy size).  Budget exhaustion is
    recorded as a lower bound string '>=N' in the policy column."""
    if family == "empty":
        return [(0, 0, 0)]
    gen = FAMILIES.get(family)
    if gen is None:
        raise ValueError(f"unknown family {family!r}; pick one of {sorted(FAMILIES)}")
    rows = []
    for n in range(1, max_n + 1):
        problem, pi = gen(n)
        problem.validate()
        try:
            result = compile_policy(problem, pi, max_nodes=max_nodes)
            policy_size = P.kbp_size(result.policy)
        except BudgetError:
            policy_size = f">={max_nodes}"
        rows.append((n, P.kbp_size(pi), policy_size))
    return rows


def succinctness_csv(rows) -> str:
    lines = ["n,kbp_size,policy_size"]
    for n, k, p in rows:
        lines.append(f"{n},{k},{p}")
    return "\n".join(lines) + "\n"
