"""Knowledge-based programs: AST, size, trace enumeration, verification.

A trace records the knowledge-state sequence produced by one resolution of
all nondeterminism: which feedback each sensing action returned, plus the
branch decisions taken.  Branch decisions do not progress the knowledge
state; only actions append to the state sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formulas as F
from .errors import BudgetError, LinkError, NonTerminatingError
from .formulas import formula_size

DEFAULT_STEP_LIMIT = 20_000


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Act:
    name: str


@dataclass(frozen=True)
class Seq:
    first: object
    rest: object


@dataclass(frozen=True)
class If:
    cond: object
    then_branch: object
    else_branch: object


@dataclass(frozen=True)
class While:
    cond: object
    body: object


EMPTY = Empty()


def seq(*parts):
    """Right-associated sequence; Empty for no parts."""
    items = [p for p in parts]
    if not items:
        return EMPTY
    out = items[-1]
    for p in reversed(items[:-1]):
        out = Seq(p, out)
    return out


def seq2(first, rest):
    """Sequence of two programs, omitting a trailing Empty."""
    if isinstance(rest, Empty):
        return first
    if isinstance(first, Empty):
        return rest
    return Seq(first, rest)


def kbp_size(pi) -> int:
    """Occurrences of actions plus the size of branching conditions."""
    if isinstance(pi, Empty):
        return 0
    if isinstance(pi, Act):
        return 1
    if isinstance(pi, Seq):
        return kbp_size(pi.first) + kbp_size(pi.rest)
    if isinstance(pi, If):
        return (
            formula_size(pi.cond)
            + kbp_size(pi.then_branch)
            + kbp_size(pi.else_branch)
        )
    if isinstance(pi, While):
        return formula_size(pi.cond) + kbp_size(pi.body)
    raise TypeError(f"not a program node: {pi!r}")


def actions_used(pi) -> set[str]:
    if isinstance(pi, Act):
        return {pi.name}
    if isinstance(pi, Seq):
        return actions_used(pi.first) | actions_used(pi.rest)
    if isinstance(pi, If):
        return actions_used(pi.then_branch) | actions_used(pi.else_branch)
    if isinstance(pi, While):
        return actions_used(pi.body)
    return set()


def conditions_used(pi) -> list:
    if isinstance(pi, Seq):
        return conditions_used(pi.first) + conditions_used(pi.rest)
    if isinstance(pi, If):
        return (
            [pi.cond]
            + conditions_used(pi.then_branch)
            + conditions_used(pi.else_branch)
        )
    if isinstance(pi, While):
        return [pi.cond] + conditions_used(pi.body)
    return []


def link_check(problem, pi) -> None:
    """Every action resolves and every condition is purely subjective."""
    for name in sorted(actions_used(pi)):
        problem.find_action(name)
    for cond in conditions_used(pi):
        if not F.is_subjective(cond):
            raise LinkError(
                "branching conditions must be purely subjective formulas"
            )
        unknown = F.vars_of(cond) - set(problem.variables)
        if unknown:
            raise LinkError(
                f"condition mentions undeclared variables: {sorted(unknown)}"
            )


# -- results ---------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    states: tuple  # knowledge-state masks; first entry is the start state
    choices: tuple  # ("ontic", name) | ("feedback", name, i) | ("if"/"while", bool)


@dataclass(frozen=True)
class TraceSet:
    traces: tuple


@dataclass(frozen=True)
class InfiniteWitness:
    prefix: Trace


@dataclass(frozen=True)
class Valid:
    trace_count: int = 0


@dataclass(frozen=True)
class Invalid:
    counterexample: Trace


@dataclass(frozen=True)
class NonTerminating:
    prefix: Trace


# -- trace enumeration -------------------------------------------------------


def enumerate_traces(problem, pi, start=None, max_steps=DEFAULT_STEP_LIMIT):
    """Exhaustively branch over applicable feedbacks and branch decisions.

    Returns TraceSet when every execution terminates, or InfiniteWitness
    with the looping prefix as soon as a (control, knowledge-state)
    configuration repeats along a branch -- a sound and complete test,
    since configurations are finitely many.  Exceeding `max_steps`
    configurations on one branch raises BudgetError instead.
    """
    link_check(problem, pi)
    start = problem.initial_state if start is None else start
    space = problem.space

    done = []
    # frame: (continuation, ks, steps, states, choices, visited-configs)
    stack = [((pi,), start, 0, (start,), (), frozenset())]
    while stack:
        cont, ks, steps, states, choices, seen = stack.pop()
        if not cont:
            done.append(Trace(states, choices))
            continue
        if steps > max_steps:
            raise BudgetError(
                f"trace exceeded {max_steps} configurations; raise max_steps"
            )
        config = (cont, ks)
        if config in seen:
            return InfiniteWitness(Trace(states, choices))
        seen = seen | {config}
        steps += 1
        head, rest = cont[0], cont[1:]
        if isinstance(head, Empty):
            stack.append((rest, ks, steps, states, choices, seen))
        elif isinstance(head, Seq):
            stack.append(((head.first, head.rest) + rest, ks, steps, states, choices, seen))
        elif isinstance(head, If):
            taken = space.holds(ks, head.cond)
            arm = head.then_branch if taken else head.else_branch
            stack.append(
                ((arm,) + rest, ks, steps, states, choices + (("if", taken),), seen)
            )
        elif isinstance(head, While):
            taken = space.holds(ks, head.cond)
            nxt = (head.body, head) + rest if taken else rest
            stack.append(
                (nxt, ks, steps, states, choices + (("while", taken),), seen)
            )
        elif isinstance(head, Act):
            kind, action = problem.find_action(head.name)
            if kind == "ontic":
                nxt = problem.progress_ontic(ks, action)
                stack.append(
                    (
                        rest,
                        nxt,
                        steps,
                        states + (nxt,),
                        choices + (("ontic", head.name),),
                        seen,
                    )
                )
            else:
                # push in reverse so branches pop in declaration order
                for i in reversed(problem.applicable_feedbacks(ks, action)):
                    nxt = ks & space.models(action.feedbacks[i])
                    stack.append(
                        (
                            rest,
                            nxt,
                            steps,
                            states + (nxt,),
                            choices + (("feedback", head.name, i),),
                            seen,
                        )
                    )
        else:
            raise TypeError(f"not a program node: {head!r}")
    return TraceSet(tuple(done))


def verify_plan(problem, pi, start=None, max_steps=DEFAULT_STEP_LIMIT):
    """Valid iff every trace is finite and ends in a goal-satisfying
    knowledge state; otherwise the first witness found."""
    result = enumerate_traces(problem, pi, start=start, max_steps=max_steps)
    if isinstance(result, InfiniteWitness):
        return NonTerminating(result.prefix)
    for trace in result.traces:
        if not problem.holds(trace.states[-1], problem.goal):
            return Invalid(trace)
    return Valid(trace_count=len(result.traces))


def equivalent_in(problem, pi_a, pi_b, start=None, max_steps=DEFAULT_STEP_LIMIT):
    """Trace-set equality from the given start state: the knowledge-state
    sequences must coincide as sets, regardless of which choices produced
    them.  Raises NonTerminatingError when either program loops."""
    sets = []
    for pi in (pi_a, pi_b):
        result = enumerate_traces(problem, pi, start=start, max_steps=max_steps)
        if isinstance(result, InfiniteWitness):
            raise NonTerminatingError(
                "cannot compare traces of a nonterminating program",
                prefix=result.prefix,
            )
        sets.append({t.states for t in result.traces})
    return sets[0] == sets[1]


def execute(problem, pi, world: int, rng, start=None, max_steps=DEFAULT_STEP_LIMIT):
    """Simulate one execution against an actual world state.

    Feedback choices are drawn (seeded rng) among the feedbacks true in
    the current world; ontic outcomes likewise among the successor states.
    Returns (trace, final world state).
    """
    link_check(problem, pi)
    space = problem.space
    ks = problem.initial_state if start is None else start
    if not (ks >> world) & 1:
        raise ValueError("the actual world must be possible initially")
    cont = [pi]
    states = [ks]
    choices = []
    steps = 0
    while cont:
        steps += 1
        if steps > max_steps:
            raise BudgetError("execution exceeded the step limit")
        head = cont.pop()
        if isinstance(head, Empty):
            continue
        if isinstance(head, Seq):
            cont.append(head.rest)
            cont.append(head.first)
            continue
        if isinstance(head, If):
            taken = space.holds(ks, head.cond)
            choices.append(("if", taken))
            cont.append(head.then_branch if taken else head.else_branch)
            continue
        if isinstance(head, While):
            taken = space.holds(ks, head.cond)
            choices.append(("while", taken))
            if taken:
                cont.append(head)
                cont.append(head.body)
            continue
        kind, action = problem.find_action(head.name)
        if kind == "ontic":
            from .actions import space_engine

            succ = space_engine(space, action.theory).successor_mask(world)
            world = rng.choice(space.states(succ))
            ks = problem.progress_ontic(ks, action)
            choices.append(("ontic", head.name))
        else:
            live = [
                i
                for i in range(len(action.feedbacks))
                if space.eval(world, action.feedbacks[i])
            ]
            i = rng.choice(live)
            ks &= space.models(action.feedbacks[i])
            choices.append(("feedback", head.name, i))
        states.append(ks)
    return Trace(tuple(states), tuple(choices)), world


# -- standard policies --------------------------------------------------------


class _NotStandard(Exception):
    pass


def is_standard_policy(problem, pi) -> bool:
    """True when, on every syntactic path, each branching condition is a
    single knowledge atom drawn verbatim from the feedback list of the
    epistemic action executed immediately before it."""
    link_check(problem, pi)

    def feedbacks_of(name):
        kind, action = problem.find_action(name)
        return action.feedbacks if kind == "epistemic" else None

    def check_cond(cond, incoming):
        if not isinstance(cond, F.KAtom):
            raise _NotStandard
        for last in incoming:
            if last is None:
                raise _NotStandard  # branching before any action
            fbs = feedbacks_of(last)
            if fbs is None or cond.obj not in fbs:
                raise _NotStandard

    def last_set(node, incoming, checking):
        if isinstance(node, Empty):
            return incoming
        if isinstance(node, Act):
            return frozenset({node.name})
        if isinstance(node, Seq):
            return last_set(node.rest, last_set(node.first, incoming, checking), checking)
        if isinstance(node, If):
            if checking:
                check_cond(node.cond, incoming)
            return last_set(node.then_branch, incoming, checking) | last_set(
                node.else_branch, incoming, checking
            )
        if isinstance(node, While):
            entry = incoming
            while True:
                widened = incoming | last_set(node.body, entry, False)
                if widened == entry:
                    break
                entry = widened
            if checking:
                check_cond(node.cond, entry)
                last_set(node.body, entry, True)
            return entry
        raise TypeError(f"not a program node: {node!r}")

    try:
        last_set(pi, frozenset({None}), True)
    except _NotStandard:
        return False
    return True
