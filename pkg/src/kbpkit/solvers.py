"""Plan-existence solvers for the fragments with workable algorithms.

- solve_existence: least-fixpoint AND-OR search over the knowledge states
  reachable from the start; emits a while-free standard policy.
- solve_existence_epistemic: tree search of height at most |epistemic
  actions| (the state never changes, so repeating an action on a branch
  is useless).
- solve_epistemic_positive: the all-actions sequence decides existence
  for positive goals; a per-feedback-combination entailment check is the
  fast path.
- solve_bounded: bounded-size search over while-free programs with
  branching conditions drawn from an explicit vocabulary, via a min-cost
  search over sets of knowledge states with conditional split/join moves.
- solve_bounded_sequence: action sequences of length <= k, for the
  ontic-only and epistemic-positive fragments.
- solve_wfoe: like the epistemic tree search, but actions must respect a
  given total order along every branch.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from . import formulas as F
from . import programs as P
from .compiler import _else_first, feedback_cascade
from .errors import BudgetError, ValidationError
from .formulas import KAtom, formula_size, to_sknnf
from .programs import EMPTY, Act, seq, seq2

DEFAULT_STATE_BUDGET = 20_000
DEFAULT_POP_BUDGET = 200_000


@dataclass(frozen=True)
class Exists:
    witness: object


@dataclass(frozen=True)
class NoPlan:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str


# -- unrestricted existence: reachable-state fixpoint --------------------------


def solve_existence(problem, max_states=DEFAULT_STATE_BUDGET):
    """Least fixpoint of solvability over the knowledge states reachable
    from the start state.  A state is solvable at rank t+1 when some ontic
    action leads into the fixpoint, or some epistemic action has every
    applicable feedback successor inside it.  The witness follows ranks
    downward, so it is a while-free standard policy."""
    problem.validate()
    space = problem.space
    start = problem.initial_state

    moves = _action_moves(problem)

    # reachable knowledge states, breadth first
    reachable = {start}
    frontier = [start]
    succs: dict[int, list] = {}
    while frontier:
        nxt = []
        for ks in frontier:
            out = []
            for idx, kind, action in moves:
                if kind == "ontic":
                    out.append((idx, kind, action, (problem.progress_ontic(ks, action),)))
                else:
                    branches = tuple(
                        ks & space.models(action.feedbacks[i])
                        for i in problem.applicable_feedbacks(ks, action)
                    )
                    out.append((idx, kind, action, branches))
            succs[ks] = out
            for _, _, _, branches in out:
                for ks2 in branches:
                    if ks2 not in reachable:
                        reachable.add(ks2)
                        nxt.append(ks2)
                        if len(reachable) > max_states:
                            return Unknown(
                                f"reachable knowledge states exceed {max_states}"
                            )
        frontier = nxt

    goal = problem.goal
    rank = {ks: 0 for ks in reachable if space.holds(ks, goal)}
    choice: dict[int, tuple] = {}
    t = 0
    changed = True
    while changed and start not in rank:
        changed = False
        t += 1
        additions = []
        for ks in reachable:
            if ks in rank:
                continue
            best = None
            for idx, kind, action, branches in succs[ks]:
                if all(b in rank for b in branches):
                    score = max(rank[b] for b in branches)
                    if best is None or (score, idx) < best[0]:
                        best = ((score, idx), kind, action, branches)
            if best is not None:
                additions.append((ks, best))
        for ks, best in additions:
            rank[ks] = t
            choice[ks] = best[1:]
            changed = True

    if start not in rank:
        return NoPlan()

    memo: dict[int, object] = {}

    def extract(ks):
        got = memo.get(ks)
        if got is not None:
            return got
        if space.holds(ks, goal):
            memo[ks] = EMPTY
            return EMPTY
        kind, action, branches = choice[ks]
        if kind == "ontic":
            plan = seq2(Act(action.name), extract(branches[0]))
        else:
            pairs = [
                (action.feedbacks[i], ks & space.models(action.feedbacks[i]))
                for i in problem.applicable_feedbacks(ks, action)
            ]
            compiled = [(phi, extract(b)) for phi, b in _else_first(pairs)]
            plan = seq2(Act(action.name), feedback_cascade(compiled))
        memo[ks] = plan
        return plan

    return Exists(extract(start))


def _action_moves(problem):
    moves = []
    for idx, a in enumerate(problem.ontic):
        moves.append((idx, "ontic", a))
    base = len(problem.ontic)
    for idx, a in enumerate(problem.epistemic):
        moves.append((base + idx, "epistemic", a))
    return moves


# -- epistemic-only existence ---------------------------------------------------


def optimistic_bound(space, ks: int, goal_sknnf) -> bool:
    """Can some nonempty subset of ks satisfy the goal?  Knowledge atoms
    may still become true if their body is consistent with ks; negated
    atoms can never become true again once false.  Sound to prune on,
    since joint realizability of the atoms is ignored."""

    def opt(phi):
        if isinstance(phi, F.KAtom):
            return ks & space.models(phi.obj) != 0
        if isinstance(phi, F.Not):  # SKNNF: directly before a K atom
            return not space._holds(ks, phi.operand)
        if isinstance(phi, F.And):
            return opt(phi.left) and opt(phi.right)
        if isinstance(phi, F.Or):
            return opt(phi.left) or opt(phi.right)
        if isinstance(phi, F.Top):
            return True
        return False

    return opt(goal_sknnf)


def solve_existence_epistemic(problem):
    """While-free existence when only epistemic actions are available:
    depth-first search over sensing trees of height at most the number of
    actions, never repeating an action on a branch."""
    problem.validate()
    if problem.ontic:
        raise ValidationError("this solver handles purely epistemic problems")
    return _epistemic_tree(problem, ordered=False)


def solve_wfoe(problem, order=None):
    """Ordered variant: along every branch, actions occur in the given
    total order (actions may be skipped, never reordered)."""
    problem.validate()
    if problem.ontic:
        raise ValidationError("ordered search handles purely epistemic problems")
    order = tuple(order) if order is not None else problem.order
    if order is None:
        raise ValidationError("an action order is required")
    declared = {a.name for a in problem.epistemic}
    if set(order) != declared or len(order) != len(declared):
        raise ValidationError("order must list every epistemic action exactly once")
    return _epistemic_tree(problem, ordered=True, order=order)


def _epistemic_tree(problem, ordered: bool, order=None):
    space = problem.space
    goal = problem.goal
    goal_n = problem.goal_sknnf
    if ordered:
        actions = [problem.find_action(n)[1] for n in order]
    else:
        actions = list(problem.epistemic)
    memo: dict = {}

    def solve(ks, key):
        # key: next usable index when ordered, else frozenset of used names
        got = memo.get((ks, key))
        if got is not None:
            return got[0]
        if space.holds(ks, goal):
            memo[(ks, key)] = (EMPTY,)
            return EMPTY
        if not optimistic_bound(space, ks, goal_n):
            memo[(ks, key)] = (None,)
            return None
        candidates = (
            range(key, len(actions))
            if ordered
            else [i for i in range(len(actions)) if actions[i].name not in key]
        )
        for i in candidates:
            action = actions[i]
            nxt_key = i + 1 if ordered else key | {action.name}
            pairs = []
            good = True
            for fi in problem.applicable_feedbacks(ks, action):
                branch = ks & space.models(action.feedbacks[fi])
                sub = solve(branch, nxt_key)
                if sub is None:
                    good = False
                    break
                pairs.append((action.feedbacks[fi], branch, sub))
            if good:
                by_key = {(phi, b): sub for phi, b, sub in pairs}
                compiled = [
                    (phi, by_key[(phi, b)])
                    for phi, b in _else_first([(phi, b) for phi, b, _ in pairs])
                ]
                plan = seq2(Act(action.name), feedback_cascade(compiled))
                memo[(ks, key)] = (plan,)
                return plan
        memo[(ks, key)] = (None,)
        return None

    start_key = 0 if ordered else frozenset()
    plan = solve(problem.initial_state, start_key)
    return Exists(plan) if plan is not None else NoPlan()


# -- epistemic actions with positive goals ----------------------------------------


def feedback_combination_check(problem, actions) -> bool:
    """Does executing the given epistemic actions (in any order) end in a
    goal-satisfying knowledge state under *every* feedback combination?

    This is the entailment view of sequence validity: the knowledge gained
    is one feedback per action, and for positive goals it suffices to
    check the maximal final states, which are exactly the nonempty
    intersections of one feedback model set per action.  A single
    knowledge state collecting all feedback disjunctions gives a sound
    quick accept."""
    space = problem.space
    goal = problem.goal
    union_all = problem.initial_state
    for a in actions:
        union_all &= space.models(F.disj(list(a.feedbacks)))
    if union_all and space.holds(union_all, goal):
        return True

    finals = {problem.initial_state}
    for a in actions:
        masks = [space.models(phi) for phi in a.feedbacks]
        finals = {ks & m for ks in finals for m in masks if ks & m}
    return all(space.holds(ks, goal) for ks in finals)


def solve_epistemic_positive(problem):
    """Existence for epistemic-only problems with positive goals: the
    all-actions sequence is valid iff any plan is."""
    problem.validate()
    if problem.ontic:
        raise ValidationError("this solver handles purely epistemic problems")
    if not F.is_positive(problem.goal_sknnf):
        raise ValidationError("this solver requires a positive goal")
    plan = seq(*[Act(a.name) for a in problem.epistemic])
    result = P.verify_plan(problem, plan)
    return Exists(plan) if isinstance(result, P.Valid) else NoPlan()


def solve_bounded_sequence(problem, k: int):
    """While-free bounded existence by sequence enumeration.  Applies to
    ontic-only problems (branching is pointless without feedback) and to
    epistemic-only problems with positive goals (branching and repetition
    never help, and order is irrelevant)."""
    problem.validate()
    if k < 0:
        raise ValueError("the size bound must be nonnegative")
    space = problem.space
    start = problem.initial_state

    if problem.ontic_only:
        if space.holds(start, problem.goal):
            return Exists(EMPTY)
        seen = {start: ()}
        frontier = [start]
        for _ in range(k):
            nxt = []
            for ks in frontier:
                for a in problem.ontic:
                    ks2 = problem.progress_ontic(ks, a)
                    if ks2 in seen:
                        continue
                    seen[ks2] = seen[ks] + (a.name,)
                    if space.holds(ks2, problem.goal):
                        return Exists(seq(*[Act(n) for n in seen[ks2]]))
                    nxt.append(ks2)
            frontier = nxt
        return NoPlan()

    if problem.epistemic_only and F.is_positive(problem.goal_sknnf):
        # positive goals: supersets of a valid action set stay valid, so
        # only subsets of one size need checking
        m = min(k, len(problem.epistemic))
        for combo in itertools.combinations(problem.epistemic, m):
            if feedback_combination_check(problem, combo):
                plan = seq(*[Act(a.name) for a in combo])
                check = P.verify_plan(problem, plan)
                if not isinstance(check, P.Valid):  # pragma: no cover - cross-check
                    raise AssertionError(
                        "combination check and trace verification disagree"
                    )
                return Exists(plan)
        return NoPlan()

    raise ValidationError(
        "sequence search requires an ontic-only problem, or an epistemic-only "
        "problem with a positive goal"
    )


# -- bounded existence over a condition vocabulary --------------------------------


def default_vocabulary(problem) -> tuple:
    """Knowledge atoms and their negation patterns for every literal, plus
    every feedback atom of every action."""
    out = []
    seen = set()

    def add(phi):
        if phi not in seen:
            seen.add(phi)
            out.append(phi)

    for v in problem.variables:
        pos, neg = KAtom(F.Var(v)), KAtom(F.Not(F.Var(v)))
        add(pos)
        add(neg)
        add(F.And(F.Not(pos), F.Not(neg)))
    for a in problem.epistemic:
        for phi in a.feedbacks:
            add(KAtom(phi))
    return tuple(out)


def solve_bounded(
    problem,
    k: int | None = None,
    vocabulary=None,
    vocab_complete=None,
    max_pops=DEFAULT_POP_BUDGET,
):
    """Size-bounded while-free existence, exact relative to the condition
    vocabulary.

    The search walks sets of knowledge states (all branches currently at
    the same program point).  Moves: execute an action (cost 1, epistemic
    actions fan the set out over applicable feedbacks), or split the set
    with a vocabulary condition, transform each part recursively, and
    rejoin (cost = condition size + both subplans).  Minimal costs come
    from a Dijkstra sweep per source set, memoized.  When no goal set is
    reachable within k, the answer is NoPlan if the vocabulary is known
    sufficient, otherwise Unknown."""
    problem.validate()
    if k is None:
        k = problem.bound
    if k is None:
        raise ValidationError("a size bound is required")
    if vocabulary is None:
        vocabulary = problem.vocabulary or default_vocabulary(problem)
    if vocab_complete is None:
        vocab_complete = problem.vocab_complete
    for phi in vocabulary:
        if not F.is_subjective(phi):
            raise ValidationError("vocabulary conditions must be purely subjective")

    space = problem.space
    goal = problem.goal
    moves = _action_moves(problem)
    conds = [(phi, formula_size(phi)) for phi in vocabulary]
    pops = [0]
    memo: dict = {}

    def transforms(src, cap):
        """Minimal plan cost per reachable branch-set from src, cost <= cap.
        Entries: target -> (cost, steps) with steps a tuple of plan units."""
        got = memo.get(src)
        if got is not None and got[0] >= cap:
            return {t: v for t, v in got[1].items() if v[0] <= cap}
        counter = itertools.count()
        dist = {src: (0, ())}
        heap = [(0, next(counter), src)]
        while heap:
            d, _, s = heapq.heappop(heap)
            if d > dist.get(s, (cap + 1,))[0]:
                continue
            pops[0] += 1
            if pops[0] > max_pops:
                raise BudgetError("bounded search exceeded its exploration budget")
            steps = dist[s][1]

            def relax(target, cost, new_steps):
                if cost <= cap and cost < dist.get(target, (cap + 1,))[0]:
                    dist[target] = (cost, new_steps)
                    heapq.heappush(heap, (cost, next(counter), target))

            for idx, kind, action, target in _set_moves(problem, moves, s):
                relax(target, d + 1, steps + (Act(action.name),))
            for phi, csize in conds:
                if d + csize >= cap:
                    continue
                st = frozenset(x for x in s if space.holds(x, phi))
                se = s - st
                if not st or not se:
                    continue
                inner_cap = cap - d - csize
                for t_target, (t_cost, t_steps) in transforms(st, inner_cap).items():
                    rem = inner_cap - t_cost
                    if rem < 0:
                        continue
                    for e_target, (e_cost, e_steps) in transforms(se, rem).items():
                        unit = P.If(phi, seq(*t_steps), seq(*e_steps))
                        relax(
                            t_target | e_target,
                            d + csize + t_cost + e_cost,
                            steps + (unit,),
                        )
        if got is None or cap > got[0]:
            memo[src] = (cap, dist)
        return dist

    start = frozenset({problem.initial_state})
    table = transforms(start, k)
    best = None
    for target, (cost, steps) in table.items():
        if all(space.holds(ks, goal) for ks in target):
            if best is None or cost < best[0]:
                best = (cost, steps)
    if best is not None:
        return Exists(seq(*best[1]))
    return NoPlan() if vocab_complete else Unknown(
        "no plan within the condition vocabulary and size bound"
    )


def _set_moves(problem, moves, s):
    space = problem.space
    ordered = sorted(s)
    for idx, kind, action in moves:
        if kind == "ontic":
            target = frozenset(problem.progress_ontic(ks, action) for ks in ordered)
        else:
            target = frozenset(
                ks & space.models(action.feedbacks[i])
                for ks in ordered
                for i in problem.applicable_feedbacks(ks, action)
            )
        yield idx, kind, action, target


# -- dispatch ---------------------------------------------------------------------


def auto_solve(problem, k=None, vocabulary=None, vocab_complete=None):
    """Pick a solver from the problem shape: an order means ordered
    epistemic search; a bound means the bounded solvers; otherwise the
    fragment-specific unbounded searches."""
    problem.validate()
    bound = k if k is not None else problem.bound
    if problem.order is not None and problem.epistemic_only:
        return solve_wfoe(problem)
    if bound is not None:
        if problem.ontic_only:
            return solve_bounded_sequence(problem, bound)
        if problem.epistemic_only and F.is_positive(problem.goal_sknnf):
            return solve_bounded_sequence(problem, bound)
        return solve_bounded(
            problem, bound, vocabulary=vocabulary, vocab_complete=vocab_complete
        )
    if problem.epistemic_only:
        if F.is_positive(problem.goal_sknnf):
            return solve_epistemic_positive(problem)
        return solve_existence_epistemic(problem)
    return solve_existence(problem)
