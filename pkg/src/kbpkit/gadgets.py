"""Two executable constructions around plan succinctness.

three_sat_family: a problem family whose programs read an encoded clause
set through sensing actions and either establish that no hidden assignment
can work, or build a satisfying assignment with setter actions.

problem_from_kbp: given a terminating program, build a planning problem
for which (an adaptation of) that program is valid and deviating plans
fail: readiness bits make out-of-turn sensing reveal a secret the goal
must keep unknown, reveal bits force each world-changing step to be chosen
with knowledge, and per-branch flags punish taking the wrong arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import formulas as F
from . import programs as P
from .actions import EpistemicAction, OnticAction, make_test_action
from .errors import NonTerminatingError, ShapeError
from .formulas import TRUE, And, Iff, Implies, KAtom, Not, Or, PVar, Var
from .problems import PlanningProblem
from .programs import EMPTY, Act, Empty, If, Seq, While, seq, seq2
from .reductions import ReductionOutput


# -- clause-reading family ------------------------------------------------------


def three_sat_family(nvars: int, nclauses: int):
    """(problem, program) for the clause-reading game with `nvars` hidden
    assignment bits and `nclauses` three-literal clauses.

    Each clause slot holds ceil(log2(2*nvars)) bits: value v < nvars means
    the positive literal on variable v+1, nvars <= v < 2*nvars the negated
    one, and anything larger a slot that satisfies its clause outright.
    The hidden 'satisfied' bit can only be true when the hidden assignment
    satisfies every encoded clause; the goal is to know it false or to
    know every clause satisfied."""
    if nvars < 1 or nclauses < 1:
        raise ValueError("need at least one variable and one clause")
    bits = max(1, math.ceil(math.log2(2 * nvars)))
    xs = [f"x{i}" for i in range(1, nvars + 1)]
    slot_bits = {
        (i, j): [f"l{i}_{j}_{k}" for k in range(1, bits + 1)]
        for i in range(1, nclauses + 1)
        for j in (1, 2, 3)
    }
    sat = "s"

    def slot_equals(i, j, value):
        return F.conj(
            [
                F.lit(name, bool((value >> k) & 1))
                for k, name in enumerate(slot_bits[i, j])
            ]
        )

    def slot_satisfied(i, j):
        cases = []
        for v in range(1 << bits):
            if v < nvars:
                cases.append(And(slot_equals(i, j, v), Var(xs[v])))
            elif v < 2 * nvars:
                cases.append(
                    And(slot_equals(i, j, v), Not(Var(xs[v - nvars])))
                )
            else:
                cases.append(slot_equals(i, j, v))  # tautological slot
        return F.disj(cases)

    clause_sat = {
        i: F.disj([slot_satisfied(i, j) for j in (1, 2, 3)])
        for i in range(1, nclauses + 1)
    }
    all_sat = F.conj([clause_sat[i] for i in range(1, nclauses + 1)])

    bit_names = [b for key in sorted(slot_bits) for b in slot_bits[key]]
    variables = tuple(xs + bit_names + [sat])
    init = F.conj(
        [Implies(Not(clause_sat[i]), Not(Var(sat))) for i in range(1, nclauses + 1)]
    )
    ontic = []
    for v in xs:
        others = [w for w in variables if w != v]
        ontic.append(OnticAction(f"set_{v}_1", And(PVar(v), F.frame_clause(others))))
        ontic.append(OnticAction(f"set_{v}_0", And(Not(PVar(v)), F.frame_clause(others))))
    epistemic = tuple(make_test_action(Var(b)) for b in bit_names)
    goal = Or(KAtom(Not(Var(sat))), KAtom(all_sat))
    problem = PlanningProblem(
        variables=variables,
        init=init,
        ontic=tuple(ontic),
        epistemic=epistemic,
        goal=goal,
        name=f"satfamily-{nvars}-{nclauses}",
    )

    assign = [
        If(KAtom(Not(And(all_sat, Var(v)))), Act(f"set_{v}_0"), Act(f"set_{v}_1"))
        for v in xs
    ]
    pi = seq(
        *[Act(a.name) for a in epistemic],
        If(KAtom(Not(Var(sat))), EMPTY, seq(*assign)),
    )
    return problem, pi


def encode_clause_bits(nvars: int, clauses) -> dict:
    """Variable assignment for the clause bits of three_sat_family.

    `clauses` is a list of 3-tuples of nonzero ints, DIMACS-style: v means
    the positive literal on x_v, -v the negated one."""
    bits = max(1, math.ceil(math.log2(2 * nvars)))
    out = {}
    for i, clause in enumerate(clauses, start=1):
        if len(clause) != 3:
            raise ValueError("clauses carry exactly three literal slots")
        for j, litv in enumerate(clause, start=1):
            value = (litv - 1) if litv > 0 else (nvars + (-litv) - 1)
            for k in range(1, bits + 1):
                out[f"l{i}_{j}_{k}"] = bool((value >> (k - 1)) & 1)
    return out


# -- problem whose valid plans mirror a given program -----------------------------

_FINISH = object()  # sentinel unit: the stop-setting final step


@dataclass
class _Ontic:
    occ: int
    names: tuple
    base_theory: object
    p_var: str | None = None  # must be chosen under K(p)/K(!p) when set
    arm: tuple | None = None  # (junction readiness, objective cond, f var | None)
    clears: tuple = ()
    sets: tuple = ()
    last: bool = False
    first: bool = False


@dataclass
class _Epi:
    occ: int
    name: str
    base_feedbacks: tuple
    r_var: str
    reveals: str | None = None


class _FromKbp:
    def __init__(self, base: PlanningProblem, pi, init, base_goal):
        self.base = base
        self.pi = pi
        self.init = init
        self.base_goal = base_goal
        self.taken = set(base.variables)
        self.used_names = {a.name for a in base.ontic} | {
            a.name for a in base.epistemic
        }
        self.ontics: list[_Ontic] = []
        self.epis: list[_Epi] = []
        self.f_vars: list[str] = []
        self.var_order: list[str] = []
        self.nocc = 0
        self.njunction = 0

    def fresh_var(self, base_name):
        name = base_name
        while name in self.taken:
            name += "_"
        self.taken.add(name)
        self.var_order.append(name)
        return name

    def fresh_name(self, base_name):
        name = base_name
        while name in self.used_names:
            name += "_"
        self.used_names.add(name)
        return name

    # structural pass: lists of steps; loops absorb their continuation

    def structure(self, units):
        out = []
        for idx, u in enumerate(units):
            if u is _FINISH:
                out.append(("finish",))
            elif isinstance(u, Act):
                kind, action = self.base.find_action(u.name)
                out.append(("act", kind, action))
            elif isinstance(u, If):
                out.append(
                    (
                        "branch",
                        _katom_body(u.cond),
                        self.structure(_flatten(u.then_branch)),
                        self.structure(_flatten(u.else_branch)),
                    )
                )
            elif isinstance(u, While):
                out.append(
                    (
                        "loop",
                        _katom_body(u.cond),
                        self.structure(_flatten(u.body)),
                        self.structure(list(units[idx + 1 :])),
                    )
                )
                return out
            else:
                raise ShapeError(f"unexpected program node {u!r}")
        return out

    # padding: world-changing and sensing steps alternate, chains start
    # and end with a world-changing step, branch/loop openers follow one

    def _pad(self, steps):
        void_ontic = ("act", "ontic", None)
        void_epi = ("act", "epistemic", None)
        out = []
        prev = None
        for step in steps:
            if step[0] in ("act", "finish"):
                kind = "ontic" if step[0] == "finish" else step[1]
                if kind == "ontic" and prev == "ontic":
                    out.append(void_epi)
                elif kind == "epistemic" and prev in (None, "epistemic"):
                    out.append(void_ontic)
                out.append(step)
                prev = kind
            else:
                if prev in (None, "epistemic"):
                    out.append(void_ontic)
                out.append(step)
                prev = "ontic"  # arms end with world-changing steps
        if prev is None:
            out.append(void_ontic)
            prev = "ontic"
        elif prev == "epistemic":
            out.append(void_ontic)
        return out

    # emission: track the pending world-changing occurrences that must set
    # the next readiness bit, and the sensing occurrence that reveals the
    # next world-changing step's choice bit

    def emit_chain(self, steps, arm_info):
        pending: list[_Ontic] = []
        prev_epi: _Epi | None = None
        plan_parts = []
        first = True
        for step in self._pad(steps):
            if step[0] == "finish" or (step[0] == "act" and step[1] == "ontic"):
                action = None if step[0] == "finish" else step[2]
                occ = self._emit_ontic(action, prev_epi, arm_info if first else None)
                if step[0] == "finish":
                    occ.last = True
                plan_parts.append(self._plan_of(occ))
                pending = [occ]
                prev_epi = None
            elif step[0] == "act":
                epi = self._emit_epi(step[2], pending)
                plan_parts.append(Act(epi.name))
                pending = []
                prev_epi = epi
            elif step[0] == "branch":
                _, phi, then_steps, else_steps = step
                r_j, f_j = self._new_junction()
                for occ in pending:
                    occ.sets += (r_j,)
                t_exits, t_plan = self.emit_chain(then_steps, (r_j, phi, None))
                e_exits, e_plan = self.emit_chain(else_steps, (r_j, phi, f_j))
                plan_parts.append(If(KAtom(phi), t_plan, e_plan))
                pending = t_exits + e_exits
                prev_epi = None
            else:  # loop: the else side is the whole continuation
                _, phi, body_steps, cont_steps = step
                r_j, f_j = self._new_junction()
                for occ in pending:
                    occ.sets += (r_j,)
                b_exits, b_plan = self.emit_chain(body_steps, (r_j, phi, None))
                for occ in b_exits:
                    occ.sets += (r_j,)  # loop back to the same junction
                c_exits, c_plan = self.emit_chain(cont_steps, (r_j, phi, f_j))
                plan_parts.append(seq2(While(KAtom(phi), b_plan), c_plan))
                return c_exits, seq(*plan_parts)
            first = False
        return pending, seq(*plan_parts)

    def _new_junction(self):
        self.njunction += 1
        r_j = self.fresh_var(f"rj{self.njunction}")
        f_j = self.fresh_var(f"f{self.njunction}")
        self.f_vars.append(f_j)
        return r_j, f_j

    def _emit_ontic(self, action, prev_epi, arm_info):
        self.nocc += 1
        stem = f"{action.name if action is not None else 'noop'}_{self.nocc}"
        occ = _Ontic(
            occ=self.nocc,
            names=(),
            base_theory=(
                action.theory
                if action is not None
                else F.frame_clause(self.base.variables)
            ),
            first=not self.ontics and not self.epis,
        )
        if prev_epi is not None:
            occ.p_var = self.fresh_var(f"p{occ.occ}")
            prev_epi.reveals = occ.p_var
            occ.clears += (prev_epi.r_var,)
        if arm_info is not None:
            occ.arm = arm_info
            occ.clears += (arm_info[0],)
        if occ.first:
            occ.clears += (self.start_var,)
        if occ.p_var is None:
            occ.names = (self.fresh_name(stem),)
        else:
            occ.names = (self.fresh_name(f"{stem}_p"), self.fresh_name(f"{stem}_np"))
        self.ontics.append(occ)
        return occ

    def _emit_epi(self, action, pending):
        self.nocc += 1
        epi = _Epi(
            occ=self.nocc,
            name=self.fresh_name(
                f"{action.name if action is not None else 'sense'}_{self.nocc}"
            ),
            base_feedbacks=(action.feedbacks if action is not None else (TRUE,)),
            r_var=self.fresh_var(f"r{self.nocc}"),
        )
        for occ in pending:
            occ.sets += (epi.r_var,)
        self.epis.append(epi)
        return epi

    def _plan_of(self, occ):
        if occ.p_var is None:
            return Act(occ.names[0])
        return If(KAtom(Var(occ.p_var)), Act(occ.names[0]), Act(occ.names[1]))

    def build(self) -> ReductionOutput:
        ok = self.fresh_var("ok")
        secret = self.fresh_var("s")
        stop = self.fresh_var("stop")
        self.start_var = self.fresh_var("r0")

        steps = self.structure(_flatten(self.pi) + [_FINISH])
        exits, plan = self.emit_chain(steps, None)
        del exits  # the finisher ends every path

        guard_vars = [self.start_var] + [e.r_var for e in self.epis]
        junction_rs = []
        for occ in self.ontics:
            if occ.arm is not None and occ.arm[0] not in junction_rs:
                junction_rs.append(occ.arm[0])
        all_guards = guard_vars + junction_rs
        p_vars = [o.p_var for o in self.ontics if o.p_var]
        gadget_vars = [ok, secret, stop] + all_guards + p_vars + self.f_vars

        ontic_actions = []
        for occ in self.ontics:
            for name, ok_clause in zip(occ.names, _ok_clauses(occ, ok, stop)):
                touched = {ok} | set(occ.clears) | set(occ.sets)
                updates = [ok_clause]
                # a loop-body head clears the junction bit it also re-sets;
                # setting wins, since the path returns to that junction
                updates += [Not(PVar(r)) for r in occ.clears if r not in occ.sets]
                updates += [PVar(r) for r in dict.fromkeys(occ.sets)]
                if occ.last:
                    updates.append(PVar(stop))
                    touched.add(stop)
                if occ.p_var is not None:
                    touched.add(occ.p_var)  # reinitialized: left unconstrained
                if occ.arm is not None and occ.arm[2] is not None:
                    f_j = occ.arm[2]
                    updates.append(Iff(PVar(f_j), Or(Var(f_j), occ.arm[1])))
                    touched.add(f_j)
                frame = [v for v in gadget_vars if v not in touched]
                theory = And(
                    occ.base_theory, F.conj(updates + [F.frame_clause(frame)])
                )
                ontic_actions.append(OnticAction(name, theory))

        epi_actions = []
        for epi in self.epis:
            if epi.reveals is None:
                raise AssertionError("every sensing step is followed by a step to choose")
            poison = F.disj(
                [Var(r) for r in all_guards if r != epi.r_var] + [Var(stop)]
            )
            fbs = []
            for phi in epi.base_feedbacks:
                for reveal in (
                    Implies(Var(epi.r_var), Var(epi.reveals)),
                    Implies(Var(epi.r_var), Not(Var(epi.reveals))),
                    Not(Var(epi.r_var)),
                ):
                    for leak in (
                        Implies(poison, Var(secret)),
                        Implies(poison, Not(Var(secret))),
                    ):
                        fbs.append(And(phi, And(reveal, leak)))
            epi_actions.append(EpistemicAction(epi.name, tuple(fbs)))

        init = F.conj([self.init, Var(ok), Not(Var(stop)), Var(self.start_var)])
        goal = F.to_sknnf(
            F.conj(
                [
                    self.base_goal,
                    KAtom(Var(ok)),
                    KAtom(Var(stop)),
                    Not(KAtom(Var(secret))),
                    Not(KAtom(Not(Var(secret)))),
                ]
                + [Not(KAtom(Var(f))) for f in self.f_vars]
            )
        )
        problem = PlanningProblem(
            variables=tuple(self.base.variables) + tuple(self.var_order),
            init=init,
            ontic=tuple(ontic_actions),
            epistemic=tuple(epi_actions),
            goal=goal,
            name="fromkbp",
        )
        note = (
            "fromkbp gadget: valid plans must mirror the source program "
            "(up to inert steps and bookkeeping variables)"
        )
        return ReductionOutput(problem, note, solver="verify", plan=plan)


def _katom_body(cond):
    if not isinstance(cond, F.KAtom):
        raise ShapeError(
            "this construction handles branching conditions that are single "
            "knowledge atoms"
        )
    return cond.obj


def _ok_clauses(occ: _Ontic, ok: str, stop: str):
    """ok survives an action only in states where taking it was legitimate:
    never after stop, only with the junction readiness (and a true branch
    condition) on arm heads, and only matching the revealed choice bit."""
    legit = [Var(ok), Not(Var(stop))]
    if occ.arm is not None:
        r_j, phi, f_j = occ.arm
        legit.append(Var(r_j))
        if f_j is None:  # taking the arm that requires the condition
            legit.append(phi)
    if occ.p_var is None:
        return (Iff(PVar(ok), F.conj(legit)),)
    return (
        Iff(PVar(ok), F.conj(legit + [Var(occ.p_var)])),
        Iff(PVar(ok), F.conj(legit + [Not(Var(occ.p_var))])),
    )


def _flatten(pi):
    out = []
    stack = [pi]
    while stack:
        node = stack.pop()
        if isinstance(node, Empty):
            continue
        if isinstance(node, Seq):
            stack.append(node.rest)
            stack.append(node.first)
        else:
            out.append(node)
    return out


def problem_from_kbp(base: PlanningProblem, pi, init=None, base_goal=None) -> ReductionOutput:
    """Planning problem for which the given (terminating) program, adapted
    with choice-bit branches around each world-changing step, is valid,
    while single-step deviations break a bookkeeping goal.  Returns the
    problem together with the adapted plan."""
    base.validate()
    init = base.init if init is None else init
    base_goal = TRUE if base_goal is None else base_goal
    probe = P.enumerate_traces(base, pi, start=base.space.models(init))
    if isinstance(probe, P.InfiniteWitness):
        raise NonTerminatingError(
            "the source program must terminate", prefix=probe.prefix
        )
    builder = _FromKbp(base, pi, init, base_goal)
    return builder.build()


def single_edit_mutants(plan, problem, rng, count: int):
    """`count` single-edit variants of a plan: one action occurrence either
    dropped or swapped for another declared action."""
    slots = _act_paths(plan)
    names = sorted(
        [a.name for a in problem.ontic] + [a.name for a in problem.epistemic]
    )
    out = []
    for _ in range(count):
        path, current = slots[rng.randrange(len(slots))]
        if rng.random() < 0.5:
            replacement = EMPTY
        else:
            choices = [n for n in names if n != current]
            replacement = Act(choices[rng.randrange(len(choices))])
        out.append(_replace_at(plan, path, replacement))
    return out


def _act_paths(pi, prefix=()):
    if isinstance(pi, Act):
        return [(prefix, pi.name)]
    if isinstance(pi, Seq):
        return _act_paths(pi.first, prefix + ("first",)) + _act_paths(
            pi.rest, prefix + ("rest",)
        )
    if isinstance(pi, If):
        return _act_paths(pi.then_branch, prefix + ("then_branch",)) + _act_paths(
            pi.else_branch, prefix + ("else_branch",)
        )
    if isinstance(pi, While):
        return _act_paths(pi.body, prefix + ("body",))
    return []


def _replace_at(pi, path, replacement):
    if not path:
        return replacement
    head, rest = path[0], path[1:]
    kwargs = {f.name: getattr(pi, f.name) for f in pi.__dataclass_fields__.values()}
    kwargs[head] = _replace_at(getattr(pi, head), rest, replacement)
    return type(pi)(**kwargs)
