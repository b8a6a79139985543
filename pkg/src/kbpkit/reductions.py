"""Hardness-gadget problem generators driven by a QBF oracle.

Each generator turns a quantified Boolean formula of a specific prefix
shape into a planning problem whose plan-existence answer (under the
designated solver) equals the truth of the formula.  The emitted
certificate comment records the reduction kind and the iff condition, so
every generated file is self-describing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formulas as F
from . import qbf as Q
from .actions import EpistemicAction, OnticAction, make_test_action
from .errors import ShapeError
from .formulas import FALSE, TRUE, And, Iff, Implies, KAtom, Not, Or, Var
from .problems import PlanningProblem


@dataclass
class ReductionOutput:
    problem: PlanningProblem
    note: str  # certificate text for the emitted file
    solver: str  # designated solve mode
    plan: object = field(default=None)  # witness/adapted plan when the
    # construction produces one


def _merge_blocks(psi: Q.Qbf) -> list:
    out = []
    for q, names in psi.blocks:
        if out and out[-1][0] == q:
            out[-1] = (q, out[-1][1] + tuple(names))
        else:
            out.append((q, tuple(names)))
    return out


def _inline(psi: Q.Qbf) -> str:
    from .syntax import format_formula

    prefix = " ".join(f"{q} {' '.join(names)}." for q, names in psi.blocks)
    return f"{prefix} {format_formula(psi.matrix)}"


def nnf_objective(phi):
    """Negation normal form of an objective formula (negations on
    variables only, implications and biconditionals expanded)."""

    def push(node, neg):
        if isinstance(node, F.Var):
            return Not(node) if neg else node
        if isinstance(node, F.Top):
            return FALSE if neg else TRUE
        if isinstance(node, F.Bottom):
            return TRUE if neg else FALSE
        if isinstance(node, F.Not):
            return push(node.operand, not neg)
        if isinstance(node, F.And):
            a, b = push(node.left, neg), push(node.right, neg)
            return Or(a, b) if neg else And(a, b)
        if isinstance(node, F.Or):
            a, b = push(node.left, neg), push(node.right, neg)
            return And(a, b) if neg else Or(a, b)
        if isinstance(node, F.Implies):
            if neg:
                return And(push(node.left, False), push(node.right, True))
            return Or(push(node.left, True), push(node.right, False))
        if isinstance(node, F.Iff):
            if neg:
                return Or(
                    And(push(node.left, False), push(node.right, True)),
                    And(push(node.left, True), push(node.right, False)),
                )
            return Or(
                And(push(node.left, False), push(node.right, False)),
                And(push(node.left, True), push(node.right, True)),
            )
        raise ShapeError(f"not an objective formula node: {node!r}")

    return push(phi, False)


# -- epistemic-only existence from a forall/exists formula ---------------------


def reduce_qbf2_epistemic(psi: Q.Qbf) -> ReductionOutput:
    """Sensing actions for the universal variables only; the goal demands
    knowing each of them while still considering the matrix possible.  A
    plan exists iff the formula is true."""
    Q.check(psi)
    blocks = _merge_blocks(psi)
    if not (
        len(blocks) in (1, 2)
        and blocks[0][0] == "forall"
        and (len(blocks) == 1 or blocks[1][0] == "exists")
    ):
        raise ShapeError("expected a forall [exists] prefix")
    a_vars = blocks[0][1]
    variables = tuple(Q.all_vars(psi))
    goal = And(
        Not(KAtom(Not(psi.matrix))),
        F.conj([Or(KAtom(Var(a)), KAtom(Not(Var(a)))) for a in a_vars]),
    )
    problem = PlanningProblem(
        variables=variables,
        init=TRUE,
        epistemic=tuple(make_test_action(Var(a)) for a in a_vars),
        goal=goal,
        name="qbf2e",
    )
    note = (
        f"qbf2e reduction of: {_inline(psi)}\n"
        "a valid plan exists iff the formula is true"
    )
    return ReductionOutput(problem, note, solver="epistemic")


# -- positive-goal existence from unsatisfiability ------------------------------


def reduce_unsat_positive(phi) -> ReductionOutput:
    """No actions; the goal is to know the negation of the input.  A plan
    (the empty one) exists iff the input formula is unsatisfiable."""
    if not F.is_objective(phi) or F.has_primed(phi):
        raise ShapeError("expected an unprimed objective formula")
    variables = tuple(sorted(F.vars_of(phi))) or ("x0",)
    problem = PlanningProblem(
        variables=variables,
        init=TRUE,
        goal=KAtom(Not(phi)),
        name="unsat",
    )
    from .syntax import format_formula

    note = (
        f"unsat reduction of: {format_formula(phi)}\n"
        "a valid plan exists iff the formula is unsatisfiable"
    )
    return ReductionOutput(problem, note, solver="positive")


# -- ordered epistemic existence from an alternating formula --------------------


def reduce_qbf_wfoe(psi: Q.Qbf) -> ReductionOutput:
    """Existential choices become 'reveal x_i or not'; universal values are
    sensed from y_i.  With the emitted total order on the sensing actions,
    an order-respecting plan exists iff the formula is true."""
    padded = Q.pad_alternation(psi)
    singles = [(q, names[0]) for q, names in padded.blocks]
    e_vars = [v for q, v in singles if q == "exists"]
    u_vars = [v for q, v in singles if q == "forall"]
    if len(e_vars) != len(u_vars):
        raise ShapeError("padding failed to balance the prefix")
    k = len(e_vars)
    xs = [f"x{i}" for i in range(1, k + 1)]
    ys = [f"y{i}" for i in range(1, k + 1)]
    x_of = dict(zip(e_vars, xs))
    y_of = dict(zip(u_vars, ys))

    def substitute(node):
        if isinstance(node, F.Var):
            if node.name in x_of:
                x = Var(x_of[node.name])
                return Or(KAtom(x), KAtom(Not(x)))
            return KAtom(Var(y_of[node.name]))
        if isinstance(node, F.Not):  # NNF: negation sits on a variable
            v = node.operand.name
            if v in x_of:
                x = Var(x_of[v])
                return And(Not(KAtom(x)), Not(KAtom(Not(x))))
            return KAtom(Not(Var(y_of[v])))
        if isinstance(node, (F.And, F.Or)):
            return type(node)(substitute(node.left), substitute(node.right))
        if isinstance(node, (F.Top, F.Bottom)):
            return TRUE if isinstance(node, F.Top) else KAtom(FALSE)
        raise ShapeError(f"unexpected node after NNF: {node!r}")

    goal = substitute(nnf_objective(padded.matrix))
    order = []
    for i in range(k):
        order.append(f"test_x{i + 1}")
        order.append(f"test_y{i + 1}")
    problem = PlanningProblem(
        variables=tuple(xs + ys),
        init=TRUE,
        epistemic=tuple(
            make_test_action(Var(v)) for pair in zip(xs, ys) for v in pair
        ),
        goal=goal,
        order=tuple(order),
        name="wfoe",
    )
    note = (
        f"wfoe reduction of: {_inline(psi)}\n"
        "an order-respecting plan exists iff the formula is true"
    )
    return ReductionOutput(problem, note, solver="wfoe")


# -- dropping the order: duplicated actions with mutexes -------------------------


def reduce_wfoe_wfe(red: ReductionOutput) -> ReductionOutput:
    """Compile the order away: each action splits into take/pass variants
    whose feedbacks additionally reveal a fresh chaining bit, and the goal
    forces every action slot to be resolved in order while mutex bits
    forbid using two variants of the same slot."""
    src = red.problem
    if src.ontic or src.order is None:
        raise ShapeError("expected an epistemic-only problem with an order")
    src.validate()
    taken = set(src.variables)

    def fresh(base):
        name = base
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    ordered = [src.find_action(n)[1] for n in src.order]
    n = len(ordered)
    p_var, n_var, mu = [], [], []
    actions = []
    for i, a in enumerate(ordered, start=1):
        p_var.append(fresh(f"p{i}"))
        n_var.append(fresh(f"n{i}"))
        mus = {tag: fresh(f"mu{i}_{tag}") for tag in ("p", "n", "sp", "sn")}
        mu.append(mus)

        def variants(extra_var, mu_tag, with_base):
            out = []
            base_list = a.feedbacks if with_base else (None,)
            for phi in base_list:
                for delta in (True, False):
                    for eps in (True, False):
                        parts = And(
                            F.lit(extra_var, delta), F.lit(mus[mu_tag], eps)
                        )
                        out.append(parts if phi is None else And(phi, parts))
            return tuple(out)

        actions.append(EpistemicAction(f"{a.name}_p", variants(p_var[-1], "p", True)))
        actions.append(EpistemicAction(f"{a.name}_n", variants(n_var[-1], "n", True)))
        actions.append(
            EpistemicAction(f"{a.name}_pass_p", variants(p_var[-1], "sp", False))
        )
        actions.append(
            EpistemicAction(f"{a.name}_pass_n", variants(n_var[-1], "sn", False))
        )

    def katom(name, positive=True):
        return KAtom(F.lit(name, positive))

    chain = []
    for i in range(1, n):
        chain.append(
            Implies(
                Or(katom(p_var[i - 1]), katom(n_var[i - 1], False)),
                Or(katom(p_var[i]), katom(p_var[i], False)),
            )
        )
    for i in range(1, n):
        chain.append(
            Implies(
                Or(katom(p_var[i - 1], False), katom(n_var[i - 1])),
                Or(katom(n_var[i]), katom(n_var[i], False)),
            )
        )
    # at most one variant of each slot may ever be taken: two mutex bits of
    # the same slot must never be simultaneously known
    mutex = []
    tags = ("p", "n", "sp", "sn")
    for i in range(n):
        for x in range(len(tags)):
            for y in range(x + 1, len(tags)):
                mutex.append(
                    Or(
                        Not(KAtom(Var(mu[i][tags[x]]))),
                        Not(KAtom(Var(mu[i][tags[y]]))),
                    )
                )
    goal = F.to_sknnf(F.conj([src.goal] + chain + mutex))

    new_vars = list(src.variables)
    for i in range(n):
        new_vars += [p_var[i], n_var[i]] + [mu[i][t] for t in tags]
    problem = PlanningProblem(
        variables=tuple(new_vars),
        init=src.init,
        epistemic=tuple(actions),
        goal=goal,
        name="wfoe2wfe",
    )
    note = (
        red.note.splitlines()[0].replace("wfoe reduction", "wfoe2wfe reduction")
        + "\nan (unordered) plan exists iff one exists for the ordered source"
    )
    return ReductionOutput(problem, note, solver="epistemic")


# -- bounded existence from an exists/forall/exists formula ----------------------


def reduce_qbf3_bounded(psi: Q.Qbf) -> ReductionOutput:
    """Setters for the outer existential block scramble the universal
    variables as a side effect; sensing compares each a with its b.  The
    bound admits exactly the intended plan: set every a, sense every pair,
    then decide each inner variable under the emitted conditions."""
    padded = Q.pad_equal_outer(psi)
    a_vars = list(padded.blocks[0][1])
    b_vars = list(padded.blocks[1][1])
    c_vars = list(padded.blocks[2][1])
    matrix = padded.matrix
    n, q = len(a_vars), len(c_vars)

    ontic = []
    for a in a_vars:
        keep = [v for v in a_vars if v != a] + c_vars  # b's get scrambled
        for val, tag in ((True, "1"), (False, "0")):
            theory = And(
                F.PVar(a) if val else Not(F.PVar(a)), F.frame_clause(keep)
            )
            ontic.append(OnticAction(f"set_{a}_{tag}", theory))
    for c in c_vars:
        keep = [v for v in a_vars + b_vars + c_vars if v != c]
        for val, tag in ((True, "1"), (False, "0")):
            theory = And(
                F.PVar(c) if val else Not(F.PVar(c)), F.frame_clause(keep)
            )
            ontic.append(OnticAction(f"set_{c}_{tag}", theory))

    epistemic = tuple(
        make_test_action(Iff(Var(a), Var(b)), name=f"test_{a}_{b}")
        for a, b in zip(a_vars, b_vars)
    )
    goal = And(
        KAtom(matrix),
        F.conj([Or(KAtom(Var(b)), KAtom(Not(Var(b)))) for b in b_vars]),
    )
    msize = F.formula_size(matrix)
    # condition size |phi|+3 plus the two setter occurrences per inner var
    bound = 2 * n + (msize + 3) * q + 2 * q
    vocabulary = tuple(KAtom(Implies(matrix, Var(c))) for c in c_vars)
    problem = PlanningProblem(
        variables=tuple(a_vars + b_vars + c_vars),
        init=TRUE,
        ontic=tuple(ontic),
        epistemic=epistemic,
        goal=goal,
        bound=bound,
        vocabulary=vocabulary,
        vocab_complete=True,
        name="qbf3b",
    )
    note = (
        f"qbf3b reduction of: {_inline(psi)}\n"
        f"a plan of size <= {bound} exists iff the formula is true\n"
        "the emitted vocabulary is sufficient: false instances admit no plan at all"
    )
    return ReductionOutput(problem, note, solver="bounded")


# -- bounded positive-goal existence from an exists/forall formula ----------------


def reduce_qbf2_bounded_pos(psi: Q.Qbf) -> ReductionOutput:
    """Each existential variable gets a pair of four-feedback probes; the
    positive goal requires learning one marker bit per variable, which
    costs the whole budget, and consistency of the claimed values with the
    matrix whenever the guard bit stays unknown."""
    Q.check(psi)
    blocks = _merge_blocks(psi)
    if len(blocks) != 2 or blocks[0][0] != "exists" or blocks[1][0] != "forall":
        raise ShapeError("expected an exists forall prefix")
    a_vars = list(blocks[0][1])
    b_vars = list(blocks[1][1])
    taken = set(a_vars + b_vars)

    def fresh(base):
        name = base
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    guard = fresh("c")
    d_of = {a: fresh(f"d_{a}") for a in a_vars}
    c = Var(guard)

    def probe(name, a, positive):
        body = Var(a) if positive else Not(Var(a))
        d = Var(d_of[a])
        return EpistemicAction(
            name,
            (
                And(Implies(c, body), d),
                And(Implies(c, body), Not(d)),
                And(c, And(_negated(body), d)),
                And(c, And(_negated(body), Not(d))),
            ),
        )

    actions = []
    for a in a_vars:
        actions.append(probe(f"alpha_{a}", a, True))
        actions.append(probe(f"beta_{a}", a, False))
    goal = And(
        F.conj(
            [Or(KAtom(Var(d_of[a])), KAtom(Not(Var(d_of[a])))) for a in a_vars]
        ),
        Or(KAtom(c), KAtom(Implies(c, psi.matrix))),
    )
    problem = PlanningProblem(
        variables=tuple(a_vars + b_vars + [guard] + [d_of[a] for a in a_vars]),
        init=TRUE,
        epistemic=tuple(actions),
        goal=goal,
        bound=len(a_vars),
        vocab_complete=True,
        name="qbf2bpos",
    )
    note = (
        f"qbf2bpos reduction of: {_inline(psi)}\n"
        f"a plan of size <= {len(a_vars)} exists iff the formula is true"
    )
    return ReductionOutput(problem, note, solver="bounded")


def _negated(body):
    return body.operand if isinstance(body, Not) else Not(body)
