"""Formula ASTs and structural operations.

One node set covers both levels of the logic: objective formulas (over
state variables, plus primed next-state variables inside action theories)
and subjective formulas (boolean combinations of knowledge atoms).  Which
fragment a formula belongs to is a structural property checked by the
predicates below, not a type distinction.

All nodes are frozen dataclasses, so formulas are immutable, hashable and
compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FormulaError


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PVar:
    """Primed (next-state) variable; only legal inside ontic theories."""

    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    operand: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class Iff:
    left: object
    right: object


@dataclass(frozen=True)
class KAtom:
    """Knowledge atom K(phi) over an objective formula phi."""

    obj: object


TRUE = Top()
FALSE = Bottom()

Formula = object  # informal alias used in signatures

_BINARY = (And, Or, Implies, Iff)


def conj(parts) -> Formula:
    """Right-associated conjunction; TRUE for the empty sequence."""
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def lit(name: str, positive: bool = True) -> Formula:
    v = Var(name)
    return v if positive else Not(v)


def frame_clause(names) -> Formula:
    """Conjunction of (x' <-> x) for the given variables: the expansion of
    the frame(...) theory sugar."""
    return conj([Iff(PVar(n), Var(n)) for n in names])


def walk(phi):
    """Yield every node of the formula tree, preorder."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, _BINARY):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, KAtom):
            stack.append(node.obj)


def vars_of(phi) -> set[str]:
    """Names of all variables occurring in phi, primed or not."""
    return {n.name for n in walk(phi) if isinstance(n, (Var, PVar))}


def has_primed(phi) -> bool:
    return any(isinstance(n, PVar) for n in walk(phi))


def is_objective(phi) -> bool:
    """No knowledge atom anywhere."""
    return not any(isinstance(n, KAtom) for n in walk(phi))


def is_subjective(phi) -> bool:
    """Purely subjective: every variable occurrence sits inside a K atom,
    and K atoms are not nested."""

    def ok(node):
        if isinstance(node, (Top, Bottom)):
            return True
        if isinstance(node, KAtom):
            return is_objective(node.obj) and not has_primed(node.obj)
        if isinstance(node, Not):
            return ok(node.operand)
        if isinstance(node, _BINARY):
            return ok(node.left) and ok(node.right)
        return False  # bare Var/PVar at the subjective level

    return ok(phi)


def is_sknnf(phi) -> bool:
    """Subjective formula where negation appears only directly before a K
    atom (or inside objective subformulas), and the only connectives at
    the subjective level are conjunction and disjunction."""

    def ok(node):
        if isinstance(node, (Top, Bottom, KAtom)):
            return not isinstance(node, KAtom) or is_objective(node.obj)
        if isinstance(node, Not):
            return isinstance(node.operand, KAtom)
        if isinstance(node, (And, Or)):
            return ok(node.left) and ok(node.right)
        return False

    return is_subjective(phi) and ok(phi)


def is_positive(phi) -> bool:
    """True when an SKNNF formula never negates a K atom.  Negations
    inside the objective bodies of K atoms are irrelevant."""
    if not is_sknnf(phi):
        raise FormulaError("is_positive expects an SKNNF formula")

    def scan(node):
        if isinstance(node, Not):
            return False
        if isinstance(node, (And, Or)):
            return scan(node.left) and scan(node.right)
        return True

    return scan(phi)


def to_sknnf(phi) -> Formula:
    """Rewrite a purely subjective formula into SKNNF: expand -> and <->
    at the subjective level, then push negations down onto K atoms.
    Objective subformulas pass through untouched.  Satisfaction is
    preserved for every knowledge state."""
    if not is_subjective(phi):
        raise FormulaError("to_sknnf expects a purely subjective formula")

    def push(node, negated):
        if isinstance(node, Top):
            # there is no subjective falsum node; K(false) is false in
            # every (nonempty) knowledge state
            return KAtom(FALSE) if negated else TRUE
        if isinstance(node, Bottom):
            return TRUE if negated else KAtom(FALSE)
        if isinstance(node, KAtom):
            return Not(node) if negated else node
        if isinstance(node, Not):
            return push(node.operand, not negated)
        if isinstance(node, And):
            a, b = push(node.left, negated), push(node.right, negated)
            return Or(a, b) if negated else And(a, b)
        if isinstance(node, Or):
            a, b = push(node.left, negated), push(node.right, negated)
            return And(a, b) if negated else Or(a, b)
        if isinstance(node, Implies):
            if negated:
                return And(push(node.left, False), push(node.right, True))
            return Or(push(node.left, True), push(node.right, False))
        if isinstance(node, Iff):
            if negated:
                return Or(
                    And(push(node.left, False), push(node.right, True)),
                    And(push(node.left, True), push(node.right, False)),
                )
            return Or(
                And(push(node.left, False), push(node.right, False)),
                And(push(node.left, True), push(node.right, True)),
            )
        raise FormulaError(f"unexpected node in subjective formula: {node!r}")

    return push(phi, False)


def formula_size(phi) -> int:
    """Occurrences of variables, connectives and the K modality.  The
    constants true/false count 1, parentheses count 0."""
    size = 0
    for node in walk(phi):
        if isinstance(node, (Var, PVar, Top, Bottom, Not, KAtom, *_BINARY)):
            size += 1
    return size


def subst_primed(phi, name: str, value: bool) -> Formula:
    """Replace the primed variable `name'` by a constant."""
    if isinstance(phi, PVar):
        if phi.name == name:
            return TRUE if value else FALSE
        return phi
    if isinstance(phi, Not):
        return Not(subst_primed(phi.operand, name, value))
    if isinstance(phi, _BINARY):
        return type(phi)(
            subst_primed(phi.left, name, value),
            subst_primed(phi.right, name, value),
        )
    return phi


def strip_primes(phi) -> Formula:
    """Re-read every primed variable as the plain one (used when an action
    image over next-state variables is reinterpreted as a state set)."""
    if isinstance(phi, PVar):
        return Var(phi.name)
    if isinstance(phi, Not):
        return Not(strip_primes(phi.operand))
    if isinstance(phi, _BINARY):
        return type(phi)(strip_primes(phi.left), strip_primes(phi.right))
    return phi
