"""Ontic and epistemic actions: validation and progression.

An ontic action carries a transition theory over current and primed
variables; unmentioned primed variables are unconstrained (use the
frame(...) sugar, or `formulas.frame_clause`, when inertia is wanted).
An epistemic action carries an ordered list of feedback formulas, whose
disjunction must be a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formulas as F
from .errors import FormulaError, ValidationError
from .semantics import StateSpace

PAIR_SPACE_LIMIT = 24  # max 2*nvars for the coupled-theory fallback


@dataclass(frozen=True)
class OnticAction:
    name: str
    theory: object  # objective formula over X and X'


@dataclass(frozen=True)
class EpistemicAction:
    name: str
    feedbacks: tuple  # ordered objective formulas, implicitly K(phi_i)


def make_test_action(phi, name: str | None = None) -> EpistemicAction:
    """Two-feedback sensing action (phi ; !phi)."""
    if F.has_primed(phi):
        raise FormulaError("test feedback must be unprimed")
    if name is None:
        if isinstance(phi, F.Var):
            name = f"test_{phi.name}"
        else:
            raise ValueError("a name is required for non-variable tests")
    return EpistemicAction(name, (phi, F.Not(phi)))


class TheoryEngine:
    """Successor computation for one transition theory on one space.

    The theory is split into conjuncts.  When every conjunct mentions at
    most one primed variable, successors factorize per variable: a
    conjunct with no primed variable is a guard on the current state, and
    a conjunct mentioning only x' restricts the allowed next value of x.
    Theories coupling several primed variables in one conjunct fall back
    to enumeration over the doubled (state, successor) space.
    """

    def __init__(self, space: StateSpace, theory):
        self.space = space
        self.theory = theory
        n = space.nvars
        conjuncts = _flatten_and(theory)
        guards = []
        per_var: dict[str, list] = {}
        coupled = False
        for c in conjuncts:
            primed = {node.name for node in F.walk(c) if isinstance(node, F.PVar)}
            if not primed:
                guards.append(c)
            elif len(primed) == 1:
                per_var.setdefault(primed.pop(), []).append(c)
            else:
                coupled = True
                break

        if not coupled:
            self.mode = "factored"
            self._guard_bytes = _mask_bytes(space.models(F.conj(guards)), space.nstates)
            self._allow = []  # per variable: (bytes allowing 0, bytes allowing 1)
            for v in space.variables:
                cs = per_var.get(v)
                if cs is None:
                    self._allow.append(None)  # unconstrained
                    continue
                allow0 = space.models(F.conj([F.subst_primed(c, v, False) for c in cs]))
                allow1 = space.models(F.conj([F.subst_primed(c, v, True) for c in cs]))
                self._allow.append(
                    (_mask_bytes(allow0, space.nstates), _mask_bytes(allow1, space.nstates))
                )
        else:
            if 2 * n > PAIR_SPACE_LIMIT:
                raise ValidationError(
                    f"theory couples several primed variables in one conjunct; "
                    f"enumeration over {2 * n} variables is out of reach"
                )
            self.mode = "paired"
            pair_space = StateSpace(
                tuple(f"__next_{v}" for v in space.variables) + space.variables
            )
            renamed = _rename_for_pair(theory, space)
            self._pair_mask = pair_space.models(renamed)

        self._image_cache: dict[int, int] = {}

    def successor_mask(self, s: int) -> int:
        """Knowledge-state mask of all successors of one state."""
        space = self.space
        if self.mode == "paired":
            return (self._pair_mask >> (s << space.nvars)) & space.full

        if not _bit(self._guard_bytes, s):
            return 0
        base = 0
        free: list[int] = []
        for i in range(space.nvars):
            allow = self._allow[i]
            if allow is None:
                free.append(i)
                continue
            a0 = _bit(allow[0], s)
            a1 = _bit(allow[1], s)
            if a0 and a1:
                free.append(i)
            elif a1:
                base |= 1 << i
            elif not a0:
                return 0
        return self._expand(base, free)

    def _expand(self, base: int, free: list[int]) -> int:
        # base has a 0 at every free position, so each doubling is disjoint
        mask = 1 << base
        for i in free:
            mask |= mask << (1 << i)
        return mask

    def image(self, ks: int) -> int:
        """Union of successor sets over every member of a knowledge state."""
        cached = self._image_cache.get(ks)
        if cached is not None:
            return cached
        out = 0
        m = ks
        while m:
            low = m & -m
            out |= self.successor_mask(low.bit_length() - 1)
            m ^= low
        self._image_cache[ks] = out
        return out

    def first_stuck_state(self) -> int | None:
        """A state with no successor, or None when the theory is total."""
        for s in range(self.space.nstates):
            if self.successor_mask(s) == 0:
                return s
        return None


def _flatten_and(phi) -> list:
    out = []
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, F.And):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, F.Top):
            continue
        else:
            out.append(node)
    return out


def _rename_for_pair(phi, space: StateSpace):
    """Var x -> Var x (kept), PVar x -> Var __next_x, for pair-space use."""
    if isinstance(phi, F.PVar):
        return F.Var(f"__next_{phi.name}")
    if isinstance(phi, F.Not):
        return F.Not(_rename_for_pair(phi.operand, space))
    if isinstance(phi, (F.And, F.Or, F.Implies, F.Iff)):
        return type(phi)(
            _rename_for_pair(phi.left, space), _rename_for_pair(phi.right, space)
        )
    return phi


def _mask_bytes(mask: int, nstates: int) -> bytes:
    return mask.to_bytes((nstates + 7) // 8, "little")


def _bit(b: bytes, s: int) -> int:
    return (b[s >> 3] >> (s & 7)) & 1


# -- validation ---------------------------------------------------------


def validate_ontic(space: StateSpace, action: OnticAction) -> None:
    """Every state must have at least one successor under the theory."""
    _check_vars(space, action.theory, action.name)
    engine = space_engine(space, action.theory)
    stuck = engine.first_stuck_state()
    if stuck is not None:
        raise ValidationError(
            f"ontic action {action.name!r} has no successor from state "
            f"{space.state_string(stuck)}"
        )


def validate_epistemic(space: StateSpace, action: EpistemicAction) -> None:
    """The feedbacks must be exhaustive: their disjunction a tautology."""
    if not action.feedbacks:
        raise ValidationError(f"epistemic action {action.name!r} has no feedbacks")
    union = 0
    for phi in action.feedbacks:
        _check_vars(space, phi, action.name)
        if F.has_primed(phi):
            raise ValidationError(
                f"feedback of {action.name!r} uses a primed variable"
            )
        union |= space.models(phi)
    if union != space.full:
        witness = (space.full ^ union) & -(space.full ^ union)
        raise ValidationError(
            f"feedbacks of {action.name!r} are not exhaustive; no feedback is "
            f"true in state {space.state_string(witness.bit_length() - 1)}"
        )


def _check_vars(space: StateSpace, phi, owner: str) -> None:
    unknown = F.vars_of(phi) - set(space.variables)
    if unknown:
        raise ValidationError(
            f"action {owner!r} mentions undeclared variables: {sorted(unknown)}"
        )


# -- progression --------------------------------------------------------


def space_engine(space: StateSpace, theory) -> TheoryEngine:
    """Engine for a theory, cached on the space it evaluates over."""
    cache = getattr(space, "_engines", None)
    if cache is None:
        cache = {}
        space._engines = cache
    eng = cache.get(theory)
    if eng is None:
        eng = TheoryEngine(space, theory)
        cache[theory] = eng
    return eng


def progress_ontic(space: StateSpace, ks: int, action: OnticAction) -> int:
    """Image of a knowledge state under an ontic action, read back over
    the unprimed variables.  Nonempty whenever the action validates."""
    if ks == 0:
        raise ValueError("knowledge states are nonempty")
    return space_engine(space, action.theory).image(ks)


def progress_feedback(space: StateSpace, ks: int, action: EpistemicAction, i: int):
    """Filter a knowledge state by feedback i.  Returns None (undefined)
    when the feedback is impossible, i.e. the state already refutes it."""
    filtered = ks & space.models(action.feedbacks[i])
    return filtered if filtered else None


def applicable_feedbacks(space: StateSpace, ks: int, action: EpistemicAction) -> list[int]:
    """Indices of feedbacks that can fire in ks; nonempty by exhaustiveness."""
    return [
        i
        for i, phi in enumerate(action.feedbacks)
        if ks & space.models(phi)
    ]
