"""Planning problems: declarations, load-time validation, progression."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import actions as A
from . import formulas as F
from .errors import LinkError, ValidationError
from .semantics import StateSpace


@dataclass
class PlanningProblem:
    """An initial-knowledge formula, ontic and epistemic action sets, and a
    subjective goal; optionally a size bound, a total action order, and a
    vocabulary of candidate branching conditions for the bounded solver."""

    variables: tuple
    init: object
    ontic: tuple = ()
    epistemic: tuple = ()
    goal: object = F.TRUE
    bound: int | None = None
    order: tuple | None = None
    vocabulary: tuple = ()
    vocab_complete: bool = field(default=False, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.space = StateSpace(self.variables)
        self._by_name = {}
        for a in self.ontic:
            self._by_name[a.name] = ("ontic", a)
        for a in self.epistemic:
            self._by_name[a.name] = ("epistemic", a)
        self._init_mask = None
        self._goal_sknnf = None
        self._validated = False

    # -- declarations ------------------------------------------------------

    @property
    def initial_state(self) -> int:
        """Knowledge state mask of the initial formula's models."""
        if self._init_mask is None:
            self._init_mask = self.space.models(self.init)
        return self._init_mask

    @property
    def goal_sknnf(self):
        if self._goal_sknnf is None:
            self._goal_sknnf = F.to_sknnf(self.goal)
        return self._goal_sknnf

    def find_action(self, name: str):
        """(kind, action) for a declared name; LinkError otherwise."""
        entry = self._by_name.get(name)
        if entry is None:
            raise LinkError(f"undeclared action {name!r}")
        return entry

    @property
    def epistemic_only(self) -> bool:
        return not self.ontic

    @property
    def ontic_only(self) -> bool:
        return not self.epistemic

    def validate(self) -> None:
        """Run every load-time check once; raises ValidationError."""
        if self._validated:
            return
        names = [a.name for a in self.ontic] + [a.name for a in self.epistemic]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ValidationError(f"duplicate action names: {sorted(dupes)}")
        if not self.space.satisfiable(self.init):
            raise ValidationError("init formula is unsatisfiable")
        if F.has_primed(self.init) or not F.is_objective(self.init):
            raise ValidationError("init must be an unprimed objective formula")
        if not F.is_subjective(self.goal):
            raise ValidationError("goal must be purely subjective")
        unknown = F.vars_of(self.goal) - set(self.variables)
        if unknown:
            raise ValidationError(f"goal mentions undeclared variables: {sorted(unknown)}")
        for a in self.ontic:
            A.validate_ontic(self.space, a)
        for a in self.epistemic:
            A.validate_epistemic(self.space, a)
        if self.order is not None:
            declared = {a.name for a in self.epistemic}
            if set(self.order) != declared or len(self.order) != len(declared):
                raise ValidationError(
                    "order must list every epistemic action exactly once"
                )
        for phi in self.vocabulary:
            if not F.is_subjective(phi):
                raise ValidationError("vocabulary entries must be purely subjective")
        self._validated = True

    # -- semantics ---------------------------------------------------------

    def models(self, phi) -> int:
        return self.space.models(phi)

    def holds(self, ks: int, phi) -> bool:
        return self.space.holds(ks, phi)

    def progress_ontic(self, ks: int, action) -> int:
        if isinstance(action, str):
            kind, action = self.find_action(action)
            if kind != "ontic":
                raise LinkError(f"{action.name!r} is not an ontic action")
        return A.progress_ontic(self.space, ks, action)

    def progress_feedback(self, ks: int, action, i: int):
        if isinstance(action, str):
            action = self.find_action(action)[1]
        return A.progress_feedback(self.space, ks, action, i)

    def applicable_feedbacks(self, ks: int, action) -> list[int]:
        if isinstance(action, str):
            action = self.find_action(action)[1]
        return A.applicable_feedbacks(self.space, ks, action)

    def render_state(self, ks: int) -> str:
        return self.space.render(ks)
