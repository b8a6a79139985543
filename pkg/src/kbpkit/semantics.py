"""Knowledge-state semantics over an explicit, enumerated state space.

A state is a truth assignment to the declared variables, packed into an
int (bit i = variable i).  A knowledge state is a nonempty *set* of
states, packed into an int as well: bit s of the mask is set when state s
is considered possible.  With 2^n states the masks are plain Python ints
of 2^n bits, so set algebra is bitwise arithmetic and model enumeration
is vectorized: each formula node costs one big-int operation over all
states at once.
"""

from __future__ import annotations

from . import formulas as F
from .errors import FormulaError

MAX_VARS = 20  # 2^20-bit masks; beyond this, explicit enumeration is hopeless


class StateSpace:
    """Evaluation context for a fixed ordered tuple of variables.

    Caches model sets per formula, so repeated satisfaction checks against
    the same conditions (the common case during trace enumeration) cost a
    dictionary hit plus one bitwise operation.
    """

    def __init__(self, variables):
        variables = tuple(variables)
        if not variables:
            raise ValueError("a state space needs at least one variable")
        if len(variables) > MAX_VARS:
            raise ValueError(
                f"{len(variables)} variables exceed the enumeration limit ({MAX_VARS})"
            )
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        self.variables = variables
        self.index = {v: i for i, v in enumerate(variables)}
        self.nvars = len(variables)
        self.nstates = 1 << self.nvars
        self.full = (1 << self.nstates) - 1
        self._models: dict = {}
        self._patterns: dict[int, int] = {}

    # -- state helpers -------------------------------------------------

    def state_string(self, s: int) -> str:
        """Render a state as a bit string, first variable first."""
        return "".join("1" if (s >> i) & 1 else "0" for i in range(self.nvars))

    def parse_state(self, bits: str) -> int:
        if len(bits) != self.nvars or any(c not in "01" for c in bits):
            raise ValueError(f"expected {self.nvars} bits, got {bits!r}")
        return sum(1 << i for i, c in enumerate(bits) if c == "1")

    def state_of(self, assignment: dict) -> int:
        s = 0
        for name, val in assignment.items():
            if val:
                s |= 1 << self.index[name]
        return s

    def knowledge_state(self, states) -> int:
        mask = 0
        for s in states:
            mask |= 1 << s
        return mask

    def states(self, ks: int) -> list[int]:
        """Members of a knowledge state, canonically ordered (lexicographic
        on the rendered bit vectors)."""
        out = []
        m = ks
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        out.sort(key=self.state_string)
        return out

    def size(self, ks: int) -> int:
        return bin(ks).count("1")

    def render(self, ks: int) -> str:
        return "{" + ", ".join(self.state_string(s) for s in self.states(ks)) + "}"

    # -- model enumeration ----------------------------------------------

    def _var_pattern(self, i: int) -> int:
        pat = self._patterns.get(i)
        if pat is None:
            block = ((1 << (1 << i)) - 1) << (1 << i)  # 2^i zeros then 2^i ones
            pat = block
            width = 1 << (i + 1)
            while width < self.nstates:
                pat |= pat << width
                width <<= 1
            self._patterns[i] = pat
        return pat

    def models(self, phi) -> int:
        """Mask of all states satisfying the (unprimed, objective)
        formula: exactly { s : s |= phi } by enumeration."""
        cached = self._models.get(phi)
        if cached is not None:
            return cached
        mask = self._eval_all(phi)
        self._models[phi] = mask
        return mask

    def _eval_all(self, phi) -> int:
        if isinstance(phi, F.Var):
            i = self.index.get(phi.name)
            if i is None:
                raise FormulaError(f"undeclared variable {phi.name!r}")
            return self._var_pattern(i)
        if isinstance(phi, F.PVar):
            raise FormulaError(f"primed variable {phi.name}' outside an action theory")
        if isinstance(phi, F.Top):
            return self.full
        if isinstance(phi, F.Bottom):
            return 0
        if isinstance(phi, F.Not):
            return self.full ^ self._eval_all(phi.operand)
        if isinstance(phi, F.And):
            return self._eval_all(phi.left) & self._eval_all(phi.right)
        if isinstance(phi, F.Or):
            return self._eval_all(phi.left) | self._eval_all(phi.right)
        if isinstance(phi, F.Implies):
            return (self.full ^ self._eval_all(phi.left)) | self._eval_all(phi.right)
        if isinstance(phi, F.Iff):
            return self.full ^ self._eval_all(phi.left) ^ self._eval_all(phi.right)
        if isinstance(phi, F.KAtom):
            raise FormulaError("knowledge atom inside an objective formula")
        raise FormulaError(f"not a formula node: {phi!r}")

    # -- satisfaction ----------------------------------------------------

    def eval(self, s: int, phi) -> bool:
        """Truth value of an objective formula at one state."""
        return bool((self.models(phi) >> s) & 1)

    def holds(self, ks: int, phi) -> bool:
        """S5 satisfaction of a purely subjective formula by a knowledge
        state: a K atom holds when every member state satisfies its body,
        connectives behave classically."""
        if ks == 0:
            raise ValueError("knowledge states are nonempty")
        return self._holds(ks, phi)

    def _holds(self, ks, phi) -> bool:
        if isinstance(phi, F.KAtom):
            return ks & (self.full ^ self.models(phi.obj)) == 0
        if isinstance(phi, F.Top):
            return True
        if isinstance(phi, F.Bottom):
            return False
        if isinstance(phi, F.Not):
            return not self._holds(ks, phi.operand)
        if isinstance(phi, F.And):
            return self._holds(ks, phi.left) and self._holds(ks, phi.right)
        if isinstance(phi, F.Or):
            return self._holds(ks, phi.left) or self._holds(ks, phi.right)
        if isinstance(phi, F.Implies):
            return (not self._holds(ks, phi.left)) or self._holds(ks, phi.right)
        if isinstance(phi, F.Iff):
            return self._holds(ks, phi.left) == self._holds(ks, phi.right)
        if isinstance(phi, (F.Var, F.PVar)):
            raise FormulaError(
                f"bare variable {phi.name!r} at the subjective level; wrap it in K(...)"
            )
        raise FormulaError(f"not a formula node: {phi!r}")

    def entails(self, phi, psi) -> bool:
        """Every state satisfying phi satisfies psi (brute force)."""
        return self.models(phi) & (self.full ^ self.models(psi)) == 0

    def is_tautology(self, phi) -> bool:
        return self.models(phi) == self.full

    def satisfiable(self, phi) -> bool:
        return self.models(phi) != 0


_spaces: dict[tuple, StateSpace] = {}


def space_for(variables) -> StateSpace:
    """Shared StateSpace for a variable tuple (model caches included)."""
    key = tuple(variables)
    sp = _spaces.get(key)
    if sp is None:
        sp = StateSpace(key)
        _spaces[key] = sp
    return sp
