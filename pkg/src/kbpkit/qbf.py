"""Quantified Boolean formulas: representation, brute-force evaluation,
and the prefix-padding helpers the problem generators rely on."""

from __future__ import annotations

from dataclasses import dataclass

from . import formulas as F
from .errors import ShapeError
from .semantics import StateSpace

EVAL_LIMIT = 16  # max quantified variables for the brute-force oracle


@dataclass(frozen=True)
class Qbf:
    blocks: tuple  # (("exists"|"forall", (name, ...)), ...)
    matrix: object


def all_vars(psi: Qbf) -> tuple:
    out = []
    for _, names in psi.blocks:
        out.extend(names)
    return tuple(out)


def quantifier_of(psi: Qbf) -> dict:
    return {v: q for q, names in psi.blocks for v in names}


def check(psi: Qbf) -> None:
    flat = all_vars(psi)
    if len(set(flat)) != len(flat):
        raise ShapeError("a variable is quantified more than once")
    if not flat:
        raise ShapeError("empty quantifier prefix")
    loose = F.vars_of(psi.matrix) - set(flat)
    if loose:
        raise ShapeError(f"matrix variables not quantified: {sorted(loose)}")
    for q, names in psi.blocks:
        if q not in ("exists", "forall"):
            raise ShapeError(f"unknown quantifier {q!r}")
        if not names:
            raise ShapeError("empty quantifier block")


def shape(psi: Qbf) -> tuple:
    return tuple(q for q, _ in psi.blocks)


def qbf_eval(psi: Qbf) -> bool:
    """Truth by exhaustive recursion over the prefix, vectorized: the
    matrix is evaluated over all assignments at once, then quantifiers are
    folded away innermost-first by halving the model bitmap."""
    check(psi)
    flat = all_vars(psi)
    if len(flat) > EVAL_LIMIT:
        raise ShapeError(f"too many variables for the oracle ({len(flat)})")
    space = StateSpace(flat)
    mask = space.models(psi.matrix)
    quant = quantifier_of(psi)
    size = space.nstates
    for v in reversed(flat):
        half = size >> 1
        lo = mask & ((1 << half) - 1)
        hi = mask >> half
        mask = (lo | hi) if quant[v] == "exists" else (lo & hi)
        size = half
    return bool(mask)


def pad_alternation(psi: Qbf) -> Qbf:
    """Rewrite the prefix into strict single-variable alternation starting
    with exists and ending with forall, introducing dummy variables that
    do not occur in the matrix (truth value is unaffected)."""
    check(psi)
    taken = set(all_vars(psi))
    fresh = _fresh_namer(taken)
    out = []
    expected = "exists"
    for q, names in psi.blocks:
        for v in names:
            if q != expected:
                out.append((expected, (fresh(),)))
                expected = _other(expected)
            out.append((q, (v,)))
            expected = _other(expected)
    if expected == "forall":
        out.append(("forall", (fresh(),)))
    return Qbf(tuple(out), psi.matrix)


def pad_equal_outer(psi: Qbf) -> Qbf:
    """For an exists/forall/exists prefix, pad the smaller of the first
    two blocks with dummies until they have equal width."""
    if shape(psi) != ("exists", "forall", "exists"):
        raise ShapeError("expected an exists/forall/exists prefix")
    check(psi)
    a, b, c = psi.blocks
    fresh = _fresh_namer(set(all_vars(psi)))
    an, bn = list(a[1]), list(b[1])
    while len(an) < len(bn):
        an.append(fresh())
    while len(bn) < len(an):
        bn.append(fresh())
    return Qbf((("exists", tuple(an)), ("forall", tuple(bn)), c), psi.matrix)


def _other(q: str) -> str:
    return "forall" if q == "exists" else "exists"


def _fresh_namer(taken: set):
    counter = [0]

    def fresh() -> str:
        while True:
            counter[0] += 1
            name = f"pad{counter[0]}"
            if name not in taken:
                taken.add(name)
                return name

    return fresh
