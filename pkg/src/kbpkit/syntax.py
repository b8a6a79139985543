"""Concrete syntax: formulas, programs, problem files, QBF files.

Formula grammar (shared everywhere):

    identifiers  [a-zA-Z_][a-zA-Z0-9_]*     primed form  x'
    operators    !  &  |  ->  <->           (precedence high to low)
    constants    true  false
    epistemic atom  K(<objective formula>)
    theory sugar    frame(v1, ..., vk)  ==  (v1' <-> v1) & ... & (vk' <-> vk)

Program grammar:

    kbp := "skip" | NAME | kbp ";" kbp
         | "if" phi "then" kbp ["else" kbp] "endif"
         | "while" phi "do" kbp "endwhile"

Comments run from '#' to end of line in every file format.
"""

from __future__ import annotations

import re

from . import formulas as F
from . import programs as P
from .actions import EpistemicAction, OnticAction
from .errors import ParseError
from .problems import PlanningProblem
from .qbf import Qbf

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*'?)"
    r"|(?P<op><->|->|[!&|(),;:])"
)

_KEYWORDS = {"skip", "if", "then", "else", "endif", "while", "do", "endwhile"}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind == "name":
            toks.append(_Tok("name", lexeme, line, col))
        elif kind == "op":
            toks.append(_Tok(lexeme, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    # formulas -----------------------------------------------------------
    #
    # mode: "objective" (state formulas), "theory" (primed allowed, frame
    # sugar), "epistemic" (atoms are K(...) and constants)

    def formula(self, mode: str):
        return self._iff(mode)

    def _iff(self, mode):
        left = self._implies(mode)
        if self.peek().kind == "<->":
            self.next()
            return F.Iff(left, self._iff(mode))
        return left

    def _implies(self, mode):
        left = self._or(mode)
        if self.peek().kind == "->":
            self.next()
            return F.Implies(left, self._implies(mode))
        return left

    def _or(self, mode):
        left = self._and(mode)
        if self.peek().kind == "|":
            self.next()
            return F.Or(left, self._or(mode))
        return left

    def _and(self, mode):
        left = self._not(mode)
        if self.peek().kind == "&":
            self.next()
            return F.And(left, self._and(mode))
        return left

    def _not(self, mode):
        if self.peek().kind == "!":
            self.next()
            return F.Not(self._not(mode))
        return self._atom(mode)

    def _atom(self, mode):
        t = self.peek()
        if t.kind == "(":
            self.next()
            inner = self.formula(mode)
            self.expect(")")
            return inner
        if t.kind != "name":
            self.fail(f"expected a formula atom, found {t.text!r}")
        name = t.text
        if name == "true":
            self.next()
            return F.TRUE
        if name == "false":
            self.next()
            if mode == "epistemic":
                # no bare falsum at the subjective level; K(false) is
                # unsatisfiable over nonempty knowledge states
                return F.KAtom(F.FALSE)
            return F.FALSE
        if name == "K" and self.toks[self.i + 1].kind == "(":
            if mode != "epistemic":
                self.fail("knowledge atom inside an objective formula")
            self.next()
            self.expect("(")
            inner = self.formula("objective")
            self.expect(")")
            return F.KAtom(inner)
        if name == "frame" and self.toks[self.i + 1].kind == "(":
            if mode != "theory":
                self.fail("frame(...) is only meaningful in an action theory")
            self.next()
            self.expect("(")
            names = [self._plain_name()]
            while self.peek().kind == ",":
                self.next()
                names.append(self._plain_name())
            self.expect(")")
            return F.frame_clause(names)
        if mode == "epistemic":
            self.fail(
                f"bare variable {name!r} at the subjective level; wrap it in K(...)"
            )
        self.next()
        if name.endswith("'"):
            if mode != "theory":
                self.fail(f"primed variable {name} outside an action theory")
            return F.PVar(name[:-1])
        if name in _KEYWORDS:
            self.fail(f"keyword {name!r} used as a variable")
        return F.Var(name)

    def _plain_name(self) -> str:
        t = self.expect("name")
        if t.text.endswith("'") or t.text in _KEYWORDS or t.text in ("true", "false"):
            raise ParseError(f"expected a variable name, found {t.text!r}", t.line, t.col)
        return t.text

    # programs -----------------------------------------------------------

    def kbp(self):
        parts = [self._kbp_unit()]
        while self.peek().kind == ";":
            self.next()
            parts.append(self._kbp_unit())
        return P.seq(*parts)

    def _kbp_unit(self):
        t = self.peek()
        if t.kind != "name":
            self.fail(f"expected a program, found {t.text!r}")
        if t.text == "skip":
            self.next()
            return P.EMPTY
        if t.text == "if":
            self.next()
            cond = self.formula("epistemic")
            self._keyword("then")
            then_branch = self.kbp()
            else_branch = P.EMPTY
            if self.peek().kind == "name" and self.peek().text == "else":
                self.next()
                else_branch = self.kbp()
            self._keyword("endif")
            return P.If(cond, then_branch, else_branch)
        if t.text == "while":
            self.next()
            cond = self.formula("epistemic")
            self._keyword("do")
            body = self.kbp()
            self._keyword("endwhile")
            return P.While(cond, body)
        if t.text in _KEYWORDS:
            self.fail(f"unexpected keyword {t.text!r}")
        self.next()
        return P.Act(t.text)

    def _keyword(self, word: str):
        t = self.peek()
        if t.kind != "name" or t.text != word:
            raise ParseError(f"expected {word!r}, found {t.text!r}", t.line, t.col)
        self.next()


def parse_formula(text: str, mode: str = "objective"):
    p = _Parser(text)
    phi = p.formula(mode)
    if not p.at_end():
        p.fail("trailing input after formula")
    return phi


def parse_objective(text: str):
    return parse_formula(text, "objective")


def parse_theory(text: str):
    return parse_formula(text, "theory")


def parse_epistemic(text: str):
    return parse_formula(text, "epistemic")


def parse_kbp(text: str):
    p = _Parser(text)
    pi = p.kbp()
    if not p.at_end():
        p.fail("trailing input after program")
    return pi


# -- printing -------------------------------------------------------------

_LEVEL = {F.Iff: 1, F.Implies: 2, F.Or: 3, F.And: 4, F.Not: 5}
_OPTXT = {F.Iff: "<->", F.Implies: "->", F.Or: "|", F.And: "&"}


def format_formula(phi) -> str:
    """Minimal-parenthesis rendering; reparsing yields the same tree."""
    return _fmt(phi, 0)


def _fmt(phi, min_level: int) -> str:
    t = type(phi)
    if t is F.Var:
        return phi.name
    if t is F.PVar:
        return phi.name + "'"
    if t is F.Top:
        return "true"
    if t is F.Bottom:
        return "false"
    if t is F.KAtom:
        return "K(" + _fmt(phi.obj, 0) + ")"
    if t is F.Not:
        return "!" + _fmt(phi.operand, 5)
    level = _LEVEL[t]
    body = _fmt(phi.left, level + 1) + " " + _OPTXT[t] + " " + _fmt(phi.right, level)
    if level < min_level:
        return "(" + body + ")"
    return body


def format_kbp(pi) -> str:
    if isinstance(pi, P.Empty):
        return "skip"
    if isinstance(pi, P.Act):
        return pi.name
    if isinstance(pi, P.Seq):
        parts = []
        node = pi
        while isinstance(node, P.Seq):
            parts.append(node.first)
            node = node.rest
        parts.append(node)
        return "; ".join(format_kbp(x) for x in parts)
    if isinstance(pi, P.If):
        out = f"if {format_formula(pi.cond)} then {format_kbp(pi.then_branch)}"
        if not isinstance(pi.else_branch, P.Empty):
            out += f" else {format_kbp(pi.else_branch)}"
        return out + " endif"
    if isinstance(pi, P.While):
        return f"while {format_formula(pi.cond)} do {format_kbp(pi.body)} endwhile"
    raise TypeError(f"not a program node: {pi!r}")


# -- problem files ---------------------------------------------------------


def parse_problem(text: str, name: str = "") -> PlanningProblem:
    variables: list[str] = []
    init = None
    goal = None
    ontic: list[OnticAction] = []
    epistemic: list[EpistemicAction] = []
    bound = None
    order = None
    vocab: list = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("var "):
                variables.extend(line[4:].split())
            elif line.startswith("init:"):
                init = parse_objective(line[5:])
            elif line.startswith("goal:"):
                goal = parse_epistemic(line[5:])
            elif line.startswith("bound:"):
                bound = int(line[6:].strip())
            elif line.startswith("order:"):
                order = tuple(line[6:].split())
            elif line.startswith("vocab:"):
                vocab.append(parse_epistemic(line[6:]))
            elif line.startswith("ontic "):
                head, _, body = line[6:].partition(":")
                if not _:
                    raise ParseError("missing ':' after action name", lineno, 1)
                ontic.append(OnticAction(head.strip(), parse_theory(body)))
            elif line.startswith("epistemic "):
                head, _, body = line[10:].partition(":")
                if not _:
                    raise ParseError("missing ':' after action name", lineno, 1)
                feedbacks = tuple(parse_objective(part) for part in body.split(";"))
                epistemic.append(EpistemicAction(head.strip(), feedbacks))
            else:
                raise ParseError(f"unrecognized line: {line!r}", lineno, 1)
        except ParseError as exc:
            if exc.line is None or exc.line == lineno:
                raise ParseError(f"{exc.args[0]}", lineno, None) from None
            raise
    if not variables:
        raise ParseError("no variables declared")
    if init is None:
        raise ParseError("missing init: line")
    if goal is None:
        raise ParseError("missing goal: line")
    return PlanningProblem(
        variables=tuple(variables),
        init=init,
        ontic=tuple(ontic),
        epistemic=tuple(epistemic),
        goal=goal,
        bound=bound,
        order=order,
        vocabulary=tuple(vocab),
        name=name,
    )


def format_problem(problem: PlanningProblem, certificate: str | None = None) -> str:
    lines = []
    if certificate:
        for row in certificate.splitlines():
            lines.append(f"# {row}")
    lines.append("var " + " ".join(problem.variables))
    lines.append("init: " + format_formula(problem.init))
    for a in problem.ontic:
        lines.append(f"ontic {a.name}: " + format_formula(a.theory))
    for a in problem.epistemic:
        body = " ; ".join(format_formula(f) for f in a.feedbacks)
        lines.append(f"epistemic {a.name}: " + body)
    lines.append("goal: " + format_formula(problem.goal))
    if problem.bound is not None:
        lines.append(f"bound: {problem.bound}")
    if problem.order is not None:
        lines.append("order: " + " ".join(problem.order))
    for phi in problem.vocabulary:
        lines.append("vocab: " + format_formula(phi))
    return "\n".join(lines) + "\n"


# -- QBF files --------------------------------------------------------------


def parse_qbf(text: str) -> Qbf:
    blocks: list[tuple[str, tuple[str, ...]]] = []
    matrix = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("exists "):
            blocks.append(("exists", tuple(line[7:].split())))
        elif line.startswith("forall "):
            blocks.append(("forall", tuple(line[7:].split())))
        elif line.startswith("matrix:"):
            matrix = parse_objective(line[7:])
        else:
            raise ParseError(f"unrecognized QBF line: {line!r}", lineno, 1)
    if matrix is None:
        raise ParseError("missing matrix: line")
    if not blocks:
        raise ParseError("missing quantifier blocks")
    return Qbf(tuple(blocks), matrix)


def format_qbf(psi: Qbf) -> str:
    lines = [f"{q} " + " ".join(names) for q, names in psi.blocks]
    lines.append("matrix: " + format_formula(psi.matrix))
    return "\n".join(lines) + "\n"
