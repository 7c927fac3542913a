"""Loops as algebraic transition systems, and the loop description language.

A loop file looks like::

    vars x y;
    params a b;
    init x = a, y = b, a*b != 0;
    guard true;
    branch when true { x := y; y := x + y; }

Assignments inside a branch are simultaneous.  Constraints are
comma-separated conjunctions of ``p = q`` and ``p != q`` atoms; order atoms
(``<``, ``<=``, ``>``, ``>=``) are kept but can only be dropped, which the
inductive and absolute modes do.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from .polyalg.poly import Polynomial, PolySyntaxError, _PolyParser, format_poly, parse_poly

KEYWORDS = {"vars", "params", "init", "guard", "branch", "when", "true"}
ORDER_OPS = ("<", "<=", ">", ">=")


class InvariantMode(str, enum.Enum):
    PLAIN = "plain"
    INDUCTIVE = "inductive"
    ABSOLUTE = "absolute"


class LoopError(ValueError):
    """Invalid loop description."""


class LoopSyntaxError(LoopError):
    def __init__(self, message, line=0, col=0):
        super().__init__(f"{message} at line {line}, column {col}" if line else message)
        self.line = line
        self.col = col


class UnsupportedInMode(LoopError):
    """A constraint cannot be evaluated under the requested invariant mode."""


@dataclass(frozen=True)
class OrderAtom:
    """``poly op 0`` with op one of <, <=, >, >=."""

    poly: Polynomial
    op: str

    def holds(self, point) -> bool:
        v = self.poly.evaluate(point)
        return {"<": v < 0, "<=": v <= 0, ">": v > 0, ">=": v >= 0}[self.op]

    def __str__(self):
        return f"{format_poly(self.poly)} {self.op} 0"


@dataclass(frozen=True)
class ConstraintSet:
    """Conjunction of p = 0 (equations), p != 0 (inequations) and order atoms."""

    equations: Tuple[Polynomial, ...] = ()
    inequations: Tuple[Polynomial, ...] = ()
    order_atoms: Tuple[OrderAtom, ...] = ()

    def is_true(self) -> bool:
        return not (self.equations or self.inequations or self.order_atoms)

    def holds(self, point, allow_order: bool = False) -> bool:
        if self.order_atoms and not allow_order:
            raise UnsupportedInMode(
                "unsupported in this mode: order constraint "
                + ", ".join(map(str, self.order_atoms)) + " is not algebraic"
            )
        return (
            all(p.evaluate(point) == 0 for p in self.equations)
            and all(p.evaluate(point) != 0 for p in self.inequations)
            and all(a.holds(point) for a in self.order_atoms)
        )

    def __str__(self):
        if self.is_true():
            return "true"
        parts = [f"{format_poly(p)} = 0" for p in self.equations]
        parts += [f"{format_poly(p)} != 0" for p in self.inequations]
        parts += [str(a) for a in self.order_atoms]
        return ", ".join(parts)

    def to_dict(self):
        return {
            "equations": [format_poly(p) for p in self.equations],
            "inequations": [format_poly(p) for p in self.inequations],
            "order_atoms": [{"poly": format_poly(a.poly), "op": a.op} for a in self.order_atoms],
        }

    @classmethod
    def from_dict(cls, d, ring):
        return cls(
            tuple(parse_poly(s, ring) for s in d.get("equations", [])),
            tuple(parse_poly(s, ring) for s in d.get("inequations", [])),
            tuple(OrderAtom(parse_poly(a["poly"], ring), a["op"]) for a in d.get("order_atoms", [])),
        )


@dataclass(frozen=True)
class Branch:
    condition: ConstraintSet
    assignment: Mapping[str, Polynomial] = field(hash=False)

    def apply(self, point: Sequence[Fraction], variables: Sequence[str]) -> tuple:
        """Simultaneous update: every right-hand side sees the pre-state."""
        new = list(point)
        for i, name in enumerate(variables):
            new[i] = self.assignment[name].evaluate(point)
        return tuple(new)


@dataclass(frozen=True)
class LoopSystem:
    variables: Tuple[str, ...]
    parameters: Tuple[str, ...]
    init: ConstraintSet
    guard: ConstraintSet
    branches: Tuple[Branch, ...]

    def __post_init__(self):
        names = list(self.variables) + list(self.parameters)
        if len(set(names)) != len(names):
            raise LoopError("variable and parameter names must be unique and disjoint")
        if not self.variables:
            raise LoopError("a loop needs at least one variable")
        if not self.branches:
            raise LoopError("a loop needs at least one branch")
        for k, b in enumerate(self.branches, 1):
            missing = set(self.variables) - set(b.assignment)
            if missing:
                raise LoopError(f"branch {k} has no assignment for {', '.join(sorted(missing))}")
            extra = set(b.assignment) - set(self.variables)
            if extra:
                raise LoopError(f"branch {k} assigns undeclared variable(s) {', '.join(sorted(extra))}")
            for name, p in b.assignment.items():
                if p.gens != self.ring:
                    raise LoopError(f"assignment to {name} lives in the wrong ring")
        self.initial_assignment()  # validates init shape

    @property
    def ring(self) -> Tuple[str, ...]:
        return tuple(self.variables) + tuple(self.parameters)

    def initial_assignment(self) -> Dict[str, object]:
        """Map each variable to its rational start value or to a parameter name."""
        out: Dict[str, object] = {}
        for eq in self.init.equations:
            hit = _as_variable_assignment(eq, self.variables, self.parameters)
            if hit is None:
                continue
            var, val = hit
            if var in out:
                raise LoopError(f"initial value of {var} given twice")
            out[var] = val
        missing = [v for v in self.variables if v not in out]
        if missing:
            raise LoopError(
                "init must give every variable a rational value or a parameter; missing "
                + ", ".join(missing)
            )
        return out

    def parameter_constraints(self) -> ConstraintSet:
        """The init constraints that restrict parameters only."""
        eqs = tuple(
            e for e in self.init.equations
            if _as_variable_assignment(e, self.variables, self.parameters) is None
        )
        for e in eqs:
            if e.variables() & set(self.variables):
                raise LoopError(f"init equation {format_poly(e)} = 0 mixes loop variables")
        for q in self.init.inequations:
            if q.variables() & set(self.variables):
                raise LoopError(f"init inequation {format_poly(q)} != 0 mixes loop variables")
        return ConstraintSet(eqs, self.init.inequations, self.init.order_atoms)

    def is_fully_parametric(self) -> bool:
        """Every variable starts at its own distinct, otherwise free parameter."""
        init = self.initial_assignment()
        vals = list(init.values())
        if not all(isinstance(v, str) for v in vals) or len(set(vals)) != len(vals):
            return False
        return self.parameter_constraints().equations == ()

    def to_dict(self):
        return {
            "variables": list(self.variables),
            "parameters": list(self.parameters),
            "init": self.init.to_dict(),
            "guard": self.guard.to_dict(),
            "branches": [
                {
                    "condition": b.condition.to_dict(),
                    "assignment": {v: format_poly(b.assignment[v]) for v in self.variables},
                }
                for b in self.branches
            ],
        }

    @classmethod
    def from_dict(cls, d) -> "LoopSystem":
        variables = tuple(d["variables"])
        parameters = tuple(d.get("parameters", []))
        ring = variables + parameters
        branches = tuple(
            Branch(
                ConstraintSet.from_dict(b.get("condition", {}), ring),
                {v: parse_poly(s, ring) for v, s in b["assignment"].items()},
            )
            for b in d["branches"]
        )
        return cls(
            variables,
            parameters,
            ConstraintSet.from_dict(d.get("init", {}), ring),
            ConstraintSet.from_dict(d.get("guard", {}), ring),
            branches,
        )


def _as_variable_assignment(eq: Polynomial, variables, parameters):
    """Recognise c*(x - v) with v rational or a parameter; return (x, v)."""
    if eq.total_degree() != 1:
        return None
    used = eq.variables()
    vs = [v for v in variables if v in used]
    if len(vs) != 1:
        return None
    var = vs[0]
    ring = eq.gens
    lin = Polynomial.variable(ring, var)
    scale = eq.coefficient(lin.leading_monomial())
    rest = eq * (1 / scale) - lin
    if rest.is_constant():
        return var, -rest.coefficient((0,) * len(ring))
    if len(rest.terms) == 1:
        (m, c), = rest.terms.items()
        if c == -1 and sum(m) == 1:
            name = ring[m.index(1)]
            if name in parameters:
                return var, name
    return None


def validate_exclusivity(loop: LoopSystem, witnesses) -> dict:
    """Points where two branch conditions hold at once; no refutation is not a proof."""
    refutations = []
    n = len(loop.branches)
    for w in witnesses:
        w = tuple(Fraction(v) for v in w)
        if len(w) != len(loop.ring):
            raise LoopError(f"witness {w} has wrong arity for {loop.ring}")
        enabled = [k for k, b in enumerate(loop.branches) if b.condition.holds(w, allow_order=True)]
        for i in range(len(enabled)):
            for j in range(i + 1, len(enabled)):
                refutations.append({"witness": w, "branches": (enabled[i], enabled[j])})
    return {
        "branch_count": n,
        "witnesses_checked": len(witnesses),
        "refutations": refutations,
        "exclusive_on_witnesses": not refutations,
    }


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_DSL_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>(?:#|//)[^\n]*)"
    r"|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>:=|!=|==|<=|>=|\*\*|[-+*/^(){};,=<>])"
)


def _tokenize(text: str):
    toks = []
    line, col, i = 1, 1, 0
    while i < len(text):
        mt = _DSL_TOKEN.match(text, i)
        if not mt:
            raise LoopSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = mt.lastgroup
        val = mt.group(kind)
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                toks.append((kind, val, line, col))
            col += len(val)
        i = mt.end()
    return toks


class _LoopParser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0
        self.variables: List[str] = []
        self.parameters: List[str] = []
        self.init = None
        self.guard = None
        self.branches: List[Branch] = []

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else ("", "", 1, 1)
            raise LoopSyntaxError("unexpected end of input", last[2], last[3])
        self.pos += 1
        return tok

    def expect(self, val):
        tok = self.take()
        if tok[1] != val:
            raise LoopSyntaxError(f"expected {val!r}, found {tok[1]!r}", tok[2], tok[3])
        return tok

    @property
    def ring(self):
        return tuple(self.variables) + tuple(self.parameters)

    def parse(self) -> LoopSystem:
        while self.peek() is not None:
            tok = self.take()
            kw = tok[1]
            if kw in ("vars", "params"):
                if self.init is not None or self.guard is not None or self.branches:
                    raise LoopSyntaxError(f"{kw} must come before init/guard/branch", tok[2], tok[3])
                names = self.name_list()
                (self.variables if kw == "vars" else self.parameters).extend(names)
            elif kw == "init":
                self.init = self.constraints(until=(";",))
                self.expect(";")
            elif kw == "guard":
                self.guard = self.constraints(until=(";",))
                self.expect(";")
            elif kw == "branch":
                self.branches.append(self.branch())
            else:
                raise LoopSyntaxError(f"unexpected {kw!r}", tok[2], tok[3])
        if not self.variables:
            raise LoopSyntaxError("missing 'vars' declaration")
        try:
            return LoopSystem(
                tuple(self.variables),
                tuple(self.parameters),
                self.init or ConstraintSet(),
                self.guard or ConstraintSet(),
                tuple(self.branches),
            )
        except LoopSyntaxError:
            raise
        except LoopError as exc:
            raise LoopError(str(exc)) from None

    def name_list(self):
        names = []
        while True:
            tok = self.take()
            if tok[1] == ";":
                return names
            if tok[0] != "name" or tok[1] in KEYWORDS:
                raise LoopSyntaxError(f"expected a name, found {tok[1]!r}", tok[2], tok[3])
            if tok[1] in self.variables or tok[1] in self.parameters or tok[1] in names:
                raise LoopSyntaxError(f"duplicate name {tok[1]!r}", tok[2], tok[3])
            names.append(tok[1])
            nxt = self.peek()
            if nxt is not None and nxt[1] == ",":
                self.take()

    def poly_until(self, stops):
        toks = []
        depth = 0
        start = self.peek()
        while True:
            tok = self.peek()
            if tok is None:
                break
            if depth == 0 and tok[1] in stops:
                break
            if tok[1] == "(":
                depth += 1
            elif tok[1] == ")":
                depth -= 1
            if tok[1] in (";", "{", "}", ":="):
                break
            toks.append(self.take())
        if not toks:
            where = start or (None, None, 0, 0)
            raise LoopSyntaxError("expected a polynomial", where[2], where[3])
        try:
            return _PolyParser(toks, self.ring, where=(toks[-1][2], toks[-1][3])).parse()
        except PolySyntaxError as exc:
            raise LoopSyntaxError(str(exc).rsplit(" at line", 1)[0], exc.line, exc.col) from None

    def constraints(self, until):
        tok = self.peek()
        if tok is not None and tok[1] == "true":
            self.take()
            return ConstraintSet()
        eqs, neqs, order = [], [], []
        rel = ("=", "==", "!=") + ORDER_OPS
        while True:
            lhs = self.poly_until(rel + (",",) + tuple(until))
            op_tok = self.take()
            op = op_tok[1]
            if op not in rel:
                raise LoopSyntaxError(f"expected a relation, found {op!r}", op_tok[2], op_tok[3])
            rhs = self.poly_until((",",) + tuple(until))
            diff = lhs - rhs
            if op in ("=", "=="):
                eqs.append(diff)
            elif op == "!=":
                neqs.append(diff)
            else:
                order.append(OrderAtom(diff, op))
            nxt = self.peek()
            if nxt is not None and nxt[1] == ",":
                self.take()
                continue
            return ConstraintSet(tuple(eqs), tuple(neqs), tuple(order))

    def branch(self):
        cond = ConstraintSet()
        tok = self.peek()
        if tok is not None and tok[1] == "when":
            self.take()
            cond = self.constraints(until=("{",))
        self.expect("{")
        assignment: Dict[str, Polynomial] = {}
        while True:
            tok = self.take()
            if tok[1] == "}":
                break
            if tok[0] != "name":
                raise LoopSyntaxError(f"expected an assignment, found {tok[1]!r}", tok[2], tok[3])
            if tok[1] not in self.variables:
                raise LoopSyntaxError(f"unknown variable {tok[1]!r}", tok[2], tok[3])
            if tok[1] in assignment:
                raise LoopSyntaxError(f"{tok[1]} assigned twice", tok[2], tok[3])
            self.expect(":=")
            assignment[tok[1]] = self.poly_until((";",))
            self.expect(";")
        missing = [v for v in self.variables if v not in assignment]
        if missing:
            # identity updates must be spelled out
            raise LoopSyntaxError(f"missing assignment for {', '.join(missing)}", tok[2], tok[3])
        return Branch(cond, assignment)


def parse_loop(text: str) -> LoopSystem:
    """Parse and validate a loop description."""
    return _LoopParser(text).parse()


def pretty_print(loop: LoopSystem) -> str:
    """Loop source text that :func:`parse_loop` maps back to ``loop``."""
    lines = [f"vars {' '.join(loop.variables)};"]
    if loop.parameters:
        lines.append(f"params {' '.join(loop.parameters)};")
    lines.append(f"init {loop.init};")
    lines.append(f"guard {loop.guard};")
    for b in loop.branches:
        body = " ".join(f"{v} := {format_poly(b.assignment[v])};" for v in loop.variables)
        lines.append(f"branch when {b.condition} {{ {body} }}")
    return "\n".join(lines) + "\n"


def load_loop(path) -> LoopSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_loop(fh.read())
