"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

Monomial = Tuple[int, ...]
Number = Union[int, Fraction]


class MonomialOrder:
    """A term order given by a sort key on exponent tuples.

    ``kind`` is one of ``degrevlex``, ``lex`` or ``block``.  A block order
    compares the first ``split`` variables by degrevlex and breaks ties with
    degrevlex on the rest, which eliminates the first block.
    """

    __slots__ = ("kind", "split")

    def __init__(self, kind: str = "degrevlex", split: int = 0):
        if kind not in ("degrevlex", "lex", "block"):
            raise ValueError(f"unknown monomial order {kind!r}")
        self.kind = kind
        self.split = split

    def key(self, m: Monomial):
        if self.kind == "degrevlex":
            return _grevlex_key(m)
        if self.kind == "lex":
            return m
        return (_grevlex_key(m[: self.split]), _grevlex_key(m[self.split:]))

    def __eq__(self, other):
        return (
            isinstance(other, MonomialOrder)
            and self.kind == other.kind
            and self.split == other.split
        )

    def __hash__(self):
        return hash((self.kind, self.split))

    def __repr__(self):
        if self.kind == "block":
            return f"MonomialOrder('block', split={self.split})"
        return f"MonomialOrder({self.kind!r})"


def _grevlex_key(m: Monomial):
    return (sum(m), tuple(-e for e in reversed(m)))


DEGREVLEX = MonomialOrder("degrevlex")
LEX = MonomialOrder("lex")


def monomials_up_to_degree(var_count: int, d: int, order: MonomialOrder = DEGREVLEX) -> list:
    """All exponent tuples of total degree <= d, ascending in ``order``."""
    if var_count < 1 or d < 0:
        raise ValueError("need var_count >= 1 and d >= 0")
    out = []
    for deg in range(d + 1):
        for combo in combinations_with_replacement(range(var_count), deg):
            e = [0] * var_count
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    out.sort(key=order.key)
    assert len(out) == comb(var_count + d, d)
    return out


def monomial_divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def monomial_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


class Polynomial:
    """An element of Q[gens] stored as a map from exponent tuples to Fractions.

    Instances are treated as immutable.  Arithmetic requires both operands to
    share the same ``gens`` tuple; use :meth:`embed` to move between rings.
    """

    __slots__ = ("gens", "terms", "_hash")

    def __init__(self, gens: Sequence[str], terms: Mapping[Monomial, Number] = None):
        self.gens = tuple(gens)
        clean = {}
        if terms:
            n = len(self.gens)
            for m, c in terms.items():
                if len(m) != n:
                    raise ValueError(f"monomial {m} has wrong arity for {self.gens}")
                if c:
                    clean[tuple(m)] = Fraction(c)
        self.terms: Dict[Monomial, Fraction] = clean
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def _raw(cls, gens, terms):
        p = cls.__new__(cls)
        p.gens = gens
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, gens):
        return cls(gens)

    @classmethod
    def constant(cls, gens, c: Number):
        gens = tuple(gens)
        return cls(gens, {(0,) * len(gens): c})

    @classmethod
    def variable(cls, gens, name: str):
        gens = tuple(gens)
        e = [0] * len(gens)
        e[gens.index(name)] = 1
        return cls(gens, {tuple(e): 1})

    @classmethod
    def monomial(cls, gens, m: Monomial, c: Number = 1):
        return cls(gens, {tuple(m): c})

    # basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.gens.index(name)
        return max((m[i] for m in self.terms), default=-1)

    def variables(self) -> set:
        """Names of the generators that actually occur."""
        used = set()
        for m in self.terms:
            for name, e in zip(self.gens, m):
                if e:
                    used.add(name)
        return used

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(tuple(m), Fraction(0))

    def sorted_terms(self, order: MonomialOrder = DEGREVLEX):
        """Terms in descending order."""
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def leading_monomial(self, order: MonomialOrder = DEGREVLEX) -> Monomial:
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order: MonomialOrder = DEGREVLEX) -> Fraction:
        return self.terms[self.leading_monomial(order)]

    def monic(self, order: MonomialOrder = DEGREVLEX) -> "Polynomial":
        if not self.terms:
            return self
        return self * (1 / self.leading_coefficient(order))

    # arithmetic ---------------------------------------------------------
    def _check(self, other):
        if other.gens != self.gens:
            raise ValueError(f"ring mismatch: {self.gens} vs {other.gens}")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.gens, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.gens, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.gens, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial._raw(self.gens, {})
            return Polynomial._raw(self.gens, {m: c * other for m, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(self.gens, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        result = Polynomial.constant(self.gens, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.gens, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.gens == other.gens and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gens, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # evaluation and substitution ----------------------------------------
    def evaluate(self, point: Sequence[Number]) -> Fraction:
        if len(point) != len(self.gens):
            raise ValueError(f"point has {len(point)} coordinates, ring has {len(self.gens)}")
        pt = [Fraction(v) for v in point]
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in zip(pt, m):
                if e:
                    t *= v ** e
            total += t
        return total

    def substitute(self, images: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Replace every generator by its image; all images share one target ring."""
        missing = self.variables() - set(images)
        if missing:
            raise KeyError(f"no image for {sorted(missing)}")
        target = None
        for img in images.values():
            target = img.gens
            break
        if target is None:
            target = self.gens
        powers: Dict[Tuple[str, int], Polynomial] = {}

        def power(name, e):
            key = (name, e)
            if key not in powers:
                powers[key] = images[name] ** e
            return powers[key]

        result = Polynomial.zero(target)
        for m, c in self.terms.items():
            t = Polynomial.constant(target, c)
            for name, e in zip(self.gens, m):
                if e:
                    t = t * power(name, e)
            result = result + t
        return result

    def embed(self, gens: Sequence[str]) -> "Polynomial":
        """The same polynomial viewed in a ring whose generators include ours."""
        gens = tuple(gens)
        if gens == self.gens:
            return self
        idx = []
        for name in self.gens:
            if name in gens:
                idx.append(gens.index(name))
            else:
                idx.append(None)
        out = {}
        for m, c in self.terms.items():
            e = [0] * len(gens)
            for i, k in enumerate(m):
                if k:
                    if idx[i] is None:
                        raise ValueError(f"{self.gens[i]} not in target ring {gens}")
                    e[idx[i]] = k
            out[tuple(e)] = c
        return Polynomial._raw(gens, out)

    def reduce_mod(self, p: int) -> Dict[Monomial, int]:
        """Coefficients reduced into Z/p; raises ZeroDivisionError on a bad denominator."""
        out = {}
        for m, c in self.terms.items():
            r = c.numerator * pow(c.denominator, -1, p) % p
            if r:
                out[m] = r
        return out

    def primitive(self, order: MonomialOrder = DEGREVLEX) -> "Polynomial":
        """Scale to coprime integer coefficients with a positive leading coefficient."""
        if not self.terms:
            return self
        from math import gcd, lcm

        den = 1
        for c in self.terms.values():
            den = lcm(den, c.denominator)
        ints = [int(c * den) for c in self.terms.values()]
        g = 0
        for v in ints:
            g = gcd(g, v)
        scale = Fraction(den, g)
        if self.leading_coefficient(order) < 0:
            scale = -scale
        return self * scale

    # text ---------------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Polynomial({self.gens}, {format_poly(self)!r})"


def eval_poly(p: Polynomial, point: Sequence[Number]) -> Fraction:
    return p.evaluate(point)


def substitute(p: Polynomial, images: Mapping[str, Polynomial]) -> Polynomial:
    return p.substitute(images)


def eval_poly_mod(p: Polynomial, point: Sequence[Number], prime: int) -> int:
    """Value of ``p`` at ``point`` computed in Z/prime."""
    coeffs = p.reduce_mod(prime)
    pt = [to_residue(v, prime) for v in point]
    total = 0
    for m, c in coeffs.items():
        t = c
        for v, e in zip(pt, m):
            if e:
                t = t * pow(v, e, prime) % prime
        total += t
    return total % prime


def to_residue(v: Number, prime: int) -> int:
    v = Fraction(v)
    if v.denominator % prime == 0:
        raise ZeroDivisionError(f"denominator {v.denominator} divisible by {prime}")
    return v.numerator * pow(v.denominator, -1, prime) % prime


# ---------------------------------------------------------------------------
# infix text format:  x^2*y - 3/2*x + 1
# ---------------------------------------------------------------------------

def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_monomial(gens, m) -> str:
    parts = []
    for name, e in zip(gens, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Polynomial, order: MonomialOrder = DEGREVLEX) -> str:
    if not p.terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(p.sorted_terms(order)):
        mono = _format_monomial(p.gens, m)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coeff(a)}*{mono}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


class PolySyntaxError(ValueError):
    """Malformed polynomial text; carries a 1-based line and column."""

    def __init__(self, message, line=1, col=1):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))"
)


class _PolyParser:
    """Recursive-descent parser over a token list of (kind, value, line, col)."""

    def __init__(self, tokens, gens, where=(1, 1)):
        self.toks = tokens
        self.pos = 0
        self.gens = tuple(gens)
        self.where = where

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        if tok is None:
            line, col = self.where
            raise PolySyntaxError(msg + " (unexpected end)", line, col)
        raise PolySyntaxError(msg, tok[2], tok[3])

    def parse(self):
        if self.peek() is None:
            self.error("empty polynomial")
        p = self.expr()
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek() is not None and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek() is not None and self.peek()[1] in ("*", "/"):
            tok = self.take()
            q = self.unary()
            if tok[1] == "*":
                p = p * q
            else:
                if not q.is_constant() or q.is_zero():
                    self.error("division only by a nonzero constant", tok)
                p = p * (1 / q.coefficient((0,) * len(self.gens)))
        return p

    def unary(self):
        tok = self.peek()
        if tok is not None and tok[1] in ("-", "+"):
            self.take()
            p = self.unary()
            return -p if tok[1] == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok[1] in ("^", "**"):
            self.take()
            e = self.take()
            if e is None or e[0] != "num":
                self.error("exponent must be a non-negative integer literal", e)
            return base ** int(e[1])
        return base

    def atom(self):
        tok = self.take()
        if tok is None:
            self.error("expected a term")
        kind, val = tok[0], tok[1]
        if kind == "num":
            return Polynomial.constant(self.gens, int(val))
        if kind == "name":
            if val not in self.gens:
                self.error(f"unknown variable {val!r}", tok)
            return Polynomial.variable(self.gens, val)
        if val == "(":
            p = self.expr()
            close = self.take()
            if close is None or close[1] != ")":
                self.error("expected ')'", close)
            return p
        self.error(f"unexpected {val!r}", tok)


def tokenize_poly(text: str, line: int = 1, col: int = 1):
    toks = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        mt = _TOKEN.match(text, i)
        if not mt or mt.end() == i:
            raise PolySyntaxError(f"unexpected character {text[i]!r}", line, col)
        start = mt.start(mt.lastgroup)
        col += start - i
        kind = mt.lastgroup
        toks.append((kind, mt.group(kind), line, col))
        col += mt.end() - start
        i = mt.end()
    return toks


def parse_poly(text: str, gens: Sequence[str]) -> Polynomial:
    """Parse infix text such as ``x^2*y - 3/2*x + 1`` in the ring Q[gens]."""
    return _PolyParser(tokenize_poly(text), gens).parse()


def gen_poly(gens: Sequence[str], monomials: Sequence[Monomial], coeffs: Iterable[Number]) -> Polynomial:
    """The polynomial sum(c_i * m_i)."""
    coeffs = list(coeffs)
    if len(coeffs) != len(monomials):
        raise ValueError("coefficient vector length differs from monomial count")
    terms: Dict[Monomial, Fraction] = {}
    for m, c in zip(monomials, coeffs):
        if c:
            terms[m] = terms.get(m, 0) + Fraction(c)
    return Polynomial(gens, terms)
