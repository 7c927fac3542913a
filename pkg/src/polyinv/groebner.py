"""Buchberger's algorithm, normal forms and ideal membership over Q."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .polyalg.poly import (
    DEGREVLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    monomial_divides,
    monomial_lcm,
)

INFINITE = math.inf


class BudgetExceeded(RuntimeError):
    """A Groebner computation hit its pair, degree or time cap."""


@dataclass
class Budget:
    max_pairs: int = 200_000
    max_degree: int = 64
    deadline: Optional[float] = None  # time.monotonic() value

    @classmethod
    def from_ms(cls, ms: Optional[int], **kw) -> "Budget":
        deadline = None if ms is None else time.monotonic() + ms / 1000.0
        return cls(deadline=deadline, **kw)

    def check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded("time budget exhausted")


_Terms = Dict[Monomial, Fraction]


def _lm(f: _Terms, key) -> Monomial:
    return max(f, key=key)


def _monic(f: _Terms, key) -> Tuple[Monomial, _Terms]:
    m = _lm(f, key)
    c = f[m]
    if c != 1:
        f = {k: v / c for k, v in f.items()}
    return m, f


def _sub_scaled(f: _Terms, g: _Terms, c: Fraction, shift: Monomial):
    """In place: f -= c * x^shift * g."""
    for gm, gc in g.items():
        t = tuple(a + b for a, b in zip(gm, shift))
        v = f.get(t, 0) - c * gc
        if v:
            f[t] = v
        else:
            f.pop(t, None)


def _normal_form(f: _Terms, basis, key, quotients=None) -> _Terms:
    """Full reduction of ``f`` by monic ``basis`` entries (lm, terms)."""
    f = dict(f)
    rem: _Terms = {}
    while f:
        m = _lm(f, key)
        c = f[m]
        for idx, (lm, g) in enumerate(basis):
            if monomial_divides(lm, m):
                shift = tuple(a - b for a, b in zip(m, lm))
                _sub_scaled(f, g, c, shift)
                if quotients is not None:
                    q = quotients[idx]
                    q[shift] = q.get(shift, 0) + c
                break
        else:
            rem[m] = c
            del f[m]
    return rem


class GroebnerBasis:
    """A reduced Groebner basis: monic, interreduced, sorted by leading monomial."""

    def __init__(self, ring: Sequence[str], generators: List[Polynomial], order: MonomialOrder, reduced: bool = True):
        self.ring = tuple(ring)
        self.generators = generators
        self.order = order
        self.reduced = reduced
        key = order.key
        self._basis = [(g.leading_monomial(order), g.terms) for g in generators]
        self._key = key

    @property
    def leading_monomials(self) -> List[Monomial]:
        return [lm for lm, _ in self._basis]

    def is_unit(self) -> bool:
        return any(not any(lm) for lm in self.leading_monomials)

    def is_zero_ideal(self) -> bool:
        return not self.generators

    def reduce(self, p: Polynomial) -> Polynomial:
        if p.gens != self.ring:
            p = p.embed(self.ring)
        return Polynomial._raw(self.ring, _normal_form(p.terms, self._basis, self._key))

    def divide(self, p: Polynomial):
        """(quotients, remainder) with p = sum(q_i * g_i) + remainder."""
        if p.gens != self.ring:
            p = p.embed(self.ring)
        qs = [dict() for _ in self._basis]
        r = _normal_form(p.terms, self._basis, self._key, quotients=qs)
        return [Polynomial(self.ring, q) for q in qs], Polynomial._raw(self.ring, r)

    def contains(self, p: Polynomial) -> bool:
        return self.reduce(p).is_zero()

    def __eq__(self, other):
        if not isinstance(other, GroebnerBasis):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.order == other.order
            and self.generators == other.generators
        )

    def __repr__(self):
        return f"GroebnerBasis({[str(g) for g in self.generators]})"


def buchberger(gens: Sequence[Polynomial], order: MonomialOrder = DEGREVLEX,
               budget: Optional[Budget] = None, ring: Sequence[str] = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    if ring is None:
        if not gens:
            raise ValueError("ring must be given for an empty generator list")
        ring = gens[0].gens
    ring = tuple(ring)
    budget = budget or Budget()
    key = order.key

    basis: List[Tuple[Monomial, _Terms]] = []
    pairs = set()

    def add(h: _Terms):
        lm, h = _monic(h, key)
        if sum(lm) > budget.max_degree:
            raise BudgetExceeded(f"basis element of degree {sum(lm)} exceeds cap {budget.max_degree}")
        j = len(basis)
        basis.append((lm, h))
        for i in range(j):
            pairs.add((i, j))
        return lm

    for g in gens:
        if g.gens != ring:
            g = g.embed(ring)
        if g.is_zero():
            continue
        h = _normal_form(g.terms, basis, key)
        if h:
            lm = add(h)
            if not any(lm):
                return _unit_basis(ring, order)

    processed = 0
    while pairs:
        budget.check_time()
        i, j = min(pairs, key=lambda ij: _pair_rank(basis, ij, key))
        pairs.discard((i, j))
        lmi, fi = basis[i]
        lmj, fj = basis[j]
        lcm = monomial_lcm(lmi, lmj)
        if all(a == 0 or b == 0 for a, b in zip(lmi, lmj)):
            continue
        if _chain_skip(basis, i, j, lcm, pairs):
            continue
        processed += 1
        if processed > budget.max_pairs:
            raise BudgetExceeded(f"more than {budget.max_pairs} S-pairs reduced")
        s = {}
        _sub_scaled(s, fi, Fraction(-1), tuple(a - b for a, b in zip(lcm, lmi)))
        _sub_scaled(s, fj, Fraction(1), tuple(a - b for a, b in zip(lcm, lmj)))
        h = _normal_form(s, basis, key)
        if h:
            lm = add(h)
            if not any(lm):
                return _unit_basis(ring, order)

    return _reduce_basis(ring, basis, order)


def _pair_rank(basis, ij, key):
    lcm = monomial_lcm(basis[ij[0]][0], basis[ij[1]][0])
    return (sum(lcm), key(lcm), ij)


def _chain_skip(basis, i, j, lcm, pending) -> bool:
    for k, (lmk, _) in enumerate(basis):
        if k == i or k == j or not monomial_divides(lmk, lcm):
            continue
        ik = (min(i, k), max(i, k))
        jk = (min(j, k), max(j, k))
        if ik not in pending and jk not in pending:
            return True
    return False


def _unit_basis(ring, order):
    return GroebnerBasis(ring, [Polynomial.constant(ring, 1)], order)


def _reduce_basis(ring, basis, order) -> GroebnerBasis:
    key = order.key
    minimal = []
    for idx, (lm, f) in enumerate(basis):
        redundant = False
        for jdx, (lm2, _) in enumerate(basis):
            if jdx == idx:
                continue
            if monomial_divides(lm2, lm) and (lm2 != lm or jdx < idx):
                redundant = True
                break
        if not redundant:
            minimal.append((lm, f))
    reduced = []
    for idx, (lm, f) in enumerate(minimal):
        others = [b for k, b in enumerate(minimal) if k != idx]
        tail = dict(f)
        del tail[lm]
        r = _normal_form(tail, others, key)
        r[lm] = Fraction(1)
        reduced.append((lm, r))
    reduced.sort(key=lambda t: key(t[0]), reverse=True)
    return GroebnerBasis(ring, [Polynomial._raw(ring, f) for _, f in reduced], order)


def normal_form(p: Polynomial, gb: GroebnerBasis) -> Polynomial:
    return gb.reduce(p)


def member(p: Polynomial, gens: Sequence[Polynomial], order: MonomialOrder = DEGREVLEX,
           budget: Optional[Budget] = None) -> bool:
    if p.is_zero():
        return True
    if not gens:
        return False
    return buchberger(gens, order, budget, ring=p.gens).contains(p)


def rabinowitsch_ring(ring: Sequence[str], count: int) -> Tuple[str, ...]:
    """``ring`` extended by ``count`` fresh names for inverses of inequations."""
    ring = tuple(ring)
    fresh = []
    k = 0
    while len(fresh) < count:
        name = f"_t{k}"
        k += 1
        if name not in ring:
            fresh.append(name)
    return ring + tuple(fresh)


def saturated_ideal(eqs: Sequence[Polynomial], ineqs: Sequence[Polynomial], ring: Sequence[str],
                    order: MonomialOrder = DEGREVLEX, budget: Optional[Budget] = None) -> GroebnerBasis:
    """Groebner basis of <eqs, t_q*q - 1 : q in ineqs> in ring plus one t_q per q."""
    ring = tuple(ring)
    ineqs = [q for q in ineqs if not (q.is_constant() and not q.is_zero())]
    ext = rabinowitsch_ring(ring, len(ineqs))
    gens = [e.embed(ext) for e in eqs]
    for k, q in enumerate(ineqs):
        t = Polynomial.variable(ext, ext[len(ring) + k])
        gens.append(t * q.embed(ext) - 1)
    return buchberger(gens, order, budget, ring=ext)


def member_saturated(p: Polynomial, eqs: Sequence[Polynomial], ineqs: Sequence[Polynomial],
                     order: MonomialOrder = DEGREVLEX, budget: Optional[Budget] = None) -> bool:
    """Sufficient test that ``p`` vanishes on V(eqs) minus the union of V(q) for q in ineqs."""
    if p.is_zero():
        return True
    gb = saturated_ideal(eqs, ineqs, p.gens, order, budget)
    return gb.contains(p)


def ideal_equal(gens1: Sequence[Polynomial], gens2: Sequence[Polynomial],
                order: MonomialOrder = DEGREVLEX, ring: Sequence[str] = None,
                budget: Optional[Budget] = None) -> bool:
    gens1 = [g for g in gens1 if not g.is_zero()]
    gens2 = [g for g in gens2 if not g.is_zero()]
    if not gens1 or not gens2:
        return not gens1 and not gens2
    if ring is None:
        ring = gens1[0].gens
    return buchberger(gens1, order, budget, ring) == buchberger(gens2, order, budget, ring)


def quotient_dimension_zero_dim(gb: GroebnerBasis):
    """Number of standard monomials, or INFINITE when the ideal is not zero-dimensional."""
    n = len(gb.ring)
    lms = gb.leading_monomials
    if not lms:
        return INFINITE if n else 1
    if any(not any(m) for m in lms):
        return 0
    caps = []
    for i in range(n):
        pure = [m[i] for m in lms if m[i] and all(e == 0 for k, e in enumerate(m) if k != i)]
        if not pure:
            return INFINITE
        caps.append(min(pure))
    count = 0

    # monomials below the pure-power caps that no leading monomial divides
    def rec(prefix, i):
        nonlocal count
        if i == n:
            m = tuple(prefix)
            if not any(monomial_divides(lm, m) for lm in lms):
                count += 1
            return
        for e in range(caps[i]):
            prefix.append(e)
            partial = tuple(prefix) + (0,) * (n - i - 1)
            if not any(monomial_divides(lm, partial) for lm in lms):
                rec(prefix, i + 1)
            prefix.pop()

    rec([], 0)
    return count


def ideal_dimension(gb: GroebnerBasis) -> int:
    """Krull dimension from the leading-monomial ideal (-1 for the unit ideal)."""
    n = len(gb.ring)
    lms = gb.leading_monomials
    if any(not any(m) for m in lms):
        return -1
    for size in range(n, -1, -1):
        for subset in combinations(range(n), size):
            s = set(subset)
            if not any(all(e == 0 or k in s for k, e in enumerate(m)) for m in lms):
                return size
    return 0
