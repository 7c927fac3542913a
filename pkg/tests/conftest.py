from fractions import Fraction
from pathlib import Path

import pytest
import sympy
from hypothesis import strategies as st

from polyinv.loop_model import load_loop
from polyinv.polyalg.poly import Polynomial

FIXTURES = Path(__file__).parent / "fixtures"

FIB_QUARTIC = "1 - y^4 + 2*x*y^3 + x^2*y^2 - 2*x^3*y - x^4"
TRICKY_INVS = ["x + y + z - 6", "y^2 + 4*y*z + 4*z^2 - 6*y - 24*z + 20"]


def fixture_path(name):
    return str(FIXTURES / name)


@pytest.fixture
def fib():
    return load_loop(FIXTURES / "fib.loop")


@pytest.fixture
def tricky():
    return load_loop(FIXTURES / "tricky.loop")


@pytest.fixture
def twothree():
    return load_loop(FIXTURES / "twothree.loop")


@pytest.fixture
def cohencu():
    return load_loop(FIXTURES / "cohencu.loop")


def to_sympy(p: Polynomial):
    syms = sympy.symbols(p.gens)
    expr = sympy.Integer(0)
    for m, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, m):
            term *= s ** e
        expr += term
    return expr


def from_sympy(expr, gens) -> Polynomial:
    poly = sympy.Poly(sympy.expand(expr), *sympy.symbols(gens))
    return Polynomial(gens, {m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()})


small_fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))


def polynomials(gens, max_exp=3, max_terms=5):
    mono = st.tuples(*[st.integers(0, max_exp) for _ in gens])
    return st.dictionaries(mono, small_fractions, max_size=max_terms).map(lambda d: Polynomial(gens, d))
