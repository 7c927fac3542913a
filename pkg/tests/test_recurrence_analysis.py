import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import hermite_normal_form as sympy_hnf
from sympy.matrices.normalforms import smith_normal_form

from polyinv.groebner import buchberger, ideal_dimension, ideal_equal
from polyinv.interpolate import infer_invariants
from polyinv.loop_model import parse_loop
from polyinv.polyalg import Polynomial, parse_poly
from polyinv.polyalg.intlattice import hermite_normal_form, integer_kernel
from polyinv.recurrence_analysis import (
    INCONCLUSIVE,
    NONTRIVIAL,
    TRIVIAL_PARAMETRIC,
    MultRelationLattice,
    Unsupported,
    analyze,
    char_poly,
    closed_form_degrees,
    degree_sequence,
    detect_p_solvable,
    dimension_and_triviality,
    lattice_ideal,
    mult_relation_lattice,
    parse_lattice,
    rational_eigenvalues,
    relation_holds,
    structure_for_blocks,
)

from conftest import to_sympy

int_rows = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=1, max_size=4))


def in_lattice(hnf, v):
    v = list(v)
    for row in hnf:
        piv = next(k for k, x in enumerate(row) if x)
        if v[piv] % row[piv]:
            return False
        q = v[piv] // row[piv]
        v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


def is_hnf(h):
    pivs = [next(k for k, x in enumerate(r) if x) for r in h]
    if pivs != sorted(set(pivs)):
        return False
    for i, (r, p) in enumerate(zip(h, pivs)):
        if r[p] <= 0 or any(h[j][p] for j in range(i + 1, len(h))):
            return False
        if any(not 0 <= h[j][p] < r[p] for j in range(i)):
            return False
    return True


# integer lattices

@settings(max_examples=80, deadline=None)
@given(int_rows)
def test_hnf_spans_the_same_lattice(rows):
    h = hermite_normal_form(rows)
    assert is_hnf(h)
    assert len(h) == sympy.Matrix(rows).rank()
    assert all(in_lattice(h, r) for r in rows)
    if h:
        # equal covolume with inclusion means equal lattices
        assert _gram(h) == _gram(_reference_basis(rows))


def _gram(B):
    B = sympy.Matrix(B)
    return (B * B.T).det()


def _reference_basis(rows):
    # sympy's column-style HNF of the transpose spans the same lattice
    H = sympy_hnf(sympy.Matrix(rows).T).T
    return [list(H.row(i)) for i in range(H.rows) if any(H.row(i))]


@settings(max_examples=80, deadline=None)
@given(int_rows)
def test_integer_kernel_is_full_and_saturated(rows):
    n = len(rows[0])
    K = integer_kernel(rows)
    A = sympy.Matrix(rows)
    assert len(K) == n - A.rank()
    for k in K:
        assert all(x == 0 for x in A * sympy.Matrix(k))
    if K:
        snf = smith_normal_form(sympy.Matrix(K), domain=sympy.ZZ)
        assert all(abs(snf[i, i]) == 1 for i in range(len(K)))
    assert is_hnf(K)


def test_integer_kernel_examples():
    assert integer_kernel([[0, 0, 0]]) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert integer_kernel([[1, -1]]) == [[1, 1]]
    assert integer_kernel([], ncols=2) == [[1, 0], [0, 1]]


# structure detection

def test_detect_fibonacci(fib):
    st_ = detect_p_solvable(fib)
    assert st_.blocks == [("x", "y")]
    assert st_.matrix == [[0, 1], [1, 1]]
    assert all(t.is_zero() for t in st_.tails.values())


def test_detect_decoupled_blocks():
    loop = parse_loop("vars x y; init x = 1, y = 1; guard true; branch { x := 2*x; y := 3*y + x^2; }")
    st_ = detect_p_solvable(loop)
    assert st_.blocks == [("x",), ("y",)]
    assert st_.tail_degrees[1] == 2 and st_.d == [1, 2]


def test_detect_rejects_nonlinear_self_dependence():
    loop = parse_loop("vars x y; init x = 1, y = 1; guard true; branch { x := x*y; y := y; }")
    with pytest.raises(Unsupported) as e:
        detect_p_solvable(loop)
    assert e.value.reason == "nonlinear" and e.value.witness == ["x", "x"]
    loop = parse_loop("vars x y; init x = 1, y = 1; guard true; branch { x := y^2; y := x; }")
    with pytest.raises(Unsupported) as e:
        detect_p_solvable(loop)
    assert e.value.witness[0] == e.value.witness[-1]


def test_detect_rejects_multi_branch():
    loop = parse_loop("vars x; init x = 0; guard true; "
                      "branch when x = 0 { x := 1; } branch when x != 0 { x := 0; }")
    with pytest.raises(Unsupported) as e:
        detect_p_solvable(loop)
    assert e.value.reason == "multi-branch"


def test_structure_stable_under_renaming():
    src = "vars {a} {b} {c}; init {a} = 1, {b} = 2, {c} = 3; guard true; " \
          "branch {{ {a} := 2*{a}; {b} := 3*{b} + {c} + {a}^2; {c} := {b} - {c} + {a}^2; }}"
    one = detect_p_solvable(parse_loop(src.format(a="x", b="y", c="z")))
    two = detect_p_solvable(parse_loop(src.format(a="w", b="q", c="p")))
    three = detect_p_solvable(parse_loop(src.replace("vars {a} {b} {c}", "vars {c} {a} {b}")
                                         .format(a="x", b="y", c="z")))
    for other in (two, three):
        assert other.sizes == one.sizes and other.tail_degrees == one.tail_degrees
    assert one.sizes == [1, 2] and degree_sequence(one) == [1, 4]


# characteristic polynomial and eigenvalues

def test_char_poly_examples():
    t = ("t",)
    assert char_poly([[0, 1], [1, 1]]) == parse_poly("t^2 - t - 1", t)
    assert char_poly([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == parse_poly("(t - 1)^3", t)
    assert char_poly([[3, -1], [0, 2]]) == parse_poly("(t - 3)*(t - 2)", t)


square = st.integers(1, 5).flatmap(lambda n: st.lists(
    st.lists(st.builds(Fraction, st.integers(-5, 5), st.integers(1, 3)), min_size=n, max_size=n),
    min_size=n, max_size=n))


@settings(max_examples=60, deadline=None)
@given(square)
def test_char_poly_matches_sympy_and_cayley_hamilton(M):
    cp = char_poly(M)
    t = sympy.Symbol("t")
    SM = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in M])
    assert sympy.expand(to_sympy(cp) - SM.charpoly(t).as_expr()) == 0
    n = len(M)
    coeffs = [cp.coefficient((n - k,)) for k in range(n + 1)]
    acc = sympy.zeros(n)
    for c in coeffs:  # Horner over matrices
        acc = acc * SM + sympy.Rational(c.numerator, c.denominator) * sympy.eye(n)
    assert acc == sympy.zeros(n)


def test_rational_eigenvalue_examples():
    t = ("t",)
    e = rational_eigenvalues(parse_poly("(t - 3)*(t - 2)", t))
    assert e.rational == {3: 1, 2: 1} and e.residual == Polynomial.constant(t, 1)
    e = rational_eigenvalues(parse_poly("(t - 1)^3", t))
    assert e.rational == {1: 3} and e.one_count == 3
    e = rational_eigenvalues(parse_poly("t^2 - t - 1", t))
    assert e.rational == {} and e.residual == parse_poly("t^2 - t - 1", t)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4)), max_size=4),
       st.sampled_from(["1", "t^2 - 2", "t^2 + 1", "t^3 - t - 1"]))
def test_rational_eigenvalues_against_sympy(roots, extra):
    t = ("t",)
    p = parse_poly(extra, t)
    for r in roots:
        p = p * (parse_poly("t", t) - r)
    e = rational_eigenvalues(p)
    assert sum(e.rational.values()) + e.residual.total_degree() == p.total_degree()
    ts = sympy.Symbol("t")
    ref = {Fraction(int(sympy.fraction(r)[0]), int(sympy.fraction(r)[1])): m
           for r, m in sympy.roots(sympy.Poly(to_sympy(p), ts)).items() if r.is_rational}
    assert e.rational == ref


# multiplicative relations

def test_mult_lattice_examples():
    assert mult_relation_lattice([2, 3]).rank == 0
    assert mult_relation_lattice([1, 1, 1]).basis == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    L = mult_relation_lattice([2, 4, 8])
    assert L.rank == 2 and all(relation_holds([2, 4, 8], r) for r in L.basis)
    assert mult_relation_lattice([2, Fraction(1, 2)]).basis == [[1, 1]]
    with pytest.raises(ValueError):
        mult_relation_lattice([0, 2])


def test_sign_parity():
    assert mult_relation_lattice([-1]).basis == [[2]]
    L = mult_relation_lattice([-2, Fraction(-1, 2), 3])
    assert L.basis == [[1, 1, 0]]
    assert not relation_holds([-2, 3], [1, 0])


lams = st.lists(st.builds(Fraction, st.integers(-12, 12).filter(bool), st.integers(1, 12)), min_size=1, max_size=4)


@settings(max_examples=80, deadline=None)
@given(lams)
def test_mult_lattice_complete_on_small_vectors(ls):
    L = mult_relation_lattice(ls)
    assert is_hnf(L.basis) if L.basis else True
    assert all(relation_holds(ls, r) for r in L.basis)
    for e in itertools.product(range(-2, 3), repeat=len(ls)):
        assert relation_holds(ls, e) == in_lattice(L.basis, e)


# relation ideal

def test_lattice_ideal_fibonacci_user_lattice():
    I = lattice_ideal(MultRelationLattice([[2, 2]], 2, "user"))
    assert [str(g) for g in I.generators] == ["y1^2*y2^2 - 1"]
    assert I.dimension == 1 and I.degree == 4 and I.degree_status == "verified"


def test_lattice_ideal_point_and_hyperplane():
    I = lattice_ideal(mult_relation_lattice([1, 1, 1]))
    ring = I.ring
    assert ideal_equal(I.generators, [parse_poly(f"{y} - 1", ring) for y in ring])
    assert I.dimension == 0 and I.degree == 1
    J = lattice_ideal(MultRelationLattice([], 1), zero_eigen_count=1)
    assert [str(g) for g in J.generators] == ["y2"] and J.dimension == 1 and J.degree == 1


def test_lattice_ideal_degree_matches_saturated_oracle():
    # relations 2*4 = 8 among (2, 4, 8): the toric curve (t, t^2, t^3) of degree 3
    I = lattice_ideal(mult_relation_lattice([2, 4, 8]))
    assert I.dimension == 1 and I.groebner_dimension == 1
    assert I.degree == 3 and I.degree_status == "verified"


# bounds and verdicts

def test_block_configuration_degree_sequence():
    loop = parse_loop("vars x y z; init x = 1, y = 1, z = 1; guard true; "
                      "branch { x := 2*x; y := 3*y + z + x^2; z := y + x^2; }")
    st_ = detect_p_solvable(loop)
    assert st_.sizes == [1, 2] and st_.tail_degrees == [0, 2]
    assert degree_sequence(st_) == [1, 4]


def test_decoupled_closed_form_degree():
    loop = parse_loop("vars x z; init x = 1, z = 1; guard true; branch { x := 2*x; z := 3*z + x^3; }")
    assert closed_form_degrees(detect_p_solvable(loop)) == [1, 3]


def test_coarsening_is_reported():
    loop = parse_loop("vars x y z; init x = 1, y = 1, z = 1; guard true; "
                      "branch { x := 2*x; y := 3*y + x^2; z := 3*z + x^3; }")
    rep = analyze(loop, coarsenings=[[["x"], ["y", "z"]]])
    (c,) = rep.coarsenings
    assert c["sizes"] == [1, 2] and c["D"] == [1, 5]
    with pytest.raises(Unsupported):
        structure_for_blocks(loop, [["y", "z"], ["x"]])


def test_fibonacci_bounds_with_user_lattice(fib):
    rep = analyze(fib, [[2, 2]])
    assert rep.ideal.degree == 4 and rep.ideal.dimension == 1
    assert rep.bounds["D"] == [2]
    assert rep.bounds["sharp_bound"] == 4
    assert rep.bounds["generic_bound"] == 4 * 2 ** 2
    assert rep.window == [1, 2] and rep.verdict == INCONCLUSIVE


def test_fibonacci_without_lattice_is_inconclusive(fib):
    rep = analyze(fib)
    assert rep.lattice is None and rep.window is None and rep.verdict == INCONCLUSIVE


def test_tricky_window_and_hypothesis_note(tricky):
    rep = analyze(tricky)
    assert rep.window == [0, 1] and rep.verdict == NONTRIVIAL
    assert rep.bounds["hypothesis"] == "violated"
    assert any("eigenvalue 1" in n for n in rep.bounds["notes"])


def test_twothree_trivial_for_parametric_init(twothree):
    rep = analyze(twothree)
    assert rep.parametric and rep.verdict == TRIVIAL_PARAMETRIC
    assert analyze(twothree, parametric=False).verdict == INCONCLUSIVE


def test_half_and_two_is_inconclusive():
    loop = parse_loop("vars x y; params a b; init x = a, y = b; guard true; branch { x := 2*x; y := y/2; }")
    rep = analyze(loop)
    assert rep.lattice.basis == [[1, 1]]
    assert rep.window == [1, 2] and rep.verdict == INCONCLUSIVE


def test_dimension_and_triviality_direct():
    t = ("t",)
    eigen = rational_eigenvalues(parse_poly("(t - 2)*(2*t - 1)", t))
    ideal = lattice_ideal(mult_relation_lattice([2, Fraction(1, 2)]))
    out = dimension_and_triviality(ideal, 2, True, eigen)
    assert out["window"] == [1, 2] and out["verdict"] == INCONCLUSIVE
    free = lattice_ideal(mult_relation_lattice([2, 3]))
    eigen = rational_eigenvalues(parse_poly("(t - 2)*(t - 3)", t))
    assert dimension_and_triviality(free, 2, True, eigen)["verdict"] == TRIVIAL_PARAMETRIC
    assert dimension_and_triviality(free, 2, False, eigen)["verdict"] == INCONCLUSIVE
    assert dimension_and_triviality(None, 2, True)["window"] is None


def test_user_lattice_validation(fib, twothree):
    with pytest.raises(ValueError):
        analyze(fib, [[1, 2, 3]])
    with pytest.raises(ValueError):
        analyze(twothree, [[1, 1]])


def test_parse_lattice():
    assert parse_lattice("2 2\n# comment\n1, -1\n") == [[2, 2], [1, -1]]
    with pytest.raises(ValueError):
        parse_lattice("1 x")
    with pytest.raises(ValueError):
        parse_lattice("1 2\n3")


@pytest.mark.parametrize("name, degree, lattice", [
    ("fib", 4, [[2, 2]]),
    ("tricky", 2, None),
    ("cohencu", 2, None),
])
def test_inference_consistent_with_analysis(request, name, degree, lattice):
    loop = request.getfixturevalue(name)
    rep = analyze(loop, lattice)
    run = infer_invariants(loop, degree)
    assert run.result.ok
    dim = ideal_dimension(buchberger(run.result.basis))
    low, high = rep.window
    assert low <= dim <= high
    assert max(g.total_degree() for g in run.result.groebner) <= rep.bounds["generic_bound"]
    if name == "fib":
        assert max(g.total_degree() for g in run.result.groebner) <= rep.bounds["sharp_bound"] == 4
