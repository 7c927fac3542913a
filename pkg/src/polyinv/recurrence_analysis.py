"""Structure of single-branch polynomial recurrences and the bounds derived from it.

The update x' = A(x) is split into blocks of variables.  Inside a block the
update is linear (the coefficient matrix M), and whatever else appears must
depend only on earlier blocks (the tail).  From M's eigenvalues we build the
lattice of multiplicative relations, its binomial ideal in variables
y_i ~ lambda_i^n, and from there the dimension window and degree bounds for
the invariant ideal.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
from sympy import divisors, factorint

from .groebner import (
    INFINITE,
    Budget,
    BudgetExceeded,
    buchberger,
    ideal_dimension,
    quotient_dimension_zero_dim,
)
from .loop_model import LoopError, LoopSystem
from .polyalg.intlattice import hermite_normal_form, integer_kernel
from .polyalg.poly import MonomialOrder, Polynomial, format_poly

NONTRIVIAL = "nontrivial-guaranteed"
TRIVIAL_PARAMETRIC = "trivial-for-parametric-init"
INCONCLUSIVE = "inconclusive"

Matrix = List[List[Fraction]]


class Unsupported(LoopError):
    """The loop is outside the block-triangular class handled here."""

    def __init__(self, reason: str, witness=(), detail: str = ""):
        msg = reason + (f": {detail}" if detail else "")
        if witness:
            msg += " (witness " + " -> ".join(witness) + ")"
        super().__init__(msg)
        self.reason = reason
        self.witness = list(witness)
        self.detail = detail


# ---------------------------------------------------------------- structure

@dataclass
class PSolvableStructure:
    blocks: List[Tuple[str, ...]]
    matrix: Matrix  # rows/columns follow ``variables``
    tails: Dict[str, Polynomial]
    tail_degrees: List[int]  # observed, one per block
    depends_on: List[List[int]]  # block j reads blocks depends_on[j]

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for b in self.blocks for v in b)

    @property
    def sizes(self) -> List[int]:
        return [len(b) for b in self.blocks]

    @property
    def d(self) -> List[int]:
        """Tail degrees with the first block's entry fixed to 1."""
        return [1] + self.tail_degrees[1:]

    def to_dict(self):
        return {
            "blocks": [list(b) for b in self.blocks],
            "sizes": self.sizes,
            "variables": list(self.variables),
            "coefficient_matrix": [[str(c) for c in row] for row in self.matrix],
            "tails": {v: format_poly(p) for v, p in self.tails.items()},
            "tail_degrees": self.tail_degrees,
            "d": self.d,
            "depends_on": self.depends_on,
        }


def _dependency_graph(loop: LoopSystem, assignment) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(loop.variables)
    for u in loop.variables:
        for v in assignment[u].variables() & set(loop.variables):
            g.add_edge(u, v)  # u's update reads v
    return g


def _cycle_through(g: nx.DiGraph, u: str, v: str) -> List[str]:
    """A closed walk u -> v -> ... -> u when one exists, else [u, v]."""
    if u == v:
        return [u, u]
    try:
        return [u] + nx.shortest_path(g, v, u)
    except nx.NetworkXNoPath:
        return [u, v]


def _structure_for_partition(loop: LoopSystem, blocks: Sequence[Sequence[str]],
                             graph: Optional[nx.DiGraph] = None) -> PSolvableStructure:
    branch = loop.branches[0]
    asg = branch.assignment
    graph = graph if graph is not None else _dependency_graph(loop, asg)
    blocks = [tuple(b) for b in blocks]
    flat = [v for b in blocks for v in b]
    if sorted(flat) != sorted(loop.variables) or len(set(flat)) != len(flat):
        raise Unsupported("bad-partition", detail="blocks must partition the loop variables")
    where = {v: j for j, b in enumerate(blocks) for v in b}
    pos = {v: i for i, v in enumerate(flat)}
    params = set(loop.parameters)
    ring = loop.ring
    n = len(flat)
    M = [[Fraction(0)] * n for _ in range(n)]
    tails: Dict[str, Polynomial] = {}
    tail_deg = [0] * len(blocks)
    depends: List[set] = [set() for _ in blocks]
    for u in flat:
        j = where[u]
        tail_terms = {}
        for m, c in asg[u].terms.items():
            used = [ring[k] for k, e in enumerate(m) if e]
            lvars = [x for x in used if x not in params]
            deg = sum(e for k, e in enumerate(m) if ring[k] not in params)
            if not lvars:
                tail_terms[m] = c
                continue
            blocks_used = {where[x] for x in lvars}
            if max(blocks_used) > j:
                late = next(x for x in lvars if where[x] > j)
                raise Unsupported("order", _cycle_through(graph, u, late),
                                  f"update of {u} reads {late} from a later block")
            if j in blocks_used:
                inner = next(x for x in lvars if where[x] == j)
                if deg != 1 or len(used) != 1:
                    why = "nonlinear" if deg > 1 else "parametric coefficient"
                    raise Unsupported(why, _cycle_through(graph, u, inner),
                                      f"term {format_poly(Polynomial._raw(ring, {m: c}))} in the update of {u}")
                M[pos[u]][pos[inner]] = c
                continue
            tail_terms[m] = c
            tail_deg[j] = max(tail_deg[j], deg)
            depends[j] |= blocks_used
        tails[u] = Polynomial._raw(ring, tail_terms)
    return PSolvableStructure(blocks, M, tails, tail_deg, [sorted(s) for s in depends])


def detect_p_solvable(loop: LoopSystem) -> PSolvableStructure:
    """Finest block decomposition: strongly connected components in topological order."""
    if len(loop.branches) != 1:
        raise Unsupported("multi-branch", detail=f"{len(loop.branches)} branches")
    branch = loop.branches[0]
    if not branch.condition.is_true():
        raise Unsupported("conditional-branch", detail=str(branch.condition))
    g = _dependency_graph(loop, branch.assignment)
    index = {v: i for i, v in enumerate(loop.variables)}
    cond = nx.condensation(g)
    members = {c: sorted(cond.nodes[c]["members"], key=index.get) for c in cond.nodes}
    # edges point from reader to read, so reverse for "earlier blocks first"
    order = list(nx.lexicographical_topological_sort(
        cond.reverse(copy=False), key=lambda c: index[members[c][0]]))
    blocks = [tuple(members[c]) for c in order]
    return _structure_for_partition(loop, blocks, g)


def structure_for_blocks(loop: LoopSystem, blocks: Sequence[Sequence[str]]) -> PSolvableStructure:
    """Structure for a user-given block partition (for example a coarsening)."""
    if len(loop.branches) != 1:
        raise Unsupported("multi-branch", detail=f"{len(loop.branches)} branches")
    if not loop.branches[0].condition.is_true():
        raise Unsupported("conditional-branch", detail=str(loop.branches[0].condition))
    return _structure_for_partition(loop, blocks)


# ------------------------------------------------------------ eigenvalues

def char_poly(M: Sequence[Sequence], var: str = "t") -> Polynomial:
    """det(t*I - M) by Berkowitz's division-free recursion."""
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("matrix must be square")
    gens = (var,)
    if n == 0:
        return Polynomial.constant(gens, 1)
    p = [Fraction(1), -A[0][0]]  # coefficients, highest degree first
    for r in range(1, n):
        R = A[r][:r]
        a = A[r][r]
        col = [Fraction(1), -a]
        v = [A[i][r] for i in range(r)]
        for _ in range(r):
            col.append(-sum(R[i] * v[i] for i in range(r)))
            v = [sum(A[i][j] * v[j] for j in range(r)) for i in range(r)]
        p = [sum(col[i - j] * p[j] for j in range(len(p)) if 0 <= i - j < len(col))
             for i in range(r + 2)]
    return Polynomial(gens, {(n - k,): c for k, c in enumerate(p)})


def _coeffs(p: Polynomial) -> List[Fraction]:
    """Coefficients of a univariate polynomial, highest degree first."""
    deg = p.total_degree()
    return [p.coefficient((deg - k,)) for k in range(deg + 1)]


def _deflate(coeffs: List[Fraction], root: Fraction) -> Optional[List[Fraction]]:
    """Quotient by (t - root) when root is a root, else None."""
    out = [coeffs[0]]
    for c in coeffs[1:]:
        out.append(c + out[-1] * root)
    if out[-1] != 0:
        return None
    return out[:-1]


@dataclass
class EigenData:
    rational: Dict[Fraction, int]
    residual: Polynomial  # monic, no rational roots
    size: int

    @property
    def zero_count(self) -> int:
        return self.rational.get(Fraction(0), 0)

    @property
    def one_count(self) -> int:
        return self.rational.get(Fraction(1), 0)

    @property
    def all_rational(self) -> bool:
        return self.residual.total_degree() == 0

    def nonzero_list(self) -> List[Fraction]:
        """Nonzero rational eigenvalues, repeated by multiplicity, ascending."""
        return [lam for lam in sorted(self.rational) if lam != 0 for _ in range(self.rational[lam])]

    def to_dict(self):
        return {
            "rational": [[str(lam), m] for lam, m in sorted(self.rational.items())],
            "residual": format_poly(self.residual),
            "zero_count": self.zero_count,
            "one_count": self.one_count,
            "all_rational": self.all_rational,
        }


def rational_eigenvalues(charpoly: Polynomial) -> EigenData:
    """Rational roots with multiplicities, plus the monic leftover factor."""
    if len(charpoly.gens) != 1:
        raise ValueError("expected a univariate polynomial")
    if charpoly.is_zero():
        raise ValueError("zero polynomial has no well-defined roots")
    size = charpoly.total_degree()
    c = _coeffs(charpoly)
    roots: Dict[Fraction, int] = {}
    while len(c) > 1 and c[-1] == 0:
        c.pop()
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
    if len(c) > 1:
        den = 1
        for x in c:
            den = den * x.denominator // _gcd(den, x.denominator)
        ints = [int(x * den) for x in c]
        cands = set()
        for p in divisors(abs(ints[-1])):
            for q in divisors(abs(ints[0])):
                cands.add(Fraction(p, q))
                cands.add(Fraction(-p, q))
        for lam in sorted(cands):
            while len(c) > 1:
                q = _deflate(c, lam)
                if q is None:
                    break
                c = q
                roots[lam] = roots.get(lam, 0) + 1
    lead = c[0]
    residual = Polynomial(charpoly.gens, {(len(c) - 1 - k,): x / lead for k, x in enumerate(c)})
    return EigenData(roots, residual, size)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------- lattices

@dataclass
class MultRelationLattice:
    basis: List[List[int]]
    length: int
    source: str = "computed"  # or "user"

    @property
    def rank(self) -> int:
        return len(self.basis)

    def to_dict(self):
        return {"basis": self.basis, "rank": self.rank, "source": self.source}


def relation_holds(lambdas: Sequence[Fraction], e: Sequence[int]) -> bool:
    return prod((Fraction(lam) ** k for lam, k in zip(lambdas, e)), start=Fraction(1)) == 1


def mult_relation_lattice(lambdas: Sequence) -> MultRelationLattice:
    """All integer e with prod(lambda_i ** e_i) == 1, as an HNF basis."""
    lams = [Fraction(x) for x in lambdas]
    if any(x == 0 for x in lams):
        raise ValueError("multiplicative relations need nonzero inputs")
    s = len(lams)
    if s == 0:
        return MultRelationLattice([], 0)
    factored = []
    primes = set()
    for x in lams:
        f = dict(factorint(abs(x.numerator)))
        for p, k in factorint(x.denominator).items():
            f[p] = f.get(p, 0) - k
        f.pop(1, None)
        factored.append(f)
        primes |= set(f)
    # unknowns e_1..e_s and k; the last equation forces an even count of negative factors
    eqs = [[factored[i].get(p, 0) for i in range(s)] + [0] for p in sorted(primes)]
    eqs.append([1 if x < 0 else 0 for x in lams] + [-2])
    kernel = integer_kernel(eqs)
    basis = hermite_normal_form([row[:s] for row in kernel])
    for row in basis:
        if not relation_holds(lams, row):
            raise ArithmeticError(f"relation {row} fails exact evaluation")
    return MultRelationLattice(basis, s)


@dataclass
class LatticeIdeal:
    generators: List[Polynomial]
    ring: Tuple[str, ...]
    dimension: int
    degree: Optional[int]
    degree_status: str  # verified, unverified, budget-exceeded
    slice_degrees: List[Optional[int]] = field(default_factory=list)
    groebner_dimension: Optional[int] = None
    lattice_rank: int = 0
    zero_count: int = 0

    def to_dict(self):
        return {
            "ring": list(self.ring),
            "generators": [format_poly(g) for g in self.generators],
            "dimension": self.dimension,
            "groebner_dimension": self.groebner_dimension,
            "degree": self.degree,
            "degree_status": self.degree_status,
            "slice_degrees": self.slice_degrees,
        }


def _binomial(ring, row) -> Polynomial:
    pos = tuple(max(e, 0) for e in row) + (0,) * (len(ring) - len(row))
    neg = tuple(max(-e, 0) for e in row) + (0,) * (len(ring) - len(row))
    return Polynomial.monomial(ring, pos) - Polynomial.monomial(ring, neg)


def _saturate_by_product(gens: List[Polynomial], ring, count: int, budget) -> List[Polynomial]:
    """Generators of (gens) : (y_1 ... y_count)^infinity by eliminating an inverse."""
    ext = ("_w",) + tuple(ring)
    w = Polynomial.variable(ext, "_w")
    ys = prod((Polynomial.variable(ext, y) for y in ring[:count]), start=Polynomial.constant(ext, 1))
    gb = buchberger([g.embed(ext) for g in gens] + [w * ys - 1], MonomialOrder("block", split=1),
                    budget, ring=ext)
    out = []
    for g in gb.generators:
        if all(m[0] == 0 for m in g.terms):
            out.append(Polynomial(ring, {m[1:]: c for m, c in g.terms.items()}))
    return out


def _slice_degree(gens, ring, r, seed, budget) -> Optional[int]:
    rng = random.Random(seed)
    forms = []
    for _ in range(r):
        terms = {(0,) * len(ring): Fraction(rng.randint(-9, 9), rng.randint(1, 9))}
        for i in range(len(ring)):
            e = tuple(int(k == i) for k in range(len(ring)))
            c = 0
            while c == 0:
                c = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            terms[e] = c
        forms.append(Polynomial(ring, terms))
    gb = buchberger(list(gens) + forms, budget=budget, ring=ring)
    q = quotient_dimension_zero_dim(gb)
    return None if q == INFINITE else int(q)


def lattice_ideal(lattice: MultRelationLattice, zero_eigen_count: int = 0, seed: int = 0,
                  budget: Optional[Budget] = None, repeats: int = 3) -> LatticeIdeal:
    """Binomial ideal of the lattice plus y_j for zero eigenvalues, with dimension and degree.

    The degree is the number of points cut out by ``dimension`` random affine
    hyperplanes, computed ``repeats`` times; it is verified only if all runs
    agree, otherwise the majority is reported as unverified.  Binomials are
    saturated by the product of the nonzero-eigenvalue variables first, since
    those variables stand for powers of nonzero numbers.
    """
    ell = lattice.length
    s = ell + zero_eigen_count
    ring = tuple(f"y{i + 1}" for i in range(s))
    gens = [_binomial(ring, row) for row in lattice.basis]
    gens = [g for g in gens if not g.is_zero()]
    zeros = [Polynomial.variable(ring, ring[ell + j]) for j in range(zero_eigen_count)]
    r = ell - lattice.rank
    out = LatticeIdeal(gens + zeros, ring, r, None, "unverified",
                       lattice_rank=lattice.rank, zero_count=zero_eigen_count)
    if s == 0:
        out.degree, out.degree_status = 1, "verified"
        return out
    try:
        sat = _saturate_by_product(gens, ring, ell, budget) if gens else []
        full = sat + zeros
        if full:
            out.groebner_dimension = ideal_dimension(buchberger(full, budget=budget, ring=ring))
        else:
            out.groebner_dimension = s
        if r == 0:
            runs = [_slice_degree(full, ring, 0, seed, budget)]
        else:
            seeds = [seed * 1000 + k for k in range(repeats)]
            with ThreadPoolExecutor(max_workers=repeats) as pool:
                runs = list(pool.map(lambda sd: _slice_degree(full, ring, r, sd, budget), seeds))
    except BudgetExceeded:
        out.degree_status = "budget-exceeded"
        return out
    out.slice_degrees = runs
    found = [x for x in runs if x is not None]
    if found:
        best = max(set(found), key=lambda x: (found.count(x), -x))
        out.degree = best
        agree = len(found) == len(runs) and len(set(found)) == 1
        out.degree_status = "verified" if agree else "unverified"
    return out


def parse_lattice(text: str) -> List[List[int]]:
    """Rows of whitespace- or comma-separated integers; '#' starts a comment."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError:
            raise ValueError(f"line {lineno}: expected integers, got {line!r}") from None
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("lattice rows have different lengths")
    return rows


# ------------------------------------------------------------------ bounds

def degree_sequence(structure: PSolvableStructure) -> List[int]:
    """D_1 = n_1 and D_j = d_j * max(D_t over blocks t read by block j) + n_j.

    Along a chain of blocks each reading its predecessor this is the usual
    D_j = d_j * D_{j-1} + n_j.
    """
    D: List[int] = []
    for j, n in enumerate(structure.sizes):
        deps = structure.depends_on[j]
        D.append(structure.tail_degrees[j] * max(D[t] for t in deps) + n if deps else n)
    return D


def closed_form_degrees(structure: PSolvableStructure) -> List[int]:
    """Degree of each block's closed form in the exponential terms y_i, when n does not appear."""
    out: List[int] = []
    for j in range(len(structure.blocks)):
        deps = structure.depends_on[j]
        out.append(max(1, structure.tail_degrees[j] * max(out[t] for t in deps)) if deps else 1)
    return out


def degree_bound(structure: PSolvableStructure, ideal: Optional[LatticeIdeal],
                 eigen: Optional[EigenData] = None) -> dict:
    D = degree_sequence(structure)
    Dp = closed_form_degrees(structure)
    notes = []
    hyp = "verified"
    if eigen is not None:
        for lam, name in ((0, "zero_count"), (1, "one_count")):
            if getattr(eigen, name):
                notes.append(f"eigenvalue {lam} present: degree bound hypothesis violated")
                hyp = "violated"
    out = {
        "D": D,
        "d": structure.d,
        "sizes": structure.sizes,
        "closed_form_degrees": Dp,
        "hypothesis": hyp,
        "generic_bound": None,
        "sharp_bound": None,
        "sharp_bound_status": "conditional",
        "notes": notes,
    }
    if ideal is None or ideal.degree is None:
        out["notes"].append("degree of the relation ideal unknown; no bound")
        return out
    r = ideal.dimension
    out["generic_bound"] = ideal.degree * max(D) ** (r + 1)
    out["sharp_bound"] = ideal.degree * max(Dp) ** r
    out["notes"].append("sharp bound assumes closed forms free of n")
    if ideal.degree_status != "verified":
        out["notes"].append("relation ideal degree is " + ideal.degree_status)
    return out


def dimension_and_triviality(ideal: Optional[LatticeIdeal], s: int, parametric: bool,
                             eigen: Optional[EigenData] = None) -> dict:
    if ideal is None:
        return {
            "window": None,
            "window_note": "relation lattice unknown",
            "verdict": INCONCLUSIVE,
            "verdict_note": "irrational eigenvalues: supply a relation lattice with --lattice",
        }
    r = ideal.dimension
    out = {"window": [r, r + 1], "window_note": "lower end holds for generic initial values only"}
    all_rational = eigen.all_rational if eigen is not None else False
    if r + 1 < s:
        out["verdict"] = NONTRIVIAL
        out["verdict_note"] = f"dimension at most {r + 1} < {s} variables"
    elif ideal.lattice_rank == 0 and ideal.zero_count == 0 and all_rational and parametric:
        out["verdict"] = TRIVIAL_PARAMETRIC
        out["verdict_note"] = "eigenvalues multiplicatively independent, initial values symbolic"
    else:
        out["verdict"] = INCONCLUSIVE
        reasons = []
        if ideal.lattice_rank:
            reasons.append(f"lattice rank {ideal.lattice_rank}")
        if ideal.zero_count:
            reasons.append("zero eigenvalue")
        if not all_rational:
            reasons.append("eigenvalues not all rational")
        if not parametric:
            reasons.append("initial values not symbolic")
        out["verdict_note"] = f"dimension bound {r + 1} reaches {s}; " + ", ".join(reasons)
    return out


@dataclass
class BoundReport:
    structure: PSolvableStructure
    eigen: EigenData
    lattice: Optional[MultRelationLattice]
    ideal: Optional[LatticeIdeal]
    bounds: dict
    dimension: dict
    coarsenings: List[dict]
    parametric: bool

    @property
    def verdict(self) -> str:
        return self.dimension["verdict"]

    @property
    def window(self):
        return self.dimension["window"]

    def to_dict(self):
        return {
            "structure": self.structure.to_dict(),
            "characteristic_polynomial": format_poly(char_poly(self.structure.matrix)),
            "eigenvalues": self.eigen.to_dict(),
            "lattice": self.lattice.to_dict() if self.lattice else None,
            "relation_ideal": self.ideal.to_dict() if self.ideal else None,
            "bounds": self.bounds,
            "dimension_window": self.dimension["window"],
            "window_note": self.dimension["window_note"],
            "verdict": self.dimension["verdict"],
            "verdict_note": self.dimension["verdict_note"],
            "parametric": self.parametric,
            "coarsenings": self.coarsenings,
        }


def analyze(loop: LoopSystem, lattice_rows: Optional[Sequence[Sequence[int]]] = None,
            coarsenings: Sequence[Sequence[Sequence[str]]] = (), parametric: Optional[bool] = None,
            seed: int = 0, budget: Optional[Budget] = None) -> BoundReport:
    """Full structural analysis of a single-branch loop."""
    st = detect_p_solvable(loop)
    eig = rational_eigenvalues(char_poly(st.matrix))
    s = len(loop.variables)
    if parametric is None:
        parametric = loop.is_fully_parametric()
    ell = s - eig.zero_count
    lat = None
    if lattice_rows is not None:
        rows = [list(map(int, r)) for r in lattice_rows]
        if any(len(r) != ell for r in rows):
            raise ValueError(f"lattice rows must have {ell} entries, one per nonzero eigenvalue")
        if eig.all_rational:
            lams = eig.nonzero_list()
            bad = [r for r in rows if not relation_holds(lams, r)]
            if bad:
                raise ValueError(f"lattice row {bad[0]} is not a relation among {[str(x) for x in lams]}")
        lat = MultRelationLattice(hermite_normal_form(rows), ell, source="user")
    elif eig.all_rational:
        lat = mult_relation_lattice(eig.nonzero_list())
    ideal = lattice_ideal(lat, eig.zero_count, seed=seed, budget=budget) if lat is not None else None
    bounds = degree_bound(st, ideal, eig)
    dim = dimension_and_triviality(ideal, s, parametric, eig)
    extra = []
    for blocks in coarsenings:
        cs = structure_for_blocks(loop, blocks)
        b = degree_bound(cs, ideal, eig)
        extra.append({"blocks": [list(x) for x in cs.blocks], **{k: b[k] for k in
                      ("D", "d", "sizes", "closed_form_degrees", "generic_bound", "sharp_bound")}})
    return BoundReport(st, eig, lat, ideal, bounds, dim, extra, parametric)
