"""Candidate invariants by interpolation over Q or modulo machine primes.

Rows of the evaluation matrix index sample points and columns index the
monomial template, so the null space lives in coefficient space.  Templates
are kept in descending monomial order; the reduced row-echelon null space
basis then has pairwise distinct leading monomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence

from .checker import BUDGET_EXCEEDED, CertificationReport, certify
from .groebner import Budget, BudgetExceeded, buchberger
from .loop_model import InvariantMode, LoopSystem
from .polyalg.linalg import nullspace_echelon, nullspace_echelon_mod, pivot_columns
from .polyalg.modular import (
    MAX_MACHINE_PRIME,
    congruent,
    prev_prime,
    reconstruct_vector,
)
from .polyalg.poly import DEGREVLEX, Monomial, Polynomial, gen_poly, monomials_up_to_degree
from .sampler import SampleConfig, sample_points

EMPTY_NULLSPACE = "empty-nullspace"
NOT_STABILIZED = "reconstruction-not-stabilized"
FRESH_FAILED = "fresh-point-check-failed"
CERT_FAILED = "certification-failed"
BUDGET = "budget-exceeded"


class UnluckyPrime(ArithmeticError):
    """A sample coordinate has a denominator divisible by the prime."""


@dataclass
class LinSys:
    monomials: List[Monomial]
    matrix: List[list]
    prime: Optional[int] = None


def _check_arity(monomials, points):
    if not monomials:
        raise ValueError("empty monomial template")
    n = len(monomials[0])
    for m in monomials:
        if len(m) != n:
            raise ValueError("monomials of mixed arity")
    for pt in points:
        if len(pt) != n:
            raise ValueError(f"point {tuple(map(str, pt))} has arity {len(pt)}, template has {n}")
    return n


def build_lin_sys(monomials: Sequence[Monomial], points) -> LinSys:
    """Exact evaluation matrix: entry (i, j) is monomial j at point i."""
    n = _check_arity(monomials, points)
    maxdeg = [max(m[k] for m in monomials) for k in range(n)]
    rows = []
    for pt in points:
        pt = [Fraction(v) for v in pt]
        pw = [[Fraction(1)] * (maxdeg[k] + 1) for k in range(n)]
        for k in range(n):
            for e in range(1, maxdeg[k] + 1):
                pw[k][e] = pw[k][e - 1] * pt[k]
        row = []
        for m in monomials:
            v = Fraction(1)
            for k, e in enumerate(m):
                if e:
                    v *= pw[k][e]
            row.append(v)
        rows.append(row)
    return LinSys(list(monomials), rows)


def build_lin_sys_modp(monomials: Sequence[Monomial], points, p: int) -> LinSys:
    """The evaluation matrix reduced into Z/p."""
    _check_arity(monomials, points)
    rows = []
    for pt in points:
        res = []
        for v in pt:
            v = Fraction(v)
            if v.denominator % p == 0:
                raise UnluckyPrime(f"denominator {v.denominator} vanishes modulo {p}")
            res.append(v.numerator * pow(v.denominator, -1, p) % p)
        row = []
        for m in monomials:
            v = 1
            for k, e in enumerate(m):
                if e:
                    v = v * pow(res[k], e, p) % p
            row.append(v)
        rows.append(row)
    return LinSys(list(monomials), rows, prime=p)


@dataclass
class InterpolationResult:
    engine: str
    status: str  # "certified" or "fail"
    reason: Optional[str] = None
    detail: str = ""
    nullspace: Optional[List[list]] = None
    dim: Optional[int] = None
    candidates: List[Polynomial] = field(default_factory=list)
    groebner: List[Polynomial] = field(default_factory=list)
    certification: Optional[CertificationReport] = None
    primes: List[int] = field(default_factory=list)
    skipped_primes: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "certified"

    @property
    def basis(self) -> Optional[List[Polynomial]]:
        """The certified candidate basis, or None on FAIL."""
        return self.candidates if self.ok else None

    def to_dict(self):
        return {
            "engine": self.engine,
            "status": self.status,
            "reason": self.reason,
            "detail": self.detail,
            "nullspace_dimension": self.dim,
            "candidates": [str(f) for f in self.candidates],
            "groebner_basis": [str(g) for g in self.groebner],
            "certification": self.certification.to_dict() if self.certification else None,
            "primes": self.primes,
            "skipped_primes": self.skipped_primes,
        }


def _gate(result: InterpolationResult, loop, mode, budget) -> InterpolationResult:
    """Certify the candidates and record the verdict."""
    report = certify(loop, result.candidates, mode, budget)
    result.certification = report
    if report.certified:
        result.status = "certified"
        try:
            result.groebner = buchberger(result.candidates, DEGREVLEX, budget).generators
        except BudgetExceeded:
            result.groebner = []
    elif report.status == BUDGET_EXCEEDED:
        result.reason = BUDGET
        result.detail = report.detail
    else:
        result.reason = CERT_FAILED
        result.detail = report.label() + ": " + report.detail
    return result


def _default_gens(loop: LoopSystem, points) -> tuple:
    if points and len(points[0]) == len(loop.ring):
        return loop.ring
    return tuple(loop.variables)


def _empty(result, ncols):
    result.reason = EMPTY_NULLSPACE
    result.detail = (
        f"no polynomial of the {ncols}-monomial template vanishes on the samples "
        "(zero invariant ideal in this degree, or degree too low)"
    )
    return result


def plain_inv_interp(monomials, points, loop: LoopSystem, mode: InvariantMode = InvariantMode.INDUCTIVE,
                     gens=None, budget: Optional[Budget] = None) -> InterpolationResult:
    """Direct interpolation over Q followed by certification."""
    gens = tuple(gens) if gens is not None else _default_gens(loop, points)
    result = InterpolationResult(engine="direct", status="fail")
    lin = build_lin_sys(monomials, points)
    N = nullspace_echelon(lin.matrix, ncols=len(monomials))
    result.nullspace = N
    result.dim = len(N)
    if not N:
        return _empty(result, len(monomials))
    result.candidates = [gen_poly(gens, monomials, row) for row in N]
    return _gate(result, loop, mode, budget)


def modp_inv_interp(monomials, points, loop: LoopSystem, mode: InvariantMode = InvariantMode.INDUCTIVE,
                    n_max_images: int = 8, gens=None, budget: Optional[Budget] = None,
                    fresh_points=None, start_prime: int = MAX_MACHINE_PRIME,
                    max_primes: Optional[int] = None) -> InterpolationResult:
    """Small-prime interpolation with rational reconstruction, then certification.

    Images of larger null space dimension than the current minimum are
    dropped; a smaller one discards all earlier images.  A reconstruction is
    accepted once it reduces to the next retained image, so every accepted
    answer has been checked against a prime it was not built from.
    """
    if n_max_images < 1:
        raise ValueError("n_max_images must be >= 1")
    gens = tuple(gens) if gens is not None else _default_gens(loop, points)
    budget = budget or Budget()
    ncols = len(monomials)
    cap = max_primes if max_primes is not None else 4 * n_max_images + 8
    result = InterpolationResult(engine="modular", status="fail")

    images = []  # (prime, echelon basis)
    dim = None
    pivots = None
    candidate = None
    accepted = None
    p = start_prime
    tried = 0
    while tried < cap and p > 2:
        budget.check_time()
        tried += 1
        try:
            lin = build_lin_sys_modp(monomials, points, p)
        except UnluckyPrime:
            result.skipped_primes.append(p)
            p = prev_prime(p)
            continue
        N = nullspace_echelon_mod(lin.matrix, p, ncols)
        piv = pivot_columns(N)
        if dim is None or len(N) < dim:
            dim, pivots, images, candidate = len(N), piv, [(p, N)], None
            if dim == 0:
                result.dim = 0
                result.primes = [p]
                result.nullspace = []
                return _empty(result, ncols)
        elif len(N) > dim or piv != pivots:
            result.skipped_primes.append(p)
            p = prev_prime(p)
            continue
        else:
            images.append((p, N))
            if candidate is not None and all(congruent(r, n, p) for r, n in zip(candidate, N)):
                accepted = candidate
                break
        if len(images) >= n_max_images:
            break
        candidate = _reconstruct(images)
        p = prev_prime(p)

    result.dim = dim
    result.primes = [q for q, _ in images]
    if accepted is None:
        result.reason = NOT_STABILIZED
        result.detail = (
            f"rational reconstruction did not stabilise within {len(images)} image(s); "
            "the product of the moduli is too small"
        )
        return result
    result.nullspace = accepted
    result.candidates = [gen_poly(gens, monomials, row) for row in accepted]
    if fresh_points:
        for f in result.candidates:
            for pt in fresh_points:
                if f.evaluate(pt) != 0:
                    result.reason = FRESH_FAILED
                    result.detail = f"{f} does not vanish at fresh sample ({', '.join(map(str, pt))})"
                    return result
    return _gate(result, loop, mode, budget)


def _reconstruct(images):
    primes = [q for q, _ in images]
    rows = []
    for k in range(len(images[0][1])):
        rec = reconstruct_vector([N[k] for _, N in images], primes)
        if rec is None:
            return None
        rows.append(rec)
    return rows


# ---------------------------------------------------------------------------
# end-to-end driver
# ---------------------------------------------------------------------------

@dataclass
class InferenceRun:
    result: InterpolationResult
    gens: tuple
    template_size: int
    points_used: int
    effective_config: SampleConfig
    fresh_points: int = 0

    def to_dict(self):
        cfg = self.effective_config
        out = self.result.to_dict()
        out.update(
            {
                "ring": list(self.gens),
                "claim": "certified invariants" if self.result.ok else None,
                "template_size": self.template_size,
                "points_used": self.points_used,
                "fresh_points": self.fresh_points,
                "sampling": {
                    "mode": cfg.mode.value,
                    "depth": cfg.depth,
                    "initials": cfg.num_initials,
                    "seed": cfg.seed,
                    "coordinate_bound": cfg.coordinate_bound,
                    "parametric": cfg.parametric,
                },
            }
        )
        return out


def template(n: int, degree: int) -> List[Monomial]:
    """Dense template of total degree <= ``degree``, largest monomial first."""
    return list(reversed(monomials_up_to_degree(n, degree, DEGREVLEX)))


def plan_sampling(loop: LoopSystem, cfg: SampleConfig, n_monomials: int, degree: int, margin: int) -> SampleConfig:
    """Raise depth and instantiation count so the samples can pin down the template."""
    needed = n_monomials + margin
    initials = cfg.num_initials if loop.parameters else 1
    depth = cfg.depth
    if loop.parameters and cfg.parametric:
        # no nonzero polynomial in the parameters alone may vanish on every instantiation
        initials = max(initials, math.comb(len(loop.parameters) + degree, degree) + 1)
        depth = max(depth, math.comb(len(loop.variables) + degree, degree) + 1)
    depth = max(depth, -(-needed // initials))
    return replace(cfg, depth=depth, num_initials=initials)


def infer_invariants(loop: LoopSystem, degree: int = 2, cfg: Optional[SampleConfig] = None,
                     engine: str = "modular", margin: int = 5, max_images: int = 8,
                     monomials: Optional[Sequence[Monomial]] = None,
                     budget: Optional[Budget] = None) -> InferenceRun:
    """Sample, interpolate with the chosen engine, and certify."""
    cfg = cfg or SampleConfig()
    gens = loop.ring if (cfg.parametric and loop.parameters) else tuple(loop.variables)
    if monomials is None:
        monomials = template(len(gens), degree)
    else:
        monomials = sorted(set(map(tuple, monomials)), key=DEGREVLEX.key, reverse=True)
        degree = max(sum(m) for m in monomials)
    eff = plan_sampling(loop, cfg, len(monomials), degree, margin)
    needed = len(monomials) + margin
    cap = max(4 * needed, 64)
    points = sample_points(loop, eff, cap)
    for _ in range(6):
        if len(points) >= needed:
            break
        eff = replace(eff, depth=eff.depth * 2)
        points = sample_points(loop, eff, cap)

    if engine not in ("modular", "direct"):
        raise ValueError(f"unknown engine {engine!r}")
    fresh = []
    try:
        if engine == "modular":
            seen = set(points)
            fresh_cfg = replace(eff, depth=eff.depth * 2, seed=eff.seed + 1)
            fresh = [q for q in sample_points(loop, fresh_cfg, 2 * cap) if q not in seen][:cap]
            result = modp_inv_interp(monomials, points, loop, eff.mode, max_images, gens, budget, fresh)
        else:
            result = plain_inv_interp(monomials, points, loop, eff.mode, gens, budget)
    except BudgetExceeded as exc:
        result = InterpolationResult(engine=engine, status="fail", reason=BUDGET, detail=str(exc))
    return InferenceRun(result, gens, len(monomials), len(points), eff, len(fresh))
