"""Certification of candidate invariants.

A set F is certified when every initial state lies on V(F) and every branch
maps V(F) intersected with its condition back into V(F).  Both inclusions
are decided by (non-radical) ideal membership, which is sound but not
complete: a failure means "not certified", never "not an invariant".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .groebner import Budget, BudgetExceeded, saturated_ideal
from .loop_model import Branch, ConstraintSet, InvariantMode, LoopSystem
from .polyalg.poly import Polynomial, format_poly
from .sampler import SampleConfig, successors, trajectory_states

CERTIFIED = "certified"
FAILED_INITIAL = "failed-initial"
FAILED_BRANCH = "failed-branch"
BUDGET_EXCEEDED = "budget-exceeded"


@dataclass
class CertificationReport:
    status: str
    initial: List[bool] = field(default_factory=list)
    branches: List[List[bool]] = field(default_factory=list)
    failed_branch: Optional[int] = None  # 1-based
    detail: str = ""
    bases: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def label(self) -> str:
        if self.status == FAILED_BRANCH:
            return f"{FAILED_BRANCH}({self.failed_branch})"
        return self.status

    def to_dict(self):
        return {
            "status": self.label(),
            "initial": self.initial,
            "branches": self.branches,
            "detail": self.detail,
            "membership_bases": self.bases,
        }


def _in_ring(F: Sequence[Polynomial], ring) -> List[Polynomial]:
    return [f.embed(ring) for f in F]


def check_initial(F: Sequence[Polynomial], init: ConstraintSet, ring=None,
                  budget: Optional[Budget] = None) -> List[bool]:
    """Per-polynomial verdict for Z(init) being contained in V(f)."""
    if not F:
        return []
    ring = tuple(ring) if ring is not None else F[0].gens
    F = _in_ring(F, ring)
    gb = saturated_ideal(list(init.equations), list(init.inequations), ring, budget=budget)
    return [gb.contains(f) for f in F]


def _images(loop_vars, ring, branch: Branch) -> Dict[str, Polynomial]:
    images = {name: Polynomial.variable(ring, name) for name in ring}
    for v in loop_vars:
        images[v] = branch.assignment[v].embed(ring)
    return images


def check_consecution(F: Sequence[Polynomial], branch: Branch, loop: LoopSystem,
                      condition: Optional[ConstraintSet] = None,
                      budget: Optional[Budget] = None, _bases=None) -> List[bool]:
    """Per-polynomial verdict for f(A(x)) lying in <F, condition> (inequations saturated).

    ``condition`` defaults to the branch condition; order atoms are dropped,
    which only enlarges the region checked.
    """
    if not F:
        return []
    ring = loop.ring
    F = _in_ring(F, ring)
    cond = branch.condition if condition is None else condition
    gb = saturated_ideal(F + list(cond.equations), list(cond.inequations), ring, budget=budget)
    if _bases is not None:
        _bases.append([format_poly(g) for g in gb.generators])
    images = _images(loop.variables, ring, branch)
    return [gb.contains(f.substitute(images)) for f in F]


def _condition_for(loop: LoopSystem, branch: Branch, mode: InvariantMode) -> ConstraintSet:
    if mode is InvariantMode.ABSOLUTE:
        return ConstraintSet()
    if mode is InvariantMode.PLAIN:
        g = loop.guard
        c = branch.condition
        return ConstraintSet(c.equations + g.equations, c.inequations + g.inequations)
    return branch.condition


def certify(loop: LoopSystem, F: Sequence[Polynomial], mode: InvariantMode = InvariantMode.INDUCTIVE,
            budget: Optional[Budget] = None) -> CertificationReport:
    """Initial inclusion plus consecution on every branch."""
    F = [f for f in F if not f.is_zero()]
    report = CertificationReport(status=CERTIFIED)
    try:
        report.initial = check_initial(F, loop.init, loop.ring, budget)
        if not all(report.initial):
            report.status = FAILED_INITIAL
            bad = [format_poly(f) for f, ok in zip(F, report.initial) if not ok]
            report.detail = "initial states not contained in V(" + ", ".join(bad) + ")"
            return report
        for k, branch in enumerate(loop.branches, 1):
            bases = []
            verdicts = check_consecution(
                F, branch, loop, _condition_for(loop, branch, mode), budget, _bases=bases
            )
            report.branches.append(verdicts)
            report.bases[f"branch{k}"] = bases[0] if bases else []
            if not all(verdicts):
                report.status = FAILED_BRANCH
                report.failed_branch = k
                bad = [format_poly(f) for f, ok in zip(F, verdicts) if not ok]
                report.detail = f"branch {k} does not preserve " + ", ".join(bad)
                return report
    except BudgetExceeded as exc:
        report.status = BUDGET_EXCEEDED
        report.detail = str(exc)
    return report


@dataclass
class Counterexample:
    point: tuple
    branch: int  # 1-based
    polynomial: Polynomial
    image: tuple

    def to_dict(self):
        return {
            "point": [str(v) for v in self.point],
            "branch": self.branch,
            "polynomial": format_poly(self.polynomial),
            "image": [str(v) for v in self.image],
        }


def falsify_by_samples(loop: LoopSystem, F: Sequence[Polynomial], cfg: SampleConfig) -> Optional[Counterexample]:
    """A sampled state on V(F) whose image under an enabled branch leaves V(F), if any."""
    F = _in_ring([f for f in F if not f.is_zero()], loop.ring)
    if not F:
        return None
    for state, _ in trajectory_states(loop, cfg):
        if any(f.evaluate(state) != 0 for f in F):
            continue
        for k, img in successors(loop, state, cfg.mode):
            for f in F:
                if f.evaluate(img) != 0:
                    return Counterexample(state, k + 1, f, img)
    return None
