"""Exact emulation of a loop to collect points on its trajectory."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .loop_model import InvariantMode, LoopError, LoopSystem

State = Tuple[Fraction, ...]  # variables followed by parameters


class ExclusivityViolation(LoopError):
    """Two branch conditions hold at the same state."""

    def __init__(self, point, branches):
        pt = ", ".join(str(v) for v in point)
        super().__init__(f"branches {branches} are all enabled at ({pt})")
        self.point = point
        self.branches = branches


class UnsatisfiableInit(LoopError):
    """No parameter instantiation satisfying init was found."""


@dataclass(frozen=True)
class SampleConfig:
    mode: InvariantMode = InvariantMode.INDUCTIVE
    depth: int = 12
    num_initials: int = 3
    seed: int = 0
    coordinate_bound: int = 20
    parametric: bool = False

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.num_initials < 1:
            raise ValueError("num_initials must be >= 1")


def _enabled(loop: LoopSystem, state: State, mode: InvariantMode) -> List[int]:
    if mode is InvariantMode.ABSOLUTE:
        return list(range(len(loop.branches)))
    if mode is InvariantMode.PLAIN and not loop.guard.holds(state):
        return []
    hits = [k for k, b in enumerate(loop.branches) if b.condition.holds(state)]
    if len(hits) > 1:
        raise ExclusivityViolation(state, hits)
    return hits


def successors(loop: LoopSystem, state: State, mode: InvariantMode) -> List[Tuple[int, State]]:
    """(branch index, image) for every transition enabled at ``state``."""
    out = []
    for k in _enabled(loop, state, mode):
        out.append((k, loop.branches[k].apply(state, loop.variables)))
    return out


def step(loop: LoopSystem, point: Sequence, mode: InvariantMode) -> List[tuple]:
    """Images of ``point`` (variables, then parameters if any) after one iteration."""
    state = tuple(Fraction(v) for v in point)
    if len(state) != len(loop.ring):
        raise ValueError(f"point has {len(state)} coordinates, loop ring is {loop.ring}")
    seen = []
    for _, img in successors(loop, state, mode):
        if img not in seen:
            seen.append(img)
    return seen


def _random_rational(rng: random.Random, bound: int) -> Fraction:
    den = rng.randint(1, bound)
    num = rng.randint(-bound, bound)
    return Fraction(num, den)


def initial_states(loop: LoopSystem, cfg: SampleConfig) -> List[State]:
    """Instantiated start states; parameter-free loops have exactly one."""
    init = loop.initial_assignment()
    if not loop.parameters:
        return [tuple(Fraction(init[v]) for v in loop.variables)]
    pcons = loop.parameter_constraints()
    rng = random.Random(cfg.seed)
    out: List[State] = []
    attempts = 0
    limit = cfg.num_initials * 100
    while len(out) < cfg.num_initials:
        if attempts >= limit:
            raise UnsatisfiableInit(
                f"found {len(out)} of {cfg.num_initials} parameter values satisfying init "
                f"after {limit} attempts"
            )
        attempts += 1
        params = tuple(_random_rational(rng, cfg.coordinate_bound) for _ in loop.parameters)
        vals = dict(zip(loop.parameters, params))
        xs = tuple(vals[init[v]] if isinstance(init[v], str) else Fraction(init[v]) for v in loop.variables)
        state = xs + params
        if not pcons.holds(state, allow_order=True):
            continue
        if state in out:
            continue
        out.append(state)
    return out


def trajectory_states(loop: LoopSystem, cfg: SampleConfig,
                      max_points: Optional[int] = None) -> List[Tuple[State, int]]:
    """Breadth-first states within ``depth`` steps, with the depth they were first reached at.

    With ``max_points`` each initial state contributes at most its share of
    the cap, so branching loops stay bounded.
    """
    seen: Dict[State, int] = {}
    order: List[Tuple[State, int]] = []
    starts = initial_states(loop, cfg)
    share = None if max_points is None else max(1, -(-max_points // len(starts)))
    for start in starts:
        budget = share
        if start not in seen:
            seen[start] = 0
            order.append((start, 0))
            if budget is not None:
                budget -= 1
        frontier = [start]
        for d in range(1, cfg.depth + 1):
            if budget is not None and budget <= 0:
                break
            nxt = []
            for s in frontier:
                for _, img in successors(loop, s, cfg.mode):
                    if img not in seen:
                        seen[img] = d
                        order.append((img, d))
                        nxt.append(img)
                        if budget is not None:
                            budget -= 1
                            if budget <= 0:
                                break
                if budget is not None and budget <= 0:
                    break
            if not nxt:
                break
            frontier = nxt
    return order


def project(loop: LoopSystem, state: State, parametric: bool) -> State:
    return state if parametric else state[: len(loop.variables)]


def sample_points(loop: LoopSystem, cfg: SampleConfig, max_points: Optional[int] = None) -> List[State]:
    """Deduplicated trajectory points; parameter values appended when ``cfg.parametric``."""
    out = []
    seen = set()
    for state, _ in trajectory_states(loop, cfg, max_points):
        p = project(loop, state, cfg.parametric)
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def point_to_json(point: Sequence[Fraction]) -> List[str]:
    return [str(Fraction(v)) for v in point]


def point_from_json(values: Sequence[str]) -> State:
    return tuple(Fraction(v) for v in values)
