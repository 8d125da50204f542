"""Quadratic transformations of the Picard lattice.

The step at points ``(i, j, k)`` sends ``H -> 2H - E_i - E_j - E_k`` and
``E_i -> H - E_j - E_k`` (cyclically).  On coefficients this is

    d'   = 2d - m_i - m_j - m_k
    m_i' = d - m_j - m_k        (and cyclically)

It preserves the intersection form and K_X and is an involution.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Any, Union

from .criteria import Inequality, PreconditionError, Property, Status, Verdict
from .lattice import BlowupContext, DivisorClass, curve_class, largest_sum, sorted_multiplicities


@dataclass(frozen=True)
class CremonaStep:
    """Three distinct 0-based point indices."""

    indices: tuple[int, int, int]

    def __post_init__(self):
        idx = tuple(self.indices)
        if len(idx) != 3 or len(set(idx)) != 3:
            raise ValueError(f"need three distinct indices, got {idx}")
        if min(idx) < 0:
            raise ValueError(f"indices must be nonnegative, got {idx}")
        object.__setattr__(self, "indices", idx)

    def apply(self, L: DivisorClass) -> DivisorClass:
        return apply_cremona(L, self)

    def to_json(self) -> dict[str, Any]:
        return {"cremona": [i + 1 for i in self.indices]}


@dataclass(frozen=True)
class Reindex:
    """Relabel points: the new j-th multiplicity is the old ``perm[j]``-th."""

    perm: tuple[int, ...]

    def apply(self, L: DivisorClass) -> DivisorClass:
        if sorted(self.perm) != list(range(L.r)):
            raise ValueError(f"{self.perm} is not a permutation of {L.r} points")
        return DivisorClass(L.d, tuple(L.mults[i] for i in self.perm))

    def to_json(self) -> dict[str, Any]:
        return {"reindex": [i + 1 for i in self.perm]}


Step = Union[CremonaStep, Reindex]


class Outcome(str, enum.Enum):
    STANDARD = "Standard"
    EXCELLENT = "Excellent"
    NOT_STANDARDIZABLE = "NotStandardizable"
    DEPTH_EXHAUSTED = "DepthExhausted"


@dataclass(frozen=True)
class ReductionTrace:
    initial: DivisorClass
    final: DivisorClass
    steps: tuple[Step, ...]
    outcome: Outcome

    @property
    def cremona_count(self) -> int:
        return sum(isinstance(s, CremonaStep) for s in self.steps)

    def replay(self) -> DivisorClass:
        cur = self.initial
        for step in self.steps:
            cur = step.apply(cur)
        return cur

    def to_json(self) -> dict[str, Any]:
        return {
            "initial": self.initial.to_json(),
            "final": self.final.to_json(),
            "final_text": str(self.final),
            "steps": [s.to_json() for s in self.steps],
            "cremona_steps": self.cremona_count,
            "outcome": self.outcome.value,
        }


def apply_cremona(L: DivisorClass, step: CremonaStep, ctx: BlowupContext | None = None) -> DivisorClass:
    if ctx is not None:
        ctx.check(L)
    if L.r < 3:
        raise ValueError(f"quadratic transformation needs r >= 3, got r={L.r}")
    i, j, k = step.indices
    if max(i, j, k) >= L.r:
        raise ValueError(f"step {step.indices} out of range for r={L.r}")
    d, m = L.d, list(L.mults)
    mi, mj, mk = m[i], m[j], m[k]
    m[i], m[j], m[k] = d - mj - mk, d - mi - mk, d - mi - mj
    return DivisorClass(2 * d - mi - mj - mk, tuple(m))


def _sort_step(L: DivisorClass) -> tuple[DivisorClass, Reindex | None]:
    _, perm = sorted_multiplicities(L)
    if perm == tuple(range(L.r)):
        return L, None
    step = Reindex(perm)
    return step.apply(L), step


def _require_e3(ctx: BlowupContext) -> None:
    if ctx.e != 3:
        raise PreconditionError(f"this reduction is for e = 3, got e={ctx.e}")
    if ctx.r < 3:
        raise PreconditionError(f"need r >= 3, got r={ctx.r}")


def reduce_to_standard_e3(L: DivisorClass, ctx: BlowupContext) -> ReductionTrace:
    """Sort, and while ``d < m_1 + m_2 + m_3`` apply the step at the three
    largest multiplicities.  Every applied step lowers d, so this stops.

    Standard means ``d >= m_1 + m_2 + m_3`` with all ``m_i >= 0``; stopping
    with a negative multiplicity, or with ``d < 0``, is NotStandardizable.
    """
    _require_e3(ctx)
    ctx.check(L)
    C1 = curve_class(ctx)
    steps: list[Step] = []
    cur = L
    while True:
        cur, sort = _sort_step(cur)
        if sort is not None:
            steps.append(sort)
        if cur.d >= sum(cur.mults[:3]):
            if cur.mults[-1] < 0:
                # negative on an exceptional class of this configuration
                outcome = Outcome.NOT_STANDARDIZABLE
            else:
                outcome = Outcome.EXCELLENT if cur @ C1 > 0 else Outcome.STANDARD
            break
        if cur.d < 0:
            outcome = Outcome.NOT_STANDARDIZABLE
            break
        step = CremonaStep((0, 1, 2))
        cur = apply_cremona(cur, step)
        steps.append(step)
    return ReductionTrace(L, cur, tuple(steps), outcome)


def check_excellent_e3(L: DivisorClass, ctx: BlowupContext) -> Verdict:
    """For e = 3 with every m_i > 0: ample iff excellent in some
    exceptional configuration.  The reduction trace is the certificate."""
    _require_e3(ctx)
    ctx.check(L)
    if min(L.mults) <= 0:
        raise PreconditionError(f"needs every m_i > 0, got {list(L.mults)}")
    trace = reduce_to_standard_e3(L, ctx)
    final = trace.final
    details = (
        Inequality("final d", final.d, ">=", "final m_1+m_2+m_3", sum(final.mults[:3])),
        Inequality("L.C1", L @ curve_class(ctx), ">", "0", 0),
    )
    failed = tuple(str(q) for q in details if not q.holds)
    status = Status.POSITIVE if trace.outcome is Outcome.EXCELLENT else Status.NEGATIVE
    return Verdict(status, Property.AMPLE, "Harbourne-excellent", details, certificate=trace,
                   annotations=(f"reduction outcome: {trace.outcome.value}",), failed=failed)


@dataclass(frozen=True)
class SearchStats:
    nodes_explored: int
    pruned: int
    max_depth_reached: int
    depth_cap: int
    degree_cap: int
    frontier_exhausted: bool

    def to_json(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class OrbitSearchResult:
    found: bool
    stats: SearchStats
    trace: ReductionTrace | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "result": "Found" if self.found else "NotFoundWithinBound",
            "stats": self.stats.to_json(),
        }
        if self.trace is not None:
            out["trace"] = self.trace.to_json()
        return out


def _canonical(L: DivisorClass) -> tuple[int, tuple[int, ...]]:
    ms, _ = sorted_multiplicities(L)
    return L.d, ms


def orbit_search_standard(
    L: DivisorClass,
    ctx: BlowupContext,
    max_depth: int,
    max_degree: int | None = None,
) -> OrbitSearchResult:
    """Breadth-first search for a configuration where ``d >= m_1 + ... + m_e``.

    Nodes are classes up to relabelling of the points.  Nodes with ``d < 0``
    or ``d > max_degree`` (default: the input degree) are dropped.  A
    NotFound result with ``frontier_exhausted`` means every node reachable
    inside the degree cap was visited; it says nothing about classes beyond
    the cap.
    """
    ctx.check(L)
    if ctx.r < 3:
        raise PreconditionError(f"need r >= 3, got r={ctx.r}")
    if max_depth < 0:
        raise ValueError("max_depth must be nonnegative")
    cap = L.d if max_degree is None else max_degree
    e, r = ctx.e, ctx.r

    def is_target(node) -> bool:
        return node[0] >= largest_sum(node[1], e)

    root = _canonical(L)
    parent: dict[tuple, tuple | None] = {root: None}
    queue = deque([(root, 0)])
    pruned = 0
    deepest = 0
    capped = False
    hit = root if is_target(root) else None

    while queue and hit is None:
        node, depth = queue.popleft()
        deepest = max(deepest, depth)
        if depth >= max_depth:
            capped = True
            continue
        cls = DivisorClass(node[0], node[1])
        seen_values = set()
        for tri in itertools.combinations(range(r), 3):
            vals = tuple(node[1][t] for t in tri)
            if vals in seen_values:
                continue
            seen_values.add(vals)
            child = _canonical(apply_cremona(cls, CremonaStep(tri)))
            if child[0] < 0 or child[0] > cap:
                pruned += 1
                continue
            if child in parent:
                continue
            parent[child] = (node, tri)
            if is_target(child):
                hit = child
                deepest = max(deepest, depth + 1)
                break
            queue.append((child, depth + 1))

    stats = SearchStats(
        nodes_explored=len(parent),
        pruned=pruned,
        max_depth_reached=deepest,
        depth_cap=max_depth,
        degree_cap=cap,
        frontier_exhausted=hit is None and not capped and not queue,
    )
    if hit is None:
        return OrbitSearchResult(False, stats)

    path = []
    node = hit
    while parent[node] is not None:
        prev, tri = parent[node]
        path.append(tri)
        node = prev
    path.reverse()

    steps: list[Step] = []
    cur, sort = _sort_step(L)
    if sort is not None:
        steps.append(sort)
    for tri in path:
        step = CremonaStep(tri)
        cur = apply_cremona(cur, step)
        steps.append(step)
        cur, sort = _sort_step(cur)
        if sort is not None:
            steps.append(sort)
    outcome = Outcome.STANDARD
    if e == 3 and cur @ curve_class(ctx) > 0:
        outcome = Outcome.EXCELLENT
    return OrbitSearchResult(True, stats, ReductionTrace(L, cur, tuple(steps), outcome))
