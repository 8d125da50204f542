"""Brute-force cross-checks.

Reider and Beltrametti-Francia-Sommese obstruction predicates, bounded
enumeration of obstruction candidates, and certificate verification.
Everything here is deliberately simple; it is meant to check the
criteria module, not to share code paths with it.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterator

from .criteria import (
    EffectivityCertificate,
    PreconditionError,
    Status,
    Verdict,
    check_ample,
    check_ample_uniform,
    check_nef,
)
from .lattice import BlowupContext, DivisorClass, curve_class

DEFAULT_MAX_SPACE = 10**9


class EnumerationTooLarge(ValueError):
    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(f"enumeration would visit {required} classes, cap is {cap}")


def bfs_condition(N: DivisorClass, D: DivisorClass, k: int, ctx: BlowupContext | None = None) -> bool:
    """``N.D - k - 1 <= D^2 < N.D / 2 < k + 1``, doubled to stay in integers."""
    if ctx is not None:
        ctx.check(N)
        ctx.check(D)
    alpha = N @ D
    beta = D @ D
    return alpha - k - 1 <= beta and 2 * beta < alpha and alpha < 2 * (k + 1)


def reider_obstruction(N: DivisorClass, D: DivisorClass, ctx: BlowupContext | None = None) -> bool:
    if ctx is not None:
        ctx.check(N)
        ctx.check(D)
    alpha = N @ D
    beta = D @ D
    return (alpha == 0 and beta == -1) or (alpha == 1 and beta == 0)


@dataclass(frozen=True)
class ObstructionCandidate:
    """A class ``D = fH - sum n_i E_i`` with ``alpha = N.D``, ``beta = D^2``
    and ``n = sum n_i``.

    For uniform N only one representative per relabelling is kept;
    ``orbit_size`` counts the relabellings it stands for.
    """

    D: DivisorClass
    alpha: int
    beta: int
    n: int
    orbit_size: int = 1
    n_at_least_r: bool = False
    meets_c1_nonneg: bool = False
    hypotheses_hold: bool | None = None

    @property
    def f(self) -> int:
        return self.D.d

    def to_json(self) -> dict[str, Any]:
        return {
            "f": self.D.d,
            "n_i": list(self.D.mults),
            "alpha": self.alpha,
            "beta": self.beta,
            "n": self.n,
            "orbit_size": self.orbit_size,
            "n_at_least_r": self.n_at_least_r,
            "D.C1_nonneg": self.meets_c1_nonneg,
            "hypotheses_hold": self.hypotheses_hold,
        }


def adjoint_hypotheses(N: DivisorClass, k: int, ctx: BlowupContext) -> bool | None:
    """``r >= e^2+k+1``, ``(d+3)e > r(m+1)`` and ``m >= k`` for
    ``N = (d+3)H - (m+1) sum E_i``; None if N is not uniform."""
    b = N.uniform_mult
    if b is None:
        return None
    d, m, e, r = N.d - 3, b - 1, ctx.e, ctx.r
    return r >= e * e + k + 1 and (d + 3) * e > r * (m + 1) and m >= k


def _orbit_size(values: tuple[int, ...]) -> int:
    size = math.factorial(len(values))
    for c in Counter(values).values():
        size //= math.factorial(c)
    return size


def _multisets(r: int, lo: int, hi: int, total: int, sq_lo: int, sq_hi: int) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of length r, entries in [lo, hi], with the
    given sum and sum of squares in [sq_lo, sq_hi]."""
    out: list[int] = []

    def min_squares(t: int, s: int) -> int:
        a, b = divmod(s, t)
        return b * (a + 1) ** 2 + (t - b) * a * a

    def rec(t: int, top: int, s: int, sq: int):
        if t == 0:
            if s == 0 and sq_lo <= sq <= sq_hi:
                yield tuple(out)
            return
        if not t * lo <= s <= t * top:
            return
        if sq + min_squares(t, s) > sq_hi:
            return
        if sq + t * max(lo * lo, top * top) < sq_lo:
            return
        for v in range(top, lo - 1, -1):
            out.append(v)
            yield from rec(t - 1, v, s - v, sq + v * v)
            out.pop()

    yield from rec(r, hi, total, 0)


def _space_size(uniform: bool, r: int, f_max: int, n_max: int) -> int:
    total = 0
    for f in range(f_max + 1):
        span = 2 if f == 0 else n_max + 2
        total += math.comb(r + span - 1, r) if uniform else span**r
    return total


def enumerate_obstructions(
    N: DivisorClass,
    k: int,
    ctx: BlowupContext,
    f_max: int | None = None,
    n_max: int | None = None,
    max_space: int = DEFAULT_MAX_SPACE,
) -> list[ObstructionCandidate]:
    """All ``D = fH - sum n_i E_i`` with ``0 <= f <= f_max``,
    ``-1 <= n_i <= n_max`` that satisfy the BFS inequalities.

    Filters, all necessary for D to be effective when N is nef:
    ``f = 0`` forces every ``n_i`` in {-1, 0} (a sum of exceptional curves),
    and ``N.D >= 0``.  ``n_i = -1`` stands for E_i split off as a component.
    Defaults are ``f_max = 2e`` and ``n_max = r``.
    """
    ctx.check(N)
    if k < 0:
        raise PreconditionError(f"k must be nonnegative, got {k}")
    e, r = ctx.e, ctx.r
    f_max = 2 * e if f_max is None else f_max
    n_max = r if n_max is None else n_max
    if f_max < 0 or n_max < 0:
        raise ValueError("f_max and n_max must be nonnegative")
    uniform = N.is_uniform
    required = _space_size(uniform, r, f_max, n_max)
    if required > max_space:
        raise EnumerationTooLarge(required, max_space)

    C1 = curve_class(ctx)
    hyp = adjoint_hypotheses(N, k, ctx)
    found: list[ObstructionCandidate] = []

    def record(D: DivisorClass, orbit: int) -> None:
        n = sum(D.mults)
        found.append(ObstructionCandidate(
            D, N @ D, D @ D, n, orbit,
            n_at_least_r=n >= r,
            meets_c1_nonneg=D @ C1 >= 0,
            hypotheses_hold=hyp,
        ))

    for f in range(f_max + 1):
        lo, hi = -1, (0 if f == 0 else n_max)
        if uniform:
            A, B = N.d, N.mults[0]
            for n in range(r * lo, r * hi + 1):
                alpha = A * f - B * n
                if not 0 <= alpha < 2 * (k + 1):
                    continue
                # alpha-k-1 <= beta <= (alpha-1)//2, beta = f^2 - sum n_i^2
                beta_hi = (alpha - 1) // 2
                beta_lo = alpha - k - 1
                if beta_lo > beta_hi:
                    continue
                for ns in _multisets(r, lo, hi, n, f * f - beta_hi, f * f - beta_lo):
                    D = DivisorClass(f, ns)
                    assert bfs_condition(N, D, k)
                    record(D, _orbit_size(ns))
        else:
            for D in _general_candidates(N, k, f, lo, hi):
                record(D, 1)

    found.sort(key=lambda c: (c.D.d, c.D.mults))
    return found


def _general_candidates(N: DivisorClass, k: int, f: int, lo: int, hi: int) -> Iterator[DivisorClass]:
    r = N.r
    # alpha = N.d*f - sum b_i n_i ; bound the remaining sum over positions i..r-1
    b = N.mults
    rest_min = [0] * (r + 1)
    rest_max = [0] * (r + 1)
    for i in range(r - 1, -1, -1):
        ends = (b[i] * lo, b[i] * hi)
        rest_min[i] = rest_min[i + 1] + min(ends)
        rest_max[i] = rest_max[i + 1] + max(ends)
    base = N.d * f
    out: list[int] = []

    def rec(i: int, acc: int):
        # acc = sum_{j<i} b_j n_j ; need 0 <= base - acc - rest < 2(k+1)
        if base - acc - rest_max[i] >= 2 * (k + 1) or base - acc - rest_min[i] < 0:
            return
        if i == r:
            D = DivisorClass(f, tuple(out))
            if bfs_condition(N, D, k):
                yield D
            return
        for v in range(lo, hi + 1):
            out.append(v)
            yield from rec(i + 1, acc + b[i] * v)
            out.pop()

    yield from rec(0, 0)


def _allowed_generator(g: DivisorClass, e: int) -> bool:
    if g.d == 0:
        return sorted(g.mults)[:1] == [-1] and sum(1 for m in g.mults if m) == 1
    if any(m not in (0, 1) for m in g.mults):
        return False
    pts = sum(g.mults)
    if g.d == 1 and pts == 0:
        return True
    if 1 <= g.d <= e - 1:
        return pts == g.d
    return g.d == e and pts >= e


@dataclass
class CertificateCheck:
    ok: bool
    problems: list[str] = field(default_factory=list)
    diff: dict[str, int] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(cert: EffectivityCertificate, L: DivisorClass, ctx: BlowupContext) -> CertificateCheck:
    """Nonnegative coefficients, generators from the allowed list, and exact
    recomposition to L."""
    ctx.check(L)
    problems = []
    total_d = 0
    total_m = [0] * ctx.r
    for g, c in cert.terms:
        if g.r != ctx.r:
            problems.append(f"generator {g} has r={g.r}")
            continue
        if c < 0:
            problems.append(f"negative coefficient {c} on {g}")
        if not _allowed_generator(g, ctx.e):
            problems.append(f"{g} is not an allowed generator for e={ctx.e}")
        total_d += c * g.d
        for i, m in enumerate(g.mults):
            total_m[i] += c * m
    diff = {}
    if total_d != L.d:
        diff["d"] = total_d - L.d
    for i, (got, want) in enumerate(zip(total_m, L.mults)):
        if got != want:
            diff[f"m{i + 1}"] = got - want
    if diff:
        problems.append(f"recomposition differs from L by {diff}")
    return CertificateCheck(not problems, problems, diff)


@dataclass
class ConsistencyReport:
    verdicts: dict[str, Verdict]
    issues: list[str]

    def __bool__(self) -> bool:
        return not self.issues


def cross_check_uniform(L: DivisorClass, ctx: BlowupContext) -> ConsistencyReport:
    """Compare check_ample, check_ample_uniform and check_nef against
    ``ample iff de > rm`` and ``nef iff de >= rm`` for uniform ``m > 0``,
    ``r >= e^2``."""
    ctx.check(L)
    m = L.uniform_mult
    if m is None or m <= 0 or ctx.r < ctx.e**2:
        raise PreconditionError("cross_check_uniform needs uniform m > 0 and r >= e^2")
    d, e, r = L.d, ctx.e, ctx.r
    ample_truth = d * e > r * m
    nef_truth = d * e >= r * m
    v = {
        "ample": check_ample(L, ctx),
        "ample_uniform": check_ample_uniform(L, ctx),
        "nef": check_nef(L, ctx),
    }
    issues = []
    for name in ("ample", "ample_uniform"):
        st = v[name].status
        if st is Status.POSITIVE and not ample_truth:
            issues.append(f"{name} Positive but de = {d * e} <= rm = {r * m}")
        if st is Status.NEGATIVE and ample_truth:
            issues.append(f"{name} Negative but de = {d * e} > rm = {r * m}")
    if v["ample_uniform"].status is Status.UNKNOWN:
        issues.append("ample_uniform Unknown although r >= e^2")
    if v["ample"].positive and v["nef"].negative:
        issues.append("ample Positive but nef Negative")
    if (v["nef"].status is Status.POSITIVE) != nef_truth:
        issues.append(f"nef {v['nef'].status.value} but L.C1 = {d * e - r * m}")
    return ConsistencyReport(v, issues)
