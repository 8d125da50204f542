"""Three-valued positivity checkers.

Each checker returns a :class:`Verdict`.  ``Positive`` and ``Negative`` are
only returned when a theorem or a necessary condition licenses them; the
inequalities that were evaluated are kept in ``details`` so a verdict can be
audited from ``(L, ctx, k)`` alone.
"""

from __future__ import annotations

import enum
import operator
from dataclasses import dataclass, field, replace
from typing import Any

from .lattice import (
    BlowupContext,
    DivisorClass,
    Flag,
    adjoint_class,
    curve_class,
    largest_sum,
    sorted_multiplicities,
)


class PreconditionError(ValueError):
    pass


class NonUniformError(PreconditionError):
    def __init__(self, L: DivisorClass, hint: str = "use check_ample for arbitrary multiplicities"):
        self.L = L
        super().__init__(f"criterion needs uniform multiplicities, got {list(L.mults)}; {hint}")


class Status(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    UNKNOWN = "Unknown"


class Property(str, enum.Enum):
    AMPLE = "Ample"
    NEF = "Nef"
    EFFECTIVE = "Effective"
    GLOBALLY_GENERATED = "GloballyGenerated"
    K_VERY_AMPLE = "KVeryAmple"


_RELATIONS = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
}


@dataclass(frozen=True)
class Inequality:
    """``lhs rel rhs`` with both sides named and evaluated."""

    lhs: str
    lhs_value: int
    rel: str
    rhs: str
    rhs_value: int

    def __post_init__(self):
        if self.rel not in _RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    @property
    def holds(self) -> bool:
        return _RELATIONS[self.rel](self.lhs_value, self.rhs_value)

    def __str__(self) -> str:
        rhs = self.rhs if self.rhs == str(self.rhs_value) else f"{self.rhs} = {self.rhs_value}"
        return f"{self.lhs} = {self.lhs_value} {self.rel} {rhs} [{'holds' if self.holds else 'fails'}]"

    def to_json(self) -> dict[str, Any]:
        return {
            "lhs": self.lhs,
            "lhs_value": self.lhs_value,
            "rel": self.rel,
            "rhs": self.rhs,
            "rhs_value": self.rhs_value,
            "holds": self.holds,
            "text": str(self),
        }


@dataclass(frozen=True)
class EffectivityCertificate:
    """``L = sum coefficient * generator`` with nonnegative coefficients."""

    terms: tuple[tuple[DivisorClass, int], ...]

    def recompose(self, r: int) -> DivisorClass:
        total = DivisorClass.zero(r)
        for gen, coef in self.terms:
            total = total + coef * gen
        return total

    def to_json(self) -> dict[str, Any]:
        return {
            "terms": [
                {"coefficient": c, "generator": g.to_json(), "text": str(g)} for g, c in self.terms
            ]
        }


@dataclass(frozen=True)
class Verdict:
    status: Status
    property: Property
    justification: str
    details: tuple[Inequality, ...] = ()
    k: int | None = None
    certificate: Any = None
    annotations: tuple[str, ...] = ()
    failed: tuple[str, ...] = ()

    @property
    def positive(self) -> bool:
        return self.status is Status.POSITIVE

    @property
    def negative(self) -> bool:
        return self.status is Status.NEGATIVE

    def transcript(self) -> list[str]:
        return [str(q) for q in self.details]

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "property": self.property.value,
            "status": self.status.value,
            "justification": self.justification,
            "details": [q.to_json() for q in self.details],
        }
        if self.k is not None:
            out["k"] = self.k
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.annotations:
            out["annotations"] = list(self.annotations)
        if self.failed:
            out["failed"] = list(self.failed)
        return out


COLLINEAR_NOTE = (
    "d > sum of the e largest m_i is also necessary when e of the points are collinear"
)


def _uniform_m(L: DivisorClass, allow_negative: bool = True) -> int:
    m = L.uniform_mult
    if m is None:
        raise NonUniformError(L)
    if not allow_negative and m < 0:
        raise PreconditionError(f"criterion needs m >= 0, got m={m}")
    return m


def _sum_name(e: int) -> str:
    return f"sum of {e} largest m_i"


def check_ample(L: DivisorClass, ctx: BlowupContext) -> Verdict:
    """Ampleness from positivity on E_i and C_1 plus ``d > m_1 + ... + m_e``."""
    ctx.check(L)
    C1 = curve_class(ctx)
    pos_e = Inequality("min L.E_i", min(L.mults), ">", "0", 0)
    pos_c = Inequality("L.C1", L @ C1, ">", "0", 0)
    big_d = Inequality("d", L.d, ">", _sum_name(ctx.e), largest_sum(L.mults, ctx.e))
    self_sq = Inequality("L^2", L @ L, ">", "0", 0)
    details = (pos_e, pos_c, big_d, self_sq)
    make = lambda status, tag, **kw: Verdict(status, Property.AMPLE, tag, details, **kw)

    if pos_e.holds and pos_c.holds and big_d.holds:
        return make(Status.POSITIVE, "Theorem-main")

    # each of these is an irreducible curve, or L^2 by Nakai-Moishezon
    necessary = [
        (pos_e, "necessary-condition L.E_i>0"),
        (pos_c, "necessary-condition L.C1>0"),
        (self_sq, "necessary-condition L^2>0"),
    ]
    failed = tuple(str(q) for q, _ in necessary if not q.holds)
    for q, tag in necessary:
        if not q.holds:
            return make(Status.NEGATIVE, tag, failed=failed)

    if ctx.has_e_collinear is Flag.YES:
        return make(
            Status.NEGATIVE,
            "Remark-collinear",
            failed=(str(big_d),),
            annotations=(
                COLLINEAR_NOTE,
                "assumes the e collinear points may be labelled as those of largest multiplicity",
            ),
        )
    return make(Status.UNKNOWN, "Theorem-main", failed=(str(big_d),), annotations=(COLLINEAR_NOTE,))


def check_nef(L: DivisorClass, ctx: BlowupContext) -> Verdict:
    ctx.check(L)
    C1 = curve_class(ctx)
    e, r = ctx.e, ctx.r
    nef_c = Inequality("L.C1", L @ C1, ">=", "0", 0)
    nef_e = Inequality("min L.E_i", min(L.mults), ">=", "0", 0)
    big_d = Inequality("d", L.d, ">=", _sum_name(e), largest_sum(L.mults, e))

    if L.is_uniform and r >= e * e:
        many = Inequality("r", r, ">=", "e^2", e * e)
        details = (nef_c, nef_e, many)
        if nef_c.holds and nef_e.holds:
            return Verdict(Status.POSITIVE, Property.NEF, "Cor-nef", details,
                           annotations=("uniform class with r >= e^2: nef iff L.C1 >= 0",))
        failed = tuple(str(q) for q in (nef_c, nef_e) if not q.holds)
        return Verdict(Status.NEGATIVE, Property.NEF, "Cor-nef", details, failed=failed)

    details = (nef_c, nef_e, big_d)
    if nef_c.holds and nef_e.holds and big_d.holds:
        return Verdict(Status.POSITIVE, Property.NEF, "Cor-nef", details)
    if not nef_c.holds:
        return Verdict(Status.NEGATIVE, Property.NEF, "necessary-condition L.C1>=0", details,
                       failed=(str(nef_c),))
    if not nef_e.holds:
        return Verdict(Status.NEGATIVE, Property.NEF, "necessary-condition L.E_i>=0", details,
                       failed=(str(nef_e),))
    return Verdict(Status.UNKNOWN, Property.NEF, "Cor-nef", details, failed=(str(big_d),))


def check_ample_uniform(L: DivisorClass, ctx: BlowupContext) -> Verdict:
    """Uniform classes ``dH - m sum E_i`` with ``m >= 0``.

    For ``r >= e^2`` this is an exact test (``de > rm``).  ``m = 0`` is
    always Negative: ``dH`` is trivial on every ``E_i``.
    """
    ctx.check(L)
    m = _uniform_m(L, allow_negative=False)
    d, e, r = L.d, ctx.e, ctx.r
    tag = "Cor-big-r"

    if m == 0:
        q = Inequality("L.E_i", 0, ">", "0", 0)
        return Verdict(Status.NEGATIVE, Property.AMPLE, "necessary-condition L.E_i>0", (q,),
                       failed=(str(q),))

    if r >= e * e:
        many = Inequality("r", r, ">=", "e^2", e * e)
        q = Inequality("de", d * e, ">", "rm", r * m)
        status = Status.POSITIVE if q.holds else Status.NEGATIVE
        return Verdict(status, Property.AMPLE, tag, (many, q),
                       failed=() if q.holds else (str(q),))

    few = Inequality("r", r, "<", "e^2", e * e)
    q = Inequality("d", d, ">", "em", e * m)
    if q.holds:
        return Verdict(Status.POSITIVE, Property.AMPLE, tag, (few, q))
    if ctx.has_e_collinear is Flag.YES:
        return Verdict(Status.NEGATIVE, Property.AMPLE, "Remark-collinear", (few, q),
                       failed=(str(q),), annotations=(COLLINEAR_NOTE,))
    C1 = curve_class(ctx)
    pos_c = Inequality("L.C1", L @ C1, ">", "0", 0)
    self_sq = Inequality("L^2", L @ L, ">", "0", 0)
    details = (few, q, pos_c, self_sq)
    if not pos_c.holds:
        return Verdict(Status.NEGATIVE, Property.AMPLE, "necessary-condition L.C1>0", details,
                       failed=(str(pos_c),))
    if not self_sq.holds:
        return Verdict(Status.NEGATIVE, Property.AMPLE, "necessary-condition L^2>0", details,
                       failed=(str(self_sq),))
    return Verdict(Status.UNKNOWN, Property.AMPLE, tag, details, failed=(str(q),),
                   annotations=(COLLINEAR_NOTE,))


def _generator(degree: int, points, r: int) -> DivisorClass:
    """``degree*H - sum_{i in points} E_i``."""
    points = set(points)
    return DivisorClass(degree, tuple(1 if i in points else 0 for i in range(r)))


def certify_effective(L: DivisorClass, ctx: BlowupContext) -> Verdict:
    """Write L as a nonnegative combination of H, jH - E_1 - ... - E_j (j < e),
    eH - E_1 - ... - E_i (i >= e) and bare E_i.

    Works whenever ``d >= m_1 + ... + m_e`` after negative multiplicities
    are peeled off as E_i components.  The certificate is attached to a
    Positive verdict; otherwise the verdict is Unknown (or Negative if
    ``d < 0``, since H is nef).
    """
    ctx.check(L)
    e, r = ctx.e, ctx.r
    if L.d < 0:
        q = Inequality("L.H", L.d, ">=", "0", 0)
        return Verdict(Status.NEGATIVE, Property.EFFECTIVE, "necessary-condition L.H>=0", (q,),
                       failed=(str(q),))

    terms: list[tuple[DivisorClass, int]] = []
    peeled = []
    for i, m in enumerate(L.mults):
        if m < 0:
            terms.append((DivisorClass.exceptional(i, r), -m))
            peeled.append(i)
    base = DivisorClass(L.d, tuple(max(m, 0) for m in L.mults))
    ms, perm = sorted_multiplicities(base)
    q = Inequality("d", base.d, ">=", _sum_name(e), largest_sum(ms, e))
    notes = ()
    if peeled:
        notes = (f"negative multiplicities at E{', E'.join(str(i + 1) for i in peeled)} "
                 "peeled off as exceptional components",)
    if not q.holds:
        return Verdict(Status.UNKNOWN, Property.EFFECTIVE, "Prop-standard-is-effective", (q,),
                       failed=(str(q),), annotations=notes)

    ms = list(ms)
    d = base.d
    while True:
        s = max((j + 1 for j in range(r) if ms[j] != 0), default=0)
        if s <= e - 1:
            for t in range(s, 0, -1):
                coef = ms[t - 1] - (ms[t] if t < s else 0)
                terms.append((_generator(t, perm[:t], r), coef))
            terms.append((DivisorClass.hyperplane(r), d - sum(ms[:s])))
            break
        c = ms[s - 1]
        terms.append((_generator(e, perm[:s], r), c))
        d -= e * c
        for j in range(s):
            ms[j] -= c

    cert = EffectivityCertificate(tuple((g, c) for g, c in terms if c != 0))
    return Verdict(Status.POSITIVE, Property.EFFECTIVE, "Prop-standard-is-effective", (q,),
                   certificate=cert, annotations=notes)


def negative_kva_certificate(L: DivisorClass, ctx: BlowupContext, k: int) -> Verdict:
    """Not k-very ample when ``deg(L|_C) = L.C1 < k + 2`` on a curve of
    positive genus.

    A degree-0 restriction is globally generated exactly when it is trivial,
    which the lattice cannot see, so ``k = 0, L.C1 = 0`` stays Unknown.
    """
    ctx.check(L)
    if k < 0:
        raise PreconditionError(f"k must be nonnegative, got {k}")
    if ctx.positive_genus is not Flag.YES:
        raise PreconditionError(
            f"degree bound needs a curve of positive genus (positive_genus=yes), "
            f"got positive_genus={ctx.positive_genus.value}"
        )
    deg = L @ curve_class(ctx)
    q = Inequality("L.C1", deg, "<", "k+2", k + 2)
    if q.holds and not (k == 0 and deg == 0):
        return Verdict(Status.NEGATIVE, Property.K_VERY_AMPLE, "BS1-Cor-1.4-bound", (q,), k=k,
                       annotations=("deg(L|_C) computed as L.C1",))
    notes = ("degree-0 restriction: globally generated iff trivial",) if q.holds else ()
    return Verdict(Status.UNKNOWN, Property.K_VERY_AMPLE, "BS1-Cor-1.4-bound", (q,), k=k,
                   failed=(str(q),), annotations=notes)


def _k_very_ample(L: DivisorClass, ctx: BlowupContext, k: int, prop: Property) -> Verdict:
    ctx.check(L)
    m = _uniform_m(L)
    d, e, r = L.d, ctx.e, ctx.r
    tag = "Theorem-bpf" if k == 0 else "Theorem-main1"
    kk = None if prop is Property.GLOBALLY_GENERATED else k

    if k == 0 and m == 0:
        q = Inequality("d", d, ">=", "0", 0)
        if q.holds:
            return Verdict(Status.POSITIVE, prop, tag, (q,), k=kk,
                           annotations=("m = 0: L is the pullback of O(d)",))
        return Verdict(Status.NEGATIVE, prop, "necessary-condition L.H>=0", (q,), k=kk,
                       failed=(str(q),))

    hyps = (
        Inequality("m", m, ">=", "k", k),
        Inequality("(d+3)e", (d + 3) * e, ">", "r(m+1)", r * (m + 1)),
        Inequality("r", r, ">=", "e^2+k+1", e * e + k + 1),
    )
    if all(q.holds for q in hyps):
        return Verdict(Status.POSITIVE, prop, tag, hyps, k=kk)

    if ctx.positive_genus is Flag.YES:
        bound = negative_kva_certificate(L, ctx, k)
        if bound.negative:
            return replace(bound, property=prop, k=kk, details=bound.details + hyps)

    C1 = curve_class(ctx)
    nef_c = Inequality("L.C1", L @ C1, ">=", "0", 0)
    if not nef_c.holds:
        return Verdict(Status.NEGATIVE, prop, "necessary-condition L.C1>=0", (nef_c,) + hyps,
                       k=kk, failed=(str(nef_c),),
                       annotations=("k-very ample implies nef",))
    # restriction to E_i = P^1 has degree m; O(m) on P^1 is k-very ample iff m >= k
    if m < k:
        q = Inequality("L.E_i", m, ">=", "k", k)
        return Verdict(Status.NEGATIVE, prop, "necessary-condition L.E_i>=k", (q,) + hyps,
                       k=kk, failed=(str(q),))

    notes = []
    nc = adjoint_class(L, ctx) @ C1
    if nc < 0:
        notes.append(f"N = L - K_X has N.C1 = {nc} < 0: N is not nef, "
                     "so the adjoint criterion does not apply")
    return Verdict(Status.UNKNOWN, prop, tag, hyps, k=kk,
                   failed=tuple(str(q) for q in hyps if not q.holds), annotations=tuple(notes))


def check_globally_generated(L: DivisorClass, ctx: BlowupContext) -> Verdict:
    """Global generation of uniform ``dH - m sum E_i`` with ``m >= 0``."""
    ctx.check(L)
    _uniform_m(L, allow_negative=False)
    return _k_very_ample(L, ctx, 0, Property.GLOBALLY_GENERATED)


def check_k_very_ample(L: DivisorClass, ctx: BlowupContext, k: int) -> Verdict:
    """k-very ampleness of a uniform class.

    Positive needs ``m >= k``, ``(d+3)e > r(m+1)`` and ``r >= e^2 + k + 1``.
    Negative comes from the degree bound on C (positive genus only), from
    ``L.C1 < 0``, or from ``m < k`` (restriction to E_i).
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise PreconditionError(f"k must be a nonnegative integer, got {k!r}")
    return _k_very_ample(L, ctx, k, Property.K_VERY_AMPLE)
