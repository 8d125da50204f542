"""Picard lattice of the blow-up of P^2 at r points.

A class is stored as ``(d, (m_1, ..., m_r))`` and stands for
``L = dH - m_1 E_1 - ... - m_r E_r``.  The intersection form is
``H^2 = 1``, ``E_i^2 = -1`` and zero on mixed pairs.  Python integers are
unbounded, so every product here is exact.

Point indices are 0-based in the library; the CLI prints them 1-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DimensionMismatch(ValueError):
    """Two classes (or a class and a context) disagree on r."""

    def __init__(self, expected: int, got: int, what: str = "class"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has {got} multiplicities, expected r={expected}")


class Flag(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value) -> "Flag":
        if isinstance(value, Flag):
            return value
        if isinstance(value, bool):
            return cls.YES if value else cls.NO
        if value is None:
            return cls.UNKNOWN
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"expected one of yes/no/unknown, got {value!r}") from None


def _check_int(value, name: str) -> int:
    # bool is an int subclass; reject it along with floats
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class BlowupContext:
    """Degree ``e`` of the curve C, number ``r`` of blown-up points, and
    what is known about the point configuration."""

    e: int
    r: int
    has_e_collinear: Flag = Flag.UNKNOWN
    positive_genus: Flag = Flag.UNKNOWN

    def __post_init__(self):
        _check_int(self.e, "e")
        _check_int(self.r, "r")
        if self.e < 1 or self.r < 1:
            raise ValueError(f"need e >= 1 and r >= 1, got e={self.e}, r={self.r}")
        object.__setattr__(self, "has_e_collinear", Flag.parse(self.has_e_collinear))
        object.__setattr__(self, "positive_genus", Flag.parse(self.positive_genus))
        if self.has_e_collinear is Flag.YES and self.r < self.e:
            raise ValueError(f"cannot have {self.e} collinear points among r={self.r}")

    def check(self, L: "DivisorClass") -> "DivisorClass":
        if L.r != self.r:
            raise DimensionMismatch(self.r, L.r)
        return L


@dataclass(frozen=True)
class DivisorClass:
    d: int
    mults: tuple[int, ...] = field(default=())

    def __post_init__(self):
        _check_int(self.d, "d")
        mults = tuple(self.mults)
        for i, m in enumerate(mults):
            _check_int(m, f"m_{i + 1}")
        object.__setattr__(self, "mults", mults)

    @classmethod
    def uniform(cls, d: int, m: int, r: int) -> "DivisorClass":
        return cls(d, (m,) * r)

    @classmethod
    def zero(cls, r: int) -> "DivisorClass":
        return cls(0, (0,) * r)

    @classmethod
    def hyperplane(cls, r: int) -> "DivisorClass":
        return cls(1, (0,) * r)

    @classmethod
    def exceptional(cls, i: int, r: int) -> "DivisorClass":
        """The class E_i; note the stored multiplicity is -1."""
        if not 0 <= i < r:
            raise IndexError(f"point index {i} out of range for r={r}")
        return cls(0, tuple(-1 if j == i else 0 for j in range(r)))

    @classmethod
    def from_blocks(cls, d: int, blocks: Iterable[tuple[int, int]]) -> "DivisorClass":
        """Build from ``(multiplicity, count)`` runs, e.g. ``[(3, 13), (1, 4)]``."""
        mults: list[int] = []
        for m, count in blocks:
            mults.extend([m] * count)
        return cls(d, tuple(mults))

    @property
    def r(self) -> int:
        return len(self.mults)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.mults)) <= 1

    @property
    def uniform_mult(self) -> int | None:
        if not self.mults or not self.is_uniform:
            return None
        return self.mults[0]

    def _same_r(self, other: "DivisorClass") -> None:
        if other.r != self.r:
            raise DimensionMismatch(self.r, other.r)

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        if not isinstance(other, DivisorClass):
            return NotImplemented
        self._same_r(other)
        return DivisorClass(self.d + other.d, tuple(a + b for a, b in zip(self.mults, other.mults)))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        if not isinstance(other, DivisorClass):
            return NotImplemented
        self._same_r(other)
        return DivisorClass(self.d - other.d, tuple(a - b for a, b in zip(self.mults, other.mults)))

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(-self.d, tuple(-m for m in self.mults))

    def __mul__(self, c: int) -> "DivisorClass":
        if isinstance(c, bool) or not isinstance(c, int):
            return NotImplemented
        return DivisorClass(c * self.d, tuple(c * m for m in self.mults))

    __rmul__ = __mul__

    def __matmul__(self, other: "DivisorClass") -> int:
        return intersect(self, other)

    def __str__(self) -> str:
        def coef(c: int) -> str:
            return "" if c == 1 else str(c)

        parts = []
        if self.d or not any(self.mults):
            parts.append({1: "H", -1: "-H"}.get(self.d, f"{self.d}H"))
        for i, m in enumerate(self.mults, start=1):
            if not m:
                continue
            if parts:
                parts.append(f"{'-' if m > 0 else '+'} {coef(abs(m))}E{i}")
            else:
                parts.append(f"{'-' if m > 0 else ''}{coef(abs(m))}E{i}")
        return " ".join(parts)

    def to_json(self) -> dict:
        return {"d": self.d, "mults": list(self.mults)}


def intersect(A: DivisorClass, B: DivisorClass, ctx: BlowupContext | None = None) -> int:
    """``d_A d_B - sum_i m_{A,i} m_{B,i}``."""
    if ctx is not None:
        ctx.check(A)
        ctx.check(B)
    elif A.r != B.r:
        raise DimensionMismatch(A.r, B.r)
    return A.d * B.d - sum(a * b for a, b in zip(A.mults, B.mults))


def curve_class(ctx: BlowupContext) -> DivisorClass:
    """Proper transform C_1 = eH - E_1 - ... - E_r."""
    return DivisorClass.uniform(ctx.e, 1, ctx.r)


def canonical_class(ctx: BlowupContext) -> DivisorClass:
    """K_X = -3H + E_1 + ... + E_r."""
    return DivisorClass.uniform(-3, -1, ctx.r)


def adjoint_class(L: DivisorClass, ctx: BlowupContext) -> DivisorClass:
    """N = L - K_X = (d+3)H - sum (m_i + 1) E_i."""
    ctx.check(L)
    return L - canonical_class(ctx)


def sorted_multiplicities(L: DivisorClass) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Multiplicities in non-increasing order, and the permutation used.

    ``perm[j]`` is the original index of the j-th sorted entry.  Ties keep
    original index order.
    """
    perm = tuple(sorted(range(L.r), key=lambda i: (-L.mults[i], i)))
    return tuple(L.mults[i] for i in perm), perm


def largest_sum(mults: Sequence[int], e: int) -> int:
    """Sum of the ``e`` largest entries; if there are fewer than ``e`` the
    missing ones count as zero."""
    top = sorted(mults, reverse=True)[:e]
    return sum(top)
