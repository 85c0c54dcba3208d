"""Exact real frequencies over a declared rational basis.

A real number ``l`` is stored as a vector of rationals with respect to a
finite, user-declared list of basis symbols (``1``, ``sqrt(2)``, ``pi``, ...).
Z-independence of such numbers is then decidable: it is Q-linear
independence of the coordinate vectors, which we test by exact elimination.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "BasisSymbol",
    "ContextError",
    "FrequencyContext",
    "Frequency",
    "FrequencyTuple",
    "IntegerRelationMatrix",
    "NotInSpan",
    "NOT_IN_SPAN",
    "is_z_independent",
    "solve_span",
    "leq",
    "join",
    "lattice_intersection",
    "char_eval",
    "integer_row_echelon",
]


class ContextError(ValueError):
    """Frequencies from different basis contexts were mixed."""


@dataclass(frozen=True)
class BasisSymbol:
    id: str
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value == 0.0:
            raise ValueError(f"basis symbol {self.id!r} needs a finite nonzero value")


@dataclass(frozen=True)
class FrequencyContext:
    """Ordered list of basis symbols shared by a family of frequencies."""

    basis: tuple[BasisSymbol, ...]

    def __post_init__(self):
        ids = [b.id for b in self.basis]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate basis ids in {ids}")
        if not ids:
            raise ValueError("a frequency context needs at least one basis symbol")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "FrequencyContext":
        return cls(tuple(BasisSymbol(i, float(v)) for i, v in pairs))

    @classmethod
    def from_json(cls, basis: Sequence[dict]) -> "FrequencyContext":
        return cls.from_pairs((b["id"], b["value"]) for b in basis)

    def to_json(self) -> list[dict]:
        return [{"id": b.id, "value": b.value} for b in self.basis]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def freq(self, *coords) -> "Frequency":
        """Build a frequency from rational-like coordinates (ints, Fractions, "p/q")."""
        if len(coords) == 1 and isinstance(coords[0], (list, tuple)):
            coords = tuple(coords[0])
        return Frequency(self, tuple(Fraction(c) for c in coords))

    def zero(self) -> "Frequency":
        return Frequency(self, (Fraction(0),) * self.dim)

    def unit(self, index: int) -> "Frequency":
        coords = [Fraction(0)] * self.dim
        coords[index] = Fraction(1)
        return Frequency(self, tuple(coords))

    def symbol(self, ident: str) -> "Frequency":
        for i, b in enumerate(self.basis):
            if b.id == ident:
                return self.unit(i)
        raise KeyError(ident)


@dataclass(frozen=True)
class Frequency:
    context: FrequencyContext = field(repr=False)
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.context.dim:
            raise ValueError(
                f"expected {self.context.dim} coordinates, got {len(self.coords)}"
            )

    def _check(self, other: "Frequency") -> None:
        if other.context != self.context:
            raise ContextError("frequencies belong to different contexts")

    def __add__(self, other: "Frequency") -> "Frequency":
        self._check(other)
        return Frequency(self.context, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Frequency") -> "Frequency":
        self._check(other)
        return Frequency(self.context, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Frequency":
        return Frequency(self.context, tuple(-a for a in self.coords))

    def __mul__(self, k) -> "Frequency":
        k = Fraction(k)
        return Frequency(self.context, tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    @property
    def numeric(self) -> float:
        return math.fsum(float(c) * b.value for c, b in zip(self.coords, self.context.basis))

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coords]

    def sort_key(self):
        return self.coords

    def __str__(self):
        terms = [f"{c}*{b.id}" for c, b in zip(self.coords, self.context.basis) if c]
        return " + ".join(terms) if terms else "0"


class FrequencyTuple(tuple):
    """Nonempty tuple of Z-independent frequencies from one context (an index L)."""

    def __new__(cls, entries: Iterable[Frequency]):
        entries = tuple(entries)
        if not entries:
            raise ValueError("a frequency tuple must be nonempty")
        ctx = entries[0].context
        for e in entries[1:]:
            if e.context != ctx:
                raise ContextError("frequency tuple mixes contexts")
        if not is_z_independent(entries):
            raise ValueError(f"entries are not Z-independent: {[str(e) for e in entries]}")
        return super().__new__(cls, entries)

    @property
    def context(self) -> FrequencyContext:
        return self[0].context

    def numeric(self) -> list[float]:
        return [e.numeric for e in self]

    def to_json(self) -> list[list[str]]:
        return [e.to_json() for e in self]

    @classmethod
    def from_json(cls, ctx: FrequencyContext, data) -> "FrequencyTuple":
        return cls(ctx.freq(*row) for row in data)


@dataclass(frozen=True)
class IntegerRelationMatrix:
    """Exponents ``n[j][i]`` with ``l_j = sum_i n[j][i] * l'_i`` (k rows, k' columns)."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), (len(self.entries[0]) if self.entries else 0)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def __matmul__(self, other: "IntegerRelationMatrix") -> "IntegerRelationMatrix":
        k, m = self.shape
        m2, n = other.shape
        if m != m2:
            raise ValueError("shape mismatch")
        return IntegerRelationMatrix(
            tuple(
                tuple(sum(self.entries[j][i] * other.entries[i][c] for i in range(m)) for c in range(n))
                for j in range(k)
            )
        )

    def apply(self, coarse_freqs: Sequence[Frequency]) -> list[Frequency]:
        """Rebuild the coarse frequencies from the fine ones: ``N @ L'``."""
        out = []
        for row in self.entries:
            acc = coarse_freqs[0].context.zero()
            for n, f in zip(row, coarse_freqs):
                acc = acc + f * n
            out.append(acc)
        return out


class NotInSpan:
    """Marker value: the coarse tuple is not in the integer span of the fine one."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NOT_IN_SPAN"

    def __bool__(self):
        return False


NOT_IN_SPAN = NotInSpan()


# --- exact linear algebra -------------------------------------------------

def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    a = [list(r) for r in rows]
    pivots = []
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def _rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    if not vectors:
        return 0
    return len(_rref([list(v) for v in vectors])[1])


def _same_context(freqs: Sequence[Frequency]) -> None:
    if freqs:
        ctx = freqs[0].context
        if any(f.context != ctx for f in freqs):
            raise ContextError("frequencies belong to different contexts")


def is_z_independent(freqs: Sequence[Frequency]) -> bool:
    freqs = list(freqs)
    _same_context(freqs)
    return _rank([f.coords for f in freqs]) == len(freqs)


def _solve_rational(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Solve ``sum_i x_i * columns[i] = target`` over Q for independent columns.

    Returns the coefficient list or None if target is outside the span.
    """
    k = len(columns)
    d = len(target)
    aug = [[columns[i][row] for i in range(k)] + [target[row]] for row in range(d)]
    red, pivots = _rref(aug)
    if k in pivots:
        return None
    x = [Fraction(0)] * k
    for r, c in enumerate(pivots):
        x[c] = red[r][k]
    return x


def solve_span(L: Sequence[Frequency], Lp: Sequence[Frequency]):
    """Integer exponents expressing each entry of ``L`` in terms of ``Lp``.

    Returns an :class:`IntegerRelationMatrix` or ``NOT_IN_SPAN``.
    """
    _same_context(list(L) + list(Lp))
    cols = [f.coords for f in Lp]
    rows = []
    for l in L:
        x = _solve_rational(cols, l.coords)
        if x is None or any(v.denominator != 1 for v in x):
            return NOT_IN_SPAN
        rows.append(tuple(int(v) for v in x))
    return IntegerRelationMatrix(tuple(rows))


def leq(L: Sequence[Frequency], Lp: Sequence[Frequency]) -> bool:
    """The ordering L <=_Z L'."""
    return solve_span(L, Lp) is not NOT_IN_SPAN


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def integer_row_echelon(rows: Sequence[Sequence[int]]):
    """Row-style Hermite normal form over Z.

    Returns ``(H, U)`` with ``U`` unimodular and ``U @ rows == H``. Nonzero rows
    of ``H`` come first, have positive pivots, and entries above each pivot
    are reduced to ``[0, pivot)``.
    """
    a = [list(map(int, r)) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    p = 0
    for c in range(n):
        if p == m:
            break
        for i in range(p + 1, m):
            if a[i][c] == 0:
                continue
            x, y = a[p][c], a[i][c]
            g, s, t = _xgcd(x, y)
            xg, yg = x // g, y // g
            rp, ri = a[p], a[i]
            a[p] = [s * e + t * f for e, f in zip(rp, ri)]
            a[i] = [-yg * e + xg * f for e, f in zip(rp, ri)]
            up, ui = u[p], u[i]
            u[p] = [s * e + t * f for e, f in zip(up, ui)]
            u[i] = [-yg * e + xg * f for e, f in zip(up, ui)]
        if a[p][c] == 0:
            continue
        if a[p][c] < 0:
            a[p] = [-e for e in a[p]]
            u[p] = [-e for e in u[p]]
        for i in range(p):
            q = a[i][c] // a[p][c]
            if q:
                a[i] = [e - q * f for e, f in zip(a[i], a[p])]
                u[i] = [e - q * f for e, f in zip(u[i], u[p])]
        p += 1
    return a, u


def _common_denominator(freqs: Sequence[Frequency]) -> int:
    den = 1
    for f in freqs:
        for c in f.coords:
            den = den * c.denominator // math.gcd(den, c.denominator)
    return den


def _lattice_basis(freqs: Sequence[Frequency]) -> list[Frequency]:
    """A canonical Z-basis of the subgroup generated by ``freqs``."""
    ctx = freqs[0].context
    den = _common_denominator(freqs)
    rows = [[int(c * den) for c in f.coords] for f in freqs]
    h, _ = integer_row_echelon(rows)
    basis = [Frequency(ctx, tuple(Fraction(e, den) for e in r)) for r in h if any(r)]
    # echelon order already sorts by pivot index; the value tie-break keeps it total
    basis.sort(key=lambda f: (next(i for i, c in enumerate(f.coords) if c), f.coords))
    return basis


def join(L: Sequence[Frequency], Lp: Sequence[Frequency]) -> FrequencyTuple:
    """An upper bound L'' of L and L' whose integer span is span_Z(L u L')."""
    allf = list(L) + list(Lp)
    _same_context(allf)
    return FrequencyTuple(_lattice_basis(allf))


def lattice_intersection(L: Sequence[Frequency], Lp: Sequence[Frequency]) -> list[Frequency]:
    """Z-basis of span_Z(L) n span_Z(L'); empty list when the intersection is {0}."""
    L, Lp = list(L), list(Lp)
    _same_context(L + Lp)
    den = _common_denominator(L + Lp)
    rows = [[int(c * den) for c in f.coords] for f in L + Lp]
    h, u = integer_row_echelon(rows)
    k = len(L)
    ctx = L[0].context
    gens = []
    for hr, ur in zip(h, u):
        if any(hr):
            continue
        v = ctx.zero()
        for coeff, f in zip(ur[:k], L):
            v = v + f * coeff
        if not v.is_zero():
            gens.append(v)
    if not gens:
        return []
    return _lattice_basis(gens)


def char_eval(l: Frequency, x: float) -> complex:
    """The character e^{i l x} at a real point, renormalized to modulus 1."""
    if l.is_zero():
        return 1.0 + 0.0j
    z = cmath.exp(1j * (l.numeric * x))
    return z / abs(z)
