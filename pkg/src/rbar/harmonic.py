"""Almost periodic polynomials, C0 + AP functions and points of R-bar.

Points of the Bohr leg are stored cylindrically: a frequency level together
with one angle per level entry. Evaluation of a character ``chi_l`` at such a
point is exact bookkeeping on the integer coordinates of ``l`` in the level.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .frequency import (
    NOT_IN_SPAN,
    ContextError,
    Frequency,
    FrequencyContext,
    FrequencyTuple,
    char_eval,
    solve_span,
)

__all__ = [
    "APPolynomial",
    "C0Function",
    "ZERO_C0",
    "QuantumFunction",
    "RealPoint",
    "BohrPoint",
    "FrequencyNotInLevel",
    "ap_eval",
    "bohr_integral",
    "bohr_inner_product",
    "rbar_eval",
    "circular_entry_decomposition",
    "beta",
    "wrap_angle",
]

TWO_PI = 2.0 * math.pi


class FrequencyNotInLevel(ValueError):
    """A frequency lies outside the integer span of a Bohr point's level.

    Refine the point's level with :func:`rbar.frequency.join` first.
    """


def wrap_angle(theta: float) -> float:
    """Normalize to [0, 2pi); values within 1e-15 of 2pi wrap to 0."""
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    if TWO_PI - t <= 1e-15:
        t = 0.0
    return t


class APPolynomial:
    """Finite trigonometric polynomial ``sum_l c_l chi_l`` with exact frequencies."""

    __slots__ = ("context", "terms")

    def __init__(self, context: FrequencyContext, terms: Optional[Mapping[Frequency, complex]] = None):
        self.context = context
        clean = {}
        for f, c in (terms or {}).items():
            if f.context != context:
                raise ContextError("term frequency from a different context")
            c = complex(c)
            if c != 0:
                clean[f] = clean.get(f, 0j) + c
        self.terms = {f: c for f, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, context: FrequencyContext, value: complex = 1.0) -> "APPolynomial":
        return cls(context, {context.zero(): value})

    @classmethod
    def character(cls, freq: Frequency, coeff: complex = 1.0) -> "APPolynomial":
        return cls(freq.context, {freq: coeff})

    @classmethod
    def from_json(cls, context: FrequencyContext, data: Sequence[dict]) -> "APPolynomial":
        terms: dict = {}
        for t in data:
            f = context.freq(*t["freq"])
            terms[f] = terms.get(f, 0j) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(context, terms)

    def to_json(self) -> list[dict]:
        return [
            {"freq": f.to_json(), "re": c.real, "im": c.imag}
            for f, c in sorted(self.terms.items(), key=lambda kv: kv[0].coords)
        ]

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        inner = ", ".join(f"{c:.6g}*chi[{f}]" for f, c in self.terms.items())
        return f"APPolynomial({inner})"

    def _check(self, other: "APPolynomial"):
        if other.context != self.context:
            raise ContextError("AP polynomials from different contexts")

    def __add__(self, other: "APPolynomial") -> "APPolynomial":
        self._check(other)
        terms = dict(self.terms)
        for f, c in other.terms.items():
            terms[f] = terms.get(f, 0j) + c
        return APPolynomial(self.context, terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: complex) -> "APPolynomial":
        return APPolynomial(self.context, {f: k * c for f, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, APPolynomial):
            self._check(other)
            terms: dict = {}
            for f, c in self.terms.items():
                for g, d in other.terms.items():
                    h = f + g
                    terms[h] = terms.get(h, 0j) + c * d
            return APPolynomial(self.context, terms)
        return self.scale(other)

    __rmul__ = __mul__

    def conj(self) -> "APPolynomial":
        """Complex conjugate as a function: conj(chi_l) = chi_{-l}."""
        return APPolynomial(self.context, {-f: c.conjugate() for f, c in self.terms.items()})

    def coefficient(self, f: Frequency) -> complex:
        return self.terms.get(f, 0j)

    def __call__(self, x: float) -> complex:
        return ap_eval(self, x)


def ap_eval(p: APPolynomial, x: float) -> complex:
    re = math.fsum(c.real * z.real - c.imag * z.imag for c, z in _terms_at(p, x))
    im = math.fsum(c.real * z.imag + c.imag * z.real for c, z in _terms_at(p, x))
    return complex(re, im)


def _terms_at(p: APPolynomial, x: float):
    for f, c in p.terms.items():
        yield c, char_eval(f, x)


def bohr_integral(p: APPolynomial) -> complex:
    """Haar integral over the Bohr compactification: the constant coefficient."""
    return p.coefficient(p.context.zero())


def bohr_inner_product(p: APPolynomial, q: APPolynomial) -> complex:
    """<p, q> in L2(R_Bohr) = sum_l c_l conj(d_l), computed exactly from coefficients."""
    p._check(q)
    return sum((c * q.terms[f].conjugate() for f, c in p.terms.items() if f in q.terms), 0j)


@dataclass(frozen=True)
class C0Function:
    """Continuous function vanishing at infinity, given only by evaluation.

    ``decay_hint`` optionally bounds ``|f(x)|`` from above for large ``|x|``; it
    is used for diagnostics only.
    """

    eval: Callable[[float], complex]
    decay_hint: Optional[Callable[[float], float]] = None
    label: str = "c0"
    is_zero: bool = False

    def __call__(self, x: float) -> complex:
        if self.is_zero:
            return 0j
        return complex(self.eval(x))


ZERO_C0 = C0Function(lambda x: 0.0, lambda x: 0.0, label="zero", is_zero=True)


@dataclass(frozen=True)
class QuantumFunction:
    """An element ``f0 + f_AP`` of C0(R) + CAP (direct sum of vector spaces)."""

    context: FrequencyContext
    c0: C0Function = ZERO_C0
    ap: Optional[APPolynomial] = None

    def __post_init__(self):
        if self.ap is None:
            object.__setattr__(self, "ap", APPolynomial(self.context))
        elif self.ap.context != self.context:
            raise ContextError("AP part from a different context")

    def __call__(self, x: float) -> complex:
        return self.c0(x) + ap_eval(self.ap, x)

    @classmethod
    def of_ap(cls, ap: APPolynomial) -> "QuantumFunction":
        return cls(ap.context, ZERO_C0, ap)

    @classmethod
    def of_c0(cls, context: FrequencyContext, c0: C0Function) -> "QuantumFunction":
        return cls(context, c0, APPolynomial(context))


@dataclass(frozen=True)
class RealPoint:
    x: float


@dataclass(frozen=True)
class BohrPoint:
    """A point of R_Bohr known through its values on span_Z(level)."""

    level: FrequencyTuple
    angles: tuple[float, ...] = field()

    def __post_init__(self):
        if len(self.angles) != len(self.level):
            raise ValueError("need one angle per level entry")
        object.__setattr__(self, "angles", tuple(wrap_angle(float(a)) for a in self.angles))

    def angle_of(self, f: Frequency) -> float:
        """The angle of chi_f at this point, i.e. x(chi_f) = e^{i angle}."""
        rel = solve_span([f], self.level)
        if rel is NOT_IN_SPAN:
            raise FrequencyNotInLevel(f"{f} is not in the integer span of the point's level")
        return wrap_angle(math.fsum(n * a for n, a in zip(rel.entries[0], self.angles)))

    def character(self, f: Frequency) -> complex:
        if f.is_zero():
            return 1.0 + 0.0j
        return cmath.exp(1j * self.angle_of(f))


def rbar_eval(point, qf: QuantumFunction) -> complex:
    """Gelfand evaluation of ``qf`` at a point of R-bar; C0 parts vanish on Bohr points."""
    if isinstance(point, RealPoint):
        return qf.c0(point.x) + ap_eval(qf.ap, point.x)
    if isinstance(point, BohrPoint):
        return sum((c * point.character(f) for f, c in qf.ap.terms.items()), 0j)
    raise TypeError(f"not a point of R-bar: {point!r}")


def beta(c, r):
    """beta_c = sqrt(c^2 r^2 + 1/4); accepts scalars or arrays."""
    return np.sqrt(np.square(c * r) + 0.25) if isinstance(c, np.ndarray) else math.sqrt((c * r) ** 2 + 0.25)


def _entry_a(c: float, tau: float, r: float) -> complex:
    b = beta(c, r)
    return complex(math.cos(b * tau), math.sin(b * tau) / (2.0 * b))


def _entry_b(c: float, tau: float, r: float) -> complex:
    b = beta(c, r)
    return complex(c * r / b * math.sin(b * tau), 0.0)


def circular_entry_decomposition(tau: float, r: float, omega: Frequency):
    """Split the circular-holonomy entries a(c), b(c) into C0 and AP parts.

    ``omega`` must be the exact frequency representing ``r * tau``. Returns the
    pair ``(a, b)`` of :class:`QuantumFunction` with
    ``AP(a) = cos(c r tau)`` and ``AP(b) = sin(c r tau)``.
    """
    if not 0.0 < tau < TWO_PI or r <= 0.0:
        raise ValueError("need 0 < tau < 2pi and r > 0")
    if abs(omega.numeric - r * tau) > 1e-12 * max(1.0, abs(r * tau)):
        raise ValueError(f"frequency value {omega.numeric} does not match r*tau = {r * tau}")
    ctx = omega.context
    w = r * tau

    def a0(c):
        # cos(beta tau) - cos(c r tau) with the difference beta - |c| r taken exactly
        ac = abs(c) * r
        bc = beta(c, r)
        gap = 0.25 / (bc + ac)
        re = -2.0 * math.sin((bc + ac) * tau / 2.0) * math.sin(gap * tau / 2.0)
        return complex(re, math.sin(bc * tau) / (2.0 * bc))

    def b0(c):
        ac = abs(c) * r
        bc = beta(c, r)
        gap = 0.25 / (bc + ac)
        val = -gap / bc * math.sin(bc * tau) + 2.0 * math.cos((bc + ac) * tau / 2.0) * math.sin(gap * tau / 2.0)
        return complex(math.copysign(1.0, c) * val if c else 0.0, 0.0)

    def envelope(c):
        # both remainders are O(1/|c|) once c r >> 1
        return 2.0 / max(abs(c) * r, 1e-300)

    a = QuantumFunction(
        ctx,
        C0Function(a0, envelope, label="a0"),
        APPolynomial(ctx, {omega: 0.5, -omega: 0.5}),
    )
    b = QuantumFunction(
        ctx,
        C0Function(b0, envelope, label="b0"),
        APPolynomial(ctx, {omega: -0.5j, -omega: 0.5j}),
    )
    return a, b
