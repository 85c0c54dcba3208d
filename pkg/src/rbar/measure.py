"""The measures mu_{rho,t} = t rho(lambda) + (1 - t) mu_Bohr on R-bar.

Integrals over the real leg are always taken against the pushforward
rho(lambda) of Lebesgue measure on (0, 1). Decaying integrands are integrated
in the u-coordinate on (0, 1). Character terms ``e^{i nu x}`` do not decay and
oscillate infinitely often near u = 0 and u = 1, so their integrals, the
characteristic function of rho(lambda), are computed as Fourier integrals of
the density of rho(lambda) on the two half lines.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .harmonic import (
    APPolynomial,
    C0Function,
    QuantumFunction,
    bohr_inner_product,
    bohr_integral,
)

__all__ = [
    "Parametrization",
    "Warp",
    "MeasureDescriptor",
    "QuadratureConfig",
    "QuadratureError",
    "DomainError",
    "LegFunction",
    "TransportedFunction",
    "make_parametrization",
    "tan_map",
    "circle_generator",
    "characteristic_function",
    "leg_integral",
    "integrate_qf",
    "inner_product",
    "norm",
    "isometry_transport",
    "lebesgue_image",
    "lebesgue_inner",
    "bump_probe",
    "jons_conditions_check",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_subdivisions: int = 2**16

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True, eq=False)
class Parametrization:
    """An increasing homeomorphism rho: (0, 1) -> R.

    ``density`` is the Lebesgue density of rho(lambda), i.e. ``(rho^-1)'``. When
    it is not given it is derived from ``derivative`` (or a central difference).
    """

    rho: Callable[[float], float]
    rho_inv: Callable[[float], float]
    derivative: Optional[Callable[[float], float]] = None
    density_fn: Optional[Callable[[float], float]] = None
    label: str = "custom"

    def __call__(self, u: float) -> float:
        return self.rho(u)

    def inverse(self, x: float) -> float:
        return self.rho_inv(x)

    def deriv(self, u: float) -> float:
        if self.derivative is not None:
            return self.derivative(u)
        h = 1e-6 * min(u, 1.0 - u)
        return (self.rho(u + h) - self.rho(u - h)) / (2.0 * h)

    def density(self, x: float) -> float:
        if self.density_fn is not None:
            return self.density_fn(x)
        return 1.0 / abs(self.deriv(self.rho_inv(x)))

    def precompose(self, g, g_inv, g_deriv, label=None) -> "Parametrization":
        """rho o g for an increasing homeomorphism g of (0, 1)."""
        rho = self

        def dens(x):
            s = rho.rho_inv(x)
            return rho.density(x) / g_deriv(g_inv(s))

        return Parametrization(
            rho=lambda u: rho.rho(g(u)),
            rho_inv=lambda x: g_inv(rho.rho_inv(x)),
            derivative=lambda u: rho.deriv(g(u)) * g_deriv(u),
            density_fn=dens,
            label=label or f"{rho.label}∘g",
        )

    def then(self, warp: "Warp") -> "Parametrization":
        """T o rho for a warp T of the real line."""
        rho = self

        def dens(y):
            x = warp.inv(y)
            return rho.density(x) * warp.inv_deriv(y)

        return Parametrization(
            rho=lambda u: warp.fwd(rho.rho(u)),
            rho_inv=lambda y: rho.rho_inv(warp.inv(y)),
            derivative=lambda u: warp.fwd_deriv(rho.rho(u)) * rho.deriv(u),
            density_fn=dens,
            label=f"T∘{rho.label}",
        )


@dataclass(frozen=True, eq=False)
class Warp:
    """The increasing homeomorphism T = rho1 o rho2^-1 of R."""

    src: Parametrization  # rho1
    dst: Parametrization  # rho2

    def fwd(self, x: float) -> float:
        return self.src.rho(self.dst.rho_inv(x))

    def inv(self, y: float) -> float:
        return self.dst.rho(self.src.rho_inv(y))

    def fwd_deriv(self, x: float) -> float:
        return self.src.deriv(self.dst.rho_inv(x)) * self.dst.density(x)

    def inv_deriv(self, y: float) -> float:
        return self.dst.deriv(self.src.rho_inv(y)) * self.src.density(y)


def _tan_rho(u: float) -> float:
    # cot form on each half keeps relative accuracy near the endpoints
    if u < 0.5:
        return -1.0 / math.tan(math.pi * u) if u > 0 else -math.inf
    if u > 0.5:
        return 1.0 / math.tan(math.pi * (1.0 - u)) if u < 1 else math.inf
    return 0.0


def _tan_rho_inv(x: float) -> float:
    if x < 0:
        return -math.atan(1.0 / x) / math.pi
    if x > 0:
        return 1.0 - math.atan(1.0 / x) / math.pi
    return 0.5


def _tan_deriv(u: float) -> float:
    t = _tan_rho(u)
    return math.pi * (1.0 + t * t)


def _tan_density(x: float) -> float:
    return 1.0 / (math.pi * (1.0 + x * x))


def tan_map() -> Parametrization:
    """rho(u) = tan(pi (u - 1/2)); rho(lambda) is the standard Cauchy law."""
    return _TAN


_TAN = Parametrization(_tan_rho, _tan_rho_inv, _tan_deriv, _tan_density, label="tan_map")


def make_parametrization(kind: str = "tan_map", *, rho=None, rho_inv=None, derivative=None,
                         label: str = "custom", samples: int = 257) -> Parametrization:
    if kind == "tan_map":
        return tan_map()
    if kind != "custom":
        raise ValueError(f"unknown parametrization kind {kind!r}")
    if rho is None or rho_inv is None:
        raise ValueError("custom parametrization needs rho and rho_inv")
    us = np.linspace(0.0, 1.0, samples + 2)[1:-1]
    xs = np.array([rho(u) for u in us])
    if not np.all(np.isfinite(xs)) or not np.all(np.diff(xs) > 0):
        raise ValueError("custom rho is not strictly increasing on the sample grid")
    for x in xs:
        back = rho(rho_inv(x))
        if abs(back - x) > 1e-10 * max(1.0, abs(x)):
            raise ValueError(f"rho(rho_inv(x)) != x at x = {x}")
    return Parametrization(rho, rho_inv, derivative, None, label=label)


def circle_generator(rho: Parametrization) -> Callable[[float], complex]:
    """The generator f = +1 o h o rho^-1 with h(t) = e^{i 2 pi (t - 1/2)}.

    f is injective, nowhere zero, vanishes at infinity and maps R onto the
    shifted circle 1 + T minus {0}.
    """

    def f(x: float) -> complex:
        t = rho.rho_inv(x)
        return 1.0 + complex(math.cos(2 * math.pi * (t - 0.5)), math.sin(2 * math.pi * (t - 0.5)))

    return f


@dataclass(frozen=True)
class MeasureDescriptor:
    rho: Parametrization
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")


# --- real-leg integration ---------------------------------------------------

def _quad_part(fn, cfg: QuadratureConfig, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            fn, 0.0, 1.0, epsabs=cfg.abs_tol, epsrel=0.0,
            limit=cfg.max_subdivisions, points=points, full_output=1,
        )
    value, err = out[0], out[1]
    if len(out) > 3 and err > cfg.abs_tol:
        raise QuadratureError(f"no convergence on (0, 1): {out[3].splitlines()[0]}", value, err)
    return value, err


def _u_integral(g: Callable[[float], complex], rho: Parametrization, cfg: QuadratureConfig,
                points=None) -> tuple[complex, float]:
    """int_0^1 g(rho(u)) du for a decaying complex integrand."""

    def at(u):
        x = rho.rho(u)
        if not math.isfinite(x):
            return 0j
        return complex(g(x))

    re, er = _quad_part(lambda u: at(u).real, cfg, points)
    im, ei = _quad_part(lambda u: at(u).imag, cfg, points)
    return complex(re, im), math.hypot(er, ei)


def _fourier_half(w: Callable[[float], float], nu: float) -> tuple[complex, float]:
    """int_0^inf w(y) e^{i nu y} dy for a decaying nonnegative w.

    The first period [0, 2pi/|nu|] is integrated directly with geometric
    breakpoints so that the bulk of w is resolved even for tiny |nu|; the
    Fourier-weight routine only sees the tail, where w varies slowly
    against its cycle length.
    """
    a = abs(nu)
    A = 2.0 * math.pi / a
    pts = []
    k = -6
    while math.ldexp(1.0, k) < A:
        pts.append(math.ldexp(1.0, k))
        k += 1
    limit = max(200, 4 * len(pts))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        c0, ec0 = integrate.quad(lambda y: w(y) * math.cos(a * y), 0.0, A, points=pts,
                                 epsabs=1e-14, epsrel=1e-13, limit=limit)
        s0, es0 = integrate.quad(lambda y: w(y) * math.sin(a * y), 0.0, A, points=pts,
                                 epsabs=1e-14, epsrel=1e-13, limit=limit)
        tail = lambda y: w(A + y)  # noqa: E731
        # cos(a (A + y)) = cos(a y) and sin(a (A + y)) = sin(a y) since a A = 2 pi
        c1, ec1 = integrate.quad(tail, 0.0, np.inf, weight="cos", wvar=a, epsabs=1e-14, limlst=200)
        s1, es1 = integrate.quad(tail, 0.0, np.inf, weight="sin", wvar=a, epsabs=1e-14, limlst=200)
    c, s = c0 + c1, s0 + s1
    if nu < 0:
        s = -s
    return complex(c, s), math.hypot(ec0 + ec1, es0 + es1)


@lru_cache(maxsize=4096)
def _char_fn_cached(rho: Parametrization, nu: float) -> tuple[complex, float]:
    pos, e1 = _fourier_half(rho.density, nu)
    neg, e2 = _fourier_half(lambda y: rho.density(-y), -nu)
    return pos + neg, e1 + e2


def characteristic_function(rho: Parametrization, nu: float) -> tuple[complex, float]:
    """int_0^1 e^{i nu rho(u)} du = int_R e^{i nu x} d rho(lambda), with an error estimate."""
    if nu == 0.0 or not math.isfinite(2.0 * math.pi / abs(nu)):
        # a period beyond the float range: e^{i nu x} = 1 wherever rho(lambda) has mass
        return 1.0 + 0.0j, 0.0
    return _char_fn_cached(rho, float(nu))


@dataclass(frozen=True, eq=False)
class LegFunction:
    """A function on the real leg: ``scale * (decaying(x) + ap(T(x)))``.

    ``warp`` is T (None for the identity); ``decaying`` must vanish at infinity.
    """

    decaying: Optional[Callable[[float], complex]]
    ap: APPolynomial
    warp: Optional[Warp] = None
    scale: float = 1.0

    @classmethod
    def of(cls, qf: QuantumFunction) -> "LegFunction":
        return cls(None if qf.c0.is_zero else qf.c0, qf.ap)

    def _phase_point(self, x: float) -> float:
        return x if self.warp is None else self.warp.fwd(x)

    def decaying_at(self, x: float) -> complex:
        if self.decaying is None:
            return 0j
        return self.scale * complex(self.decaying(x))

    def oscillating_at(self, x: float) -> complex:
        if not self.ap:
            return 0j
        return self.scale * self.ap(self._phase_point(x))

    def __call__(self, x: float) -> complex:
        return self.decaying_at(x) + self.oscillating_at(x)


def leg_integral(g: LegFunction, rho: Parametrization, quad: QuadratureConfig = DEFAULT_QUAD,
                 points=None) -> tuple[complex, float]:
    """int g d rho(lambda) for a single leg function."""
    total, err = 0j, 0.0
    if g.decaying is not None:
        v, e = _u_integral(g.decaying_at, rho, quad, points)
        total += v
        err += e
    if g.ap:
        total_ap, err_ap = _ap_against(g.ap, rho if g.warp is None else rho.then(g.warp), g.scale)
        total += total_ap
        err += err_ap
    return total, err


def _ap_against(p: APPolynomial, rho: Parametrization, scale: float) -> tuple[complex, float]:
    acc_re, acc_im, err = [], [], 0.0
    for f, c in p.terms.items():
        if f.is_zero():
            phi, e = 1.0 + 0j, 0.0
        else:
            phi, e = characteristic_function(rho, f.numeric)
        v = scale * c * phi
        acc_re.append(v.real)
        acc_im.append(v.imag)
        err += abs(scale * c) * e
    return complex(math.fsum(acc_re), math.fsum(acc_im)), err


def _leg_product(g1: LegFunction, g2: LegFunction):
    """Split g1 * conj(g2) into a decaying callable and an oscillating AP part."""
    if g1.ap and g2.ap and g1.warp is not g2.warp:
        raise ValueError("cannot pair leg functions carrying different warps")
    has_dec = g1.decaying is not None or g2.decaying is not None

    def dec(x):
        d1, d2 = g1.decaying_at(x), g2.decaying_at(x)
        o1, o2 = g1.oscillating_at(x), g2.oscillating_at(x)
        return d1 * d2.conjugate() + d1 * o2.conjugate() + o1 * d2.conjugate()

    osc = (g1.ap * g2.ap.conj()) if (g1.ap and g2.ap) else APPolynomial(g1.ap.context)
    warp = g1.warp if g1.ap else g2.warp
    return (dec if has_dec else None), osc, warp, g1.scale * g2.scale


def leg_inner(g1: LegFunction, g2: LegFunction, rho: Parametrization,
              quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[complex, float]:
    dec, osc, warp, scale = _leg_product(g1, g2)
    total, err = 0j, 0.0
    if dec is not None:
        v, e = _u_integral(dec, rho, quad)
        total += v
        err += e
    if osc:
        v, e = _ap_against(osc, rho if warp is None else rho.then(warp), scale)
        total += v
        err += e
    return total, err


@dataclass(frozen=True, eq=False)
class TransportedFunction:
    """An L2 class on R-bar given leg by leg: a real-leg function and Bohr AP data."""

    real_leg: LegFunction
    bohr: APPolynomial


L2Function = Union[QuantumFunction, TransportedFunction]


def _legs(psi: L2Function) -> tuple[LegFunction, APPolynomial]:
    if isinstance(psi, QuantumFunction):
        return LegFunction.of(psi), psi.ap
    return psi.real_leg, psi.bohr


def integrate_qf(qf: QuantumFunction, mu: MeasureDescriptor,
                 quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[complex, float]:
    """int qf d mu_{rho,t} = t int qf d rho(lambda) + (1 - t) int f_AP d mu_Bohr."""
    real, err = (0j, 0.0)
    if mu.t > 0.0:
        real, err = leg_integral(LegFunction.of(qf), mu.rho, quad)
    bohr = bohr_integral(qf.ap) if mu.t < 1.0 else 0j
    return _combine(mu.t, real, bohr), mu.t * err


def _combine(t: float, real: complex, bohr: complex) -> complex:
    if t == 0.0:
        return bohr
    if t == 1.0:
        return real
    return complex(math.fsum([t * real.real, (1 - t) * bohr.real]),
                   math.fsum([t * real.imag, (1 - t) * bohr.imag]))


def inner_product(f: L2Function, g: L2Function, mu: MeasureDescriptor,
                  quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[complex, float]:
    """<f, g> in L2(R-bar, mu_{rho,t}); C0 parts are invisible on the Bohr leg."""
    lf, bf = _legs(f)
    lg, bg = _legs(g)
    real, err = (0j, 0.0)
    if mu.t > 0.0:
        real, err = leg_inner(lf, lg, mu.rho, quad)
    bohr = bohr_inner_product(bf, bg) if mu.t < 1.0 else 0j
    return _combine(mu.t, real, bohr), mu.t * err


def norm(f: L2Function, mu: MeasureDescriptor, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    v, _ = inner_product(f, f, mu, quad)
    return math.sqrt(max(v.real, 0.0))


def isometry_transport(psi: L2Function, src: MeasureDescriptor, dst: MeasureDescriptor) -> TransportedFunction:
    """The canonical isometry L2(mu_{rho1,t1}) -> L2(mu_{rho2,t2}).

    psi -> sqrt(t1/t2) (psi on R) o (rho1 o rho2^-1) + sqrt((1-t1)/(1-t2)) (psi on R_Bohr).
    For t1 = t2 = 1 only the real leg is transported; for t1 = t2 = 0 psi is kept.
    """
    t1, t2 = src.t, dst.t
    leg, bohr = _legs(psi)
    endpoint = t1 in (0.0, 1.0) or t2 in (0.0, 1.0)
    if endpoint and t1 != t2:
        raise DomainError(f"no canonical isometry between t = {t1} and t = {t2}")
    if t1 == 0.0:
        return TransportedFunction(leg, bohr)
    if leg.warp is not None:
        raise ValueError("transporting an already transported function is not supported")
    warp = None if src.rho is dst.rho else Warp(src.rho, dst.rho)
    k = math.sqrt(t1 / t2)
    dec = leg.decaying
    if dec is not None and warp is not None:
        inner = dec
        dec = lambda x: inner(warp.fwd(x))  # noqa: E731
    new_leg = LegFunction(dec, leg.ap, warp, k * leg.scale)
    if t1 == 1.0:
        return TransportedFunction(new_leg, APPolynomial(bohr.context))
    return TransportedFunction(new_leg, bohr.scale(math.sqrt((1 - t1) / (1 - t2))))


def lebesgue_image(g: LegFunction, rho: Parametrization) -> Callable[[float], complex]:
    """psi -> psi / sqrt|rho'(rho^-1)|, the isometry L2(R, rho(lambda)) -> L2(R, lambda)."""
    return lambda x: g(x) * math.sqrt(rho.density(x))


def lebesgue_inner(h1: Callable, h2: Callable, quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[complex, float]:
    """int_R h1 conj(h2) dx for decaying functions (infinite-interval quadrature)."""
    def part(fn):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(fn, -np.inf, np.inf, epsabs=quad.abs_tol, epsrel=0.0,
                                  limit=quad.max_subdivisions)
        return v, e

    re, er = part(lambda x: (h1(x) * complex(h2(x)).conjugate()).real)
    im, ei = part(lambda x: (h1(x) * complex(h2(x)).conjugate()).imag)
    return complex(re, im), math.hypot(er, ei)


# --- Jon's conditions -------------------------------------------------------

def bump_probe(n: float = 1.0, width: float = 1.0) -> C0Function:
    """Strictly positive C0 function, identically 1 on [-n, n] with Gaussian tails."""

    def f(x):
        d = abs(x) - n
        return 1.0 if d <= 0 else math.exp(-(d / width) ** 2)

    return C0Function(f, lambda x: math.exp(-(max(abs(x) - n, 0) / width) ** 2), label=f"bump[{n}]")


@dataclass
class JonsReport:
    candidate: str
    t: float
    condition_i_max: float
    condition_ii_max: float
    condition_i_pass: bool
    condition_ii_pass: bool
    probe_value: complex
    probe_floor: float
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.condition_i_pass and self.condition_ii_pass

    def to_json(self) -> dict:
        return {
            "candidate": self.candidate,
            "t": self.t,
            "condition_i": {"max_abs": self.condition_i_max, "pass": self.condition_i_pass},
            "condition_ii": {"max_abs_deviation": self.condition_ii_max, "pass": self.condition_ii_pass},
            "probe": {"value": {"re": self.probe_value.real, "im": self.probe_value.imag},
                      "floor": self.probe_floor},
            "pass": self.passed,
            "details": self.details,
        }


def jons_conditions_check(candidate: Optional[MeasureDescriptor], c0_family: Sequence[C0Function],
                          ap_family: Sequence[APPolynomial], probe_n: float = 1.0,
                          tol: float = 1e-10, quad: QuadratureConfig = DEFAULT_QUAD) -> JonsReport:
    """Audit conditions (i) <f0, f_AP> = 0 and (ii) <f_AP, g_AP> = <f_AP, g_AP>_Bohr.

    ``candidate=None`` stands for 0_R + mu_Bohr. The family always gets the
    constant function 1 and a positive bump, identically 1 on [-probe_n, probe_n].
    ``probe_floor`` is t * rho(lambda)([-n, n]), a lower bound for the probe value.
    """
    if not ap_family:
        raise ValueError("need at least one AP test function")
    ctx = ap_family[0].context
    probe = bump_probe(probe_n)
    one = APPolynomial.constant(ctx)
    c0s = [probe, *c0_family]
    aps = [one, *ap_family]
    mu = candidate if candidate is not None else MeasureDescriptor(tan_map(), 0.0)
    label = "0_R+mu_Bohr" if candidate is None else f"mu[{mu.rho.label},t={mu.t}]"
    details = []
    cond_i = []
    probe_value = 0j
    for i, c0 in enumerate(c0s):
        f0 = QuantumFunction.of_c0(ctx, c0)
        for j, p in enumerate(aps):
            v, _ = inner_product(f0, QuantumFunction.of_ap(p), mu, quad)
            cond_i.append(abs(v))
            if i == 0 and j == 0:
                probe_value = v
            details.append({"condition": "i", "f0": c0.label, "ap_index": j, "abs": abs(v)})
    cond_ii = []
    for j, p in enumerate(aps):
        for k, q in enumerate(aps):
            v, _ = inner_product(QuantumFunction.of_ap(p), QuantumFunction.of_ap(q), mu, quad)
            dev = abs(v - bohr_inner_product(p, q))
            cond_ii.append(dev)
            details.append({"condition": "ii", "ap_index": [j, k], "deviation": dev})
    floor = mu.t * (mu.rho.rho_inv(probe_n) - mu.rho.rho_inv(-probe_n))
    ci, cii = max(cond_i), max(cond_ii)
    return JonsReport(label, mu.t, ci, cii, ci <= tol, cii <= tol, probe_value, floor, details)
