"""Level spaces X_L = im[f] u T^|L|, projections and transition maps."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence, Union

from .frequency import (
    NOT_IN_SPAN,
    FrequencyTuple,
    IntegerRelationMatrix,
    join,
    lattice_intersection,
    solve_span,
)
from .harmonic import BohrPoint, RealPoint, wrap_angle

__all__ = [
    "OrderingError",
    "CirclePart",
    "TorusPart",
    "LevelSpace",
    "CircleWitness",
    "Indistinguishable",
    "project",
    "transition",
    "verify_pushforward_exact",
    "separate_points",
    "angle_distance",
]


class OrderingError(ValueError):
    """Two levels are not comparable in the required direction."""


@dataclass(frozen=True)
class CirclePart:
    """Point of the im[f] leg, stored through its preimage under f."""

    x: float

    def to_json(self):
        return {"circle": self.x}


@dataclass(frozen=True)
class TorusPart:
    angles: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(wrap_angle(float(a)) for a in self.angles))

    def to_json(self):
        return {"torus": list(self.angles)}


LevelPoint = Union[CirclePart, TorusPart]


@dataclass(frozen=True)
class LevelSpace:
    level: FrequencyTuple
    parametrization_id: str = "tan_map"

    def check(self, pt: LevelPoint) -> None:
        if isinstance(pt, TorusPart) and len(pt.angles) != len(self.level):
            raise ValueError(f"torus point has {len(pt.angles)} angles, level has {len(self.level)}")


def _relation(coarse, fine) -> IntegerRelationMatrix:
    rel = solve_span(coarse, fine)
    if rel is NOT_IN_SPAN:
        raise OrderingError("coarse level is not in the integer span of the fine level")
    return rel


def _apply(rel: IntegerRelationMatrix, angles: Sequence[float]) -> tuple[float, ...]:
    return tuple(wrap_angle(math.fsum(n * a for n, a in zip(row, angles))) for row in rel.entries)


def project(point, space: LevelSpace) -> LevelPoint:
    """pi_L: real points go to the circle leg, Bohr points to the torus."""
    if isinstance(point, RealPoint):
        return CirclePart(point.x)
    if isinstance(point, BohrPoint):
        try:
            rel = _relation(space.level, point.level)
        except OrderingError as exc:
            raise OrderingError(
                "point level does not refine the target level; join the levels first"
            ) from exc
        return TorusPart(_apply(rel, point.angles))
    raise TypeError(f"not a point of R-bar: {point!r}")


def transition(src: LevelSpace, dst: LevelSpace, pt: LevelPoint) -> LevelPoint:
    """pi_L^{L'} from the fine space ``src`` (L') down to ``dst`` (L)."""
    if src.parametrization_id != dst.parametrization_id:
        raise ValueError("level spaces use different parametrizations of the circle leg")
    src.check(pt)
    rel = _relation(dst.level, src.level)
    if isinstance(pt, CirclePart):
        return pt
    return TorusPart(_apply(rel, pt.angles))


def verify_pushforward_exact(
    L: Sequence,
    Lp: Sequence,
    max_exponent: int,
    relation: Optional[IntegerRelationMatrix] = None,
) -> dict:
    """Check exactly that the transition map pushes Haar(T^|L'|) to Haar(T^|L|).

    A character monomial ``s^k`` on the coarse torus pulls back to ``s'^(k N)``;
    Haar integrals agree for every tested ``k`` iff ``k N = 0`` exactly when
    ``k = 0``. ``relation`` overrides the computed matrix (negative controls).
    """
    if max_exponent < 1:
        raise ValueError("max_exponent must be positive")
    rel = relation if relation is not None else _relation(L, Lp)
    k, kp = rel.shape
    tested = 0
    counterexample = None
    for kvec in product(range(-max_exponent, max_exponent + 1), repeat=k):
        composed = [sum(kvec[j] * rel.entries[j][i] for j in range(k)) for i in range(kp)]
        tested += 1
        if any(kvec) != any(composed):
            counterexample = {"monomial": list(kvec), "composed": composed}
            break
    return {
        "check": "pushforward_haar",
        "pair": {
            "L": [f.to_json() for f in L],
            "Lp": [f.to_json() for f in Lp],
        },
        "relation": rel.tolist(),
        "max_exponent": max_exponent,
        "monomials_tested": tested,
        "status": "pass" if counterexample is None else "fail",
        "counterexample": counterexample,
    }


@dataclass(frozen=True)
class CircleWitness:
    """The points differ on the circle leg of every X_L (f is injective / legs are disjoint)."""

    reason: str


@dataclass(frozen=True)
class Indistinguishable:
    """No frequency known to both points tells them apart."""

    reason: str


def angle_distance(a: float, b: float) -> float:
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, 2.0 * math.pi - d)


def separate_points(p, q, tol: float = 1e-12):
    """Find a level (or the circle leg) on which the projections of p and q differ.

    Bohr/Bohr pairs are compared on a Z-basis of span_Z(level_p) n span_Z(level_q),
    the only frequencies where both points have known values. If they agree
    there, some Bohr point extends both and the pair is reported indistinguishable.
    """
    if isinstance(p, RealPoint) and isinstance(q, RealPoint):
        if p.x == q.x:
            return Indistinguishable("same real point")
        return CircleWitness("f is injective on R")
    if isinstance(p, RealPoint) or isinstance(q, RealPoint):
        return CircleWitness("real and Bohr points land in disjoint legs of X_L")
    common = lattice_intersection(p.level, q.level)
    if not common:
        return Indistinguishable("the point levels share no nonzero frequency")
    K = FrequencyTuple(common)
    space = LevelSpace(K)
    ap, aq = project(p, space), project(q, space)
    if any(angle_distance(x, y) > tol for x, y in zip(ap.angles, aq.angles)):
        return K
    return Indistinguishable("projections agree on every common frequency")


def common_refinement(p: BohrPoint, q: BohrPoint) -> FrequencyTuple:
    return join(p.level, q.level)
