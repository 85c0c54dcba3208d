"""SU(2) as unit quaternions, the covering map to SO(3) and closed-form holonomies.

The quaternion (w, x, y, z) stands for ``w*1 + x*tau1 + y*tau2 + z*tau3`` with

    tau1 = [[0, -i], [-i, 0]],  tau2 = [[0, -1], [1, 0]],  tau3 = [[-i, 0], [0, i]],

so tau1 tau2 = tau3 and the Hamilton product is the matrix product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .harmonic import beta

__all__ = [
    "Su2Element",
    "IDENTITY",
    "TAU",
    "mu_rs",
    "su2_exp",
    "covering",
    "axis_rotor",
    "CircularCurveParams",
    "holonomy_linear",
    "holonomy_circular",
    "circle_A_entries",
    "circle_A_exp",
    "self_intersection_point",
    "invariance_check",
    "distance_to_torus",
    "reduced_A",
    "reduced_holonomy",
    "bohr_leg_holonomy",
    "holonomy_csv_rows",
    "CircleGrid",
    "circle_lemma_report",
]

TAU = (
    np.array([[0, -1j], [-1j, 0]]),
    np.array([[0, -1], [1, 0]], dtype=complex),
    np.array([[-1j, 0], [0, 1j]]),
)


def _unit(v: Sequence[float], tol: float, what: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} must have 3 components")
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > tol:
        raise ValueError(f"{what} must be a unit vector (norm {n})")
    return v


@dataclass(frozen=True)
class Su2Element:
    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, q, renormalize: bool = True) -> "Su2Element":
        q = np.asarray(q, dtype=float)
        if renormalize:
            q = q / math.sqrt(math.fsum(q * q))
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]))

    @classmethod
    def from_matrix(cls, m) -> "Su2Element":
        m = np.asarray(m, dtype=complex)
        return cls.from_array([m[0, 0].real, -m[1, 0].imag, m[1, 0].real, -m[0, 0].imag])

    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array([[complex(w, -z), complex(-y, -x)], [complex(y, -x), complex(w, z)]])

    def __mul__(self, o: "Su2Element") -> "Su2Element":
        a1, b1, c1, d1 = self.w, self.x, self.y, self.z
        a2, b2, c2, d2 = o.w, o.x, o.y, o.z
        return Su2Element.from_array([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])

    def inv(self) -> "Su2Element":
        return Su2Element(self.w, -self.x, -self.y, -self.z)

    def __neg__(self) -> "Su2Element":
        return Su2Element(-self.w, -self.x, -self.y, -self.z)

    def conjugate(self, other: "Su2Element") -> "Su2Element":
        """Ad_self(other) = self * other * self^-1."""
        return self * other * self.inv()

    def dist(self, other: "Su2Element") -> float:
        """Operator-norm distance of the matrix views (= Euclidean quaternion distance)."""
        return float(np.linalg.norm(self.array() - other.array()))

    def to_json(self) -> dict:
        m = self.matrix()
        return {
            "quaternion": [self.w, self.x, self.y, self.z],
            "matrix": [[{"re": z.real, "im": z.imag} for z in row] for row in m],
        }


IDENTITY = Su2Element(1.0, 0.0, 0.0, 0.0)


def mu_rs(v: Sequence[float]) -> np.ndarray:
    """The linear map R^3 -> su(2), e_i -> tau_i, as a 2x2 matrix."""
    return v[0] * TAU[0] + v[1] * TAU[1] + v[2] * TAU[2]


def _mu_rs_inv(m: np.ndarray) -> np.ndarray:
    # m = x tau1 + y tau2 + z tau3  =>  m[0,0] = -i z, m[1,0] = y - i x
    return np.array([-m[1, 0].imag, m[1, 0].real, -m[0, 0].imag])


def su2_exp(t: float, n: Sequence[float]) -> Su2Element:
    """exp(t mu_rs(n)) = cos(t) 1 + sin(t) mu_rs(n) for a unit vector n."""
    n = _unit(n, 1e-10, "axis")
    s = math.sin(t)
    return Su2Element.from_array([math.cos(t), s * n[0], s * n[1], s * n[2]])


def covering(sigma: Su2Element) -> np.ndarray:
    """The double cover SU(2) -> SO(3): column i is mu_rs^-1(sigma tau_i sigma^-1)."""
    m, mi = sigma.matrix(), sigma.inv().matrix()
    return np.column_stack([_mu_rs_inv(m @ t @ mi) for t in TAU])


def axis_rotor(n: Sequence[float]) -> Su2Element:
    """The minimal rotation sigma with covering(sigma) e3 = n.

    For n = -e3 the rotation by pi about e1 is used.
    """
    n = _unit(n, 1e-10, "axis")
    n = n / np.linalg.norm(n)
    perp2 = n[0] * n[0] + n[1] * n[1]
    # 1 + n3 without cancellation near the antipode
    w = 1.0 + n[2] if n[2] >= 0 else perp2 / (1.0 - n[2])
    if perp2 == 0.0 and n[2] < 0:
        return Su2Element(0.0, 1.0, 0.0, 0.0)
    # half-angle quaternion (1 + e3.n, e3 x n), normalized
    return Su2Element.from_array([w, -n[1], n[0], 0.0])


def holonomy_linear(c: float, l: float, v: Sequence[float]) -> Su2Element:
    """Parallel transport along t -> t v, t in [0, l]: cos(cl) 1 - sin(cl) mu_rs(v)."""
    v = _unit(v, 1e-10, "direction")
    s = math.sin(c * l)
    return Su2Element.from_array([math.cos(c * l), -s * v[0], -s * v[1], -s * v[2]])


@dataclass(frozen=True)
class CircularCurveParams:
    """Circle arc of angle ``tau`` and radius ``r`` in the plane normal to ``n``."""

    tau: float
    r: float
    n: tuple[float, float, float] = (0.0, 0.0, 1.0)
    sigma: Su2Element | None = None

    def __post_init__(self):
        if not 0.0 < self.tau < 2.0 * math.pi:
            raise ValueError("tau must lie in (0, 2pi)")
        if not self.r > 0.0:
            raise ValueError("r must be positive")
        n = _unit(self.n, 1e-12, "normal")
        object.__setattr__(self, "n", tuple(float(a) for a in n))
        sigma = self.sigma if self.sigma is not None else axis_rotor(n)
        if np.linalg.norm(covering(sigma) @ np.array([0.0, 0.0, 1.0]) - n) > 1e-10:
            raise ValueError("sigma does not rotate e3 onto n")
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self) -> Su2Element:
        return su2_exp(self.tau / 2.0, self.n)


def circle_A_entries(tau: float, r: float, c: float) -> Su2Element:
    """A(tau, c) assembled from its explicit matrix entries."""
    b = beta(c, r)
    s = math.sin(b * tau)
    a11 = complex(math.cos(b * tau), s / (2.0 * b))
    a12 = c * r / b * s
    m = np.array([[a11, a12], [-a12, a11.conjugate()]])
    return Su2Element.from_matrix(m)


def circle_A_exp(tau: float, r: float, c: float) -> Su2Element:
    """A(tau, c) = exp(-tau/2 (2 r c tau2 + tau3)) via the unit-axis exponential."""
    b = beta(c, r)
    axis = np.array([0.0, 2.0 * r * c, 1.0]) / (2.0 * b)
    axis /= np.linalg.norm(axis)
    return su2_exp(-tau * b, axis)


def holonomy_circular(c: float, params: CircularCurveParams) -> Su2Element:
    """d * sigma A(tau, c) sigma^-1 with d = exp(tau/2 mu_rs(n))."""
    A = circle_A_entries(params.tau, params.r, c)
    return params.d * params.sigma.conjugate(A)


def self_intersection_point(n: int, tau: float, r: float) -> float:
    """a_n = sign(n)/r sqrt(n^2 pi^2 / tau^2 - 1/4), where beta tau = |n| pi."""
    if n == 0:
        raise ValueError("n must be nonzero")
    arg = n * n * math.pi ** 2 / tau ** 2 - 0.25
    if arg <= 0:
        raise ValueError("n^2 pi^2 / tau^2 must exceed 1/4")
    return math.copysign(math.sqrt(arg) / r, n)


def invariance_check(c: float, l: float, v: Sequence[float], sigma: Su2Element) -> float:
    """Frobenius residual of h(R v) = sigma h(v) sigma^-1 with R = covering(sigma)."""
    v = _unit(v, 1e-10, "direction")
    rv = covering(sigma) @ v
    rv = rv / np.linalg.norm(rv)
    lhs = holonomy_linear(c, l, rv).matrix()
    rhs = sigma.conjugate(holonomy_linear(c, l, v)).matrix()
    return float(np.linalg.norm(lhs - rhs))


def distance_to_torus(s: Su2Element, axis: Sequence[float] = (0.0, 1.0, 0.0)) -> float:
    """Operator-norm distance from s to the maximal torus {exp(t mu_rs(axis))}."""
    q = s.array()
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    vec = q[1:]
    along = float(vec @ a)
    perp = vec - along * a
    rad = math.hypot(q[0], along)
    return math.sqrt((1.0 - rad) ** 2 + float(perp @ perp))


def _qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise Hamilton product of (..., 4) arrays."""
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ], axis=-1)


def reduced_A(cs, tau: float, r: float) -> np.ndarray:
    """Quaternions of A(tau, c) for an array of c (normal e3, sigma = 1)."""
    cs = np.asarray(cs, dtype=float)
    b = beta(cs, r)
    s = np.sin(b * tau)
    return np.stack([np.cos(b * tau), np.zeros_like(cs), -s * cs * r / b, -s / (2.0 * b)], axis=-1)


def reduced_holonomy(cs, tau: float, r: float) -> np.ndarray:
    """Quaternions of d * A(tau, c) for an array of c (normal e3, sigma = 1)."""
    d = np.array([math.cos(tau / 2.0), 0.0, 0.0, math.sin(tau / 2.0)])
    return _qmul(np.broadcast_to(d, (len(np.atleast_1d(cs)), 4)), np.atleast_2d(reduced_A(cs, tau, r)))


def _torus_e2_distance(q: np.ndarray) -> np.ndarray:
    # distance of unit quaternions to {cos t + sin t tau2}
    rad = np.hypot(q[..., 0], q[..., 2])
    return np.sqrt((1.0 - rad) ** 2 + q[..., 1] ** 2 + q[..., 3] ** 2)


def bohr_leg_holonomy(point, params: CircularCurveParams, omega) -> Su2Element:
    """Circular holonomy at a Bohr point, read off from the AP parts of its entries.

    ``omega`` is the exact frequency with value ``r * tau``; the point's level
    must contain it in its integer span.
    """
    from .harmonic import QuantumFunction, circular_entry_decomposition, rbar_eval

    a, b = circular_entry_decomposition(params.tau, params.r, omega)
    av = rbar_eval(point, QuantumFunction.of_ap(a.ap))
    bv = rbar_eval(point, QuantumFunction.of_ap(b.ap))
    A = Su2Element.from_matrix(np.array([[av, bv], [-bv.conjugate(), av.conjugate()]]))
    return params.d * params.sigma.conjugate(A)


def holonomy_csv_rows(cs: Sequence[float], params: CircularCurveParams) -> list[list[float]]:
    """Rows (c, Re/Im of the four matrix entries) for plotting."""
    rows = []
    for c in cs:
        m = holonomy_circular(float(c), params).matrix()
        rows.append([float(c)] + [v for z in m.ravel() for v in (z.real, z.imag)])
    return rows


@dataclass(frozen=True)
class CircleGrid:
    """Sampling plan for :func:`circle_lemma_report`."""

    c_max: float = 20.0
    points: int = 4001
    band_samples: int = 200
    n_max: int = 20
    merge_n_max: int = 60
    footnote_n_max: int = 50
    witness_draws: int = 64

    def __post_init__(self):
        if not (self.c_max > 0 and math.isfinite(self.c_max)):
            raise ValueError("c_max must be a positive finite number")
        if self.points < 3 or self.band_samples < 3:
            raise ValueError("grid needs at least 3 points per sample set")
        if min(self.n_max, self.merge_n_max, self.footnote_n_max, self.witness_draws) < 1:
            raise ValueError("band counts and witness draws must be positive")


def _band_cs(theta_lo: float, theta_hi: float, sign: float, tau: float, r: float, m: int) -> np.ndarray:
    # sample uniformly in theta = beta tau on an open interval, then map back to c
    th = np.linspace(theta_lo, theta_hi, m + 2)[1:-1]
    return sign * np.sqrt(np.maximum((th / tau) ** 2 - 0.25, 0.0)) / r


def circle_lemma_report(tau: float, r: float, epsilon: float, grid: CircleGrid | None = None,
                        seed: int = 0) -> dict:
    """Numerical evidence for the structure of the circular holonomy image.

    Works in the reduced case (normal e3, sigma = 1); other normals are
    conjugates of it. Sub-checks: non-commutativity witness, intersections
    with d*T_e2, alternation at a_n, injectivity on the bands A_n, merging
    of the bands B_n to T_e2, and the spacing of l*a_2n.
    """
    if not 0.0 < tau < 2.0 * math.pi:
        raise ValueError("tau must lie in (0, 2pi)")
    if not r > 0.0:
        raise ValueError("r must be positive")
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    grid = grid or CircleGrid()
    params = CircularCurveParams(tau, r)
    d = params.d.array()
    checks: dict = {}

    # (i) two holonomies that do not commute
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(-grid.c_max, grid.c_max, size=(grid.witness_draws, 2))
    h1 = reduced_holonomy(pairs[:, 0], tau, r)
    h2 = reduced_holonomy(pairs[:, 1], tau, r)
    comm = np.linalg.norm(_qmul(h1, h2) - _qmul(h2, h1), axis=1)
    k = int(np.argmax(comm))
    checks["noncommutativity"] = {
        "c1": float(pairs[k, 0]), "c2": float(pairs[k, 1]),
        "commutator_norm": float(comm[k]), "threshold": 1e-6,
        "passed": bool(comm[k] > 1e-6),
    }

    # (ii) which grid points land on d*T_e2
    top = int(beta(grid.c_max, r) * tau / math.pi) + 1
    a_idx = [n for n in range(-top, top + 1)
             if n and abs(self_intersection_point(n, tau, r)) <= grid.c_max]
    a_pts = np.array([self_intersection_point(n, tau, r) for n in a_idx])
    plain = np.linspace(-grid.c_max, grid.c_max, grid.points)
    plain = plain[np.min(np.abs(plain[:, None] - a_pts[None, :]), axis=1) > 1e-6] if a_pts.size else plain
    plain = np.union1d(plain, [0.0])
    dist_plain = _torus_e2_distance(reduced_A(plain, tau, r))
    flagged_plain = plain[dist_plain <= 1e-10]
    dist_a = _torus_e2_distance(reduced_A(a_pts, tau, r))
    ha = reduced_holonomy(a_pts, tau, r)
    to_pm_d = np.minimum(np.linalg.norm(ha - d, axis=1), np.linalg.norm(ha + d, axis=1))
    zero_dist = float(_torus_e2_distance(reduced_A(np.array([0.0]), tau, r))[0])
    checks["coset_intersection"] = {
        "grid_points": int(plain.size),
        "intersection_points_tested": int(a_pts.size),
        "flagged_off_intersection": [float(c) for c in flagged_plain],
        "min_distance_off_intersection": float(dist_plain.min()),
        "max_distance_at_intersection": float(dist_a.max()) if a_pts.size else 0.0,
        "max_distance_to_plus_minus_d": float(to_pm_d.max()) if a_pts.size else 0.0,
        "c0_distance": zero_dist,
        "c0_is_intersection": bool(zero_dist <= 1e-10),
        "tolerance": 1e-10,
        "passed": bool(flagged_plain.size == 0 and (a_pts.size == 0 or dist_a.max() <= 1e-10)
                       and (a_pts.size == 0 or to_pm_d.max() <= 1e-9)),
    }

    # (iii) h(a_n) = +d for even |n|, -d for odd |n|
    ns = [n for n in range(-grid.n_max, grid.n_max + 1) if n]
    an = np.array([self_intersection_point(n, tau, r) for n in ns])
    h_an = reduced_holonomy(an, tau, r)
    target = np.array([d if n % 2 == 0 else -d for n in ns])
    err = np.linalg.norm(h_an - target, axis=1)
    checks["alternation"] = {
        "n_max": grid.n_max, "max_error": float(err.max()), "tolerance": 1e-9,
        "worst_n": ns[int(np.argmax(err))], "passed": bool(err.max() <= 1e-9),
    }

    # (iv) no two samples of a band collide in the image
    worst = math.inf
    worst_band = None
    m = grid.band_samples
    for n in range(-grid.n_max, grid.n_max + 1):
        if n == 0:
            a1 = self_intersection_point(1, tau, r)
            cs = np.linspace(-a1, a1, m + 2)[1:-1]
        else:
            sgn = 1.0 if n > 0 else -1.0
            lo = abs(n) * math.pi
            cs = _band_cs(lo, lo + math.pi, sgn, tau, r, m)
        q = reduced_holonomy(cs, tau, r)
        step = np.linalg.norm(np.diff(q, axis=0), axis=1).min()
        dm = np.linalg.norm(q[:, None, :] - q[None, :, :], axis=-1)
        i, j = np.triu_indices(len(cs), 2)
        ratio = float(dm[i, j].min() / step)
        if ratio < worst:
            worst, worst_band = ratio, n
    checks["injectivity"] = {
        "bands": 2 * grid.n_max + 1, "samples_per_band": m,
        "min_separation_over_step": worst, "worst_band": worst_band,
        "bound": 0.5, "passed": bool(worst > 0.5),
    }

    # (v) sup distance of d^-1 h(B_n) to T_e2, B_n = [a_2n, a_2n+2]
    sups = {}
    for n in range(1, grid.merge_n_max + 1):
        for sgn in (1.0, -1.0):
            cs = _band_cs(2 * n * math.pi, 2 * (n + 1) * math.pi, sgn, tau, r, m)
            sups[int(sgn) * n] = float(_torus_e2_distance(reduced_A(cs, tau, r)).max())
    n_eps = None
    for n in range(grid.merge_n_max, 0, -1):
        if sups[n] <= epsilon and sups[-n] <= epsilon:
            n_eps = n
        else:
            break
    # beyond the sampled bands: dist <= 1/(2 beta) <= tau / (4 pi n)
    tail = tau / (4.0 * math.pi * grid.merge_n_max)
    checks["merging"] = {
        "epsilon": epsilon, "n_epsilon": n_eps, "sampled_up_to": grid.merge_n_max,
        "tail_bound": tail,
        "band_sup_distance": {str(k): v for k, v in sorted(sups.items())},
        "passed": bool(n_eps is not None and tail <= epsilon),
    }

    # (vi) l a_{2(n+1)} - l a_{2n} tends to 2pi from above
    def excess(n):
        # l a_2n - 2 n pi without cancellation
        root = math.sqrt((2 * n * math.pi) ** 2 - tau ** 2 / 4.0)
        return -(tau ** 2 / 4.0) / (root + 2 * n * math.pi)

    gaps = {n: excess(n + 1) - excess(n) for n in range(1, grid.footnote_n_max + 1)}
    ok = {n: 0.0 < abs(g) < epsilon for n, g in gaps.items()}
    n0 = None
    for n in range(grid.footnote_n_max, 0, -1):
        if ok[n]:
            n0 = n
        else:
            break
    checks["footnote_spacing"] = {
        "l": tau * r, "n_max": grid.footnote_n_max, "n0": n0,
        "min_gap_minus_2pi": min(gaps.values()), "max_gap_minus_2pi": max(gaps.values()),
        "all_above_2pi": all(g > 0 for g in gaps.values()),
        "passed": n0 is not None,
    }

    # a0 never vanishes: evidence on a log grid
    from .frequency import FrequencyContext
    from .harmonic import circular_entry_decomposition

    ctx = FrequencyContext.from_pairs([("l", r * tau)])
    a_fn, _ = circular_entry_decomposition(tau, r, ctx.freq(1))
    logc = np.logspace(-6, 6, 2001)
    mags = [abs(a_fn.c0(s * c)) for c in logc for s in (1.0, -1.0)] + [abs(a_fn.c0(0.0))]
    checks["a0_nonvanishing"] = {
        "grid": "+-logspace(-6, 6, 2001) and 0", "min_abs_a0": min(mags),
        "abs_a0_at_1e3": abs(a_fn.c0(1e3)), "abs_a0_at_1e6": abs(a_fn.c0(1e6)),
        "passed": bool(min(mags) > 0.0), "evidence_only": True,
    }

    return {
        "tau": tau, "r": r, "epsilon": epsilon, "seed": seed,
        "grid": {k: getattr(grid, k) for k in grid.__dataclass_fields__},
        "checks": checks,
        "passed": all(c["passed"] for c in checks.values()),
    }
