import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rbar.frequency import FrequencyContext
from rbar.harmonic import APPolynomial, C0Function, QuantumFunction
from rbar.measure import (
    DomainError,
    MeasureDescriptor,
    QuadratureConfig,
    QuadratureError,
    characteristic_function,
    circle_generator,
    inner_product,
    integrate_qf,
    isometry_transport,
    jons_conditions_check,
    leg_integral,
    LegFunction,
    make_parametrization,
    norm,
    tan_map,
)

CTX = FrequencyContext.from_pairs([("one", 1.0), ("sqrt2", math.sqrt(2))])
B1, B2, Z = CTX.freq(1, 0), CTX.freq(0, 1), CTX.zero()
GAUSS = C0Function(lambda x: math.exp(-x * x), label="gauss")


def tan_sq():
    return tan_map().precompose(lambda u: u * u, math.sqrt, lambda u: 2 * u, label="tan_map∘u^2")


def test_tan_map_examples():
    rho = tan_map()
    assert rho(0.5) == 0.0
    assert rho(0.75) == pytest.approx(1.0, abs=1e-15)
    assert rho.inverse(rho(0.9)) == pytest.approx(0.9, abs=1e-12)
    assert rho.deriv(0.3) == pytest.approx(math.pi / math.cos(math.pi * (0.3 - 0.5)) ** 2)


def test_custom_parametrization():
    rho = make_parametrization("custom", rho=lambda u: math.log(u / (1 - u)),
                               rho_inv=lambda x: 1 / (1 + math.exp(-x)))
    assert rho.density(0.0) == pytest.approx(0.25, rel=1e-6)
    with pytest.raises(ValueError):
        make_parametrization("custom", rho=lambda u: -math.log(u / (1 - u)),
                             rho_inv=lambda x: 1 / (1 + math.exp(x)))
    with pytest.raises(ValueError):
        make_parametrization("custom", rho=lambda u: u, rho_inv=lambda x: 2 * x)
    with pytest.raises(ValueError):
        make_parametrization("nonsense")


def test_circle_generator():
    f = circle_generator(tan_map())
    xs = np.linspace(-50, 50, 101)
    vals = [f(x) for x in xs]
    assert all(abs(abs(v - 1) - 1) < 1e-12 for v in vals)
    assert all(abs(v) > 0 for v in vals)
    assert abs(f(1e12)) < 1e-10
    assert len({round(v.real, 12) + 1j * round(v.imag, 12) for v in vals}) == len(vals)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("rho", [tan_map(), tan_sq()], ids=["tan", "tan_sq"])
def test_total_mass(rho, t):
    v, _ = integrate_qf(QuantumFunction.of_ap(APPolynomial.constant(CTX)), MeasureDescriptor(rho, t))
    assert v == pytest.approx(1.0, abs=1e-10)


def test_character_against_haar_vanishes():
    v, _ = integrate_qf(QuantumFunction.of_ap(APPolynomial.character(B1)), MeasureDescriptor(tan_map(), 0.0))
    assert v == 0


def test_gaussian_against_reference_rule():
    v, err = integrate_qf(QuantumFunction.of_c0(CTX, GAUSS), MeasureDescriptor(tan_map(), 1.0))
    # 10^6-node midpoint rule in u; the integrand is flat to all orders at both ends
    u = (np.arange(1_000_000) + 0.5) / 1_000_000
    ref = float(np.mean(np.exp(-np.tan(np.pi * (u - 0.5)) ** 2)))
    assert v.real == pytest.approx(ref, abs=1e-8)
    assert v.real == pytest.approx(math.e * math.erfc(1.0), abs=1e-10)
    assert err < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(-30, 30))
def test_characteristic_function_of_cauchy(nu):
    v, err = characteristic_function(tan_map(), nu)
    assert abs(v - math.exp(-abs(nu))) < 1e-12


@pytest.mark.parametrize("nu", [1e-7, -1e-9, 1e-60, 1e-300, 5e-324, 1e6])
def test_characteristic_function_extreme_frequencies(nu):
    v, _ = characteristic_function(tan_map(), nu)
    assert abs(v - math.exp(-abs(nu))) < 1e-12


@pytest.mark.parametrize("nu", [1e-5, -1e-7, 1e-9, 1e-11, -1e-13])
def test_composite_characteristic_function_small_frequency(nu):
    # left tail of the density is |x|^(-3/2) / (2 sqrt(pi)), so phi(nu) = 1 - sqrt(i nu) + O(nu log nu)
    v, _ = characteristic_function(tan_sq(), nu)
    assert abs(v - (1 - cmath.sqrt(1j * nu))) <= abs(nu) * (1 + abs(math.log(abs(nu))))


@pytest.mark.parametrize("nu", [0.8, -2.5, 0.05])
def test_characteristic_function_of_composite_against_mpmath(nu):
    rho = tan_sq()
    v, _ = characteristic_function(rho, nu)
    # independent route: oscillatory quadrature of the density of rho(lambda) in extended precision
    with mpmath.workdps(25):
        def dens(x):
            s = mpmath.mpf(1) / 2 + mpmath.atan(x) / mpmath.pi
            return 1 / (mpmath.pi * (1 + x * x)) / (2 * mpmath.sqrt(s))

        w = mpmath.mpf(nu)
        f = lambda x: dens(x) * mpmath.exp(1j * w * x)  # noqa: E731
        ref = mpmath.quadosc(f, [0, mpmath.inf], omega=abs(w)) + mpmath.quadosc(f, [-mpmath.inf, 0], omega=abs(w))
    assert abs(v - complex(ref)) < 1e-12


def test_characters_not_orthogonal_on_real_leg():
    mu = MeasureDescriptor(tan_map(), 1.0)
    c1, c2 = QuantumFunction.of_ap(APPolynomial.character(B1)), QuantumFunction.of_ap(APPolynomial.character(B2))
    v, _ = inner_product(c1, c2, mu)
    assert v == pytest.approx(math.exp(-(math.sqrt(2) - 1)), abs=1e-12)
    g, _ = inner_product(c1, QuantumFunction.of_ap(APPolynomial.character(B1 * 2)), mu)
    assert abs(g) > 1e-3
    v0, _ = inner_product(c1, c2, MeasureDescriptor(tan_map(), 0.0))
    assert v0 == 0


def test_gram_identity_at_t0():
    chars = [QuantumFunction.of_ap(APPolynomial.character(f)) for f in (Z, B1, B2, B1 + B2)]
    mu = MeasureDescriptor(tan_map(), 0.0)
    for i, f in enumerate(chars):
        for j, g in enumerate(chars):
            assert inner_product(f, g, mu)[0] == (1 if i == j else 0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 1.0), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_inner_product_positivity(t, c):
    qf = QuantumFunction(CTX, GAUSS, APPolynomial(CTX, {B1: c, Z: 1.0}))
    v, _ = inner_product(qf, qf, MeasureDescriptor(tan_map(), t))
    assert v.real >= -1e-12 and abs(v.imag) < 1e-10


def test_change_of_variables():
    rho = tan_sq()
    g = LegFunction(lambda x: 1.0 / (1.0 + (x - 0.5) ** 2), APPolynomial(CTX))
    v, _ = leg_integral(g, rho)
    ref = integrate.quad(lambda x: g(x).real * rho.density(x), -np.inf, np.inf, epsabs=1e-12, limit=500)[0]
    assert v.real == pytest.approx(ref, abs=1e-9)


def test_isometry_identity_and_reparametrization():
    psi = QuantumFunction(CTX, GAUSS, APPolynomial(CTX, {B1: 1.0, Z: 2.0}))
    mu = MeasureDescriptor(tan_map(), 0.4)
    same = isometry_transport(psi, mu, mu)
    for x in (-3.0, 0.0, 1.7):
        assert same.real_leg(x) == pytest.approx(psi(x), abs=1e-15)
    assert same.bohr.terms == psi.ap.terms
    other = MeasureDescriptor(tan_sq(), 0.4)
    moved = isometry_transport(psi, mu, other)
    assert moved.bohr.terms == psi.ap.terms
    assert norm(moved, other) == pytest.approx(norm(psi, mu), abs=1e-9)


def test_isometry_endpoints():
    psi = QuantumFunction(CTX, GAUSS, APPolynomial(CTX, {B1: 1.0}))
    with pytest.raises(DomainError):
        isometry_transport(psi, MeasureDescriptor(tan_map(), 0.5), MeasureDescriptor(tan_map(), 1.0))
    with pytest.raises(DomainError):
        isometry_transport(psi, MeasureDescriptor(tan_map(), 0.0), MeasureDescriptor(tan_map(), 0.5))
    src, dst = MeasureDescriptor(tan_map(), 1.0), MeasureDescriptor(tan_sq(), 1.0)
    assert norm(isometry_transport(psi, src, dst), dst) == pytest.approx(norm(psi, src), abs=1e-9)


def test_jons_examples():
    aps = [APPolynomial.character(B1)]
    assert jons_conditions_check(None, [GAUSS], aps).passed
    rep = jons_conditions_check(MeasureDescriptor(tan_map(), 0.5), [GAUSS], aps)
    assert not rep.condition_i_pass and rep.probe_value.real > 0
    assert jons_conditions_check(MeasureDescriptor(tan_map(), 0.0), [GAUSS], aps).passed
    js = rep.to_json()
    assert js["pass"] is False and js["condition_i"]["pass"] is False


def test_quadrature_failure_is_reported():
    wild = C0Function(lambda x: math.cos(x * x * 40.0) / (1 + 1e-6 * x * x))
    with pytest.raises(QuadratureError) as exc:
        integrate_qf(QuantumFunction.of_c0(CTX, wild), MeasureDescriptor(tan_map(), 1.0),
                     QuadratureConfig(abs_tol=1e-14, max_subdivisions=3))
    assert exc.value.error > 0


def test_measure_rejects_bad_t():
    with pytest.raises(ValueError):
        MeasureDescriptor(tan_map(), 1.5)
