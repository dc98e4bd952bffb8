import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from svbounds.modulus import (
    DivergenceError,
    Modulus,
    ModulusError,
    check_modulus,
    lambda_seminorm,
    lambda_seminorm_points,
    omega_sharp,
    omega_star,
)


def test_power_evaluation_and_saturation():
    m = Modulus.power(0.5)
    assert m(0.25) == pytest.approx(0.5)
    s = Modulus.power(0.5, saturation=2.0)
    assert s(9.0) == pytest.approx(math.sqrt(2.0))
    assert s(1.0) == pytest.approx(1.0)


def test_negative_argument_rejected():
    with pytest.raises(ModulusError):
        Modulus.power(0.5)(-0.1)


def test_power_parameter_range():
    with pytest.raises(ModulusError):
        Modulus.power(0.0)
    with pytest.raises(ModulusError):
        Modulus.power(1.5)


def test_star_of_square_root_at_one():
    # x * int_x^inf t^(-3/2) dt = 2 sqrt(x)
    m = Modulus.power(0.5)
    assert omega_star(m, 1.0) == pytest.approx(2.0, rel=1e-12)
    assert omega_star(m, 1.0, method="quad") == pytest.approx(2.0, rel=1e-10)


def test_sharp_of_square_root_at_one():
    # head integral int_0^1 t^(-1/2) dt = 2
    m = Modulus.power(0.5)
    assert omega_sharp(m, 1.0) == pytest.approx(4.0, rel=1e-12)


def test_unsaturated_identity_diverges():
    with pytest.raises(DivergenceError):
        omega_star(Modulus.power(1.0), 1.0)


def test_saturated_identity_star():
    # x * (int_x^2 dt/t + 2 int_2^inf dt/t^2) = x (log(2/x) + 1)
    m = Modulus.power(1.0, saturation=2.0)
    x = 0.5
    assert omega_star(m, x) == pytest.approx(x * (math.log(2 / x) + 1), rel=1e-12)
    assert omega_star(m, x, method="quad") == pytest.approx(x * (math.log(2 / x) + 1), rel=1e-10)


def test_table_star_against_scipy_quad():
    m = Modulus.table([(0, 0), (1, 1), (2, 1.5)], saturation=3.0)

    def direct(x):
        head = quad(lambda t: m.scalar(t) / t**2, x, 50, limit=200, points=[1, 2, 3])[0]
        tail = m.scalar(60.0) / 50.0
        return x * (head + tail)

    for x in (0.3, 1.0, 2.5):
        assert omega_star(m, x) == pytest.approx(direct(x), rel=1e-9)


def test_vectorised_matches_scalar():
    m = Modulus.power(0.3)
    xs = np.array([0.1, 0.5, 2.0])
    vals = omega_star(m, xs)
    assert np.allclose(vals, [omega_star(m, x) for x in xs], rtol=0, atol=0)


def test_transforms_need_positive_argument():
    m = Modulus.power(0.5)
    with pytest.raises(ModulusError):
        omega_star(m, 0.0)
    with pytest.raises(ModulusError):
        omega_sharp(m, -1.0)


def test_sharp_vanishes_at_zero_limit():
    m = Modulus.power(0.5)
    assert omega_sharp(m, 1e-12) < 1e-5


def test_star_saturates_past_the_level():
    m = Modulus.power(0.4, saturation=1.5)
    for x in (1.5, 3.0, 100.0):
        assert omega_star(m, x) == pytest.approx(m(1.5), rel=1e-12)
        assert omega_star(m, x, method="quad") == pytest.approx(m(1.5), rel=1e-9)


def test_sharp_power_closed_form():
    a = 0.3
    m = Modulus.power(a)
    for x in (0.01, 0.7, 5.0):
        assert omega_sharp(m, x) == pytest.approx(x**a * (1 / (1 - a) + 1 / a), rel=1e-12)


def test_parse_and_roundtrip():
    m = Modulus.parse("power:0.5:2.0")
    assert m.alpha == 0.5 and m.saturation == 2.0
    j = Modulus.parse('{"kind":"table","points":[[0,0],[1,1],[2,1.5]]}')
    assert Modulus.from_dict(j.to_dict()) == j
    assert Modulus.from_dict(m.to_dict()) == m
    with pytest.raises(ModulusError):
        Modulus.parse("cubic:1")


def test_table_must_start_at_origin_and_be_concave():
    with pytest.raises(ModulusError):
        Modulus.table([(0, 0.1), (1, 1)])
    with pytest.raises(ModulusError):
        Modulus.table([(0, 0), (1, 0.2), (2, 1.5)])
    Modulus.table([(0, 0), (1, 0.2), (2, 1.5)], require_concave=False)


def test_check_modulus_clean_and_violating():
    assert check_modulus(Modulus.power(0.3)) == []
    assert check_modulus(Modulus.table([(0, 0), (1, 1), (2, 1.5)], saturation=2.0)) == []
    bad = Modulus.table([(0, 0), (1, 0.1), (2, 2.0)], require_concave=False)
    v = check_modulus(bad)
    assert v and all(x.lhs > x.rhs for x in v)


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(0.05, 0.95),
    x=st.floats(1e-4, 1e3),
)
def test_star_dominates_omega(alpha, x):
    m = Modulus.power(alpha)
    assert omega_star(m, x) >= m(x) * (1 - 1e-12)
    assert omega_sharp(m, x) >= omega_star(m, x) * (1 - 1e-12)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 0.95), x=st.floats(1e-3, 1e2), y=st.floats(1e-3, 1e2))
def test_power_subadditive(alpha, x, y):
    m = Modulus.power(alpha)
    assert m(x + y) <= m(x) + m(y) + 1e-12


def test_seminorm_of_square_root_on_interval():
    m = Modulus.power(0.5)
    est = lambda_seminorm(lambda t: np.sqrt(np.abs(t)), m, 1025, (-1.0, 1.0))
    # origin is a node; pair (0, x) attains the value 1
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert est.grid_size == 1025


def test_seminorm_constant_is_zero():
    est = lambda_seminorm(lambda z: np.ones_like(z), Modulus.power(0.5), 64, "circle")
    assert est.value == 0.0


def test_seminorm_nested_grids_monotone():
    m = Modulus.power(0.5, saturation=2.0)
    f = lambda z: np.abs(np.angle(z)) ** 0.5  # noqa: E731
    vals = [lambda_seminorm(f, m, n, "circle").value for n in (64, 128, 256, 512)]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_seminorm_identity_on_circle_is_one():
    # |zeta - eta| / omega(|zeta - eta|) with omega(x) = x
    m = Modulus.power(1.0, saturation=2.0)
    est = lambda_seminorm(lambda z: z, m, 128, "circle")
    assert est.value == pytest.approx(1.0, rel=1e-12)


def test_seminorm_points_plane():
    m = Modulus.power(0.5)
    g = np.linspace(-1, 1, 21)
    X, Y = np.meshgrid(g, g)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    vals = np.sqrt(np.hypot(pts[:, 0], pts[:, 1]))
    est = lambda_seminorm_points(vals, pts, m)
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_seminorm_cosine_against_linear_table():
    m = Modulus.table([(0, 0), (1, 1)])
    est = lambda_seminorm(lambda z: z + np.conj(z), m, 4096, "circle")
    assert est.value == pytest.approx(2.0, abs=1e-3)
