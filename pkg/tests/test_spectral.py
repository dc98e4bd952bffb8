import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svbounds import spectral
from svbounds.ensembles import haar_unitary
from svbounds.spectral import (
    AnalyticityError,
    ClassError,
    ParameterError,
    apply_contraction_poly,
    apply_normal,
    apply_selfadjoint,
    apply_tuple,
    apply_unitary,
    schatten_curve,
    schatten_pl,
    singular_values,
)
from svbounds.trig import TrigPolynomial


def _hermitian(rng, d):
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (X + X.conj().T)


def test_selfadjoint_polynomial_matches_matrix_power():
    rng = np.random.default_rng(0)
    A = _hermitian(rng, 6)
    F = apply_selfadjoint(A, lambda x: x**3 - 2 * x)
    assert np.allclose(F, A @ A @ A - 2 * A, atol=1e-10)


def test_selfadjoint_rejects_non_hermitian():
    with pytest.raises(ClassError):
        apply_selfadjoint(np.array([[0, 1], [0, 0]], dtype=float), np.abs)


def test_unitary_calculus_matches_powers():
    rng = np.random.default_rng(1)
    U = haar_unitary(8, rng)
    f = TrigPolynomial.from_mapping({-1: 0.5, 0: 1.0, 2: 2j})
    F = apply_unitary(U, f)
    expected = 0.5 * U.conj().T + np.eye(8) + 2j * U @ U
    assert np.allclose(F, expected, atol=1e-10)


def test_unitary_rejects_non_unitary():
    with pytest.raises(ClassError):
        apply_unitary(2 * np.eye(3), TrigPolynomial.monomial(1))


def test_normal_calculus():
    rng = np.random.default_rng(2)
    Q = haar_unitary(5, rng)
    lam = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    N = (Q * lam) @ Q.conj().T
    F = apply_normal(N, lambda z: z * np.conj(z))
    assert np.allclose(F, N @ N.conj().T, atol=1e-10)


def test_normal_rejects_non_normal():
    with pytest.raises(ClassError):
        apply_normal(np.array([[1.0, 1.0], [0.0, 1.0]]), np.abs)


def test_tuple_calculus_product():
    rng = np.random.default_rng(3)
    Q = haar_unitary(6, rng)
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    A = (Q * a) @ Q.conj().T
    B = (Q * b) @ Q.conj().T
    F = apply_tuple([A, B], lambda x: x[:, 0] * x[:, 1])
    assert np.allclose(F, A @ B, atol=1e-10)


def test_tuple_rejects_noncommuting():
    rng = np.random.default_rng(4)
    with pytest.raises(ClassError):
        apply_tuple([_hermitian(rng, 4), _hermitian(rng, 4)], lambda x: x[:, 0])


def test_contraction_horner():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((5, 5))
    T = X / np.linalg.norm(X, 2)
    F = apply_contraction_poly(T, [1.0, -2.0, 0.5])
    assert np.allclose(F, np.eye(5) - 2 * T + 0.5 * T @ T, atol=1e-12)
    with pytest.raises(AnalyticityError):
        apply_contraction_poly(T, TrigPolynomial.from_mapping({-1: 1.0}))
    with pytest.raises(ClassError):
        apply_contraction_poly(2 * T, [1.0])


def test_singular_spectrum_padding():
    s = singular_values(np.diag([3.0, 1.0]))
    assert s[0] == 3.0 and s[1] == 1.0 and s[5] == 0.0


def test_schatten_examples():
    M = np.diag([3.0, 4.0])
    assert schatten_pl(M, 2, 1).value == pytest.approx(5.0)
    assert schatten_pl(M, 1, 0).value == pytest.approx(4.0)
    assert schatten_pl(M, 2, 10).value == pytest.approx(5.0)
    with pytest.raises(ParameterError):
        schatten_pl(M, 0.5, 1)
    with pytest.raises(ParameterError):
        schatten_pl(M, np.inf, 1)


def test_schatten_large_p_no_overflow():
    M = np.diag([1e200, 1e199])
    assert np.isfinite(schatten_pl(M, 8, 1).value)


def test_curve_matches_pointwise():
    rng = np.random.default_rng(6)
    M = rng.standard_normal((7, 7))
    s = singular_values(M).values
    c = schatten_curve(s, 3.0)
    for l in range(7):
        assert c[l] == pytest.approx(schatten_pl(M, 3.0, l).value, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 24), p=st.sampled_from([1.0, 2.0, 4.0, 3.5]))
def test_main_singular_value_inequality(seed, d, p):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    s = singular_values(M)
    for l in range(d):
        norm = schatten_pl(s, p, l).value
        for j in range(l + 1):
            assert s[j] <= (1 + j) ** (-1 / p) * norm * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 16))
def test_unitary_invariance(seed, d):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((d, d))
    U, V = haar_unitary(d, rng), haar_unitary(d, rng)
    assert np.allclose(singular_values(U @ M @ V).values, singular_values(M).values, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(2, 16), p=st.sampled_from([1.0, 2.0, 4.0]))
def test_norm_monotone_in_l(seed, d, p):
    rng = np.random.default_rng(seed)
    c = schatten_curve(singular_values(rng.standard_normal((d, d))).values, p)
    assert np.all(np.diff(c) >= -1e-15)


def test_check_helpers_return_deviation():
    assert spectral.check_selfadjoint(np.eye(3)) == 0.0
    assert spectral.check_unitary(np.eye(3)) == 0.0
    assert spectral.check_contraction(np.eye(3)) == pytest.approx(1.0)
    assert spectral.op_norm(np.zeros((0, 0))) == 0.0
