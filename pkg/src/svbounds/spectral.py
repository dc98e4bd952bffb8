"""Matrix functional calculus, singular values and Schatten S_p^l norms.

Every function of a matrix goes through a full eigendecomposition: ``eigh``
for Hermitian matrices, a complex Schur form for unitary and normal ones, and
a generic linear combination for commuting Hermitian tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg as sla

from .trig import TrigPolynomial

__all__ = [
    "ClassError",
    "ParameterError",
    "AnalyticityError",
    "SingularSpectrum",
    "SchattenValue",
    "HermitianEig",
    "NormalEig",
    "TupleEig",
    "eig_selfadjoint",
    "eig_normal",
    "eig_tuple",
    "apply_selfadjoint",
    "apply_unitary",
    "apply_normal",
    "apply_tuple",
    "apply_contraction_poly",
    "singular_values",
    "schatten_pl",
    "schatten_curve",
    "op_norm",
    "check_selfadjoint",
    "check_unitary",
    "check_normal",
    "check_contraction",
    "check_commuting",
]

# calculus cross-checks
CALC_TOL = 1e-10


class ClassError(ValueError):
    """Matrix does not belong to the operator class an operation requires."""


class ParameterError(ValueError):
    """Invalid Schatten parameters."""


class AnalyticityError(ValueError):
    """Polynomial has nonzero negative-frequency coefficients."""


def op_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def _scale(M: np.ndarray) -> float:
    return max(1.0, op_norm(M))


def check_selfadjoint(A: np.ndarray, tol: float = 1e-12) -> float:
    dev = float(np.abs(A - A.conj().T).max(initial=0.0))
    if dev > tol * _scale(A):
        raise ClassError(f"matrix is not Hermitian (deviation {dev:.3g})")
    return dev


def check_unitary(U: np.ndarray, tol: float = 1e-12) -> float:
    eye = np.eye(U.shape[0])
    dev = float(np.abs(U.conj().T @ U - eye).max(initial=0.0))
    if dev > tol:
        raise ClassError(f"matrix is not unitary (deviation {dev:.3g})")
    return dev


def check_normal(N: np.ndarray, tol: float = 1e-10) -> float:
    dev = float(np.abs(N.conj().T @ N - N @ N.conj().T).max(initial=0.0))
    if dev > tol * _scale(N) ** 2:
        raise ClassError(f"matrix is not normal (deviation {dev:.3g})")
    return dev


def check_contraction(T: np.ndarray, tol: float = 1e-12) -> float:
    nrm = op_norm(T)
    if nrm > 1.0 + tol:
        raise ClassError(f"matrix is not a contraction (norm {nrm:.15g})")
    return nrm


def check_commuting(mats: Sequence[np.ndarray], tol: float = 1e-10) -> float:
    worst = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            X, Y = mats[i], mats[j]
            dev = float(np.abs(X @ Y - Y @ X).max(initial=0.0))
            worst = max(worst, dev)
            if dev > tol * _scale(X) * _scale(Y):
                raise ClassError(f"tuple members {i} and {j} do not commute (deviation {dev:.3g})")
    return worst


# -- eigendecompositions --------------------------------------------------


@dataclass(frozen=True)
class HermitianEig:
    values: np.ndarray
    vectors: np.ndarray

    def apply(self, fvals: np.ndarray, hermitian: bool | None = None) -> np.ndarray:
        Q = self.vectors
        out = (Q * fvals) @ Q.conj().T
        if hermitian is None:
            hermitian = not np.iscomplexobj(fvals) or np.all(np.imag(fvals) == 0)
        if hermitian:
            out = 0.5 * (out + out.conj().T)
        return out


@dataclass(frozen=True)
class NormalEig:
    values: np.ndarray
    vectors: np.ndarray

    def apply(self, fvals: np.ndarray) -> np.ndarray:
        Z = self.vectors
        return (Z * fvals) @ Z.conj().T


@dataclass(frozen=True)
class TupleEig:
    values: np.ndarray  # shape (dim, n): joint eigenvalues
    vectors: np.ndarray

    def apply(self, fvals: np.ndarray) -> np.ndarray:
        Q = self.vectors
        out = (Q * fvals) @ Q.conj().T
        if not np.iscomplexobj(fvals) or np.all(np.imag(fvals) == 0):
            out = 0.5 * (out + out.conj().T)
        return out


def eig_selfadjoint(A: np.ndarray, tol: float = 1e-12) -> HermitianEig:
    check_selfadjoint(A, tol)
    vals, vecs = np.linalg.eigh(0.5 * (A + A.conj().T))
    return HermitianEig(vals, vecs)


def eig_normal(N: np.ndarray, tol: float = 1e-10) -> NormalEig:
    check_normal(N, tol)
    T, Z = sla.schur(np.asarray(N, dtype=complex), output="complex")
    return NormalEig(np.diag(T).copy(), Z)


def eig_tuple(mats: Sequence[np.ndarray], tol: float = 1e-10) -> TupleEig:
    """Common eigenbasis of commuting Hermitian matrices.

    Diagonalises a fixed generic combination ``sum c_i A_i`` and reads the
    joint eigenvalues off the diagonals; the reconstruction is verified.
    """
    mats = [np.asarray(M) for M in mats]
    for M in mats:
        check_selfadjoint(M, 1e-12)
    check_commuting(mats, tol)
    weights = np.sqrt(np.array([2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0])[: len(mats)])
    if len(weights) < len(mats):
        weights = 1.0 + np.arange(len(mats)) * np.pi / 7
    combo = sum(c * M for c, M in zip(weights, mats))
    _, Q = np.linalg.eigh(0.5 * (combo + combo.conj().T))
    joint = np.column_stack([np.real(np.einsum("ij,ik,kj->j", Q.conj(), M, Q)) for M in mats])
    for i, M in enumerate(mats):
        rebuilt = (Q * joint[:, i]) @ Q.conj().T
        if np.abs(rebuilt - M).max(initial=0.0) > tol * _scale(M):
            raise ClassError("tuple is not simultaneously diagonalisable at tolerance")
    return TupleEig(joint, Q)


# -- functional calculus --------------------------------------------------

RealFunction = Union[Callable[[np.ndarray], np.ndarray], TrigPolynomial]


def _line_values(f: RealFunction, x: np.ndarray) -> np.ndarray:
    if isinstance(f, TrigPolynomial):
        return f.evaluate_line(x)
    return np.asarray(f(x))


def _circle_values(f, zeta: np.ndarray) -> np.ndarray:
    if isinstance(f, TrigPolynomial):
        return f.evaluate(zeta)
    return np.asarray(f(zeta))


def apply_selfadjoint(A: np.ndarray, f: RealFunction, eig: HermitianEig | None = None) -> np.ndarray:
    """``f(A) = Q f(Lambda) Q*`` for Hermitian ``A``.

    ``f`` is a callable on the real line or a TrigPolynomial, which is read
    through its line window (or as ``x -> p(exp(i x))`` without one).
    """
    eig = eig_selfadjoint(A) if eig is None else eig
    return eig.apply(_line_values(f, eig.values))


def apply_unitary(U: np.ndarray, f, eig: NormalEig | None = None) -> np.ndarray:
    """``sum_k c_k U**k`` through a Schur diagonalisation of ``U``.

    ``f`` is a TrigPolynomial or a callable of a unimodular complex argument.
    """
    if eig is None:
        check_unitary(U, CALC_TOL)
        eig = eig_normal(U)
    zeta = eig.values / np.abs(eig.values)
    return eig.apply(_circle_values(f, zeta))


def apply_normal(N: np.ndarray, f: Callable[[np.ndarray], np.ndarray], eig: NormalEig | None = None) -> np.ndarray:
    """``f(N)`` for normal ``N`` and ``f`` defined on the complex plane."""
    eig = eig_normal(N) if eig is None else eig
    return eig.apply(np.asarray(f(eig.values)))


def apply_tuple(mats: Sequence[np.ndarray], f: Callable[[np.ndarray], np.ndarray], eig: TupleEig | None = None) -> np.ndarray:
    """``f(A_1, ..., A_n)`` on the joint spectrum.

    ``f`` receives an array of shape ``(dim, n)`` whose rows are joint
    eigenvalues and returns one value per row.
    """
    eig = eig_tuple(mats) if eig is None else eig
    return eig.apply(np.asarray(f(eig.values)))


def _analytic_coefficients(coeffs) -> np.ndarray:
    if isinstance(coeffs, TrigPolynomial):
        if not coeffs.is_analytic():
            raise AnalyticityError("polynomial has negative frequencies")
        dense = np.zeros(coeffs.degree + 1, dtype=complex)
        dense[coeffs.freqs] = coeffs.coefs
        return dense
    return np.asarray(coeffs, dtype=complex)


def apply_contraction_poly(T: np.ndarray, coeffs, check: bool = True) -> np.ndarray:
    """Horner evaluation of ``sum_k c_k T**k`` for a contraction ``T``."""
    if check:
        check_contraction(T)
    c = _analytic_coefficients(coeffs)
    d = T.shape[0]
    eye = np.eye(d, dtype=complex)
    if not len(c):
        return np.zeros((d, d), dtype=complex)
    out = c[-1] * eye
    for ck in c[-2::-1]:
        out = out @ T + ck * eye
    return out


# -- singular values ------------------------------------------------------


@dataclass(frozen=True)
class SingularSpectrum:
    """Singular values ``s_0 >= s_1 >= ... >= 0``."""

    values: np.ndarray

    def __getitem__(self, j: int) -> float:
        return float(self.values[j]) if j < len(self.values) else 0.0

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class SchattenValue:
    p: float
    l: int
    value: float

    def __float__(self) -> float:
        return self.value


def singular_values(M: np.ndarray) -> SingularSpectrum:
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return SingularSpectrum(np.zeros(0))
    s = sla.svdvals(M)
    s.setflags(write=False)
    return SingularSpectrum(s)


def _check_p(p: float) -> None:
    if not np.isfinite(p):
        raise ParameterError("only finite p is supported")
    if p < 1:
        raise ParameterError(f"Schatten exponent must be >= 1, got {p}")


def schatten_pl(M, p: float, l: int) -> SchattenValue:
    """``(sum_{j <= l} s_j**p)**(1/p)``; ``l`` past the dimension clamps."""
    _check_p(p)
    if l < 0:
        raise ParameterError("l must be nonnegative")
    s = M.values if isinstance(M, SingularSpectrum) else singular_values(M).values
    head = s[: l + 1]
    if not len(head) or head[0] == 0:
        return SchattenValue(p, l, 0.0)
    # normalise by s_0 to stay clear of overflow for large p
    val = head[0] * float(np.sum((head / head[0]) ** p)) ** (1.0 / p)
    return SchattenValue(p, l, float(val))


def schatten_curve(s: np.ndarray, p: float) -> np.ndarray:
    """``[||.||_{S_p^l} for l = 0..len(s)-1]`` from a singular spectrum."""
    _check_p(p)
    s = np.asarray(s, dtype=float)
    if not len(s) or s[0] == 0:
        return np.zeros(len(s))
    return s[0] * np.cumsum((s / s[0]) ** p) ** (1.0 / p)
