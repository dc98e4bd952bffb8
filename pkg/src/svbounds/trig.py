"""Trigonometric polynomials on the circle, and the bridge to the real line."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

__all__ = [
    "TrigPolynomial",
    "LineWindow",
    "WindowError",
    "sup_norm",
    "periodize_line",
]

_EVAL_BLOCK = 1 << 22


class WindowError(ValueError):
    """A point lies outside the window on which a line function was periodized."""


@dataclass(frozen=True)
class LineWindow:
    """Affine identification of ``[center - L, center + L]`` with the circle.

    ``x`` corresponds to the angle ``pi * (x - center) / L``.  Points closer
    than ``guard`` to the window edge are refused.
    """

    center: float
    half_width: float
    guard: float = 0.0

    @property
    def scale(self) -> float:
        """Angular frequency of circle frequency 1, measured on the line."""
        return np.pi / self.half_width

    @property
    def level_shift(self) -> float:
        """Offset between dyadic levels on the line and on the circle.

        Circle frequency ``k`` is line frequency ``k * scale``, so line level
        ``n`` sits at circle level ``n - log2(scale)``.
        """
        return float(-np.log2(self.scale))

    def to_angle(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo = self.center - self.half_width + self.guard
        hi = self.center + self.half_width - self.guard
        tol = 1e-12 * max(1.0, abs(self.center) + self.half_width)
        if x.size and (x.min() < lo - tol or x.max() > hi + tol):
            raise WindowError(
                f"points in [{x.min():.6g}, {x.max():.6g}] fall outside window [{lo:.6g}, {hi:.6g}]"
            )
        return self.scale * (x - self.center)

    def contains(self, x) -> bool:
        try:
            self.to_angle(x)
        except WindowError:
            return False
        return True


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finitely supported Fourier coefficients ``k -> c_k``.

    Represents ``f(zeta) = sum_k c_k zeta**k`` on the unit circle.  When
    ``window`` is set the polynomial also stands for the line function
    ``x -> f(exp(i * window.to_angle(x)))``.

    Storage is sparse: sorted integer ``freqs`` and matching ``coefs``, with
    exact zeros dropped.
    """

    freqs: np.ndarray
    coefs: np.ndarray
    window: LineWindow | None = field(default=None)

    def __post_init__(self):
        k = np.asarray(self.freqs, dtype=np.int64).ravel()
        c = np.asarray(self.coefs, dtype=complex).ravel()
        if k.shape != c.shape:
            raise ValueError("freqs and coefs must have the same length")
        order = np.argsort(k, kind="stable")
        k, c = k[order], c[order]
        if len(k) and np.any(np.diff(k) == 0):
            raise ValueError("duplicate frequencies")
        keep = c != 0
        k, c = k[keep], c[keep]
        k.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "freqs", k)
        object.__setattr__(self, "coefs", c)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, complex], window: LineWindow | None = None):
        items = sorted(coeffs.items())
        return cls(np.array([k for k, _ in items], dtype=np.int64),
                   np.array([v for _, v in items], dtype=complex), window)

    @classmethod
    def from_dense(cls, dense: np.ndarray, window: LineWindow | None = None):
        """Coefficients ``dense[k + K]`` for ``k = -K..K``."""
        dense = np.asarray(dense, dtype=complex)
        K = (len(dense) - 1) // 2
        if len(dense) != 2 * K + 1:
            raise ValueError("dense coefficient array must have odd length")
        return cls(np.arange(-K, K + 1), dense, window)

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0):
        return cls(np.array([k]), np.array([c], dtype=complex))

    @classmethod
    def zero(cls, window: LineWindow | None = None):
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex), window)

    # -- inspection --------------------------------------------------------

    @property
    def degree(self) -> int:
        return int(np.abs(self.freqs).max()) if len(self.freqs) else 0

    def coefficient(self, k: int) -> complex:
        i = np.searchsorted(self.freqs, k)
        if i < len(self.freqs) and self.freqs[i] == k:
            return complex(self.coefs[i])
        return 0j

    __getitem__ = coefficient

    def dense(self, K: int | None = None) -> np.ndarray:
        K = self.degree if K is None else int(K)
        if self.degree > K:
            raise ValueError(f"degree {self.degree} exceeds requested half-width {K}")
        out = np.zeros(2 * K + 1, dtype=complex)
        out[self.freqs + K] = self.coefs
        return out

    def is_real(self, tol: float = 1e-13) -> bool:
        """Hermitian symmetry ``c_{-k} = conj(c_k)``, i.e. real-valued."""
        d = self.dense()
        scale = max(1.0, float(np.abs(d).max(initial=0.0)))
        return bool(np.all(np.abs(d - np.conj(d[::-1])) <= tol * scale))

    def is_analytic(self) -> bool:
        return not np.any(self.freqs < 0)

    def analytic_part(self) -> "TrigPolynomial":
        keep = self.freqs >= 0
        return TrigPolynomial(self.freqs[keep], self.coefs[keep], self.window)

    # -- arithmetic --------------------------------------------------------

    def _combine(self, other: "TrigPolynomial", sign: float) -> "TrigPolynomial":
        K = max(self.degree, other.degree)
        return TrigPolynomial.from_dense(self.dense(K) + sign * other.dense(K), self.window or other.window)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return TrigPolynomial(self.freqs, -self.coefs, self.window)

    def __mul__(self, scalar):
        return TrigPolynomial(self.freqs, self.coefs * scalar, self.window)

    __rmul__ = __mul__

    def with_window(self, window: LineWindow | None) -> "TrigPolynomial":
        return TrigPolynomial(self.freqs, self.coefs, window)

    def multiply_coefficients(self, multiplier: Callable[[np.ndarray], np.ndarray]) -> "TrigPolynomial":
        """Fourier multiplier: ``c_k -> c_k * multiplier(k)``."""
        return TrigPolynomial(self.freqs, self.coefs * multiplier(self.freqs), self.window)

    # -- evaluation --------------------------------------------------------

    def evaluate_angle(self, theta) -> np.ndarray:
        """``sum_k c_k exp(i k theta)``."""
        theta = np.asarray(theta, dtype=float)
        flat = theta.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        if len(self.freqs):
            step = max(1, _EVAL_BLOCK // len(self.freqs))
            for s in range(0, len(flat), step):
                ph = np.exp(1j * np.outer(flat[s : s + step], self.freqs))
                out[s : s + step] = ph @ self.coefs
        return out.reshape(theta.shape)

    def evaluate(self, zeta) -> np.ndarray:
        """Evaluate at points of the closed unit disk.

        Points on the circle go through their angles.  Interior points are
        allowed only for analytic polynomials.
        """
        zeta = np.asarray(zeta, dtype=complex)
        r = np.abs(zeta)
        if np.all(np.abs(r - 1.0) < 1e-12):
            return self.evaluate_angle(np.angle(zeta))
        if not self.is_analytic():
            raise ValueError("off-circle evaluation needs an analytic polynomial")
        flat = zeta.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        dense = np.zeros(self.degree + 1, dtype=complex)
        dense[self.freqs] = self.coefs
        for c in dense[::-1]:
            out = out * flat + c
        return out.reshape(zeta.shape)

    def evaluate_line(self, x) -> np.ndarray:
        if self.window is None:
            return self.evaluate_angle(x)
        return self.evaluate_angle(self.window.to_angle(x))

    def evaluate_roots(self, n: int) -> np.ndarray:
        """Values at ``exp(2 pi i j / n)``, ``j = 0..n-1``, by folding and an FFT."""
        folded = np.zeros(n, dtype=complex)
        np.add.at(folded, np.mod(self.freqs, n), self.coefs)
        return np.fft.ifft(folded) * n

    def __call__(self, zeta):
        return self.evaluate(zeta)

    # -- serialisation -----------------------------------------------------

    def to_json_list(self) -> list[list[float]]:
        return [[int(k), float(c.real), float(c.imag)] for k, c in zip(self.freqs, self.coefs)]

    @classmethod
    def from_json_list(cls, rows: Iterable[Iterable[float]], window: LineWindow | None = None):
        rows = [tuple(r) for r in rows]
        for r in rows:
            if len(r) != 3:
                raise ValueError("each coefficient row must be [k, re, im]")
        ks = np.array([int(r[0]) for r in rows], dtype=np.int64)
        cs = np.array([complex(r[1], r[2]) for r in rows], dtype=complex)
        return cls(ks, cs, window)

    def dumps(self) -> str:
        return json.dumps(self.to_json_list())

    @classmethod
    def loads(cls, text: str) -> "TrigPolynomial":
        return cls.from_json_list(json.loads(text))

    def __repr__(self) -> str:
        return f"TrigPolynomial(degree={self.degree}, terms={len(self.freqs)})"


def sup_norm(f: TrigPolynomial, oversample: int = 16) -> float:
    """Grid estimate of ``max |f|`` on the circle.

    Uses ``oversample * (2 * degree + 1)`` equispaced points.  The estimate
    never exceeds the true maximum and is within a relative
    ``O(1 / oversample**2)`` of it.
    """
    if oversample < 4:
        raise ValueError("oversample must be at least 4")
    if not len(f.freqs):
        return 0.0
    n = oversample * (2 * f.degree + 1)
    return float(np.abs(f.evaluate_roots(n)).max())


def periodize_line(
    f: Callable[[np.ndarray], np.ndarray],
    half_width: float,
    maxfreq: int,
    center: float = 0.0,
    guard: float = 0.0,
) -> TrigPolynomial:
    """Trigonometric interpolant of ``f`` on ``[center - L, center + L]``.

    The window is mapped onto the circle by ``x -> pi (x - center) / L`` and
    ``f`` is sampled at the ``2 * maxfreq + 1`` nodes
    ``theta_j = -pi + 2 pi j / (2 maxfreq + 1)``.  The returned polynomial has
    degree at most ``maxfreq``, reproduces ``f`` at every node (up to
    coefficients at roundoff level, which are dropped) and carries the
    window so that it can be evaluated on the line.
    """
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    n = 2 * int(maxfreq) + 1
    theta = -np.pi + 2.0 * np.pi * np.arange(n) / n
    window = LineWindow(float(center), float(half_width), float(guard))
    x = center + theta / window.scale
    vals = np.asarray(f(x), dtype=complex)
    spec = np.fft.fft(vals) / n
    k = np.arange(-maxfreq, maxfreq + 1)
    # exp(-i k theta_j) = (-1)^k exp(-2 pi i k j / n)
    coefs = spec[np.mod(k, n)] * np.where(k % 2 == 0, 1.0, -1.0)
    # drop FFT roundoff so exactly band-limited samples give sparse output
    floor = 2.0 * np.finfo(float).eps * float(np.abs(vals).max(initial=0.0))
    coefs = np.where(np.abs(coefs) <= floor, 0.0, coefs)
    return TrigPolynomial(k, coefs, window)
