"""Littlewood-Paley pieces and de la Vallee Poussin smoothing on the circle.

The smooth bump ``w`` lives on ``[1/2, 2]`` and satisfies
``w(x) = 1 - w(x/2)`` on ``[1, 2]``, so its dyadic dilations form a partition
of unity on ``[1, inf)``.  On the circle the kernels are Fourier multipliers:

* ``W_n``  (n >= 1): ``k -> w(k / 2**n)``; ``W_0`` has coefficients 1 at
  ``k = -1, 0, 1``
* ``W_n#``: the reflection ``k -> w(-k / 2**n)``
* ``V_n``: ``k -> v(k / 2**n)`` with ``v = 1`` on ``[-1, 1]`` and
  ``v(x) = w(|x|)`` outside

and ``f_n = f*W_n + f*W_n#`` (``f_0 = f*W_0``).  With these conventions
``f*V_N = f_0 + ... + f_N`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .trig import TrigPolynomial

__all__ = [
    "gluing",
    "SmoothBump",
    "VProfile",
    "build_bump",
    "KernelMask",
    "MaskError",
    "mask",
    "Decomposition",
    "decompose",
    "vp_approx",
    "band",
    "partition_deviation",
]

KINDS = ("W", "Wsharp", "V")


class MaskError(ValueError):
    """Requested mask does not fit in the frequency range."""


def _psi(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def gluing(t) -> np.ndarray:
    """Smooth step ``theta`` on [0, 1] with ``theta(t) + theta(1 - t) = 1``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _psi(t), _psi(1.0 - t)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothBump:
    """The bump ``w``: ``theta(2x - 1)`` on [1/2, 1], ``1 - theta(x - 1)`` on [1, 2]."""

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        left = (x > 0.5) & (x <= 1.0)
        right = (x > 1.0) & (x < 2.0)
        out[left] = gluing(2.0 * x[left] - 1.0)
        out[right] = 1.0 - gluing(x[right] - 1.0)
        return out

    theta = staticmethod(gluing)


@dataclass(frozen=True)
class VProfile:
    """``v = 1`` on [-1, 1] and ``w(|x|)`` elsewhere."""

    bump: SmoothBump = SmoothBump()

    def __call__(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        return np.where(x <= 1.0, 1.0, self.bump(x))


def build_bump() -> SmoothBump:
    return SmoothBump()


_W = SmoothBump()
_V = VProfile(_W)


@dataclass(frozen=True)
class KernelMask:
    """Multiplier of one kernel sampled at ``k = -maxfreq .. maxfreq``."""

    level: int
    kind: str
    maxfreq: int
    values: np.ndarray

    def __getitem__(self, k: int) -> float:
        if abs(k) > self.maxfreq:
            return 0.0
        return float(self.values[k + self.maxfreq])

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.maxfreq, self.maxfreq + 1)

    def support(self) -> tuple[int, int]:
        nz = np.flatnonzero(self.values)
        if not len(nz):
            return (0, -1)
        return (int(nz[0] - self.maxfreq), int(nz[-1] - self.maxfreq))


def multiplier(level: int, kind: str, k) -> np.ndarray:
    """Multiplier values at integer frequencies ``k`` (no range checks)."""
    k = np.asarray(k, dtype=float)
    if kind == "V":
        return _V(k / 2.0**level)
    if kind not in ("W", "Wsharp"):
        raise MaskError(f"unknown kernel kind {kind!r}")
    if level == 0:
        return (np.abs(k) <= 1).astype(float)
    sign = 1.0 if kind == "W" else -1.0
    return _W(sign * k / 2.0**level)


@lru_cache(maxsize=256)
def _mask_values(level: int, kind: str, maxfreq: int) -> np.ndarray:
    vals = multiplier(level, kind, np.arange(-maxfreq, maxfreq + 1))
    vals.setflags(write=False)
    return vals


def mask(level: int, kind: str, maxfreq: int) -> KernelMask:
    """Kernel multiplier for ``W_n``, ``W_n#`` or ``V_n``.

    ``maxfreq`` must cover the support, i.e. be at least ``2**(level + 1)``
    (``1`` for ``W_0``/``W_0#``).  Masks are cached and read-only.
    """
    if level < 0:
        raise MaskError("levels on the circle start at 0")
    if kind not in KINDS:
        raise MaskError(f"unknown kernel kind {kind!r}")
    need = 1 if (level == 0 and kind != "V") else 2 ** (level + 1)
    if maxfreq < need:
        raise MaskError(f"maxfreq {maxfreq} truncates the level-{level} {kind} mask (needs {need})")
    return KernelMask(level, kind, int(maxfreq), _mask_values(int(level), kind, int(maxfreq)))


def band(f: TrigPolynomial, n: int) -> TrigPolynomial:
    """The Littlewood-Paley piece ``f_n``."""
    if n == 0:
        return f.multiply_coefficients(lambda k: multiplier(0, "W", k))
    return f.multiply_coefficients(lambda k: multiplier(n, "W", k) + multiplier(n, "Wsharp", k))


def vp_approx(f: TrigPolynomial, n: int) -> TrigPolynomial:
    """``f * V_n``."""
    if n < 0:
        raise MaskError("levels on the circle start at 0")
    return f.multiply_coefficients(lambda k: multiplier(n, "V", k))


@dataclass(frozen=True)
class Decomposition:
    levels: list
    tail: TrigPolynomial

    def reassemble(self) -> TrigPolynomial:
        total = self.tail
        for piece in self.levels:
            total = total + piece
        return total


def decompose(f: TrigPolynomial, N: int) -> Decomposition:
    """Split ``f`` into ``f_0, ..., f_N`` and the tail ``f - f*V_N``."""
    if N < 0:
        raise MaskError("N must be nonnegative")
    levels = [band(f, n) for n in range(N + 1)]
    tail = f - vp_approx(f, N)
    return Decomposition(levels, tail)


def partition_deviation(maxfreq: int) -> float:
    """``max |W_0(k) + sum_{n>=1} W_n(k) + W_n#(k) - 1|`` over ``1 <= |k| <= maxfreq``."""
    k = np.arange(-maxfreq, maxfreq + 1)
    total = multiplier(0, "W", k)
    n = 1
    while 2 ** (n - 1) <= maxfreq:
        total = total + multiplier(n, "W", k) + multiplier(n, "Wsharp", k)
        n += 1
    sel = k != 0
    return float(np.max(np.abs(total[sel] - 1.0)))
