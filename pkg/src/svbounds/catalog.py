"""Named test functions used by experiments and the command line.

Names follow a small call syntax, e.g. ``lacunary(power:0.5,3)``,
``power_abs(0.5)``, ``random_trig(16,7)``, ``monomial(3)``, ``identity``,
``sawtooth`` or ``analytic(random_trig(32,1))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extremal import build_g
from .modulus import Modulus
from .trig import TrigPolynomial

__all__ = ["CatalogError", "PowerAbs", "Identity", "function_catalog", "random_trig", "sawtooth", "parse_call"]


class CatalogError(KeyError):
    """Unknown or malformed catalog entry."""


@dataclass(frozen=True)
class PowerAbs:
    """``x -> |x|**alpha``; the periodized version is ``zeta -> |arg zeta|**alpha``."""

    alpha: float

    def __call__(self, x):
        return np.abs(np.asarray(x, dtype=float)) ** self.alpha


@dataclass(frozen=True)
class Identity:
    def __call__(self, x):
        return np.asarray(x, dtype=float)


def random_trig(degree: int, seed: int = 0) -> TrigPolynomial:
    """Real trigonometric polynomial with Gaussian coefficients."""
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / np.sqrt(2 * (degree + 1))
    c[0] = c[0].real
    dense = np.concatenate([np.conj(c[:0:-1]), c])
    return TrigPolynomial.from_dense(dense)


def sawtooth(K: int = 64) -> TrigPolynomial:
    """Fourier truncation of ``theta -> theta`` on ``(-pi, pi)``."""
    k = np.arange(-K, K + 1)
    c = np.zeros(2 * K + 1, dtype=complex)
    nz = k != 0
    c[nz] = 1j * np.where(k[nz] % 2 == 0, 1.0, -1.0) / k[nz]
    return TrigPolynomial.from_dense(c)


def parse_call(text: str) -> tuple[str, list[str]]:
    text = text.strip()
    if "(" not in text:
        return text, []
    if not text.endswith(")"):
        raise CatalogError(f"malformed catalog entry {text!r}")
    name, inner = text.split("(", 1)
    inner = inner[:-1]
    args, depth, cur = [], 0, ""
    for ch in inner:
        if ch == "," and depth == 0:
            args.append(cur.strip())
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        args.append(cur.strip())
    return name.strip(), args


def function_catalog(name: str):
    """Resolve a catalog entry to a TrigPolynomial or a scalar callable."""
    head, args = parse_call(name)
    try:
        if head == "lacunary":
            return build_g(Modulus.parse(args[0]), int(args[1])).poly
        if head == "power_abs":
            return PowerAbs(float(args[0]))
        if head == "sawtooth":
            return sawtooth(int(args[0])) if args else sawtooth()
        if head == "random_trig":
            return random_trig(int(args[0]), int(args[1]) if len(args) > 1 else 0)
        if head == "identity":
            return Identity()
        if head == "monomial":
            return TrigPolynomial.monomial(int(args[0]))
        if head == "analytic":
            inner = function_catalog(args[0])
            if not isinstance(inner, TrigPolynomial):
                raise CatalogError("analytic() needs a trigonometric polynomial")
            return inner.analytic_part()
    except (IndexError, ValueError) as exc:
        raise CatalogError(f"bad arguments for {name!r}: {exc}") from exc
    raise CatalogError(f"unknown catalog function {name!r}")
