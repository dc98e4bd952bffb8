"""Moduli of continuity and the integral transforms built from them.

A modulus ``omega`` is a nondecreasing, subadditive, continuous function on
``[0, inf)`` with ``omega(0) = 0``.  Two kinds are supported: powers
``t**alpha`` and concave piecewise-linear tables.  Either may be saturated at
a cutoff ``s`` beyond which it is constant.

The transforms are

    omega_star(x)  = x * int_x^inf omega(t) / t**2 dt
    omega_sharp(x) = omega_star(x) + int_0^x omega(t) / t dt

Both are computed in closed form for powers and by adaptive quadrature
otherwise.  Quadrature runs in logarithmic variables, ``t = x * exp(u)``,
which turns the tail into ``int_0^inf omega(x e^u) e^-u du`` and the head into
``int_-inf^0 omega(x e^u) du``; both integrands are smooth on each segment
between breakpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

__all__ = [
    "Modulus",
    "ModulusError",
    "DivergenceError",
    "SeminormEstimate",
    "Violation",
    "eval_omega",
    "omega_star",
    "omega_sharp",
    "lambda_seminorm",
    "lambda_seminorm_points",
    "check_modulus",
    "CIRCLE_SATURATION",
]

# Circle experiments treat omega as constant past the diameter of the circle.
CIRCLE_SATURATION = 2.0

_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-12, limit=200)


class ModulusError(ValueError):
    """Invalid modulus parameters or a domain violation."""


class DivergenceError(ArithmeticError):
    """An integral defining omega_star or omega_sharp does not converge."""


@dataclass(frozen=True)
class Modulus:
    """A modulus of continuity.

    Use the :meth:`power` and :meth:`table` constructors rather than the
    dataclass initialiser.  Instances are callable and vectorised:
    ``m(np.array([...]))`` evaluates ``omega`` elementwise.
    """

    kind: str
    alpha: float | None = None
    points: tuple[tuple[float, float], ...] | None = None
    saturation: float | None = None

    @classmethod
    def power(cls, alpha: float, saturation: float | None = None) -> "Modulus":
        if not 0.0 < alpha <= 1.0:
            raise ModulusError(f"power modulus needs 0 < alpha <= 1, got {alpha}")
        if saturation is not None and saturation <= 0:
            raise ModulusError("saturation must be positive")
        return cls("power", alpha=float(alpha), saturation=_opt_float(saturation))

    @classmethod
    def table(
        cls,
        points: Sequence[Sequence[float]],
        saturation: float | None = None,
        require_concave: bool = True,
    ) -> "Modulus":
        """Piecewise-linear modulus through ``points``.

        The first point must be ``(0, 0)``.  Past the last breakpoint the last
        segment is extended linearly (so a nonzero final slope diverges in
        ``omega_star`` unless a saturation is given).  Non-concave tables are
        rejected unless ``require_concave`` is False, which exists so that
        :func:`check_modulus` can be pointed at broken inputs.
        """
        pts = tuple((float(x), float(y)) for x, y in points)
        if len(pts) < 2:
            raise ModulusError("table modulus needs at least two points")
        if pts[0] != (0.0, 0.0):
            raise ModulusError("table modulus must start at (0, 0)")
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        if np.any(np.diff(xs) <= 0):
            raise ModulusError("table breakpoints must be strictly increasing")
        if np.any(np.diff(ys) < 0):
            raise ModulusError("table values must be nondecreasing")
        if ys[1] <= 0:
            raise ModulusError("modulus must be positive away from 0")
        if require_concave:
            slopes = np.diff(ys) / np.diff(xs)
            if np.any(np.diff(slopes) > 1e-12 * max(1.0, slopes.max())):
                raise ModulusError("table modulus is not concave")
        if saturation is not None and saturation <= 0:
            raise ModulusError("saturation must be positive")
        return cls("table", points=pts, saturation=_opt_float(saturation))

    @classmethod
    def from_dict(cls, data: dict) -> "Modulus":
        kind = data.get("kind")
        if kind == "power":
            return cls.power(data["alpha"], data.get("saturation"))
        if kind == "table":
            return cls.table(data["points"], data.get("saturation"))
        raise ModulusError(f"unknown modulus kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Modulus":
        """Parse ``power:ALPHA[:SATURATION]`` or a JSON object."""
        text = text.strip()
        if text.startswith("{"):
            import json

            return cls.from_dict(json.loads(text))
        parts = text.split(":")
        if parts[0] != "power" or len(parts) not in (2, 3):
            raise ModulusError(f"cannot parse modulus descriptor {text!r}")
        sat = float(parts[2]) if len(parts) == 3 else None
        return cls.power(float(parts[1]), sat)

    def to_dict(self) -> dict:
        if self.kind == "power":
            out = {"kind": "power", "alpha": self.alpha}
        else:
            out = {"kind": "table", "points": [list(p) for p in self.points]}
        if self.saturation is not None:
            out["saturation"] = self.saturation
        return out

    def with_saturation(self, saturation: float | None) -> "Modulus":
        if self.kind == "power":
            return Modulus.power(self.alpha, saturation)
        return Modulus.table(self.points, saturation, require_concave=False)

    def describe(self) -> str:
        if self.kind == "power":
            base = f"power:{self.alpha:g}"
        else:
            base = "table:" + ";".join(f"{x:g},{y:g}" for x, y in self.points)
        return base if self.saturation is None else f"{base}:{self.saturation:g}"

    # -- evaluation ---------------------------------------------------------

    def _raw(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            return np.power(t, self.alpha)
        xs, ys = self._breakpoints
        out = np.interp(t, xs, ys)
        beyond = t > xs[-1]
        if np.any(beyond):
            out = np.where(beyond, ys[-1] + self._last_slope * (t - xs[-1]), out)
        return out

    def __call__(self, x):
        t = np.asarray(x, dtype=float)
        if np.any(t < 0):
            raise ModulusError("modulus evaluated at a negative argument")
        if self.saturation is not None:
            t = np.minimum(t, self.saturation)
        out = self._raw(t)
        return float(out) if out.ndim == 0 else out

    def scalar(self, t: float) -> float:
        """Scalar evaluation without numpy overhead (used inside quadrature)."""
        if self.saturation is not None and t > self.saturation:
            t = self.saturation
        if self.kind == "power":
            return t**self.alpha
        pts = self.points
        if t >= pts[-1][0]:
            return pts[-1][1] + self._last_slope * (t - pts[-1][0])
        lo, hi = 0, len(pts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if pts[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        (x0, y0), (x1, y1) = pts[lo], pts[hi]
        return y0 + (y1 - y0) * (t - x0) / (x1 - x0)

    @property
    def _breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p[0] for p in self.points]), np.array([p[1] for p in self.points]))

    @property
    def _last_slope(self) -> float:
        (x0, y0), (x1, y1) = self.points[-2], self.points[-1]
        return (y1 - y0) / (x1 - x0)

    @property
    def tail_converges(self) -> bool:
        if self.saturation is not None:
            return True
        if self.kind == "power":
            return self.alpha < 1.0
        return self._last_slope == 0.0

    def knots(self) -> list[float]:
        """Points where the modulus fails to be smooth (excluding 0)."""
        ks = [] if self.kind == "power" else [p[0] for p in self.points[1:]]
        if self.saturation is not None:
            ks = [k for k in ks if k < self.saturation] + [self.saturation]
        return ks


def _opt_float(v):
    return None if v is None else float(v)


def eval_omega(m: Modulus, x):
    """Evaluate ``omega(x)``; negative ``x`` raises :class:`ModulusError`."""
    return m(x)


# -- transforms -----------------------------------------------------------


def _quad(func, a, b) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(func, a, b, **_QUAD_OPTS)
        except integrate.IntegrationWarning as exc:
            raise DivergenceError(f"quadrature failed on [{a}, {b}]: {exc}") from exc
    return val


def _star_integrand(m: Modulus, x: float):
    def g(u: float) -> float:
        # past u = 700 the weight e^-u underflows; omega grows at most linearly
        if u > 700.0:
            return 0.0
        return m.scalar(x * math.exp(u)) * math.exp(-u)

    return g


def _star_quad(m: Modulus, x: float) -> float:
    # omega_star(x) = int_0^inf omega(x e^u) e^-u du, split at knots above x.
    g = _star_integrand(m, x)
    cuts = [0.0] + [math.log(k / x) for k in m.knots() if k > x]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += _quad(g, a, b)
    last = cuts[-1]
    t_last = x * math.exp(last)
    if m.saturation is not None and t_last >= m.saturation * (1 - 1e-15):
        total += m.scalar(m.saturation) * math.exp(-last)
    else:
        total += _quad(g, last, np.inf)
    return total


def _star_closed(m: Modulus, x: float) -> float:
    a, s = m.alpha, m.saturation
    if s is None:
        return x**a / (1.0 - a)
    if a == 1.0:
        return x * math.log(s / x) + x
    return (x**a - x * s ** (a - 1.0)) / (1.0 - a) + x * s ** (a - 1.0)


def omega_star(m: Modulus, x, method: str = "auto"):
    """``x * int_x^inf omega(t)/t^2 dt``.

    ``method`` is ``"auto"`` (closed form for powers), ``"quad"`` (force
    quadrature) or ``"closed"``.  Raises :class:`DivergenceError` when the
    tail integral diverges.
    """
    if not m.tail_converges:
        raise DivergenceError(f"omega_star diverges for unsaturated {m.describe()}")
    return _vectorise(lambda t: _star_scalar(m, t, method), x)


def _star_scalar(m: Modulus, x: float, method: str) -> float:
    if x <= 0:
        raise ModulusError("omega_star needs x > 0")
    if m.saturation is not None and x >= m.saturation:
        return float(m(m.saturation))
    if method == "closed" or (method == "auto" and m.kind == "power"):
        if m.kind != "power":
            raise ModulusError("closed form exists only for power moduli")
        return _star_closed(m, x)
    return _star_quad(m, x)


def _head_quad(m: Modulus, x: float) -> float:
    # int_0^x omega(t)/t dt = int_-inf^0 omega(x e^u) du, split at knots below x.
    cuts = [math.log(k / x) for k in m.knots() if k < x] + [0.0]
    def g(u: float) -> float:
        return m.scalar(x * math.exp(u)) if u > -700.0 else 0.0

    total = _quad(g, -np.inf, cuts[0])
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += _quad(g, a, b)
    return total


def _head_closed(m: Modulus, x: float) -> float:
    a, s = m.alpha, m.saturation
    if s is None or x <= s:
        return x**a / a
    return s**a / a + s**a * math.log(x / s)


def omega_sharp(m: Modulus, x, method: str = "auto"):
    """``omega_star(x) + int_0^x omega(t)/t dt``."""
    if not m.tail_converges:
        raise DivergenceError(f"omega_sharp diverges for unsaturated {m.describe()}")

    def one(t: float) -> float:
        if t <= 0:
            raise ModulusError("omega_sharp needs x > 0")
        use_closed = method == "closed" or (method == "auto" and m.kind == "power")
        head = _head_closed(m, t) if use_closed else _head_quad(m, t)
        if not math.isfinite(head):
            raise DivergenceError("head integral of omega_sharp diverges")
        return _star_scalar(m, t, method) + head

    return _vectorise(one, x)


def _vectorise(fn: Callable[[float], float], x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


# -- seminorm estimates ---------------------------------------------------


@dataclass(frozen=True)
class SeminormEstimate:
    """Grid lower estimate of ``sup |f(x)-f(y)| / omega(|x-y|)``."""

    value: float
    grid_size: int
    domain: Union[str, tuple]

    def __float__(self) -> float:
        return self.value


OmegaLike = Union[Modulus, Callable[[np.ndarray], np.ndarray]]


def _omega_values(m: OmegaLike, dist: np.ndarray) -> np.ndarray:
    return np.asarray(m(dist), dtype=float)


def lambda_seminorm(
    f,
    m: OmegaLike,
    grid_size: int,
    domain: Union[str, tuple] = "circle",
) -> SeminormEstimate:
    """Estimate the Lambda_omega seminorm of ``f`` over a uniform grid.

    On ``"circle"`` the grid is ``grid_size`` roots of unity, distances are
    chordal (``|zeta - eta|``) and ``f`` is a TrigPolynomial or a callable of a
    complex argument.  On an interval ``(a, b)`` the grid is
    ``linspace(a, b, grid_size)`` and ``f`` is a callable of a real argument.

    The result is a lower estimate of the true seminorm.  Circle grids of
    size ``n`` and ``2n`` are nested, as are interval grids of size
    ``n`` and ``2n - 1``, and the estimate is nondecreasing along such chains.
    """
    if grid_size < 2:
        raise ModulusError("grid_size must be at least 2")
    n = int(grid_size)
    if domain == "circle":
        zeta = np.exp(2j * np.pi * np.arange(n) / n)
        vals = f(zeta) if callable(f) else f.evaluate(zeta)
        vals = np.asarray(vals)
        offsets = np.arange(1, n // 2 + 1)
        dists = 2.0 * np.sin(np.pi * offsets / n)
        best = 0.0
        om = _omega_values(m, dists)
        for d, w in zip(offsets, om):
            diff = np.max(np.abs(vals - np.roll(vals, d)))
            if diff > 0:
                best = max(best, diff / w)
        return SeminormEstimate(float(best), n, "circle")
    a, b = domain
    xs = np.linspace(a, b, n)
    vals = np.asarray(f(xs))
    h = (b - a) / (n - 1)
    om = _omega_values(m, h * np.arange(1, n))
    best = 0.0
    for d in range(1, n):
        diff = np.max(np.abs(vals[d:] - vals[:-d]))
        if diff > 0:
            best = max(best, diff / om[d - 1])
    return SeminormEstimate(float(best), n, (float(a), float(b)))


def lambda_seminorm_points(values, points, m: OmegaLike, chunk: int = 512) -> SeminormEstimate:
    """Seminorm estimate over an arbitrary point cloud in R^n.

    ``points`` has shape ``(N, n)`` (or ``(N,)`` for complex points, read as
    R^2); distances are Euclidean.
    """
    vals = np.asarray(values)
    pts = np.asarray(points)
    if np.iscomplexobj(pts):
        pts = np.column_stack([pts.real, pts.imag])
    if pts.ndim == 1:
        pts = pts[:, None]
    best = 0.0
    for start in range(0, len(pts), chunk):
        block = pts[start : start + chunk]
        dist = np.sqrt(((block[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        diff = np.abs(vals[start : start + chunk, None] - vals[None, :])
        mask = dist > 0
        if not np.any(mask):
            continue
        ratio = diff[mask] / _omega_values(m, dist[mask])
        best = max(best, float(ratio.max()))
    return SeminormEstimate(best, len(pts), "points")


# -- validation -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    x: float
    y: float
    lhs: float
    rhs: float


def check_modulus(m: Modulus, samples: int = 2000, seed=0, tol: float = 1e-12) -> list[Violation]:
    """Randomised monotonicity / subadditivity check.

    Returns an empty list when no violation is found.  Samples are drawn
    log-uniformly over a range that covers the knots of ``m``; for tables the
    breakpoint pairs are always included.
    """
    rng = np.random.default_rng(seed)
    knots = m.knots() or [1.0]
    lo, hi = min(knots) * 1e-3, max(knots) * 10.0
    xs = np.exp(rng.uniform(math.log(lo), math.log(hi), samples))
    ys = np.exp(rng.uniform(math.log(lo), math.log(hi), samples))
    if m.kind == "table":
        bx = np.array([p[0] for p in m.points[1:]])
        gx, gy = np.meshgrid(bx, bx)
        xs = np.concatenate([xs, gx.ravel()])
        ys = np.concatenate([ys, gy.ravel()])
    out: list[Violation] = []
    if m(0.0) != 0.0:
        out.append(Violation("zero", 0.0, 0.0, m(0.0), 0.0))
    wx, wy, wxy = m(xs), m(ys), m(xs + ys)
    for i in np.flatnonzero(wx <= 0):
        out.append(Violation("positivity", xs[i], xs[i], wx[i], 0.0))
    lo_x, hi_x = np.minimum(xs, ys), np.maximum(xs, ys)
    w_lo, w_hi = m(lo_x), m(hi_x)
    for i in np.flatnonzero(w_lo > w_hi + tol * np.abs(w_hi)):
        out.append(Violation("monotonicity", lo_x[i], hi_x[i], w_lo[i], w_hi[i]))
    rhs = wx + wy
    for i in np.flatnonzero(wxy > rhs + tol * rhs):
        out.append(Violation("subadditivity", xs[i], ys[i], wxy[i], rhs[i]))
    return out
