"""Empirical constants for singular-value perturbation bounds.

For a pair ``(A, B)`` and a function ``f`` in ``Lambda_omega`` the measured
quantity is

    ratio_j = s_j(f(A) - f(B)) / (omega_star((1+j)^(-1/p) ||A-B||_{S_p^l}) * ||f||)

where ``||f||`` is a grid lower estimate of the ``Lambda_omega`` seminorm.
A bounded ratio across ensembles and dimensions is the numerical face of the
existence of a universal constant.  The module also reproduces the splitting
``f(A) - f(B) = R_N + Q_N`` into a low-frequency part, controlled in
``S_p^l``, and a high-frequency remainder, controlled in operator norm.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import spectral
from .catalog import PowerAbs
from .ensembles import CLASSES, OperatorPair, random_pair, trial_rng
from .lpdecomp import band, vp_approx
from .modulus import (
    CIRCLE_SATURATION,
    Modulus,
    SeminormEstimate,
    lambda_seminorm,
    lambda_seminorm_points,
    omega_star,
)
from .spectral import schatten_curve, schatten_pl, singular_values
from .trig import TrigPolynomial, periodize_line, sup_norm

__all__ = [
    "DegenerateInput",
    "WitnessError",
    "choose_N",
    "PairCalculus",
    "SplitResult",
    "split",
    "split_auto",
    "periodize_for_pair",
    "lift",
    "circle_modulus",
    "seminorm_for",
    "upper_ratio",
    "bernstein_ratio",
    "multivar_ratio",
    "WitnessRecord",
    "converse_witness",
    "random_witnesses",
    "trial_pair",
    "SweepConfig",
    "BernsteinConfig",
    "TableReport",
    "BoundReport",
    "sweep",
    "bernstein_sweep",
    "UPPER_COLUMNS",
    "BERNSTEIN_COLUMNS",
]

SPLIT_TOL = 1e-10
UNITARY_BRANCH = 2.0
UPPER_COLUMNS = ("trial", "j", "p", "l", "dim", "s_j", "delta_pl", "omega_star_arg", "ratio")
BERNSTEIN_COLUMNS = ("trial", "degree", "p", "l", "dim", "norm_diff", "delta_pl", "sup_norm", "ratio")


class DegenerateInput(ValueError):
    """The inputs make the requested quantity meaningless (e.g. ``A = B``)."""


class WitnessError(AssertionError):
    """A converse witness failed one of its defining equalities."""


def choose_N(j: int, p: float, delta: float) -> int:
    """Smallest integer ``N`` with ``1 <= (1+j)^(-1/p) 2^N delta <= 2``.

    ``N`` may be negative (large ``delta``).  ``delta = 0`` is degenerate.
    """
    if delta <= 0:
        raise DegenerateInput("delta = 0: A = B and the bound is trivially 0")
    x = (1.0 + j) ** (-1.0 / p) * delta
    N = math.ceil(-math.log2(x))
    while x * 2.0**N < 1.0:
        N += 1
    while x * 2.0 ** (N - 1) >= 1.0:
        N -= 1
    return int(N)


# -- functional calculus on a pair ----------------------------------------


class PairCalculus:
    """Eigendecompositions of both members of a pair, computed once."""

    def __init__(self, pair: OperatorPair):
        self.pair = pair
        kind = pair.kind
        if kind == "selfadjoint":
            self.eA, self.eB = spectral.eig_selfadjoint(pair.A), spectral.eig_selfadjoint(pair.B)
        elif kind in ("unitary", "normal"):
            if kind == "unitary":
                spectral.check_unitary(pair.A, spectral.CALC_TOL)
                spectral.check_unitary(pair.B, spectral.CALC_TOL)
            self.eA, self.eB = spectral.eig_normal(pair.A), spectral.eig_normal(pair.B)
        elif kind == "tuple":
            self.eA, self.eB = spectral.eig_tuple(pair.A), spectral.eig_tuple(pair.B)
        elif kind == "contraction":
            spectral.check_contraction(pair.A)
            spectral.check_contraction(pair.B)
            self.eA = self.eB = None
        else:
            raise spectral.ClassError(f"unsupported class {kind!r}")

    def spectra(self) -> np.ndarray:
        if self.eA is None:
            raise spectral.ClassError("contractions have no spectral decomposition here")
        return np.concatenate([np.asarray(self.eA.values), np.asarray(self.eB.values)])

    def function_of(self, f, which: str) -> np.ndarray:
        kind = self.pair.kind
        if kind == "contraction":
            return spectral.apply_contraction_poly(self.pair.A if which == "A" else self.pair.B, f, check=False)
        eig = self.eA if which == "A" else self.eB
        if kind == "selfadjoint":
            return spectral.apply_selfadjoint(None, f, eig=eig)
        if kind == "unitary":
            return spectral.apply_unitary(None, f, eig=eig)
        if kind == "normal":
            return spectral.apply_normal(None, f, eig=eig)
        return spectral.apply_tuple(None, f, eig=eig)

    def diff(self, f) -> np.ndarray:
        return self.function_of(f, "A") - self.function_of(f, "B")


def circle_modulus(m: Modulus) -> Modulus:
    """Circle experiments saturate omega at 2 unless told otherwise."""
    return m if m.saturation is not None else m.with_saturation(CIRCLE_SATURATION)


def lift(f, kind: str, maxdeg: int = 32):
    """Adapt a catalog function to the argument type of an operator class.

    * selfadjoint: callables are used as is; polynomials through their window
    * unitary: callables become ``zeta -> f(arg zeta)``
    * normal / tuple: callables become radial, ``f(|z|)`` / ``f(||x||)``
    * contraction: the analytic part of a polynomial; callables are first
      interpolated on the circle at degree ``maxdeg``
    """
    if kind == "selfadjoint":
        return f
    if kind == "unitary":
        if isinstance(f, TrigPolynomial):
            return f
        return lambda z: np.asarray(f(np.angle(z)), dtype=complex)
    if kind == "normal":
        if isinstance(f, TrigPolynomial):
            return lambda z: f.evaluate(z / np.abs(z)) if np.all(np.abs(z) > 0) else f.evaluate(z)
        return lambda z: np.asarray(f(np.abs(z)))
    if kind == "tuple":
        return lambda x: np.asarray(f(np.linalg.norm(np.atleast_2d(x), axis=1)))
    if kind == "contraction":
        if not isinstance(f, TrigPolynomial):
            f = periodize_line(f, np.pi, maxdeg).with_window(None)
        return f.analytic_part()
    raise spectral.ClassError(f"unsupported class {kind!r}")


def _grid_domain(pair: OperatorPair, calc: PairCalculus) -> tuple[float, float]:
    """Symmetric interval ``[-R, R]`` covering both spectra.

    With an odd grid size the origin is a node, which catalog functions
    with a cusp at 0 need for a sharp estimate.
    """
    spec = np.real(calc.spectra())
    R = float(np.abs(spec).max())
    return (-R, R) if R > 1e-12 else (-0.5, 0.5)


def seminorm_for(f, modulus: Modulus, pair: OperatorPair, grid_size: int = 1025, calc: PairCalculus | None = None) -> SeminormEstimate:
    """Grid estimate of ``||f||_{Lambda_omega}`` on the region the pair sees.

    ``f`` must already be lifted to the class (see :func:`lift`).
    """
    kind = pair.kind
    if kind in ("unitary", "contraction"):
        return lambda_seminorm(f, circle_modulus(modulus), grid_size, "circle")
    calc = calc or PairCalculus(pair)
    if kind == "selfadjoint":
        g = f.evaluate_line if isinstance(f, TrigPolynomial) else f
        return lambda_seminorm(g, modulus, grid_size, _grid_domain(pair, calc))
    spec = calc.spectra()
    if kind == "normal":
        pts = np.column_stack([spec.real, spec.imag])
    else:
        pts = np.real(spec)
    n = pts.shape[1]
    # odd count on a symmetric box keeps the origin on the grid
    per_axis = max(3, int(round(grid_size ** (1.0 / n)))) | 1
    R = max(float(np.abs(pts).max()), 1e-12)
    axes = [np.linspace(-R, R, per_axis) for _ in range(n)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    if kind == "normal":
        vals = np.asarray(f(mesh[:, 0] + 1j * mesh[:, 1]))
    else:
        vals = np.asarray(f(mesh))
    est = lambda_seminorm_points(vals, mesh, modulus)
    return SeminormEstimate(est.value, len(mesh), "grid")


# -- the R_N / Q_N split ---------------------------------------------------


@dataclass
class SplitResult:
    N: int
    R: np.ndarray
    Q: np.ndarray
    norm_R: float  # ||R_N||_{S_p^l}
    norm_Q: float  # operator norm
    p: float
    l: int
    level_norms: list = field(default_factory=list)

    def total(self) -> np.ndarray:
        return self.R + self.Q


def split(f: TrigPolynomial, pair: OperatorPair, N: int, p: float, l: int, calc: PairCalculus | None = None) -> SplitResult:
    """``R_N = sum_{n<=N} (f_n(A) - f_n(B))`` and ``Q_N = (f - f*V_N)(A) - (f - f*V_N)(B)``.

    Self-adjoint pairs need ``f`` periodized on a window containing both
    spectra (see :func:`periodize_for_pair`); ``N`` is a circle level.
    """
    if pair.kind not in ("selfadjoint", "unitary"):
        raise spectral.ClassError(f"split is defined for selfadjoint and unitary pairs, not {pair.kind!r}")
    if N < 0:
        raise ValueError("circle levels start at 0")
    calc = calc or PairCalculus(pair)
    d = pair.dim
    R = np.zeros((d, d), dtype=complex)
    level_norms = []
    for n in range(N + 1):
        piece = calc.diff(band(f, n))
        level_norms.append(schatten_pl(piece, p, l).value)
        R += piece
    tail = f - vp_approx(f, N)
    Q = calc.diff(tail)
    return SplitResult(N, R, Q, schatten_pl(R, p, l).value, spectral.op_norm(Q), p, l, level_norms)


def periodize_for_pair(f, pair: OperatorPair, maxfreq: int = 512, margin: float = 0.1) -> TrigPolynomial:
    """Periodize a line function on a window around both spectra.

    The window has half-width ``(1/2 + margin) * diameter`` so the spectra
    stay ``margin * diameter`` away from its edges.
    """
    spec = np.concatenate([np.linalg.eigvalsh(pair.A), np.linalg.eigvalsh(pair.B)])
    lo, hi = float(spec.min()), float(spec.max())
    diam = max(hi - lo, 1e-6)
    center = 0.5 * (lo + hi)
    half = (0.5 + margin) * diam
    return periodize_line(f, half, maxfreq, center=center, guard=0.5 * margin * diam)


def circle_level(N_line: int, poly: TrigPolynomial) -> int:
    """Circle level matching line level ``N_line`` for a windowed polynomial."""
    shift = poly.window.level_shift if poly.window is not None else 0.0
    return max(0, int(round(N_line + shift)))


def split_auto(f, pair: OperatorPair, j: int, p: float, l: int, maxfreq: int = 512) -> SplitResult:
    """Choose ``N`` from the pair and run :func:`split`.

    Self-adjoint pairs periodize callables first; unitary pairs take a
    TrigPolynomial and clamp the level at 0 (the large-distance branch).
    """
    delta = schatten_pl(pair.A - pair.B, p, l).value
    N_line = choose_N(j, p, delta) if delta > 0 else 0
    if pair.kind == "selfadjoint":
        poly = f if isinstance(f, TrigPolynomial) else periodize_for_pair(f, pair, maxfreq)
        N = circle_level(N_line, poly)
    else:
        poly = f
        N = max(0, N_line)
    return split(poly, pair, N, p, l)


# -- ratios -----------------------------------------------------------------


def _bound_argument(j: int, p: float, delta_pl: float, kind: str) -> float:
    arg = (1.0 + j) ** (-1.0 / p) * delta_pl
    if kind in ("unitary", "contraction") and arg > UNITARY_BRANCH:
        return UNITARY_BRANCH
    return arg


def _ratio(num: float, den_star: float, semi: float) -> float:
    if num == 0 or (semi == 0 and num <= spectral.CALC_TOL):
        return 0.0
    den = den_star * semi
    if den == 0:
        raise DegenerateInput("zero denominator with nonzero numerator")
    return num / den


def upper_ratio(
    f,
    modulus: Modulus,
    pair: OperatorPair,
    j: int,
    p: float,
    l: int,
    seminorm: float | SeminormEstimate | None = None,
    grid_size: int = 1025,
) -> float:
    """``s_j(f(A)-f(B)) / (omega_star((1+j)^(-1/p) ||A-B||_{S_p^l}) ||f||)``.

    Supported for selfadjoint, unitary and contraction pairs (``f`` is lifted
    with :func:`lift`).  For unitaries and contractions the argument of
    ``omega_star`` is capped at 2.  ``seminorm`` overrides the grid estimate.
    """
    if pair.kind not in ("selfadjoint", "unitary", "contraction"):
        raise spectral.ClassError("use multivar_ratio for normal and tuple pairs")
    if not 0 <= j <= l:
        raise ValueError("need 0 <= j <= l")
    calc = PairCalculus(pair)
    g = lift(f, pair.kind)
    num = singular_values(calc.diff(g))[j]
    if num == 0:
        return 0.0
    m = circle_modulus(modulus) if pair.kind != "selfadjoint" else modulus
    semi = float(seminorm) if seminorm is not None else seminorm_for(g, m, pair, grid_size, calc).value
    delta_pl = schatten_pl(pair.A - pair.B, p, l).value
    arg = _bound_argument(j, p, delta_pl, pair.kind)
    if arg == 0:
        raise DegenerateInput("A = B but f(A) != f(B)")
    return _ratio(num, float(omega_star(m, arg)), semi)


def multivar_ratio(
    kind: str,
    f,
    modulus: Modulus,
    pair: OperatorPair,
    j: int,
    p: float,
    l: int,
    seminorm: float | SeminormEstimate | None = None,
    grid_size: int = 961,
) -> float:
    """Ratio for normal pairs and commuting tuples.

    ``f`` takes complex points (normal) or rows of joint eigenvalues (tuple).
    The tuple denominator uses the largest coordinate term
    ``max_i omega_star((1+j)^(-1/p) ||A_i - B_i||_{S_p^l})``.
    """
    if kind != pair.kind or kind not in ("normal", "tuple"):
        raise spectral.ClassError(f"multivar_ratio needs a normal or tuple pair, got {pair.kind!r}")
    calc = PairCalculus(pair)
    num = singular_values(calc.diff(f))[j]
    if num == 0:
        return 0.0
    semi = float(seminorm) if seminorm is not None else seminorm_for(f, modulus, pair, grid_size, calc).value
    args = [(1.0 + j) ** (-1.0 / p) * schatten_pl(D, p, l).value for D in pair.differences()]
    arg = max(args)
    if arg == 0:
        raise DegenerateInput("A = B but f(A) != f(B)")
    return _ratio(num, float(omega_star(modulus, arg)), semi)


def bernstein_ratio(f: TrigPolynomial, pair: OperatorPair, p: float, l: int, oversample: int = 16) -> float:
    """``||f(A)-f(B)||_{S_p^l} / (sigma ||f||_inf ||A-B||_{S_p^l})``.

    ``sigma`` is the degree of ``f`` (times the window scale when a
    self-adjoint pair reads ``f`` on the line).  Contractions require an
    analytic ``f``.
    """
    if f.degree < 1:
        raise ValueError("degree must be at least 1")
    if pair.kind == "contraction" and not f.is_analytic():
        raise spectral.AnalyticityError("contraction calculus needs an analytic polynomial")
    if pair.kind not in ("selfadjoint", "unitary", "contraction"):
        raise spectral.ClassError(f"bernstein_ratio does not handle {pair.kind!r}")
    delta = schatten_pl(pair.A - pair.B, p, l).value
    if delta == 0:
        return 0.0
    calc = PairCalculus(pair)
    num = schatten_pl(calc.diff(f), p, l).value
    sigma = f.degree * (f.window.scale if (pair.kind == "selfadjoint" and f.window is not None) else 1.0)
    return num / (sigma * sup_norm(f, oversample) * delta)


# -- converse witnesses -----------------------------------------------------


@dataclass(frozen=True)
class WitnessRecord:
    n: int
    p: float
    s_n: float
    f_gap: float
    norm_sp: float
    expected_norm: float
    dim: int

    @property
    def deviations(self) -> tuple[float, float]:
        return abs(self.s_n - self.f_gap), abs(self.norm_sp - self.expected_norm)


def converse_witness(f, zeta, eta, n: int, p: float, dim: int | None = None, tol: float = 1e-12) -> WitnessRecord:
    """Commuting diagonal pair whose first ``n + 1`` entries are ``zeta`` vs ``eta``.

    Unimodular ``zeta, eta`` give a unitary pair, real ones a self-adjoint
    pair.  The remaining diagonal entries are shared.  Raises
    :class:`WitnessError` unless ``s_n(f(U)-f(V)) = |f(zeta)-f(eta)|`` and
    ``||U-V||_{S_p} = (1+n)^(1/p) |zeta-eta|`` hold to ``tol`` (relative to
    the size of the quantities).
    """
    if zeta == eta:
        raise DegenerateInput("zeta = eta")
    dim = n + 2 if dim is None else dim
    if dim < n + 2:
        raise ValueError("dimension must be at least n + 2")
    real = np.isreal(zeta) and np.isreal(eta)
    if real:
        zeta, eta = float(np.real(zeta)), float(np.real(eta))
    if isinstance(f, TrigPolynomial):
        f = f.evaluate_line if real else f.evaluate
    filler = 0.0 if real else 1.0
    u = np.full(dim, filler, dtype=float if real else complex)
    v = u.copy()
    u[: n + 1] = zeta
    v[: n + 1] = eta
    U, V = np.diag(u), np.diag(v)
    if real:
        D = spectral.apply_selfadjoint(U, f) - spectral.apply_selfadjoint(V, f)
    else:
        D = spectral.apply_unitary(U, f) - spectral.apply_unitary(V, f)
    s_n = singular_values(D)[n]
    gap = float(abs(np.asarray(f(np.array([zeta])))[0] - np.asarray(f(np.array([eta])))[0]))
    norm = schatten_pl(U - V, p, dim).value
    expected = (1 + n) ** (1.0 / p) * abs(zeta - eta)
    rec = WitnessRecord(n, p, float(s_n), gap, norm, float(expected), dim)
    d1, d2 = rec.deviations
    if d1 > tol * max(1.0, gap) or d2 > tol * max(1.0, expected):
        raise WitnessError(f"witness equalities fail: {d1:.3g}, {d2:.3g}")
    return rec


WITNESS_COLUMNS = ("case", "kind", "n", "p", "zeta_re", "zeta_im", "eta_re", "eta_im", "s_n", "f_gap", "norm_sp", "expected_norm")


def random_witnesses(count: int, seed: int, tol: float = 1e-12) -> list:
    """``count`` seeded witness cases alternating unitary and self-adjoint.

    Unitary cases use random trigonometric polynomials and unimodular points;
    self-adjoint cases use ``|x|**alpha`` and real points in ``[-2, 2]``.
    Returns ``(case, kind, zeta, eta, WitnessRecord)`` tuples.
    """
    from .catalog import random_trig

    out = []
    for case in range(count):
        rng = trial_rng(seed, case)
        n = int(rng.integers(0, 8))
        p = float(rng.choice([1.0, 2.0, 3.0, 4.0, rng.uniform(1.0, 6.0)]))
        if case % 2 == 0:
            kind = "unitary"
            f = random_trig(int(rng.integers(1, 17)), int(rng.integers(2**31)))
            zeta, eta = np.exp(1j * rng.uniform(-np.pi, np.pi, size=2))
        else:
            kind = "selfadjoint"
            f = PowerAbs(float(rng.uniform(0.1, 1.0)))
            zeta, eta = rng.uniform(-2.0, 2.0, size=2)
        rec = converse_witness(f, zeta, eta, n, p, dim=n + 2 + int(rng.integers(0, 4)), tol=tol)
        out.append((case, kind, complex(zeta), complex(eta), rec))
    return out


# -- sweeps ----------------------------------------------------------------


@dataclass
class SweepConfig:
    kind: str
    dims: list
    ps: list
    js: list
    modulus: Modulus
    function: str | None = None
    trials: int = 100
    seed: int = 0
    l_policy: object = "full"  # "full" or list of ints
    delta_range: tuple = (1e-3, 1.0)
    modes: list = field(default_factory=lambda: ["gaussian", "rank"])
    rank: int = 1
    grid_size: int = 1025
    cap: float = 100.0
    maxdeg: int = 32
    tuple_size: int = 2
    experiment_id: str = "upper"

    def default_function(self) -> str:
        if self.function:
            return self.function
        if self.modulus.kind == "power":
            return f"power_abs({self.modulus.alpha:g})"
        raise ValueError("table moduli need an explicit function")

    def l_values(self, dim: int) -> list:
        if self.l_policy == "full":
            return [dim - 1]
        return [int(v) for v in self.l_policy]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["modulus"] = self.modulus.to_dict()
        d["delta_range"] = list(self.delta_range)
        d["function"] = self.default_function()
        return d


@dataclass
class BernsteinConfig:
    kind: str
    dims: list
    degrees: list
    ps: list
    trials: int = 20
    seed: int = 0
    l_policy: object = "full"
    delta_range: tuple = (1e-3, 1.0)
    modes: list = field(default_factory=lambda: ["gaussian", "rank"])
    rank: int = 1
    cap: float = 100.0
    experiment_id: str = "bernstein"

    def l_values(self, dim: int) -> list:
        return [dim - 1] if self.l_policy == "full" else [int(v) for v in self.l_policy]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["delta_range"] = list(self.delta_range)
        return d


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class TableReport:
    """Rows of an experiment plus per-trial metadata."""

    experiment_id: str
    columns: tuple
    params: dict
    rows: list = field(default_factory=list)
    trials: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_fmt(v) for v in r])

    def write_trials_csv(self, path) -> None:
        if not self.trials:
            keys = ["trial", "dim"]
        else:
            keys = list(self.trials[0].keys())
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(keys)
            for t in self.trials:
                w.writerow([t[k] if isinstance(t[k], str) else _fmt(t[k]) for k in keys])

    def max_ratio(self) -> float:
        r = self.column("ratio")
        return float(r.max()) if len(r) else 0.0

    def max_ratio_by_dim(self) -> dict:
        out: dict = {}
        di, ri = self.columns.index("dim"), self.columns.index("ratio")
        for r in self.rows:
            out[int(r[di])] = max(out.get(int(r[di]), 0.0), float(r[ri]))
        return dict(sorted(out.items()))

    def growth(self) -> list:
        """``(d, 2d-ish next dim, relative increase of the max ratio)``."""
        by = self.max_ratio_by_dim()
        dims = list(by)
        out = []
        for a, b in zip(dims[:-1], dims[1:]):
            base = by[a]
            out.append((a, b, (by[b] - base) / base if base > 0 else (math.inf if by[b] > 0 else 0.0)))
        return out

    def growth_ok(self, limit: float = 0.10) -> bool:
        return all(g <= limit for _, _, g in self.growth())

    def stats(self, key_cols: Sequence[str]) -> dict:
        idx = [self.columns.index(k) for k in key_cols]
        ri = self.columns.index("ratio")
        groups: dict = {}
        for r in self.rows:
            groups.setdefault(tuple(r[i] for i in idx), []).append(float(r[ri]))
        out = {}
        for key, vals in sorted(groups.items()):
            a = np.array(vals)
            out[key] = {"max": float(a.max()), "median": float(np.median(a)), "p95": float(np.percentile(a, 95)), "count": len(a)}
        return out

    def summary(self, key_cols: Sequence[str]) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "params": self.params,
            "rows": len(self.rows),
            "max_ratio": self.max_ratio(),
            "max_ratio_by_dim": {str(k): v for k, v in self.max_ratio_by_dim().items()},
            "growth": [[a, b, g] for a, b, g in self.growth()],
            "flags": self.flags,
            "stats": [dict(zip(key_cols, k), **v) for k, v in self.stats(key_cols).items()],
        }


class BoundReport(TableReport):
    """Upper-bound sweep report; statistics are grouped by ``(dim, p, l, j)``."""

    KEY = ("dim", "p", "l", "j")

    def summary(self, key_cols: Sequence[str] = KEY) -> dict:
        return super().summary(key_cols)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PERTURB_THREADS", "1")))
    except ValueError:
        return 1


def _trial_rng(seed: int, dim: int, trial: int) -> np.random.Generator:
    # keyed by trial only: trial t sees the same delta and mode at every
    # dimension (common random numbers across the dimension sweep)
    return trial_rng(seed, trial)


def _draw_delta(rng: np.random.Generator, delta_range, trial: int, trials: int) -> float:
    """Log-uniform delta, stratified: trial ``t`` of ``T`` lands in stratum ``t``."""
    lo, hi = float(delta_range[0]), float(delta_range[1])
    u = (trial + rng.uniform()) / max(trials, 1)
    if hi <= 0:
        return 0.0
    if lo == hi or lo <= 0:
        return hi if lo == hi else hi * u
    return float(np.exp(np.log(lo) + u * (np.log(hi) - np.log(lo))))


def _draw_pair(kind: str, dim: int, rng: np.random.Generator, delta_range, modes, rank: int, trial: int, trials: int, tuple_size: int = 2):
    delta = _draw_delta(rng, delta_range, trial, trials)
    mode = modes[int(rng.integers(len(modes)))]
    return random_pair(kind, dim, delta, rng, mode=mode, rank=rank, tuple_size=tuple_size)


def _map_trials(fn: Callable, jobs: list) -> list:
    threads = _threads()
    if threads == 1 or len(jobs) < 2:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def resolve_function(name: str):
    from .catalog import function_catalog

    return function_catalog(name)


def trial_pair(config: SweepConfig | BernsteinConfig, dim: int, trial: int) -> OperatorPair:
    """The pair drawn for ``trial`` at ``dim`` by a sweep with ``config``."""
    return _trial_draw(config, dim, trial)[0]


def _trial_draw(config, dim: int, trial: int) -> tuple[OperatorPair, np.random.Generator]:
    rng = _trial_rng(config.seed, dim, trial)
    pair = _draw_pair(
        config.kind, dim, rng, config.delta_range, config.modes, config.rank, trial, config.trials, getattr(config, "tuple_size", 2)
    )
    return pair, rng


def sweep(config: SweepConfig) -> BoundReport:
    """Run an upper-bound ensemble and collect ratio rows.

    Deterministic given ``config.seed``: trial ``t`` uses the child stream
    ``(seed, t)`` at every dimension.  Rows appear sorted by dimension,
    trial, ``p``, ``l``, ``j``.
    """
    if config.kind not in CLASSES:
        raise spectral.ClassError(f"unsupported class {config.kind!r}")
    fname = config.default_function()
    f = resolve_function(fname)
    kind = config.kind
    m = config.modulus if kind in ("selfadjoint", "normal", "tuple") else circle_modulus(config.modulus)
    g = lift(f, kind, config.maxdeg)

    def one(dim: int, trial: int):
        pair = trial_pair(config, dim, trial)
        calc = PairCalculus(pair)
        sv = singular_values(calc.diff(g)).values
        semi = seminorm_for(g, m, pair, config.grid_size, calc)
        diff_svs = [singular_values(D).values for D in pair.differences()]
        rows, degenerate = [], 0
        for p in config.ps:
            curves = [schatten_curve(s, p) for s in diff_svs]
            for l in config.l_values(dim):
                dpl = max(float(c[min(l, dim - 1)]) if len(c) else 0.0 for c in curves)
                for j in config.js:
                    if j > l:
                        continue
                    s_j = float(sv[j]) if j < len(sv) else 0.0
                    arg = _bound_argument(j, p, dpl, kind)
                    if s_j == 0 or (semi.value == 0 and s_j <= spectral.CALC_TOL):
                        ratio = 0.0
                    elif arg == 0 or semi.value == 0:
                        degenerate += 1
                        ratio = math.inf
                    else:
                        ratio = s_j / (float(omega_star(m, arg)) * semi.value)
                    rows.append((trial, j, p, l, dim, s_j, dpl, arg, ratio))
        meta = {
            "trial": trial,
            "dim": dim,
            "delta": pair.delta,
            "mode": pair.mode,
            "seminorm": semi.value,
            "grid_size": semi.grid_size,
        }
        return rows, meta, degenerate

    jobs = [(d, t) for d in config.dims for t in range(config.trials)]
    results = _map_trials(one, jobs)
    report = BoundReport(config.experiment_id, UPPER_COLUMNS, config.to_dict())
    n_degenerate = 0
    for rows, meta, deg in results:
        report.rows.extend(rows)
        report.trials.append(meta)
        n_degenerate += deg
    if config.trials:
        report.flags.append("seminorm_lower_estimate")
    if n_degenerate:
        report.flags.append(f"degenerate_rows={n_degenerate}")
    return report


def bernstein_sweep(config: BernsteinConfig) -> TableReport:
    """Bernstein-type ratios for random real polynomials of each degree.

    Contractions use the analytic part of each polynomial; self-adjoint pairs
    read it as ``x -> p(exp(i x))`` (exponential type equal to the degree).
    """
    kind = config.kind
    if kind not in ("selfadjoint", "unitary", "contraction"):
        raise spectral.ClassError(f"bernstein sweeps support selfadjoint, unitary, contraction; not {kind!r}")
    from .catalog import random_trig

    def one(dim: int, trial: int):
        pair, rng = _trial_draw(config, dim, trial)
        calc = PairCalculus(pair)
        D = pair.A - pair.B
        sd = singular_values(D).values
        rows = []
        for deg in config.degrees:
            f = random_trig(int(deg), int(rng.integers(2**31)))
            if kind == "contraction":
                f = f.analytic_part()
            sn = singular_values(calc.diff(f)).values
            sup = sup_norm(f)
            for p in config.ps:
                cd, cn = schatten_curve(sd, p), schatten_curve(sn, p)
                for l in config.l_values(dim):
                    ll = min(l, dim - 1)
                    dpl, num = float(cd[ll]), float(cn[ll])
                    ratio = 0.0 if dpl == 0 else num / (deg * sup * dpl)
                    rows.append((trial, int(deg), p, l, dim, num, dpl, sup, ratio))
        return rows, {"trial": trial, "dim": dim, "delta": pair.delta, "mode": pair.mode}

    jobs = [(d, t) for d in config.dims for t in range(config.trials)]
    results = _map_trials(one, jobs)
    report = TableReport(config.experiment_id, BERNSTEIN_COLUMNS, config.to_dict())
    for rows, meta in results:
        report.rows.extend(rows)
        report.trials.append(meta)
    return report
