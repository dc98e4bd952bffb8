"""Lower-bound witnesses built from a lacunary Fourier series.

``g(zeta) = sum_{n=1}^{n_max} omega(4**-n) (zeta**(4**n) + conj(zeta)**(4**n))``
is paired with the operators ``U f = conj(z) f`` and its rank-one
modification ``V f = conj(z) f - 2 (f, 1) conj(z)`` on ``L^2`` of the circle.
The compression of ``h(U) - h(V)`` to ``span{z^-K..z^K}`` has an explicit
formula, and its off-diagonal blocks are the Hankel matrix
``Gamma_h = {h^(j + k)}_{j >= 1, k >= 0}``.  Submatrices of ``Gamma_g``
are scalar multiples of the exchange matrix, which certifies lower
bounds on singular values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hankel

from .lpdecomp import gluing
from .modulus import CIRCLE_SATURATION, Modulus, lambda_seminorm, omega_sharp
from .spectral import singular_values
from .trig import TrigPolynomial

__all__ = [
    "LacunaryFunction",
    "RankOnePair",
    "HankelBlock",
    "RangeError",
    "ConstructionError",
    "build_g",
    "rank_one_pair",
    "difference_matrix",
    "direct_difference",
    "hankel_gamma",
    "extract_Tn",
    "tn_side",
    "LowerBoundTable",
    "verify_lower",
    "rho",
    "LineTransferResult",
    "line_transfer",
]

LOWER_TOL = 1e-10
HANKEL_SCALE = 32.0 / 3.0


class RangeError(ValueError):
    """Requested block does not fit in the truncation."""


class ConstructionError(RuntimeError):
    """A search for a construction parameter hit its cap."""


def _circle(m: Modulus) -> Modulus:
    return m if m.saturation is not None else m.with_saturation(CIRCLE_SATURATION)


@dataclass(frozen=True)
class LacunaryFunction:
    modulus: Modulus
    n_max: int
    poly: TrigPolynomial

    @property
    def degree(self) -> int:
        return 4**self.n_max

    def __call__(self, zeta):
        return self.poly.evaluate(zeta)


def build_g(m: Modulus, n_max: int) -> LacunaryFunction:
    """The lacunary series truncated after ``n_max`` terms."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    coeffs: dict[int, float] = {}
    for n in range(1, n_max + 1):
        c = float(m(4.0**-n))
        coeffs[4**n] = c
        coeffs[-(4**n)] = c
    return LacunaryFunction(m, n_max, TrigPolynomial.from_mapping(coeffs))


# -- the rank-one pair ----------------------------------------------------


@dataclass(frozen=True)
class RankOnePair:
    """Truncations of ``U`` and ``V`` on the ordered basis ``z^-K, ..., z^K``.

    Column ``k + K`` holds the image of ``z^k``.  ``U`` is the shift
    ``z^k -> z^(k-1)`` with the image of ``z^-K`` dropped, so it is not
    unitary at the boundary; ``V`` differs from ``U`` only in the column of
    ``z^0``, which it maps to ``-z^-1``.
    """

    K: int
    U: np.ndarray
    V: np.ndarray

    def index(self, k: int) -> int:
        return k + self.K


def rank_one_pair(K: int) -> RankOnePair:
    n = 2 * K + 1
    U = np.zeros((n, n))
    for k in range(-K + 1, K + 1):
        U[k - 1 + K, k + K] = 1.0
    V = U.copy()
    V[-1 + K, K] = -1.0
    return RankOnePair(K, U, V)


def difference_matrix(f: TrigPolynomial, K: int) -> np.ndarray:
    """``M[j, k] = -2 f^(j - k)`` when exactly one of ``j, k`` is negative.

    Indices run over ``-K..K`` (array position ``index + K``).  This is the
    entry formula for ``((f(U) - f(V)) z^j, z^k)``, so it is the negated
    transpose of :func:`direct_difference` in the interior; neither change
    affects singular values.
    """
    n = 2 * K + 1
    dense = f.dense(max(2 * K, f.degree))
    off = max(2 * K, f.degree)
    j = np.arange(-K, K + 1)[:, None]
    k = np.arange(-K, K + 1)[None, :]
    d = j - k
    vals = dense[np.clip(d + off, 0, len(dense) - 1)]
    mixed = (j >= 0) != (k >= 0)
    M = np.where(mixed, -2.0 * vals, 0.0)
    return M.reshape(n, n)


def direct_difference(f: TrigPolynomial, K: int) -> np.ndarray:
    """``f(U) - f(V)`` in the truncation, built from powers of ``U``, ``V``.

    Negative powers use the adjoints (``U^-1 = U*`` in the untruncated
    space).  Entries within ``degree(f)`` of the boundary are contaminated by
    the truncation; the interior block is exact.
    """
    pair = rank_one_pair(K)
    n = 2 * K + 1

    def calc(X: np.ndarray) -> np.ndarray:
        out = np.zeros((n, n), dtype=complex)
        pos, neg = np.eye(n), np.eye(n)
        powers = {0: np.eye(n)}
        for m in range(1, f.degree + 1):
            pos = pos @ X
            neg = neg @ X.T
            powers[m], powers[-m] = pos, neg
        for m, c in zip(f.freqs, f.coefs):
            out += c * powers[int(m)]
        return out

    return calc(pair.U) - calc(pair.V)


# -- Hankel blocks --------------------------------------------------------


@dataclass(frozen=True)
class HankelBlock:
    """``Gamma[j - 1, k] = g^(j + k)`` for ``j = 1..K``, ``k = 0..K-1``."""

    coefficients: np.ndarray  # g^(0), g^(1), ..., g^(2K)
    K: int
    matrix: np.ndarray

    def is_hankel(self) -> bool:
        M = self.matrix
        return bool(np.all(M[1:, :-1] == M[:-1, 1:]))


def hankel_gamma(g, K: int) -> HankelBlock:
    poly = g.poly if isinstance(g, LacunaryFunction) else g
    dense = poly.dense(max(poly.degree, 2 * K))
    off = (len(dense) - 1) // 2
    # symbol coefficients g^(-j-k) and g^(j+k) coincide for the even symbols used here
    pos = dense[off : off + 2 * K + 1]
    col = pos[1 : K + 1]
    row = pos[K : 2 * K]
    M = hankel(col, row)
    return HankelBlock(pos.copy(), K, M)


def tn_side(n: int) -> int:
    return 3 * 4 ** (n - 1)


def extract_Tn(block: HankelBlock, n: int, literal: bool = False) -> np.ndarray:
    """``T_n = {g^(j + k + 4**(n-1) + 1)}`` for ``0 <= j, k < 3 * 4**(n-1)``.

    This is the compression of ``Gamma`` to rows ``4**(n-1) + 1 ..`` and the
    leading columns.  For the lacunary ``g`` its only nonzero entries sit on
    the exchange anti-diagonal ``j + k = 3 * 4**(n-1) - 1``.

    ``literal=True`` keeps the closed range ``0 <= j, k <= 3 * 4**(n-1)``,
    which adds a zero row and column (one extra zero singular value).
    """
    if n < 1:
        raise RangeError("T_n is defined for n >= 1")
    side = tn_side(n) + (1 if literal else 0)
    first_row = 4 ** (n - 1) + 1
    if first_row + side - 1 > block.K or side > block.K:
        raise RangeError(f"T_{n} needs a truncation of at least {4**n}, have {block.K}")
    r0 = first_row - 1  # Gamma row index of j = first_row
    return block.matrix[r0 : r0 + side, :side].copy()


@dataclass
class LowerBoundTable:
    modulus: Modulus
    K: int
    n_max: int
    scale: float
    rows: list = field(default_factory=list)  # (m, s_m, omega_bound, margin)
    chain: list = field(default_factory=list)  # (j, s_j(Gamma_g), 3/32 omega((j+1)^-1))
    tn: list = field(default_factory=list)  # (n, side, value, max off-diagonal, max |s - value|)
    rank_uv: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def min_margin(self) -> float:
        return min(r[3] for r in self.rows) if self.rows else math.inf


def verify_lower(m: Modulus, K: int, n_max: int, scale: float = HANKEL_SCALE, tol: float = LOWER_TOL) -> LowerBoundTable:
    """Check ``s_m(h(U) - h(V)) >= omega(1 / (1 + m))`` for ``h = scale * g``.

    The certified range is ``m < 3 * 4**(n_max - 1)``.  Violations are
    collected in the returned table rather than raised.
    """
    if K < 4**n_max:
        raise RangeError(f"K must be at least 4**n_max = {4**n_max}")
    m = _circle(m)
    g = build_g(m, n_max)
    table = LowerBoundTable(m, K, n_max, scale)

    pair = rank_one_pair(K)
    table.rank_uv = int(np.linalg.matrix_rank(pair.U - pair.V))
    if table.rank_uv != 1:
        table.violations.append(("rank", table.rank_uv))

    block = hankel_gamma(g, K)
    for n in range(1, n_max + 1):
        T = extract_Tn(block, n)
        value = float(m(4.0**-n))
        side = T.shape[0]
        expected = value * np.fliplr(np.eye(side))
        off = float(np.abs(T - expected).max())
        s = singular_values(T).values
        dev = float(np.abs(s - value).max())
        table.tn.append((n, side, value, off, dev))
        if off > 0 or dev > 1e-12:
            table.violations.append(("T_n", n, off, dev))

    M = difference_matrix(scale * g.poly, K)
    if np.all(M.imag == 0):
        M = M.real
    s = singular_values(M).values
    count = tn_side(n_max)
    for j in range(count):
        bound = float(m(1.0 / (1 + j)))
        margin = float(s[j] - bound)
        table.rows.append((j, float(s[j]), bound, margin))
        if margin < -tol:
            table.violations.append(("lower", j, margin))

    sg = singular_values(block.matrix).values
    for j in range(count):
        table.chain.append((j, float(sg[j]), 3.0 / 32.0 * float(m(1.0 / (j + 1)))))
    return table


# -- transfer to the real line --------------------------------------------

# rho vanishes where sin^2(arg zeta) <= RHO_CUT, i.e. within pi/8 of +-1
RHO_CUT = math.sin(math.pi / 8) ** 2


def rho(zeta) -> np.ndarray:
    """Smooth ``rho`` with ``rho(z) + rho(iz) = 1`` and ``rho(conj z) = rho(z)``.

    ``rho(zeta) = Theta(Im(zeta)^2 / |zeta|^2)`` where ``Theta`` is the
    gluing step rescaled to switch on ``[c, 1 - c]``; since
    ``Im(i zeta) = Re(zeta)`` the two functional equations follow from
    ``Theta(u) + Theta(1 - u) = 1``.
    """
    zeta = np.asarray(zeta, dtype=complex)
    u = zeta.imag**2 / np.abs(zeta) ** 2
    return gluing((u - RHO_CUT) / (1.0 - 2.0 * RHO_CUT))


@dataclass
class LineTransferResult:
    modulus: Modulus
    n_max: int
    C: float
    found: bool
    search: list  # (C, worst margin)
    hankel_size: int
    singular_values: np.ndarray
    bounds: np.ndarray
    g0_coefficients: np.ndarray  # g0^(k), k = 0..len-1
    coefficient_tail: float
    theta: np.ndarray
    g0_samples: np.ndarray
    y: np.ndarray
    f_samples: np.ndarray
    f_seminorm: float
    seminorm_grid: int

    @property
    def margins(self) -> np.ndarray:
        return self.C * self.singular_values - self.bounds


def line_transfer(
    m: Modulus,
    n_max: int,
    C_cap: float = 2.0**20,
    fft_size: int | None = None,
    hankel_size: int | None = None,
    grid_size: int = 2049,
    tol: float = LOWER_TOL,
) -> LineTransferResult:
    """Build ``g0 = C rho g1`` and its line counterpart ``f``.

    ``C`` doubles from 1 until the truncated Hankel matrix of ``g0`` meets
    ``s_m >= omega(1/(1+m))`` for ``m < 3 * 4**(n_max - 1)``.  Because Hankel
    singular values scale linearly with ``C`` they are computed once for
    ``rho g1``.  ``f(y) = g0((x - i)/(x + i))`` with ``x = sqrt(1/y - 1)``;
    its seminorm against ``omega_sharp`` is estimated on ``grid_size`` points
    of ``(0, 1]``.  Raises :class:`ConstructionError` if ``C`` exceeds the cap.
    """
    m = _circle(m)
    g1 = build_g(m, n_max)
    deg = g1.degree
    M = fft_size or 64 * deg
    Kh = hankel_size or 4 * deg
    theta = 2 * np.pi * np.arange(M) / M
    zeta = np.exp(1j * theta)
    base = rho(zeta) * np.real(g1.poly.evaluate_roots(M))
    coef = np.real(np.fft.fft(base)) / M  # real and even symbol
    pos = coef[: 2 * Kh + 1]
    tail = float(np.abs(coef[2 * Kh + 1 : M // 2]).max(initial=0.0))
    H = hankel(pos[1 : Kh + 1], pos[Kh : 2 * Kh])
    s = singular_values(H).values
    count = tn_side(n_max)
    bounds = np.array([float(m(1.0 / (1 + j))) for j in range(count)])
    s = s[:count]

    C, search, found = 1.0, [], False
    while C <= C_cap:
        worst = float(np.min(C * s - bounds))
        search.append((C, worst))
        if worst >= -tol:
            found = True
            break
        C *= 2.0
    if not found:
        last = f"; last margin {search[-1][1]:.3g}" if search else ""
        raise ConstructionError(f"no C <= {C_cap:g} meets the Hankel lower bound{last}")

    def g0(z):
        return C * rho(z) * np.real(g1.poly.evaluate(z))

    y = np.linspace(1.0 / grid_size, 1.0, grid_size)

    def f(yy):
        yy = np.asarray(yy, dtype=float)
        x = np.sqrt(np.maximum(1.0 / yy - 1.0, 0.0))
        return g0((x - 1j) / (x + 1j))

    sharp = lambda d: omega_sharp(m, d)  # noqa: E731
    est = lambda_seminorm(f, sharp, grid_size, (float(y[0]), 1.0))
    thetas = np.linspace(-np.pi, np.pi, 1025)
    return LineTransferResult(
        modulus=m,
        n_max=n_max,
        C=C,
        found=found,
        search=search,
        hankel_size=Kh,
        singular_values=s,
        bounds=bounds,
        g0_coefficients=C * pos,
        coefficient_tail=C * tail,
        theta=thetas,
        g0_samples=g0(np.exp(1j * thetas)),
        y=y,
        f_samples=f(y),
        f_seminorm=est.value,
        seminorm_grid=grid_size,
    )
