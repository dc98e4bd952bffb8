"""Seeded random operator pairs for every class under test.

Each generator is a pure function of ``(dim, delta, seed, mode)``.  Trials of
an experiment draw from :func:`trial_rng`, a per-trial child stream of the
experiment seed, so trial ``t`` is the same whether run alone, serially or in
parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import spectral

__all__ = [
    "CLASSES",
    "MODES",
    "OperatorPair",
    "random_pair",
    "trial_rng",
    "haar_unitary",
    "gue",
]

CLASSES = ("selfadjoint", "unitary", "normal", "contraction", "tuple")
MODES = ("gaussian", "rank", "schatten")

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def gue(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian Gaussian matrix scaled so the spectrum fills about [-1, 1]."""
    X = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    H = (X + X.conj().T) / 2
    return H / np.sqrt(2 * dim) if dim > 1 else H


def _hermitian_direction(dim: int, rng: np.random.Generator, mode: str, rank: int, p: float) -> np.ndarray:
    """Hermitian perturbation direction with operator norm 1."""
    if mode == "gaussian":
        E = gue(dim, rng)
    elif mode == "rank":
        r = max(1, min(rank, dim))
        Q = haar_unitary(dim, rng)[:, :r]
        signs = rng.choice([-1.0, 1.0], size=r)
        E = (Q * signs) @ Q.conj().T
    elif mode == "schatten":
        Q = haar_unitary(dim, rng)
        vals = (1.0 + np.arange(dim)) ** (-1.0 / p) * rng.choice([-1.0, 1.0], size=dim)
        E = (Q * vals) @ Q.conj().T
    else:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    E = 0.5 * (E + E.conj().T)
    nrm = spectral.op_norm(E)
    return E / nrm if nrm > 0 else E


def _expi(E: np.ndarray, delta: float) -> np.ndarray:
    vals, Q = np.linalg.eigh(E)
    return (Q * np.exp(1j * delta * vals)) @ Q.conj().T


@dataclass
class OperatorPair:
    """Two same-size operators of one class, with their provenance.

    For ``kind == "tuple"`` ``A`` and ``B`` are lists of matrices.
    """

    kind: str
    A: object
    B: object
    seed: object = None
    generator: str = ""
    delta: float = 0.0
    mode: str = "gaussian"
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        first = self.A[0] if self.kind == "tuple" else self.A
        return int(np.shape(first)[0])

    def differences(self) -> list[np.ndarray]:
        if self.kind == "tuple":
            return [a - b for a, b in zip(self.A, self.B)]
        return [self.A - self.B]

    def check(self) -> None:
        """Raise :class:`spectral.ClassError` if a class invariant fails."""
        if self.kind == "selfadjoint":
            spectral.check_selfadjoint(self.A)
            spectral.check_selfadjoint(self.B)
        elif self.kind == "unitary":
            spectral.check_unitary(self.A)
            spectral.check_unitary(self.B)
        elif self.kind == "normal":
            spectral.check_normal(self.A)
            spectral.check_normal(self.B)
        elif self.kind == "contraction":
            spectral.check_contraction(self.A)
            spectral.check_contraction(self.B)
        elif self.kind == "tuple":
            for M in list(self.A) + list(self.B):
                spectral.check_selfadjoint(M)
            spectral.check_commuting(self.A)
            spectral.check_commuting(self.B)
        else:
            raise spectral.ClassError(f"unknown operator class {self.kind!r}")


def random_pair(
    kind: str,
    dim: int,
    delta: float,
    seed: SeedLike = 0,
    mode: str = "gaussian",
    rank: int = 1,
    p: float = 2.0,
    tuple_size: int = 2,
) -> OperatorPair:
    """Draw ``A`` and a perturbation ``B`` at scale ``delta``.

    * selfadjoint: ``A`` Gaussian Hermitian (spectrum ~[-1, 1]),
      ``B = A + delta E`` with ``||E|| = 1``
    * unitary: ``A`` Haar, ``B = A exp(i delta E)``
    * normal: ``A = Q diag(lambda) Q*`` with ``lambda`` in the unit disk;
      ``B`` rotates the basis by ``exp(i delta E)`` and moves the eigenvalues
      by at most ``delta``
    * tuple: commuting Hermitian matrices sharing a Haar basis; ``B`` shares
      a rotated basis and has moved joint eigenvalues
    * contraction: ``A = X / ||X||``, ``B = A + delta E`` renormalised to norm 1
      if needed

    ``mode`` picks ``E``: ``"gaussian"`` (full rank), ``"rank"`` (rank
    ``rank``, eigenvalues +-1) or ``"schatten"`` (eigenvalues
    ``(1 + i)**(-1/p)``).  ``delta = 0`` returns ``B`` equal to ``A``.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if kind not in CLASSES:
        raise spectral.ClassError(f"unknown operator class {kind!r}")
    rng = _rng(seed)
    meta: dict = {}
    seed_tag = seed if isinstance(seed, (int, np.integer)) else None

    if kind == "selfadjoint":
        A = gue(dim, rng)
        E = _hermitian_direction(dim, rng, mode, rank, p)
        B = A.copy() if delta == 0 else A + delta * E
        B = 0.5 * (B + B.conj().T)
    elif kind == "unitary":
        A = haar_unitary(dim, rng)
        E = _hermitian_direction(dim, rng, mode, rank, p)
        B = A.copy() if delta == 0 else A @ _expi(E, delta)
    elif kind == "normal":
        Q = haar_unitary(dim, rng)
        lam = np.sqrt(rng.uniform(size=dim)) * np.exp(2j * np.pi * rng.uniform(size=dim))
        E = _hermitian_direction(dim, rng, mode, rank, p)
        eps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        eps /= np.abs(eps).max()
        A = (Q * lam) @ Q.conj().T
        if delta == 0:
            B = A.copy()
        else:
            W = Q @ _expi(E, delta)
            B = (W * (lam + delta * eps)) @ W.conj().T
        meta["eigenvalues"] = lam
    elif kind == "tuple":
        n = int(tuple_size)
        Q = haar_unitary(dim, rng)
        a = rng.uniform(-1.0, 1.0, size=(dim, n))
        E = _hermitian_direction(dim, rng, mode, rank, p)
        eps = rng.standard_normal((dim, n))
        eps /= np.abs(eps).max()
        A = [0.5 * (M + M.conj().T) for M in ((Q * a[:, i]) @ Q.conj().T for i in range(n))]
        if delta == 0:
            B = [M.copy() for M in A]
        else:
            W = Q @ _expi(E, delta)
            b = a + delta * eps
            B = [0.5 * (M + M.conj().T) for M in ((W * b[:, i]) @ W.conj().T for i in range(n))]
        meta["tuple_size"] = n
    else:
        X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        A = X / spectral.op_norm(X)
        if mode == "gaussian":
            Y = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            E = Y / spectral.op_norm(Y)
        else:
            E = _hermitian_direction(dim, rng, mode, rank, p)
        if delta == 0:
            B = A.copy()
        else:
            B = A + delta * E
            nb = spectral.op_norm(B)
            if nb > 1.0:
                B = B / nb
        # keep the norm bound exact against roundoff in the normalisation
        for M in (A, B):
            nm = spectral.op_norm(M)
            if nm > 1.0:
                M /= nm * (1 + 1e-15)
    return OperatorPair(kind, A, B, seed_tag, f"{kind}/{mode}", float(delta), mode, meta)
