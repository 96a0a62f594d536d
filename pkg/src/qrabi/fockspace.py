"""Truncated Fock-basis Hamiltonian, eigensolution, observables, cutoff control.

Basis ordering interleaves spin and photon number: index 2n for |n, +> and
2n + 1 for |n, ->. All couplings are real, so the matrix is real symmetric;
in this ordering it is banded with four sub-diagonals (the g2 two-photon
element connects indices 2n and 2n + 4).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import ModelParams

DEFAULT_CUTOFF_START = 16
DEFAULT_CUTOFF_CEILING = 4096


class EigensolverError(RuntimeError):
    """LAPACK failure with the offending parameters attached."""


class CutoffConvergenceError(RuntimeError):
    """Ground energy not converged below the requested tolerance at the cutoff ceiling."""


@dataclass(frozen=True)
class SpinorFockVector:
    """Real ground/excited eigenvector split into spin components c_n^+/-."""

    coeff_plus: np.ndarray
    coeff_minus: np.ndarray
    cutoff: int

    def norm(self) -> float:
        return math.sqrt(np.dot(self.coeff_plus, self.coeff_plus)
                         + np.dot(self.coeff_minus, self.coeff_minus))

    def interleaved(self) -> np.ndarray:
        out = np.empty(2 * (self.cutoff + 1))
        out[0::2] = self.coeff_plus
        out[1::2] = self.coeff_minus
        return out

    @classmethod
    def from_interleaved(cls, vec: np.ndarray, cutoff: int) -> "SpinorFockVector":
        return cls(coeff_plus=vec[0::2].copy(), coeff_minus=vec[1::2].copy(),
                   cutoff=cutoff)


@dataclass(frozen=True)
class SpectrumSlice:
    """Lowest-k eigenpairs at a fixed cutoff."""

    energies: np.ndarray
    vectors: tuple
    cutoff: int
    converged: bool


def build_hamiltonian(p: ModelParams, cutoff: int) -> np.ndarray:
    """Dense symmetric matrix of size 2 (cutoff + 1)."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    dim = 2 * (cutoff + 1)
    h = np.zeros((dim, dim))
    n = np.arange(cutoff + 1, dtype=float)
    for s, off in ((+1.0, 0), (-1.0, 1)):
        idx = 2 * n.astype(int) + off
        h[idx, idx] = p.omega * n + s * (p.g2 * (2.0 * n + 1.0) - p.epsilon)
        if cutoff >= 1:
            one = np.sqrt(n[:-1] + 1.0)  # <n+1|(a^dag + a)|n>
            h[idx[:-1] + 2, idx[:-1]] = s * p.g1 * one
            h[idx[:-1], idx[:-1] + 2] = s * p.g1 * one
        if cutoff >= 2:
            two = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))  # <n+2|(a^dag+a)^2|n>
            h[idx[:-2] + 4, idx[:-2]] = s * p.g2 * two
            h[idx[:-2], idx[:-2] + 4] = s * p.g2 * two
    even = 2 * n.astype(int)
    h[even, even + 1] = 0.5 * p.Omega
    h[even + 1, even] = 0.5 * p.Omega
    return h


def _banded_hamiltonian(p: ModelParams, cutoff: int) -> np.ndarray:
    """Lower-banded storage (5 diagonals) for scipy.linalg.eig_banded."""
    dim = 2 * (cutoff + 1)
    band = np.zeros((5, dim))
    n = np.arange(cutoff + 1, dtype=float)
    for s, off in ((+1.0, 0), (-1.0, 1)):
        idx = 2 * n.astype(int) + off
        band[0, idx] = p.omega * n + s * (p.g2 * (2.0 * n + 1.0) - p.epsilon)
        if cutoff >= 1:
            band[2, idx[:-1]] = s * p.g1 * np.sqrt(n[:-1] + 1.0)
        if cutoff >= 2:
            band[4, idx[:-2]] = s * p.g2 * np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
    band[1, 0::2] = 0.5 * p.Omega
    return band


def _gauge_fix(vec: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coefficient positive."""
    k = int(np.argmax(np.abs(vec)))
    return -vec if vec[k] < 0 else vec


def _spin_plus_weight(vec: np.ndarray) -> float:
    return float(np.dot(vec[0::2], vec[0::2]))


def spectrum(p: ModelParams, cutoff: int, k: int = 2) -> SpectrumSlice:
    """Lowest k eigenpairs; gauge-fixed signs, deterministic degeneracy ordering."""
    dim = 2 * (cutoff + 1)
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    band = _banded_hamiltonian(p, cutoff)
    try:
        energies, vecs = scipy.linalg.eig_banded(
            band, lower=True, select="i", select_range=(0, k - 1),
            check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(
            f"banded eigensolve failed at cutoff {cutoff} for {p}: {exc}") from exc
    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    vecs = vecs[:, order]
    # Within a degenerate group, order by descending spin-plus weight.
    tol = 1e-12 * max(p.omega, abs(p.Omega), abs(p.epsilon), 1.0)
    i = 0
    while i < k:
        j = i + 1
        while j < k and energies[j] - energies[i] < tol:
            j += 1
        if j - i > 1:
            weights = [-_spin_plus_weight(vecs[:, c]) for c in range(i, j)]
            sub = np.argsort(weights, kind="stable")
            vecs[:, i:j] = vecs[:, i + sub]
        i = j
    vectors = tuple(
        SpinorFockVector.from_interleaved(_gauge_fix(vecs[:, c]), cutoff)
        for c in range(k))
    return SpectrumSlice(energies=energies, vectors=vectors, cutoff=cutoff,
                         converged=True)


def ground_state(p: ModelParams, cutoff: int) -> tuple[float, SpinorFockVector]:
    sl = spectrum(p, cutoff, k=1)
    return float(sl.energies[0]), sl.vectors[0]


@functools.lru_cache(maxsize=4096)
def _ground_energy(p: ModelParams, cutoff: int) -> float:
    return spectrum(p, cutoff, k=1).energies[0]


def converge_cutoff(p: ModelParams, tol: float | None = None,
                    start: int = DEFAULT_CUTOFF_START,
                    ceiling: int = DEFAULT_CUTOFF_CEILING) -> int:
    """Smallest tested N (doubling from `start`) with |E0(2N) - E0(N)| < tol.

    Raises CutoffConvergenceError past `ceiling`; near g2 -> omega/4 the Fock
    support broadens without bound, so failure is reported rather than guessed.
    """
    if tol is None:
        tol = 1e-10 * p.omega
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = start
    e_n = _ground_energy(p, n)
    last_change = math.inf
    while 2 * n <= ceiling:
        e_2n = _ground_energy(p, 2 * n)
        last_change = abs(e_2n - e_n)
        if last_change < tol:
            return n
        n, e_n = 2 * n, e_2n
    raise CutoffConvergenceError(
        f"ground energy not converged to {tol} at cutoff ceiling {ceiling} "
        f"for {p} (last doubling change {last_change:.3e})")


@functools.lru_cache(maxsize=4096)
def default_cutoff(p: ModelParams) -> int:
    """Cutoff policy used before any QFI computation: converge E0 to 1e-10 omega."""
    return converge_cutoff(p, tol=1e-10 * p.omega)


def sigma_z(v: SpinorFockVector) -> float:
    """<sigma_z> = sum_n (c_n^+)^2 - (c_n^-)^2 for a normalized vector."""
    return float(np.dot(v.coeff_plus, v.coeff_plus)
                 - np.dot(v.coeff_minus, v.coeff_minus))


def gap_ed(p: ModelParams, cutoff: int | None = None) -> float:
    """First excitation gap E1 - E0 >= 0."""
    if cutoff is None:
        cutoff = default_cutoff(p)
    sl = spectrum(p, cutoff, k=2)
    return float(sl.energies[1] - sl.energies[0])
