"""Truncated Fock-space states and gates for one signal and one ancilla mode.

Index conventions: amplitude index = photon number; in a two-mode grid
``psi[n, k]`` the first index is the signal mode (a), the second the
ancilla (b).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, gammaln

from .functions import Basis, CoefficientVector

NORM_TOL = 1e-10
LEAKAGE_TOL = 1e-8


class CutoffOverflowError(RuntimeError):
    """Population reached the top of the truncated Fock space."""

    def __init__(self, message, suggested_dim=None):
        super().__init__(message)
        self.suggested_dim = suggested_dim


def recommended_dim(alpha: complex) -> int:
    return math.ceil((abs(alpha) + 4) ** 2)


@dataclass(frozen=True)
class ModeOperator:
    matrix: np.ndarray
    label: str
    guarded: int | None = None  # leading block free of truncation error, if known


@dataclass
class FockState:
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_json(self) -> dict:
        return {"dim": self.dim, "amplitudes": [[a.real, a.imag] for a in self.amplitudes]}


@dataclass
class TwoModeState:
    amplitudes: np.ndarray  # shape (dim, dim)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def product(cls, signal: FockState, ancilla: FockState) -> "TwoModeState":
        if signal.dim != ancilla.dim:
            raise ValueError("signal and ancilla cutoffs differ")
        return cls(np.outer(signal.amplitudes, ancilla.amplitudes))

    def check_leakage(self, tol: float = LEAKAGE_TOL):
        """Population on the outermost complete total-photon shell n+k = dim-1."""
        d = self.dim
        shell = np.abs(np.fliplr(self.amplitudes).diagonal()) ** 2
        beyond = np.abs(self.amplitudes[np.add.outer(np.arange(d), np.arange(d)) >= d]) ** 2
        leaked = float(shell.sum() + beyond.sum())
        if leaked > tol:
            raise CutoffOverflowError(
                f"two-mode population {leaked:.3g} at total photon number >= {d - 1}",
                suggested_dim=d + 8,
            )
        return leaked

    def photon_number_distribution(self) -> np.ndarray:
        """Distribution of the total photon number n + k."""
        d = self.dim
        p = np.abs(self.amplitudes) ** 2
        tot = np.add.outer(np.arange(d), np.arange(d))
        return np.bincount(tot.ravel(), weights=p.ravel(), minlength=2 * d - 1)


def _check_state(amps: np.ndarray):
    nrm = float(np.sum(np.abs(amps) ** 2))
    if abs(nrm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm {nrm} deviates from 1")
    top = float(abs(amps[-1]) ** 2)
    if top > LEAKAGE_TOL:
        raise CutoffOverflowError(
            f"population {top:.3g} in the top Fock level {amps.size - 1}",
            suggested_dim=2 * amps.size,
        )


def mode_operators(dim: int):
    """Truncated (lower, raise, number) matrices."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    lower = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    raise_ = lower.conj().T.copy()
    # exact integers; raise_ @ lower equals this up to rounding of sqrt(n)^2
    number = np.diag(np.arange(dim, dtype=float)).astype(complex)
    return (
        ModeOperator(lower, "lower"),
        ModeOperator(raise_, "raise"),
        ModeOperator(number, "number"),
    )


def _displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    lower, raise_, _ = mode_operators(dim)
    return expm(alpha * raise_.matrix - alpha.conjugate() * lower.matrix)


def displacement(alpha: complex, dim: int, tol: float = 1e-8) -> ModeOperator:
    """D(alpha) = exp(alpha a^dag - conj(alpha) a) on the truncated space.

    The truncated exponential is exactly unitary but differs from the true
    displacement near the top of the matrix.  ``guarded`` records the
    leading block that agrees with a doubled-cutoff reference to ``tol``;
    a warning is issued when that block is shorter than ``dim - ceil(4|alpha|)``
    would suggest by more than half, i.e. when the cutoff is clearly too small.
    """
    alpha = complex(alpha)
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if alpha == 0:
        return ModeOperator(np.eye(dim, dtype=complex), "identity", guarded=dim)
    D = _displacement_matrix(alpha, dim)
    ref = _displacement_matrix(alpha, 2 * dim)[:dim, :dim]
    err = np.abs(D - ref)
    guarded = 0
    while guarded < dim and err[: guarded + 1, : guarded + 1].max() <= tol:
        guarded += 1
    if guarded < (dim - math.ceil(4 * abs(alpha))) // 2:
        warnings.warn(
            f"displacement({alpha}) accurate only on the leading {guarded} levels of dim={dim}; "
            f"recommended dim >= {recommended_dim(alpha)}",
            stacklevel=2,
        )
    return ModeOperator(D, f"displacement({alpha.real:g}{alpha.imag:+g}j)", guarded=guarded)


def coherent_tail_mass(alpha: complex, dim: int) -> float:
    """P(photon number >= dim) for |alpha>, a Poisson(|alpha|^2) tail."""
    lam = abs(alpha) ** 2
    if lam == 0:
        return 0.0
    return float(gammainc(dim, lam))


def coherent_state(alpha: complex, dim: int) -> FockState:
    """Closed-form coherent amplitudes exp(-|a|^2/2) a^n / sqrt(n!), renormalised.

    Raises :class:`CutoffOverflowError` if more than 1e-8 of the Poisson
    weight lies beyond the cutoff.
    """
    alpha = complex(alpha)
    if dim < 2:
        raise ValueError("dim must be >= 2")
    tail = coherent_tail_mass(alpha, dim)
    if tail > LEAKAGE_TOL:
        raise CutoffOverflowError(
            f"coherent state |{alpha}> loses {tail:.3g} beyond dim={dim}",
            suggested_dim=recommended_dim(alpha),
        )
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return FockState(amps)
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    amps /= np.linalg.norm(amps)
    return FockState(amps)


@lru_cache(maxsize=64)
def _sector_blocks(theta: float, dim: int) -> tuple:
    blocks = []
    for total in range(2 * dim - 1):
        n = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        k = total - n
        m = n.size
        G = np.zeros((m, m))
        # a b^dag |n,k> = sqrt(n (k+1)) |n-1,k+1>;  a^dag b |n,k> = sqrt((n+1) k) |n+1,k-1>
        for i in range(m - 1):
            # basis i <-> photon numbers (n[i], k[i]); i+1 has one more signal photon
            G[i, i + 1] = math.sqrt(n[i + 1] * (k[i + 1] + 1))
            G[i + 1, i] = -math.sqrt((n[i] + 1) * k[i])
        U = expm(theta * G)
        U.setflags(write=False)
        blocks.append((n, k, U))
    return tuple(blocks)


class BeamSplitter:
    """exp[theta (a b^dag - a^dag b)] assembled per total-photon sector.

    The operator never forms a dense dim^2 x dim^2 exponential; each sector
    n + k = const is exponentiated on its own (at most dim x dim).
    """

    def __init__(self, theta: float, dim: int):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.theta = float(theta)
        self.dim = dim
        self.blocks = _sector_blocks(self.theta, dim)

    def element(self, out_nk, in_nk) -> float:
        (n1, k1), (n0, k0) = out_nk, in_nk
        total = n0 + k0
        if n1 + k1 != total:
            return 0.0
        n, _, U = self.blocks[total]
        return float(U[n1 - n[0], n0 - n[0]])

    def apply(self, state: TwoModeState) -> TwoModeState:
        if state.dim != self.dim:
            raise ValueError("cutoff mismatch")
        psi = state.amplitudes
        out = np.zeros_like(psi)
        for n, k, U in self.blocks:
            out[n, k] = U @ psi[n, k]
        return TwoModeState(out)

    def matrix(self) -> np.ndarray:
        """Dense dim^2 x dim^2 matrix, row index n * dim + k."""
        d = self.dim
        M = np.zeros((d * d, d * d))
        for n, k, U in self.blocks:
            idx = n * d + k
            M[np.ix_(idx, idx)] = U
        return M


def beam_splitter(theta: float, dim: int) -> BeamSplitter:
    return BeamSplitter(theta, dim)


def prepare_state(c: CoefficientVector, dim: int) -> FockState:
    """Normalised state sum_n c_n |n> / sqrt(norm_sq), zero-padded to ``dim``."""
    c.require(Basis.FOCK)
    if len(c) > dim:
        raise ValueError(f"{len(c)} coefficients do not fit into dim={dim}")
    nrm = c.norm_sq
    if nrm == 0:
        raise ValueError("cannot prepare a state from an all-zero coefficient vector")
    amps = np.zeros(dim, dtype=complex)
    amps[: len(c)] = c.values / math.sqrt(nrm)
    _check_state(amps)
    return FockState(amps)


def joint_probabilities(state: TwoModeState) -> np.ndarray:
    p = np.abs(state.amplitudes) ** 2
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"two-mode state norm {total} deviates from 1")
    return p
