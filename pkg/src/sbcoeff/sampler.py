"""Finite-shot photon counting with reproducible random streams.

Random numbers come from numpy's PCG64 bit generator seeded through a
``SeedSequence(seed, spawn_key=key)``.  The key identifies the protocol
stage and, where relevant, the index of a scan point, so every stage draws
from its own substream and results do not depend on evaluation order:

    (0,)        magnitude stage
    (1, j)      phase scan, displacement point j
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

MAGNITUDE_STREAM = (0,)
PHASE_STREAM = 1


def make_rng(seed: int, key: tuple[int, ...] = ()) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass
class CountsTable:
    """Outcome counts; ``counts`` has the shape of the probability array."""

    counts: np.ndarray
    shots: int
    seed: int
    efficiency: float = 1.0
    stream: tuple = ()

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def items(self):
        """Non-zero (outcome, count) pairs; outcomes are ints or (n, k) tuples."""
        for idx in zip(*np.nonzero(self.counts)):
            outcome = int(idx[0]) if len(idx) == 1 else tuple(int(i) for i in idx)
            yield outcome, int(self.counts[idx])

    def to_json(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "efficiency": self.efficiency,
            "stream": list(self.stream),
            "counts": [[o if isinstance(o, int) else list(o), c] for o, c in self.items()],
        }


def sample_counts(probs, shots: int, seed: int, key: tuple[int, ...] = (),
                  efficiency: float = 1.0) -> CountsTable:
    """Draw ``shots`` outcomes by inverse-CDF sampling.

    ``probs`` may be a vector (single-mode counts) or a 2-d grid (joint
    counts); it is renormalised if its sum is within 1e-9 of one.
    """
    p = np.asarray(probs, dtype=float)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if np.any(p < 0):
        if p.min() < -1e-15:
            raise ValueError("negative probabilities")
        p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, not 1")
    cdf = np.cumsum(p.ravel()) / total
    cdf[-1] = 1.0
    u = make_rng(seed, key).random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    counts = np.bincount(idx, minlength=p.size).reshape(p.shape)
    return CountsTable(counts=counts, shots=shots, seed=seed, efficiency=efficiency, stream=tuple(key))


def apply_loss(probs, eta: float) -> np.ndarray:
    """Binomial thinning of a photon-number distribution by detector efficiency ``eta``."""
    if not 0 < eta <= 1:
        raise ValueError("efficiency must lie in (0, 1]")
    p = np.asarray(probs, dtype=float)
    if eta == 1:
        return p.copy()
    n = np.arange(p.size)
    # T[k, n] = C(n, k) eta^k (1 - eta)^(n - k)
    T = binom.pmf(n[:, None], n[None, :], eta)
    return T @ p


@dataclass
class MagnitudeEstimate:
    n: int
    abs_c: float
    stderr: float
    count: int = 0


def estimate_magnitudes(t: CountsTable, norm_sq: float) -> list[MagnitudeEstimate]:
    """|c_n| = sqrt(norm_sq * p_n) with delta-method binomial error bars.

    Unobserved outcomes get the rule-of-three bound sqrt(3 norm_sq / M).
    """
    if norm_sq <= 0:
        raise ValueError("norm_sq must be positive")
    counts = np.asarray(t.counts)
    if counts.ndim != 1:
        raise ValueError("magnitude estimation needs single-mode counts")
    M = t.shots
    out = []
    for n, k in enumerate(counts):
        p = k / M
        if k > 0:
            err = math.sqrt(norm_sq) * math.sqrt(p * (1 - p) / M) / (2 * math.sqrt(p))
        else:
            err = math.sqrt(norm_sq * 3 / M)
        out.append(MagnitudeEstimate(n=n, abs_c=math.sqrt(norm_sq * p), stderr=err, count=int(k)))
    return out


def estimate_from_exact(probs, norm_sq: float) -> list[MagnitudeEstimate]:
    """Infinite-shot limit of :func:`estimate_magnitudes`."""
    return [
        MagnitudeEstimate(n=n, abs_c=math.sqrt(norm_sq * max(float(p), 0.0)), stderr=0.0)
        for n, p in enumerate(np.asarray(probs, dtype=float))
    ]
