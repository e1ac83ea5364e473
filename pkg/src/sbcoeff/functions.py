"""Target holomorphic functions and their exact Maclaurin coefficients.

A :class:`FunctionSpec` is either one of a handful of builtin entire
functions (``exp``, ``expi``, ``sin``, ``cos``, ``coherent``) or a finite
power series.  Coefficient vectors always carry a basis tag so that
monomial coefficients (``f = sum a_n z^n``) are never silently mixed with
orthonormal Fock amplitudes (``b_n = a_n sqrt(n!)``).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

KINDS = ("exp", "expi", "sin", "cos", "coherent", "series")

#: Largest index for which factorial-based rescaling is allowed.
MAX_FACTORIAL_INDEX = 150


class Basis(str, Enum):
    MONOMIAL = "monomial"
    FOCK = "fock"


class BasisMismatchError(TypeError):
    """Raised when a coefficient vector is used in the wrong basis."""


def factorial(n: int) -> float:
    """n! as a float; exact product up to 20, log-gamma beyond."""
    if n < 0 or n > MAX_FACTORIAL_INDEX:
        raise ValueError(f"factorial index {n} outside [0, {MAX_FACTORIAL_INDEX}]")
    if n <= 20:
        return float(math.factorial(n))
    return math.exp(math.lgamma(n + 1))


@dataclass(frozen=True)
class FunctionSpec:
    """A target entire function.

    ``alpha`` is only used by ``coherent`` (f(z) = exp(alpha z - |alpha|^2/2));
    ``coeffs`` only by ``series``.
    """

    kind: str
    alpha: complex = 0j
    coeffs: tuple[complex, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "series":
            if len(self.coeffs) == 0:
                raise ValueError("series needs at least one coefficient")
            coeffs = tuple(complex(c) for c in self.coeffs)
            if not all(cmath.isfinite(c) for c in coeffs):
                raise ValueError("series coefficients must be finite")
            object.__setattr__(self, "coeffs", coeffs)
        if not cmath.isfinite(complex(self.alpha)):
            raise ValueError("coherent amplitude must be finite")
        object.__setattr__(self, "alpha", complex(self.alpha))

    @classmethod
    def series(cls, coeffs: Sequence[complex]) -> "FunctionSpec":
        return cls("series", coeffs=tuple(coeffs))

    @classmethod
    def coherent(cls, alpha: complex) -> "FunctionSpec":
        return cls("coherent", alpha=alpha)

    @property
    def label(self) -> str:
        if self.kind == "coherent":
            return f"coherent({self.alpha.real:g}{self.alpha.imag:+g}j)"
        if self.kind == "series":
            return f"series[{len(self.coeffs)}]"
        return self.kind

    def to_json(self) -> dict:
        if self.kind == "series":
            return {"kind": "series", "coeffs": [[c.real, c.imag] for c in self.coeffs]}
        out = {"kind": self.kind}
        if self.kind == "coherent":
            out["alpha"] = [self.alpha.real, self.alpha.imag]
        return out

    @classmethod
    def from_json(cls, obj: dict | str) -> "FunctionSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = str(obj.get("kind", "")).lower()
        if kind == "series":
            if "coeffs" not in obj:
                raise ValueError("series spec requires 'coeffs'")
            return cls.series([_pair_to_complex(p) for p in obj["coeffs"]])
        if kind == "coherent":
            return cls.coherent(_pair_to_complex(obj.get("alpha", [0.0, 0.0])))
        return cls(kind)


def _pair_to_complex(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    re, im = p
    return complex(float(re), float(im))


@dataclass(frozen=True)
class CoefficientVector:
    """Complex coefficients c_0..c_N tagged with their basis.

    ``norm_sq`` is the sum of squared magnitudes; for Fock amplitudes this
    is the state normalisation.
    """

    values: np.ndarray
    basis: Basis

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).ravel()
        if vals.size == 0:
            raise ValueError("coefficient vector must be non-empty")
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficient vector has non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "basis", Basis(self.basis))

    @property
    def degree(self) -> int:
        return self.values.size - 1

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def __len__(self):
        return self.values.size

    def __getitem__(self, n):
        return self.values[n]

    def require(self, basis: Basis) -> "CoefficientVector":
        if self.basis != Basis(basis):
            raise BasisMismatchError(
                f"expected {Basis(basis).value} coefficients, got {self.basis.value}; "
                "use convert_basis first"
            )
        return self


def evaluate(f: FunctionSpec, z):
    """Evaluate ``f`` at ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    if f.kind == "exp":
        out = np.exp(z)
    elif f.kind == "expi":
        out = np.exp(1j * z)
    elif f.kind == "sin":
        out = np.sin(z)
    elif f.kind == "cos":
        out = np.cos(z)
    elif f.kind == "coherent":
        a = f.alpha
        out = np.exp(a * z - 0.5 * abs(a) ** 2)
    else:
        # Horner
        out = np.zeros_like(z)
        for c in reversed(f.coeffs):
            out = out * z + c
    return out[()] if out.ndim == 0 else out


def exact_coefficients(f: FunctionSpec, N: int) -> CoefficientVector:
    """Exact Maclaurin coefficients a_0..a_N (monomial basis)."""
    if N < 0:
        raise ValueError("N must be non-negative")
    n = np.arange(N + 1)
    inv_fact = np.array([1.0 / math.factorial(k) for k in range(N + 1)])
    if f.kind == "exp":
        a = inv_fact.astype(complex)
    elif f.kind == "expi":
        a = (1j ** (n % 4)) * inv_fact
    elif f.kind == "sin":
        # z - z^3/3! + ... : odd n only, sign (-1)^((n-1)/2)
        a = np.where(n % 2 == 1, np.where(n % 4 == 1, 1.0, -1.0), 0.0) * inv_fact
    elif f.kind == "cos":
        a = np.where(n % 2 == 0, np.where(n % 4 == 0, 1.0, -1.0), 0.0) * inv_fact
    elif f.kind == "coherent":
        alpha = f.alpha
        pref = math.exp(-0.5 * abs(alpha) ** 2)
        a = np.array([pref * alpha**k for k in range(N + 1)]) * inv_fact
    else:
        a = np.zeros(N + 1, dtype=complex)
        k = min(N + 1, len(f.coeffs))
        a[:k] = f.coeffs[:k]
    return CoefficientVector(np.asarray(a, dtype=complex), Basis.MONOMIAL)


def convert_basis(c: CoefficientVector, target: Basis | str) -> CoefficientVector:
    """Rescale between monomial coefficients and orthonormal Fock amplitudes.

    Monomial -> Fock multiplies entry n by sqrt(n!); Fock -> Monomial divides.
    """
    target = Basis(target)
    if c.basis == target:
        return c
    if c.degree > MAX_FACTORIAL_INDEX:
        raise OverflowError(
            f"basis conversion limited to degree {MAX_FACTORIAL_INDEX}, got {c.degree}"
        )
    scale = np.sqrt([factorial(k) for k in range(c.degree + 1)])
    if target == Basis.FOCK:
        return CoefficientVector(c.values * scale, Basis.FOCK)
    return CoefficientVector(c.values / scale, Basis.MONOMIAL)


def state_coefficients(f: FunctionSpec, N: int, loading: str = "direct") -> CoefficientVector:
    """Fock amplitudes (unnormalised) used to prepare the state for ``f``.

    ``direct`` loads the Maclaurin values a_n unchanged as Fock amplitudes,
    which is how the cos(z) photon-counting benchmark is set up.
    ``bargmann`` applies the isometry b_n = a_n sqrt(n!), under which a
    ``coherent`` spec maps to the usual coherent-state amplitudes.
    """
    a = exact_coefficients(f, N)
    if loading == "direct":
        return CoefficientVector(a.values, Basis.FOCK)
    if loading == "bargmann":
        return convert_basis(a, Basis.FOCK)
    raise ValueError(f"unknown loading convention {loading!r}")


@dataclass
class AdmissibilityReport:
    max_ratio: float
    argmax_radius: float
    admissible: bool
    ring_max: np.ndarray


def admissibility_probe(f: FunctionSpec, r_max: float, samples: int = 64) -> AdmissibilityReport:
    """Heuristic check of the growth bound |f(z)| <= C exp(A|z|^2), A < 1.

    Samples |f(z)| exp(-|z|^2) on ``samples`` rings (radius 0 included) with
    ``samples`` points each.  The function is flagged inadmissible when the
    per-ring maximum is still increasing across the outermost rings or
    overflows.  Sampling cannot prove the bound, only fail to refute it.
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    if samples < 8:
        raise ValueError("need at least 8 samples")
    radii = np.linspace(0.0, r_max, samples)
    theta = 2 * np.pi * np.arange(samples) / samples
    z = radii[:, None] * np.exp(1j * theta)[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.abs(evaluate(f, z)) * np.exp(-np.abs(z) ** 2)
    ring_max = ratio.max(axis=1)
    finite = bool(np.all(np.isfinite(ring_max)))
    tail = ring_max[-3:]
    growing = bool(np.any(np.diff(tail) > 0))
    i = int(np.nanargmax(np.where(np.isfinite(ring_max), ring_max, -np.inf))) if finite else -1
    return AdmissibilityReport(
        max_ratio=float(ring_max[i]) if finite else math.inf,
        argmax_radius=float(radii[i]),
        admissible=finite and not growing,
        ring_max=ring_max,
    )
