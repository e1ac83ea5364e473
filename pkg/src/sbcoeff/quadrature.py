"""Gaussian-weighted inner products over a disk and projection coefficients.

The inner product <z^n, f> = int conj(z)^n f(z) exp(-|z|^2) dA is evaluated
on a polar grid cut at radius R, either as a plain Riemann sum or as a
Gauss-Legendre (radial) x trapezoid (angular) tensor rule.  Cutting the
plane at R attenuates every coefficient by a known factor t_n(R), see
:func:`radial_truncation_factor`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaincc

from .functions import (
    MAX_FACTORIAL_INDEX,
    Basis,
    CoefficientVector,
    FunctionSpec,
    evaluate,
    factorial,
)

MAX_RADIUS = 12.0


class ConfigError(ValueError):
    """A configuration violates a documented invariant."""


class Method(str, Enum):
    RIEMANN = "riemann"
    GAUSS = "gauss"


@dataclass(frozen=True)
class QuadratureConfig:
    method: Method = Method.GAUSS
    radius: float = 4.0
    radial_nodes: int = 200
    angular_nodes: int = 64

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.radius > 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        if self.radius > MAX_RADIUS:
            warnings.warn(f"radius {self.radius} clamped to {MAX_RADIUS}", stacklevel=3)
            object.__setattr__(self, "radius", MAX_RADIUS)
        if self.radial_nodes < 8:
            raise ConfigError(f"radial_nodes must be >= 8, got {self.radial_nodes}")
        if self.angular_nodes < 8:
            raise ConfigError(f"angular_nodes must be >= 8, got {self.angular_nodes}")

    def check_degree(self, N: int):
        if self.angular_nodes < 2 * (N + 1):
            raise ConfigError(
                f"angular_nodes={self.angular_nodes} below Nyquist limit 2(N+1)={2 * (N + 1)} "
                f"for max degree {N}"
            )

    def halved(self, N: int) -> "QuadratureConfig":
        ang = self.angular_nodes // 2
        if ang < max(8, 2 * (N + 1)):
            ang = self.angular_nodes
        return replace(self, radial_nodes=max(8, self.radial_nodes // 2), angular_nodes=ang)

    def to_json(self) -> dict:
        return {
            "method": self.method.value,
            "radius": self.radius,
            "radial_nodes": self.radial_nodes,
            "angular_nodes": self.angular_nodes,
        }


def monomial_norm_squared(n: int) -> float:
    """||z^n||^2 = pi n! under exp(-|z|^2) dA."""
    if not 0 <= n <= MAX_FACTORIAL_INDEX:
        raise ValueError(f"n must lie in [0, {MAX_FACTORIAL_INDEX}], got {n}")
    return math.pi * factorial(n)


def radial_truncation_factor(n: int, R: float) -> float:
    """Fraction of ||z^n||^2 contained in the disk |z| <= R.

    t_n(R) = 1 - exp(-R^2) sum_{k<=n} R^(2k)/k!, i.e. the regularised lower
    incomplete gamma function P(n+1, R^2).  For an entire f with Maclaurin
    coefficients a_n the disk-restricted projection is exactly a_n t_n(R).
    """
    if n < 0 or R <= 0:
        raise ValueError("need n >= 0 and R > 0")
    return float(1.0 - gammaincc(n + 1, R * R))


def _nodes(cfg: QuadratureConfig):
    """Polar nodes z and weights w (area element and Gaussian included)."""
    R = cfg.radius
    if cfg.method == Method.RIEMANN:
        dr = R / cfg.radial_nodes
        r = (np.arange(cfg.radial_nodes) + 0.5) * dr
        wr = np.full_like(r, dr)
    else:
        x, wx = leggauss(cfg.radial_nodes)
        r = 0.5 * R * (x + 1.0)
        wr = 0.5 * R * wx
    dtheta = 2 * np.pi / cfg.angular_nodes
    theta = np.arange(cfg.angular_nodes) * dtheta
    radial_w = wr * r * np.exp(-r * r) * dtheta
    return r, theta, radial_w


def _inner_products(f: FunctionSpec, N: int, cfg: QuadratureConfig) -> np.ndarray:
    r, theta, radial_w = _nodes(cfg)
    z = r[:, None] * np.exp(1j * theta)[None, :]
    fz = evaluate(f, z)
    # angular sums first: F[n, i] = sum_j e^{-i n theta_j} f(r_i e^{i theta_j})
    phase = np.exp(-1j * np.outer(np.arange(N + 1), theta))
    F = phase @ fz.T
    with np.errstate(under="ignore"):
        rpow = r[None, :] ** np.arange(N + 1)[:, None]
    return (F * rpow) @ radial_w


def _inner_product(f, n, cfg, method):
    if n < 0:
        raise ValueError("n must be non-negative")
    if cfg.method != method:
        cfg = replace(cfg, method=method)
    return complex(_inner_products(f, n, cfg)[n])


def inner_product_riemann(f: FunctionSpec, n: int, cfg: QuadratureConfig) -> complex:
    """Riemann-sum approximation of <z^n, f> on the disk of ``cfg.radius``.

    Midpoint rule in r (dr = R/radial_nodes), left endpoints in theta.
    """
    return _inner_product(f, n, cfg, Method.RIEMANN)


def inner_product_gauss(f: FunctionSpec, n: int, cfg: QuadratureConfig) -> complex:
    """Gauss-Legendre in r on [0, R] times uniform trapezoid in theta."""
    return _inner_product(f, n, cfg, Method.GAUSS)


@dataclass
class ProjectionResult:
    coefficients: CoefficientVector
    inner_products: np.ndarray
    config: QuadratureConfig
    residual_estimates: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def rows(self):
        for n, c in enumerate(self.coefficients.values):
            yield n, c, float(self.residual_estimates[n])

    def to_json(self) -> dict:
        return {
            "basis": self.coefficients.basis.value,
            "config": self.config.to_json(),
            "coefficients": [[c.real, c.imag] for c in self.coefficients.values],
            "inner_products": [[c.real, c.imag] for c in self.inner_products],
            "residual_estimates": [float(x) for x in self.residual_estimates],
        }


def project(f: FunctionSpec, N: int, cfg: QuadratureConfig) -> ProjectionResult:
    """Projection coefficients c_n = <z^n, f> / (pi n!) for n = 0..N.

    ``residual_estimates[n]`` is |c_n(cfg) - c_n(cfg with half the nodes)|.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if N > MAX_FACTORIAL_INDEX:
        raise ConfigError(f"max degree {N} exceeds factorial guard {MAX_FACTORIAL_INDEX}")
    cfg.check_degree(N)
    norms = np.array([monomial_norm_squared(n) for n in range(N + 1)])
    ip = _inner_products(f, N, cfg)
    coeffs = ip / norms
    coarse = _inner_products(f, N, cfg.halved(N)) / norms
    return ProjectionResult(
        coefficients=CoefficientVector(coeffs, Basis.MONOMIAL),
        inner_products=ip,
        config=cfg,
        residual_estimates=np.abs(coeffs - coarse),
    )


@dataclass
class TruncationResult:
    N: int
    tail: int
    norm_sq: float
    terms: np.ndarray  # |c_n|^2 n! for every available index


def truncation_error_norm(c: CoefficientVector, N: int, tail: int) -> TruncationResult:
    """Squared Gaussian norm of the series tail, pi sum_{n=N+1}^{N+tail} |c_n|^2 n!."""
    c.require(Basis.MONOMIAL)
    if N < 0 or tail < 0:
        raise ValueError("N and tail must be non-negative")
    top = N + tail
    if top > MAX_FACTORIAL_INDEX:
        raise OverflowError(f"tail index {top} exceeds factorial guard {MAX_FACTORIAL_INDEX}")
    if c.degree < top:
        raise ValueError(f"need coefficients up to index {top}, have {c.degree}")
    fact = np.array([factorial(n) for n in range(top + 1)])
    terms = np.abs(c.values[: top + 1]) ** 2 * fact
    return TruncationResult(N=N, tail=tail, norm_sq=float(math.pi * terms[N + 1 :].sum()), terms=terms)
