"""End-to-end photon-counting estimate of Fock amplitudes c_n = <n|f>.

Magnitudes come from photon-number statistics of the prepared state.
Phases come from interfering |f> with a coherent reference |r e^{i theta}>
on a 50:50 beam splitter and watching the joint outcome (n, 0) as theta is
scanned.  Because the beam splitter conserves total photon number, the
(n, 0) amplitude involves c_0..c_n only, so phases are fitted one index
at a time from the bottom up, each scan conditioned on the phases already
found.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .fock import (
    TwoModeState,
    beam_splitter,
    coherent_state,
    joint_probabilities,
    prepare_state,
)
from .functions import Basis, CoefficientVector, FunctionSpec, state_coefficients
from .quadrature import ConfigError
from .sampler import (
    MAGNITUDE_STREAM,
    PHASE_STREAM,
    CountsTable,
    MagnitudeEstimate,
    apply_loss,
    estimate_from_exact,
    estimate_magnitudes,
    sample_counts,
)

BS_ANGLE = math.pi / 4
GRID_POINTS = 1024
PHASE_TOL = 1e-8
DEGENERACY_RATIO = 1.05


@dataclass(frozen=True)
class ProtocolConfig:
    N: int
    dim: int
    seed: int = 0
    shots_magnitude: int = 100_000
    scan_points: int = 32
    shots_per_point: int = 100_000
    r: float = 0.8
    threshold: float | None = None  # None -> 1e-3 * sqrt(norm_sq)
    efficiency: float = 1.0
    objective: str = "ls"
    loading: str = "direct"

    def __post_init__(self):
        if self.N < 0:
            raise ConfigError("N must be non-negative")
        if self.dim < self.N + 1:
            raise ConfigError(f"dim={self.dim} cannot hold degree N={self.N}")
        if self.shots_magnitude < 1 or self.shots_per_point < 1:
            raise ConfigError("shot counts must be positive")
        if self.scan_points < 3:
            raise ConfigError("need at least 3 scan points")
        if not self.r > 0:
            raise ConfigError("scan radius r must be positive")
        if not 0 < self.efficiency <= 1:
            raise ConfigError("efficiency must lie in (0, 1]")
        if self.objective not in ("ls", "ml"):
            raise ConfigError(f"unknown objective {self.objective!r}")
        if self.loading not in ("direct", "bargmann"):
            raise ConfigError(f"unknown loading {self.loading!r}")

    @property
    def min_interference_dim(self) -> int:
        return self.N + math.ceil(4 * self.r) + 4

    def check_interference_headroom(self):
        if self.dim < self.min_interference_dim:
            raise ConfigError(
                f"dim={self.dim} below interference headroom N + ceil(4r) + 4 = "
                f"{self.min_interference_dim}"
            )

    def tau(self, norm_sq: float) -> float:
        return 1e-3 * math.sqrt(norm_sq) if self.threshold is None else self.threshold

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "dim": self.dim,
            "seed": self.seed,
            "shots_magnitude": self.shots_magnitude,
            "scan_points": self.scan_points,
            "shots_per_point": self.shots_per_point,
            "r": self.r,
            "threshold": self.threshold,
            "efficiency": self.efficiency,
            "objective": self.objective,
            "loading": self.loading,
        }


def target_amplitudes(f: FunctionSpec, cfg: ProtocolConfig) -> CoefficientVector:
    return state_coefficients(f, cfg.N, cfg.loading)


def prepared_state(f: FunctionSpec, cfg: ProtocolConfig):
    return prepare_state(target_amplitudes(f, cfg), cfg.dim)


@dataclass
class MagnitudeRun:
    estimates: list[MagnitudeEstimate]
    norm_sq: float
    counts: CountsTable | None
    probabilities: np.ndarray


def run_magnitude_protocol(f: FunctionSpec, cfg: ProtocolConfig, exact: bool = False) -> MagnitudeRun:
    """Photon-count the prepared state and estimate |c_n| for n = 0..N.

    With ``exact=True`` the shot-noise-free probabilities are used instead
    of samples.
    """
    c = target_amplitudes(f, cfg)
    state = prepare_state(c, cfg.dim)
    probs = apply_loss(state.probabilities(), cfg.efficiency)
    if exact:
        est = estimate_from_exact(probs, c.norm_sq)
        counts = None
    else:
        counts = sample_counts(probs, cfg.shots_magnitude, cfg.seed, MAGNITUDE_STREAM, cfg.efficiency)
        est = estimate_magnitudes(counts, c.norm_sq)
    return MagnitudeRun(estimates=est[: cfg.N + 1], norm_sq=c.norm_sq, counts=counts, probabilities=probs)


def scan_thetas(J: int) -> np.ndarray:
    return 2 * np.pi * np.arange(J) / J


def interference_distribution(f: FunctionSpec, alpha: complex, cfg: ProtocolConfig) -> np.ndarray:
    """Exact joint (n, k) photon-number distribution after BS(pi/4) on |f> x |alpha>."""
    cfg.check_interference_headroom()
    signal = prepared_state(f, cfg)
    ancilla = coherent_state(alpha, cfg.dim)
    joint = TwoModeState.product(signal, ancilla)
    out = beam_splitter(BS_ANGLE, cfg.dim).apply(joint)
    out.check_leakage()
    return joint_probabilities(out)


def _reference_amplitudes(n: int, cfg: ProtocolConfig, thetas) -> np.ndarray:
    """A[j, m] = <n,0| U_BS |m, n-m> <n-m|alpha_j>, the (n,0) response to |m>."""
    bs = beam_splitter(BS_ANGLE, cfg.dim)
    A = np.zeros((len(thetas), n + 1), dtype=complex)
    for j, th in enumerate(thetas):
        coh = coherent_state(cfg.r * np.exp(1j * th), cfg.dim).amplitudes
        for m in range(n + 1):
            A[j, m] = bs.element((n, 0), (m, n - m)) * coh[n - m]
    return A


@dataclass
class ScanData:
    """Per-theta joint counts (or exact probabilities) for the phase stage."""

    thetas: np.ndarray
    frequencies: np.ndarray  # (J, dim, dim)
    shots: int | None  # None for the exact-probability path
    tables: list[CountsTable] = field(default_factory=list)


def collect_scan(f: FunctionSpec, cfg: ProtocolConfig, exact: bool = False) -> ScanData:
    """Record joint PNRD statistics at every displacement alpha_j = r e^{i theta_j}.

    Point j samples from its own random substream, so the record for one
    point is independent of how many other points are taken.
    """
    thetas = scan_thetas(cfg.scan_points)
    freqs = np.zeros((len(thetas), cfg.dim, cfg.dim))
    tables = []
    for j, th in enumerate(thetas):
        P = interference_distribution(f, cfg.r * np.exp(1j * th), cfg)
        if exact:
            freqs[j] = P
        else:
            t = sample_counts(P, cfg.shots_per_point, cfg.seed, (PHASE_STREAM, j))
            tables.append(t)
            freqs[j] = t.frequencies()
    return ScanData(thetas=thetas, frequencies=freqs, shots=None if exact else cfg.shots_per_point, tables=tables)


@dataclass
class PhaseScanResult:
    n: int
    r: float
    thetas: np.ndarray
    probs_observed: np.ndarray
    phase: float
    residual: float
    reference_index: int
    defined: bool = True
    alternate_phase: float | None = None
    objective: str = "ls"
    phase_stderr: float = math.nan  # Fisher bound, conditional on lower phases

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "phase": self.phase if self.defined else None,
            "residual": self.residual,
            "reference_index": self.reference_index,
            "defined": self.defined,
            "alternate_phase": self.alternate_phase,
            "phase_stderr": None if math.isnan(self.phase_stderr) else self.phase_stderr,
            "objective": self.objective,
            "probs_observed": [float(p) for p in self.probs_observed],
        }


def _objective(kind, observed, K, B, phis, shots):
    """Objective values for candidate phases ``phis`` (vectorised)."""
    model = np.abs(K[None, :] + np.exp(1j * np.atleast_1d(phis))[:, None] * B[None, :]) ** 2
    if kind == "ls":
        return np.sum((observed[None, :] - model) ** 2, axis=1)
    # binomial negative log-likelihood; exact path uses expected counts
    M = shots if shots is not None else 1.0
    k = observed * M
    p = np.clip(model, 1e-300, 1 - 1e-16)
    return -np.sum(k * np.log(p) + (M - k) * np.log1p(-p), axis=1)


def _golden(fun, a, b, tol):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def fit_phase(observed, K, B, objective="ls", shots=None):
    """Fit the unknown phase phi in P_j = |K_j + e^{i phi} B_j|^2.

    1024-point grid search refined by golden section to 1e-8 rad.  Returns
    (phi, ls_residual, alternate) where ``alternate`` is a second local
    minimum whose least-squares residual is within 5% of the best, else None.
    """
    grid = 2 * np.pi * np.arange(GRID_POINTS) / GRID_POINTS
    vals = _objective(objective, observed, K, B, grid, shots)
    step = grid[1]

    def refine(i):
        fun = lambda x: float(_objective(objective, observed, K, B, x, shots)[0])
        return _golden(fun, grid[i] - step, grid[i] + step, PHASE_TOL) % (2 * np.pi)

    ls = lambda x: float(_objective("ls", observed, K, B, x, shots)[0])
    best = int(np.argmin(vals))
    phi = refine(best)
    res = ls(phi)
    is_min = (vals <= np.roll(vals, 1)) & (vals <= np.roll(vals, -1))
    others = [i for i in np.flatnonzero(is_min) if min(abs(i - best), GRID_POINTS - abs(i - best)) > 2]
    alternate = None
    if others:
        i2 = min(others, key=lambda i: vals[i])
        phi2 = refine(i2)
        if ls(phi2) <= DEGENERACY_RATIO * res:
            alternate = phi2
    return phi, res, alternate


def run_phase_scan(
    f: FunctionSpec,
    n: int,
    known: CoefficientVector,
    cfg: ProtocolConfig,
    scan: ScanData | None = None,
    exact: bool = False,
) -> PhaseScanResult:
    """Fit arg(c_n) relative to the gauge index from the (n, 0) scan.

    ``known`` holds normalised amplitude estimates for indices 0..n: entries
    below n carry their fitted phases (zero where sub-threshold) and entry n
    carries |c_n| / sqrt(norm_sq); its phase is ignored.
    """
    known.require(Basis.FOCK)
    if len(known) < n + 1:
        raise ValueError(f"known amplitudes must cover index {n}")
    if scan is None:
        scan = collect_scan(f, cfg, exact=exact)
    vals = np.asarray(known.values[: n + 1])
    nonzero = np.flatnonzero(np.abs(vals[:n]) > 0)
    ref = int(nonzero[0]) if nonzero.size else n
    observed = scan.frequencies[:, n, 0]
    if abs(vals[n]) == 0 or nonzero.size == 0:
        return PhaseScanResult(n, cfg.r, scan.thetas, observed, math.nan, math.nan, ref, defined=False,
                               objective=cfg.objective)
    A = _reference_amplitudes(n, cfg, scan.thetas)
    K = A[:, :n] @ vals[:n]
    B = A[:, n] * abs(vals[n])
    phi, res, alt = fit_phase(observed, K, B, cfg.objective, scan.shots)
    return PhaseScanResult(n, cfg.r, scan.thetas, observed, phi, res, ref, alternate_phase=alt,
                           objective=cfg.objective, phase_stderr=_phase_stderr(phi, K, B, scan.shots))


def _phase_stderr(phi, K, B, shots):
    if shots is None:
        return 0.0
    amp = K + np.exp(1j * phi) * B
    P = np.abs(amp) ** 2
    dP = 2 * np.real(np.conj(amp) * 1j * np.exp(1j * phi) * B)
    ok = (P > 0) & (P < 1)
    info = shots * np.sum(dP[ok] ** 2 / (P[ok] * (1 - P[ok])))
    return float(1 / math.sqrt(info)) if info > 0 else math.inf


@dataclass
class Reconstruction:
    coefficients: CoefficientVector
    below_threshold: np.ndarray
    reference_index: int | None


def reconstruct_coefficients(
    mags: list[MagnitudeEstimate], phases: list[PhaseScanResult], tau: float
) -> Reconstruction:
    """Combine magnitudes and fitted phases into c_n = |c_n| e^{i phi_n}.

    The lowest above-threshold index is the gauge reference (phase 0).
    """
    abs_c = np.array([m.abs_c for m in mags])
    below = abs_c <= tau
    by_index = {p.n: p for p in phases if p.defined}
    above = np.flatnonzero(~below)
    ref = int(above[0]) if above.size else None
    vals = np.zeros(abs_c.size, dtype=complex)
    for n in above:
        if n == ref:
            vals[n] = abs_c[n]
            continue
        if n not in by_index:
            raise ValueError(f"missing phase for above-threshold index {n}")
        vals[n] = abs_c[n] * np.exp(1j * by_index[n].phase)
    return Reconstruction(CoefficientVector(vals, Basis.FOCK), below, ref)


@dataclass
class ProtocolReport:
    function: FunctionSpec
    config: ProtocolConfig
    magnitudes: MagnitudeRun
    scans: list[PhaseScanResult]
    reconstruction: Reconstruction
    tau: float
    exact: bool
    timings: dict = field(default_factory=dict)

    def relative_phases(self) -> dict[int, float]:
        c = self.reconstruction.coefficients.values
        return {int(n): float(np.angle(c[n]) % (2 * np.pi)) for n in np.flatnonzero(np.abs(c) > 0)}

    def to_json(self, timings: bool = False) -> dict:
        rec = self.reconstruction
        out = {
            "tool_version": __version__,
            "function": self.function.to_json(),
            "config": self.config.to_json(),
            "exact": self.exact,
            "norm_sq": self.magnitudes.norm_sq,
            "tau": self.tau,
            "reference_index": rec.reference_index,
            "magnitudes": [
                {"n": m.n, "abs": m.abs_c, "stderr": m.stderr, "count": m.count}
                for m in self.magnitudes.estimates
            ],
            "phases": [s.to_json() for s in self.scans],
            "coefficients": [[c.real, c.imag] for c in rec.coefficients.values],
            "below_threshold": [bool(b) for b in rec.below_threshold],
        }
        if timings:
            out["timings"] = self.timings
        return out


def run_protocol(f: FunctionSpec, cfg: ProtocolConfig, exact: bool = False) -> ProtocolReport:
    """Magnitudes, sequential phase bootstrap and reconstruction for c_0..c_N."""
    t0 = time.perf_counter()
    mags = run_magnitude_protocol(f, cfg, exact=exact)
    t1 = time.perf_counter()
    tau = cfg.tau(mags.norm_sq)
    abs_c = np.array([m.abs_c for m in mags.estimates])
    above = np.flatnonzero(abs_c > tau)
    known = np.zeros(cfg.N + 1, dtype=complex)
    scans = []
    if above.size > 1:
        scan = collect_scan(f, cfg, exact=exact)
        norm = math.sqrt(mags.norm_sq)
        known[above[0]] = abs_c[above[0]] / norm
        for n in above[1:]:
            known[n] = abs_c[n] / norm
            res = run_phase_scan(f, int(n), CoefficientVector(known[: n + 1], Basis.FOCK), cfg, scan=scan)
            scans.append(res)
            if res.defined:
                known[n] = abs_c[n] / norm * np.exp(1j * res.phase)
    t2 = time.perf_counter()
    rec = reconstruct_coefficients(mags.estimates, scans, tau)
    return ProtocolReport(
        function=f,
        config=cfg,
        magnitudes=mags,
        scans=scans,
        reconstruction=rec,
        tau=tau,
        exact=exact,
        timings={"magnitude_s": t1 - t0, "phase_s": t2 - t1, "total_s": time.perf_counter() - t0},
    )


def fidelity(a, b) -> float:
    """|<a|b>|^2 for the normalised versions of two amplitude vectors."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    m = max(a.size, b.size)
    a = np.pad(a, (0, m - a.size))
    b = np.pad(b, (0, m - b.size))
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def with_seed(cfg: ProtocolConfig, seed: int) -> ProtocolConfig:
    return replace(cfg, seed=seed)
