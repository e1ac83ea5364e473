"""Command-line interface.

Every command writes its tables (CSV, 15 significant digits, LF endings),
a JSON payload, and a ``<command>_manifest.json`` listing all files written
into ``--out`` (default: ``$SBCOEFF_OUT`` or the current directory).

Exit codes: 0 ok, 2 bad flags or unknown function, 3 configuration
violation, 4 Fock cutoff overflow, 5 comparison tolerance exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, svg
from .fock import CutoffOverflowError
from .functions import KINDS, Basis, CoefficientVector, FunctionSpec, convert_basis, exact_coefficients
from .protocol import ProtocolConfig, run_magnitude_protocol, run_protocol, target_amplitudes
from .quadrature import ConfigError, QuadratureConfig, project, radial_truncation_factor, truncation_error_norm

SCHEMA_VERSION = 1
OUT_ENV = "SBCOEFF_OUT"

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_CUTOFF, EXIT_TOLERANCE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def parse_function(text: str) -> FunctionSpec:
    """``exp``, ``coherent:RE,IM``, a JSON object, or ``@path`` to a JSON file."""
    text = text.strip()
    try:
        if text.startswith("@"):
            return FunctionSpec.from_json(Path(text[1:]).read_text())
        if text.startswith("{"):
            return FunctionSpec.from_json(text)
        name, _, arg = text.partition(":")
        name = name.lower()
        if name == "coherent":
            re_, _, im = (arg or "0").partition(",")
            return FunctionSpec.coherent(complex(float(re_), float(im or 0)))
        if name == "constant":
            return FunctionSpec.series([1.0])
        return FunctionSpec(name)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        raise argparse.ArgumentTypeError(
            f"invalid function {text!r} ({exc}); builtins: {', '.join(KINDS[:-1])}"
        ) from exc


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.15g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, FunctionSpec):
        return obj.to_json()
    return obj


class Outputs:
    def __init__(self, args):
        self.dir = Path(args.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.args = args
        self.files: list[str] = []

    def _path(self, name):
        self.files.append(name)
        return self.dir / name

    def csv(self, name, header, rows):
        with open(self._path(name), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])

    def json(self, name, payload):
        self._path(name).write_text(json.dumps(_jsonable(payload), indent=2) + "\n", encoding="utf-8")

    def svg(self, name, text):
        self._path(name).write_text(text, encoding="utf-8")

    def manifest(self, command, config, function, seed=None):
        name = f"{command}_manifest.json"
        outputs = self.files + [name]
        payload = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": command,
            "config": config,
            "input_function": function.to_json(),
            "seed": seed,
            "outputs": outputs,
        }
        self.json(name, payload)
        self.files = outputs


def _config_echo(args) -> dict:
    skip = {"func", "command", "function"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _quad_config(args) -> QuadratureConfig:
    return QuadratureConfig(
        method=args.method, radius=args.radius, radial_nodes=args.radial_nodes, angular_nodes=args.angular_nodes
    )


def _protocol_config(args, **extra) -> ProtocolConfig:
    fields = dict(
        N=args.max_degree,
        dim=args.dim if args.dim is not None else args.max_degree + 6,
        seed=args.seed,
        shots_magnitude=args.shots,
        efficiency=args.efficiency,
        loading=args.loading,
    )
    fields.update(extra)
    return ProtocolConfig(**fields)


def cmd_project(args) -> int:
    f, N = args.function, args.max_degree
    cfg = _quad_config(args)
    res = project(f, N, cfg)
    out = Outputs(args)
    c = res.coefficients.values
    out.csv("project.csv", ["n", "re", "im", "abs", "residual"],
            [(n, v.real, v.imag, abs(v), float(res.residual_estimates[n])) for n, v in enumerate(c)])
    out.json("project.json", {"function": f, **res.to_json()})
    if args.plot:
        out.svg("project_bars.svg", svg.bar_chart(np.abs(c), f"|c_n| for {f.label}"))
        out.svg("project_decay.svg", svg.semilog_lines(list(range(N + 1)), {"|c_n|": np.abs(c)},
                                                       f"decay of |c_n| for {f.label}", "|c_n|"))
    out.manifest("project", _config_echo(args), f)
    for n, v in enumerate(c):
        print(f"{n:3d} {v.real: .8f} {v.imag: .8f} {abs(v):.8f}")
    return EXIT_OK


def cmd_exact(args) -> int:
    f, N = args.function, args.max_degree
    a = exact_coefficients(f, N).values
    out = Outputs(args)
    out.csv("exact.csv", ["n", "re", "im", "abs"], [(n, v.real, v.imag, abs(v)) for n, v in enumerate(a)])
    out.json("exact.json", {"function": f, "basis": "monomial", "coefficients": [[v.real, v.imag] for v in a]})
    out.manifest("exact", _config_echo(args), f)
    for n, v in enumerate(a):
        print(f"{n:3d} {v.real: .8f} {v.imag: .8f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    f = args.function
    cfg = _protocol_config(args)
    run = run_magnitude_protocol(f, cfg, exact=args.exact_probabilities)
    truth = np.abs(target_amplitudes(f, cfg).values)
    out = Outputs(args)
    rows = [(m.n, float(truth[m.n]), m.abs_c, m.stderr, m.count) for m in run.estimates]
    out.csv("simulate.csv", ["n", "exact_abs", "abs", "stderr", "count"], rows)
    out.json("simulate.json", {
        "function": f,
        "config": cfg.to_json(),
        "exact_probabilities": args.exact_probabilities,
        "norm_sq": run.norm_sq,
        "magnitudes": [{"n": m.n, "abs": m.abs_c, "stderr": m.stderr, "count": m.count} for m in run.estimates],
        "counts": run.counts.to_json() if run.counts is not None else None,
    })
    if args.plot:
        out.svg("simulate.svg", svg.overlay_chart(truth, [m.abs_c for m in run.estimates],
                                                  [m.stderr for m in run.estimates],
                                                  f"|c_n| for {f.label}: exact vs simulated"))
    out.manifest("simulate", _config_echo(args), f, seed=args.seed)
    print(f"norm_sq = {run.norm_sq:.10g}")
    for n, ex, est, err, cnt in rows:
        print(f"{n:3d} exact {ex:.4e}  sim {est:.4e} +- {err:.1e}  (count {cnt})")
    return EXIT_OK


def cmd_phase_scan(args) -> int:
    f = args.function
    extra = dict(scan_points=args.scan_points, shots_per_point=args.shots_per_point, r=args.r,
                 objective=args.objective, threshold=args.threshold)
    cfg = _protocol_config(args, **extra)
    if args.dim is None:
        cfg = ProtocolConfig(**{**cfg.to_json(), "dim": cfg.min_interference_dim + 3})
    rep = run_protocol(f, cfg, exact=args.exact_probabilities)
    rec = rep.reconstruction
    scans = {s.n: s for s in rep.scans}
    rows = []
    for m in rep.magnitudes.estimates:
        n = m.n
        c = rec.coefficients.values[n]
        if rec.below_threshold[n]:
            phase, resid, flag = math.nan, math.nan, "below_threshold"
        elif n == rec.reference_index:
            phase, resid, flag = 0.0, math.nan, "reference"
        else:
            s = scans[n]
            phase, resid = s.phase, s.residual
            flag = "degenerate" if s.alternate_phase is not None else "ok"
        rows.append((n, c.real, c.imag, abs(c), phase, m.stderr, resid, flag))
    out = Outputs(args)
    out.csv("phase_scan.csv", ["n", "re", "im", "abs", "phase", "stderr_abs", "residual", "flag"], rows)
    out.json("phase_scan.json", rep.to_json(timings=args.timings and not args.deterministic))
    if args.plot:
        out.svg("phase_scan_polar.svg", svg.polar_chart(list(rec.coefficients.values),
                                                        f"c_n in the complex plane, {f.label}"))
    out.manifest("phase-scan", _config_echo(args), f, seed=args.seed)
    print(f"norm_sq = {rep.magnitudes.norm_sq:.10g}, reference index = {rec.reference_index}, "
          f"scans = {len(rep.scans)}")
    for n, re_, im, ab, ph, _, _, flag in rows:
        print(f"{n:3d} {re_: .6f} {im: .6f}  |c|={ab:.6f} phase={ph:.4f} {flag}")
    return EXIT_OK


def cmd_truncation(args) -> int:
    f, N, tail = args.function, args.max_degree, args.tail
    top = N + tail
    if top > 150:
        raise ConfigError(f"max-degree + tail = {top} exceeds factorial guard 150")
    c = exact_coefficients(f, top)
    results = [truncation_error_norm(c, k, tail) for k in range(N + 1)]
    terms = results[-1].terms  # widest window, covers 0..N + tail
    rows = [(k, float(terms[k]), r.norm_sq) for k, r in enumerate(results)]
    out = Outputs(args)
    out.csv("truncation.csv", ["N", "term", "error_norm_sq"], rows)
    out.json("truncation.json", {"function": f, "tail": tail,
                                 "terms": [float(t) for t in terms[: N + 1]],
                                 "error_norm_sq": [r.norm_sq for r in results]})
    if args.plot:
        out.svg("truncation.svg", svg.semilog_lines(
            list(range(N + 1)),
            {"|c_n|^2 n!": [float(t) for t in terms[: N + 1]], "||E_N||^2": [r.norm_sq for r in results]},
            f"truncation error for {f.label}"))
    out.manifest("truncation", _config_echo(args), f)
    for k, t, e in rows:
        print(f"{k:3d} {t:.6e} {e:.6e}")
    return EXIT_OK


def _source(name, args, f):
    """Return (values, sigma or None, kind) for one comparison source."""
    N = args.max_degree
    if name == "exact":
        return exact_coefficients(f, N).values, None, "exact"
    if name == "quadrature":
        return project(f, N, _quad_config(args)).coefficients.values, None, "quadrature"
    if args.seed is None:
        raise UsageError("simulated source requires --seed")
    run = run_magnitude_protocol(f, _protocol_config(args))
    return np.array([m.abs_c for m in run.estimates]), np.array([m.stderr for m in run.estimates]), "simulated"


def cmd_compare(args) -> int:
    f = args.function
    srcs = [_source(s, args, f) for s in args.sources]
    kinds = [k for _, _, k in srcs]
    vals = [v for v, _, _ in srcs]
    if "simulated" in kinds:
        # photon counting sees Fock amplitudes in the loading convention, magnitudes only
        for i, k in enumerate(kinds):
            if k != "simulated" and args.loading == "bargmann":
                vals[i] = convert_basis(CoefficientVector(vals[i], Basis.MONOMIAL), Basis.FOCK).values
        vals = [np.abs(v) for v in vals]
    elif "quadrature" in kinds and "exact" in kinds and not args.unscaled_exact:
        t = np.array([radial_truncation_factor(n, args.radius) for n in range(args.max_degree + 1)])
        vals = [v * t if k == "exact" else v for v, k in zip(vals, kinds)]
    a, b = vals
    if a.size != b.size:
        raise UsageError(f"incompatible lengths {a.size} and {b.size}")
    sigma = next((s for _, s, _ in srcs if s is not None), None)
    dev = np.abs(a - b)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(np.abs(a) > 0, dev / np.abs(a), np.where(dev == 0, 0.0, np.inf))
        zs = dev / sigma if sigma is not None else None
    rows = []
    for n in range(a.size):
        row = [n, complex(a[n]).real, complex(a[n]).imag, complex(b[n]).real, complex(b[n]).imag,
               float(dev[n]), float(rel[n])]
        if zs is not None:
            row += [float(sigma[n]), float(zs[n])]
        rows.append(row)
    header = ["n", f"{kinds[0]}_re", f"{kinds[0]}_im", f"{kinds[1]}_re", f"{kinds[1]}_im", "abs_dev", "rel_dev"]
    if zs is not None:
        header += ["sigma", "dev_sigma"]
    failed = False
    if args.tolerance_sigma is not None and zs is not None:
        failed = bool(np.any(zs > args.tolerance_sigma))
    if args.tolerance is not None:
        failed = failed or bool(dev.max() > args.tolerance)
    summary = {
        "sources": kinds,
        "max_abs_dev": float(dev.max()),
        "max_dev_sigma": float(zs.max()) if zs is not None else None,
        "tolerance": args.tolerance,
        "tolerance_sigma": args.tolerance_sigma,
        "passed": not failed,
    }
    out = Outputs(args)
    out.csv("compare.csv", header, rows)
    out.json("compare.json", {"function": f, "summary": summary})
    out.manifest("compare", _config_echo(args), f, seed=args.seed)
    line = f"max_abs_dev={summary['max_abs_dev']:.3e}"
    if zs is not None:
        line += f" max_dev_sigma={summary['max_dev_sigma']:.3f}"
    print(line + (" FAIL" if failed else " PASS"))
    return EXIT_TOLERANCE if failed else EXIT_OK


def _add_common(p, seed_required=False):
    p.add_argument("--function", required=True, type=parse_function,
                   help="exp|expi|sin|cos|constant|coherent:RE,IM|JSON|@file.json")
    p.add_argument("--max-degree", type=int, default=10)
    p.add_argument("--out", default=os.environ.get(OUT_ENV, "."))
    p.add_argument("--plot", action="store_true")
    p.add_argument("--deterministic", action="store_true", help="suppress all timing metadata")


def _add_quad(p):
    p.add_argument("--method", choices=["riemann", "gauss"], default="gauss")
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--radial-nodes", type=int, default=200)
    p.add_argument("--angular-nodes", type=int, default=64)


def _add_sim(p, seed_required):
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--loading", choices=["direct", "bargmann"], default="direct")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sbcoeff", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="projection coefficients by quadrature")
    _add_common(p)
    _add_quad(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("exact", help="exact Maclaurin coefficients")
    _add_common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="photon-counting magnitude estimates")
    _add_common(p)
    _add_sim(p, seed_required=True)
    p.add_argument("--exact-probabilities", action="store_true", help="infinite-shot limit")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("phase-scan", help="magnitudes plus interferometric phases")
    _add_common(p)
    _add_sim(p, seed_required=True)
    p.add_argument("--scan-points", type=int, default=32)
    p.add_argument("--shots-per-point", type=int, default=100_000)
    p.add_argument("--r", type=float, default=0.8)
    p.add_argument("--objective", choices=["ls", "ml"], default="ls")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--exact-probabilities", action="store_true")
    p.add_argument("--timings", action="store_true", help="include wall-clock per stage in the JSON report")
    p.set_defaults(func=cmd_phase_scan)

    p = sub.add_parser("truncation", help="tail norm ||E_N||^2 of the series")
    _add_common(p)
    p.add_argument("--tail", type=int, default=40)
    p.set_defaults(func=cmd_truncation)

    p = sub.add_parser("compare", help="side-by-side deviations between two sources")
    _add_common(p)
    _add_quad(p)
    _add_sim(p, seed_required=False)
    p.add_argument("--sources", nargs=2, choices=["exact", "quadrature", "simulated"],
                   default=["exact", "quadrature"])
    p.add_argument("--tolerance", type=float, default=None, help="max allowed absolute deviation")
    p.add_argument("--tolerance-sigma", type=float, default=None,
                   help="max allowed deviation in units of the simulated stderr")
    p.add_argument("--unscaled-exact", action="store_true",
                   help="do not attenuate the exact oracle by the disk factor t_n(R)")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CutoffOverflowError as exc:
        hint = f"; try --dim {exc.suggested_dim}" if exc.suggested_dim else ""
        print(f"cutoff overflow: {exc}{hint}", file=sys.stderr)
        return EXIT_CUTOFF
    except (ValueError, OverflowError) as exc:
        print(f"config violation: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
