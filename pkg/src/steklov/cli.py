"""Command-line interface.

Exit codes: 0 success, 1 a verified assertion failed (or a solver did not
converge), 2 malformed input.  Results go to stdout or ``--out`` as JSON
(default) or CSV.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys

import numpy as np

from . import annulus, bounds, catenoid, fem, freeboundary, mesh, moebius

REPORT_VERSION = "1"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steklov",
        description="Steklov spectra of annuli and meshed surfaces, "
        "plus verification of the sharp eigenvalue bounds.",
    )
    parser.add_argument("--tol", type=float, default=None, help="solver tolerance override")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    parser.add_argument("--output", choices=("json", "csv"), default="json")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annulus", help="closed-form spectrum of a flat annulus")
    p.add_argument("--f0", type=float, required=True)
    p.add_argument("--fT", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--nmax", type=int, default=5)

    p = sub.add_parser("critical-modulus", help="branch-crossing modulus for a boundary ratio")
    p.add_argument("--alpha", type=float, required=True)

    p = sub.add_parser("catenoid", help="catenoid family member constants")
    p.add_argument("--a", type=float, default=0.0)

    p = sub.add_parser("fem", help="discrete Steklov spectrum of a mesh file")
    p.add_argument("--mesh", required=True)
    p.add_argument("--count", type=int, default=8)

    p = sub.add_parser("balance", help="center the boundary integral of a mesh")
    p.add_argument("--mesh", required=True)

    p = sub.add_parser("conformal-volume", help="searched volume supremum over ball maps")
    p.add_argument("--mesh", required=True)
    p.add_argument("--objective", choices=("boundary", "area"), default="boundary")

    p = sub.add_parser("check-free-boundary", help="free-boundary residuals of a mesh")
    p.add_argument("--mesh", required=True)

    p = sub.add_parser("verify", help="run the full bound-verification campaign")
    p.add_argument("--config", default=None, help="key=value config file")
    return parser


def _parse_config(path: str | None, seed: int) -> bounds.CampaignConfig:
    values: dict = {"seed": seed}
    if path is not None:
        fields = {f.name: f.type for f in dataclasses.fields(bounds.CampaignConfig)}
        with open(path) as fh:
            for num, raw in enumerate(fh, start=1):
                body = raw.split("#", 1)[0].strip()
                if not body:
                    continue
                if "=" not in body:
                    raise ValueError(f"{path}:{num}: expected key=value, got {body!r}")
                key, _, text = body.partition("=")
                key = key.strip()
                text = text.strip()
                if key not in fields:
                    raise ValueError(f"{path}:{num}: unknown config key {key!r}")
                if key == "disk_levels":
                    values[key] = tuple(int(tok) for tok in text.split(","))
                elif key in ("tol_closed_form", "tol_fem", "balance_tol"):
                    values[key] = float(text)
                else:
                    values[key] = int(text)
    return bounds.CampaignConfig(**values)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(payload: dict, reports: list | None, fmt: str, out: str | None) -> None:
    if fmt == "json":
        doc = {"version": REPORT_VERSION}
        doc.update(_jsonable(payload))
        if reports is not None:
            doc["reports"] = [_jsonable(r.to_dict()) for r in reports]
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        if reports is not None:
            writer.writerow(
                ["instance", "theorem", "lhs", "rhs", "margin", "tolerance", "passed"]
            )
            for r in reports:
                writer.writerow(
                    [r.instance, r.theorem, r.lhs, r.rhs, r.margin, r.tolerance, r.passed]
                )
        else:
            writer.writerow(["key", "value"])
            for key, value in _jsonable(payload).items():
                writer.writerow([key, json.dumps(value) if isinstance(value, (dict, list)) else value])
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _run(args: argparse.Namespace) -> int:
    fmt, out = args.output, args.out
    if args.command == "annulus":
        m = annulus.FlatAnnulus(f0=args.f0, fT=args.fT, T=args.T)
        cls = annulus.classify(m)
        payload = {
            "sigma1": annulus.sigma1(m),
            "sigma1_length": annulus.sigma1_length(m),
            "classification": cls.tag,
            "threshold": cls.threshold,
            "spectrum": annulus.spectrum(m, args.nmax),
        }
        _emit(payload, None, fmt, out)
        return 0
    if args.command == "critical-modulus":
        tol = args.tol if args.tol is not None else 1e-12
        payload = {
            "alpha": args.alpha,
            "critical_modulus": annulus.critical_modulus(args.alpha, tol),
        }
        _emit(payload, None, fmt, out)
        return 0
    if args.command == "catenoid":
        tol = args.tol if args.tol is not None else 1e-12
        member = catenoid.solve_family(args.a, tol)
        payload = dataclasses.asdict(member)
        if args.a == 0.0:
            payload.update(dataclasses.asdict(catenoid.critical_catenoid(tol)))
        _emit(payload, None, fmt, out)
        return 0
    if args.command == "fem":
        m = mesh.load(args.mesh)
        spec = fem.steklov_spectrum(m, args.count)
        payload = {"eigenvalues": spec.eigenvalues, "clusters": spec.clusters}
        _emit(payload, None, fmt, out)
        return 0
    if args.command == "balance":
        m = mesh.load(args.mesh)
        tol = args.tol if args.tol is not None else 1e-10
        bmap = moebius.balance(m, tol=tol)
        bv, w = moebius._boundary_lumped_weights(m)
        pushed = moebius.apply(bmap, m.geometry.coords[bv])
        residual = float(np.abs(w @ pushed).max() / w.sum())
        payload = {"center": bmap.center, "residual": residual}
        _emit(payload, None, fmt, out)
        return 0
    if args.command == "conformal-volume":
        m = mesh.load(args.mesh)
        config = moebius.OptimizerConfig(seed=args.seed)
        if args.objective == "boundary":
            est = moebius.boundary_volume_sup(m, config)
        else:
            est = moebius.relative_volume_sup(m, config)
        payload = {
            "objective": args.objective,
            "best_value": est.best_value,
            "best_center": est.best_map.center,
            "samples": est.samples,
            "converged": est.converged,
        }
        _emit(payload, None, fmt, out)
        return 0
    if args.command == "check-free-boundary":
        m = mesh.load(args.mesh)
        thresholds = freeboundary.FreeBoundaryThresholds()
        if args.tol is not None:
            thresholds = freeboundary.FreeBoundaryThresholds(
                conormal=args.tol, harmonic=args.tol, eigenvalue_one=args.tol
            )
        report = freeboundary.check_free_boundary(m, thresholds)
        ok = report.passes(thresholds)
        payload = dataclasses.asdict(report)
        payload["passed"] = ok
        _emit(payload, None, fmt, out)
        return 0 if ok else 1
    if args.command == "verify":
        config = _parse_config(args.config, args.seed)
        result = bounds.run_campaign(config)
        payload = {"summary": result.summary, "passed": result.passed}
        _emit(payload, list(result.reports), fmt, out)
        return 0 if result.passed else 1
    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (mesh.MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
