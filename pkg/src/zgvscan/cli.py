"""Command-line front end.

Subcommands:
    zgv scan      locate points over a wavenumber interval
    zgv disperse  tabulate dispersion branches
    zgv refine    refine a single (k0, omega0) guess
    zgv oracle    brute-force slope-sign-change search (validation)

Inputs are either four MatrixMarket files (--l0 --l1 --l2 --m), the
built-in example21 pencil, or a plate model assembled from a material
file.  Every run writes CSV output plus a JSON manifest that records the
resolved configuration, and (unless --no-plot) a PNG report figure.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

import argparse
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__, mmio, plotting
from .arnoldi import ArnoldiOptions
from .errors import (
    DimensionMismatch,
    InvalidMaterial,
    NonRealEntries,
    ParseError,
    ZgvError,
)
from .pencil import QuadraticPencil
from .refine import classify, gauss_newton, initial_vectors
from .scanner import ScanConfig, scan, trivial_zgv
from .waveguide import (
    Discretization,
    assemble_plate,
    dispersion_sweep,
    example21,
    parse_material,
)
from .waveguide import zgv_oracle as oracle_points

_INPUT_ERRORS = (
    ParseError, DimensionMismatch, NonRealEntries, InvalidMaterial,
    FileNotFoundError, IsADirectoryError, PermissionError, ValueError,
)


def load_pencil(paths):
    """Four MatrixMarket files, in the order L0, L1, L2, M."""
    names = ("l0", "l1", "l2", "m")
    mats = {}
    for name, path in zip(names, paths):
        mats[name] = mmio.read_matrix(path)
    sizes = {name: mats[name].shape for name in names}
    if len({s for s in sizes.values()}) != 1:
        detail = ", ".join(
            f"{name}={path} is {sizes[name][0]}x{sizes[name][1]}"
            for name, path in zip(names, paths)
        )
        raise DimensionMismatch(detail)
    return QuadraticPencil(**mats)


def emit_results(points, grid, out_prefix, manifest=None):
    """Write `<prefix>_zgv.csv` (and `<prefix>_dispersion.csv`,
    `<prefix>_manifest.json` when given).  Returns the written paths."""
    written = []
    if points is not None:
        path = f"{out_prefix}_zgv.csv"
        rows = sorted(points, key=lambda p: (p.k, p.omega))
        with open(path, "w") as fh:
            fh.write("k,omega,classification,residual,omega_gap\n")
            for p in rows:
                fh.write(f"{p.k:.17g},{p.omega:.17g},{p.classification},"
                         f"{p.residual:.17g},{p.omega_gap:.17g}\n")
        written.append(path)
    if grid is not None:
        path = f"{out_prefix}_dispersion.csv"
        with open(path, "w") as fh:
            fh.write("k,branch,omega\n")
            for i, k in enumerate(grid.k_values):
                for j in range(grid.branches):
                    fh.write(f"{k:.17g},{j},{grid.omega[i, j]:.17g}\n")
        written.append(path)
    if manifest is not None:
        path = f"{out_prefix}_manifest.json"
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    return written


def _add_pencil_args(sub):
    sub.add_argument("--l0", metavar="FILE")
    sub.add_argument("--l1", metavar="FILE")
    sub.add_argument("--l2", metavar="FILE")
    sub.add_argument("--m", metavar="FILE", dest="m_file")
    sub.add_argument("--model", choices=["example21", "plate"])
    sub.add_argument("--material", metavar="FILE")
    sub.add_argument("--order", type=int, default=12)
    sub.add_argument("--polarization", choices=["inplane", "full"], default="inplane")


def _add_common_args(sub):
    sub.add_argument("--k-min", type=float, required=True)
    sub.add_argument("--k-max", type=float, required=True)
    sub.add_argument("--out", required=True, metavar="PREFIX")
    sub.add_argument("--seed", type=int, default=20230)
    sub.add_argument("--no-plot", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zgv",
        description="Zero-group-velocity points of quadratic eigenvalue pencils.",
    )
    parser.add_argument("--version", action="version", version=f"zgv {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sc = subs.add_parser("scan", help="scan an interval for points")
    _add_pencil_args(sc)
    _add_common_args(sc)
    sc.add_argument("--dk", type=float, default=None)
    sc.add_argument("--num-eigs", type=int, default=8)
    sc.add_argument("--delta", type=float, default=1e-2)
    sc.add_argument("--threads", type=int, default=1)
    sc.set_defaults(func=cmd_scan)

    dp = subs.add_parser("disperse", help="tabulate dispersion branches")
    _add_pencil_args(dp)
    _add_common_args(dp)
    dp.add_argument("--k-steps", type=int, default=200)
    dp.set_defaults(func=cmd_disperse)

    rf = subs.add_parser("refine", help="refine one (k0, omega0) guess")
    _add_pencil_args(rf)
    rf.add_argument("--k0", type=float, required=True)
    rf.add_argument("--omega0", type=float, required=True)
    rf.add_argument("--out", required=True, metavar="PREFIX")
    rf.add_argument("--seed", type=int, default=20230)
    rf.add_argument("--no-plot", action="store_true")
    rf.set_defaults(func=cmd_refine)

    orc = subs.add_parser("oracle", help="brute-force slope-sign-change search")
    _add_pencil_args(orc)
    _add_common_args(orc)
    orc.add_argument("--dk", type=float, default=None)
    orc.set_defaults(func=cmd_oracle)
    return parser


def _resolve_pencil(args):
    """Returns (pencil, descriptor dict, characteristic k scale)."""
    file_args = [args.l0, args.l1, args.l2, args.m_file]
    if args.model and any(file_args):
        raise ValueError("give either --model or the four matrix files, not both")
    if args.model == "example21":
        return example21(), {"model": "example21"}, 1.0
    if args.model == "plate":
        if not args.material:
            raise ValueError("--model plate requires --material")
        mat = parse_material(args.material)
        disc = Discretization(
            order=args.order,
            polarization="in_plane" if args.polarization == "inplane" else "full",
        )
        pencil = assemble_plate(mat, disc)
        desc = {
            "model": "plate", "material": str(args.material),
            "order": args.order, "polarization": args.polarization,
        }
        return pencil, desc, 1.0 / mat.h
    if all(file_args):
        pencil = load_pencil(file_args)
        return pencil, {"files": [str(p) for p in file_args]}, 1.0
    raise ValueError("choose a --model or give all of --l0 --l1 --l2 --m")


def _manifest(args, inputs, config=None, extra=None):
    doc = {
        "command": args.command,
        "inputs": inputs,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "version": __version__,
        "seed": getattr(args, "seed", None),
    }
    if config is not None:
        doc["config"] = config
    if extra:
        doc.update(extra)
    return doc


def _config_dict(config):
    doc = asdict(config)
    doc["arnoldi"] = asdict(config.arnoldi)
    return doc


def cmd_scan(args):
    pencil, inputs, k_scale = _resolve_pencil(args)
    if args.dk is not None:
        dk = args.dk
    elif args.model is not None:
        dk = 0.1 * k_scale          # example21: 0.1; plate: 0.1 / h
    else:
        dk = (args.k_max - args.k_min) / 20.0
    config = ScanConfig(
        k_a=args.k_min, k_b=args.k_max, dk=dk, m=args.num_eigs, delta=args.delta,
        arnoldi=ArnoldiOptions(m=args.num_eigs, seed=args.seed),
    )
    result = scan(pencil, config, threads=args.threads)
    points = list(result.points)
    if args.k_min > 0.0:
        points.extend(trivial_zgv(pencil))
    points.sort(key=lambda p: (p.k, p.omega))
    grid = None
    if not args.no_plot:
        ks = np.linspace(min(args.k_min, 0.0), args.k_max, 241)
        grid = dispersion_sweep(pencil, ks)
    manifest = _manifest(args, inputs, config=_config_dict(config),
                         extra={"counters": result.counters,
                                "threads": args.threads})
    written = emit_results(points, grid, args.out, manifest=manifest)
    if not args.no_plot:
        written.append(plotting.render_report(
            f"{args.out}_report.png", grid=grid, points=points,
            title="scan " + json.dumps(inputs, sort_keys=True)[:60]))
    for path in written:
        print(path)
    return 0


def cmd_disperse(args):
    pencil, inputs, _ = _resolve_pencil(args)
    if args.k_steps < 1:
        raise ValueError("--k-steps must be >= 1")
    ks = np.linspace(args.k_min, args.k_max, args.k_steps)
    grid = dispersion_sweep(pencil, ks)
    manifest = _manifest(args, inputs, extra={
        "k_min": args.k_min, "k_max": args.k_max, "k_steps": args.k_steps})
    written = emit_results(None, grid, args.out, manifest=manifest)
    if not args.no_plot:
        written.append(plotting.render_report(
            f"{args.out}_report.png", grid=grid))
    for path in written:
        print(path)
    return 0


def cmd_refine(args):
    pencil, inputs, _ = _resolve_pencil(args)
    lam0 = 1j * args.k0
    mu0 = args.omega0 ** 2
    u0, y0 = initial_vectors(pencil, lam0, mu0)
    state = gauss_newton(pencil, u0, y0, lam0, mu0)
    point = classify(pencil, state, k_bound=abs(args.k0))
    manifest = _manifest(args, inputs, extra={
        "k0": args.k0, "omega0": args.omega0,
        "iterations": state.iterations,
        "residual": state.residual_norm,
    })
    written = emit_results([point], None, args.out, manifest=manifest)
    if not args.no_plot:
        written.append(plotting.render_report(
            f"{args.out}_report.png", points=[point]))
    for path in written:
        print(path)
    return 0


def cmd_oracle(args):
    pencil, inputs, k_scale = _resolve_pencil(args)
    dk = args.dk if args.dk is not None else 1e-3 * k_scale
    ks = np.arange(args.k_min, args.k_max + dk / 2.0, dk)
    points = oracle_points(pencil, ks)
    path = f"{args.out}_oracle.csv"
    with open(path, "w") as fh:
        fh.write("k,omega\n")
        for k, w in points:
            fh.write(f"{k:.17g},{w:.17g}\n")
    manifest = _manifest(args, inputs, extra={
        "k_min": args.k_min, "k_max": args.k_max, "dk": dk,
        "count": len(points)})
    written = [path] + emit_results(None, None, args.out, manifest=manifest)
    if not args.no_plot:
        from .refine import ZgvPoint

        marks = [ZgvPoint(k=k, omega=w, u=None, z=None, residual=float("nan"),
                          classification="zgv", omega_gap=float("nan"))
                 for k, w in points]
        coarse = dispersion_sweep(pencil, np.linspace(args.k_min, args.k_max, 241))
        written.append(plotting.render_report(
            f"{args.out}_report.png", grid=coarse, points=marks))
    for path in written:
        print(path)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"zgv: input error: {exc}", file=sys.stderr)
        return 2
    except (ZgvError, OSError) as exc:
        print(f"zgv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
