"""Command-line pipelines: generate, embed, validate, render.

Exit codes are script-friendly: 0 success (or certified), 2 usage/input
error, 3 validity violation, 4 solver failure. Every run with the same
inputs and seed writes byte-identical outputs; ``embed`` records the fully
resolved configuration, timings, and output list in a manifest next to the
embedding so a validation step can recover run context.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .generators import GENERATOR_KINDS, TRIANGULATIONS, GeneratorSpec, generate
from .laplacian import build_weights
from .mapping import SEED_STRATEGIES, run_fplm
from .meshio import (
    ParseError,
    mesh_from_json,
    mesh_to_json,
    parse_off,
    parse_tetgen,
    read_embedding_csv,
    render_svg,
    write_embedding_csv,
    write_latent_csv,
)
from .simplicial import detect_boundary, mesh_edges
from .solver import SolveConfig, SolverError
from .validity import audit, count_crossings, crossing_locations

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VIOLATED = 3
EXIT_SOLVER = 4


def _fail(message: str, code: int = EXIT_USAGE) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_mesh(path: str):
    """Read a mesh from .json, .off, or TetGen .node (+ sibling .ele)."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".node":
        ele = p.with_suffix(".ele")
        if not ele.exists():
            raise FileNotFoundError(f"no matching .ele file for {p}")
        return parse_tetgen(p.read_text(), ele.read_text())
    text = p.read_text()
    if suffix == ".off":
        return parse_off(text)
    return mesh_from_json(text)


def _resolve_threads(arg_value):
    """--threads beats FPLM_THREADS; None means library defaults."""
    if arg_value is not None:
        return arg_value
    env = os.environ.get("FPLM_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"FPLM_THREADS must be an integer, got {env!r}")
    return None


def _apply_thread_cap(threads):
    # the bundled solvers are sequential; the cap reins in BLAS pools
    if threads is None:
        return
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ[var] = str(threads)


def _parse_resolution(text: str):
    parts = text.lower().split("x")
    try:
        values = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"resolution must be an integer or AxB, got {text!r}"
        )
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(
            f"resolution entries must be positive, got {text!r}"
        )
    return values


# ------------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    try:
        spec = GeneratorSpec(
            kind=args.kind,
            resolution=args.resolution,
            seed=args.seed,
            triangulation=args.triangulation,
        )
        mesh, latent = generate(spec)
    except ValueError as exc:
        return _fail(str(exc))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(mesh_to_json(mesh))
    written = [str(out)]
    if latent is not None:
        stem = str(out)[: -len(out.suffix)] if out.suffix else str(out)
        latent_path = Path(stem + ".latent.csv")
        latent_path.write_text(write_latent_csv(latent))
        written.append(str(latent_path))

    print(
        f"generated {args.kind}: {mesh.n_vertices} vertices, "
        f"{mesh.n_simplices} simplices (d = {mesh.intrinsic_dim})"
    )
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_embed(args) -> int:
    try:
        threads = _resolve_threads(args.threads)
        _apply_thread_cap(threads)
        config = SolveConfig(
            rel_tol=args.rel_tol, max_iter=args.max_iter, method=args.solver
        )
    except ValueError as exc:
        return _fail(str(exc))

    t0 = time.perf_counter()
    try:
        mesh = _load_mesh(args.mesh)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read mesh {args.mesh}: {exc}")
    t_load = time.perf_counter()

    try:
        embedding = run_fplm(
            mesh,
            gamma=args.gamma,
            seed_strategy=args.seed_strategy,
            config=config,
            seed=args.seed,
            seed_index=args.seed_index,
        )
    except SolverError as exc:
        return _fail(f"solver failed: {exc}", EXIT_SOLVER)
    except ValueError as exc:
        return _fail(str(exc))
    t_embed = time.perf_counter()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(write_embedding_csv(embedding.coords))
    manifest_path = Path(str(out) + ".manifest.json")

    manifest = {
        "command": "embed",
        "config": {
            "mesh": str(args.mesh),
            "gamma": args.gamma,
            "seed_strategy": args.seed_strategy,
            "seed": args.seed,
            "seed_index": args.seed_index,
            "solver": {
                "method": config.method,
                "rel_tol": config.rel_tol,
                "max_iter": config.max_iter,
            },
            "threads": threads,
        },
        "versions": _versions(),
        "result": {
            "branch": embedding.branch,
            "rounds_run": embedding.rounds_run,
            "seed_simplex": embedding.seed_simplex,
            "residuals": embedding.residuals,
            "n_vertices": mesh.n_vertices,
            "n_simplices": mesh.n_simplices,
            "intrinsic_dim": mesh.intrinsic_dim,
        },
        "timings_ms": {
            "load": round((t_load - t0) * 1000.0, 3),
            "embed": round((t_embed - t_load) * 1000.0, 3),
            "write": None,  # patched below, after writing completes
        },
        "outputs": [str(out), str(manifest_path)],
    }
    t_write = time.perf_counter()
    manifest["timings_ms"]["write"] = round((t_write - t_embed) * 1000.0, 3)
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")

    print(f"branch: {embedding.branch}")
    print(f"rounds_run: {embedding.rounds_run}")
    for name, value in embedding.residuals.items():
        print(f"residual {name}: {value:.3e}")
    print(f"wrote {out}")
    print(f"wrote {manifest_path}")
    return EXIT_OK


def _versions() -> dict:
    import scipy

    return {
        "fplm": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def cmd_validate(args) -> int:
    try:
        mesh = _load_mesh(args.mesh)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read mesh {args.mesh}: {exc}")
    try:
        coords = read_embedding_csv(Path(args.embedding).read_text())
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read embedding {args.embedding}: {exc}")
    if coords.shape != (mesh.n_vertices, mesh.intrinsic_dim):
        return _fail(
            f"embedding shape {coords.shape} does not match mesh "
            f"({mesh.n_vertices}, {mesh.intrinsic_dim})"
        )

    manifest_path = args.manifest
    if manifest_path is None:
        sibling = Path(str(args.embedding) + ".manifest.json")
        if sibling.exists():
            manifest_path = str(sibling)
    seed_exclude = None
    if manifest_path is not None:
        try:
            manifest = json.loads(Path(manifest_path).read_text())
        except (OSError, ValueError) as exc:
            return _fail(f"cannot read manifest {manifest_path}: {exc}")
        seed_simplex = manifest.get("result", {}).get("seed_simplex")
        if seed_simplex is not None:
            closed = detect_boundary(mesh).boundary_vertices.size == 0
            if closed:
                # on a closed mesh the seed image covers everything else
                # with opposite orientation; skip it in the histogram
                seed_exclude = int(seed_simplex)

    try:
        report = audit(mesh, coords, seed_exclude=seed_exclude)
    except ValueError as exc:
        return _fail(str(exc))

    text = report.to_text()
    print(text)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
        json_path = Path(str(out) + ".json")
        json_path.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
        print(f"wrote {out}")
        print(f"wrote {json_path}")
    return EXIT_OK if report.verdict == "injective-certified" else EXIT_VIOLATED


def cmd_render(args) -> int:
    try:
        mesh = _load_mesh(args.mesh)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read mesh {args.mesh}: {exc}")
    try:
        coords = read_embedding_csv(Path(args.embedding).read_text())
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read embedding {args.embedding}: {exc}")
    if coords.shape != (mesh.n_vertices, 2):
        return _fail(
            f"rendering needs 2-D coordinates for all {mesh.n_vertices} "
            f"vertices, got shape {coords.shape}"
        )

    markers = None
    if args.mark_crossings:
        edges = mesh_edges(mesh)
        crossing = count_crossings(edges, coords)
        if crossing.count:
            markers = crossing_locations(edges, coords, crossing.pairs)
        print(f"crossings marked: {crossing.count}")

    try:
        svg = render_svg(
            mesh,
            coords,
            highlight_boundary=args.highlight_boundary,
            crossing_points=markers,
        )
    except ValueError as exc:
        return _fail(str(exc))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    print(f"wrote {out}")
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fplm",
        description=(
            "Injective low-dimensional embeddings of simplicial meshes via "
            "fixed-point Laplacian mapping, with geometric certification."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="produce a built-in dataset mesh")
    g.add_argument("--kind", required=True, choices=GENERATOR_KINDS)
    g.add_argument(
        "--resolution",
        required=True,
        type=_parse_resolution,
        help="points per axis (AxB), subdivision level, or cells per axis",
    )
    g.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    g.add_argument(
        "--triangulation",
        choices=TRIANGULATIONS,
        default="structured-grid",
        help="surface triangulation mode (default structured-grid)",
    )
    g.add_argument("--out", required=True, help="mesh JSON output path")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("embed", help="run the fixed-point Laplacian mapping")
    e.add_argument("--mesh", required=True, help="mesh file (.json/.off/.node)")
    e.add_argument(
        "--gamma", type=float, default=0.1, help="weight decay rate (default 0.1)"
    )
    e.add_argument(
        "--seed-strategy",
        choices=SEED_STRATEGIES,
        default="most-interior",
        help="seed simplex selection (default most-interior)",
    )
    e.add_argument(
        "--seed", type=int, default=0, help="RNG seed for random strategies"
    )
    e.add_argument(
        "--seed-index",
        type=int,
        default=0,
        help="simplex index for the fixed-index strategy",
    )
    e.add_argument(
        "--solver",
        choices=("auto", "direct", "iterative"),
        default="auto",
        help="linear solver route (default auto)",
    )
    e.add_argument(
        "--rel-tol",
        type=float,
        default=1e-10,
        help="relative residual tolerance (default 1e-10)",
    )
    e.add_argument(
        "--max-iter", type=int, default=None, help="iteration cap (iterative)"
    )
    e.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap internal thread pools (env FPLM_THREADS as fallback)",
    )
    e.add_argument("--out", required=True, help="embedding CSV output path")
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("validate", help="audit an embedding against its mesh")
    v.add_argument("--mesh", required=True)
    v.add_argument("--embedding", required=True, help="embedding CSV")
    v.add_argument(
        "--manifest",
        default=None,
        help="embed manifest (default: <embedding>.manifest.json if present)",
    )
    v.add_argument("--out", default=None, help="report path (text; JSON beside)")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="draw a 2-D embedding wireframe as SVG")
    r.add_argument("--mesh", required=True)
    r.add_argument("--embedding", required=True, help="embedding CSV")
    r.add_argument("--out", required=True, help="SVG output path")
    r.add_argument("--highlight-boundary", action="store_true")
    r.add_argument("--mark-crossings", action="store_true")
    r.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        return _fail(str(exc))
    except SolverError as exc:
        return _fail(f"solver failed: {exc}", EXIT_SOLVER)


if __name__ == "__main__":
    sys.exit(main())
