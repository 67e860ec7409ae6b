"""Command-line pipeline: geometry -> stencil -> bands/gaps -> soliton -> verify.

Exit codes: 0 success (and, for soliton/verify, every certification check
passed); 2 input/precondition failure (missing or malformed file, lambda
outside every gap, M < 2R+1, solver error with no result); 3 a result
exists but its certification failed.  All outputs are deterministic and
written atomically; re-running a command with identical inputs produces
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import io
from .cell import CellGrid, realspace_stencil
from .errors import CapsolError
from .soliton import ProblemSpec, certify, halfspace_solve, k_sweep
from .spectrum import band_structure, find_gaps

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CERTIFICATION = 3

BANDS_DEFAULT_M = 32


@dataclass
class RunConfig:
    """Global run parameters shared by every subcommand."""

    out: str = "."
    workers: int = 1
    seed: int = 0
    quiet: bool = False

    def say(self, message: str) -> None:
        if not self.quiet:
            print(message)

    def path(self, name: str) -> str:
        os.makedirs(self.out, exist_ok=True)
        return os.path.join(self.out, name)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_kernel(cfg: RunConfig, args) -> int:
    if not os.path.exists(args.geometry_file):
        return _fail(f"geometry file not found: {args.geometry_file}")
    geometry, params = io.load_geometry(args.geometry_file)
    N = args.grid_n or params["grid_n"]
    M = args.bz_grid or params["bz_grid_m"]
    R = args.stencil_radius or params["stencil_radius"]
    if M < 2 * R + 1:
        return _fail(f"BZ grid M = {M} violates M >= 2R+1 = {2 * R + 1}")
    grid = CellGrid(geometry, N)
    stencil = realspace_stencil(geometry, grid, M, R, workers=cfg.workers)
    out = cfg.path("stencil.json")
    io.save_stencil(out, stencil)
    cfg.say(f"stencil: d={stencil.d} radius={stencil.radius} -> {out}")
    cfg.say(
        f"decay fit: alpha={io.fmt(stencil.decay_alpha)} "
        f"beta={io.fmt(stencil.decay_beta)}"
    )
    return EXIT_OK


def _load_stencil_checked(path: str):
    if not os.path.exists(path):
        raise FileNotFoundError(f"stencil file not found: {path}")
    return io.load_stencil(path)


def cmd_bands(cfg: RunConfig, args) -> int:
    stencil = _load_stencil_checked(args.stencil_file)
    M = args.bz_grid
    bands = band_structure(stencil, M)
    out = cfg.path("bands.csv")
    io.atomic_write_text(out, io.bands_to_csv(bands))
    cfg.say(f"bands: M={M} d={bands.d} -> {out}")
    return EXIT_OK


def cmd_gaps(cfg: RunConfig, args) -> int:
    stencil = _load_stencil_checked(args.stencil_file)
    bands = band_structure(stencil, args.bz_grid)
    gaps = find_gaps(bands)
    out = cfg.path("gaps.json")
    io.atomic_write_text(out, io.gaps_to_json(gaps, bands))
    if not gaps:
        cfg.say("no qualifying gap")
    for gap in gaps:
        cfg.say(
            f"gap: ({io.fmt(gap.lower)}, {io.fmt(gap.upper)}) "
            f"width={io.fmt(gap.width)} qualifies={gap.qualifies}"
        )
    cfg.say(f"report -> {out}")
    return EXIT_OK


def _spec_from_problem(problem: dict, *, mirror_symmetric: bool, workers: int = 1):
    """Stencil + gap selection shared by cmd_soliton and cmd_verify."""
    stencil = problem["stencil"]
    if stencil is None:
        params = problem["geometry_params"]
        grid = CellGrid(problem["geometry"], params["grid_n"])
        stencil = realspace_stencil(
            problem["geometry"], grid, params["bz_grid_m"],
            params["stencil_radius"], workers=workers,
        )
    lam = problem["lambda"]
    M = max(BANDS_DEFAULT_M, 2 * stencil.radius + 1)
    bands = band_structure(stencil, M)
    gaps = find_gaps(bands)
    chosen = next((g for g in gaps if g.qualifies and g.contains(lam)), None)
    if chosen is None:
        listing = ", ".join(
            f"({io.fmt(g.lower)}, {io.fmt(g.upper)})" for g in gaps
        ) or "none"
        raise ValueError(
            f"lambda = {lam} lies in no qualifying gap; gaps found: {listing}"
        )
    return ProblemSpec(
        stencil=stencil,
        lam=lam,
        sigma=problem["sigma"],
        V=problem["defect"],
        gap=chosen,
        mirror_symmetric=mirror_symmetric,
    )


def cmd_soliton(cfg: RunConfig, args) -> int:
    if not os.path.exists(args.problem_file):
        return _fail(f"problem file not found: {args.problem_file}")
    problem = io.load_problem_dict(args.problem_file)
    halfspace = problem["halfspace"]
    spec = _spec_from_problem(
        problem, mirror_symmetric=halfspace is not None, workers=cfg.workers
    )

    if halfspace is not None:
        k = problem["k_list"][-1]
        result = halfspace_solve(spec, k, width=halfspace.get("width"))
        out = cfg.path(f"result_strip_k{k}.txt")
        io.atomic_write_text(out, io.result_to_text(result))
        for line in io.certification_lines(result):
            cfg.say(line)
        cfg.say(f"result -> {out}")
        return EXIT_OK if result.all_pass else EXIT_CERTIFICATION

    report = k_sweep(spec, problem["k_list"])
    for res in report.results:
        out = cfg.path(f"result_k{res.a.window.k}.txt")
        io.atomic_write_text(out, io.result_to_text(res))
        cfg.say(f"k={res.a.window.k}: residual={io.fmt(res.residual_norm)} -> {out}")
    sweep_payload = {
        "k_list": list(report.k_list),
        "tails": list(report.tails),
        "converged": report.converged,
        "failures": dict(report.failures),
    }
    io.atomic_write_text(cfg.path("sweep.json"), io.dumps(sweep_payload))
    if not report.results:
        msg = "; ".join(f"k={k}: {m}" for k, m in report.failures.items())
        return _fail(f"no period produced a result ({msg})")
    final = report.results[-1]
    for line in io.certification_lines(final):
        cfg.say(line)
    return EXIT_OK if final.all_pass else EXIT_CERTIFICATION


def cmd_verify(cfg: RunConfig, args) -> int:
    for path in (args.result_file, args.problem_file):
        if not os.path.exists(path):
            return _fail(f"file not found: {path}")
    problem = io.load_problem_dict(args.problem_file)
    with open(args.result_file) as handle:
        header, a = io.result_from_text(handle.read())
    if abs(header["lambda"] - problem["lambda"]) > 0:
        return _fail(
            f"lambda mismatch: result has {header['lambda']}, "
            f"problem has {problem['lambda']}"
        )
    mirror = header["window"]["type"] == "strip"
    spec = _spec_from_problem(problem, mirror_symmetric=mirror, workers=cfg.workers)
    if spec.stencil.d != a.d:
        return _fail(f"dimension mismatch: stencil d={spec.stencil.d}, field d={a.d}")

    recomputed = certify(spec, a)
    stored = header["residual_norm"]
    residual_matches = abs(recomputed.residual_norm - stored) <= 1e-12
    for line in io.certification_lines(recomputed):
        cfg.say(line)
    cfg.say(
        f"stored_residual_matches: {'PASS' if residual_matches else 'FAIL'} "
        f"stored={io.fmt(stored)} recomputed={io.fmt(recomputed.residual_norm)}"
    )
    ok = recomputed.all_pass and residual_matches
    return EXIT_OK if ok else EXIT_CERTIFICATION


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel workers for Brillouin-zone sweeps")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized probes")
    common.add_argument("--quiet", action="store_true",
                        help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="capsol",
        description="Capacitance lattices: stencils, band gaps, gap solitons.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", parents=[common],
                       help="geometry file -> capacitance stencil")
    p.add_argument("geometry_file")
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--bz-grid", type=int, default=None)
    p.add_argument("--stencil-radius", type=int, default=None)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("bands", parents=[common],
                       help="stencil file -> band-structure CSV")
    p.add_argument("stencil_file")
    p.add_argument("--bz-grid", type=int, default=BANDS_DEFAULT_M)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("gaps", parents=[common],
                       help="stencil file -> certified gap report")
    p.add_argument("stencil_file")
    p.add_argument("--bz-grid", type=int, default=BANDS_DEFAULT_M)
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("soliton", parents=[common],
                       help="problem file -> certified soliton result(s)")
    p.add_argument("problem_file")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("verify", parents=[common],
                       help="recompute a result's certification from raw inputs")
    p.add_argument("result_file")
    p.add_argument("problem_file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(out=args.out, workers=args.workers, seed=args.seed,
                    quiet=args.quiet)
    try:
        return args.func(cfg, args)
    except (CapsolError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
