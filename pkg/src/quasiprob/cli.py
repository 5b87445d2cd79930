"""Command line front end: ``python3 -m quasiprob <command> ...``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .checks import DEFAULT_SEED, SUITES, convergence_rows, run_suite
from .errors import AxisOutOfRange, QuasiProbError
from .figures import check_panel, figure_panels
from .io import (
    convergence_to_csv,
    measure_to_csv,
    parse_problem,
    read_measure_csv,
    write_density_csv,
    write_pgm,
)
from .measure import marginal, mh_measure
from .qcf import QcfEvaluator
from .wigner_reg import GAUSSIAN, KERNELS, RAISED_COSINE, GridSpec, regularized_wigner, smear_measure

__all__ = ["main", "build_parser", "cmd_measure", "cmd_render", "cmd_converge", "cmd_marginal", "cmd_qcf", "cmd_verify"]


def _emit(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_measure(problem, m: int, keep_lattice: bool = False, out=None) -> str:
    spec = parse_problem(problem)
    text = measure_to_csv(mh_measure(spec.ops, spec.rho, m, keep_lattice=keep_lattice))
    _emit(text, out)
    return text


def _default_extent(ops, epsilon) -> float:
    reach = max(max(abs(op.lambda_min), abs(op.lambda_max)) for op in ops)
    return reach + 5 * math.sqrt(2 * epsilon)


def _render_paths(out, epsilons):
    out = Path(out)
    if len(epsilons) == 1:
        return [out]
    return [out.with_name(f"{out.stem}_eps{eps:g}{out.suffix or '.pgm'}") for eps in epsilons]


def cmd_render(
    source,
    epsilons,
    grid: int = 256,
    extent: float | None = None,
    out="density.pgm",
    *,
    m: int | None = None,
    wigner: bool = False,
    kernel: str = GAUSSIAN,
    cutoff: float | None = None,
    csv: bool = False,
) -> list:
    """Render a smeared p_MH_m (or regularized p_W) per epsilon; returns written paths."""
    source = Path(source)
    if source.suffix == ".csv":
        mu, ops, rho = read_measure_csv(source), None, None
    else:
        spec = parse_problem(source)
        ops, rho = spec.ops, spec.rho
        if not wigner:
            if m is None:
                raise SystemExit("render: --m is required unless --wigner is given")
            mu = mh_measure(ops, rho, m)
    written = []
    for eps, path in zip(epsilons, _render_paths(out, epsilons)):
        half = extent
        if half is None:
            half = _default_extent(ops, eps) if ops is not None else float(abs(mu.points).max()) + 5 * math.sqrt(2 * eps)
        spec_grid = GridSpec.square(half, grid)
        eps_arg = eps if kernel == GAUSSIAN else None
        if wigner:
            if ops is None:
                raise SystemExit("render: --wigner needs a problem file, not a measure CSV")
            dens = regularized_wigner(ops, rho, eps_arg, spec_grid, kernel=kernel, cutoff=cutoff)
        else:
            dens = smear_measure(mu, eps_arg, spec_grid, kernel=kernel, cutoff=cutoff)
        written.extend(write_pgm(dens, path))
        if csv:
            written.append(write_density_csv(dens, Path(path).with_suffix(".csv")))
    return written


def cmd_figure(figure: int, grid: int, out) -> bool:
    """Write every panel of a figure as PGM + sidecar and print its bump check."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    for panel in figure_panels(figure, grid):
        write_pgm(panel.density, out / f"{panel.name}.pgm")
        result = check_panel(panel)
        ok &= result.ok
        status = "pass" if result.ok else "FAIL"
        print(f"{status}  {panel.name:<20} {result.mode:<12} extrema={result.n_extrema:<4} worst={result.worst_cells:.2f} cells")
    return ok


def cmd_converge(problem, orders, grid: int = 21, extent: float = math.pi, out=None, cutoff: float = math.pi) -> str:
    spec = parse_problem(problem)
    text = convergence_to_csv(convergence_rows(spec.ops, spec.rho, tuple(orders), grid, extent, cutoff=cutoff))
    _emit(text, out)
    return text


def cmd_marginal(problem, m: int, axis: int, out=None) -> str:
    """``axis`` is 1-based here, matching the CSV column names."""
    spec = parse_problem(problem)
    if not 1 <= axis <= spec.ops.n:
        raise AxisOutOfRange(f"axis {axis} is outside 1..{spec.ops.n}")
    text = measure_to_csv(marginal(mh_measure(spec.ops, spec.rho, m), axis - 1))
    _emit(text, out)
    return text


def cmd_qcf(problem, m: int, xi, out=None) -> dict:
    spec = parse_problem(problem)
    ev = QcfEvaluator(spec.ops, spec.rho)
    fw, fmh = ev.f_w(xi), ev.f_mh(m, xi)
    result = {"xi": list(map(float, xi)), "m": m, "f_w": [fw.real, fw.imag], "f_mh": [fmh.real, fmh.imag]}
    _emit(json.dumps(result, indent=2) + "\n", out)
    return result


def cmd_verify(suite: str, seed: int = DEFAULT_SEED, out=None):
    report = run_suite(suite, seed)
    for c in report.checks:
        print(f"{c.status:<4}  {c.name:<45} value={c.value:.3e} tol={c.tolerance:.1e} {c.detail}".rstrip())
    if out is not None:
        Path(out).write_text(report.to_json())
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quasiprob", description="Margenau-Hill and Wigner quasi-probabilities of observable tuples.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("measure", help="write the order-m measure as CSV")
    s.add_argument("problem")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--keep-lattice", action="store_true", help="keep zero-weight lattice points")
    s.add_argument("--out")

    s = sub.add_parser("render", help="render smeared densities as PGM + JSON sidecar")
    s.add_argument("source", nargs="?", help="problem JSON or measure CSV")
    s.add_argument("--m", type=int)
    s.add_argument("--wigner", action="store_true", help="render the regularized Wigner density instead")
    s.add_argument("--epsilon", type=float, nargs="+", default=[0.01])
    s.add_argument("--grid", type=int, default=256)
    s.add_argument("--extent", type=float, help="half width of the square grid")
    s.add_argument("--kernel", choices=KERNELS, default=GAUSSIAN)
    s.add_argument("--cutoff", type=float, help="frequency cutoff of the raised-cosine kernel")
    s.add_argument("--csv", action="store_true", help="also write the grid values as CSV")
    s.add_argument("--figure", type=int, choices=(1, 3, 8), help="render a whole figure panel set into --out (a directory)")
    s.add_argument("--out")

    s = sub.add_parser("converge", help="convergence table over orders m")
    s.add_argument("problem")
    s.add_argument("--m", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    s.add_argument("--grid", type=int, default=21, help="frequency points per axis")
    s.add_argument("--extent", type=float, default=math.pi, help="frequency half width")
    s.add_argument("--cutoff", type=float, default=math.pi, help="raised-cosine cutoff for the smeared column")
    s.add_argument("--out")

    s = sub.add_parser("marginal", help="one-axis marginal of the order-m measure")
    s.add_argument("problem")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--axis", type=int, required=True, help="1-based operator index")
    s.add_argument("--out")

    s = sub.add_parser("qcf", help="evaluate f_W and f_MH_m at one frequency")
    s.add_argument("problem")
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--xi", type=float, nargs="+", required=True)
    s.add_argument("--out")

    s = sub.add_parser("verify", help="run verification suites; exit 1 on any failure")
    s.add_argument("--suite", default="all", choices=[*SUITES, "all"])
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--out", help="write the JSON report here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "measure":
            cmd_measure(args.problem, args.m, args.keep_lattice, args.out)
        elif args.command == "render":
            if args.figure is not None:
                return 0 if cmd_figure(args.figure, args.grid, args.out or f"fig{args.figure}") else 1
            if args.source is None:
                raise SystemExit("render: a problem file or measure CSV is required")
            paths = cmd_render(
                args.source,
                args.epsilon,
                args.grid,
                args.extent,
                args.out or "density.pgm",
                m=args.m,
                wigner=args.wigner,
                kernel=args.kernel,
                cutoff=args.cutoff,
                csv=args.csv,
            )
            for path in paths:
                print(path)
        elif args.command == "converge":
            cmd_converge(args.problem, args.m, args.grid, args.extent, args.out, args.cutoff)
        elif args.command == "marginal":
            cmd_marginal(args.problem, args.m, args.axis, args.out)
        elif args.command == "qcf":
            cmd_qcf(args.problem, args.m, args.xi, args.out)
        elif args.command == "verify":
            return 0 if cmd_verify(args.suite, args.seed, args.out).passed else 1
    except (QuasiProbError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0
