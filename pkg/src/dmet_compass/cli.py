"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical or solver failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import logging
import random
import sys
import tempfile
from pathlib import Path

import numpy as np

from .chem import FcidumpParseError, read_fcidump, write_atom_map, write_fcidump
from .chem.scf import inverse_sqrt
from .config import ConfigError, RunConfig, load_config
from .driver import SOLVERS, DmetResult, HChainSystem, build_context, load_integrals, run_dmet
from .embedding import InvalidActiveSpaceError, InvalidSchemeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

CSV_COLUMNS = (
    "geometry_id",
    "method",
    "E_total",
    "mu",
    "cycles",
    "avg_params",
    "avg_cnots",
    "converged",
    "E_reference",
    "deviation",
)

logger = logging.getLogger("dmet_compass")


class SolverError(RuntimeError):
    pass


def _num(x) -> str:
    return "" if x is None else f"{x:.12g}"


def csv_row(geometry_id: str, result: DmetResult, reference: float | None = None) -> dict:
    params, cnots = result.average_resources()
    return {
        "geometry_id": geometry_id,
        "method": result.solver,
        "E_total": _num(result.energy),
        "mu": _num(result.mu),
        "cycles": str(result.cycles),
        "avg_params": _num(params),
        "avg_cnots": _num(cnots),
        "converged": "1" if result.converged else "0",
        "E_reference": _num(reference),
        "deviation": _num(None if reference is None else result.energy - reference),
    }


def write_csv(path, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _parse_solvers(text: str | None, fallback) -> tuple[str, ...]:
    if text is None:
        return tuple(fallback)
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [n for n in names if n not in SOLVERS]
    if bad:
        raise ConfigError(f"unknown solver(s) {', '.join(bad)}; valid solvers: {', '.join(SOLVERS)}", "--solvers")
    if not names:
        raise ConfigError("no solvers given", "--solvers")
    return names


def _reference_solver(solvers) -> str:
    return "fci" if "fci" in solvers else solvers[0]


def _fragment_table(result: DmetResult) -> str:
    last = result.trace[-1]
    lines = ["  fragment  E_fragment          params   cnots"]
    for i, (e, r) in enumerate(zip(last.fragment_energies, last.resources)):
        lines.append(f"  {i:>8d}  {e:>18.10f}  {r.n_parameters:>6d}  {r.n_cnot:>6d}")
    return "\n".join(lines)


def _check(result: DmetResult, where: str) -> None:
    if not result.converged:
        raise SolverError(
            f"{where}: DMET did not converge after {result.cycles} cycles (last dN={result.residual:.3e}, mu={result.mu:.10g})"
        )


def cmd_run(cfg: RunConfig, args) -> int:
    solver = cfg.dmet.solver if args.solvers is None else _parse_solvers(args.solvers, ())[0]
    result = run_dmet(cfg.dmet.with_solver(solver))
    print(f"system      {cfg.geometry_id}")
    print(f"solver      {solver}")
    print(f"E_total     {result.energy:.12f}")
    print(f"mu_gl       {result.mu:.12g}")
    print(f"dN          {result.residual:.3e}")
    print(f"cycles      {result.cycles}")
    print(f"converged   {result.converged}")
    print(_fragment_table(result))
    csv_path = args.csv or cfg.csv
    if csv_path:
        write_csv(csv_path, [csv_row(cfg.geometry_id, result)])
    _check(result, f"{cfg.geometry_id}/{solver}")
    return EXIT_OK


def scan_grid(start: float, stop: float, points: int) -> list[float]:
    if points < 1:
        raise ConfigError("--points must be at least 1", "--points")
    if points == 1:
        return [float(start)]
    return [float(x) for x in np.linspace(start, stop, points)]


def cmd_scan(cfg: RunConfig, args) -> int:
    system = cfg.dmet.system
    if not isinstance(system, HChainSystem):
        raise ConfigError("scan needs an h_chain system", "system")
    solvers = _parse_solvers(args.solvers, cfg.solvers)
    start = system.d if args.start is None else args.start
    stop = start if args.stop is None else args.stop
    grid = scan_grid(start, stop, args.points)
    ref_name = _reference_solver(solvers) if len(solvers) > 1 else None
    rows, failures = [], []
    print(f"{'d':>8}  {'method':<8}  {'E_total':>18}  {'deviation':>12}  cycles")
    for d in grid:
        point = dataclasses.replace(cfg.dmet, system=dataclasses.replace(system, d=d))
        gid = f"H{system.n}-{system.topology}-d{d:g}"
        ctx = build_context(point)
        results = {}
        for s in solvers:
            try:
                results[s] = run_dmet(point.with_solver(s), ctx)
            except Exception as exc:
                failures.append(f"{gid}/{s}: {exc}")
                logger.error("%s/%s failed: %s", gid, s, exc)
        ref = results[ref_name].energy if ref_name in results else None
        for s in solvers:
            if s not in results:
                continue
            r = results[s]
            rows.append(csv_row(gid, r, ref))
            dev = "" if ref is None else f"{r.energy - ref:12.3e}"
            print(f"{d:8.4f}  {s:<8}  {r.energy:18.10f}  {dev:>12}  {r.cycles}")
            if not r.converged:
                failures.append(f"{gid}/{s}: not converged")
    csv_path = args.csv or cfg.csv
    if csv_path:
        write_csv(csv_path, rows)
    if failures:
        raise SolverError("; ".join(failures))
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    solvers = _parse_solvers(args.solvers, cfg.solvers)
    if len(solvers) < 2:
        raise ConfigError("compare needs at least two solvers", "--solvers")
    ctx = build_context(cfg.dmet)
    results = [run_dmet(cfg.dmet.with_solver(s), ctx) for s in solvers]
    ref = results[0].energy
    print(f"{'method':<8}  {'E_total':>18}  {'deviation':>12}  {'avg_params':>10}  {'avg_cnots':>10}  cycles")
    for s, r in zip(solvers, results):
        p, c = r.average_resources()
        print(f"{s:<8}  {r.energy:18.10f}  {r.energy - ref:12.3e}  {p:10.2f}  {c:10.1f}  {r.cycles}")
    csv_path = args.csv or cfg.csv
    if csv_path:
        write_csv(csv_path, [csv_row(cfg.geometry_id, r, ref) for r in results])
    for s, r in zip(solvers, results):
        _check(r, f"{cfg.geometry_id}/{s}")
    return EXIT_OK


def cmd_fcidump_roundtrip(args) -> int:
    """Write integrals to FCIDUMP, read them back and report the largest difference."""
    if args.fcidump:
        src = Path(args.fcidump)
        if not src.is_file():
            raise ConfigError(f"FCIDUMP file not found: {src}", "--fcidump")
        ints = read_fcidump(src, args.atom_map)
    elif args.config:
        ints = load_integrals(load_config(args.config).dmet.system)
        # FCIDUMP stores an orthonormal basis; use the local orthogonal orbitals
        ints = ints.rotated(inverse_sqrt(ints.overlap))
    else:
        raise ConfigError("give --config or --fcidump")
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(args.output) if args.output else Path(tmp) / "roundtrip.fcidump"
        write_fcidump(ints, out)
        amap = out.with_suffix(".atoms")
        write_atom_map(ints.orbital_atoms, amap)
        back = read_fcidump(out, amap)
    diff = max(
        float(np.abs(back.core - ints.core).max()),
        float(np.abs(back.eri - ints.eri).max()),
        abs(back.e_nuc - ints.e_nuc),
    )
    print(f"orbitals    {ints.n_orb}")
    print(f"electrons   {ints.n_electrons}")
    print(f"max |diff|  {diff:.3e}")
    if diff > 1e-12 or back.n_electrons != ints.n_electrons or back.orbital_atoms != ints.orbital_atoms:
        raise SolverError(f"round trip changed the integrals (max diff {diff:.3e})")
    return EXIT_OK


@contextlib.contextmanager
def _forbid_rng():
    """Make any use of the global or generator RNG APIs raise."""

    def boom(*_a, **_k):
        raise AssertionError("random number generation used in a --seedless run")

    saved = [(np.random, "default_rng"), (np.random, "random"), (np.random, "rand"), (np.random, "randn")]
    saved += [(random, "random"), (random, "randint"), (random, "uniform")]
    originals = [(mod, name, getattr(mod, name)) for mod, name in saved]
    for mod, name, _ in originals:
        setattr(mod, name, boom)
    try:
        yield
    finally:
        for mod, name, fn in originals:
            setattr(mod, name, fn)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmet-compass", description="DMET with variational fragment solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="YAML run configuration")
        p.add_argument("--csv", help="CSV output path (overrides output.csv)")
        p.add_argument("--solvers", help="comma-separated solver list")
        p.add_argument("--seedless", action="store_true", help="fail if any random number generator is used")
        p.add_argument("-v", "--verbose", action="count", default=0)

    common(sub.add_parser("run", help="single DMET calculation"))
    scan = sub.add_parser("scan", help="bond-length scan of an H chain")
    common(scan)
    scan.add_argument("--from", dest="start", type=float)
    scan.add_argument("--to", dest="stop", type=float)
    scan.add_argument("--points", type=int, default=1)
    common(sub.add_parser("compare", help="several solvers on one embedding"))
    rt = sub.add_parser("fcidump-roundtrip", help="write and re-read integrals (debug)")
    common(rt, needs_config=False)
    rt.add_argument("--fcidump", help="existing FCIDUMP to round-trip")
    rt.add_argument("--atom-map", help="atom map for --fcidump")
    rt.add_argument("--output", help="keep the written FCIDUMP here")
    return parser


def _setup_logging(verbosity: str, extra: int) -> None:
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}[verbosity]
    if extra:
        level = logging.DEBUG if extra > 1 else min(level, logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _forbid_rng() if args.seedless else contextlib.nullcontext():
            if args.command == "fcidump-roundtrip":
                _setup_logging("quiet", args.verbose)
                return cmd_fcidump_roundtrip(args)
            cfg = load_config(args.config)
            _setup_logging(cfg.verbosity, args.verbose)
            handler = {"run": cmd_run, "scan": cmd_scan, "compare": cmd_compare}[args.command]
            return handler(cfg, args)
    except (ConfigError, InvalidSchemeError, InvalidActiveSpaceError, FcidumpParseError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # numerical or solver failure, including SolverFailure(fragment, mu)
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
