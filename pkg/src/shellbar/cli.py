"""Command-line driver: ``shellbar run|sweep|field|demo``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import benchmarks, io
from .bbar import METHODS, timoshenko_demo
from .errors import ConfigError, GeometryError, SingularityError

log = logging.getLogger("shellbar")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for numerical failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _str_list(text: str) -> list[str]:
    out = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in out if t not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {list(METHODS)}")
    return out


def _add_common(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--case", choices=sorted(benchmarks.CASES), help="built-in benchmark")
    src.add_argument("--config", type=Path, help="JSON model/case document")
    p.add_argument("--degree", type=int, default=2, help="polynomial degree after elevation (default 2)")
    p.add_argument("--thickness", type=float, default=None, help="override the shell thickness")
    p.add_argument("--distort-mode", choices=("expansion", "rotation"), default=None)
    p.add_argument("--distort-stage", type=float, default=None, help="distortion index e or r")
    p.add_argument("--drilling-penalty", type=float, default=1e-8)
    p.add_argument("--out", type=Path, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shellbar", description="Isogeometric Reissner-Mindlin shells with local B-bar projection.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="one analysis, one CSV row")
    _add_common(run)
    run.add_argument("--method", choices=METHODS, default="glb")
    run.add_argument("--mesh", type=int, default=8, help="elements per direction")
    run.add_argument("--rank", action="store_true", help="also compute the stiffness rank")

    sweep = sub.add_parser("sweep", help="convergence study over methods and meshes")
    _add_common(sweep)
    sweep.add_argument("--methods", type=_str_list, default=None, help="comma list, e.g. iga,glb")
    sweep.add_argument("--method", choices=METHODS, default=None)
    sweep.add_argument("--meshes", type=_int_list, default=None, help="comma list, e.g. 2,4,8,16")
    sweep.add_argument("--mesh", type=int, default=None)
    sweep.add_argument("--degrees", type=_int_list, default=None)
    sweep.add_argument("--rank", action="store_true")

    field = sub.add_parser("field", help="solve and export the sampled displacement field")
    _add_common(field)
    field.add_argument("--method", choices=METHODS, default="glb")
    field.add_argument("--mesh", type=int, default=8)
    field.add_argument("--format", choices=("vtk", "csv"), default="vtk")
    field.add_argument("--density", type=int, default=2, help="samples per element and direction")
    field.add_argument("--deformed", action="store_true", help="sample on the deformed mid-surface")

    demo = sub.add_parser("demo", help="small worked examples")
    demo.add_argument("name", choices=("timoshenko", "cases"))
    return parser


def _case(args) -> benchmarks.BenchmarkCase:
    if args.case is not None:
        case = benchmarks.get_case(args.case)
    else:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        case = benchmarks.case_from_config(text)
    if args.thickness is not None:
        if args.thickness <= 0:
            raise ConfigError("thickness must be positive")
        case = case.with_thickness(args.thickness)
    return case


def _distortion(args):
    if args.distort_mode is None:
        if args.distort_stage is not None:
            raise ConfigError("--distort-stage needs --distort-mode")
        return None
    return benchmarks.DistortionSpec(args.distort_mode, args.distort_stage or 0.0)


def _summary(r) -> str:
    rank = "" if r.rank is None else f" rank={r.rank}"
    if r.error:
        return f"{r.case} {r.method} p={r.degree} mesh={r.mesh} h={r.thickness:g}: FAILED ({r.error})"
    return (
        f"{r.case} {r.method} p={r.degree} mesh={r.mesh} h={r.thickness:g}: "
        f"monitor={r.monitor:.6e} normalized={r.normalized:.6f}{rank} ({r.seconds:.2f} s)"
    )


def _cmd_run(args) -> int:
    case = _case(args)
    r = benchmarks.run_case(
        case, args.method, args.degree, args.mesh, None, _distortion(args), args.drilling_penalty, args.rank
    )
    print(_summary(r))
    if args.out:
        io.write_results([r], args.out)
    return 0


def _cmd_sweep(args) -> int:
    case = _case(args)
    methods = args.methods or ([args.method] if args.method else ["iga", "glb"])
    meshes = args.meshes or ([args.mesh] if args.mesh else [2, 4, 8, 16])
    degrees = args.degrees or [args.degree]
    results = benchmarks.run_study(
        [case], methods, degrees, meshes, distortion=_distortion(args),
        drilling_penalty=args.drilling_penalty, rank=args.rank,
    )
    for r in results:
        print(_summary(r))
    if args.out:
        io.write_results(results, args.out)
    return 2 if any(r.error for r in results) else 0


def _cmd_field(args) -> int:
    case = _case(args)
    if args.density < 1:
        raise ConfigError("--density must be at least 1")
    r, model, u = benchmarks.run_case(
        case, args.method, args.degree, args.mesh, None, _distortion(args), args.drilling_penalty,
        return_solution=True,
    )
    print(_summary(r))
    out = args.out or Path(f"{case.name}_{args.method}_{args.mesh}.{args.format}")
    io.export_field(u, model, args.density, out, args.format, args.deformed)
    print(f"field written to {out}")
    return 0


def _cmd_demo(args) -> int:
    if args.name == "timoshenko":
        c = timoshenko_demo()
        print("projected shear strain coefficients on (w1, w2, theta1, theta2):")
        print(" ".join(f"{x:+.15g}" for x in c))
        return 0
    for name in sorted(benchmarks.CASES):
        case = benchmarks.get_case(name)
        print(f"{name}: reference {case.reference:g} ({case.notes}), h={case.model.thickness:g}")
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "field": _cmd_field, "demo": _cmd_demo}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (SingularityError, GeometryError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
