"""Command-line front end: ``python3 -m morleyoc <command> [options]``.

Commands
--------
solve        solve on the finest of ``--levels`` and write artifacts
convergence  error table with empirical orders over ``--levels a:b``
export       solve and write a legacy VTK file to ``--out``
mesh         write the (refined) mesh as ``.tmesh`` to ``--out``

Options can also come from a ``key = value`` file given with
``--config``; command-line flags override it.  Exit status is 0 on
success, 1 on usage errors and 2 on runtime failures.
"""

import argparse
import logging
import os
import sys

from .analysis import AnalysisError
from .assembly import AssemblyError
from .element import ElementError
from .linalg import SolveError
from .mesh import MeshError, save_mesh
from .pipeline import (
    ConfigError,
    RunConfig,
    convergence_summary,
    refined_meshes,
    run_convergence,
    run_solve,
    solve_on_mesh,
    write_result_vtk,
)
from .problems import PROBLEMS, ProblemError

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

# config-file keys and the RunConfig field / converter each maps to
_CONFIG_KEYS = {
    "problem": ("problem", str),
    "mesh": ("mesh", str),
    "levels": ("levels", None),
    "beta": ("beta", float),
    "gmax": ("g_max", float),
    "g_max": ("g_max", float),
    "rho": ("rho", float),
    "tol": ("tol", float),
    "max_outer": ("max_outer", int),
    "max-outer": ("max_outer", int),
    "out": ("out", str),
    "vtk": ("vtk", None),
    "log": ("log", None),
    "curvature": ("curvature", None),
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_levels(text):
    """``"3"`` -> [3]; ``"2:5"`` -> [2, 3, 4, 5] (inclusive)."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            a, b = int(a), int(b)
            if b < a:
                raise UsageError(f"empty level range {text!r}")
            return list(range(a, b + 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"cannot parse levels {text!r}; expected 'k' or 'a:b'") from None


def _parse_bool(key, text):
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise UsageError(f"{key}: expected a boolean, got {text!r}")


def read_config_file(path):
    """Parse a flat ``key = value`` file into RunConfig keyword arguments."""
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            name, conv = _CONFIG_KEYS[key]
            try:
                if name == "levels":
                    out[name] = parse_levels(value)
                elif name in ("vtk", "log", "curvature"):
                    out[name] = _parse_bool(key, value)
                else:
                    out[name] = conv(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--problem", help=f"registered problem ({', '.join(sorted(PROBLEMS))})")
    common.add_argument("--mesh", help=".tmesh file for the coarse mesh (default: built-in disk)")
    common.add_argument("--levels", help="refinement level 'k' or inclusive range 'a:b'")
    common.add_argument("--beta", type=float, help="regularisation weight")
    common.add_argument("--gmax", type=float, help="gradient bound (default 1)")
    common.add_argument("--rho", type=float, help="Uzawa step for all multipliers (default beta)")
    common.add_argument("--tol", type=float, help="feasibility and complementarity tolerance")
    common.add_argument("--max-outer", type=int, help="Uzawa iteration cap")
    common.add_argument("--out", help="output directory (file path for export and mesh)")
    common.add_argument("--vtk", action="store_true", default=None, help="also write VTK files")
    common.add_argument("--log", action="store_true", default=None, help="write Uzawa iteration logs")
    common.add_argument(
        "--no-curvature",
        dest="curvature",
        action="store_false",
        default=None,
        help="drop the boundary-curvature term from the system matrix",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")

    parser = _Parser(prog="morleyoc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("solve", parents=[common], help="single solve with artifacts")
    sub.add_parser("convergence", parents=[common], help="convergence study over levels")
    sub.add_parser("export", parents=[common], help="solve and write a VTK file")
    sub.add_parser("mesh", parents=[common], help="write the refined mesh")
    return parser


def config_from_args(args):
    kwargs = read_config_file(args.config) if args.config else {}
    flags = {
        "problem": args.problem,
        "mesh": args.mesh,
        "levels": parse_levels(args.levels) if args.levels is not None else None,
        "beta": args.beta,
        "g_max": args.gmax,
        "rho": args.rho,
        "tol": args.tol,
        "max_outer": args.max_outer,
        "out": args.out,
        "vtk": args.vtk,
        "log": args.log,
        "curvature": args.curvature,
    }
    kwargs.update({k: v for k, v in flags.items() if v is not None})
    name = kwargs.get("problem", RunConfig.problem)
    if name not in PROBLEMS:
        raise UsageError(f"unknown problem {name!r}; registered problems: {', '.join(sorted(PROBLEMS))}")
    try:
        return RunConfig(**kwargs)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _cmd_solve(config):
    res = run_solve(config)
    print(f"level {res.level}: N = {res.space.n_dofs}, converged {res.state.converged} after {res.state.iterations} outer iterations")
    print(res.kkt)
    if res.errors is not None:
        r = res.errors
        print(f"errors: energy {r.energy_err:.6e}  H1 {r.h1_err:.6e}  L2 {r.l2_err:.6e}  control L2 {r.control_l2_err:.6e}")
    print(f"artifacts written to {config.out}")


def _cmd_convergence(config):
    rows = run_convergence(config)
    print(convergence_summary(rows, config.make_problem()), end="")
    print(f"table written to {os.path.join(config.out, 'convergence.csv')}")


def _cmd_export(config):
    problem = config.make_problem()
    level, mesh = list(refined_meshes(config.coarse_mesh(), config.levels[-1:]))[0]
    res = solve_on_mesh(problem, mesh, config.solver_config(), config.curvature, level)
    target = config.out
    parent = os.path.dirname(os.path.abspath(target))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"directory does not exist: {parent}")
    path = write_result_vtk(target, res, problem)
    print(f"wrote {path}")


def _cmd_mesh(config):
    level, mesh = list(refined_meshes(config.coarse_mesh(), config.levels[-1:]))[0]
    path = config.out if os.path.splitext(config.out)[1] else config.out + ".tmesh"
    save_mesh(mesh, path)
    print(
        f"level {level}: {mesh.n_vertices} vertices, {mesh.n_edges} edges, "
        f"{mesh.n_triangles} triangles, h = {mesh.h:.6g}; wrote {path}"
    )


_COMMANDS = {
    "solve": _cmd_solve,
    "convergence": _cmd_convergence,
    "export": _cmd_export,
    "mesh": _cmd_mesh,
}

_RUNTIME_ERRORS = (
    OSError,
    MeshError,
    ElementError,
    AssemblyError,
    AnalysisError,
    SolveError,
    ProblemError,
)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        if args.command in ("export", "mesh") and args.out is None and "out" not in (
            read_config_file(args.config) if args.config else {}
        ):
            raise UsageError(f"{args.command} needs --out <path>")
        _COMMANDS[args.command](config)
    except (UsageError, ConfigError) as exc:
        print(f"morleyoc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        print(f"morleyoc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
