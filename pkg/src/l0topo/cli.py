"""Command line entry point: ``l0topo --preset l0_elliptic --n 32``.

Exit codes: 0 optimal stop, 2 line search failed, 3 iteration limit,
64 usage error, 66 unreadable config or input file.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import io
from .descent import DescentConfig, minimizing_sequence_check, run_descent
from .diagnostics import diagnostics_suite
from .errors import InvalidArgument, L0TopoError
from .fem import assemble
from .kernels import BACKEND
from .mesh import build_mesh
from .problem import PRESETS, format_config, load_config, preset, spec_from_params

EX_USAGE = 64
EX_NOINPUT = 66

PROBLEM_KEYS = ("pde", "law", "alpha", "beta", "ua", "ub", "yd", "lx", "ly", "domain_inferred")
RUN_DEFAULTS = {
    "n": "32",
    "a0": "full",
    "delta_tol": "0",
    "max_iters": "100",
    "tau": "0.5",
    "sigma": "0.1",
    "rho_inf_tol": "1e-12",
    "support_min": "3",
    "t_min": "1e-8",
    "tol_sub": "1e-10",
    "warm_start": "true",
    "seed": "0",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="l0topo", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", metavar="FILE", help="key=value problem/run description")
    p.add_argument("--n", type=int, help="cells per side")
    p.add_argument("--a0", help="initial set: full, empty or file:PATH (cell_index,flag CSV)")
    p.add_argument("--delta-tol", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--out", default="l0topo-out", metavar="DIR")
    p.add_argument("--dump", choices=("none", "summary", "full"), default="summary")
    p.add_argument("--diagnostics", choices=("none", "flip", "expansion", "stability"),
                   default="none")
    p.add_argument("--seed", type=int, help="seed for diagnostic sampling")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def resolve(args) -> dict:
    """Merge preset or config file with command line overrides into string params."""
    params = {}
    if args.config:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise FileNotFoundError(str(exc)) from exc
        name = cfg.get("preset")
        if name:
            params.update(preset(name).params)
            params["preset"] = name
        params.update(cfg)
    else:
        params.update(preset(args.preset).params)
        params["preset"] = args.preset
    for key, value in RUN_DEFAULTS.items():
        params.setdefault(key, value)
    overrides = {"n": args.n, "a0": args.a0, "delta_tol": args.delta_tol,
                 "max_iters": args.max_iters, "seed": args.seed}
    for key, value in overrides.items():
        if value is not None:
            params[key] = str(value)
    return params


def _initial_set(spec_a0: str, mesh):
    if spec_a0 in ("full", "empty"):
        return spec_a0
    if spec_a0.startswith("file:"):
        return io.read_cellset_csv(spec_a0[len("file:"):], mesh)
    raise InvalidArgument(f"bad initial set {spec_a0!r}")


def descent_config(params: dict, mesh) -> DescentConfig:
    return DescentConfig(
        tau=float(params["tau"]),
        sigma_armijo=float(params["sigma"]),
        delta_tol=float(params["delta_tol"]),
        rho_inf_tol=float(params["rho_inf_tol"]),
        support_min=int(params["support_min"]),
        max_iters=int(params["max_iters"]),
        t_min=float(params["t_min"]),
        tol_sub=float(params["tol_sub"]),
        warm_start=params["warm_start"].lower() in ("1", "true", "yes"),
        initial_set=_initial_set(params["a0"], mesh),
    )


def write_meta(path, params: dict, mesh, res, elapsed: float) -> None:
    lines = [f"{k}={params[k]}" for k in params]
    lines += [
        f"h={mesh.h!r}",
        f"cells={mesh.n_cells}",
        f"backend={BACKEND}",
        f"J={res.J!r}",
        f"chi_l1={res.final_set.measure!r}",
        f"rho_l1={res.final_topo.rho_l1!r}",
        f"iters={res.outer_iterations}",
        f"stop={res.stop_reason.value}",
        f"elapsed_s={elapsed:.3f}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run(params: dict, out: Path | None, dump: str, diagnostics: str = "none"):
    spec = spec_from_params({k: params[k] for k in PROBLEM_KEYS if k in params},
                            preset_name=params.get("preset"))
    n = int(params["n"])
    if n < 1:
        raise InvalidArgument("--n must be positive")
    mesh = build_mesh(*spec.domain, n)
    ops = assemble(mesh, spec.pde)
    cfg = descent_config(params, mesh)
    t0 = time.perf_counter()
    res = run_descent(spec, ops, cfg)
    elapsed = time.perf_counter() - t0

    if out is not None and dump != "none":
        out.mkdir(parents=True, exist_ok=True)
        io.write_history_csv(out / "history.csv", res.history)
        (out / "config.txt").write_text(format_config(params), encoding="utf-8")
        write_meta(out / "meta.txt", params, mesh, res, elapsed)
        if dump == "full":
            io.write_cellset_pgm(out / "final_set.pgm", res.final_set)
            io.write_cellset_csv(out / "final_set.csv", res.final_set)
            io.write_field_csv(out / "u.csv", res.final_solution.u)
            io.write_field_csv(out / "y.csv", res.final_solution.y)
            io.write_field_csv(out / "p.csv", res.final_solution.p)
            io.write_p0_pgm(out / "u.pgm", mesh, res.final_solution.u)
            io.write_topo_csv(out / "topo.csv", res.final_topo)
            io.write_p0_pgm(out / "dj.pgm", mesh, res.final_topo.dj)

    report = None
    if diagnostics != "none":
        kwargs = {"seed": int(params["seed"])}
        if diagnostics in ("expansion", "stability"):
            kwargs["n"] = n
        report = diagnostics_suite(diagnostics, spec, **kwargs)
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"diagnostics_{diagnostics}.csv").write_text(report.to_csv(), encoding="utf-8")
    return res, report


def summary_line(res) -> str:
    return (f"J={res.J:.10g} chi_l1={res.final_set.measure:.10g} "
            f"rho_l1={res.final_topo.rho_l1:.3e} iters={res.outer_iterations} "
            f"stop={res.stop_reason.value}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        params = resolve(args)
    except FileNotFoundError as exc:
        print(f"l0topo: cannot read config: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except InvalidArgument as exc:
        print(f"l0topo: {exc}", file=sys.stderr)
        return EX_USAGE
    try:
        res, report = run(params, Path(args.out), args.dump, args.diagnostics)
    except OSError as exc:
        print(f"l0topo: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except (InvalidArgument, ValueError) as exc:
        print(f"l0topo: {exc}", file=sys.stderr)
        return EX_USAGE
    except L0TopoError as exc:
        print(f"l0topo: solver error: {exc}", file=sys.stderr)
        return 1
    print(summary_line(res))
    if report is not None:
        print(report.format())
    if not minimizing_sequence_check(res.history, float(params["sigma"]), float(params["delta_tol"])):
        logging.getLogger(__name__).warning("history fails the minimizing-sequence check")
    return res.stop_reason.exit_code


if __name__ == "__main__":
    sys.exit(main())
