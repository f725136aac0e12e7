"""Batch experiment driver.

Subcommands:
    converge  refinement study of a registered manufactured case
    pulse     steady pulse suite over dispersal rates plus the classical
              diffusion reference
    oracle    finite-element vs trigonometric-Galerkin comparison
    single    one run of an arbitrary configuration to final time

Every run directory receives a manifest embedding the fully resolved
configuration (reusable via --config for byte-identical regeneration),
convention notes, and summary results.  Numeric output is CSV at full
round-trip precision with LF line endings.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 steady-state budget exceeded.
"""

import argparse
import configparser
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import (BcMode, assemble_local, assemble_nonlocal, dump_matrix)
from .config import (ConfigError, RunConfig, config_sections, make_config,
                     read_config_file, validate_config)
from .kernels import DispersalExp, laplacian_scale
from .mesh import Region, build_uniform
from .mms import CASE_LEVELS, CASE_TAU_RULES, MMS_CASES, convergence_study
from .spectral import SpectralBasis, l2_field_difference, solve_spectral
from .stepping import (FactorizationFailure, MaxStepsExceeded, NonFiniteState,
                       PhysicalParams, Stepper, StepperState)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_MAX_STEPS = 4

# convention notes recorded in every manifest
_CONVENTIONS = {
    "collar_source": "constraint rows carry q = -d * K(exact) on the collar",
    "initial_data": "nodal interpolation of the initial fields",
    "table_error_metric": "relative mass-norm distance to the nodal interpolant",
    "steady_criterion": "max over species of relative L2(omega) step change",
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if value != value:  # nan
            return ""
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(path: Path, cfg: RunConfig, results: dict,
                   wall_time: float) -> None:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    for section, body in config_sections(cfg).items():
        parser[section] = body
    parser["provenance"] = {"version": __version__,
                            "wall_time_seconds": f"{wall_time:.3f}"}
    parser["conventions"] = _CONVENTIONS
    parser["results"] = {k: _fmt(v) for k, v in results.items()}
    with open(path, "w", newline="\n") as fh:
        parser.write(fh)


def _region_name(tag: int) -> str:
    return "interior" if tag == Region.INTERIOR else "collar"


def write_profile(path: Path, mesh, state: StepperState) -> None:
    rows = ((x, u, v, _region_name(r)) for x, u, v, r in
            zip(mesh.nodes, state.u, state.v, mesh.node_region))
    write_csv(path, ["x", "u", "v", "region"], rows)


def write_trace(path: Path, trace) -> None:
    rows = zip(trace.steps, trace.times, trace.norm_u, trace.norm_v,
               trace.criterion)
    write_csv(path, ["step", "t", "norm_u", "norm_v", "criterion"], rows)


def _dump_operators(ops, out_dir: Path) -> None:
    for name in ("mass_omega", "coupling", "gamma_mass", "nonlocal_op",
                 "laplacian"):
        matrix = getattr(ops, name)
        if matrix is not None:
            dump_matrix(matrix, out_dir / f"{name}.txt")


def classify_pulse_profile(x: np.ndarray, v: np.ndarray,
                           window: tuple[float, float] = (-5.0, 5.0)) -> dict:
    """Nodal peak classification of a steady profile.

    A local maximum is a node strictly above both neighbors (ties break
    leftmost by construction of the strict test).  The profile is a
    "batman" when the node nearest zero is a strict local minimum and
    exactly two maxima lie in the window; a "single" pulse has exactly
    one maximum there.
    """
    inside = np.flatnonzero((x >= window[0]) & (x <= window[1]))
    maxima = [i for i in inside
              if 0 < i < len(x) - 1 and v[i] > v[i - 1] and v[i] > v[i + 1]]
    i0 = int(np.argmin(np.abs(x)))
    v0_is_min = bool(0 < i0 < len(x) - 1
                     and v[i0] < v[i0 - 1] and v[i0] < v[i0 + 1])
    if v0_is_min and len(maxima) == 2:
        kind = "batman"
    elif len(maxima) == 1:
        kind = "single"
    else:
        kind = "other"
    return {"kind": kind, "maxima_x": [float(x[i]) for i in maxima],
            "v0_is_min": v0_is_min, "v_max": float(v.max())}


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_converge(cfg: RunConfig) -> int:
    t0 = time.time()
    case = MMS_CASES[cfg.case]
    levels = CASE_LEVELS[cfg.case][:cfg.levels]
    report = convergence_study(case, levels, CASE_TAU_RULES[cfg.case])
    out = _out_dir(cfg)
    write_csv(out / "convergence.csv",
              ["level", "h", "tau", "nodes", "elements",
               "err_u", "rate_u", "err_v", "rate_v"],
              report.rows())
    results = {}
    for i, r in enumerate(report.levels):
        results[f"level{i}_err_u"] = r.err_u
        results[f"level{i}_err_v"] = r.err_v
        results[f"level{i}_err_u_fn"] = r.err_u_fn
        results[f"level{i}_err_v_fn"] = r.err_v_fn
    write_manifest(out / "manifest.ini", cfg, results, time.time() - t0)
    return EXIT_OK


def _pulse_params(cfg: RunConfig, kernel=None) -> PhysicalParams:
    scale_c = 1.0
    if kernel is not None and cfg.scale != "none":
        scale_c = laplacian_scale(kernel, mode=cfg.scale)
    return PhysicalParams(d_u=cfg.d_u, d_v=cfg.d_v, f=cfg.f,
                          kappa=cfg.kappa, scale_c=scale_c)


def _pulse_initial(mesh) -> StepperState:
    x = mesh.nodes
    return StepperState(u=1.0 - 0.3 * np.exp(-10.0 * x ** 2),
                        v=np.exp(-10.0 * x ** 2))


def cmd_pulse(cfg: RunConfig) -> int:
    t0 = time.time()
    out = _out_dir(cfg)
    results = {}
    budget_exceeded = False

    runs: list[tuple[str, float | None]] = [(f"a{a:g}", a) for a in cfg.a_values]
    if cfg.local_reference:
        runs.append(("local", None))

    for label, a in runs:
        run_dir = out / label
        run_dir.mkdir(parents=True, exist_ok=True)
        if a is None:
            mesh = build_uniform((cfg.omega_lo, cfg.omega_hi), 0.0, cfg.h)
            ops = assemble_local(mesh)
            stepper = Stepper(mesh, ops, _pulse_params(cfg), cfg.tau,
                              diffusion=ops.laplacian)
        else:
            mesh = build_uniform((cfg.omega_lo, cfg.omega_hi), cfg.collar, cfg.h)
            kernel = DispersalExp(float(a), cfg.kernel_r)
            ops = assemble_nonlocal(mesh, kernel, BcMode.NEUMANN)
            stepper = Stepper(mesh, ops, _pulse_params(cfg, kernel), cfg.tau)
        if cfg.dump_operators:
            _dump_operators(ops, run_dir)
        state = _pulse_initial(mesh)
        try:
            state, trace = stepper.run_to_steady(state, tol=cfg.steady_tol,
                                                 max_steps=cfg.max_steps)
            results[f"{label}_steps"] = state.n
        except MaxStepsExceeded as exc:
            state, trace = exc.state, exc.trace
            results[f"{label}_steps"] = f"exceeded({cfg.max_steps})"
            budget_exceeded = True
        write_profile(run_dir / "profile.csv", mesh, state)
        write_trace(run_dir / "trace.csv", trace)
        shape = classify_pulse_profile(mesh.nodes, state.v)
        results[f"{label}_kind"] = shape["kind"]
        results[f"{label}_v_max"] = shape["v_max"]

    write_manifest(out / "manifest.ini", cfg, results, time.time() - t0)
    return EXIT_MAX_STEPS if budget_exceeded else EXIT_OK


# joint refinement ladder for the oracle comparison: mesh size, number of
# modes, time step
ORACLE_LADDER = [(0.05, 11, 0.1), (0.025, 21, 0.05), (0.0125, 41, 0.025)]


def cmd_oracle(cfg: RunConfig) -> int:
    from .mms import run_level

    t0 = time.time()
    case = MMS_CASES[cfg.case]
    if case.bc != BcMode.DIRICHLET:
        raise ConfigError("bad_value", "the oracle comparison is Dirichlet-only")
    out = _out_dir(cfg)
    ladder = ORACLE_LADDER[:max(1, min(cfg.levels, len(ORACLE_LADDER)))]
    rows = []
    results = {}
    last = None
    center = 0.5 * (case.omega[0] + case.omega[1])
    half = 0.5 * (case.omega[1] - case.omega[0])
    for i, (h, n_modes, tau) in enumerate(ladder):
        mesh, state, _, _ = run_level(case, h, tau)
        basis = SpectralBasis(L=half, N=n_modes, center=center)
        run = solve_spectral(case, basis, tau, case.T)
        diff = l2_field_difference(state.u, mesh, run)
        rows.append((i, h, n_modes, tau, diff))
        results[f"level{i}_l2_diff"] = diff
        last = (mesh, state, run)
    write_csv(out / "oracle.csv",
              ["level", "h", "n_modes", "tau", "l2_diff"], rows)
    mesh, state, run = last
    fields = ((x, u, s) for x, u, s in
              zip(mesh.nodes, state.u,
                  run.workspace.reconstruct(run.coeffs_u, mesh.nodes)))
    write_csv(out / "fields.csv", ["x", "u_fem", "u_spectral"], fields)
    write_manifest(out / "manifest.ini", cfg, results, time.time() - t0)
    return EXIT_OK


def cmd_single(cfg: RunConfig) -> int:
    t0 = time.time()
    out = _out_dir(cfg)
    kernel = cfg.kernel()
    bc = cfg.bc_mode()
    collar = cfg.collar if bc == BcMode.NEUMANN else 0.0
    mesh = build_uniform((cfg.omega_lo, cfg.omega_hi), collar, cfg.h)
    ops = assemble_nonlocal(mesh, kernel, bc)
    if cfg.dump_operators:
        _dump_operators(ops, out)
    params = _pulse_params(cfg, kernel)
    stepper = Stepper(mesh, ops, params, cfg.tau)
    state = _pulse_initial(mesh)
    state, trace = stepper.run_to_time(state, cfg.T)
    write_profile(out / "profile.csv", mesh, state)
    write_trace(out / "trace.csv", trace)
    write_manifest(out / "manifest.ini", cfg,
                   {"steps": state.n, "t_final": state.t}, time.time() - t0)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlgs",
        description="Gray-Scott dynamics with integral diffusion: "
                    "convergence studies, pulse experiments, solver "
                    "cross-validation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI configuration (or a manifest)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--dump-operators", action="store_true", default=None,
                       help="write assembled matrices as plain text")

    p = sub.add_parser("converge", help="manufactured-solution refinement study")
    common(p)
    p.add_argument("--case", help="registered case name")
    p.add_argument("--levels", type=int, help="number of refinement levels")

    p = sub.add_parser("pulse", help="steady pulse suite")
    common(p)
    p.add_argument("--a", type=float, nargs="+", dest="a_values",
                   help="dispersal rates")
    p.add_argument("--h", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--tol", type=float, dest="steady_tol")
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--omega", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--local", dest="local_reference", action="store_true",
                   default=None)
    p.add_argument("--no-local", dest="local_reference", action="store_false",
                   default=None)
    p.add_argument("--scale", choices=["none", "default", "moment"])

    p = sub.add_parser("oracle", help="FEM vs spectral comparison")
    common(p)
    p.add_argument("--case", help="registered Dirichlet case")
    p.add_argument("--levels", type=int, help="joint refinement levels")

    p = sub.add_parser("single", help="one run of a configuration")
    common(p)
    p.add_argument("--h", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--T", type=float, dest="T")

    return parser


_MODE_BY_COMMAND = {"converge": "mms", "pulse": "pulse", "oracle": "oracle",
                    "single": "single"}
_DEFAULTS_BY_COMMAND = {
    "pulse": {"scale": "default"},
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {k: v for k, v in vars(args).items()
                     if k not in ("command", "config") and v is not None}
        if args.command == "pulse" and "omega" in overrides:
            lo, hi = overrides.pop("omega")
            overrides["omega_lo"], overrides["omega_hi"] = lo, hi
        base = dict(_DEFAULTS_BY_COMMAND.get(args.command, {}))
        base["mode"] = _MODE_BY_COMMAND[args.command]
        base.update(file_values)
        cfg = make_config(base, overrides)
        cfg.mode = _MODE_BY_COMMAND[args.command]
        validate_config(cfg)
    except ConfigError as exc:
        print(f"config error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error [io]: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    handler = {"converge": cmd_converge, "pulse": cmd_pulse,
               "oracle": cmd_oracle, "single": cmd_single}[args.command]
    try:
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteState, FactorizationFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MaxStepsExceeded as exc:
        print(f"steady-state budget exceeded: {exc}", file=sys.stderr)
        return EXIT_MAX_STEPS


if __name__ == "__main__":
    sys.exit(main())
