"""Command-line driver: validate, solve, compare, classify, oracle.

Every run is described by a YAML configuration (see config.py for the
schema); results are written as CSV or structured JSON.  Exit codes:
0 success, 1 failed validation/comparison or a fatal integration failure,
2 configuration or oracle-consistency errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .characteristics import CharacteristicMap, map_from_initial_data
from .config import (
    OracleBlockConfig,
    RunConfig,
    build_curve,
    build_spacetime,
    load_config,
)
from .errors import ConfigError, NullsheetError, OracleMismatchError
from .geodesic import (
    GeodesicState,
    GeodesicTrajectory,
    SolverOptions,
    conserved_along,
    integrate,
)
from .initial_data import InitialCurve, validate_curve
from .oracles import OracleParams, check_oracle_consistency, make_oracle
from .reduction import cubic_coefficients, solve_cubic
from .spacetime import SchwarzschildParams, Spacetime
from .surface import (
    SurfaceMesh,
    build_surface,
    delta_monitor,
    export_csv,
    export_json,
    wrap_offset_from_curve,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class PipelineResult:
    spacetime: Spacetime
    curve: InitialCurve
    cmap: CharacteristicMap
    char_thetas: np.ndarray
    trajectories: list[GeodesicTrajectory]
    mesh: SurfaceMesh


def run_pipeline(cfg: RunConfig, threads: int = 1) -> PipelineResult:
    """Solve the Cauchy problem described by the configuration."""
    spacetime = build_spacetime(cfg)
    curve = build_curve(cfg)
    cmap = map_from_initial_data(curve, spacetime)
    char_thetas = curve.grid(cfg.initial_data.samples)

    opts = SolverOptions(
        rel_tol=cfg.solver.rel_tol,
        abs_tol=cfg.solver.abs_tol,
        max_steps=cfg.solver.max_steps,
        eps_horizon=cfg.solver.eps_horizon,
        eps_axis=cfg.solver.eps_axis,
    )

    def solve_one(vartheta: float) -> GeodesicTrajectory:
        state0 = GeodesicState(
            y=curve.phi(vartheta), v=curve.psi(vartheta), t=0.0
        )
        return integrate(spacetime, state0, cfg.solver.t_end, opts)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trajectories = list(pool.map(solve_one, char_thetas))
    else:
        trajectories = [solve_one(v) for v in char_thetas]

    t_grid = np.linspace(0.0, cfg.solver.t_end, cfg.output.t_samples)
    if cfg.output.theta_samples is None:
        theta_grid = char_thetas.copy()
    elif cfg.initial_data.periodic:
        n = cfg.output.theta_samples
        theta_grid = curve.theta_min + curve.period * np.arange(n) / n
    else:
        theta_grid = np.linspace(curve.theta_min, curve.theta_max, cfg.output.theta_samples)

    wrap = wrap_offset_from_curve(curve) if curve.periodic else None
    mesh = build_surface(
        trajectories,
        char_thetas,
        cmap,
        t_grid,
        theta_grid,
        spacetime,
        wrap_offset=wrap,
    )
    return PipelineResult(
        spacetime=spacetime,
        curve=curve,
        cmap=cmap,
        char_thetas=char_thetas,
        trajectories=trajectories,
        mesh=mesh,
    )


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    spacetime = build_spacetime(cfg)
    curve = build_curve(cfg)
    report = validate_curve(curve, spacetime, n_samples=cfg.initial_data.samples)
    print(f"max |delta(0, vartheta)| : {report.max_abs_delta:.6e} "
          f"(at vartheta = {report.argmax_delta:.6g})")
    print(f"min Lambda' estimate     : {report.monotone.min_slope:.6e}")
    print(f"light-likeness           : {'PASS' if report.lightlike else 'FAIL'}")
    print(f"monotonicity             : {'PASS' if report.monotone.passed else 'FAIL'}")
    if report.monotone.first_violation is not None:
        lo, hi = report.monotone.first_violation
        print(f"first violating interval : [{lo:.6g}, {hi:.6g}]")
    return 0 if report.passed else 1


def _print_solve_summary(result: PipelineResult, cfg: RunConfig) -> None:
    kinds: dict[str, int] = {}
    for traj in result.trajectories:
        for ev in traj.events:
            kinds[ev.kind] = kinds.get(ev.kind, 0) + 1
    print(f"characteristics          : {len(result.trajectories)}")
    print(f"events                   : {kinds}")
    if result.spacetime.name == "schwarzschild":
        params = SchwarzschildParams(m=result.spacetime.meta["mass"])
        worst = 0.0
        for traj in result.trajectories:
            worst = max(worst, conserved_along(params, traj).max_rel_drift)
        print(f"max conserved drift      : {worst:.3e}")
    report = delta_monitor(result.mesh)
    print(f"delta monitor            : {report}")


def _dump_characteristics(result: PipelineResult, path: str) -> None:
    mesh = result.mesh
    cmap = result.cmap
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,theta,vartheta,lambda,jacobian\n")
        for i, t in enumerate(mesh.t_grid):
            for j, theta in enumerate(mesh.theta_grid):
                if mesh.truncated[i, j]:
                    fh.write(f"{_fmt(t)},{_fmt(theta)},,,\n")
                    continue
                vth = mesh.vartheta[i, j]
                fh.write(
                    ",".join(
                        _fmt(v)
                        for v in (t, theta, vth, cmap.lambda_fn(vth), mesh.jacobian[i, j])
                    )
                    + "\n"
                )


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    spacetime = build_spacetime(cfg)
    curve = build_curve(cfg)
    if not args.force:
        report = validate_curve(curve, spacetime, n_samples=cfg.initial_data.samples)
        if not report.passed:
            print(
                "initial data failed validation "
                f"(max |delta| = {report.max_abs_delta:.3e}, "
                f"min Lambda' = {report.monotone.min_slope:.3e}); "
                "use --force to integrate anyway",
                file=sys.stderr,
            )
            return 1
    result = run_pipeline(cfg, threads=args.threads)
    if cfg.output.format == "csv":
        export_csv(result.mesh, cfg.output.path)
    else:
        export_json(result.mesh, cfg.output.path)
    print(f"wrote {cfg.output.format} surface to {cfg.output.path}")
    if args.dump_characteristics:
        _dump_characteristics(result, args.dump_characteristics)
        print(f"wrote characteristic table to {args.dump_characteristics}")
    _print_solve_summary(result, cfg)
    failed = any(
        ev.kind == "step_failure"
        for traj in result.trajectories
        for ev in traj.events
    )
    return 1 if failed else 0


def _oracle_from_config(cfg: RunConfig):
    if cfg.oracle is None:
        raise ConfigError("oracle", "this command needs an oracle block")
    params = dict(cfg.oracle.params)
    if "m" not in params and cfg.spacetime.mass is not None:
        params["m"] = cfg.spacetime.mass
    if "theta_range" not in params:
        params["theta_range"] = cfg.initial_data.theta_range
    if "periodic" not in params:
        params["periodic"] = cfg.initial_data.periodic
    known = set(OracleParams.__dataclass_fields__)
    unknown = set(params) - known
    if unknown:
        raise ConfigError(
            f"oracle.params.{sorted(unknown)[0]}", "unknown oracle parameter"
        )
    if "theta_range" in params:
        params["theta_range"] = tuple(float(v) for v in params["theta_range"])
    return make_oracle(cfg.oracle.example, cfg.oracle.case, OracleParams(**params))


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    oracle = _oracle_from_config(cfg)
    curve = build_curve(cfg)
    if cfg.spacetime.type != "schwarzschild":
        raise ConfigError("spacetime.type", "compare requires schwarzschild")
    check_oracle_consistency(
        oracle, SchwarzschildParams(m=cfg.spacetime.mass), curve
    )
    result = run_pipeline(cfg, threads=args.threads)
    mesh = result.mesh

    coord_names = ("tau", "r", "alpha", "beta")
    errors: dict[str, list[float]] = {name: [] for name in coord_names}
    residuals: list[float] = []
    skipped = 0
    for i, t in enumerate(mesh.t_grid):
        for j in range(len(mesh.theta_grid)):
            if mesh.truncated[i, j]:
                continue
            vartheta = mesh.vartheta[i, j]
            x = mesh.x[i, j]
            try:
                ref = oracle.evaluate(float(t), float(vartheta))
                residuals.append(oracle.relation_residual(float(t), x, float(vartheta)))
            except NullsheetError:
                skipped += 1
                continue
            for name, a, b in zip(coord_names, x, ref):
                errors[name].append(abs(a - b))

    if not residuals:
        print("no comparable nodes (all truncated or out of oracle range)")
        return 1
    print(f"{'coordinate':<12} {'max error':>13} {'median error':>13}")
    worst = 0.0
    for name in coord_names:
        arr = np.array(errors[name])
        worst = max(worst, float(arr.max()))
        print(f"{name:<12} {arr.max():13.4e} {np.median(arr):13.4e}")
    res_arr = np.array(residuals)
    worst = max(worst, float(res_arr.max()))
    print(f"{'relation':<12} {res_arr.max():13.4e} {np.median(res_arr):13.4e}")
    if skipped:
        print(f"skipped nodes            : {skipped}")
    print(f"comparison tolerance     : {cfg.compare.tol:.3e}")
    ok = worst < cfg.compare.tol
    print(f"verdict                  : {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_classify(args) -> int:
    cfg = load_config(args.config)
    if cfg.spacetime.type != "schwarzschild":
        raise ConfigError("spacetime.type", "classify requires schwarzschild")
    params = SchwarzschildParams(m=cfg.spacetime.mass)
    curve = build_curve(cfg)
    n = min(cfg.initial_data.samples, args.rows)
    grid = np.linspace(curve.theta_min, curve.theta_max, n)
    print(f"{'vartheta':>12} {'A':>17} {'B':>17} "
          f"{'roots':>44} {'case':>14} {'k^2':>12}")
    for v in grid:
        phi = curve.phi(v)
        psi = curve.psi(v)
        try:
            a_coef, b_coef = cubic_coefficients(phi, psi, params)
        except NullsheetError:
            print(f"{v:12.6g} {'undefined (psi_2 = 0)':>35}")
            continue
        profile = solve_cubic(params.m, a_coef, b_coef, u0=1.0 / phi[1])
        roots_txt = ", ".join(f"{u:.10g}" for u in profile.roots)
        k2 = profile.modulus_squared()
        k2_txt = f"{k2:.8g}" if k2 is not None else "-"
        print(
            f"{v:12.6g} {a_coef:17.10g} {b_coef:17.10g} "
            f"{roots_txt:>44} {profile.case_label.value:>14} {k2_txt:>12}"
        )
    return 0


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    if args.example is not None or args.case is not None:
        block = cfg.oracle or OracleBlockConfig()
        cfg = replace(
            cfg,
            oracle=replace(
                block,
                example=args.example if args.example is not None else block.example,
                case=args.case if args.case is not None else block.case,
            ),
        )
    oracle = _oracle_from_config(cfg)
    vartheta = args.vartheta
    t_grid = np.linspace(0.0, cfg.solver.t_end, cfg.output.t_samples)
    print("t,tau,r,alpha,beta")
    for t in t_grid:
        try:
            x = oracle.evaluate(float(t), vartheta)
        except NullsheetError:
            break
        print(",".join(_fmt(v) for v in (t, *x)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullsheet",
        description="Light-like extremal surfaces via characteristics + geodesics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel characteristic integrations")
        p.add_argument("--force", action="store_true",
                       help="skip initial-data validation gates")

    p = sub.add_parser("validate", help="check light-likeness and monotonicity")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="integrate the surface and export the mesh")
    add_common(p)
    p.add_argument("--dump-characteristics", metavar="PATH",
                   help="also write a (t, theta, vartheta, lambda, J) CSV table")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="compare a solved mesh against its oracle")
    add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("classify", help="print the radial cubic profile per vartheta")
    add_common(p)
    p.add_argument("--rows", type=int, default=9, help="number of vartheta rows")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="emit closed-form oracle samples as CSV")
    add_common(p)
    p.add_argument("--vartheta", type=float, default=1.0,
                   help="characteristic label to sample")
    p.add_argument("--example", type=int, choices=(1, 2, 3),
                   help="override the configured oracle family")
    p.add_argument("--case", choices=("auto", "I", "II", "III"),
                   help="override the configured oracle case")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OracleMismatchError as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return 2
    except NullsheetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
