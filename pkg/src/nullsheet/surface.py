"""Surface assembly from per-characteristic geodesics, with export round trips.

A node (t, theta) of the output grid pulls back to vartheta = invert(t,
theta); the embedding and its tangents come from sampling the geodesic
trajectories at t and splining across characteristics:

    x(t, theta) = y(t, vartheta),
    x_theta     = y_vartheta * dvartheta/dtheta,
    x_t         = y_t - Lambda(vartheta) * (dvartheta/dtheta) * y_vartheta.

Nodes whose contributing characteristics ended in an event before t are
marked truncated; nothing is extrapolated past events.  The mesh stores the
degeneracy indicator in both parameterizations so the identity
delta(t, theta) = delta(t, vartheta) * (dvartheta/dtheta)^2 can be audited.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .characteristics import CharacteristicMap
from .errors import CoverageError, MapInversionError
from .geodesic import GeodesicTrajectory
from .initial_data import EPS_DELTA
from .spacetime import Spacetime, induced_metric

CSV_COLUMNS = (
    "t",
    "theta",
    "vartheta",
    "tau",
    "r",
    "alpha",
    "beta",
    "g00",
    "g01",
    "g11",
    "delta",
    "type",
)

TYPE_LIGHTLIKE = "lightlike"
TYPE_TIMELIKE = "timelike"
TYPE_SPACELIKE = "spacelike"
TYPE_TRUNCATED = "truncated"


@dataclass
class SurfaceMesh:
    """Reconstructed surface on a (t, theta) grid with induced-metric data."""

    t_grid: np.ndarray
    theta_grid: np.ndarray
    char_thetas: np.ndarray
    x: np.ndarray        # (nt, ntheta, 4)
    x_t: np.ndarray      # (nt, ntheta, 4)
    x_theta: np.ndarray  # (nt, ntheta, 4)
    vartheta: np.ndarray  # (nt, ntheta)
    jacobian: np.ndarray  # (nt, ntheta) dvartheta/dtheta
    g00: np.ndarray
    g01: np.ndarray
    g11: np.ndarray
    delta: np.ndarray
    delta_char: np.ndarray  # delta in the (t, vartheta) parameterization
    type_label: np.ndarray  # (nt, ntheta) unicode
    truncated: np.ndarray   # (nt, ntheta) bool
    truncation_map: np.ndarray  # (ntheta,) earliest truncated t, inf if none

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.t_grid), len(self.theta_grid)


def wrap_offset_from_curve(curve) -> np.ndarray:
    """Coordinate shift over one period of a periodic curve (2*pi windings)."""
    gap = curve.phi(curve.theta_max) - curve.phi(curve.theta_min)
    return 2.0 * math.pi * np.round(gap / (2.0 * math.pi))


def _classify(g00: float, g01: float, g11: float, delta: float, eps_delta: float) -> str:
    # scale must stay positive on null surfaces, where g00 and g01 both
    # vanish and the naive g01^2 + |g00 g11| collapses to zero
    scale = (abs(g00) + abs(g01) + abs(g11)) ** 2
    threshold = max(eps_delta, 1e-6 * scale)
    if abs(delta) <= threshold:
        return TYPE_LIGHTLIKE
    return TYPE_TIMELIKE if delta > 0 else TYPE_SPACELIKE


def build_surface(
    trajectories: list[GeodesicTrajectory],
    char_thetas: np.ndarray,
    cmap: CharacteristicMap,
    t_grid: np.ndarray,
    theta_grid: np.ndarray,
    spacetime: Spacetime,
    eps_delta: float = EPS_DELTA,
    wrap_offset: np.ndarray | None = None,
) -> SurfaceMesh:
    """Assemble the mesh; trajectories are indexed by strictly increasing vartheta.

    For periodic characteristic grids, ``wrap_offset`` is the coordinate
    shift accumulated over one vartheta period (e.g. 2*pi in beta for a loop
    around the axis); winding components are de-trended before the periodic
    spline and the linear trend is restored afterwards.
    """
    char_thetas = np.asarray(char_thetas, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    theta_grid = np.asarray(theta_grid, dtype=float)
    n_char = len(char_thetas)
    if n_char != len(trajectories):
        raise CoverageError("one trajectory per characteristic vartheta required")
    if n_char < 4:
        raise CoverageError(
            f"insufficient characteristic coverage: {n_char} < 4 (cubic splines)"
        )
    if np.any(np.diff(char_thetas) <= 0):
        raise CoverageError("characteristic varthetas must be strictly increasing")

    periodic = cmap.periodic
    nt, ntheta = len(t_grid), len(theta_grid)
    dim = spacetime.dim
    x = np.full((nt, ntheta, dim), np.nan)
    x_t = np.full((nt, ntheta, dim), np.nan)
    x_th = np.full((nt, ntheta, dim), np.nan)
    vartheta_grid = np.full((nt, ntheta), np.nan)
    jac = np.full((nt, ntheta), np.nan)
    g00 = np.full((nt, ntheta), np.nan)
    g01 = np.full((nt, ntheta), np.nan)
    g11 = np.full((nt, ntheta), np.nan)
    delta = np.full((nt, ntheta), np.nan)
    delta_char = np.full((nt, ntheta), np.nan)
    labels = np.full((nt, ntheta), TYPE_TRUNCATED, dtype="<U10")
    truncated = np.ones((nt, ntheta), dtype=bool)

    ends = np.array([traj.t_last for traj in trajectories])

    theta_min = cmap.theta_min
    period = cmap.period
    if wrap_offset is None:
        trend = np.zeros(dim)
    else:
        trend = np.asarray(wrap_offset, dtype=float) / period
    spline_thetas = np.append(char_thetas, char_thetas[0] + period)

    for i, t in enumerate(t_grid):
        alive = ends >= t - 1e-12
        periodic_now = periodic and bool(alive.all())

        if periodic_now:
            block = np.arange(n_char)
        else:
            if not alive.any():
                continue
            # largest contiguous alive block; interpolation is restricted to it
            best_start = best_len = 0
            run_start = None
            for k in range(n_char + 1):
                if k < n_char and alive[k]:
                    if run_start is None:
                        run_start = k
                else:
                    if run_start is not None and k - run_start > best_len:
                        best_start, best_len = run_start, k - run_start
                    run_start = None
            if best_len < 4:
                continue
            block = np.arange(best_start, best_start + best_len)

        samples = [trajectories[k].sample(t) for k in block]
        ys = np.array([s.y for s in samples])
        vs = np.array([s.v for s in samples])

        if periodic_now:
            detrended = ys - np.outer(char_thetas - theta_min, trend)
            det_ext = np.vstack([detrended, detrended[:1]])
            vs_ext = np.vstack([vs, vs[:1]])
            y_spl = CubicSpline(spline_thetas, det_ext, bc_type="periodic", axis=0)
            v_spl = CubicSpline(spline_thetas, vs_ext, bc_type="periodic", axis=0)
        else:
            y_spl = CubicSpline(char_thetas[block], ys, bc_type="not-a-knot", axis=0)
            v_spl = CubicSpline(char_thetas[block], vs, bc_type="not-a-knot", axis=0)
        dy_spl = y_spl.derivative()

        for jcol, theta in enumerate(theta_grid):
            try:
                v_theta = cmap.invert(t, theta)
            except MapInversionError:
                continue
            if not periodic_now:
                if not (
                    char_thetas[block[0]] - 1e-12
                    <= v_theta
                    <= char_thetas[block[-1]] + 1e-12
                ):
                    continue
            jac_val = cmap.jacobian(t, v_theta)
            lam = cmap.lambda_fn(v_theta)
            if periodic_now:
                y_here = y_spl(v_theta) + (v_theta - theta_min) * trend
                y_v = dy_spl(v_theta) + trend
            else:
                y_here = y_spl(v_theta)
                y_v = dy_spl(v_theta)
            y_t = v_spl(v_theta)

            xt_here = y_t - lam * jac_val * y_v
            xth_here = jac_val * y_v

            ind = induced_metric(spacetime, y_here, xt_here, xth_here)
            ind_char = induced_metric(spacetime, y_here, y_t, y_v)

            x[i, jcol] = y_here
            x_t[i, jcol] = xt_here
            x_th[i, jcol] = xth_here
            vartheta_grid[i, jcol] = v_theta
            jac[i, jcol] = jac_val
            g00[i, jcol] = ind.g00
            g01[i, jcol] = ind.g01
            g11[i, jcol] = ind.g11
            delta[i, jcol] = ind.delta
            delta_char[i, jcol] = ind_char.delta
            labels[i, jcol] = _classify(
                ind.g00, ind.g01, ind.g11, ind.delta, eps_delta
            )
            truncated[i, jcol] = False

    truncation_map = np.full(ntheta, np.inf)
    for jcol in range(ntheta):
        trunc_times = t_grid[truncated[:, jcol]]
        if len(trunc_times):
            truncation_map[jcol] = trunc_times.min()

    return SurfaceMesh(
        t_grid=t_grid,
        theta_grid=theta_grid,
        char_thetas=char_thetas,
        x=x,
        x_t=x_t,
        x_theta=x_th,
        vartheta=vartheta_grid,
        jacobian=jac,
        g00=g00,
        g01=g01,
        g11=g11,
        delta=delta,
        delta_char=delta_char,
        type_label=labels,
        truncated=truncated,
        truncation_map=truncation_map,
    )


@dataclass(frozen=True)
class DeltaReport:
    """Summary of the light-likeness monitor over a mesh."""

    max_abs_delta: float
    location: tuple[float, float] | None  # (t, theta) of the worst node
    n_nodes: int
    n_truncated: int
    type_counts: dict

    def __str__(self):
        loc = (
            f"at (t, theta) = ({self.location[0]:.6g}, {self.location[1]:.6g})"
            if self.location
            else "n/a"
        )
        return (
            f"max |delta| = {self.max_abs_delta:.3e} {loc}; "
            f"{self.n_truncated}/{self.n_nodes} truncated; "
            f"types: {self.type_counts}"
        )


def delta_monitor(mesh: SurfaceMesh) -> DeltaReport:
    """Max |delta| over non-truncated nodes with its grid location."""
    mask = ~mesh.truncated
    n_trunc = int(mesh.truncated.sum())
    counts: dict[str, int] = {}
    for label in np.unique(mesh.type_label[mask]) if mask.any() else []:
        counts[str(label)] = int((mesh.type_label[mask] == label).sum())
    if not mask.any():
        return DeltaReport(
            max_abs_delta=math.nan,
            location=None,
            n_nodes=mesh.truncated.size,
            n_truncated=n_trunc,
            type_counts=counts,
        )
    abs_delta = np.where(mask, np.abs(mesh.delta), -1.0)
    i, j = np.unravel_index(int(abs_delta.argmax()), abs_delta.shape)
    return DeltaReport(
        max_abs_delta=float(abs_delta[i, j]),
        location=(float(mesh.t_grid[i]), float(mesh.theta_grid[j])),
        n_nodes=mesh.truncated.size,
        n_truncated=n_trunc,
        type_counts=counts,
    )


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def mesh_to_rows(mesh: SurfaceMesh) -> list[dict]:
    """Flatten the mesh into export records, t-major then theta."""
    rows = []
    for i, t in enumerate(mesh.t_grid):
        for j, theta in enumerate(mesh.theta_grid):
            row = {"t": float(t), "theta": float(theta)}
            if mesh.truncated[i, j]:
                row.update(
                    {
                        key: None
                        for key in (
                            "vartheta",
                            "tau",
                            "r",
                            "alpha",
                            "beta",
                            "g00",
                            "g01",
                            "g11",
                            "delta",
                        )
                    }
                )
                row["type"] = TYPE_TRUNCATED
            else:
                row["vartheta"] = float(mesh.vartheta[i, j])
                row["tau"] = float(mesh.x[i, j, 0])
                row["r"] = float(mesh.x[i, j, 1])
                row["alpha"] = float(mesh.x[i, j, 2])
                row["beta"] = float(mesh.x[i, j, 3])
                row["g00"] = float(mesh.g00[i, j])
                row["g01"] = float(mesh.g01[i, j])
                row["g11"] = float(mesh.g11[i, j])
                row["delta"] = float(mesh.delta[i, j])
                row["type"] = str(mesh.type_label[i, j])
            rows.append(row)
    return rows


def rows_to_csv_text(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        cells = []
        for col in CSV_COLUMNS:
            value = row[col]
            if col == "type":
                cells.append(str(value))
            elif value is None:
                cells.append("")
            else:
                cells.append(_fmt(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def export_csv(mesh: SurfaceMesh, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_csv_text(mesh_to_rows(mesh)))


def import_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            row = {}
            for col, cell in zip(CSV_COLUMNS, cells):
                if col == "type":
                    row[col] = cell
                elif cell == "":
                    row[col] = None
                else:
                    row[col] = float(cell)
            rows.append(row)
    return rows


def rows_to_json_text(mesh: SurfaceMesh) -> str:
    rows = mesh_to_rows(mesh)
    ntheta = len(mesh.theta_grid)
    nested = [
        rows[i * ntheta : (i + 1) * ntheta] for i in range(len(mesh.t_grid))
    ]
    doc = {
        "t_grid": [_fmt(t) for t in mesh.t_grid],
        "theta_grid": [_fmt(v) for v in mesh.theta_grid],
        "nodes": [
            [
                {
                    key: (row[key] if key == "type" or row[key] is None else _fmt(row[key]))
                    for key in CSV_COLUMNS
                }
                for row in block
            ]
            for block in nested
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def export_json(mesh: SurfaceMesh, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_json_text(mesh))


def import_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
