"""CSV emitters for time series, snapshots and sweep summaries."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import MassGrid
from .model import StationaryProfile, TransformedState

TIMESERIES_HEADER = ("t,E_kin,E_pot,D_visc_cum,D_fric_cum,Y_min,Y_max,l2_u,l3_u,l4_u,l5_u,"
                     "sup_u,sup_Qux,w_l2,w_grad,sup_theta_dist,flux_residual,dt").split(",")
SNAPSHOT_HEADER = ["x_center", "c", "Q", "cQ", "cQ_inf", "u_cell_avg"]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path, header, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e
    return path


def emit_timeseries(records, path):
    rows = []
    for rec in records:
        r = rec.row()
        rows.append([r[k] for k in TIMESERIES_HEADER])
    return _write(path, TIMESERIES_HEADER, rows)


def emit_snapshot(state: TransformedState, stationary: StationaryProfile, grid: MassGrid, path):
    u_avg = 0.5 * (state.u[1:] + state.u[:-1])
    cols = [grid.cell_centers, state.c, state.Q, state.cq, stationary.cq_inf, u_avg]
    return _write(path, SNAPSHOT_HEADER, zip(*cols))


def read_csv(path) -> dict[str, np.ndarray]:
    """Read an emitted CSV back into float columns."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [row for row in r]
    if not data:
        return {k: np.array([]) for k in header}
    arr = np.array(data, dtype=float)
    return {k: arr[:, i] for i, k in enumerate(header)}


def emit_table(rows: list[dict], path):
    header = list(rows[0]) if rows else []
    return _write(path, header, ([row[k] for k in header] for row in rows))
