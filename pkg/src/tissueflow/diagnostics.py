"""Quantitative run certificates: segregation, complementarity, curl structure.

The complementarity residual uses the algebraic identity
p(n)*(1-n) = eps*n of the singular congestion law, so on the cells where
the pressure is active it equals eps times the resident mass and scales
linearly in eps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .constitutive import DELTA_CLAMP, ModelParams, pressure_congestion
from .grid import ScalarField, VectorField, curl2d

PRESSURE_ACTIVE_THRESHOLD = 1e-10


@dataclass(frozen=True)
class DiagnosticRecord:
    t: float
    mass1: float
    mass2: float
    overlap: float
    comp_residual: float
    max_abs_curl_v2: float
    min_curl_v2: float
    clamp_count: int

    CSV_COLUMNS = ("t", "mass1", "mass2", "overlap", "comp_residual",
                   "max_abs_curl_v2", "min_curl_v2", "clamp_count")

    def row(self):
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def segregation_metric(n1: ScalarField, n2: ScalarField) -> float:
    """Integral of the overlap n1*n2; zero iff supports are disjoint."""
    if n1.spec != n2.spec:
        raise ValueError("fields live on different grids")
    return float((n1.values * n2.values).sum() * n1.spec.cell_area)


def complementarity_residual(n: ScalarField, eps: float) -> float:
    """L1 norm of p_eps(n)*(1-n) over cells with active pressure."""
    p = pressure_congestion(n, eps)
    active = p.values > PRESSURE_ACTIVE_THRESHOLD
    nv = np.minimum(n.values, 1.0 - DELTA_CLAMP)
    res = p.values * (1.0 - nv)
    return float(res[active].sum() * n.spec.cell_area)


def mixedness(n: ScalarField) -> float:
    """Integral of n*(1-n): distance of the density profile from {0,1}."""
    return float((n.values * (1.0 - n.values)).sum() * n.spec.cell_area)


def observe(state, params: ModelParams) -> DiagnosticRecord:
    """Standard observer for dynamics.run."""
    curl = curl2d(state.v2)
    return DiagnosticRecord(
        t=state.t,
        mass1=state.mass1,
        mass2=state.mass2,
        overlap=segregation_metric(state.n1, state.n2),
        comp_residual=complementarity_residual(
            ScalarField(state.n1.spec, state.n1.values + state.n2.values),
            params.eps),
        max_abs_curl_v2=float(np.abs(curl.values).max()),
        min_curl_v2=float(curl.values.min()),
        clamp_count=state.counters.total,
    )


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DiagnosticRecord.CSV_COLUMNS)
        for rec in records:
            writer.writerow(["%.17g" % v if isinstance(v, float) else v
                             for v in rec.row()])


@dataclass(frozen=True)
class CurlSignature:
    posterior_left_mean: float
    posterior_right_mean: float
    anterior_sign_changes: int


def curl_signature(v2: VectorField, sign_threshold: float = 0.0,
                   posterior_is_lower: bool = True,
                   mask: np.ndarray | None = None) -> CurlSignature:
    """Wall-vortex signature of the lateral tissue's velocity.

    Means of the curl over the anatomical-left and anatomical-right
    quarter strips of the posterior (by default lower) half, plus the
    count of sign changes along the horizontal line a quarter-height into
    the posterior half.  Left/right follow the imaging convention for a
    dorsally viewed embryo, where the subject's left appears on the
    viewer's right; anatomical left is therefore the large-x strip.
    An optional cell mask restricts the strip means (e.g. to the tissue
    support); an empty masked strip contributes a zero mean.
    """
    spec = v2.spec
    curl = curl2d(v2).values
    nx, ny = spec.nx, spec.ny
    if posterior_is_lower:
        rows = slice(0, ny // 2)
        probe_j = ny // 4
    else:
        rows = slice(ny // 2, ny)
        probe_j = (3 * ny) // 4
    if mask is None:
        mask = np.ones((nx, ny), dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)

    def strip_mean(cols):
        vals = curl[cols, rows][mask[cols, rows]]
        return float(vals.mean()) if vals.size else 0.0

    left_mean = strip_mean(slice(3 * nx // 4, nx))    # anatomical left
    right_mean = strip_mean(slice(0, nx // 4))        # anatomical right
    line = curl[:, probe_j]
    signs = np.sign(np.where(np.abs(line) <= sign_threshold, 0.0, line))
    signs = signs[signs != 0.0]
    changes = int(np.count_nonzero(np.diff(signs))) if signs.size else 0
    return CurlSignature(left_mean, right_mean, changes)


def limit_sweep(make_initial, grid_spec, base_params: ModelParams,
                sequence, t_end: float, ctrl_kwargs=None):
    """Run the repulsion model for a stiffening parameter sequence.

    ``sequence`` is an iterable of (eps, m, alpha) with eps, alpha
    decreasing and m increasing; ``make_initial`` maps a GridSpec to
    (n1_0, n2_0).  Returns a list of row dicts (one per tuple) with the
    overlap, complementarity residual and mixedness at t_end; failed runs
    get an ``error`` entry instead.
    """
    from dataclasses import replace as _replace

    from . import dynamics

    rows = []
    ctrl_kwargs = dict(ctrl_kwargs or {})
    for eps, m, alpha in sequence:
        row = {"eps": eps, "m": m, "alpha": alpha}
        try:
            params = _replace(base_params, eps=eps, m=m, alpha=alpha)
            ctrl = dynamics.StepControl(model="ESVM", t_end=t_end, **ctrl_kwargs)
            n1_0, n2_0 = make_initial(grid_spec)
            state = dynamics.init_state(n1_0, n2_0, params, ctrl)
            _, state = dynamics.run(state, ctrl, params)
            total = ScalarField(grid_spec, state.n1.values + state.n2.values)
            row.update(
                overlap=segregation_metric(state.n1, state.n2),
                comp_residual=complementarity_residual(total, eps),
                mixedness=mixedness(total),
            )
        except Exception as exc:  # annotate, keep sweeping
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def write_sweep_csv(rows, path) -> None:
    cols = ("eps", "m", "alpha", "overlap", "comp_residual", "mixedness", "error")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row.get(c, "") for c in cols])
