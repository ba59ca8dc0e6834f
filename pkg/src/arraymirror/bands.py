"""Collective-mode tables: band structure, angle sweeps, lattice-constant sweeps.

Each row of every table is one Bloch-vector evaluation of the collective
shift and decay rate. Rows are independent, so sweeps can run on a thread
pool; output order always follows the input grid. Failed shift evaluations
flag the row instead of aborting the table.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .config import ProbeGeometry, SystemConfig, as_bloch, incidence_bloch
from .errors import NoConvergence, OutOfRange
from .greens import (
    AccelParams,
    ModePoint,
    _gamma_from_orders,
    delta_k,
    eta,
    reciprocal_orders,
)
from .tables import SweepTable, config_meta, join_flags, ordered_parallel_map

# band tables are ordinary sweep tables with a fixed column layout
BandTable = SweepTable


def _row_eval(kvec, config, accel, include_shift, max_order):
    """One (shift, rate) evaluation with per-row error capture."""
    orders = reciprocal_orders(kvec, config, max_order=max_order)
    rate = _gamma_from_orders(orders, config)
    n_prop = sum(1 for o in orders if o.propagating)
    anomaly = any(o.anomaly for o in orders)
    tokens = []
    if anomaly:
        tokens.append("anomaly-divergence")
    if include_shift:
        try:
            shift, _err = delta_k(kvec, config, accel=accel)
        except NoConvergence:
            shift = math.nan
            tokens.append("no-convergence")
    else:
        shift = math.nan
        tokens.append("shift-skipped")
    return shift, rate, n_prop, anomaly, join_flags(tokens)


def band_structure(
    path,
    config: SystemConfig,
    accel: AccelParams | None = None,
    include_shift: bool = True,
    max_order: int = 3,
) -> BandTable:
    """Collective shift and decay along a Brillouin-zone path.

    path is a sequence of Bloch vectors, normally from bz_path so the rows
    carry a cumulative arc length.
    """
    kvecs = [as_bloch(k) for k in path]
    if not kvecs:
        raise OutOfRange("band path is empty")
    rows = ordered_parallel_map(
        lambda k: _row_eval(k, config, accel, include_shift, max_order), kvecs
    )
    columns = {
        "arc_length": [k.arc_length for k in kvecs],
        "kx": [k.kx for k in kvecs],
        "ky": [k.ky for k in kvecs],
        "delta_k": [r[0] for r in rows],
        "gamma_k": [r[1] for r in rows],
        "in_cone": [int(k.inside_light_cone) for k in kvecs],
        "anomaly": [int(r[3]) for r in rows],
        "flags": [r[4] for r in rows],
    }
    return BandTable(columns=columns, meta=config_meta(config))


def directional_mode(
    geometry: ProbeGeometry,
    config: SystemConfig,
    accel: AccelParams | None = None,
    max_order: int = 3,
) -> ModePoint:
    """The collective mode addressed by a plane wave at the given incidence."""
    return eta(incidence_bloch(geometry, config), config, accel=accel, max_order=max_order)


def mode_vs_angle(
    theta_grid,
    plane: str,
    config: SystemConfig,
    accel: AccelParams | None = None,
    include_shift: bool = True,
    max_order: int = 3,
) -> SweepTable:
    """Directional-mode parameters against the incidence angle."""
    thetas = [float(t) for t in np.asarray(theta_grid, dtype=float).ravel()]
    if not thetas:
        raise OutOfRange("angle grid is empty")
    geoms = [ProbeGeometry(theta=t, plane=plane) for t in thetas]
    kvecs = [incidence_bloch(g, config) for g in geoms]
    rows = ordered_parallel_map(
        lambda k: _row_eval(k, config, accel, include_shift, max_order), kvecs
    )
    columns = {
        "theta": thetas,
        "delta_k": [r[0] for r in rows],
        "gamma_k": [r[1] for r in rows],
        "flags": [r[4] for r in rows],
    }
    meta = config_meta(config)
    meta["plane"] = plane.lower()
    return SweepTable(columns=columns, meta=meta)


def mode_vs_lattice(
    d_grid,
    geometry: ProbeGeometry,
    config: SystemConfig,
    accel: AccelParams | None = None,
    include_shift: bool = False,
    max_order: int = 3,
) -> SweepTable:
    """Directional-mode parameters against the lattice constant.

    Shifts are skipped by default: the decay rate carries the
    diffraction-threshold structure and evaluates in closed form, while
    each shift costs a full lattice sum per row.
    """
    ds = [float(d) for d in np.asarray(d_grid, dtype=float).ravel()]
    if not ds:
        raise OutOfRange("lattice-constant grid is empty")
    for d in ds:
        if not (0.0 < d < config.wavelength):
            raise OutOfRange(f"lattice constant {d} outside (0, {config.wavelength})")

    def one(d):
        cfg = dataclasses.replace(config, lattice_constant=d)
        kvec = incidence_bloch(geometry, cfg)
        return _row_eval(kvec, cfg, accel, include_shift, max_order)

    rows = ordered_parallel_map(one, ds)
    columns = {
        "d": ds,
        "delta_k": [r[0] for r in rows],
        "gamma_k": [r[1] for r in rows],
        "n_propagating": [r[2] for r in rows],
        "anomaly": [int(r[3]) for r in rows],
        "flags": [r[4] for r in rows],
    }
    meta = config_meta(config, geometry=geometry)
    return SweepTable(columns=columns, meta=meta)
