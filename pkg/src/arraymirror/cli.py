"""Command-line front end.

Subcommands: bands, mode, response, spectra, sweep, diffraction, verify.
Physics flags override TOML config values; the effective settings are
echoed in every output file's metadata. Exit codes: 0 success, 1 invalid
input or I/O problem, 2 numerical failure. Errors print one
machine-parsable line on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from . import __version__
from .bands import band_structure, directional_mode, mode_vs_angle, mode_vs_lattice
from .config import (
    ProbeGeometry,
    RunSettings,
    bz_path,
    named_bz_waypoints,
    read_settings_mapping,
    settings_from_mapping,
)
from .eit import eit_params, susceptibility_spectrum
from .errors import (
    ArrayMirrorError,
    BadPolarization,
    Degenerate,
    DegeneratePoles,
    IoError,
    NoConvergence,
    NoSteadyState,
    NotDualBand,
    OutOfRange,
    OutOfZone,
    ZeroDisplacement,
)
from .greens import AccelParams
from .scattering import diffraction_threshold, order_contribution_xx, rt_spectrum, spectra_sweep
from .tables import SweepTable, write_table
from .verify import verify_suite

_VALIDATION_ERRORS = (OutOfRange, BadPolarization, OutOfZone, ZeroDisplacement, IoError)
_NUMERICAL_ERRORS = (NoConvergence, NoSteadyState, Degenerate, DegeneratePoles, NotDualBand)


class _UsageError(Exception):
    """Bad command line; argparse errors are rerouted here."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def parse_range(text: str) -> np.ndarray:
    """Inclusive grid from 'min:max:count' with count >= 2."""
    parts = text.split(":")
    if len(parts) != 3:
        raise OutOfRange(f"range {text!r} must look like min:max:count")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise OutOfRange(f"range {text!r} has non-numeric fields") from None
    if count < 2:
        raise OutOfRange(f"range {text!r} needs count >= 2")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise OutOfRange(f"range {text!r} has non-finite endpoints")
    return np.linspace(lo, hi, count)


def _add_physics_flags(sub, theta_as_range=False):
    sub.add_argument("--config", help="TOML settings file")
    sub.add_argument("--d", type=float, help="lattice constant in wavelengths")
    sub.add_argument("--gamma-r", type=float, dest="gamma_r", help="upper-level decay rate")
    sub.add_argument("--pol", choices=("x", "z"), help="dipole polarization preset")
    if theta_as_range:
        sub.add_argument("--theta", help="incidence angle, single value or min:max:count")
    else:
        sub.add_argument("--theta", type=float, help="incidence angle in radians")
    sub.add_argument("--plane", choices=("xz", "yz"), help="plane of incidence")
    sub.add_argument("--probe-pol", choices=("p", "s"), dest="probe_pol", help="driven probe polarization")
    sub.add_argument("--omega-c", type=float, dest="omega_c", help="control Rabi frequency")
    sub.add_argument("--delta-c", type=float, dest="delta_c", help="control detuning")


def _add_accel_flags(sub):
    sub.add_argument("--r0", type=float, help="lattice-sum damping radius (default 30)")
    sub.add_argument("--sum-tol", type=float, dest="sum_tol", help="lattice-sum relative tolerance")


def _add_output_flags(sub, required=True):
    sub.add_argument("-o", "--output", required=required, help="output file path")
    sub.add_argument("-f", "--format", choices=("csv", "json"), help="output format (default: by suffix)")


def build_parser() -> _Parser:
    parser = _Parser(prog="arraymirror", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=f"arraymirror {__version__}")
    cmds = parser.add_subparsers(dest="command", required=True)

    p = cmds.add_parser("bands", help="band structure along a named zone path")
    _add_physics_flags(p)
    _add_accel_flags(p)
    p.add_argument("--path", default="GXMG", help="zone-corner letters, e.g. GXMG")
    p.add_argument("--samples", type=int, default=100, help="intervals per path segment")
    p.add_argument("--no-shift", action="store_true", help="skip the slow shift sums")
    _add_output_flags(p)

    p = cmds.add_parser("mode", help="directional mode at one angle or an angle grid")
    _add_physics_flags(p, theta_as_range=True)
    _add_accel_flags(p)
    p.add_argument("--no-shift", action="store_true", help="skip the slow shift sums")
    _add_output_flags(p, required=False)

    p = cmds.add_parser("response", help="susceptibility and pole weights over probe detuning")
    _add_physics_flags(p)
    _add_accel_flags(p)
    p.add_argument("--dp", default="-40:60:1001", help="probe-detuning grid min:max:count")
    _add_output_flags(p)

    p = cmds.add_parser("spectra", help="reflection/transmission spectrum over probe detuning")
    _add_physics_flags(p)
    _add_accel_flags(p)
    p.add_argument("--dp", default="-40:60:1001", help="probe-detuning grid min:max:count")
    _add_output_flags(p)

    p = cmds.add_parser("sweep", help="spectra over one or two swept parameters")
    _add_physics_flags(p)
    _add_accel_flags(p)
    p.add_argument(
        "--axis",
        action="append",
        required=True,
        help="swept axis name:min:max:count (repeat for a second axis)",
    )
    p.add_argument("--dp", default="-40:60:1001", help="probe-detuning grid min:max:count")
    _add_output_flags(p)

    p = cmds.add_parser("diffraction", help="diffraction threshold and lattice-constant scan")
    _add_physics_flags(p)
    p.add_argument("--d-grid", dest="d_grid", default="0.05:0.95:181", help="lattice grid min:max:count")
    _add_output_flags(p, required=False)

    p = cmds.add_parser("verify", help="run the numbered verification suite")
    p.add_argument("--only", help="comma-separated check numbers, e.g. 1,7,13")
    return parser


def _merged_settings(args) -> RunSettings:
    raw = dict(read_settings_mapping(args.config)) if getattr(args, "config", None) else {}
    overrides = {
        "lattice_constant": getattr(args, "d", None),
        "gamma_r": getattr(args, "gamma_r", None),
        "polarization": getattr(args, "pol", None),
        "plane": getattr(args, "plane", None),
        "omega_c": getattr(args, "omega_c", None),
        "delta_c": getattr(args, "delta_c", None),
    }
    theta = getattr(args, "theta", None)
    if theta is not None and not isinstance(theta, str):
        overrides["theta"] = theta
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    settings = settings_from_mapping(raw)
    probe_pol = getattr(args, "probe_pol", None)
    if probe_pol:
        settings = dataclasses.replace(
            settings, geometry=dataclasses.replace(settings.geometry, probe_pol=probe_pol)
        )
    return settings


def _accel(args) -> AccelParams:
    kwargs = {}
    if getattr(args, "r0", None) is not None:
        kwargs["base_radius"] = args.r0
    if getattr(args, "sum_tol", None) is not None:
        kwargs["tolerance"] = args.sum_tol
    return AccelParams(**kwargs)


def _pick_format(args) -> str:
    if args.format:
        return args.format
    return "json" if str(args.output).endswith(".json") else "csv"


def _write(args, table: SweepTable) -> None:
    fmt = _pick_format(args)
    write_table(table, fmt, args.output)
    print(f"wrote {args.output} ({table.n_rows} rows, {fmt})")


def _cmd_bands(args) -> int:
    settings = _merged_settings(args)
    waypoints = named_bz_waypoints(args.path, settings.config)
    if args.samples < 1:
        raise OutOfRange(f"--samples must be >= 1, got {args.samples}")
    path = bz_path(waypoints, args.samples + 1, settings.config)
    table = band_structure(
        path, settings.config, accel=_accel(args), include_shift=not args.no_shift
    )
    table.meta["path"] = args.path.upper()
    _write(args, table)
    return 0


def _cmd_mode(args) -> int:
    settings = _merged_settings(args)
    theta_text = args.theta if args.theta is not None else "0.0"
    if ":" in str(theta_text):
        grid = parse_range(str(theta_text))
        table = mode_vs_angle(
            grid,
            settings.geometry.plane,
            settings.config,
            accel=_accel(args),
            include_shift=not args.no_shift,
        )
        if not args.output:
            raise OutOfRange("an angle grid needs -o/--output for the table")
        _write(args, table)
        return 0
    geometry = dataclasses.replace(settings.geometry, theta=float(theta_text))
    if args.no_shift:
        table = mode_vs_angle(
            [geometry.theta],
            geometry.plane,
            settings.config,
            accel=_accel(args),
            include_shift=False,
        )
        shift, rate = math.nan, table.column("gamma_k")[0]
        flags = table.column("flags")[0]
        print(
            f"theta={geometry.theta:.6f} plane={geometry.plane} "
            f"delta_k=nan gamma_k={rate:.6f} flags={flags or '-'}"
        )
    else:
        mp = directional_mode(geometry, settings.config, accel=_accel(args))
        print(
            f"theta={geometry.theta:.6f} plane={geometry.plane} "
            f"delta_k={mp.delta_k:+.6f} gamma_k={mp.gamma_k:.6f} "
            f"shift_error={mp.shift_error:.1e} n_propagating={mp.n_propagating} "
            f"anomaly={mp.anomaly}"
        )
        if args.output:
            table = SweepTable(
                columns={
                    "theta": [geometry.theta],
                    "delta_k": [mp.delta_k],
                    "gamma_k": [mp.gamma_k],
                    "flags": [""],
                },
                meta={"plane": geometry.plane},
            )
            _write(args, table)
    return 0


def _cmd_response(args) -> int:
    settings = _merged_settings(args)
    mp = directional_mode(settings.geometry, settings.config, accel=_accel(args))
    params = eit_params(mp, settings.drive, settings.config)
    table = susceptibility_spectrum(parse_range(args.dp), params)
    table.meta["theta"] = settings.geometry.theta
    table.meta["plane"] = settings.geometry.plane
    _write(args, table)
    return 0


def _cmd_spectra(args) -> int:
    settings = _merged_settings(args)
    table = rt_spectrum(
        parse_range(args.dp),
        settings.geometry,
        settings.drive,
        settings.config,
        accel=_accel(args),
    )
    _write(args, table)
    return 0


def _cmd_sweep(args) -> int:
    settings = _merged_settings(args)
    axes = {}
    for axis_text in args.axis:
        name, _, rest = axis_text.partition(":")
        if not rest:
            raise OutOfRange(f"axis {axis_text!r} must look like name:min:max:count")
        axes[name] = parse_range(rest)
    table = spectra_sweep(
        axes,
        parse_range(args.dp),
        settings.geometry,
        settings.drive,
        settings.config,
        accel=_accel(args),
    )
    _write(args, table)
    return 0


def _cmd_diffraction(args) -> int:
    settings = _merged_settings(args)
    threshold = diffraction_threshold(settings.geometry)
    print(
        f"d_star={threshold.d_star:.9f} order=({threshold.order[0]},{threshold.order[1]}) "
        f"theta={settings.geometry.theta:.6f} plane={settings.geometry.plane}"
    )
    if args.output:
        grid = parse_range(args.d_grid)
        table = mode_vs_lattice(grid, settings.geometry, settings.config, include_shift=False)
        if settings.geometry.plane == "xz" and settings.config.polarization[0] == 1.0:
            terms = [order_contribution_xx(float(d), settings.geometry.theta) for d in grid]
            columns = dict(table.columns)
            flags = columns.pop("flags")
            columns["order_xx_re"] = [t.value.real for t in terms]
            columns["order_xx_im"] = [t.value.imag for t in terms]
            columns["order_xx_anomaly"] = [int(t.anomaly) for t in terms]
            columns["flags"] = flags
            table = SweepTable(columns=columns, meta=table.meta)
        table.meta["d_star"] = threshold.d_star
        table.meta["order"] = list(threshold.order)
        _write(args, table)
    return 0


def _cmd_verify(args) -> int:
    only = None
    if args.only:
        try:
            only = [int(tok) for tok in args.only.replace(",", " ").split()]
        except ValueError:
            raise OutOfRange(f"--only wants numbers like 1,7,13; got {args.only!r}") from None
    results = verify_suite(only=only)
    for res in results:
        print(res.report_line())
        for name, ok, detail in res.sub:
            print(f"      {'ok  ' if ok else 'FAIL'} {name}: {detail}")
    n_pass = sum(1 for r in results if r.passed)
    print(f"{n_pass}/{len(results)} checks passed")
    return 0 if n_pass == len(results) else 2


_COMMANDS = {
    "bands": _cmd_bands,
    "mode": _cmd_mode,
    "response": _cmd_response,
    "spectra": _cmd_spectra,
    "sweep": _cmd_sweep,
    "diffraction": _cmd_diffraction,
    "verify": _cmd_verify,
}


def _emit_error(code: str, message: str) -> None:
    safe = str(message).replace("'", "\\'")
    print(f"arraymirror-error code={code} message='{safe}'", file=sys.stderr)


def _fold_negative_ranges(argv) -> list:
    """Glue range values that start with a minus onto their flag.

    argparse reads "--dp -40:60:1001" as a missing argument because the
    value looks like an option. Folding it into "--dp=-40:60:1001" keeps
    the natural spelling working.
    """
    folded = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if token == "--dp" and nxt is not None and nxt.startswith("-") and ":" in nxt:
            folded.append(f"{token}={nxt}")
            skip = True
        else:
            folded.append(token)
    return folded


def run(argv) -> int:
    """Parse argv and dispatch; numeric exit code, never raises."""
    try:
        args = build_parser().parse_args(_fold_negative_ranges(list(argv)))
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        _emit_error("Usage", str(exc))
        return 1
    except _VALIDATION_ERRORS as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    except _NUMERICAL_ERRORS as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except ArrayMirrorError as exc:  # any future subclass: treat as validation
        _emit_error(type(exc).__name__, str(exc))
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
