"""Command-line front end.

Subcommands ``roots``, ``kernel``, ``moduli``, ``simulate`` and ``sweep``
each build a :class:`Table` and write it as CSV (``#`` metadata lines, a
header row, 17 significant digits) or JSON. Failures exit nonzero with a
one-line JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import re
import sys
import traceback
from dataclasses import dataclass, field

import numpy as np

from biphasic import __version__
from biphasic.charroots import Family, find_roots
from biphasic.errors import BiphasicError, ValidationError
from biphasic.kernels import creep_M, relaxation_K
from biphasic.material import (
    DEFAULT_N_TERMS,
    MaterialParams,
    build_spectrum,
    derive_constants,
    load_material,
    spectrum_from_nu,
)
from biphasic.moduli import evaluate, frequency_grid, terms_for_frequency
from biphasic.response import (
    LoadingProtocol,
    ProtocolKind,
    contact_duration,
    default_time_grid,
    respond,
    simulate,
)

ENV_N_TERMS = "BIPHASIC_N_TERMS"

_UNITS = {
    "pressure": {"": 1.0, "pa": 1.0, "kpa": 1e3, "mpa": 1e6, "gpa": 1e9},
    "length": {"": 1.0, "m": 1.0, "mm": 1e-3, "um": 1e-6},
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Z]*)\s*$")


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)


def parse_quantity(text: str, kind: str, field_name: str) -> float:
    """Number with optional unit suffix (``0.5MPa``, ``3mm``), returned in SI."""
    m = _QUANTITY.match(str(text))
    if not m:
        raise ValidationError([f"{field_name}: cannot parse {text!r} as a number"])
    unit = m.group(2).lower()
    factors = _UNITS[kind]
    if unit not in factors:
        allowed = ", ".join(u for u in factors if u)
        raise ValidationError([f"{field_name}: unknown unit {m.group(2)!r} (use one of {allowed})"])
    return float(m.group(1)) * factors[unit]


def parse_grid(text: str, field_name: str) -> np.ndarray:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(n)
        values = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError([f"{field_name}: expected start:step:stop or a comma list, got {text!r}"]) from None
    return values


def _default_n_terms() -> int:
    raw = os.environ.get(ENV_N_TERMS)
    if raw is None:
        return DEFAULT_N_TERMS
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError([f"{ENV_N_TERMS}: expected an integer, got {raw!r}"]) from None
    return n


def _material(args, required=True):
    """MaterialParams from --config or the individual flags, or None."""
    flags = {
        "E_s": args.E_s,
        "k_perm": args.k_perm,
        "radius": args.radius,
        "height": args.height,
    }
    given = {k: v for k, v in flags.items() if v is not None}
    if args.config is not None:
        if given:
            raise ValidationError([f"--config cannot be combined with --{k.replace('_', '-')}" for k in given])
        p = load_material(args.config)
        if args.nu is not None and not math.isclose(p.nu_s, args.nu, rel_tol=0, abs_tol=1e-12):
            raise ValidationError([f"--nu {args.nu} contradicts nu_s = {p.nu_s!r} from {args.config}"])
        return p
    if not given:
        if required:
            raise ValidationError(["material: give --config or --E-s/--nu/--k-perm/--radius/--height"])
        return None
    missing = [f"--{k.replace('_', '-')}" for k in flags if k not in given]
    if args.nu is None:
        missing.append("--nu")
    if missing:
        raise ValidationError([f"missing {m}" for m in missing])
    return MaterialParams.from_young(
        parse_quantity(args.E_s, "pressure", "--E-s"),
        args.nu,
        float(args.k_perm),
        parse_quantity(args.radius, "length", "--radius"),
        parse_quantity(args.height, "length", "--height"),
    )


def _spectrum(args, required_material=False):
    p = _material(args, required=required_material)
    n = args.n_terms
    if n < 1:
        raise ValidationError([f"--n-terms must be >= 1, got {n}"])
    if p is not None:
        return p, build_spectrum(p, n)
    if args.nu is None:
        raise ValidationError(["give --nu or a material (--config)"])
    return None, spectrum_from_nu(args.nu, 1.0, n)


def _material_meta(p, spec):
    meta = {"nu_s": spec.nu_s, "n_terms": spec.n_terms}
    if p is not None:
        const = derive_constants(p)
        meta.update(p.to_dict())
        meta.update({"E_s_pa": const.E_s, "H_A_pa": const.H_A, "t_g_s": const.t_g})
    else:
        meta["t_g_s"] = "1 (dimensionless run)"
    return meta


def cmd_roots(args) -> Table:
    if args.nu is None:
        p = _material(args, required=True)
        nu = p.nu_s
    else:
        nu = args.nu
    n = args.n
    families = [Family.RELAXATION, Family.RETARDATION] if args.family == "both" else [Family.parse(args.family)]
    found = [find_roots(f, nu, n) for f in families]
    columns = ["index"]
    for f in found:
        tag = "alpha" if f.family is Family.RELAXATION else "beta"
        columns += [tag, f"{tag}_residual"]
    rows = []
    for i in range(n):
        row = [i + 1]
        for f in found:
            row += [float(f.roots[i]), float(f.residuals[i])]
        rows.append(row)
    meta = {"nu_s": nu, "c": {("alpha" if f.family is Family.RELAXATION else "beta"): f.c for f in found}}
    return Table(columns, rows, meta)


def cmd_kernel(args) -> Table:
    p, spec = _spectrum(args)
    if (args.t is None) == (args.t_hat is None):
        raise ValidationError(["give exactly one of --t (seconds) or --t-hat (dimensionless)"])
    if args.t is not None:
        if p is None:
            raise ValidationError(["--t needs a material (use --t-hat for a dimensionless run)"])
        t = parse_grid(args.t, "--t")
        t_hat = t / spec.t_g if spec.t_g > 0 else np.where(t == 0, 0.0, np.inf)
    else:
        t_hat = parse_grid(args.t_hat, "--t-hat")
        t = t_hat * spec.t_g
    if np.any(t_hat < 0):
        raise ValidationError(["time grid must be nonnegative"])
    rows = []
    scale = 2.0 * (1.0 + spec.nu_s)
    for ti, thi in zip(t, t_hat):
        if math.isinf(thi):
            k = relaxation_K(float(ti), spec, dimensional=True, tol=args.tol)
            m = creep_M(float(ti), spec, dimensional=True, tol=args.tol)
        else:
            k = relaxation_K(float(thi), spec, dimensional=False, tol=args.tol * scale)
            m = creep_M(float(thi), spec, dimensional=False, tol=args.tol / scale)
        K = k.value if k.dimensional else k.value / scale
        M = m.value if m.dimensional else m.value * scale
        tail = max(k.tail_bound / (1.0 if k.dimensional else scale), m.tail_bound * (1.0 if m.dimensional else scale))
        rows.append([float(ti), float(thi), K, M, K * scale, M / scale, tail])
    meta = _material_meta(p, spec)
    meta["tail_bound"] = "max truncation bound on K and M (dimensional)"
    return Table(["t", "t_hat", "K", "M", "K_hat", "M_hat", "tail_bound"], rows, meta)


def _omega_grid(args):
    if args.freq is not None:
        f = parse_grid(args.freq, "--freq")
    else:
        f = frequency_grid(args.f_min, args.f_max, args.points, args.spacing)
    if np.any(f < 0):
        raise ValidationError(["frequencies must be >= 0"])
    return 2.0 * math.pi * np.asarray(f, dtype=float)


_MODULI_COLUMNS = ["omega", "f_hz", "K1", "K2", "tan_delta", "M1", "M2", "K1_tilde", "M1_tilde"]


def _moduli_row(omega, spec, adaptive):
    use = terms_for_frequency(omega, spec) if adaptive and omega > 0 else spec
    ev = evaluate(omega, use)
    return [omega, omega / (2.0 * math.pi), ev.K1, ev.K2, ev.K2 / ev.K1, ev.M1, ev.M2, ev.K1_tilde, ev.M1_tilde], ev


def cmd_moduli(args) -> Table:
    p, spec = _spectrum(args)
    rows = []
    worst_tail = 0.0
    for omega in _omega_grid(args):
        row, ev = _moduli_row(float(omega), spec, args.adaptive_terms)
        rows.append(row)
        worst_tail = max(worst_tail, ev.tail_bound)
    meta = _material_meta(p, spec)
    meta["max_tail_bound"] = worst_tail
    meta["adaptive_terms"] = bool(args.adaptive_terms)
    return Table(list(_MODULI_COLUMNS), rows, meta)


def _protocol(args, omega):
    kind = ProtocolKind(args.protocol)
    if kind.displacement_driven:
        amp, pre = args.w0, args.w1
        if amp is None:
            raise ValidationError([f"--w0 is required for {kind.value}"])
        amp = parse_quantity(amp, "length", "--w0")
        pre = parse_quantity(pre, "length", "--w1") if pre is not None else 0.0
    else:
        amp, pre = args.F0, args.F1
        if amp is None:
            raise ValidationError([f"--F0 is required for {kind.value}"])
        amp, pre = float(amp), float(pre) if pre is not None else 0.0
    return LoadingProtocol(kind, omega, amp, pre)


def cmd_simulate(args) -> Table:
    p, spec = _spectrum(args, required_material=True)
    freq = args.freq_hz
    if freq is None or not freq > 0:
        raise ValidationError(["--freq must be a positive frequency in Hz"])
    proto = _protocol(args, 2.0 * math.pi * freq)
    if args.t is not None:
        times = parse_grid(args.t, "--t")
    else:
        times = default_time_grid(proto, periods=args.periods, points_per_period=args.points_per_period)
    trace = simulate(proto, p, spec, times)
    meta = _material_meta(p, spec)
    meta.update(trace.meta)
    meta["input"] = "displacement_m" if proto.kind.displacement_driven else "force_N"
    if proto.kind.halfsine:
        t_peak = proto.peak_time
        meta["t_peak_s"] = t_peak
        meta["response_at_peak"] = float(respond(t_peak, proto, p, spec))
        meta["contact_duration_s"] = contact_duration(proto, p, spec)
    rows = [[float(t), float(u), float(v)] for t, u, v in zip(trace.times, trace.inputs, trace.values)]
    return Table(["t", "input_value", "response_value"], rows, meta)


def cmd_sweep(args) -> Table:
    base = _material(args, required=True)
    nus = parse_grid(args.nu_list, "--nu-list") if args.nu_list else np.array([base.nu_s])
    const = derive_constants(base)
    omegas = _omega_grid(args)
    w0 = parse_quantity(args.w0, "length", "--w0")
    F0 = float(args.F0)
    rows = []
    for nu in nus:
        p = base if len(nus) == 1 and args.nu_list is None else MaterialParams.from_young(
            const.E_s, float(nu), base.k_perm, base.radius_a, base.height_h
        )
        spec = build_spectrum(p, args.n_terms)
        for omega in omegas:
            omega = float(omega)
            if omega <= 0:
                raise ValidationError(["sweep frequencies must be > 0"])
            row, ev = _moduli_row(omega, spec, args.adaptive_terms)
            use = terms_for_frequency(omega, spec) if args.adaptive_terms else spec
            disp = LoadingProtocol(ProtocolKind.HALFSINE_DISPLACEMENT, omega, w0)
            force = LoadingProtocol(ProtocolKind.HALFSINE_FORCE, omega, F0)
            peak_force = float(respond(disp.peak_time, disp, p, use))
            peak_disp = float(respond(force.peak_time, force, p, use))
            rows.append([float(p.nu_s)] + row + [peak_force, contact_duration(disp, p, use), peak_disp])
    meta = _material_meta(base, build_spectrum(base, args.n_terms))
    meta.update({"w0_m": w0, "F0_N": F0, "adaptive_terms": bool(args.adaptive_terms)})
    columns = ["nu_s"] + _MODULI_COLUMNS + ["peak_force_N", "contact_duration_s", "peak_displacement_m"]
    return Table(columns, rows, meta)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(table: Table) -> str:
    lines = [f"# {k} = {json.dumps(v) if isinstance(v, dict) else _fmt(v)}" for k, v in table.meta.items()]
    lines.append(",".join(table.columns))
    lines += [",".join(_fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render_json(table: Table) -> str:
    doc = {"meta": _jsonable(table.meta), "columns": table.columns, "rows": _jsonable(table.rows)}
    return json.dumps(doc, indent=1) + "\n"


def _add_common(sp):
    sp.add_argument("--config", help="JSON material file")
    sp.add_argument("--nu", type=float, help="Poisson ratio of the solid matrix")
    sp.add_argument("--E-s", dest="E_s", help="Young's modulus of the solid matrix (pa/kpa/mpa/gpa suffix)")
    sp.add_argument("--k-perm", dest="k_perm", help="permeability, m^4/(N s)")
    sp.add_argument("--radius", help="specimen radius (m/mm/um suffix)")
    sp.add_argument("--height", help="specimen thickness (m/mm/um suffix)")
    sp.add_argument("--n-terms", type=int, default=None, help=f"series truncation (default {DEFAULT_N_TERMS} or ${ENV_N_TERMS})")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default="-", help="output path, '-' for stdout")
    sp.add_argument("--no-timestamp", action="store_true", help="omit the timestamp metadata line")


def _add_freq(sp):
    sp.add_argument("--freq", help="frequencies in Hz: start:step:stop or comma list")
    sp.add_argument("--f-min", type=float, default=1e-4)
    sp.add_argument("--f-max", type=float, default=1e2)
    sp.add_argument("--points", type=int, default=61)
    sp.add_argument("--spacing", choices=("log", "linear"), default="log")
    sp.add_argument("--adaptive-terms", action="store_true", help="raise the truncation with frequency")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphasic", description="Biphasic unconfined compression under sinusoidal loading")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("roots", help="characteristic-equation roots")
    _add_common(sp)
    sp.add_argument("-n", type=int, default=10, help="number of roots")
    sp.add_argument("--family", choices=("alpha", "beta", "both"), default="both")
    sp.set_defaults(func=cmd_roots)

    sp = sub.add_parser("kernel", help="relaxation and creep functions on a time grid")
    _add_common(sp)
    sp.add_argument("--t", help="times in seconds: start:step:stop or comma list")
    sp.add_argument("--t-hat", dest="t_hat", help="dimensionless times")
    sp.add_argument("--tol", type=float, default=1e-12, help="truncation tolerance for K and M")
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("moduli", help="storage/loss moduli over a frequency grid")
    _add_common(sp)
    _add_freq(sp)
    sp.set_defaults(func=cmd_moduli)

    sp = sub.add_parser("simulate", help="time response of one loading protocol")
    _add_common(sp)
    sp.add_argument("--protocol", required=True, choices=[k.value for k in ProtocolKind])
    sp.add_argument("--freq", dest="freq_hz", type=float, required=True, help="loading frequency in Hz")
    sp.add_argument("--w0", help="displacement amplitude (m/mm/um suffix)")
    sp.add_argument("--w1", help="displacement preoffset (cyclic only)")
    sp.add_argument("--F0", help="force amplitude, N")
    sp.add_argument("--F1", help="force preload, N (cyclic only)")
    sp.add_argument("--t", help="times in seconds (default: auto grid)")
    sp.add_argument("--periods", type=float, default=2.0, help="periods covered by the auto grid (cyclic)")
    sp.add_argument("--points-per-period", type=int, default=40)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="moduli and half-sine snapshots over frequency and nu grids")
    _add_common(sp)
    _add_freq(sp)
    sp.add_argument("--nu-list", help="Poisson ratios to sweep at fixed E_s (comma list or start:step:stop)")
    sp.add_argument("--w0", default="1e-5", help="half-sine displacement amplitude")
    sp.add_argument("--F0", default="1.0", help="half-sine force amplitude, N")
    sp.set_defaults(func=cmd_sweep)
    return parser


def _provenance(exc) -> str:
    module = "biphasic.cli"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        name = frame.f_globals.get("__name__", "")
        if name.startswith("biphasic"):
            module = name
    return module


def error_record(exc) -> dict:
    record = {"error": type(exc).__name__, "module": _provenance(exc), "message": str(exc)}
    for attr in ("failures", "interval", "diagnostics", "trace"):
        if getattr(exc, attr, None):
            record[attr] = _jsonable(getattr(exc, attr))
    return record


def run(argv=None):
    """Parse ``argv`` and return ``(table, args)`` without writing anything."""
    args = build_parser().parse_args(argv)
    if args.n_terms is None:
        args.n_terms = _default_n_terms()
    table = args.func(args)
    table.meta = {"command": args.command, "version": __version__, **table.meta}
    if not args.no_timestamp:
        table.meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return table, args


def main(argv=None) -> int:
    try:
        table, args = run(argv)
        text = render_json(table) if args.format == "json" else render_csv(table)
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", newline="\n") as fh:
                fh.write(text)
    except (BiphasicError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps(_jsonable(error_record(exc)), default=str) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
