"""Command-line entry point: ``python -m cbw_gyro {simulate,compare,compile}``.

Settings resolve as built-in defaults < ``--config`` file < command-line
flags. The config file is flat ``key = value`` text whose keys are the long
flag names without dashes (``orders = 5000``, ``loss-exponent = 2``).

Exit codes: 0 success, 1 failed check, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import CavityConfig, default_grid, mode_traces, sweep
from .circuit import CircuitError, check, compile_chain, load
from .fringes import (
    AnalysisError,
    find_peaks,
    fwhm,
    principal_peak,
    verify_paper_cases,
    zeta_invariance,
)
from .optics import round_trip_matrix
from .reference import FabryPerotConfig, SagnacParams, fp_trace, sagnac_phase

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsing shared by flags and config files


def _phase_value(text: str) -> float:
    """Float, optionally written with ``pi`` (``pi/4``, ``3pi``, ``-2*pi``)."""
    s = text.strip().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    if "pi" not in s:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    num, _, den = s.partition("/")
    head = num.replace("*", "").replace("pi", "")
    try:
        coef = {"": 1.0, "-": -1.0, "+": 1.0}.get(head)
        coef = float(head) if coef is None else coef
        value = coef * math.pi / (float(den) if den else 1.0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a phase: {text!r}") from None
    return value


def _grid_value(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be MIN:MAX:STEPS, got {text!r}")
    lo, hi = _phase_value(parts[0]), _phase_value(parts[1])
    try:
        steps = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid steps must be an integer: {parts[2]!r}") from None
    return lo, hi, steps


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _phase_list(text: str) -> list:
    return [_phase_value(t) for t in text.split(",") if t.strip()]


def _bool_value(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# name -> (type, default). Names double as config-file keys.
CAVITY_OPTIONS = {
    "r": (float, 0.999),
    "orders": (int, 5000),
    "loss-exponent": (int, 1),
    "global-phase": (_bool_value, False),
    "convention": (str, "eq2"),
    "phi": (_phase_value, 0.0),
    "zeta": (_phase_value, 0.0),
    "zeta-mode": (str, "common"),
    "amplitude": (float, 1.0),
    "grid": (_grid_value, (-2 * math.pi, 2 * math.pi, 40001)),
    "workers": (int, 1),
}
FP_OPTIONS = {
    "fp-r": (float, None),  # None: same as r
    "fp-center": (_phase_value, math.pi),
}
COMPARE_OPTIONS = {
    **FP_OPTIONS,
    "area": (float, 1.0),
    "wavelength": (float, 633e-9),
    "omega": (float, 0.0),
    "tol": (float, 1e-5),
    "zeta-grid": (_phase_list, [0.0, math.pi / 4, math.pi / 2, math.pi, 3 * math.pi]),
}
SIMULATE_OPTIONS = {
    **FP_OPTIONS,
    "modes": (_int_list, []),
    "with-fp": (_bool_value, False),
    "normalize": (_bool_value, True),
}
# settings that change how, not what, is computed; kept out of the report echo
EXECUTION_KEYS = {"workers"}


def _key(name: str) -> str:
    return name.replace("-", "_")


def read_config_file(path, options: dict) -> dict:
    """Parse a flat ``key = value`` file restricted to `options`."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        name = key.strip().lstrip("-")
        if name not in options:
            raise UsageError(f"{path}:{lineno}: unknown setting {name!r}")
        conv = options[name][0]
        try:
            values[_key(name)] = conv(value.strip())
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {name!r}: {exc}") from None
    return values


def resolve(args: argparse.Namespace, options: dict) -> dict:
    """Merge defaults < config file < flags into one flat dict."""
    resolved = {_key(name): default for name, (_, default) in options.items()}
    if getattr(args, "config", None):
        resolved.update(read_config_file(args.config, options))
    for name in options:
        value = getattr(args, _key(name), None)
        if value is not None:
            resolved[_key(name)] = value
    return resolved


def _add_options(parser: argparse.ArgumentParser, options: dict):
    for name, (conv, default) in options.items():
        if isinstance(default, tuple):
            shown = ":".join(f"{v:.6g}" for v in default)
        elif isinstance(default, list):
            shown = ",".join(f"{v:.6g}" for v in default) or "none"
        else:
            shown = default
        if conv is _bool_value:
            parser.add_argument(f"--{name}", dest=_key(name), action="store_true",
                                default=None, help=f"default {shown}")
            parser.add_argument(
                f"--no-{name}", dest=_key(name), action="store_false", default=None
            )
        else:
            parser.add_argument(f"--{name}", dest=_key(name), type=conv, default=None,
                                help=f"default {shown}")


def cavity_config(settings: dict) -> CavityConfig:
    try:
        return CavityConfig(
            r=settings["r"],
            max_order=settings["orders"],
            loss_exponent=settings["loss_exponent"],
            include_global_phase=settings["global_phase"],
            channel_convention=settings["convention"],
            phi=settings["phi"],
            zeta=settings["zeta"],
            zeta_mode=settings["zeta_mode"],
            input_amplitude=settings["amplitude"],
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def grid_from(settings: dict) -> np.ndarray:
    lo, hi, steps = settings["grid"]
    try:
        return default_grid(lo, hi, steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def fp_config(settings: dict, cfg: CavityConfig) -> FabryPerotConfig:
    fp_r = settings["fp_r"] if settings["fp_r"] is not None else cfg.r
    try:
        return FabryPerotConfig(r=fp_r, center=settings["fp_center"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, columns: dict):
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float) for n in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([_fmt(v) for v in row])


def _echo(settings: dict) -> dict:
    out = {}
    for k, v in sorted(settings.items()):
        if k in EXECUTION_KEYS:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    settings = resolve(args, {**CAVITY_OPTIONS, **SIMULATE_OPTIONS})
    cfg = cavity_config(settings)
    grid = grid_from(settings)
    bad = [m for m in settings["modes"] if not 1 <= m <= cfg.max_order]
    if bad:
        raise UsageError(f"--modes entries must lie in 1..{cfg.max_order}: {bad}")
    trace = sweep(cfg, grid=grid, normalize=settings["normalize"], workers=settings["workers"])
    columns = {"psi": grid, "I_A": trace.i_a, "I_B": trace.i_b}
    if settings["with_fp"]:
        columns["I_FP"] = fp_trace(fp_config(settings, cfg), grid).i_a
    for mt in mode_traces(settings["modes"], cfg, grid):
        columns[f"amp_A_m{mt.order}"] = mt.amp_a
    for mt in mode_traces(settings["modes"], cfg, grid):
        columns[f"amp_B_m{mt.order}"] = mt.amp_b
    write_csv(args.output, columns)
    return EXIT_OK


def _width_summary(cfg: CavityConfig, grid, fp, workers: int) -> dict:
    tr = sweep(cfg, grid=grid, workers=workers)
    try:
        w_cbw = fwhm(tr, principal_peak(tr))
        w_fp = fwhm(fp, principal_peak(fp))
    except AnalysisError:
        return {"fwhm_cbw": None, "resolution_gain": None}
    return {"fwhm_cbw": w_cbw, "resolution_gain": w_fp / w_cbw}


def build_report(settings: dict) -> tuple:
    """Run the CBW/FP comparison; returns ``(report, cbw_trace, fp_trace)``."""
    start = time.perf_counter()
    cfg = cavity_config(settings)
    grid = grid_from(settings)
    workers = settings["workers"]
    fp_cfg = fp_config(settings, cfg)
    try:
        sagnac = SagnacParams(settings["area"], settings["wavelength"], settings["omega"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    raw = sweep(cfg, grid=grid, normalize=False, workers=workers)
    cbw = raw.normalize()
    fp = fp_trace(fp_cfg, grid)
    cases = verify_paper_cases(cfg, settings["tol"], trace=raw)
    peaks = find_peaks(cbw, "A")
    try:
        w_cbw = fwhm(cbw, principal_peak(cbw))
        w_fp = fwhm(fp, principal_peak(fp))
        gain = w_fp / w_cbw
    except AnalysisError as exc:
        raise UsageError(f"fringe analysis failed: {exc}") from None

    alternates = {
        "global_phase_on": _width_summary(
            cfg.replace(include_global_phase=True), grid, fp, workers),
        "loss_exponent_2": _width_summary(cfg.replace(loss_exponent=2), grid, fp, workers),
    }
    zero_zeta = raw if cfg.zeta == 0.0 and cfg.zeta_mode == "common" else None
    zeta_dev = zeta_invariance(
        cfg, settings["zeta_grid"], grid=grid, workers=workers,
        base=zero_zeta.normalize() if zero_zeta is not None else None,
    )

    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": _echo(settings),
        "peaks": [{"position": p.position, "height": p.height, "index": p.index}
                  for p in peaks],
        "fwhm_cbw": w_cbw,
        "fwhm_fp": w_fp,
        "resolution_gain": gain,
        "alternate_conventions": alternates,
        "cases": cases.as_dict(),
        "zeta_max_dev": zeta_dev,
        "sagnac_psi": sagnac_phase(sagnac),
        "passed": cases.passed,
        "wall_time_s": time.perf_counter() - start,
    }
    return report, cbw, fp


def cmd_compare(args) -> int:
    settings = resolve(args, {**CAVITY_OPTIONS, **COMPARE_OPTIONS})
    report, cbw, fp = build_report(settings)
    Path(args.output).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                 encoding="utf-8")
    if args.trace:
        write_csv(args.trace, {"psi": cbw.psi_grid, "I_A": cbw.i_a, "I_B": cbw.i_b,
                               "I_FP": fp.i_a})
    for case in report["cases"]["cases"]:
        status = "pass" if case["passed"] else "FAIL"
        print(f"case ({case['name']}): {status}  residual={case['residual']:.3e}")
    print(f"fwhm_cbw={report['fwhm_cbw']:.6e}  fwhm_fp={report['fwhm_fp']:.6e}  "
          f"gain={report['resolution_gain']:.4f}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _parse_bindings(items) -> dict:
    bindings = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--bind expects NAME=VALUE, got {item!r}")
        try:
            bindings[name.strip()] = _phase_value(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    return bindings


def matrix_json(matrix: np.ndarray) -> list:
    return [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in matrix]


def format_matrix(matrix: np.ndarray) -> str:
    rows = []
    for row in matrix:
        rows.append("  ".join(f"{v.real:+.12f}{v.imag:+.12f}j" for v in row))
    return "\n".join(rows)


def cmd_compile(args) -> int:
    bindings = _parse_bindings(args.bind)
    try:
        ast = load(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from None
    except CircuitError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_USAGE
    for d in check(ast, args.chain):
        print(f"{args.file}:{d}", file=sys.stderr)
    chain = args.chain or ast.chains[-1].name
    try:
        matrix = compile_chain(ast, chain, bindings)
    except CircuitError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}: error: {d.message}" if d.line == 0 else f"{args.file}:{d}",
                  file=sys.stderr)
        return EXIT_USAGE
    payload = {"chain": chain, "bindings": bindings, "matrix": matrix_json(matrix)}
    status = EXIT_OK
    if args.verify_eq1:
        if "psi" not in bindings:
            raise UsageError("--verify-eq1 needs a binding for psi")
        expected = round_trip_matrix(bindings["psi"], bindings.get("phi", 0.0))
        err = float(np.max(np.abs(matrix - expected)))
        payload["verify_eq1"] = {"max_abs_error": err, "passed": err <= 1e-12}
        status = EXIT_OK if err <= 1e-12 else EXIT_FAIL
    print(format_matrix(matrix))
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbw-gyro", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sweep psi and write a CSV trace")
    sim.add_argument("--config", help="key = value file, overridden by flags")
    _add_options(sim, {**CAVITY_OPTIONS, **SIMULATE_OPTIONS})
    sim.add_argument("-o", "--output", required=True)
    sim.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare", help="CBW vs Fabry-Perot report (JSON)")
    cmp_.add_argument("--config", help="key = value file, overridden by flags")
    _add_options(cmp_, {**CAVITY_OPTIONS, **COMPARE_OPTIONS})
    cmp_.add_argument("-o", "--output", required=True)
    cmp_.add_argument("--trace", help="also write the traces as CSV")
    cmp_.set_defaults(func=cmd_compare)

    comp = sub.add_parser("compile", help="compile a .cir netlist to a 2x2 matrix")
    comp.add_argument("file")
    comp.add_argument("--chain", help="chain to compile (default: last defined)")
    comp.add_argument("--bind", action="append", metavar="NAME=VALUE")
    comp.add_argument("--verify-eq1", action="store_true",
                      help="fail unless the matrix equals the library round-trip product")
    comp.add_argument("-o", "--output")
    comp.set_defaults(func=cmd_compile)
    return parser


# flags whose values may legitimately start with "-" (negative phases, grids)
_SIGNED_VALUE_FLAGS = {"--grid", "--phi", "--zeta", "--fp-center", "--zeta-grid", "--bind",
                       "--omega"}


def _glue_signed_values(argv: list) -> list:
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in _SIGNED_VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_signed_values(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
