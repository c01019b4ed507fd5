"""``obscon`` command-line interface.

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time

from .errors import ConfigurationError, NumericalFailure, ObsconError
from .experiments import (
    ExperimentConfig,
    parse_list,
    run_constant,
    run_disk_tables,
    run_functional,
    run_optimize,
    run_table1,
)
from .optimizer import write_density_csv
from .spectral_basis import Domain

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
CONFIG_SECTION = "obscon"
SINGLE_RUN_EPS = (0.0,)


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="key=value file; section [obscon] or no section")
    p.add_argument("--domain", choices=[d.value for d in Domain])
    p.add_argument("--potential", help="interval-x2, disk-1/r2 or disk-r")
    p.add_argument("--eps", help="comma-separated epsilon list")
    p.add_argument("--delta", help="comma-separated delta list")
    p.add_argument("--N", type=int, dest="N", help="number of modes")
    p.add_argument("--truncation", type=int, help="modes in the perturbation sums (default N)")
    p.add_argument("--subset", help="whole, sectors, or lo:hi[,lo:hi...] (pi allowed)")
    p.add_argument("--T", type=float, dest="T", help="observation time")
    p.add_argument("--L", type=float, dest="L", help="measure fraction")
    p.add_argument("--mesh", type=int, help="grid increments (per axis on the disk)")
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--full-precision", action="store_true", default=None,
                   help="17 significant digits in CSV instead of 9 decimals")
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall time from JSON (byte-reproducible output)")
    p.add_argument("--dat", help="directory for gnuplot .dat side outputs")


def build_parser():
    parser = _Parser(prog="obscon", description=(
        "Observability functionals for -Laplacian + eps V0 on the unit interval and disk."))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "table1": "J_N on [0, 0.5] over the (eps, delta) grid, interval with V0 = x^2",
        "disk-tables": "J_N on the quarter sectors of the disk for V0 = 1/r^2 and V0 = r",
        "functional": "J_N for one configuration",
        "constant": "finite-time and asymptotic observability constants",
        "optimize": "maximise J_N over densities of mass fraction L",
        "selftest": "fast internal consistency checks",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text, description=text))
    return parser


def _read_config_file(path):
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            body = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    if not body.lstrip().startswith("["):
        body = f"[{CONFIG_SECTION}]\n" + body
    try:
        cp.read_string(body, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"config {path}: {exc}") from exc
    if not cp.has_section(CONFIG_SECTION):
        raise ConfigurationError(f"config {path}: missing [{CONFIG_SECTION}] section")
    return dict(cp.items(CONFIG_SECTION))


_CONVERTERS = {
    "domain": Domain.parse, "potential": str, "eps": parse_list, "delta": parse_list,
    "subset": str, "N": int, "n": int, "truncation": int, "mesh": int, "T": float, "t": float,
    "L": float, "l": float, "seed": int, "out": str, "format": str,
    "full_precision": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
}


def _convert(key, value):
    try:
        return _CONVERTERS[key](value)
    except KeyError:
        raise ConfigurationError(f"{key}: unknown configuration key") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{key}: invalid value {value!r}") from exc


def resolve_config(args):
    """Defaults for the domain, then the config file, then flags."""
    values = {}
    if args.config:
        for key, value in _read_config_file(args.config).items():
            key = key.replace("-", "_")
            values[{"n": "N", "t": "T", "l": "L"}.get(key, key)] = _convert(key, value)
    for key in ("domain", "potential", "eps", "delta", "subset", "N", "truncation", "mesh",
                "T", "L", "seed", "out", "format", "full_precision"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag)
    if args.command == "disk-tables":
        values.setdefault("domain", Domain.UNIT_DISK)
    domain = values.get("domain") or Domain.UNIT_INTERVAL
    base = ExperimentConfig.defaults(domain)
    if args.command in ("functional", "constant", "optimize"):
        base = base.updated(eps=SINGLE_RUN_EPS, format="json")
    if args.no_timing:
        values["timing"] = False
    if "potential" not in values and "domain" in values:
        values["potential"] = base.potential
    try:
        return base.updated(**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def _emit(text, path):
    if not path:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc.strerror}") from exc


def _dat(directory, name, pairs):
    if not directory:
        return
    try:
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, name), "w") as fh:
            for x, y in pairs:
                fh.write(f"{x} {y!r}\n")
    except OSError as exc:
        raise ConfigurationError(f"cannot write {directory}/{name}: {exc.strerror}") from exc


def _json(data):
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _table_json(config, tables, wall):
    data = {"config": config.echo(), "tables": [
        {"title": t.title, "eps": list(t.eps), "delta": list(t.delta),
         "values": t.values.tolist()} for t in tables]}
    if config.timing:
        data["wall_time_s"] = wall
    return _json(data)


def _suffixed(path, suffix):
    root, ext = os.path.splitext(path)
    return f"{root}{suffix}{ext}"


def _run(args):
    config = resolve_config(args)
    cmd = args.command
    if cmd == "selftest":
        from .selftest import run_selftest
        return run_selftest(sys.stdout)
    start = time.perf_counter()
    if cmd == "table1":
        table = run_table1(config)
        wall = time.perf_counter() - start
        text = (table.to_csv(config.full_precision) if config.format == "csv"
                else _table_json(config, [table], wall))
        _emit(text, config.out)
    elif cmd == "disk-tables":
        tables = run_disk_tables(config)
        wall = time.perf_counter() - start
        if config.format == "json":
            _emit(_table_json(config, tables, wall), config.out)
        elif config.out:
            for t, tag in zip(tables, ("_inverse_square", "_linear")):
                _emit(t.to_csv(config.full_precision), _suffixed(config.out, tag))
        else:
            for t in tables:
                sys.stdout.write(f"# {t.title}\n" + t.to_csv(config.full_precision))
    elif cmd in ("functional", "constant"):
        data = (run_functional if cmd == "functional" else run_constant)(config)
        _dat(args.dat, f"{cmd}_masses.dat", enumerate(data["per_mode_mass"], 1))
        _emit(_json(data) if config.format == "json" else _flat_csv(data), config.out)
    elif cmd == "optimize":
        data, sol = run_optimize(config)
        _dat(args.dat, "optimize_masses.dat", enumerate(data["per_mode_mass"], 1))
        _dat(args.dat, "optimize_trace.dat", enumerate(sol.trace))
        if args.dat:
            write_density_csv(sol.density, os.path.join(args.dat, "optimize_density.csv"))
        _emit(_json(data) if config.format == "json" else _flat_csv(data), config.out)
    return EXIT_OK


def _flat_csv(data):
    rows = ["key,value"]
    for key in sorted(data):
        value = data[key]
        if isinstance(value, (int, float, str)) or value is None:
            rows.append(f"{key},{value!r}" if isinstance(value, float) else f"{key},{value}")
    rows.append("mode,mass")
    rows.extend(f"{i},{m!r}" for i, m in enumerate(data.get("per_mode_mass", []), 1))
    return "\n".join(rows) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except NumericalFailure as exc:
        print(f"obscon: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, ObsconError) as exc:
        print(f"obscon: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
