"""Configuration-driven experiment runner.

Usage:

    orliczfem run CONFIG [--jobs N] [--out DIR] [--seed S]
    orliczfem list-suites [NAME]

Configs are INI-style key=value sections (see ``list-suites NAME`` for a
template of each suite).  Exit codes: 0 when every suite contract held,
1 when a contract was violated (the failures are enumerated on stderr),
2 for config parse/validation errors.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

from .nfunctions import DomainError
from .suites import SUITES, run_suite
from .tableio import write_csv, write_json

__all__ = ["main", "parse_config", "ConfigError"]


class ConfigError(ValueError):
    """Malformed configuration; message carries location when known."""


_FLOAT_LIST = "float_list"

_SPEC_KEYS = {
    "variant": str,
    "p": float,
    "q": float,
    "delta": float,
    "trunc_lo": float,
    "trunc_hi": float,
}
_SOLVER_KEYS = {"newton_tol": float, "max_iters": int, "armijo_c": float}

_SCHEMAS = {
    "indices_suite": {"spec": _SPEC_KEYS},
    "hammer_suite": {"hammer": {"pairs": int, "fd_samples": int}, "spec": _SPEC_KEYS},
    "korn_suite": {
        "korn": {"ensemble": int},
        "mesh": {"domain": str, "h": _FLOAT_LIST},
        "sweep": {"p_values": _FLOAT_LIST},
    },
    "manufactured": {"manufactured": {"h": _FLOAT_LIST}, "solver": _SOLVER_KEYS},
    "regularity_sweep": {
        "sweep": {"p_values": _FLOAT_LIST},
        "mesh": {"domain": str, "h": _FLOAT_LIST, "lattice_n": int},
        "solver": _SOLVER_KEYS,
        "schedule": {"delta_lo": _FLOAT_LIST, "delta_hi": _FLOAT_LIST},
        "forcing": {"amplitude": float},
    },
    "truncation_suite": {"truncation": {"lattice_n": int}},
}

_EXPERIMENT_KEYS = {"kind": str, "seed": int, "jobs": int, "out": str}


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is _FLOAT_LIST:
            values = [float(tok) for tok in raw.replace(",", " ").split()]
            if not values:
                raise ValueError("empty list")
            return values
        return kind(raw)
    except ValueError:
        raise ConfigError(
            f"key '{key}' in section [{section}] has invalid value {raw!r}"
        ) from None


def parse_config(path: str):
    """Parse and validate a config file; returns (kind, seed, jobs, out, options)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        where = f" (line {line})" if line else ""
        raise ConfigError(f"config parse error{where}: {exc.message.splitlines()[0]}") from None

    if "experiment" not in parser:
        raise ConfigError("config is missing the [experiment] section")
    exp = dict(parser["experiment"])
    for key in exp:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"key '{key}' in section [experiment] is not recognised")
    kind = exp.get("kind")
    if kind is None:
        raise ConfigError("[experiment] must set 'kind'")
    if kind not in _SCHEMAS:
        raise ConfigError(f"unknown suite kind {kind!r}; valid: {', '.join(sorted(_SCHEMAS))}")
    if "seed" not in exp:
        raise ConfigError("[experiment] must set 'seed' (runs are seeded, deterministic)")
    seed = _convert("experiment", "seed", exp["seed"], int)
    jobs = _convert("experiment", "jobs", exp["jobs"], int) if "jobs" in exp else 1
    out = exp.get("out")

    schema = _SCHEMAS[kind]
    options: dict = {}
    for section in parser.sections():
        if section == "experiment":
            continue
        if section not in schema:
            raise ConfigError(f"section [{section}] does not apply to suite '{kind}'")
        options[section] = {}
        for key, raw in parser[section].items():
            if key not in schema[section]:
                raise ConfigError(f"key '{key}' in section [{section}] is not recognised")
            options[section][key] = _convert(section, key, raw, schema[section][key])
    return kind, seed, jobs, out, options


def write_outputs(result, seed: int, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, f"{result.suite}.csv"), result.header, result.rows)
    write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "suite": result.suite,
            "seed": seed,
            "passed": result.passed,
            "contracts": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in result.contracts
            ],
            "envelopes": result.summary,
        },
    )
    if result.traces:
        trace_dir = os.path.join(out_dir, "trace")
        os.makedirs(trace_dir, exist_ok=True)
        for name, trace in sorted(result.traces.items()):
            trace.to_csv(os.path.join(trace_dir, f"{name}.csv"))


def _cmd_run(args) -> int:
    try:
        kind, seed, jobs, out, options = parse_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        seed = args.seed
    if args.jobs is not None:
        jobs = args.jobs
    out_dir = args.out or out or "."

    try:
        result = run_suite(kind, options, seed, jobs)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    write_outputs(result, seed, out_dir)
    for check in result.contracts:
        status = "pass" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.detail}")
    failed = [c for c in result.contracts if not c.passed]
    if failed:
        print(
            f"{len(failed)} contract(s) violated: " + ", ".join(c.name for c in failed),
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_list(args) -> int:
    if args.name is not None:
        if args.name not in SUITES:
            print(f"error: unknown suite {args.name!r}", file=sys.stderr)
            return 2
        print(SUITES[args.name].template)
        return 0
    for name in sorted(SUITES):
        print(f"{name}: {SUITES[name].description}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="orliczfem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run a suite from a config file")
    run_parser.add_argument("config", help="path to the INI config")
    run_parser.add_argument("--jobs", type=int, default=None, help="worker pool size")
    run_parser.add_argument("--out", default=None, help="output directory")
    run_parser.add_argument("--seed", type=int, default=None, help="override the config seed")

    list_parser = sub.add_parser("list-suites", help="list suites or show one template")
    list_parser.add_argument("name", nargs="?", help="suite name to show a config template for")

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_list(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
