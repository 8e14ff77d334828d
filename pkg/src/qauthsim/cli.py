"""Command-line harness.

Two subcommands: ``tables`` prints the oracle's entanglement-swapping and
Pauli-on-Bell tables; ``run`` loads a line-oriented ``key = value`` config,
executes a sampled or exact experiment, writes a JSON or CSV report, and
prints a one-line summary.  Reports are deterministic: identical configs
produce byte-identical files (reals at 12 significant digits, no
timestamps).

Exit codes: 0 success, 2 configuration error, 3 report I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, oracle, protocol
from .adversary import StrategyId
from .protocol import Decision, ProtocolConfig, Role
from .qsim import BellLabel, PauliLabel


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass
class RunConfig:
    """Everything one ``run`` invocation needs.

    Protocol-level fields mirror ProtocolConfig; the rest select the
    strategy, sampled-vs-exact mode, and report shape.
    """

    rounds: int = 16
    decoys_per_sequence: int = 4
    decoy_error_threshold: float = 0.0
    direction: Role = Role.ALICE
    seed: int = 0
    strategy: StrategyId = StrategyId.HONEST
    mode: str = "sampled"
    samples: int = 10000
    output_path: "str | None" = None
    format: str = "json"

    def __post_init__(self) -> None:
        self.protocol_config()  # validates the protocol-side fields
        if not isinstance(self.strategy, StrategyId):
            raise ValueError(f"strategy must be a StrategyId, got {self.strategy!r}")
        if self.mode not in ("sampled", "exact"):
            raise ValueError(f"mode must be 'sampled' or 'exact', got {self.mode!r}")
        if self.mode == "sampled" and (
            not isinstance(self.samples, int) or self.samples < 1
        ):
            raise ValueError(f"sampled mode needs samples >= 1, got {self.samples!r}")
        if self.mode == "exact" and self.strategy is StrategyId.INTERCEPT_RESEND:
            raise ValueError(
                "exact mode enumerates Honest and PreMeasure only; "
                "InterceptResend is sampled"
            )
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be 'json' or 'csv', got {self.format!r}")

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            rounds=self.rounds,
            decoys_per_sequence=self.decoys_per_sequence,
            decoy_error_threshold=self.decoy_error_threshold,
            direction=self.direction,
            seed=self.seed,
        )


def _parse_uint(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise ValueError(f"expected a non-negative integer, got {text!r}")
    return value


def _parse_unit_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"expected a value in [0, 1], got {text!r}")
    return value


def _parse_choice(options: dict):
    def parse(text: str):
        if text not in options:
            expected = ", ".join(sorted(options))
            raise ValueError(f"expected one of {expected}, got {text!r}")
        return options[text]

    return parse


_FIELD_PARSERS = {
    "rounds": _parse_uint,
    "decoys_per_sequence": _parse_uint,
    "decoy_error_threshold": _parse_unit_float,
    "direction": _parse_choice({"Alice": Role.ALICE, "Bob": Role.BOB}),
    "seed": _parse_uint,
    "strategy": _parse_choice({s.value: s for s in StrategyId}),
    "mode": _parse_choice({"sampled": "sampled", "exact": "exact"}),
    "samples": _parse_uint,
    "output_path": str,
    "format": _parse_choice({"json": "json", "csv": "csv"}),
}


def load_config(path) -> RunConfig:
    """Parse a ``key = value`` config file ('#' starts a comment).

    Unknown keys, duplicate keys, and out-of-range values are errors,
    reported with the key name and line number.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        parser = _FIELD_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from exc
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _twelve(x: float) -> float:
    """Round to 12 significant digits (the report serialization contract)."""
    return float(f"{x:.12g}")


def _rate_fields(prefix: str, estimate) -> dict:
    if estimate is None:
        return {
            f"{prefix}_rate": None,
            f"{prefix}_low": None,
            f"{prefix}_high": None,
            f"{prefix}_trials": None,
        }
    return {
        f"{prefix}_rate": _twelve(estimate.rate),
        f"{prefix}_low": _twelve(estimate.low),
        f"{prefix}_high": _twelve(estimate.high),
        f"{prefix}_trials": estimate.trials,
    }


def _sampled_results(config: RunConfig) -> list:
    master = np.random.default_rng(config.seed)
    alphabet = list(PauliLabel)
    stats = []
    for _ in range(config.samples):
        run_seed = int(master.integers(0, 2**63))
        keys = [alphabet[int(j)] for j in master.integers(0, 4, size=config.rounds)]
        run_config = ProtocolConfig(
            rounds=config.rounds,
            decoys_per_sequence=config.decoys_per_sequence,
            decoy_error_threshold=config.decoy_error_threshold,
            direction=config.direction,
            seed=run_seed,
        )
        transcript, _, report = protocol.run_protocol(run_config, keys, config.strategy)
        stats.extend(oracle.collect_round_stats(transcript, report, keys))
    rates = oracle.sampled_rates(stats)
    return [
        {
            "strategy": config.strategy.value,
            "mode": "sampled",
            "key": None,
            "samples": config.samples,
            "rounds_executed": len(stats),
            **_rate_fields("accept", rates.accept),
            **_rate_fields("detection", rates.detection),
            **_rate_fields("key_recovery", rates.key_recovery),
            "tv_distance_vs_honest": None,
            "accept_probability": None,
            "support_size": None,
        }
    ]


def _exact_results(config: RunConfig) -> list:
    rows = []
    for key in PauliLabel:
        dist = oracle.exact_transcript_distribution(
            config.strategy, key, config.direction
        )
        honest = oracle.exact_transcript_distribution(
            StrategyId.HONEST, key, config.direction
        )
        accept = sum(
            p
            for (c, a, b), p in dist.items()
            if protocol.e3_verify(a, b, c, key) is Decision.ACCEPT
        )
        rows.append(
            {
                "strategy": config.strategy.value,
                "mode": "exact",
                "key": str(key),
                "samples": None,
                "rounds_executed": None,
                **_rate_fields("accept", None),
                **_rate_fields("detection", None),
                **_rate_fields("key_recovery", None),
                "tv_distance_vs_honest": _twelve(oracle.tv_distance(dist, honest)),
                "accept_probability": _twelve(accept),
                "support_size": sum(1 for p in dist.values() if p > 1e-12),
            }
        )
    return rows


def _config_echo(config: RunConfig) -> dict:
    return {
        "rounds": config.rounds,
        "decoys_per_sequence": config.decoys_per_sequence,
        "decoy_error_threshold": _twelve(config.decoy_error_threshold),
        "direction": config.direction.value,
        "seed": config.seed,
        "strategy": config.strategy.value,
        "mode": config.mode,
        "samples": config.samples,
        "format": config.format,
    }


def build_report(config: RunConfig) -> dict:
    results = (
        _sampled_results(config) if config.mode == "sampled" else _exact_results(config)
    )
    return {
        "tool": "qauthsim",
        "version": __version__,
        "config": _config_echo(config),
        "results": results,
    }


_CSV_COLUMNS = [
    "strategy",
    "mode",
    "key",
    "samples",
    "rounds_executed",
    "accept_rate",
    "accept_low",
    "accept_high",
    "accept_trials",
    "detection_rate",
    "detection_low",
    "detection_high",
    "detection_trials",
    "key_recovery_rate",
    "key_recovery_low",
    "key_recovery_high",
    "key_recovery_trials",
    "tv_distance_vs_honest",
    "accept_probability",
    "support_size",
]


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# {report['tool']} {report['version']}\n")
    for key, value in report["config"].items():
        buf.write(f"# {key} = {value}\n")
    writer = csv.DictWriter(buf, fieldnames=_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in report["results"]:
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in _CSV_COLUMNS})
    return buf.getvalue()


def render_tables() -> str:
    """The 16 swap tables and the 16-entry Pauli-on-Bell map, fixed order."""
    lines = [
        "Entanglement swapping tables",
        "inputs: M on (A1,B1), N on (A2,B2); outputs: P on (A1,A2), Q on (B1,B2)",
        "",
    ]
    for m in BellLabel:
        for n in BellLabel:
            table = oracle.swap_table(m, n)
            lines.append(f"M={m} N={n}")
            for (p, q), prob in table.joint.items():
                if prob > 1e-12:
                    lines.append(f"  P={p} Q={q}  {prob:.4f}")
    lines.append("")
    lines.append("Pauli action on Bell labels")
    for p in PauliLabel:
        for m in BellLabel:
            lines.append(f"  {str(p):<2} on {m} -> {oracle.pauli_bell_map(p, m)}")
    return "\n".join(lines) + "\n"


def _summary_line(report: dict, path) -> str:
    config = report["config"]
    rows = report["results"]
    parts = [f"strategy={config['strategy']}", f"mode={config['mode']}"]
    if config["mode"] == "sampled":
        row = rows[0]
        parts += [
            f"samples={row['samples']}",
            f"rounds_executed={row['rounds_executed']}",
            f"accept_rate={row['accept_rate']}",
            f"detection_rate={row['detection_rate']}",
        ]
        if row["key_recovery_rate"] is not None:
            parts.append(f"key_recovery_rate={row['key_recovery_rate']}")
    else:
        parts += [
            "keys=4",
            f"max_tv_vs_honest={max(r['tv_distance_vs_honest'] for r in rows)}",
            f"min_accept_probability={min(r['accept_probability'] for r in rows)}",
        ]
    parts.append(f"report={path}")
    return " ".join(parts)


def cmd_tables(out=None) -> int:
    (out or sys.stdout).write(render_tables())
    return 0


def cmd_run(config: RunConfig, output_override=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    report = build_report(config)
    text = render_json(report) if config.format == "json" else render_csv(report)
    path = output_override or config.output_path or f"report.{config.format}"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write report to {path}: {exc}", file=err)
        return 3
    print(_summary_line(report, path), file=out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qauthsim",
        description="Simulate a three-party quantum authentication protocol "
        "and the center's eavesdropping strategies.",
    )
    parser.add_argument(
        "--version", action="version", version=f"qauthsim {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser(
        "tables", help="print the entanglement-swapping and Pauli-Bell tables"
    )
    run_parser = subparsers.add_parser(
        "run", help="execute a configured experiment and write a report"
    )
    run_parser.add_argument(
        "--config", required=True, help="path to a 'key = value' config file"
    )
    run_parser.add_argument(
        "--output", help="report path (overrides output_path from the config)"
    )
    args = parser.parse_args(argv)
    if args.command == "tables":
        return cmd_tables()
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return cmd_run(config, args.output)


if __name__ == "__main__":
    sys.exit(main())
