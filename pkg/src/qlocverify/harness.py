"""Command-line experiments.

Every experiment reads one JSON config (meters, seconds, radians). Trial ``t``
of a run with master seed ``s`` uses the seed ``trial_seed(s, t)``, so a
trial's result does not depend on how many trials were requested.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .adversary import AttackKind, AttackSpec, ClonerModel, run_cloner_attack, run_relay_attack
from .coding import BsmMode, channel_capacity
from .geomtime import Location, Station
from .masking import MaskKind, ensemble_fidelity_stats, mask_uniformity
from .protocol import Alphabet, ProtocolConfig, confidence_against_cloner, run_protocol
from .qstate import make_rng

log = logging.getLogger("qlocverify")

EXPERIMENTS = ("verify", "clone_attack", "relay_attack", "mask_stats", "sweep")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Config
# --------------------------------------------------------------------------

@dataclass
class AttackConfig:
    kind: str = "cloner"
    F_c: float | None = None
    model: str = "bernoulli"
    devices: list[dict] = field(default_factory=list)
    exclusion_radius: float = 0.0


@dataclass
class ExperimentConfig:
    experiment: str = "verify"
    stations: list[dict] = field(default_factory=list)
    claimed_location: dict | None = None
    device_location: dict | None = None
    N: int = 100
    alphabet: str | None = None
    bsm_mode: str = "full"
    mask_kind: str = "euler"
    ht_length: int = 5
    timing_tol: float = 1e-9
    quantum_channel_speed: float = 1.0
    processing_delay: float = 0.0
    symbol_period: float = 1e-6
    mask_guard: float = 1e-8
    mask_digits: int | None = None
    seed: int = 0
    trials: int = 1
    k: int | None = None
    attack: AttackConfig | None = None
    output: str | None = None
    format: str = "json"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = dict(raw)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        attack = raw.pop("attack", None)
        if attack is not None:
            if not isinstance(attack, dict):
                raise ConfigError("'attack' must be an object")
            a_known = {f.name for f in dataclasses.fields(AttackConfig)}
            a_unknown = sorted(set(attack) - a_known)
            if a_unknown:
                raise ConfigError(f"unknown attack fields: {', '.join(a_unknown)}")
            attack = AttackConfig(**attack)
        cfg = cls(**raw, attack=attack)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be 'json' or 'csv'")
        if self.experiment in ("clone_attack", "relay_attack") and self.attack is None:
            raise ConfigError(f"{self.experiment} needs an 'attack' section")
        try:
            MaskKind(self.mask_kind)
            BsmMode(self.bsm_mode)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.qubits not in (2, 3):
            raise ConfigError(f"k must be 2 or 3, got {self.qubits}")
        if self.experiment != "mask_stats" or self.stations:
            try:
                self.protocol_config()
            except (TypeError, ValueError, KeyError) as e:
                raise ConfigError(f"invalid protocol settings: {e}") from e
        if self.attack is not None:
            try:
                self.attack_spec()
            except (TypeError, ValueError, KeyError) as e:
                raise ConfigError(f"invalid attack settings: {e}") from e

    @property
    def qubits(self) -> int:
        if self.k is not None:
            return self.k
        if self.stations:
            return len(self.stations)
        return 2

    def protocol_config(self, seed: int | None = None) -> ProtocolConfig:
        stations = tuple(Station(str(s["id"]), Location(float(s["x"]), float(s.get("y", 0.0))))
                         for s in self.stations)
        if self.claimed_location is None:
            raise ValueError("claimed_location is required")
        alphabet = self.alphabet or ("bell" if len(stations) == 2 else "ghz")
        return ProtocolConfig(
            stations=stations,
            claimed_location=_loc(self.claimed_location),
            N=self.N,
            alphabet=Alphabet(alphabet),
            bsm_mode=BsmMode(self.bsm_mode),
            mask_kind=MaskKind(self.mask_kind),
            ht_length=self.ht_length,
            timing_tol=self.timing_tol,
            quantum_channel_speed=self.quantum_channel_speed,
            seed=self.seed if seed is None else seed,
            device_location=None if self.device_location is None else _loc(self.device_location),
            processing_delay=self.processing_delay,
            symbol_period=self.symbol_period,
            mask_guard=self.mask_guard,
            mask_digits=self.mask_digits,
        )

    def attack_spec(self) -> AttackSpec:
        a = self.attack
        if a.kind == AttackKind.CLONER.value:
            ClonerModel(a.model)
            F_c = a.F_c
            if F_c is None:
                F_c = 0.7 if self.qubits == 2 else 0.6
            return AttackSpec(AttackKind.CLONER, F_c=F_c)
        return AttackSpec(AttackKind.RELAY, device_locations=tuple(_loc(d) for d in a.devices),
                          exclusion_radius=a.exclusion_radius)


def _loc(d: dict) -> Location:
    return Location(float(d["x"]), float(d.get("y", 0.0)))


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    except TypeError as e:
        raise ConfigError(str(e)) from e
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as e:
        raise ConfigError(str(e)) from e


# --------------------------------------------------------------------------
# Trials and rows
# --------------------------------------------------------------------------

def trial_seed(seed: int, trial: int) -> int:
    """64-bit seed for ``trial`` derived from the master ``seed`` by a counter-based split."""
    words = np.random.SeedSequence(seed, spawn_key=(trial,)).generate_state(2, dtype=np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


RESULT_ROW_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiment", "trial", "seed", "trial_seed", "params", "metrics"],
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": ["verify", "clone_attack", "relay_attack", "mask_stats"]},
        "trial": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "trial_seed": {"type": "integer", "minimum": 0},
        "sweep": {"type": ["object", "null"]},
        "params": {"type": "object"},
        "metrics": {
            "type": "object",
            "properties": {
                "pass_rate": {"type": ["number", "null"]},
                "verified": {"type": "boolean"},
                "mean_fidelity": {"type": "number"},
                "std_fidelity": {"type": ["number", "null"]},
                "confidence": {"type": "number"},
                "max_rtt_excess": {"type": "number"},
            },
        },
    },
}


def run_trial(cfg: ExperimentConfig, trial: int) -> tuple[dict, dict | None]:
    """Run one trial of ``cfg``; returns the result row and an optional full report."""
    experiment = cfg.experiment
    tseed = trial_seed(cfg.seed, trial)
    row: dict[str, Any] = {
        "experiment": experiment,
        "trial": trial,
        "seed": cfg.seed,
        "trial_seed": tseed,
        "params": cfg.to_dict(),
    }
    report = None
    if experiment == "verify":
        rep = run_protocol(cfg.protocol_config(seed=tseed))
        report = rep.to_dict()
        row["metrics"] = {
            "verified": rep.verified,
            "pass_rate": float(rep.verified),
            "num_correct": sum(rep.per_record_correct),
            "max_rtt_error": rep.max_rtt_error,
            "max_rtt_excess": max(0.0, max(t.error for t in rep.timing)),
            "violating_stations": list(rep.timing_verdict.violators),
            "confidence": rep.confidence_against_cloner,
        }
    elif experiment == "clone_attack":
        pc = cfg.protocol_config(seed=tseed)
        spec = cfg.attack_spec()
        rep = run_cloner_attack(pc, spec.F_c, cfg.attack.model, trials=cfg.trials if trial == 0 else 0)
        report = rep.to_dict()
        row["metrics"] = {
            "verified": rep.passed,
            "pass_rate": rep.empirical_pass_rate,
            "analytic_pass_probability": rep.analytic_pass_probability,
            "confidence": confidence_against_cloner(pc.N, spec.F_c),
            "num_correct": sum(rep.per_record_correct),
            "mc_trials": rep.trials,
            "max_rtt_excess": max(rep.timing_excess.values()),
        }
    elif experiment == "relay_attack":
        rep = run_relay_attack(cfg.protocol_config(seed=tseed), cfg.attack_spec())
        report = rep.to_dict()
        row["metrics"] = {
            "verified": rep.passed,
            "pass_rate": float(rep.passed),
            "verdict": rep.verdict,
            "rtt_excess": dict(rep.timing_excess),
            "max_rtt_excess": max(rep.timing_excess.values()),
            "decode_point": rep.decode_point.to_dict(),
        }
    elif experiment == "mask_stats":
        k = cfg.qubits
        mean, std = ensemble_fidelity_stats(k, cfg.mask_kind, cfg.trials, make_rng(tseed, 0), cfg.ht_length)
        uni = mask_uniformity(k, cfg.mask_kind, cfg.trials, make_rng(tseed, 1), cfg.ht_length)
        row["metrics"] = {
            "mean_fidelity": mean,
            "std_fidelity": std,
            "num_pairs": cfg.trials,
            "uniformity": [float(u) for u in uni],
            "uniformity_trials": cfg.trials,
            "capacity_bits": channel_capacity(cfg.bsm_mode, k),
        }
    else:
        raise ConfigError(f"cannot run experiment {experiment!r} as a single trial")
    return row, report


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], list[dict]]:
    """All rows (and reports) for ``cfg``; attack Monte Carlo and mask stats are single rows."""
    n = 1 if cfg.experiment in ("mask_stats", "clone_attack") else cfg.trials
    rows, reports = [], []
    for t in range(n):
        row, rep = run_trial(cfg, t)
        rows.append(row)
        if rep is not None:
            reports.append(rep)
    return rows, reports


def replay_row(row: dict) -> dict:
    """Re-run the trial a row came from and return its metrics."""
    cfg = ExperimentConfig.from_dict(row["params"])
    return run_trial(cfg, row["trial"])[0]["metrics"]


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("null", "none"):
        return None
    return value


def with_param(cfg: ExperimentConfig, name: str, value) -> ExperimentConfig:
    raw = cfg.to_dict()
    if name.startswith("attack."):
        if raw.get("attack") is None:
            raise ConfigError("sweep over an attack field needs an 'attack' section")
        raw["attack"][name.split(".", 1)[1]] = value
    else:
        raw[name] = value
    return ExperimentConfig.from_dict(raw)


def _sweep_point(args):
    cfg, name, index, value = args
    rows, reports = run_experiment(cfg)
    for r in rows:
        r["sweep"] = {"param": name, "index": index, "value": value}
    return rows, reports


def run_sweep(cfg: ExperimentConfig, name: str, values: list, workers: int = 1) -> tuple[list[dict], list[dict]]:
    if cfg.experiment == "sweep":
        raise ConfigError("sweep config must name the experiment being swept")
    jobs = [(with_param(cfg, name, v), name, i, v) for i, v in enumerate(values)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    rows = [r for rs, _ in results for r in rs]
    reports = [r for _, rs in results for r in rs]
    rows.sort(key=lambda r: (r["experiment"], r["sweep"]["index"], r["trial"]))
    return rows, reports


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in d.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, name + "."))
        elif isinstance(val, list):
            out[name] = json.dumps(val)
        else:
            out[name] = val
    return out


def rows_to_csv(rows: list[dict]) -> str:
    flat = [_flatten(r) for r in rows]
    columns = []
    for f in flat:
        columns.extend(c for c in f if c not in columns)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return buf.getvalue()


def render(cfg: ExperimentConfig, rows: list[dict], reports: list[dict], extra: dict | None = None) -> str:
    if cfg.format == "csv":
        return rows_to_csv(rows)
    doc = {"experiment": cfg.experiment, "rows": rows, "reports": reports}
    doc.update(extra or {})
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _prepare(args, expected: tuple[str, ...]) -> ExperimentConfig:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.format is not None:
        overrides["format"] = args.format
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        cfg = ExperimentConfig.from_dict(cfg.to_dict() | overrides)
    if cfg.experiment not in expected:
        raise ConfigError(f"config experiment {cfg.experiment!r} does not match this command "
                          f"(expected one of {expected})")
    return cfg


def cmd_verify(args) -> int:
    cfg = _prepare(args, ("verify",))
    rows, reports = run_experiment(cfg)
    verified = all(r["metrics"]["verified"] for r in rows)
    violators = sorted({s for r in rows for s in r["metrics"]["violating_stations"]})
    extra = {"verdict": "Verified" if verified else "Rejected", "violating_stations": violators}
    _emit(render(cfg, rows, reports, extra), args.out or cfg.output)
    log.info("verdict: %s", extra["verdict"])
    return EXIT_OK if verified else EXIT_FAIL


def cmd_attack(args) -> int:
    cfg = _prepare(args, ("clone_attack", "relay_attack"))
    rows, reports = run_experiment(cfg)
    _emit(render(cfg, rows, reports), args.out or cfg.output)
    return EXIT_OK


def cmd_mask_stats(args) -> int:
    cfg = _prepare(args, ("mask_stats",))
    rows, reports = run_experiment(cfg)
    _emit(render(cfg, rows, reports), args.out or cfg.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _prepare(args, tuple(e for e in EXPERIMENTS if e != "sweep"))
    values = [_coerce(v.strip()) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values is empty")
    rows, reports = run_sweep(cfg, args.param, values, workers=args.workers)
    _emit(render(cfg, rows, reports), args.out or cfg.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlocverify", description="Quantum location verification experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="output file (default: config 'output' or stdout)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--trials", type=int)
        return p

    common(sub.add_parser("verify", help="run the honest protocol")).set_defaults(func=cmd_verify)
    common(sub.add_parser("attack", help="run a cloning or relay attack")).set_defaults(func=cmd_attack)
    common(sub.add_parser("mask-stats", help="masked-state fidelity and uniformity")).set_defaults(
        func=cmd_mask_stats)
    sweep = common(sub.add_parser("sweep", help="repeat an experiment over parameter values"))
    sweep.add_argument("--param", required=True, help="config field, or attack.<field>")
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001
        log.exception("run failed")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
