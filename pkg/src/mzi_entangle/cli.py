"""Batch command line: frequency table, single trajectories, ensembles and sweeps.

Settings are resolved in increasing priority: built-in defaults, ``--config``
file, ``MZI_ENTANGLE_*`` environment variables, command-line flags. The
config file holds ``key = value`` lines using the long flag names (for example
``gamma-ratio = 3``); a JSON run manifest written by this tool is also
accepted and replays its resolved configuration.

Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .channel import BitFlipPolicy
from .errors import EmptyCandidates, InvalidConfig, NumericalFailure, SimulationError
from .optics import DetectorModel, format_label
from .physics import Emitter, EmitterPair, candidate_frequencies, select_candidate
from .trajectory import (
    RNG_NAME,
    SEED_SPLIT_NAME,
    SimulationConfig,
    parameter_sweep,
    run_ensemble,
    run_trajectory,
)

ENV_PREFIX = "MZI_ENTANGLE_"
SCHEMA_VERSION = 1

DEFAULTS = {
    "delta": 3.0,
    "gamma-ratio": 1.0,
    "beta": 1.0,
    "omega": "auto",
    "probe-mix": "1,1:1",
    "detector": "threshold",
    "bitflip": "lossy-only",
    "seed": 0,
    "count": 1000,
    "max-events": 200,
    "threshold": "0.999",
    "out": ".",
    "workers": 1,
    "deltas": "3,5",
    "gamma-ratios": "1,3,5",
    "betas": "1",
}

# Settings with no default; they stay None unless given somewhere.
OPTIONAL = ("e1", "e2", "gamma1", "gamma2", "beta2")

FLOAT_KEYS = {"delta", "gamma-ratio", "beta", "beta2", "e1", "e2", "gamma1", "gamma2"}
INT_KEYS = {"seed", "count", "max-events", "workers"}


class UsageError(InvalidConfig):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------------------
# configuration


def _read_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        data = json.loads(text)
        return dict(data["config"]["settings"]) if "config" in data else dict(data)
    parser = configparser.ConfigParser()
    parser.read_string("[run]\n" + text)
    return {k.replace("_", "-"): v for k, v in parser["run"].items()}


def _env_settings() -> dict:
    out = {}
    for key in list(DEFAULTS) + list(OPTIONAL):
        env = ENV_PREFIX + key.upper().replace("-", "_")
        if env in os.environ:
            out[key] = os.environ[env]
    return out


def resolve_settings(args: argparse.Namespace) -> dict:
    settings: dict = dict(DEFAULTS)
    settings.update({k: None for k in OPTIONAL})
    if args.config:
        settings.update(_read_config_file(args.config))
    settings.update(_env_settings())
    for key in list(DEFAULTS) + list(OPTIONAL):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            settings[key] = val
    try:
        for key in FLOAT_KEYS:
            if settings.get(key) is not None:
                settings[key] = float(settings[key])
        for key in INT_KEYS:
            settings[key] = int(settings[key])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad numeric setting: {exc}") from None
    return settings


def parse_probe_mix(text: str) -> tuple:
    """"1,1:0.85;2,2:0.15" -> (((1, 1), 0.85), ((2, 2), 0.15))."""
    mix = []
    try:
        for part in str(text).split(";"):
            part = part.strip()
            if not part:
                continue
            probe, _, prob = part.partition(":")
            na, nb = (int(x) for x in probe.split(","))
            mix.append(((na, nb), float(prob) if prob else 1.0))
    except ValueError:
        raise UsageError(f"cannot parse probe mix {text!r}") from None
    return tuple(mix)


def _float_list(text) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def build_pair(s: dict) -> EmitterPair:
    absolute = [s.get(k) for k in ("e1", "e2", "gamma1", "gamma2")]
    beta2 = s.get("beta2")
    if any(v is not None for v in absolute):
        if any(v is None for v in absolute):
            raise UsageError("absolute mode needs all of --e1 --e2 --gamma1 --gamma2")
        e1, e2, g1, g2 = absolute
        b2 = s["beta"] if beta2 is None else beta2
        return EmitterPair(Emitter.from_beta(e1, g1, s["beta"]), Emitter.from_beta(e2, g2, b2))
    return EmitterPair.from_ratios(s["delta"], s["gamma-ratio"], s["beta"], beta2)


def build_config(s: dict, pair: EmitterPair | None = None) -> SimulationConfig:
    omega = s["omega"]
    if str(omega) != "auto":
        try:
            omega = float(omega)
        except ValueError:
            raise UsageError(f"--omega must be a number or 'auto', got {omega!r}") from None
    thr = s["threshold"]
    try:
        threshold = None if str(thr).lower() == "none" else float(thr)
        detector = DetectorModel(s["detector"])
        bitflip = BitFlipPolicy(s["bitflip"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return SimulationConfig(
        pair=pair or build_pair(s),
        probe_mix=parse_probe_mix(s["probe-mix"]),
        detector=detector,
        frequency=omega,
        bit_flip=bitflip,
        max_events=s["max-events"],
        stop_threshold=threshold,
    )


# ---------------------------------------------------------------------------
# output


RNG_LINE = f"#rng={RNG_NAME}; seed_split={SEED_SPLIT_NAME}"


def _csv_text(schema: str, header: list[str], rows: list[list], rng: bool = True) -> str:
    buf = io.StringIO()
    buf.write(f"#schema={schema}/{SCHEMA_VERSION}\n")
    if rng:
        buf.write(RNG_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


class Writer:
    """Collects output files and writes them plus a manifest in one place."""

    def __init__(self, out_dir: str, command: str, settings: dict):
        self.out = Path(out_dir)
        self.command = command
        self.settings = settings
        self.files: dict[str, str] = {}
        self.resolved: dict = {}
        self.started = _dt.datetime.now(_dt.timezone.utc).isoformat()

    def add(self, name: str, text: str):
        self.files[name] = text

    def finish(self):
        self.out.mkdir(parents=True, exist_ok=True)
        listing = []
        for name, text in self.files.items():
            data = text.encode("utf-8")
            (self.out / name).write_bytes(data)
            listing.append({"path": name, "sha256": hashlib.sha256(data).hexdigest()})
        manifest = {
            "tool": "mzi-entangle",
            "version": __version__,
            "command": self.command,
            "config": {"settings": _jsonable(self.settings), "resolved": _jsonable(self.resolved)},
            "started": self.started,
            "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "files": listing,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _resolved(config: SimulationConfig, omega: float, source: str) -> dict:
    p = config.pair
    return {
        "e1": p.emitter1.energy,
        "gamma1": p.emitter1.gamma_guided,
        "loss1": p.emitter1.gamma_loss,
        "e2": p.emitter2.energy,
        "gamma2": p.emitter2.gamma_guided,
        "loss2": p.emitter2.gamma_loss,
        "omega": omega,
        "omega_source": source,
        "omega_selection": "max expected one-round concurrence, lossless |1,1> probe",
        "bit_flip_policy": config.bit_flip.value,
        "bit_flip_applied": config.bit_flip.applies(p),
        "detector": config.detector.value,
        "probe_mix": [[list(pr), w] for pr, w in config.probe_mix],
        "rng": RNG_NAME,
        "seed_split": SEED_SPLIT_NAME,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_freq(s: dict, out=None, write: bool = False) -> int:
    out = out or sys.stdout
    pair = build_pair(s)
    cands = candidate_frequencies(pair)
    chosen = select_candidate(pair, cands)
    rows = [[c.omega, c.source, c.residual, int(c is chosen)] for c in cands]
    text = _csv_text("mzi-entangle/freq", ["omega", "source", "residual", "selected"], rows, rng=False)
    out.write(text)
    if write:
        w = Writer(s["out"], "freq", s)
        w.resolved = {"omega": chosen.omega, "omega_source": chosen.source}
        w.add("freq.csv", text)
        w.finish()
    return 0


def trajectory_csv(record) -> str:
    rows = [[e.index, format_label(e.outcome), e.probability, e.concurrence, e.purity] for e in record.events]
    return _csv_text("mzi-entangle/trajectory", ["event", "outcome", "probability", "concurrence", "purity"], rows)


def cmd_trajectory(s: dict) -> int:
    config = build_config(s)
    omega, source = config.resolve_frequency()
    record = run_trajectory(config, s["seed"])
    w = Writer(s["out"], "trajectory", s)
    w.resolved = _resolved(config, omega, source) | {"seed": s["seed"], "terminal_reason": record.terminal_reason}
    w.add("trajectory.csv", trajectory_csv(record))
    w.finish()
    return 0


def _stats(summary) -> dict:
    return _jsonable({
        "count": summary.count,
        "omega": summary.omega,
        "omega_source": summary.frequency_source,
        "median_events_to_threshold": summary.median_events_to_threshold,
        "frac_gt_099_in_10": summary.frac_above_099_in_10,
        "frac_reached": summary.frac_reached,
        "rng": RNG_NAME,
        "seed_split": SEED_SPLIT_NAME,
    })


def cmd_ensemble(s: dict) -> int:
    config = build_config(s)
    summary = run_ensemble(config, s["seed"], s["count"], workers=s["workers"])
    header = ["event"] + [f"q{int(round(q * 100)):02d}" for q in summary.quantile_levels]
    rows = [[i + 1, *map(float, q)] for i, q in enumerate(summary.quantiles)]
    w = Writer(s["out"], "ensemble", s)
    w.resolved = _resolved(config, summary.omega, summary.frequency_source) | {
        "base_seed": s["seed"], "count": s["count"]}
    w.add("ensemble_quantiles.csv", _csv_text("mzi-entangle/ensemble-quantiles", header, rows))
    w.add("ensemble_stats.json", json.dumps(_stats(summary), indent=2, sort_keys=True) + "\n")
    w.finish()
    return 0


def cmd_sweep(s: dict) -> int:
    deltas, gammas, betas = (_float_list(s[k]) for k in ("deltas", "gamma-ratios", "betas"))
    if not (deltas and gammas and betas):
        raise UsageError("sweep grid is empty")
    template = build_config(s, pair=EmitterPair.from_ratios(deltas[0], gammas[0], betas[0]))
    cells = parameter_sweep(deltas, gammas, betas, template, s["seed"], s["count"], s["workers"])
    rows = []
    for c in cells:
        if c.summary is None:
            rows.append([c.delta_ratio, c.gamma_ratio, c.beta, "", "", "", "", c.failure])
        else:
            sm = c.summary
            rows.append([c.delta_ratio, c.gamma_ratio, c.beta, sm.omega, sm.median_events_to_threshold,
                         sm.frac_above_099_in_10, sm.frac_reached, ""])
    header = ["delta_ratio", "gamma_ratio", "beta", "selected_omega", "median_events",
              "frac_gt_099_in_10", "frac_reached", "failure"]
    w = Writer(s["out"], "sweep", s)
    w.resolved = {"bit_flip_policy": template.bit_flip.value, "rng": RNG_NAME, "seed_split": SEED_SPLIT_NAME,
                  "base_seed": s["seed"], "count": s["count"]}
    w.add("sweep.csv", _csv_text("mzi-entangle/sweep", header, rows))
    w.finish()
    return 0


COMMANDS = {"freq": cmd_freq, "trajectory": cmd_trajectory, "ensemble": cmd_ensemble, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("emitters")
    g.add_argument("--delta", type=float, help="detuning |E2 - E1| in units of Gamma1")
    g.add_argument("--gamma-ratio", type=float, help="Gamma2 / Gamma1")
    for name in ("e1", "e2", "gamma1", "gamma2"):
        g.add_argument(f"--{name}", type=float, help="absolute parameter (all four required)")
    g.add_argument("--beta", type=float, help="beta factor of both emitters (default 1)")
    g.add_argument("--beta2", type=float, help="beta factor of emitter 2, if different")
    r = common.add_argument_group("run")
    r.add_argument("--omega", help="probe frequency or 'auto'")
    r.add_argument("--probe-mix", help='e.g. "1,1:0.85;2,2:0.15"')
    r.add_argument("--detector", choices=[d.value for d in DetectorModel])
    r.add_argument("--bitflip", choices=[b.value for b in BitFlipPolicy])
    r.add_argument("--seed", type=int)
    r.add_argument("--count", type=int)
    r.add_argument("--max-events", type=int)
    r.add_argument("--threshold", help="stop concurrence, or 'none'")
    r.add_argument("--workers", type=int)
    r.add_argument("--out", help="output directory")
    r.add_argument("--config", help="key = value file or a manifest.json to replay")

    parser = argparse.ArgumentParser(prog="mzi-entangle", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("freq", parents=[common], help="list degenerate probe frequencies")
    sub.add_parser("trajectory", parents=[common], help="simulate one seeded trajectory")
    sub.add_parser("ensemble", parents=[common], help="simulate a seeded ensemble")
    sw = sub.add_parser("sweep", parents=[common], help="ensembles over a parameter grid")
    sw.add_argument("--deltas", help="comma-separated detuning ratios")
    sw.add_argument("--gamma-ratios", help="comma-separated linewidth ratios")
    sw.add_argument("--betas", help="comma-separated beta factors")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        if args.command == "freq":
            code = cmd_freq(settings, write=args.out is not None)
        else:
            code = COMMANDS[args.command](settings)
    except EmptyCandidates as exc:
        print(f"error: EmptyCandidates: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (InvalidConfig, SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
