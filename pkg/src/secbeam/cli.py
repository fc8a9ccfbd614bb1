"""Batch front-end: parse scenario configs, run campaigns, emit CSV curves.

Scenario files are flat ``key = value`` text with dotted section keys
(for example ``channel.n_clusters = 4``); ``#`` starts a comment. Flags
override file values, which override the per-band and per-subcommand
defaults. Every run writes a ``run_manifest.json`` plus a ``resolved.cfg``
that reproduce the outputs byte-for-byte when passed back via --config.

Exit codes: 0 success, 1 validation error, 2 campaign failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analog_opt import AscentConfig, PowerAdaptConfig
from .metrics import EnergyModel, PowerConfig
from .montecarlo import (
    BANDS,
    CampaignError,
    CampaignResult,
    ScenarioConfig,
    SweepSpec,
    band_defaults,
    run_benchmark_su,
    run_campaign,
)
from .precoding import FILTERS


class ConfigError(ValueError):
    """Invalid configuration key, value, or flag."""


# ---------------------------------------------------------------------------
# Flat key <-> ScenarioConfig mapping
# ---------------------------------------------------------------------------

def _to_int(key: str, raw: str, minimum: int | None = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"config key '{key}': expected integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"config key '{key}': must be >= {minimum}, got {value}")
    return value


def _to_float(
    key: str, raw: str, minimum: float | None = None, exclusive: bool = False
) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"config key '{key}': expected number, got {raw!r}") from None
    if minimum is not None and (value <= minimum if exclusive else value < minimum):
        op = ">" if exclusive else ">="
        raise ConfigError(f"config key '{key}': must be {op} {minimum}, got {value}")
    return value


def _to_choice(key: str, raw: str, choices) -> str:
    if raw not in choices:
        raise ConfigError(f"config key '{key}': expected one of {sorted(choices)}, got {raw!r}")
    return raw


def _parse_filters(key: str, raw: str) -> tuple[str, ...]:
    if raw == "all":
        return FILTERS
    names = tuple(part.strip() for part in raw.split(",") if part.strip())
    for name in names:
        if name not in FILTERS:
            raise ConfigError(f"config key '{key}': unknown filter {name!r}")
    if not names:
        raise ConfigError(f"config key '{key}': empty filter list")
    return names


_ROOT_INT_KEYS = ("n_t", "n_r", "n_e", "n_j", "users", "eves", "trials")

CONFIG_KEYS = (
    "band", "n_t", "n_r", "n_e", "n_j", "users", "eves", "trials", "seed",
    "filter", "array", "channel_gain",
    "channel.n_clusters", "channel.n_rays", "channel.angular_spread_deg",
    "power.p_b_db", "power.p_j_db", "power.noise_var_user", "power.noise_var_eve",
    "energy.p_rf_mw", "energy.p_pa_mw", "energy.p_ps_mw", "energy.n_rf",
    "energy.connectivity",
    "ascent.step_size_init", "ascent.convergence_eps", "ascent.max_iters",
    "ascent.step_shrink",
    "power_adapt.target_secrecy", "power_adapt.power_cap_db", "power_adapt.adapt_rate",
    "sweep.kind", "sweep.start", "sweep.stop", "sweep.step",
)

_PADAPT_DEFAULTS = dict(target_secrecy=1.0, power_cap_db=20.0, adapt_rate=1e-2)


def config_from_flat(flat: dict[str, str]) -> ScenarioConfig:
    """Build a validated ScenarioConfig from flat key=value strings.

    Unset keys fall back to the defaults of the band named by 'band'
    (mmwave when absent).
    """
    for key in flat:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")

    band = _to_choice("band", flat.get("band", "mmwave"), BANDS)
    base = band_defaults(band)

    root: dict = {}
    for key in _ROOT_INT_KEYS:
        if key in flat:
            root[key] = _to_int(key, flat[key], minimum=1)
    if "seed" in flat:
        root["master_seed"] = _to_int("seed", flat["seed"])
    if "filter" in flat:
        root["filters"] = _parse_filters("filter", flat["filter"])
    if "array" in flat:
        root["array"] = _to_choice("array", flat["array"], ("ula", "upa"))
    if "channel_gain" in flat:
        root["channel_gain"] = _to_choice("channel_gain", flat["channel_gain"], ("unit", "eq1"))
    if "channel.n_clusters" in flat:
        root["n_clusters"] = _to_int("channel.n_clusters", flat["channel.n_clusters"], 1)
    if "channel.n_rays" in flat:
        root["n_rays"] = _to_int("channel.n_rays", flat["channel.n_rays"], 1)
    if "channel.angular_spread_deg" in flat:
        root["angular_spread_deg"] = _to_float(
            "channel.angular_spread_deg", flat["channel.angular_spread_deg"], 0.0, exclusive=True
        )

    power = dict(
        p_b_db=base.power.p_b_db,
        p_j_db=base.power.p_j_db,
        noise_var_user=base.power.noise_var_user,
        noise_var_eve=base.power.noise_var_eve,
    )
    for name in power:
        key = f"power.{name}"
        if key in flat:
            strict = name.startswith("noise")
            power[name] = _to_float(key, flat[key], 0.0 if strict else None, exclusive=True)

    energy = dict(
        p_rf_mw=base.energy.p_rf_mw,
        p_pa_mw=base.energy.p_pa_mw,
        p_ps_mw=base.energy.p_ps_mw,
        n_rf=base.energy.n_rf,
        connectivity=base.energy.connectivity,
    )
    for name in ("p_rf_mw", "p_pa_mw", "p_ps_mw"):
        key = f"energy.{name}"
        if key in flat:
            energy[name] = _to_float(key, flat[key], 0.0, exclusive=True)
    if "energy.n_rf" in flat:
        raw = flat["energy.n_rf"]
        energy["n_rf"] = None if raw == "auto" else _to_int("energy.n_rf", raw, 1)
    if "energy.connectivity" in flat:
        energy["connectivity"] = _to_choice(
            "energy.connectivity", flat["energy.connectivity"],
            ("fully-connected", "partially-connected"),
        )

    ascent = dict(
        step_size_init=base.ascent.step_size_init,
        convergence_eps=base.ascent.convergence_eps,
        max_iters=base.ascent.max_iters,
        step_shrink=base.ascent.step_shrink,
    )
    if "ascent.step_size_init" in flat:
        ascent["step_size_init"] = _to_float(
            "ascent.step_size_init", flat["ascent.step_size_init"], 0.0, exclusive=True
        )
    if "ascent.convergence_eps" in flat:
        ascent["convergence_eps"] = _to_float(
            "ascent.convergence_eps", flat["ascent.convergence_eps"], 0.0, exclusive=True
        )
    if "ascent.max_iters" in flat:
        ascent["max_iters"] = _to_int("ascent.max_iters", flat["ascent.max_iters"], 1)
    if "ascent.step_shrink" in flat:
        shrink = _to_float("ascent.step_shrink", flat["ascent.step_shrink"])
        if not 0.0 < shrink < 1.0:
            raise ConfigError(f"config key 'ascent.step_shrink': must lie in (0, 1), got {shrink}")
        ascent["step_shrink"] = shrink

    padapt_keys = [k for k in flat if k.startswith("power_adapt.")]
    padapt = None
    if padapt_keys or base.power_adapt is not None:
        source = base.power_adapt
        fields = dict(_PADAPT_DEFAULTS) if source is None else dict(
            target_secrecy=source.target_secrecy,
            power_cap_db=source.power_cap_db,
            adapt_rate=source.adapt_rate,
        )
        if "power_adapt.target_secrecy" in flat:
            fields["target_secrecy"] = _to_float(
                "power_adapt.target_secrecy", flat["power_adapt.target_secrecy"], 0.0
            )
        if "power_adapt.power_cap_db" in flat:
            fields["power_cap_db"] = _to_float(
                "power_adapt.power_cap_db", flat["power_adapt.power_cap_db"]
            )
        if "power_adapt.adapt_rate" in flat:
            fields["adapt_rate"] = _to_float(
                "power_adapt.adapt_rate", flat["power_adapt.adapt_rate"], 0.0, exclusive=True
            )
        padapt = PowerAdaptConfig(**fields)

    sweep = dict(
        kind=base.sweep.kind, start=base.sweep.start,
        stop=base.sweep.stop, step=base.sweep.step,
    )
    if "sweep.kind" in flat:
        sweep["kind"] = _to_choice("sweep.kind", flat["sweep.kind"], ("none", "snr", "users"))
    for name in ("start", "stop", "step"):
        key = f"sweep.{name}"
        if key in flat:
            sweep[name] = _to_float(key, flat[key])
    if sweep["kind"] != "none" and sweep["step"] <= 0:
        raise ConfigError(f"config key 'sweep.step': must be > 0, got {sweep['step']}")

    try:
        return replace(
            base,
            **root,
            power=PowerConfig(**power),
            energy=EnergyModel(**energy),
            ascent=AscentConfig(**ascent),
            power_adapt=padapt,
            sweep=SweepSpec(**sweep),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_flat(cfg: ScenarioConfig) -> dict[str, str]:
    """Complete flat key=value echo of a config; round-trips exactly."""
    flat = {
        "band": cfg.band,
        "n_t": str(cfg.n_t), "n_r": str(cfg.n_r), "n_e": str(cfg.n_e), "n_j": str(cfg.n_j),
        "users": str(cfg.users), "eves": str(cfg.eves),
        "trials": str(cfg.trials), "seed": str(cfg.master_seed),
        "filter": "all" if cfg.filters == FILTERS else ",".join(cfg.filters),
        "array": cfg.array,
        "channel_gain": cfg.channel_gain,
        "channel.n_clusters": str(cfg.n_clusters),
        "channel.n_rays": str(cfg.n_rays),
        "channel.angular_spread_deg": _fmt(cfg.angular_spread_deg),
        "power.p_b_db": _fmt(cfg.power.p_b_db),
        "power.p_j_db": _fmt(cfg.power.p_j_db),
        "power.noise_var_user": _fmt(cfg.power.noise_var_user),
        "power.noise_var_eve": _fmt(cfg.power.noise_var_eve),
        "energy.p_rf_mw": _fmt(cfg.energy.p_rf_mw),
        "energy.p_pa_mw": _fmt(cfg.energy.p_pa_mw),
        "energy.p_ps_mw": _fmt(cfg.energy.p_ps_mw),
        "energy.n_rf": "auto" if cfg.energy.n_rf is None else str(cfg.energy.n_rf),
        "energy.connectivity": cfg.energy.connectivity,
        "ascent.step_size_init": _fmt(cfg.ascent.step_size_init),
        "ascent.convergence_eps": _fmt(cfg.ascent.convergence_eps),
        "ascent.max_iters": str(cfg.ascent.max_iters),
        "ascent.step_shrink": _fmt(cfg.ascent.step_shrink),
        "sweep.kind": cfg.sweep.kind,
        "sweep.start": _fmt(cfg.sweep.start),
        "sweep.stop": _fmt(cfg.sweep.stop),
        "sweep.step": _fmt(cfg.sweep.step),
    }
    if cfg.power_adapt is not None:
        flat["power_adapt.target_secrecy"] = _fmt(cfg.power_adapt.target_secrecy)
        flat["power_adapt.power_cap_db"] = _fmt(cfg.power_adapt.power_cap_db)
        flat["power_adapt.adapt_rate"] = _fmt(cfg.power_adapt.adapt_rate)
    return flat


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value file, or a run manifest (JSON) with a resolved config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        manifest = json.loads(text)
        resolved = manifest.get("resolved_config")
        if not isinstance(resolved, dict):
            raise ConfigError(f"manifest {path} has no resolved_config")
        return {str(k): str(v) for k, v in resolved.items()}
    flat: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = stripped.split("=", 1)
        flat[key.strip()] = value.strip()
    return flat


def parse_config(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Resolve a scenario: flag overrides > file values > band defaults."""
    flat: dict[str, str] = {}
    if path is not None:
        flat.update(read_config_file(path))
    if overrides:
        flat.update(overrides)
    return config_from_flat(flat)


# ---------------------------------------------------------------------------
# Outputs
# ---------------------------------------------------------------------------

def _format_row(values) -> str:
    return ",".join(f"{v:.9g}" if isinstance(v, float) else str(v) for v in values)


def emit_csv(result: CampaignResult, out_dir: str | Path) -> list[Path]:
    """One CSV per curve; numbers carry 9 significant digits."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    adaptive = result.mean_cycles is not None
    header = "axis,mean_secrecy_bps_hz,mean_ee_bits_hz_mw,trials,failures"
    if adaptive:
        header += ",cycles,final_pb_db"
    paths = []
    for name, curve in result.curves.items():
        lines = [header]
        for i, axis_value in enumerate(result.axis):
            row = [
                float(axis_value),
                float(curve.mean_secrecy[i]),
                float(curve.mean_ee[i]),
                result.included[i],
                result.failures[i],
            ]
            if adaptive:
                row += [float(result.mean_cycles[i]), float(result.mean_final_pb_db[i])]
            lines.append(_format_row(row))
        path = out_dir / f"curve_{name}.csv"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def write_plot_script(out_dir: Path, curve_names: list[str], axis_label: str) -> Path:
    """gnuplot script rendering the secrecy and energy-efficiency curves."""
    secrecy_plots = ", ".join(
        f"'curve_{name}.csv' skip 1 using 1:2 with linespoints title '{name}'"
        for name in curve_names
    )
    ee_plots = ", ".join(
        f"'curve_{name}.csv' skip 1 using 1:3 with linespoints title '{name}'"
        for name in curve_names
    )
    script = "\n".join([
        "set datafile separator ','",
        "set terminal pngcairo size 960,600",
        f"set xlabel '{axis_label}'",
        "set grid",
        "set output 'secrecy.png'",
        "set ylabel 'mean secrecy rate (bits/s/Hz)'",
        f"plot {secrecy_plots}",
        "set output 'energy_efficiency.png'",
        "set ylabel 'mean energy efficiency (bits/Hz/mW)'",
        f"plot {ee_plots}",
        "",
    ])
    path = out_dir / "plot.gp"
    path.write_text(script)
    return path


def write_manifest(
    out_dir: Path, command: str, cfg: ScenarioConfig,
    config_path: str | None, workers: int,
) -> Path:
    manifest = {
        "tool": "secbeam",
        "tool_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "out_dir": str(out_dir),
        "config_path": config_path,
        "master_seed": cfg.master_seed,
        "workers": workers,
        "resolved_config": to_flat(cfg),
    }
    path = out_dir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def write_resolved(out_dir: Path, cfg: ScenarioConfig) -> Path:
    lines = [f"{key} = {value}" for key, value in sorted(to_flat(cfg).items())]
    path = out_dir / "resolved.cfg"
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for campaign failures
        raise ConfigError(message)


def _parse_range(flag: str, text: str, default_step: float | None = None):
    parts = text.split(":")
    if len(parts) == 2 and default_step is not None:
        parts.append(str(default_step))
    if len(parts) != 3:
        raise ConfigError(f"{flag}: expected A:B:STEP, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{flag}: expected numbers in A:B:STEP, got {text!r}") from None
    if step <= 0:
        raise ConfigError(f"{flag}: step must be > 0")
    return start, stop, step


# Per-subcommand defaults, same layer as band defaults (files and flags win).
_PRESETS: dict[str, dict[str, str]] = {
    "sweep-snr": {
        "power.p_j_db": "-20.0",
        "n_j": "16",
        "sweep.kind": "snr", "sweep.start": "0.0", "sweep.stop": "12.0", "sweep.step": "2.0",
    },
    "sweep-users": {
        "power.p_b_db": "5.0",
        "power.p_j_db": "-10.0",
        "n_j": "4",
        "sweep.kind": "users", "sweep.start": "1.0", "sweep.stop": "10.0", "sweep.step": "1.0",
    },
    "power-adapt": {
        "power.p_b_db": "-10.0",
        "power.p_j_db": "-5.0",
        "n_j": "4",
        "filter": "mmse",
        "power_adapt.target_secrecy": "1.0",
        "power_adapt.power_cap_db": "20.0",
        "power_adapt.adapt_rate": "0.01",
        "sweep.kind": "none",
    },
    "single": {
        "sweep.kind": "none",
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="secbeam", description=__doc__)
    parser.add_argument("--version", action="version", version=f"secbeam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="scenario file or run manifest")
        p.add_argument("--band", choices=BANDS)
        p.add_argument("--filter", choices=(*FILTERS, "all"))
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", metavar="DIR", default="secbeam-out")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel trial workers (does not affect results)")

    p_snr = sub.add_parser("sweep-snr", help="secrecy and EE vs BS power, plus SU benchmark")
    add_common(p_snr)
    p_snr.add_argument("--snr", metavar="A:B:STEP", help="BS power axis in dB")

    p_users = sub.add_parser("sweep-users", help="secrecy and EE vs number of users")
    add_common(p_users)
    p_users.add_argument("--users", metavar="A:B", help="user-count axis")

    p_adapt = sub.add_parser("power-adapt", help="raise BS power until a secrecy target holds")
    add_common(p_adapt)
    p_adapt.add_argument("--target-secrecy", type=float, metavar="X")
    p_adapt.add_argument("--power-cap", type=float, metavar="DB")

    p_single = sub.add_parser("single", help="one-shot run at the configured point")
    add_common(p_single)

    return parser


def _flag_overrides(ns: argparse.Namespace) -> dict[str, str]:
    flags: dict[str, str] = {}
    if ns.band is not None:
        flags["band"] = ns.band
    if ns.filter is not None:
        flags["filter"] = ns.filter
    if ns.trials is not None:
        flags["trials"] = str(ns.trials)
    if ns.seed is not None:
        flags["seed"] = str(ns.seed)
    if getattr(ns, "snr", None) is not None:
        start, stop, step = _parse_range("--snr", ns.snr)
        flags.update({"sweep.kind": "snr", "sweep.start": repr(start),
                      "sweep.stop": repr(stop), "sweep.step": repr(step)})
    if getattr(ns, "users", None) is not None:
        start, stop, step = _parse_range("--users", ns.users, default_step=1.0)
        flags.update({"sweep.kind": "users", "sweep.start": repr(start),
                      "sweep.stop": repr(stop), "sweep.step": repr(step)})
    if getattr(ns, "target_secrecy", None) is not None:
        flags["power_adapt.target_secrecy"] = repr(ns.target_secrecy)
    if getattr(ns, "power_cap", None) is not None:
        flags["power_adapt.power_cap_db"] = repr(ns.power_cap)
    return flags


def resolve_command_config(command: str, ns: argparse.Namespace) -> ScenarioConfig:
    preset = dict(_PRESETS[command])
    file_kv = read_config_file(ns.config) if ns.config else {}
    flat = {**preset, **file_kv, **_flag_overrides(ns)}
    return config_from_flat(flat)


def _dispatch(ns: argparse.Namespace) -> int:
    command = ns.command
    cfg = resolve_command_config(command, ns)
    if ns.workers < 1:
        raise ConfigError("--workers: must be >= 1")
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = run_campaign(cfg, workers=ns.workers)
    paths = emit_csv(result, out_dir)
    curve_names = list(result.curves)
    if command == "sweep-snr":
        bench = run_benchmark_su(cfg, workers=ns.workers)
        paths += emit_csv(bench, out_dir)
        curve_names += list(bench.curves)

    axis_label = {"snr": "BS power (dB)", "users": "users"}.get(cfg.sweep.kind, "BS power (dB)")
    paths.append(write_plot_script(out_dir, curve_names, axis_label))
    paths.append(write_resolved(out_dir, cfg))
    paths.append(write_manifest(out_dir, command, cfg, ns.config, ns.workers))

    total_failures = sum(result.failures)
    print(f"secbeam {command}: {len(result.axis)} axis point(s), "
          f"{cfg.trials} trials each, {total_failures} failed trial(s)")
    for path in paths:
        print(f"  wrote {path}")
    return 0


def main(argv=None) -> int:
    try:
        parser = build_parser()
        ns = parser.parse_args(argv)
        return _dispatch(ns)
    except ConfigError as exc:
        print(f"secbeam: error: {exc}", file=sys.stderr)
        return 1
    except CampaignError as exc:
        print(f"secbeam: campaign failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
