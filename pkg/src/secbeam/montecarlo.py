"""Seeded Monte Carlo campaigns over scenario sweeps.

Every (axis point, trial) pair gets its own child RNG stream derived
counter-style from the master seed, so results are bit-reproducible and
independent of execution order or worker count. Workers only change where
a trial runs, never what it computes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analog_opt import AscentConfig, PowerAdaptConfig, random_state
from .channel import generate_channel_set
from .metrics import EnergyModel, PowerConfig
from .precoding import FILTERS, SingularEffectiveChannelError, TrialResult, run_mu_pipeline

BANDS = ("sub6", "mmwave")

# Per-band defaults: receive antennas at users and eavesdropper, cluster
# and ray counts, and the typical BS array size for that band.
_BAND_DEFAULTS = {
    "mmwave": dict(n_t=64, n_r=4, n_e=4, n_clusters=4, n_rays=15),
    "sub6": dict(n_t=16, n_r=2, n_e=2, n_clusters=10, n_rays=20),
}


@dataclass(frozen=True)
class SweepSpec:
    """Campaign axis: BS power in dB ("snr"), user count ("users"), or none."""

    kind: str = "none"
    start: float = 0.0
    stop: float = 0.0
    step: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "snr", "users"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        if self.kind != "none" and self.step <= 0:
            raise ValueError("sweep step must be > 0")

    def values(self) -> list[float]:
        if self.kind == "none":
            return []
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(max(count, 0))]


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one campaign; see band_defaults for presets."""

    band: str = "mmwave"
    n_t: int = 64
    n_r: int = 4
    n_e: int = 4
    n_j: int = 4
    users: int = 5
    eves: int = 1
    n_clusters: int = 4
    n_rays: int = 15
    angular_spread_deg: float = 10.0
    array: str = "ula"
    channel_gain: str = "unit"
    power: PowerConfig = field(default_factory=lambda: PowerConfig(p_b_db=5.0, p_j_db=-10.0))
    energy: EnergyModel = field(default_factory=EnergyModel)
    ascent: AscentConfig = field(default_factory=AscentConfig)
    power_adapt: PowerAdaptConfig | None = None
    filters: tuple[str, ...] = FILTERS
    trials: int = 1000
    master_seed: int = 1
    sweep: SweepSpec = field(default_factory=SweepSpec)

    def __post_init__(self):
        if self.band not in BANDS:
            raise ValueError(f"unknown band {self.band!r}")
        for name in ("n_t", "n_r", "n_e", "n_j", "users", "eves", "trials"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in self.filters:
            if name not in FILTERS:
                raise ValueError(f"unknown filter {name!r}")
        if self.channel_gain not in ("unit", "eq1"):
            raise ValueError(f"unknown channel_gain {self.channel_gain!r}")

    def axis_values(self) -> list[float]:
        if self.sweep.kind == "none":
            return [self.power.p_b_db]
        return self.sweep.values()

    def at_axis(self, value: float) -> "ScenarioConfig":
        """Concrete configuration for one axis point."""
        if self.sweep.kind == "users":
            return replace(self, users=int(value))
        if self.sweep.kind == "snr":
            return replace(self, power=replace(self.power, p_b_db=float(value)))
        return self


def band_defaults(band: str, **overrides) -> ScenarioConfig:
    """Scenario preset for a band; keyword overrides win."""
    if band not in _BAND_DEFAULTS:
        raise ValueError(f"unknown band {band!r}")
    fields = dict(_BAND_DEFAULTS[band], band=band)
    fields.update(overrides)
    return ScenarioConfig(**fields)


def trial_rng(master_seed: int, axis_idx: int, trial_idx: int) -> np.random.Generator:
    """Independent child stream for one (axis point, trial) pair."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(axis_idx, trial_idx))
    return np.random.default_rng(seq)


def run_trial(cfg: ScenarioConfig, rng: np.random.Generator) -> TrialResult:
    """One channel realization pushed through the full pipeline."""
    channel_rng, state_rng = rng.spawn(2)
    channels = generate_channel_set(cfg, channel_rng)
    state = random_state(cfg, state_rng)
    return run_mu_pipeline(
        channels,
        state,
        cfg.power,
        cfg.ascent,
        cfg.energy,
        filters=cfg.filters,
        power_adapt=cfg.power_adapt,
    )


class CampaignError(RuntimeError):
    """More than the tolerated share of trials failed."""


@dataclass
class CurveStats:
    """One curve over the axis: per-point means across included trials."""

    mean_secrecy: list[float]
    mean_ee: list[float]


@dataclass
class CampaignResult:
    axis: list[float]
    curves: dict[str, CurveStats]
    included: list[int]
    failures: list[int]
    failed_trials: list[tuple[int, int]]
    config: ScenarioConfig
    mean_cycles: list[float] | None = None
    mean_final_pb_db: list[float] | None = None
    target_met_rate: list[float] | None = None

    @property
    def master_seed(self) -> int:
        return self.config.master_seed


def _campaign_task(args) -> TrialResult | str:
    cfg, axis_value, axis_idx, trial_idx = args
    rng = trial_rng(cfg.master_seed, axis_idx, trial_idx)
    try:
        return run_trial(cfg.at_axis(axis_value), rng)
    except SingularEffectiveChannelError as exc:
        return str(exc)


# Share of failed trials above which the whole campaign is rejected.
FAILURE_BUDGET = 0.01


def run_campaign(cfg: ScenarioConfig, workers: int = 1) -> CampaignResult:
    """Run cfg.trials independent realizations at every axis point.

    Trials whose effective channel cannot be zero-forced are excluded
    from the means and counted per axis point; the campaign raises
    CampaignError when more than FAILURE_BUDGET of all trials fail.
    """
    axis = cfg.axis_values()
    tasks = [
        (cfg, value, ai, ti)
        for ai, value in enumerate(axis)
        for ti in range(cfg.trials)
    ]
    if workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_campaign_task, tasks, chunksize=chunk))
    else:
        outcomes = [_campaign_task(t) for t in tasks]

    per_point: list[list[TrialResult]] = [[] for _ in axis]
    failed: list[tuple[int, int]] = []
    for (cfg_, value, ai, ti), out in zip(tasks, outcomes):
        if isinstance(out, str):
            failed.append((ai, ti))
        else:
            per_point[ai].append(out)
    if len(failed) > FAILURE_BUDGET * len(tasks):
        raise CampaignError(
            f"{len(failed)}/{len(tasks)} trials failed (axis, trial): {failed[:20]}"
        )

    failures = [0] * len(axis)
    for ai, _ in failed:
        failures[ai] += 1

    curves = {
        name: CurveStats(
            mean_secrecy=[_mean(rs, lambda r: r.filters[name].mean_secrecy) for rs in per_point],
            mean_ee=[_mean(rs, lambda r: r.filters[name].mean_ee) for rs in per_point],
        )
        for name in cfg.filters
    }
    result = CampaignResult(
        axis=list(axis),
        curves=curves,
        included=[len(rs) for rs in per_point],
        failures=failures,
        failed_trials=failed,
        config=cfg,
    )
    if cfg.power_adapt is not None:
        result.mean_cycles = [_mean(rs, lambda r: r.cycles) for rs in per_point]
        result.mean_final_pb_db = [_mean(rs, lambda r: r.final_pb_db) for rs in per_point]
        result.target_met_rate = [_mean(rs, lambda r: r.target_met_frac) for rs in per_point]
    return result


def _mean(results, key) -> float:
    if not results:
        return math.nan
    return sum(key(r) for r in results) / len(results)


SU_BENCHMARK = "su_benchmark"


def run_benchmark_su(cfg: ScenarioConfig, workers: int = 1) -> CampaignResult:
    """Single-user reference curve over the same axis and seed family.

    Forces one served user; with a single stream all baseband filters
    coincide after per-stream normalization, so only one is evaluated.
    Defined for power sweeps and single points (a user-count axis would
    contradict the forced single user).
    """
    if cfg.sweep.kind == "users":
        raise ValueError("single-user benchmark does not apply to user-count sweeps")
    su_cfg = replace(cfg, users=1, filters=("mrt",))
    res = run_campaign(su_cfg, workers=workers)
    res.curves = {SU_BENCHMARK: res.curves["mrt"]}
    return res
