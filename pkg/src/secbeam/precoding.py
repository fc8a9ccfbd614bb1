"""Multi-user digital stage: effective channels, baseband filters, trial pipeline.

After the per-user analog optimization, each user's scalar-per-beam
effective channel row is fed back to the BS, which stacks them into a
U x U matrix and applies a ZF, MMSE, or MRT baseband precoder. Every
baseband column is then rescaled so the cascaded analog+digital precoder
carries unit power per stream.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import math

import numpy as np

from . import metrics
from .analog_opt import (
    AscentConfig,
    BeamformerState,
    PowerAdaptConfig,
    ascend_su,
    ascend_su_power_adapt,
)
from .linalg import DimensionMismatchError, SingularMatrixError, hermitian, inverse
from .metrics import EnergyModel, PowerConfig

FILTERS = ("zf", "mmse", "mrt")


class SingularEffectiveChannelError(RuntimeError):
    """The stacked effective channel cannot be zero-forced."""


class DegeneratePrecoderError(RuntimeError):
    """A cascaded precoder column has zero power and cannot be normalized."""


def effective_channel(channels, state: BeamformerState) -> np.ndarray:
    """Stack per-user effective rows w_u^H H_u F_rf into a U x U matrix."""
    f_rf = np.column_stack(state.analog_precoders)
    rows = []
    for u, h in enumerate(channels.bs_to_user):
        w = state.user_combiners[u]
        if h.shape != (w.size, f_rf.shape[0]):
            raise DimensionMismatchError(
                f"user {u}: channel {h.shape} vs combiner {w.size} x analog {f_rf.shape}"
            )
        rows.append(np.conj(w) @ h @ f_rf)
    return np.vstack(rows)


def precode_zf(h_eff: np.ndarray) -> np.ndarray:
    """Zero-forcing baseband precoder H^H (H H^H)^-1."""
    try:
        gram_inv = inverse(h_eff @ hermitian(h_eff))
    except SingularMatrixError as exc:
        raise SingularEffectiveChannelError(str(exc)) from exc
    return hermitian(h_eff) @ gram_inv


def precode_mmse(h_eff: np.ndarray, snr_linear: float) -> np.ndarray:
    """Regularized inverse H^H (H H^H + (U/SNR) I)^-1."""
    if snr_linear <= 0:
        raise ValueError("snr_linear must be > 0")
    n = h_eff.shape[0]
    loaded = h_eff @ hermitian(h_eff) + (n / snr_linear) * np.eye(n)
    return hermitian(h_eff) @ inverse(loaded)


def precode_mrt(h_eff: np.ndarray) -> np.ndarray:
    """Maximum-ratio transmission precoder H^H."""
    return hermitian(h_eff)


def normalize_columns(f_bb: np.ndarray, f_rf: np.ndarray) -> np.ndarray:
    """Scale each baseband column so ||F_rf f_bb_u|| = 1."""
    norms = np.linalg.norm(f_rf @ f_bb, axis=0)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise DegeneratePrecoderError(f"cascaded precoder column {bad} has zero power")
    return f_bb / norms


_FILTER_FNS: dict[str, Callable] = {
    "zf": lambda h, snr: precode_zf(h),
    "mmse": precode_mmse,
    "mrt": lambda h, snr: precode_mrt(h),
}


@dataclass
class FilterMetrics:
    """Per-user and averaged metrics for one baseband filter."""

    per_user_secrecy: list[float]
    per_user_rate: list[float]
    per_user_eve_rate: list[float]
    per_user_ee: list[float]

    @property
    def mean_secrecy(self) -> float:
        return sum(self.per_user_secrecy) / len(self.per_user_secrecy)

    @property
    def mean_ee(self) -> float:
        return sum(self.per_user_ee) / len(self.per_user_ee)


@dataclass
class TrialResult:
    """Outcome of one channel realization."""

    filters: dict[str, FilterMetrics]
    su_secrecy: list[float]
    state: BeamformerState | None = None
    cycles: float | None = None
    final_pb_db: float | None = None
    target_met_frac: float | None = None


def run_mu_pipeline(
    channels,
    state: BeamformerState,
    power: PowerConfig,
    ascent: AscentConfig,
    energy: EnergyModel,
    filters=FILTERS,
    power_adapt: PowerAdaptConfig | None = None,
) -> TrialResult:
    """Analog stage per user, then the shared digital stage per filter.

    With power_adapt set, every user runs its own power-adapted ascent
    from the common starting power; the digital stage is then evaluated
    at the largest per-user final power (the BS must cover the most
    demanding user). Raises SingularEffectiveChannelError for trials
    whose effective channel cannot be zero-forced.
    """
    n_users = len(channels.bs_to_user)
    su_secrecy = []
    if power_adapt is None:
        for u in range(n_users):
            res = ascend_su(u, channels, state, power, ascent)
            state = res.state
            su_secrecy.append(res.final_secrecy)
        eval_power = power
        cycles = final_pb_db = met_frac = None
    else:
        finals, db_values, cyc, met = [], [], [], []
        for u in range(n_users):
            res = ascend_su_power_adapt(u, channels, state, power, ascent, power_adapt)
            state = res.state
            su_secrecy.append(res.final_secrecy)
            finals.append(res.final_pb_linear)
            db_values.append(10.0 * math.log10(res.final_pb_linear))
            cyc.append(res.cycles)
            met.append(res.target_met)
        eval_power = replace(power, p_b_db=10.0 * math.log10(max(finals)))
        cycles = sum(cyc) / n_users
        final_pb_db = sum(db_values) / n_users
        met_frac = sum(met) / n_users

    h_eff = effective_channel(channels, state)
    f_rf = np.column_stack(state.analog_precoders)
    snr = eval_power.p_b_linear / eval_power.noise_var_user
    n_t = f_rf.shape[0]
    n_rf = energy.n_rf if energy.n_rf is not None else n_users

    out: dict[str, FilterMetrics] = {}
    for name in filters:
        f_bb = normalize_columns(_FILTER_FNS[name](h_eff, snr), f_rf)
        rates, eve_rates, secrecies, ees = [], [], [], []
        for u in range(n_users):
            c_user = metrics.rate(metrics.user_sinr(u, channels, state, f_bb, eval_power))
            c_eves = [
                metrics.rate(metrics.eve_sinr(u, channels, state, f_bb, eval_power, eve=m))
                for m in range(channels.n_eves)
            ]
            c_s = metrics.secrecy(c_user, c_eves)
            rates.append(c_user)
            eve_rates.append(max(c_eves))
            secrecies.append(c_s)
            ees.append(metrics.energy_efficiency(c_s, eval_power, energy, n_t, n_rf))
        out[name] = FilterMetrics(secrecies, rates, eve_rates, ees)
    return TrialResult(out, su_secrecy, state, cycles, final_pb_db, met_frac)
