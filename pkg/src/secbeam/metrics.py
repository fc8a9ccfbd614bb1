"""Link metrics: SINRs, achievable rates, secrecy rate, energy efficiency.

Transmit powers are configured in dB (linear value 10^(dB/10)) and noise
variances in linear units. The BS splits its power uniformly over the U
served streams; the jammer splits its power the same way over its streams.
The jammer degrades only the legitimate receivers, never the eavesdropper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import DimensionMismatchError


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class PowerConfig:
    """Transmit powers (dB) and receiver noise variances (linear)."""

    p_b_db: float
    p_j_db: float
    noise_var_user: float = 1.0
    noise_var_eve: float = 1.0

    def __post_init__(self):
        if self.noise_var_user <= 0 or self.noise_var_eve <= 0:
            raise ValueError("noise variances must be > 0")

    @property
    def p_b_linear(self) -> float:
        return db_to_linear(self.p_b_db)

    @property
    def p_j_linear(self) -> float:
        return db_to_linear(self.p_j_db)


@dataclass(frozen=True)
class EnergyModel:
    """Hardware power draw per component, in milliwatts.

    n_rf of None means one RF chain per served stream. Fully-connected
    phase-shifter networks need n_t * n_rf shifters, partially-connected
    ones n_t.
    """

    p_rf_mw: float = 100.0
    p_pa_mw: float = 100.0
    p_ps_mw: float = 10.0
    n_rf: int | None = None
    connectivity: str = "fully-connected"

    def __post_init__(self):
        if min(self.p_rf_mw, self.p_pa_mw, self.p_ps_mw) <= 0:
            raise ValueError("component powers must be > 0")
        if self.connectivity not in ("fully-connected", "partially-connected"):
            raise ValueError(f"unknown connectivity {self.connectivity!r}")

    def n_phase_shifters(self, n_t: int, n_rf: int) -> int:
        if self.connectivity == "fully-connected":
            return n_t * n_rf
        return n_t


def rate(sinr: float) -> float:
    """Achievable rate log2(1 + SINR), bits/s/Hz."""
    if sinr < 0:
        raise ValueError("SINR must be nonnegative")
    return math.log2(1.0 + sinr)


def secrecy(c_u: float, c_e_list: Sequence[float]) -> float:
    """Nonnegative gap between the user rate and the best eavesdropper rate."""
    if len(c_e_list) == 0:
        raise ValueError("need at least one eavesdropper rate")
    return max(c_u - max(c_e_list), 0.0)


def _gain2(row: np.ndarray, col: np.ndarray) -> float:
    """|row . col|^2 for 1-D vectors (row already conjugated as needed)."""
    return float(np.abs(np.dot(row, col)) ** 2)


def user_sinr(u: int, channels, state, f_bb: np.ndarray, power: PowerConfig) -> float:
    """SINR of user u under the full multi-user transmission.

    Signal and inter-user interference go through the hybrid precoder
    F_rf @ f_bb; the jammer contribution goes through its own precoder.
    f_bb columns are expected normalized so ||F_rf f_bb_u|| = 1.
    """
    n_users = len(channels.bs_to_user)
    f_rf = np.column_stack(state.analog_precoders)
    w = state.user_combiners[u]
    h = channels.bs_to_user[u]
    if h.shape != (w.size, f_rf.shape[0]) or f_bb.shape != (n_users, n_users):
        raise DimensionMismatchError(
            f"user {u}: channel {h.shape}, combiner {w.size}, "
            f"analog {f_rf.shape}, digital {f_bb.shape}"
        )
    pb = power.p_b_linear / n_users
    pj = power.p_j_linear / n_users
    heff = np.conj(w) @ h @ f_rf
    signal = pb * _gain2(heff, f_bb[:, u])
    jam = pj * _gain2(np.conj(w) @ channels.jammer_to_user[u], state.jammer_precoder)
    interference = sum(
        pb * _gain2(heff, f_bb[:, n]) for n in range(n_users) if n != u
    )
    return signal / (power.noise_var_user + jam + interference)


def eve_sinr(
    u: int, channels, state, f_bb: np.ndarray, power: PowerConfig, eve: int = 0
) -> float:
    """SINR at an eavesdropper overhearing user u's stream (no jamming)."""
    n_users = len(channels.bs_to_user)
    f_rf = np.column_stack(state.analog_precoders)
    w_e = state.eve_combiners[eve]
    h_e = channels.bs_to_eve[eve]
    if h_e.shape != (w_e.size, f_rf.shape[0]) or f_bb.shape != (n_users, n_users):
        raise DimensionMismatchError(
            f"eve {eve}: channel {h_e.shape}, combiner {w_e.size}, "
            f"analog {f_rf.shape}, digital {f_bb.shape}"
        )
    pb = power.p_b_linear / n_users
    heff = np.conj(w_e) @ h_e @ f_rf
    signal = pb * _gain2(heff, f_bb[:, u])
    interference = sum(
        pb * _gain2(heff, f_bb[:, n]) for n in range(n_users) if n != u
    )
    return signal / (power.noise_var_eve + interference)


def single_user_secrecy(u: int, channels, state, power: PowerConfig) -> float:
    """Secrecy rate of user u ignoring inter-user interference.

    The user stream passes only through its own analog precoder column;
    the eavesdropper rate is the best one across eavesdroppers.
    """
    n_users = len(channels.bs_to_user)
    w = state.user_combiners[u]
    f = state.analog_precoders[u]
    h = channels.bs_to_user[u]
    if h.shape != (w.size, f.size):
        raise DimensionMismatchError(f"user {u}: channel {h.shape} vs ({w.size},{f.size})")
    pb = power.p_b_linear / n_users
    pj = power.p_j_linear / n_users
    signal = pb * _gain2(np.conj(w) @ h, f)
    jam = pj * _gain2(np.conj(w) @ channels.jammer_to_user[u], state.jammer_precoder)
    c_user = rate(signal / (power.noise_var_user + jam))
    c_eves = []
    for m, h_e in enumerate(channels.bs_to_eve):
        leak = pb * _gain2(np.conj(state.eve_combiners[m]) @ h_e, f)
        c_eves.append(rate(leak / power.noise_var_eve))
    return secrecy(c_user, c_eves)


def energy_efficiency(
    c_u: float, power: PowerConfig, model: EnergyModel, n_t: int, n_rf: int | None = None
) -> float:
    """Rate per total consumed power, bits/s/Hz per mW.

    Total power = transmit power (dB value read as dBm) + RF chains +
    one amplifier per transmit antenna + the phase-shifter network.
    """
    if c_u < 0:
        raise ValueError("rate must be nonnegative")
    if n_rf is None:
        n_rf = model.n_rf if model.n_rf is not None else 1
    total_mw = (
        power.p_b_linear
        + n_rf * model.p_rf_mw
        + n_t * model.p_pa_mw
        + model.n_phase_shifters(n_t, n_rf) * model.p_ps_mw
    )
    return c_u / total_mw
