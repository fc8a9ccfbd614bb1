"""Projected gradient ascent over the analog combiner/precoder pair.

One user at a time, the optimizer climbs the single-user secrecy rate by
alternating gradient steps on the receive combiner w and the analog
precoder column f, re-projecting after every step onto the intersection
of the unit-norm and constant-amplitude constraint sets (every entry of a
projected N-vector has modulus 1/sqrt(N)). The eavesdropper combiner and
the jammer precoder are outside our control and stay frozen.

Both gradients are ascent directions of the secrecy rate measured in nats
(the log2 scaling constant is absorbed into the step size), with the
combiner-output noise power written as sigma^2 * ||w||^2; on the
constraint set ||w|| = 1 this is the plain noise variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .metrics import PowerConfig, db_to_linear, rate, secrecy


class AscentDivergedError(RuntimeError):
    """The traced secrecy rate became non-finite."""


@dataclass
class BeamformerState:
    """All analog-domain vectors of one trial.

    user_combiners[u] (length n_r) and analog_precoders[u] (length n_t)
    are constant-amplitude unit-norm after every optimizer step. The
    eavesdropper combiners and the jammer precoder are unit-norm only.
    """

    user_combiners: list[np.ndarray]
    analog_precoders: list[np.ndarray]
    eve_combiners: list[np.ndarray]
    jammer_precoder: np.ndarray

    def with_user(self, u: int, w: np.ndarray, f: np.ndarray) -> "BeamformerState":
        combiners = list(self.user_combiners)
        precoders = list(self.analog_precoders)
        combiners[u] = w
        precoders[u] = f
        return BeamformerState(combiners, precoders, self.eve_combiners, self.jammer_precoder)


@dataclass(frozen=True)
class AscentConfig:
    """Gradient-ascent hyperparameters.

    The step size shrinks by step_shrink whenever an iteration lowers the
    secrecy rate (the step itself is kept, no rollback). Convergence is
    declared when successive secrecy values differ by at most
    convergence_eps; max_iters is a safety bound only.
    """

    step_size_init: float = 0.1
    convergence_eps: float = 1e-7
    max_iters: int = 5000
    step_shrink: float = 0.5

    def __post_init__(self):
        if self.step_size_init <= 0 or self.convergence_eps <= 0:
            raise ValueError("step size and convergence threshold must be > 0")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class PowerAdaptConfig:
    """Source-power adaptation toward a secrecy target.

    After every full ascent cycle that misses target_secrecy, the linear
    BS power is multiplied by (1 + adapt_rate), up to power_cap_db.
    """

    target_secrecy: float
    power_cap_db: float
    adapt_rate: float = 1e-2

    def __post_init__(self):
        if self.target_secrecy < 0:
            raise ValueError("target_secrecy must be >= 0")
        if self.adapt_rate <= 0:
            raise ValueError("adapt_rate must be > 0")


def project(v: np.ndarray) -> np.ndarray:
    """Project onto the unit-norm constant-amplitude constraint set.

    First scales to unit norm, then equalizes entry moduli to 1/sqrt(N)
    while keeping phases. An exactly-zero entry carries no phase and is
    replaced by 1/sqrt(N).
    """
    v = np.asarray(v, dtype=np.complex128)
    nrm = np.linalg.norm(v)
    if nrm > 0.0:
        v = v / nrm
    mag = np.abs(v)
    root_n = math.sqrt(v.size)
    if mag.min() > 0.0:
        return v / (mag * root_n)
    out = np.full(v.shape, 1.0 / root_n, dtype=np.complex128)
    nz = mag > 0.0
    out[nz] = v[nz] / (mag[nz] * root_n)
    return out


def _unit(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    return v / nrm if nrm > 0 else v


def _complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    re_im = rng.standard_normal((n, 2))
    return (re_im[:, 0] + 1j * re_im[:, 1]) / math.sqrt(2.0)


def random_state(scenario, rng: np.random.Generator) -> BeamformerState:
    """Gaussian-initialized beamformers, projected onto their constraint sets.

    Per-vector child streams are spawned at fixed indices (eves, jammer,
    then one stream per user) so scenarios differing only in the user
    count share the common vectors' draws.
    """
    m, u = scenario.eves, scenario.users
    streams = rng.spawn(m + 1 + u)
    eves = [_unit(_complex_gaussian(streams[i], scenario.n_e)) for i in range(m)]
    jammer = _unit(_complex_gaussian(streams[m], scenario.n_j))
    combiners, precoders = [], []
    for i in range(u):
        child = streams[m + 1 + i]
        combiners.append(project(_complex_gaussian(child, scenario.n_r)))
        precoders.append(project(_complex_gaussian(child, scenario.n_t)))
    return BeamformerState(combiners, precoders, eves, jammer)


class _Workspace:
    """Per-user quantities that stay fixed during one ascent."""

    def __init__(self, u: int, channels, state: BeamformerState, power: PowerConfig):
        n_users = len(channels.bs_to_user)
        self.h = channels.bs_to_user[u]
        self.h_ct = self.h.conj().T
        self.jam_rx = channels.jammer_to_user[u] @ state.jammer_precoder
        # One conjugated eve direction per eavesdropper: H_e^H w_e.
        self.eve_dirs = [
            ch.conj().T @ w_e for ch, w_e in zip(channels.bs_to_eve, state.eve_combiners)
        ]
        self.pb = power.p_b_linear / n_users
        self.pj = power.p_j_linear / n_users
        self.s2u = power.noise_var_user
        self.s2e = power.noise_var_eve

    def scalars(self, w: np.ndarray, f: np.ndarray):
        hv = self.h @ f
        hw = self.h_ct @ w
        s_user = complex(np.vdot(w, hv))
        s_jam = complex(np.vdot(w, self.jam_rx))
        s_eves = [complex(np.vdot(d, f)) for d in self.eve_dirs]
        return hv, hw, s_user, s_jam, s_eves

    def cost(self, s_user: complex, s_jam: complex, s_eves: list[complex]) -> tuple[float, float]:
        """(clamped secrecy rate, unclamped user/eve rate gap).

        The gradients drive the unclamped gap, so convergence and step
        adaptation watch it too; otherwise a start where the eavesdropper
        is ahead would sit at the zero clamp and stop immediately.
        """
        sig = self.pb * abs(s_user) ** 2
        jam = self.pj * abs(s_jam) ** 2
        c_user = rate(sig / (self.s2u + jam))
        c_eves = [rate(self.pb * abs(se) ** 2 / self.s2e) for se in s_eves]
        return secrecy(c_user, c_eves), c_user - max(c_eves)

    def grad_w(self, w, hv, s_user, s_jam) -> np.ndarray:
        psi_u = abs(s_user) ** 2
        psi_j = abs(s_jam) ** 2
        jam_term = self.pj * np.conj(s_jam) * self.jam_rx
        d_full = self.s2u + self.pj * psi_j + self.pb * psi_u
        d_jam = self.s2u + self.pj * psi_j
        num_full = self.s2u * w + jam_term + self.pb * np.conj(s_user) * hv
        num_jam = self.s2u * w + jam_term
        return num_full / d_full - num_jam / d_jam

    def grad_f(self, hw, s_user, s_jam, s_eves) -> np.ndarray:
        d_full = self.s2u + self.pj * abs(s_jam) ** 2 + self.pb * abs(s_user) ** 2
        # The eavesdropper rate is a max across eves; descend on the active one.
        m = max(range(len(s_eves)), key=lambda i: abs(s_eves[i]))
        d_eve = self.s2e + self.pb * abs(s_eves[m]) ** 2
        return (self.pb * s_user / d_full) * hw - (self.pb * s_eves[m] / d_eve) * self.eve_dirs[m]


def grad_combiner(u: int, channels, state: BeamformerState, power: PowerConfig) -> np.ndarray:
    """Ascent direction of the single-user secrecy rate w.r.t. user u's combiner."""
    ws = _Workspace(u, channels, state, power)
    w, f = state.user_combiners[u], state.analog_precoders[u]
    hv, _, s_user, s_jam, _ = ws.scalars(w, f)
    return ws.grad_w(w, hv, s_user, s_jam)


def grad_precoder(u: int, channels, state: BeamformerState, power: PowerConfig) -> np.ndarray:
    """Ascent direction of the single-user secrecy rate w.r.t. user u's precoder column."""
    ws = _Workspace(u, channels, state, power)
    w, f = state.user_combiners[u], state.analog_precoders[u]
    _, hw, s_user, s_jam, s_eves = ws.scalars(w, f)
    return ws.grad_f(hw, s_user, s_jam, s_eves)


@dataclass
class AscentResult:
    state: BeamformerState
    trace: list[float]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def final_secrecy(self) -> float:
        return self.trace[-1]


def ascend_su(
    u: int,
    channels,
    state: BeamformerState,
    power: PowerConfig,
    cfg: AscentConfig,
    on_iterate=None,
) -> AscentResult:
    """Maximize user u's single-user secrecy rate over (w, f).

    Both gradients of an iteration are evaluated at the same state
    snapshot. The trace holds the secrecy rate before the first step and
    after every iteration. on_iterate(w, f, secrecy) is called once per
    iteration after projection.
    """
    ws = _Workspace(u, channels, state, power)
    w = state.user_combiners[u]
    f = state.analog_precoders[u]
    step = cfg.step_size_init

    hv, hw, s_user, s_jam, s_eves = ws.scalars(w, f)
    c, gap_prev = ws.cost(s_user, s_jam, s_eves)
    trace = [c]
    converged = False
    for _ in range(cfg.max_iters):
        gw = ws.grad_w(w, hv, s_user, s_jam)
        gf = ws.grad_f(hw, s_user, s_jam, s_eves)
        w = project(w + step * gw)
        f = project(f + step * gf)
        hv, hw, s_user, s_jam, s_eves = ws.scalars(w, f)
        c, gap = ws.cost(s_user, s_jam, s_eves)
        trace.append(c)
        if not math.isfinite(gap):
            raise AscentDivergedError(
                f"non-finite secrecy rate at iteration {len(trace) - 1} for user {u}"
            )
        if on_iterate is not None:
            on_iterate(w, f, c)
        if gap < gap_prev:
            step *= cfg.step_shrink
        if abs(gap - gap_prev) <= cfg.convergence_eps:
            converged = True
            break
        gap_prev = gap
    return AscentResult(state.with_user(u, w, f), trace, converged)


@dataclass
class PowerAdaptResult:
    state: BeamformerState
    power: PowerConfig
    final_pb_linear: float
    cycles: int
    adaptations: int
    target_met: bool
    last_trace: list[float]

    @property
    def final_secrecy(self) -> float:
        return self.last_trace[-1]


def ascend_su_power_adapt(
    u: int,
    channels,
    state: BeamformerState,
    power: PowerConfig,
    cfg: AscentConfig,
    pcfg: PowerAdaptConfig,
) -> PowerAdaptResult:
    """Repeat full ascent cycles, raising the BS power until the target holds.

    Each cycle runs ascend_su from the previous cycle's beamformers with a
    fresh step size. A cycle that misses target_secrecy multiplies the
    linear BS power by (1 + adapt_rate); the loop stops once the target is
    met or the power would have to exceed the cap (target_met False then,
    so campaigns can account for it).
    """
    pb_lin = power.p_b_linear
    cap_lin = db_to_linear(pcfg.power_cap_db)
    cycles = 0
    adaptations = 0
    while True:
        cycle_power = replace(power, p_b_db=10.0 * math.log10(pb_lin))
        res = ascend_su(u, channels, state, cycle_power, cfg)
        state = res.state
        cycles += 1
        if res.final_secrecy >= pcfg.target_secrecy:
            met = True
            break
        if pb_lin > cap_lin:
            met = False
            break
        pb_lin *= 1.0 + pcfg.adapt_rate
        adaptations += 1
    return PowerAdaptResult(
        state=state,
        power=replace(power, p_b_db=10.0 * math.log10(pb_lin)),
        final_pb_linear=pb_lin,
        cycles=cycles,
        adaptations=adaptations,
        target_met=met,
        last_trace=res.trace,
    )
