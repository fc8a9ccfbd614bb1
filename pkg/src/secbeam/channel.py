"""Clustered geometric channel synthesis for every link in the network.

A channel realization is a sum over ``n_clusters * n_rays`` plane-wave
paths, each with a circularly-symmetric complex Gaussian gain and a pair
of array steering vectors. Cluster-center angles are uniform (azimuth over
[0, 2pi), elevation over [-pi/2, pi/2]); per-ray offsets are Laplacian
with standard deviation equal to the configured angular spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array layout.

    kind is "ula" (responds to azimuth only) or "upa" (horizontal x
    vertical factorization; the steering vector is the Kronecker product
    of the azimuth and elevation factors). Spacing is in wavelengths.
    """

    count: int
    kind: str = "ula"
    horizontal: int | None = None
    vertical: int | None = None
    spacing: float = 0.5

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("antenna count must be >= 1")
        if self.kind not in ("ula", "upa"):
            raise ValueError(f"unknown array kind {self.kind!r}")
        if self.kind == "upa":
            h, v = self.horizontal, self.vertical
            if not h or not v or h * v != self.count:
                raise ValueError(
                    f"planar factorization {h}x{v} inconsistent with count {self.count}"
                )


@dataclass(frozen=True)
class ChannelParams:
    """Clustered-channel parameters for one link."""

    n_clusters: int
    n_rays: int
    angular_spread_deg: float
    tx_geometry: ArrayGeometry
    rx_geometry: ArrayGeometry
    # "eq1" keeps the sqrt(Nr*Nt / (Ncl*Nray)) front factor, so E||H||_F^2
    # equals Nr*Nt. "unit" drops the Nr*Nt boost (E||H||_F^2 = 1), which is
    # the scaling the reference secrecy curves correspond to.
    gain: str = "eq1"

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("n_clusters and n_rays must be >= 1")
        if self.angular_spread_deg <= 0:
            raise ValueError("angular_spread_deg must be > 0")
        if self.gain not in ("eq1", "unit"):
            raise ValueError(f"unknown gain mode {self.gain!r}")


@dataclass
class ChannelSet:
    """One realization of all links: BS->users, BS->eves, jammer->users."""

    bs_to_user: list[np.ndarray] = field(default_factory=list)
    bs_to_eve: list[np.ndarray] = field(default_factory=list)
    jammer_to_user: list[np.ndarray] = field(default_factory=list)

    @property
    def n_users(self) -> int:
        return len(self.bs_to_user)

    @property
    def n_eves(self) -> int:
        return len(self.bs_to_eve)


def _ula_factor(count: int, spacing: float, angles: np.ndarray) -> np.ndarray:
    """Steering factors for a uniform linear array, one row per angle.

    Entry k of a row is exp(2j*pi*spacing*k*sin(angle)) / sqrt(count).
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    k = np.arange(count)
    phase = 2.0 * np.pi * spacing * np.outer(np.sin(angles), k)
    return np.exp(1j * phase) / math.sqrt(count)


def steering_vector(
    geometry: ArrayGeometry, azimuth_rad: float, elevation_rad: float = 0.0
) -> np.ndarray:
    """Unit-norm array response toward the given direction.

    ULA responds to azimuth only; UPA is kron(horizontal factor at the
    azimuth, vertical factor at the elevation).
    """
    if geometry.kind == "ula":
        return _ula_factor(geometry.count, geometry.spacing, azimuth_rad)[0]
    horiz = _ula_factor(geometry.horizontal, geometry.spacing, azimuth_rad)[0]
    vert = _ula_factor(geometry.vertical, geometry.spacing, elevation_rad)[0]
    return np.kron(horiz, vert)


def _steering_many(geometry: ArrayGeometry, az: np.ndarray, el: np.ndarray) -> np.ndarray:
    """Stack of steering vectors, shape (len(az), count)."""
    if geometry.kind == "ula":
        return _ula_factor(geometry.count, geometry.spacing, az)
    horiz = _ula_factor(geometry.horizontal, geometry.spacing, az)
    vert = _ula_factor(geometry.vertical, geometry.spacing, el)
    # Row-wise Kronecker product.
    return (horiz[:, :, None] * vert[:, None, :]).reshape(len(az), geometry.count)


def generate_channel(
    params: ChannelParams, rng: np.random.Generator, gains: np.ndarray | None = None
) -> np.ndarray:
    """Draw one channel matrix of shape (rx count, tx count).

    Draw order is fixed for reproducibility: arrival azimuth centers,
    arrival elevation centers, departure azimuth centers, departure
    elevation centers, then the four per-ray Laplacian offset blocks in
    the same order, then the path gains. ``gains`` overrides the random
    path gains (diagnostics only); it must have n_clusters*n_rays entries.
    """
    ncl, nray = params.n_clusters, params.n_rays
    npaths = ncl * nray
    # Laplace scale b gives std b*sqrt(2); match the configured spread.
    b = math.radians(params.angular_spread_deg) / math.sqrt(2.0)

    az_arr_c = rng.uniform(0.0, 2.0 * np.pi, ncl)
    el_arr_c = rng.uniform(-np.pi / 2.0, np.pi / 2.0, ncl)
    az_dep_c = rng.uniform(0.0, 2.0 * np.pi, ncl)
    el_dep_c = rng.uniform(-np.pi / 2.0, np.pi / 2.0, ncl)

    az_arr = (az_arr_c[:, None] + rng.laplace(0.0, b, (ncl, nray))).ravel()
    el_arr = (el_arr_c[:, None] + rng.laplace(0.0, b, (ncl, nray))).ravel()
    az_dep = (az_dep_c[:, None] + rng.laplace(0.0, b, (ncl, nray))).ravel()
    el_dep = (el_dep_c[:, None] + rng.laplace(0.0, b, (ncl, nray))).ravel()

    if gains is None:
        re_im = rng.standard_normal((npaths, 2))
        gains = (re_im[:, 0] + 1j * re_im[:, 1]) / math.sqrt(2.0)
    else:
        gains = np.asarray(gains, dtype=np.complex128).ravel()
        if gains.size != npaths:
            raise ValueError(f"need {npaths} path gains, got {gains.size}")

    a_rx = _steering_many(params.rx_geometry, az_arr, el_arr)
    a_tx = _steering_many(params.tx_geometry, az_dep, el_dep)

    n_r, n_t = params.rx_geometry.count, params.tx_geometry.count
    if params.gain == "eq1":
        scale = math.sqrt(n_r * n_t / npaths)
    else:
        scale = math.sqrt(1.0 / npaths)
    return scale * ((a_rx * gains[:, None]).T @ np.conj(a_tx))


def _geometry(kind: str, count: int) -> ArrayGeometry:
    if kind == "upa":
        # Squarest factorization with horizontal >= vertical.
        v = int(math.isqrt(count))
        while count % v:
            v -= 1
        return ArrayGeometry(count=count, kind="upa", horizontal=count // v, vertical=v)
    return ArrayGeometry(count=count, kind="ula")


def link_params(scenario, tx_count: int, rx_count: int) -> ChannelParams:
    """Clustered-channel parameters for one link of a scenario."""
    return ChannelParams(
        n_clusters=scenario.n_clusters,
        n_rays=scenario.n_rays,
        angular_spread_deg=scenario.angular_spread_deg,
        tx_geometry=_geometry(scenario.array, tx_count),
        rx_geometry=_geometry(scenario.array, rx_count),
        gain=scenario.channel_gain,
    )


def generate_channel_set(scenario, rng: np.random.Generator) -> ChannelSet:
    """Draw all links of a scenario: U BS->user, M BS->eve, U jammer->user.

    ``scenario`` is any object with n_t / n_r / n_e / n_j antenna counts,
    users / eves counts, and the clustered-channel fields consumed by
    link_params. Each link gets its own child stream spawned from ``rng``
    at a fixed index (eves first, then a bs/jammer pair per user), so
    scenarios that differ only in the user count share the common links'
    draws bit-for-bit.
    """
    bs_user = link_params(scenario, scenario.n_t, scenario.n_r)
    bs_eve = link_params(scenario, scenario.n_t, scenario.n_e)
    jam_user = link_params(scenario, scenario.n_j, scenario.n_r)
    m, u = scenario.eves, scenario.users
    streams = rng.spawn(m + 2 * u)
    return ChannelSet(
        bs_to_user=[generate_channel(bs_user, streams[m + 2 * i]) for i in range(u)],
        bs_to_eve=[generate_channel(bs_eve, streams[i]) for i in range(m)],
        jammer_to_user=[generate_channel(jam_user, streams[m + 2 * i + 1]) for i in range(u)],
    )
