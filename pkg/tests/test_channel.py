import math

import numpy as np
import pytest

from secbeam.channel import (
    ArrayGeometry,
    ChannelParams,
    generate_channel,
    generate_channel_set,
    steering_vector,
)
from secbeam.montecarlo import band_defaults


def ula(n, **kw):
    return ArrayGeometry(count=n, kind="ula", **kw)


def table_params(tx=8, rx=4, band="mmwave", gain="eq1"):
    presets = {"mmwave": (4, 15), "sub6": (10, 20)}
    ncl, nray = presets[band]
    return ChannelParams(
        n_clusters=ncl, n_rays=nray, angular_spread_deg=10.0,
        tx_geometry=ula(tx), rx_geometry=ula(rx), gain=gain,
    )


class TestSteeringVector:
    def test_broadside_two_elements(self):
        out = steering_vector(ula(2), 0.0)
        np.testing.assert_allclose(out, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-15)

    def test_endfire_four_elements(self):
        out = steering_vector(ula(4), np.pi / 2)
        expected = 0.5 * np.array([1.0, -1.0, 1.0, -1.0])
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_upa_is_kronecker_of_line_factors(self, rng):
        az, el = rng.uniform(0, 2 * np.pi, 2)
        upa = ArrayGeometry(count=4, kind="upa", horizontal=2, vertical=2)
        out = steering_vector(upa, az, el)

        def line(n, angle):  # independent of the implementation under test
            return np.array(
                [np.exp(2j * np.pi * 0.5 * k * np.sin(angle)) for k in range(n)]
            ) / np.sqrt(n)

        np.testing.assert_allclose(out, np.kron(line(2, az), line(2, el)), atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 7, 64])
    @pytest.mark.parametrize("azimuth", [-1.2, 0.0, 0.4, np.pi / 2, 5.0])
    def test_unit_norm(self, n, azimuth):
        assert abs(np.linalg.norm(steering_vector(ula(n), azimuth)) - 1.0) <= 1e-12

    def test_upa_unit_norm(self):
        upa = ArrayGeometry(count=6, kind="upa", horizontal=3, vertical=2)
        assert abs(np.linalg.norm(steering_vector(upa, 0.7, -0.3)) - 1.0) <= 1e-12

    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            ArrayGeometry(count=4, kind="upa", horizontal=3, vertical=2)
        with pytest.raises(ValueError):
            ArrayGeometry(count=0)


class TestGenerateChannel:
    def test_single_path_forced_gain(self, rng):
        params = ChannelParams(
            n_clusters=1, n_rays=1, angular_spread_deg=10.0,
            tx_geometry=ula(1), rx_geometry=ula(1),
        )
        h = generate_channel(params, rng, gains=[1.0])
        np.testing.assert_allclose(h, np.array([[1.0]]), atol=1e-15)

    def test_shape_is_rx_by_tx(self, rng):
        h = generate_channel(table_params(tx=8, rx=4), rng)
        assert h.shape == (4, 8)

    def test_mean_frobenius_energy(self):
        # E||H||_F^2 = Nr*Nt under the full scaling; 1e4 draws within 5%.
        rng = np.random.default_rng(2024)
        params = table_params(tx=4, rx=2)
        total = 0.0
        n_draws = 10_000
        for _ in range(n_draws):
            h = generate_channel(params, rng)
            total += float(np.linalg.norm(h) ** 2)
        assert 0.95 <= total / n_draws / 8.0 <= 1.05

    def test_unit_gain_mode_energy(self):
        rng = np.random.default_rng(77)
        params = table_params(tx=4, rx=2, gain="unit")
        total = sum(
            float(np.linalg.norm(generate_channel(params, rng)) ** 2)
            for _ in range(10_000)
        )
        assert 0.95 <= total / 10_000 <= 1.05

    def test_determinism_table_mmwave(self):
        params = table_params(tx=16, rx=4, band="mmwave")
        h1 = generate_channel(params, np.random.default_rng(5))
        h2 = generate_channel(params, np.random.default_rng(5))
        np.testing.assert_array_equal(h1, h2)

    def test_gain_count_checked(self, rng):
        with pytest.raises(ValueError):
            generate_channel(table_params(), rng, gains=[1.0, 2.0])

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ChannelParams(0, 1, 10.0, ula(2), ula(2))
        with pytest.raises(ValueError):
            ChannelParams(1, 1, -2.0, ula(2), ula(2))
        with pytest.raises(ValueError):
            ChannelParams(1, 1, 10.0, ula(2), ula(2), gain="bogus")


class TestGenerateChannelSet:
    def test_shapes_single_user(self):
        cfg = band_defaults("mmwave", users=1, eves=1, n_j=8)
        chset = generate_channel_set(cfg, np.random.default_rng(1))
        assert chset.bs_to_user[0].shape == (cfg.n_r, cfg.n_t)
        assert chset.bs_to_eve[0].shape == (cfg.n_e, cfg.n_t)
        assert chset.jammer_to_user[0].shape == (cfg.n_r, cfg.n_j)

    def test_link_count(self):
        cfg = band_defaults("mmwave", users=5, eves=1)
        chset = generate_channel_set(cfg, np.random.default_rng(1))
        total = len(chset.bs_to_user) + len(chset.bs_to_eve) + len(chset.jammer_to_user)
        assert total == 11

    def test_distinct_streams_differ(self):
        cfg = band_defaults("sub6", users=2)
        master = np.random.SeedSequence(99)
        a, b = (
            generate_channel_set(cfg, np.random.default_rng(child))
            for child in master.spawn(2)
        )
        assert not np.array_equal(a.bs_to_user[0], b.bs_to_user[0])

    def test_determinism(self):
        cfg = band_defaults("sub6", users=3)
        a = generate_channel_set(cfg, np.random.default_rng(4))
        b = generate_channel_set(cfg, np.random.default_rng(4))
        for lhs, rhs in zip(a.bs_to_user, b.bs_to_user):
            np.testing.assert_array_equal(lhs, rhs)

    def test_common_links_stable_across_user_count(self):
        # Scenarios differing only in U draw identical common links.
        small = band_defaults("sub6", users=2)
        large = band_defaults("sub6", users=3)
        a = generate_channel_set(small, np.random.default_rng(11))
        b = generate_channel_set(large, np.random.default_rng(11))
        np.testing.assert_array_equal(a.bs_to_eve[0], b.bs_to_eve[0])
        np.testing.assert_array_equal(a.bs_to_user[1], b.bs_to_user[1])
        np.testing.assert_array_equal(a.jammer_to_user[1], b.jammer_to_user[1])
