import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from amphodyne import (
    StateKind,
    StateSpec,
    char_fn,
    marginal_pdf,
    marginal_variance,
    mean_photon_number,
    single_photon,
    squeezed_single_photon,
    squeezed_vacuum,
    vacuum,
    wigner,
)

ALL_STATES = [vacuum(), single_photon(), squeezed_vacuum(1.0),
              squeezed_single_photon(1.0), squeezed_vacuum(3.0),
              squeezed_single_photon(3.0)]


def marginal_sigmas(state):
    """Per-axis standard deviations of the state's Wigner marginals."""
    return (math.sqrt(marginal_variance(state, 0.0)),
            math.sqrt(marginal_variance(state, math.pi / 2)))


def wigner_quadrature(state, fn, sq, sp, n=1201):
    """Brute-force integral of wigner * fn over a +/-6 sigma box."""
    q = np.linspace(-6 * sq, 6 * sq, n)
    p = np.linspace(-6 * sp, 6 * sp, n)
    w = wigner(state, q[:, None], p[None, :]) * fn(q[:, None], p[None, :])
    return np.trapezoid(np.trapezoid(w, p, axis=1), q)


class TestWigner:
    def test_vacuum_peak(self):
        assert wigner(vacuum(), 0.0, 0.0) == pytest.approx(1 / math.pi, abs=1e-15)

    def test_single_photon_depth(self):
        assert wigner(single_photon(), 0.0, 0.0) == pytest.approx(-1 / math.pi, abs=1e-15)

    def test_bsv_origin_is_peak_value(self):
        assert wigner(squeezed_vacuum(3.0), 0.0, 0.0) == pytest.approx(1 / math.pi, abs=1e-15)

    def test_ssp_point_value(self):
        # Direct symbolic evaluation at s = e^2, q=1, p=0:
        # (2 e^{-2} - 1)/pi * exp(-e^{-2}), computed at 50 digits.
        got = wigner(squeezed_single_photon(1.0), 1.0, 0.0)
        assert got == pytest.approx(-0.20276757223089909229, rel=1e-14)

    @pytest.mark.parametrize("state", ALL_STATES, ids=str)
    def test_normalization(self, state):
        sq, sp = marginal_sigmas(state)
        total = wigner_quadrature(state, lambda q, p: 1.0, sq, sp)
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("r1", [0.0, 0.5, 1.0, 3.0, 10.0])
    def test_ssp_depth_independent_of_r1(self, r1):
        assert wigner(squeezed_single_photon(r1), 0.0, 0.0) == pytest.approx(
            -1 / math.pi, abs=1e-15)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            wigner(vacuum(), math.nan, 0.0)
        with pytest.raises(ValueError):
            wigner(vacuum(), 0.0, math.inf)


class TestCharFn:
    @pytest.mark.parametrize("state", ALL_STATES, ids=str)
    def test_normalized_at_origin(self, state):
        assert char_fn(state, 0.0, 0.0) == 1.0 + 0.0j

    def test_vacuum_ray(self):
        xi = np.linspace(0, 5, 11)
        np.testing.assert_allclose(char_fn(vacuum(), xi, 0.0).real,
                                   np.exp(-xi ** 2 / 4), rtol=1e-15)

    @pytest.mark.parametrize("state,z", [
        (squeezed_vacuum(1.0), (0.5, 0.3)),
        (squeezed_single_photon(1.0), (0.4, 0.8)),
        (single_photon(), (1.1, -0.2)),
    ], ids=["bsv", "ssp", "photon"])
    def test_against_wigner_quadrature(self, state, z):
        # C(z) = integral of W(q,p) e^{i(z'q + z''p)}; the transform of these
        # real symmetric states is real, so only the cosine part survives.
        sq, sp = marginal_sigmas(state)
        got = complex(char_fn(state, *z))
        expected = wigner_quadrature(
            state, lambda q, p: np.cos(z[0] * q + z[1] * p), sq, sp)
        assert got.imag == 0.0
        assert got.real == pytest.approx(expected, abs=1e-8)

    def test_bsv_r3_against_quadrature(self):
        state = squeezed_vacuum(3.0)
        sq, sp = marginal_sigmas(state)
        got = complex(char_fn(state, 0.5, 0.5)).real
        expected = wigner_quadrature(
            state, lambda q, p: np.cos(0.5 * q + 0.5 * p), sq, sp, n=4001)
        assert got == pytest.approx(1.1207313997100265e-11, rel=1e-12)
        assert got == pytest.approx(expected, abs=1e-8)

    @given(st.sampled_from(ALL_STATES),
           st.floats(-30, 30), st.floats(-30, 30))
    @settings(max_examples=200, deadline=None)
    def test_bounded_by_one(self, state, z_re, z_im):
        assert abs(complex(char_fn(state, z_re, z_im))) <= 1.0 + 1e-12

    def test_extreme_argument_underflows_to_zero(self):
        assert char_fn(squeezed_single_photon(10.0), 1e3, 1e3) == 0.0


class TestMarginalPdf:
    def marginal_oracle(self, state, theta, x):
        # Integrate the rotated Wigner function over the orthogonal axis.
        f = lambda y: wigner(state,
                             x * math.cos(theta) - y * math.sin(theta),
                             x * math.sin(theta) + y * math.cos(theta))
        span = 10 * math.sqrt(marginal_variance(state, (theta + math.pi / 2) % math.pi))
        val, err = quad(f, -span, span, limit=400, epsabs=1e-12, epsrel=1e-12)
        assert err < 2e-9  # oracle must be an order below the 1e-8 comparison
        return val

    def test_vacuum_at_origin(self):
        assert marginal_pdf(vacuum(), 0.0, 0.0) == pytest.approx(
            1 / math.sqrt(math.pi), abs=1e-15)

    def test_single_photon_closed_form(self):
        q = np.linspace(-3, 3, 13)
        for theta in (0.0, 0.7, 2.0):
            np.testing.assert_allclose(
                marginal_pdf(single_photon(), theta, q),
                2 * q ** 2 * np.exp(-q ** 2) / math.sqrt(math.pi), rtol=1e-14)

    def test_bsv_squeezed_direction(self):
        # p-marginal of the r1=3 squeezed vacuum: N(0, e^{-6}/2).
        var = math.exp(-6) / 2
        q = np.array([0.0, 0.01, 0.05, -0.03])
        np.testing.assert_allclose(
            marginal_pdf(squeezed_vacuum(3.0), math.pi / 2, q),
            np.exp(-q ** 2 / (2 * var)) / math.sqrt(2 * math.pi * var), rtol=1e-14)

    @pytest.mark.parametrize("state", [vacuum(), single_photon(),
                                       squeezed_vacuum(1.0),
                                       squeezed_single_photon(1.0)], ids=str)
    def test_matches_rotated_quadrature(self, state):
        thetas = np.arange(8) * math.pi / 8
        for theta in thetas:
            sigma = math.sqrt(marginal_variance(state, float(theta)))
            for x in (0.0, 0.6 * sigma, 1.7 * sigma, -2.5 * sigma):
                assert marginal_pdf(state, float(theta), x) == pytest.approx(
                    self.marginal_oracle(state, float(theta), x), abs=1e-8)

    @pytest.mark.parametrize("state", ALL_STATES, ids=str)
    def test_integrates_to_one(self, state):
        for theta in (0.0, 1.1, 2.9):
            sigma = math.sqrt(marginal_variance(state, theta))
            q = np.linspace(-8 * sigma, 8 * sigma, 4001)
            assert np.trapezoid(marginal_pdf(state, theta, q), q) == pytest.approx(
                1.0, abs=1e-9)

    @pytest.mark.parametrize("state", ALL_STATES, ids=str)
    def test_phase_reflection_symmetry(self, state):
        q = np.linspace(-4, 4, 9)
        for theta in (0.3, 1.0, 1.4):
            np.testing.assert_allclose(marginal_pdf(state, theta, q),
                                       marginal_pdf(state, math.pi - theta, q),
                                       rtol=1e-13)

    def test_theta_domain_errors(self):
        for theta in (-0.1, math.pi, 4.0):
            with pytest.raises(ValueError):
                marginal_pdf(vacuum(), theta, 0.0)


class TestMeanPhotonNumber:
    def test_reference_values(self):
        assert mean_photon_number(vacuum()) == 0.0
        assert mean_photon_number(single_photon()) == 1.0
        n_bsv = mean_photon_number(squeezed_vacuum(3.0))
        assert n_bsv == pytest.approx(math.sinh(3.0) ** 2, rel=1e-15)
        assert 100 < n_bsv < 101  # the "N ~ 100" working point
        n_ssp = mean_photon_number(squeezed_single_photon(3.0))
        assert n_ssp == pytest.approx(3 * math.sinh(3.0) ** 2 + 1, rel=1e-15)
        assert 300 < n_ssp < 305  # the "N ~ 300" working point


class TestStateSpecValidation:
    def test_r1_range(self):
        with pytest.raises(ValueError):
            squeezed_vacuum(-0.5)
        with pytest.raises(ValueError):
            squeezed_vacuum(10.5)
        with pytest.raises(ValueError):
            squeezed_vacuum(math.nan)
        assert squeezed_vacuum(10.0).s == pytest.approx(math.exp(20.0))

    def test_r1_fixed_to_zero_for_unsqueezed_kinds(self):
        assert StateSpec(StateKind.VACUUM, 2.0).r1 == 0.0
        assert StateSpec(StateKind.SINGLE_PHOTON, 2.0).r1 == 0.0

    def test_immutable(self):
        state = squeezed_vacuum(1.0)
        with pytest.raises(AttributeError):
            state.r1 = 2.0
