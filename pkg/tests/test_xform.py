"""Laplace-transform quadrature, inversion and the Plancherel identity."""

import warnings

import numpy as np
import pytest

from pmlstrip import (Pulse, SampledSignal, TruncationWarning,
                      inverse_laplace_grid, laplace_grid, laplace_numeric,
                      parseval_residual, transform_property_check)


class TestSampledSignal:
    def test_validation(self):
        with pytest.raises(ValueError):
            SampledSignal(np.array([0.0, 1.0]), np.zeros(2))
        with pytest.raises(ValueError):
            SampledSignal(np.array([0.5, 1.0, 1.5, 2.0]), np.zeros(4))
        with pytest.raises(ValueError):
            SampledSignal(np.array([0.0, 1.0, 1.5, 3.0]), np.zeros(4))

    def test_sample(self):
        sig = SampledSignal.sample(np.exp, 2.0, 100)
        assert sig.t.size == 101
        assert sig.dt == pytest.approx(0.02)
        assert sig.values[-1] == pytest.approx(np.exp(2.0))


class TestLaplaceNumeric:
    def test_exponential_oracle(self):
        sig = SampledSignal.sample(lambda t: np.exp(-t), 40.0, 20000)
        for s in (1.0 + 0.0j, 0.5 + 3.0j, 2.0 - 7.0j):
            assert abs(laplace_numeric(sig, s) - 1.0 / (s + 1.0)) < 1e-9

    def test_rejects_left_half_plane(self):
        sig = SampledSignal.sample(lambda t: np.exp(-t), 5.0, 100)
        with pytest.raises(ValueError):
            laplace_numeric(sig, -1.0 + 2.0j)

    def test_truncation_warning(self):
        sig = SampledSignal.sample(lambda t: np.ones_like(t), 5.0, 500)
        with pytest.warns(TruncationWarning):
            laplace_numeric(sig, 1.0 + 0.0j)

    def test_grid_matches_pointwise(self):
        sig = SampledSignal.sample(lambda t: np.exp(-t) * np.cos(3 * t),
                                   30.0, 6000)
        s2 = np.linspace(-10.0, 10.0, 11)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            vals = laplace_grid(sig, 1.0, s2)
            ref = np.array([laplace_numeric(sig, complex(1.0, w))
                            for w in s2])
        assert np.max(np.abs(vals - ref)) < 1e-12


class TestInversion:
    def test_pulse_round_trip(self):
        p = Pulse()
        s1 = 1.0
        s2 = np.linspace(-200.0, 200.0, 4001)
        vals = p.laplace(s1 + 1j * s2)
        t = np.linspace(0.0, 3.0, 31)
        recon = inverse_laplace_grid(vals, s1, s2, t)
        assert np.max(np.abs(recon - p(t))) < 1e-5


class TestTransformRules:
    def test_exponential_sine(self):
        u = lambda t: np.exp(-t) * np.sin(2 * t)          # noqa: E731
        du = lambda t: np.exp(-t) * (2 * np.cos(2 * t)    # noqa: E731
                                     - np.sin(2 * t))
        d2u = lambda t: np.exp(-t) * (-4 * np.cos(2 * t)  # noqa: E731
                                      - 3 * np.sin(2 * t))
        r1, r2, r3 = transform_property_check(u, du, d2u, 1.0 + 3.0j)
        assert r1 <= 1e-6
        assert r2 <= 1e-6
        assert r3 <= 1e-6

    def test_nonzero_initial_slope(self):
        # u(0) = 0, u'(0) = 1 exercises the initial-value term of the
        # second-derivative rule
        u = lambda t: t * np.exp(-t)                      # noqa: E731
        du = lambda t: (1 - t) * np.exp(-t)               # noqa: E731
        d2u = lambda t: (t - 2) * np.exp(-t)              # noqa: E731
        r1, r2, r3 = transform_property_check(u, du, d2u, 2.0 + 1.0j)
        assert max(r1, r2, r3) <= 1e-6


class TestParseval:
    def test_exponential_pair_quarter(self):
        # int_0^inf e^{-2t} e^{-t} e^{-t} dt = 1/4 exactly
        sig = SampledSignal.sample(lambda t: np.exp(-t), 40.0, 16000)
        res = parseval_residual(sig, sig, 1.0)
        assert res <= 1e-6
        rhs = np.trapezoid(np.exp(-2 * sig.t) * sig.values ** 2, sig.t)
        assert rhs == pytest.approx(0.25, abs=1e-5)

    def test_pulse_relative(self):
        p = Pulse()
        sig = SampledSignal.sample(p, 8.0, 8000)
        ref = float(np.trapezoid(np.exp(-2 * sig.t) * sig.values ** 2,
                                 sig.t))
        res = parseval_residual(sig, sig, 1.0)
        assert res / ref <= 1e-5

    def test_rejects_bad_abscissa(self):
        sig = SampledSignal.sample(lambda t: np.exp(-t), 5.0, 100)
        with pytest.raises(ValueError):
            parseval_residual(sig, sig, 0.0)
