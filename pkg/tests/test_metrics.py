import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdx_sim.errors import InvalidInputError, NumericalError
from fdx_sim.metrics import (
    RateReport,
    ber_count,
    hermitian_part,
    interference_covariance,
    link_rate,
    sample_covariance,
    saturation_probability,
    wilson_interval,
)

from conftest import crandn


class TestCovariance:
    def test_formula(self, rng):
        U, A, G1V = crandn(rng, 4, 2), crandn(rng, 4, 4), crandn(rng, 4, 2)
        D = sample_covariance(crandn(rng, 4, 50))
        W = interference_covariance(U, A, G1V, D, 0.3)
        ref = U.conj().T @ A @ (G1V @ G1V.conj().T + D) @ A.conj().T @ U + 0.3 * U.conj().T @ U
        np.testing.assert_allclose(W, ref, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 4))
    def test_hermitian_psd(self, seed, d):
        rng = np.random.default_rng(seed)
        W = interference_covariance(crandn(rng, 4, d), crandn(rng, 4, 4), crandn(rng, 4, d),
                                    sample_covariance(crandn(rng, 4, 20)), 0.1)
        np.testing.assert_allclose(W, W.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(W).min() >= -1e-12 * np.trace(W).real

    def test_sample_covariance(self, rng):
        x = crandn(rng, 2, 100_000, var=3.0)
        np.testing.assert_allclose(sample_covariance(x), 3.0 * np.eye(2), atol=0.05)

    def test_hermitian_part(self):
        a = np.array([[1, 2j], [0, 1]])
        np.testing.assert_allclose(hermitian_part(a), [[1, 1j], [-1j, 1]])


class TestLinkRate:
    def test_scalar_oracle(self, rng):
        h = crandn(rng, 4, 1)
        u = h / np.linalg.norm(h)
        snr = 4.0 * np.linalg.norm(h) ** 2 / 0.5
        assert link_rate(u, h, [2.0], np.ones((1, 1)), 0.5 * np.ones((1, 1))) == pytest.approx(np.log2(1 + snr))

    def test_parallel_channels(self):
        H = np.diag([1.0, 2.0]).astype(complex)
        r = link_rate(np.eye(2), H, np.ones(2), np.eye(2), np.eye(2))
        assert r == pytest.approx(np.log2(2) + np.log2(5))

    def test_zero_channel(self):
        assert link_rate(np.eye(2), np.zeros((2, 2)), np.ones(2), np.eye(2), np.eye(2)) == 0.0

    def test_shape_check(self):
        with pytest.raises(InvalidInputError):
            link_rate(np.eye(2), np.eye(2), np.ones(2), np.eye(2), np.eye(3))

    def test_singular_w(self):
        with pytest.raises((NumericalError, np.linalg.LinAlgError)):
            link_rate(np.eye(2), np.eye(2), np.ones(2), np.eye(2), np.zeros((2, 2)))

    def test_report(self):
        rep = RateReport(1.5, 2.25)
        assert rep.r_fd == 3.75


class TestCounting:
    def test_ber_count(self):
        assert ber_count([0, 1, 1, 0], [0, 1, 0, 1]) == (2, 4, 0.5)
        with pytest.raises(InvalidInputError):
            ber_count([0], [0, 1])

    def test_saturation_probability(self):
        assert saturation_probability([True, False, False, False]) == 0.25
        with pytest.raises(InvalidInputError):
            saturation_probability([])

    @pytest.mark.parametrize("k, n, lo, hi", [(10, 100, 0.05523, 0.17437), (0, 100, 0.0, 0.03699)])
    def test_wilson(self, k, n, lo, hi):
        got = wilson_interval(k, n)
        assert got[0] == pytest.approx(lo, abs=1e-4)
        assert got[1] == pytest.approx(hi, abs=1e-4)

    def test_wilson_total(self):
        with pytest.raises(InvalidInputError):
            wilson_interval(0, 0)
