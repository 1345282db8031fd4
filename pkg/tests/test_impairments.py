import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from fdx_sim.errors import InvalidInputError
from fdx_sim.impairments import (
    N_BLOCKS,
    BasisBlock,
    basis_expand,
    distortion,
    gain_imbalance_for_irr,
    iip3_amplitude,
    iq_coeffs,
    linear_profile,
    make_profile,
    profile_for_power,
    profile_from_targets,
    six_gains,
    tx_front_end,
)

from conftest import crandn


def scalar_front_end(x, g):
    """Per-sample reference written straight from the six-term polynomial."""
    xc = np.conj(x)
    return g[0] * x + g[1] * xc + g[2] * x**3 + g[3] * x**2 * xc + g[4] * x * xc**2 + g[5] * xc**3


class TestIqCoeffs:
    def test_ideal_mixer(self):
        assert iq_coeffs(1.0, 0.0) == (1.0, 0.0)

    def test_formulas(self):
        mu1, mu2 = iq_coeffs(0.9, 0.1)
        assert mu1 == pytest.approx((1 + 0.9 * np.exp(-0.1j)) / 2)
        assert mu2 == pytest.approx((1 - 0.9 * np.exp(0.1j)) / 2)

    @pytest.mark.parametrize("g", [0.0, -0.5])
    def test_rejects_nonpositive_gain(self, g):
        with pytest.raises(InvalidInputError):
            iq_coeffs(g, 0.0)


class TestGainImbalance:
    @pytest.mark.parametrize("irr_db", [10.0, 25.0, 30.0, 45.0])
    def test_matches_root_finder(self, irr_db):
        def excess(g):
            mu1, mu2 = iq_coeffs(g, 0.0)
            return 20 * math.log10(abs(mu1) / abs(mu2)) - irr_db

        assert gain_imbalance_for_irr(irr_db) == pytest.approx(brentq(excess, 1e-6, 1 - 1e-12), rel=1e-10)

    def test_infinite_irr_is_ideal(self):
        assert gain_imbalance_for_irr(math.inf) == 1.0

    @pytest.mark.parametrize("irr_db", [0.0, -3.0])
    def test_rejects_nonpositive(self, irr_db):
        with pytest.raises(InvalidInputError):
            gain_imbalance_for_irr(irr_db)

    def test_profile_reports_irr(self):
        assert profile_from_targets(30.0, 1.0, 15.0, 2).irr_db == pytest.approx(30.0)


class TestSixGains:
    def test_known_mixer_values(self):
        mu1, mu2, nu1, nu3 = 0.9 + 0.1j, 0.05 - 0.02j, 2.0, 0.3
        g = six_gains(mu1, mu2, nu1, nu3)
        a1, a2 = abs(mu1) ** 2, abs(mu2) ** 2
        expected = [mu1 * nu1, mu2 * nu1, mu1**2 * np.conj(mu2) * nu3, (2 * a1 + a2) * mu1 * nu3,
                    (2 * a1 + a2) * mu2 * nu3, np.conj(mu1) * mu2**2 * nu3]
        np.testing.assert_allclose(g, expected)

    def test_ideal_mixer_only_has_x_and_x2xc(self):
        g = six_gains(1.0, 0.0, 1.5, 0.2)
        np.testing.assert_allclose(g, [1.5, 0, 0, 0.4, 0, 0])

    def test_nu3_from_iip3(self):
        prof = make_profile(1.0, 0.0, 3.0, 15.0, 1)
        assert prof.nu3 == pytest.approx(3.0 / 10**1.5)
        assert iip3_amplitude(15.0) ** 2 == pytest.approx(10**1.5)

    def test_infinite_iip3_is_linear(self):
        assert make_profile(0.9, 0.0, 1.0, math.inf, 2).nu3 == 0.0


class TestBasisExpand:
    def test_block_order(self):
        # x = j: x, x*, x^3, x^2 x*, x (x*)^2, (x*)^3
        psi = basis_expand(np.array([[1j]]))
        np.testing.assert_allclose(psi.ravel(), [1j, -1j, -1j, 1j, -1j, 1j])

    def test_enum_indexes_blocks(self, rng):
        X = crandn(rng, 3, 7)
        psi = basis_expand(X)
        np.testing.assert_allclose(psi[BasisBlock.SQ_CONJ * 3:(BasisBlock.SQ_CONJ + 1) * 3], X**2 * X.conj())

    @pytest.mark.parametrize("n_blocks", [1, 2, 6])
    def test_truncation(self, rng, n_blocks):
        X = crandn(rng, 2, 5)
        np.testing.assert_array_equal(basis_expand(X, n_blocks), basis_expand(X)[: 2 * n_blocks])

    @pytest.mark.parametrize("n_blocks", [0, 7])
    def test_bad_block_count(self, n_blocks):
        with pytest.raises(InvalidInputError):
            basis_expand(np.ones((1, 3)), n_blocks)


class TestFrontEnd:
    def test_matches_scalar_reference(self, rng):
        prof = profile_from_targets(30.0, 1.7, 15.0, 4)
        X = crandn(rng, 4, 50, var=3.0)
        out = tx_front_end(X, prof)
        for i in range(4):
            for t in range(50):
                assert out[i, t] == pytest.approx(scalar_front_end(X[i, t], prof.gains[i]), rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(irr=st.floats(5.0, 60.0), iip3=st.floats(-10.0, 30.0), n=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    def test_equals_gain_matrix_times_basis(self, irr, iip3, n, seed):
        rng = np.random.default_rng(seed)
        prof = profile_from_targets(irr, 1.0, iip3, n)
        X = crandn(rng, n, 20)
        ref = prof.gain_matrix @ basis_expand(X)
        np.testing.assert_allclose(tx_front_end(X, prof), ref, rtol=1e-10, atol=1e-12 * np.abs(ref).max())

    def test_gain_matrix_shape(self):
        prof = profile_from_targets(30.0, 1.0, 15.0, 3)
        assert prof.gain_matrix.shape == (3, 3 * N_BLOCKS)

    def test_ideal_chain_has_no_distortion(self, rng):
        X = crandn(rng, 2, 30)
        np.testing.assert_allclose(distortion(X, linear_profile(2.0, 2)), 0.0, atol=1e-15)
        prof = profile_for_power(math.inf, 4.0, math.inf, 2)
        np.testing.assert_allclose(tx_front_end(X, prof), 2.0 * X)

    def test_linear_gain_matches_power(self):
        prof = profile_for_power(30.0, 25.0, 15.0, 4)
        np.testing.assert_allclose(np.abs(prof.linear_gains), 5.0)

    def test_gains_are_read_only(self):
        prof = profile_from_targets(30.0, 1.0, 15.0, 2)
        with pytest.raises(ValueError):
            prof.gains[0, 0] = 0.0

    def test_chain_mismatch(self, rng):
        with pytest.raises(InvalidInputError):
            tx_front_end(crandn(rng, 3, 4), profile_from_targets(30.0, 1.0, 15.0, 2))
