import math

import numpy as np
import pytest

from fdx_sim.units import db_to_lin, dbm_to_mw, lin_to_db, mean_power, mw_to_dbm


class TestConversions:
    @pytest.mark.parametrize("db, lin", [(0.0, 1.0), (10.0, 10.0), (-30.0, 1e-3), (3.0, 10**0.3)])
    def test_known_values(self, db, lin):
        assert db_to_lin(db) == pytest.approx(lin)
        assert lin_to_db(lin) == pytest.approx(db)

    def test_scalar_in_scalar_out(self):
        assert isinstance(dbm_to_mw(20.0), float)
        assert isinstance(mw_to_dbm(1.0), float)

    def test_zero_power_is_minus_inf(self):
        assert mw_to_dbm(0.0) == -math.inf

    def test_array_roundtrip(self):
        x = np.array([-110.0, -47.76, 0.0, 40.0])
        np.testing.assert_allclose(mw_to_dbm(dbm_to_mw(x)), x)


def test_mean_power_rows():
    x = np.array([[1 + 1j, 1 - 1j], [0, 2j]])
    np.testing.assert_allclose(mean_power(x), [2.0, 2.0])
