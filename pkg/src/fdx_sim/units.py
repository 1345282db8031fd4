"""dB / dBm conversions.

Signal samples are scaled so that ``|x|**2`` is a power in milliwatts, which
lets dBm figures be compared directly with measured sample powers.
"""

import numpy as np


def _scalar_or_array(a):
    return a if a.ndim else float(a)


def db_to_lin(db):
    return _scalar_or_array(10.0 ** (np.asarray(db, dtype=float) / 10.0))


def lin_to_db(x):
    with np.errstate(divide="ignore"):
        return _scalar_or_array(10.0 * np.log10(np.asarray(x, dtype=float)))


dbm_to_mw = db_to_lin
mw_to_dbm = lin_to_db


def mean_power(x, axis=-1):
    """Time-average power ``mean(|x|**2)`` along ``axis``."""
    x = np.asarray(x)
    return np.mean(x.real**2 + x.imag**2, axis=axis)
