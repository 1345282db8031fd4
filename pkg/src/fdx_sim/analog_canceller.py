"""Multi-tap analog SI canceller.

A tap is an attenuator/phase-shifter path from one TX chain to one RX chain,
so the canceller is an M_k x N_k matrix ``C`` with one non-zero entry per
tap. Taps sit after the PA and therefore see the impaired TX signal.

Hardware quantisation: attenuation is counted in dB below the strongest tap
of the canceller (``att_step_db`` resolution, ``att_range_db`` span; weaker
taps clamp to zero) and phase in ``phase_step_deg`` increments. Both grids
round half away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix
from .units import mean_power, mw_to_dbm

DEFAULT_ATT_STEP_DB = 0.02
DEFAULT_PHASE_STEP_DEG = 0.13
DEFAULT_ATT_RANGE_DB = 60.0
DEFAULT_LAMBDA_A_DBM = -47.76


def round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def tap_mask(n_taps: int, m: int, n: int) -> np.ndarray:
    """Boolean (m, n) support with the first ``n_taps`` entries set column by column."""
    if not 0 <= n_taps <= m * n:
        raise InvalidInputError(f"n_taps={n_taps} outside 0..{m * n}")
    flat = np.zeros(m * n, dtype=bool)
    flat[:n_taps] = True
    return flat.reshape((m, n), order="F")


def configure(est_H_kk, mask) -> np.ndarray:
    """Tap values minimising ``||H + C||_F`` on the support: ``C = -H`` on the mask."""
    est_H_kk = as_matrix(est_H_kk, "est_H_kk")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != est_H_kk.shape:
        raise InvalidInputError(f"mask shape {mask.shape} != channel shape {est_H_kk.shape}")
    return np.where(mask, -est_H_kk, 0.0)


def quantize(values, att_step_db=DEFAULT_ATT_STEP_DB, phase_step_deg=DEFAULT_PHASE_STEP_DEG,
             att_range_db=DEFAULT_ATT_RANGE_DB) -> np.ndarray:
    """Snap non-zero taps to the attenuation/phase lattice.

    A step of 0 disables quantisation on that axis.
    """
    values = np.asarray(values, dtype=complex)
    if att_step_db < 0 or phase_step_deg < 0:
        raise InvalidInputError("quantisation steps must be non-negative")
    mag = np.abs(values)
    live = mag > 0
    if not np.any(live):
        return values.copy()
    ref = mag.max()
    att = np.zeros_like(mag)
    att[live] = 20.0 * np.log10(ref / mag[live])
    if att_step_db == 0 and phase_step_deg == 0:
        # No lattice: keep values bit-exact apart from the range clamp.
        out = values.copy()
        out[~live | (att > att_range_db)] = 0.0
        return out
    if att_step_db > 0:
        att = round_half_away(att / att_step_db) * att_step_db
    phase = np.degrees(np.angle(values))
    if phase_step_deg > 0:
        phase = round_half_away(phase / phase_step_deg) * phase_step_deg
    out = ref * 10.0 ** (-att / 20.0) * np.exp(1j * np.radians(phase))
    out[~live | (att > att_range_db)] = 0.0
    return out


def apply(C, x_tilde) -> np.ndarray:
    """Canceller output ``C @ x_tilde`` for impaired TX samples (N_k x L)."""
    C = as_matrix(C, "C")
    x_tilde = as_matrix(x_tilde, "x_tilde")
    if C.shape[1] != x_tilde.shape[0]:
        raise InvalidInputError(f"C {C.shape} incompatible with x_tilde {x_tilde.shape}")
    return C @ x_tilde


def check_saturation(residual, lambda_a_dbm=DEFAULT_LAMBDA_A_DBM):
    """Per-chain average power (dBm) and whether any chain exceeds ``lambda_a_dbm``."""
    residual = np.asarray(residual)
    if residual.ndim == 1:
        residual = residual[np.newaxis, :]
    if residual.shape[-1] < 1:
        raise InvalidInputError("need at least one sample")
    powers = np.atleast_1d(mw_to_dbm(mean_power(residual)))
    return powers, bool(np.any(powers > lambda_a_dbm))


@dataclass(frozen=True)
class CancellerTaps:
    mask: np.ndarray
    values: np.ndarray
    att_step_db: float = DEFAULT_ATT_STEP_DB
    phase_step_deg: float = DEFAULT_PHASE_STEP_DEG
    lambda_a_dbm: float = DEFAULT_LAMBDA_A_DBM

    @property
    def n_taps(self) -> int:
        return int(np.count_nonzero(self.mask))

    @classmethod
    def build(cls, est_H_kk, n_taps, att_step_db=DEFAULT_ATT_STEP_DB,
              phase_step_deg=DEFAULT_PHASE_STEP_DEG, lambda_a_dbm=DEFAULT_LAMBDA_A_DBM,
              att_range_db=DEFAULT_ATT_RANGE_DB) -> "CancellerTaps":
        m, n = np.shape(est_H_kk)
        mask = tap_mask(n_taps, m, n)
        values = quantize(configure(est_H_kk, mask), att_step_db, phase_step_deg, att_range_db)
        return cls(mask, values, att_step_db, phase_step_deg, lambda_a_dbm)

    def uncovered(self, est_H_kk) -> np.ndarray:
        """Part of the estimated SI channel that no tap addresses."""
        return np.where(self.mask, 0.0, est_H_kk)
