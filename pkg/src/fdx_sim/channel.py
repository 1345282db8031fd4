"""Flat block-fading channels and pilot-based LS channel estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix
from .units import db_to_lin


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def complex_gaussian(rng, shape, var=1.0) -> np.ndarray:
    """I.i.d. circularly-symmetric complex Gaussian entries of variance ``var``."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def los_component(m: int, n: int) -> np.ndarray:
    """Deterministic unit-modulus LOS matrix ``exp(j pi (a + b) / 4)``."""
    a = np.arange(m)[:, None]
    b = np.arange(n)[None, :]
    return np.exp(1j * np.pi * (a + b) / 4.0)


def rayleigh_channel(m: int, n: int, pathloss_db: float, rng_seed=None) -> np.ndarray:
    if m < 1 or n < 1:
        raise InvalidInputError("channel dimensions must be positive")
    return complex_gaussian(_rng(rng_seed), (m, n), db_to_lin(-pathloss_db))


def rician_channel(m: int, n: int, k_factor_db: float, pathloss_db: float, rng_seed=None) -> np.ndarray:
    """Rician matrix ``sqrt(P) (sqrt(K/(K+1)) H_los + sqrt(1/(K+1)) H_scatter)``.

    ``k_factor_db = inf`` gives the pure LOS matrix and ``-inf`` pure Rayleigh.
    """
    if m < 1 or n < 1:
        raise InvalidInputError("channel dimensions must be positive")
    p = db_to_lin(-pathloss_db)
    scatter = complex_gaussian(_rng(rng_seed), (m, n))
    if np.isposinf(k_factor_db):
        los_w, nlos_w = 1.0, 0.0
    else:
        k = db_to_lin(k_factor_db)
        los_w, nlos_w = np.sqrt(k / (k + 1.0)), np.sqrt(1.0 / (k + 1.0))
    return np.sqrt(p) * (los_w * los_component(m, n) + nlos_w * scatter)


def pilot_matrix(n: int, pilot_len: int, pilot_power: float) -> np.ndarray:
    """First ``n`` rows of a DFT matrix of size ``pilot_len``.

    ``pilot_power`` is the total power per pilot slot, split evenly across the
    ``n`` transmit antennas; rows are constant-modulus and orthogonal with
    ``P P^H = (pilot_power / n) * pilot_len * I``.
    """
    if pilot_len < n:
        raise InvalidInputError(f"pilot length {pilot_len} shorter than antenna count {n}")
    idx = np.arange(n)[:, None] * np.arange(pilot_len)[None, :]
    return np.sqrt(pilot_power / n) * np.exp(-2j * np.pi * idx / pilot_len)


def estimate_channel(H_true, pilot_power: float, pilot_len: int, noise_var: float, rng_seed=None) -> np.ndarray:
    """LS estimate ``Y P^H (P P^H)^-1`` from one orthogonal pilot burst.

    Per-entry error variance is ``noise_var * n / (pilot_power * pilot_len)``.
    """
    H_true = as_matrix(H_true, "H_true")
    m, n = H_true.shape
    if pilot_len < n:
        raise InvalidInputError(f"pilot length {pilot_len} < {n} transmit antennas")
    if not pilot_power > 0:
        raise InvalidInputError("pilot_power must be positive")
    P = pilot_matrix(n, pilot_len, pilot_power)
    Y = H_true @ P
    if noise_var > 0:
        Y = Y + complex_gaussian(_rng(rng_seed), Y.shape, noise_var)
    # P P^H is a scaled identity.
    return Y @ P.conj().T / ((pilot_power / n) * pilot_len)


@dataclass(frozen=True)
class ChannelSet:
    """True and estimated SI, UL and DL channels of one block-fading run."""

    H_kk: np.ndarray
    H_km: np.ndarray
    H_qk: np.ndarray
    est_H_kk: np.ndarray
    est_H_km: np.ndarray
    est_H_qk: np.ndarray
    sigma2_k: float
    sigma2_q: float
