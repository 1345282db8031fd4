"""Baseband TX front end: IQ mixer imbalance followed by a cubic PA.

Per TX chain the impaired output is the six-term polynomial

    g1 x + g2 x* + g3 x^3 + g4 x^2 x* + g5 x (x*)^2 + g6 (x*)^3

whose coefficients follow from the mixer coefficients ``mu1, mu2`` and the
PA gains ``nu1, nu3`` (see :func:`six_gains`). Stacking the six monomials of
every chain gives the basis matrix ``Psi`` (:func:`basis_expand`), and the
whole front end is the product ``G @ Psi`` with ``G`` the augmented gain
matrix ``[diag(g1) ... diag(g6)]``.

Units: sample magnitudes are square-root milliwatts. IIP3 is an input power
in dBm, converted to the matching RMS amplitude in the same units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix
from .units import dbm_to_mw


class BasisBlock(IntEnum):
    """Row-block order of the basis expansion; shared by every consumer."""

    LINEAR = 0  # x
    CONJ = 1  # x*
    CUBE = 2  # x^3
    SQ_CONJ = 3  # x^2 x*
    CONJ_SQ = 4  # x (x*)^2
    CONJ_CUBE = 5  # (x*)^3


N_BLOCKS = len(BasisBlock)


def iq_coeffs(g: float, theta: float) -> tuple[complex, complex]:
    """IQ mixer coefficients ``mu1 = (1 + g e^{-j theta})/2``, ``mu2 = (1 - g e^{j theta})/2``."""
    if not g > 0:
        raise InvalidInputError(f"gain imbalance g must be positive, got {g}")
    mu1 = (1.0 + g * np.exp(-1j * theta)) / 2.0
    mu2 = (1.0 - g * np.exp(1j * theta)) / 2.0
    return complex(mu1), complex(mu2)


def six_gains(mu1, mu2, nu1, nu3) -> np.ndarray:
    """Composite gains ``(g1, ..., g6)`` of the mixer + cubic PA cascade."""
    a1, a2 = abs(mu1) ** 2, abs(mu2) ** 2
    return np.array(
        [
            mu1 * nu1,
            mu2 * nu1,
            mu1**2 * np.conj(mu2) * nu3,
            (2 * a1 * mu1 + a2 * mu1) * nu3,
            (2 * a1 * mu2 + a2 * mu2) * nu3,
            np.conj(mu1) * mu2**2 * nu3,
        ],
        dtype=complex,
    )


def iip3_amplitude(iip3_dbm: float) -> float:
    """RMS amplitude (sqrt mW) of an input power of ``iip3_dbm``."""
    return math.sqrt(dbm_to_mw(iip3_dbm))


@dataclass(frozen=True)
class ImpairmentProfile:
    """Immutable description of ``n_chains`` identical impaired TX chains."""

    g: float
    theta: float
    mu1: complex
    mu2: complex
    nu1: float
    iip3_dbm: float
    nu3: float
    gains: np.ndarray  # (n_chains, 6)

    @property
    def n_chains(self) -> int:
        return self.gains.shape[0]

    @property
    def irr_db(self) -> float:
        if self.mu2 == 0:
            return math.inf
        return 20.0 * math.log10(abs(self.mu1 / self.mu2))

    @property
    def gain_matrix(self) -> np.ndarray:
        """Augmented gain matrix ``[G1 G2 ... G6]`` of shape (N, 6N)."""
        n = self.n_chains
        G = np.zeros((n, N_BLOCKS * n), dtype=complex)
        idx = np.arange(n)
        for b in range(N_BLOCKS):
            G[idx, b * n + idx] = self.gains[:, b]
        return G

    @property
    def linear_gains(self) -> np.ndarray:
        return self.gains[:, BasisBlock.LINEAR]


def make_profile(g, theta, nu1, iip3_dbm, n_chains) -> ImpairmentProfile:
    mu1, mu2 = iq_coeffs(g, theta)
    nu3 = 0.0 if math.isinf(iip3_dbm) else nu1 / iip3_amplitude(iip3_dbm) ** 2
    gains = np.tile(six_gains(mu1, mu2, nu1, nu3), (n_chains, 1))
    gains.setflags(write=False)
    return ImpairmentProfile(g, theta, mu1, mu2, nu1, iip3_dbm, nu3, gains)


def gain_imbalance_for_irr(irr_db: float) -> float:
    """Gain imbalance ``g`` (with zero phase imbalance) giving the requested IRR.

    With ``theta = 0`` the ratio is ``(1 + g) / (1 - g)``; the branch ``g < 1``
    is returned.
    """
    if not irr_db > 0:
        raise InvalidInputError(f"IRR must be positive in dB, got {irr_db}")
    if math.isinf(irr_db):
        return 1.0
    r = 10.0 ** (irr_db / 20.0)
    return (r - 1.0) / (r + 1.0)


def profile_from_targets(irr_db, nu1, iip3_dbm, n_chains) -> ImpairmentProfile:
    """Identical-chain profile from an IRR target (dB), PA gain and IIP3 (dBm)."""
    if not nu1 > 0:
        raise InvalidInputError(f"nu1 must be positive, got {nu1}")
    if n_chains < 1:
        raise InvalidInputError("n_chains must be >= 1")
    return make_profile(gain_imbalance_for_irr(irr_db), 0.0, nu1, iip3_dbm, n_chains)


def profile_for_power(irr_db, per_antenna_mw, iip3_dbm, n_chains) -> ImpairmentProfile:
    """Profile whose linear gain ``|mu1 nu1|`` equals ``sqrt(per_antenna_mw)``."""
    g = gain_imbalance_for_irr(irr_db)
    mu1, _ = iq_coeffs(g, 0.0)
    return profile_from_targets(irr_db, math.sqrt(per_antenna_mw) / abs(mu1), iip3_dbm, n_chains)


def linear_profile(gain, n_chains) -> ImpairmentProfile:
    """Impairment-free chain with real gain ``gain`` (used for node m)."""
    return make_profile(1.0, 0.0, gain, math.inf, n_chains)


def basis_expand(X, n_blocks: int = N_BLOCKS) -> np.ndarray:
    """Stack the monomial blocks of ``X`` (N x L) into a (n_blocks*N) x L matrix."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if not 1 <= n_blocks <= N_BLOCKS:
        raise InvalidInputError(f"n_blocks must be in 1..{N_BLOCKS}")
    xc = X.conj()
    x2 = X * X
    xc2 = xc * xc
    blocks = (X, xc, x2 * X, x2 * xc, X * xc2, xc2 * xc)
    return np.vstack(blocks[:n_blocks])


def tx_front_end(X, profile: ImpairmentProfile) -> np.ndarray:
    """Impaired PA output ``G @ basis_expand(X)`` for every chain."""
    X = as_matrix(X, "X")
    if X.shape[0] != profile.n_chains:
        raise InvalidInputError(f"X has {X.shape[0]} rows but profile has {profile.n_chains} chains")
    g = [profile.gains[:, b, np.newaxis] for b in range(N_BLOCKS)]
    xc = X.conj()
    # Same sum as G @ basis_expand(X), grouped to avoid stacking the basis.
    return g[0] * X + g[1] * xc + X * X * (g[2] * X + g[3] * xc) + xc * xc * (g[4] * X + g[5] * xc)


def distortion(X, profile: ImpairmentProfile) -> np.ndarray:
    """The non-linear and image part ``delta = x_tilde - G1 x``."""
    X = as_matrix(X, "X")
    return tx_front_end(X, profile) - profile.linear_gains[:, np.newaxis] * X
