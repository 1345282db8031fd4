"""Achievable rates, interference covariances, BER and saturation statistics.

Combiners are applied as ``U^H y``; a combiner is M x d with unit-norm
columns, so covariances here are d x d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError


@dataclass(frozen=True)
class RateReport:
    r_ul: float
    r_dl: float
    computed_with: str = "true"

    @property
    def r_fd(self) -> float:
        return self.r_ul + self.r_dl


@dataclass(frozen=True)
class CovarianceReport:
    W_k: np.ndarray
    W_q: np.ndarray


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def interference_covariance(U, H_plus_C, G1V, delta_cov, sigma2: float) -> np.ndarray:
    """Interference-plus-noise covariance after combining.

    ``W = U^H A (G1V G1V^H + Sigma_delta) A^H U + sigma2 U^H U`` with
    ``A = H_plus_C`` (the residual SI coupling) and ``Sigma_delta`` the
    covariance of the TX distortion vector.
    """
    U = np.asarray(U, dtype=complex)
    A = np.asarray(H_plus_C, dtype=complex)
    G1V = np.asarray(G1V, dtype=complex)
    tx_cov = G1V @ G1V.conj().T + np.asarray(delta_cov, dtype=complex)
    B = U.conj().T @ A
    return hermitian_part(B @ tx_cov @ B.conj().T + sigma2 * (U.conj().T @ U))


def sample_covariance(samples: np.ndarray) -> np.ndarray:
    """Zero-mean sample covariance of the rows of ``samples`` (M x L)."""
    samples = np.asarray(samples, dtype=complex)
    return hermitian_part(samples @ samples.conj().T / samples.shape[1])


def link_rate(U, H, G1, V, W) -> float:
    """``log2 det(I + E E^H W^-1)`` for the effective channel ``E = U^H H diag(G1) V``."""
    E = np.asarray(U, dtype=complex).conj().T @ np.asarray(H, dtype=complex) \
        @ np.diag(np.asarray(G1, dtype=float)) @ np.asarray(V, dtype=complex)
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    d = E.shape[0]
    if W.shape != (d, d):
        raise InvalidInputError(f"W must be {d}x{d}, got {W.shape}")
    M = np.eye(d) + E @ E.conj().T @ np.linalg.inv(W)
    sign, logdet = np.linalg.slogdet(M)
    if not np.isfinite(logdet):
        raise NumericalError("rate determinant is not finite")
    return max(0.0, float(logdet / np.log(2.0)))


def ber_count(tx_bits, rx_bits):
    """``(errors, total, ber)`` between two equal-length bit streams."""
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise InvalidInputError(f"bit streams differ in length: {tx.size} vs {rx.size}")
    errors = int(np.count_nonzero(tx != rx))
    total = int(tx.size)
    return errors, total, (errors / total if total else 0.0)


def saturation_probability(flags) -> float:
    flags = np.asarray(flags, dtype=bool).ravel()
    if flags.size == 0:
        raise InvalidInputError("need at least one run")
    return float(flags.mean())


def wilson_interval(errors: int, total: int, z: float = 1.959963984540054):
    """Two-sided Wilson score interval for a binomial proportion."""
    if total <= 0:
        raise InvalidInputError("total must be positive")
    p = errors / total
    denom = 1.0 + z**2 / total
    centre = (p + z**2 / (2 * total)) / denom
    half = z * np.sqrt(p * (1 - p) / total + z**2 / (4 * total**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)
