"""Digital TX/RX beamformers and per-antenna power allocation.

The DL precoder blends the DL-optimal subspace ``F`` with its projection on
the null space of the SI leakage the analog taps leave uncovered::

    V = normalize_columns((1 - w) F + w Pi_null F)

``w = 0`` is pure DL eigen-beamforming and ``w = 1`` steers every stream
away from the uncovered SI paths. The simulator picks ``w`` with a grid
sweep (see :mod:`fdx_sim.simulator`).

Singular vectors follow a fixed phase convention: the first non-negligible
entry of each vector is real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix, svd

_NULL_TOL = 1e-10


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    out = np.array(vectors, dtype=complex)
    for c in range(out.shape[1]):
        col = out[:, c]
        mags = np.abs(col)
        if mags.max() == 0:
            continue
        k = int(np.argmax(mags > 1e-12 * mags.max()))
        out[:, c] = col * (np.abs(col[k]) / col[k])
    return out


def normalize_columns(a: np.ndarray) -> np.ndarray:
    return a / np.linalg.norm(a, axis=0, keepdims=True)


def null_space_projector(A, tol=_NULL_TOL) -> np.ndarray:
    """Orthogonal projector onto ``{v : A v = 0}``."""
    A = as_matrix(A, "A")
    n = A.shape[1]
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    if s[0] == 0:
        return np.eye(n, dtype=complex)
    rank = int(np.count_nonzero(s > tol * s[0]))
    row_space = vh[:rank].conj().T
    return np.eye(n, dtype=complex) - row_space @ row_space.conj().T


def design_dl_precoder(est_H_qk, si_leak, alpha: int, si_weight: float):
    """DL precoder ``V_k`` and its DL-optimal basis ``F_k``.

    Parameters
    ----------
    est_H_qk : ndarray (M_q, N_k)
        Estimated DL channel.
    si_leak : ndarray (M_k, N_k)
        SI coupling to steer away from; the simulator passes the part of the
        estimated SI channel not covered by analog taps.
    alpha : int
        Number of DL streams, ``1 <= alpha <= min(M_q, N_k)``.
    si_weight : float
        Blend factor ``w`` in [0, 1].

    Returns
    -------
    V_k, F_k : ndarray (N_k, alpha)
    """
    est_H_qk = as_matrix(est_H_qk, "est_H_qk")
    m_q, n_k = est_H_qk.shape
    if not 1 <= alpha <= min(m_q, n_k):
        raise InvalidInputError(f"alpha={alpha} outside 1..{min(m_q, n_k)}")
    if not 0.0 <= si_weight <= 1.0:
        raise InvalidInputError("si_weight must lie in [0, 1]")
    _, _, V = svd(est_H_qk)
    F = fix_phase(V[:, :alpha])
    if si_weight == 0.0:
        return F.copy(), F

    proj = null_space_projector(si_leak)
    blend = (1.0 - si_weight) * F + si_weight * (proj @ F)
    norms = np.linalg.norm(blend, axis=0)
    dead = norms < 1e-12
    if np.any(dead):
        # A stream fully inside the leaking subspace at w = 1: reuse the
        # null-space direction with the strongest DL gain.
        w_null, _, _ = np.linalg.svd(proj)
        rank = int(round(np.real(np.trace(proj))))
        if rank == 0:
            raise InvalidInputError("SI null space is empty; cannot steer all streams away")
        cand = w_null[:, :rank]
        best = cand[:, np.argmax(np.linalg.norm(est_H_qk @ cand, axis=0))]
        blend[:, dead] = best[:, None]
        norms = np.linalg.norm(blend, axis=0)
    return blend / norms, F


def design_ul_precoder(est_H_km, d_m: int | None = None) -> np.ndarray:
    """Top ``d_m`` right singular vectors of the UL channel."""
    est_H_km = as_matrix(est_H_km, "est_H_km")
    limit = min(est_H_km.shape)
    d_m = limit if d_m is None else d_m
    if not 1 <= d_m <= limit:
        raise InvalidInputError(f"d_m={d_m} outside 1..{limit}")
    _, _, V = svd(est_H_km)
    return fix_phase(V[:, :d_m])


def design_dl_combiner(est_H_qk, F_k, d_k: int | None = None) -> np.ndarray:
    """Top ``d_k`` left singular vectors of the effective DL channel ``H_qk F_k``."""
    est_H_qk = as_matrix(est_H_qk, "est_H_qk")
    F_k = as_matrix(F_k, "F_k")
    if est_H_qk.shape[1] != F_k.shape[0]:
        raise InvalidInputError("est_H_qk and F_k shapes disagree")
    d_k = F_k.shape[1] if d_k is None else d_k
    U, _, _ = svd(est_H_qk @ F_k)
    return fix_phase(U[:, :d_k])


def design_ul_combiner(est_H_km, V_m, G1_m, interference_cov, sigma2: float) -> np.ndarray:
    """MMSE combiner ``(R + sigma2 I)^-1 H G1 V`` with unit-norm columns."""
    est_H_km = as_matrix(est_H_km, "est_H_km")
    m_k = est_H_km.shape[0]
    R = np.asarray(interference_cov, dtype=complex)
    if R.shape != (m_k, m_k):
        raise InvalidInputError(f"interference_cov must be {m_k}x{m_k}")
    eff = est_H_km @ np.diag(np.asarray(G1_m, dtype=float)) @ as_matrix(V_m, "V_m")
    w = np.linalg.solve(R + sigma2 * np.eye(m_k), eff)
    return normalize_columns(w)


def power_alloc(p_total_mw: float, n: int) -> np.ndarray:
    """Equal per-antenna amplitude gains ``sqrt(P / n)``."""
    if not p_total_mw > 0:
        raise InvalidInputError("total power must be positive")
    return np.full(n, np.sqrt(p_total_mw / n))


@dataclass(frozen=True)
class BeamformerSet:
    V_k: np.ndarray
    F_k: np.ndarray
    U_q: np.ndarray
    V_m: np.ndarray
    U_k: np.ndarray
    G1_k: np.ndarray
    G1_m: np.ndarray
    si_weight: float

    @property
    def alpha(self) -> int:
        return self.F_k.shape[1]

    @property
    def d_k(self) -> int:
        return self.V_k.shape[1]

    @property
    def d_m(self) -> int:
        return self.V_m.shape[1]
