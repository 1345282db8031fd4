"""Complex-matrix kernels: SVD, Gram-Schmidt RQ, back substitution, row-space LS.

Matrices are plain 2-D :class:`numpy.ndarray` objects of complex dtype. The
RQ factorisation works on *rows*: a fat matrix ``Psi`` (p x L, p <= L) is
written as ``Psi = R @ Q`` with ``R`` unit lower-triangular (p x p) and ``Q``
having mutually orthogonal (not normalised) rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

#: Relative row-norm threshold below which a row is treated as dependent.
RANK_TOL = 1e-12


def as_matrix(a, name="matrix") -> np.ndarray:
    """Validate ``a`` as a finite, non-empty 2-D array and return it as complex."""
    arr = np.asarray(a)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr.astype(complex, copy=False)


@dataclass(frozen=True)
class RqFactorization:
    """Result of :func:`rq_decompose`.

    Attributes
    ----------
    R : ndarray, shape (p, p)
        Unit lower-triangular factor.
    Q : ndarray, shape (p, L)
        Rows mutually orthogonal; rows flagged in ``dependent`` are zero.
    dependent : ndarray of bool, shape (p,)
        True where the input row was numerically dependent on earlier rows.
    """

    R: np.ndarray
    Q: np.ndarray
    dependent: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(~self.dependent))


def svd(a):
    """Thin SVD ``A = U @ diag(s) @ V^H``.

    Returns ``(U, s, V)`` with ``s`` descending and ``V`` (not ``V^H``) holding
    the right singular vectors in its columns.
    """
    a = as_matrix(a, "A")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return u, s, vh.conj().T


def rq_decompose(psi, tol=RANK_TOL) -> RqFactorization:
    """Row-wise Gram-Schmidt factorisation ``Psi = R Q``.

    Each row is orthogonalised against the previously accepted rows with two
    classical Gram-Schmidt passes (re-orthogonalisation keeps ``Q Q^H``
    diagonal to machine precision). A row whose remainder has norm below
    ``tol`` times the largest input row norm is marked dependent: its ``Q``
    row is zeroed and later rows are not projected on it.
    """
    psi = as_matrix(psi, "Psi")
    p, n = psi.shape
    if p > n:
        raise InvalidInputError(f"Psi must be fat or square (p <= L), got {psi.shape}")

    R = np.eye(p, dtype=complex)
    Q = np.zeros_like(psi)
    norms2 = np.zeros(p)
    dependent = np.zeros(p, dtype=bool)
    scale = np.max(np.linalg.norm(psi, axis=1))
    if scale == 0.0:
        dependent[:] = True
        return RqFactorization(R, Q, dependent)

    accepted: list[int] = []
    for i in range(p):
        v = psi[i].copy()
        if accepted:
            basis = Q[accepted]
            for _ in range(2):
                coef = (basis.conj() @ v) / norms2[accepted]
                v -= coef @ basis
                R[i, accepted] += coef
        nrm = np.linalg.norm(v)
        if nrm <= tol * scale:
            dependent[i] = True
            continue
        Q[i] = v
        norms2[i] = nrm**2
        accepted.append(i)
    return RqFactorization(R, Q, dependent)


def back_substitute(omega, R) -> np.ndarray:
    """Solve ``Theta @ R = Omega`` for unit lower-triangular ``R``.

    Columns of ``Theta`` are recovered from the last to the first, so no
    division is needed.
    """
    omega = as_matrix(omega, "Omega")
    R = as_matrix(R, "R")
    p = R.shape[0]
    if R.shape != (p, p) or omega.shape[1] != p:
        raise InvalidInputError(f"shape mismatch: Omega {omega.shape}, R {R.shape}")
    theta = np.zeros_like(omega)
    for j in range(p - 1, -1, -1):
        theta[:, j] = omega[:, j] - theta[:, j + 1:] @ R[j + 1:, j]
    return theta


def row_ls_solve(J, Q) -> np.ndarray:
    """Closed-form ``argmin_Omega ||J - Omega Q||_F`` for orthogonal-row ``Q``.

    ``Q Q^H`` is diagonal, so the inverse reduces to a per-column scaling.
    Columns that correspond to all-zero rows of ``Q`` are returned as zero.
    """
    J = as_matrix(J, "J")
    Q = as_matrix(Q, "Q")
    if J.shape[1] != Q.shape[1]:
        raise InvalidInputError(f"J and Q must have equal column counts, got {J.shape} and {Q.shape}")
    norms2 = np.sum(Q.real**2 + Q.imag**2, axis=1)
    omega = J @ Q.conj().T
    live = norms2 > 0.0
    omega[:, live] /= norms2[live]
    omega[:, ~live] = 0.0
    return omega
