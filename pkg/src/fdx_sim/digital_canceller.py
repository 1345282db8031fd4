"""Digital cancellation of the SI left after the analog stage.

The residual SI observed at the ADC outputs is linear in the basis expansion
of the precoded TX samples, ``J = H_res Psi + (UL + noise)``. ``H_res`` is
estimated by least squares; because the rows of ``Psi`` are strongly
correlated polynomials of the same samples, the fit is done through the
row-wise Gram-Schmidt factorisation ``Psi = R Q``: first the decoupled
problem ``J ~ Omega Q`` (diagonal normal equations), then ``Omega = H R`` is
unwound by back substitution.

Basis kinds truncate the six-block expansion:

============== ====== =============================
kind           blocks captures
============== ====== =============================
linear         1      x
widely_linear  2      x, x*
full_nonlinear 6      x, x*, and the four cubic terms
============== ====== =============================
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError
from .impairments import basis_expand
from .linalg import as_matrix, back_substitute, rq_decompose, row_ls_solve
from .units import mean_power, mw_to_dbm


class BasisKind(Enum):
    LINEAR = "linear"
    WIDELY_LINEAR = "wl"
    FULL_NONLINEAR = "full"

    @property
    def n_blocks(self) -> int:
        return {"linear": 1, "wl": 2, "full": 6}[self.value]

    @classmethod
    def parse(cls, value) -> "BasisKind":
        if isinstance(value, cls):
            return value
        aliases = {"widely_linear": "wl", "full_nonlinear": "full", "nonlinear": "full"}
        try:
            return cls(aliases.get(str(value), str(value)))
        except ValueError:
            raise InvalidInputError(f"unknown basis kind {value!r}") from None


@dataclass(frozen=True)
class ResidualSiModel:
    """Estimated residual SI matrix, columns in basis-block order."""

    H_breve: np.ndarray  # (M_k, B * N_k)
    basis_kind: BasisKind
    dependent: np.ndarray  # rank report from the RQ step

    @property
    def n_tx(self) -> int:
        return self.H_breve.shape[1] // self.basis_kind.n_blocks

    def basis(self, X) -> np.ndarray:
        """Basis rows this model consumes for precoded samples ``X`` (N_k x L)."""
        return basis_expand(X, self.basis_kind.n_blocks)


def estimate_residual(J, psi, basis_kind=BasisKind.FULL_NONLINEAR) -> ResidualSiModel:
    """LS estimate of the residual SI matrix from ``L`` observed samples.

    Parameters
    ----------
    J : ndarray (M_k, L)
        Samples at the ADC outputs during the pilot phase.
    psi : ndarray (B*N_k, L)
        Basis expansion of the precoded pilot samples, B blocks.
    basis_kind : BasisKind or str
    """
    kind = BasisKind.parse(basis_kind)
    J = as_matrix(J, "J")
    psi = as_matrix(psi, "Psi")
    p, n_samples = psi.shape
    if J.shape[1] != n_samples:
        raise InvalidInputError(f"J has {J.shape[1]} samples, Psi has {n_samples}")
    if p % kind.n_blocks:
        raise InvalidInputError(f"Psi rows ({p}) not a multiple of {kind.n_blocks} blocks")
    if n_samples < p:
        raise InvalidInputError(f"need at least {p} samples, got {n_samples}")
    fac = rq_decompose(psi)
    omega = row_ls_solve(J, fac.Q)
    return ResidualSiModel(back_substitute(omega, fac.R), kind, fac.dependent)


def cancel(model: ResidualSiModel, psi) -> np.ndarray:
    """Digital cancellation signal ``xi = -H_breve @ psi``."""
    psi = as_matrix(psi, "psi")
    if psi.shape[0] != model.H_breve.shape[1]:
        raise InvalidInputError(f"psi has {psi.shape[0]} rows, model expects {model.H_breve.shape[1]}")
    return -model.H_breve @ psi


def residual_after_digital(J, model: ResidualSiModel, psi, ul_signal, noise) -> np.ndarray:
    """Per-chain power (dBm) of the SI that survives digital cancellation."""
    resid = np.asarray(J) + cancel(model, psi) - np.asarray(ul_signal) - np.asarray(noise)
    return np.atleast_1d(mw_to_dbm(mean_power(resid)))
