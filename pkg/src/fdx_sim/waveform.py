"""16-QAM and CP-OFDM modem.

Gray-mapped 16-QAM, bits ``b0 b1 b2 b3`` per symbol::

    I = (1 - 2 b0) (1 + 2 b2) / sqrt(10)
    Q = (1 - 2 b1) (1 + 2 b3) / sqrt(10)

so ``0000 -> (1 + 1j)/sqrt(10)`` and ``1111 -> (-3 - 3j)/sqrt(10)``. Along
each axis the levels -3, -1, +1, +3 carry bit pairs 11, 10, 00, 01.

OFDM uses a unitary DFT, so average power per sample equals average power
per frequency bin (null bins included).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

_SCALE = 1.0 / np.sqrt(10.0)


def qam16_mod(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if bits.size % 4:
        raise InvalidInputError(f"bit count {bits.size} is not a multiple of 4")
    b = bits.reshape(-1, 4)
    i = (1 - 2 * b[:, 0]) * (1 + 2 * b[:, 2])
    q = (1 - 2 * b[:, 1]) * (1 + 2 * b[:, 3])
    return _SCALE * (i + 1j * q)


def qam16_demod(symbols) -> np.ndarray:
    """Hard minimum-distance decisions; returns a flat int8 bit array."""
    s = np.asarray(symbols).ravel() / _SCALE
    out = np.empty((s.size, 4), dtype=np.int8)
    out[:, 0] = s.real < 0
    out[:, 1] = s.imag < 0
    out[:, 2] = np.abs(s.real) > 2
    out[:, 3] = np.abs(s.imag) > 2
    return out.ravel()


def qam16_constellation() -> np.ndarray:
    """The 16 points indexed by the integer value of ``b0 b1 b2 b3``."""
    nibbles = (np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1
    return qam16_mod(nibbles.ravel())


@dataclass(frozen=True)
class OfdmNumerology:
    n_subcarriers: int = 256
    n_data_subcarriers: int = 234
    cp_len: int = 64
    bandwidth_hz: float = 1.4e6
    data_bins: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n, d = self.n_subcarriers, self.n_data_subcarriers
        if not 0 < d < n or d % 2:
            raise InvalidInputError("need an even data-subcarrier count below the FFT size")
        if not 0 <= self.cp_len < n:
            raise InvalidInputError("cyclic prefix must be shorter than the FFT size")
        half = d // 2
        # +-1..+-half around DC; DC and band edges stay empty.
        bins = np.concatenate([np.arange(1, half + 1), np.arange(n - half, n)])
        bins.setflags(write=False)
        object.__setattr__(self, "data_bins", bins)

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def bits_per_symbol(self) -> int:
        return 4 * self.n_data_subcarriers

    @property
    def power_scale(self) -> float:
        """Grid scale factor that gives unit average power per time sample."""
        return float(np.sqrt(self.n_subcarriers / self.n_data_subcarriers))


DEFAULT_NUMEROLOGY = OfdmNumerology()


def ofdm_modulate(grid, numerology: OfdmNumerology = DEFAULT_NUMEROLOGY) -> np.ndarray:
    """Map ``grid`` (..., n_data, n_symbols) to CP-OFDM samples (..., n_symbols * symbol_len)."""
    grid = np.asarray(grid, dtype=complex)
    nu = numerology
    if grid.ndim < 2 or grid.shape[-2] != nu.n_data_subcarriers:
        raise InvalidInputError(f"grid must have {nu.n_data_subcarriers} rows on axis -2, got {grid.shape}")
    lead, n_sym = grid.shape[:-2], grid.shape[-1]
    bins = np.zeros(lead + (nu.n_subcarriers, n_sym), dtype=complex)
    bins[..., nu.data_bins, :] = grid
    body = np.fft.ifft(bins, axis=-2, norm="ortho")
    with_cp = np.concatenate([body[..., nu.n_subcarriers - nu.cp_len:, :], body], axis=-2)
    # (..., symbol_len, n_sym) -> (..., n_sym, symbol_len) -> flat time axis
    return np.swapaxes(with_cp, -1, -2).reshape(lead + (n_sym * nu.symbol_len,))


def ofdm_demodulate(samples, numerology: OfdmNumerology = DEFAULT_NUMEROLOGY) -> np.ndarray:
    """Strip the CP and DFT each symbol; inverse of :func:`ofdm_modulate`."""
    samples = np.asarray(samples, dtype=complex)
    nu = numerology
    total = samples.shape[-1]
    if total % nu.symbol_len:
        raise InvalidInputError(f"sample count {total} is not a multiple of {nu.symbol_len}")
    lead = samples.shape[:-1]
    frames = samples.reshape(lead + (total // nu.symbol_len, nu.symbol_len))[..., nu.cp_len:]
    bins = np.fft.fft(frames, axis=-1, norm="ortho")
    return np.swapaxes(bins[..., nu.data_bins], -1, -2)


def papr_db(samples) -> float:
    x = np.asarray(samples).ravel()
    if x.size == 0:
        raise InvalidInputError("PAPR of an empty signal")
    p = x.real**2 + x.imag**2
    mean = p.mean()
    if mean == 0:
        raise InvalidInputError("PAPR undefined for an all-zero signal")
    return float(10.0 * np.log10(p.max() / mean))


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.int8)
