"""End-to-end full-duplex MIMO link simulation and Monte Carlo sweeps.

One run (:func:`run_once`) draws a block-fading channel set, estimates it
from pilots, configures the analog canceller, designs the beamformers, fits
the digital canceller on a pilot burst and finally pushes an OFDM packet
through the whole chain, measuring residual SI, saturation, rates and UL
BER at the full-duplex node.

Random streams: run ``i`` of a sweep uses ``seed = base_seed + i``; the
seed is split with :class:`numpy.random.SeedSequence` into independent
streams for channels, pilots, probe samples, data bits and noise. The same
seed is used at every TX power point, so power sweeps are paired.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import analog_canceller as ac
from .beamforming import (
    BeamformerSet,
    design_dl_combiner,
    design_dl_precoder,
    design_ul_combiner,
    design_ul_precoder,
    power_alloc,
)
from .channel import ChannelSet, complex_gaussian, estimate_channel, rayleigh_channel, rician_channel
from .digital_canceller import BasisKind, cancel, estimate_residual
from .errors import ConfigError, InvalidInputError
from .impairments import basis_expand, distortion, profile_for_power, tx_front_end
from .metrics import (
    interference_covariance,
    link_rate,
    sample_covariance,
    saturation_probability,
    wilson_interval,
)
from .units import dbm_to_mw, mean_power, mw_to_dbm
from .waveform import OfdmNumerology, ofdm_demodulate, ofdm_modulate, qam16_demod, qam16_mod, random_bits

log = logging.getLogger(__name__)

RESULTS_HEADER = ["tx_power_dbm", "run", "seed", "sat", "res_analog_dbm", "res_digital_dbm",
                  "r_ul", "r_dl", "r_fd", "ber"]
CURVES_HEADER = ["tx_power_dbm", "n_runs", "sat_prob", "r_ul_mean", "r_ul_ci95", "r_dl_mean",
                 "r_dl_ci95", "r_fd_mean", "r_fd_ci95", "ber", "ber_ci_low", "ber_ci_high",
                 "res_analog_dbm", "res_digital_dbm"]


@dataclass
class SimConfig:
    """All simulation parameters; defaults reproduce the reference setup."""

    n_k: int = 4
    m_k: int = 4
    m_q: int = 4
    n_m: int = 1
    d_k: int | None = None  # None -> min(m_q, n_k)
    d_m: int | None = None  # None -> min(m_k, n_m)
    tx_powers_dbm: list = field(default_factory=lambda: [float(p) for p in range(20, 41, 2)])
    p_m_dbm: float | None = None  # None -> follow the node-k TX power
    noise_k_dbm: float = -110.0
    noise_q_dbm: float = -90.0
    pathloss_ul_db: float = 110.0
    pathloss_dl_db: float = 110.0
    pathloss_si_db: float = 40.0
    rician_k_db: float = 35.0
    irr_db: float = 30.0
    iip3_dbm: float = 15.0
    adc_bits: int | None = 14
    papr_headroom_db: float = 10.0
    lambda_a_dbm: float = -47.76
    n_taps: int = 12
    att_step_db: float = 0.02
    phase_step_deg: float = 0.13
    att_range_db: float = 60.0
    basis: str = "full"
    n_runs: int = 1000
    n_ofdm_symbols: int = 200
    n_subcarriers: int = 256
    n_data_subcarriers: int = 234
    cp_len: int = 64
    bandwidth_hz: float = 1.4e6
    base_seed: int = 0
    n_est_samples: int = 640
    ul_on_during_estimation: bool = True
    subtract_ul_pilots: bool = True  # remove known UL pilots (via est. H_km) before the digital LS fit
    pilot_len: int | None = None  # None -> 4 * largest antenna count
    pilot_power_dbm: float | None = None  # None -> same as data power
    si_weight_points: int = 11
    delta_cov_samples: int = 10_000
    noise: bool = True
    perfect_csi: bool = False
    workers: int = 1

    @property
    def numerology(self) -> OfdmNumerology:
        return OfdmNumerology(self.n_subcarriers, self.n_data_subcarriers, self.cp_len, self.bandwidth_hz)

    @property
    def basis_kind(self) -> BasisKind:
        return BasisKind.parse(self.basis)

    @property
    def alpha(self) -> int:
        return self.d_k if self.d_k is not None else min(self.m_q, self.n_k)

    @property
    def n_streams_m(self) -> int:
        return self.d_m if self.d_m is not None else min(self.m_k, self.n_m)

    @property
    def pilot_length(self) -> int:
        if self.pilot_len is not None:
            return self.pilot_len
        return 4 * max(self.n_k, self.m_k, self.m_q, self.n_m)

    def validate(self) -> "SimConfig":
        try:
            for name in ("n_k", "m_k", "m_q", "n_m", "n_runs", "n_ofdm_symbols", "si_weight_points",
                         "n_est_samples", "delta_cov_samples", "workers"):
                if int(getattr(self, name)) < 1:
                    raise ConfigError(f"{name} must be >= 1")
            if not 0 <= self.n_taps <= self.n_k * self.m_k:
                raise ConfigError(f"n_taps must lie in 0..{self.n_k * self.m_k}")
            if not 1 <= self.alpha <= min(self.m_q, self.n_k):
                raise ConfigError("d_k outside 1..min(m_q, n_k)")
            if not 1 <= self.n_streams_m <= min(self.m_k, self.n_m):
                raise ConfigError("d_m outside 1..min(m_k, n_m)")
            if self.pilot_length < max(self.n_k, self.n_m):
                raise ConfigError("pilot_len shorter than the transmit antenna count")
            if not self.tx_powers_dbm:
                raise ConfigError("tx_powers_dbm is empty")
            if self.adc_bits is not None and int(self.adc_bits) < 1:
                raise ConfigError("adc_bits must be positive or null")
            if self.irr_db <= 0:
                raise ConfigError("irr_db must be positive")
            if self.n_est_samples < self.basis_kind.n_blocks * self.n_k:
                raise ConfigError("n_est_samples smaller than the digital basis size")
            self.numerology
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from exc
        return self


PROFILES = {
    "paper": {},
    "desk": {"n_runs": 100, "n_ofdm_symbols": 20},
}


def make_config(profile: str = "paper", **overrides) -> SimConfig:
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    return replace_config(SimConfig(), **{**PROFILES[profile], **overrides})


def replace_config(cfg: SimConfig, **overrides) -> SimConfig:
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "tx_powers_dbm" in overrides:
        powers = overrides["tx_powers_dbm"]
        overrides["tx_powers_dbm"] = [float(p) for p in np.atleast_1d(powers)]
    return dataclasses.replace(cfg, **overrides).validate()


def load_config(path, profile: str = "desk") -> SimConfig:
    """Read a YAML key-value file on top of a named profile."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a key-value mapping")
    data = dict(data)
    profile = data.pop("profile", profile)
    return make_config(profile, **data)


@dataclass(frozen=True)
class RunResult:
    tx_power_dbm: float
    run: int
    seed: int
    saturated: bool
    res_analog_dbm: np.ndarray  # per RX chain
    res_digital_dbm: np.ndarray  # per RX chain
    r_ul: float
    r_dl: float
    bit_errors: int
    n_bits: int
    si_weight: float
    digital_rank: int

    @property
    def r_fd(self) -> float:
        return self.r_ul + self.r_dl

    @property
    def ber(self) -> float:
        return self.bit_errors / self.n_bits

    @property
    def res_analog_mean_dbm(self) -> float:
        return _mean_dbm(self.res_analog_dbm)

    @property
    def res_digital_mean_dbm(self) -> float:
        return _mean_dbm(self.res_digital_dbm)

    def csv_row(self) -> list[str]:
        return [_fmt(self.tx_power_dbm), str(self.run), str(self.seed), str(int(self.saturated)),
                _fmt(self.res_analog_mean_dbm), _fmt(self.res_digital_mean_dbm),
                _fmt(self.r_ul), _fmt(self.r_dl), _fmt(self.r_fd), _fmt(self.ber)]


def _mean_dbm(values_dbm) -> float:
    return float(mw_to_dbm(np.mean(dbm_to_mw(np.asarray(values_dbm)))))


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-tripping decimal, locale-free.
    return repr(float(x))


def adc(y: np.ndarray, bits: int | None, full_scale: float) -> np.ndarray:
    """Midrise quantiser on each rail, clipping at +-full_scale."""
    if bits is None:
        return y
    step = 2.0 * full_scale / 2**int(bits)
    top = full_scale - step / 2.0

    def rail(v):
        return np.clip(step * (np.floor(v / step) + 0.5), -top, top)

    return rail(y.real) + 1j * rail(y.imag)


def _ofdm_burst(rng, n_streams, n_symbols, nu: OfdmNumerology):
    """Random 16-QAM OFDM samples with unit average power per stream."""
    bits = random_bits(rng, n_streams * n_symbols * nu.bits_per_symbol)
    grid = qam16_mod(bits).reshape(n_streams, nu.n_data_subcarriers, n_symbols)
    return bits, ofdm_modulate(grid, nu) * nu.power_scale


def draw_channels(cfg: SimConfig, rng_chan, rng_est, p_k_mw, p_m_mw) -> ChannelSet:
    s2k = dbm_to_mw(cfg.noise_k_dbm)
    s2q = dbm_to_mw(cfg.noise_q_dbm)
    H_kk = rician_channel(cfg.m_k, cfg.n_k, cfg.rician_k_db, cfg.pathloss_si_db, rng_chan)
    H_km = rayleigh_channel(cfg.m_k, cfg.n_m, cfg.pathloss_ul_db, rng_chan)
    H_qk = rayleigh_channel(cfg.m_q, cfg.n_k, cfg.pathloss_dl_db, rng_chan)
    if cfg.perfect_csi:
        est = (H_kk.copy(), H_km.copy(), H_qk.copy())
    else:
        lp = cfg.pilot_length
        pk = p_k_mw if cfg.pilot_power_dbm is None else dbm_to_mw(cfg.pilot_power_dbm)
        pm = p_m_mw if cfg.pilot_power_dbm is None else dbm_to_mw(cfg.pilot_power_dbm)
        noise_on = cfg.noise
        est = (
            estimate_channel(H_kk, pk, lp, s2k if noise_on else 0.0, rng_est),
            estimate_channel(H_km, pm, lp, s2k if noise_on else 0.0, rng_est),
            estimate_channel(H_qk, pk, lp, s2q if noise_on else 0.0, rng_est),
        )
    return ChannelSet(H_kk, H_km, H_qk, *est, s2k, s2q)


def design_beamformers(cfg: SimConfig, ch: ChannelSet, taps: ac.CancellerTaps, profile, p_k_mw, p_m_mw,
                       rng_probe) -> tuple[BeamformerSet, np.ndarray]:
    """Precoders, combiners and power allocation for one run.

    The SI-steering weight of the DL precoder is chosen on a uniform grid to
    maximise the estimated UL + DL rate among the candidates whose predicted
    per-chain post-analog residual stays below ``lambda_a_dbm``; when none
    qualifies, the candidate with the lowest worst-chain residual wins.

    Returns the beamformers and the predicted per-chain residual (mW).
    """
    alpha = cfg.alpha
    G1_k = power_alloc(p_k_mw, cfg.n_k)
    G1_m = power_alloc(p_m_mw, cfg.n_m)
    V_m = design_ul_precoder(ch.est_H_km, cfg.n_streams_m)
    # The UL combiner is designed for SI already pushed to the noise floor
    # by the A/D cancellers: interference covariance zero (maximum ratio).
    U_k = design_ul_combiner(ch.est_H_km, V_m, G1_m, np.zeros((cfg.m_k, cfg.m_k)), ch.sigma2_k)

    leak = taps.uncovered(ch.est_H_kk)
    A_est = ch.est_H_kk + taps.values
    lam = dbm_to_mw(cfg.lambda_a_dbm)
    probe = complex_gaussian(rng_probe, (alpha, cfg.delta_cov_samples))

    best = None
    for w in np.linspace(0.0, 1.0, cfg.si_weight_points):
        try:
            V_k, F_k = design_dl_precoder(ch.est_H_qk, leak, alpha, float(w))
        except InvalidInputError:
            # No null space left to steer into at this weight.
            continue
        x = V_k @ probe
        x_tilde = tx_front_end(x, profile)
        sigma_delta = sample_covariance(x_tilde - G1_k[:, None] * x)
        pred = np.real(np.diag(A_est @ sample_covariance(x_tilde) @ A_est.conj().T))
        G1V = G1_k[:, None] * V_k
        W_k = interference_covariance(U_k, A_est, G1V, sigma_delta, ch.sigma2_k)
        U_q = design_dl_combiner(ch.est_H_qk, F_k, alpha)
        W_q = interference_covariance(U_q, ch.est_H_qk, np.zeros_like(G1V), sigma_delta, ch.sigma2_q)
        rate = (link_rate(U_k, ch.est_H_km, G1_m, V_m, W_k)
                + link_rate(U_q, ch.est_H_qk, G1_k, V_k, W_q))
        feasible = bool(np.all(pred < lam))
        # Feasible beats infeasible; then higher rate, or lower residual if infeasible.
        key = (feasible, rate if feasible else -pred.max())
        if best is None or key > best[0]:
            best = (key, float(w), V_k, F_k, U_q, pred)
    _, w, V_k, F_k, U_q, pred = best
    bf = BeamformerSet(V_k=V_k, F_k=F_k, U_q=U_q, V_m=V_m, U_k=U_k, G1_k=G1_k, G1_m=G1_m, si_weight=w)
    return bf, pred


def run_once(config: SimConfig, seed: int, tx_power_dbm: float | None = None, run: int = 0) -> RunResult:
    """Simulate one packet at one TX power; pure function of its arguments."""
    cfg = config
    tx_power_dbm = float(cfg.tx_powers_dbm[0] if tx_power_dbm is None else tx_power_dbm)
    nu = cfg.numerology
    kind = cfg.basis_kind
    rng_chan, rng_est, rng_probe, rng_pilot, rng_bits, rng_noise = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(6))

    p_k = dbm_to_mw(tx_power_dbm)
    p_m = dbm_to_mw(tx_power_dbm if cfg.p_m_dbm is None else cfg.p_m_dbm)

    # Step 1: channels and their pilot estimates.
    ch = draw_channels(cfg, rng_chan, rng_est, p_k, p_m)

    # Analog canceller from the estimated SI channel (an input to the beamformer design).
    taps = ac.CancellerTaps.build(ch.est_H_kk, cfg.n_taps, cfg.att_step_db, cfg.phase_step_deg,
                                  cfg.lambda_a_dbm, cfg.att_range_db)
    profile = profile_for_power(cfg.irr_db, p_k / cfg.n_k, cfg.iip3_dbm, cfg.n_k)

    # Steps 2-5.
    bf, _ = design_beamformers(cfg, ch, taps, profile, p_k, p_m, rng_probe)

    A_true = ch.H_kk + taps.values
    full_scale = math.sqrt(dbm_to_mw(cfg.lambda_a_dbm + cfg.papr_headroom_db) / 2.0)
    ul_gain = ch.H_km @ (bf.G1_m[:, None] * bf.V_m)
    est_ul_gain = ch.est_H_km @ (bf.G1_m[:, None] * bf.V_m)

    def noise(n):
        if not cfg.noise:
            return np.zeros((cfg.m_k, n), dtype=complex)
        return complex_gaussian(rng_noise, (cfg.m_k, n), ch.sigma2_k)

    # Steps 6-8: pilot burst, residual SI observation, digital model fit.
    n_est = cfg.n_est_samples
    n_est_sym = -(-n_est // nu.symbol_len)
    _, s_pilot = _ofdm_burst(rng_pilot, cfg.alpha, n_est_sym, nu)
    _, s_m_pilot = _ofdm_burst(rng_pilot, bf.d_m, n_est_sym, nu)
    s_pilot, s_m_pilot = s_pilot[:, :n_est], s_m_pilot[:, :n_est]
    X_pilot = bf.V_k @ s_pilot
    si_pilot = A_true @ tx_front_end(X_pilot, profile)
    J = si_pilot + noise(n_est)
    if cfg.ul_on_during_estimation:
        J = J + ul_gain @ s_m_pilot
    J = adc(J, cfg.adc_bits, full_scale)
    if cfg.ul_on_during_estimation and cfg.subtract_ul_pilots:
        J = J - est_ul_gain @ s_m_pilot
    model = estimate_residual(J, basis_expand(X_pilot, kind.n_blocks), kind)

    # Data packet.
    bits_k, s_k = _ofdm_burst(rng_bits, cfg.alpha, cfg.n_ofdm_symbols, nu)
    bits_m, s_m = _ofdm_burst(rng_bits, bf.d_m, cfg.n_ofdm_symbols, nu)
    X_k = bf.V_k @ s_k
    x_tilde = tx_front_end(X_k, profile)
    si = A_true @ x_tilde
    res_analog_dbm, saturated = ac.check_saturation(si, cfg.lambda_a_dbm)
    ul = ul_gain @ s_m
    n_data = noise(si.shape[1])
    y = adc(si + ul + n_data, cfg.adc_bits, full_scale)
    z = y + cancel(model, model.basis(X_k))
    resid = z - ul - n_data
    res_digital_dbm = np.atleast_1d(mw_to_dbm(mean_power(resid)))

    # UL detection at node k.
    eq = bf.U_k.conj().T @ est_ul_gain
    s_hat = np.linalg.solve(eq, bf.U_k.conj().T @ z) / nu.power_scale
    bits_hat = qam16_demod(ofdm_demodulate(s_hat, nu))
    bit_errors = int(np.count_nonzero(bits_hat != bits_m))

    # Rates with the true channels; UL interference is what digital cancellation left.
    U_k = bf.U_k
    W_k = U_k.conj().T @ sample_covariance(resid) @ U_k + ch.sigma2_k * (U_k.conj().T @ U_k)
    r_ul = link_rate(U_k, ch.H_km, bf.G1_m, bf.V_m, W_k)
    sigma_delta = sample_covariance(distortion(X_k, profile))
    W_q = interference_covariance(bf.U_q, ch.H_qk, np.zeros((cfg.n_k, bf.d_k)), sigma_delta, ch.sigma2_q)
    r_dl = link_rate(bf.U_q, ch.H_qk, bf.G1_k, bf.V_k, W_q)

    return RunResult(
        tx_power_dbm=tx_power_dbm, run=run, seed=seed, saturated=saturated,
        res_analog_dbm=res_analog_dbm, res_digital_dbm=res_digital_dbm,
        r_ul=r_ul, r_dl=r_dl, bit_errors=bit_errors, n_bits=int(bits_m.size),
        si_weight=bf.si_weight, digital_rank=int(np.count_nonzero(~model.dependent)),
    )


def _run_task(args):
    cfg, seed, power, run = args
    return run_once(cfg, seed, power, run)


@dataclass
class SweepResult:
    config: SimConfig
    rows: list  # RunResult, ordered by (power index, run index)

    def at_power(self, tx_power_dbm: float) -> list:
        return [r for r in self.rows if r.tx_power_dbm == float(tx_power_dbm)]

    def curves(self) -> list[dict]:
        out = []
        for p in self.config.tx_powers_dbm:
            rows = self.at_power(p)
            n = len(rows)

            def mean_ci(values):
                v = np.asarray(values, dtype=float)
                ci = 1.96 * v.std(ddof=1) / math.sqrt(n) if n > 1 else 0.0
                return float(v.mean()), float(ci)

            errors = sum(r.bit_errors for r in rows)
            total = sum(r.n_bits for r in rows)
            lo, hi = wilson_interval(errors, total)
            r_ul, r_ul_ci = mean_ci([r.r_ul for r in rows])
            r_dl, r_dl_ci = mean_ci([r.r_dl for r in rows])
            r_fd, r_fd_ci = mean_ci([r.r_fd for r in rows])
            out.append({
                "tx_power_dbm": float(p), "n_runs": n,
                "sat_prob": saturation_probability([r.saturated for r in rows]),
                "r_ul_mean": r_ul, "r_ul_ci95": r_ul_ci, "r_dl_mean": r_dl, "r_dl_ci95": r_dl_ci,
                "r_fd_mean": r_fd, "r_fd_ci95": r_fd_ci,
                "ber": errors / total, "ber_ci_low": lo, "ber_ci_high": hi,
                "res_analog_dbm": _mean_dbm([r.res_analog_mean_dbm for r in rows]),
                "res_digital_dbm": _mean_dbm([r.res_digital_mean_dbm for r in rows]),
            })
        return out


def monte_carlo(config: SimConfig, workers: int | None = None) -> SweepResult:
    """Run ``n_runs`` independent packets at every TX power of the sweep.

    Results do not depend on ``workers``: each task is a pure function of
    (config, seed, power) and rows are collected in task order.
    """
    workers = config.workers if workers is None else workers
    tasks = [(config, config.base_seed + i, float(p), i)
             for p in config.tx_powers_dbm for i in range(config.n_runs)]
    log.info("running %d packets on %d worker(s)", len(tasks), workers)
    if workers <= 1:
        rows = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return SweepResult(config, rows)


def write_results(sweep: SweepResult, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = out / "results.csv"
    curves = out / "curves.csv"
    with open(results, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for row in sweep.rows:
            w.writerow(row.csv_row())
    with open(curves, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVES_HEADER)
        for c in sweep.curves():
            w.writerow([_fmt(c[k]) if isinstance(c[k], float) else str(c[k]) for k in CURVES_HEADER])
    return results, curves

