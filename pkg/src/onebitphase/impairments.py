"""Oscillator phase noise, AWGN channel, and 1-bit quantization.

The phase trajectory superimposes a white component (flat power spectral
density K0 inside the receive bandwidth) and a Wiener component whose
power spectral density falls off as K2/f^2.  A possible cubic-spectrum
component is outside the model; it is assumed suppressed upstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import FrameConfig, block_sample_range
from .waveform import PulseShape, ReferenceSignal, receive_taps

__all__ = [
    "ImpairmentError",
    "PhaseNoiseParams",
    "PhaseTrajectory",
    "QuantizedStream",
    "generate_phase",
    "stapn",
    "apply_channel",
    "quantize_1bit",
]


class ImpairmentError(ValueError):
    """Invalid noise parameters or mismatched stream lengths."""


@dataclass(frozen=True)
class PhaseNoiseParams:
    """Oscillator phase noise statistics on the receive sample grid.

    white_psd      K0, rad^2/Hz (often quoted in dB: 10*log10 K0)
    wiener_psd     K2, rad^2*Hz, the K2/f^2 spectral coefficient
    sample_period  T_s, s
    rx_bandwidth   W_g, Hz, single-sided receive filter bandwidth
    init_phase     Wiener component value one step before sample 0, rad
    """

    white_psd: float
    wiener_psd: float
    sample_period: float
    rx_bandwidth: float
    init_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.white_psd < 0 or self.wiener_psd < 0:
            raise ImpairmentError("phase noise PSD coefficients must be >= 0")
        if self.sample_period <= 0 or self.rx_bandwidth <= 0:
            raise ImpairmentError("sample_period and rx_bandwidth must be > 0")

    @property
    def var_white(self) -> float:
        """Per-sample variance of the white component: 2*K0*W_g."""
        return 2.0 * self.white_psd * self.rx_bandwidth

    @property
    def var_increment(self) -> float:
        """Variance of one Wiener increment: 4*K2*pi^2*T_s."""
        return 4.0 * self.wiener_psd * np.pi**2 * self.sample_period

    @staticmethod
    def from_db(value_db: float) -> float:
        """Convert a dB-valued PSD level (e.g. K0 = -130 dB) to linear."""
        return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class PhaseTrajectory:
    """Per-sample phase theta[k] and its Wiener component alone."""

    theta: np.ndarray
    theta_wiener: np.ndarray


@dataclass(frozen=True)
class QuantizedStream:
    """1-bit I/Q samples: sign(Re) + j*sign(Im), so |Re r| = |Im r| = 1."""

    r: np.ndarray


def generate_phase(params: PhaseNoiseParams, n: int, seed) -> PhaseTrajectory:
    """Draw an n-sample phase trajectory, deterministic per seed.

    Wiener increments are drawn first, then the white component, so the
    Wiener path is unchanged when the white level is altered under the
    same seed.
    """
    if n < 1:
        raise ImpairmentError("need at least one sample")
    rng = np.random.default_rng(seed)
    increments = rng.normal(0.0, np.sqrt(params.var_increment), n)
    wiener = params.init_phase + np.cumsum(increments)
    white = rng.normal(0.0, np.sqrt(params.var_white), n)
    return PhaseTrajectory(theta=wiener + white, theta_wiener=wiener)


def stapn(traj: PhaseTrajectory, cfg: FrameConfig, m: int) -> float:
    """Sampled time-averaged phase noise of block m: the arithmetic mean of
    theta over the block's samples.  This is the quantity block-based pilot
    estimators actually track."""
    start, stop = block_sample_range(cfg, m)
    if stop > len(traj.theta):
        raise ImpairmentError("phase trajectory shorter than the frame")
    return float(traj.theta[start:stop].mean())


def apply_channel(
    ref: ReferenceSignal,
    traj: PhaseTrajectory,
    noise_psd: float,
    rx_pulse: PulseShape,
    seed,
) -> np.ndarray:
    """Impaired receive stream y[k]: phase-rotate the pre-filter waveform,
    add white Gaussian noise of PSD ``noise_psd``, then receive-filter.

    The rotation happens before filtering; at the matched rectangular
    setting (single-tap filter) noise samples come out i.i.d. circularly
    symmetric with variance noise_psd / sample_period, while an RRC filter
    colours them by its tap autocorrelation.

    The unit-variance noise draw is independent of ``noise_psd``, so a
    fixed seed reuses one noise realization across SNR points.
    """
    if noise_psd < 0:
        raise ImpairmentError("noise_psd must be >= 0")
    n = len(ref.samples)
    if len(traj.theta) != n:
        raise ImpairmentError(
            f"phase trajectory has {len(traj.theta)} samples, signal has {n}"
        )
    if len(ref.prefilter) != n + 2 * ref.guard:
        raise ImpairmentError("reference signal guard does not match its prefilter")

    theta = np.pad(traj.theta, ref.guard, mode="edge") if ref.guard else traj.theta
    x = ref.prefilter * np.exp(1j * theta)
    if noise_psd > 0:
        rng = np.random.default_rng(seed)
        unit = rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x))
        x = x + unit * np.sqrt(noise_psd / ref.sample_period / 2.0)
    # same convolution path as the reference signal, so the zero-impairment
    # stream reproduces s[k] bit-exactly
    return ref.sample_period * np.convolve(x, receive_taps(rx_pulse), mode="valid")


def quantize_1bit(y: np.ndarray) -> QuantizedStream:
    """1-bit I/Q quantization, sign(0) := +1 for bit-exact reproducibility."""
    y = np.asarray(y)
    r = np.where(y.real >= 0, 1.0, -1.0) + 1j * np.where(y.imag >= 0, 1.0, -1.0)
    return QuantizedStream(r)
