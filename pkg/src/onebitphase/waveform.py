"""Pulse shaping and the oversampled, data-aided reference signal.

The reference signal s[k] is the receive-filtered, IF-rotated waveform the
channel would deliver with zero noise and zero phase noise.  It doubles as
the known template of the data-aided pilot estimators, so it is produced on
exactly the same sample grid as the received stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import SymbolFrame

__all__ = [
    "WaveformError",
    "PulseShape",
    "ReferenceSignal",
    "make_pulse",
    "modulate",
    "receive_taps",
]

PULSE_KINDS = ("rectangular", "rrc")


class WaveformError(ValueError):
    """Unsupported pulse parameters or frame/pulse mismatch."""


@dataclass(frozen=True)
class PulseShape:
    """Discrete pulse taps at spacing ``sample_period``, unit energy.

    Energy normalization keeps the per-symbol energy at E_s = 1 for
    unit-magnitude constellations: sample_period * sum(taps^2) == 1.
    """

    kind: str
    taps: np.ndarray
    symbol_period: float
    sample_period: float
    rolloff: float = 0.0
    span: int = 0

    @property
    def n_taps(self) -> int:
        return len(self.taps)

    @property
    def energy(self) -> float:
        return float(self.sample_period * np.sum(np.square(self.taps)))

    @property
    def dc_gain(self) -> float:
        return float(self.sample_period * np.sum(self.taps))

    @property
    def bandwidth(self) -> float:
        """Single-sided bandwidth in Hz."""
        if self.kind == "rrc":
            return (1.0 + self.rolloff) / (2.0 * self.symbol_period)
        # time-domain rectangle of width n_taps * sample_period
        return 1.0 / (2.0 * self.n_taps * self.sample_period)


@dataclass(frozen=True)
class ReferenceSignal:
    """Noise-free receive-filtered signal plus its pre-filter waveform.

    ``prefilter`` extends ``guard`` samples beyond each frame edge so the
    channel can rotate it by the phase trajectory and re-apply the receive
    filter without boundary transients; ``samples`` is the filtered result
    restricted to the frame grid.
    """

    samples: np.ndarray
    prefilter: np.ndarray
    guard: int
    sample_period: float
    if_freq: float


def _rrc_taps(t: np.ndarray, T: float, alpha: float) -> np.ndarray:
    if alpha == 0.0:
        return np.sinc(t / T) / np.sqrt(T)
    x = t / T
    taps = np.empty_like(x)
    at_zero = np.isclose(x, 0.0)
    at_pole = np.isclose(np.abs(x), 1.0 / (4.0 * alpha))
    regular = ~(at_zero | at_pole)
    xr = x[regular]
    num = np.sin(np.pi * xr * (1.0 - alpha)) + 4.0 * alpha * xr * np.cos(
        np.pi * xr * (1.0 + alpha)
    )
    den = np.pi * xr * (1.0 - np.square(4.0 * alpha * xr))
    taps[regular] = num / den
    taps[at_zero] = 1.0 - alpha + 4.0 * alpha / np.pi
    taps[at_pole] = (alpha / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * alpha))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * alpha))
    )
    return taps / np.sqrt(T)


def make_pulse(
    kind: str,
    symbol_period: float,
    sample_period: float,
    rolloff: float = 0.0,
    span: int = 16,
) -> PulseShape:
    """Build a unit-energy pulse sampled at ``sample_period``.

    ``rectangular`` spans one symbol period; ``rrc`` follows the standard
    root-raised-cosine closed form truncated to ``span`` symbol periods,
    with the removable singularities evaluated analytically.
    """
    if kind not in PULSE_KINDS:
        raise WaveformError(f"unsupported pulse kind {kind!r}")
    ratio = symbol_period / sample_period
    m = int(round(ratio))
    if abs(ratio - m) > 1e-9 or m < 1:
        raise WaveformError(
            f"symbol_period/sample_period must be a positive integer, got {ratio}"
        )
    if kind == "rectangular":
        taps = np.full(m, 1.0 / np.sqrt(symbol_period))
        span = 1
    else:
        if not 0.0 <= rolloff <= 1.0:
            raise WaveformError(f"rolloff must lie in [0, 1], got {rolloff}")
        if span < 4:
            raise WaveformError("rrc span must cover at least 4 symbol periods")
        half = (span * m) // 2
        t = (np.arange(-half, half + 1)) * sample_period
        taps = _rrc_taps(t, symbol_period, rolloff)
    taps = taps / np.sqrt(sample_period * np.sum(np.square(taps)))
    return PulseShape(kind, taps, symbol_period, sample_period, rolloff, span)


def receive_taps(pulse: PulseShape) -> np.ndarray:
    """Receive-filter taps rescaled to unit passband (DC) gain.

    With this scaling a matched rectangular filter is an exact passthrough
    at the sample grid and white input noise of power-spectral density N0
    keeps an in-band density of N0 behind an RRC filter.
    """
    return pulse.taps / (pulse.sample_period * np.sum(pulse.taps))


def modulate(
    frame: SymbolFrame,
    tx_pulse: PulseShape,
    rx_pulse: PulseShape,
    if_freq: float,
) -> ReferenceSignal:
    """Pulse-shape a frame and produce the reference signal s[k].

    Pilot symbols advance one base period, data symbols one FTN period; a
    single transmit pulse (designed for the base period) is used for both.
    The waveform is rotated by the intermediate frequency and convolved
    with the unit-DC-gain receive filter.  Rectangular pulses are aligned
    to the start of their symbol slot so blocks tile exactly; RRC pulses
    are centred on the symbol instant.
    """
    cfg = frame.config
    spp = frame.samples_per_symbol
    offsets = np.concatenate(([0], np.cumsum(spp[:-1])))
    n = cfg.total_samples
    if len(frame.symbols) and offsets[-1] + spp[-1] != n:
        raise WaveformError("frame symbols do not span the configured sample count")

    ts = rx_pulse.sample_period
    if abs(tx_pulse.sample_period - ts) > 1e-15:
        raise WaveformError("transmit and receive pulses use different sample grids")

    n_h = tx_pulse.n_taps
    shift = n_h // 2 if tx_pulse.kind == "rrc" else 0
    half_g = rx_pulse.n_taps // 2
    pad_left = shift + half_g
    pad_right = (n_h - 1 - shift) + half_g
    u = np.zeros(pad_left + n + pad_right, dtype=complex)
    pos = offsets + pad_left - shift
    np.add.at(
        u,
        pos[:, None] + np.arange(n_h)[None, :],
        frame.symbols[:, None] * tx_pulse.taps[None, :],
    )

    k = np.arange(len(u)) - pad_left  # frame-referenced sample index
    u *= np.exp(2j * np.pi * if_freq * ts * k)

    prefilter = u[pad_left - half_g : pad_left + n + half_g]
    samples = ts * np.convolve(prefilter, receive_taps(rx_pulse), mode="valid")
    return ReferenceSignal(samples, prefilter, half_g, ts, if_freq)
