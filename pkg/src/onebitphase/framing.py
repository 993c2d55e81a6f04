"""Pilot/data frame construction and block index arithmetic.

The transmit stream is a sequence of equal-duration blocks: pilot blocks of
known QPSK symbols at the base symbol rate 1/T, separated by gaps of
run-length-limited (RLL) data symbols signalled at ``ftn_factor`` times the
base rate.  Every block spans ``pilot_symbols * oversampling`` receive
samples, so block-to-sample index arithmetic is uniform across pilot and
data blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QPSK_ALPHABET",
    "FramingError",
    "FrameConfig",
    "SymbolFrame",
    "generate_rll_stream",
    "build_frame",
    "block_sample_range",
]

QPSK_ALPHABET = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


class FramingError(ValueError):
    """Inconsistent frame geometry or unsatisfiable run-length constraint."""


@dataclass(frozen=True)
class FrameConfig:
    """Geometry of one transmit frame.

    Parameters
    ----------
    pilot_symbols:
        Known QPSK symbols per pilot block, sent at the base rate 1/T.
    data_symbols:
        Data symbols in each gap between consecutive pilot blocks, sent at
        ``ftn_factor`` times the base rate.  Must split into whole data
        blocks of ``ftn_factor * pilot_symbols`` symbols.
    ftn_factor:
        Faster-than-Nyquist signalling factor of the data symbols (>= 1).
    oversampling:
        Receive samples per base symbol period T.  Must be a multiple of
        ``ftn_factor`` so every data symbol spans an integer sample count.
    num_pilot_blocks:
        Pilot blocks per frame (>= 2); frames start and end with one.
    k_max:
        Longest admissible zero run of the underlying (d, k) constraint;
        data sign runs last at most ``k_max + 1`` symbols.  Not pinned by
        the estimation problem, exposed for completeness.
    """

    pilot_symbols: int
    data_symbols: int
    ftn_factor: int = 1
    oversampling: int = 1
    num_pilot_blocks: int = 2
    k_max: int = 7

    def __post_init__(self) -> None:
        if self.pilot_symbols < 1:
            raise FramingError("pilot_symbols must be >= 1")
        if self.data_symbols < 0:
            raise FramingError("data_symbols must be >= 0")
        if self.ftn_factor < 1:
            raise FramingError("ftn_factor must be >= 1")
        if self.num_pilot_blocks < 2:
            raise FramingError(
                "num_pilot_blocks must be >= 2: a frame starts and ends with a pilot block"
            )
        if self.oversampling < self.ftn_factor:
            raise FramingError(
                "oversampling must be >= ftn_factor to resolve the data zero crossings"
            )
        if self.oversampling % self.ftn_factor:
            raise FramingError(
                "oversampling must be a multiple of ftn_factor "
                "(integer receive samples per data symbol)"
            )
        per_block = self.ftn_factor * self.pilot_symbols
        if self.data_symbols % per_block:
            raise FramingError(
                f"data_symbols={self.data_symbols} must be divisible by "
                f"ftn_factor*pilot_symbols={per_block} so each gap splits into an "
                "integer number of data blocks"
            )
        if self.rll_d >= self.k_max:
            raise FramingError(
                f"run-length constraint needs k_max > d, got d={self.rll_d}, "
                f"k_max={self.k_max}"
            )

    # -- run-length constraint of the data streams ------------------------
    @property
    def rll_d(self) -> int:
        """Minimum-zeros parameter d of the data (d, k) constraint."""
        return self.ftn_factor - 1

    # -- derived geometry --------------------------------------------------
    @property
    def blocks_per_gap(self) -> int:
        """Data blocks between two consecutive pilot blocks."""
        return self.data_symbols // (self.ftn_factor * self.pilot_symbols)

    @property
    def block_len(self) -> int:
        """Receive samples per block (pilot and data blocks alike)."""
        return self.pilot_symbols * self.oversampling

    @property
    def total_blocks(self) -> int:
        return self.num_pilot_blocks + (self.num_pilot_blocks - 1) * self.blocks_per_gap

    @property
    def data_samples_per_gap(self) -> int:
        return self.data_symbols * self.oversampling // self.ftn_factor

    @property
    def total_samples(self) -> int:
        # equals K*P*oversampling + (K-1)*data_symbols whenever the data
        # symbol rate matches the sample rate (the evaluated configurations)
        return self.total_blocks * self.block_len

    def is_pilot_block(self, m: int) -> bool:
        return m % (self.blocks_per_gap + 1) == 0

    def pilot_block_indices(self) -> np.ndarray:
        return np.arange(self.num_pilot_blocks) * (self.blocks_per_gap + 1)

    def pilot_block_mask(self) -> np.ndarray:
        """Boolean per block, True at pilot blocks."""
        return np.arange(self.total_blocks) % (self.blocks_per_gap + 1) == 0


@dataclass(frozen=True)
class SymbolFrame:
    """One frame of unit-magnitude QPSK symbols with pilot bookkeeping."""

    symbols: np.ndarray
    pilot_mask: np.ndarray
    samples_per_symbol: np.ndarray
    config: FrameConfig

    @property
    def symbol_periods(self) -> np.ndarray:
        """Per-symbol signalling period in units of the base period T."""
        return np.where(self.pilot_mask, 1.0, 1.0 / self.config.ftn_factor)


def _fit_runs(runs: list[int], length: int, lo: int, hi: int) -> list[int]:
    """Trim a sampled run-length sequence so it sums to exactly `length`
    while keeping every run inside [lo, hi]."""
    n_min = -(-length // hi)
    n_max = length // lo
    if n_min > n_max:
        raise FramingError(
            f"length={length} cannot be tiled by runs of {lo}..{hi} symbols"
        )
    n = min(max(len(runs), n_min), n_max)
    runs = list(runs[:n]) + [lo] * (n - len(runs))
    diff = length - sum(runs)
    i = 0
    while diff:
        step = min(hi - runs[i], diff) if diff > 0 else max(lo - runs[i], diff)
        runs[i] += step
        diff -= step
        i += 1
    return runs


def generate_rll_stream(d: int, k_max: int, length: int, seed) -> np.ndarray:
    """Antipodal +/-1 sequence whose sign runs last between d+1 and k_max+1 symbols.

    Equivalent to NRZI coding of a random (d, k)-constrained binary sequence:
    after the d+1 forced repeats each further symbol extends the current run
    with probability 1/2 until k_max+1 symbols force a sign change.
    Deterministic for a fixed seed.
    """
    if not 0 <= d < k_max:
        raise FramingError(f"need 0 <= d < k_max, got d={d}, k_max={k_max}")
    lo, hi = d + 1, k_max + 1
    if length < lo:
        raise FramingError(f"length={length} is shorter than the minimum run {lo}")
    rng = np.random.default_rng(seed)
    first = 1 if rng.random() < 0.5 else -1
    runs: list[int] = []
    total = 0
    while total < length:
        draw = rng.geometric(0.5, size=max(8, (length - total) // lo + 1))
        batch = lo + np.minimum(draw - 1, hi - lo)
        runs.extend(int(v) for v in batch)
        total += int(batch.sum())
    runs = _fit_runs(runs, length, lo, hi)
    signs = first * (-1) ** np.arange(len(runs))
    return np.repeat(signs, runs).astype(np.int8)


def build_frame(cfg: FrameConfig, pilot_seed, data_seed) -> SymbolFrame:
    """Assemble pilot blocks and RLL data gaps into one symbol frame.

    Pilot symbols are uniform random QPSK reproducible from ``pilot_seed``
    alone.  Data symbols combine two independent RLL streams (real and
    imaginary signs) with d = ftn_factor - 1, scaled by 1/sqrt(2).
    """
    pilot_rng = np.random.default_rng(pilot_seed)
    pilots = QPSK_ALPHABET[
        pilot_rng.integers(0, 4, size=(cfg.num_pilot_blocks, cfg.pilot_symbols))
    ]
    n_gaps = cfg.num_pilot_blocks - 1
    data_rng = np.random.default_rng(data_seed)

    def gap_symbols() -> np.ndarray:
        if cfg.data_symbols == 0:
            return np.empty(0, dtype=complex)
        # one RLL burst per gap and quadrature, so the run bounds hold
        # within each gap without straddling pilot blocks
        re = generate_rll_stream(cfg.rll_d, cfg.k_max, cfg.data_symbols, data_rng)
        im = generate_rll_stream(cfg.rll_d, cfg.k_max, cfg.data_symbols, data_rng)
        return (re + 1j * im) / np.sqrt(2.0)

    parts: list[np.ndarray] = []
    mask: list[np.ndarray] = []
    for i in range(cfg.num_pilot_blocks):
        parts.append(pilots[i])
        mask.append(np.ones(cfg.pilot_symbols, dtype=bool))
        if i < n_gaps:
            parts.append(gap_symbols())
            mask.append(np.zeros(cfg.data_symbols, dtype=bool))
    symbols = np.concatenate(parts)
    pilot_mask = np.concatenate(mask)
    spp = np.where(pilot_mask, cfg.oversampling, cfg.oversampling // cfg.ftn_factor)
    return SymbolFrame(symbols, pilot_mask, spp, cfg)


def block_sample_range(cfg: FrameConfig, m: int) -> tuple[int, int]:
    """Half-open sample interval [start, stop) covered by block m."""
    if not 0 <= m < cfg.total_blocks:
        raise FramingError(
            f"block index {m} out of range for {cfg.total_blocks} blocks"
        )
    return m * cfg.block_len, (m + 1) * cfg.block_len
