"""Kalman filtering and RTS smoothing of pilot-block phase estimates.

The block-averaged phase walks like a Wiener process from block to block,
is observed only at pilot blocks (with the inverse Fisher information as
the modelled observation noise), and is interpolated to the data blocks by
a scalar Kalman filter, optionally followed by a backward
Rauch-Tung-Striebel sweep that conditions every block on all observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import FisherInfoParams, fisher_info_inv
from .framing import FrameConfig
from .impairments import PhaseNoiseParams

__all__ = [
    "StapnModel",
    "BlockObservationSeq",
    "TrackOutput",
    "build_model",
    "kalman_forward",
    "rts_smooth",
]

DIFFUSE_PRIOR_VAR = 1e4  # rad^2


@dataclass(frozen=True)
class StapnModel:
    """Random-walk state model of the block-averaged phase.

    process_var  q, rad^2 added per block step
    obs_var      modelled pilot-estimate error variance, rad^2
    prior_mean   state mean at block 0 (conventionally the first estimate)
    prior_var    state variance at block 0; diffuse by default
    """

    process_var: float
    obs_var: float
    prior_mean: float = 0.0
    prior_var: float = DIFFUSE_PRIOR_VAR

    def __post_init__(self) -> None:
        if self.process_var < 0:
            raise ValueError("process_var must be >= 0")
        if self.obs_var <= 0 or self.prior_var <= 0:
            raise ValueError("obs_var and prior_var must be > 0")


@dataclass(frozen=True)
class BlockObservationSeq:
    """Per-block optional observations: values where observed, else ignored."""

    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != len(self.observed):
            raise ValueError("values and observed must have equal length")
        if len(self.values) == 0 or not np.any(self.observed):
            raise ValueError("need at least one observed block")

    @classmethod
    def from_pilot_estimates(
        cls, cfg: FrameConfig, estimates: np.ndarray
    ) -> "BlockObservationSeq":
        """Place one estimate per pilot block, data blocks unobserved."""
        estimates = np.asarray(estimates, dtype=float)
        if len(estimates) != cfg.num_pilot_blocks:
            raise ValueError(
                f"expected {cfg.num_pilot_blocks} pilot estimates, "
                f"got {len(estimates)}"
            )
        values = np.zeros(cfg.total_blocks)
        observed = cfg.pilot_block_mask()
        values[observed] = estimates
        return cls(values, observed)


@dataclass(frozen=True)
class TrackOutput:
    """Per-block posterior mean and variance of one filtering/smoothing pass."""

    mean: np.ndarray
    variance: np.ndarray


def build_model(
    cfg: FrameConfig,
    pn: PhaseNoiseParams,
    fi: FisherInfoParams,
    prior_mean: float = 0.0,
    obs_var: float | None = None,
) -> StapnModel:
    """Model parameters from the frame geometry and noise statistics.

    The per-step process variance is (2/3) * block_len * var_increment,
    the innovation variance of consecutive block averages of a Wiener
    process.  The observation variance defaults to the inverse Fisher
    information, shared by all three estimators; pass ``obs_var`` to
    override it.
    """
    q = (2.0 / 3.0) * cfg.block_len * pn.var_increment
    r = fisher_info_inv(fi) if obs_var is None else obs_var
    return StapnModel(process_var=q, obs_var=r, prior_mean=prior_mean)


def kalman_forward(obs: BlockObservationSeq, model: StapnModel) -> TrackOutput:
    """Forward filtered means/variances for every block.

    Prediction adds the process variance each block step; the update runs
    only where an observation exists.
    """
    n = len(obs.values)
    mean = np.empty(n)
    var = np.empty(n)
    m = model.prior_mean
    p = model.prior_var
    for i in range(n):
        if i:
            p = p + model.process_var
        if obs.observed[i]:
            gain = p / (p + model.obs_var)
            m = m + gain * (obs.values[i] - m)
            p = (1.0 - gain) * p
        mean[i] = m
        var[i] = p
    return TrackOutput(mean, var)


def rts_smooth(filtered: TrackOutput, model: StapnModel) -> TrackOutput:
    """Backward smoothing sweep; every block conditions on all observations.

    The last block is the recursion base case (smoothed == filtered).
    """
    mf = filtered.mean
    pf = filtered.variance
    ms = mf.copy()
    ps = pf.copy()
    for i in range(len(mf) - 2, -1, -1):
        p_pred = pf[i] + model.process_var
        if p_pred == 0.0:
            continue  # deterministic state: smoothed equals filtered
        c = pf[i] / p_pred
        ms[i] = mf[i] + c * (ms[i + 1] - mf[i])
        ps[i] = pf[i] + c * c * (ps[i + 1] - p_pred)
    return TrackOutput(ms, ps)
