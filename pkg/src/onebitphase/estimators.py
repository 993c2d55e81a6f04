"""Pilot-block phase estimators for 1-bit quantized observations.

Three data-aided estimators of the per-block phase: the closed-form LS
correlator, and two iterative refinements of it, expectation-maximization
and damped Fisher scoring.  The iterative updates are exact likelihood
manipulations for white noise and a constant block phase; they are applied
unchanged under phase noise and coloured noise, tracking the block-averaged
phase with different error floors.

All functions accept trailing-axis sample arrays, so a (blocks, L) batch
evaluates every pilot block of a frame in one vectorized call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import kappa1, ratio_exp_q

__all__ = [
    "ALGORITHMS",
    "DegenerateSumError",
    "EstimatorSettings",
    "FisherInfoParams",
    "PilotBlockView",
    "wrap_phase",
    "ls_estimate",
    "em_noise_expectation",
    "em_estimate",
    "score",
    "scoring_estimate",
    "fisher_info_inv",
    "estimate_blocks",
]

ALGORITHMS = ("ls", "em", "scoring")

# a final scoring step larger than this (rad) counts as non-converged
SCORING_STEP_TOL = 0.02

_TWO_SQRT_PI = 2.0 * np.sqrt(np.pi)
_SQRT_PI = np.sqrt(np.pi)


class DegenerateSumError(RuntimeError):
    """The LS correlation sum is exactly zero: the block is uninformative."""


@dataclass(frozen=True)
class EstimatorSettings:
    """Iteration budget for the refinement stage.

    ``iterations`` is a fixed count with no early stopping; 0 returns the
    initializer unchanged.  ``damping`` scales each scoring step and must
    lie in (0, 1]; it is ignored by EM.
    """

    algorithm: str
    iterations: int = 20
    damping: float = 0.05

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class FisherInfoParams:
    """Inputs of the constant-phase Fisher information bound."""

    noise_psd: float
    oversampling: int
    pilot_symbols: int
    symbol_energy: float = 1.0

    def __post_init__(self) -> None:
        if self.symbol_energy <= 0 or self.noise_psd <= 0:
            raise ValueError("symbol_energy and noise_psd must be > 0")
        if self.oversampling < 1 or self.pilot_symbols < 1:
            raise ValueError("oversampling and pilot_symbols must be >= 1")


@dataclass(frozen=True)
class PilotBlockView:
    """One pilot block as the estimators see it.

    r          quantized samples, sign(Re)+j*sign(Im)
    s          noise-free reference samples (IF rotation included)
    noise_var  sigma^2 = N0/T_s of the filtered noise
    """

    r: np.ndarray
    s: np.ndarray
    noise_var: float

    def __post_init__(self) -> None:
        if len(self.r) != len(self.s):
            raise ValueError("r and s must have equal length")
        if len(self.r) == 0:
            raise ValueError("empty pilot block")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")


def wrap_phase(x):
    """Wrap angles to (-pi, pi]."""
    w = np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return w if w.ndim else float(w)


def _require_noise(noise_var: float) -> float:
    if noise_var <= 0:
        raise ValueError("iterative refinement requires noise_var > 0")
    return float(np.sqrt(noise_var))


def _ls_angles(r: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = np.sum(np.conj(s) * r, axis=-1)
    degenerate = z == 0
    return np.angle(np.where(degenerate, 1.0, z)), degenerate


def ls_estimate(view: PilotBlockView) -> float:
    """arg of the reference-correlated block sum, in (-pi, pi]."""
    ang, degenerate = _ls_angles(view.r, view.s)
    if degenerate:
        raise DegenerateSumError("LS correlation sum is exactly zero")
    return float(ang)


def em_noise_expectation(r, s_rot, sigma: float):
    """Conditional mean of the additive noise given the observed signs.

    Component-wise truncated-Gaussian mean for noise of variance sigma^2
    (sigma^2/2 per component), with the reference already rotated by the
    current phase iterate.  Stable for |s_rot|/sigma well beyond 30.
    """
    r = np.asarray(r)
    s_rot = np.asarray(s_rot)
    scale = sigma / _TWO_SQRT_PI
    re = r.real * scale * ratio_exp_q(-r.real * s_rot.real / sigma)
    im = r.imag * scale * ratio_exp_q(-r.imag * s_rot.imag / sigma)
    return re + 1j * im


def _em_iterate(r, s, sigma: float, theta, iterations: int):
    theta = np.asarray(theta, dtype=float)
    for _ in range(iterations):
        s_rot = s * np.exp(1j * theta)[..., None]
        w = em_noise_expectation(r, s_rot, sigma)
        theta = np.angle(np.sum(np.conj(s) * (s_rot + w), axis=-1))
    return theta


def em_estimate(view: PilotBlockView, init: float, settings: EstimatorSettings) -> float:
    """Fixed-count EM refinement of an initial phase estimate."""
    if settings.algorithm != "em":
        raise ValueError("settings.algorithm must be 'em'")
    sigma = _require_noise(view.noise_var)
    out = _em_iterate(view.r, view.s, sigma, np.float64(init), settings.iterations)
    return float(wrap_phase(out))


def _score_value(r, s, sigma: float, theta):
    s_rot = s * np.exp(1j * np.asarray(theta, dtype=float))[..., None]
    term = -r.real * s_rot.imag * ratio_exp_q(-r.real * s_rot.real / sigma) + (
        r.imag * s_rot.real * ratio_exp_q(-r.imag * s_rot.imag / sigma)
    )
    return np.sum(term, axis=-1) / (sigma * _SQRT_PI)


def score(view: PilotBlockView, theta: float) -> float:
    """Derivative of the exact 1-bit log-likelihood at phase theta."""
    sigma = _require_noise(view.noise_var)
    return float(_score_value(view.r, view.s, sigma, np.float64(theta)))


def _scoring_iterate(r, s, sigma, theta, iterations, damping, fi_inv):
    theta = np.asarray(theta, dtype=float)
    step = np.zeros_like(theta)
    for _ in range(iterations):
        step = damping * fi_inv * _score_value(r, s, sigma, theta)
        theta = theta + step
    return theta, step


def scoring_estimate(
    view: PilotBlockView,
    init: float,
    settings: EstimatorSettings,
    fi_inv: float,
) -> float:
    """Damped Fisher scoring: theta <- theta + damping * fi_inv * score."""
    if settings.algorithm != "scoring":
        raise ValueError("settings.algorithm must be 'scoring'")
    sigma = _require_noise(view.noise_var)
    out, _ = _scoring_iterate(
        view.r, view.s, sigma, np.float64(init), settings.iterations,
        settings.damping, fi_inv,
    )
    return float(wrap_phase(out))


def fisher_info_inv(params: FisherInfoParams) -> float:
    """Inverse of the constant-phase Fisher information for one pilot block.

    The IF dither makes the information independent of the phase itself,
    so this single number serves as the modelled estimate-error variance
    of every pilot block.
    """
    snr = params.symbol_energy / params.noise_psd
    info = (1.0 / np.pi) * kappa1(snr / params.oversampling) * snr * params.pilot_symbols
    return 1.0 / float(info)


def estimate_blocks(
    r: np.ndarray,
    s: np.ndarray,
    noise_var: float,
    settings: EstimatorSettings,
    fi_inv: float | None = None,
) -> tuple[np.ndarray, dict[str, int]]:
    """Vectorized per-block estimation over a (blocks, L) sample batch.

    Every algorithm starts from the LS estimate of the same block; EM and
    scoring then run their fixed iteration count.  Returns wrapped phases
    plus diagnostics: blocks whose LS sum was exactly zero (substituted by
    0 rad) and scoring blocks whose final step exceeded SCORING_STEP_TOL.
    """
    theta, degenerate = _ls_angles(r, s)
    diags = {"degenerate_ls": int(np.count_nonzero(degenerate))}
    if settings.algorithm == "em":
        sigma = _require_noise(noise_var)
        theta = _em_iterate(r, s, sigma, theta, settings.iterations)
    elif settings.algorithm == "scoring":
        if fi_inv is None:
            raise ValueError("scoring refinement needs fi_inv")
        sigma = _require_noise(noise_var)
        theta, step = _scoring_iterate(
            r, s, sigma, theta, settings.iterations, settings.damping, fi_inv
        )
        diags["scoring_nonconverged"] = int(np.count_nonzero(np.abs(step) > SCORING_STEP_TOL))
    return wrap_phase(theta), diags
