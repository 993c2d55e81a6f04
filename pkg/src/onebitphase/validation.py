"""Self-contained oracle checks, independent of the code paths they verify.

Each check recomputes its expected answer by a different route than the
library implementation: brute-force run scanning for RLL streams, finite
differences of the exact log-likelihood for the score, batch joint-Gaussian
conditioning for the filter/smoother, and closed-form sample statistics for
the noise generators.  The CLI ``validate`` subcommand runs them all; the
test suite reuses the same oracles at larger sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from . import estimators, framing, impairments, specfun, tracking

__all__ = [
    "CheckResult",
    "run_lengths",
    "check_rll_runs",
    "one_bit_log_likelihood",
    "check_score_gradient",
    "batch_gaussian_track",
    "check_smoother_batch",
    "check_wiener_increments",
    "check_stapn_increments",
    "check_special_functions",
    "check_quantizer_invariance",
    "run_all",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_lengths(seq: np.ndarray) -> np.ndarray:
    """Lengths of the maximal runs of identical values, by boundary scan."""
    seq = np.asarray(seq)
    if len(seq) == 0:
        return np.array([], dtype=int)
    change = np.flatnonzero(seq[1:] != seq[:-1])
    edges = np.concatenate(([-1], change, [len(seq) - 1]))
    return np.diff(edges)


def check_rll_runs(n_symbols: int = 100_000, seed: int = 0) -> CheckResult:
    """Generated streams respect the run bounds [d+1, k_max+1] exactly."""
    bad = []
    for d in (0, 2, 4):
        k_max = max(7, d + 3)
        seq = framing.generate_rll_stream(d, k_max, n_symbols, seed + d)
        runs = run_lengths(seq)
        if runs.min() < d + 1 or runs.max() > k_max + 1:
            bad.append((d, int(runs.min()), int(runs.max())))
    return CheckResult(
        "rll_run_bounds",
        not bad,
        f"violations: {bad}" if bad else f"{n_symbols} symbols clean for d in (0, 2, 4)",
    )


_LD = np.longdouble
_DEEP_TAIL = -20.0


def _log_ndtr_extended(t: np.ndarray) -> np.ndarray:
    """log Phi(t) in extended precision.

    Below t = -20 the asymptotic tail expansion is evaluated in long double;
    log-likelihoods there reach magnitudes of 1e5..1e6, and the central
    finite-difference oracle needs their sub-1e-10 absolute accuracy, which
    plain double storage cannot carry.
    """
    t = np.asarray(t, dtype=_LD)
    out = np.empty(t.shape, dtype=_LD)
    deep = t < _DEEP_TAIL
    out[~deep] = log_ndtr(t[~deep].astype(float))
    if np.any(deep):
        x = -t[deep]
        inv2 = 1.0 / (x * x)
        series = inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)))
        out[deep] = -0.5 * x * x - np.log(x * np.sqrt(2.0 * np.pi).astype(_LD)) + np.log1p(series)
    return out


def one_bit_log_likelihood(r: np.ndarray, s: np.ndarray, noise_var: float, theta) -> np.ndarray:
    """Exact log p(r | theta) of the 1-bit observation model.

    Each I/Q sign contributes log Phi of its standardized decision margin.
    The rotation and margins are computed in long double so the result can
    serve as a finite-difference oracle; it shares no code with score().
    """
    sigma = _LD(np.sqrt(noise_var))
    th = np.asarray(theta, dtype=_LD)[..., None]
    c, sn = np.cos(th), np.sin(th)
    re_rot = s.real.astype(_LD) * c - s.imag.astype(_LD) * sn
    im_rot = s.real.astype(_LD) * sn + s.imag.astype(_LD) * c
    root2 = np.sqrt(_LD(2.0))
    t_re = root2 * r.real.astype(_LD) * re_rot / sigma
    t_im = root2 * r.imag.astype(_LD) * im_rot / sigma
    total = np.sum(_log_ndtr_extended(t_re) + _log_ndtr_extended(t_im), axis=-1)
    return total


def check_score_gradient(
    n_cases: int = 200, seed: int = 1, rel_tol: float = 1e-4, step: float = 1e-6
) -> CheckResult:
    """score() equals the central finite difference of the log-likelihood."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        length = int(rng.integers(4, 40))
        sigma = float(10.0 ** rng.uniform(-3, 1))
        s = framing.QPSK_ALPHABET[rng.integers(0, 4, length)] * np.exp(
            1j * rng.uniform(0, 2 * np.pi, length)
        )
        y = s + (rng.standard_normal(length) + 1j * rng.standard_normal(length)) * sigma
        r = impairments.quantize_1bit(y).r
        theta = float(rng.uniform(-np.pi, np.pi))
        view = estimators.PilotBlockView(r, s, sigma**2)
        got = estimators.score(view, theta)
        fd = (
            one_bit_log_likelihood(r, s, sigma**2, theta + step)
            - one_bit_log_likelihood(r, s, sigma**2, theta - step)
        ) / (2 * step)
        denom = max(abs(fd), 1e-9)
        worst = max(worst, abs(got - fd) / denom)
    return CheckResult(
        "score_is_loglik_gradient", worst < rel_tol, f"worst relative error {worst:.2e}"
    )


def batch_gaussian_track(
    obs: tracking.BlockObservationSeq, model: tracking.StapnModel
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Filtered and smoothed moments by direct joint-Gaussian conditioning.

    Builds the full state covariance of the random walk, conditions block m
    on observations up to m (filtered) and on all observations (smoothed).
    O(B^4) and only meant as an oracle for small B.
    """
    B = len(obs.values)
    idx = np.flatnonzero(obs.observed)
    grid = np.arange(B)
    cov = model.prior_var + model.process_var * np.minimum.outer(grid, grid)
    f_mean = np.empty(B)
    f_var = np.empty(B)
    for m in range(B):
        vis = idx[idx <= m]
        f_mean[m], f_var[m] = _condition(cov, obs.values, model, m, vis)
    s_mean = np.empty(B)
    s_var = np.empty(B)
    for m in range(B):
        s_mean[m], s_var[m] = _condition(cov, obs.values, model, m, idx)
    return f_mean, f_var, s_mean, s_var


def _condition(cov, values, model, m, vis):
    if len(vis) == 0:
        return model.prior_mean, cov[m, m]
    czz = cov[np.ix_(vis, vis)] + model.obs_var * np.eye(len(vis))
    cxz = cov[m, vis]
    w = np.linalg.solve(czz, values[vis] - model.prior_mean)
    gain = np.linalg.solve(czz, cxz)
    return model.prior_mean + cxz @ w, cov[m, m] - cxz @ gain


def check_smoother_batch(
    n_cases: int = 50, seed: int = 2, tol: float = 1e-10
) -> CheckResult:
    """Kalman/RTS recursions match batch conditioning to absolute tol."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        B = int(rng.integers(1, 13))
        observed = rng.random(B) < 0.6
        if not observed.any():
            observed[int(rng.integers(0, B))] = True
        values = np.where(observed, rng.normal(0, 1, B), 0.0)
        # moderate priors keep the batch oracle itself well conditioned;
        # with a 1e4-diffuse prior the direct solve loses ~1e-8 absolute
        # to cancellation while the recursions do not
        model = tracking.StapnModel(
            process_var=float(10.0 ** rng.uniform(-4, 0)),
            obs_var=float(10.0 ** rng.uniform(-4, 0)),
            prior_mean=float(rng.normal()),
            prior_var=float(10.0 ** rng.uniform(-1, 2)),
        )
        obs = tracking.BlockObservationSeq(values, observed)
        filt = tracking.kalman_forward(obs, model)
        smoothed = tracking.rts_smooth(filt, model)
        fm, fv, sm, sv = batch_gaussian_track(obs, model)
        worst = max(
            worst,
            np.max(np.abs(filt.mean - fm)),
            np.max(np.abs(filt.variance - fv)),
            np.max(np.abs(smoothed.mean - sm)),
            np.max(np.abs(smoothed.variance - sv)),
        )
    return CheckResult(
        "smoother_matches_batch_conditioning", worst < tol, f"worst |diff| {worst:.2e}"
    )


def _chi2_band(sample_var: float, true_var: float, n: int) -> tuple[bool, str]:
    # sample variance of n Gaussians: relative 3 sigma band ~ 3*sqrt(2/n)
    rel = 3.0 * np.sqrt(2.0 / n)
    ok = abs(sample_var / true_var - 1.0) < rel
    return ok, f"ratio {sample_var / true_var:.4f}, band 1 +/- {rel:.4f}"


def check_wiener_increments(n: int = 1_000_000, seed: int = 3) -> CheckResult:
    """Sample variance of the Wiener increments sits in the 3 sigma band."""
    params = impairments.PhaseNoiseParams(
        white_psd=0.0, wiener_psd=800.0, sample_period=1e-9, rx_bandwidth=5e8
    )
    traj = impairments.generate_phase(params, n, seed)
    inc = np.diff(np.concatenate(([params.init_phase], traj.theta_wiener)))
    ok, detail = _chi2_band(float(np.var(inc)), params.var_increment, n)
    return CheckResult("wiener_increment_variance", ok, detail)


def check_stapn_increments(
    n_pairs: int = 20_000, block_len: int = 60, seed: int = 4
) -> CheckResult:
    """Var of consecutive block-average increments is (2/3) L var_inc (white
    component off)."""
    params = impairments.PhaseNoiseParams(
        white_psd=0.0, wiener_psd=800.0, sample_period=1e-9, rx_bandwidth=5e8
    )
    traj = impairments.generate_phase(params, (n_pairs + 1) * block_len, seed)
    means = traj.theta.reshape(-1, block_len).mean(axis=1)
    deltas = np.diff(means)
    true_var = (2.0 / 3.0) * block_len * params.var_increment
    # exact innovation variance is (2 L^2 + 1) / (3 L) * var_inc; the model
    # uses the large-L limit, so allow the O(1/L^2) gap plus sampling noise
    exact = (2 * block_len**2 + 1) / (3 * block_len) * params.var_increment
    rel = 3.0 * np.sqrt(2.0 / n_pairs) + abs(exact / true_var - 1.0)
    ratio = float(np.var(deltas)) / true_var
    return CheckResult(
        "stapn_increment_variance",
        abs(ratio - 1.0) < rel,
        f"ratio {ratio:.4f}, band 1 +/- {rel:.4f}",
    )


def check_special_functions() -> CheckResult:
    """Internal identities of the stable special functions."""
    problems = []
    if specfun.kappa1(0.0) != specfun.KAPPA1_C1:
        problems.append("kappa1(0) != c1")
    a = np.linspace(-5, 5, 201)
    direct = np.exp(-(a**2)) / specfun.gaussian_q(a * np.sqrt(2.0))
    fused = specfun.ratio_exp_q(a)
    if np.max(np.abs(fused / direct - 1.0)) > 1e-12:
        problems.append("ratio_exp_q mismatch against direct evaluation")
    big = np.array([50.0, 100.0, 300.0])
    asym = 2.0 * big * np.sqrt(np.pi) / (1.0 - 0.5 / big**2 + 0.75 / big**4)
    if np.max(np.abs(specfun.ratio_exp_q(big) / asym - 1.0)) > 1e-3:
        problems.append("ratio_exp_q asymptote mismatch")
    if not np.all(np.isfinite(specfun.ratio_exp_q(np.array([-1e3, -30.0, 30.0, 1e3])))):
        problems.append("ratio_exp_q not finite at extremes")
    return CheckResult(
        "special_function_identities", not problems, "; ".join(problems) or "all identities hold"
    )


def check_quantizer_invariance(seed: int = 5) -> CheckResult:
    """Quantizer output ignores positive per-sample scaling."""
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    scale = 10.0 ** rng.uniform(-12, 12, 4096)
    base = impairments.quantize_1bit(y).r
    scaled = impairments.quantize_1bit(y * scale).r
    ok = np.array_equal(base, scaled)
    return CheckResult("quantizer_scale_invariance", ok, "sign pattern unchanged" if ok else "mismatch")


def run_all(quick: bool = False) -> list[CheckResult]:
    """Run every oracle check; `quick` shrinks the Monte Carlo sizes."""
    n_rll = 20_000 if quick else 100_000
    n_score = 50 if quick else 200
    n_batch = 20 if quick else 50
    n_wiener = 200_000 if quick else 1_000_000
    n_pairs = 5_000 if quick else 20_000
    return [
        check_rll_runs(n_rll),
        check_score_gradient(n_score),
        check_smoother_batch(n_batch),
        check_wiener_increments(n_wiener),
        check_stapn_increments(n_pairs),
        check_special_functions(),
        check_quantizer_invariance(),
    ]
