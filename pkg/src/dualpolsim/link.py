"""Zero-forcing link evaluation: SINR, throughput, and Monte Carlo CDFs.

The receiver is an open-loop zero-forcing inverse of the 2x2 effective
channel with unit transmit power per stream; per-stream SINR is the
reciprocal of the noise power amplified by the corresponding inverse
row. Throughput maps SINR through truncated per-stream Shannon capacity
capped at the maximum supported spectral efficiency.

Four effective-channel constructions are selectable per trial batch:

* ``i``   physical dual-polarization channel (copolar plus cross-polar),
* ``ii``  correlated channel with the XPD-implied transmit correlation,
* ``iii`` omnidirectional tapped-delay channel spatially correlated at
          the XPD-equivalent antenna spacing,
* ``iv``  correlated channel with the XPD-implied correlation on
          omnidirectional gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import chanmodel, correlation
from .chanmodel import FadingDraw, PropagationGains, draw_fading_batch
from .correlation import AodDistribution, SpacingQuery

__all__ = [
    "MODELS",
    "LinkParams",
    "LinkResult",
    "UserChannel",
    "RankDeficientError",
    "zf_weights",
    "sinr",
    "throughput",
    "evaluate_user",
    "cdf",
]

MODELS = ("i", "ii", "iii", "iv")

#: Condition-number guard separating numerical singularity from low-rank physics.
MAX_CONDITION = 1e12


class RankDeficientError(np.linalg.LinAlgError):
    """Raised when the effective channel cannot support two streams."""


@dataclass(frozen=True)
class LinkParams:
    """LTE-style system constants.

    Defaults: 8.4 MHz effective bandwidth, 25.22 percent overhead,
    5 bit/s/Hz per-stream cap (64-QAM at rate 5/6) and -174 dBm/Hz
    noise density.
    """

    effective_bandwidth: float = 8.4e6
    overhead_fraction: float = 0.2522
    max_spectral_efficiency: float = 5.0
    noise_density_dbm_hz: float = -174.0

    def __post_init__(self) -> None:
        if not self.effective_bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not 0.0 <= self.overhead_fraction < 1.0:
            raise ValueError("overhead fraction must lie in [0, 1)")
        if not self.max_spectral_efficiency > 0:
            raise ValueError("max spectral efficiency must be positive")

    def noise_power(self) -> float:
        """Noise power in mW over the effective bandwidth."""
        return 10.0 ** (self.noise_density_dbm_hz / 10.0) * self.effective_bandwidth

    def max_throughput(self) -> float:
        """Hard cap: both streams at maximum spectral efficiency."""
        return (
            self.effective_bandwidth
            * (1.0 - self.overhead_fraction)
            * 2.0
            * self.max_spectral_efficiency
        )


@dataclass(frozen=True, eq=False)
class LinkResult:
    """Per-trial outcome: linear per-stream SINRs and mapped throughput."""

    sinr: np.ndarray
    throughput: float
    model_tag: str


@dataclass(frozen=True, eq=False)
class UserChannel:
    """Everything one user contributes to a link evaluation.

    ``gains`` drive the physical model; ``xpd`` the correlation-based
    models; ``omni_gain`` is the per-port gain of the two-omni-antenna
    reference; ``aod`` and ``tap_powers`` feed the spatially correlated
    tapped-delay model.
    """

    gains: PropagationGains
    xpd: tuple[float, float]
    omni_gain: float
    aod: AodDistribution
    tap_powers: tuple[float, ...] = (1.0,)
    wavelength: float = 1.0

    def __post_init__(self) -> None:
        if not all(x > 0 for x in self.xpd):
            raise ValueError("per-port XPD must be positive (linear)")
        if not self.omni_gain > 0:
            raise ValueError("omni gain must be positive")
        if len(self.tap_powers) == 0 or min(self.tap_powers) < 0 or sum(self.tap_powers) <= 0:
            raise ValueError("tap powers must be nonnegative with a positive sum")


def zf_weights(h_eff: np.ndarray, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """Zero-forcing receive filter W, defined through W.T @ H = I.

    Raises
    ------
    RankDeficientError
        If the channel's condition number reaches ``max_condition``
        (the zero-XPD, fully correlated case lands here by design).
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    if h_eff.shape != (2, 2):
        raise ValueError("effective channel must be 2x2")
    s = np.linalg.svd(h_eff, compute_uv=False)
    if not np.all(np.isfinite(s)) or s[-1] <= s[0] / max_condition:
        raise RankDeficientError(
            f"effective channel is rank deficient (singular values {s})"
        )
    return np.linalg.inv(h_eff).T


def sinr(weights: np.ndarray, params: LinkParams) -> np.ndarray:
    """Per-stream linear SINR of a zero-forcing filter.

    Stream i sees 1 / (||w_i||^2 * p_n) with w_i the i-th column of W
    and p_n the noise power over the effective bandwidth; transmit
    power is 1 per stream, with path loss carried by the channel.
    """
    weights = np.asarray(weights, dtype=complex)
    noise = params.noise_power()
    col_energy = np.sum(np.abs(weights) ** 2, axis=0)
    return 1.0 / (col_energy * noise)


def throughput(sinrs: np.ndarray, params: LinkParams) -> float:
    """Truncated-capacity throughput in bit/s over all streams."""
    sinrs = np.asarray(sinrs, dtype=float)
    if np.any(sinrs < 0):
        raise ValueError("SINR values must be >= 0")
    se = np.minimum(np.log2(1.0 + sinrs), params.max_spectral_efficiency)
    return float(
        params.effective_bandwidth * (1.0 - params.overhead_fraction) * se.sum()
    )


def _effective_batch(
    user: UserChannel, model: str, rng: np.random.Generator, n_trials: int
) -> np.ndarray:
    """Stack of effective channels for one model, shape (n_trials, 2, 2)."""
    if model == "i":
        fading = draw_fading_batch(rng, n_trials)
        return chanmodel.build_effective(user.gains, fading).effective
    if model == "ii":
        fading = draw_fading_batch(rng, n_trials)
        corr = correlation.dualpole_corr_exact(*user.xpd)
        return chanmodel.kronecker_effective(fading, user.gains.alpha, corr).effective
    omni_alpha = np.array([user.omni_gain, user.omni_gain])
    if model == "iv":
        fading = draw_fading_batch(rng, n_trials)
        corr = correlation.dualpole_corr_exact(*user.xpd)
        return chanmodel.kronecker_effective(fading, omni_alpha, corr).effective
    if model == "iii":
        target = abs(correlation.dualpole_corr_exact(*user.xpd).coefficient)
        spacing = correlation.equivalent_spacing(
            SpacingQuery(target_rho=target, distribution=user.aod,
                         wavelength=user.wavelength)
        )
        corr = correlation.spatial_corr_matrix(spacing, user.aod, user.wavelength)
        taps = [
            (p, draw_fading_batch(rng, n_trials), corr) for p in user.tap_powers
        ]
        return chanmodel.multitap_effective(taps, omni_alpha).effective
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def evaluate_user(
    user: UserChannel,
    model: str,
    rng: np.random.Generator,
    n_trials: int,
    params: LinkParams | None = None,
) -> list[LinkResult]:
    """Run ``n_trials`` independent realizations of one model for one user.

    Each realization goes through zero forcing, SINR and the throughput
    map. Rank-deficient realizations are kept as zero-throughput
    samples rather than aborting the run; at 0 dB XPD every sample is
    one, which is the intended degenerate physics.

    A fixed generator state yields a bit-identical sample list.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    params = params or LinkParams()
    h = _effective_batch(user, model, rng, n_trials)

    s = np.linalg.svd(h, compute_uv=False)
    good = np.isfinite(s).all(axis=-1) & (s[:, -1] > s[:, 0] / MAX_CONDITION)

    sinr_all = np.zeros((n_trials, 2))
    if np.any(good):
        inv = np.linalg.inv(h[good])
        # W = inv(H).T, so ||w_i||^2 is the energy of row i of inv(H)
        row_energy = np.sum(np.abs(inv) ** 2, axis=-1)
        sinr_all[good] = 1.0 / (row_energy * params.noise_power())

    bw_term = params.effective_bandwidth * (1.0 - params.overhead_fraction)
    se = np.minimum(np.log2(1.0 + sinr_all), params.max_spectral_efficiency)
    tp = bw_term * se.sum(axis=-1)
    tp[~good] = 0.0

    return [
        LinkResult(sinr=sinr_all[k], throughput=float(tp[k]), model_tag=model)
        for k in range(n_trials)
    ]


def cdf(samples) -> list[tuple[float, float]]:
    """Empirical CDF of throughput samples.

    Returns ascending (value, cumulative probability) pairs with
    probabilities i/N, ending exactly at 1.
    """
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise ValueError("cdf requires at least one sample")
    probs = np.arange(1, values.size + 1) / values.size
    return list(zip(values.tolist(), probs.tolist()))
