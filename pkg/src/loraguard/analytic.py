"""Renewal model of urgent-uplink loss caused by downlink control traffic.

An urgent uplink is destroyed when its half-duplex gateway is transmitting a
control downlink at any point during the uplink.  Each of the N report
senders renews every T seconds with Gaussian clock jitter (std sigma), and a
decoded report provokes a downlink of airtime tau; the urgent uplink itself
lasts D.  From the uplink's viewpoint the time until sender n's next downlink
is the residual time r of that renewal process, with density

    w(x) = (1 - F_r(x)) / T,    F_r = CDF of Normal(T, sigma),

so the uplink collides with sender n's downlink iff r < tau_n + D.  The
collision-free probability multiplies the per-sender survival terms:

    P_free = prod_n (1 - I(tau_n + D) / T),  I(delta) = int_0^delta (1 - F_r(x)) dx.

Three evaluators are provided: exact per-sender airtimes, independent
discrete mixtures of airtimes, and the small-loss linear approximation
PLR = N (E[tau] + E[D]) / T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.integrate import quad

#: Results are flagged out-of-regime when tau + D comes within this many
#: sigmas of the period, where the residual-density truncation at 0 matters.
REGIME_SIGMAS = 5.0


def _gaussian_cdf(x: float, mean: float, sigma: float) -> float:
    if sigma == 0.0:
        return 1.0 if x >= mean else 0.0
    return 0.5 * (1.0 + math.erf((x - mean) / (sigma * math.sqrt(2.0))))


def residual_density(x: float, period_s: float, sigma_s: float) -> float:
    """Density w(x) of the residual time to the next renewal."""
    _validate_process(period_s, sigma_s)
    if x < 0:
        raise ValueError(f"residual time must be >= 0, got {x}")
    return (1.0 - _gaussian_cdf(x, period_s, sigma_s)) / period_s


def survivor_integral(delta_s: float, period_s: float, sigma_s: float) -> float:
    """I(delta) = integral of (1 - F_r) from 0 to delta.

    For sigma = 0 this is exactly min(delta, T); otherwise it is evaluated by
    adaptive Gauss-Kronrod quadrature to 1e-10 absolute tolerance.
    """
    _validate_process(period_s, sigma_s)
    if delta_s < 0:
        raise ValueError(f"delta must be >= 0, got {delta_s}")
    if sigma_s == 0.0:
        return min(delta_s, period_s)
    value, _err = quad(lambda x: 1.0 - _gaussian_cdf(x, period_s, sigma_s),
                       0.0, delta_s, epsabs=1e-10, limit=200)
    return value


def _validate_process(period_s: float, sigma_s: float) -> None:
    if period_s <= 0:
        raise ValueError(f"period must be > 0, got {period_s}")
    if sigma_s < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma_s}")


def _in_regime(max_block_s: float, period_s: float, sigma_s: float) -> bool:
    return max_block_s < period_s - REGIME_SIGMAS * sigma_s


@dataclass(frozen=True)
class PlrResult:
    """Loss estimate for one urgent uplink against N downlink senders.

    ``in_regime`` is False when the blocking interval approaches the renewal
    period (within 5 sigma), where the model's truncation assumptions fray.
    For the exact and marginal methods ``plr == 1 - collision_free_probability``;
    the approximate method reports its own linearized PLR alongside the
    product-form collision-free probability, which are not exact complements.
    """

    plr: float
    collision_free_probability: float
    method: str
    in_regime: bool


@dataclass(frozen=True)
class PlrModelParams:
    """Inputs for the mixture evaluator.

    Airtime distributions are (value_s, probability) pairs; probabilities
    must each sum to 1 within 1e-9.
    """

    n_senders: int
    period_s: float
    sigma_s: float
    dcp_airtimes: tuple[tuple[float, float], ...]
    up_airtimes: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if self.n_senders < 0:
            raise ValueError(f"n_senders must be >= 0, got {self.n_senders}")
        _validate_process(self.period_s, self.sigma_s)
        for label, dist in (("dcp", self.dcp_airtimes), ("up", self.up_airtimes)):
            if not dist:
                raise ValueError(f"{label} airtime distribution is empty")
            for value, prob in dist:
                if value < 0:
                    raise ValueError(f"{label} airtime {value} must be >= 0")
                if prob < 0:
                    raise ValueError(f"{label} probability {prob} must be >= 0")
            total = math.fsum(p for _v, p in dist)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{label} probabilities sum to {total}, expected 1")


def plr_exact_fixed(dcp_airtimes_s: Sequence[float], up_airtime_s: float,
                    period_s: float, sigma_s: float) -> PlrResult:
    """Collision-free product with one fixed downlink airtime per sender."""
    _validate_process(period_s, sigma_s)
    if up_airtime_s < 0:
        raise ValueError(f"up airtime must be >= 0, got {up_airtime_s}")
    factors = []
    max_block = 0.0
    for tau in dcp_airtimes_s:
        if tau < 0:
            raise ValueError(f"dcp airtime must be >= 0, got {tau}")
        block = tau + up_airtime_s
        max_block = max(max_block, block)
        factor = 1.0 - survivor_integral(block, period_s, sigma_s) / period_s
        if factor <= 0.0:
            raise ValueError(
                f"blocking interval {block} s saturates the period {period_s} s")
        factors.append(factor)
    p_free = math.prod(factors)
    return PlrResult(plr=1.0 - p_free, collision_free_probability=p_free,
                     method="exact", in_regime=_in_regime(max_block, period_s, sigma_s))


def plr_marginal(params: PlrModelParams) -> PlrResult:
    """Collision-free probability with airtimes drawn from discrete mixtures.

    Senders are interchangeable: the per-sender survival is the mixture
    average of (1 - I(tau + D)/T), raised to the N-th power.
    """
    terms = []
    max_block = 0.0
    for tau, p_tau in params.dcp_airtimes:
        for d, p_d in params.up_airtimes:
            block = tau + d
            max_block = max(max_block, block)
            factor = 1.0 - survivor_integral(block, params.period_s,
                                             params.sigma_s) / params.period_s
            if factor <= 0.0:
                raise ValueError(
                    f"blocking interval {block} s saturates the period "
                    f"{params.period_s} s")
            terms.append(p_tau * p_d * factor)
    per_sender = math.fsum(terms)
    p_free = per_sender ** params.n_senders
    return PlrResult(plr=1.0 - p_free, collision_free_probability=p_free,
                     method="marginal",
                     in_regime=_in_regime(max_block, params.period_s, params.sigma_s))


def plr_approx(n_senders: int, mean_dcp_s: float, mean_up_s: float,
               period_s: float) -> PlrResult:
    """Small-loss linearization: PLR = N (E[tau] + E[D]) / T.

    Valid when N*(E[tau]+E[D])/T is small (<= 0.02 keeps it within 1% of the
    exact product); the PLR is clamped at 1 outside any sane regime.
    """
    if n_senders < 0:
        raise ValueError(f"n_senders must be >= 0, got {n_senders}")
    _validate_process(period_s, 0.0)
    if mean_dcp_s < 0 or mean_up_s < 0:
        raise ValueError("mean airtimes must be >= 0")
    block = mean_dcp_s + mean_up_s
    if block >= period_s:
        raise ValueError(f"blocking interval {block} s saturates the period {period_s} s")
    plr = min(1.0, n_senders * block / period_s)
    p_free = (1.0 - block / period_s) ** n_senders
    return PlrResult(plr=plr, collision_free_probability=p_free, method="approx",
                     in_regime=n_senders * block / period_s <= 0.02)
